// Scratch probe: CT-scale solver validation (path agreement of CGLS
// against the direct draw) and a candidate chain configuration for the
// N=64 fan-beam study. Not part of the test suite.

use horseshoe_core::diagnostics::{iact, mean, relative_error};
use horseshoe_core::experiment::{make_phantom, nonzero_increments, PhantomKind};
use horseshoe_core::operators::{
    forward_data, DifferenceOperator, Dimensionality, FanBeamProjector,
};
use horseshoe_core::prior::HorseshoeParams;
use horseshoe_core::sampler::{run_gibbs, GibbsConfig, Pi1Strategy, StorageMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::time::Instant;

fn hit_rate(scores: &[f64], truth: &HashSet<usize>, k: usize) -> f64 {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    idx[..k.min(idx.len())].iter().filter(|i| truth.contains(i)).count() as f64
        / k.min(idx.len()) as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(64);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0);
    let (p, q) = (n, n / 2);

    let op = FanBeamProjector::new(n, p, q).unwrap();
    let l = DifferenceOperator::new(Dimensionality::Two, n).unwrap();
    let phantom = make_phantom(PhantomKind::Grains2d, n, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(6);
    let (y, sigma_true) = forward_data(&op, &phantom.values, 0.01, &mut rng);
    println!("n={n} p={p} q={q} sigma_true={sigma_true:.4e} phantom seed {seed}");

    // Phase A: solver validation. Same-seed chains share the perturbation
    // variates, so per-sweep disagreement with the direct draw is pure
    // solver error until the paths decouple.
    let probe = GibbsConfig {
        n_samples: 60,
        burn_in: 0,
        thinning: 1,
        strategy: Pi1Strategy::Direct,
        cgls_tol: 1e-6,
        cgls_max_iter: None,
        seed,
        storage: StorageMode::Full,
    };
    let t0 = Instant::now();
    let dref = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &probe).unwrap();
    println!("direct 60 sweeps: {:.0} s", t0.elapsed().as_secs_f64());
    let dx = dref.x_samples.as_ref().unwrap();
    for tol in [1e-4, 1e-6] {
        let cfg = GibbsConfig { strategy: Pi1Strategy::Cgls, cgls_tol: tol, ..probe.clone() };
        let t0 = Instant::now();
        let out = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &cfg).unwrap();
        let cx = out.x_samples.as_ref().unwrap();
        let errs: Vec<f64> =
            dx.iter().zip(cx).map(|(a, b)| relative_error(b, a)).collect();
        let max = errs.iter().cloned().fold(0.0, f64::max);
        println!(
            "cgls tol {tol:.0e}: {:.0} s, mean iters {:.1}, nonconverged {}, path relerr last {:.2e} max {:.2e}",
            t0.elapsed().as_secs_f64(),
            out.mean_cgls_iterations(),
            out.cgls_nonconverged,
            errs.last().unwrap(),
            max
        );
    }

    // Phase B: candidate study configuration.
    let eq_cfg = GibbsConfig {
        n_samples: 150,
        burn_in: 300,
        thinning: 10,
        strategy: Pi1Strategy::Cgls,
        cgls_tol: 1e-6,
        cgls_max_iter: None,
        seed,
        storage: StorageMode::Moments,
    };
    let t0 = Instant::now();
    let out = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &eq_cfg).unwrap();
    let sweeps = eq_cfg.burn_in + eq_cfg.n_samples * eq_cfg.thinning;
    println!(
        "study: {sweeps} sweeps {:.0} s, mean iters {:.1}, nonconverged {}",
        t0.elapsed().as_secs_f64(),
        out.mean_cgls_iterations(),
        out.cgls_nonconverged
    );
    println!("relerr(mean) {:.4}", relative_error(&out.x_mean, &phantom.values));
    let sigma_chain: Vec<f64> = out.sigma2_chain.iter().map(|v| v.sqrt()).collect();
    let tau_chain: Vec<f64> = out.tau2_chain.iter().map(|v| v.sqrt()).collect();
    println!(
        "sigma mean {:.4e} (true {:.4e})  tau mean {:.4e}",
        mean(&sigma_chain),
        sigma_true,
        mean(&tau_chain)
    );
    println!(
        "IACT(sigma) {:.2}  IACT(tau) {:.2}  (nt=10, len {})",
        iact(&sigma_chain),
        iact(&tau_chain),
        sigma_chain.len()
    );

    let truth_all = nonzero_increments(&l, &phantom.values);
    let split = n * (n - 1);
    let truth: HashSet<usize> = truth_all.iter().cloned().collect();
    let truth1: HashSet<usize> = truth_all.iter().filter(|&&i| i < split).cloned().collect();
    let truth2: HashSet<usize> =
        truth_all.iter().filter(|&&i| i >= split).map(|i| i - split).collect();
    let w1 = &out.w_mean[..split];
    let w2: Vec<f64> = out.w_mean[split..].to_vec();
    println!(
        "truth: total {} dir1 {} dir2 {}",
        truth_all.len(),
        truth1.len(),
        truth2.len()
    );
    println!("pooled k=|truth| hit {:.3}", hit_rate(&out.w_mean, &truth, truth_all.len()));
    println!(
        "per-dir k=|truth_dir| hit1 {:.3} hit2 {:.3}",
        hit_rate(w1, &truth1, truth1.len()),
        hit_rate(&w2, &truth2, truth2.len())
    );
    for k in [50usize, 100, 200, 400] {
        println!(
            "head k={k:>3}: pooled {:.3}  dir1 {:.3}  dir2 {:.3}",
            hit_rate(&out.w_mean, &truth, k),
            hit_rate(w1, &truth1, k),
            hit_rate(&w2, &truth2, k)
        );
    }
}
