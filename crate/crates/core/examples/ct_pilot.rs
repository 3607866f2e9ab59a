use horseshoe_core::diagnostics::{iact, mean, relative_error};
use horseshoe_core::experiment::{make_phantom, nonzero_increments, PhantomKind};
use horseshoe_core::operators::{forward_data, DifferenceOperator, Dimensionality, FanBeamProjector, LinearOperator};
use horseshoe_core::prior::HorseshoeParams;
use horseshoe_core::sampler::{run_gibbs, GibbsConfig, Pi1Strategy, StorageMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn top_k_hit_rate(w_mean: &[f64], truth: &[usize]) -> f64 {
    let k = truth.len();
    let mut idx: Vec<usize> = (0..w_mean.len()).collect();
    idx.sort_by(|&a, &b| w_mean[b].partial_cmp(&w_mean[a]).unwrap());
    let top: std::collections::HashSet<usize> = idx[..k].iter().cloned().collect();
    truth.iter().filter(|i| top.contains(i)).count() as f64 / k as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(32);
    let p: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64);
    let q: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(32);
    let ns: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1500);
    let nb: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(250);
    let seed: u64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0);

    let op = FanBeamProjector::new(n, p, q).unwrap();
    let l = DifferenceOperator::new(Dimensionality::Two, n).unwrap();
    let phantom = make_phantom(PhantomKind::Grains2d, n, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(6);
    let (y, sigma_true) = forward_data(&op, &phantom.values, 0.01, &mut rng);
    eprintln!("n={n} p={p} q={q} d={} m={} sigma_true={sigma_true:.4e}", n*n, p*q);

    let cfg = GibbsConfig {
        n_samples: ns, burn_in: nb, thinning: 1,
        strategy: Pi1Strategy::Direct, cgls_tol: 1e-6, cgls_max_iter: None,
        seed, storage: StorageMode::Moments,
    };
    let t0 = Instant::now();
    let out = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &cfg).unwrap();
    let wall = t0.elapsed().as_secs_f64();
    eprintln!("sweeps {} wall {:.1}s ({:.1} ms/sweep)", nb + ns, wall, 1e3*wall/(nb+ns) as f64);

    let relerr = relative_error(&out.x_mean, &phantom.values);
    eprintln!("relerr(mean) {relerr:.4}");
    let sigma_chain: Vec<f64> = out.sigma2_chain.iter().map(|v| v.sqrt()).collect();
    let tau_chain: Vec<f64> = out.tau2_chain.iter().map(|v| v.sqrt()).collect();
    eprintln!("sigma_obs mean {:.4e} (true {:.4e})  tau mean {:.4e}", mean(&sigma_chain), sigma_true, mean(&tau_chain));
    for nt in [1usize, 2, 5, 10, 20] {
        let s: Vec<f64> = sigma_chain.iter().step_by(nt).cloned().collect();
        let t: Vec<f64> = tau_chain.iter().step_by(nt).cloned().collect();
        eprintln!("  nt={nt:>2}: IACT(sigma) {:.2}  IACT(tau) {:.2}  (len {})", iact(&s), iact(&t), s.len());
    }
    let truth = nonzero_increments(&l, &phantom.values);
    eprintln!("true boundary increments k={}", truth.len());
    eprintln!("hit rate {:.3}", top_k_hit_rate(&out.w_mean, &truth));
}
