// Scratch probe: Monte Carlo noise floor of the posterior std estimate
// for the 1D deconvolution problem, measured as the disagreement of two
// independent direct chains. Also reports which coordinates dominate.
// Not part of the test suite.

use horseshoe_core::diagnostics::relative_error;
use horseshoe_core::experiment::{make_phantom, PhantomKind, CONV_KERNEL_WIDTH};
use horseshoe_core::operators::{
    forward_data, ConvolutionModel1D, DifferenceOperator, Dimensionality,
};
use horseshoe_core::prior::HorseshoeParams;
use horseshoe_core::sampler::{run_gibbs, GibbsConfig, Pi1Strategy, StorageMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 128;
    let op = ConvolutionModel1D::new(d, CONV_KERNEL_WIDTH).unwrap();
    let l = DifferenceOperator::new(Dimensionality::One, d).unwrap();
    let phantom = make_phantom(PhantomKind::PiecewiseConstant1d, d, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    rng.set_stream(6);
    let (y, _) = forward_data(&op, &phantom.values, 0.02, &mut rng);

    let grid: [(usize, usize, usize); 5] =
        [(2000, 500, 2), (2000, 500, 10), (5000, 1000, 10), (10000, 1000, 20), (20000, 2000, 40)];
    for (ns, nb, nt) in grid {
        let mk = |seed: u64| GibbsConfig {
            n_samples: ns,
            burn_in: nb,
            thinning: nt,
            strategy: Pi1Strategy::Direct,
            cgls_tol: 1e-6,
            cgls_max_iter: None,
            seed,
            storage: StorageMode::Moments,
        };
        let t0 = std::time::Instant::now();
        let a = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &mk(0)).unwrap();
        let b = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &mk(1)).unwrap();
        let rel_std = relative_error(&a.x_std, &b.x_std);
        let rel_mean = relative_error(&a.x_mean, &b.x_mean);

        // Largest per-coordinate std ratios, to see whether the floor is
        // a few outliers or spread across the vector.
        let mut ratios: Vec<(f64, usize)> = a
            .x_std
            .iter()
            .zip(&b.x_std)
            .enumerate()
            .map(|(i, (sa, sb))| {
                let r = (sa / sb).max(sb / sa);
                (r, i)
            })
            .collect();
        ratios.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
        let top: Vec<String> =
            ratios.iter().take(5).map(|(r, i)| format!("{i}:{r:.2}")).collect();

        // Relerr with the five worst coordinates removed.
        let drop: Vec<usize> = ratios.iter().take(5).map(|(_, i)| *i).collect();
        let fa: Vec<f64> = a
            .x_std
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, v)| *v)
            .collect();
        let fb: Vec<f64> = b
            .x_std
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, v)| *v)
            .collect();
        let rel_trim = relative_error(&fa, &fb);

        println!(
            "ns {ns} nb {nb} nt {nt}: relerr(std) {rel_std:.3e} trimmed {rel_trim:.3e} relerr(mean) {rel_mean:.3e} worst [{}] {:.0} s",
            top.join(" "),
            t0.elapsed().as_secs_f64()
        );
    }
}
