// Scratch probe: candidate chain scales for the preconditioning-benefit
// check. Same-seed direct vs iterative runs; the shared hyper-stream
// innovations act as common random numbers and cancel most Monte Carlo
// noise in the std comparison. Not part of the test suite.

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

    for (ns, nb, nt) in [(5000usize, 1000usize, 10usize), (10000, 1000, 20)] {
        let mk = |strategy: Pi1Strategy| GibbsConfig {
            n_samples: ns,
            burn_in: nb,
            thinning: nt,
            strategy,
            cgls_tol: 1e-4,
            cgls_max_iter: None,
            seed: 0,
            storage: StorageMode::Moments,
        };
        let t0 = std::time::Instant::now();
        let direct = run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &mk(Pi1Strategy::Direct))
            .unwrap();
        println!("ns {ns} nb {nb} nt {nt}: direct {:.0} s", t0.elapsed().as_secs_f64());
        for strategy in [Pi1Strategy::Pcgls, Pi1Strategy::Cgls] {
            let t0 = std::time::Instant::now();
            let out =
                run_gibbs(&op, &l, &y, &HorseshoeParams::default(), &mk(strategy)).unwrap();
            println!(
                "  {strategy:?}: relerr(std) {:.3e} relerr(mean) {:.3e} iters {:.1} nonconverged {}/{} {:.0} s",
                relative_error(&out.x_std, &direct.x_std),
                relative_error(&out.x_mean, &direct.x_mean),
                out.mean_cgls_iterations(),
                out.cgls_nonconverged,
                out.cgls_iterations.len(),
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
