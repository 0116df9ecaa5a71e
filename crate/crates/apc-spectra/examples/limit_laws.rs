//! The two asymptotic regimes of the normalized magnitude statistic: a
//! folded bivariate normal off the spectral support and a delta-method
//! Gaussian on it. Compares a subsampling distribution against draws from
//! the matching limit law.
//!
//! ```sh
//! cargo run --release --example limit_laws
//! ```

use std::f64::consts::PI;

use apc_spectra::asymptotics::{
    chi2_2_sf, limit_law_p, sample_limit_law, sigma_matrix, LimitLaw, SigmaVariant, SpectralTruth,
};
use apc_spectra::core::BifrequencyPoint;
use apc_spectra::models::PeriodicMAModel;
use apc_spectra::subsampling::{default_params, subsample_distribution_p};
use apc_spectra::testkit::ks_distance;
use apc_spectra::windows::LagWindowSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let window = LagWindowSpec::Truncated;
    let rho = window.rho();

    let on = BifrequencyPoint::from_radians(2.1, 2.1 - PI / 2.0).unwrap();
    let off = BifrequencyPoint::from_radians(PI / 2.0, PI / 3.0).unwrap();

    for (name, p) in [("on-support", on), ("off-support", off)] {
        let sigma = sigma_matrix(&truth, rho, p, SigmaVariant::KernelDerived);
        let law = limit_law_p(&truth, rho, p);
        match &law {
            LimitLaw::Normal { variance } => {
                println!("{name} point: P = {:.3}, Gaussian limit, variance {variance:.3}", truth.p(p))
            }
            LimitLaw::FoldedBivariateNormal { scale, .. } => println!(
                "{name} point: P = 0, folded normal limit, sigma = [{:.3}, {:.3}; ., {:.3}], scale {scale}",
                sigma.s11, sigma.s12, sigma.s22
            ),
        }

        // Subsampling approximates the same law without knowing which
        // regime applies; the Kolmogorov distance shrinks with n.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut law_draws = sample_limit_law(&law, &mut rng, 200_000).unwrap();
        law_draws.sort_unstable_by(f64::total_cmp);
        for n in [1000usize, 4000] {
            let x = model.simulate(n, 5).unwrap();
            let params = default_params(n).unwrap();
            let dist = subsample_distribution_p(&x, &window, &params, p).unwrap();
            let d = ks_distance(dist.values(), &law_draws).unwrap();
            println!("  n = {n:5}: KS(subsampling, limit law) = {d:.3}");
        }
    }

    // The studentized squared statistic is asymptotically chi-square(2);
    // its survival function is exactly exp(-x/2).
    println!(
        "\nchi-square(2) critical values: 10% -> {:.3}, 1% -> {:.3}",
        inverse_sf(0.10),
        inverse_sf(0.01)
    );

    fn inverse_sf(alpha: f64) -> f64 {
        // exp(-x/2) = alpha
        -2.0 * alpha.ln()
    }
    assert!((chi2_2_sf(inverse_sf(0.01)).unwrap() - 0.01).abs() < 1e-12);
}
