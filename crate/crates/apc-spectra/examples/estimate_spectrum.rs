//! Estimate the bifrequency spectral density along a support line and
//! compare with the model's closed-form truth.
//!
//! ```sh
//! cargo run --release --example estimate_spectrum
//! ```

use std::f64::consts::{PI, TAU};

use apc_spectra::asymptotics::SpectralTruth;
use apc_spectra::core::BifrequencyPoint;
use apc_spectra::estimators::{coherence_stat, smoothed_bispectral};
use apc_spectra::models::PeriodicMAModel;
use apc_spectra::subsampling::default_params;
use apc_spectra::windows::LagWindowSpec;

fn main() {
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let n = 20_000;
    let x = model.simulate(n, 7).unwrap();
    let window = LagWindowSpec::Truncated;
    let l = default_params(n).unwrap().l_n;

    // The density lives on lines ω = ν − λ; sweep ν on the λ = π/2 line.
    let lambda = PI / 2.0;
    println!("smoothed estimate along omega = nu - pi/2 (n = {n}, L = {l})");
    println!("   nu   |   |G|    |   |P|    | coherence");
    for k in (6..=120).step_by(114 / 6) {
        let nu = TAU * k as f64 / 120.0;
        let p = BifrequencyPoint::from_radians(nu, nu - lambda).unwrap();
        let est = smoothed_bispectral(&x, &window, l, p).unwrap();
        let gamma = coherence_stat(&x, &window, l, p).unwrap();
        println!(
            " {nu:6.3} | {:8.4} | {:8.4} |  {gamma:6.3}",
            est.value.norm(),
            truth.p(p).norm(),
        );
    }

    // Off the support the density is zero and the estimate is noise of
    // size O(√(L/n)).
    let p = BifrequencyPoint::from_radians(1.9, 0.6).unwrap();
    let est = smoothed_bispectral(&x, &window, l, p).unwrap();
    println!(
        "\noff-support point (1.9, 0.6): |G| = {:.4} (truth 0), scale sqrt(L/n) = {:.4}",
        est.value.norm(),
        (l as f64 / n as f64).sqrt()
    );

    // The raw estimator is unbiased but inconsistent; its scatter does not
    // shrink with n, which is why the smoothed one exists.
    let raw = apc_spectra::estimators::raw_bispectral(&x, p);
    println!("raw (unsmoothed) estimate there: |P̂| = {:.4}", raw.value.norm());
}
