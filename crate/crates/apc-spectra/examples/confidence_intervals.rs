//! Subsampling confidence intervals for the magnitude of the spectral
//! density over a frequency sweep, with the exact truth alongside.
//!
//! ```sh
//! cargo run --release --example confidence_intervals
//! ```

use std::f64::consts::{PI, TAU};

use apc_spectra::asymptotics::SpectralTruth;
use apc_spectra::core::BifrequencyPoint;
use apc_spectra::models::PeriodicMAModel;
use apc_spectra::subsampling::{ci_coherence, ci_magnitude_p, default_params};
use apc_spectra::windows::LagWindowSpec;

fn main() {
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let n = 500;
    let x = model.simulate(n, 11).unwrap();
    let params = default_params(n).unwrap();
    let window = LagWindowSpec::Truncated;
    let lambda = PI;

    println!(
        "95% subsampling intervals for |P(nu, nu - pi)| at n = {n} \
         (L_n = {}, b = {}, L_b = {})",
        params.l_n, params.b, params.l_b
    );
    println!("   nu   |  truth  |    interval       | covers");
    let mut covered = 0;
    let sweep: Vec<usize> = (1..=24).map(|j| j * 5).collect();
    for &k in &sweep {
        let nu = TAU * k as f64 / 120.0;
        let p = BifrequencyPoint::from_radians(nu, nu - lambda).unwrap();
        let tv = truth.p(p).norm();
        let ci = ci_magnitude_p(&x, &window, &params, p, 0.95).unwrap();
        let hit = ci.lo <= tv && tv <= ci.hi;
        covered += usize::from(hit);
        println!(
            " {nu:6.3} | {tv:7.4} | [{:7.4}, {:7.4}] |   {}",
            ci.lo,
            ci.hi,
            if hit { "yes" } else { " no" }
        );
    }
    println!(
        "{covered}/{} intervals cover the truth on this single sample",
        sweep.len()
    );

    // Coherence intervals are clamped into [0, 1].
    let p = BifrequencyPoint::from_radians(2.0, 2.0 - PI / 2.0).unwrap();
    let ci = ci_coherence(&x, &window, &params, p, 0.95).unwrap();
    println!(
        "\ncoherence at (2.0, 2.0 - pi/2): estimate {:.3}, 95% CI [{:.3}, {:.3}]{}",
        ci.estimate,
        ci.lo,
        ci.hi,
        if ci.clamped_hi { " (upper end clamped at 1)" } else { "" }
    );
}
