//! Spectral estimation for a series with a known almost-periodic mean:
//! estimate the Fourier coefficients of the mean over the given frequency
//! set, remove the reconstruction, and smooth the residuals.
//!
//! ```sh
//! cargo run --release --example demeaned_estimation
//! ```

use std::f64::consts::PI;

use apc_spectra::core::{BifrequencyPoint, Frequency, TimeSeries};
use apc_spectra::estimators::{demeaned_smoothed_bispectral, smoothed_bispectral, MeanSpec};
use apc_spectra::models::PeriodicMAModel;
use apc_spectra::windows::LagWindowSpec;

fn main() {
    let model = PeriodicMAModel::pma1(4).unwrap();
    let n = 6000;
    let noise = model.simulate(n, 23).unwrap();

    // Add a deterministic mean 3 + 2cos(2πt/6): frequencies 2π (the
    // constant) and ±π/3.
    let samples: Vec<f64> = noise
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = noise.absolute_index(i) as f64;
            3.0 + 2.0 * (PI * t / 3.0).cos() + v
        })
        .collect();
    let x = TimeSeries::new(0, samples).unwrap();

    let gamma = MeanSpec::new(vec![
        Frequency::new(0.0).unwrap(),
        Frequency::new(PI / 3.0).unwrap(),
        Frequency::new(-PI / 3.0).unwrap(),
    ])
    .unwrap();
    println!(
        "mean frequency set closed under negation: {}",
        gamma.is_closed_under_negation()
    );

    let window = LagWindowSpec::Truncated;
    let l = 6;
    let truth = model.spectral_truth();

    // The mean pollutes the estimate worst at its own frequencies: the
    // diagonal point (π/3, π/3) picks up the cosine component squared.
    println!("\npoint (nu, omega)      | truth |P| | plain est | demeaned est");
    for p in [
        BifrequencyPoint::from_radians(PI / 3.0, PI / 3.0).unwrap(),
        BifrequencyPoint::from_radians(2.0, 2.0 - PI / 2.0).unwrap(),
    ] {
        let plain = smoothed_bispectral(&x, &window, l, p).unwrap();
        let demeaned = demeaned_smoothed_bispectral(&x, &gamma, &window, l, p).unwrap();
        let exact = apc_spectra::asymptotics::SpectralTruth::p(&truth, p).norm();
        println!(
            "({:5.3}, {:5.3})        |   {exact:6.3}  |  {:7.3}  |   {:7.3}",
            p.nu.radians(),
            p.omega.radians(),
            plain.value.norm(),
            demeaned.value.norm()
        );
    }
}
