//! Independent oracles for the acceptance suite and the hidden `verify`
//! subcommand: a literal double-sum evaluation of the smoothed estimator, a
//! Monte Carlo estimate of the asymptotic covariance kernel, and the
//! two-sample Kolmogorov distance.
//!
//! The oracles deliberately share no code with the production lag-sum path;
//! agreement between the two routes is the point of having them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::core::{BifrequencyPoint, ComplexValue, TimeSeries};
use crate::error::{Error, Result};
use crate::estimators;
use crate::models::PeriodicMAModel;
use crate::windows::LagWindowSpec;

/// One oracle-vs-candidate comparison, carrying both values and the
/// tolerance that was applied. `pass` holds when
/// `|oracle − candidate| ≤ tolerance · (1 + |oracle|)`.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub candidate: f64,
    pub absolute_deviation: f64,
    pub relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, oracle: f64, candidate: f64, tolerance: f64) -> Self {
        let absolute_deviation = (oracle - candidate).abs();
        let relative_deviation = absolute_deviation / (1.0 + oracle.abs());
        OracleReport {
            quantity: quantity.into(),
            oracle,
            candidate,
            absolute_deviation,
            relative_deviation,
            tolerance,
            pass: relative_deviation <= tolerance,
        }
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} | oracle {:.6e} candidate {:.6e} | abs dev {:.3e} rel dev {:.3e} tol {:.1e}",
            self.quantity,
            if self.pass { "PASS" } else { "FAIL" },
            self.oracle,
            self.candidate,
            self.absolute_deviation,
            self.relative_deviation,
            self.tolerance
        )
    }
}

/// Literal O(n²) double-sum evaluation of the smoothed estimator, phrased
/// directly from its definition with per-pair taper evaluation and phase
/// factors. Guarded to small samples.
pub fn brute_force_g(
    x: &TimeSeries,
    window: &LagWindowSpec,
    bandwidth: usize,
    point: BifrequencyPoint,
) -> Result<ComplexValue> {
    let d = x.len();
    if d > 4096 {
        return Err(Error::invalid(format!(
            "brute-force double sum is limited to 4096 samples, got {d}"
        )));
    }
    if bandwidth == 0 {
        return Err(Error::invalid("bandwidth L must be at least 1"));
    }
    let nu = point.nu.radians();
    let omega = point.omega.radians();
    let samples = x.samples();
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..d {
        let s_abs = x.absolute_index(s) as f64;
        for t in 0..d {
            let t_abs = x.absolute_index(t) as f64;
            let h = window.eval_taper((s as f64 - t as f64) / bandwidth as f64);
            if h == 0.0 {
                continue;
            }
            acc += Complex64::from_polar(h * samples[s] * samples[t], -nu * s_abs + omega * t_abs);
        }
    }
    Ok(acc / (std::f64::consts::TAU * d as f64))
}

/// Simulation estimate of the normalized covariance of the smoothed
/// estimator at a pair of bifrequency points, in both pairings:
/// `sesquilinear` estimates `(n/L) cov(G(p₁), conj G(p₂))`-style covariance
/// (conjugated second argument, the kernel's convention) and `bilinear`
/// the unconjugated one. Standard errors are per real component.
#[derive(Debug, Clone)]
pub struct McCovariance {
    pub sesquilinear: ComplexValue,
    pub bilinear: ComplexValue,
    pub se_sesquilinear: (f64, f64),
    pub se_bilinear: (f64, f64),
    pub replicates: usize,
}

/// Splitmix step for deriving independent per-replicate seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mc_covariance(
    model: &PeriodicMAModel,
    n: usize,
    bandwidth: usize,
    p1: BifrequencyPoint,
    p2: BifrequencyPoint,
    replicates: usize,
    seed: u64,
) -> Result<McCovariance> {
    if replicates < 100 {
        return Err(Error::invalid(format!(
            "at least 100 replicates are required, got {replicates}"
        )));
    }
    let window = LagWindowSpec::Truncated;
    let pairs: Vec<(Complex64, Complex64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(Complex64, Complex64)> {
            let x = model.simulate(n, derive_seed(seed, r))?;
            let g1 = estimators::smoothed_bispectral(&x, &window, bandwidth, p1)?.value;
            let g2 = estimators::smoothed_bispectral(&x, &window, bandwidth, p2)?.value;
            Ok((g1, g2))
        })
        .collect::<Result<_>>()?;

    let r = replicates as f64;
    let m1: Complex64 = pairs.iter().map(|p| p.0).sum::<Complex64>() / r;
    let m2: Complex64 = pairs.iter().map(|p| p.1).sum::<Complex64>() / r;
    let ratio = n as f64 / bandwidth as f64;

    let summarize = |conjugate: bool| -> (Complex64, (f64, f64)) {
        let terms: Vec<Complex64> = pairs
            .iter()
            .map(|(g1, g2)| {
                let c1 = *g1 - m1;
                let c2 = if conjugate { (*g2 - m2).conj() } else { *g2 - m2 };
                c1 * c2 * ratio
            })
            .collect();
        let mean = terms.iter().sum::<Complex64>() / r;
        let var_re = terms.iter().map(|t| (t.re - mean.re).powi(2)).sum::<f64>() / (r - 1.0);
        let var_im = terms.iter().map(|t| (t.im - mean.im).powi(2)).sum::<f64>() / (r - 1.0);
        // r/(r−1) debiasing of the covariance itself is negligible at the
        // replicate counts used here.
        (mean, ((var_re / r).sqrt(), (var_im / r).sqrt()))
    };

    let (sesq, se_sesq) = summarize(true);
    let (bilin, se_bilin) = summarize(false);
    Ok(McCovariance {
        sesquilinear: sesq,
        bilinear: bilin,
        se_sesquilinear: se_sesq,
        se_bilinear: se_bilin,
        replicates,
    })
}

/// Two-sample Kolmogorov statistic `sup_x |F_a(x) − F_b(x)|` for sorted
/// samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("both samples must be nonempty"));
    }
    debug_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] <= w[1]));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut sup: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::complex_cov_kernel;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pt(nu: f64, om: f64) -> BifrequencyPoint {
        BifrequencyPoint::from_radians(nu, om).unwrap()
    }

    #[test]
    fn brute_force_hand_enumeration() {
        let x = TimeSeries::new(0, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let v = brute_force_g(&x, &LagWindowSpec::Truncated, 1, pt(PI, PI)).unwrap();
        assert!((v.re - 5.0 / (4.0 * PI)).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn brute_force_full_band_equals_raw() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = TimeSeries::new(4, (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let p = pt(0.8, 2.6);
        let raw = estimators::raw_bispectral(&x, p).value;
        // L = n−1 makes the truncated window cover every index pair.
        let brute = brute_force_g(&x, &LagWindowSpec::Truncated, x.len() - 1, p).unwrap();
        assert!((raw - brute).norm() <= 1e-10 * (1.0 + raw.norm()));
    }

    #[test]
    fn brute_force_guards() {
        let x = TimeSeries::new(0, vec![1.0; 8]).unwrap();
        assert!(brute_force_g(&x, &LagWindowSpec::Truncated, 0, pt(1.0, 1.0)).is_err());
    }

    #[test]
    fn mc_covariance_zero_model() {
        let silent = PeriodicMAModel::white_noise(0.0).unwrap();
        let r = mc_covariance(&silent, 64, 3, pt(1.0, 1.0), pt(1.0, 1.0), 100, 1).unwrap();
        assert_eq!(r.sesquilinear, Complex64::new(0.0, 0.0));
        assert_eq!(r.bilinear, Complex64::new(0.0, 0.0));
        assert!(mc_covariance(&silent, 64, 3, pt(1.0, 1.0), pt(1.0, 1.0), 50, 1).is_err());
    }

    #[test]
    fn mc_covariance_white_noise_matches_kernel() {
        let model = PeriodicMAModel::white_noise(1.0).unwrap();
        let truth = model.spectral_truth();
        let p = pt(PI / 2.0, PI / 2.0);
        let rho = LagWindowSpec::Truncated.rho();
        let kernel = complex_cov_kernel(&truth, rho, p, p);
        let mc = mc_covariance(&model, 4000, 5, p, p, 300, 9).unwrap();
        let dev = (mc.sesquilinear.re - kernel.re).abs();
        let band = 3.0 * mc.se_sesquilinear.0 + 0.1 * kernel.re.abs();
        assert!(dev < band, "kernel {kernel}, mc {:?}", mc.sesquilinear);
    }

    #[test]
    fn ks_distance_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        let b = [10.0, 11.0];
        assert_eq!(ks_distance(&a, &b).unwrap(), 1.0);
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        let shifted: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        let d = ks_distance(&grid, &shifted).unwrap();
        assert!((d - 0.001).abs() < 1e-12, "{d}");
        assert!(ks_distance(&[], &a).is_err());
    }
}
