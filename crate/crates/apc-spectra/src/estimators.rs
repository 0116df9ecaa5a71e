//! Bifrequency estimators: the raw double-sum estimator, the lag-window
//! smoothed estimator, the magnitude-of-coherence statistic, and the
//! demeaned variant that removes a known almost-periodic mean first.
//!
//! All phase factors use absolute time indices (`start_index` honored), so
//! an estimate over a block of a longer series equals the estimate computed
//! from the block alone. The smoothed estimator is evaluated through its
//! lag-sum rewrite
//!
//! ```text
//! G(ν, ω) = (2π d)⁻¹ Σ_{τ=−L..L} H_L(τ) e^{−iντ} Σ_t X_{t+τ} X_t e^{−i(ν−ω)t}
//! ```
//!
//! which costs O(d·L) instead of O(d²); the grid scan evaluates irregular
//! point sets and L stays tiny at paper scale, so lag sums beat FFT batching
//! here. The literal O(d²) double sum lives in [`crate::testkit`] as an
//! independent oracle.

use num_complex::Complex64;

use crate::core::{BifrequencyPoint, ComplexValue, Frequency, TimeSeries};
use crate::error::{Error, Result};
use crate::windows::LagWindowSpec;

/// A complex bifrequency estimate plus the metadata needed to recover its
/// normalization `√(n/L)`.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    pub point: BifrequencyPoint,
    pub value: ComplexValue,
    /// Sample length the estimate was computed from.
    pub n: usize,
    /// Bandwidth used; equals `n` for the raw (unsmoothed) estimator.
    pub bandwidth: usize,
    pub window: LagWindowSpec,
}

impl SpectralEstimate {
    /// The normalization `√(n/L)` of the limit theorems.
    pub fn normalizer(&self) -> f64 {
        (self.n as f64 / self.bandwidth as f64).sqrt()
    }
}

/// A known, finite set of mean frequencies `Γ` for the demeaned estimator.
/// Empty means the series is already centered.
#[derive(Debug, Clone, Default)]
pub struct MeanSpec {
    frequencies: Vec<Frequency>,
}

impl MeanSpec {
    pub fn new(frequencies: Vec<Frequency>) -> Result<Self> {
        for (i, f) in frequencies.iter().enumerate() {
            if frequencies[..i].contains(f) {
                return Err(Error::invalid(format!(
                    "duplicate mean frequency {} rad",
                    f.radians()
                )));
            }
        }
        Ok(MeanSpec { frequencies })
    }

    pub fn empty() -> Self {
        MeanSpec::default()
    }

    pub fn frequencies(&self) -> &[Frequency] {
        &self.frequencies
    }

    /// Whether `Γ` contains `−γ (mod 2π)` for each of its members, which
    /// makes the reconstructed mean real. Matching is up to a tiny circular
    /// distance so that `5π/3` pairs with `2π − π/3` despite rounding.
    pub fn is_closed_under_negation(&self) -> bool {
        let close = |a: Frequency, b: Frequency| {
            let d = (a.radians() - b.radians()).abs();
            d.min(std::f64::consts::TAU - d) <= 1e-12
        };
        self.frequencies
            .iter()
            .all(|&f| self.frequencies.iter().any(|&g| close(f.reflected(), g)))
    }
}

/// Precomputed state for evaluating the smoothed estimator at one
/// bifrequency point over many sub-blocks of the same series: the lag
/// weights, the per-lag phase `H_L(τ) e^{−iντ}`, and the per-sample phase
/// `e^{−i(ν−ω)t}` at absolute times. All block evaluations sum in a fixed
/// ascending order, so results are independent of evaluation order.
pub(crate) struct LagPlan<'a> {
    samples: &'a [f64],
    bandwidth: usize,
    tau_phase: Vec<Complex64>,
    sample_phase: Vec<Complex64>,
}

impl<'a> LagPlan<'a> {
    pub(crate) fn new(
        x: &'a TimeSeries,
        window: &LagWindowSpec,
        bandwidth: usize,
        point: BifrequencyPoint,
    ) -> Result<Self> {
        if bandwidth == 0 {
            return Err(Error::invalid("bandwidth L must be at least 1"));
        }
        if bandwidth >= x.len() {
            return Err(Error::invalid(format!(
                "bandwidth L = {bandwidth} must be smaller than the sample length {}",
                x.len()
            )));
        }
        let weights = window.lag_weights(bandwidth)?;
        let nu = point.nu.radians();
        let delta = nu - point.omega.radians();
        let l = bandwidth as i64;
        let tau_phase = (-l..=l)
            .map(|tau| {
                Complex64::from_polar(1.0, -nu * tau as f64) * weights[(tau + l) as usize]
            })
            .collect();
        let sample_phase = (0..x.len())
            .map(|i| Complex64::from_polar(1.0, -delta * x.absolute_index(i) as f64))
            .collect();
        Ok(LagPlan {
            samples: x.samples(),
            bandwidth,
            tau_phase,
            sample_phase,
        })
    }

    /// Evaluates the length-`b` block starting at sample offset `i0`.
    pub(crate) fn eval_block(&self, i0: usize, b: usize) -> Complex64 {
        debug_assert!(b > self.bandwidth && i0 + b <= self.samples.len());
        let l = self.bandwidth as i64;
        let mut total = Complex64::new(0.0, 0.0);
        for tau in -l..=l {
            let lo = i0 + (-tau).max(0) as usize;
            let hi = i0 + b - 1 - tau.max(0) as usize;
            let mut inner = Complex64::new(0.0, 0.0);
            for i in lo..=hi {
                let prod = self.samples[(i as i64 + tau) as usize] * self.samples[i];
                inner += self.sample_phase[i] * prod;
            }
            total += self.tau_phase[(tau + l) as usize] * inner;
        }
        total / (std::f64::consts::TAU * b as f64)
    }
}

/// The raw (unsmoothed) estimator of `P(ν, ω)`:
/// `(2π d)⁻¹ Σ_{s,t} X_s X_t e^{−iνs} e^{iωt}` over the full block. Its mean
/// converges to `P(ν, ω)` but it is not mean-square consistent, which is why
/// everything downstream uses the smoothed estimator instead.
pub fn raw_bispectral(x: &TimeSeries, point: BifrequencyPoint) -> SpectralEstimate {
    let d = x.len();
    // The double sum factorizes into A(ν) · conj(A(ω)) for real samples.
    let linear = |f: Frequency| -> Complex64 {
        let angle = -f.radians();
        x.samples()
            .iter()
            .enumerate()
            .map(|(i, &v)| Complex64::from_polar(v, angle * x.absolute_index(i) as f64))
            .sum()
    };
    let value = linear(point.nu) * linear(point.omega).conj() / (std::f64::consts::TAU * d as f64);
    SpectralEstimate {
        point,
        value,
        n: d,
        bandwidth: d,
        window: LagWindowSpec::Truncated,
    }
}

/// The lag-window smoothed estimator of `P(ν, ω)` with bandwidth `L`.
pub fn smoothed_bispectral(
    x: &TimeSeries,
    window: &LagWindowSpec,
    bandwidth: usize,
    point: BifrequencyPoint,
) -> Result<SpectralEstimate> {
    let plan = LagPlan::new(x, window, bandwidth, point)?;
    Ok(SpectralEstimate {
        point,
        value: plan.eval_block(0, x.len()),
        n: x.len(),
        bandwidth,
        window: window.clone(),
    })
}

/// The magnitude-of-coherence statistic
/// `|G(ν, ω)| / √(|Re G(ν, ν) · Re G(ω, ω)|)`. Equals one on the diagonal.
/// A vanishing denominator is an error carrying the two diagonal values;
/// the scan layer records such points as undetermined rather than letting
/// unbounded ratios poison rejection maps.
pub fn coherence_stat(
    x: &TimeSeries,
    window: &LagWindowSpec,
    bandwidth: usize,
    point: BifrequencyPoint,
) -> Result<f64> {
    let g = smoothed_bispectral(x, window, bandwidth, point)?;
    let g_nu = smoothed_bispectral(x, window, bandwidth, BifrequencyPoint::diagonal(point.nu))?;
    let g_om = smoothed_bispectral(x, window, bandwidth, BifrequencyPoint::diagonal(point.omega))?;
    coherence_from_parts(g.value, g_nu.value.re, g_om.value.re)
}

pub(crate) fn coherence_from_parts(numerator: ComplexValue, g0_nu: f64, g0_omega: f64) -> Result<f64> {
    let denom = g0_nu * g0_omega;
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator { g0_nu, g0_omega });
    }
    Ok(numerator.norm() / denom.abs().sqrt())
}

/// The smoothed estimator applied to residuals after removing the estimated
/// almost-periodic mean `Σ_γ b(γ) e^{iγt}` with `Γ` known and finite. The
/// Fourier coefficients are estimated from the same block, so subsampling a
/// demeaned statistic re-estimates the mean per block.
pub fn demeaned_smoothed_bispectral(
    x: &TimeSeries,
    mean: &MeanSpec,
    window: &LagWindowSpec,
    bandwidth: usize,
    point: BifrequencyPoint,
) -> Result<SpectralEstimate> {
    if mean.frequencies().is_empty() {
        return smoothed_bispectral(x, window, bandwidth, point);
    }
    let d = x.len() as f64;
    let coefficients: Vec<(f64, Complex64)> = mean
        .frequencies()
        .iter()
        .map(|gamma| {
            let angle = -gamma.radians();
            let b: Complex64 = x
                .samples()
                .iter()
                .enumerate()
                .map(|(i, &v)| Complex64::from_polar(v, angle * x.absolute_index(i) as f64))
                .sum();
            (gamma.radians(), b / d)
        })
        .collect();
    let mut max_imag = 0.0_f64;
    let residuals: Vec<f64> = x
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = x.absolute_index(i) as f64;
            let mean_at_t: Complex64 = coefficients
                .iter()
                .map(|&(gamma, b)| b * Complex64::from_polar(1.0, gamma * t))
                .sum();
            max_imag = max_imag.max(mean_at_t.im.abs());
            // The mean function of a real series is real; any imaginary
            // residue is either rounding or an asymmetric Γ.
            v - mean_at_t.re
        })
        .collect();
    if !mean.is_closed_under_negation() {
        log::warn!(
            "mean frequency set is not closed under negation mod 2π; \
             discarded imaginary mean component up to {max_imag:.3e}"
        );
    }
    let centered = TimeSeries::new(x.start_index(), residuals)?;
    smoothed_bispectral(&centered, window, bandwidth, point)
}
