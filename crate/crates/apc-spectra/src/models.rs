//! Periodic moving-average models: seedable simulation, exact
//! autocovariances, their Fourier coefficients, and the resulting
//! closed-form spectral truth over the bifrequency square.
//!
//! A model with period `T`, innovation standard deviation `σ` and
//! coefficient sequences `θ_q(·)` (period `T`, lags `q ≥ 1`) generates
//!
//! ```text
//! X_t = Σ_q θ_q(t − q) ε_{t−q} + ε_t,   ε_t i.i.d. N(0, σ²).
//! ```
//!
//! The autocovariance support is finite, so the spectral density extension
//! is a finite trigonometric sum supported on the lines `ν − ω ≡ 2πk/T`,
//! which is what makes these models usable as exact ground truth.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::asymptotics::SpectralTruth;
use crate::core::{BifrequencyPoint, ComplexValue, TimeSeries};
use crate::error::{Error, Result};

/// Tolerance for deciding whether `ν − ω` lies on a support line `2πk/T`.
/// Truth functions are evaluated at constructed grid points, so this only
/// has to absorb canonicalization rounding.
const SUPPORT_TOLERANCE: f64 = 1e-9;

/// A periodic moving-average model specification.
#[derive(Debug, Clone)]
pub struct PeriodicMAModel {
    period: usize,
    /// Lag `q ≥ 1` to the period-`T` coefficient sequence `θ_q(0..T)`.
    coeffs: BTreeMap<usize, Vec<f64>>,
    innovation_sd: f64,
}

impl PeriodicMAModel {
    pub fn new(
        period: usize,
        coeffs: BTreeMap<usize, Vec<f64>>,
        innovation_sd: f64,
    ) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("period must be at least 1"));
        }
        if !(innovation_sd.is_finite() && innovation_sd >= 0.0) {
            return Err(Error::invalid(format!(
                "innovation standard deviation must be finite and nonnegative, got {innovation_sd}"
            )));
        }
        for (&q, theta) in &coeffs {
            if q == 0 {
                return Err(Error::invalid("lag-0 coefficient is fixed to 1; use q >= 1"));
            }
            if theta.len() != period {
                return Err(Error::invalid(format!(
                    "coefficient sequence for lag {q} has length {}, expected the period {period}",
                    theta.len()
                )));
            }
            if theta.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at lag {q}")));
            }
        }
        Ok(PeriodicMAModel { period, coeffs, innovation_sd })
    }

    /// The order-one model `X_t = θ(t−1) ε_{t−1} + ε_t` with
    /// `θ(t) = (2 + sin(2πt/T))²` and unit innovations.
    pub fn pma1(period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("period must be at least 1"));
        }
        let theta: Vec<f64> = (0..period)
            .map(|t| (2.0 + (TAU * t as f64 / period as f64).sin()).powi(2))
            .collect();
        PeriodicMAModel::new(period, BTreeMap::from([(1, theta)]), 1.0)
    }

    /// The stationary order-two model `X_t = 2ε_{t−2} + ε_{t−1} + ε_t`.
    pub fn ma2() -> Self {
        PeriodicMAModel::new(1, BTreeMap::from([(1, vec![1.0]), (2, vec![2.0])]), 1.0)
            .expect("static spec is valid")
    }

    /// Stationary white noise with the given standard deviation.
    pub fn white_noise(sd: f64) -> Result<Self> {
        PeriodicMAModel::new(1, BTreeMap::new(), sd)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn innovation_sd(&self) -> f64 {
        self.innovation_sd
    }

    pub fn max_lag(&self) -> usize {
        self.coeffs.keys().copied().max().unwrap_or(0)
    }

    /// Coefficient of `ε_{t−q}` in `X_t`.
    fn ma_coefficient(&self, q: usize, t: i64) -> f64 {
        if q == 0 {
            return 1.0;
        }
        match self.coeffs.get(&q) {
            Some(theta) => {
                let idx = (t - q as i64).rem_euclid(self.period as i64) as usize;
                theta[idx]
            }
            None => 0.0,
        }
    }

    /// Exact autocovariance `B(t, τ) = cov(X_t, X_{t+τ})` by finite
    /// convolution of the coefficient sequences.
    pub fn autocovariance(&self, t: i64, tau: i64) -> f64 {
        if tau < 0 {
            return self.autocovariance(t + tau, -tau);
        }
        let q_max = self.max_lag() as i64;
        if tau > q_max {
            return 0.0;
        }
        let var = self.innovation_sd * self.innovation_sd;
        let mut acc = 0.0;
        for q in 0..=(q_max - tau) {
            acc += self.ma_coefficient(q as usize, t) * self.ma_coefficient((q + tau) as usize, t + tau);
        }
        acc * var
    }

    /// Fourier coefficient `a(2πk/T, τ)` of the autocovariance in `t`,
    /// as the exact finite sum over one period.
    pub fn fourier_coefficient(&self, k: usize, tau: i64) -> ComplexValue {
        let t_len = self.period as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..self.period {
            let angle = -TAU * k as f64 * t as f64 / t_len;
            acc += Complex64::from_polar(self.autocovariance(t as i64, tau), angle);
        }
        acc / t_len
    }

    /// The exact spectral truth of this model: `P(ν, ω)` is a finite
    /// trigonometric sum on the support lines `ν − ω ≡ 2πk/T` and zero
    /// elsewhere.
    pub fn spectral_truth(&self) -> ModelSpectralTruth {
        let q = self.max_lag() as i64;
        let a: Vec<Vec<Complex64>> = (0..self.period)
            .map(|k| (-q..=q).map(|tau| self.fourier_coefficient(k, tau)).collect())
            .collect();
        ModelSpectralTruth { period: self.period, max_lag: q, a }
    }

    /// Simulates `X_1, …, X_n` (start index 0). The innovations before time
    /// one needed by the moving average are drawn and discarded internally;
    /// the stream is a fixed function of the seed.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeries> {
        if n == 0 {
            return Err(Error::invalid("simulation length must be at least 1"));
        }
        let q = self.max_lag();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // eps[i] is the innovation at absolute time t = i + 1 − q.
        let eps: Vec<f64> = (0..n + q)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.innovation_sd * z
            })
            .collect();
        let samples: Vec<f64> = (1..=n as i64)
            .map(|t| {
                let mut x = eps[(t as usize) + q - 1];
                for &lag in self.coeffs.keys() {
                    let coeff = self.ma_coefficient(lag, t);
                    x += coeff * eps[(t as usize) + q - 1 - lag];
                }
                x
            })
            .collect();
        TimeSeries::new(0, samples)
    }
}

/// Exact spectral truth of a [`PeriodicMAModel`], precomputed as a table of
/// Fourier coefficients.
#[derive(Debug, Clone)]
pub struct ModelSpectralTruth {
    period: usize,
    max_lag: i64,
    /// `a[k][τ + max_lag]` is the coefficient at frequency `2πk/T`, lag `τ`.
    a: Vec<Vec<Complex64>>,
}

impl ModelSpectralTruth {
    /// The support line index `k` with `ν − ω ≡ 2πk/T (mod 2π)`, if the
    /// difference lies within tolerance of the grid.
    fn support_line(&self, nu: f64, omega: f64) -> Option<usize> {
        let delta = (nu - omega).rem_euclid(TAU);
        let t = self.period as f64;
        let kf = (delta * t / TAU).round();
        let dist = (delta - kf * TAU / t).abs();
        if dist <= SUPPORT_TOLERANCE {
            Some((kf as usize) % self.period)
        } else {
            None
        }
    }
}

impl SpectralTruth for ModelSpectralTruth {
    fn p(&self, point: BifrequencyPoint) -> ComplexValue {
        let nu = point.nu.radians();
        match self.support_line(nu, point.omega.radians()) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &a) in self.a[k].iter().enumerate() {
                    let tau = i as i64 - self.max_lag;
                    acc += a * Complex64::from_polar(1.0, -nu * tau as f64);
                }
                acc / TAU
            }
        }
    }
}
