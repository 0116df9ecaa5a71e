//! Lag windows for smoothed bifrequency estimation: taper evaluation, the
//! discrete weights `H_L(τ) = w(τ/L)`, and the constant `ρ = ∫ w²`.
//!
//! Every window satisfies the same contract: the taper `w` is even, vanishes
//! outside `[−1, 1]`, is non-increasing on `[0, 1]`, equals one on `[0, θ]`
//! for some `θ ∈ (0, 1]`, and is Lipschitz on `[−1, 1]`. Custom tapers are
//! validated against that contract on a dense grid at construction time.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Grid resolution used to validate custom tapers.
const VALIDATION_POINTS: usize = 10_001;

/// A taper satisfying the lag-window contract.
#[derive(Clone, Default)]
pub enum LagWindowSpec {
    /// Indicator of `[−1, 1]`; `θ = 1`, `ρ = 2`. The default window.
    #[default]
    Truncated,
    /// One on `[0, θ]`, linear down to zero at one.
    FlatTopTrapezoid { theta: f64 },
    /// User-supplied taper with declared flat-top width and Lipschitz constant.
    Custom(CustomWindow),
}

#[derive(Clone)]
pub struct CustomWindow {
    taper: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    theta: f64,
    lipschitz: f64,
}

impl LagWindowSpec {
    pub fn truncated() -> Self {
        LagWindowSpec::Truncated
    }

    pub fn flat_top_trapezoid(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::invalid(format!(
                "trapezoid flat-top width must lie in (0, 1], got {theta}"
            )));
        }
        Ok(LagWindowSpec::FlatTopTrapezoid { theta })
    }

    /// Wraps an arbitrary taper after checking the window contract on a
    /// 10,001-point grid; the contract is a theorem precondition, so
    /// violations are rejected here rather than silently degrading results.
    pub fn custom(
        taper: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::invalid(format!(
                "flat-top width must lie in (0, 1], got {theta}"
            )));
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::invalid(format!(
                "Lipschitz constant must be finite and nonnegative, got {lipschitz}"
            )));
        }
        let w = CustomWindow {
            taper: Arc::new(taper),
            theta,
            lipschitz,
        };
        w.validate()?;
        Ok(LagWindowSpec::Custom(w))
    }

    /// Declared flat-top width `θ`.
    pub fn theta(&self) -> f64 {
        match self {
            LagWindowSpec::Truncated => 1.0,
            LagWindowSpec::FlatTopTrapezoid { theta } => *theta,
            LagWindowSpec::Custom(w) => w.theta,
        }
    }

    /// Evaluates the taper at any real point.
    pub fn eval_taper(&self, x: f64) -> f64 {
        let a = x.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            LagWindowSpec::Truncated => 1.0,
            LagWindowSpec::FlatTopTrapezoid { theta } => {
                if a <= *theta || *theta >= 1.0 {
                    1.0
                } else {
                    (1.0 - a) / (1.0 - theta)
                }
            }
            LagWindowSpec::Custom(w) => (w.taper)(x),
        }
    }

    /// Discrete weights `w(τ/L)` for `τ = −L..=L`, indexed by `τ + L`.
    pub fn lag_weights(&self, bandwidth: usize) -> Result<Vec<f64>> {
        if bandwidth == 0 {
            return Err(Error::invalid("bandwidth L must be at least 1"));
        }
        let l = bandwidth as f64;
        Ok((-(bandwidth as i64)..=bandwidth as i64)
            .map(|tau| self.eval_taper(tau as f64 / l))
            .collect())
    }

    /// The asymptotic window constant `ρ = ∫_{−1}^{1} w²(x) dx`. Closed form
    /// for the built-ins, adaptive quadrature (abs. tol. 1e-10) otherwise.
    pub fn rho(&self) -> f64 {
        match self {
            LagWindowSpec::Truncated => 2.0,
            LagWindowSpec::FlatTopTrapezoid { theta } => 2.0 * theta + 2.0 * (1.0 - theta) / 3.0,
            LagWindowSpec::Custom(w) => {
                // w ≡ 1 on [0, θ]; integrate the tail and use evenness.
                let tail = adaptive_simpson(
                    &|x| {
                        let v = (w.taper)(x);
                        v * v
                    },
                    w.theta,
                    1.0,
                    1e-10,
                );
                2.0 * (w.theta + tail)
            }
        }
    }
}

impl CustomWindow {
    fn validate(&self) -> Result<()> {
        let f = &self.taper;
        for probe in [1.0 + 1e-9, 1.5, 2.0, 10.0, -1.0001, -3.0] {
            if f(probe) != 0.0 {
                return Err(Error::invalid(format!(
                    "taper must vanish outside [-1, 1]; w({probe}) = {}",
                    f(probe)
                )));
            }
        }
        let n = VALIDATION_POINTS;
        let h = 2.0 / (n - 1) as f64;
        let mut prev: Option<(f64, f64)> = None;
        for j in 0..n {
            let x = -1.0 + h * j as f64;
            let v = f(x);
            if !v.is_finite() || !(0.0..=1.0 + 1e-12).contains(&v) {
                return Err(Error::invalid(format!(
                    "taper values must lie in [0, 1]; w({x}) = {v}"
                )));
            }
            let sym = f(-x);
            if (v - sym).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "taper must be even; w({x}) = {v} but w({}) = {sym}",
                    -x
                )));
            }
            if x.abs() <= self.theta && (v - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "taper must equal 1 on [-θ, θ]; w({x}) = {v}"
                )));
            }
            if let Some((px, pv)) = prev {
                if px >= 0.0 && v > pv + 1e-12 {
                    return Err(Error::invalid(format!(
                        "taper must be non-increasing on [0, 1]; w({px}) = {pv} < w({x}) = {v}"
                    )));
                }
                if (v - pv).abs() > self.lipschitz * h + 1e-12 {
                    return Err(Error::invalid(format!(
                        "taper violates declared Lipschitz constant {} between {px} and {x}",
                        self.lipschitz
                    )));
                }
            }
            prev = Some((x, v));
        }
        Ok(())
    }
}

impl fmt::Debug for LagWindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagWindowSpec::Truncated => write!(f, "Truncated"),
            LagWindowSpec::FlatTopTrapezoid { theta } => {
                write!(f, "FlatTopTrapezoid(theta={theta})")
            }
            LagWindowSpec::Custom(w) => write!(
                f,
                "Custom(theta={}, lipschitz={})",
                w.theta, w.lipschitz
            ),
        }
    }
}

impl fmt::Display for LagWindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagWindowSpec::Truncated => write!(f, "truncated"),
            LagWindowSpec::FlatTopTrapezoid { theta } => write!(f, "trapezoid:{theta}"),
            LagWindowSpec::Custom(w) => write!(f, "custom:{}", w.theta),
        }
    }
}

/// Parses the CLI syntax `truncated` or `trapezoid:<theta>`.
impl FromStr for LagWindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("truncated") {
            return Ok(LagWindowSpec::Truncated);
        }
        if let Some(theta) = t.strip_prefix("trapezoid:") {
            let theta: f64 = theta
                .parse()
                .map_err(|_| Error::invalid(format!("cannot parse trapezoid width in {t:?}")))?;
            return LagWindowSpec::flat_top_trapezoid(theta);
        }
        Err(Error::invalid(format!(
            "unknown window {t:?}; expected truncated or trapezoid:<theta>"
        )))
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
