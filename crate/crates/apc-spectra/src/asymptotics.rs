//! Closed-form asymptotic covariance structures for the normalized smoothed
//! estimator, delta-method gradients for magnitude and coherence statistics,
//! samplers for the two limit laws, and the chi-square(2) reference law.
//!
//! Everything is driven by one covariance kernel. With `K(p₁, p₂)` the
//! kernel below and `reflect` the coordinate-wise `2π − ·` map, the real
//! bivariate covariance of `(Re G, Im G)` follows from the conjugation
//! identity `conj(G(ν, ω)) = G(2π−ν, 2π−ω)` for real series:
//!
//! ```text
//! Var(Re)       = (Re K(p, p) + Re K(p, reflect p)) / 2
//! Cov(Re, Im)   =  Im K(p, reflect p) / 2
//! Var(Im)       = (Re K(p, p) − Re K(p, reflect p)) / 2
//! ```

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::core::{BifrequencyPoint, ComplexValue, Frequency};
use crate::error::{Error, Result};

/// Eigenvalues of covariance matrices may dip this far below zero from
/// rounding; anything lower is treated as a real defect.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// A spectral truth: the density extension `P(ν, ω)` over the bifrequency
/// square and the diagonal density `g₀`. Implementations must be cheap to
/// call concurrently.
pub trait SpectralTruth: Send + Sync {
    fn p(&self, point: BifrequencyPoint) -> ComplexValue;

    fn g0(&self, f: Frequency) -> f64 {
        self.p(BifrequencyPoint::diagonal(f)).re
    }
}

/// Adapter turning a closure into a [`SpectralTruth`], handy for hand-built
/// truths in tests and plug-in estimates.
pub struct FnTruth<F>(pub F);

impl<F> SpectralTruth for FnTruth<F>
where
    F: Fn(BifrequencyPoint) -> ComplexValue + Send + Sync,
{
    fn p(&self, point: BifrequencyPoint) -> ComplexValue {
        (self.0)(point)
    }
}

/// Symmetric 2×2 covariance of `(Re G, Im G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2 {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl Cov2 {
    pub fn zero() -> Self {
        Cov2 { s11: 0.0, s12: 0.0, s22: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.s11 + self.s22);
        let disc = (0.25 * (self.s11 - self.s22).powi(2) + self.s12 * self.s12).sqrt();
        (mid + disc, mid - disc)
    }

    pub fn quadratic_form(&self, v: [f64; 2]) -> f64 {
        self.s11 * v[0] * v[0] + 2.0 * self.s12 * v[0] * v[1] + self.s22 * v[1] * v[1]
    }

    /// Symmetric square root via eigendecomposition so that zero-variance
    /// directions are handled uniformly. Eigenvalues in `[-tolerance, 0)`
    /// are clipped to zero; lower ones are an error.
    pub fn symmetric_sqrt(&self) -> Result<[[f64; 2]; 2]> {
        let (l1, l2) = self.eigenvalues();
        if l2 < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: l2 });
        }
        let (r1, r2) = (l1.max(0.0).sqrt(), l2.max(0.0).sqrt());
        let (v1, v2) = if self.s12 == 0.0 {
            if self.s11 >= self.s22 {
                ([1.0, 0.0], [0.0, 1.0])
            } else {
                ([0.0, 1.0], [1.0, 0.0])
            }
        } else {
            let raw = [l1 - self.s22, self.s12];
            let norm = raw[0].hypot(raw[1]);
            let v1 = [raw[0] / norm, raw[1] / norm];
            (v1, [-v1[1], v1[0]])
        };
        Ok([
            [
                r1 * v1[0] * v1[0] + r2 * v2[0] * v2[0],
                r1 * v1[0] * v1[1] + r2 * v2[0] * v2[1],
            ],
            [
                r1 * v1[1] * v1[0] + r2 * v2[1] * v2[0],
                r1 * v1[1] * v1[1] + r2 * v2[1] * v2[1],
            ],
        ])
    }
}

/// Symmetric 4×4 covariance of `(Re G(ν,ω), Re G(ν,ν), Re G(ω,ω), Im G(ν,ω))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov4 {
    m: [[f64; 4]; 4],
}

impl Cov4 {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    /// The ten lower-triangle entries in row-major order.
    pub fn lower_triangle(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        let mut k = 0;
        for i in 0..4 {
            for j in 0..=i {
                out[k] = self.m[i][j];
                k += 1;
            }
        }
        out
    }

    pub fn quadratic_form(&self, v: [f64; 4]) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i] * self.m[i][j] * v[j];
            }
        }
        acc
    }
}

/// The asymptotic covariance kernel of the normalized smoothed estimator:
///
/// ```text
/// K(p₁, p₂) = ρ ( P(ν₁, ν₂) conj(P(ω₁, ω₂))
///               + P(ν₁, 2π − ω₂) conj(P(ν₂, 2π − ω₁)) )
/// ```
///
/// where `ρ = ∫ w²` is the window constant. `K(p₁, p₂) = conj(K(p₂, p₁))`
/// for truths satisfying `P(a, b) = conj(P(b, a))`.
pub fn complex_cov_kernel(
    truth: &dyn SpectralTruth,
    rho: f64,
    p1: BifrequencyPoint,
    p2: BifrequencyPoint,
) -> ComplexValue {
    let a = truth.p(BifrequencyPoint::new(p1.nu, p2.nu));
    let b = truth.p(BifrequencyPoint::new(p1.omega, p2.omega));
    let c = truth.p(BifrequencyPoint::new(p1.nu, p2.omega.reflected()));
    let d = truth.p(BifrequencyPoint::new(p2.nu, p1.omega.reflected()));
    (a * b.conj() + c * d.conj()) * rho
}

/// Which route to take when assembling the 2×2 covariance of `(Re G, Im G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaVariant {
    /// Verbatim transcription of the classical displayed entry formulas.
    /// Kept for documentation and comparison: its cross term is
    /// inconsistent in degree with the diagonal entries, and it carries no
    /// window constant. Do not use it downstream.
    AsPrinted,
    /// Entries assembled from [`complex_cov_kernel`] and the conjugation
    /// identity. Checkable against a Monte Carlo oracle; the default
    /// everywhere downstream.
    KernelDerived,
}

/// The 2×2 asymptotic covariance of `√(n/L) (Re G(p), Im G(p))`.
///
/// `rho` is the window constant; it only enters the `KernelDerived` route
/// (the printed transcription carries none).
pub fn sigma_matrix(
    truth: &dyn SpectralTruth,
    rho: f64,
    p: BifrequencyPoint,
    variant: SigmaVariant,
) -> Cov2 {
    match variant {
        SigmaVariant::KernelDerived => {
            let k = complex_cov_kernel(truth, rho, p, p);
            let kt = complex_cov_kernel(truth, rho, p, p.reflected());
            Cov2 {
                s11: 0.5 * (k.re + kt.re),
                s12: 0.5 * kt.im,
                s22: 0.5 * (k.re - kt.re),
            }
        }
        SigmaVariant::AsPrinted => {
            let pv = truth.p(p);
            let g0n = truth.g0(p.nu);
            let g0o = truth.g0(p.omega);
            let cross = truth.p(BifrequencyPoint::new(p.nu, p.nu.reflected()))
                * truth.p(BifrequencyPoint::new(p.omega.reflected(), p.omega));
            let off = truth
                .p(BifrequencyPoint::new(p.nu, p.omega.reflected()))
                .norm_sqr();
            let even = g0n * g0o + off;
            Cov2 {
                s11: 0.5 * (even + cross.re + pv.re * pv.re - pv.im * pv.im),
                s12: -(pv.re * pv.re) * (pv.im * pv.im) - 0.5 * cross.im,
                s22: 0.5 * (even - cross.re - pv.re * pv.re + pv.im * pv.im),
            }
        }
    }
}

/// The 4×4 asymptotic covariance of
/// `√(n/L) (Re G(ν,ω), Re G(ν,ν), Re G(ω,ω), Im G(ν,ω))`, assembled
/// entirely from the kernel at the required point pairs plus the
/// conjugation identity. On the diagonal `ν = ω` the matrix is rank
/// deficient because `Im G(ν,ν) = 0`.
pub fn psi_matrix(truth: &dyn SpectralTruth, rho: f64, p: BifrequencyPoint) -> Cov4 {
    let pts = [
        p,
        BifrequencyPoint::diagonal(p.nu),
        BifrequencyPoint::diagonal(p.omega),
    ];
    let mut k = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut kt = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = complex_cov_kernel(truth, rho, pts[i], pts[j]);
            kt[i][j] = complex_cov_kernel(truth, rho, pts[i], pts[j].reflected());
        }
    }
    let mut m = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = 0.5 * (k[i][j].re + kt[i][j].re);
        }
    }
    for i in 0..3 {
        let c = 0.5 * (kt[i][0].im - k[i][0].im);
        m[i][3] = c;
        m[3][i] = c;
    }
    m[3][3] = 0.5 * (k[0][0].re - kt[0][0].re);
    Cov4 { m }
}

/// Gradient of `(x, y) ↦ √(x² + y²)` at `(Re P, Im P)`; undefined at zero,
/// where callers must use the folded law instead.
pub fn d1_gradient(p: ComplexValue) -> Result<[f64; 2]> {
    let norm = p.norm();
    if norm == 0.0 {
        return Err(Error::invalid(
            "magnitude gradient is undefined at P = 0; use the folded limit law",
        ));
    }
    Ok([p.re / norm, p.im / norm])
}

/// Gradient of `(x, y, z, t) ↦ √(x² + t²) / √(yz)` at
/// `(Re P, g₀(ν), g₀(ω), Im P)`.
pub fn d2_gradient(p: ComplexValue, g0_nu: f64, g0_omega: f64) -> Result<[f64; 4]> {
    let norm_sq = p.norm_sqr();
    if norm_sq == 0.0 {
        return Err(Error::invalid(
            "coherence gradient is undefined at P = 0; use the folded limit law",
        ));
    }
    if !(g0_nu > 0.0 && g0_omega > 0.0) {
        return Err(Error::invalid(format!(
            "coherence gradient requires positive diagonal densities, got {g0_nu} and {g0_omega}"
        )));
    }
    let lead = p.norm() / (g0_nu * g0_omega).sqrt();
    Ok([
        lead * p.re / norm_sq,
        lead * -0.5 / g0_nu,
        lead * -0.5 / g0_omega,
        lead * p.im / norm_sq,
    ])
}

/// Limit law of a normalized magnitude statistic: folded bivariate normal
/// `scale · √(S₁² + S₂²)` with `(S₁, S₂) ~ N₂(0, cov)` off the spectral
/// support, Gaussian via the delta method on it.
#[derive(Debug, Clone)]
pub enum LimitLaw {
    FoldedBivariateNormal { cov: Cov2, scale: f64 },
    Normal { variance: f64 },
}

/// Limit law of `√(n/L) (|G(p)| − |P(p)|)`.
pub fn limit_law_p(truth: &dyn SpectralTruth, rho: f64, p: BifrequencyPoint) -> LimitLaw {
    let sigma = sigma_matrix(truth, rho, p, SigmaVariant::KernelDerived);
    let pv = truth.p(p);
    if pv.re == 0.0 && pv.im == 0.0 {
        LimitLaw::FoldedBivariateNormal { cov: sigma, scale: 1.0 }
    } else {
        let d1 = d1_gradient(pv).expect("P is nonzero here");
        LimitLaw::Normal { variance: sigma.quadratic_form(d1) }
    }
}

/// Limit law of `√(n/L) (|γ(p)| − |γ(p)| truth)` for off-diagonal points
/// with positive diagonal densities.
pub fn limit_law_gamma(
    truth: &dyn SpectralTruth,
    rho: f64,
    p: BifrequencyPoint,
) -> Result<LimitLaw> {
    if p.is_diagonal() {
        return Err(Error::invalid(
            "the coherence statistic is identically one on the diagonal; no limit law there",
        ));
    }
    let g0n = truth.g0(p.nu);
    let g0o = truth.g0(p.omega);
    if !(g0n > 0.0 && g0o > 0.0) {
        return Err(Error::invalid(format!(
            "coherence limit law requires positive diagonal densities, got {g0n} and {g0o}"
        )));
    }
    let pv = truth.p(p);
    if pv.re == 0.0 && pv.im == 0.0 {
        let sigma = sigma_matrix(truth, rho, p, SigmaVariant::KernelDerived);
        Ok(LimitLaw::FoldedBivariateNormal {
            cov: sigma,
            scale: 1.0 / (g0n * g0o).sqrt(),
        })
    } else {
        let psi = psi_matrix(truth, rho, p);
        let d2 = d2_gradient(pv, g0n, g0o)?;
        Ok(LimitLaw::Normal { variance: psi.quadratic_form(d2) })
    }
}

/// Draws `m` i.i.d. realizations of a limit law. Deterministic given the
/// generator state; the folded law consumes two normals per draw and the
/// Gaussian law one.
pub fn sample_limit_law(
    law: &LimitLaw,
    rng: &mut (impl Rng + ?Sized),
    m: usize,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("at least one draw is required"));
    }
    match law {
        LimitLaw::Normal { variance } => {
            if *variance < -PSD_TOLERANCE {
                return Err(Error::NotPositiveSemidefinite { min_eigenvalue: *variance });
            }
            let sd = variance.max(0.0).sqrt();
            Ok((0..m)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect())
        }
        LimitLaw::FoldedBivariateNormal { cov, scale } => {
            let a = cov.symmetric_sqrt()?;
            Ok((0..m)
                .map(|_| {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    let s1 = a[0][0] * z1 + a[0][1] * z2;
                    let s2 = a[1][0] * z1 + a[1][1] * z2;
                    scale * s1.hypot(s2)
                })
                .collect())
        }
    }
}

/// Survival function of the chi-square law with two degrees of freedom,
/// `exp(−x/2)` exactly.
pub fn chi2_2_sf(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::invalid(format!("chi-square argument must be nonnegative, got {x}")));
    }
    Ok((-x / 2.0).exp())
}
