//! Hypothesis tests for periodic correlation at a bifrequency point and the
//! grid scan that turns them into a rejection map over the whole square.
//!
//! At an off-diagonal point `(ν, ω)` the null hypothesis is
//! `|P(ν, ω)| = 0`. Three statistics are available:
//!
//! * `√(n/L_n) |G_n(ν, ω)|` against subsampling critical values,
//! * `√(n/L_n) |γ_n(ν, ω)|` against subsampling critical values,
//! * the studentized squared form `(n/L_n) ((Re G/σ̂_R)² + (Im G/σ̂_I)²)`
//!   against the chi-square(2) reference, with plug-in variances from the
//!   kernel-derived covariance evaluated on estimated densities.
//!
//! Subsampling critical values are quantiles of the null-centered block
//! distribution: the null fixes `|P| = 0` (equivalently `|γ| = 0`), so the
//! block statistics `√(b/L_b) |G_b|` are left uncentered. Centering blocks at
//! the full-sample estimate instead — the confidence-interval construction —
//! couples the critical value to the statistic under test and inflates the
//! finite-sample size by an `O((b L_n / n L_b)^{1/2})` shift that decays too
//! slowly to ignore at practical sample lengths. Both variants are
//! asymptotically consistent; tests use the null-centered one, intervals the
//! estimate-centered one.
//!
//! Rejections concentrated along lines `ν − ω ≡ λ` flag a periodic
//! autocovariance; scattered rejections are consistent with stationarity.

use rayon::prelude::*;

use crate::asymptotics::{self, SigmaVariant, SpectralTruth};
use crate::core::{BifrequencyPoint, ComplexValue, Frequency, TimeSeries};
use crate::error::{Error, Result};
use crate::estimators;
use crate::subsampling::{self, SubsamplingParams};
use crate::windows::LagWindowSpec;

/// Which test a [`TestOutcome`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    SubsP,
    SubsGamma,
    Chi2P,
}

impl TestMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TestMethod::SubsP => "subs-p",
            TestMethod::SubsGamma => "subs-gamma",
            TestMethod::Chi2P => "chi2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStatus {
    Ok,
    /// The statistic or its critical value could not be computed from this
    /// sample (degenerate denominator, indefinite plug-in variance, ...).
    Undetermined,
}

/// Outcome of one test at one bifrequency point. `reject` holds exactly
/// when `statistic > critical` and the status is `Ok`.
#[derive(Debug, Clone, Copy)]
pub struct TestOutcome {
    pub point: BifrequencyPoint,
    pub statistic: Option<f64>,
    pub critical: Option<f64>,
    pub reject: bool,
    pub method: TestMethod,
    pub status: TestStatus,
}

impl TestOutcome {
    fn undetermined(point: BifrequencyPoint, method: TestMethod) -> Self {
        TestOutcome {
            point,
            statistic: None,
            critical: None,
            reject: false,
            method,
            status: TestStatus::Undetermined,
        }
    }

    fn decided(point: BifrequencyPoint, method: TestMethod, statistic: f64, critical: f64) -> Self {
        TestOutcome {
            point,
            statistic: Some(statistic),
            critical: Some(critical),
            reject: statistic > critical,
            method,
            status: TestStatus::Ok,
        }
    }
}

fn degenerate_to_undetermined(
    result: Result<TestOutcome>,
    point: BifrequencyPoint,
    method: TestMethod,
) -> Result<TestOutcome> {
    match result {
        Err(e) if e.is_degenerate() => Ok(TestOutcome::undetermined(point, method)),
        other => other,
    }
}

/// Subsampling test of `|P(ν, ω)| = 0` based on the normalized magnitude
/// statistic and the `1 − α` quantile of the null-centered block
/// distribution.
pub fn subsampling_p_test(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<TestOutcome> {
    let inner = || -> Result<TestOutcome> {
        params.validate_for(x.len())?;
        let full = estimators::smoothed_bispectral(x, window, params.l_n, point)?;
        let blocks = subsampling::block_estimates(x, window, params.b, params.l_b, point)?;
        let dist = subsampling::assemble_p_distribution(&blocks, 0.0, params)?;
        let statistic = (x.len() as f64 / params.l_n as f64).sqrt() * full.value.norm();
        let critical = dist.quantile(1.0 - params.alpha)?;
        Ok(TestOutcome::decided(point, TestMethod::SubsP, statistic, critical))
    };
    degenerate_to_undetermined(inner(), point, TestMethod::SubsP)
}

/// Subsampling test based on the normalized coherence statistic; requires
/// an off-diagonal point.
pub fn subsampling_gamma_test(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<TestOutcome> {
    let inner = || -> Result<TestOutcome> {
        params.validate_for(x.len())?;
        if point.is_diagonal() {
            return Err(Error::invalid(
                "the coherence statistic is identically one on the diagonal; pick nu != omega",
            ));
        }
        let gamma = estimators::coherence_stat(x, window, params.l_n, point)?;
        let numerators = subsampling::block_estimates(x, window, params.b, params.l_b, point)?;
        let diag_nu = subsampling::block_estimates(
            x,
            window,
            params.b,
            params.l_b,
            BifrequencyPoint::diagonal(point.nu),
        )?;
        let diag_omega = subsampling::block_estimates(
            x,
            window,
            params.b,
            params.l_b,
            BifrequencyPoint::diagonal(point.omega),
        )?;
        let dist = subsampling::assemble_gamma_distribution(
            &numerators,
            &diag_nu,
            &diag_omega,
            0.0,
            params,
        )?;
        let statistic = (x.len() as f64 / params.l_n as f64).sqrt() * gamma;
        let critical = dist.quantile(1.0 - params.alpha)?;
        Ok(TestOutcome::decided(point, TestMethod::SubsGamma, statistic, critical))
    };
    degenerate_to_undetermined(inner(), point, TestMethod::SubsGamma)
}

/// A spectral truth whose values are smoothed estimates from a sample,
/// optionally forcing one point (and its reflection) to zero — the shape of
/// plug-in needed by the studentized test, which estimates variances under
/// the null. Diagonal queries return the real part, matching the definition
/// of the diagonal density.
pub struct EstimatedTruth {
    series: TimeSeries,
    window: LagWindowSpec,
    bandwidth: usize,
    null_point: Option<BifrequencyPoint>,
}

impl EstimatedTruth {
    pub fn new(
        series: &TimeSeries,
        window: &LagWindowSpec,
        bandwidth: usize,
        null_point: Option<BifrequencyPoint>,
    ) -> Self {
        EstimatedTruth {
            series: series.clone(),
            window: window.clone(),
            bandwidth,
            null_point,
        }
    }
}

impl SpectralTruth for EstimatedTruth {
    fn p(&self, point: BifrequencyPoint) -> ComplexValue {
        if let Some(null) = self.null_point {
            if point == null || point == null.reflected() {
                return ComplexValue::new(0.0, 0.0);
            }
        }
        let est = estimators::smoothed_bispectral(&self.series, &self.window, self.bandwidth, point)
            .map(|e| e.value)
            .unwrap_or(ComplexValue::new(0.0, 0.0));
        if point.is_diagonal() {
            ComplexValue::new(est.re, 0.0)
        } else {
            est
        }
    }
}

/// Studentized magnitude test against the chi-square(2) reference. The
/// plug-in standard deviations are the square roots of the kernel-derived
/// covariance diagonal evaluated on estimated densities with the null
/// imposed at the tested point; under the null the off-diagonal covariance
/// entry is dropped.
pub fn chi2_p_test(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<TestOutcome> {
    params.validate_for(x.len())?;
    let g = estimators::smoothed_bispectral(x, window, params.l_n, point)?;
    let truth = EstimatedTruth::new(x, window, params.l_n, Some(point));
    let sigma = asymptotics::sigma_matrix(&truth, window.rho(), point, SigmaVariant::KernelDerived);
    if !(sigma.s11 > 0.0 && sigma.s22 > 0.0) {
        return Ok(TestOutcome::undetermined(point, TestMethod::Chi2P));
    }
    let ratio = x.len() as f64 / params.l_n as f64;
    let statistic = ratio * (g.value.re * g.value.re / sigma.s11 + g.value.im * g.value.im / sigma.s22);
    let critical = 2.0 * (1.0 / params.alpha).ln();
    Ok(TestOutcome::decided(point, TestMethod::Chi2P, statistic, critical))
}

/// One grid cell of a scan: the indices `(s, t)` of the tested point
/// `(2πs/g, 2πt/g)` and the test outcome there.
#[derive(Debug, Clone, Copy)]
pub struct ScanCell {
    pub s: usize,
    pub t: usize,
    pub outcome: TestOutcome,
}

/// Rejection map over the off-diagonal bifrequency grid.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub grid_size: usize,
    pub method: TestMethod,
    pub params: SubsamplingParams,
    /// Row-major by `(s, t)`, diagonal excluded: `g(g−1)` cells.
    pub cells: Vec<ScanCell>,
}

impl ScanResult {
    pub fn rejection_count(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.reject).count()
    }

    pub fn undetermined_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.outcome.status == TestStatus::Undetermined)
            .count()
    }

    /// Fraction of rejected cells among those selected by `pred` (on the
    /// grid indices). Undetermined cells count as non-rejections.
    pub fn rejection_fraction_where(&self, pred: impl Fn(usize, usize) -> bool) -> f64 {
        let mut total = 0usize;
        let mut rejected = 0usize;
        for c in &self.cells {
            if pred(c.s, c.t) {
                total += 1;
                if c.outcome.reject {
                    rejected += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            rejected as f64 / total as f64
        }
    }
}

/// Runs the selected test at every off-diagonal grid point
/// `(2πs/g, 2πt/g)`, `1 ≤ s, t ≤ g`, `s ≠ t`. Points are distributed over
/// the rayon pool; per-point numeric degeneracies become undetermined cells
/// and never abort the scan. The output ordering is row-major and
/// deterministic.
pub fn scan(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    grid_size: usize,
    method: TestMethod,
) -> Result<ScanResult> {
    if grid_size < 2 {
        return Err(Error::invalid("grid size must be at least 2"));
    }
    params.validate_for(x.len())?;

    let freqs: Vec<Frequency> = (1..=grid_size)
        .map(|s| Frequency::new(std::f64::consts::TAU * s as f64 / grid_size as f64))
        .collect::<Result<_>>()?;

    // Diagonal quantities depend on one grid frequency only; for the
    // coherence scan precompute them once per row/column instead of once
    // per cell.
    let diag_cache: Option<DiagCache> = if method == TestMethod::SubsGamma {
        Some(DiagCache::build(x, window, params, &freqs)?)
    } else {
        None
    };

    let points: Vec<(usize, usize)> = (1..=grid_size)
        .flat_map(|s| (1..=grid_size).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();

    let cells: Vec<ScanCell> = points
        .into_par_iter()
        .map(|(s, t)| {
            let point = BifrequencyPoint::new(freqs[s - 1], freqs[t - 1]);
            let outcome = match method {
                TestMethod::SubsP => subsampling_p_test(x, window, params, point),
                TestMethod::SubsGamma => {
                    gamma_test_with_cache(x, window, params, point, s, t, diag_cache.as_ref().unwrap())
                }
                TestMethod::Chi2P => chi2_p_test(x, window, params, point),
            }
            .unwrap_or_else(|_| TestOutcome::undetermined(point, method));
            ScanCell { s, t, outcome }
        })
        .collect();

    Ok(ScanResult { grid_size, method, params: *params, cells })
}

struct DiagCache {
    /// Full-sample diagonal estimates per grid frequency.
    full: Vec<ComplexValue>,
    /// Per-block diagonal estimates per grid frequency.
    blocks: Vec<Vec<ComplexValue>>,
}

impl DiagCache {
    fn build(
        x: &TimeSeries,
        window: &LagWindowSpec,
        params: &SubsamplingParams,
        freqs: &[Frequency],
    ) -> Result<Self> {
        let full = freqs
            .iter()
            .map(|&f| {
                estimators::smoothed_bispectral(x, window, params.l_n, BifrequencyPoint::diagonal(f))
                    .map(|e| e.value)
            })
            .collect::<Result<_>>()?;
        let blocks = freqs
            .par_iter()
            .map(|&f| {
                subsampling::block_estimates(
                    x,
                    window,
                    params.b,
                    params.l_b,
                    BifrequencyPoint::diagonal(f),
                )
            })
            .collect::<Result<_>>()?;
        Ok(DiagCache { full, blocks })
    }
}

fn gamma_test_with_cache(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
    s: usize,
    t: usize,
    cache: &DiagCache,
) -> Result<TestOutcome> {
    let inner = || -> Result<TestOutcome> {
        let full = estimators::smoothed_bispectral(x, window, params.l_n, point)?;
        let gamma = estimators::coherence_from_parts(
            full.value,
            cache.full[s - 1].re,
            cache.full[t - 1].re,
        )?;
        let numerators = subsampling::block_estimates(x, window, params.b, params.l_b, point)?;
        let dist = subsampling::assemble_gamma_distribution(
            &numerators,
            &cache.blocks[s - 1],
            &cache.blocks[t - 1],
            0.0,
            params,
        )?;
        let statistic = (x.len() as f64 / params.l_n as f64).sqrt() * gamma;
        let critical = dist.quantile(1.0 - params.alpha)?;
        Ok(TestOutcome::decided(point, TestMethod::SubsGamma, statistic, critical))
    };
    degenerate_to_undetermined(inner(), point, TestMethod::SubsGamma)
}
