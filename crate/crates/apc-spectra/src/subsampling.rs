//! Subsampling inference: empirical sampling distributions of the
//! normalized magnitude and coherence statistics over all overlapping
//! blocks, their quantiles, and the resulting equal-tailed confidence
//! intervals.
//!
//! For a sample of length `n`, block length `b` and block bandwidth `L_b`,
//! the distribution of `√(n/L_n) (|G_n| − |P|)` is estimated by the
//! empirical law of
//!
//! ```text
//! √(b/L_b) (|G over block t..t+b−1| − |G_n|),   t = 1..n−b+1,
//! ```
//!
//! and analogously for the coherence statistic. Blocks overlap with stride
//! one. Block statistics are computed independently (and in parallel) and
//! sorted afterwards, so results do not depend on evaluation order.

use rayon::prelude::*;

use crate::core::{BifrequencyPoint, ComplexValue, TimeSeries};
use crate::error::{Error, Result};
use crate::estimators::{self, LagPlan};
use crate::windows::LagWindowSpec;

/// Fewer blocks than this make the empirical distribution meaningless.
const MIN_BLOCKS: usize = 8;

/// Fraction of coherence blocks that may be dropped for degenerate
/// denominators before the whole distribution is considered degenerate.
const MAX_EXCLUDED_FRACTION: f64 = 0.01;

/// Tuning constants of a subsampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsamplingParams {
    /// Block length `b`.
    pub b: usize,
    /// Bandwidth used on the full sample.
    pub l_n: usize,
    /// Bandwidth used on each block.
    pub l_b: usize,
    /// Significance level for tests and scan criticals.
    pub alpha: f64,
}

impl SubsamplingParams {
    pub fn new(b: usize, l_n: usize, l_b: usize, alpha: f64) -> Result<Self> {
        let p = SubsamplingParams { b, l_n, l_b, alpha };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.l_b >= 1 && self.l_b < self.b) {
            return Err(Error::invalid(format!(
                "need 1 <= L_b < b, got L_b = {}, b = {}",
                self.l_b, self.b
            )));
        }
        if self.l_n < 1 {
            return Err(Error::invalid("need L_n >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "significance level must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Validates the parameters against a concrete sample length.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.check()?;
        if self.b > n {
            return Err(Error::invalid(format!(
                "block length b = {} exceeds the sample length {n}",
                self.b
            )));
        }
        if self.l_n >= n {
            return Err(Error::invalid(format!(
                "full-sample bandwidth L_n = {} must be smaller than n = {n}",
                self.l_n
            )));
        }
        if n - self.b + 1 < MIN_BLOCKS {
            return Err(Error::invalid(format!(
                "only {} overlapping blocks; at least {MIN_BLOCKS} are required",
                n - self.b + 1
            )));
        }
        Ok(())
    }

    pub fn block_count(&self, n: usize) -> usize {
        n - self.b + 1
    }
}

/// The default parameter rules: `L_n = [n^{1/5}]`, `b = [3√n]`,
/// `L_b = [b^{1/5}]` with `[·]` rounding half away from zero (which
/// reproduces the reference values at n = 720 and n = 500), and α = 0.01.
pub fn default_params(n: usize) -> Result<SubsamplingParams> {
    if n < 16 {
        return Err(Error::invalid(format!(
            "need at least 16 samples for the default rules, got {n}"
        )));
    }
    let nf = n as f64;
    let l_n = (nf.powf(0.2).round() as usize).clamp(1, n - 1);
    let b = ((3.0 * nf.sqrt()).round() as usize).clamp(2, n);
    let l_b = (((b as f64).powf(0.2)).round() as usize).clamp(1, b - 1);
    SubsamplingParams::new(b, l_n, l_b, 0.01)
}

/// A sorted sample of a subsampling statistic.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    pub b: usize,
    pub l_b: usize,
}

impl EmpiricalDistribution {
    fn from_unsorted(mut values: Vec<f64>, b: usize, l_b: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical distribution needs at least one value"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalDistribution { values, b, l_b })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sorted statistic values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of values `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.values.partition_point(|&v| v <= x);
        count as f64 / self.values.len() as f64
    }

    /// The left-continuous inverse CDF: the smallest value whose CDF
    /// reaches `level`, i.e. the `⌈level·m⌉`-th order statistic.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::invalid(format!(
                "quantile level must lie in (0, 1), got {level}"
            )));
        }
        let m = self.values.len();
        let rank = (level * m as f64).ceil() as usize;
        Ok(self.values[rank.clamp(1, m) - 1])
    }
}

/// Per-block smoothed estimates at one bifrequency point, over all
/// overlapping blocks of length `b`.
pub(crate) fn block_estimates(
    x: &TimeSeries,
    window: &LagWindowSpec,
    b: usize,
    l_b: usize,
    point: BifrequencyPoint,
) -> Result<Vec<ComplexValue>> {
    let plan = LagPlan::new(x, window, l_b, point)?;
    let m = x.len() - b + 1;
    Ok((0..m)
        .into_par_iter()
        .map(|i| plan.eval_block(i, b))
        .collect())
}

pub(crate) fn assemble_p_distribution(
    blocks: &[ComplexValue],
    center: f64,
    params: &SubsamplingParams,
) -> Result<EmpiricalDistribution> {
    let scale = (params.b as f64 / params.l_b as f64).sqrt();
    let values = blocks.iter().map(|g| scale * (g.norm() - center)).collect();
    EmpiricalDistribution::from_unsorted(values, params.b, params.l_b)
}

pub(crate) fn assemble_gamma_distribution(
    numerators: &[ComplexValue],
    diag_nu: &[ComplexValue],
    diag_omega: &[ComplexValue],
    center: f64,
    params: &SubsamplingParams,
) -> Result<EmpiricalDistribution> {
    let scale = (params.b as f64 / params.l_b as f64).sqrt();
    let total = numerators.len();
    let mut values = Vec::with_capacity(total);
    let mut excluded = 0usize;
    for ((g, dn), dm) in numerators.iter().zip(diag_nu).zip(diag_omega) {
        match estimators::coherence_from_parts(*g, dn.re, dm.re) {
            Ok(gamma) => values.push(scale * (gamma - center)),
            Err(_) => excluded += 1,
        }
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
        return Err(Error::DegenerateBlocks { excluded, total });
    }
    EmpiricalDistribution::from_unsorted(values, params.b, params.l_b)
}

/// Subsampling distribution of the normalized spectral magnitude statistic
/// at `point`, centered at the full-sample estimate. Also returns that
/// full-sample magnitude `|G_n|`.
pub(crate) fn distribution_p_with_center(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<(EmpiricalDistribution, f64)> {
    params.validate_for(x.len())?;
    let full = estimators::smoothed_bispectral(x, window, params.l_n, point)?;
    let center = full.value.norm();
    let blocks = block_estimates(x, window, params.b, params.l_b, point)?;
    Ok((assemble_p_distribution(&blocks, center, params)?, center))
}

/// Subsampling estimate of the sampling distribution of
/// `√(n/L_n) (|G_n| − |P|)`.
pub fn subsample_distribution_p(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<EmpiricalDistribution> {
    distribution_p_with_center(x, window, params, point).map(|(d, _)| d)
}

pub(crate) fn distribution_gamma_with_center(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<(EmpiricalDistribution, f64)> {
    params.validate_for(x.len())?;
    if point.is_diagonal() {
        return Err(Error::invalid(
            "the coherence statistic is identically one on the diagonal; pick nu != omega",
        ));
    }
    let center = estimators::coherence_stat(x, window, params.l_n, point)?;
    let numerators = block_estimates(x, window, params.b, params.l_b, point)?;
    let diag_nu = block_estimates(
        x,
        window,
        params.b,
        params.l_b,
        BifrequencyPoint::diagonal(point.nu),
    )?;
    let diag_omega = block_estimates(
        x,
        window,
        params.b,
        params.l_b,
        BifrequencyPoint::diagonal(point.omega),
    )?;
    Ok((
        assemble_gamma_distribution(&numerators, &diag_nu, &diag_omega, center, params)?,
        center,
    ))
}

/// Subsampling estimate of the sampling distribution of
/// `√(n/L_n) (|γ_n| − |γ|)` at an off-diagonal point.
pub fn subsample_distribution_gamma(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
) -> Result<EmpiricalDistribution> {
    distribution_gamma_with_center(x, window, params, point).map(|(d, _)| d)
}

/// A two-sided equal-tailed interval. `lo`/`hi` may have been clamped to
/// the natural range of the parameter; the flags record it.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    /// The full-sample point estimate the interval is centered on.
    pub estimate: f64,
    pub clamped_lo: bool,
    pub clamped_hi: bool,
}

fn equal_tailed(
    dist: &EmpiricalDistribution,
    estimate: f64,
    n: usize,
    l_n: usize,
    confidence: f64,
) -> Result<ConfidenceInterval> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let alpha = 1.0 - confidence;
    let root = (n as f64 / l_n as f64).sqrt();
    let hi_q = dist.quantile(1.0 - alpha / 2.0)?;
    let lo_q = dist.quantile(alpha / 2.0)?;
    Ok(ConfidenceInterval {
        lo: estimate - hi_q / root,
        hi: estimate - lo_q / root,
        estimate,
        clamped_lo: false,
        clamped_hi: false,
    })
}

/// Equal-tailed subsampling confidence interval for `|P(ν, ω)|`. The lower
/// bound is clamped at zero (magnitudes are nonnegative).
pub fn ci_magnitude_p(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
    confidence: f64,
) -> Result<ConfidenceInterval> {
    let (dist, estimate) = distribution_p_with_center(x, window, params, point)?;
    let mut ci = equal_tailed(&dist, estimate, x.len(), params.l_n, confidence)?;
    if ci.lo < 0.0 {
        ci.lo = 0.0;
        ci.clamped_lo = true;
    }
    Ok(ci)
}

/// Equal-tailed subsampling confidence interval for `|γ(ν, ω)|`, clamped to
/// the coherence range `[0, 1]`.
pub fn ci_coherence(
    x: &TimeSeries,
    window: &LagWindowSpec,
    params: &SubsamplingParams,
    point: BifrequencyPoint,
    confidence: f64,
) -> Result<ConfidenceInterval> {
    let (dist, estimate) = distribution_gamma_with_center(x, window, params, point)?;
    let mut ci = equal_tailed(&dist, estimate, x.len(), params.l_n, confidence)?;
    if ci.lo < 0.0 {
        ci.lo = 0.0;
        ci.clamped_lo = true;
    }
    if ci.hi > 1.0 {
        ci.hi = 1.0;
        ci.clamped_hi = true;
    }
    Ok(ci)
}
