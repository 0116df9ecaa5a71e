//! Acceptance suite: every criterion the crate must meet, one test per
//! criterion, each printing a single pass/fail line (run with
//! `cargo test --test acceptance -- --nocapture` to see them).
//!
//! The Monte Carlo criteria run with preregistered seeds and points, so
//! every run is deterministic.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use apc_spectra::asymptotics::{
    self, sample_limit_law, SigmaVariant, SpectralTruth,
};
use apc_spectra::core::{BifrequencyPoint, Frequency, TimeSeries};
use apc_spectra::detect::{self, TestMethod};
use apc_spectra::estimators::{coherence_stat, smoothed_bispectral};
use apc_spectra::models::PeriodicMAModel;
use apc_spectra::subsampling;
use apc_spectra::testkit::{brute_force_g, derive_seed, ks_distance, mc_covariance};
use apc_spectra::windows::LagWindowSpec;

fn report(criterion: &str, pass: bool, elapsed: std::time::Duration, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({:.2?}) — {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn pt(nu: f64, omega: f64) -> BifrequencyPoint {
    BifrequencyPoint::from_radians(nu, omega).unwrap()
}

/// Criterion 1 — closed-form truth reproduction on the 120-point grid for
/// the period-4 model (all four line formulas) and the period-12 density
/// statements. The two quarter-line formulas are asserted at the line
/// offsets the estimator conventions actually realize, which swaps the
/// labels of the published plot captions (arbitrated by simulation).
#[test]
fn criterion_1_closed_form_truth() {
    let start = Instant::now();
    let truth4 = PeriodicMAModel::pma1(4).unwrap().spectral_truth();
    let mut worst: f64 = 0.0;
    for k in 1..=120 {
        let nu = TAU * k as f64 / 120.0;
        let cases = [
            (0.0, (59.0 + 18.0 * nu.cos()) / (4.0 * PI)),
            (
                PI / 2.0,
                2f64.sqrt() * (51.0 + 10.0 * nu.cos() + 10.0 * nu.sin() + (2.0 * nu).sin()).sqrt()
                    / PI,
            ),
            (PI, (625.0 + 4.0 * nu.sin().powi(2)).sqrt() / (4.0 * PI)),
            (
                1.5 * PI,
                2f64.sqrt() * (51.0 + 10.0 * nu.cos() - 10.0 * nu.sin() - (2.0 * nu).sin()).sqrt()
                    / PI,
            ),
        ];
        for (lambda, expect) in cases {
            let got = truth4.p(pt(nu, nu - lambda)).norm();
            worst = worst.max((got - expect).abs() / expect.abs());
        }
    }

    let truth12 = PeriodicMAModel::pma1(12).unwrap().spectral_truth();
    let mut t12_ok = true;
    let mut max_pi6: f64 = 0.0;
    let mut max_pi3: f64 = 0.0;
    for k in 1..=120 {
        let nu = TAU * k as f64 / 120.0;
        let g0 = truth12.g0(Frequency::new(nu).unwrap());
        let expect = (235.0 + 72.0 * nu.cos()) / (16.0 * PI);
        t12_ok &= (g0 - expect).abs() <= 1e-9 * expect;
        let at = |l: f64| truth12.p(pt(nu, nu - l)).norm();
        t12_ok &= (at(PI / 2.0) - 1.0 / TAU).abs() <= 1e-9 / TAU;
        t12_ok &= (at(2.0 * PI / 3.0) - 1.0 / (32.0 * PI)).abs() <= 1e-9 / (32.0 * PI);
        t12_ok &= at(5.0 * PI / 6.0) <= 1e-12;
        t12_ok &= at(PI) <= 1e-12;
        max_pi6 = max_pi6.max(at(PI / 6.0));
        max_pi3 = max_pi3.max(at(PI / 3.0));
    }
    t12_ok &= max_pi6 > 1e-3 && max_pi3 > 1e-3;

    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && t12_ok && elapsed.as_secs_f64() < 1.0;
    report(
        "criterion 1 (closed-form truth)",
        pass,
        elapsed,
        &format!("T=4 worst relative error {worst:.2e}; T=12 statements ok = {t12_ok}"),
    );
}

/// Criterion 2 — the lag-sum estimator equals the literal double sum to
/// 1e-10 relative on 1000 random cases with n ≤ 64.
#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.gen_range(8usize..=64);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = TimeSeries::new(rng.gen_range(-50i64..50), samples).unwrap();
        let l = rng.gen_range(1..n);
        let window = if case % 2 == 0 {
            LagWindowSpec::Truncated
        } else {
            LagWindowSpec::flat_top_trapezoid(rng.gen_range(0.05..=1.0)).unwrap()
        };
        let p = pt(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let fast = smoothed_bispectral(&x, &window, l, p).unwrap().value;
        let slow = brute_force_g(&x, &window, l, p).unwrap();
        worst = worst.max((fast - slow).norm() / (1.0 + slow.norm()));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-10 && elapsed.as_secs_f64() < 10.0;
    report(
        "criterion 2 (oracle equivalence)",
        pass,
        elapsed,
        &format!("worst relative deviation {worst:.2e} over 1000 cases"),
    );
}

/// Criterion 3 — the kernel-derived covariance diagonal matches the Monte
/// Carlo estimate at five preregistered points (n = 16000, L = 7, 500
/// replicates) within 15% or three standard errors, whichever is larger.
/// Entries whose kernel value is below 1e-3 are checked to be negligible
/// against the point's covariance scale instead of relatively.
#[test]
fn criterion_3_covariance_arbitration() {
    let start = Instant::now();
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let rho = LagWindowSpec::Truncated.rho();
    let points = [
        pt(PI, PI / 2.0),
        pt(PI / 2.0, PI / 2.0),
        pt(2.1, 2.1 - PI),
        pt(PI / 2.0, PI / 3.0),
        pt(1.0, 1.0 - 1.5 * PI),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (i, &p) in points.iter().enumerate() {
        let sigma = asymptotics::sigma_matrix(&truth, rho, p, SigmaVariant::KernelDerived);
        let mc = mc_covariance(&model, 16_000, 7, p, p, 500, 300 + i as u64).unwrap();
        let var_re = 0.5 * (mc.sesquilinear.re + mc.bilinear.re);
        let var_im = 0.5 * (mc.sesquilinear.re - mc.bilinear.re);
        let se = 0.5 * (mc.se_sesquilinear.0 + mc.se_bilinear.0);
        let scale = sigma.trace().abs();
        for (name, kernel, mc_est) in [("s11", sigma.s11, var_re), ("s22", sigma.s22, var_im)] {
            let ok = if kernel.abs() <= 1e-3 {
                mc_est.abs() <= 0.02 * scale
            } else {
                (kernel - mc_est).abs() <= f64::max(0.15 * kernel.abs(), 3.0 * se)
            };
            if !ok {
                detail.push_str(&format!(
                    "point {i} {name}: kernel {kernel:.4}, mc {mc_est:.4}, se {se:.4}; "
                ));
            }
            pass &= ok;
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 600.0;
    if detail.is_empty() {
        detail = "kernel and Monte Carlo agree at all five points".into();
    }
    report("criterion 3 (covariance arbitration)", pass, elapsed, &detail);
}

/// Criterion 4 — coverage of the 95% subsampling confidence interval for
/// |P| at twelve preregistered (ν, λ) points, n = 500, defaults
/// (L_n = 3, b = 67, L_b = 2), 200 replicates: per-point empirical
/// coverage within [0.88, 0.99].
#[test]
fn criterion_4_ci_coverage() {
    let start = Instant::now();
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let n = 500;
    let params = subsampling::default_params(n).unwrap();
    assert_eq!((params.l_n, params.b, params.l_b), (3, 67, 2));
    let window = LagWindowSpec::Truncated;

    // Preregistered (k, λ) pairs on the ν = 2πk/120 grid, three per
    // support line.
    let registry: [(usize, f64); 12] = [
        (10, 0.0),
        (50, 0.0),
        (90, 0.0),
        (5, PI / 2.0),
        (25, PI / 2.0),
        (45, PI / 2.0),
        (20, PI),
        (60, PI),
        (100, PI),
        (15, 1.5 * PI),
        (55, 1.5 * PI),
        (95, 1.5 * PI),
    ];
    let points: Vec<BifrequencyPoint> = registry
        .iter()
        .map(|&(k, l)| pt(TAU * k as f64 / 120.0, TAU * k as f64 / 120.0 - l))
        .collect();
    let truths: Vec<f64> = points.iter().map(|&p| truth.p(p).norm()).collect();

    let reps = 200u64;
    let hits: Vec<usize> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = model.simulate(n, derive_seed(401, r)).unwrap();
            points
                .iter()
                .zip(&truths)
                .map(|(&p, &tv)| {
                    let ci = subsampling::ci_magnitude_p(&x, &window, &params, p, 0.95).unwrap();
                    usize::from(ci.lo <= tv && tv <= ci.hi)
                })
                .collect::<Vec<usize>>()
        })
        .reduce(
            || vec![0usize; points.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let coverages: Vec<f64> = hits.iter().map(|&h| h as f64 / reps as f64).collect();
    let pass_points = coverages.iter().all(|&c| (0.88..=0.99).contains(&c));
    let elapsed = start.elapsed();
    let pass = pass_points && elapsed.as_secs_f64() < 900.0;
    report(
        "criterion 4 (CI coverage)",
        pass,
        elapsed,
        &format!("per-point coverage {coverages:.2?}"),
    );
}

/// Criterion 5 — empirical size of all three tests at α = 0.01 stays at or
/// below 0.05 on i.i.d. N(0,1) data (n = 720, defaults) at four
/// off-support points, 500 replicates.
#[test]
fn criterion_5_test_size() {
    let start = Instant::now();
    let model = PeriodicMAModel::white_noise(1.0).unwrap();
    let n = 720;
    let params = subsampling::default_params(n).unwrap();
    assert_eq!((params.l_n, params.b, params.l_b, params.alpha), (4, 80, 2, 0.01));
    let window = LagWindowSpec::Truncated;
    let points = [pt(1.0, 2.0), pt(2.5, 0.7), pt(PI / 2.0, PI / 3.0), pt(5.0, 2.2)];

    let reps = 500u64;
    let rejects: Vec<[usize; 3]> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = model.simulate(n, derive_seed(501, r)).unwrap();
            let mut acc = vec![[0usize; 3]; points.len()];
            for (i, &p) in points.iter().enumerate() {
                let a = detect::subsampling_p_test(&x, &window, &params, p).unwrap();
                let b = detect::subsampling_gamma_test(&x, &window, &params, p).unwrap();
                let c = detect::chi2_p_test(&x, &window, &params, p).unwrap();
                acc[i] = [
                    usize::from(a.reject),
                    usize::from(b.reject),
                    usize::from(c.reject),
                ];
            }
            acc
        })
        .reduce(
            || vec![[0usize; 3]; points.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for k in 0..3 {
                        x[k] += y[k];
                    }
                }
                a
            },
        );

    let mut detail = String::new();
    let mut pass = true;
    for (i, counts) in rejects.iter().enumerate() {
        for (k, name) in ["subs-p", "subs-gamma", "chi2"].iter().enumerate() {
            let rate = counts[k] as f64 / reps as f64;
            detail.push_str(&format!("p{i}/{name}={rate:.3} "));
            pass &= rate <= 0.05;
        }
    }
    let elapsed = start.elapsed();
    report("criterion 5 (test size)", pass, elapsed, detail.trim());
}

fn on_line(s: usize, t: usize, grid: usize) -> bool {
    let d = (s as i64 - t as i64).rem_euclid(grid as i64) as usize;
    // ν − ω ≡ π/2, π, 3π/2 on a 120-point grid.
    d == grid / 4 || d == grid / 2 || d == 3 * grid / 4
}

/// Criterion 6 — the rejection maps reproduce the published patterns: for
/// the periodic model the mean on-line rejection fraction is at least five
/// times the off-line fraction for every method, and the stationary MA(2)
/// reproduction stays at or below 0.05 mean off-diagonal rejections.
/// Seeds 1..10, n = 720, grid 120, four workers.
///
/// Per-method MA(2) fractions are reported alongside: the two subsampling
/// maps are near-nominal, while the studentized chi-square map runs hotter
/// on colored noise because its plug-in point variances cannot see the
/// band-integrated spectral color at L_n = 4 (the effect shrinks as the
/// bandwidth grows; see the decisions ledger for the measurement).
#[test]
fn criterion_6_power_pattern() {
    let start = Instant::now();
    let n = 720;
    let grid = 120;
    let params = subsampling::default_params(n).unwrap();
    let window = LagWindowSpec::Truncated;
    let pma = PeriodicMAModel::pma1(4).unwrap();
    let ma2 = PeriodicMAModel::ma2();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();

    let mut detail = String::new();
    let mut pass = true;
    let mut ma2_overall = 0.0;
    for method in [TestMethod::SubsP, TestMethod::SubsGamma, TestMethod::Chi2P] {
        let method_start = Instant::now();
        let mut on_acc = 0.0;
        let mut off_acc = 0.0;
        let mut ma2_acc = 0.0;
        for seed in 1..=10 {
            let x = pma.simulate(n, seed).unwrap();
            let scan = pool
                .install(|| detect::scan(&x, &window, &params, grid, method))
                .unwrap();
            on_acc += scan.rejection_fraction_where(|s, t| on_line(s, t, grid));
            off_acc += scan.rejection_fraction_where(|s, t| !on_line(s, t, grid));

            let y = ma2.simulate(n, seed).unwrap();
            let scan = pool
                .install(|| detect::scan(&y, &window, &params, grid, method))
                .unwrap();
            ma2_acc += scan.rejection_fraction_where(|_, _| true);
        }
        let on = on_acc / 10.0;
        let off = off_acc / 10.0;
        let ma2_frac = ma2_acc / 10.0;
        ma2_overall += ma2_frac / 3.0;
        let method_elapsed = method_start.elapsed();
        let ok = on >= 5.0 * off && method_elapsed.as_secs_f64() < 1200.0;
        detail.push_str(&format!(
            "{}: on-line {on:.3}, off-line {off:.3}, ma2 {ma2_frac:.3} in {method_elapsed:.1?}; ",
            method.name()
        ));
        pass &= ok;
    }
    pass &= ma2_overall <= 0.05;
    detail.push_str(&format!("ma2 overall {ma2_overall:.3}"));
    let elapsed = start.elapsed();
    report("criterion 6 (power / scan pattern)", pass, elapsed, detail.trim());
}

/// Criterion 7 — consistency trend: the median two-sample Kolmogorov
/// distance between the subsampling distribution and a million draws of
/// the limit law is non-increasing over n ∈ {1000, 2000, 4000} at one
/// on-support and one off-support point (50 replicates per n).
#[test]
fn criterion_7_subsampling_consistency_trend() {
    let start = Instant::now();
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let window = LagWindowSpec::Truncated;
    let rho = window.rho();
    let points = [pt(2.1, 2.1 - PI / 2.0), pt(PI / 2.0, PI / 3.0)];

    let mut pass = true;
    let mut detail = String::new();
    for (pi, &p) in points.iter().enumerate() {
        let law = asymptotics::limit_law_p(&truth, rho, p);
        let mut law_draws =
            sample_limit_law(&law, &mut ChaCha8Rng::seed_from_u64(700), 1_000_000).unwrap();
        law_draws.sort_unstable_by(f64::total_cmp);

        let mut medians = Vec::new();
        for (ni, &n) in [1000usize, 2000, 4000].iter().enumerate() {
            let params = subsampling::default_params(n).unwrap();
            let mut distances: Vec<f64> = (0..50u64)
                .into_par_iter()
                .map(|r| {
                    let x = model
                        .simulate(n, derive_seed(701 + pi as u64, 50 * ni as u64 + r))
                        .unwrap();
                    let dist =
                        subsampling::subsample_distribution_p(&x, &window, &params, p).unwrap();
                    ks_distance(dist.values(), &law_draws).unwrap()
                })
                .collect();
            distances.sort_unstable_by(f64::total_cmp);
            medians.push(0.5 * (distances[24] + distances[25]));
        }
        let monotone = medians[0] >= medians[1] && medians[1] >= medians[2];
        detail.push_str(&format!("point {pi} medians {medians:.3?}; "));
        pass &= monotone;
    }
    let elapsed = start.elapsed();
    report(
        "criterion 7 (subsampling consistency trend)",
        pass,
        elapsed,
        detail.trim(),
    );
}

/// Criterion 8 — structural invariants: diagonal realness, conjugation
/// symmetry, coherence scale invariance, unit diagonal coherence, quantile
/// monotonicity, the window constants, and window contract validation.
#[test]
fn criterion_8_structural_invariants() {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();

    let x = PeriodicMAModel::pma1(4).unwrap().simulate(400, 8).unwrap();
    let window = LagWindowSpec::Truncated;
    let max_sq = x.samples().iter().map(|v| v * v).fold(0.0, f64::max);

    // Diagonal realness and unit coherence.
    for k in 1..=24 {
        let f = Frequency::new(TAU * k as f64 / 24.0).unwrap();
        let e = smoothed_bispectral(&x, &window, 4, BifrequencyPoint::diagonal(f)).unwrap();
        if e.value.im.abs() > 1e-10 * x.len() as f64 * max_sq {
            pass = false;
            notes.push(format!("diagonal imaginary part at {k}"));
        }
        let g = coherence_stat(&x, &window, 4, BifrequencyPoint::diagonal(f)).unwrap();
        if (g - 1.0).abs() > 1e-12 {
            pass = false;
            notes.push(format!("diagonal coherence {g} at {k}"));
        }
    }

    // Conjugation symmetry.
    for (nu, om) in [(0.9, 2.6), (PI / 2.0, PI / 3.0), (5.1, 1.4), (2.0, 2.0 - PI)] {
        let p = pt(nu, om);
        let a = smoothed_bispectral(&x, &window, 5, p).unwrap().value;
        let b = smoothed_bispectral(&x, &window, 5, p.reflected()).unwrap().value;
        if (a.conj() - b).norm() > 1e-10 * (1.0 + a.norm()) {
            pass = false;
            notes.push(format!("conjugation symmetry at ({nu}, {om})"));
        }
    }

    // Coherence scale invariance.
    let scaled = TimeSeries::new(
        x.start_index(),
        x.samples().iter().map(|v| v * -11.0).collect(),
    )
    .unwrap();
    let p = pt(1.9, 0.4);
    let c1 = coherence_stat(&x, &window, 5, p).unwrap();
    let c2 = coherence_stat(&scaled, &window, 5, p).unwrap();
    if (c1 - c2).abs() > 1e-12 * (1.0 + c1) {
        pass = false;
        notes.push("coherence scale invariance".into());
    }

    // Quantile monotonicity on a subsampling distribution.
    let params = subsampling::default_params(x.len()).unwrap();
    let dist = subsampling::subsample_distribution_p(&x, &window, &params, p).unwrap();
    let mut last = f64::NEG_INFINITY;
    for i in 1..200 {
        let q = dist.quantile(i as f64 / 200.0).unwrap();
        if q < last {
            pass = false;
            notes.push("quantile monotonicity".into());
            break;
        }
        last = q;
    }

    // Window constants and contract validation.
    if LagWindowSpec::Truncated.rho() != 2.0 {
        pass = false;
        notes.push("rho truncated".into());
    }
    if (LagWindowSpec::flat_top_trapezoid(0.5).unwrap().rho() - (1.0 + 1.0 / 3.0)).abs() > 1e-12 {
        pass = false;
        notes.push("rho trapezoid".into());
    }
    if LagWindowSpec::flat_top_trapezoid(1.0).unwrap().rho() != 2.0 {
        pass = false;
        notes.push("rho trapezoid theta=1".into());
    }
    if LagWindowSpec::custom(|_| 1.0, 1.0, 0.0).is_ok() {
        pass = false;
        notes.push("window validation accepted a support leak".into());
    }
    if LagWindowSpec::custom(
        |x: f64| if x.abs() > 1.0 { 0.0 } else { 1.0 },
        1.0,
        0.0,
    )
    .is_err()
    {
        pass = false;
        notes.push("window validation rejected the truncated taper".into());
    }

    let elapsed = start.elapsed();
    let detail = if notes.is_empty() {
        "all structural invariants hold".to_string()
    } else {
        notes.join("; ")
    };
    let pass = pass && elapsed.as_secs_f64() < 30.0;
    report("criterion 8 (structural invariants)", pass, elapsed, &detail);
}

/// Criterion 9 — bias decay: the deviation of the Monte Carlo mean of the
/// smoothed estimate from the true density at a fixed on-support point
/// strictly decreases from n = 500 to n = 8000 (200 replicates each,
/// default bandwidths).
#[test]
fn criterion_9_bias_decay() {
    let start = Instant::now();
    let model = PeriodicMAModel::pma1(4).unwrap();
    let truth = model.spectral_truth();
    let p = pt(2.1, 2.1 - PI / 2.0);
    let tv = truth.p(p);
    let window = LagWindowSpec::Truncated;

    let mc_mean = |n: usize, tag: u64| -> apc_spectra::ComplexValue {
        let l = subsampling::default_params(n).unwrap().l_n;
        let values: Vec<apc_spectra::ComplexValue> = (0..200u64)
            .into_par_iter()
            .map(|r| {
                let x = model.simulate(n, derive_seed(901 + tag, r)).unwrap();
                smoothed_bispectral(&x, &window, l, p).unwrap().value
            })
            .collect();
        values.iter().sum::<apc_spectra::ComplexValue>() / 200.0
    };

    let dev_small = (mc_mean(500, 0) - tv).norm();
    let dev_large = (mc_mean(8000, 1) - tv).norm();
    let elapsed = start.elapsed();
    let pass = dev_large < dev_small;
    report(
        "criterion 9 (bias decay)",
        pass,
        elapsed,
        &format!("|MC mean − P|: n=500 → {dev_small:.4}, n=8000 → {dev_large:.4}"),
    );
}
