//! Bound checks that pair Monte Carlo estimates with the closed-form
//! comparison functions and summarise the ratios in a [`BoundReport`].
//!
//! A pointwise ratio counts as a violation only when its `σ`-confidence
//! interval lies entirely outside `[1/C_max, C_max]` and, if confirmation
//! is enabled, the same happens again at half the time step.

use serde::{Deserialize, Serialize};

use crate::analytic::{
    dirichlet_bound_fd, green_bound_gd, pure_stable_mean_exit_time, MixedStableParams, SpaceTimePoint,
};
use crate::domain::{BallSpec, Domain, Region};
use crate::engine::{
    estimate_exit_distribution, estimate_greens, estimate_heat_kernel, estimate_heat_kernels, estimate_lambda1,
    estimate_levy_system, estimate_mean_exit_time, estimate_survival, pilot_bandwidth,
    simulate_subordinate_killed_greens, Estimate, GreenTarget, KernelTarget, McSettings,
};
use crate::error::{param, Error, Result};
use crate::stats::log_log_slope;

pub const DEFAULT_C_MAX: f64 = 50.0;
pub const DEFAULT_SIGMA: f64 = 3.0;
pub const DEFAULT_UNIFORMITY_FACTOR: f64 = 4.0;

/// Band and confirmation policy shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    pub c_max: f64,
    pub sigma: f64,
    pub confirm_with_half_dt: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            c_max: DEFAULT_C_MAX,
            sigma: DEFAULT_SIGMA,
            confirm_with_half_dt: true,
        }
    }
}

impl CheckOptions {
    fn validate(&self) -> Result<()> {
        if !(self.c_max >= 1.0 && self.sigma >= 0.0) {
            return Err(param("options", "need c_max >= 1 and sigma >= 0"));
        }
        Ok(())
    }
}

/// How a record enters the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    /// Inside the band; part of the envelope.
    Ok,
    /// Left the band beyond the confidence interval.
    Violation,
    /// Under-sampled or degenerate; kept out of the envelope.
    Excluded,
    /// Reported for context only.
    Info,
}

/// JSON writes non-finite floats as `null`; read them back as NaN.
fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One (empirical, formula) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub label: String,
    pub t: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub bandwidth: Option<f64>,
    pub dt: f64,
    pub estimate: Estimate,
    #[serde(deserialize_with = "nan_from_null")]
    pub formula: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ratio: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ratio_lo: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ratio_hi: f64,
    pub status: RecordStatus,
}

impl BoundRecord {
    #[allow(clippy::too_many_arguments)]
    fn new(
        label: impl Into<String>,
        t: Option<f64>,
        x: &[f64],
        y: &[f64],
        bandwidth: Option<f64>,
        dt: f64,
        estimate: Estimate,
        formula: f64,
        sigma: f64,
    ) -> Self {
        let ratio = estimate.value / formula;
        let half = sigma * estimate.stderr / formula;
        Self {
            label: label.into(),
            t,
            x: x.to_vec(),
            y: y.to_vec(),
            bandwidth,
            dt,
            ratio,
            ratio_lo: ratio - half,
            ratio_hi: ratio + half,
            estimate,
            formula,
            status: RecordStatus::Ok,
        }
    }

    fn with_status(mut self, status: RecordStatus) -> Self {
        self.status = status;
        self
    }

    fn classify(&mut self, c_max: f64) {
        if self.status != RecordStatus::Ok {
            return;
        }
        if !self.ratio.is_finite() || self.estimate.under_sampled() {
            self.status = RecordStatus::Excluded;
        } else if self.ratio_hi < 1.0 / c_max || self.ratio_lo > c_max {
            self.status = RecordStatus::Violation;
        }
    }
}

/// A scalar pass/fail criterion such as an exponent fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCheck {
    pub name: String,
    #[serde(deserialize_with = "nan_from_null")]
    pub value: f64,
    pub target: f64,
    /// Largest admissible `|value − target|`.
    pub allowance: f64,
    pub passed: bool,
}

impl ScalarCheck {
    pub fn new(name: impl Into<String>, value: f64, target: f64, allowance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            allowance,
            passed: (value - target).abs() <= allowance,
        }
    }

    /// Passes when `value ≤ target + allowance`.
    pub fn at_most(name: impl Into<String>, value: f64, target: f64, allowance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            allowance,
            passed: value <= target + allowance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub kind: String,
    pub params: MixedStableParams,
    pub domain: Domain,
    pub c_max: f64,
    pub records: Vec<BoundRecord>,
    pub envelope: Option<Envelope>,
    /// Indices into `records`.
    pub violations: Vec<usize>,
    pub checks: Vec<ScalarCheck>,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
}

impl BoundReport {
    fn new(name: &str, kind: &str, params: &MixedStableParams, domain: &Domain, c_max: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: kind.to_string(),
            params: *params,
            domain: domain.clone(),
            c_max,
            records: Vec::new(),
            envelope: None,
            violations: Vec::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    fn finish(mut self) -> Self {
        let mut env: Option<Envelope> = None;
        self.violations.clear();
        for (i, r) in self.records.iter().enumerate() {
            match r.status {
                RecordStatus::Ok => {
                    let e = env.get_or_insert(Envelope {
                        min: r.ratio,
                        max: r.ratio,
                    });
                    e.min = e.min.min(r.ratio);
                    e.max = e.max.max(r.ratio);
                }
                RecordStatus::Violation => self.violations.push(i),
                RecordStatus::Excluded => self.warnings.push(format!(
                    "record {i} ({}) excluded: under-sampled or degenerate",
                    r.label
                )),
                RecordStatus::Info => {}
            }
            for flag in &r.estimate.flags {
                if !matches!(flag, crate::engine::EstimateFlag::UnderSampled { .. }) {
                    self.warnings.push(format!("record {i} ({}): {flag:?}", r.label));
                }
            }
        }
        self.envelope = env;
        self.verdict = if self.violations.is_empty() && self.checks.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Bandwidth rule for ball-averaged kernel estimates. The ball is always
/// shrunk to at most half of `δ_D(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bandwidth {
    Fixed {
        h: f64,
    },
    /// Pilot run of `n/10` paths aiming at about fifty hits.
    Pilot,
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Fixed { h: 0.05 }
    }
}

/// Space-time point `(t, x, y)` for heat-kernel checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Pair `(x, y)` for Green-function checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Average of `f` over `B(y, h)` on a midpoint lattice.
pub fn ball_average<F: FnMut(&[f64]) -> f64>(y: &[f64], h: f64, mut f: F) -> f64 {
    let d = y.len();
    let m: usize = match d {
        1 => 64,
        2 => 32,
        _ => 16,
    };
    let cell = 2.0 * h / m as f64;
    let mut z = vec![0.0; d];
    let mut idx = vec![0usize; d];
    let (mut sum, mut count) = (0.0, 0usize);
    loop {
        let mut r2 = 0.0;
        for k in 0..d {
            let off = -h + (idx[k] as f64 + 0.5) * cell;
            z[k] = y[k] + off;
            r2 += off * off;
        }
        if r2 < h * h {
            sum += f(&z);
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == d {
                return sum / count as f64;
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn group_by_x<'a, I: Iterator<Item = &'a [f64]>>(xs: I) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (i, x) in xs.enumerate() {
        match groups.iter_mut().find(|g| g.0.as_slice() == x) {
            Some(g) => g.1.push(i),
            None => groups.push((x.to_vec(), vec![i])),
        }
    }
    groups
}

fn resolve_bandwidth(
    rule: Bandwidth,
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    t: f64,
    y: &[f64],
    mc: &McSettings,
) -> Result<f64> {
    let cap = 0.5 * dom.dist_to_complement(y);
    let h = match rule {
        Bandwidth::Fixed { h } if h > 0.0 => h,
        Bandwidth::Fixed { h } => return Err(param("bandwidth", format!("{h} must be positive"))),
        Bandwidth::Pilot => pilot_bandwidth(dom, p, x, t, y, mc)?,
    };
    Ok(h.min(cap))
}

fn dirichlet_formula(dom: &Domain, p: &MixedStableParams, t: f64, x: &[f64], y: &[f64], h: f64) -> Result<f64> {
    let dx = dom.dist_to_complement(x);
    let mut err = None;
    let v = ball_average(y, h, |z| {
        let pt = SpaceTimePoint {
            t,
            x: x.to_vec(),
            y: z.to_vec(),
            delta_x: dx,
            delta_y: dom.dist_to_complement(z),
        };
        dirichlet_bound_fd(&pt, p).unwrap_or_else(|e| {
            err = Some(e);
            f64::NAN
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Two-sided Dirichlet heat-kernel check: `p̂_D / f_D^a` over a grid of
/// `(t, x, y)`, with `f_D^a` averaged over the same ball as the estimate.
/// Points sharing `x` share one set of paths.
pub fn check_dirichlet_bound(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    grid: &[KernelPoint],
    bandwidth: Bandwidth,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    if grid.is_empty() {
        return Err(param("grid", "no points"));
    }
    let mut report = BoundReport::new(name, "dirichlet", p, dom, opts.c_max);
    let mut records: Vec<Option<BoundRecord>> = vec![None; grid.len()];
    let groups = group_by_x(grid.iter().map(|g| g.x.as_slice()));
    for (gi, (x, idx)) in groups.iter().enumerate() {
        let run = |mc: &McSettings, which: &[usize]| -> Result<Vec<BoundRecord>> {
            let mut targets = Vec::with_capacity(which.len());
            for &i in which {
                let pt = &grid[i];
                let h = resolve_bandwidth(bandwidth, dom, p, x, pt.t, &pt.y, mc)?;
                targets.push(KernelTarget {
                    t: pt.t,
                    y: pt.y.clone(),
                    h,
                });
            }
            let ests = estimate_heat_kernels(dom, p, x, &targets, mc)?;
            targets
                .iter()
                .zip(ests)
                .map(|(tg, est)| {
                    let f = dirichlet_formula(dom, p, tg.t, x, &tg.y, tg.h)?;
                    let mut rec = BoundRecord::new("p_D", Some(tg.t), x, &tg.y, Some(tg.h), mc.dt, est, f, opts.sigma);
                    rec.classify(opts.c_max);
                    Ok(rec)
                })
                .collect()
        };
        let mc_g = mc.with_seed(mc.seed.derive(gi as u64));
        let recs = run(&mc_g, idx)?;
        let bad: Vec<usize> = idx
            .iter()
            .zip(&recs)
            .filter(|(_, r)| r.status == RecordStatus::Violation)
            .map(|(&i, _)| i)
            .collect();
        for (&i, r) in idx.iter().zip(recs) {
            records[i] = Some(r);
        }
        if opts.confirm_with_half_dt && !bad.is_empty() {
            let mut fine = mc_g.with_seed(mc.seed.derive(0xD7_0000 + gi as u64));
            fine.dt = mc.dt / 2.0;
            for (&i, r) in bad.iter().zip(run(&fine, &bad)?) {
                report
                    .warnings
                    .push(format!("point {i} re-run at dt/2 to confirm a violation"));
                records[i] = Some(r);
            }
        }
    }
    report.records = records
        .into_iter()
        .map(|r| r.expect("every point belongs to a group"))
        .collect();
    Ok(report.finish())
}

/// Uniformity in `a`: the envelopes of reports run at different weights
/// must agree within `factor` at both ends.
pub fn check_uniformity(name: &str, reports: &[&BoundReport], factor: f64) -> Result<BoundReport> {
    let first = reports
        .first()
        .ok_or_else(|| param("reports", "need at least one report"))?;
    let mut report = BoundReport::new(name, "uniformity", &first.params, &first.domain, first.c_max);
    let envs: Vec<Envelope> = reports.iter().filter_map(|r| r.envelope).collect();
    if envs.len() != reports.len() {
        return Err(Error::Precondition("every report needs a ratio envelope".into()));
    }
    let spread = |v: Vec<f64>| {
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        hi / lo
    };
    let upper = spread(envs.iter().map(|e| e.max).collect());
    let lower = spread(envs.iter().map(|e| e.min).collect());
    report
        .checks
        .push(ScalarCheck::at_most("spread of envelope maxima", upper, factor, 0.0));
    report
        .checks
        .push(ScalarCheck::at_most("spread of envelope minima", lower, factor, 0.0));
    for r in reports {
        let e = r.envelope.expect("checked above");
        report.warnings.push(format!(
            "{}: a = {}, envelope [{:.4}, {:.4}]",
            r.name,
            r.params.a(),
            e.min,
            e.max
        ));
    }
    Ok(report.finish())
}

/// `p^{aλ^{(α−β)/β}}_{λ^{−1}D}(t, x, y) = λ^d p^a_D(λ^α t, λx, λy)` with two
/// independent runs; the right side uses bandwidth `λh` and step `λ^α dt`
/// so both estimators are equal in law.
#[allow(clippy::too_many_arguments)]
pub fn check_scaling_identity(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    lambda: f64,
    point: &KernelPoint,
    h: f64,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(param("lambda", "must be positive"));
    }
    let (alpha, beta) = (p.alpha(), p.beta());
    let small = dom.scaled(1.0 / lambda)?;
    let p_small = p.with_a(p.a() * lambda.powf((alpha - beta) / beta))?;
    let lhs = estimate_heat_kernel(
        &small,
        &p_small,
        point.t,
        &point.x,
        &point.y,
        h,
        &mc.with_seed(mc.seed.derive(1)),
    )?;
    let la = lambda.powf(alpha);
    let mut mc_big = mc.with_seed(mc.seed.derive(2));
    mc_big.dt = mc.dt * la;
    if let Some(cap) = mc.t_cap {
        mc_big.t_cap = Some(cap * la);
    }
    let xs: Vec<f64> = point.x.iter().map(|v| v * lambda).collect();
    let ys: Vec<f64> = point.y.iter().map(|v| v * lambda).collect();
    let rhs =
        estimate_heat_kernel(dom, p, point.t * la, &xs, &ys, h * lambda, &mc_big)?.scaled(lambda.powi(p.d() as i32));
    let diff = lhs.value - rhs.value;
    let se = lhs.combined_stderr(&rhs);
    let mut report = BoundReport::new(name, "scaling", p, dom, opts.c_max);
    let rhs_value = rhs.value;
    let lhs_value = lhs.value;
    report.records.push(
        BoundRecord::new(
            "lhs",
            Some(point.t),
            &point.x,
            &point.y,
            Some(h),
            mc.dt,
            lhs,
            rhs_value,
            opts.sigma,
        )
        .with_status(RecordStatus::Info),
    );
    report.records.push(
        BoundRecord::new(
            "rhs",
            Some(point.t * la),
            &xs,
            &ys,
            Some(h * lambda),
            mc_big.dt,
            rhs,
            lhs_value,
            opts.sigma,
        )
        .with_status(RecordStatus::Info),
    );
    report.checks.push(ScalarCheck::new(
        format!("lhs - rhs at lambda = {lambda}"),
        diff,
        0.0,
        opts.sigma * se,
    ));
    Ok(report.finish())
}

fn green_formula(dom: &Domain, p: &MixedStableParams, x: &[f64], y: &[f64], h: f64) -> Result<f64> {
    let dx = dom.dist_to_complement(x);
    let mut err = None;
    let v = ball_average(y, h, |z| {
        let r = crate::analytic::euclidean(x, z);
        green_bound_gd(r, dx, dom.dist_to_complement(z), p).unwrap_or_else(|e| {
            err = Some(e);
            f64::NAN
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Two-sided Green-function check `Ĝ / g_D` plus, optionally, the ordering
/// `R̂ ≤ Ĝ` between the subordinate killed and the killed process.
#[allow(clippy::too_many_arguments)]
pub fn check_green_bounds(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    pairs: &[PointPair],
    h: f64,
    ordering: bool,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    if pairs.is_empty() {
        return Err(param("pairs", "no points"));
    }
    if dom.diameter().is_none() {
        return Err(Error::Precondition("the Green check needs a bounded domain".into()));
    }
    let mut report = BoundReport::new(name, "green", p, dom, opts.c_max);
    let mut records: Vec<Option<BoundRecord>> = vec![None; pairs.len()];
    let mut extra = Vec::new();
    let groups = group_by_x(pairs.iter().map(|g| g.x.as_slice()));
    for (gi, (x, idx)) in groups.iter().enumerate() {
        let targets_for = |which: &[usize]| -> Vec<GreenTarget> {
            which
                .iter()
                .map(|&i| GreenTarget {
                    y: pairs[i].y.clone(),
                    h: h.min(0.5 * dom.dist_to_complement(&pairs[i].y)),
                })
                .collect()
        };
        let run = |mc: &McSettings, which: &[usize]| -> Result<Vec<BoundRecord>> {
            let targets = targets_for(which);
            let ests = estimate_greens(dom, p, x, &targets, mc)?;
            targets
                .iter()
                .zip(ests)
                .map(|(tg, est)| {
                    let f = green_formula(dom, p, x, &tg.y, tg.h)?;
                    let mut rec = BoundRecord::new("G_D", None, x, &tg.y, Some(tg.h), mc.dt, est, f, opts.sigma);
                    rec.classify(opts.c_max);
                    Ok(rec)
                })
                .collect()
        };
        let mc_g = mc.with_seed(mc.seed.derive(gi as u64));
        let recs = run(&mc_g, idx)?;
        let bad: Vec<usize> = idx
            .iter()
            .zip(&recs)
            .filter(|(_, r)| r.status == RecordStatus::Violation)
            .map(|(&i, _)| i)
            .collect();
        for (&i, r) in idx.iter().zip(recs) {
            records[i] = Some(r);
        }
        if opts.confirm_with_half_dt && !bad.is_empty() {
            let mut fine = mc_g.with_seed(mc.seed.derive(0xD7_0000 + gi as u64));
            fine.dt = mc.dt / 2.0;
            for (&i, r) in bad.iter().zip(run(&fine, &bad)?) {
                report
                    .warnings
                    .push(format!("pair {i} re-run at dt/2 to confirm a violation"));
                records[i] = Some(r);
            }
        }
        if ordering {
            let targets = targets_for(idx);
            let sub = simulate_subordinate_killed_greens(
                dom,
                p,
                x,
                &targets,
                &mc.with_seed(mc.seed.derive(0x5B_0000 + gi as u64)),
            )?;
            for ((&i, tg), r_hat) in idx.iter().zip(&targets).zip(sub) {
                let g_hat = records[i].as_ref().expect("filled above").estimate.clone();
                let se = r_hat.combined_stderr(&g_hat);
                report.checks.push(ScalarCheck::at_most(
                    format!("R <= G at x={:?}, y={:?}", x, tg.y),
                    r_hat.value - g_hat.value,
                    0.0,
                    opts.sigma * se,
                ));
                extra.push(
                    BoundRecord::new("R_U", None, x, &tg.y, Some(tg.h), mc.dt, r_hat, g_hat.value, opts.sigma)
                        .with_status(RecordStatus::Info),
                );
            }
        }
    }
    report.records = records
        .into_iter()
        .map(|r| r.expect("every pair belongs to a group"))
        .collect();
    report.records.extend(extra);
    Ok(report.finish())
}

/// Boundary Harnack check for `u(x) = P_x(X_{τ} ∈ D \ B(Q, r))`, the exit
/// distribution of `D ∩ B(Q, r)`: for every ordered pair of points in
/// `D ∩ B(Q, r/2)` the ratio `(u(x)/u(y)) (δ_D(y)/δ_D(x))^{α/2}` must stay
/// in the band. With `exponent_tol`, the slope of `log u` against
/// `log δ_D` is also checked against `α/2`.
#[allow(clippy::too_many_arguments)]
pub fn check_bhp(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    q: &[f64],
    r: f64,
    points: &[Vec<f64>],
    exponent_tol: Option<f64>,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    if !(r > 0.0) {
        return Err(param("r", "must be positive"));
    }
    if points.is_empty() {
        return Err(param("points", "no points"));
    }
    let ball = Domain::ball(q.to_vec(), r)?;
    let local = Domain::intersection(vec![dom.clone(), ball.clone()])?;
    let inner = Domain::ball(q.to_vec(), r / 2.0)?;
    for x in points {
        if !(dom.contains(x) && inner.contains(x)) {
            return Err(Error::Precondition(format!("{x:?} is not in D ∩ B(Q, r/2)")));
        }
    }
    let region = Region::Intersection {
        parts: vec![Region::Inside { domain: dom.clone() }, Region::Outside { domain: ball }],
    };
    let mut u = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        u.push(estimate_exit_distribution(
            &local,
            p,
            x,
            &region,
            &mc.with_seed(mc.seed.derive(i as u64)),
        )?);
    }
    let delta: Vec<f64> = points.iter().map(|x| dom.dist_to_complement(x)).collect();
    let half = p.alpha() / 2.0;
    let mut report = BoundReport::new(name, "bhp", p, dom, opts.c_max);
    for (i, x) in points.iter().enumerate() {
        report.records.push(
            BoundRecord::new(
                "u",
                None,
                x,
                &[],
                None,
                mc.dt,
                u[i].clone(),
                delta[i].powf(half),
                opts.sigma,
            )
            .with_status(RecordStatus::Info),
        );
    }
    for i in 0..points.len() {
        for j in 0..points.len() {
            let (ui, uj) = (&u[i], &u[j]);
            let value = if i == j { 1.0 } else { ui.value / uj.value };
            let rel = if i == j {
                0.0
            } else {
                ((ui.stderr / ui.value).powi(2) + (uj.stderr / uj.value).powi(2)).sqrt()
            };
            let est = Estimate {
                value,
                stderr: value * rel,
                n: ui.n,
                seed: ui.seed,
                flags: Vec::new(),
            };
            let formula = (delta[i] / delta[j]).powf(half);
            let mut rec = BoundRecord::new(
                "u(x)/u(y)",
                None,
                &points[i],
                &points[j],
                None,
                mc.dt,
                est,
                formula,
                opts.sigma,
            );
            if ui.value == 0.0 || uj.value == 0.0 {
                rec.status = RecordStatus::Excluded;
            }
            rec.classify(opts.c_max);
            report.records.push(rec);
        }
    }
    if let Some(tol) = exponent_tol {
        let fit = log_log_slope(&delta, &u.iter().map(|e| e.value).collect::<Vec<_>>())?;
        report.checks.push(ScalarCheck::new(
            "slope of log u against log delta",
            fit.slope,
            half,
            tol,
        ));
    }
    Ok(report.finish())
}

/// Lévy-system identity for `f = 1_{D×A}`: expected number of jumps from
/// `D` into the ball `A` before exit against the occupation integral of
/// `∫_A j^a`. The sides are compared through their per-path difference;
/// `bias_allowance` is relative to the occupation side.
pub fn check_levy_system(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    target: &BallSpec,
    x0: &[f64],
    bias_allowance: f64,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    let est = estimate_levy_system(dom, p, x0, target, mc)?;
    let mut report = BoundReport::new(name, "levy_system", p, dom, opts.c_max);
    let occ = est.occupation.value;
    report.records.push(
        BoundRecord::new(
            "jumps",
            None,
            x0,
            &target.center,
            Some(target.radius),
            mc.dt,
            est.jumps.clone(),
            occ,
            opts.sigma,
        )
        .with_status(RecordStatus::Info),
    );
    report.records.push(
        BoundRecord::new(
            "occupation",
            None,
            x0,
            &target.center,
            Some(target.radius),
            mc.dt,
            est.occupation.clone(),
            occ,
            opts.sigma,
        )
        .with_status(RecordStatus::Info),
    );
    report.checks.push(ScalarCheck::new(
        "jumps - occupation",
        est.difference.value,
        0.0,
        opts.sigma * est.difference.stderr + bias_allowance * occ.abs(),
    ));
    Ok(report.finish())
}

/// Mean exit time of the pure stable process from a ball against the
/// closed form. Runs at `dt` and `dt/2`; the part of their difference not
/// explained by noise, scaled as an order-1/2 Richardson correction, is the
/// bias allowance for the `dt/2` estimate.
pub fn check_exit_time_oracle(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    let Domain::Ball { center, radius } = dom else {
        return Err(Error::Precondition("the exit-time oracle needs a ball".into()));
    };
    if p.a() != 0.0 {
        return Err(Error::Precondition("the exit-time oracle needs a = 0".into()));
    }
    let exact = pure_stable_mean_exit_time(p.d(), p.alpha(), *radius, crate::analytic::euclidean(x0, center))?;
    let coarse = estimate_mean_exit_time(dom, p, x0, &mc.with_seed(mc.seed.derive(1)))?;
    let mut fine_mc = mc.with_seed(mc.seed.derive(2));
    fine_mc.dt = mc.dt / 2.0;
    let fine = estimate_mean_exit_time(dom, p, x0, &fine_mc)?;
    let se_pair = coarse.combined_stderr(&fine);
    let bias = ((coarse.value - fine.value).abs() - opts.sigma * se_pair).max(0.0) / (2f64.sqrt() - 1.0);
    let mut report = BoundReport::new(name, "exit_time", p, dom, opts.c_max);
    let fine_se = fine.stderr;
    let fine_value = fine.value;
    report.records.push(
        BoundRecord::new("E tau (dt)", None, x0, &[], None, mc.dt, coarse, exact, opts.sigma)
            .with_status(RecordStatus::Info),
    );
    report.records.push(
        BoundRecord::new("E tau (dt/2)", None, x0, &[], None, fine_mc.dt, fine, exact, opts.sigma)
            .with_status(RecordStatus::Info),
    );
    report.checks.push(ScalarCheck::new(
        "E tau at dt/2 against closed form",
        fine_value,
        exact,
        opts.sigma * fine_se + bias,
    ));
    Ok(report.finish())
}

/// Quantity whose boundary decay exponent is fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecayQuantity {
    Survival { t: f64 },
    MeanExitTime,
    ExitProbability { region: Region },
}

/// Log-log fit of a quantity against `δ_D(x)` over the given start points;
/// the slope must be within `tol` of `α/2`.
#[allow(clippy::too_many_arguments)]
pub fn check_boundary_exponent(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    quantity: &DecayQuantity,
    points: &[Vec<f64>],
    tol: f64,
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    if points.len() < 2 {
        return Err(param("points", "need at least two start points"));
    }
    let half = p.alpha() / 2.0;
    let mut report = BoundReport::new(name, "exponent", p, dom, opts.c_max);
    let (mut ds, mut vs) = (Vec::new(), Vec::new());
    for (i, x) in points.iter().enumerate() {
        let mc_i = mc.with_seed(mc.seed.derive(i as u64));
        let (est, t) = match quantity {
            DecayQuantity::Survival { t } => (estimate_survival(dom, p, x, *t, &mc_i)?, Some(*t)),
            DecayQuantity::MeanExitTime => (estimate_mean_exit_time(dom, p, x, &mc_i)?, None),
            DecayQuantity::ExitProbability { region } => (estimate_exit_distribution(dom, p, x, region, &mc_i)?, None),
        };
        let delta = dom.dist_to_complement(x);
        ds.push(delta);
        vs.push(est.value);
        report.records.push(
            BoundRecord::new("value", t, x, &[], None, mc.dt, est, delta.powf(half), opts.sigma)
                .with_status(RecordStatus::Info),
        );
    }
    let slope = match log_log_slope(&ds, &vs) {
        Ok(fit) => fit.slope,
        Err(_) => {
            report.warnings.push("a zero estimate prevents the log-log fit".into());
            f64::NAN
        }
    };
    report
        .checks
        .push(ScalarCheck::new("log-log slope against delta", slope, half, tol));
    Ok(report.finish())
}

/// Principal-eigenvalue estimates from several start points, which must
/// agree within the confidence band.
pub fn check_lambda1(
    name: &str,
    dom: &Domain,
    p: &MixedStableParams,
    starts: &[Vec<f64>],
    t_grid: &[f64],
    mc: &McSettings,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    opts.validate()?;
    let mut report = BoundReport::new(name, "lambda1", p, dom, opts.c_max);
    let mut ests = Vec::new();
    for (i, x) in starts.iter().enumerate() {
        let e = estimate_lambda1(dom, p, x, t_grid, &mc.with_seed(mc.seed.derive(i as u64)))?;
        ests.push(e.clone());
        report.records.push(
            BoundRecord::new("lambda1", None, x, &[], None, mc.dt, e, f64::NAN, opts.sigma)
                .with_status(RecordStatus::Info),
        );
    }
    for (i, e) in ests.iter().enumerate().skip(1) {
        report.checks.push(ScalarCheck::new(
            format!("lambda1 from start {i} against start 0"),
            e.value - ests[0].value,
            0.0,
            opts.sigma * e.combined_stderr(&ests[0]),
        ));
    }
    Ok(report.finish())
}
