use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{
    aligned_step, ball_volume, run_blocks, steps_for, Estimate, EstimateFlag, McSettings, Moments, WalkEnd, Walker,
};
use crate::analytic::{euclidean, levy_mass_ball, MixedStableParams};
use crate::domain::{BallSpec, Domain, Region};
use crate::error::{param, Error, Result};
use crate::rng::add_normals;
use crate::sampler::{PositiveStable, SubordinatorSampler, SymmetricStable};

const CAPPED_WARNING: f64 = 0.01;
const MIN_HITS: f64 = 10.0;

/// Heat-kernel target: ball `B(y, h)` observed at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTarget {
    pub t: f64,
    pub y: Vec<f64>,
    pub h: f64,
}

/// Green-function target ball `B(y, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenTarget {
    pub y: Vec<f64>,
    pub h: f64,
}

fn capped_flag(est: &mut Estimate, capped_fraction: f64) {
    if capped_fraction > CAPPED_WARNING {
        est.flags.push(EstimateFlag::Capped {
            fraction: capped_fraction,
        });
    }
}

/// Fraction of paths from `x0` still alive at time `t`.
pub fn estimate_survival(dom: &Domain, p: &MixedStableParams, x0: &[f64], t: f64, mc: &McSettings) -> Result<Estimate> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    if !(t > 0.0) {
        return Err(param("t", "must be positive"));
    }
    let steps = steps_for(t, mc.dt);
    let walker = Walker::new(dom, p, t / steps as f64)?;
    let parts = run_blocks(
        mc.n,
        || Moments::new(1),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let alive = walker.walk(&mut rng, &mut pos, steps, |_, _| {}) == WalkEnd::Survived;
            acc.push(&[alive as u8 as f64]);
        },
    );
    Ok(Moments::merge_all(&parts, 1).binomial(0, mc.seed))
}

/// Survival fractions at several grid-aligned times, from one set of paths.
pub fn estimate_survival_curve(
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    times: &[f64],
    mc: &McSettings,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    let steps: Vec<usize> = times.iter().map(|&t| aligned_step(t, mc.dt)).collect::<Result<_>>()?;
    let max_steps = steps.iter().copied().max().unwrap_or(0);
    let walker = Walker::new(dom, p, mc.dt)?;
    let m = times.len();
    let parts = run_blocks(
        mc.n,
        || Moments::new(m),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let exit = match walker.walk(&mut rng, &mut pos, max_steps, |_, _| {}) {
                WalkEnd::Exited(k) => k,
                WalkEnd::Survived => usize::MAX,
            };
            let vals: Vec<f64> = steps.iter().map(|&k| (k < exit) as u8 as f64).collect();
            acc.push(&vals);
        },
    );
    let total = Moments::merge_all(&parts, m);
    Ok((0..m).map(|j| total.binomial(j, mc.seed)).collect())
}

/// Ball averages of `p_D(t, x, ·)` over several targets from one set of
/// paths started at `x`. Target times must be multiples of `dt`.
pub fn estimate_heat_kernels(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    targets: &[KernelTarget],
    mc: &McSettings,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    dom.require_inside(x, "x")?;
    let mut schedule = Vec::with_capacity(targets.len());
    for (j, tg) in targets.iter().enumerate() {
        dom.require_inside(&tg.y, "y")?;
        if !(tg.h > 0.0) {
            return Err(param("bandwidth", "must be positive"));
        }
        schedule.push((aligned_step(tg.t, mc.dt)?, j));
    }
    schedule.sort();
    let max_steps = schedule.last().map_or(0, |s| s.0);
    let walker = Walker::new(dom, p, mc.dt)?;
    let m = targets.len();
    let parts = run_blocks(
        mc.n,
        || Moments::new(m),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x.to_vec();
            let mut hits = vec![0.0; m];
            let mut next = 0;
            walker.walk(&mut rng, &mut pos, max_steps, |k, z| {
                while next < schedule.len() && schedule[next].0 == k {
                    let tg = &targets[schedule[next].1];
                    if euclidean(z, &tg.y) < tg.h {
                        hits[schedule[next].1] = 1.0;
                    }
                    next += 1;
                }
            });
            acc.push(&hits);
        },
    );
    let total = Moments::merge_all(&parts, m);
    Ok(targets
        .iter()
        .enumerate()
        .map(|(j, tg)| {
            let vol = ball_volume(p.d(), tg.h);
            let mut est = total.binomial(j, mc.seed).scaled(1.0 / vol);
            if total.sum[j] < MIN_HITS {
                est.flags.push(EstimateFlag::UnderSampled { count: total.sum[j] });
            }
            est
        })
        .collect())
}

/// Ball average of `p_D(t, x, ·)` over `B(y, h)`.
pub fn estimate_heat_kernel(
    dom: &Domain,
    p: &MixedStableParams,
    t: f64,
    x: &[f64],
    y: &[f64],
    h: f64,
    mc: &McSettings,
) -> Result<Estimate> {
    let target = KernelTarget { t, y: y.to_vec(), h };
    Ok(estimate_heat_kernels(dom, p, x, &[target], mc)?.remove(0))
}

/// Positions at time `t` of paths from `x`, binned on a one-dimensional grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Alive at `t` but outside `[edges[0], edges[last])`.
    pub outside: u64,
    pub killed: u64,
    pub n: u64,
}

impl Histogram {
    /// Per-bin density estimates `count / (n · width)`.
    pub fn densities(&self, seed: crate::rng::SeedSpec) -> Vec<Estimate> {
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| Estimate::binomial(c as f64, self.n, seed).scaled(1.0 / (w[1] - w[0])))
            .collect()
    }

    pub fn survival(&self, seed: crate::rng::SeedSpec) -> Estimate {
        Estimate::binomial((self.n - self.killed) as f64, self.n, seed)
    }
}

/// Histogram of the killed process at time `t` in one dimension.
pub fn position_histogram_1d(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    t: f64,
    edges: &[f64],
    mc: &McSettings,
) -> Result<Histogram> {
    mc.validate()?;
    dom.require_inside(x, "x")?;
    if p.d() != 1 {
        return Err(Error::UnsupportedDimension(p.d()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(param("edges", "need at least two strictly increasing edges"));
    }
    let steps = aligned_step(t, mc.dt)?;
    let walker = Walker::new(dom, p, mc.dt)?;
    let bins = edges.len() - 1;
    let parts = run_blocks(
        mc.n,
        || vec![0u64; bins + 2],
        |i, acc: &mut Vec<u64>| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x.to_vec();
            match walker.walk(&mut rng, &mut pos, steps, |_, _| {}) {
                WalkEnd::Exited(_) => acc[bins + 1] += 1,
                WalkEnd::Survived => {
                    let z = pos[0];
                    if z >= edges[0] && z < edges[bins] {
                        let b = edges.partition_point(|&e| e <= z) - 1;
                        acc[b] += 1;
                    } else {
                        acc[bins] += 1;
                    }
                }
            }
        },
    );
    let mut total = vec![0u64; bins + 2];
    for part in parts {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts: total[..bins].to_vec(),
        outside: total[bins],
        killed: total[bins + 1],
        n: mc.n as u64,
    })
}

/// `E_x[τ_D ∧ t_cap]` with grid exit times.
pub fn estimate_mean_exit_time(dom: &Domain, p: &MixedStableParams, x0: &[f64], mc: &McSettings) -> Result<Estimate> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    let t_cap = mc.resolved_t_cap(dom, p)?;
    let max_steps = steps_for(t_cap, mc.dt);
    let walker = Walker::new(dom, p, mc.dt)?;
    let parts = run_blocks(
        mc.n,
        || Moments::new(2),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let vals = match walker.walk(&mut rng, &mut pos, max_steps, |_, _| {}) {
                WalkEnd::Exited(k) => [k as f64 * mc.dt, 0.0],
                WalkEnd::Survived => [max_steps as f64 * mc.dt, 1.0],
            };
            acc.push(&vals);
        },
    );
    let total = Moments::merge_all(&parts, 2);
    let mut est = total.estimate(0, mc.seed);
    capped_flag(&mut est, total.mean(1));
    Ok(est)
}

/// `P_x(X_{τ_D} ∈ region)`; paths alive at `t_cap` count as misses.
pub fn estimate_exit_distribution(
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    region: &Region,
    mc: &McSettings,
) -> Result<Estimate> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    let t_cap = mc.resolved_t_cap(dom, p)?;
    let max_steps = steps_for(t_cap, mc.dt);
    let walker = Walker::new(dom, p, mc.dt)?;
    let parts = run_blocks(
        mc.n,
        || Moments::new(2),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let vals = match walker.walk(&mut rng, &mut pos, max_steps, |_, _| {}) {
                WalkEnd::Exited(_) => [region.contains(&pos) as u8 as f64, 0.0],
                WalkEnd::Survived => [0.0, 1.0],
            };
            acc.push(&vals);
        },
    );
    let total = Moments::merge_all(&parts, 2);
    let mut est = total.binomial(0, mc.seed);
    capped_flag(&mut est, total.mean(1));
    Ok(est)
}

fn check_green_targets(dom: &Domain, x: &[f64], targets: &[GreenTarget]) -> Result<()> {
    dom.require_inside(x, "x")?;
    for tg in targets {
        dom.require_inside(&tg.y, "y")?;
        if !(tg.h > 0.0) {
            return Err(param("bandwidth", "must be positive"));
        }
        if euclidean(x, &tg.y) <= 2.0 * tg.h {
            return Err(Error::Precondition(format!(
                "|x - y| = {} must exceed twice the bandwidth {}",
                euclidean(x, &tg.y),
                tg.h
            )));
        }
    }
    Ok(())
}

fn finish_occupation(total: &Moments, targets: &[GreenTarget], d: usize, dt: f64, mc: &McSettings) -> Vec<Estimate> {
    let m = targets.len();
    let capped = total.mean(m);
    targets
        .iter()
        .enumerate()
        .map(|(j, tg)| {
            let vol = ball_volume(d, tg.h);
            let mut est = total.estimate(j, mc.seed).scaled(dt / vol);
            if total.sum[j] < MIN_HITS {
                est.flags.push(EstimateFlag::UnderSampled { count: total.sum[j] });
            }
            capped_flag(&mut est, capped);
            est
        })
        .collect()
}

/// Occupation-time estimates of `G_D(x, y)` for several target balls.
pub fn estimate_greens(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    targets: &[GreenTarget],
    mc: &McSettings,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_green_targets(dom, x, targets)?;
    let t_cap = mc.resolved_t_cap(dom, p)?;
    let max_steps = steps_for(t_cap, mc.dt);
    let walker = Walker::new(dom, p, mc.dt)?;
    let m = targets.len();
    let parts = run_blocks(
        mc.n,
        || Moments::new(m + 1),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x.to_vec();
            let mut visits = vec![0.0; m + 1];
            let end = walker.walk(&mut rng, &mut pos, max_steps - 1, |_, z| {
                for (v, tg) in visits.iter_mut().zip(targets) {
                    if euclidean(z, &tg.y) < tg.h {
                        *v += 1.0;
                    }
                }
            });
            if end == WalkEnd::Survived {
                visits[m] = 1.0;
            }
            acc.push(&visits);
        },
    );
    let total = Moments::merge_all(&parts, m + 1);
    Ok(finish_occupation(&total, targets, p.d(), mc.dt, mc))
}

/// Occupation-time estimate of `G_D(x, y)` over `B(y, h)`.
pub fn estimate_green(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    y: &[f64],
    h: f64,
    mc: &McSettings,
) -> Result<Estimate> {
    let tg = GreenTarget { y: y.to_vec(), h };
    Ok(estimate_greens(dom, p, x, &[tg], mc)?.remove(0))
}

/// Pure α-stable increments over arbitrary step lengths.
#[derive(Debug, Clone, Copy)]
struct VariableStepStable {
    inv_alpha: f64,
    two_over_alpha: f64,
    cms: SymmetricStable,
    sub: PositiveStable,
    d: usize,
}

impl VariableStepStable {
    fn new(p: &MixedStableParams) -> Result<Self> {
        Ok(Self {
            inv_alpha: 1.0 / p.alpha(),
            two_over_alpha: 2.0 / p.alpha(),
            cms: SymmetricStable::new(p.alpha())?,
            sub: PositiveStable::new(p.alpha() / 2.0)?,
            d: p.d(),
        })
    }

    #[inline]
    fn add_to<R: RngCore + ?Sized>(&self, rng: &mut R, pos: &mut [f64], h: f64) {
        if self.d == 1 {
            pos[0] += libm::pow(h, self.inv_alpha) * self.cms.sample(rng);
        } else {
            let sd = (2.0 * libm::pow(h, self.two_over_alpha) * self.sub.sample(rng)).sqrt();
            add_normals(rng, sd, pos);
        }
    }
}

/// Occupation-time estimates of the Green function of the subordinate
/// killed process `Z_s = X^D_{T^a_s}`.
///
/// The pure α-stable path is killed on sub-steps of length at most `dt`;
/// the subordinator is sampled on the outer grid `s_k = k·dt`, and `Z` is
/// read off `X^D` at the times `T^a_{s_k}`.
pub fn simulate_subordinate_killed_greens(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    targets: &[GreenTarget],
    mc: &McSettings,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_green_targets(dom, x, targets)?;
    if dom.dim() != p.d() {
        return Err(Error::Precondition("domain and parameter dimensions differ".into()));
    }
    let t_cap = mc.resolved_t_cap(dom, p)?;
    let max_outer = steps_for(t_cap, mc.dt);
    let stable = VariableStepStable::new(p)?;
    let clock = SubordinatorSampler::new(p, mc.dt)?;
    let dt = mc.dt;
    let m = targets.len();
    let parts = run_blocks(
        mc.n,
        || Moments::new(m + 1),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x.to_vec();
            let mut visits = vec![0.0; m + 1];
            let mut alive = true;
            'outer: for _ in 0..max_outer {
                for (v, tg) in visits.iter_mut().zip(targets) {
                    if euclidean(&pos, &tg.y) < tg.h {
                        *v += 1.0;
                    }
                }
                let jump = clock.sample(&mut rng);
                let sub_steps = (jump / dt).ceil().max(1.0);
                let h = jump / sub_steps;
                for _ in 0..sub_steps as u64 {
                    stable.add_to(&mut rng, &mut pos, h);
                    if !dom.contains(&pos) {
                        alive = false;
                        break 'outer;
                    }
                }
            }
            if alive {
                visits[m] = 1.0;
            }
            acc.push(&visits);
        },
    );
    let total = Moments::merge_all(&parts, m + 1);
    Ok(finish_occupation(&total, targets, p.d(), dt, mc))
}

pub fn simulate_subordinate_killed_green(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    y: &[f64],
    h: f64,
    mc: &McSettings,
) -> Result<Estimate> {
    let tg = GreenTarget { y: y.to_vec(), h };
    Ok(simulate_subordinate_killed_greens(dom, p, x, &[tg], mc)?.remove(0))
}

const LAMBDA_BATCHES: usize = 10;
const LAMBDA_MIN_COUNT: u64 = 100;

fn ls_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    sxy / sxx
}

/// Principal Dirichlet eigenvalue from the decay rate of the survival
/// probability: least-squares slope of `−log S(t)` over the second half of
/// `t_grid`. The standard error comes from ten interleaved path batches.
pub fn estimate_lambda1(
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    t_grid: &[f64],
    mc: &McSettings,
) -> Result<Estimate> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    if dom.diameter().is_none() {
        return Err(Error::Precondition(
            "eigenvalue estimation needs a bounded domain".into(),
        ));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 4 {
        return Err(param("t_grid", "need at least four distinct times"));
    }
    let window = grid[grid.len() / 2..].to_vec();
    let steps: Vec<usize> = window.iter().map(|&t| aligned_step(t, mc.dt)).collect::<Result<_>>()?;
    let max_steps = *steps.last().expect("non-empty");
    let walker = Walker::new(dom, p, mc.dt)?;
    let w = window.len();
    let parts = run_blocks(
        mc.n,
        || vec![0u64; LAMBDA_BATCHES * w],
        |i, acc: &mut Vec<u64>| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let exit = match walker.walk(&mut rng, &mut pos, max_steps, |_, _| {}) {
                WalkEnd::Exited(k) => k,
                WalkEnd::Survived => usize::MAX,
            };
            let b = (i as usize) % LAMBDA_BATCHES;
            for (j, &k) in steps.iter().enumerate() {
                if k < exit {
                    acc[b * w + j] += 1;
                }
            }
        },
    );
    let mut counts = vec![0u64; LAMBDA_BATCHES * w];
    for part in parts {
        for (c, v) in counts.iter_mut().zip(part) {
            *c += v;
        }
    }
    let totals: Vec<u64> = (0..w)
        .map(|j| (0..LAMBDA_BATCHES).map(|b| counts[b * w + j]).sum())
        .collect();
    let keep = totals.iter().take_while(|&&c| c >= LAMBDA_MIN_COUNT).count();
    if keep < 2 {
        return Err(Error::Precondition(format!(
            "fewer than two window times keep {LAMBDA_MIN_COUNT} survivors; use more paths or earlier times"
        )));
    }
    let ts = &window[..keep];
    let log_surv = |c: &[u64], n: f64| -> Vec<f64> { c.iter().map(|&c| -(c as f64 / n).ln()).collect() };
    let value = ls_slope(ts, &log_surv(&totals[..keep], mc.n as f64));

    let mut slopes = Vec::with_capacity(LAMBDA_BATCHES);
    for b in 0..LAMBDA_BATCHES {
        let batch_n = (mc.n + LAMBDA_BATCHES - 1 - b) / LAMBDA_BATCHES;
        let c = &counts[b * w..b * w + keep];
        if batch_n > 0 && c.iter().all(|&v| v > 0) {
            slopes.push(ls_slope(ts, &log_surv(c, batch_n as f64)));
        }
    }
    let stderr = if slopes.len() >= 2 {
        let k = slopes.len() as f64;
        let m = slopes.iter().sum::<f64>() / k;
        (slopes.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        f64::NAN
    };
    let mut est = Estimate {
        value,
        stderr,
        n: mc.n as u64,
        seed: mc.seed,
        flags: Vec::new(),
    };
    if keep < w {
        est.flags.push(EstimateFlag::WindowShrunk { points: keep });
    }
    Ok(est)
}

/// The two sides of the Lévy-system identity for jumps from `D` into a
/// ball `A` disjoint from `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevySystemEstimate {
    /// Expected number of grid transitions from `D` into `A` before exit.
    pub jumps: Estimate,
    /// `E ∫_0^τ ∫_A j^a(|X_s − y|) dy ds` from occupation times.
    pub occupation: Estimate,
    /// Per-path difference `jumps − occupation`.
    pub difference: Estimate,
}

/// Tabulated `x ↦ ∫_A j^a(|x − y|) dy` as a function of `|x − c_A|`.
struct LevyMassTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl LevyMassTable {
    const POINTS: usize = 4097;

    fn new(target: &BallSpec, lo: f64, hi: f64, p: &MixedStableParams) -> Result<Self> {
        let step = (hi - lo) / (Self::POINTS - 1) as f64;
        let values = (0..Self::POINTS)
            .map(|k| levy_mass_ball(lo + k as f64 * step, target.radius, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lo, step, values })
    }

    #[inline]
    fn eval(&self, dist: f64) -> f64 {
        let s = ((dist - self.lo) / self.step).clamp(0.0, (Self::POINTS - 1) as f64);
        let k = (s.floor() as usize).min(Self::POINTS - 2);
        let f = s - k as f64;
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }
}

fn farthest_extent(dom: &Domain, c: &[f64]) -> Option<(f64, f64)> {
    // Range of |x − c| over x ∈ D for bounded domains.
    match dom {
        Domain::Ball { center, radius } => {
            let dc = euclidean(center, c);
            Some(((dc - radius).max(0.0), dc + radius))
        }
        Domain::Annulus { center, r_out, .. } => {
            let dc = euclidean(center, c);
            Some(((dc - r_out).max(0.0), dc + r_out))
        }
        Domain::UnionOfBalls { balls, .. } => {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for b in balls {
                let dc = euclidean(&b.center, c);
                lo = lo.min((dc - b.radius).max(0.0));
                hi = hi.max(dc + b.radius);
            }
            Some((lo, hi))
        }
        _ => None,
    }
}

/// Both sides of the Lévy-system identity with `f = 1_{D×A}`, from one
/// set of paths started at `x0`.
pub fn estimate_levy_system(
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    target: &BallSpec,
    mc: &McSettings,
) -> Result<LevySystemEstimate> {
    mc.validate()?;
    dom.require_inside(x0, "x0")?;
    let (lo, hi) = farthest_extent(dom, &target.center)
        .ok_or_else(|| Error::Precondition("the Lévy-system check needs a bounded domain".into()))?;
    if lo <= target.radius {
        return Err(Error::Precondition(
            "target ball must be separated from the domain".into(),
        ));
    }
    let table = LevyMassTable::new(target, lo, hi, p)?;
    let t_cap = mc.resolved_t_cap(dom, p)?;
    let max_steps = steps_for(t_cap, mc.dt);
    let walker = Walker::new(dom, p, mc.dt)?;
    let dt = mc.dt;
    let parts = run_blocks(
        mc.n,
        || Moments::new(4),
        |i, acc| {
            let mut rng = mc.seed.path_rng(i);
            let mut pos = x0.to_vec();
            let mut occupation = 0.0;
            let end = walker.walk(&mut rng, &mut pos, max_steps - 1, |_, z| {
                occupation += dt * table.eval(euclidean(z, &target.center));
            });
            let (jump, capped) = match end {
                WalkEnd::Exited(_) => ((euclidean(&pos, &target.center) < target.radius) as u8 as f64, 0.0),
                WalkEnd::Survived => (0.0, 1.0),
            };
            acc.push(&[jump, occupation, jump - occupation, capped]);
        },
    );
    let total = Moments::merge_all(&parts, 4);
    let capped = total.mean(3);
    let mut out = LevySystemEstimate {
        jumps: total.binomial(0, mc.seed),
        occupation: total.estimate(1, mc.seed),
        difference: total.estimate(2, mc.seed),
    };
    capped_flag(&mut out.jumps, capped);
    capped_flag(&mut out.occupation, capped);
    capped_flag(&mut out.difference, capped);
    Ok(out)
}

/// Bandwidth for a heat-kernel target such that a full run of `mc.n` paths
/// expects about fifty hits: a pilot of `n/10` paths picks the distance
/// to `y` of its fifth-closest survivor. The result is capped at
/// `δ_D(y)` so the ball stays inside the domain.
pub fn pilot_bandwidth(
    dom: &Domain,
    p: &MixedStableParams,
    x: &[f64],
    t: f64,
    y: &[f64],
    mc: &McSettings,
) -> Result<f64> {
    mc.validate()?;
    dom.require_inside(x, "x")?;
    dom.require_inside(y, "y")?;
    let pilot_n = (mc.n / 10).max(50);
    let steps = aligned_step(t, mc.dt)?;
    let walker = Walker::new(dom, p, mc.dt)?;
    let seed = mc.seed.derive(0x9110);
    let parts = run_blocks(pilot_n, Vec::new, |i, acc: &mut Vec<f64>| {
        let mut rng = seed.path_rng(i);
        let mut pos = x.to_vec();
        if walker.walk(&mut rng, &mut pos, steps, |_, _| {}) == WalkEnd::Survived {
            acc.push(euclidean(&pos, y));
        }
    });
    let mut dists: Vec<f64> = parts.into_iter().flatten().collect();
    dists.sort_by(f64::total_cmp);
    let cap = dom.dist_to_complement(y);
    const PILOT_HITS: usize = 5;
    Ok(match dists.get(PILOT_HITS - 1) {
        Some(&d) if d > 0.0 => d.min(cap),
        _ => cap,
    })
}
