//! Monte Carlo simulation of the killed process `X^{a,D}` and of the
//! subordinate killed process, and the estimators built on top of it.
//!
//! Killing is checked at grid times only. Every path owns the random stream
//! `(seed, path_index)`; paths are processed in fixed blocks whose partial
//! sums are merged in block order, so estimates are bit-identical for any
//! number of worker threads.

mod estimators;
mod runner;

pub use estimators::*;
pub(crate) use runner::{run_blocks, Moments};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::analytic::MixedStableParams;
use crate::domain::Domain;
use crate::error::{param, Error, Result};
use crate::rng::SeedSpec;
use crate::sampler::IncrementSampler;

/// Monte Carlo scalar with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: SeedSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<EstimateFlag>,
}

impl Estimate {
    /// Mean of an indicator with the binomial standard error.
    pub fn binomial(successes: f64, n: u64, seed: SeedSpec) -> Self {
        let nf = n as f64;
        let p = successes / nf;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / nf).max(0.0).sqrt(),
            n,
            seed,
            flags: Vec::new(),
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.stderr *= factor.abs();
        self
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn under_sampled(&self) -> bool {
        self.flags
            .iter()
            .any(|f| matches!(f, EstimateFlag::UnderSampled { .. }))
    }

    /// Standard error of `self − other` for independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateFlag {
    /// Fewer than ten hits were observed in the target ball.
    UnderSampled { count: f64 },
    /// More than 1% of paths were still alive at the time cap.
    Capped { fraction: f64 },
    /// The eigenvalue fit window was shortened because survivors ran out.
    WindowShrunk { points: usize },
}

/// Sample size, time step, optional horizon cap and seed of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub n: usize,
    pub dt: f64,
    #[serde(default)]
    pub t_cap: Option<f64>,
    pub seed: SeedSpec,
}

impl McSettings {
    pub fn new(n: usize, dt: f64, seed: SeedSpec) -> Self {
        Self {
            n,
            dt,
            t_cap: None,
            seed,
        }
    }

    pub fn with_t_cap(mut self, t_cap: f64) -> Self {
        self.t_cap = Some(t_cap);
        self
    }

    pub fn with_seed(mut self, seed: SeedSpec) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(param("n", "need at least one path"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(param("dt", format!("{} must be positive", self.dt)));
        }
        if let Some(cap) = self.t_cap {
            if !(cap >= self.dt) {
                return Err(param("t_cap", format!("{cap} must be at least dt")));
            }
        }
        Ok(())
    }

    /// Horizon cap, falling back to `50·diam(D)^α` for bounded domains.
    pub fn resolved_t_cap(&self, dom: &Domain, p: &MixedStableParams) -> Result<f64> {
        match self.t_cap {
            Some(c) => Ok(c),
            None => default_t_cap(dom, p)
                .ok_or_else(|| Error::Precondition("unbounded domain needs an explicit t_cap".into())),
        }
    }
}

/// `50·diam(D)^α` for bounded domains.
pub fn default_t_cap(dom: &Domain, p: &MixedStableParams) -> Option<f64> {
    dom.diameter().map(|d| 50.0 * d.powf(p.alpha()))
}

/// Volume of the d-dimensional ball of radius `h`.
pub fn ball_volume(d: usize, h: f64) -> f64 {
    let df = d as f64;
    std::f64::consts::PI.powf(df / 2.0) / libm::tgamma(df / 2.0 + 1.0) * h.powf(df)
}

/// One simulated trajectory of the killed process on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub alive: bool,
    pub exit_index: Option<usize>,
    pub exit_position: Option<Vec<f64>>,
}

/// How a walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WalkEnd {
    /// Left the domain at this step; the exit position is in the buffer.
    Exited(usize),
    /// Still inside after the last step.
    Survived,
}

/// Grid walk of `X^a` killed on leaving `dom`.
#[derive(Debug, Clone)]
pub(crate) struct Walker<'a> {
    pub dom: &'a Domain,
    pub inc: IncrementSampler,
}

impl<'a> Walker<'a> {
    pub fn new(dom: &'a Domain, p: &MixedStableParams, dt: f64) -> Result<Self> {
        if dom.dim() != p.d() {
            return Err(Error::Precondition(format!(
                "domain dimension {} differs from parameter dimension {}",
                dom.dim(),
                p.d()
            )));
        }
        Ok(Self {
            dom,
            inc: IncrementSampler::new(p, dt)?,
        })
    }

    /// Walks up to `max_steps` steps from the position held in `pos`.
    /// `visit(k, pos)` is called for every alive grid index `k`, starting at
    /// `k = 0`.
    #[inline]
    pub fn walk<R, V>(&self, rng: &mut R, pos: &mut [f64], max_steps: usize, mut visit: V) -> WalkEnd
    where
        R: RngCore + ?Sized,
        V: FnMut(usize, &[f64]),
    {
        visit(0, pos);
        for k in 1..=max_steps {
            self.inc.add_to(rng, pos);
            if !self.dom.contains(pos) {
                return WalkEnd::Exited(k);
            }
            visit(k, pos);
        }
        WalkEnd::Survived
    }
}

pub(crate) fn steps_for(t: f64, dt: f64) -> usize {
    ((t / dt).round() as usize).max(1)
}

/// Grid index of `t` on a grid of spacing `dt`; `t` has to be a multiple of
/// `dt` up to rounding.
pub(crate) fn aligned_step(t: f64, dt: f64) -> Result<usize> {
    let k = (t / dt).round();
    if k < 1.0 || ((k * dt - t).abs() > 1e-9 * t.max(dt)) {
        return Err(Error::Precondition(format!(
            "time {t} is not a positive multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

/// Simulates one killed path up to `t_end` with about `t_end/dt` equal steps.
pub fn simulate_killed_path<R: RngCore + ?Sized>(
    dom: &Domain,
    p: &MixedStableParams,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    rng: &mut R,
) -> Result<PathSample> {
    dom.require_inside(x0, "x0")?;
    if !(dt > 0.0 && dt <= t_end) {
        return Err(param("dt", format!("need 0 < dt <= t_end, got dt={dt}, t_end={t_end}")));
    }
    let steps = steps_for(t_end, dt);
    let h = t_end / steps as f64;
    let walker = Walker::new(dom, p, h)?;
    let mut pos = x0.to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut positions = Vec::with_capacity(steps + 1);
    let end = walker.walk(rng, &mut pos, steps, |k, x| {
        times.push(k as f64 * h);
        positions.push(x.to_vec());
    });
    Ok(match end {
        WalkEnd::Survived => PathSample {
            times,
            positions,
            alive: true,
            exit_index: None,
            exit_position: None,
        },
        WalkEnd::Exited(k) => {
            times.push(k as f64 * h);
            positions.push(pos.clone());
            PathSample {
                times,
                positions,
                alive: false,
                exit_index: Some(k),
                exit_position: Some(pos),
            }
        }
    })
}
