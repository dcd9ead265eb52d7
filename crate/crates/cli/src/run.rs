//! Executes the checks of a configuration.

use anyhow::{Context, Result};
use mixstable::verify::{
    check_bhp, check_boundary_exponent, check_dirichlet_bound, check_exit_time_oracle, check_green_bounds,
    check_lambda1, check_levy_system, check_scaling_identity, check_uniformity, BoundReport, KernelPoint, PointPair,
    Verdict,
};
use rayon::prelude::*;

use crate::config::{CheckSpec, Config};

/// Check families selectable by subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    All,
    HeatKernel,
    Green,
    Exit,
    Bhp,
}

impl Family {
    fn admits(self, spec: &CheckSpec) -> bool {
        match self {
            Family::All => true,
            Family::HeatKernel => matches!(spec, CheckSpec::Dirichlet { .. } | CheckSpec::Scaling { .. }),
            Family::Green => matches!(spec, CheckSpec::Green { .. }),
            Family::Exit => matches!(
                spec,
                CheckSpec::ExitTime { .. }
                    | CheckSpec::Exponent { .. }
                    | CheckSpec::LevySystem { .. }
                    | CheckSpec::Lambda1 { .. }
            ),
            Family::Bhp => matches!(spec, CheckSpec::Bhp { .. }),
        }
    }
}

/// One finished check.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: String,
    pub label: String,
    pub report: BoundReport,
}

impl Outcome {
    pub fn key(&self) -> String {
        format!("{}/{}", self.scenario, self.label)
    }
}

/// Runs the scenarios in parallel and the checks of each scenario in file
/// order, then the uniformity groups whose members all ran. Outcomes are
/// returned in file order regardless of the schedule.
pub fn run_config(cfg: &Config, family: Family, progress: impl Fn(&str) + Sync) -> Result<Vec<Outcome>> {
    let per_scenario: Vec<Vec<Outcome>> = cfg
        .scenarios
        .par_iter()
        .map(|s| {
            let mut done = Vec::new();
            for entry in s.checks.iter().filter(|c| family.admits(&c.spec)) {
                let label = entry.label();
                let key = format!("{}/{label}", s.name);
                progress(&key);
                let mc = s.mc_for(entry, cfg.seed_for(&s.name, &label));
                let report = run_check(&key, s, &entry.spec, &mc, cfg).with_context(|| format!("running {key}"))?;
                done.push(Outcome {
                    scenario: s.name.clone(),
                    label,
                    report,
                });
            }
            Ok(done)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Outcome> = per_scenario.into_iter().flatten().collect();
    for g in &cfg.uniformity {
        let members: Vec<&BoundReport> = g
            .members
            .iter()
            .filter_map(|m| out.iter().find(|o| &o.key() == m).map(|o| &o.report))
            .collect();
        if members.len() != g.members.len() {
            continue;
        }
        progress(&format!("uniformity/{}", g.name));
        let report =
            check_uniformity(&g.name, &members, g.factor).with_context(|| format!("uniformity group {}", g.name))?;
        out.push(Outcome {
            scenario: "uniformity".into(),
            label: g.name.clone(),
            report,
        });
    }
    Ok(out)
}

fn run_check(
    name: &str,
    s: &crate::config::Scenario,
    spec: &CheckSpec,
    mc: &mixstable::McSettings,
    cfg: &Config,
) -> Result<BoundReport> {
    let (dom, p, opts) = (&s.domain, &s.params, &cfg.options);
    let report = match spec {
        CheckSpec::Dirichlet { t, x, y, bandwidth } => {
            let mut grid = Vec::new();
            for xi in x {
                for &ti in t {
                    for yi in y {
                        grid.push(KernelPoint {
                            t: ti,
                            x: xi.coords(),
                            y: yi.coords(),
                        });
                    }
                }
            }
            check_dirichlet_bound(name, dom, p, &grid, *bandwidth, mc, opts)?
        }
        CheckSpec::Scaling { lambda, t, x, y, h } => {
            let point = KernelPoint {
                t: *t,
                x: x.coords(),
                y: y.coords(),
            };
            let mut merged: Option<BoundReport> = None;
            for (i, &l) in lambda.iter().enumerate() {
                let r = check_scaling_identity(
                    name,
                    dom,
                    p,
                    l,
                    &point,
                    *h,
                    &mc.with_seed(mc.seed.derive(i as u64)),
                    opts,
                )?;
                match merged.as_mut() {
                    None => merged = Some(r),
                    Some(m) => {
                        m.records.extend(r.records);
                        m.checks.extend(r.checks);
                        m.warnings.extend(r.warnings);
                        if r.verdict == Verdict::Fail {
                            m.verdict = Verdict::Fail;
                        }
                    }
                }
            }
            merged.expect("lambda list validated non-empty")
        }
        CheckSpec::Green { pairs, h, ordering } => {
            let pairs: Vec<PointPair> = pairs
                .iter()
                .map(|pr| PointPair {
                    x: pr.x.coords(),
                    y: pr.y.coords(),
                })
                .collect();
            check_green_bounds(name, dom, p, &pairs, *h, *ordering, mc, opts)?
        }
        CheckSpec::Bhp {
            q,
            r,
            points,
            exponent_tol,
        } => {
            let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords()).collect();
            check_bhp(name, dom, p, &q.coords(), *r, &pts, *exponent_tol, mc, opts)?
        }
        CheckSpec::LevySystem {
            target,
            x0,
            bias_allowance,
        } => check_levy_system(name, dom, p, target, &x0.coords(), *bias_allowance, mc, opts)?,
        CheckSpec::ExitTime { x0 } => check_exit_time_oracle(name, dom, p, &x0.coords(), mc, opts)?,
        CheckSpec::Exponent { decay, points, tol } => {
            let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords()).collect();
            check_boundary_exponent(name, dom, p, decay, &pts, *tol, mc, opts)?
        }
        CheckSpec::Lambda1 { starts, t_grid } => {
            let pts: Vec<Vec<f64>> = starts.iter().map(|p| p.coords()).collect();
            check_lambda1(name, dom, p, &pts, t_grid, mc, opts)?
        }
    };
    Ok(report)
}
