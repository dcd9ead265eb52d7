//! Run configuration: a TOML file of scenarios, each a parameter set, a
//! domain, Monte Carlo settings and a list of checks.

use std::path::Path;

use anyhow::{bail, Context, Result};
use mixstable::engine::ball_volume;
use mixstable::verify::{Bandwidth, CheckOptions, DecayQuantity, DEFAULT_UNIFORMITY_FACTOR};
use mixstable::{BallSpec, Domain, McSettings, MixedStableParams, SeedSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub options: CheckOptions,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uniformity: Vec<UniformityGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub params: MixedStableParams,
    pub domain: Domain,
    pub mc: McSpec,
    pub checks: Vec<CheckEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub n: usize,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
}

/// Per-check replacement of individual Monte Carlo fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McOverride>,
    #[serde(flatten)]
    pub spec: CheckSpec,
}

/// A point given either as a scalar (d = 1) or as a coordinate array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Point {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Point::Scalar(v) => vec![*v],
            Point::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub x: Point,
    pub y: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Heat-kernel bound over the product grid `t × x × y`.
    Dirichlet {
        t: Vec<f64>,
        x: Vec<Point>,
        y: Vec<Point>,
        #[serde(default)]
        bandwidth: Bandwidth,
    },
    Scaling {
        lambda: Vec<f64>,
        t: f64,
        x: Point,
        y: Point,
        h: f64,
    },
    Green {
        pairs: Vec<PairSpec>,
        h: f64,
        #[serde(default = "default_true")]
        ordering: bool,
    },
    Bhp {
        q: Point,
        r: f64,
        points: Vec<Point>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent_tol: Option<f64>,
    },
    LevySystem {
        target: BallSpec,
        x0: Point,
        #[serde(default = "default_bias_allowance")]
        bias_allowance: f64,
    },
    ExitTime {
        x0: Point,
    },
    Exponent {
        decay: DecayQuantity,
        points: Vec<Point>,
        tol: f64,
    },
    Lambda1 {
        starts: Vec<Point>,
        t_grid: Vec<f64>,
    },
}

fn default_true() -> bool {
    true
}

fn default_bias_allowance() -> f64 {
    0.05
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::Dirichlet { .. } => "dirichlet",
            CheckSpec::Scaling { .. } => "scaling",
            CheckSpec::Green { .. } => "green",
            CheckSpec::Bhp { .. } => "bhp",
            CheckSpec::LevySystem { .. } => "levy_system",
            CheckSpec::ExitTime { .. } => "exit_time",
            CheckSpec::Exponent { .. } => "exponent",
            CheckSpec::Lambda1 { .. } => "lambda1",
        }
    }
}

impl CheckEntry {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.spec.kind().to_string())
    }
}

/// Envelopes of the listed checks (`"scenario/label"`) must agree within
/// `factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformityGroup {
    pub name: String,
    pub members: Vec<String>,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

fn default_factor() -> f64 {
    DEFAULT_UNIFORMITY_FACTOR
}

/// Command-line replacements applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub c_max: Option<f64>,
    pub no_confirm: bool,
    pub scenarios: Vec<String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(cfg)
    }

    /// Reads the file, applies the overrides and validates.
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Config::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.apply(ov)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<()> {
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
        if let Some(c) = ov.c_max {
            self.options.c_max = c;
        }
        if ov.no_confirm {
            self.options.confirm_with_half_dt = false;
        }
        if !ov.scenarios.is_empty() {
            for name in &ov.scenarios {
                if !self.scenarios.iter().any(|s| &s.name == name) {
                    bail!("--scenario {name:?}: no such scenario");
                }
            }
            self.scenarios.retain(|s| ov.scenarios.contains(&s.name));
            let kept: Vec<String> = self.scenarios.iter().map(|s| s.name.clone()).collect();
            self.uniformity.retain(|g| {
                g.members
                    .iter()
                    .all(|m| kept.iter().any(|k| m.split_once('/').is_some_and(|(s, _)| s == k)))
            });
        }
        for s in &mut self.scenarios {
            if let Some(n) = ov.n {
                s.mc.n = n;
            }
            if let Some(dt) = ov.dt {
                s.mc.dt = dt;
            }
            for c in &mut s.checks {
                if let Some(m) = c.mc.as_mut() {
                    if ov.n.is_some() {
                        m.n = None;
                    }
                    if ov.dt.is_some() {
                        m.dt = None;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: found {}, this build reads {SCHEMA_VERSION}",
                self.schema_version
            );
        }
        if !(self.options.c_max >= 1.0) || !(self.options.sigma >= 0.0) {
            bail!("options: need c_max >= 1 and sigma >= 0");
        }
        let mut names = Vec::new();
        for (si, s) in self.scenarios.iter().enumerate() {
            let at = format!("scenarios[{si}] ({})", s.name);
            if s.name.is_empty() || s.name.contains('/') {
                bail!("{at}.name: must be non-empty and contain no '/'");
            }
            if names.contains(&s.name) {
                bail!("{at}.name: duplicate scenario name");
            }
            names.push(s.name.clone());
            s.domain.validate().with_context(|| format!("{at}.domain"))?;
            if s.domain.dim() != s.params.d() {
                bail!(
                    "{at}.domain: dimension {} differs from params.d = {}",
                    s.domain.dim(),
                    s.params.d()
                );
            }
            s.validate_checks(&at)?;
        }
        for (gi, g) in self.uniformity.iter().enumerate() {
            let at = format!("uniformity[{gi}] ({})", g.name);
            if g.members.len() < 2 {
                bail!("{at}.members: need at least two checks");
            }
            if !(g.factor >= 1.0) {
                bail!("{at}.factor: must be >= 1");
            }
            for m in &g.members {
                let check = self.find(m).with_context(|| format!("{at}.members: {m:?}"))?;
                if !matches!(
                    check.spec,
                    CheckSpec::Dirichlet { .. } | CheckSpec::Green { .. } | CheckSpec::Bhp { .. }
                ) {
                    bail!("{at}.members: {m:?} has no ratio envelope");
                }
            }
        }
        Ok(())
    }

    fn find(&self, member: &str) -> Result<&CheckEntry> {
        let Some((scenario, label)) = member.split_once('/') else {
            bail!("expected \"scenario/label\"");
        };
        let s = self
            .scenarios
            .iter()
            .find(|s| s.name == scenario)
            .with_context(|| format!("no scenario {scenario:?}"))?;
        s.checks
            .iter()
            .find(|c| c.label() == label)
            .with_context(|| format!("no check {label:?} in scenario {scenario:?}"))
    }

    /// The master seed combined with the stream of one check.
    pub fn seed_for(&self, scenario: &str, label: &str) -> SeedSpec {
        SeedSpec::new(self.seed, fnv1a(format!("{scenario}/{label}").as_bytes()))
    }
}

impl Scenario {
    pub fn mc_for(&self, entry: &CheckEntry, seed: SeedSpec) -> McSettings {
        let o = entry.mc.unwrap_or_default();
        let mut mc = McSettings::new(o.n.unwrap_or(self.mc.n), o.dt.unwrap_or(self.mc.dt), seed);
        mc.t_cap = o.t_cap.or(self.mc.t_cap);
        mc
    }

    fn validate_checks(&self, at: &str) -> Result<()> {
        let d = self.params.d();
        let inside = |field: String, p: &Point| -> Result<Vec<f64>> {
            let x = p.coords();
            if x.len() != d {
                bail!("{field}: has {} coordinates, expected {d}", x.len());
            }
            if !self.domain.contains(&x) {
                bail!("{field}: {x:?} is not in the domain");
            }
            Ok(x)
        };
        let positive = |field: String, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{field}: {v} must be positive and finite");
            }
            Ok(())
        };
        let mut labels = Vec::new();
        for (ci, c) in self.checks.iter().enumerate() {
            let at = format!("{at}.checks[{ci}]");
            let label = c.label();
            if label.is_empty() || label.contains('/') {
                bail!("{at}.label: must be non-empty and contain no '/'");
            }
            if labels.contains(&label) {
                bail!("{at}.label: duplicate label {label:?}; set distinct labels");
            }
            labels.push(label);
            let mc = self.mc_for(c, SeedSpec::new(0, 0));
            mc.validate().with_context(|| format!("{at}.mc"))?;
            match &c.spec {
                CheckSpec::Dirichlet { t, x, y, bandwidth } => {
                    if t.is_empty() || x.is_empty() || y.is_empty() {
                        bail!("{at}: t, x and y must be non-empty");
                    }
                    for (i, v) in t.iter().enumerate() {
                        positive(format!("{at}.t[{i}]"), *v)?;
                    }
                    for (i, p) in x.iter().enumerate() {
                        inside(format!("{at}.x[{i}]"), p)?;
                    }
                    for (i, p) in y.iter().enumerate() {
                        inside(format!("{at}.y[{i}]"), p)?;
                    }
                    if let Bandwidth::Fixed { h } = bandwidth {
                        positive(format!("{at}.bandwidth.h"), *h)?;
                    }
                }
                CheckSpec::Scaling { lambda, t, x, y, h } => {
                    if lambda.is_empty() {
                        bail!("{at}.lambda: must be non-empty");
                    }
                    for (i, v) in lambda.iter().enumerate() {
                        positive(format!("{at}.lambda[{i}]"), *v)?;
                    }
                    positive(format!("{at}.t"), *t)?;
                    positive(format!("{at}.h"), *h)?;
                    inside(format!("{at}.x"), x)?;
                    inside(format!("{at}.y"), y)?;
                }
                CheckSpec::Green { pairs, h, .. } => {
                    if pairs.is_empty() {
                        bail!("{at}.pairs: must be non-empty");
                    }
                    if self.domain.diameter().is_none() {
                        bail!("{at}: the Green check needs a bounded domain");
                    }
                    positive(format!("{at}.h"), *h)?;
                    for (i, pr) in pairs.iter().enumerate() {
                        inside(format!("{at}.pairs[{i}].x"), &pr.x)?;
                        inside(format!("{at}.pairs[{i}].y"), &pr.y)?;
                    }
                }
                CheckSpec::Bhp {
                    q,
                    r,
                    points,
                    exponent_tol,
                } => {
                    if q.coords().len() != d {
                        bail!("{at}.q: expected {d} coordinates");
                    }
                    positive(format!("{at}.r"), *r)?;
                    if points.len() < 2 {
                        bail!("{at}.points: need at least two points");
                    }
                    for (i, p) in points.iter().enumerate() {
                        inside(format!("{at}.points[{i}]"), p)?;
                    }
                    if let Some(tol) = exponent_tol {
                        positive(format!("{at}.exponent_tol"), *tol)?;
                    }
                }
                CheckSpec::LevySystem {
                    target,
                    x0,
                    bias_allowance,
                } => {
                    inside(format!("{at}.x0"), x0)?;
                    if target.center.len() != d {
                        bail!("{at}.target.center: expected {d} coordinates");
                    }
                    positive(format!("{at}.target.radius"), target.radius)?;
                    if !(*bias_allowance >= 0.0) {
                        bail!("{at}.bias_allowance: must be >= 0");
                    }
                    if ball_volume(d, target.radius) <= 0.0 {
                        bail!("{at}.target: empty ball");
                    }
                }
                CheckSpec::ExitTime { x0 } => {
                    inside(format!("{at}.x0"), x0)?;
                    if !matches!(self.domain, Domain::Ball { .. }) || self.params.a() != 0.0 {
                        bail!("{at}: the exit-time oracle needs a ball domain and a = 0");
                    }
                }
                CheckSpec::Exponent { points, tol, .. } => {
                    if points.len() < 2 {
                        bail!("{at}.points: need at least two points");
                    }
                    for (i, p) in points.iter().enumerate() {
                        inside(format!("{at}.points[{i}]"), p)?;
                    }
                    positive(format!("{at}.tol"), *tol)?;
                }
                CheckSpec::Lambda1 { starts, t_grid } => {
                    if starts.is_empty() || t_grid.len() < 4 {
                        bail!("{at}: need at least one start and four grid times");
                    }
                    for (i, p) in starts.iter().enumerate() {
                        inside(format!("{at}.starts[{i}]"), p)?;
                    }
                    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
                        bail!("{at}.t_grid: must be positive and strictly increasing");
                    }
                }
            }
        }
        Ok(())
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
