//! Artifacts of a run: one CSV per check kind, `checks.csv`, a markdown
//! report, one JSON file per report and the effective configuration.
//!
//! Floats are written with 17 significant digits. Empty cells mean "not
//! applicable"; a non-finite number is written as is and named in the
//! `flags` column.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mixstable::verify::{BoundReport, RecordStatus, Verdict};
use mixstable::EstimateFlag;

use crate::run::Outcome;

pub const RECORD_COLUMNS: [&str; 16] = [
    "scenario",
    "check",
    "label",
    "status",
    "t",
    "x",
    "y",
    "bandwidth",
    "dt",
    "value",
    "stderr",
    "n",
    "formula_value",
    "ratio",
    "ratio_lo",
    "ratio_hi",
];

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn flag_text(f: &EstimateFlag) -> String {
    match f {
        EstimateFlag::UnderSampled { count } => format!("under_sampled(hits={count})"),
        EstimateFlag::Capped { fraction } => format!("capped(fraction={fraction})"),
        EstimateFlag::WindowShrunk { points } => format!("window_shrunk(points={points})"),
    }
}

fn status_text(s: RecordStatus) -> &'static str {
    match s {
        RecordStatus::Ok => "ok",
        RecordStatus::Violation => "violation",
        RecordStatus::Excluded => "excluded",
        RecordStatus::Info => "info",
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

/// Header for a record CSV with `dx` space coordinates for `x` and `dy`
/// for `y`.
fn record_header(dx: usize, dy: usize) -> Vec<String> {
    let mut h = Vec::new();
    for c in RECORD_COLUMNS {
        match c {
            "x" => h.extend((1..=dx).map(|i| format!("x{i}"))),
            "y" => h.extend((1..=dy).map(|i| format!("y{i}"))),
            _ => h.push(c.to_string()),
        }
    }
    h.push("flags".into());
    h
}

fn write_records(path: &Path, outcomes: &[&Outcome]) -> Result<()> {
    let recs = || {
        outcomes
            .iter()
            .flat_map(|o| o.report.records.iter().map(move |r| (o, r)))
    };
    let dx = recs().map(|(_, r)| r.x.len()).max().unwrap_or(0);
    let dy = recs().map(|(_, r)| r.y.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(record_header(dx, dy))?;
    for (o, r) in recs() {
        let mut flags: Vec<String> = r.estimate.flags.iter().map(flag_text).collect();
        let mut num = |name: &str, v: f64| {
            if !v.is_finite() {
                flags.push(format!("nonfinite({name})"));
            }
            float(v)
        };
        let value = num("value", r.estimate.value);
        let stderr = num("stderr", r.estimate.stderr);
        let formula = num("formula_value", r.formula);
        let ratio = num("ratio", r.ratio);
        let ratio_lo = num("ratio_lo", r.ratio_lo);
        let ratio_hi = num("ratio_hi", r.ratio_hi);
        let mut row = vec![
            o.scenario.clone(),
            o.label.clone(),
            r.label.clone(),
            status_text(r.status).to_string(),
            opt_float(r.t),
        ];
        row.extend((0..dx).map(|i| r.x.get(i).map(|v| float(*v)).unwrap_or_default()));
        row.extend((0..dy).map(|i| r.y.get(i).map(|v| float(*v)).unwrap_or_default()));
        row.extend([
            opt_float(r.bandwidth),
            float(r.dt),
            value,
            stderr,
            r.estimate.n.to_string(),
            formula,
            ratio,
            ratio_lo,
            ratio_hi,
            flags.join(";"),
        ]);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_checks(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "scenario",
        "check",
        "kind",
        "name",
        "value",
        "target",
        "allowance",
        "passed",
        "flags",
    ])?;
    for o in outcomes {
        for c in &o.report.checks {
            let flags = if c.value.is_finite() { "" } else { "nonfinite(value)" };
            w.write_record([
                o.scenario.as_str(),
                o.label.as_str(),
                o.report.kind.as_str(),
                c.name.as_str(),
                &float(c.value),
                &float(c.target),
                &float(c.allowance),
                if c.passed { "true" } else { "false" },
                flags,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Markdown summary of the reports, in run order.
pub fn markdown(outcomes: &[Outcome]) -> String {
    let mut s = String::new();
    let passed = outcomes.iter().filter(|o| o.report.passed()).count();
    let _ = writeln!(s, "# Bound check report\n");
    let _ = writeln!(s, "{passed} of {} checks passed.\n", outcomes.len());
    let _ = writeln!(s, "| check | kind | a | verdict | envelope | violations |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for o in outcomes {
        let r = &o.report;
        let env = r
            .envelope
            .map(|e| format!("[{:.4}, {:.4}]", e.min, e.max))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            o.key(),
            r.kind,
            r.params.a(),
            verdict_text(r.verdict),
            env,
            r.violations.len()
        );
    }
    for o in outcomes {
        s.push('\n');
        s.push_str(&section(o));
    }
    s
}

fn section(o: &Outcome) -> String {
    let r: &BoundReport = &o.report;
    let mut s = String::new();
    let p = &r.params;
    let _ = writeln!(s, "## {}\n", o.key());
    let _ = writeln!(
        s,
        "- kind: {}\n- params: d = {}, alpha = {}, beta = {}, a = {}\n- verdict: {}",
        r.kind,
        p.d(),
        p.alpha(),
        p.beta(),
        p.a(),
        verdict_text(r.verdict)
    );
    if let Some(e) = r.envelope {
        let _ = writeln!(
            s,
            "- ratio envelope: [{:.6}, {:.6}] (band [1/{}, {}])",
            e.min, e.max, r.c_max, r.c_max
        );
    }
    for &i in &r.violations {
        let rec = &r.records[i];
        let _ = writeln!(
            s,
            "- violation: {} t = {:?} x = {:?} y = {:?} ratio = {:.4} [{:.4}, {:.4}]",
            rec.label, rec.t, rec.x, rec.y, rec.ratio, rec.ratio_lo, rec.ratio_hi
        );
    }
    for c in &r.checks {
        let _ = writeln!(
            s,
            "- {}: value {:.6e}, target {:.6e}, allowance {:.6e}: {}",
            c.name,
            c.value,
            c.target,
            c.allowance,
            if c.passed { "pass" } else { "fail" }
        );
    }
    for w in &r.warnings {
        let _ = writeln!(s, "- warning: {w}");
    }
    s
}

/// Writes all artifacts into `dir`.
pub fn write_all(dir: &Path, outcomes: &[Outcome], effective_config: &str) -> Result<()> {
    let rdir = dir.join("reports");
    fs::create_dir_all(&rdir).with_context(|| format!("creating {}", rdir.display()))?;
    for e in fs::read_dir(&rdir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "json") {
            fs::remove_file(&p)?;
        }
    }
    let mut by_kind: BTreeMap<&str, Vec<&Outcome>> = BTreeMap::new();
    for o in outcomes {
        by_kind.entry(o.report.kind.as_str()).or_default().push(o);
    }
    for (kind, group) in &by_kind {
        if group.iter().any(|o| !o.report.records.is_empty()) {
            write_records(&dir.join(format!("{kind}.csv")), group)?;
        }
    }
    write_checks(&dir.join("checks.csv"), outcomes)?;
    for (i, o) in outcomes.iter().enumerate() {
        let path = dir
            .join("reports")
            .join(format!("{i:03}__{}__{}.json", o.scenario, o.label));
        fs::write(&path, serde_json::to_string_pretty(&o.report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    fs::write(dir.join("report.md"), markdown(outcomes))?;
    fs::write(dir.join("effective_config.toml"), effective_config)?;
    Ok(())
}

/// Reads back the JSON reports of a finished run in run order.
pub fn read_reports(dir: &Path) -> Result<Vec<Outcome>> {
    let rdir = dir.join("reports");
    let mut paths: Vec<_> = fs::read_dir(&rdir)
        .with_context(|| format!("reading {}", rdir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let mut parts = stem.splitn(3, "__").skip(1);
        let (scenario, label) = (parts.next().unwrap_or_default(), parts.next().unwrap_or_default());
        let report: BoundReport =
            serde_json::from_str(&fs::read_to_string(&p)?).with_context(|| format!("parsing {}", p.display()))?;
        out.push(Outcome {
            scenario: scenario.to_string(),
            label: label.to_string(),
            report,
        });
    }
    Ok(out)
}
