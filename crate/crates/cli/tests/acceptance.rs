//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criteria 3-6 and 8-11 run the desk configuration through the binary
//! twice, with one and with four worker threads, and evaluate the JSON
//! reports of the first run.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use mixstable::fraclap::{frac_laplacian_1d, truncated_frac_laplacian_1d, Profile};
use mixstable::stats::{fit_line, ks_one_sample, log_log_slope};
use mixstable::verify::{BoundRecord, BoundReport, RecordStatus};
use mixstable::{
    free_bound_f, free_cdf_1d, free_density, sample_mixed_increment, sample_symmetric_stable_1d, MixedStableParams,
    QuadratureSettings, SeedSpec,
};

type Outcome = Result<String, String>;

const C_MAX: f64 = 50.0;
const SIGMA: f64 = 3.0;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn in_band(r: &BoundRecord, c_max: f64) -> bool {
    !(r.ratio_hi < 1.0 / c_max || r.ratio_lo > c_max)
}

/// KS distance against a CDF evaluated at every `stride`-th order
/// statistic; an upper bound for the exact distance.
fn ks_upper_bound(xs: &[f64], stride: usize, mut cdf: impl FnMut(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for i in (0..s.len()).step_by(stride) {
        let c = cdf(s[i]);
        d = d.max(c - i as f64 / n).max((i + 1) as f64 / n - c);
    }
    d + (stride - 1) as f64 / n
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let n = 100_000;
    let draws = |alpha: f64, stream: u64| -> Vec<f64> {
        let mut rng = SeedSpec::new(1, stream).rng();
        (0..n)
            .map(|_| sample_symmetric_stable_1d(alpha, &mut rng).unwrap())
            .collect()
    };
    let cauchy = ks_one_sample(&draws(1.0, 1), |x| 0.5 + x.atan() / PI);
    let p = MixedStableParams::pure(1, 1.5).map_err(|e| e.to_string())?;
    let q = QuadratureSettings::default();
    let stable = ks_upper_bound(&draws(1.5, 2), 10, |x| free_cdf_1d(1.0, x, &p, &q).unwrap());
    let secs = start.elapsed().as_secs_f64();
    ensure(
        cauchy < 0.01 && stable < 0.01 && secs < 10.0,
        format!("KS(alpha=1) = {cauchy:.4}, KS(alpha=1.5) <= {stable:.4} (limit 0.01), {secs:.1} s (limit 10 s)"),
    )
}

/// Gauss-Legendre average of `f` over `[a, b]`.
fn bin_average(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    NODES.iter().map(|(x, w)| w * f(m + h * x)).sum::<f64>() / 2.0
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = MixedStableParams::new(1, 1.5, 0.5, 1.0).map_err(|e| e.to_string())?;
    let q = QuadratureSettings::default();
    let n = 1_000_000usize;
    let h = 0.05;
    let mut rng = SeedSpec::new(2, 1).rng();
    let abs: Vec<f64> = (0..n)
        .map(|_| sample_mixed_increment(&p, 1.0, &mut rng).unwrap()[0].abs())
        .collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for r in [0.0f64, 0.5, 1.0, 2.0] {
        let (lo, hi) = ((r - h).max(0.0), r + h);
        let count = abs.iter().filter(|&&v| v >= lo && v < hi).count() as f64;
        let width = 2.0 * (hi - lo);
        let frac = count / n as f64;
        let est = frac / width;
        let se = (frac * (1.0 - frac) / n as f64).sqrt() / width;
        let oracle = bin_average(lo, hi, |z| free_density(1.0, z, &p, &q).unwrap());
        let z = (est - oracle).abs() / se;
        worst = worst.max(z);
        parts.push(format!("r={r}: {est:.5} vs {oracle:.5} ({z:.2} se)"));
    }
    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi: f64 = 0.0;
    for t in [0.1, 1.0, 10.0] {
        for r in [0.0, 1.0, 10.0] {
            let ratio = free_density(t, r, &p, &q).unwrap() / free_bound_f(t, r, &p).unwrap();
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 3.0 && ratio_lo >= 1.0 / 20.0 && ratio_hi <= 20.0 && secs < 120.0,
        format!(
            "{}; p/f in [{ratio_lo:.3}, {ratio_hi:.3}] (limit [0.05, 20]), {secs:.1} s (limit 120 s)",
            parts.join(", ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let tol = 1e-10;
    let value = |prof: &Profile, alpha: f64, x: f64| frac_laplacian_1d(prof, alpha, x, tol).map(|v| v.value);
    let mut notes = Vec::new();
    let mut ok = true;
    let mut harmonic_worst: f64 = 0.0;
    let mut slope_worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 1.8] {
        for x in [0.25, 0.5, 1.0] {
            let h = value(&Profile::Power { p: alpha / 2.0 }, alpha, x).map_err(|e| e.to_string())?;
            let r = value(&Profile::Power { p: 0.75 * alpha }, alpha, x).map_err(|e| e.to_string())?;
            harmonic_worst = harmonic_worst.max(h.abs() / r.abs());
        }
        for frac in [0.6, 0.75, 0.9] {
            let p = frac * alpha;
            let xs = [0.25, 0.5, 1.0, 1.5, 2.0];
            let vs: Vec<f64> = xs
                .iter()
                .map(|&x| value(&Profile::Power { p }, alpha, x))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let fit = log_log_slope(&xs, &vs).map_err(|e| e.to_string())?;
            slope_worst = slope_worst.max((fit.slope - (p - alpha)).abs());
        }
    }
    ok &= harmonic_worst <= 1e-3 && slope_worst <= 0.02;
    notes.push(format!("|w_a/2| / |w_0.75a| <= {harmonic_worst:.1e} (limit 1e-3)"));
    notes.push(format!("full slope error <= {slope_worst:.1e} (limit 0.02)"));

    let e = 1.5;
    let trunc = |p: f64, x: f64| truncated_frac_laplacian_1d(&Profile::Power { p }, e, 1.0, x, tol).map(|v| v.value);
    let small: Vec<f64> = (0..=8).map(|k| 10f64.powf(-5.0 + 0.25 * k as f64)).collect();
    let wide: Vec<f64> = (0..=9)
        .map(|k| 10f64.powf(-5.0 + 0.5 * k as f64))
        .filter(|&x| x <= 0.5)
        .collect();
    let eval = |p: f64, xs: &[f64]| -> Result<Vec<f64>, String> {
        xs.iter().map(|&x| trunc(p, x).map_err(|e| e.to_string())).collect()
    };
    let pos_p = 0.75 * e;
    let pos = eval(pos_p, &small)?;
    let pos_slope = log_log_slope(&small, &pos).map_err(|e| e.to_string())?.slope;
    let pos_ok = pos.iter().all(|&v| v > 0.0) && (pos_slope - (pos_p - e)).abs() <= 0.05;
    notes.push(format!(
        "truncated p=0.75e: slope {pos_slope:.4} vs {:.4} on x in [1e-5, 1e-3]",
        pos_p - e
    ));
    let log_vals = eval(e, &wide)?;
    let abs_log: Vec<f64> = wide.iter().map(|x| x.ln().abs()).collect();
    let log_fit =
        fit_line(&abs_log, &log_vals.iter().map(|v| v.abs()).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let log_ok = log_fit.slope > 0.0 && log_fit.slope.is_finite();
    notes.push(format!("p=e: slope of |value| on |log x| = {:.4}", log_fit.slope));
    let bnd = eval(1.25 * e, &wide)?;
    let mags: Vec<f64> = bnd.iter().map(|v| v.abs()).collect();
    let spread = mags.iter().copied().fold(0.0, f64::max) / mags.iter().copied().fold(f64::INFINITY, f64::min);
    let bnd_ok = spread < 10.0;
    notes.push(format!(
        "p=1.25e: max/min |value| = {spread:.3} (limit 10) on x in [1e-5, 0.5]"
    ));
    ok &= pos_ok && log_ok && bnd_ok;
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    notes.push(format!("{secs:.1} s (limit 30 s)"));
    ensure(ok, notes.join("; "))
}

struct DeskRun {
    dir: PathBuf,
}

impl DeskRun {
    fn report(&self, scenario: &str, label: &str) -> Result<BoundReport, String> {
        let suffix = format!("__{scenario}__{label}.json");
        let rdir = self.dir.join("reports");
        let entry = fs::read_dir(&rdir)
            .map_err(|e| format!("{}: {e}", rdir.display()))?
            .filter_map(|e| e.ok())
            .find(|e| e.file_name().to_string_lossy().ends_with(&suffix))
            .ok_or_else(|| format!("no report {scenario}/{label}"))?;
        let text = fs::read_to_string(entry.path()).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}

fn run_desk(dir: &Path, threads: usize) -> Result<(), String> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_mixstable"))
        .env_remove("MIXSTABLE_SEED")
        .args(["verify", "--threads", &threads.to_string(), "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(2) => Ok(()),
        _ => Err(format!("desk run failed: {}", String::from_utf8_lossy(&out.stderr))),
    }
}

fn dirichlet_summary(r: &BoundReport) -> Result<(f64, f64, usize), String> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut excluded = 0;
    for rec in &r.records {
        if rec.status == RecordStatus::Excluded {
            excluded += 1;
            continue;
        }
        if !in_band(rec, C_MAX) {
            return Err(format!(
                "ratio {:.4} [{:.4}, {:.4}] at t={:?} x={:?} y={:?}",
                rec.ratio, rec.ratio_lo, rec.ratio_hi, rec.t, rec.x, rec.y
            ));
        }
        lo = lo.min(rec.ratio);
        hi = hi.max(rec.ratio);
    }
    Ok((lo, hi, excluded))
}

fn criterion_3(run: &DeskRun) -> Outcome {
    let mut parts = Vec::new();
    let (mut maxes, mut mins) = (Vec::new(), Vec::new());
    for (name, a) in [("interval-a0.01", 0.01), ("interval-a0.25", 0.25), ("interval-a1", 1.0)] {
        let r = run.report(name, "dirichlet")?;
        if r.params.a() != a || r.params.alpha() != 1.5 || r.params.beta() != 0.5 {
            return Err(format!("{name}: unexpected parameters"));
        }
        let min_dx = r
            .records
            .iter()
            .map(|rec| r.domain.dist_to_complement(&rec.x))
            .fold(f64::INFINITY, f64::min);
        if min_dx > 0.05 + 1e-12 {
            return Err(format!("{name}: smallest delta_x is {min_dx}"));
        }
        let ts: Vec<f64> = r.records.iter().filter_map(|rec| rec.t).collect();
        if ![0.1, 0.5, 1.0].iter().all(|t| ts.contains(t)) {
            return Err(format!("{name}: time grid incomplete"));
        }
        let (lo, hi, excluded) = dirichlet_summary(&r).map_err(|e| format!("a={a}: {e}"))?;
        maxes.push(hi);
        mins.push(lo);
        parts.push(format!(
            "a={a}: [{lo:.3}, {hi:.3}] ({} points, {excluded} excluded)",
            r.records.len()
        ));
    }
    let spread = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min);
    let (su, sl) = (spread(&maxes), spread(&mins));
    let uni = run.report("uniformity", "dirichlet-in-a")?;
    parts.push(format!("envelope spreads {su:.2} / {sl:.2} (limit 4)"));
    ensure(su <= 4.0 && sl <= 4.0 && uni.passed(), parts.join("; "))
}

fn criterion_4(run: &DeskRun) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (scenario, label, tol) in [
        ("interval-a1", "survival-exponent", 0.1),
        ("interval-a1", "exit-time-exponent", 0.1),
        ("annulus-a1", "far-exit-exponent", 0.15),
    ] {
        let r = run.report(scenario, label)?;
        let deltas: Vec<f64> = r
            .records
            .iter()
            .map(|rec| r.domain.dist_to_complement(&rec.x))
            .collect();
        let values: Vec<f64> = r.records.iter().map(|rec| rec.estimate.value).collect();
        let slope = log_log_slope(&deltas, &values).map_err(|e| e.to_string())?.slope;
        let target = r.params.alpha() / 2.0;
        ok &= (slope - target).abs() <= tol;
        parts.push(format!("{label}: {slope:.3} vs {target} +- {tol}"));
    }
    ensure(ok, parts.join("; "))
}

fn criterion_5(run: &DeskRun) -> Outcome {
    let r = run.report("scaling-a0.5", "scaling")?;
    if r.records.len() != 4 {
        return Err(format!("expected two lambda values, found {} records", r.records.len()));
    }
    let mut parts = Vec::new();
    let mut ok = true;
    for (pair, lambda) in r.records.chunks(2).zip([1.0, 2.0]) {
        let (lhs, rhs) = (&pair[0].estimate, &pair[1].estimate);
        let diff = (lhs.value - rhs.value).abs();
        let se = lhs.combined_stderr(rhs);
        ok &= diff <= SIGMA * se;
        parts.push(format!(
            "lambda={lambda}: |{:.4} - {:.4}| = {diff:.4} vs 3se = {:.4}",
            lhs.value,
            rhs.value,
            SIGMA * se
        ));
    }
    ensure(ok && r.passed(), parts.join("; "))
}

fn criterion_6(run: &DeskRun) -> Outcome {
    let r = run.report("interval-a1", "green")?;
    let g: Vec<&BoundRecord> = r.records.iter().filter(|rec| rec.label == "G_D").collect();
    let rr: Vec<&BoundRecord> = r.records.iter().filter(|rec| rec.label == "R_U").collect();
    if g.len() != 5 || rr.len() != 5 {
        return Err(format!("expected 5 pairs, found {} / {}", g.len(), rr.len()));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for rec in &g {
        if rec.status == RecordStatus::Excluded || !in_band(rec, C_MAX) {
            return Err(format!("G ratio {:.4} at x={:?} y={:?}", rec.ratio, rec.x, rec.y));
        }
        lo = lo.min(rec.ratio);
        hi = hi.max(rec.ratio);
    }
    let mut worst = f64::NEG_INFINITY;
    for s in &rr {
        let gd = g
            .iter()
            .find(|gr| gr.x == s.x && gr.y == s.y)
            .ok_or("unmatched R record")?;
        let excess = (s.estimate.value - gd.estimate.value) / (SIGMA * s.estimate.combined_stderr(&gd.estimate));
        worst = worst.max(excess);
    }
    ensure(
        worst <= 1.0 && r.passed(),
        format!("G/g in [{lo:.3}, {hi:.3}] (band [0.02, 50]); max (R - G)/(3se) = {worst:.2} (limit 1)"),
    )
}

fn criterion_8(run: &DeskRun) -> Outcome {
    let r = run.report("interval-a1", "levy_system")?;
    let (jumps, occ) = (&r.records[0].estimate, &r.records[1].estimate);
    let check = &r.checks[0];
    let allowance = SIGMA * jumps.combined_stderr(occ) + 0.05 * occ.value;
    let diff = jumps.value - occ.value;
    ensure(
        check.passed && diff.abs() <= allowance,
        format!(
            "jumps {:.5} +- {:.5}, occupation {:.5} +- {:.5}; paired diff {:.5} within {:.5}; unpaired within {:.5}",
            jumps.value, jumps.stderr, occ.value, occ.stderr, check.value, check.allowance, allowance
        ),
    )
}

fn criterion_9(run: &DeskRun) -> Outcome {
    let mut parts = Vec::new();
    for (scenario, a) in [("interval-a0.25", 0.25), ("interval-a1", 1.0)] {
        let r = run.report(scenario, "bhp")?;
        let pairs: Vec<&BoundRecord> = r.records.iter().filter(|rec| rec.label == "u(x)/u(y)").collect();
        if pairs.len() < 4 {
            return Err(format!("a={a}: too few pairs"));
        }
        let mut hi: f64 = 0.0;
        for rec in &pairs {
            if rec.status == RecordStatus::Excluded || rec.ratio_lo > C_MAX {
                return Err(format!("a={a}: ratio {:.4} at x={:?} y={:?}", rec.ratio, rec.x, rec.y));
            }
            hi = hi.max(rec.ratio);
        }
        if !r.passed() {
            return Err(format!("a={a}: report failed"));
        }
        parts.push(format!("a={a}: max ratio {hi:.3} over {} pairs", pairs.len()));
    }
    Ok(parts.join("; ") + " (limit 50)")
}

fn criterion_10(run: &DeskRun) -> Outcome {
    let r = run.report("cauchy", "exit_time")?;
    let c = &r.checks[0];
    let coarse = &r.records[0];
    let fine = &r.records[1];
    ensure(
        (c.target - 1.0).abs() < 1e-12
            && (fine.dt - coarse.dt / 2.0).abs() < 1e-18
            && (c.value - c.target).abs() <= c.allowance,
        format!(
            "E tau = {:.4} +- {:.4} at dt={}, {:.4} +- {:.4} at dt={}; |diff| {:.4} within {:.4}",
            coarse.estimate.value,
            coarse.estimate.stderr,
            coarse.dt,
            fine.estimate.value,
            fine.estimate.stderr,
            fine.dt,
            (c.value - c.target).abs(),
            c.allowance
        ),
    )
}

fn artifact_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|x| x == "csv" || x == "md") {
            v.push((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).map_err(|e| e.to_string())?,
            ));
        }
    }
    v.sort();
    Ok(v)
}

fn criterion_11(one: &Path, four: &Path) -> Outcome {
    let (a, b) = (artifact_bytes(one)?, artifact_bytes(four)?);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    ensure(
        a.len() == b.len() && differing.is_empty() && names.len() > 2,
        format!(
            "{} artifacts compared between 1 and 4 threads; differing: {differing:?}",
            names.len()
        ),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let (one, four) = (tmp.path().join("threads1"), tmp.path().join("threads4"));
    let desk = run_desk(&one, 1).and_then(|_| run_desk(&four, 4));
    let run = DeskRun { dir: one.clone() };
    let from_desk = |f: &dyn Fn(&DeskRun) -> Outcome| -> Outcome {
        match &desk {
            Ok(()) => f(&run),
            Err(e) => Err(e.clone()),
        }
    };
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "sampler fidelity", criterion_1()),
        (2, "free-density consistency", criterion_2()),
        (3, "Dirichlet heat-kernel bounds, uniform in a", from_desk(&criterion_3)),
        (4, "boundary exponent", from_desk(&criterion_4)),
        (5, "scaling identity", from_desk(&criterion_5)),
        (6, "Green function bounds and ordering", from_desk(&criterion_6)),
        (7, "fractional-Laplacian barrier calculus", criterion_7()),
        (8, "Levy-system identity", from_desk(&criterion_8)),
        (9, "boundary Harnack ratio", from_desk(&criterion_9)),
        (10, "exit-time oracle", from_desk(&criterion_10)),
        (
            11,
            "determinism across thread counts",
            desk.clone().and_then(|_| criterion_11(&one, &four)),
        ),
    ];
    let mut failed = 0;
    for (i, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("criterion {i:>2} PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {i:>2} FAIL {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
