//! `mixstable`: sampling, oracle evaluation and bound checks for the mixed
//! stable operator `Δ^{α/2} + a^β Δ^{β/2}`.
//!
//! Exit codes: 0 all checks pass, 2 at least one check fails, 1 error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mixstable::density::free_density_with_error;
use mixstable::fraclap::{
    frac_laplacian_1d, power_profile_exact, truncated_frac_laplacian_1d, Profile, TabulatedProfile,
};
use mixstable::{
    sample_isotropic_stable, sample_mixed_increment, sample_mixed_subordinator_increment, sample_positive_stable,
    sample_symmetric_stable_1d, MixedStableParams, QuadratureSettings, SeedSpec,
};

use config::{fnv1a, Config, Overrides};
use output::float;
use run::{run_config, Family, Outcome};

const SEED_ENV: &str = "MIXSTABLE_SEED";

#[derive(Parser)]
#[command(
    name = "mixstable",
    version,
    about = "Simulation and bound checks for mixed stable processes"
)]
struct Cli {
    /// Worker threads; defaults to the number of cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples and print one per line.
    Sample(SampleArgs),
    /// Evaluate the free transition density by Fourier inversion.
    Density(DensityArgs),
    /// Heat-kernel bound and scaling checks of a config.
    Heatkernel(RunArgs),
    /// Green-function checks of a config.
    Green(RunArgs),
    /// Exit-time, boundary-exponent, Lévy-system and eigenvalue checks of a config.
    Exit(RunArgs),
    /// Boundary Harnack checks of a config.
    Bhp(RunArgs),
    /// Evaluate the one-dimensional fractional Laplacian of a profile.
    Fraclap(FraclapArgs),
    /// Run every check of a config.
    Verify(RunArgs),
    /// Rebuild the markdown report from the JSON reports of a finished run.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    /// Standard 1-d symmetric α-stable, `E e^{iξS} = e^{−|ξ|^α}`.
    Symmetric,
    /// Positive stable with index `alpha`, `E e^{−λS} = e^{−λ^α}`.
    Positive,
    /// Isotropic α-stable increment over time `t`.
    Isotropic,
    /// Increment of `X + aY` over time `t`.
    Mixed,
    /// Mixed subordinator increment over time `t`.
    Subordinator,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    kind: SampleKind,
    #[arg(long)]
    alpha: f64,
    /// Defaults to `alpha / 2`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    t: f64,
    /// Distances `|x − y|`, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    r: Vec<f64>,
    #[arg(long)]
    alpha: f64,
    /// Defaults to `alpha / 2`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1e-13)]
    abs_tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKind {
    /// `(x⁺)^p`.
    Power,
    /// `min(x⁺, cap)^p`.
    Bounded,
    /// Constant `p`.
    Constant,
}

#[derive(Args)]
struct FraclapArgs {
    #[arg(long, value_enum, default_value = "power")]
    profile: ProfileKind,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    cap: Option<f64>,
    /// CSV with columns `knot,value`; replaces `--profile`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    alpha: f64,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    x: Vec<f64>,
    /// Restrict jumps to `|h| ≤ lambda`.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Master seed; overrides the environment and the file.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Paths per estimate for every check.
    #[arg(long)]
    n: Option<usize>,
    /// Time step for every check.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    /// Skip the dt/2 re-run of flagged points.
    #[arg(long)]
    no_confirm: bool,
    /// Restrict to the named scenarios (repeatable).
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        pool = pool.num_threads(t);
    }
    pool.build_global().context("building the worker pool")?;
    match cli.command {
        Command::Sample(a) => sample(&a),
        Command::Density(a) => density(&a),
        Command::Fraclap(a) => fraclap(&a),
        Command::Heatkernel(a) => checks(&a, Family::HeatKernel),
        Command::Green(a) => checks(&a, Family::Green),
        Command::Exit(a) => checks(&a, Family::Exit),
        Command::Bhp(a) => checks(&a, Family::Bhp),
        Command::Verify(a) => checks(&a, Family::All),
        Command::Report(a) => report(&a.out_dir),
    }
}

fn params(d: usize, alpha: f64, beta: Option<f64>, a: f64) -> Result<MixedStableParams> {
    Ok(MixedStableParams::new(d, alpha, beta.unwrap_or(alpha / 2.0), a)?)
}

fn sample(a: &SampleArgs) -> Result<ExitCode> {
    let mut rng = SeedSpec::new(a.seed, fnv1a(b"sample")).rng();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    for _ in 0..a.n {
        let draw: Vec<f64> = match a.kind {
            SampleKind::Symmetric => vec![sample_symmetric_stable_1d(a.alpha, &mut rng)?],
            SampleKind::Positive => vec![sample_positive_stable(a.alpha, &mut rng)?],
            SampleKind::Isotropic => sample_isotropic_stable(&params(a.d, a.alpha, a.beta, 0.0)?, a.t, &mut rng)?,
            SampleKind::Mixed => sample_mixed_increment(&params(a.d, a.alpha, a.beta, a.a)?, a.t, &mut rng)?,
            SampleKind::Subordinator => {
                vec![sample_mixed_subordinator_increment(
                    &params(a.d, a.alpha, a.beta, a.a)?,
                    a.t,
                    &mut rng,
                )?]
            }
        };
        let line: Vec<String> = draw.into_iter().map(float).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn density(a: &DensityArgs) -> Result<ExitCode> {
    let p = params(a.d, a.alpha, a.beta, a.a)?;
    let q = QuadratureSettings {
        abs_tol: a.abs_tol,
        ..QuadratureSettings::default()
    };
    println!("t,r,value,error");
    for &r in &a.r {
        let res = free_density_with_error(a.t, r, &p, &q)?;
        println!("{},{},{},{}", float(a.t), float(r), float(res.value), float(res.error));
    }
    Ok(ExitCode::SUCCESS)
}

fn read_table(path: &Path) -> Result<TabulatedProfile> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let (mut knots, mut values) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| -> Result<f64> {
            rec.get(j)
                .with_context(|| format!("{} row {}: missing column {}", path.display(), i + 2, j + 1))?
                .trim()
                .parse()
                .with_context(|| format!("{} row {}: column {} is not a number", path.display(), i + 2, j + 1))
        };
        knots.push(field(0)?);
        values.push(field(1)?);
    }
    Ok(TabulatedProfile::new(knots, values)?)
}

fn fraclap(a: &FraclapArgs) -> Result<ExitCode> {
    let need_p = || a.p.context("--p is required for this profile");
    let profile = match (&a.table, a.profile) {
        (Some(path), _) => Profile::Tabulated(read_table(path)?),
        (None, ProfileKind::Power) => Profile::Power { p: need_p()? },
        (None, ProfileKind::Bounded) => Profile::BoundedPower {
            p: need_p()?,
            cap: a.cap.context("--cap is required for the bounded profile")?,
        },
        (None, ProfileKind::Constant) => Profile::Constant { value: need_p()? },
    };
    profile.validate()?;
    println!("x,value,error,exact");
    for &x in &a.x {
        let v = match a.lambda {
            Some(l) => truncated_frac_laplacian_1d(&profile, a.alpha, l, x, a.tol)?,
            None => frac_laplacian_1d(&profile, a.alpha, x, a.tol)?,
        };
        let exact = match (&profile, a.lambda) {
            (Profile::Power { p }, None) if x > 0.0 => power_profile_exact(*p, a.alpha, x).ok().map(float),
            _ => None,
        };
        println!(
            "{},{},{},{}",
            float(x),
            float(v.value),
            float(v.error),
            exact.unwrap_or_default()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict_code(outcomes: &[Outcome]) -> ExitCode {
    if outcomes.iter().all(|o| o.report.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn checks(a: &RunArgs, family: Family) -> Result<ExitCode> {
    let ov = Overrides {
        seed: a.seed,
        n: a.n,
        dt: a.dt,
        c_max: a.c_max,
        no_confirm: a.no_confirm,
        scenarios: a.scenarios.clone(),
    };
    let cfg = Config::load(&a.config, &ov)?;
    let outcomes = run_config(&cfg, family, |key| eprintln!("running {key}"))?;
    if outcomes.is_empty() {
        bail!("the config has no checks for this subcommand");
    }
    output::write_all(&a.out_dir, &outcomes, &cfg.to_toml()?)?;
    summarize(&outcomes);
    Ok(verdict_code(&outcomes))
}

fn summarize(outcomes: &[Outcome]) {
    for o in outcomes {
        let env = o
            .report
            .envelope
            .map(|e| format!(" envelope [{:.4}, {:.4}]", e.min, e.max))
            .unwrap_or_default();
        let status = if o.report.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}{env}", o.key());
    }
}

fn report(dir: &Path) -> Result<ExitCode> {
    let outcomes = output::read_reports(dir)?;
    if outcomes.is_empty() {
        bail!("no reports under {}", dir.join("reports").display());
    }
    let md = output::markdown(&outcomes);
    std::fs::write(dir.join("report.md"), &md)?;
    print!("{md}");
    Ok(verdict_code(&outcomes))
}
