//! `isoconst`: sample, hull, integrate and run batch experiments from the shell.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isoconst::bodies::ReferenceBody;
use isoconst::experiments::{
    bernstein_tail_check, io as exp_io, lemma_ratio_report, run_experiment, ExperimentConfig, ExperimentError,
};
use isoconst::hull::{convex_hull_with, symmetric_hull_with, HullOptions};
use isoconst::isotropic::isotropic_constant;
use isoconst::moments::{default_apex, resolve_apex, summarize};
use isoconst::oracle::{cone_sampler_mc, rejection_mc, MomentEstimate, MAX_REJECTION_DIM};
use isoconst::{sample_matrix, validate_star_conditions, DistributionSpec, Polytope, SampleMatrix};

const SEED_ENV: &str = "ISOCONST_SEED";

#[derive(Parser, Debug)]
#[command(name = "isoconst", version, about = "Exact moments and isotropic constants of random polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw an N x n matrix of i.i.d. coordinates
    Sample(SampleArgs),
    /// Convex hull of sampled points
    Hull(HullArgs),
    /// Exact volume, barycenter and second moments
    Moments(MomentsArgs),
    /// Isotropic constant of a reference body, a saved polytope or a sampled hull
    Lk(LkArgs),
    /// Run a seeded batch experiment from a config file
    Experiment(ExperimentArgs),
    /// Empirical tails of sample means against the Bernstein shape
    Tailcheck(TailArgs),
    /// Check the moment conditions of a coordinate law by simulation
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Master seed [default: $ISOCONST_SEED, else 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct PointsArgs {
    /// Coordinate distribution: gaussian, rademacher or uniform
    #[arg(long, default_value = "gaussian")]
    dist: DistributionSpec,
    /// Dimension
    #[arg(long)]
    n: usize,
    /// Number of points
    #[arg(long = "N")]
    big_n: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct BodyArgs {
    /// Hull of the points and their negatives
    #[arg(long)]
    symmetric: bool,
    /// Abort once the hull has more facets than this
    #[arg(long, default_value_t = isoconst::hull::DEFAULT_FACET_BUDGET)]
    facet_budget: usize,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    points: PointsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct HullArgs {
    #[command(flatten)]
    points: PointsArgs,
    #[command(flatten)]
    body: BodyArgs,
    /// Write the polytope as JSON to this file
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    /// Read the polytope from a JSON file written by `hull --emit`
    #[arg(long, conflicts_with_all = ["n", "big_n", "symmetric"])]
    poly: Option<PathBuf>,
    /// Coordinate distribution when sampling
    #[arg(long, default_value = "gaussian")]
    dist: DistributionSpec,
    /// Dimension when sampling
    #[arg(long, required_unless_present = "poly")]
    n: Option<usize>,
    /// Number of points when sampling
    #[arg(long = "N", required_unless_present = "poly")]
    big_n: Option<usize>,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    body: BodyArgs,
    /// Add Monte Carlo estimates and their deviations in standard errors
    #[arg(long)]
    oracle: bool,
    /// Monte Carlo sample size for --oracle
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct LkArgs {
    /// Reference body: cube, cross-polytope or simplex
    #[arg(long, requires = "dim", conflicts_with_all = ["poly", "n"])]
    body: Option<ReferenceBody>,
    /// Dimension of the reference body
    #[arg(long)]
    dim: Option<usize>,
    /// Polytope JSON written by `hull --emit`
    #[arg(long, conflicts_with = "n")]
    poly: Option<PathBuf>,
    /// Coordinate distribution when sampling
    #[arg(long, default_value = "gaussian")]
    dist: DistributionSpec,
    /// Dimension when sampling
    #[arg(long, requires = "big_n")]
    n: Option<usize>,
    /// Number of points when sampling
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    body_opts: BodyArgs,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment config (JSON, or TOML for *.toml)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "isoconst-out")]
    out: PathBuf,
    /// Overrides the config's trials per cell
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config's facet budget
    #[arg(long)]
    facet_budget: Option<usize>,
    /// Also write lemma.json with point statistics (retains sampled points)
    #[arg(long)]
    lemma: bool,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct TailArgs {
    /// Coordinate distribution
    #[arg(long, default_value = "rademacher")]
    dist: DistributionSpec,
    /// Draws per sample mean
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Scale L in the bound
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Comma-separated thresholds t
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
    t_grid: Vec<f64>,
    /// Number of sample means
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Coordinate distribution
    #[arg(long, default_value = "gaussian")]
    dist: DistributionSpec,
    /// Number of draws
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[command(flatten)]
    seed: SeedArg,
}

/// Usage problems exit with 1, numerical failures with 2.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

fn resolve_seed(arg: &SeedArg) -> Result<u64, Failure> {
    let seed = match arg.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={v} is not an unsigned integer")))?,
            Err(_) => 0,
        },
    };
    eprintln!("seed: {seed}");
    Ok(seed)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(usage),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(numerical)
}

fn sample_points(p: &PointsArgs) -> Result<SampleMatrix, Failure> {
    let seed = resolve_seed(&p.seed)?;
    sample_matrix(p.dist, p.big_n, p.n, seed).map_err(usage)
}

fn build_body(points: &SampleMatrix, dist: DistributionSpec, body: &BodyArgs) -> Result<Polytope, Failure> {
    let base = if dist.is_continuous() { HullOptions::default() } else { HullOptions::triangulating() };
    let opts = HullOptions { facet_budget: body.facet_budget, ..base };
    if body.symmetric {
        symmetric_hull_with(points, &opts)
    } else {
        convex_hull_with(points, &opts)
    }
    .map_err(numerical)
}

fn load_poly(path: &Path) -> Result<Polytope, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_sample(a: &SampleArgs) -> Outcome {
    let pts = sample_points(&a.points)?;
    let text = match a.output.format {
        Format::Json => {
            let rows: Vec<&[f64]> = pts.iter_rows().collect();
            to_json(&rows)?
        }
        Format::Csv => {
            let mut s = String::new();
            let header: Vec<String> = (0..pts.cols()).map(|j| format!("x{j}")).collect();
            s.push_str(&header.join(","));
            s.push('\n');
            for row in pts.iter_rows() {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn cmd_hull(a: &HullArgs) -> Outcome {
    let pts = sample_points(&a.points)?;
    let poly = build_body(&pts, a.points.dist, &a.body)?;
    if let Some(path) = &a.emit {
        emit(Some(path), &to_json(&poly)?)?;
    }
    println!("dim {}", poly.dim);
    println!("vertices {}", poly.vertices.len());
    println!("facets {}", poly.facets.len());
    Ok(())
}

fn push_estimate(rows: &mut Vec<(String, f64, f64, f64)>, name: &str, exact: f64, est: isoconst::distributions::Estimate) {
    rows.push((name.to_string(), exact, est.value, est.z_score(exact)));
}

fn oracle_rows(poly: &Polytope, apex: &[f64], samples: usize, seed: u64) -> Result<serde_json::Value, Failure> {
    let exact = summarize(poly, apex).map_err(numerical)?;
    let reference = apex.to_vec();
    let msq = exact.second_moment_scalar;
    let mut estimates: Vec<MomentEstimate> = Vec::new();
    if poly.dim <= MAX_REJECTION_DIM {
        estimates.push(rejection_mc(poly, samples, seed, &reference).map_err(numerical)?);
    }
    estimates.push(cone_sampler_mc(poly, apex, samples, seed ^ 1, &reference).map_err(numerical)?);
    let mut out = Vec::new();
    for est in &estimates {
        let mut rows = Vec::new();
        if let Some(v) = est.volume {
            push_estimate(&mut rows, "volume", exact.volume, v);
        }
        for (i, (b, m)) in exact.barycenter.iter().zip(&est.mean).enumerate() {
            push_estimate(&mut rows, &format!("barycenter[{i}]"), *b, *m);
        }
        push_estimate(&mut rows, "second_moment", msq, est.second_moment);
        let rows: Vec<serde_json::Value> = rows
            .into_iter()
            .map(|(name, exact, mc, z)| serde_json::json!({"quantity": name, "exact": exact, "mc": mc, "stderr_units": z}))
            .collect();
        out.push(serde_json::json!({"method": est.method, "samples": est.samples_used, "rows": rows}));
    }
    Ok(serde_json::Value::Array(out))
}

fn cmd_moments(a: &MomentsArgs) -> Outcome {
    let seed = resolve_seed(&a.seed)?;
    let poly = match &a.poly {
        Some(p) => load_poly(p)?,
        None => {
            let (n, big_n) = (a.n.expect("required by clap"), a.big_n.expect("required by clap"));
            let pts = sample_matrix(a.dist, big_n, n, seed).map_err(usage)?;
            build_body(&pts, a.dist, &a.body)?
        }
    };
    let apex = resolve_apex(&poly, &default_apex(&poly)).map_err(numerical)?;
    let summary = summarize(&poly, &apex).map_err(numerical)?;
    let oracle = if a.oracle { Some(oracle_rows(&poly, &apex, a.samples, seed)?) } else { None };
    let text = match a.output.format {
        Format::Json => {
            let mut v = serde_json::to_value(&summary).map_err(numerical)?;
            if let Some(o) = oracle {
                v["oracle"] = o;
            }
            to_json(&v)?
        }
        Format::Csv => {
            let mut s = String::from("quantity,exact\n");
            let _ = writeln!(s, "volume,{}", summary.volume);
            for (i, b) in summary.barycenter.iter().enumerate() {
                let _ = writeln!(s, "barycenter[{i}],{b}");
            }
            let _ = writeln!(s, "second_moment,{}", summary.second_moment_scalar);
            if let Some(serde_json::Value::Array(blocks)) = oracle {
                s.push_str("method,quantity,exact,mc,stderr_units\n");
                for b in blocks {
                    for r in b["rows"].as_array().into_iter().flatten() {
                        let _ = writeln!(s, "{},{},{},{},{}", b["method"].as_str().unwrap_or(""), r["quantity"].as_str().unwrap_or(""), r["exact"], r["mc"], r["stderr_units"]);
                    }
                }
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &text)
}

/// Reference bodies print the closed form first, then the pipeline's value.
fn cmd_lk(a: &LkArgs) -> Outcome {
    let seed = resolve_seed(&a.seed)?;
    let poly = if let Some(body) = a.body {
        let n = a.dim.expect("required by clap");
        if n == 0 {
            return Err(usage("--dim must be positive"));
        }
        println!("L = {}", body.isotropic_constant(n));
        let iso = isotropic_constant(&body.build(n)).map_err(numerical)?;
        println!("pipeline = {}", iso.l_constant);
        return Ok(());
    } else if let Some(p) = &a.poly {
        load_poly(p)?
    } else if let (Some(n), Some(big_n)) = (a.n, a.big_n) {
        let pts = sample_matrix(a.dist, big_n, n, seed).map_err(usage)?;
        build_body(&pts, a.dist, &a.body_opts)?
    } else {
        return Err(usage("give --body with --dim, --poly, or --n with --N"));
    };
    let iso = isotropic_constant(&poly).map_err(numerical)?;
    println!("L = {}", iso.l_constant);
    Ok(())
}

fn exp_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::TrialAborted { .. } => numerical(e),
        other => usage(other),
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> Outcome {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(exp_failure)?;
    if a.seed.seed.is_some() || std::env::var(SEED_ENV).is_ok() {
        cfg.master_seed = resolve_seed(&a.seed)?;
    } else {
        eprintln!("seed: {}", cfg.master_seed);
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(b) = a.facet_budget {
        cfg.facet_budget = b;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.retain_points |= a.lemma;
    cfg.validate().map_err(exp_failure)?;
    let out = run_experiment(&cfg).map_err(exp_failure)?;
    let written = exp_io::write_outputs(&a.out, &out.records, &out.summary).map_err(exp_failure)?;
    exp_io::write_timing(&a.out.join("timing.json"), &out.records).map_err(exp_failure)?;
    if a.lemma {
        let report = lemma_ratio_report(&out.records, &cfg.thresholds).map_err(numerical)?;
        emit(Some(&a.out.join("lemma.json")), &to_json(&report)?)?;
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_tail(a: &TailArgs) -> Outcome {
    let seed = resolve_seed(&a.seed)?;
    if a.m == 0 || a.trials == 0 || !(a.scale > 0.0) {
        return Err(usage("--m, --trials and --scale must be positive"));
    }
    let table = bernstein_tail_check(a.dist, a.m, a.scale, &a.t_grid, a.trials, seed);
    let text = match a.output.format {
        Format::Json => to_json(&table)?,
        Format::Csv => {
            let mut s = format!("# calibrated_c={}\nt,empirical,stderr,bound\n", table.calibrated_c.map_or("none".into(), |c| c.to_string()));
            for r in &table.rows {
                let _ = writeln!(s, "{},{},{},{}", r.t, r.empirical, r.stderr, r.bound);
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn cmd_validate(a: &ValidateArgs) -> Outcome {
    let seed = resolve_seed(&a.seed)?;
    let report = validate_star_conditions(a.dist, a.samples, seed);
    emit(None, &to_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(numerical(format!("{} fails the moment conditions", a.dist)))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Hull(a) => cmd_hull(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Lk(a) => cmd_lk(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Tailcheck(a) => cmd_tail(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
