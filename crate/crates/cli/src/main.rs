//! `numguard` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or precondition error, 2 the run completed
//! and found a defect (lost tasks, invalid hull), 3 hull construction failed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use numguard_core::fuzz::{self, FuzzConfig};
use numguard_core::geometry::{
    incremental_hull, orient_base_width, orient_exact, orient_majority_width, parse_points, Base,
    FloatWidth, HullError, HullOutcome, HullPredicate, Point3,
};
use numguard_core::hexfloat;
use numguard_core::rebalance::{self, RebalanceError, TaskDistribution};
use numguard_core::search::{self, FixedCoordinate, OrientSearchConfig, SearchMode, SmtOptions};
use numguard_core::SCHEMA_VERSION;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FINDING: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "numguard",
    version,
    about = "Floating-point counterexample search for task rebalancing and 3D orientation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rebalance a task distribution to a new total.
    Rebalance(RebalanceArgs),
    /// Search the 2^e + delta lattice for inputs that make the float rebalancer lose tasks.
    FuzzRebalance(FuzzArgs),
    /// Evaluate the orientation of four points.
    Orient(OrientArgs),
    /// Build a convex hull and optionally validate it exactly.
    Hull(HullArgs),
    /// Search near-coplanar inputs where floating-point orientation is wrong.
    SearchOrient(SearchArgs),
    /// Write the SMT-LIB2 disagreement query.
    EmitSmt(SmtArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Float,
    Int,
    Rational,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredicateArg {
    Float,
    Majority,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Majority,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => SearchMode::SingleBase,
            ModeArg::Majority => SearchMode::Majority,
        }
    }
}

fn parse_width(s: &str) -> Result<FloatWidth, String> {
    let bits: u8 = s.parse().map_err(|_| format!("invalid width `{s}`"))?;
    FloatWidth::try_from(bits)
}

fn parse_base(s: &str) -> Result<Base, String> {
    s.parse()
        .ok()
        .and_then(Base::from_number)
        .ok_or_else(|| format!("base must be 1, 2 or 3, got `{s}`"))
}

#[derive(clap::Args)]
struct RebalanceArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Comma-separated task counts, one per node.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    tasks: Vec<i64>,
    #[arg(long, allow_hyphen_values = true)]
    new_total: i64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct Common {
    /// Generator seed; a fresh one is drawn and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    iters: u64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "NUMGUARD_JOBS", default_value_t = 1)]
    jobs: usize,
}

#[derive(clap::Args)]
struct FuzzArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 40)]
    emax: u32,
    #[arg(long, default_value_t = 100)]
    delta: i64,
    #[arg(long, default_value_t = 2)]
    nodes: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Check the integer rebalancer against the exact reference instead.
    #[arg(long)]
    differential: bool,
}

#[derive(clap::Args)]
struct OrientArgs {
    #[arg(long, value_enum)]
    predicate: PredicateArg,
    /// Base point for the float predicate.
    #[arg(long, value_parser = parse_base, default_value = "1")]
    base: Base,
    /// A point file, or four inline points separated by `;`.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "model",
        conflicts_with = "model"
    )]
    points: Option<String>,
    /// Read the four points from a solver model answering `emit-smt`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = parse_width, default_value = "64")]
    width: FloatWidth,
}

#[derive(clap::Args)]
struct HullArgs {
    #[arg(long, value_enum)]
    predicate: PredicateArg,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    validate: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct Band {
    #[arg(long, value_parser = parse_width, default_value = "64")]
    width: FloatWidth,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    emin: i32,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    emax: i32,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "single")]
    mode: ModeArg,
    #[command(flatten)]
    band: Band,
    #[arg(long, default_value_t = 4)]
    ulp_radius: u32,
    #[arg(long, default_value_t = 100)]
    max_fixtures: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args)]
struct SmtArgs {
    #[arg(long, value_enum, default_value = "majority")]
    mode: ModeArg,
    #[command(flatten)]
    band: Band,
    /// Pin a coordinate, e.g. `--fix ax=0x1p+0`.
    #[arg(long)]
    fix: Vec<FixedCoordinate>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the exit code to use.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            });
        }
    };
    let result = match cli.command {
        Command::Rebalance(args) => run_rebalance(args),
        Command::FuzzRebalance(args) => run_fuzz_rebalance(args),
        Command::Orient(args) => run_orient(args),
        Command::Hull(args) => run_hull(args),
        Command::SearchOrient(args) => run_search_orient(args),
        Command::EmitSmt(args) => run_emit_smt(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("cannot write output: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        use std::hash::{BuildHasher, Hasher};
        let mut h = std::collections::hash_map::RandomState::new().build_hasher();
        h.write_u128(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or_default(),
        );
        let seed = h.finish();
        eprintln!("seed: {seed} (pass --seed {seed} to reproduce)");
        seed
    })
}

fn run_rebalance(args: RebalanceArgs) -> Outcome {
    let precondition = |e: RebalanceError| Failure::usage(e);
    let dist = TaskDistribution::new(args.tasks.clone()).map_err(precondition)?;
    let new_total = args.new_total;
    let (algo, new_tasks, rest_text, rest_dec) = match args.algo {
        Algo::Float => {
            let out = rebalance::rebalance_float(&dist, new_total).map_err(precondition)?;
            let r = out.final_rest;
            (
                "float",
                out.new_tasks,
                hexfloat::format_f64(r),
                Some(r.to_string()),
            )
        }
        Algo::Int => {
            let out = rebalance::rebalance_int(&dist, new_total).map_err(precondition)?;
            ("int", out.new_tasks, out.final_rest.to_string(), None)
        }
        Algo::Rational => {
            let out = rebalance::rebalance_rational(&dist, new_total).map_err(precondition)?;
            ("rational", out.new_tasks, out.final_rest.to_string(), None)
        }
    };
    let sum: i128 = new_tasks.iter().map(|&t| t as i128).sum();
    let lost = new_total as i128 - sum;
    let bounds = rebalance::exact_bounds(&dist, new_total);
    let within_bounds = new_tasks
        .iter()
        .zip(&bounds)
        .all(|(&t, &(lo, hi))| lo <= t as i128 && t as i128 <= hi);

    let text = match args.format {
        Format::Json => {
            let mut report = json!({
                "schema_version": SCHEMA_VERSION,
                "algo": algo,
                "tasks": dist.tasks(),
                "new_total": new_total,
                "new_tasks": new_tasks,
                "sum": sum as i64,
                "lost": lost as i64,
                "final_rest": rest_text,
                "checks": { "exact_sum": lost == 0, "within_bounds": within_bounds },
            });
            if let Some(dec) = &rest_dec {
                report["final_rest_dec"] = json!(dec);
            }
            format!("{report}\n")
        }
        Format::Csv => {
            let list = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            format!(
                "algo;tasks;new_total;new_tasks;sum;lost;final_rest;exact_sum;within_bounds\n{algo};{};{new_total};{};{sum};{lost};{rest_text};{};{within_bounds}\n",
                list(dist.tasks()),
                list(&new_tasks),
                lost == 0,
            )
        }
    };
    write_output(None, &text)?;
    Ok(if matches!(args.algo, Algo::Float) && lost != 0 {
        EXIT_FINDING
    } else {
        EXIT_OK
    })
}

fn run_fuzz_rebalance(args: FuzzArgs) -> Outcome {
    let config = FuzzConfig {
        exponent_max: args.emax,
        delta_bound: args.delta,
        node_count: args.nodes,
        iterations: args.common.iters,
        time_budget: args.common.time_budget,
        seed: resolve_seed(args.common.seed),
        jobs: args.common.jobs,
    };
    let out = args.common.out.as_deref();
    if args.differential {
        let report = fuzz::differential_fuzz(&config).map_err(Failure::usage)?;
        eprintln!(
            "checked {} inputs: {} sum, {} bound, {} equivalence, {} rest violations",
            report.checked,
            report.sum_violations,
            report.bound_violations,
            report.equivalence_violations,
            report.rest_violations
        );
        write_output(out, &to_json(&report))?;
        return Ok(if report.is_clean() {
            EXIT_OK
        } else {
            EXIT_FINDING
        });
    }
    let report = fuzz::find_float_counterexamples(&config).map_err(Failure::usage)?;
    eprintln!(
        "{} iterations{}: {} counterexamples ({} shortfall, {} surplus), {} invalid tuples redrawn",
        report.iterations_completed,
        if report.budget_exhausted {
            " (time budget reached)"
        } else {
            ""
        },
        report.counterexamples.len(),
        report.shortfall_count,
        report.surplus_count,
        report.invalid_tuples,
    );
    let text = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&report),
    };
    write_output(out, &text)?;
    Ok(EXIT_OK)
}

fn read_quadruple(spec: &str) -> Result<[Point3; 4], Failure> {
    let text = if Path::new(spec).is_file() {
        fs::read_to_string(spec).map_err(|e| Failure::usage(format!("cannot read {spec}: {e}")))?
    } else {
        spec.replace(';', "\n")
    };
    let points = parse_points(&text).map_err(Failure::usage)?;
    <[Point3; 4]>::try_from(points)
        .map_err(|p| Failure::usage(format!("expected exactly 4 points, got {}", p.len())))
}

fn run_orient(args: OrientArgs) -> Outcome {
    let [a, b, c, d] = match (&args.points, &args.model) {
        (Some(spec), _) => read_quadruple(spec)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            search::parse_model(&text, args.width).map_err(Failure::usage)?
        }
        (None, None) => unreachable!("clap requires one of --points and --model"),
    };
    let exact = orient_exact(&a, &b, &c, &d);
    let report = match args.predicate {
        PredicateArg::Float => {
            let sign = orient_base_width(&a, &b, &c, &d, args.base, args.width);
            json!({
                "schema_version": SCHEMA_VERSION,
                "predicate": "float",
                "width": args.width,
                "base": args.base.index() + 1,
                "sign": sign,
                "exact_sign": exact,
                "agrees_with_exact": sign == exact,
            })
        }
        PredicateArg::Majority => {
            let vote = orient_majority_width(&a, &b, &c, &d, args.width);
            json!({
                "schema_version": SCHEMA_VERSION,
                "predicate": "majority",
                "width": args.width,
                "sign": vote.sign,
                "per_base": vote.per_base,
                "tie": vote.tie,
                "unanimous": vote.unanimous(),
                "exact_sign": exact,
                "agrees_with_exact": vote.sign == exact,
            })
        }
        PredicateArg::Exact => json!({
            "schema_version": SCHEMA_VERSION,
            "predicate": "exact",
            "sign": exact,
        }),
    };
    write_output(None, &format!("{report}\n"))?;
    Ok(EXIT_OK)
}

fn run_hull(args: HullArgs) -> Outcome {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.input.display())))?;
    let points = parse_points(&text).map_err(Failure::usage)?;
    let predicate = match args.predicate {
        PredicateArg::Float => HullPredicate::FloatSingle,
        PredicateArg::Majority => HullPredicate::Majority,
        PredicateArg::Exact => HullPredicate::Exact,
    };
    let outcome = incremental_hull(&points, predicate).map_err(|e: HullError| Failure::usage(e))?;
    let (facets, failure, code) = match &outcome {
        HullOutcome::Built(hull) => (hull.facets.clone(), None, EXIT_OK),
        HullOutcome::Failed(f) => (f.facets.clone(), Some(f), EXIT_CONSTRUCTION),
    };
    let validity = match (&outcome, args.validate) {
        (HullOutcome::Built(hull), true) => {
            Some(numguard_core::geometry::validate_hull(&points, hull))
        }
        _ => None,
    };
    let code = match &validity {
        Some(report) if !report.valid => EXIT_FINDING,
        _ => code,
    };
    let text = match args.format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "predicate": predicate,
            "status": if failure.is_some() { "failed" } else { "built" },
            "facets": facets,
            "failure": failure,
            "validity": validity,
        })),
        Format::Csv => {
            let mut s = String::from("i;j;k\n");
            for [i, j, k] in &facets {
                s.push_str(&format!("{i};{j};{k}\n"));
            }
            if let Some(f) = failure {
                eprintln!(
                    "construction failed: {}",
                    serde_json::to_string(f).expect("serializable")
                );
            }
            if let Some(v) = &validity {
                eprintln!("{}", serde_json::to_string(v).expect("serializable"));
            }
            s
        }
    };
    write_output(None, &text)?;
    Ok(code)
}

fn run_search_orient(args: SearchArgs) -> Outcome {
    let config = OrientSearchConfig {
        float_width: args.band.width,
        e_min: args.band.emin,
        e_max: args.band.emax,
        ulp_radius: args.ulp_radius,
        iterations: args.common.iters,
        time_budget: args.common.time_budget,
        seed: resolve_seed(args.common.seed),
        mode: args.mode.into(),
        max_fixtures: args.max_fixtures,
        jobs: args.common.jobs,
    };
    let report = search::search_disagreement(&config).map_err(Failure::usage)?;
    let s = &report.stats;
    eprintln!(
        "{} samples{}: per-base error rates {:.4} {:.4} {:.4}; >=1 base wrong {}, >=2 bases wrong {}, majority wrong {}, ties {}; {} fixtures",
        s.samples,
        if report.budget_exhausted { " (time budget reached)" } else { "" },
        s.per_base_error_rate[0],
        s.per_base_error_rate[1],
        s.per_base_error_rate[2],
        s.one_or_more_base_errors,
        s.two_or_more_base_errors,
        s.majority_errors,
        s.ties,
        report.counterexamples.len(),
    );
    write_output(args.common.out.as_deref(), &to_json(&report))?;
    Ok(EXIT_OK)
}

fn run_emit_smt(args: SmtArgs) -> Outcome {
    let config = OrientSearchConfig {
        float_width: args.band.width,
        e_min: args.band.emin,
        e_max: args.band.emax,
        mode: args.mode.into(),
        ..OrientSearchConfig::default()
    };
    config.validate().map_err(Failure::usage)?;
    let options = SmtOptions { fixed: args.fix };
    options
        .validate(config.float_width)
        .map_err(Failure::usage)?;
    write_output(args.out.as_deref(), &search::smt_script(&config, &options))?;
    Ok(EXIT_OK)
}
