//! `rholab`: command-line harness for the rho-walk experiments.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 budget exhausted, 4 a checked bound or criterion failed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use rholab::mixing::{self, SubsetSpec, TransitionOperator, Variant};
use rholab::qform::{self, D_GRID};
use rholab::report::{csv_string, write_csv, write_json};
use rholab::rho_walk::{self, make_partition, GroupSpec, StartMode};
use rholab::seeding;
use rholab::spectral::{self, PowerIteration, RhoGraph, SpectralRow};
use rholab::suite::{self, Criterion};

const WORKERS_ENV: &str = "RHOLAB_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "rholab",
    version,
    about = "Pollard rho walks, their graphs, and their mixing"
)]
struct Cli {
    /// Read the experiment from a JSON config; it takes precedence over
    /// any subcommand and flags on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the resolved experiment config as JSON before running.
    #[arg(long, global = true, value_name = "FILE")]
    save_config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

/// A complete, replayable experiment description.
#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Solve a planted discrete logarithm end to end.
    Dlog(DlogArgs),
    /// First-collision and Floyd statistics over many seeded trials.
    CollideStats(CollideArgs),
    /// Norm of the rho-graph adjacency operator on mean-zero functions.
    Spectrum(SpectrumArgs),
    /// The doubling quadratic form and its gamma certificate.
    Qform(QformArgs),
    /// Mixing time, path-count lemma, and the spaced-sample experiment.
    Mixing(MixingArgs),
    /// Run the acceptance battery and write a JSON summary.
    Suite(SuiteArgs),
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Output {
    /// Write tabular results as CSV.
    #[arg(long, value_name = "FILE")]
    #[serde(default)]
    csv: Option<PathBuf>,
    /// Write the summary as JSON.
    #[arg(long, value_name = "FILE")]
    #[serde(default)]
    json: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Repr {
    /// Elements are their own exponents: g = 1, h = y in Z/n.
    Exponent,
    /// The order-n subgroup of (Z/p)^* with p = 2kn + 1.
    Multiplicative,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Start {
    Random,
    Target,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DlogArgs {
    /// Prime group order.
    #[arg(long, default_value_t = 1009)]
    n: u64,
    /// Planted logarithm, reduced modulo n.
    #[arg(long, default_value_t = 123)]
    y: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Repr::Multiplicative)]
    repr: Repr,
    /// First walk starts at h itself or at a random g^a h^b.
    #[arg(long, value_enum, default_value_t = Start::Random)]
    start: Start,
    /// Floyd index budget is this times sqrt(n) (ln n)^3.
    #[arg(long, default_value_t = rho_walk::DEFAULT_BUDGET_MULTIPLIER)]
    budget_multiplier: f64,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CollideArgs {
    #[arg(long, default_value_t = 10007)]
    n: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = rho_walk::DEFAULT_BUDGET_MULTIPLIER)]
    budget_multiplier: f64,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SpectrumMode {
    /// One rho graph, given by --n and --y.
    Single,
    /// --samples random y for each of --primes.
    Sweep,
    /// Edges x -> x + m for --multipliers and x -> r x for --powers.
    Generalized,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value_t = SpectrumMode::Single)]
    mode: SpectrumMode,
    #[arg(long, default_value_t = 101)]
    n: u64,
    #[arg(long, default_value_t = 7)]
    y: u64,
    #[arg(long, value_delimiter = ',', default_values_t = suite::SPECTRAL_PRIMES)]
    primes: Vec<u64>,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 7])]
    multipliers: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2u64])]
    powers: Vec<u64>,
    /// Relative eigen-residual at which power iteration stops.
    #[arg(long, default_value_t = spectral::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = spectral::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum QformMode {
    /// Norm and certificate for one odd n.
    Single,
    /// Every odd n from 3 to --max-n.
    Sweep,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct QformArgs {
    #[arg(long, value_enum, default_value_t = QformMode::Single)]
    mode: QformMode,
    /// Odd modulus.
    #[arg(long, default_value_t = 101)]
    n: u64,
    /// Ladder parameter; by default the largest passing value on the grid
    /// 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5.
    #[arg(long)]
    #[serde(default)]
    d: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    max_n: u64,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MixingMode {
    /// Worst-start total-variation curve and mixing time.
    Tv,
    /// Exact path counts into random sets against the lemma bounds.
    Mixlem,
    /// Spaced-sample hits into the first sqrt(n) iterates.
    Collision,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GraphVariant {
    Rho,
    NoSquaring,
}

impl From<GraphVariant> for Variant {
    fn from(v: GraphVariant) -> Variant {
        match v {
            GraphVariant::Rho => Variant::Rho,
            GraphVariant::NoSquaring => Variant::NoSquaring,
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct MixingArgs {
    #[arg(long, value_enum, default_value_t = MixingMode::Tv)]
    mode: MixingMode,
    #[arg(long, default_value_t = 101)]
    n: u64,
    #[arg(long, default_value_t = 7)]
    y: u64,
    #[arg(long, value_enum, default_value_t = GraphVariant::Rho)]
    variant: GraphVariant,
    #[arg(long, default_value_t = suite::MIXING_EPS)]
    eps: f64,
    /// Step budget for the TV curve; defaults to ceil((ln n)^3) for the rho
    /// graph and n^2 without squaring.
    #[arg(long)]
    #[serde(default)]
    r_budget: Option<usize>,
    #[arg(long, default_value_t = 50)]
    subsets: usize,
    #[arg(long, default_value_t = 5)]
    min_size: usize,
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Spaced samples per run are 3 * b_max * floor(sqrt n).
    #[arg(long, default_value_t = 3)]
    b_max: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SuiteArgs {
    #[arg(long, default_value_t = suite::DEFAULT_SEED)]
    seed: u64,
    /// Criterion numbers to run; all eight by default.
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5, 6, 7, 8])]
    criteria: Vec<u8>,
    #[command(flatten)]
    #[serde(default)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Io(io::Error),
    Config(String),
    Budget(String),
    Assertion(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Budget(m) => write!(f, "budget exhausted: {m}"),
            Failure::Assertion(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<rholab::Error> for Failure {
    fn from(e: rholab::Error) -> Self {
        use rholab::Error as E;
        let msg = e.to_string();
        match e {
            E::NoCollision { .. } | E::RestartsExhausted { .. } | E::NoConvergence { .. } => {
                Failure::Budget(msg)
            }
            E::MixingBoundViolated { .. } | E::DegenerateCollision => Failure::Assertion(msg),
            _ => Failure::Config(msg),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rholab: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run_cli(cli: Cli) -> Outcome {
    configure_workers()?;
    let command = match (&cli.config, cli.command) {
        (Some(path), _) => load_config(path)?,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(Failure::Config(
                "no subcommand given; see `rholab --help`".into(),
            ))
        }
    };
    if let Some(path) = &cli.save_config {
        write_json(path, &command)?;
    }
    run(&command)
}

fn configure_workers() -> Outcome {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().ok().filter(|&w| w > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn load_config(path: &Path) -> Result<Command, Failure> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(command: &Command) -> Outcome {
    match command {
        Command::Dlog(a) => dlog(a),
        Command::CollideStats(a) => collide_stats(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Qform(a) => qform_cmd(a),
        Command::Mixing(a) => mixing_cmd(a),
        Command::Suite(a) => suite_cmd(a),
    }
}

fn emit_json<T: Serialize>(output: &Output, value: &T) -> Outcome {
    if let Some(path) = &output.json {
        write_json(path, value)?;
    }
    say(&serde_json::to_string_pretty(value).map_err(io::Error::other)?)
}

/// Writes `text` and a newline to stdout. A closed pipe (`rholab ... | head`)
/// is not an error.
fn say(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_csv<T: Serialize>(output: &Output, rows: &[T]) -> Outcome {
    if let Some(path) = &output.csv {
        write_csv(path, rows)?;
    }
    Ok(())
}

fn positive_multiplier(m: f64) -> Outcome {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "budget multiplier must be positive, got {m}"
        )))
    }
}

fn dlog(a: &DlogArgs) -> Outcome {
    positive_multiplier(a.budget_multiplier)?;
    let grp = match a.repr {
        Repr::Exponent => GroupSpec::exponent_model(a.n, a.y)?,
        Repr::Multiplicative => GroupSpec::multiplicative(a.n, a.y)?,
    };
    let mut rng = seeding::rng_from_seed(a.seed);
    let part = make_partition(rng.next_u64());
    let budget = rho_walk::budget_with(a.n, a.budget_multiplier);
    let start = match a.start {
        Start::Random => StartMode::Random,
        Start::Target => StartMode::Target,
    };
    let sol = rho_walk::solve_with_restarts(&grp, &part, start, &mut rng, budget)?;
    if !grp.is_log(sol.y) {
        return Err(Failure::Assertion(format!(
            "recovered {} is not the logarithm",
            sol.y
        )));
    }
    say(&format!("recovered y = {}", sol.y))?;
    if let Some(path) = &a.output.json {
        write_json(
            path,
            &json!({ "n": a.n, "budget": budget, "solution": sol }),
        )?;
    }
    Ok(())
}

fn collide_stats(a: &CollideArgs) -> Outcome {
    positive_multiplier(a.budget_multiplier)?;
    let budget = rho_walk::budget_with(a.n, a.budget_multiplier);
    let exp = rho_walk::collision_experiment_with_budget(a.n, a.trials, a.seed, budget)?;
    emit_csv(&a.output, &exp.rows)?;
    emit_json(&a.output, &exp.summary)
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let cfg = PowerIteration {
        tol: a.tol,
        max_iterations: a.max_iterations,
        seed: PowerIteration::default().seed,
    };
    let reports = match a.mode {
        SpectrumMode::Single => vec![spectral::graph_norm(&RhoGraph::new(a.n, a.y)?, cfg)?.0],
        SpectrumMode::Sweep => spectral::gap_sweep(&a.primes, a.samples, a.seed)?.rows,
        SpectrumMode::Generalized => {
            let g = RhoGraph::generalized(a.n, &a.multipliers, &a.powers)?;
            vec![spectral::graph_norm(&g, cfg)?.0]
        }
    };
    let rows: Vec<SpectralRow> = reports.iter().map(SpectralRow::from).collect();
    emit_csv(&a.output, &rows)?;
    if let Some(path) = &a.output.json {
        write_json(path, &reports)?;
    }
    say(csv_string(&rows)?.trim_end())?;
    for r in &reports {
        if r.gap <= spectral::GAP_RESOLUTION {
            return Err(Failure::Assertion(format!(
                "norm {} is not resolvably below the degree {} at n = {}",
                r.mu, r.degree, r.n
            )));
        }
    }
    Ok(())
}

fn qform_cmd(a: &QformArgs) -> Outcome {
    match a.mode {
        QformMode::Single => {
            let q = qform::q_norm(a.n)?;
            let report = match a.d {
                Some(d) => Some(qform::verify_critbd(&qform::gamma_build(a.n, d)?)),
                None => qform::choose_d(a.n, &D_GRID)?,
            };
            if let Some(r) = &report {
                emit_csv(&a.output, &r.rows)?;
            }
            let summary = json!({
                "n": a.n,
                "q_norm": q,
                "scaled_gap": (1.0 - q) * (a.n as f64).ln().powi(2),
                "certificate": report.as_ref().map(|r| json!({
                    "d": r.d,
                    "passed": r.passed,
                    "worst_lhs": r.worst_lhs,
                    "worst_k": r.worst_k,
                    "certified_c": r.certified_c,
                    "form_bound": r.form_bound,
                })),
            });
            emit_json(&a.output, &summary)?;
            match report {
                Some(r) if r.passed && q <= r.form_bound + 1e-9 => Ok(()),
                Some(r) => Err(Failure::Assertion(format!(
                    "certificate at d = {} does not bound the form (worst lhs {})",
                    r.d, r.worst_lhs
                ))),
                None => Err(Failure::Assertion(format!(
                    "no grid value of d certifies n = {}",
                    a.n
                ))),
            }
        }
        QformMode::Sweep => {
            if a.max_n < 3 {
                return Err(Failure::Config("--max-n must be at least 3".into()));
            }
            let rows = (3..=a.max_n)
                .step_by(2)
                .map(|n| qform::sweep_row(n, &D_GRID))
                .collect::<rholab::Result<Vec<_>>>()?;
            emit_csv(&a.output, &rows)?;
            if let Some(path) = &a.output.json {
                write_json(path, &rows)?;
            }
            say(csv_string(&rows)?.trim_end())?;
            match rows.iter().find(|r| !r.certificate_dominates) {
                None => Ok(()),
                Some(r) => Err(Failure::Assertion(format!(
                    "certificate fails at n = {}",
                    r.n
                ))),
            }
        }
    }
}

fn mixing_cmd(a: &MixingArgs) -> Outcome {
    match a.mode {
        MixingMode::Tv => {
            let op = TransitionOperator::new(a.n, a.y, a.variant.into())?;
            let budget = a.r_budget.unwrap_or(match a.variant {
                GraphVariant::Rho => mixing::rho_budget(a.n),
                GraphVariant::NoSquaring => mixing::no_squaring_budget(a.n),
            });
            let report = mixing::tv_mixing_time(&op, a.eps, budget);
            emit_csv(&a.output, &report.rows())?;
            emit_json(
                &a.output,
                &json!({
                    "n": report.n,
                    "y": report.y,
                    "variant": report.variant,
                    "eps": report.eps,
                    "r_budget": report.r_budget,
                    "tau": report.tau,
                    "mixed": report.tau.is_some(),
                    "final_max_tv": report.max_tv.last(),
                }),
            )
        }
        MixingMode::Mixlem => {
            let mu =
                spectral::operator_norm_L0(&RhoGraph::new(a.n, a.y)?, spectral::DEFAULT_TOL)?.mu;
            if a.min_size == 0 || a.min_size > a.max_size {
                return Err(Failure::Config("need 1 <= --min-size <= --max-size".into()));
            }
            let spec = SubsetSpec {
                count: a.subsets,
                min_size: a.min_size,
                max_size: a.max_size,
                seed: a.seed,
            };
            let report = mixing::verify_mixlem(a.n, a.y, mu, &spec)?;
            emit_csv(&a.output, &report.rows)?;
            emit_json(&a.output, &report)?;
            report.check().map_err(Failure::from)
        }
        MixingMode::Collision => {
            let report = mixing::collision_bound_experiment(a.n, a.trials, a.seed, a.b_max)?;
            emit_csv(&a.output, &report.runs)?;
            emit_json(&a.output, &report)
        }
    }
}

fn suite_cmd(a: &SuiteArgs) -> Outcome {
    let criteria = a
        .criteria
        .iter()
        .map(|&id| {
            Criterion::from_id(id).ok_or_else(|| Failure::Config(format!("no criterion {id}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut results = Vec::with_capacity(criteria.len());
    for c in criteria {
        let r = c.run(a.seed)?;
        say(&r.line())?;
        results.push(r);
    }
    let report = suite::SuiteReport {
        seed: a.seed,
        all_passed: results.iter().all(|r| r.passed),
        criteria: results,
    };
    if let Some(path) = &a.output.json {
        write_json(path, &report)?;
    }
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} ({})", r.id, r.name))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "failing criteria: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn configs_round_trip_through_json() {
        for argv in [
            &["rholab", "dlog", "--n", "1009", "--y", "123"][..],
            &[
                "rholab",
                "spectrum",
                "--mode",
                "generalized",
                "--powers",
                "3",
            ],
            &["rholab", "qform", "--n", "51", "--d", "0.2"],
            &[
                "rholab",
                "mixing",
                "--mode",
                "tv",
                "--variant",
                "no-squaring",
            ],
            &["rholab", "suite", "--criteria", "1,8", "--json", "out.json"],
        ] {
            let cmd = Cli::try_parse_from(argv).unwrap().command.unwrap();
            let text = serde_json::to_string(&cmd).unwrap();
            let back: Command = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cmd, "{text}");
        }
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(Failure::from(rholab::Error::NotPrime(9)).code(), 2);
        assert_eq!(
            Failure::from(rholab::Error::NoCollision { budget: 5 }).code(),
            3
        );
        let v = rholab::Error::MixingBoundViolated {
            start: 0,
            subset: 0,
            ratio: 2.0,
        };
        assert_eq!(Failure::from(v).code(), 4);
    }
}
