//! Command-line surface.
//!
//! Commands: `gen`, `run`, `opt`, `metrics`, `bench`, `verify`. Exit codes:
//! 0 ok, 1 partial bench failure, 2 usage or parse error, 3 protocol
//! violation, 4 oracle limit exceeded, 5 infeasible schedule. The env var
//! `JRPD_OPT_LIMIT` overrides the exact-oracle distinct-deadline limit.

pub mod bench;
pub mod files;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::algorithms::{is_registered, make_algorithm};
use crate::engine::{simulate, ItemCatalog, Mode, SimError};
use crate::generators::{
    gen_adversary, gen_cheap_expensive, gen_random, gen_red_black, AdversaryCase, AdversaryError,
    NoiseModel, RandomConfig,
};
use crate::metrics::metrics_report;
use crate::opt::{optimal_bounds, optimal_exact, OptError, DEFAULT_DEADLINE_LIMIT};
use crate::schedule::{schedule_cost, validate_schedule};
use crate::weight::Weight;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BENCH_PARTIAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PROTOCOL: i32 = 3;
pub const EXIT_ORACLE_LIMIT: i32 = 4;
pub const EXIT_INFEASIBLE: i32 = 5;

#[derive(Parser)]
#[command(
    name = "jrpd",
    version,
    about = "Joint replenishment with deadlines under deadline predictions: \
             generators, online algorithms, error metrics, exact oracle, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ModeArg {
    #[default]
    Predicted,
    Clairvoyant,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Mode {
        match mode {
            ModeArg::Predicted => Mode::Predicted,
            ModeArg::Clairvoyant => Mode::Clairvoyant,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run an algorithm on an instance; prints the exact total cost
    Run {
        /// Algorithm name, e.g. local-greedy or combined:local-greedy+heavy-light
        #[arg(long)]
        alg: String,
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
        /// Write the resulting schedule here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the offline optimum (exact) or certified bounds
    #[command(group(ArgGroup::new("kind").required(true).args(["exact", "bounds"])))]
    Opt {
        instance: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        bounds: bool,
        /// Write the witness schedule here
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Print the prediction-error metrics of an instance as JSON
    Metrics { instance: PathBuf },
    /// Run algorithms over instances and emit one CSV row per pair
    Bench {
        /// Comma-separated algorithm names
        #[arg(long, value_delimiter = ',', required = true)]
        algs: Vec<String>,
        /// Instance files
        #[arg(long, num_args = 1.., required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write two-column eta/ratio data per algorithm here
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Check a schedule against an instance and print verdict plus cost
    Verify {
        instance: PathBuf,
        schedule: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    /// Red/black lower-bound family for the budget-scan greedies
    RedBlack {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cheap/expensive tightness family for the phase-local greedy
    CheapExpensive {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Behavior-adaptive lower-bound instance against a chosen algorithm
    Adversary {
        /// Number of items; must be a perfect square
        #[arg(long)]
        n: u32,
        /// Target ratio parameter, a rational >= 1 (e.g. 2 or 3/2)
        #[arg(long)]
        c: String,
        #[arg(long)]
        alg: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random instance with controllable prediction noise
    Random {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        items: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        requests: u32,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        horizon: i64,
        /// Weight grid denominator; weights are multiples of 1/grid
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        weight_grid: u32,
        /// exact | shift:<max-offset> | target:<budget>[:<seed>]
        #[arg(long, default_value = "exact")]
        noise: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<files::FileError> for Failure {
    fn from(err: files::FileError) -> Failure {
        Failure::usage(err.to_string())
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { family } => cmd_gen(family),
        Command::Run {
            alg,
            instance,
            mode,
            out,
        } => cmd_run(&alg, &instance, mode.into(), out),
        Command::Opt {
            instance,
            exact,
            bounds: _,
            witness,
        } => cmd_opt(&instance, exact, witness),
        Command::Metrics { instance } => cmd_metrics(&instance),
        Command::Bench {
            algs,
            instances,
            mode,
            out,
            plot_data,
        } => cmd_bench(&algs, &instances, mode.into(), out, plot_data),
        Command::Verify { instance, schedule } => cmd_verify(&instance, &schedule),
    }
}

fn opt_limit() -> Result<usize, Failure> {
    match std::env::var("JRPD_OPT_LIMIT") {
        Ok(value) => value.parse().map_err(|_| {
            Failure::usage(format!("JRPD_OPT_LIMIT must be an integer, got `{value}`"))
        }),
        Err(_) => Ok(DEFAULT_DEADLINE_LIMIT),
    }
}

fn parse_noise(text: &str, default_seed: u64) -> Result<NoiseModel, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["exact"] => Ok(NoiseModel::Exact),
        ["shift", max] => max
            .parse()
            .map(|max_offset| NoiseModel::Shift { max_offset })
            .map_err(|_| Failure::usage(format!("bad shift offset in `{text}`"))),
        ["target", budget] => budget
            .parse()
            .map(|budget| NoiseModel::TargetInversions {
                budget,
                seed: default_seed,
            })
            .map_err(|_| Failure::usage(format!("bad inversion budget in `{text}`"))),
        ["target", budget, seed] => {
            let budget = budget
                .parse()
                .map_err(|_| Failure::usage(format!("bad inversion budget in `{text}`")))?;
            let seed = seed
                .parse()
                .map_err(|_| Failure::usage(format!("bad swap seed in `{text}`")))?;
            Ok(NoiseModel::TargetInversions { budget, seed })
        }
        _ => Err(Failure::usage(format!(
            "unknown noise `{text}`; expected exact, shift:<max>, or target:<budget>[:<seed>]"
        ))),
    }
}

fn cmd_gen(family: GenFamily) -> Result<(), Failure> {
    match family {
        GenFamily::RedBlack { k, out } => {
            files::write_instance(&out, &gen_red_black(k))?;
            Ok(())
        }
        GenFamily::CheapExpensive { n, out } => {
            files::write_instance(&out, &gen_cheap_expensive(n))?;
            Ok(())
        }
        GenFamily::Adversary { n, c, alg, out } => {
            if !is_registered(&alg) {
                return Err(Failure::usage(format!("unknown algorithm `{alg}`")));
            }
            let c: Weight = c
                .parse()
                .map_err(|e| Failure::usage(format!("bad ratio parameter c: {e}")))?;
            let factory = |catalog: &ItemCatalog| {
                make_algorithm(&alg, catalog).expect("name validated above")
            };
            let outcome = gen_adversary(factory, n, c.ratio()).map_err(|err| match err {
                AdversaryError::Sim(e) => Failure {
                    code: EXIT_PROTOCOL,
                    message: e.to_string(),
                },
                other => Failure::usage(other.to_string()),
            })?;
            files::write_instance(&out, &outcome.instance)?;
            let case = match outcome.case {
                AdversaryCase::Case1NoInversions => "case1_no_inversions",
                AdversaryCase::Case2ManyInversions => "case2_many_inversions",
            };
            let meta = json!({
                "case": case,
                "per_phase_service_count": outcome.per_phase_service_count,
                "phases": outcome.phases,
            });
            files::write_json(&out.with_extension("meta.json"), &meta)?;
            Ok(())
        }
        GenFamily::Random {
            items,
            requests,
            horizon,
            weight_grid,
            noise,
            seed,
            out,
        } => {
            let noise = parse_noise(&noise, seed)?;
            let config = RandomConfig {
                items,
                requests,
                horizon,
                weight_grid,
                noise,
                seed,
            };
            let outcome = gen_random(&config);
            files::write_instance(&out, &outcome.instance)?;
            if let Some(achieved) = outcome.achieved_request_inversions {
                eprintln!("achieved request inversions: {achieved}");
            }
            Ok(())
        }
    }
}

fn cmd_run(alg: &str, instance: &Path, mode: Mode, out: Option<PathBuf>) -> Result<(), Failure> {
    if !is_registered(alg) {
        return Err(Failure::usage(format!("unknown algorithm `{alg}`")));
    }
    let instance = files::read_instance(instance)?;
    let catalog = ItemCatalog::of(&instance);
    let mut algorithm = make_algorithm(alg, &catalog).expect("name validated above");
    let (schedule, _trace) = simulate(&instance, algorithm.as_mut(), mode).map_err(|err| {
        let code = match err {
            SimError::Protocol(_) => EXIT_PROTOCOL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    })?;
    if let Some(path) = out {
        files::write_schedule(&path, &schedule)?;
    }
    let cost = schedule_cost(&schedule, &instance)
        .expect("engine output")
        .total;
    println!("{cost}");
    Ok(())
}

fn cmd_opt(instance: &Path, exact: bool, witness: Option<PathBuf>) -> Result<(), Failure> {
    let instance = files::read_instance(instance)?;
    let result = if exact {
        optimal_exact(&instance, opt_limit()?).map_err(|err| {
            let code = match err {
                OptError::TooManyDeadlines { .. } => EXIT_ORACLE_LIMIT,
                OptError::Sim(_) => EXIT_USAGE,
            };
            Failure {
                code,
                message: err.to_string(),
            }
        })?
    } else {
        optimal_bounds(&instance).map_err(|err| Failure {
            code: EXIT_USAGE,
            message: err.to_string(),
        })?
    };
    if exact {
        println!("{}", result.upper());
    } else {
        println!("{} {}", result.lower(), result.upper());
    }
    if let Some(path) = witness {
        files::write_schedule(&path, result.witness())?;
    }
    Ok(())
}

fn cmd_metrics(instance: &Path) -> Result<(), Failure> {
    let instance = files::read_instance(instance)?;
    let report = metrics_report(&instance);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable report")
    );
    Ok(())
}

fn cmd_bench(
    algs: &[String],
    instances: &[PathBuf],
    mode: Mode,
    out: Option<PathBuf>,
    plot_data: Option<PathBuf>,
) -> Result<(), Failure> {
    for alg in algs {
        if !is_registered(alg) {
            return Err(Failure::usage(format!("unknown algorithm `{alg}`")));
        }
    }
    let (rows, any_failed) = bench::run_bench(algs, instances, mode, opt_limit()?);
    let csv = bench::to_csv(&rows);
    match out {
        Some(path) => std::fs::write(&path, csv)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    if let Some(path) = plot_data {
        std::fs::write(&path, bench::to_plot_data(&rows, algs))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if any_failed {
        Err(Failure {
            code: EXIT_BENCH_PARTIAL,
            message: "some bench cells failed".into(),
        })
    } else {
        Ok(())
    }
}

fn cmd_verify(instance: &Path, schedule: &Path) -> Result<(), Failure> {
    let instance = files::read_instance(instance)?;
    let schedule = files::read_schedule(schedule)?;
    let violations = validate_schedule(&schedule, &instance);
    if violations.is_empty() {
        let cost = schedule_cost(&schedule, &instance)
            .expect("validated schedule")
            .total;
        println!("feasible {cost}");
        Ok(())
    } else {
        let mut message = String::from("infeasible");
        for violation in &violations {
            message.push_str(&format!("\n  - {violation}"));
        }
        println!("{message}");
        Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!("{} violations", violations.len()),
        })
    }
}
