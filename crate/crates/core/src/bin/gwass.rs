use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gwass::gw::{grid_refinement_bound, gw_brute_force, gw_distance, levy_prokhorov_1d, GwParams};
use gwass::lab::io::{read_measure, to_json_string, write_json};
use gwass::lab::{resolve_seed, run_simulation, run_suite, SimulateConfig, Suite, SuiteReport};
use gwass::transport::wasserstein;

/// Generalized Wasserstein distances between discrete measures, and a
/// Lagrangian scheme for transport equations with sources.
#[derive(Parser)]
#[command(name = "gwass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pair {
    /// Source measure (JSON file).
    mu: PathBuf,
    /// Target measure (JSON file).
    nu: PathBuf,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

impl ParamArgs {
    fn params(&self) -> gwass::Result<GwParams> {
        GwParams::new(self.a, self.b, self.p)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generalized Wasserstein distance with its optimal decomposition.
    Dist {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        params: ParamArgs,
        /// Also write the optimal plan as CSV.
        #[arg(long)]
        plan_csv: Option<PathBuf>,
    },
    /// Balanced Wasserstein distance; masses must agree.
    Wasserstein {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Allowed mass mismatch.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Brute-force grid search over plans, for tiny instances.
    Oracle {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Lévy–Prokhorov distance between probability measures on the line.
    Prokhorov {
        #[command(flatten)]
        pair: Pair,
    },
    /// Run the scheme and write snapshots, tables and a summary.
    Simulate {
        /// Configuration file; omit with --reference.
        config: Option<PathBuf>,
        /// Use the built-in reference problem.
        #[arg(long, conflicts_with = "config")]
        reference: bool,
        /// Level for --reference.
        #[arg(long, default_value_t = 5, requires = "reference")]
        k: u32,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run a verification suite: metric, examples, flows, scheme, prokhorov,
    /// metrization, or all.
    Verify {
        suite: String,
        /// Seed for randomized suites; defaults to $GWASS_SEED, then a fixed value.
        #[arg(long)]
        seed: Option<u64>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report(s) to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall time in reports.
        #[arg(long)]
        timings: bool,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn print_json<T: Serialize>(value: &T) -> gwass::Result<()> {
    println!("{}", to_json_string(value)?);
    Ok(())
}

#[derive(Serialize)]
struct OracleOutput {
    value: f64,
    exact: f64,
    refinement_bound: f64,
    steps: usize,
}

#[derive(Serialize)]
struct ProkhorovOutput {
    value: f64,
}

fn run(cli: Cli) -> gwass::Result<Outcome> {
    match cli.command {
        Command::Dist { pair, params, plan_csv } => {
            let (mu, nu) = (read_measure(&pair.mu)?, read_measure(&pair.nu)?);
            let result = gw_distance(&mu, &nu, &params.params()?)?;
            if let Some(path) = plan_csv {
                result.plan.write_csv(std::fs::File::create(path)?)?;
            }
            print_json(&result)?;
        }
        Command::Wasserstein { pair, p, tol } => {
            let (mu, nu) = (read_measure(&pair.mu)?, read_measure(&pair.nu)?);
            print_json(&wasserstein(&mu, &nu, p, tol)?)?;
        }
        Command::Oracle { pair, params, steps } => {
            let (mu, nu) = (read_measure(&pair.mu)?, read_measure(&pair.nu)?);
            let params = params.params()?;
            print_json(&OracleOutput {
                value: gw_brute_force(&mu, &nu, &params, steps)?,
                exact: gw_distance(&mu, &nu, &params)?.value,
                refinement_bound: grid_refinement_bound(&mu, &nu, &params, steps),
                steps,
            })?;
        }
        Command::Prokhorov { pair } => {
            let (mu, nu) = (read_measure(&pair.mu)?, read_measure(&pair.nu)?);
            print_json(&ProkhorovOutput { value: levy_prokhorov_1d(&mu, &nu)? })?;
        }
        Command::Simulate { config, reference, k, out } => {
            let cfg = match (config, reference) {
                (Some(path), _) => SimulateConfig::from_file(path)?,
                (None, true) => SimulateConfig::reference(k),
                (None, false) => {
                    return Err(gwass::Error::InvalidParams("give a config file or --reference".into()));
                }
            };
            let summary = run_simulation(&cfg, &out)?;
            print_json(&summary)?;
            let failed = summary.cauchy_within_bounds == Some(false) || summary.dependence_within_bounds == Some(false);
            return Ok(if failed { Outcome::Fail } else { Outcome::Pass });
        }
        Command::Verify { suite, seed, json, report, timings } => {
            let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let seed = resolve_seed(seed)?;
            let mut reports: Vec<SuiteReport> = Vec::new();
            for s in suites {
                let start = Instant::now();
                let mut r = run_suite(s, seed)?;
                if timings {
                    r.wall_time_s = Some(start.elapsed().as_secs_f64());
                }
                if json {
                    print_json(&r)?;
                } else {
                    print!("{}", r.to_table());
                }
                reports.push(r);
            }
            if let Some(path) = report {
                match reports.as_slice() {
                    [one] => write_json(path, one)?,
                    many => write_json(path, many)?,
                }
            }
            if reports.iter().any(|r| !r.pass) {
                return Ok(Outcome::Fail);
            }
        }
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
