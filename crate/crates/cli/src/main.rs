//! `approval-pb` command-line tool.
//!
//! Exit codes: 0 success, 1 malformed input, 2 configuration or contract
//! error, 3 axiom violated (`check-axiom` only). Errors are printed to stderr
//! as a single JSON object `{"error": <kind>, "message": <text>}`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use approval_pb::axioms::{self, Axiom};
use approval_pb::culture::{self, CultureConfig};
use approval_pb::harness::{
    emit_plot_data, parse_results_csv, replay_trial, results_csv, run_experiment, write_atomic, Case,
    ExperimentConfig,
};
use approval_pb::rules::{run_rule, Quota, Rule, RuleOptions, ScoringMode};
use approval_pb::{Budget, Error, Instance};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "approval-pb", version, about = "Participatory budgeting with approval ballots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one instance from a culture config.
    Gen(GenArgs),
    /// Elect a budget with one rule.
    RunRule(RunRuleArgs),
    /// Check a budget against an axiom.
    CheckAxiom(CheckAxiomArgs),
    /// Run the Monte Carlo study, or replay a single trial of it.
    Experiment(ExperimentArgs),
    /// Rebuild the per-case plot CSVs from a results CSV.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    trial: u64,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunRuleArgs {
    #[arg(long)]
    rule: Rule,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "approval")]
    scoring: ScoringMode,
    #[arg(long, default_value = "hare")]
    quota: Quota,
    /// STV seats; defaults to what the limit affords.
    #[arg(long)]
    k: Option<usize>,
    /// Print the trace (and the Monroe assignment) as a second JSON line.
    #[arg(long)]
    trace: bool,
    /// Also write the budget JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckAxiomArgs {
    #[arg(long)]
    axiom: Axiom,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    budget: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON; the default study when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "trial")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Leave elapsed_ms empty so the CSV is byte-stable.
    #[arg(long)]
    no_timing: bool,
    /// Replay this trial instead of running the study.
    #[arg(long, requires_all = ["case", "rule"])]
    trial: Option<u64>,
    #[arg(long)]
    case: Option<Case>,
    #[arg(long)]
    rule: Option<Rule>,
}

#[derive(Args)]
struct PlotDataArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn malformed(message: String) -> Self {
        Failure {
            code: 1,
            kind: "malformed-input",
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let (code, kind) = match err.root() {
            Error::Validation(_) => (1, "validation"),
            Error::Io { .. } => (1, "io"),
            Error::Csv { .. } => (1, "csv"),
            Error::Config(_) => (2, "config"),
            Error::Unsupported(_) => (2, "unsupported"),
            Error::Contract(_) => (2, "contract"),
            Error::Refused(_) => (2, "refused"),
            Error::Trial { .. } => unreachable!("root strips trial wrappers"),
        };
        Failure {
            code,
            kind,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::from(Error::Io {
        path: path.to_owned(),
        source: e,
    }))?;
    serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("library types serialize")
}

fn gen(args: GenArgs) -> CmdResult {
    let mut config: CultureConfig = read_json(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let instance = culture::generate(&config, args.trial)?;
    write_atomic(&args.out, to_json(&instance).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn run_rule_cmd(args: RunRuleArgs) -> CmdResult {
    let instance: Instance = read_json(&args.instance)?;
    let options = RuleOptions {
        scoring: args.scoring,
        quota: args.quota,
        committee_size: args.k,
    };
    let outcome = run_rule(args.rule, &instance, &options)?;
    let budget = to_json(&outcome.budget);
    if let Some(out) = &args.out {
        write_atomic(out, budget.as_bytes())?;
    }
    println!("{budget}");
    if args.trace {
        #[derive(Serialize)]
        struct TraceLine<'a> {
            trace: &'a approval_pb::rules::RuleTrace,
            #[serde(skip_serializing_if = "Option::is_none")]
            assignment: Option<&'a approval_pb::Assignment>,
        }
        println!(
            "{}",
            to_json(&TraceLine {
                trace: &outcome.trace,
                assignment: outcome.assignment.as_ref(),
            })
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn check_axiom(args: CheckAxiomArgs) -> CmdResult {
    let instance: Instance = read_json(&args.instance)?;
    let budget: Budget = read_json(&args.budget)?;
    budget.verify_against(&instance)?;
    let report = axioms::check(args.axiom, &instance, &budget);
    println!("{}", to_json(&report));
    Ok(if report.satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn experiment(args: ExperimentArgs) -> CmdResult {
    let mut config = match &args.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig::default_study(),
    };
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if args.no_timing {
        config.record_elapsed = false;
    }

    if let (Some(trial), Some(case), Some(rule)) = (args.trial, args.case, args.rule) {
        let replay = replay_trial(&config, case, rule, trial)?;
        println!("{}", to_json(&replay));
        return Ok(ExitCode::SUCCESS);
    }

    let out_dir = args.out_dir.expect("clap requires out-dir without a replay");
    let result = run_experiment(&config)?;
    fs::create_dir_all(&out_dir).map_err(|e| Failure::from(Error::Io {
        path: out_dir.clone(),
        source: e,
    }))?;
    write_atomic(&out_dir.join("results.csv"), &results_csv(&result))?;
    emit_plot_data(&result, &out_dir)?;
    Ok(ExitCode::SUCCESS)
}

fn plot_data(args: PlotDataArgs) -> CmdResult {
    let bytes = fs::read(&args.results).map_err(|e| Failure::from(Error::Io {
        path: args.results.clone(),
        source: e,
    }))?;
    let result = parse_results_csv(&bytes)?;
    for path in emit_plot_data(&result, &args.out_dir)? {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            print!("{err}");
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let text = err.to_string();
            let message = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            report(&Failure {
                code: 2,
                kind: "usage",
                message: message.to_string(),
            });
            return ExitCode::from(2);
        }
    };

    let outcome = match cli.command {
        Command::Gen(args) => gen(args),
        Command::RunRule(args) => run_rule_cmd(args),
        Command::CheckAxiom(args) => check_axiom(args),
        Command::Experiment(args) => experiment(args),
        Command::PlotData(args) => plot_data(args),
    };
    outcome.unwrap_or_else(|failure| {
        report(&failure);
        ExitCode::from(failure.code)
    })
}

fn report(failure: &Failure) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": failure.kind, "message": failure.message })
    );
}
