//! Command-line front end: load an automaton and a scenario script, run
//! the receding-horizon controller under a named selection profile, and
//! emit the trace document plus optional comparison and DOT exports.
//!
//! Exit codes are part of the contract: 0 when the run satisfied its
//! desired states, 2 when the controller was stranded (UNSAT), and 1 for
//! any input problem — unreadable files, malformed documents, unknown
//! profiles, illegal weights, or a failed self-check.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use pta_mpc::{
    automaton_hash, compare_profiles, export_dot, load_automaton, load_scenario, render_trace,
    run_battery, run_scenario, write_trace, PolicyRegistry, RiskProfile, RunVerdict,
};

const INPUT_ERROR: u8 = 1;
const UNSAT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "pta-mpc",
    version,
    about = "Risk-averse receding-horizon control over priced automata with redundant bypass paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under a selection profile and emit the run trace.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Automaton document (JSON).
    automaton: PathBuf,
    /// Scenario script (JSON): named, time-ordered signal events.
    scenario: PathBuf,
    /// Selection profile name; unknown names list the built-in profiles.
    profile: String,
    /// Nonnegative weight on the risk sum in the path objective.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Write the trace document to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Export the automaton, failures, and realized path as DOT.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Also run the cost-only and redundancy-first profiles and append a
    /// one-line JSON comparison report to stdout.
    #[arg(long)]
    compare: bool,
    /// Before running, replay this automaton through the exhaustive
    /// reference implementations and fail on any divergence.
    #[arg(long)]
    seed_check: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs; anything else is an
            // input problem and must not collide with the UNSAT exit code.
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(INPUT_ERROR),
            };
        }
    };
    match cli.command {
        Command::Run(args) => match try_run(&args) {
            Ok(code) => code,
            Err(message) => {
                eprintln!("error: {message}");
                ExitCode::from(INPUT_ERROR)
            }
        },
    }
}

fn try_run(args: &RunArgs) -> Result<ExitCode, String> {
    let total = load_automaton(&args.automaton).map_err(|e| e.to_string())?;
    let script = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    script.validate(&total).map_err(|e| e.to_string())?;

    let registry = PolicyRegistry::builtin();
    let policy = registry.get(&args.profile).ok_or_else(|| {
        format!(
            "unknown profile {:?}; built-in profiles: {}",
            args.profile,
            registry.names().join(", ")
        )
    })?;
    let profile = RiskProfile::new(policy.mode(), args.lambda).map_err(|e| e.to_string())?;

    if args.seed_check {
        let report = run_battery(&total, args.lambda).map_err(|e| e.to_string())?;
        eprintln!(
            "seed-check: {} update cases, {} plan cases agree ({} oversized plans skipped)",
            report.update_cases, report.plan_cases, report.skipped_plans
        );
        for divergence in &report.divergences {
            eprintln!("seed-check: {divergence}");
        }
        if !report.is_clean() {
            return Err(format!(
                "seed-check found {} divergence(s)",
                report.divergences.len()
            ));
        }
    }

    let trace = run_scenario(&total, &script, &profile).map_err(|e| e.to_string())?;
    let hash = automaton_hash(&total);
    match &args.trace {
        Some(path) => write_trace(path, &hash, &script.name, &trace).map_err(|e| e.to_string())?,
        None => print!("{}", render_trace(&hash, &script.name, &trace)),
    }
    if let Some(path) = &args.dot {
        std::fs::write(path, export_dot(&total, Some(&trace)))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    if args.compare {
        let report = compare_profiles(&total, &script, args.lambda).map_err(|e| e.to_string())?;
        let line = serde_json::to_string(&report).expect("comparison reports serialize");
        println!("{line}");
    }

    Ok(match trace.final_verdict {
        RunVerdict::Sat => ExitCode::SUCCESS,
        RunVerdict::Unsat => ExitCode::from(UNSAT),
        RunVerdict::Running => unreachable!("completed runs carry a terminal verdict"),
    })
}
