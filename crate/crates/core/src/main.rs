use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use occusim::cli::{self, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "occusim", version, about = "Occupant behaviour / indoor CO2 co-simulation")]
struct Cli {
    /// Diagnostics and reports as text or JSON.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and summarise it.
    Validate { scenario: PathBuf },

    /// Run a Monte Carlo ensemble and write aggregate (and optionally per-run) files.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write one CSV trace per run.
        #[arg(long)]
        traces: bool,
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },

    /// Print the exact posterior of one node in a single slice.
    Query {
        scenario: PathBuf,
        node: String,
        /// Evidence as Node=label pairs.
        #[arg(value_parser = cli::parse_pair)]
        evidence: Vec<(String, String)>,
    },
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_output = args.format == Format::Json;
    match execute(args.command, json_output) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_output {
                let issues: Vec<_> = e.issues().iter().map(|i| json!({"path": i.path, "message": i.message})).collect();
                eprintln!(
                    "{}",
                    json!({"error": {"kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string(), "issues": issues}})
                );
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, json_output: bool) -> Result<(), CliError> {
    match command {
        Command::Validate { scenario } => {
            let r = cli::cmd_validate(&scenario)?;
            if json_output {
                println!("{}", json!({"valid": true, "report": r}));
            } else {
                println!(
                    "{}: ok ({} network nodes, {} slots, {} CPT rows)",
                    scenario.display(),
                    r.nodes,
                    r.slots,
                    r.cpt_rows
                );
            }
        }
        Command::Run { scenario, runs, seed, out, traces, verbose } => {
            let report = cli::cmd_run(&RunConfig {
                scenario,
                runs: runs as usize,
                seed,
                out,
                traces,
                verbosity: verbose,
            })?;
            if json_output {
                println!("{}", json!(report));
            } else {
                println!("{}", report.aggregate_json.display());
                println!("{}", report.aggregate_csv.display());
                for t in &report.traces {
                    println!("{}", t.display());
                }
            }
        }
        Command::Query { scenario, node, evidence } => {
            let d = cli::cmd_query(&scenario, &node, &evidence)?;
            if json_output {
                println!("{}", json!(d));
            } else {
                for (label, p) in d.labels.iter().zip(&d.probabilities) {
                    println!("{}={label}\t{p:.6}", d.node);
                }
            }
        }
    }
    Ok(())
}
