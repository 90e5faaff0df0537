//! Command implementations behind the `occusim` binary.
//!
//! Exit codes: 0 success, 1 invalid scenario or model failure, 2 I/O
//! failure, 3 usage error.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::bayes::{BayesError, Distribution};
use crate::cosim::{run_ensemble, Aggregate};
use crate::scenario::{
    load_scenario_file, parse_evidence, write_aggregate_csv, write_aggregate_json, write_trace, Issue,
    OutputError, Scenario, ScenarioError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{message}")]
    Invalid { message: String, issues: Vec<Issue> },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => 1,
            CliError::Io(_) => 2,
            CliError::Usage(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Invalid { .. } => "validation",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            CliError::Invalid { issues, .. } => issues,
            _ => &[],
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Invalid {
                issues: other.issues().to_vec(),
                message: other.to_string(),
            },
        }
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        CliError::Io(format!("cannot write output: {e}"))
    }
}

fn write_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub name: String,
    pub nodes: usize,
    pub slots: usize,
    pub cpt_rows: usize,
}

pub fn cmd_validate(path: &Path) -> Result<ValidateReport, CliError> {
    let scenario = load_scenario_file(path)?;
    Ok(ValidateReport {
        name: scenario.doc().metadata.name.clone(),
        nodes: scenario.network().len(),
        slots: scenario.slot_count(),
        cpt_rows: scenario.network().cpt_row_count(),
    })
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub traces: bool,
    pub verbosity: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub aggregate_json: PathBuf,
    pub aggregate_csv: PathBuf,
    pub traces: Vec<PathBuf>,
}

pub fn cmd_run(config: &RunConfig) -> Result<RunReport, CliError> {
    if config.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let scenario = load_scenario_file(&config.scenario)?;
    if config.verbosity > 0 {
        eprintln!(
            "running {} co-simulations of {} slots (seed {})",
            config.runs,
            scenario.slot_count(),
            config.seed
        );
    }
    let traces = run_ensemble(&scenario, config.runs, config.seed).map_err(|e| CliError::Invalid {
        message: format!("simulation failed: {e}"),
        issues: Vec::new(),
    })?;
    let aggregate = Aggregate::from_traces(&scenario, config.seed, &traces);

    fs::create_dir_all(&config.out).map_err(|e| write_error(&config.out, e))?;
    let report = RunReport {
        aggregate_json: config.out.join("aggregate.json"),
        aggregate_csv: config.out.join("aggregate.csv"),
        traces: if config.traces {
            (0..traces.len())
                .map(|i| config.out.join("traces").join(format!("run_{i:04}.csv")))
                .collect()
        } else {
            Vec::new()
        },
    };

    let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| write_error(p, e));
    write_aggregate_json(&aggregate, create(&report.aggregate_json)?)?;
    write_aggregate_csv(&aggregate, create(&report.aggregate_csv)?)?;
    if config.traces {
        let dir = config.out.join("traces");
        fs::create_dir_all(&dir).map_err(|e| write_error(&dir, e))?;
        for (trace, path) in traces.iter().zip(&report.traces) {
            write_trace(trace, create(path)?)?;
        }
    }
    Ok(report)
}

/// See [`Scenario::query`].
pub fn cmd_query(path: &Path, node: &str, evidence: &[(String, String)]) -> Result<Distribution, CliError> {
    let scenario = load_scenario_file(path)?;
    let net = scenario.network();
    if net.node(node).is_none() {
        return Err(CliError::Usage(unknown_node(&scenario, node)));
    }
    let given = parse_evidence(&scenario, evidence).map_err(|e| CliError::Usage(explain(&scenario, &e)))?;
    scenario.query(node, &given).map_err(|e| match e {
        BayesError::ZeroEvidence => CliError::Invalid {
            message: format!("evidence {given} is impossible given the initial state"),
            issues: Vec::new(),
        },
        other => CliError::Usage(explain(&scenario, &other)),
    })
}

fn explain(scenario: &Scenario, e: &BayesError) -> String {
    match e {
        BayesError::UnknownNode(n) => unknown_node(scenario, n),
        BayesError::UnknownLabel { node, label } => {
            let states = scenario
                .network()
                .node(node)
                .map(|n| n.domain.labels().join(", "))
                .unwrap_or_default();
            format!("`{label}` is not a state of `{node}`; expected one of: {states}")
        }
        other => other.to_string(),
    }
}

fn unknown_node(scenario: &Scenario, name: &str) -> String {
    let best = scenario
        .network()
        .nodes()
        .iter()
        .map(|n| (strsim::jaro_winkler(&n.name.to_lowercase(), &name.to_lowercase()), &n.name))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((score, candidate)) if score > 0.7 => format!("unknown node `{name}`; did you mean `{candidate}`?"),
        _ => format!("unknown node `{name}`"),
    }
}

/// Split a `Node=label` command-line pair.
pub fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected Node=label, got `{s}`")),
    }
}
