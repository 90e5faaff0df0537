//! Scenario files: parsing, validation with element paths, canonical
//! serialization, and the output writers for traces and aggregates.

mod format;
pub mod office;
mod output;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::bayes::{exact_marginal, Assignment, BayesError, Cpt, Distribution, Network, Node, ValueDomain};
use crate::cosim::{ActionMapping, OccupancyRule};
use crate::dbn::{DbnError, DbnTemplate};
use crate::physics::{Co2Level, OpeningGeometry, PhysicsError, ZoneParams};

pub use format::{
    CptRowDoc, Metadata, MappingDoc, NetworkDoc, NodeDoc, OpeningDoc, OpeningKind, PhysicsDoc, RunDoc,
    ScenarioDoc, TemporalDoc, WeatherDoc, SCENARIO_FORMAT_VERSION,
};
pub use output::{
    aggregate_csv_header, trace_csv_header, write_aggregate_csv, write_aggregate_json, write_trace,
    OutputError,
};

/// A validation failure located by a dotted path into the document,
/// e.g. `network.nodes[12].cpt[3].p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

impl ScenarioError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ScenarioError::Invalid(issues) => issues,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Opening {
    pub name: String,
    pub kind: OpeningKind,
    pub geometry: OpeningGeometry,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    doc: ScenarioDoc,
    template: DbnTemplate,
    zone: ZoneParams,
    openings: Vec<Opening>,
    mapping: ActionMapping,
    occupancy: OccupancyRule,
    evidence: Vec<(String, Vec<String>)>,
    tracked: Vec<String>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        validate(doc)
    }

    pub fn doc(&self) -> &ScenarioDoc {
        &self.doc
    }

    pub fn template(&self) -> &DbnTemplate {
        &self.template
    }

    pub fn network(&self) -> &Network {
        self.template.base()
    }

    pub fn zone(&self) -> &ZoneParams {
        &self.zone
    }

    pub fn openings(&self) -> &[Opening] {
        &self.openings
    }

    pub fn mapping(&self) -> &ActionMapping {
        &self.mapping
    }

    pub fn occupancy(&self) -> &OccupancyRule {
        &self.occupancy
    }

    pub fn co2_node(&self) -> &str {
        &self.doc.physics.co2_node
    }

    pub fn slot_count(&self) -> usize {
        (self.doc.run.end_hour - self.doc.run.start_hour + 1) as usize
    }

    pub fn hour(&self, slot: usize) -> u32 {
        self.doc.run.start_hour + slot as u32
    }

    pub fn slot_index(&self, hour: u32) -> Option<usize> {
        (self.doc.run.start_hour..=self.doc.run.end_hour)
            .contains(&hour)
            .then(|| (hour - self.doc.run.start_hour) as usize)
    }

    pub fn slot_seconds(&self) -> f64 {
        self.doc.run.slot_seconds
    }

    pub fn initial_co2(&self) -> f64 {
        self.doc.run.initial_co2
    }

    pub fn tracked_nodes(&self) -> &[String] {
        &self.tracked
    }

    /// Calendar and weather evidence for one slot.
    pub fn evidence_at(&self, slot: usize) -> Assignment {
        self.evidence
            .iter()
            .map(|(node, labels)| (node.clone(), labels[slot].clone()))
            .collect()
    }

    pub fn indoor_temperature(&self, slot: usize) -> f64 {
        self.doc.weather.indoor_temperature[slot]
    }

    pub fn boundary_temperature(&self, boundary: &str, slot: usize) -> f64 {
        self.doc.weather.boundary_temperature[boundary][slot]
    }

    /// Exact posterior of `node` in one slice. Previous-state parents take
    /// their initial values unless `evidence` names them.
    pub fn query(&self, node: &str, evidence: &Assignment) -> Result<Distribution, BayesError> {
        let mut full = self.template.initial_state().clone();
        full.extend_from(evidence);
        exact_marginal(self.network(), node, &full)
    }
}

/// Parse and validate a scenario from JSON text.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(doc)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

/// Canonical JSON text of a scenario. `load_scenario(&save_scenario(s))`
/// reproduces `s` exactly.
pub fn save_scenario(scenario: &Scenario) -> String {
    doc_to_json(&scenario.doc)
}

pub fn doc_to_json(doc: &ScenarioDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).unwrap_or_else(|e| unreachable!("scenario serializes: {e}"));
    text.push('\n');
    text
}

#[derive(Default)]
struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl fmt::Display) {
        self.0.push(Issue {
            path: path.into(),
            message: message.to_string(),
        });
    }
}

fn validate(mut doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    let mut issues = Issues::default();
    if doc.format_version != SCENARIO_FORMAT_VERSION {
        issues.push(
            "format_version",
            format!("unsupported version {}, expected {SCENARIO_FORMAT_VERSION}", doc.format_version),
        );
    }

    let network = build_network_doc(&mut doc.network, &mut issues);
    let template = network.and_then(|net| {
        DbnTemplate::new(net, doc.temporal.links.clone(), doc.temporal.initial_state.clone())
            .map_err(|e| issues.push(dbn_path(&e, &doc.temporal), e))
            .ok()
    });

    let run = &doc.run;
    if run.end_hour < run.start_hour {
        issues.push("run.end_hour", format!("end hour {} precedes start hour {}", run.end_hour, run.start_hour));
    }
    if !(run.slot_seconds > 0.0 && run.slot_seconds.is_finite()) {
        issues.push("run.slot_seconds", "slot duration must be positive");
    }
    if !(run.initial_co2 >= 0.0 && run.initial_co2.is_finite()) {
        issues.push("run.initial_co2", "initial concentration must be >= 0");
    }
    let slots = (run.end_hour.saturating_sub(run.start_hour) + 1) as usize;

    let zone = ZoneParams {
        volume: doc.physics.volume,
        per_person_generation: doc.physics.per_person_generation,
        gravity: doc.physics.gravity,
        thresholds: doc.physics.thresholds,
        boundary_concentrations: doc.physics.boundary_concentration.clone(),
    };
    if let Err(e) = zone.validate() {
        let path = match e {
            PhysicsError::NonPositiveVolume(_) => "physics.volume",
            _ => "physics",
        };
        issues.push(path, e);
    }

    let mut openings = Vec::new();
    for (i, o) in doc.physics.openings.iter().enumerate() {
        let path = format!("physics.openings[{i}]");
        match OpeningGeometry::new(o.height, o.width, o.discharge_coefficient, o.neutral_plane, o.boundary.clone()) {
            Ok(geometry) => openings.push(Opening {
                name: o.name.clone(),
                kind: o.kind,
                geometry,
            }),
            Err(e) => issues.push(path.clone(), e),
        }
        if !doc.physics.boundary_concentration.contains_key(&o.boundary) {
            issues.push(
                format!("{path}.boundary"),
                format!("no entry for `{}` in physics.boundary_concentration", o.boundary),
            );
        }
        match doc.weather.boundary_temperature.get(&o.boundary) {
            None => issues.push(
                format!("{path}.boundary"),
                format!("no entry for `{}` in weather.boundary_temperature", o.boundary),
            ),
            Some(series) => check_temperatures(&format!("weather.boundary_temperature.{}", o.boundary), series, slots, &mut issues),
        }
    }
    check_temperatures("weather.indoor_temperature", &doc.weather.indoor_temperature, slots, &mut issues);

    let mut evidence = Vec::new();
    if let Some(template) = &template {
        let net = template.base();

        let co2 = &doc.physics.co2_node;
        match net.node(co2) {
            None => issues.push("physics.co2_node", format!("unknown node `{co2}`")),
            Some(node) => {
                if let Some(missing) = Co2Level::LABELS.iter().find(|l| node.domain.index_of(l).is_none()) {
                    issues.push("physics.co2_node", format!("domain of `{co2}` lacks label `{missing}`"));
                }
            }
        }

        let mut seen = HashSet::new();
        for (section, series) in [("calendars", &doc.calendars), ("weather.evidence", &doc.weather.evidence)] {
            for (name, labels) in series {
                let path = format!("{section}.{name}");
                let Some(node) = net.node(name) else {
                    issues.push(path, format!("unknown node `{name}`"));
                    continue;
                };
                if !seen.insert(name.clone()) {
                    issues.push(path.clone(), "node already receives evidence from another section");
                }
                if template.is_previous_state(name) || name == co2 {
                    issues.push(path.clone(), "node is driven by the simulation and cannot take scheduled evidence");
                }
                if labels.len() != slots {
                    issues.push(path.clone(), format!("expected {slots} slot entries, found {}", labels.len()));
                }
                for (k, label) in labels.iter().enumerate() {
                    if node.domain.index_of(label).is_none() {
                        issues.push(format!("{path}[{k}]"), format!("`{label}` is not a state of `{name}`"));
                    }
                }
                evidence.push((name.clone(), labels.clone()));
            }
        }

        let m = &doc.mapping;
        for (path, name) in [("mapping.door_node", &m.door_node), ("mapping.window_node", &m.window_node)] {
            match net.node(name) {
                None => issues.push(path, format!("unknown node `{name}`")),
                Some(node) => {
                    for label in node.domain.labels() {
                        if !m.ratios.contains_key(label) {
                            issues.push(format!("mapping.ratios.{label}"), format!("state `{label}` of `{name}` has no ratio"));
                        }
                    }
                }
            }
        }
        for (i, rule) in m.occupancy.iter().enumerate() {
            let path = format!("mapping.occupancy[{i}]");
            match net.node(&rule.node) {
                None => issues.push(path, format!("unknown node `{}`", rule.node)),
                Some(node) => {
                    for label in rule.labels.iter().filter(|l| node.domain.index_of(l).is_none()) {
                        issues.push(path.clone(), format!("`{label}` is not a state of `{}`", rule.node));
                    }
                }
            }
        }
        if let Some(tracked) = &doc.run.tracked_nodes {
            for (k, name) in tracked.iter().enumerate() {
                if net.node(name).is_none() {
                    issues.push(format!("run.tracked_nodes[{k}]"), format!("unknown node `{name}`"));
                }
            }
        }
    }
    for (label, ratio) in &doc.mapping.ratios {
        if !(0.0..=1.0).contains(ratio) {
            issues.push(format!("mapping.ratios.{label}"), format!("ratio {ratio} is outside [0, 1]"));
        }
    }

    let template = match template {
        Some(t) if issues.0.is_empty() => t,
        _ => return Err(ScenarioError::Invalid(issues.0)),
    };

    let tracked = doc.run.tracked_nodes.clone().unwrap_or_else(|| {
        template
            .base()
            .nodes()
            .iter()
            .filter(|n| !template.is_previous_state(&n.name))
            .map(|n| n.name.clone())
            .collect()
    });
    let mapping = ActionMapping {
        door_node: doc.mapping.door_node.clone(),
        window_node: doc.mapping.window_node.clone(),
        ratios: doc.mapping.ratios.clone(),
    };
    let occupancy = OccupancyRule {
        entries: doc.mapping.occupancy.clone(),
    };
    Ok(Scenario {
        doc,
        template,
        zone,
        openings,
        mapping,
        occupancy,
        evidence,
        tracked,
    })
}

fn check_temperatures(path: &str, series: &[f64], slots: usize, issues: &mut Issues) {
    if series.len() != slots {
        issues.push(path, format!("expected {slots} slot entries, found {}", series.len()));
    }
    if let Some(k) = series.iter().position(|t| !(t.is_finite() && *t > -273.15)) {
        issues.push(format!("{path}[{k}]"), "temperature is not physical");
    }
}

fn dbn_path(err: &DbnError, temporal: &TemporalDoc) -> String {
    let name = match err {
        DbnError::UnknownNode(n) | DbnError::MissingPrevious(n) => Some(n.as_str()),
        DbnError::InvalidPrevious { prev, .. } => Some(prev.as_str()),
        DbnError::DomainMismatch { prev, .. } => Some(prev.as_str()),
        DbnError::Bayes(BayesError::UnknownLabel { node, .. }) => {
            return format!("temporal.initial_state.{node}");
        }
        _ => None,
    };
    name.and_then(|n| temporal.links.iter().position(|l| l.node == n || l.prev == n))
        .map_or_else(|| "temporal".to_string(), |i| format!("temporal.links[{i}]"))
}

/// Check the node list, put CPT rows into canonical order, and build the network.
fn build_network_doc(doc: &mut NetworkDoc, issues: &mut Issues) -> Option<Network> {
    let before = issues.0.len();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in doc.nodes.iter().enumerate() {
        if index.insert(node.name.as_str(), i).is_some() {
            issues.push(format!("network.nodes[{i}].name"), format!("node `{}` is declared twice", node.name));
        }
        if node.states.len() < 2 {
            issues.push(format!("network.nodes[{i}].states"), "a node needs at least 2 states");
        }
        let distinct: HashSet<&String> = node.states.iter().collect();
        if distinct.len() != node.states.len() {
            issues.push(format!("network.nodes[{i}].states"), "states must be distinct");
        }
        for (k, parent) in node.parents.iter().enumerate() {
            if !doc.nodes.iter().any(|n| &n.name == parent) {
                issues.push(format!("network.nodes[{i}].parents[{k}]"), format!("unknown parent `{parent}`"));
            }
        }
    }
    if issues.0.len() > before {
        return None;
    }

    let domains: HashMap<String, Vec<String>> = doc.nodes.iter().map(|n| (n.name.clone(), n.states.clone())).collect();
    let as_written: Vec<Vec<CptRowDoc>> = doc.nodes.iter().map(|n| n.cpt.clone()).collect();
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, node) in doc.nodes.iter_mut().enumerate() {
        let parent_domains: Vec<&Vec<String>> = node.parents.iter().map(|p| &domains[p]).collect();
        let rows_expected: usize = parent_domains.iter().map(|d| d.len()).product();
        let mut slots: Vec<Option<CptRowDoc>> = vec![None; rows_expected];
        let mut row_ok = true;
        for (j, row) in node.cpt.iter().enumerate() {
            let path = format!("network.nodes[{i}].cpt[{j}]");
            if row.given.len() != node.parents.len() {
                issues.push(
                    format!("{path}.given"),
                    format!("expected {} parent labels, found {}", node.parents.len(), row.given.len()),
                );
                row_ok = false;
                continue;
            }
            let mut flat = 0;
            let mut valid = true;
            for (k, label) in row.given.iter().enumerate() {
                match parent_domains[k].iter().position(|l| l == label) {
                    Some(s) => flat = flat * parent_domains[k].len() + s,
                    None => {
                        issues.push(
                            format!("{path}.given[{k}]"),
                            format!("`{label}` is not a state of parent `{}`", node.parents[k]),
                        );
                        valid = false;
                    }
                }
            }
            if !valid {
                row_ok = false;
                continue;
            }
            if row.p.len() != node.states.len() {
                issues.push(
                    format!("{path}.p"),
                    format!("expected {} probabilities, found {}", node.states.len(), row.p.len()),
                );
                row_ok = false;
            }
            if slots[flat].is_some() {
                issues.push(format!("{path}.given"), format!("duplicate row for {:?}", row.given));
                row_ok = false;
            }
            slots[flat] = Some(row.clone());
        }
        if let Some(missing) = slots.iter().position(Option::is_none) {
            if row_ok {
                issues.push(
                    format!("network.nodes[{i}].cpt"),
                    format!("missing row for parent labels {:?}", decode_row(&parent_domains, missing)),
                );
            }
            row_ok = false;
        }
        if !row_ok {
            continue;
        }
        node.cpt = slots.into_iter().flatten().collect();
        nodes.push(Node::new(
            node.name.clone(),
            ValueDomain::new(node.states.clone()),
            node.parents.clone(),
            Cpt::new(node.cpt.iter().map(|r| r.p.clone()).collect()),
        ));
    }
    if issues.0.len() > before {
        return None;
    }

    match Network::build(nodes) {
        Ok(net) => Some(net),
        Err(e) => {
            let path = bayes_path(&e, doc, &as_written);
            issues.push(path, e);
            None
        }
    }
}

fn decode_row(domains: &[&Vec<String>], mut flat: usize) -> Vec<String> {
    let mut labels = vec![String::new(); domains.len()];
    for k in (0..domains.len()).rev() {
        labels[k] = domains[k][flat % domains[k].len()].clone();
        flat /= domains[k].len();
    }
    labels
}

fn bayes_path(err: &BayesError, doc: &NetworkDoc, as_written: &[Vec<CptRowDoc>]) -> String {
    let at = |name: &str| doc.nodes.iter().position(|n| n.name == name);
    match err {
        BayesError::Normalization { node, row, .. } | BayesError::InvalidProbability { node, row, .. } => {
            let i = at(node).unwrap_or_default();
            let j = as_written[i]
                .iter()
                .position(|r| format!("[{}]", r.given.join(", ")) == *row)
                .unwrap_or_default();
            format!("network.nodes[{i}].cpt[{j}].p")
        }
        BayesError::CptShape { node, .. }
        | BayesError::InvalidDomain { node, .. }
        | BayesError::UnknownParent { node, .. }
        | BayesError::InvalidParent { node, .. } => {
            format!("network.nodes[{}]", at(node).unwrap_or_default())
        }
        _ => "network.nodes".to_string(),
    }
}

/// Node/label pair list, e.g. from the command line, as an assignment
/// against a scenario's network. Used by queries.
pub fn parse_evidence(scenario: &Scenario, pairs: &[(String, String)]) -> Result<Assignment, BayesError> {
    let net = scenario.network();
    let mut out = Assignment::new();
    for (node, label) in pairs {
        let n = net.node(node).ok_or_else(|| BayesError::UnknownNode(node.clone()))?;
        if n.domain.index_of(label).is_none() {
            return Err(BayesError::UnknownLabel {
                node: node.clone(),
                label: label.clone(),
            });
        }
        out.insert(node.clone(), label.clone());
    }
    Ok(out)
}
