//! Serde mirror of the scenario JSON document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bayes::Assignment;
use crate::cosim::PresenceRule;
use crate::dbn::TemporalLink;
use crate::physics::{Co2Thresholds, DEFAULT_GENERATION_PER_PERSON, STANDARD_GRAVITY};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub format_version: u32,
    #[serde(default)]
    pub metadata: Metadata,
    pub network: NetworkDoc,
    #[serde(default)]
    pub temporal: TemporalDoc,
    /// Per-slot labels for calendar nodes, keyed by node name.
    #[serde(default)]
    pub calendars: BTreeMap<String, Vec<String>>,
    pub weather: WeatherDoc,
    pub physics: PhysicsDoc,
    pub mapping: MappingDoc,
    pub run: RunDoc,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Metadata {
    pub name: String,
    pub description: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub nodes: Vec<NodeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub name: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<CptRowDoc>,
}

/// One CPT row: the parent labels it conditions on, in parent order, and
/// the probability of each of the node's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptRowDoc {
    #[serde(default)]
    pub given: Vec<String>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemporalDoc {
    pub links: Vec<TemporalLink>,
    pub initial_state: Assignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherDoc {
    /// Per-slot labels for weather nodes, keyed by node name.
    #[serde(default)]
    pub evidence: BTreeMap<String, Vec<String>>,
    /// Zone air temperature per slot, degrees Celsius.
    pub indoor_temperature: Vec<f64>,
    /// Temperature per slot of each boundary space, degrees Celsius.
    pub boundary_temperature: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpeningKind {
    Door,
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningDoc {
    pub name: String,
    pub kind: OpeningKind,
    pub boundary: String,
    pub height: f64,
    pub width: f64,
    pub discharge_coefficient: f64,
    /// Defaults to mid-height when null.
    #[serde(default)]
    pub neutral_plane: Option<f64>,
}

fn default_generation() -> f64 {
    DEFAULT_GENERATION_PER_PERSON
}

fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsDoc {
    pub volume: f64,
    #[serde(default = "default_generation")]
    pub per_person_generation: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Network node that receives the discretized CO2 level as evidence.
    pub co2_node: String,
    #[serde(default)]
    pub thresholds: Co2Thresholds,
    pub boundary_concentration: BTreeMap<String, f64>,
    pub openings: Vec<OpeningDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDoc {
    pub door_node: String,
    pub window_node: String,
    pub ratios: BTreeMap<String, f64>,
    #[serde(default)]
    pub occupancy: Vec<PresenceRule>,
}

fn default_slot_seconds() -> f64 {
    3600.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDoc {
    pub start_hour: u32,
    /// Inclusive.
    pub end_hour: u32,
    #[serde(default = "default_slot_seconds")]
    pub slot_seconds: f64,
    pub initial_co2: f64,
    /// Nodes histogrammed in aggregates; null means every node except the
    /// previous-state parents.
    #[serde(default)]
    pub tracked_nodes: Option<Vec<String>>,
}
