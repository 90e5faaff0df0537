//! The four-occupant office used as the flagship example.
//!
//! The network structure follows the observed office: four calendars, a
//! visitor, the professor's activity, the group troubled by an open door,
//! a deliberation node reacting to confinement and weather, and the Door and
//! Window actions with their previous-slot parents. The calendars are the
//! recorded ones for 7h-20h. Every CPT entry is illustrative: the values are
//! generated from the simple rules below, rounded to thousandths.

use std::collections::BTreeMap;

use crate::bayes::Assignment;
use crate::cosim::{ActionMapping, PresenceRule};
use crate::dbn::TemporalLink;
use crate::physics::{Co2Thresholds, DEFAULT_GENERATION_PER_PERSON, STANDARD_GRAVITY};

use super::{
    CptRowDoc, MappingDoc, Metadata, NetworkDoc, NodeDoc, OpeningDoc, OpeningKind, PhysicsDoc, RunDoc,
    ScenarioDoc, TemporalDoc, WeatherDoc, SCENARIO_FORMAT_VERSION,
};

pub const START_HOUR: u32 = 7;
pub const END_HOUR: u32 = 20;

/// Hours with rain in the rainy variant.
pub const RAIN_HOURS: [u32; 3] = [12, 13, 14];

const BUSY: &str = "busy";
const FREE: &str = "free";

/// Recorded calendars, one label per hour from 7h to 20h.
pub fn calendars() -> BTreeMap<String, Vec<String>> {
    let (b, f) = (BUSY, FREE);
    let table: [(&str, [&str; 14]); 4] = [
        ("PrCalendar", [f, f, b, b, f, f, f, b, b, b, f, f, f, f]),
        ("PCalendar", [f, b, b, b, b, f, f, b, b, b, f, f, b, b]),
        ("ICalendar", [f, f, b, b, b, f, f, b, b, b, f, b, b, f]),
        ("GCalendar", [f, f, b, b, b, f, f, b, b, b, b, f, f, f]),
    ];
    table
        .into_iter()
        .map(|(name, row)| (name.to_string(), row.iter().map(|s| s.to_string()).collect()))
        .collect()
}

const DOOR_STATES: [&str; 5] = ["always_closed", "mostly_closed", "mostly_opened", "always_opened", "move"];
const WINDOW_STATES: [&str; 4] = ["always_closed", "mostly_closed", "mostly_opened", "always_opened"];
const PROF_STATES: [&str; 4] = ["out", "alone", "meeting", "virtual"];

struct Shape {
    name: &'static str,
    states: &'static [&'static str],
    parents: &'static [&'static str],
}

fn shape(name: &'static str, states: &'static [&'static str], parents: &'static [&'static str]) -> Shape {
    Shape { name, states, parents }
}

fn node_shapes() -> Vec<Shape> {
    let cal: &'static [&'static str] = &[BUSY, FREE];
    let tf: &'static [&'static str] = &["false", "true"];
    vec![
        shape("PrCalendar", cal, &[]),
        shape("PCalendar", cal, &[]),
        shape("ICalendar", cal, &[]),
        shape("GCalendar", cal, &[]),
        shape("Rain", tf, &[]),
        shape("TempClass", &["cold", "mild", "hot"], &[]),
        shape("CO2Level", &["low", "medium", "high"], &[]),
        shape("Door_prev", &DOOR_STATES, &[]),
        shape("Window_prev", &WINDOW_STATES, &[]),
        shape("CorridorNoise", &["quiet", "noisy"], &[]),
        shape("VisitorPresent", tf, &["PrCalendar"]),
        shape("ProfActivity", &PROF_STATES, &["PrCalendar", "VisitorPresent"]),
        shape("TroubledByDoor", tf, &["GCalendar", "ICalendar", "CorridorNoise", "ProfActivity"]),
        shape("Deliberation", &["keep_closed", "ventilate"], &["CO2Level", "TempClass", "TroubledByDoor"]),
        shape(
            "Door",
            &DOOR_STATES,
            &["Door_prev", "ProfActivity", "VisitorPresent", "TroubledByDoor", "Deliberation", "PCalendar"],
        ),
        shape("Window", &WINDOW_STATES, &["Window_prev", "Rain", "Deliberation", "TempClass"]),
    ]
}

// Illustrative conditional distribution of `node` given its parents' labels.
fn weights(node: &str, given: &[&str]) -> Vec<f64> {
    match node {
        "PrCalendar" | "PCalendar" | "ICalendar" | "GCalendar" => vec![0.5, 0.5],
        "Rain" => vec![0.8, 0.2],
        "TempClass" => vec![0.3, 0.4, 0.3],
        "CO2Level" => vec![0.6, 0.3, 0.1],
        "Door_prev" => vec![1.0; 5],
        "Window_prev" => vec![1.0; 4],
        "CorridorNoise" => vec![0.7, 0.3],
        "VisitorPresent" => match given[0] {
            BUSY => vec![0.7, 0.3],
            _ => vec![0.95, 0.05],
        },
        "ProfActivity" => match (given[0], given[1]) {
            (BUSY, "false") => vec![0.25, 0.40, 0.05, 0.30],
            (BUSY, _) => vec![0.05, 0.05, 0.85, 0.05],
            (_, "false") => vec![0.55, 0.40, 0.0, 0.05],
            _ => vec![0.10, 0.10, 0.75, 0.05],
        },
        "TroubledByDoor" => {
            // noisy-OR over who is bothered by an open door
            let guest = if given[0] == BUSY { 0.8 } else { 0.0 };
            let intermittent = match (given[1], given[2]) {
                (BUSY, "noisy") => 0.7,
                (BUSY, _) => 0.1,
                _ => 0.0,
            };
            let prof = match given[3] {
                "meeting" | "virtual" => 0.85,
                "alone" => 0.5,
                _ => 0.0,
            };
            let untroubled = (1.0 - 0.05) * (1.0 - guest) * (1.0 - intermittent) * (1.0 - prof);
            vec![untroubled, 1.0 - untroubled]
        }
        "Deliberation" => {
            let co2 = match given[0] {
                "low" => 0.1,
                "medium" => 0.55,
                _ => 0.85,
            };
            let temp = match given[1] {
                "cold" => 0.6,
                "mild" => 1.0,
                _ => 1.1,
            };
            let troubled = if given[2] == "true" { 0.8 } else { 1.0 };
            let ventilate: f64 = co2 * temp * troubled;
            let ventilate = ventilate.clamp(0.02, 0.95);
            vec![1.0 - ventilate, ventilate]
        }
        "Door" => {
            let mut w = vec![1.0; 5];
            w[index_of(&DOOR_STATES, given[0])] += 2.0;
            if given[3] == "true" {
                scale(&mut w, &[(0, 2.5), (1, 2.5), (2, 0.5), (3, 0.5)]);
            }
            if given[4] == "ventilate" {
                scale(&mut w, &[(0, 0.5), (2, 2.5), (3, 2.5)]);
            }
            if given[2] == "true" {
                scale(&mut w, &[(4, 3.0)]);
            }
            if matches!(given[1], "meeting" | "virtual") {
                scale(&mut w, &[(0, 2.0), (4, 0.5)]);
            }
            scale(&mut w, &[(4, if given[5] == FREE { 2.5 } else { 0.7 })]);
            w
        }
        "Window" => {
            if given[1] == "true" {
                // everybody shuts the window when it rains
                return vec![1.0, 0.0, 0.0, 0.0];
            }
            let mut w = vec![2.0, 1.0, 1.0, 0.5];
            w[index_of(&WINDOW_STATES, given[0])] += 2.0;
            if given[2] == "ventilate" {
                scale(&mut w, &[(0, 0.5), (1, 3.0), (2, 3.0), (3, 3.0)]);
            }
            match given[3] {
                "hot" => scale(&mut w, &[(2, 1.5), (3, 1.5)]),
                "cold" => scale(&mut w, &[(1, 0.3), (2, 0.3), (3, 0.3)]),
                _ => {}
            }
            w
        }
        other => unreachable!("no rule for node {other}"),
    }
}

fn index_of(states: &[&str], label: &str) -> usize {
    states.iter().position(|s| *s == label).unwrap_or_else(|| unreachable!("{label}"))
}

fn scale(w: &mut [f64], factors: &[(usize, f64)]) {
    for &(i, f) in factors {
        w[i] *= f;
    }
}

/// Normalize and round to thousandths, keeping the integer total at 1000.
fn to_probabilities(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut milli: Vec<i64> = weights.iter().map(|w| (w / total * 1000.0).round() as i64).collect();
    let residual = 1000 - milli.iter().sum::<i64>();
    if residual != 0 {
        let largest = (0..milli.len()).max_by_key(|&i| (milli[i], std::cmp::Reverse(i))).unwrap_or(0);
        milli[largest] += residual;
    }
    milli.into_iter().map(|m| m as f64 / 1000.0).collect()
}

fn node_doc(shape: &Shape, all: &[Shape]) -> NodeDoc {
    let parent_states: Vec<&[&str]> = shape
        .parents
        .iter()
        .map(|p| all.iter().find(|s| s.name == *p).map(|s| s.states).unwrap_or_default())
        .collect();
    let rows: usize = parent_states.iter().map(|s| s.len()).product();
    let cpt = (0..rows)
        .map(|mut r| {
            let mut given = vec![""; parent_states.len()];
            for k in (0..parent_states.len()).rev() {
                given[k] = parent_states[k][r % parent_states[k].len()];
                r /= parent_states[k].len();
            }
            CptRowDoc {
                p: to_probabilities(&weights(shape.name, &given)),
                given: given.iter().map(|s| s.to_string()).collect(),
            }
        })
        .collect();
    NodeDoc {
        name: shape.name.to_string(),
        states: shape.states.iter().map(|s| s.to_string()).collect(),
        parents: shape.parents.iter().map(|s| s.to_string()).collect(),
        cpt,
    }
}

fn hours() -> impl Iterator<Item = u32> {
    START_HOUR..=END_HOUR
}

/// The office scenario on a hot day, with or without rain at [`RAIN_HOURS`].
pub fn office_document(rain: bool) -> ScenarioDoc {
    let shapes = node_shapes();
    let nodes = shapes.iter().map(|s| node_doc(s, &shapes)).collect();

    let is_rain = |h: u32| rain && RAIN_HOURS.contains(&h);
    let rain_labels = hours().map(|h| if is_rain(h) { "true" } else { "false" }.to_string()).collect();
    let temp_class = hours().map(|_| "hot".to_string()).collect();

    let indoor = vec![24.5, 25.0, 25.5, 26.0, 26.5, 27.0, 27.0, 27.5, 28.0, 28.0, 28.0, 27.5, 27.0, 26.5];
    let mut outdoor = vec![21.0, 23.0, 25.0, 27.0, 28.5, 29.5, 30.5, 31.0, 31.0, 30.5, 29.5, 28.0, 26.5, 25.0];
    let corridor = vec![24.0; 14];
    for (i, h) in hours().enumerate() {
        if is_rain(h) {
            outdoor[i] = 24.0;
        }
    }

    let initial_state: Assignment = [("Door_prev", "always_closed"), ("Window_prev", "always_closed")]
        .into_iter()
        .collect();

    let presence = |node: &str, labels: &[&str]| PresenceRule {
        node: node.to_string(),
        labels: labels.iter().map(|s| s.to_string()).collect(),
    };

    ScenarioDoc {
        format_version: SCENARIO_FORMAT_VERSION,
        metadata: Metadata {
            name: if rain { "office-rain" } else { "office-no-rain" }.to_string(),
            description: format!(
                "Four-occupant office with a visitor on a hot working day, 7h-20h{}.",
                if rain { ", raining from 12h to 14h" } else { ", no rain" }
            ),
            notes: vec![
                "Network structure is a reconstruction of the observed office; calendars are the recorded ones.".into(),
                "All CPT values are illustrative, generated by scenario::office and rounded to 0.001.".into(),
                "Geometry, temperatures and boundary concentrations are illustrative.".into(),
            ],
        },
        network: NetworkDoc { nodes },
        temporal: TemporalDoc {
            links: vec![
                TemporalLink { node: "Door".into(), prev: "Door_prev".into() },
                TemporalLink { node: "Window".into(), prev: "Window_prev".into() },
            ],
            initial_state,
        },
        calendars: calendars(),
        weather: WeatherDoc {
            evidence: BTreeMap::from([("Rain".to_string(), rain_labels), ("TempClass".to_string(), temp_class)]),
            indoor_temperature: indoor,
            boundary_temperature: BTreeMap::from([("corridor".to_string(), corridor), ("outdoor".to_string(), outdoor)]),
        },
        physics: PhysicsDoc {
            volume: 50.0,
            per_person_generation: DEFAULT_GENERATION_PER_PERSON,
            gravity: STANDARD_GRAVITY,
            co2_node: "CO2Level".into(),
            thresholds: Co2Thresholds::default(),
            boundary_concentration: BTreeMap::from([("corridor".to_string(), 500.0), ("outdoor".to_string(), 400.0)]),
            openings: vec![
                OpeningDoc {
                    name: "door".into(),
                    kind: OpeningKind::Door,
                    boundary: "corridor".into(),
                    height: 2.0,
                    width: 0.9,
                    discharge_coefficient: 0.6,
                    neutral_plane: None,
                },
                OpeningDoc {
                    name: "window".into(),
                    kind: OpeningKind::Window,
                    boundary: "outdoor".into(),
                    height: 1.2,
                    width: 0.8,
                    discharge_coefficient: 0.6,
                    neutral_plane: None,
                },
            ],
        },
        mapping: MappingDoc {
            door_node: "Door".into(),
            window_node: "Window".into(),
            ratios: ActionMapping::default_ratios(),
            occupancy: vec![
                presence("ProfActivity", &["alone", "meeting", "virtual"]),
                presence("PCalendar", &[BUSY]),
                presence("ICalendar", &[BUSY]),
                presence("GCalendar", &[BUSY]),
                presence("VisitorPresent", &["true"]),
            ],
        },
        run: RunDoc {
            start_hour: START_HOUR,
            end_hour: END_HOUR,
            slot_seconds: 3600.0,
            initial_co2: 450.0,
            tracked_nodes: None,
        },
    }
}
