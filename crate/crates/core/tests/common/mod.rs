//! Random networks, evidence and scenarios shared by the integration tests
//! and the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use occusim::bayes::{Assignment, Cpt, Network, Node, ValueDomain};
use occusim::cosim::{ActionMapping, PresenceRule};
use occusim::dbn::TemporalLink;
use occusim::physics::Co2Thresholds;
use occusim::scenario::{
    CptRowDoc, MappingDoc, Metadata, NetworkDoc, NodeDoc, OpeningDoc, OpeningKind, PhysicsDoc, RunDoc,
    ScenarioDoc, TemporalDoc, WeatherDoc, SCENARIO_FORMAT_VERSION,
};

pub const DOOR_STATES: [&str; 5] = ["always_closed", "mostly_closed", "mostly_opened", "always_opened", "move"];
pub const WINDOW_STATES: [&str; 4] = ["always_closed", "mostly_closed", "mostly_opened", "always_opened"];
pub const CO2_STATES: [&str; 3] = ["low", "medium", "high"];

/// Random probability vector. With probability `zero_chance` each entry is
/// zeroed, keeping at least one positive entry.
pub fn random_row<R: Rng>(rng: &mut R, len: usize, zero_chance: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    for x in w.iter_mut() {
        if rng.gen_bool(zero_chance) {
            *x = 0.0;
        }
    }
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..len)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Random DAG over `n` nodes with 2..=`max_card` labels each and at most
/// `max_parents` parents per node. Declaration order is shuffled so the
/// network has to sort it.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, max_card: usize, max_parents: usize, zero_chance: f64) -> Network {
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card)).collect();
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(rng);
        let k = rng.gen_range(0..=max_parents.min(i));
        let parents: Vec<usize> = candidates.into_iter().take(k).collect();
        let rows: usize = parents.iter().map(|&p| cards[p]).product();
        let table = (0..rows).map(|_| random_row(rng, cards[i], zero_chance)).collect();
        nodes.push(Node::new(
            format!("X{i}"),
            ValueDomain::new((0..cards[i]).map(|s| format!("s{s}"))),
            parents.iter().map(|p| format!("X{p}")),
            Cpt::new(table),
        ));
    }
    nodes.shuffle(rng);
    Network::build(nodes).expect("generated network is valid")
}

/// Evidence on `k` distinct random nodes, excluding `skip`.
pub fn random_evidence<R: Rng>(rng: &mut R, net: &Network, k: usize, skip: &str) -> Assignment {
    let mut names: Vec<&Node> = net.nodes().iter().filter(|n| n.name != skip).collect();
    names.shuffle(rng);
    names
        .into_iter()
        .take(k)
        .map(|n| (n.name.clone(), n.domain.label(rng.gen_range(0..n.domain.len())).to_string()))
        .collect()
}

/// Enumerate parent-label combinations, last parent fastest.
pub fn combinations(domains: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for domain in domains {
        let mut next = Vec::with_capacity(out.len() * domain.len());
        for prefix in &out {
            for label in domain {
                let mut row = prefix.clone();
                row.push(label.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn strings(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

/// Node document whose row for each parent combination is `row(given)`.
pub fn node_doc(
    name: &str,
    states: &[&str],
    parents: &[(&str, Vec<String>)],
    mut row: impl FnMut(&[String]) -> Vec<f64>,
) -> NodeDoc {
    let domains: Vec<Vec<String>> = parents.iter().map(|(_, d)| d.clone()).collect();
    NodeDoc {
        name: name.to_string(),
        states: strings(states),
        parents: parents.iter().map(|(p, _)| p.to_string()).collect(),
        cpt: combinations(&domains)
            .into_iter()
            .map(|given| {
                let p = row(&given);
                CptRowDoc { given, p }
            })
            .collect(),
    }
}

/// Parameters of a small synthetic scenario: one zone, a door to a corridor
/// and a window to the outside, `occupants` presence nodes, and door and
/// window nodes conditioned on the CO2 level and their previous state.
#[derive(Clone)]
pub struct Synthetic {
    pub slots: u32,
    pub occupants: usize,
    pub presence: f64,
    /// Door distribution for each CO2 level (low, medium, high).
    pub door: [Vec<f64>; 3],
    /// Window distribution for each CO2 level.
    pub window: [Vec<f64>; 3],
    pub volume: f64,
    pub indoor: f64,
    pub corridor: f64,
    pub outdoor: f64,
    pub initial_co2: f64,
}

impl Default for Synthetic {
    fn default() -> Self {
        Self {
            slots: 3,
            occupants: 4,
            presence: 1.0,
            door: [
                vec![0.3, 0.2, 0.2, 0.2, 0.1],
                vec![0.2, 0.2, 0.2, 0.3, 0.1],
                vec![0.1, 0.1, 0.2, 0.5, 0.1],
            ],
            window: [
                vec![1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
            ],
            volume: 50.0,
            indoor: 26.0,
            corridor: 22.0,
            outdoor: 20.0,
            initial_co2: 450.0,
        }
    }
}

impl Synthetic {
    pub fn document(&self) -> ScenarioDoc {
        let n = self.slots as usize;
        let co2 = ("CO2Level", strings(&CO2_STATES));
        let level = |l: &str| CO2_STATES.iter().position(|s| *s == l).unwrap();

        let mut nodes = vec![
            node_doc("CO2Level", &CO2_STATES, &[], |_| vec![1.0 / 3.0; 3]),
            node_doc("Door_prev", &DOOR_STATES, &[], |_| vec![0.2; 5]),
            node_doc("Window_prev", &WINDOW_STATES, &[], |_| vec![0.25; 4]),
        ];
        let mut occupancy = Vec::new();
        for i in 0..self.occupants {
            let name = format!("Occupant{}", i + 1);
            nodes.push(node_doc(&name, &["false", "true"], &[], |_| vec![1.0 - self.presence, self.presence]));
            occupancy.push(PresenceRule { node: name, labels: vec!["true".into()] });
        }
        nodes.push(node_doc(
            "Door",
            &DOOR_STATES,
            &[co2.clone(), ("Door_prev", strings(&DOOR_STATES))],
            |g| self.door[level(&g[0])].clone(),
        ));
        nodes.push(node_doc(
            "Window",
            &WINDOW_STATES,
            &[co2, ("Window_prev", strings(&WINDOW_STATES))],
            |g| self.window[level(&g[0])].clone(),
        ));

        ScenarioDoc {
            format_version: SCENARIO_FORMAT_VERSION,
            metadata: Metadata {
                name: "synthetic".into(),
                ..Metadata::default()
            },
            network: NetworkDoc { nodes },
            temporal: TemporalDoc {
                links: vec![
                    TemporalLink { node: "Door".into(), prev: "Door_prev".into() },
                    TemporalLink { node: "Window".into(), prev: "Window_prev".into() },
                ],
                initial_state: [("Door_prev", "always_closed"), ("Window_prev", "always_closed")]
                    .into_iter()
                    .collect(),
            },
            calendars: BTreeMap::new(),
            weather: WeatherDoc {
                evidence: BTreeMap::new(),
                indoor_temperature: vec![self.indoor; n],
                boundary_temperature: BTreeMap::from([
                    ("corridor".to_string(), vec![self.corridor; n]),
                    ("outdoor".to_string(), vec![self.outdoor; n]),
                ]),
            },
            physics: PhysicsDoc {
                volume: self.volume,
                per_person_generation: 5e-6,
                gravity: 9.81,
                co2_node: "CO2Level".into(),
                thresholds: Co2Thresholds::default(),
                boundary_concentration: BTreeMap::from([("corridor".to_string(), 450.0), ("outdoor".to_string(), 400.0)]),
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
                occupancy,
            },
            run: RunDoc {
                start_hour: 8,
                end_hour: 8 + self.slots - 1,
                slot_seconds: 3600.0,
                initial_co2: self.initial_co2,
                tracked_nodes: None,
            },
        }
    }
}

/// A random valid scenario: random synthetic parameters plus a calendar
/// node, a weather node and a few extra random nodes feeding the door.
pub fn random_scenario<R: Rng>(rng: &mut R) -> ScenarioDoc {
    let mut spec = Synthetic {
        slots: rng.gen_range(1..=6),
        occupants: rng.gen_range(0..=3),
        presence: rng.gen_range(0.0..=1.0),
        volume: rng.gen_range(10.0..200.0),
        indoor: rng.gen_range(18.0..30.0),
        corridor: rng.gen_range(18.0..30.0),
        outdoor: rng.gen_range(0.0..35.0),
        initial_co2: rng.gen_range(380.0..2000.0),
        ..Synthetic::default()
    };
    for i in 0..3 {
        spec.door[i] = random_row(rng, 5, 0.2);
        spec.window[i] = random_row(rng, 4, 0.2);
    }
    let mut doc = spec.document();
    let slots = spec.slots as usize;

    let busy_free = strings(&["busy", "free"]);
    doc.network.nodes.push(node_doc("Calendar", &["busy", "free"], &[], |_| vec![0.5, 0.5]));
    doc.calendars.insert(
        "Calendar".into(),
        (0..slots).map(|_| busy_free[rng.gen_range(0..2)].clone()).collect(),
    );
    doc.network.nodes.push(node_doc("Sunny", &["no", "yes"], &[], |_| vec![0.5, 0.5]));
    doc.weather
        .evidence
        .insert("Sunny".into(), (0..slots).map(|_| ["no", "yes"][rng.gen_range(0..2)].to_string()).collect());

    let extra = rng.gen_range(0..=3);
    let mut pool: Vec<(String, Vec<String>)> = vec![("Calendar".into(), busy_free.clone())];
    for i in 0..extra {
        let card = rng.gen_range(2..=4);
        let states: Vec<String> = (0..card).map(|s| format!("v{s}")).collect();
        let mut parents = pool.clone();
        parents.shuffle(rng);
        parents.truncate(rng.gen_range(0..=pool.len().min(2)));
        let name = format!("Extra{i}");
        let state_refs: Vec<&str> = states.iter().map(String::as_str).collect();
        let parent_refs: Vec<(&str, Vec<String>)> = parents.iter().map(|(n, d)| (n.as_str(), d.clone())).collect();
        doc.network.nodes.push(node_doc(&name, &state_refs, &parent_refs, |_| random_row(rng, card, 0.1)));
        pool.push((name, states));
    }
    if rng.gen_bool(0.5) {
        doc.physics.openings[0].neutral_plane = Some(rng.gen_range(0.5..1.5));
    }
    if rng.gen_bool(0.5) {
        doc.run.tracked_nodes = Some(vec!["Door".into(), "Window".into(), "CO2Level".into()]);
    }
    doc.metadata.notes = vec![format!("random scenario {}", rng.gen::<u32>())];
    doc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Cycle,
    BadRowSum,
    MissingSlot,
}

/// Break a valid document. Returns the broken document and a prefix the
/// reported issue path must start with.
pub fn mutate<R: Rng>(rng: &mut R, mut doc: ScenarioDoc, kind: Mutation) -> (ScenarioDoc, String) {
    let nodes = &mut doc.network.nodes;
    match kind {
        Mutation::Cycle => {
            // Pick an edge parent -> child and add child as a parent of parent.
            let edges: Vec<(usize, usize)> = nodes
                .iter()
                .enumerate()
                .flat_map(|(c, n)| {
                    n.parents
                        .iter()
                        .filter_map(|p| nodes.iter().position(|m| &m.name == p))
                        .map(move |p| (p, c))
                        .collect::<Vec<_>>()
                })
                .collect();
            let (p, c) = edges[rng.gen_range(0..edges.len())];
            let child = nodes[c].name.clone();
            let child_states = nodes[c].states.clone();
            let target = &mut nodes[p];
            target.parents.push(child);
            target.cpt = target
                .cpt
                .iter()
                .flat_map(|row| {
                    child_states.iter().map(move |s| {
                        let mut given = row.given.clone();
                        given.push(s.clone());
                        CptRowDoc { given, p: row.p.clone() }
                    })
                })
                .collect();
            (doc, "network.nodes".into())
        }
        Mutation::BadRowSum => {
            let i = rng.gen_range(0..nodes.len());
            let j = rng.gen_range(0..nodes[i].cpt.len());
            let row = &mut nodes[i].cpt[j].p;
            let k = rng.gen_range(0..row.len());
            row[k] += rng.gen_range(0.05..0.5);
            (doc, format!("network.nodes[{i}].cpt[{j}]"))
        }
        Mutation::MissingSlot => match rng.gen_range(0..4) {
            0 => {
                doc.weather.indoor_temperature.pop();
                (doc, "weather.indoor_temperature".into())
            }
            1 => {
                let key = if rng.gen_bool(0.5) { "corridor" } else { "outdoor" };
                doc.weather.boundary_temperature.get_mut(key).unwrap().pop();
                (doc, format!("weather.boundary_temperature.{key}"))
            }
            2 if !doc.calendars.is_empty() => {
                let (name, series) = doc.calendars.iter_mut().next().unwrap();
                series.pop();
                let path = format!("calendars.{name}");
                (doc, path)
            }
            _ => {
                doc.run.end_hour += 1;
                (doc, "weather.indoor_temperature".into())
            }
        },
    }
}
