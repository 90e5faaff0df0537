//! Per-slot orchestration of occupant sampling and zone physics, plus
//! seeded Monte Carlo ensembles.
//!
//! The physics side owns the loop. For every slot it hands the occupant
//! model the slot's evidence (calendars, weather, the CO2 level at slot
//! start, the propagated door/window states), receives averaged actions,
//! converts them to airflow and advances the concentration to slot end.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::Assignment;
use crate::dbn::DbnError;
use crate::physics::{
    co2_step, discretize_co2, generation_rate, stack_airflow, total_flows, Co2Level, FlowPair,
    PhysicsError, TotalFlows,
};
use crate::scenario::{OpeningKind, Scenario};

pub const AGGREGATE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CosimError {
    #[error("slot {hour}h: {source}")]
    Slot {
        hour: u32,
        #[source]
        source: DbnError,
    },
    #[error("slot {hour}h: {source}")]
    Physics {
        hour: u32,
        #[source]
        source: PhysicsError,
    },
    #[error("sampled state is missing node `{0}`")]
    MissingNode(String),
    #[error("no opening ratio is mapped for {node}={label}")]
    UnmappedLabel { node: String, label: String },
    #[error("run count must be at least 1")]
    InvalidRunCount,
}

/// Opening ratio for each door/window state label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionMapping {
    pub door_node: String,
    pub window_node: String,
    pub ratios: BTreeMap<String, f64>,
}

impl ActionMapping {
    /// The stock ratios for the averaged door/window states.
    pub fn default_ratios() -> BTreeMap<String, f64> {
        [
            ("always_closed", 0.0),
            ("mostly_closed", 0.25),
            ("mostly_opened", 0.75),
            ("always_opened", 1.0),
            ("move", 0.5),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn ratio(&self, node: &str, sampled: &Assignment) -> Result<f64, CosimError> {
        let label = sampled
            .get(node)
            .ok_or_else(|| CosimError::MissingNode(node.to_string()))?;
        self.ratios
            .get(label)
            .copied()
            .ok_or_else(|| CosimError::UnmappedLabel {
                node: node.to_string(),
                label: label.to_string(),
            })
    }
}

/// One occupant is counted as present when `node` takes any of `labels`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresenceRule {
    pub node: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OccupancyRule {
    pub entries: Vec<PresenceRule>,
}

impl OccupancyRule {
    pub fn count(&self, sampled: &Assignment) -> Result<u32, CosimError> {
        let mut count = 0;
        for rule in &self.entries {
            let label = sampled
                .get(&rule.node)
                .ok_or_else(|| CosimError::MissingNode(rule.node.clone()))?;
            if rule.labels.iter().any(|l| l == label) {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Quantities an occupant model hands to a building model. Only presence and
/// the two opening ratios drive the CO2 physics; the rest are carried for
/// hosts that model heat and moisture.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PassThrough {
    pub metabolic_gain_w: Option<f64>,
    pub appliance_gain_w: Option<f64>,
    pub humidity_gain_kg_s: Option<f64>,
    pub setpoint_c: Option<f64>,
    pub heating_period: Option<bool>,
    pub cooling_period: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupantOutputs {
    pub occupied: bool,
    pub occupant_count: u32,
    pub door_ratio: f64,
    pub window_ratio: f64,
    pub extra: PassThrough,
}

pub fn map_actions(
    sampled: &Assignment,
    mapping: &ActionMapping,
    occupancy: &OccupancyRule,
) -> Result<OccupantOutputs, CosimError> {
    let occupant_count = occupancy.count(sampled)?;
    Ok(OccupantOutputs {
        occupied: occupant_count > 0,
        occupant_count,
        door_ratio: mapping.ratio(&mapping.door_node, sampled)?,
        window_ratio: mapping.ratio(&mapping.window_node, sampled)?,
        extra: PassThrough::default(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub hour: u32,
    pub sampled: Assignment,
    pub outputs: OccupantOutputs,
    pub flows: TotalFlows,
    pub co2_start: f64,
    pub co2_end: f64,
    /// Level fed to the occupant model, taken from `co2_start`.
    pub co2_level: Co2Level,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Node columns, in network declaration order.
    pub nodes: Vec<String>,
    pub records: Vec<SlotRecord>,
}

/// Co-simulate one working day.
pub fn simulate_day<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<RunTrace, CosimError> {
    let template = scenario.template();
    let zone = scenario.zone();
    let mut prev = template.initial_state().clone();
    let mut concentration = scenario.initial_co2();
    let mut records = Vec::with_capacity(scenario.slot_count());

    for slot in 0..scenario.slot_count() {
        let hour = scenario.hour(slot);
        let physics_err = |source| CosimError::Physics { hour, source };

        let level = discretize_co2(concentration, zone.thresholds);
        let mut evidence = scenario.evidence_at(slot);
        evidence.insert(scenario.co2_node(), level.label());

        let state = template
            .step(hour, &prev, &evidence, rng)
            .map_err(|source| CosimError::Slot { hour, source })?;
        let outputs = map_actions(&state.sampled, scenario.mapping(), scenario.occupancy())?;

        let t_in = scenario.indoor_temperature(slot);
        let mut per_opening = Vec::with_capacity(scenario.openings().len());
        for opening in scenario.openings() {
            let ratio = match opening.kind {
                OpeningKind::Door => outputs.door_ratio,
                OpeningKind::Window => outputs.window_ratio,
            };
            let boundary = &opening.geometry.boundary;
            let t_out = scenario.boundary_temperature(boundary, slot);
            let flow = stack_airflow(&opening.geometry, t_in, t_out, ratio, zone.gravity).map_err(physics_err)?;
            per_opening.push((flow, zone.boundary_concentrations[boundary]));
        }
        let flows = total_flows(&per_opening);
        let generation = generation_rate(outputs.occupant_count, zone.per_person_generation);
        let next = co2_step(
            concentration,
            FlowPair {
                q_in: flows.q_in,
                q_out: flows.q_out,
            },
            generation,
            flows.c_supply,
            scenario.slot_seconds(),
            zone.volume,
        )
        .map_err(physics_err)?;

        prev = template.extract_next_prev(&state);
        records.push(SlotRecord {
            hour,
            sampled: state.sampled,
            outputs,
            flows,
            co2_start: concentration,
            co2_end: next,
            co2_level: level,
        });
        concentration = next;
    }

    Ok(RunTrace {
        nodes: scenario.network().nodes().iter().map(|n| n.name.clone()).collect(),
        records,
    })
}

/// Seed of run `run` in an ensemble started from `master_seed`.
///
/// `splitmix64(master_seed + (run + 1) * 0x9E3779B97F4A7C15)` with wrapping
/// arithmetic. Changing this function changes every published ensemble.
pub fn run_seed(master_seed: u64, run: u64) -> u64 {
    let mut z = master_seed.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(run_seed(master_seed, run))
}

/// Every run of an ensemble, in run-index order.
pub fn run_ensemble(scenario: &Scenario, runs: usize, master_seed: u64) -> Result<Vec<RunTrace>, CosimError> {
    if runs == 0 {
        return Err(CosimError::InvalidRunCount);
    }
    let results: Vec<Result<RunTrace, CosimError>> = (0..runs)
        .into_par_iter()
        .map(|i| simulate_day(scenario, &mut run_rng(master_seed, i as u64)))
        .collect();
    results.into_iter().collect()
}

/// Run `runs` independent days and aggregate them.
pub fn monte_carlo(scenario: &Scenario, runs: usize, master_seed: u64) -> Result<Aggregate, CosimError> {
    let traces = run_ensemble(scenario, runs, master_seed)?;
    Ok(Aggregate::from_traces(scenario, master_seed, &traces))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Co2Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Co2Stats {
    /// Statistics of a multiset of values; independent of input order.
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n == 0 {
            return Self { mean: f64::NAN, min: f64::NAN, max: f64::NAN, q10: f64::NAN, q50: f64::NAN, q90: f64::NAN };
        }
        Self {
            mean: sorted.iter().sum::<f64>() / n as f64,
            min: sorted[0],
            max: sorted[n - 1],
            q10: quantile(&sorted, 0.1),
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
        }
    }
}

// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub node: String,
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn count(&self, label: &str) -> Option<u64> {
        self.labels.iter().position(|l| l == label).map(|i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotAggregate {
    pub hour: u32,
    /// Statistics of the end-of-slot concentration across runs.
    pub co2: Co2Stats,
    /// End-of-slot concentration of each run, in run-index order.
    pub co2_by_run: Vec<f64>,
    pub histograms: Vec<Histogram>,
}

impl SlotAggregate {
    pub fn histogram(&self, node: &str) -> Option<&Histogram> {
        self.histograms.iter().find(|h| h.node == node)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub format_version: u32,
    pub master_seed: u64,
    pub runs: usize,
    pub tracked_nodes: Vec<String>,
    pub slots: Vec<SlotAggregate>,
}

impl Aggregate {
    pub fn from_traces(scenario: &Scenario, master_seed: u64, traces: &[RunTrace]) -> Self {
        let net = scenario.network();
        let tracked = scenario.tracked_nodes().to_vec();
        let slots = (0..scenario.slot_count())
            .map(|slot| {
                let co2_by_run: Vec<f64> = traces.iter().map(|t| t.records[slot].co2_end).collect();
                let histograms = tracked
                    .iter()
                    .map(|name| {
                        let labels = net.node(name).map(|n| n.domain.labels().to_vec()).unwrap_or_default();
                        let mut counts = vec![0u64; labels.len()];
                        for t in traces {
                            if let Some(i) = t.records[slot]
                                .sampled
                                .get(name)
                                .and_then(|v| labels.iter().position(|l| l == v))
                            {
                                counts[i] += 1;
                            }
                        }
                        Histogram { node: name.clone(), labels, counts }
                    })
                    .collect();
                SlotAggregate {
                    hour: scenario.hour(slot),
                    co2: Co2Stats::from_values(&co2_by_run),
                    co2_by_run,
                    histograms,
                }
            })
            .collect();
        Self {
            format_version: AGGREGATE_FORMAT_VERSION,
            master_seed,
            runs: traces.len(),
            tracked_nodes: tracked,
            slots,
        }
    }

    pub fn slot_at_hour(&self, hour: u32) -> Option<&SlotAggregate> {
        self.slots.iter().find(|s| s.hour == hour)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_lookups() {
        let mapping = ActionMapping {
            door_node: "Door".into(),
            window_node: "Window".into(),
            ratios: ActionMapping::default_ratios(),
        };
        let s: Assignment = [("Door", "always_closed"), ("Window", "always_opened")].into_iter().collect();
        let out = map_actions(&s, &mapping, &OccupancyRule::default()).unwrap();
        assert_eq!(out.door_ratio, 0.0);
        assert_eq!(out.window_ratio, 1.0);
        assert!(!out.occupied);

        let s: Assignment = [("Door", "mostly_opened"), ("Window", "always_closed")].into_iter().collect();
        assert_eq!(map_actions(&s, &mapping, &OccupancyRule::default()).unwrap().door_ratio, 0.75);

        let s: Assignment = [("Door", "ajar"), ("Window", "always_closed")].into_iter().collect();
        assert!(matches!(
            map_actions(&s, &mapping, &OccupancyRule::default()),
            Err(CosimError::UnmappedLabel { .. })
        ));
    }

    #[test]
    fn occupancy_counts_satisfied_rules() {
        let rule = OccupancyRule {
            entries: vec![
                PresenceRule { node: "P".into(), labels: vec!["busy".into()] },
                PresenceRule { node: "Prof".into(), labels: vec!["alone".into(), "meeting".into()] },
                PresenceRule { node: "G".into(), labels: vec!["busy".into()] },
            ],
        };
        let s: Assignment = [("P", "busy"), ("Prof", "meeting"), ("G", "free")].into_iter().collect();
        assert_eq!(rule.count(&s).unwrap(), 2);
        let partial: Assignment = [("P", "busy")].into_iter().collect();
        assert!(matches!(rule.count(&partial), Err(CosimError::MissingNode(_))));
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(run_seed(42, 0), run_seed(42, 0));
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| run_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(run_seed(0, 1), run_seed(1, 0));
    }

    #[test]
    fn stats_ignore_order() {
        let a = Co2Stats::from_values(&[3.0, 1.0, 2.0, 10.0, 0.5]);
        let b = Co2Stats::from_values(&[10.0, 0.5, 2.0, 1.0, 3.0]);
        assert_eq!(a, b);
        assert_eq!(a.q50, 2.0);
        assert_eq!(a.min, 0.5);
        assert_eq!(a.max, 10.0);
        let single = Co2Stats::from_values(&[7.0]);
        assert_eq!((single.q10, single.q90, single.mean), (7.0, 7.0, 7.0));
        // 11 values 0..=10: q10 = 1, q90 = 9
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        let s = Co2Stats::from_values(&v);
        assert!((s.q10 - 1.0).abs() < 1e-12 && (s.q90 - 9.0).abs() < 1e-12);
    }
}
