//! C ABI over the `occusim` engine.
//!
//! Every fallible function returns an [`OccusimStatus`]. On failure the
//! message is kept per thread and read with [`occusim_last_error_message`].
//! Scenarios and aggregates are opaque handles released with their `_free`
//! function. Strings are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};

use occusim::bayes::{Assignment, BayesError};
use occusim::cosim::{monte_carlo, Aggregate};
use occusim::physics::{self, Co2Thresholds, FlowPair, OpeningGeometry, STANDARD_GRAVITY};
use occusim::scenario::{load_scenario, load_scenario_file, write_aggregate_csv, write_aggregate_json, OutputError};
use occusim::{Scenario, ScenarioError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccusimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    ZeroEvidence = 6,
    InvalidArgument = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A validated scenario.
pub struct OccusimScenario {
    inner: Scenario,
}

/// Per-slot statistics of a Monte Carlo ensemble.
pub struct OccusimAggregate {
    inner: Aggregate,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OccusimCo2Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OccusimFlows {
    pub q_in: f64,
    pub q_out: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(OccusimStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: OccusimStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome) -> OccusimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OccusimStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            OccusimStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return fail(OccusimStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .or_else(|_| fail(OccusimStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn reference<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .map_or_else(|| fail(OccusimStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn write_out<T>(ptr: *mut T, value: T) -> Outcome {
    if ptr.is_null() {
        return fail(OccusimStatus::NullPointer, "output pointer is null");
    }
    ptr.write(value);
    Ok(())
}

fn scenario_failure(e: ScenarioError) -> Failure {
    let status = match e {
        ScenarioError::Io { .. } => OccusimStatus::Io,
        ScenarioError::Parse { .. } => OccusimStatus::Parse,
        ScenarioError::Invalid(_) => OccusimStatus::Validation,
    };
    Failure(status, e.to_string())
}

fn output_failure(e: OutputError) -> Failure {
    Failure(OccusimStatus::Io, e.to_string())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn occusim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn occusim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Load and validate a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_scenario_load(path: *const c_char, out: *mut *mut OccusimScenario) -> OccusimStatus {
    guard(|| {
        let path = text(path, "path")?;
        let inner = load_scenario_file(path).map_err(scenario_failure)?;
        write_out(out, Box::into_raw(Box::new(OccusimScenario { inner })))
    })
}

/// Parse and validate a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_scenario_load_str(json: *const c_char, out: *mut *mut OccusimScenario) -> OccusimStatus {
    guard(|| {
        let json = text(json, "json")?;
        let inner = load_scenario(json).map_err(scenario_failure)?;
        write_out(out, Box::into_raw(Box::new(OccusimScenario { inner })))
    })
}

/// # Safety
/// `scenario` must come from a load function and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn occusim_scenario_free(scenario: *mut OccusimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_scenario_node_count(scenario: *const OccusimScenario, out: *mut usize) -> OccusimStatus {
    guard(|| write_out(out, reference(scenario, "scenario")?.inner.network().len()))
}

/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_scenario_slot_count(scenario: *const OccusimScenario, out: *mut usize) -> OccusimStatus {
    guard(|| write_out(out, reference(scenario, "scenario")?.inner.slot_count()))
}

/// Exact single-slice posterior of `node`. Evidence is given as two
/// parallel arrays of `evidence_len` node names and labels. The
/// distribution, in the node's state order, is written to `probabilities`
/// and its length to `out_len`. If `capacity` is too small only `out_len`
/// is written and `BufferTooSmall` is returned.
///
/// # Safety
/// String arguments must be NUL-terminated; the evidence arrays must hold
/// `evidence_len` entries; `probabilities` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn occusim_query(
    scenario: *const OccusimScenario,
    node: *const c_char,
    evidence_nodes: *const *const c_char,
    evidence_labels: *const *const c_char,
    evidence_len: usize,
    probabilities: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> OccusimStatus {
    guard(|| {
        let scenario = &reference(scenario, "scenario")?.inner;
        let node = text(node, "node")?;
        let mut evidence = Assignment::new();
        if evidence_len > 0 {
            if evidence_nodes.is_null() || evidence_labels.is_null() {
                return fail(OccusimStatus::NullPointer, "evidence arrays are null");
            }
            for i in 0..evidence_len {
                let name = text(*evidence_nodes.add(i), "evidence node")?;
                let label = text(*evidence_labels.add(i), "evidence label")?;
                evidence.insert(name, label);
            }
        }
        let d = scenario.query(node, &evidence).map_err(|e| match e {
            BayesError::ZeroEvidence => Failure(OccusimStatus::ZeroEvidence, e.to_string()),
            other => Failure(OccusimStatus::InvalidArgument, other.to_string()),
        })?;
        let n = d.probabilities.len();
        write_out(out_len, n)?;
        if capacity < n {
            return fail(OccusimStatus::BufferTooSmall, format!("need room for {n} probabilities"));
        }
        if probabilities.is_null() {
            return fail(OccusimStatus::NullPointer, "probabilities is null");
        }
        std::slice::from_raw_parts_mut(probabilities, n).copy_from_slice(&d.probabilities);
        Ok(())
    })
}

/// Run `runs` co-simulated days seeded from `seed` and aggregate them.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_monte_carlo(
    scenario: *const OccusimScenario,
    runs: usize,
    seed: u64,
    out: *mut *mut OccusimAggregate,
) -> OccusimStatus {
    guard(|| {
        let scenario = &reference(scenario, "scenario")?.inner;
        if runs == 0 {
            return fail(OccusimStatus::InvalidArgument, "runs must be at least 1");
        }
        let inner = monte_carlo(scenario, runs, seed).or_else(|e| fail(OccusimStatus::Validation, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(OccusimAggregate { inner })))
    })
}

/// # Safety
/// `aggregate` must come from [`occusim_monte_carlo`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_free(aggregate: *mut OccusimAggregate) {
    if !aggregate.is_null() {
        drop(Box::from_raw(aggregate));
    }
}

/// # Safety
/// `aggregate` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_slot_count(aggregate: *const OccusimAggregate, out: *mut usize) -> OccusimStatus {
    guard(|| write_out(out, reference(aggregate, "aggregate")?.inner.slots.len()))
}

fn slot_of(agg: &Aggregate, slot: usize) -> Result<&occusim::cosim::SlotAggregate, Failure> {
    agg.slots.get(slot).map_or_else(
        || fail(OccusimStatus::InvalidArgument, format!("slot {slot} out of range (0..{})", agg.slots.len())),
        Ok,
    )
}

/// Hour of slot `slot`.
///
/// # Safety
/// `aggregate` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_slot_hour(
    aggregate: *const OccusimAggregate,
    slot: usize,
    out: *mut u32,
) -> OccusimStatus {
    guard(|| write_out(out, slot_of(&reference(aggregate, "aggregate")?.inner, slot)?.hour))
}

/// End-of-slot CO2 statistics across runs, ppm.
///
/// # Safety
/// `aggregate` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_co2_stats(
    aggregate: *const OccusimAggregate,
    slot: usize,
    out: *mut OccusimCo2Stats,
) -> OccusimStatus {
    guard(|| {
        let s = slot_of(&reference(aggregate, "aggregate")?.inner, slot)?.co2;
        write_out(
            out,
            OccusimCo2Stats {
                mean: s.mean,
                min: s.min,
                max: s.max,
                q10: s.q10,
                q50: s.q50,
                q90: s.q90,
            },
        )
    })
}

/// Number of runs in which tracked `node` took `label` at slot `slot`.
///
/// # Safety
/// `aggregate` must be a live handle, `node` and `label` NUL-terminated and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_histogram_count(
    aggregate: *const OccusimAggregate,
    slot: usize,
    node: *const c_char,
    label: *const c_char,
    out: *mut u64,
) -> OccusimStatus {
    guard(|| {
        let slot = slot_of(&reference(aggregate, "aggregate")?.inner, slot)?;
        let node = text(node, "node")?;
        let label = text(label, "label")?;
        let hist = slot
            .histogram(node)
            .map_or_else(|| fail(OccusimStatus::InvalidArgument, format!("node `{node}` is not tracked")), Ok)?;
        let count = hist
            .count(label)
            .map_or_else(|| fail(OccusimStatus::InvalidArgument, format!("`{label}` is not a state of `{node}`")), Ok)?;
        write_out(out, count)
    })
}

unsafe fn write_file(
    aggregate: *const OccusimAggregate,
    path: *const c_char,
    writer: fn(&Aggregate, BufWriter<File>) -> Result<(), OutputError>,
) -> OccusimStatus {
    guard(|| {
        let agg = &reference(aggregate, "aggregate")?.inner;
        let path = text(path, "path")?;
        let file = File::create(path).or_else(|e| fail(OccusimStatus::Io, format!("cannot write {path}: {e}")))?;
        writer(agg, BufWriter::new(file)).map_err(output_failure)
    })
}

/// Write the aggregate as JSON.
///
/// # Safety
/// `aggregate` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_write_json(aggregate: *const OccusimAggregate, path: *const c_char) -> OccusimStatus {
    write_file(aggregate, path, write_aggregate_json::<BufWriter<File>>)
}

/// Write the aggregate as CSV, one row per slot.
///
/// # Safety
/// `aggregate` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn occusim_aggregate_write_csv(aggregate: *const OccusimAggregate, path: *const c_char) -> OccusimStatus {
    write_file(aggregate, path, write_aggregate_csv::<BufWriter<File>>)
}

/// One exact zone CO2 step over `dt` seconds. Flows in m3/s, generation in
/// m3/s of CO2, concentrations in ppm, volume in m3.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_co2_step(
    c_k: f64,
    q_in: f64,
    q_out: f64,
    generation: f64,
    c_supply: f64,
    dt: f64,
    volume: f64,
    out: *mut f64,
) -> OccusimStatus {
    guard(|| {
        let c = physics::co2_step(c_k, FlowPair { q_in, q_out }, generation, c_supply, dt, volume)
            .or_else(|e| fail(OccusimStatus::InvalidArgument, e.to_string()))?;
        write_out(out, c)
    })
}

/// Stack-effect flows through one opening. A NaN `neutral_plane` means
/// mid-height.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn occusim_stack_airflow(
    height: f64,
    width: f64,
    discharge_coefficient: f64,
    neutral_plane: f64,
    t_in: f64,
    t_out: f64,
    opening_ratio: f64,
    out: *mut OccusimFlows,
) -> OccusimStatus {
    guard(|| {
        let hn = (!neutral_plane.is_nan()).then_some(neutral_plane);
        let invalid = |e: physics::PhysicsError| Failure(OccusimStatus::InvalidArgument, e.to_string());
        let geom = OpeningGeometry::new(height, width, discharge_coefficient, hn, "").map_err(invalid)?;
        let f = physics::stack_airflow(&geom, t_in, t_out, opening_ratio, STANDARD_GRAVITY).map_err(invalid)?;
        write_out(out, OccusimFlows { q_in: f.q_in, q_out: f.q_out })
    })
}

/// CO2 level with the default thresholds: 0 low (< 1000 ppm), 1 medium
/// (< 1700 ppm), 2 high.
#[no_mangle]
pub extern "C" fn occusim_discretize_co2(concentration: f64) -> u32 {
    physics::discretize_co2(concentration, Co2Thresholds::default()) as u32
}
