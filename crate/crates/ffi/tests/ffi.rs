use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use occusim_ffi::*;

fn office() -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/office_rain.json");
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = occusim_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load() -> *mut OccusimScenario {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { occusim_scenario_load(office().as_ptr(), &mut s) }, OccusimStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(occusim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scenario_counts() {
    let s = load();
    let (mut nodes, mut slots) = (0usize, 0usize);
    unsafe {
        assert_eq!(occusim_scenario_node_count(s, &mut nodes), OccusimStatus::Ok);
        assert_eq!(occusim_scenario_slot_count(s, &mut slots), OccusimStatus::Ok);
        occusim_scenario_free(s);
    }
    assert_eq!((nodes, slots), (16, 14));
    assert!(occusim_last_error_message().is_null());
}

#[test]
fn load_errors_map_to_statuses() {
    let mut s = ptr::null_mut();
    let missing = CString::new("/nonexistent.json").unwrap();
    assert_eq!(unsafe { occusim_scenario_load(missing.as_ptr(), &mut s) }, OccusimStatus::Io);
    assert!(last_error().contains("/nonexistent.json"));

    let bad = CString::new("{").unwrap();
    assert_eq!(unsafe { occusim_scenario_load_str(bad.as_ptr(), &mut s) }, OccusimStatus::Parse);

    let text = std::fs::read_to_string(office().to_str().unwrap()).unwrap().replace("\"volume\": 50.0", "\"volume\": -1.0");
    let invalid = CString::new(text).unwrap();
    assert_eq!(unsafe { occusim_scenario_load_str(invalid.as_ptr(), &mut s) }, OccusimStatus::Validation);
    assert!(last_error().contains("physics.volume"), "{}", last_error());

    assert_eq!(unsafe { occusim_scenario_load(ptr::null(), &mut s) }, OccusimStatus::NullPointer);
    assert_eq!(unsafe { occusim_scenario_load(office().as_ptr(), ptr::null_mut()) }, OccusimStatus::NullPointer);
    assert!(s.is_null());
    unsafe { occusim_scenario_free(ptr::null_mut()) };
}

#[test]
fn query_with_buffer_protocol() {
    let s = load();
    let node = CString::new("Window").unwrap();
    let names = [CString::new("Rain").unwrap()];
    let labels = [CString::new("true").unwrap()];
    let name_ptrs: Vec<_> = names.iter().map(|c| c.as_ptr()).collect();
    let label_ptrs: Vec<_> = labels.iter().map(|c| c.as_ptr()).collect();
    let mut len = 0usize;
    let mut small = [0.0f64; 2];
    let mut probs = [0.0f64; 8];
    unsafe {
        let status = occusim_query(s, node.as_ptr(), name_ptrs.as_ptr(), label_ptrs.as_ptr(), 1, small.as_mut_ptr(), 2, &mut len);
        assert_eq!(status, OccusimStatus::BufferTooSmall);
        assert_eq!(len, 4);
        let status = occusim_query(s, node.as_ptr(), name_ptrs.as_ptr(), label_ptrs.as_ptr(), 1, probs.as_mut_ptr(), 8, &mut len);
        assert_eq!(status, OccusimStatus::Ok);
        assert_eq!(&probs[..4], &[1.0, 0.0, 0.0, 0.0]);

        let unknown = CString::new("Nope").unwrap();
        let status = occusim_query(s, unknown.as_ptr(), ptr::null(), ptr::null(), 0, probs.as_mut_ptr(), 8, &mut len);
        assert_eq!(status, OccusimStatus::InvalidArgument);
        occusim_scenario_free(s);
    }
}

#[test]
fn monte_carlo_and_writers() {
    let s = load();
    let mut agg = ptr::null_mut();
    unsafe {
        assert_eq!(occusim_monte_carlo(s, 0, 1, &mut agg), OccusimStatus::InvalidArgument);
        assert_eq!(occusim_monte_carlo(s, 50, 42, &mut agg), OccusimStatus::Ok);
        let mut slots = 0usize;
        assert_eq!(occusim_aggregate_slot_count(agg, &mut slots), OccusimStatus::Ok);
        assert_eq!(slots, 14);

        let mut hour = 0u32;
        assert_eq!(occusim_aggregate_slot_hour(agg, 5, &mut hour), OccusimStatus::Ok);
        assert_eq!(hour, 12);
        let (node, label) = (CString::new("Window").unwrap(), CString::new("always_closed").unwrap());
        let mut count = 0u64;
        assert_eq!(occusim_aggregate_histogram_count(agg, 5, node.as_ptr(), label.as_ptr(), &mut count), OccusimStatus::Ok);
        assert_eq!(count, 50);

        let mut stats = OccusimCo2Stats::default();
        assert_eq!(occusim_aggregate_co2_stats(agg, 0, &mut stats), OccusimStatus::Ok);
        assert!(stats.min <= stats.q10 && stats.q10 <= stats.q50 && stats.q50 <= stats.q90 && stats.q90 <= stats.max);
        assert_eq!(occusim_aggregate_co2_stats(agg, 14, &mut stats), OccusimStatus::InvalidArgument);

        let dir = tempfile::tempdir().unwrap();
        let json = CString::new(dir.path().join("a.json").to_str().unwrap()).unwrap();
        let csv = CString::new(dir.path().join("a.csv").to_str().unwrap()).unwrap();
        assert_eq!(occusim_aggregate_write_json(agg, json.as_ptr()), OccusimStatus::Ok);
        assert_eq!(occusim_aggregate_write_csv(agg, csv.as_ptr()), OccusimStatus::Ok);
        let parsed: occusim::Aggregate =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
        assert_eq!(parsed.runs, 50);
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap().lines().count(), 15);

        occusim_aggregate_free(agg);
        occusim_scenario_free(s);
    }
}

#[test]
fn physics_entry_points() {
    let mut c = 0.0;
    unsafe {
        assert_eq!(occusim_co2_step(450.0, 0.0, 0.0, 2e-5, 400.0, 3600.0, 50.0, &mut c), OccusimStatus::Ok);
        assert!((c - 1890.0).abs() < 1e-9);
        assert_eq!(occusim_co2_step(450.0, 0.0, 0.0, 0.0, 400.0, 3600.0, 0.0, &mut c), OccusimStatus::InvalidArgument);

        let mut f = OccusimFlows::default();
        assert_eq!(occusim_stack_airflow(2.0, 0.9, 0.6, f64::NAN, 26.0, 22.0, 1.0, &mut f), OccusimStatus::Ok);
        assert!(f.q_in > 0.0 && (f.q_in - f.q_out).abs() < 1e-12);
        let mut g = OccusimFlows::default();
        assert_eq!(occusim_stack_airflow(2.0, 0.9, 0.6, 1.0, 26.0, 22.0, 1.0, &mut g), OccusimStatus::Ok);
        assert_eq!(f, g);
        assert_eq!(occusim_stack_airflow(2.0, 0.9, 0.6, f64::NAN, 26.0, 22.0, 1.5, &mut f), OccusimStatus::InvalidArgument);
    }
    assert_eq!(occusim_discretize_co2(999.0), 0);
    assert_eq!(occusim_discretize_co2(1000.0), 1);
    assert_eq!(occusim_discretize_co2(1700.0), 2);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/occusim.h")).unwrap();
    let source = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}
