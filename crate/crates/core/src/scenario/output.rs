use std::io::Write;

use thiserror::Error;

use crate::cosim::{Aggregate, RunTrace};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn trace_csv_header(nodes: &[String]) -> Vec<String> {
    let mut header = vec!["slot".to_string()];
    header.extend(nodes.iter().cloned());
    header.extend(
        ["door_ratio", "window_ratio", "q_in", "q_out", "co2_ppm", "co2_level"]
            .iter()
            .map(|s| s.to_string()),
    );
    header
}

/// One row per slot: hour, sampled state of every node, opening ratios,
/// total flows, end-of-slot concentration and the level fed to the
/// occupant model at slot start.
pub fn write_trace<W: Write>(trace: &RunTrace, destination: W) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(trace_csv_header(&trace.nodes))?;
    for r in &trace.records {
        let mut row = vec![r.hour.to_string()];
        row.extend(trace.nodes.iter().map(|n| r.sampled.get(n).unwrap_or("").to_string()));
        row.push(r.outputs.door_ratio.to_string());
        row.push(r.outputs.window_ratio.to_string());
        row.push(r.flows.q_in.to_string());
        row.push(r.flows.q_out.to_string());
        row.push(r.co2_end.to_string());
        row.push(r.co2_level.label().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn aggregate_csv_header(agg: &Aggregate) -> Vec<String> {
    let mut header: Vec<String> = ["slot", "runs", "co2_mean", "co2_min", "co2_q10", "co2_q50", "co2_q90", "co2_max"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(first) = agg.slots.first() {
        for h in &first.histograms {
            header.extend(h.labels.iter().map(|l| format!("{}={l}", h.node)));
        }
    }
    header
}

/// One row per slot: concentration statistics then a count column per
/// tracked node and state, named `Node=state`.
pub fn write_aggregate_csv<W: Write>(agg: &Aggregate, destination: W) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(aggregate_csv_header(agg))?;
    for s in &agg.slots {
        let mut row = vec![s.hour.to_string(), agg.runs.to_string()];
        for v in [s.co2.mean, s.co2.min, s.co2.q10, s.co2.q50, s.co2.q90, s.co2.max] {
            row.push(v.to_string());
        }
        for h in &s.histograms {
            row.extend(h.counts.iter().map(u64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_json<W: Write>(agg: &Aggregate, mut destination: W) -> Result<(), OutputError> {
    serde_json::to_writer_pretty(&mut destination, agg)?;
    destination.write_all(b"\n")?;
    Ok(())
}
