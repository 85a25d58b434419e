use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_rational::Ratio;

use super::RunRecord;
use crate::error::Result;
use crate::metrics::mean_sd;

pub const RUNS_CSV: &str = "runs.csv";
pub const MT_CSV: &str = "mt_throughput.csv";

pub const RUNS_CSV_HEADER: [&str; 21] = [
    "run_id",
    "scenario",
    "procedure",
    "association",
    "num_mts",
    "num_bs",
    "replication",
    "topology_seed",
    "fading_seed",
    "slots",
    "pf_utility",
    "system_throughput",
    "mean_throughput",
    "jfi",
    "comparisons_per_slot",
    "additions_per_slot",
    "multiplications_per_slot",
    "messages_per_slot",
    "sync_events",
    "association_fallbacks",
    "decision_bits",
];

pub const MT_CSV_HEADER: [&str; 5] = ["run_id", "mt_id", "x_u", "a1", "a2"];

fn ratio(r: Ratio<u64>) -> String {
    (*r.numer() as f64 / *r.denom() as f64).to_string()
}

fn opt(v: Option<usize>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

/// One row per run, columns as in [`RUNS_CSV_HEADER`].
pub fn write_runs_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_CSV_HEADER)?;
    for r in records {
        let m = &r.metrics;
        let c = &m.counters;
        out.write_record([
            r.run_id.to_string(),
            r.point.scenario.id().to_string(),
            r.point.procedure.to_string(),
            r.point.association.to_string(),
            r.point.num_mts.to_string(),
            r.num_bs.to_string(),
            r.point.replication.to_string(),
            r.topology_seed.to_string(),
            r.fading_seed.to_string(),
            r.slots.to_string(),
            m.pf_utility.to_string(),
            m.system_throughput.to_string(),
            (m.system_throughput / m.throughputs.len() as f64).to_string(),
            m.jfi.to_string(),
            ratio(c.comparisons_per_slot()),
            ratio(c.additions_per_slot()),
            ratio(c.multiplications_per_slot()),
            ratio(c.messages_per_slot()),
            c.sync_events.to_string(),
            r.association_fallbacks.to_string(),
            r.decision_bits.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per (run, MT): throughput in bits/slot and the serving pair.
/// `a1`/`a2` are empty under all-connectivity; `a2` is empty for single.
pub fn write_mt_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(MT_CSV_HEADER)?;
    for r in records {
        for (mt, (x, (a1, a2))) in r.metrics.throughputs.iter().zip(&r.serving).enumerate() {
            out.write_record([
                r.run_id.to_string(),
                mt.to_string(),
                x.to_string(),
                opt(*a1),
                opt(*a2),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes both CSVs into `dir`. Files are staged under temporary names and
/// renamed at the end; nothing is left behind on failure.
pub fn write_outputs(records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let targets = [dir.join(RUNS_CSV), dir.join(MT_CSV)];
    let staged: Vec<PathBuf> = targets.iter().map(|p| p.with_extension("csv.partial")).collect();
    let result = (|| -> Result<()> {
        write_runs_csv(records, std::io::BufWriter::new(fs::File::create(&staged[0])?))?;
        write_mt_csv(records, std::io::BufWriter::new(fs::File::create(&staged[1])?))?;
        for (s, t) in staged.iter().zip(&targets) {
            fs::rename(s, t)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in staged.iter().chain(&targets) {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(targets.to_vec())
}

/// Replication statistics for one (scenario, M, procedure, association) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: u8,
    pub num_mts: usize,
    pub procedure: String,
    pub association: String,
    pub replications: usize,
    pub pf_utility_mean: f64,
    pub pf_utility_sd: f64,
    pub system_throughput_mean: f64,
    pub system_throughput_sd: f64,
    pub jfi_mean: f64,
    pub messages_per_slot_mean: f64,
}

/// Groups runs by grid cell, keeping first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(u8, usize, String, String)> = Vec::new();
    let mut groups: BTreeMap<(u8, usize, String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (
            r.point.scenario.id(),
            r.point.num_mts,
            r.point.procedure.to_string(),
            r.point.association.to_string(),
        );
        let g = groups.entry(key.clone()).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let runs = &groups[&key];
            let col = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (pf_utility_mean, pf_utility_sd) = mean_sd(&col(&|r| r.metrics.pf_utility));
            let (system_throughput_mean, system_throughput_sd) =
                mean_sd(&col(&|r| r.metrics.system_throughput));
            let (jfi_mean, _) = mean_sd(&col(&|r| r.metrics.jfi));
            let (messages_per_slot_mean, _) = mean_sd(&col(&|r| {
                let m = r.metrics.counters.messages_per_slot();
                *m.numer() as f64 / *m.denom() as f64
            }));
            SummaryRow {
                scenario: key.0,
                num_mts: key.1,
                procedure: key.2,
                association: key.3,
                replications: runs.len(),
                pf_utility_mean,
                pf_utility_sd,
                system_throughput_mean,
                system_throughput_sd,
                jfi_mean,
                messages_per_slot_mean,
            }
        })
        .collect()
}
