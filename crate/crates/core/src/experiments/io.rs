//! CSV, JSON and plot-data output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::record::TrialRecord;
use super::summary::{CellSummary, Quantiles, SummaryStats};
use super::ExperimentError;

/// First line of every trial CSV. Bump the version when columns change.
pub const CSV_VERSION_LINE: &str = "# isoconst trial records v1";

pub const CSV_COLUMNS: [&str; 18] = [
    "n",
    "N",
    "distribution",
    "trial_index",
    "derived_seed",
    "degenerate_K",
    "degenerate_T",
    "facet_count_K",
    "facet_count_T",
    "vol_K_nthroot",
    "vol_T_nthroot",
    "msq_K",
    "msq_T",
    "L_K",
    "L_T",
    "inradius_T",
    "max_facet_msq",
    "consistency_ok",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Fields in [`CSV_COLUMNS`] order. Floats use the shortest representation
/// that parses back to the same value.
pub fn csv_row(r: &TrialRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.big_n.to_string(),
        r.distribution.to_string(),
        r.trial_index.to_string(),
        r.derived_seed.to_string(),
        r.degenerate_k.to_string(),
        r.degenerate_t.to_string(),
        opt(r.facet_count_k),
        opt(r.facet_count_t),
        opt(r.vol_k_nthroot),
        opt(r.vol_t_nthroot),
        opt(r.msq_k),
        opt(r.msq_t),
        opt(r.l_k),
        opt(r.l_t),
        opt(r.inradius_t),
        opt(r.max_facet_msq),
        opt(r.consistency_ok),
    ]
}

pub fn write_records_csv<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<(), ExperimentError> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Plot series: one file per diagnostic ratio.
pub const PLOT_SERIES: [(&str, fn(&CellSummary) -> Option<Quantiles>); 5] = [
    ("r1_t", |c| c.ratios.r1_t),
    ("r1_k", |c| c.ratios.r1_k),
    ("r2", |c| c.ratios.r2),
    ("r3", |c| c.ratios.r3),
    ("r4", |c| c.ratios.r4),
];

/// Columns `n, N, median, q10, q90`.
pub fn plot_csv(summary: &SummaryStats, series: fn(&CellSummary) -> Option<Quantiles>) -> String {
    let mut s = String::from("n,N,median,q10,q90\n");
    for c in &summary.cells {
        if let Some(q) = series(c) {
            s.push_str(&format!("{},{},{},{},{}\n", c.n, c.big_n, q.median, q.q10, q.q90));
        }
    }
    s
}

/// Writes `trials.csv`, `summary.json` and `plot_<ratio>.csv` into `dir`.
pub fn write_outputs(dir: &Path, records: &[TrialRecord], summary: &SummaryStats) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("trials.csv");
    write_records_csv(fs::File::create(&csv_path)?, records)?;
    written.push(csv_path);
    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(summary)? + "\n")?;
    written.push(json_path);
    for (name, series) in PLOT_SERIES {
        let p = dir.join(format!("plot_{name}.csv"));
        fs::write(&p, plot_csv(summary, series))?;
        written.push(p);
    }
    Ok(written)
}

/// Wall-clock times per trial, kept apart from the reproducible outputs.
pub fn write_timing(path: &Path, records: &[TrialRecord]) -> Result<(), ExperimentError> {
    let rows: Vec<serde_json::Value> = records
        .iter()
        .map(|r| serde_json::json!({"n": r.n, "N": r.big_n, "trial_index": r.trial_index, "wall_time": r.wall_time}))
        .collect();
    fs::write(path, serde_json::to_string_pretty(&rows)? + "\n")?;
    Ok(())
}
