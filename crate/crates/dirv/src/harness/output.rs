//! Result emission: per-checkpoint CSV rows, per-run files, and aggregation
//! across repeats.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const RESULT_HEADER: &str = "repeat,impressions,e_bin,total_variance,policy,seed";
pub const AGGREGATE_HEADER: &str =
    "impressions,mean_e_bin,std_e_bin,mean_total_variance,std_total_variance,repeats,policy,seed";

/// One evaluation point within one repeat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointRow {
    pub repeat: u64,
    pub impressions: u64,
    /// Fraction of ranking pairs whose estimated preference sign disagrees
    /// with the ground truth.
    pub e_bin: f64,
    /// Total estimated variance across the input rankings' estimates.
    pub total_variance: f64,
}

/// Every checkpoint of every repeat of one experiment run.
#[derive(Debug, Clone)]
pub struct RunSeries {
    pub policy: String,
    pub seed: u64,
    pub rows: Vec<CheckpointRow>,
    pub warnings: Vec<String>,
}

impl RunSeries {
    /// Rows of one repeat, in impression order.
    pub fn repeat_rows(&self, repeat: u64) -> impl Iterator<Item = &CheckpointRow> {
        self.rows.iter().filter(move |r| r.repeat == repeat)
    }

    pub fn repeats(&self) -> u64 {
        self.rows.iter().map(|r| r.repeat + 1).max().unwrap_or(0)
    }
}

/// Mean and spread of the checkpoint metrics at one impression count,
/// across repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub impressions: u64,
    pub mean_e_bin: f64,
    pub std_e_bin: f64,
    pub mean_total_variance: f64,
    pub std_total_variance: f64,
    pub repeats: u64,
}

/// Groups checkpoint rows by impression count and averages across repeats.
pub fn aggregate(rows: &[CheckpointRow]) -> Vec<AggregateRow> {
    let mut by_impressions: std::collections::BTreeMap<u64, Vec<&CheckpointRow>> =
        std::collections::BTreeMap::new();
    for row in rows {
        by_impressions.entry(row.impressions).or_default().push(row);
    }
    by_impressions
        .into_iter()
        .map(|(impressions, group)| {
            let (mean_e, std_e) = mean_std(group.iter().map(|r| r.e_bin));
            let (mean_v, std_v) = mean_std(group.iter().map(|r| r.total_variance));
            AggregateRow {
                impressions,
                mean_e_bin: mean_e,
                std_e_bin: std_e,
                mean_total_variance: mean_v,
                std_total_variance: std_v,
                repeats: group.len() as u64,
            }
        })
        .collect()
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn run_file_name(policy: &str, seed: u64) -> String {
    format!("{policy}_seed{seed}.csv")
}

/// Writes the per-checkpoint rows of a run to
/// `<out>/<policy>_seed<seed>.csv` and returns the path. Output is
/// byte-stable: same series, same bytes.
pub fn emit_results(series: &RunSeries, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(run_file_name(&series.policy, series.seed));
    let mut content = String::from(RESULT_HEADER);
    content.push('\n');
    for row in &series.rows {
        content.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.repeat, row.impressions, row.e_bin, row.total_variance, series.policy, series.seed
        ));
    }
    fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the across-repeat aggregate of a run to
/// `<out>/<policy>_seed<seed>_aggregate.csv` and returns the path.
pub fn emit_aggregate(series: &RunSeries, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("{}_seed{}_aggregate.csv", series.policy, series.seed));
    let mut content = String::from(AGGREGATE_HEADER);
    content.push('\n');
    for row in aggregate(&series.rows) {
        content.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.impressions,
            row.mean_e_bin,
            row.std_e_bin,
            row.mean_total_variance,
            row.std_total_variance,
            row.repeats,
            series.policy,
            series.seed
        ));
    }
    fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a per-run results CSV back into a series (the inverse of
/// [`emit_results`]).
pub fn load_results_csv(path: &Path) -> Result<RunSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == RESULT_HEADER => {}
        _ => {
            return Err(Error::data(
                path,
                format!("expected results header {RESULT_HEADER:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    let mut policy: Option<String> = None;
    let mut seed: Option<u64> = None;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::data(
                path,
                format!("line {}: expected 6 columns, got {}", lineno + 2, fields.len()),
            ));
        }
        let bad = |what: &str| Error::data(path, format!("line {}: bad {what}", lineno + 2));
        rows.push(CheckpointRow {
            repeat: fields[0].parse().map_err(|_| bad("repeat"))?,
            impressions: fields[1].parse().map_err(|_| bad("impressions"))?,
            e_bin: fields[2].parse().map_err(|_| bad("e_bin"))?,
            total_variance: fields[3].parse().map_err(|_| bad("total_variance"))?,
        });
        let row_policy = fields[4].to_string();
        let row_seed: u64 = fields[5].parse().map_err(|_| bad("seed"))?;
        if *policy.get_or_insert_with(|| row_policy.clone()) != row_policy {
            return Err(Error::data(path, "mixed policies in one results file"));
        }
        if *seed.get_or_insert(row_seed) != row_seed {
            return Err(Error::data(path, "mixed seeds in one results file"));
        }
    }
    if rows.is_empty() {
        return Err(Error::data(path, "no result rows"));
    }
    Ok(RunSeries {
        policy: policy.unwrap(),
        seed: seed.unwrap(),
        rows,
        warnings: Vec::new(),
    })
}

/// Summary of one aggregated results file.
#[derive(Debug, Clone)]
pub struct ReportEntry {
    pub file: PathBuf,
    pub aggregate_file: PathBuf,
    pub policy: String,
    pub seed: u64,
    pub repeats: u64,
    pub final_impressions: u64,
    pub final_mean_e_bin: f64,
    pub final_mean_total_variance: f64,
}

/// Aggregates every per-run results CSV in `dir` (writing the
/// `_aggregate.csv` next to each) and returns one summary entry per file,
/// in file-name order. Files that are not per-run results are skipped.
pub fn report_dir(dir: &Path) -> Result<Vec<ReportEntry>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "csv")
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().ends_with("_aggregate.csv"))
        })
        .collect();
    names.sort();

    let mut entries = Vec::new();
    for path in names {
        let series = match load_results_csv(&path) {
            Ok(series) => series,
            Err(Error::Data { .. }) => continue, // not a results file
            Err(e) => return Err(e),
        };
        let aggregate_file = emit_aggregate(&series, dir)?;
        let aggregated = aggregate(&series.rows);
        let last = aggregated.last().expect("non-empty series");
        entries.push(ReportEntry {
            file: path,
            aggregate_file,
            policy: series.policy.clone(),
            seed: series.seed,
            repeats: series.repeats(),
            final_impressions: last.impressions,
            final_mean_e_bin: last.mean_e_bin,
            final_mean_total_variance: last.mean_total_variance,
        });
    }
    Ok(entries)
}
