use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::campaign::{RunRecord, RunRow};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV line of a run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema_version: u32,
    pub run_id: String,
    pub n: usize,
    /// Coordinates joined by `;`.
    pub x: String,
    pub y: f64,
    pub f_true: f64,
    pub violated: u8,
    pub score: f64,
    pub coverage_pct: f64,
    pub true_safe_coverage_pct: f64,
    pub info_gain_sum: f64,
    pub regret: Option<f64>,
    pub wall_ms: f64,
}

impl CsvRow {
    pub fn new(run_id: &str, r: &RunRow) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            run_id: run_id.to_string(),
            n: r.n,
            x: r.x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
            y: r.y,
            f_true: r.f_true,
            violated: r.violated as u8,
            score: r.score,
            coverage_pct: r.coverage_pct,
            true_safe_coverage_pct: r.true_safe_coverage_pct,
            info_gain_sum: r.info_gain_sum,
            regret: r.regret,
            wall_ms: r.wall_ms,
        }
    }

    pub fn to_run_row(&self) -> Result<RunRow> {
        let x = self
            .x
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::invalid(format!("bad coordinate '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunRow {
            n: self.n,
            x,
            y: self.y,
            f_true: self.f_true,
            violated: self.violated != 0,
            score: self.score,
            coverage_pct: self.coverage_pct,
            true_safe_coverage_pct: self.true_safe_coverage_pct,
            info_gain_sum: self.info_gain_sum,
            regret: self.regret,
            wall_ms: self.wall_ms,
        })
    }
}

pub fn write_run<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if record.rows.is_empty() {
        w.write_record([
            "schema_version",
            "run_id",
            "n",
            "x",
            "y",
            "f_true",
            "violated",
            "score",
            "coverage_pct",
            "true_safe_coverage_pct",
            "info_gain_sum",
            "regret",
            "wall_ms",
        ])?;
    }
    for r in &record.rows {
        w.serialize(CsvRow::new(&record.run_id, r))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a run file grouped by run id, in order of first appearance.
pub fn read_runs<R: Read>(input: R) -> Result<Vec<(String, Vec<RunRow>)>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut runs: Vec<(String, Vec<RunRow>)> = Vec::new();
    for row in rd.deserialize::<CsvRow>() {
        let row = row?;
        if row.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                row.schema_version
            )));
        }
        let parsed = row.to_run_row()?;
        match runs.last_mut() {
            Some((id, rows)) if *id == row.run_id => rows.push(parsed),
            _ => runs.push((row.run_id, vec![parsed])),
        }
    }
    Ok(runs)
}

/// Method part of a run id (`method/seed../rep..`).
pub fn method_of(run_id: &str) -> &str {
    run_id.split('/').next().unwrap_or(run_id)
}

/// Sample statistics of one metric at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub metric: String,
    pub n: usize,
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
}

impl SummaryRow {
    fn from_values(method: &str, metric: &str, n: usize, values: &[f64]) -> Self {
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stddev = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            method: method.to_string(),
            metric: metric.to_string(),
            n,
            count,
            mean,
            stddev,
            stderr: stddev / (count as f64).sqrt(),
        }
    }
}

/// Per-method mean, standard deviation and standard error of the coverage
/// curves, cumulative violation percentage, regret curve and final violation
/// percentage. Runs are `(run_id, rows)`.
pub fn aggregate(runs: &[(String, Vec<RunRow>)]) -> Vec<SummaryRow> {
    // (method, metric, n) -> values
    let mut acc: BTreeMap<(String, &'static str, usize), Vec<f64>> = BTreeMap::new();
    for (id, rows) in runs {
        let method = method_of(id).to_string();
        let mut push = |metric: &'static str, n: usize, v: f64| {
            acc.entry((method.clone(), metric, n)).or_default().push(v);
        };
        let mut violations = 0usize;
        for r in rows {
            violations += r.violated as usize;
            push("coverage_pct", r.n, r.coverage_pct);
            push("true_safe_coverage_pct", r.n, r.true_safe_coverage_pct);
            push("violation_pct", r.n, 100.0 * violations as f64 / r.n.max(1) as f64);
            push("info_gain_sum", r.n, r.info_gain_sum);
            if let Some(reg) = r.regret {
                push("regret", r.n, reg);
            }
        }
        if let Some(last) = rows.last() {
            push("final_violation_pct", last.n, 100.0 * violations as f64 / rows.len() as f64);
        }
    }
    acc.into_iter()
        .map(|((method, metric, n), values)| SummaryRow::from_values(&method, metric, n, &values))
        .collect()
}

pub fn records_as_runs(records: &[RunRecord]) -> Vec<(String, Vec<RunRow>)> {
    records.iter().map(|r| (r.run_id.clone(), r.rows.clone())).collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Look up a summary entry.
pub fn find<'a>(rows: &'a [SummaryRow], method: &str, metric: &str, n: usize) -> Option<&'a SummaryRow> {
    rows.iter()
        .find(|r| r.method == method && r.metric == metric && r.n == n)
}
