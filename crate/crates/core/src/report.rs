//! Run records, multi-seed aggregation, placement comparisons and CSV/JSON
//! emission.
//!
//! Emission is byte-stable: columns are fixed, floats use fixed precision
//! and compilation wall-clock time is left out unless explicitly requested.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::DeviceSpec;
use crate::scheduler::Metrics;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no {candidate} record matches {baseline} on {benchmark} / {device}")]
    Unmatched { benchmark: String, device: String, baseline: String, candidate: String },
    #[error("no {0} records to compare")]
    NoBaseline(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown output format '{0}' (expected csv or json)")]
    Format(String),
    #[error("bad value '{value}' in column {column}")]
    Value { column: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ReportError::Format(s.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Outcome of one compilation (or one skipped sweep point).
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Benchmark label without the seed, e.g. `qft-64` or `rnd-64-g991`.
    pub benchmark: String,
    pub strategy: String,
    pub device: DeviceSpec,
    pub seed: u64,
    pub metrics: Metrics,
    /// Compilation wall-clock seconds; not emitted by default.
    pub wall_clock: f64,
    /// Sweep coordinate this run belongs to, if any.
    pub sweep_param: Option<usize>,
    /// Non-empty for skipped points.
    pub warning: String,
    /// Command line (flags and seeds) that produced the record.
    pub invocation: String,
}

impl RunRecord {
    pub fn is_warning(&self) -> bool {
        !self.warning.is_empty()
    }

    pub fn warning(benchmark: &str, strategy: &str, device: DeviceSpec, sweep_param: Option<usize>, msg: String, invocation: &str) -> Self {
        RunRecord {
            benchmark: benchmark.to_string(),
            strategy: strategy.to_string(),
            device,
            seed: 0,
            metrics: Metrics::default(),
            wall_clock: 0.0,
            sweep_param,
            warning: msg,
            invocation: invocation.to_string(),
        }
    }
}

/// Sample mean and standard deviation of the numeric metrics of a group of
/// runs that differ only in seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub benchmark: String,
    pub strategy: String,
    pub device: DeviceSpec,
    pub sweep_param: Option<usize>,
    pub runs: usize,
    pub mean: Stats,
    pub stddev: Stats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub shuttles: f64,
    pub swaps: f64,
    pub evictions: f64,
    pub time: f64,
}

impl Stats {
    fn of(m: &Metrics) -> Self {
        Stats { shuttles: m.shuttles as f64, swaps: m.swaps as f64, evictions: m.evictions as f64, time: m.total_time }
    }

    fn fields(&self) -> [f64; 4] {
        [self.shuttles, self.swaps, self.evictions, self.time]
    }

    fn from_fields(f: [f64; 4]) -> Self {
        Stats { shuttles: f[0], swaps: f[1], evictions: f[2], time: f[3] }
    }

    pub fn moves(&self) -> f64 {
        self.shuttles + self.swaps
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

type GroupKey = (Option<usize>, String, String, String);

fn group_key(r: &RunRecord) -> GroupKey {
    (r.sweep_param, r.benchmark.clone(), r.device.summary(), r.strategy.clone())
}

/// One summary per (sweep point, benchmark, device, strategy) group with more
/// than one run, in key order.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_warning()) {
        groups.entry(group_key(r)).or_default().push(r);
    }
    groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|g| {
            let cols: Vec<[f64; 4]> = g.iter().map(|r| Stats::of(&r.metrics).fields()).collect();
            let mut mean = [0.0; 4];
            let mut sd = [0.0; 4];
            for k in 0..4 {
                let xs: Vec<f64> = cols.iter().map(|c| c[k]).collect();
                (mean[k], sd[k]) = mean_stddev(&xs);
            }
            Summary {
                benchmark: g[0].benchmark.clone(),
                strategy: g[0].strategy.clone(),
                device: g[0].device.clone(),
                sweep_param: g[0].sweep_param,
                runs: g.len(),
                mean: Stats::from_fields(mean),
                stddev: Stats::from_fields(sd),
            }
        })
        .collect()
}

/// Emission options.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    pub include_wall_clock: bool,
    /// Append mean/stddev rows for multi-seed groups.
    pub summaries: bool,
}

const COLUMNS: [&str; 19] = [
    "row_kind",
    "benchmark",
    "strategy",
    "device",
    "topology",
    "traps",
    "capacity",
    "excess",
    "sweep_param",
    "qubits",
    "seed",
    "gates_2q",
    "shuttles",
    "swaps",
    "moves",
    "evictions",
    "time_s",
    "warning",
    "invocation",
];

fn fixed(x: f64) -> String {
    format!("{x:.9}")
}

fn device_cells(d: &DeviceSpec) -> [String; 5] {
    [d.summary(), d.topology.to_string(), d.n_traps.to_string(), d.capacity.to_string(), d.excess_capacity.to_string()]
}

fn opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn run_row(r: &RunRecord, wall: bool) -> Vec<String> {
    let m = &r.metrics;
    let kind = if r.is_warning() { "warning" } else { "run" };
    let mut row = vec![kind.to_string(), r.benchmark.clone(), r.strategy.clone()];
    row.extend(device_cells(&r.device));
    row.push(opt(r.sweep_param));
    if r.is_warning() {
        row.extend(std::iter::repeat_n(String::new(), 8));
    } else {
        row.extend([
            m.n_qubits.to_string(),
            r.seed.to_string(),
            m.gates_2q.to_string(),
            m.shuttles.to_string(),
            m.swaps.to_string(),
            m.moves().to_string(),
            m.evictions.to_string(),
            fixed(m.total_time),
        ]);
    }
    row.push(r.warning.clone());
    row.push(r.invocation.clone());
    if wall {
        row.push(fixed(r.wall_clock));
    }
    row
}

fn summary_rows(s: &Summary, qubits: usize, invocation: &str, wall: bool) -> [Vec<String>; 2] {
    let make = |kind: &str, st: &Stats| {
        let mut row = vec![kind.to_string(), s.benchmark.clone(), s.strategy.clone()];
        row.extend(device_cells(&s.device));
        row.push(opt(s.sweep_param));
        row.extend([
            qubits.to_string(),
            format!("n={}", s.runs),
            String::new(),
            fixed(st.shuttles),
            fixed(st.swaps),
            fixed(st.moves()),
            fixed(st.evictions),
            fixed(st.time),
            String::new(),
            invocation.to_string(),
        ]);
        if wall {
            row.push(String::new());
        }
        row
    };
    [make("mean", &s.mean), make("stddev", &s.stddev)]
}

fn header(wall: bool) -> Vec<String> {
    let mut h: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
    if wall {
        h.push("wall_clock_s".to_string());
    }
    h
}

fn table(records: &[RunRecord], opts: EmitOptions) -> Vec<Vec<String>> {
    let wall = opts.include_wall_clock;
    let mut rows: Vec<Vec<String>> = records.iter().map(|r| run_row(r, wall)).collect();
    if opts.summaries {
        for s in summarize(records) {
            let first = records
                .iter()
                .find(|r| !r.is_warning() && group_key(r) == (s.sweep_param, s.benchmark.clone(), s.device.summary(), s.strategy.clone()))
                .expect("summary has members");
            rows.extend(summary_rows(&s, first.metrics.n_qubits, &first.invocation, wall));
        }
    }
    rows
}

/// Records as CSV text with a header row.
pub fn to_csv(records: &[RunRecord], opts: EmitOptions) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(opts.include_wall_clock))?;
    for row in table(records, opts) {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Records as a JSON array of objects keyed by column name.
pub fn to_json(records: &[RunRecord], opts: EmitOptions) -> Result<String, ReportError> {
    let h = header(opts.include_wall_clock);
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = table(records, opts)
        .into_iter()
        .map(|row| h.iter().cloned().zip(row.into_iter().map(serde_json::Value::String)).collect())
        .collect();
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}

pub fn emit(records: &[RunRecord], format: Format, opts: EmitOptions) -> Result<String, ReportError> {
    match format {
        Format::Csv => to_csv(records, opts),
        Format::Json => to_json(records, opts),
    }
}

fn parse<T: FromStr>(column: &'static str, value: &str) -> Result<T, ReportError> {
    value.parse().map_err(|_| ReportError::Value { column, value: value.to_string() })
}

/// Reads the `run` rows of a CSV produced by [`to_csv`]; summary and warning
/// rows are skipped.
pub fn read_csv(text: &str) -> Result<Vec<RunRecord>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &'static str| headers.iter().position(|h| h == name).ok_or(ReportError::Value { column: name, value: String::new() });
    let idx: BTreeMap<&'static str, usize> = COLUMNS.iter().map(|&c| col(c).map(|i| (c, i))).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let get = |c: &'static str| row.get(idx[c]).unwrap_or("");
        if get("row_kind") != "run" {
            continue;
        }
        let topology = parse("topology", get("topology"))?;
        let device = DeviceSpec::new(topology, parse("traps", get("traps"))?, parse("capacity", get("capacity"))?, parse("excess", get("excess"))?);
        let sweep_param = match get("sweep_param") {
            "" => None,
            v => Some(parse("sweep_param", v)?),
        };
        out.push(RunRecord {
            benchmark: get("benchmark").to_string(),
            strategy: get("strategy").to_string(),
            device,
            seed: parse("seed", get("seed"))?,
            metrics: Metrics {
                n_qubits: parse("qubits", get("qubits"))?,
                gates_2q: parse("gates_2q", get("gates_2q"))?,
                shuttles: parse("shuttles", get("shuttles"))?,
                swaps: parse("swaps", get("swaps"))?,
                evictions: parse("evictions", get("evictions"))?,
                total_time: parse("time_s", get("time_s"))?,
                ..Metrics::default()
            },
            wall_clock: 0.0,
            sweep_param,
            warning: String::new(),
            invocation: get("invocation").to_string(),
        });
    }
    Ok(out)
}

/// `(baseline - candidate) / baseline * 100`; positive means the candidate
/// is better.
pub fn delta_pct(baseline: f64, candidate: f64) -> f64 {
    if baseline == 0.0 {
        if candidate == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (baseline - candidate) / baseline * 100.0
    }
}

/// One benchmark/device row of a placement comparison. Values are
/// seed-averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub benchmark: String,
    pub device: String,
    pub baseline: String,
    pub candidate: String,
    pub time_baseline: f64,
    pub time_candidate: f64,
    /// Execution-time improvement of the candidate, in percent.
    pub delta_time_pct: f64,
    pub shuttles_baseline: f64,
    pub shuttles_candidate: f64,
    pub delta_shuttles: f64,
    pub swaps_baseline: f64,
    pub swaps_candidate: f64,
    pub delta_swaps: f64,
}

/// Compares `candidate` against `baseline` on every (benchmark, device) the
/// baseline covers, averaging over seeds.
pub fn compare(records: &[RunRecord], baseline: &str, candidate: &str) -> Result<Vec<Comparison>, ReportError> {
    let mut groups: BTreeMap<(String, String), BTreeMap<String, Vec<Stats>>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_warning()) {
        groups
            .entry((r.benchmark.clone(), r.device.summary()))
            .or_default()
            .entry(r.strategy.clone())
            .or_default()
            .push(Stats::of(&r.metrics));
    }
    let avg = |v: &[Stats]| {
        let n = v.len() as f64;
        let mut f = [0.0; 4];
        for s in v {
            for (acc, x) in f.iter_mut().zip(s.fields()) {
                *acc += x;
            }
        }
        Stats::from_fields(f.map(|x| x / n))
    };
    let mut out = Vec::new();
    for ((benchmark, device), by_strategy) in &groups {
        let Some(b) = by_strategy.get(baseline) else { continue };
        let c = by_strategy.get(candidate).ok_or_else(|| ReportError::Unmatched {
            benchmark: benchmark.clone(),
            device: device.clone(),
            baseline: baseline.to_string(),
            candidate: candidate.to_string(),
        })?;
        let (b, c) = (avg(b), avg(c));
        out.push(Comparison {
            benchmark: benchmark.clone(),
            device: device.clone(),
            baseline: baseline.to_string(),
            candidate: candidate.to_string(),
            time_baseline: b.time,
            time_candidate: c.time,
            delta_time_pct: delta_pct(b.time, c.time),
            shuttles_baseline: b.shuttles,
            shuttles_candidate: c.shuttles,
            delta_shuttles: b.shuttles - c.shuttles,
            swaps_baseline: b.swaps,
            swaps_candidate: c.swaps,
            delta_swaps: b.swaps - c.swaps,
        });
    }
    if out.is_empty() {
        return Err(ReportError::NoBaseline(baseline.to_string()));
    }
    Ok(out)
}

const COMPARISON_COLUMNS: [&str; 13] = [
    "benchmark",
    "device",
    "baseline",
    "candidate",
    "time_baseline_s",
    "time_candidate_s",
    "delta_time_pct",
    "shuttles_baseline",
    "shuttles_candidate",
    "delta_shuttles",
    "swaps_baseline",
    "swaps_candidate",
    "delta_swaps",
];

fn comparison_table(rows: &[Comparison]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|c| {
            vec![
                c.benchmark.clone(),
                c.device.clone(),
                c.baseline.clone(),
                c.candidate.clone(),
                fixed(c.time_baseline),
                fixed(c.time_candidate),
                format!("{:.3}", c.delta_time_pct),
                format!("{:.3}", c.shuttles_baseline),
                format!("{:.3}", c.shuttles_candidate),
                format!("{:.3}", c.delta_shuttles),
                format!("{:.3}", c.swaps_baseline),
                format!("{:.3}", c.swaps_candidate),
                format!("{:.3}", c.delta_swaps),
            ]
        })
        .collect()
}

pub fn emit_comparison(rows: &[Comparison], format: Format) -> Result<String, ReportError> {
    let table = comparison_table(rows);
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(COMPARISON_COLUMNS)?;
            for row in table {
                w.write_record(&row)?;
            }
            let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                .into_iter()
                .map(|row| COMPARISON_COLUMNS.iter().map(|c| c.to_string()).zip(row.into_iter().map(serde_json::Value::String)).collect())
                .collect();
            Ok(serde_json::to_string_pretty(&rows)? + "\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(strategy: &str, seed: u64, time: f64, shuttles: usize, swaps: usize) -> RunRecord {
        RunRecord {
            benchmark: "qft-8".into(),
            strategy: strategy.into(),
            device: DeviceSpec::linear(2, 6, 2),
            seed,
            metrics: Metrics { n_qubits: 8, gates_2q: 28, shuttles, swaps, total_time: time, ..Metrics::default() },
            wall_clock: 0.25,
            sweep_param: None,
            warning: String::new(),
            invocation: "qccd compile x".into(),
        }
    }

    #[test]
    fn delta_examples() {
        assert!((delta_pct(0.2, 0.1) - 50.0).abs() < 1e-12);
        assert_eq!(delta_pct(3.0, 3.0), 0.0);
        assert!((delta_pct(5.55, 5.48) - 1.2612612612612).abs() < 1e-9);
        // swapping roles flips the sign
        let (b, c) = (0.7, 0.4);
        assert!(delta_pct(b, c) > 0.0 && delta_pct(c, b) < 0.0);
        assert!((delta_pct(c, b) + delta_pct(b, c) * b / c).abs() < 1e-12);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let csv = to_csv(&[], EmitOptions::default()).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("row_kind,benchmark,strategy,"));
        assert!(!csv.contains("wall_clock"));
    }

    #[test]
    fn one_record_two_lines_and_round_trip() {
        let r = record("sta", 0, 0.001234, 3, 7);
        let csv = to_csv(std::slice::from_ref(&r), EmitOptions::default()).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.contains("0.001234000"));
        let back = read_csv(&csv).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].metrics.shuttles, 3);
        assert_eq!(back[0].device, r.device);
        assert_eq!(back[0].invocation, r.invocation);
    }

    #[test]
    fn wall_clock_only_on_request() {
        let r = [record("sta", 0, 1.0, 0, 0)];
        let with = to_csv(&r, EmitOptions { include_wall_clock: true, summaries: false }).unwrap();
        assert!(with.lines().next().unwrap().ends_with("wall_clock_s"));
        assert!(with.contains("0.250000000"));
    }

    #[test]
    fn twenty_seeds_add_mean_and_stddev() {
        let recs: Vec<RunRecord> = (0..20).map(|s| record("random", s, 1.0 + s as f64 * 0.1, s as usize, 2 * s as usize)).collect();
        let csv = to_csv(&recs, EmitOptions { include_wall_clock: false, summaries: true }).unwrap();
        assert_eq!(csv.lines().count(), 1 + 20 + 2);
        let s = &summarize(&recs)[0];
        let times: Vec<f64> = recs.iter().map(|r| r.metrics.total_time).collect();
        let mean = times.iter().sum::<f64>() / 20.0;
        let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / 19.0;
        assert!((s.mean.time - mean).abs() <= 1e-12 * mean);
        assert!((s.stddev.time - var.sqrt()).abs() <= 1e-12 * var.sqrt());
        assert!((s.mean.shuttles - 9.5).abs() < 1e-12);
        // summary rows are not read back as runs
        assert_eq!(read_csv(&csv).unwrap().len(), 20);
    }

    #[test]
    fn emission_is_stable() {
        let recs: Vec<RunRecord> = (0..3).map(|s| record("random", s, 0.5, 1, 1)).collect();
        let opts = EmitOptions { include_wall_clock: false, summaries: true };
        assert_eq!(to_csv(&recs, opts).unwrap(), to_csv(&recs, opts).unwrap());
        assert_eq!(to_json(&recs, opts).unwrap(), to_json(&recs, opts).unwrap());
        let v: serde_json::Value = serde_json::from_str(&to_json(&recs, opts).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);
    }

    #[test]
    fn compare_averages_seeds_and_requires_matches() {
        let mut recs = vec![record("sta", 0, 0.1, 2, 4)];
        recs.extend((0..4).map(|s| record("random", s, 0.15 + 0.05 * (s % 2) as f64, 10, 20)));
        let cmp = compare(&recs, "random", "sta").unwrap();
        assert_eq!(cmp.len(), 1);
        assert!((cmp[0].time_baseline - 0.175).abs() < 1e-12);
        assert!((cmp[0].delta_time_pct - (0.075 / 0.175 * 100.0)).abs() < 1e-9);
        assert_eq!(cmp[0].delta_shuttles, 8.0);
        assert!(matches!(compare(&recs, "random", "greedy"), Err(ReportError::Unmatched { .. })));
        assert!(matches!(compare(&recs, "greedy", "sta"), Err(ReportError::NoBaseline(_))));
        let csv = emit_comparison(&cmp, Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn warnings_are_emitted_but_not_summarized() {
        let w = RunRecord::warning("qft-300", "sta", DeviceSpec::linear(2, 17, 2), Some(2), "too many qubits".into(), "qccd sweep strong");
        let csv = to_csv(&[w.clone(), w], EmitOptions { include_wall_clock: false, summaries: true }).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("warning,qft-300"));
    }
}
