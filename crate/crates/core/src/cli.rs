//! Compile / sweep / compare drivers and the command-line front end.
//!
//! Library callers use [`run_compile`] and [`run_sweep`] directly; the
//! `qccd` binary only calls [`main`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::architecture::{DeviceSpec, DeviceState, TimingModel, Topology};
use crate::benchgen::{BenchmarkSpec, Family};
use crate::circuit::{compute_slices, parse_circuit, Circuit};
use crate::placement::{place, Strategy};
use crate::report::{self, EmitOptions, Format, RunRecord};
use crate::scheduler::{schedule, verify_schedule, Schedule, ScheduleOptions};
use crate::Error;

/// Everything about one compilation besides the circuit and device.
#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub benchmark: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub lookahead: Option<usize>,
    pub sweep_param: Option<usize>,
    pub invocation: String,
}

impl CompileOptions {
    pub fn new(benchmark: impl Into<String>, strategy: Strategy) -> Self {
        CompileOptions { benchmark: benchmark.into(), strategy, seed: 0, lookahead: None, sweep_param: None, invocation: String::new() }
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub record: RunRecord,
    pub schedule: Schedule,
    pub initial: DeviceState,
}

/// Place, schedule and verify. A record is only produced for schedules
/// that pass verification.
pub fn run_compile(circuit: &Circuit, device: &DeviceSpec, opts: &CompileOptions) -> Result<Compiled, Error> {
    let clock = Instant::now();
    let placement = place(opts.strategy, circuit, device, opts.seed)?;
    let initial = placement.to_state(device)?;
    let schedule = schedule(circuit, &initial, &device.timing, ScheduleOptions { lookahead: opts.lookahead })?;
    verify_schedule(circuit, &initial, &device.timing, &schedule.ops)?;
    let record = RunRecord {
        benchmark: opts.benchmark.clone(),
        strategy: opts.strategy.to_string(),
        device: device.clone(),
        seed: opts.seed,
        metrics: schedule.metrics.clone(),
        wall_clock: clock.elapsed().as_secs_f64(),
        sweep_param: opts.sweep_param,
        warning: String::new(),
        invocation: opts.invocation.clone(),
    };
    Ok(Compiled { record, schedule, initial })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// Fixed ions per trap, growing trap count.
    Strong,
    /// Fixed total ions spread over more traps.
    Weak,
    /// Fixed trap count, growing excess capacity.
    ExcessFixedIons,
    /// Fixed trap capacity, growing excess and hence trap count.
    ExcessVarIons,
}

/// A family of device configurations to compile one benchmark family on.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub family: Family,
    pub topology: Topology,
    pub timing: TimingModel,
    pub strategies: Vec<Strategy>,
    /// Seeds used for seeded benchmarks and random placement; other
    /// combinations run once with the first seed.
    pub seeds: Vec<u64>,
    pub lookahead: Option<usize>,
    /// Logical qubit override (weak and excess sweeps default to 128 and 64).
    pub qubits: Option<usize>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, family: Family) -> Self {
        SweepSpec {
            kind,
            family,
            topology: Topology::Linear,
            timing: TimingModel::default(),
            strategies: vec![Strategy::Sta],
            seeds: vec![0],
            lookahead: None,
            qubits: None,
        }
    }

    /// Sweep coordinates with their devices and requested qubit counts, in
    /// ascending parameter order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let dev = |traps: usize, cap: usize, excess: usize| DeviceSpec::new(self.topology, traps, cap, excess).with_timing(self.timing);
        match self.kind {
            SweepKind::Strong => (2..=14)
                .map(|t| SweepPoint { param: t, device: dev(t, 17, 2), qubits: self.qubits.unwrap_or(t * 15) })
                .collect(),
            SweepKind::Weak => (2..=26)
                .map(|t| SweepPoint { param: t, device: dev(t, 180usize.div_ceil(t), 2), qubits: self.qubits.unwrap_or(128) })
                .collect(),
            SweepKind::ExcessFixedIons => (1..=10)
                .map(|e| SweepPoint { param: e, device: dev(5, 14 + e, e), qubits: self.qubits.unwrap_or(64) })
                .collect(),
            SweepKind::ExcessVarIons => {
                let n = self.qubits.unwrap_or(64);
                (1..=10)
                    .map(|e| SweepPoint { param: e, device: dev(n.div_ceil(14 - e).max(1), 14, e), qubits: n })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Trap count (strong/weak) or excess capacity (excess sweeps).
    pub param: usize,
    pub device: DeviceSpec,
    pub qubits: usize,
}

/// Compiles every sweep point, in parallel. Output is sorted by (parameter,
/// strategy, seed) regardless of execution order; infeasible points yield
/// warning records instead of failing the sweep.
pub fn run_sweep(spec: &SweepSpec, invocation: &str) -> Vec<RunRecord> {
    struct Job {
        point: SweepPoint,
        strategy: Strategy,
        seed: u64,
    }
    let mut jobs = Vec::new();
    for point in spec.points() {
        for &strategy in &spec.strategies {
            let seeded = spec.family.is_seeded() || strategy == Strategy::Random;
            let seeds = if seeded { &spec.seeds[..] } else { &spec.seeds[..spec.seeds.len().min(1)] };
            for &seed in seeds {
                jobs.push(Job { point: point.clone(), strategy, seed });
            }
        }
    }
    jobs.par_iter()
        .map(|job| {
            let p = &job.point;
            let bench_for = |n: usize| BenchmarkSpec::new(spec.family, n).with_seed(job.seed);
            let warn = |label: String, msg: String| {
                RunRecord::warning(&label, job.strategy.name(), p.device.clone(), Some(p.param), msg, invocation)
            };
            let Some(n) = spec.family.fit_qubits(p.qubits) else {
                return warn(format!("{}-{}", spec.family, p.qubits), format!("{} qubits is too small for {}", p.qubits, spec.family));
            };
            let bench = bench_for(n);
            if n > p.device.total_physical() {
                return warn(bench.label(), format!("{n} qubits exceed {} physical slots", p.device.total_physical()));
            }
            let result = bench.generate().map_err(Error::from).and_then(|c| {
                let opts = CompileOptions {
                    benchmark: bench.label(),
                    strategy: job.strategy,
                    seed: job.seed,
                    lookahead: spec.lookahead,
                    sweep_param: Some(p.param),
                    invocation: invocation.to_string(),
                };
                run_compile(&c, &p.device, &opts)
            });
            match result {
                Ok(c) => c.record,
                Err(e) => warn(bench.label(), e.to_string()),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// command line

#[derive(Debug, Parser)]
#[command(name = "qccd", version, about = "Qubit allocation, routing and scheduling for trapped-ion QCCD devices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a circuit file (native text or OpenQASM 2) onto a device.
    Compile(CompileArgs),
    /// Benchmark circuit generation.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Device-size sweeps.
    Sweep(SweepArgs),
    /// Compare two placement strategies across result CSV files.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Write a benchmark circuit in the native text format.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DeviceArgs {
    /// Device description (TOML); overrides the inline flags below.
    #[arg(long)]
    pub device: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub traps: usize,
    #[arg(long, default_value_t = 17)]
    pub capacity: usize,
    #[arg(long, default_value_t = 2)]
    pub excess: usize,
    #[arg(long, default_value = "linear")]
    pub topology: Topology,
}

impl DeviceArgs {
    pub fn resolve(&self) -> Result<DeviceSpec, Error> {
        let spec = match &self.device {
            Some(path) => DeviceSpec::from_file(path)?,
            None => DeviceSpec::new(self.topology, self.traps, self.capacity, self.excess),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for result files; results go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: FormatArg,
    /// Add compilation wall-clock seconds (makes output non-reproducible).
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Placement strategies (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "sta")]
    pub placement: Vec<Strategy>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds for random placement / seeded benchmarks.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    /// Limit mover scoring to the next k two-qubit gates per operand.
    #[arg(long)]
    pub lookahead: Option<usize>,
}

impl RunArgs {
    fn seeds(&self) -> Vec<u64> {
        (0..self.runs.max(1)).map(|i| self.seed + i).collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompileArgs {
    /// Circuit file; use `--bench` instead to generate one.
    pub circuit: Option<PathBuf>,
    /// Generated benchmark as `family:qubits`, e.g. `qft:64`.
    #[arg(long, conflicts_with = "circuit")]
    pub bench: Option<String>,
    #[command(flatten)]
    pub device: DeviceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub qubits: usize,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub gates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepWhich {
    Strong,
    Weak,
    Excess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExcessRegime {
    /// 5 traps, capacity grows with the excess.
    FixedIons,
    /// Capacity 14, trap count grows with the excess.
    VarIons,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub kind: SweepWhich,
    #[arg(long, default_value = "excess-fixed")]
    #[arg(value_parser = ["fixed-ions", "var-ions", "excess-fixed", "excess-var"])]
    pub regime: String,
    #[arg(long, default_value = "qft")]
    pub family: Family,
    /// Logical qubit override.
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long, default_value = "linear")]
    pub topology: Topology,
    /// Device file whose topology and timing model replace the defaults.
    #[arg(long)]
    pub device: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Result CSV files produced by `compile` or `sweep`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "greedy")]
    pub baseline: Strategy,
    #[arg(long, default_value = "sta")]
    pub candidate: Strategy,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: FormatArg,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `text` to `dir/name` or stdout.
fn deliver(dir: Option<&Path>, name: &str, text: &str) -> Result<(), Error> {
    match dir {
        Some(d) => write(&d.join(name), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_bench(s: &str) -> Result<BenchmarkSpec, Error> {
    let (family, n) = s.split_once(':').ok_or_else(|| Error::Usage(format!("--bench expects family:qubits, got '{s}'")))?;
    let n = n.parse().map_err(|_| Error::Usage(format!("bad qubit count in '{s}'")))?;
    Ok(BenchmarkSpec::new(family.parse()?, n))
}

fn cmd_compile(args: &CompileArgs, invocation: &str) -> Result<(), Error> {
    let device = args.device.resolve()?;
    let seeds = args.run.seeds();
    // (label, per-seed circuits)
    let (label, circuits): (String, Vec<(u64, Circuit)>) = match (&args.circuit, &args.bench) {
        (Some(path), _) => {
            let c = parse_circuit(&read(path)?)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "circuit".into());
            (stem, vec![(seeds[0], c)])
        }
        (None, Some(b)) => {
            let spec = parse_bench(b)?;
            let list = if spec.family.is_seeded() { seeds.clone() } else { vec![seeds[0]] };
            let circuits = list.iter().map(|&s| Ok((s, spec.clone().with_seed(s).generate()?))).collect::<Result<_, Error>>()?;
            (spec.label(), circuits)
        }
        (None, None) => return Err(Error::Usage("give a circuit file or --bench family:qubits".into())),
    };

    let mut records = Vec::new();
    for &strategy in &args.run.placement {
        for (circuit_seed, c) in &circuits {
            let run_seeds: Vec<u64> = if strategy == Strategy::Random && circuits.len() == 1 { seeds.clone() } else { vec![*circuit_seed] };
            for seed in run_seeds {
                let opts = CompileOptions {
                    benchmark: label.clone(),
                    strategy,
                    seed,
                    lookahead: args.run.lookahead,
                    sweep_param: None,
                    invocation: invocation.to_string(),
                };
                let out = run_compile(c, &device, &opts)?;
                if let Some(dir) = &args.output.out {
                    let stem = format!("{label}.{strategy}.s{seed}");
                    write(&dir.join(format!("{stem}.schedule.tsv")), &out.schedule.to_tsv())?;
                    write(&dir.join(format!("{stem}.metrics.txt")), &out.schedule.metrics_text())?;
                }
                records.push(out.record);
            }
        }
    }
    emit_records(&records, &args.output, &format!("{label}.runs"))
}

fn emit_records(records: &[RunRecord], out: &OutputArgs, stem: &str) -> Result<(), Error> {
    let format = Format::from(out.format);
    let opts = EmitOptions { include_wall_clock: out.wall_clock, summaries: true };
    let text = report::emit(records, format, opts)?;
    deliver(out.out.as_deref(), &format!("{stem}.{}", format.extension()), &text)
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let spec = BenchmarkSpec { family: args.family, n_qubits: args.qubits, rounds: args.rounds, gates: args.gates, seed: args.seed };
    let c = spec.generate()?;
    let text = c.to_text();
    match &args.output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{}: {} qubits, {} two-qubit gates, {} slices", spec.id(), c.n_qubits(), c.two_qubit_count(), compute_slices(&c).len());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, invocation: &str) -> Result<(), Error> {
    let kind = match (args.kind, args.regime.as_str()) {
        (SweepWhich::Strong, _) => SweepKind::Strong,
        (SweepWhich::Weak, _) => SweepKind::Weak,
        (SweepWhich::Excess, "var-ions" | "excess-var") => SweepKind::ExcessVarIons,
        (SweepWhich::Excess, _) => SweepKind::ExcessFixedIons,
    };
    let mut spec = SweepSpec::new(kind, args.family);
    spec.topology = args.topology;
    if let Some(path) = &args.device {
        let d = DeviceSpec::from_file(path)?;
        spec.topology = d.topology;
        spec.timing = d.timing;
    }
    spec.strategies = args.run.placement.clone();
    spec.seeds = args.run.seeds();
    spec.lookahead = args.run.lookahead;
    spec.qubits = args.qubits;
    let records = run_sweep(&spec, invocation);
    for w in records.iter().filter(|r| r.is_warning()) {
        eprintln!("warning: {} on {}: {}", w.benchmark, w.device.summary(), w.warning);
    }
    let name = format!("sweep-{}-{}", format!("{kind:?}").to_lowercase(), args.family);
    emit_records(&records, &args.output, &name)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Error> {
    let mut records = Vec::new();
    for path in &args.inputs {
        records.extend(report::read_csv(&read(path)?)?);
    }
    let rows = report::compare(&records, args.baseline.name(), args.candidate.name())?;
    let format = Format::from(args.format);
    let text = report::emit_comparison(&rows, format)?;
    let name = format!("compare-{}-vs-{}.{}", args.candidate, args.baseline, format.extension());
    deliver(args.out.as_deref(), &name, &text)
}

/// Runs a parsed command line. `invocation` is embedded in every record.
pub fn run(cli: &Cli, invocation: &str) -> Result<(), Error> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a, invocation),
        Command::Bench { command: BenchCommand::Gen(a) } => cmd_gen(a),
        Command::Sweep(a) => cmd_sweep(a, invocation),
        Command::Compare(a) => cmd_compare(a),
    }
}

/// Entry point of the `qccd` binary; returns the process exit status.
pub fn main() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let invocation = std::iter::once("qccd").chain(args.iter().skip(1).map(String::as_str)).collect::<Vec<_>>().join(" ");
    match run(&cli, &invocation) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn compile_walkthrough_counts_one_swap_one_shuttle() {
        // the walkthrough placement is hand-made, so schedule it directly
        let (c, placement, spec) = samples::mapping_walkthrough();
        let init = placement.to_state(&spec).unwrap();
        let s = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
        assert_eq!((s.metrics.shuttles, s.metrics.swaps), (1, 1));
    }

    #[test]
    fn single_trap_never_moves() {
        let c = BenchmarkSpec::new(Family::Qft, 10).generate().unwrap();
        let spec = DeviceSpec::linear(1, 12, 2);
        for strategy in Strategy::ALL {
            let out = run_compile(&c, &spec, &CompileOptions::new("qft-10", strategy)).unwrap();
            assert_eq!(out.record.metrics.moves(), 0);
        }
    }

    #[test]
    fn sweep_points() {
        let weak = SweepSpec::new(SweepKind::Weak, Family::Qft).points();
        assert_eq!(weak.len(), 25);
        assert_eq!(weak[0].device.capacity, 90);
        assert_eq!(weak.last().unwrap().device.capacity, 7);
        assert!(weak.iter().all(|p| p.qubits == 128 && p.device.n_traps * p.device.capacity >= 180));
        let strong = SweepSpec::new(SweepKind::Strong, Family::Ca).points();
        assert_eq!(strong.len(), 13);
        assert_eq!((strong[0].qubits, strong[0].device.capacity), (30, 17));
        let fixed = SweepSpec::new(SweepKind::ExcessFixedIons, Family::Qft).points();
        assert_eq!(fixed.len(), 10);
        assert!(fixed.iter().all(|p| p.device.n_traps == 5 && p.device.usable_capacity() == 14));
        let var = SweepSpec::new(SweepKind::ExcessVarIons, Family::Qft).points();
        assert_eq!(var[0].device.n_traps, 5);
        assert_eq!(var[9].device.n_traps, 16);
    }

    #[test]
    fn infeasible_points_become_warnings() {
        let mut spec = SweepSpec::new(SweepKind::ExcessFixedIons, Family::Qft);
        spec.qubits = Some(90);
        let recs = run_sweep(&spec, "test");
        assert_eq!(recs.len(), 10);
        // 5 traps of 14 + e slots hold 90 ions only from e = 4 on, and at
        // e = 4 no slot is left to move through
        assert!(recs[..3].iter().all(|r| r.warning.contains("exceed")));
        assert!(recs[3].warning.contains("no eviction target"), "{}", recs[3].warning);
        assert!(recs[4..].iter().all(|r| !r.is_warning()));
    }

    #[test]
    fn cli_parses_spec_flags() {
        let cli = Cli::try_parse_from([
            "qccd", "compile", "x.qasm", "--placement", "sta,greedy", "--seed", "3", "--lookahead", "4", "--device", "d.toml", "--out", "o",
            "--format", "json",
        ])
        .unwrap();
        let Command::Compile(a) = cli.command else { panic!() };
        assert_eq!(a.run.placement, vec![Strategy::Sta, Strategy::Greedy]);
        assert_eq!(a.run.lookahead, Some(4));
        assert_eq!(a.output.format, FormatArg::Json);
        assert!(Cli::try_parse_from(["qccd", "sweep", "excess", "--regime", "var-ions"]).is_ok());
        assert!(Cli::try_parse_from(["qccd", "bench", "gen", "--family", "qv", "--qubits", "8", "--seed", "1", "-o", "f"]).is_ok());
        assert!(Cli::try_parse_from(["qccd", "compare", "a.csv", "--baseline", "random"]).is_ok());
    }
}
