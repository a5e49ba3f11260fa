//! Trap-serialized discrete-event scheduling and independent verification.
//!
//! Each trap executes at most one operation at a time; operations in
//! different traps overlap freely. A shuttle occupies both of its endpoint
//! traps. Gates are started greedily in circuit order as soon as their
//! dependencies have finished and their traps are idle; a gate whose
//! operands sit in different traps is routed on the spot and runs right
//! after the last movement op.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{DeviceError, DeviceState, PhysOp, TimingModel, TrapId};
use crate::circuit::{dependency_graph, Circuit, Operands, QubitId};
use crate::router::{GateCountPolicy, MoverPolicy, PendingGates, RouteError, Router};

/// Two times closer than this are treated as equal.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("routing failed: {0}")]
    Route(#[from] RouteError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("circuit uses {circuit} qubits but only {placed} are placed")]
    Unplaced { circuit: usize, placed: usize },
    #[error("scheduler stalled at t={now} with {remaining} gates left")]
    Stalled { now: f64, remaining: usize },
}

impl ScheduleError {
    pub fn is_deadlock(&self) -> bool {
        matches!(self, ScheduleError::Route(RouteError::Deadlock { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub op: PhysOp,
    pub start: f64,
    pub end: f64,
    /// Traps reserved for the whole `[start, end)` interval.
    pub traps: Vec<TrapId>,
    pub qubits: Vec<QubitId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_qubits: usize,
    pub gates_1q: usize,
    pub gates_2q: usize,
    /// One per trap-to-trap hop.
    pub shuttles: usize,
    pub swaps: usize,
    /// Ions displaced to make room in a full trap (counted in `shuttles` too).
    pub evictions: usize,
    /// Two-qubit gates that needed movement.
    pub routed_gates: usize,
    /// Makespan in seconds.
    pub total_time: f64,
}

impl Metrics {
    pub fn moves(&self) -> usize {
        self.shuttles + self.swaps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub ops: Vec<ScheduledOp>,
    pub metrics: Metrics,
    pub final_state: DeviceState,
}

impl Schedule {
    /// Tab-separated op listing: `start_us end_us kind qubits traps`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("start_us\tend_us\tkind\tqubits\ttraps\n");
        let mut ops: Vec<&ScheduledOp> = self.ops.iter().collect();
        ops.sort_by(|a, b| a.start.total_cmp(&b.start));
        for o in ops {
            let qs: Vec<String> = o.qubits.iter().map(|q| q.0.to_string()).collect();
            let ts: Vec<String> = o.traps.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(out, "{:.3}\t{:.3}\t{}\t{}\t{}", o.start * 1e6, o.end * 1e6, o.op.kind(), qs.join(","), ts.join(","));
        }
        out
    }

    /// `key = value` lines.
    pub fn metrics_text(&self) -> String {
        let m = &self.metrics;
        format!(
            "n_qubits = {}\ngates_1q = {}\ngates_2q = {}\nshuttles = {}\nswaps = {}\nevictions = {}\nrouted_gates = {}\ntotal_time_s = {:.9}\n",
            m.n_qubits, m.gates_1q, m.gates_2q, m.shuttles, m.swaps, m.evictions, m.routed_gates, m.total_time
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScheduleOptions {
    /// Two-qubit gates per operand considered when choosing the mover.
    pub lookahead: Option<usize>,
}

#[derive(PartialEq)]
struct Event {
    time: f64,
    seq: usize,
    gate: usize,
}

impl Eq for Event {}

impl Ord for Event {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Engine<'a> {
    timing: &'a TimingModel,
    state: DeviceState,
    trap_free: Vec<f64>,
    qubit_free: Vec<f64>,
    ops: Vec<ScheduledOp>,
}

impl Engine<'_> {
    /// Commits `op` no earlier than `not_before`; returns its end time.
    fn commit(&mut self, op: PhysOp, not_before: f64) -> Result<f64, DeviceError> {
        let traps = self.state.traps_of(&op)?;
        let qubits = self.state.qubits_of(&op);
        let start = traps
            .iter()
            .map(|&t| self.trap_free[t])
            .chain(qubits.iter().map(|q| self.qubit_free[q.0]))
            .fold(not_before, f64::max);
        let end = start + self.timing.duration(&op, self.state.host_occupancy(&op));
        self.state.apply(&op)?;
        for &t in &traps {
            self.trap_free[t] = end;
        }
        for q in &qubits {
            self.qubit_free[q.0] = end;
        }
        self.ops.push(ScheduledOp { op, start, end, traps, qubits });
        Ok(end)
    }

    fn idle(&self, t: TrapId, now: f64) -> bool {
        self.trap_free[t] <= now + TIME_EPS
    }
}

/// Schedules `circuit` from the initial ion arrangement `initial` with the
/// default mover policy.
pub fn schedule(circuit: &Circuit, initial: &DeviceState, timing: &TimingModel, opts: ScheduleOptions) -> Result<Schedule, ScheduleError> {
    schedule_with(circuit, initial, timing, opts, &Router::new(GateCountPolicy))
}

pub fn schedule_with<P: MoverPolicy>(
    circuit: &Circuit,
    initial: &DeviceState,
    timing: &TimingModel,
    opts: ScheduleOptions,
    router: &Router<P>,
) -> Result<Schedule, ScheduleError> {
    let n = circuit.n_qubits();
    let placed = (0..n).filter(|&q| initial.trap_of(QubitId(q)).is_some()).count();
    if placed < n {
        return Err(ScheduleError::Unplaced { circuit: n, placed });
    }
    let deps = dependency_graph(circuit);
    let gates = circuit.gates();
    let mut waiting: Vec<usize> = (0..gates.len()).map(|g| deps.predecessors(g).len()).collect();
    let mut ready: BTreeSet<usize> = (0..gates.len()).filter(|&g| waiting[g] == 0).collect();
    let mut pending = PendingGates::new(circuit, opts.lookahead);
    let mut engine = Engine {
        timing,
        state: initial.clone(),
        trap_free: vec![0.0; initial.n_traps()],
        qubit_free: vec![0.0; n],
        ops: Vec::new(),
    };
    let mut metrics = Metrics { n_qubits: n, ..Metrics::default() };
    let mut events = BinaryHeap::new();
    let mut finished = 0;
    let mut now = 0.0_f64;

    while finished < gates.len() {
        let candidates: Vec<usize> = ready.iter().copied().collect();
        for g in candidates {
            let gate = &gates[g];
            let end = match gate.operands {
                Operands::One(q) => {
                    let t = engine.state.trap_of(q).expect("placed qubit");
                    if !engine.idle(t, now) {
                        continue;
                    }
                    metrics.gates_1q += 1;
                    engine.commit(PhysOp::Gate1 { gate: g, qubit: q }, now)?
                }
                Operands::Two(a, b) => {
                    let ta = engine.state.trap_of(a).expect("placed qubit");
                    let tb = engine.state.trap_of(b).expect("placed qubit");
                    if !engine.idle(ta, now) || !engine.idle(tb, now) {
                        continue;
                    }
                    if ta != tb {
                        let routing = router.resolve_gate(gate, &engine.state, &pending)?;
                        metrics.routed_gates += 1;
                        metrics.shuttles += routing.shuttles();
                        metrics.swaps += routing.swaps();
                        metrics.evictions += routing.decision.evictions.len();
                        for op in routing.ops {
                            engine.commit(op, now)?;
                        }
                    }
                    pending.complete(gate);
                    metrics.gates_2q += 1;
                    engine.commit(PhysOp::Gate2 { gate: g, a, b }, now)?
                }
            };
            ready.remove(&g);
            events.push(Event { time: end, seq: g, gate: g });
        }

        let Some(next) = events.peek().map(|e| e.time) else {
            return Err(ScheduleError::Stalled { now, remaining: gates.len() - finished });
        };
        now = now.max(next);
        while events.peek().is_some_and(|e| e.time <= now + TIME_EPS) {
            let done = events.pop().expect("peeked").gate;
            finished += 1;
            for &s in deps.successors(done) {
                waiting[s] -= 1;
                if waiting[s] == 0 {
                    ready.insert(s);
                }
            }
        }
    }

    metrics.total_time = engine.ops.iter().map(|o| o.end).fold(0.0, f64::max);
    Ok(Schedule { ops: engine.ops, metrics, final_state: engine.state })
}

/// A reason a schedule is not a faithful, physically legal execution of a
/// circuit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("op {op} is illegal: {error}")]
    IllegalOp { op: usize, error: DeviceError },
    #[error("op {op} would put trap {trap} above its capacity")]
    CapacityExceeded { op: usize, trap: TrapId },
    #[error("op {op} overlaps another op in trap {trap}")]
    TrapOverlap { op: usize, trap: TrapId },
    #[error("op {op} starts before qubit {qubit} is free")]
    QubitOverlap { op: usize, qubit: QubitId },
    #[error("op {op} lasts {:.3} us, expected {:.3} us", actual * 1e6, expected * 1e6)]
    Duration { op: usize, actual: f64, expected: f64 },
    #[error("op {op} names gate {gate} with the wrong operands")]
    WrongOperands { op: usize, gate: usize },
    #[error("gate {0} is executed more than once")]
    DuplicateGate(usize),
    #[error("gate {0} is never executed")]
    MissingGate(usize),
    #[error("gate {gate} starts before its predecessor {pred} ends")]
    Dependency { gate: usize, pred: usize },
    #[error("the recorded traps or qubits of op {op} do not match the device")]
    Bookkeeping { op: usize },
}

/// Replays `schedule` on `initial` and checks legality, gate coverage,
/// dependencies, trap exclusivity, capacity and op durations.
pub fn verify_schedule(circuit: &Circuit, initial: &DeviceState, timing: &TimingModel, ops: &[ScheduledOp]) -> Result<(), Violation> {
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by(|&a, &b| ops[a].start.total_cmp(&ops[b].start).then(a.cmp(&b)));

    let mut state = initial.clone();
    let mut trap_free = vec![f64::NEG_INFINITY; state.n_traps()];
    let mut qubit_free = vec![f64::NEG_INFINITY; circuit.n_qubits().max(state.n_ions())];
    let mut span: Vec<Option<(f64, f64)>> = vec![None; circuit.len()];

    for &i in &order {
        let o = &ops[i];
        let traps = state.traps_of(&o.op).map_err(|error| Violation::IllegalOp { op: i, error })?;
        let qubits = state.qubits_of(&o.op);
        if traps != o.traps || qubits != o.qubits {
            return Err(Violation::Bookkeeping { op: i });
        }
        let expected = timing.duration(&o.op, state.host_occupancy(&o.op));
        if ((o.end - o.start) - expected).abs() > TIME_EPS * expected.max(1.0) {
            return Err(Violation::Duration { op: i, actual: o.end - o.start, expected });
        }
        match state.apply(&o.op) {
            Ok(()) => {}
            Err(DeviceError::TrapFull { trap, .. }) => return Err(Violation::CapacityExceeded { op: i, trap }),
            Err(error) => return Err(Violation::IllegalOp { op: i, error }),
        }
        for &t in &traps {
            if o.start < trap_free[t] - TIME_EPS {
                return Err(Violation::TrapOverlap { op: i, trap: t });
            }
            trap_free[t] = o.end;
        }
        for &q in &qubits {
            if o.start < qubit_free[q.0] - TIME_EPS {
                return Err(Violation::QubitOverlap { op: i, qubit: q });
            }
            qubit_free[q.0] = o.end;
        }
        if let Some(g) = o.op.gate_index() {
            let gate = circuit.gates().get(g).ok_or(Violation::WrongOperands { op: i, gate: g })?;
            let matches = match (&o.op, gate.operands) {
                (PhysOp::Gate1 { qubit, .. }, Operands::One(q)) => *qubit == q,
                (PhysOp::Gate2 { a, b, .. }, Operands::Two(x, y)) => (*a, *b) == (x, y),
                _ => false,
            };
            if !matches {
                return Err(Violation::WrongOperands { op: i, gate: g });
            }
            if span[g].replace((o.start, o.end)).is_some() {
                return Err(Violation::DuplicateGate(g));
            }
        }
    }

    if let Some(g) = span.iter().position(Option::is_none) {
        return Err(Violation::MissingGate(g));
    }
    let deps = dependency_graph(circuit);
    for (pred, succ) in deps.edges() {
        let (_, pred_end) = span[pred].expect("all gates present");
        let (succ_start, _) = span[succ].expect("all gates present");
        if succ_start < pred_end - TIME_EPS {
            return Err(Violation::Dependency { gate: succ, pred });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architecture::DeviceSpec;
    use crate::placement::{place, Strategy};
    use crate::samples;

    fn run(c: &Circuit, spec: &DeviceSpec, strategy: Strategy) -> (DeviceState, Schedule) {
        let p = place(strategy, c, spec, 7).unwrap();
        let s = p.to_state(spec).unwrap();
        let sched = schedule(c, &s, &spec.timing, ScheduleOptions::default()).unwrap();
        (s, sched)
    }

    #[test]
    fn walkthrough_runs_first_gates_in_parallel() {
        let (c, placement, spec) = samples::mapping_walkthrough();
        let init = placement.to_state(&spec).unwrap();
        let sched = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
        assert_eq!(sched.metrics.shuttles, 1);
        assert_eq!(sched.metrics.swaps, 1);
        let g0 = sched.ops.iter().find(|o| o.op.gate_index() == Some(0)).unwrap();
        let g1 = sched.ops.iter().find(|o| o.op.gate_index() == Some(1)).unwrap();
        assert_eq!(g0.start, 0.0);
        assert_eq!(g1.start, 0.0);
        verify_schedule(&c, &init, &spec.timing, &sched.ops).unwrap();
    }

    #[test]
    fn same_trap_gates_serialize_and_other_traps_overlap() {
        let mut c = Circuit::new(4);
        c.push2("cx", 0, 1).push2("cx", 0, 1).push2("cx", 2, 3);
        let spec = DeviceSpec::linear(2, 2, 0);
        let init = DeviceState::with_chains(&spec, vec![vec![QubitId(0), QubitId(1)], vec![QubitId(2), QubitId(3)]]).unwrap();
        let sched = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
        let d = spec.timing.gate2(2);
        assert!((sched.metrics.total_time - 2.0 * d).abs() < 1e-9);
        assert_eq!(sched.metrics.moves(), 0);
    }

    #[test]
    fn single_trap_has_no_movement_and_sums_durations() {
        let mut c = Circuit::new(3);
        c.push1("h", 0).push2("cx", 0, 1).push2("cx", 1, 2).push1("h", 2);
        let spec = DeviceSpec::linear(1, 3, 0);
        let (init, sched) = run(&c, &spec, Strategy::Sta);
        let t = &spec.timing;
        let expected = 2.0 * t.t_1q + 2.0 * t.gate2(3);
        assert!((sched.metrics.total_time - expected).abs() < 1e-9);
        verify_schedule(&c, &init, t, &sched.ops).unwrap();
    }

    #[test]
    fn metrics_count_ops() {
        let c = samples::allocation_walkthrough();
        let spec = samples::allocation_walkthrough_device();
        let (_, sched) = run(&c, &spec, Strategy::Random);
        let shuttles = sched.ops.iter().filter(|o| matches!(o.op, PhysOp::Shuttle { .. })).count();
        let swaps = sched.ops.iter().filter(|o| matches!(o.op, PhysOp::Swap { .. })).count();
        assert_eq!(sched.metrics.shuttles, shuttles);
        assert_eq!(sched.metrics.swaps, swaps);
        assert_eq!(sched.metrics.gates_2q, 9);
    }

    #[test]
    fn verifier_catches_mutations() {
        let c = samples::allocation_walkthrough();
        let spec = DeviceSpec::linear(3, 3, 1);
        let (init, sched) = run(&c, &spec, Strategy::Random);
        let t = &spec.timing;
        verify_schedule(&c, &init, t, &sched.ops).unwrap();

        // dropping a gate
        let gate_op = sched.ops.iter().position(|o| o.op.gate_index().is_some()).unwrap();
        let mut ops = sched.ops.clone();
        ops.remove(gate_op);
        assert!(verify_schedule(&c, &init, t, &ops).is_err());

        // pulling an op onto its same-trap predecessor
        let mut ops = sched.ops.clone();
        let (i, j) = same_trap_pair(&ops).expect("two ops share a trap");
        let d = ops[j].end - ops[j].start;
        ops[j].start = ops[i].start;
        ops[j].end = ops[i].start + d;
        assert!(verify_schedule(&c, &init, t, &ops).is_err());

        // shuttling into a full trap
        let mut ops = sched.ops.clone();
        let fin = &sched.final_state;
        let full = (0..fin.n_traps()).find(|&x| fin.is_full(x));
        if let Some(full) = full {
            let from = fin.graph().neighbors(full)[0];
            if let Some(&q) = fin.chain(from).last().filter(|_| fin.occupancy(from) > 0) {
                let start = sched.metrics.total_time;
                let op = PhysOp::Shuttle { qubit: q, from, to: full };
                let mut traps = vec![from, full];
                traps.sort();
                ops.push(ScheduledOp { op, start, end: start + t.shuttle(), traps, qubits: vec![q] });
                assert!(verify_schedule(&c, &init, t, &ops).is_err());
            }
        }
    }

    fn same_trap_pair(ops: &[ScheduledOp]) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..ops.len()).collect();
        order.sort_by(|&a, &b| ops[a].start.total_cmp(&ops[b].start));
        for (k, &j) in order.iter().enumerate() {
            for &i in order[..k].iter().rev() {
                if ops[i].traps.iter().any(|t| ops[j].traps.contains(t)) && ops[i].start < ops[j].start {
                    return Some((i, j));
                }
            }
        }
        None
    }

    #[test]
    fn capacity_violation_is_named() {
        let mut c = Circuit::new(3);
        c.push1("h", 0);
        let spec = DeviceSpec::linear(2, 2, 0);
        let init = DeviceState::with_chains(&spec, vec![vec![QubitId(0), QubitId(1)], vec![QubitId(2)]]).unwrap();
        let sched = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
        let mut ops = sched.ops.clone();
        ops.push(ScheduledOp {
            op: PhysOp::Shuttle { qubit: QubitId(2), from: 1, to: 0 },
            start: 100.0,
            end: 100.0 + spec.timing.shuttle(),
            traps: vec![0, 1],
            qubits: vec![QubitId(2)],
        });
        assert_eq!(verify_schedule(&c, &init, &spec.timing, &ops), Err(Violation::CapacityExceeded { op: 1, trap: 0 }));
    }

    #[test]
    fn deadlock_surfaces_as_route_error() {
        let mut c = Circuit::new(4);
        c.push2("cx", 0, 2);
        let spec = DeviceSpec::linear(2, 2, 0);
        let init = DeviceState::with_chains(&spec, vec![vec![QubitId(0), QubitId(1)], vec![QubitId(2), QubitId(3)]]).unwrap();
        let err = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap_err();
        assert!(err.is_deadlock());
    }

    #[test]
    fn exports_are_tab_separated() {
        let (c, placement, spec) = samples::mapping_walkthrough();
        let init = placement.to_state(&spec).unwrap();
        let sched = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
        let tsv = sched.to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("start_us\tend_us\tkind\tqubits\ttraps"));
        assert_eq!(lines.count(), sched.ops.len());
        assert!(sched.metrics_text().contains("shuttles = 1"));
    }
}
