//! Shared generators and schedule mutations for the integration suites.
#![allow(dead_code)]

use qccd::architecture::{DeviceSpec, DeviceState, PhysOp, Side, TimingModel, Topology};
use qccd::circuit::{Circuit, QubitId};
use qccd::placement::Strategy;
use qccd::scheduler::ScheduledOp;
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

/// A random compile case: at most 16 qubits on 2..=4 traps with at least
/// one free slot somewhere on the device.
#[derive(Debug, Clone)]
pub struct Case {
    pub circuit: Circuit,
    pub device: DeviceSpec,
    pub strategy: Strategy,
    pub seed: u64,
}

pub fn random_circuit(rng: &mut impl RngCore, n: usize, gates: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..gates {
        if rng.random_bool(0.25) {
            c.push1("h", rng.random_range(0..n));
        } else {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.push2("cx", a, b);
        }
    }
    c
}

pub fn random_case(rng: &mut impl RngCore) -> Case {
    let traps: usize = rng.random_range(2..=4);
    let n: usize = rng.random_range(2..=16);
    // smallest capacity leaving a free slot, then some slack
    let min_cap = (n + 1).div_ceil(traps).max(2);
    let capacity = rng.random_range(min_cap..=min_cap + 3);
    let excess = rng.random_range(0..capacity.min(3));
    let topology = if rng.random_bool(0.5) { Topology::Linear } else { Topology::Ring };
    let gates = rng.random_range(1..=40);
    let strategy = *Strategy::ALL.choose(rng).unwrap();
    Case {
        circuit: random_circuit(rng, n, gates),
        device: DeviceSpec::new(topology, traps, capacity, excess),
        strategy,
        seed: rng.next_u64(),
    }
}

/// Schedule with one op removed.
pub fn delete_op(ops: &[ScheduledOp], i: usize) -> Vec<ScheduledOp> {
    let mut v = ops.to_vec();
    v.remove(i);
    v
}

/// Index pair `(pred, op)` where `pred` is the latest earlier op sharing a
/// trap with `op`, if the schedule has one.
pub fn same_trap_predecessor(ops: &[ScheduledOp], rng: &mut impl RngCore) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by(|&a, &b| ops[a].start.total_cmp(&ops[b].start).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if let Some(&i) = order[..k].iter().rev().find(|&&i| ops[i].traps.iter().any(|t| ops[j].traps.contains(t))) {
            if ops[i].start < ops[j].start {
                pairs.push((i, j));
            }
        }
    }
    pairs.choose(rng).copied()
}

/// Schedule where `op` is pulled back to start together with `pred`.
pub fn shift_onto(ops: &[ScheduledOp], pred: usize, op: usize) -> Vec<ScheduledOp> {
    let mut v = ops.to_vec();
    let d = v[op].end - v[op].start;
    v[op].start = v[pred].start;
    v[op].end = v[pred].start + d;
    v
}

/// Appends movement after the makespan that keeps herding ions into one
/// trap until a shuttle pushes it past capacity. Every appended op except
/// the last is legal. Returns `None` if the device cannot be overfilled.
pub fn inject_overflow(ops: &[ScheduledOp], final_state: &DeviceState, timing: &TimingModel) -> Option<Vec<ScheduledOp>> {
    if final_state.n_ions() <= final_state.capacity() {
        return None;
    }
    let target = 0;
    let mut state = final_state.clone();
    let mut out = ops.to_vec();
    let mut now = ops.iter().map(|o| o.end).fold(0.0, f64::max);
    let mut push = |state: &DeviceState, op: PhysOp, out: &mut Vec<ScheduledOp>| {
        let traps = state.traps_of(&op).unwrap();
        let qubits = state.qubits_of(&op);
        let d = timing.duration(&op, state.host_occupancy(&op));
        out.push(ScheduledOp { op, start: now, end: now + d, traps, qubits });
        now += d;
    };
    loop {
        // nearest occupied trap other than the target
        let src = (0..state.n_traps())
            .filter(|&t| t != target && state.occupancy(t) > 0)
            .min_by_key(|&t| (state.trap_distance(t, target), t))?;
        let next = state.graph().next_hop(src, target);
        let end_pos = match state.graph().facing_side(src, next) {
            Side::Left => 0,
            Side::Right => state.occupancy(src) - 1,
        };
        let q: QubitId = state.chain(src)[end_pos];
        let op = PhysOp::Shuttle { qubit: q, from: src, to: next };
        if state.is_full(next) {
            push(&state, op, &mut out);
            return Some(out);
        }
        push(&state, op, &mut out);
        state.apply(&op).unwrap();
    }
}
