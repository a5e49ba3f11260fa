//! Shows how the router co-locates the operands of a cross-trap gate: mover
//! selection, swaps to the boundary, shuttles along the trap path and the
//! cascade of evictions when the destination is full.
//!
//! cargo run --example routing_walkthrough

use qccd::architecture::{DeviceSpec, DeviceState};
use qccd::circuit::{Circuit, QubitId};
use qccd::router::{resolve_gate, PendingGates};

fn show(title: &str, c: &Circuit, state: &DeviceState) {
    println!("== {title}");
    println!("   before: {}", state.occupancy_snapshot());
    let gate = c.gates().iter().find(|g| g.is_two_qubit()).unwrap();
    let pending = PendingGates::new(c, None);
    match resolve_gate(gate, state, &pending) {
        Ok(r) => {
            let d = &r.decision;
            let (a, b) = gate.pair().unwrap();
            println!("   gate ({a},{b}): move {} toward {} along traps {:?}", d.mover, d.partner, d.path);
            for op in &r.ops {
                println!("     {op:?}");
            }
            if !d.evictions.is_empty() {
                println!("   evicted: {:?}", d.evictions);
            }
            let mut after = state.clone();
            for op in &r.ops {
                after.apply(op).unwrap();
            }
            println!("   after:  {} ({} swaps, {} shuttles)\n", after.occupancy_snapshot(), r.swaps(), r.shuttles());
        }
        Err(e) => println!("   {e}\n"),
    }
}

fn chains(v: &[&[usize]]) -> Vec<Vec<QubitId>> {
    v.iter().map(|ch| ch.iter().map(|&q| QubitId(q)).collect()).collect()
}

fn main() {
    // qubit 0 has two more gates with qubits in trap 1, so it is the mover
    let mut c = Circuit::new(6);
    c.push2("cx", 0, 3).push2("cx", 0, 4).push2("cx", 0, 5);
    let s = DeviceState::with_chains(&DeviceSpec::linear(2, 5, 0), chains(&[&[0, 1, 2], &[3, 4, 5]])).unwrap();
    show("swap to the boundary, then shuttle", &c, &s);

    let mut c = Circuit::new(4);
    c.push2("cx", 0, 3);
    let s = DeviceState::with_chains(&DeviceSpec::linear(3, 3, 0), chains(&[&[0, 1], &[2], &[3]])).unwrap();
    show("two hops through a middle trap", &c, &s);

    let mut c = Circuit::new(9);
    c.push2("cx", 0, 8);
    let s = DeviceState::with_chains(&DeviceSpec::linear(4, 3, 0), chains(&[&[0, 1, 2], &[3, 4, 5], &[6, 7, 8], &[]])).unwrap();
    show("full traps push ions down the line", &c, &s);

    let mut c = Circuit::new(4);
    c.push2("cx", 0, 3);
    let s = DeviceState::with_chains(&DeviceSpec::linear(2, 2, 0), chains(&[&[0, 1], &[2, 3]])).unwrap();
    show("no free slot anywhere", &c, &s);
}
