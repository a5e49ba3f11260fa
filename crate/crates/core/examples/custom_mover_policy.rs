//! Plugs a custom mover policy into the scheduler. The example policy always
//! moves the operand that is already closer to the facing boundary and
//! ignores future gates; it is compared with the default gate-count policy.
//!
//! cargo run --release --example custom_mover_policy

use qccd::architecture::DeviceState;
use qccd::benchgen::{BenchmarkSpec, Family};
use qccd::circuit::Gate;
use qccd::placement::{place, Strategy};
use qccd::router::{GateCountPolicy, MoveDecision, MoverPolicy, PendingGates, Router};
use qccd::scheduler::{schedule_with, verify_schedule, ScheduleOptions};
use qccd::DeviceSpec;

struct FewestSwaps;

impl MoverPolicy for FewestSwaps {
    fn select_mover(&self, gate: &Gate, state: &DeviceState, _pending: &PendingGates) -> MoveDecision {
        let (a, b) = gate.pair().unwrap();
        let (ta, tb) = (state.trap_of(a).unwrap(), state.trap_of(b).unwrap());
        let cost = |q, own, other| state.swaps_to_boundary(q, state.graph().next_hop(own, other));
        let (mover, partner, from, to) = if cost(a, ta, tb) <= cost(b, tb, ta) { (a, b, ta, tb) } else { (b, a, tb, ta) };
        MoveDecision { mover, partner, dest_trap: to, path: state.graph().path(from, to), evictions: Vec::new() }
    }
}

fn run<P: MoverPolicy>(name: &str, router: &Router<P>) {
    let spec = DeviceSpec::linear(6, 17, 2);
    for family in [Family::Qft, Family::Qv, Family::Da] {
        let c = BenchmarkSpec::new(family, 64).generate().unwrap();
        let init = place(Strategy::Sta, &c, &spec, 0).unwrap().to_state(&spec).unwrap();
        let s = schedule_with(&c, &init, &spec.timing, ScheduleOptions::default(), router).unwrap();
        verify_schedule(&c, &init, &spec.timing, &s.ops).unwrap();
        println!("{name:<12} {family:<5} shuttles {:>5}  swaps {:>5}  time {:.4} s", s.metrics.shuttles, s.metrics.swaps, s.metrics.total_time);
    }
}

fn main() {
    run("gate-count", &Router::new(GateCountPolicy));
    run("fewest-swap", &Router::new(FewestSwaps));
}
