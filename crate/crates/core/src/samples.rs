//! Small hand-built instances used by tests, examples and docs.

use crate::architecture::DeviceSpec;
use crate::circuit::{Circuit, QubitId};
use crate::placement::Placement;

/// Five-qubit circuit whose allocation on two traps of four ions (two kept
/// free) ends as `[[0, 2], [4, 3, 1]]`.
///
/// Slices: `{(0,2),(1,3)} {(0,2),(1,4)} {(2,4)} {(2,3)} {(2,4)} {(3,4),(1,2)}`.
/// Qubit 2 talks to four of the five qubits, `(0, 2)` carries the largest
/// temporal weight, qubit 4 leads the remaining ratio list and its heaviest
/// partner 1 is itself tied more strongly to 3.
pub fn allocation_walkthrough() -> Circuit {
    let mut c = Circuit::new(5);
    c.push2("cx", 0, 2)
        .push2("cx", 1, 3)
        .push2("cx", 0, 2)
        .push2("cx", 1, 4)
        .push2("cx", 2, 4)
        .push2("cx", 2, 3)
        .push2("cx", 2, 4)
        .push2("cx", 3, 4)
        .push2("cx", 1, 2);
    c
}

pub fn allocation_walkthrough_device() -> DeviceSpec {
    DeviceSpec::linear(2, 4, 2)
}

/// Four CNOTs on two traps of capacity four. The first two run in parallel
/// (one per trap); the third needs qubit 2, which sits one position away
/// from the boundary, to join qubit 4 in the right-hand trap.
pub fn mapping_walkthrough() -> (Circuit, Placement, DeviceSpec) {
    let mut c = Circuit::new(5);
    c.push2("cx", 2, 3).push2("cx", 1, 4).push2("cx", 2, 4).push2("cx", 2, 1);
    let chains = vec![
        vec![QubitId(0), QubitId(2), QubitId(3)],
        vec![QubitId(4), QubitId(1)],
    ];
    (c, Placement::from_chains(chains), DeviceSpec::linear(2, 4, 0))
}
