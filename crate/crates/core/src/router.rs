//! Movement synthesis for gates whose operands sit in different traps.
//!
//! A [`MoverPolicy`] picks which operand travels; [`Router::resolve_gate`]
//! then walks it hop by hop along the shortest trap path: SWAPs bring it to
//! the chain end facing the next trap, one shuttle crosses the edge. A full
//! next trap first evicts one resident towards the nearest trap with room.

use thiserror::Error;

use crate::architecture::{DeviceError, DeviceState, PhysOp, Side, TrapId};
use crate::circuit::{Circuit, Gate, QubitId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("deadlock at gate {gate}: no eviction target for full trap {trap}; occupancy: {snapshot}")]
    Deadlock { gate: usize, trap: TrapId, snapshot: String },
    #[error("gate {0} is not a two-qubit gate")]
    NotTwoQubit(usize),
    #[error("gate {0}: operands already share a trap")]
    AlreadyCoTrapped(usize),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Not-yet-executed two-qubit gates, tracked per qubit.
///
/// Per-qubit program order is preserved by every schedule, so the pending
/// gates of a qubit are always a suffix of its gate list.
#[derive(Debug, Clone)]
pub struct PendingGates {
    per_qubit: Vec<Vec<(usize, QubitId)>>,
    cursor: Vec<usize>,
    lookahead: Option<usize>,
}

impl PendingGates {
    /// `lookahead` limits scoring to the next `k` two-qubit gates of each
    /// operand; `None` uses the whole remaining circuit.
    pub fn new(c: &Circuit, lookahead: Option<usize>) -> Self {
        let mut per_qubit = vec![Vec::new(); c.n_qubits()];
        for g in c.gates() {
            if let Some((a, b)) = g.pair() {
                per_qubit[a.0].push((g.index, b));
                per_qubit[b.0].push((g.index, a));
            }
        }
        PendingGates { cursor: vec![0; per_qubit.len()], per_qubit, lookahead }
    }

    /// Pending set holding only gates with index `>= first`.
    pub fn from_suffix(c: &Circuit, first: usize, lookahead: Option<usize>) -> Self {
        let mut p = Self::new(c, lookahead);
        for (q, list) in p.per_qubit.iter().enumerate() {
            p.cursor[q] = list.iter().take_while(|(g, _)| *g < first).count();
        }
        p
    }

    /// Marks `g` executed.
    pub fn complete(&mut self, g: &Gate) {
        let Some((a, b)) = g.pair() else { return };
        for q in [a, b] {
            let c = &mut self.cursor[q.0];
            if self.per_qubit[q.0].get(*c).is_some_and(|&(idx, _)| idx == g.index) {
                *c += 1;
            } else {
                debug_assert!(false, "gate {} completed out of per-qubit order", g.index);
            }
        }
    }

    /// Partners of `q` in its pending gates, skipping gate `current`.
    pub fn partners(&self, q: QubitId, current: usize) -> impl Iterator<Item = QubitId> + '_ {
        self.per_qubit[q.0][self.cursor[q.0]..]
            .iter()
            .filter(move |(g, _)| *g != current)
            .take(self.lookahead.unwrap_or(usize::MAX))
            .map(|&(_, p)| p)
    }

    /// Pending gates of `q` (excluding `current`) whose partner sits in `trap`.
    pub fn count_in_trap(&self, q: QubitId, current: usize, trap: TrapId, state: &DeviceState) -> usize {
        self.partners(q, current).filter(|&p| state.trap_of(p) == Some(trap)).count()
    }
}

/// Which operand moves, and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveDecision {
    pub mover: QubitId,
    pub partner: QubitId,
    pub dest_trap: TrapId,
    /// Shortest trap path from the mover's trap to `dest_trap`, inclusive.
    pub path: Vec<TrapId>,
    /// Ions relocated to make room, with the trap each one ended in.
    pub evictions: Vec<(QubitId, TrapId)>,
}

pub trait MoverPolicy: Send + Sync {
    fn select_mover(&self, gate: &Gate, state: &DeviceState, pending: &PendingGates) -> MoveDecision;
}

/// Moves the operand with more pending business in the other trap.
///
/// `score(q) = pending gates of q with ions in the partner's trap - pending
/// gates of q with ions in its own trap`. Higher score moves; ties go to the
/// operand closer to its departure boundary, then to the lower index.
#[derive(Debug, Clone, Copy, Default)]
pub struct GateCountPolicy;

impl MoverPolicy for GateCountPolicy {
    fn select_mover(&self, gate: &Gate, state: &DeviceState, pending: &PendingGates) -> MoveDecision {
        let (a, b) = gate.pair().expect("two-qubit gate");
        let ta = state.trap_of(a).expect("placed operand");
        let tb = state.trap_of(b).expect("placed operand");
        let rank = |q: QubitId, own: TrapId, other: TrapId| {
            let toward = pending.count_in_trap(q, gate.index, other, state) as i64;
            let away = pending.count_in_trap(q, gate.index, own, state) as i64;
            let swaps = state.swaps_to_boundary(q, state.graph().next_hop(own, other));
            (toward - away, std::cmp::Reverse(swaps), std::cmp::Reverse(q))
        };
        let (mover, partner, from, dest) = if rank(a, ta, tb) >= rank(b, tb, ta) { (a, b, ta, tb) } else { (b, a, tb, ta) };
        MoveDecision { mover, partner, dest_trap: dest, path: state.graph().path(from, dest), evictions: Vec::new() }
    }
}

/// Movement ops that co-locate a gate's operands, plus the decision behind
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pub decision: MoveDecision,
    pub ops: Vec<PhysOp>,
}

impl Routing {
    pub fn shuttles(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, PhysOp::Shuttle { .. })).count()
    }

    pub fn swaps(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, PhysOp::Swap { .. })).count()
    }
}

pub struct Router<P: MoverPolicy = GateCountPolicy> {
    policy: P,
}

impl Default for Router<GateCountPolicy> {
    fn default() -> Self {
        Router { policy: GateCountPolicy }
    }
}

impl<P: MoverPolicy> Router<P> {
    pub fn new(policy: P) -> Self {
        Router { policy }
    }

    pub fn select_mover(&self, gate: &Gate, state: &DeviceState, pending: &PendingGates) -> MoveDecision {
        self.policy.select_mover(gate, state, pending)
    }

    /// Ops that bring the operands of `gate` into one trap. `state` is not
    /// modified; replaying the ops on it leaves the gate executable.
    pub fn resolve_gate(&self, gate: &Gate, state: &DeviceState, pending: &PendingGates) -> Result<Routing, RouteError> {
        let (a, b) = gate.pair().ok_or(RouteError::NotTwoQubit(gate.index))?;
        let ta = state.trap_of(a).ok_or(DeviceError::UnknownQubit(a))?;
        let tb = state.trap_of(b).ok_or(DeviceError::UnknownQubit(b))?;
        if ta == tb {
            return Err(RouteError::AlreadyCoTrapped(gate.index));
        }

        let mut decision = self.select_mover(gate, state, pending);
        let mut walk = Walk { state: state.clone(), ops: Vec::new(), evictions: Vec::new(), gate: gate.index };
        let protected = [decision.mover, decision.partner];
        for (i, hop) in decision.path.windows(2).enumerate() {
            let (cur, next) = (hop[0], hop[1]);
            if walk.state.is_full(next) {
                let ahead = &decision.path[i + 1..];
                walk.make_room(next, &protected, ahead, pending)?;
            }
            walk.shuttle(decision.mover, cur, next)?;
        }
        debug_assert_eq!(walk.state.trap_of(a), walk.state.trap_of(b));
        decision.evictions = walk.evictions;
        Ok(Routing { decision, ops: walk.ops })
    }
}

/// [`Router::resolve_gate`] with the default policy.
pub fn resolve_gate(gate: &Gate, state: &DeviceState, pending: &PendingGates) -> Result<Routing, RouteError> {
    Router::default().resolve_gate(gate, state, pending)
}

struct Walk {
    state: DeviceState,
    ops: Vec<PhysOp>,
    evictions: Vec<(QubitId, TrapId)>,
    gate: usize,
}

impl Walk {
    fn push(&mut self, op: PhysOp) -> Result<(), RouteError> {
        self.state.apply(&op)?;
        self.ops.push(op);
        Ok(())
    }

    /// SWAPs `q` to the end of `from` facing `to`, then shuttles it across.
    fn shuttle(&mut self, q: QubitId, from: TrapId, to: TrapId) -> Result<(), RouteError> {
        let mut pos = self.state.position_of(q).ok_or(DeviceError::UnknownQubit(q))?;
        match self.state.graph().facing_side(from, to) {
            Side::Right => {
                while pos + 1 < self.state.occupancy(from) {
                    self.push(PhysOp::Swap { trap: from, pos })?;
                    pos += 1;
                }
            }
            Side::Left => {
                while pos > 0 {
                    self.push(PhysOp::Swap { trap: from, pos: pos - 1 })?;
                    pos -= 1;
                }
            }
        }
        self.push(PhysOp::Shuttle { qubit: q, from, to })
    }

    /// Frees one slot in the full trap `full`. The nearest trap with room
    /// is chosen (preferring traps off the mover's remaining path, then
    /// more free slots, then lower index) and one resident is pushed along
    /// the shortest path towards it, each trap on the way handing one ion
    /// to the next. A neighbour with room makes this a single eviction.
    fn make_room(&mut self, full: TrapId, protected: &[QubitId], ahead: &[TrapId], pending: &PendingGates) -> Result<(), RouteError> {
        let graph = self.state.graph();
        let cap = self.state.capacity();
        let target = (0..self.state.n_traps())
            .filter(|&t| t != full && !self.state.is_full(t))
            .min_by_key(|&t| {
                let free = cap - self.state.occupancy(t).min(cap);
                (graph.distance(full, t), ahead.contains(&t), std::cmp::Reverse(free), t)
            });
        let gate = self.gate;
        let deadlock = move |s: &DeviceState| RouteError::Deadlock { gate, trap: full, snapshot: s.occupancy_snapshot() };
        let Some(target) = target else { return Err(deadlock(&self.state)) };
        let path = graph.path(full, target);
        for hop in path.windows(2).rev() {
            if !self.evict_one(hop[0], hop[1], protected, pending)? {
                return Err(deadlock(&self.state));
            }
        }
        Ok(())
    }

    /// Moves the resident of `from` with the fewest pending gates involving
    /// `from` into the adjacent trap `to`. Returns false if every resident is
    /// protected.
    fn evict_one(&mut self, from: TrapId, to: TrapId, protected: &[QubitId], pending: &PendingGates) -> Result<bool, RouteError> {
        let victim = self
            .state
            .chain(from)
            .iter()
            .copied()
            .filter(|q| !protected.contains(q))
            .min_by_key(|&v| {
                (
                    pending.count_in_trap(v, usize::MAX, from, &self.state),
                    self.state.swaps_to_boundary(v, to),
                    v,
                )
            });
        let Some(victim) = victim else { return Ok(false) };
        self.shuttle(victim, from, to)?;
        self.evictions.push((victim, to));
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architecture::DeviceSpec;
    use crate::samples;

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    fn state(spec: &DeviceSpec, chains: &[&[usize]]) -> DeviceState {
        DeviceState::with_chains(spec, chains.iter().map(|c| c.iter().map(|&i| q(i)).collect()).collect()).unwrap()
    }

    fn replay(state: &DeviceState, ops: &[PhysOp]) -> DeviceState {
        let mut s = state.clone();
        for op in ops {
            s.apply(op).unwrap();
        }
        s
    }

    #[test]
    fn mover_with_future_business_in_other_trap_moves() {
        // gate 0 = (0, 1); afterwards qubit 0 meets 2 and 3 (both in trap 1) three times
        let mut c = Circuit::new(4);
        c.push2("cx", 0, 1).push2("cx", 0, 2).push2("cx", 0, 3).push2("cx", 0, 2);
        let spec = DeviceSpec::linear(2, 4, 0);
        let s = state(&spec, &[&[0], &[2, 3, 1]]);
        let pending = PendingGates::new(&c, None);
        let d = GateCountPolicy.select_mover(&c.gates()[0], &s, &pending);
        assert_eq!(d.mover, q(0));
        assert_eq!(d.dest_trap, 1);
        assert_eq!(d.path, vec![0, 1]);

        // the same circuit viewed from the other side: qubit 1 would rather stay
        let s = state(&spec, &[&[1], &[2, 3, 0]]);
        let d = GateCountPolicy.select_mover(&c.gates()[0], &s, &pending);
        assert_eq!(d.mover, q(1));
    }

    #[test]
    fn score_tie_goes_to_operand_at_boundary() {
        let mut c = Circuit::new(6);
        c.push2("cx", 1, 4);
        let spec = DeviceSpec::linear(2, 4, 0);
        // 1 is mid-chain in trap 0; 4 sits at trap 1's left end
        let s = state(&spec, &[&[0, 1, 2], &[4, 3, 5]]);
        let d = GateCountPolicy.select_mover(&c.gates()[0], &s, &PendingGates::new(&c, None));
        assert_eq!(d.mover, q(4));
    }

    #[test]
    fn full_tie_goes_to_lower_index() {
        let mut c = Circuit::new(2);
        c.push2("cx", 1, 0);
        let spec = DeviceSpec::linear(2, 4, 0);
        let s = state(&spec, &[&[1], &[0]]);
        let d = GateCountPolicy.select_mover(&c.gates()[0], &s, &PendingGates::new(&c, None));
        assert_eq!(d.mover, q(0));
    }

    #[test]
    fn lookahead_limits_scoring_window() {
        // qubit 0's next gate after the current one is with 2 (own trap), then
        // two with 3 (other trap)
        let mut c = Circuit::new(4);
        c.push2("cx", 0, 1).push2("cx", 0, 2).push2("cx", 0, 3).push2("cx", 0, 3);
        let spec = DeviceSpec::linear(2, 4, 0);
        let s = state(&spec, &[&[2, 0], &[1, 3]]);
        let full = PendingGates::new(&c, None);
        let short = PendingGates::new(&c, Some(1));
        assert_eq!(GateCountPolicy.select_mover(&c.gates()[0], &s, &full).mover, q(0));
        assert_eq!(GateCountPolicy.select_mover(&c.gates()[0], &s, &short).mover, q(1));
    }

    #[test]
    fn one_swap_then_one_shuttle() {
        let (c, placement, spec) = samples::mapping_walkthrough();
        let s = placement.to_state(&spec).unwrap();
        let r = resolve_gate(&c.gates()[2], &s, &PendingGates::from_suffix(&c, 2, None)).unwrap();
        assert_eq!(
            r.ops,
            vec![PhysOp::Swap { trap: 0, pos: 1 }, PhysOp::Shuttle { qubit: q(2), from: 0, to: 1 }]
        );
        let after = replay(&s, &r.ops);
        assert_eq!(after.chain(1), &[q(2), q(4), q(1)]);
    }

    #[test]
    fn mover_at_boundary_needs_only_a_shuttle() {
        let mut c = Circuit::new(3);
        c.push2("cx", 1, 2);
        let spec = DeviceSpec::linear(2, 3, 0);
        let s = state(&spec, &[&[0, 1], &[2]]);
        let r = resolve_gate(&c.gates()[0], &s, &PendingGates::new(&c, None)).unwrap();
        assert_eq!(r.ops.len(), 1);
        assert_eq!(r.shuttles(), 1);
    }

    #[test]
    fn two_hops_through_middle_trap() {
        let mut c = Circuit::new(5);
        c.push2("cx", 0, 4);
        let spec = DeviceSpec::linear(3, 3, 0);
        let s = state(&spec, &[&[1, 0], &[2], &[4, 3]]);
        let r = resolve_gate(&c.gates()[0], &s, &PendingGates::new(&c, None)).unwrap();
        assert_eq!(r.shuttles(), 2);
        let after = replay(&s, &r.ops);
        assert_eq!(after.trap_of(q(0)), after.trap_of(q(4)));
        assert_eq!(r.decision.path.len(), 3);
    }

    #[test]
    fn full_destination_evicts_least_involved_resident() {
        // trap 1 is full; 5 has pending work in trap 1, 3 does not
        let mut c = Circuit::new(6);
        c.push2("cx", 0, 4).push2("cx", 5, 4).push2("cx", 0, 1);
        let spec = DeviceSpec::linear(3, 3, 0);
        let s = state(&spec, &[&[1, 0], &[3, 4, 5], &[2]]);
        let r = resolve_gate(&c.gates()[0], &s, &PendingGates::new(&c, None)).unwrap();
        assert_eq!(r.decision.mover, q(0));
        assert_eq!(r.decision.evictions, vec![(q(3), 2)]);
        let after = replay(&s, &r.ops);
        assert_eq!(after.trap_of(q(0)), Some(1));
        assert_eq!(after.trap_of(q(3)), Some(2));
        assert!(after.occupancies().iter().all(|&o| o <= 3));
    }

    #[test]
    fn nested_eviction_when_neighbours_are_full() {
        // traps 0..=2 full, trap 3 empty; 1 moves into trap 1, whose only
        // free-able neighbour is trap 2, which first spills into trap 3
        let mut c = Circuit::new(6);
        c.push2("cx", 1, 3);
        let spec = DeviceSpec::linear(4, 2, 0);
        let s = state(&spec, &[&[0, 1], &[2, 3], &[4, 5], &[]]);
        let r = resolve_gate(&c.gates()[0], &s, &PendingGates::new(&c, None)).unwrap();
        assert_eq!(r.decision.mover, q(1));
        assert_eq!(r.decision.evictions, vec![(q(5), 3), (q(2), 2)]);
        let after = replay(&s, &r.ops);
        assert_eq!(after.chain(1), &[q(1), q(3)]);
        assert_eq!(after.chain(2), &[q(2), q(4)]);
        assert_eq!(after.chain(3), &[q(5)]);
    }

    #[test]
    fn deadlock_is_reported_with_snapshot() {
        let mut c = Circuit::new(4);
        c.push2("cx", 0, 2);
        let spec = DeviceSpec::linear(2, 2, 0);
        let s = state(&spec, &[&[0, 1], &[2, 3]]);
        match resolve_gate(&c.gates()[0], &s, &PendingGates::new(&c, None)) {
            Err(RouteError::Deadlock { snapshot, .. }) => assert!(snapshot.contains("t1[2 3]/2"), "{snapshot}"),
            other => panic!("expected deadlock, got {other:?}"),
        }
    }

    #[test]
    fn rejects_co_trapped_and_single_qubit_gates() {
        let mut c = Circuit::new(2);
        c.push2("cx", 0, 1).push1("h", 0);
        let spec = DeviceSpec::linear(2, 2, 0);
        let s = state(&spec, &[&[0, 1], &[]]);
        let p = PendingGates::new(&c, None);
        assert_eq!(resolve_gate(&c.gates()[0], &s, &p), Err(RouteError::AlreadyCoTrapped(0)));
        assert_eq!(resolve_gate(&c.gates()[1], &s, &p), Err(RouteError::NotTwoQubit(1)));
    }

    #[test]
    fn pending_suffix_and_completion() {
        let mut c = Circuit::new(3);
        c.push2("cx", 0, 1).push2("cx", 0, 2).push2("cx", 1, 2);
        let mut p = PendingGates::new(&c, None);
        assert_eq!(p.partners(q(0), usize::MAX).collect::<Vec<_>>(), vec![q(1), q(2)]);
        p.complete(&c.gates()[0]);
        assert_eq!(p.partners(q(0), usize::MAX).collect::<Vec<_>>(), vec![q(2)]);
        let s = PendingGates::from_suffix(&c, 2, None);
        assert_eq!(s.partners(q(0), usize::MAX).count(), 0);
        assert_eq!(s.partners(q(1), usize::MAX).collect::<Vec<_>>(), vec![q(2)]);
    }
}
