//! Initial qubit placement.
//!
//! Three strategies share the slot-allocation rules in [`Allocator`]:
//! the spatio-temporal aware allocator ([`sta_place`]), the edge-weight
//! greedy baseline ([`greedy_place`]) and a seeded random baseline
//! ([`random_place`]).

mod greedy;
mod random;
mod sta;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::architecture::{DeviceError, DeviceSpec, DeviceState, Side, TrapGraph, TrapId};
use crate::circuit::{Circuit, QubitId};

pub use greedy::greedy_place;
pub use random::random_place;
pub use sta::{compute_ratios, compute_temporal_weights, order_qubits, sta_place, RatioEntry, RatioList, TemporalWeights};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("device too small: {qubits} qubits for {slots} physical slots")]
    DeviceTooSmall { qubits: usize, slots: usize },
    #[error("no trap has a free slot left for {0}")]
    NoSpace(QubitId),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Sta,
    Greedy,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Sta, Strategy::Greedy, Strategy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sta => "sta",
            Strategy::Greedy => "greedy",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sta" => Ok(Strategy::Sta),
            "greedy" => Ok(Strategy::Greedy),
            "random" => Ok(Strategy::Random),
            other => Err(format!("unknown placement strategy `{other}` (expected sta, greedy or random)")),
        }
    }
}

/// Runs `strategy`. `seed` only matters for [`Strategy::Random`].
pub fn place(strategy: Strategy, c: &Circuit, spec: &DeviceSpec, seed: u64) -> Result<Placement, PlacementError> {
    match strategy {
        Strategy::Sta => sta_place(c, spec),
        Strategy::Greedy => greedy_place(c, spec),
        Strategy::Random => random_place(c, spec, seed),
    }
}

/// Initial ion chains, one per trap, left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    chains: Vec<Vec<QubitId>>,
}

impl Placement {
    pub fn from_chains(chains: Vec<Vec<QubitId>>) -> Self {
        Placement { chains }
    }

    pub fn chains(&self) -> &[Vec<QubitId>] {
        &self.chains
    }

    pub fn n_qubits(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn trap_of(&self, q: QubitId) -> Option<TrapId> {
        self.chains.iter().position(|c| c.contains(&q))
    }

    pub fn position_of(&self, q: QubitId) -> Option<(TrapId, usize)> {
        self.chains
            .iter()
            .enumerate()
            .find_map(|(t, c)| c.iter().position(|&x| x == q).map(|p| (t, p)))
    }

    /// Qubit -> trap for qubits `0..n`.
    pub fn trap_map(&self, n: usize) -> Vec<Option<TrapId>> {
        let mut map = vec![None; n];
        for (t, c) in self.chains.iter().enumerate() {
            for q in c {
                if q.0 < n {
                    map[q.0] = Some(t);
                }
            }
        }
        map
    }

    /// Device state holding this placement; checks capacity and uniqueness.
    pub fn to_state(&self, spec: &DeviceSpec) -> Result<DeviceState, DeviceError> {
        DeviceState::with_chains(spec, self.chains.clone())
    }

    /// Every qubit `0..n_qubits` placed exactly once within physical capacity.
    pub fn validate(&self, n_qubits: usize, spec: &DeviceSpec) -> Result<(), PlacementError> {
        let state = self.to_state(spec)?;
        for q in (0..n_qubits).map(QubitId) {
            if state.trap_of(q).is_none() {
                return Err(DeviceError::UnknownQubit(q).into());
            }
        }
        Ok(())
    }
}

fn check_fits(n_qubits: usize, spec: &DeviceSpec) -> Result<(), PlacementError> {
    spec.validate()?;
    if n_qubits > spec.total_physical() {
        return Err(PlacementError::DeviceTooSmall { qubits: n_qubits, slots: spec.total_physical() });
    }
    Ok(())
}

/// Slot bookkeeping while a placement is being built. New ions join the
/// right end of their trap's chain.
#[derive(Debug, Clone)]
pub(crate) struct Allocator {
    graph: TrapGraph,
    capacity: usize,
    usable: usize,
    chains: Vec<Vec<QubitId>>,
    trap_of: Vec<Option<TrapId>>,
}

impl Allocator {
    pub(crate) fn new(spec: &DeviceSpec, n_qubits: usize) -> Self {
        Allocator {
            graph: TrapGraph::new(spec.topology, spec.n_traps),
            capacity: spec.capacity,
            usable: spec.usable_capacity(),
            chains: vec![Vec::new(); spec.n_traps],
            trap_of: vec![None; n_qubits],
        }
    }

    fn n_traps(&self) -> usize {
        self.chains.len()
    }

    pub(crate) fn is_placed(&self, q: QubitId) -> bool {
        self.trap_of[q.0].is_some()
    }

    pub(crate) fn trap_of(&self, q: QubitId) -> Option<TrapId> {
        self.trap_of[q.0]
    }

    fn free_usable(&self, t: TrapId) -> usize {
        self.usable.saturating_sub(self.chains[t].len())
    }

    fn free_physical(&self, t: TrapId) -> usize {
        self.capacity - self.chains[t].len()
    }

    fn put(&mut self, q: QubitId, t: TrapId) {
        debug_assert!(!self.is_placed(q));
        debug_assert!(self.free_physical(t) > 0);
        self.chains[t].push(q);
        self.trap_of[q.0] = Some(t);
    }

    /// Closest pair of distinct traps each with at least one slot under `free`.
    fn closest_pair(&self, free: impl Fn(&Self, TrapId) -> usize) -> Option<(TrapId, TrapId)> {
        let open: Vec<TrapId> = (0..self.n_traps()).filter(|&t| free(self, t) >= 1).collect();
        let mut best: Option<(usize, TrapId, TrapId)> = None;
        for (i, &a) in open.iter().enumerate() {
            for &b in &open[i + 1..] {
                let d = self.graph.distance(a, b);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        best.map(|(_, a, b)| (a, b))
    }

    /// Places two unplaced qubits, together when one trap has room for both.
    ///
    /// Order of preference: the lowest-index trap with two usable slots; the
    /// closest pair of traps with one usable slot each; one usable slot for
    /// `a` and the nearest slot for `b`; then the same steps over excess
    /// (physical) slots.
    pub(crate) fn place_pair(&mut self, a: QubitId, b: QubitId) -> Result<(), PlacementError> {
        if let Some(t) = (0..self.n_traps()).find(|&t| self.free_usable(t) >= 2) {
            self.put(a, t);
            self.put(b, t);
            return Ok(());
        }
        if let Some((ta, tb)) = self.closest_pair(Self::free_usable) {
            self.put(a, ta);
            self.put(b, tb);
            return Ok(());
        }
        if let Some(t) = (0..self.n_traps()).find(|&t| self.free_usable(t) >= 1) {
            self.put(a, t);
            return self.place_near(b, t);
        }
        if let Some(t) = (0..self.n_traps()).find(|&t| self.free_physical(t) >= 2) {
            self.put(a, t);
            self.put(b, t);
            return Ok(());
        }
        if let Some((ta, tb)) = self.closest_pair(Self::free_physical) {
            self.put(a, ta);
            self.put(b, tb);
            return Ok(());
        }
        Err(PlacementError::NoSpace(a))
    }

    /// Places `q` in the trap nearest `anchor` with a usable slot (ties to the
    /// lower index, `anchor` itself first), falling back to excess slots.
    pub(crate) fn place_near(&mut self, q: QubitId, anchor: TrapId) -> Result<(), PlacementError> {
        let nearest = |free: &dyn Fn(TrapId) -> usize| {
            (0..self.n_traps())
                .filter(|&t| free(t) >= 1)
                .min_by_key(|&t| (self.graph.distance(anchor, t), t))
        };
        let target = nearest(&|t| self.free_usable(t)).or_else(|| nearest(&|t| self.free_physical(t)));
        match target {
            Some(t) => {
                self.put(q, t);
                Ok(())
            }
            None => Err(PlacementError::NoSpace(q)),
        }
    }

    /// Deals qubits cyclically over traps with usable room, then over excess
    /// slots once usable room runs out.
    pub(crate) fn deal_round_robin(&mut self, qubits: &[QubitId]) -> Result<(), PlacementError> {
        let n = self.n_traps();
        let mut cursor = 0;
        for &q in qubits {
            let pick = |free: &dyn Fn(TrapId) -> usize| (0..n).map(|k| (cursor + k) % n).find(|&t| free(t) >= 1);
            let t = pick(&|t| self.free_usable(t))
                .or_else(|| pick(&|t| self.free_physical(t)))
                .ok_or(PlacementError::NoSpace(q))?;
            self.put(q, t);
            cursor = (t + 1) % n;
        }
        Ok(())
    }

    /// Moves `q` to the end of its chain facing `toward`, shifting the others
    /// inward.
    pub(crate) fn move_to_boundary(&mut self, q: QubitId, toward: TrapId) {
        let t = self.trap_of[q.0].expect("placed qubit");
        let chain = &mut self.chains[t];
        let pos = chain.iter().position(|&x| x == q).expect("qubit in its chain");
        chain.remove(pos);
        match self.graph.facing_side(t, toward) {
            Side::Left => chain.insert(0, q),
            Side::Right => chain.push(q),
        }
    }

    pub(crate) fn graph(&self) -> &TrapGraph {
        &self.graph
    }

    pub(crate) fn into_placement(self) -> Placement {
        Placement { chains: self.chains }
    }

    pub(crate) fn from_placement(p: &Placement, spec: &DeviceSpec) -> Self {
        let n = p.chains.iter().flatten().map(|q| q.0 + 1).max().unwrap_or(0);
        let mut alloc = Allocator::new(spec, n);
        for (t, c) in p.chains.iter().enumerate() {
            for &q in c {
                alloc.trap_of[q.0] = Some(t);
            }
        }
        alloc.chains = p.chains.clone();
        alloc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn pair_prefers_lowest_trap_with_room() {
        let spec = DeviceSpec::linear(2, 4, 0);
        let mut a = Allocator::new(&spec, 2);
        a.place_pair(q(0), q(1)).unwrap();
        assert_eq!(a.into_placement().chains(), &[vec![q(0), q(1)], vec![]]);
    }

    #[test]
    fn pair_splits_across_closest_traps() {
        // usable 1 per trap
        let spec = DeviceSpec::linear(3, 2, 1);
        let mut a = Allocator::new(&spec, 3);
        a.put(q(2), 0);
        a.place_pair(q(0), q(1)).unwrap();
        assert_eq!(a.into_placement().chains(), &[vec![q(2)], vec![q(0)], vec![q(1)]]);
    }

    #[test]
    fn near_overflows_into_excess_last() {
        let spec = DeviceSpec::linear(3, 3, 1);
        let mut a = Allocator::new(&spec, 7);
        for (i, t) in [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2)] {
            a.put(q(i), t);
        }
        a.place_near(q(5), 0).unwrap();
        assert_eq!(a.trap_of(q(5)), Some(2));
        a.place_near(q(6), 0).unwrap();
        assert_eq!(a.trap_of(q(6)), Some(0));
    }

    #[test]
    fn round_robin_skips_full_traps() {
        let spec = DeviceSpec::linear(3, 2, 0);
        let mut a = Allocator::new(&spec, 5);
        a.put(q(0), 1);
        a.put(q(1), 1);
        a.deal_round_robin(&[q(2), q(3), q(4)]).unwrap();
        assert_eq!(a.into_placement().chains(), &[vec![q(2), q(4)], vec![q(0), q(1)], vec![q(3)]]);
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("annealing".parse::<Strategy>().is_err());
    }
}
