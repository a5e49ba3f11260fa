//! QCCD device model.
//!
//! Traps are connected either as a line (`t <-> t+1`) or a ring (line plus
//! `T-1 <-> 0`). Every trap holds an ordered ion chain; position 0 is the
//! left end. Chains are oriented left-to-right along increasing trap index,
//! and on a ring trap `T-1`'s right end faces trap 0.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::QubitId;

pub type TrapId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Linear,
    Ring,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Linear => "linear",
            Topology::Ring => "ring",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Topology::Linear),
            "ring" => Ok(Topology::Ring),
            other => Err(format!("unknown topology `{other}` (expected linear or ring)")),
        }
    }
}

/// How two-qubit gate time grows with the number of ions in the trap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateScaling {
    /// `base * (1 + slope * (n - 1))`
    #[default]
    Linear,
    /// `base`, independent of chain length.
    Constant,
}

/// Operation durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub t_1q: f64,
    pub t_2q_base: f64,
    pub t_2q_slope: f64,
    /// A SWAP costs this many two-qubit gates.
    pub t_swap_factor: f64,
    pub t_split: f64,
    /// Per trap-graph edge.
    pub t_move: f64,
    pub t_merge: f64,
    pub scaling: GateScaling,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            t_1q: 10e-6,
            t_2q_base: 100e-6,
            t_2q_slope: 0.05,
            t_swap_factor: 3.0,
            t_split: 80e-6,
            t_move: 5e-6,
            t_merge: 80e-6,
            scaling: GateScaling::Linear,
        }
    }
}

impl TimingModel {
    pub fn gate2(&self, ions_in_trap: usize) -> f64 {
        match self.scaling {
            GateScaling::Linear => {
                let extra = ions_in_trap.saturating_sub(1) as f64;
                self.t_2q_base * (1.0 + self.t_2q_slope * extra)
            }
            GateScaling::Constant => self.t_2q_base,
        }
    }

    pub fn swap(&self, ions_in_trap: usize) -> f64 {
        self.t_swap_factor * self.gate2(ions_in_trap)
    }

    /// Split, one edge of transport, merge.
    pub fn shuttle(&self) -> f64 {
        self.t_split + self.t_move + self.t_merge
    }

    /// Duration of `op` given the ion count of its host trap (ignored for
    /// single-qubit gates and shuttles).
    pub fn duration(&self, op: &PhysOp, host_occupancy: usize) -> f64 {
        match op {
            PhysOp::Gate1 { .. } => self.t_1q,
            PhysOp::Gate2 { .. } => self.gate2(host_occupancy),
            PhysOp::Swap { .. } => self.swap(host_occupancy),
            PhysOp::Shuttle { .. } => self.shuttle(),
        }
    }

    fn validate(&self) -> Result<(), DeviceError> {
        let fields = [
            ("t_1q", self.t_1q),
            ("t_2q_base", self.t_2q_base),
            ("t_2q_slope", self.t_2q_slope),
            ("t_swap_factor", self.t_swap_factor),
            ("t_split", self.t_split),
            ("t_move", self.t_move),
            ("t_merge", self.t_merge),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(DeviceError::InvalidSpec(format!("timing `{name}` must be a positive number, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub topology: Topology,
    #[serde(rename = "traps")]
    pub n_traps: usize,
    /// Maximum ions per trap.
    pub capacity: usize,
    /// Slots per trap left empty by the initial placement.
    #[serde(default)]
    pub excess_capacity: usize,
    #[serde(default)]
    pub timing: TimingModel,
}

impl DeviceSpec {
    pub fn new(topology: Topology, n_traps: usize, capacity: usize, excess_capacity: usize) -> Self {
        DeviceSpec { topology, n_traps, capacity, excess_capacity, timing: TimingModel::default() }
    }

    pub fn linear(n_traps: usize, capacity: usize, excess_capacity: usize) -> Self {
        Self::new(Topology::Linear, n_traps, capacity, excess_capacity)
    }

    pub fn ring(n_traps: usize, capacity: usize, excess_capacity: usize) -> Self {
        Self::new(Topology::Ring, n_traps, capacity, excess_capacity)
    }

    pub fn with_timing(mut self, timing: TimingModel) -> Self {
        self.timing = timing;
        self
    }

    /// Slots per trap available to the initial placement.
    pub fn usable_capacity(&self) -> usize {
        self.capacity.saturating_sub(self.excess_capacity)
    }

    pub fn total_usable(&self) -> usize {
        self.n_traps * self.usable_capacity()
    }

    pub fn total_physical(&self) -> usize {
        self.n_traps * self.capacity
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.n_traps == 0 {
            return Err(DeviceError::InvalidSpec("device needs at least one trap".into()));
        }
        if self.capacity == 0 {
            return Err(DeviceError::InvalidSpec("trap capacity must be at least 1".into()));
        }
        if self.excess_capacity >= self.capacity {
            return Err(DeviceError::InvalidSpec(format!(
                "excess capacity {} must be smaller than capacity {}",
                self.excess_capacity, self.capacity
            )));
        }
        self.timing.validate()
    }

    /// Reads a TOML device description. Unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, DeviceError> {
        let spec: DeviceSpec = toml::from_str(text).map_err(|e| DeviceError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, DeviceError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| DeviceError::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("device spec serializes")
    }

    /// Short human-readable summary, e.g. `linear-6x17-e2`.
    pub fn summary(&self) -> String {
        format!("{}-{}x{}-e{}", self.topology, self.n_traps, self.capacity, self.excess_capacity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Trap connectivity with precomputed hop distances and canonical
/// shortest-path next hops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapGraph {
    topology: Topology,
    adjacency: Vec<Vec<TrapId>>,
    distance: Vec<Vec<usize>>,
    next_hop: Vec<Vec<TrapId>>,
}

impl TrapGraph {
    pub fn new(topology: Topology, n_traps: usize) -> Self {
        let mut adjacency = vec![Vec::new(); n_traps];
        let mut connect = |a: usize, b: usize| {
            if a != b && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        };
        for t in 1..n_traps {
            connect(t - 1, t);
        }
        if topology == Topology::Ring && n_traps > 2 {
            connect(n_traps - 1, 0);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        // unit-weight shortest paths: BFS from every target, neighbours in
        // ascending order, so next_hop[a][b] is the lowest-index neighbour
        // of `a` on some shortest path to `b`.
        let mut distance = vec![vec![usize::MAX; n_traps]; n_traps];
        for (src, row) in distance.iter_mut().enumerate() {
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if row[v] == usize::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        let mut next_hop = vec![vec![0; n_traps]; n_traps];
        for a in 0..n_traps {
            for b in 0..n_traps {
                next_hop[a][b] = if a == b {
                    a
                } else {
                    *adjacency[a]
                        .iter()
                        .find(|&&n| distance[n][b] + 1 == distance[a][b])
                        .expect("connected trap graph")
                };
            }
        }
        TrapGraph { topology, adjacency, distance, next_hop }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n_traps(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, t: TrapId) -> &[TrapId] {
        &self.adjacency[t]
    }

    pub fn adjacent(&self, a: TrapId, b: TrapId) -> bool {
        self.adjacency[a].contains(&b)
    }

    /// Hop count between two traps.
    pub fn distance(&self, a: TrapId, b: TrapId) -> usize {
        self.distance[a][b]
    }

    pub fn next_hop(&self, from: TrapId, to: TrapId) -> TrapId {
        self.next_hop[from][to]
    }

    /// Canonical shortest path, both endpoints included.
    pub fn path(&self, from: TrapId, to: TrapId) -> Vec<TrapId> {
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.next_hop[cur][to];
            path.push(cur);
        }
        path
    }

    /// Which end of `trap`'s chain faces the adjacent trap `toward`.
    pub fn facing_side(&self, trap: TrapId, toward: TrapId) -> Side {
        let n = self.n_traps();
        if self.topology == Topology::Ring && n > 2 {
            if toward == (trap + 1) % n {
                Side::Right
            } else {
                Side::Left
            }
        } else if toward > trap {
            Side::Right
        } else {
            Side::Left
        }
    }
}

/// A physical operation on the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhysOp {
    /// Circuit gate `gate` on a single ion.
    Gate1 { gate: usize, qubit: QubitId },
    /// Circuit gate `gate` on two co-trapped ions.
    Gate2 { gate: usize, a: QubitId, b: QubitId },
    /// Exchange chain positions `pos` and `pos + 1` of `trap`.
    Swap { trap: TrapId, pos: usize },
    /// Split `qubit` off the end of `from` facing `to`, move one edge, merge
    /// into the end of `to` facing `from`.
    Shuttle { qubit: QubitId, from: TrapId, to: TrapId },
}

impl PhysOp {
    pub fn kind(&self) -> &'static str {
        match self {
            PhysOp::Gate1 { .. } => "gate1",
            PhysOp::Gate2 { .. } => "gate2",
            PhysOp::Swap { .. } => "swap",
            PhysOp::Shuttle { .. } => "shuttle",
        }
    }

    pub fn is_movement(&self) -> bool {
        matches!(self, PhysOp::Swap { .. } | PhysOp::Shuttle { .. })
    }

    /// Circuit gate index, for gate ops.
    pub fn gate_index(&self) -> Option<usize> {
        match *self {
            PhysOp::Gate1 { gate, .. } | PhysOp::Gate2 { gate, .. } => Some(gate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DeviceError {
    #[error("invalid device: {0}")]
    InvalidSpec(String),
    #[error("device config: {0}")]
    Config(String),
    #[error("trap {0} does not exist")]
    NoSuchTrap(TrapId),
    #[error("{0} is not placed on the device")]
    UnknownQubit(QubitId),
    #[error("{0} is placed more than once")]
    DuplicateQubit(QubitId),
    #[error("gate operands {a} (trap {trap_a}) and {b} (trap {trap_b}) are not co-trapped")]
    NotCoTrapped { a: QubitId, b: QubitId, trap_a: TrapId, trap_b: TrapId },
    #[error("swap at position {pos} out of range for trap {trap} holding {len} ions")]
    SwapOutOfRange { trap: TrapId, pos: usize, len: usize },
    #[error("traps {from} and {to} are not adjacent")]
    NotAdjacent { from: TrapId, to: TrapId },
    #[error("{qubit} is in trap {actual}, not trap {expected}")]
    WrongTrap { qubit: QubitId, expected: TrapId, actual: TrapId },
    #[error("{qubit} is not at the boundary of trap {from} facing trap {to}")]
    NotAtBoundary { qubit: QubitId, from: TrapId, to: TrapId },
    #[error("trap {trap} is full ({capacity} ions)")]
    TrapFull { trap: TrapId, capacity: usize },
}

/// Ion chains of every trap plus the trap graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    graph: Arc<TrapGraph>,
    capacity: usize,
    chains: Vec<Vec<QubitId>>,
    location: Vec<Option<TrapId>>,
}

/// Empty device for `spec`.
pub fn build_device(spec: &DeviceSpec) -> Result<DeviceState, DeviceError> {
    spec.validate()?;
    Ok(DeviceState {
        graph: Arc::new(TrapGraph::new(spec.topology, spec.n_traps)),
        capacity: spec.capacity,
        chains: vec![Vec::new(); spec.n_traps],
        location: Vec::new(),
    })
}

impl DeviceState {
    /// Device populated with the given chains (one per trap, left to right).
    pub fn with_chains(spec: &DeviceSpec, chains: Vec<Vec<QubitId>>) -> Result<Self, DeviceError> {
        let mut state = build_device(spec)?;
        if chains.len() != spec.n_traps {
            return Err(DeviceError::InvalidSpec(format!(
                "{} chains given for {} traps",
                chains.len(),
                spec.n_traps
            )));
        }
        let n_qubits = chains.iter().flatten().map(|q| q.0 + 1).max().unwrap_or(0);
        let mut location = vec![None; n_qubits];
        for (t, chain) in chains.iter().enumerate() {
            if chain.len() > spec.capacity {
                return Err(DeviceError::TrapFull { trap: t, capacity: spec.capacity });
            }
            for &q in chain {
                if location[q.0].replace(t).is_some() {
                    return Err(DeviceError::DuplicateQubit(q));
                }
            }
        }
        state.chains = chains;
        state.location = location;
        Ok(state)
    }

    pub fn graph(&self) -> &TrapGraph {
        &self.graph
    }

    pub fn n_traps(&self) -> usize {
        self.chains.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn chains(&self) -> &[Vec<QubitId>] {
        &self.chains
    }

    pub fn chain(&self, t: TrapId) -> &[QubitId] {
        &self.chains[t]
    }

    pub fn occupancy(&self, t: TrapId) -> usize {
        self.chains[t].len()
    }

    pub fn occupancies(&self) -> Vec<usize> {
        self.chains.iter().map(Vec::len).collect()
    }

    pub fn is_full(&self, t: TrapId) -> bool {
        self.chains[t].len() >= self.capacity
    }

    pub fn n_ions(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn trap_of(&self, q: QubitId) -> Option<TrapId> {
        self.location.get(q.0).copied().flatten()
    }

    pub fn position_of(&self, q: QubitId) -> Option<usize> {
        let t = self.trap_of(q)?;
        self.chains[t].iter().position(|&x| x == q)
    }

    pub fn trap_distance(&self, a: TrapId, b: TrapId) -> usize {
        self.graph.distance(a, b)
    }

    /// Index of the end of `trap`'s chain facing `toward`.
    pub fn boundary_position(&self, trap: TrapId, toward: TrapId) -> Option<usize> {
        let len = self.chains[trap].len();
        if len == 0 {
            return None;
        }
        Some(match self.graph.facing_side(trap, toward) {
            Side::Left => 0,
            Side::Right => len - 1,
        })
    }

    /// SWAPs needed to bring `q` to the end of its chain facing `toward`.
    pub fn swaps_to_boundary(&self, q: QubitId, toward: TrapId) -> usize {
        let t = self.trap_of(q).expect("placed qubit");
        let pos = self.position_of(q).expect("placed qubit");
        match self.graph.facing_side(t, toward) {
            Side::Left => pos,
            Side::Right => self.chains[t].len() - 1 - pos,
        }
    }

    /// Ion count of the trap an op runs in. Shuttles report the source trap.
    pub fn host_occupancy(&self, op: &PhysOp) -> usize {
        match *op {
            PhysOp::Gate1 { qubit, .. } => self.trap_of(qubit).map_or(0, |t| self.occupancy(t)),
            PhysOp::Gate2 { a, .. } => self.trap_of(a).map_or(0, |t| self.occupancy(t)),
            PhysOp::Swap { trap, .. } => self.chains.get(trap).map_or(0, Vec::len),
            PhysOp::Shuttle { from, .. } => self.chains.get(from).map_or(0, Vec::len),
        }
    }

    /// Traps an op occupies while it runs: the host trap, or both endpoints
    /// of a shuttle.
    pub fn traps_of(&self, op: &PhysOp) -> Result<Vec<TrapId>, DeviceError> {
        match *op {
            PhysOp::Gate1 { qubit, .. } => Ok(vec![self.trap_of(qubit).ok_or(DeviceError::UnknownQubit(qubit))?]),
            PhysOp::Gate2 { a, .. } => Ok(vec![self.trap_of(a).ok_or(DeviceError::UnknownQubit(a))?]),
            PhysOp::Swap { trap, .. } => Ok(vec![trap]),
            PhysOp::Shuttle { from, to, .. } => Ok(vec![from.min(to), from.max(to)]),
        }
    }

    /// Ions an op acts on, resolved against the current chains.
    pub fn qubits_of(&self, op: &PhysOp) -> Vec<QubitId> {
        match *op {
            PhysOp::Gate1 { qubit, .. } => vec![qubit],
            PhysOp::Gate2 { a, b, .. } => vec![a, b],
            PhysOp::Swap { trap, pos } => {
                self.chains.get(trap).and_then(|c| c.get(pos..pos + 2)).map(<[_]>::to_vec).unwrap_or_default()
            }
            PhysOp::Shuttle { qubit, .. } => vec![qubit],
        }
    }

    /// Checks `op`'s preconditions without changing anything.
    pub fn check(&self, op: &PhysOp) -> Result<(), DeviceError> {
        match *op {
            PhysOp::Gate1 { qubit, .. } => {
                self.trap_of(qubit).ok_or(DeviceError::UnknownQubit(qubit))?;
            }
            PhysOp::Gate2 { a, b, .. } => {
                let ta = self.trap_of(a).ok_or(DeviceError::UnknownQubit(a))?;
                let tb = self.trap_of(b).ok_or(DeviceError::UnknownQubit(b))?;
                if ta != tb {
                    return Err(DeviceError::NotCoTrapped { a, b, trap_a: ta, trap_b: tb });
                }
            }
            PhysOp::Swap { trap, pos } => {
                let len = self.chains.get(trap).ok_or(DeviceError::NoSuchTrap(trap))?.len();
                if pos + 1 >= len {
                    return Err(DeviceError::SwapOutOfRange { trap, pos, len });
                }
            }
            PhysOp::Shuttle { qubit, from, to } => {
                if from >= self.n_traps() {
                    return Err(DeviceError::NoSuchTrap(from));
                }
                if to >= self.n_traps() {
                    return Err(DeviceError::NoSuchTrap(to));
                }
                if !self.graph.adjacent(from, to) {
                    return Err(DeviceError::NotAdjacent { from, to });
                }
                let actual = self.trap_of(qubit).ok_or(DeviceError::UnknownQubit(qubit))?;
                if actual != from {
                    return Err(DeviceError::WrongTrap { qubit, expected: from, actual });
                }
                let boundary = self.boundary_position(from, to).expect("non-empty source");
                if self.chains[from][boundary] != qubit {
                    return Err(DeviceError::NotAtBoundary { qubit, from, to });
                }
                if self.is_full(to) {
                    return Err(DeviceError::TrapFull { trap: to, capacity: self.capacity });
                }
            }
        }
        Ok(())
    }

    /// Applies `op` in place. On error the state is left untouched.
    pub fn apply(&mut self, op: &PhysOp) -> Result<(), DeviceError> {
        self.check(op)?;
        match *op {
            PhysOp::Gate1 { .. } | PhysOp::Gate2 { .. } => {}
            PhysOp::Swap { trap, pos } => self.chains[trap].swap(pos, pos + 1),
            PhysOp::Shuttle { qubit, from, to } => {
                match self.graph.facing_side(from, to) {
                    Side::Left => self.chains[from].remove(0),
                    Side::Right => self.chains[from].pop().expect("non-empty source"),
                };
                match self.graph.facing_side(to, from) {
                    Side::Left => self.chains[to].insert(0, qubit),
                    Side::Right => self.chains[to].push(qubit),
                }
                self.location[qubit.0] = Some(to);
            }
        }
        Ok(())
    }

    /// Functional form of [`DeviceState::apply`].
    pub fn apply_op(&self, op: &PhysOp) -> Result<DeviceState, DeviceError> {
        let mut next = self.clone();
        next.apply(op)?;
        Ok(next)
    }

    /// One line per trap, e.g. `t0[3 1]/4`.
    pub fn occupancy_snapshot(&self) -> String {
        self.chains
            .iter()
            .enumerate()
            .map(|(t, c)| {
                let ids: Vec<String> = c.iter().map(|q| q.0.to_string()).collect();
                format!("t{t}[{}]/{}", ids.join(" "), self.capacity)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
