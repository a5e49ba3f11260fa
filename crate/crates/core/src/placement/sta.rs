//! Spatio-temporal aware allocation.
//!
//! Qubits are visited by interaction ratio (distinct partners / N). Each
//! visited qubit is paired with its heaviest partner in the temporal weight
//! list, `T(a, b) = sum over slices s where (a, b) interact of 2^-s`. If that
//! partner already appears in an earlier (heavier) pair, the partner is
//! handled first. Once every qubit has a trap, split pairs are walked from
//! lightest to heaviest and both ends are moved to the chain ends facing each
//! other, so the heaviest split pairs finish at the trap boundaries.

use crate::architecture::DeviceSpec;
use crate::circuit::{compute_slices, interaction_graph, Circuit, InteractionGraph, QubitId, QubitPair, SliceList};

use super::{check_fits, Allocator, Placement, PlacementError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioEntry {
    pub qubit: QubitId,
    /// Distinct interaction partners.
    pub partners: usize,
    pub n_qubits: usize,
    /// Two-qubit gates touching the qubit; first tie-break.
    pub gate_count: u64,
}

impl RatioEntry {
    pub fn ratio(&self) -> f64 {
        self.partners as f64 / self.n_qubits as f64
    }
}

/// Qubits with at least one partner, highest ratio first. Ties go to the
/// qubit with more two-qubit gates, then to the lower index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RatioList(pub Vec<RatioEntry>);

impl RatioList {
    pub fn head(&self) -> Option<&RatioEntry> {
        self.0.first()
    }

    pub fn qubits(&self) -> Vec<QubitId> {
        self.0.iter().map(|e| e.qubit).collect()
    }
}

pub fn compute_ratios(g: &InteractionGraph, n: usize) -> RatioList {
    assert!(n >= 1, "ratio needs at least one qubit");
    let degrees = g.degrees();
    let weights = g.incident_weights();
    let mut entries: Vec<RatioEntry> = (0..g.n_qubits())
        .filter(|&q| degrees[q] > 0)
        .map(|q| RatioEntry { qubit: QubitId(q), partners: degrees[q], n_qubits: n, gate_count: weights[q] })
        .collect();
    entries.sort_by(|a, b| {
        b.partners
            .cmp(&a.partners)
            .then(b.gate_count.cmp(&a.gate_count))
            .then(a.qubit.cmp(&b.qubit))
    });
    RatioList(entries)
}

/// Interacting pairs, heaviest first; equal weights in lexicographic pair
/// order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemporalWeights(pub Vec<(QubitPair, f64)>);

impl TemporalWeights {
    pub fn head(&self) -> Option<&(QubitPair, f64)> {
        self.0.first()
    }

    pub fn get(&self, pair: QubitPair) -> Option<f64> {
        self.0.iter().find(|(p, _)| *p == pair).map(|(_, w)| *w)
    }

    pub fn pairs(&self) -> Vec<QubitPair> {
        self.0.iter().map(|(p, _)| *p).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sums `2^-s` over the slices `s` in which each pair has a gate. Slices
/// past index 1074 contribute exactly zero in double precision.
pub fn compute_temporal_weights(slices: &SliceList, c: &Circuit) -> TemporalWeights {
    let mut acc: std::collections::BTreeMap<QubitPair, f64> = Default::default();
    for (s, slice) in slices.slices.iter().enumerate() {
        let w = 0.5f64.powi(s.min(i32::MAX as usize) as i32);
        for &g in slice {
            let (a, b) = c.gates()[g].pair().expect("slices hold two-qubit gates");
            *acc.entry(QubitPair::new(a, b)).or_insert(0.0) += w;
        }
    }
    let mut list: Vec<(QubitPair, f64)> = acc.into_iter().collect();
    // stable sort keeps the lexicographic order among equal weights
    list.sort_by(|a, b| b.1.total_cmp(&a.1));
    TemporalWeights(list)
}

struct StaContext {
    alloc: Allocator,
    ratios: Vec<QubitId>,
    pairs: Vec<QubitPair>,
}

impl StaContext {
    fn first_pair_of(&self, q: QubitId) -> Option<usize> {
        self.pairs.iter().position(|p| p.contains(q))
    }

    /// Places `q1` with its heaviest remaining partner, first resolving the
    /// partner if it shows up in an earlier pair. Each step of that chain
    /// lands on a strictly earlier pair, so it is walked iteratively and then
    /// unwound deepest-first.
    fn map_qubit(&mut self, q1: QubitId) -> Result<(), PlacementError> {
        let mut chain: Vec<(QubitId, QubitPair)> = Vec::new();
        let mut current = q1;
        while let Some(pos) = self.first_pair_of(current) {
            let pair = self.pairs[pos];
            chain.push((current, pair));
            let partner = pair.partner(current);
            if self.pairs[..pos].iter().any(|p| p.contains(partner)) {
                current = partner;
            } else {
                break;
            }
        }

        for &(q, pair) in chain.iter().rev() {
            let partner = pair.partner(q);
            let (placed_q, placed_p) = (self.alloc.is_placed(q), self.alloc.is_placed(partner));
            if placed_q && placed_p {
                continue;
            }
            match (placed_q, placed_p) {
                (false, false) => self.alloc.place_pair(q, partner)?,
                (true, false) => self.alloc.place_near(partner, self.alloc.trap_of(q).unwrap())?,
                (false, true) => self.alloc.place_near(q, self.alloc.trap_of(partner).unwrap())?,
                (true, true) => unreachable!(),
            }
            self.ratios.retain(|&x| x != q && x != partner);
            self.pairs.retain(|&p| p != pair);
        }

        // a qubit in the ratio list always has a pair left, but keep the
        // main loop moving regardless
        if !self.alloc.is_placed(q1) {
            self.alloc.deal_round_robin(&[q1])?;
            self.ratios.retain(|&x| x != q1);
        }
        Ok(())
    }
}

/// Spatio-temporal aware placement.
pub fn sta_place(c: &Circuit, spec: &DeviceSpec) -> Result<Placement, PlacementError> {
    let n = c.n_qubits();
    check_fits(n, spec)?;
    let graph = interaction_graph(c);
    let slices = compute_slices(c);
    let ratios = compute_ratios(&graph, n.max(1));
    let weights = compute_temporal_weights(&slices, c);

    let mut ctx = StaContext { alloc: Allocator::new(spec, n), ratios: ratios.qubits(), pairs: weights.pairs() };
    while let Some(&q) = ctx.ratios.first() {
        ctx.map_qubit(q)?;
    }
    let isolated: Vec<QubitId> = (0..n).map(QubitId).filter(|&q| !ctx.alloc.is_placed(q)).collect();
    ctx.alloc.deal_round_robin(&isolated)?;

    let mut placement = ctx.alloc.into_placement();
    order_qubits(&weights, &mut placement, spec);
    Ok(placement)
}

/// Walks `weights` from lightest to heaviest; for each pair split across two
/// traps, moves each member to the end of its chain facing the other's trap
/// (first hop of the shortest path). Trap membership never changes.
pub fn order_qubits(weights: &TemporalWeights, placement: &mut Placement, spec: &DeviceSpec) {
    let mut alloc = Allocator::from_placement(placement, spec);
    for &(pair, _) in weights.0.iter().rev() {
        let (Some(ta), Some(tb)) = (alloc.trap_of(pair.0), alloc.trap_of(pair.1)) else { continue };
        if ta == tb {
            continue;
        }
        let hop_a = alloc.graph().next_hop(ta, tb);
        let hop_b = alloc.graph().next_hop(tb, ta);
        alloc.move_to_boundary(pair.0, hop_a);
        alloc.move_to_boundary(pair.1, hop_b);
    }
    *placement = alloc.into_placement();
}
