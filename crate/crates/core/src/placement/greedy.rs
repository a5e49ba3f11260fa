//! Edge-weight greedy baseline: heaviest interaction edges are placed first.

use crate::architecture::DeviceSpec;
use crate::circuit::{interaction_graph, Circuit, QubitId, QubitPair};

use super::{check_fits, Allocator, Placement, PlacementError};

pub fn greedy_place(c: &Circuit, spec: &DeviceSpec) -> Result<Placement, PlacementError> {
    let n = c.n_qubits();
    check_fits(n, spec)?;
    let mut edges: Vec<(QubitPair, u32)> = interaction_graph(c).edges().collect();
    // stable: lexicographic order survives among equal weights
    edges.sort_by_key(|&(_, w)| std::cmp::Reverse(w));

    let mut alloc = Allocator::new(spec, n);
    for (QubitPair(a, b), _) in edges {
        match (alloc.trap_of(a), alloc.trap_of(b)) {
            (None, None) => alloc.place_pair(a, b)?,
            (Some(t), None) => alloc.place_near(b, t)?,
            (None, Some(t)) => alloc.place_near(a, t)?,
            (Some(_), Some(_)) => {}
        }
    }
    let isolated: Vec<QubitId> = (0..n).map(QubitId).filter(|&q| !alloc.is_placed(q)).collect();
    alloc.deal_round_robin(&isolated)?;
    Ok(alloc.into_placement())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn heavier_edges_first() {
        let mut c = Circuit::new(4);
        c.push2("cx", 2, 3);
        for _ in 0..5 {
            c.push2("cx", 0, 1);
        }
        let p = greedy_place(&c, &DeviceSpec::linear(2, 2, 0)).unwrap();
        assert_eq!(p.chains(), &[vec![q(0), q(1)], vec![q(2), q(3)]]);
    }

    #[test]
    fn partner_goes_to_nearest_trap_with_room() {
        let mut c = Circuit::new(3);
        c.push2("cx", 0, 1).push2("cx", 0, 1).push2("cx", 1, 2);
        let p = greedy_place(&c, &DeviceSpec::linear(2, 3, 1)).unwrap();
        assert_eq!(p.chains(), &[vec![q(0), q(1)], vec![q(2)]]);
    }

    #[test]
    fn no_interactions_fill_round_robin() {
        let mut c = Circuit::new(5);
        c.push1("h", 0);
        let p = greedy_place(&c, &DeviceSpec::linear(3, 2, 0)).unwrap();
        assert_eq!(p.chains(), &[vec![q(0), q(3)], vec![q(1), q(4)], vec![q(2)]]);
    }
}
