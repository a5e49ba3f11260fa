//! Seeded random baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::architecture::DeviceSpec;
use crate::circuit::{Circuit, QubitId};

use super::{check_fits, Allocator, Placement, PlacementError};

/// Shuffles the qubits and deals them round-robin over the traps' usable
/// slots. Identical seeds give identical placements.
pub fn random_place(c: &Circuit, spec: &DeviceSpec, seed: u64) -> Result<Placement, PlacementError> {
    let n = c.n_qubits();
    check_fits(n, spec)?;
    let mut qubits: Vec<QubitId> = (0..n).map(QubitId).collect();
    qubits.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut alloc = Allocator::new(spec, n);
    alloc.deal_round_robin(&qubits)?;
    Ok(alloc.into_placement())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let c = Circuit::new(20);
        let spec = DeviceSpec::linear(4, 6, 1);
        assert_eq!(random_place(&c, &spec, 7).unwrap(), random_place(&c, &spec, 7).unwrap());
        assert_ne!(random_place(&c, &spec, 7).unwrap(), random_place(&c, &spec, 8).unwrap());
    }

    #[test]
    fn fills_usable_slots_exactly() {
        let spec = DeviceSpec::linear(4, 6, 2);
        let c = Circuit::new(spec.total_usable());
        let p = random_place(&c, &spec, 3).unwrap();
        assert!(p.chains().iter().all(|ch| ch.len() == 4));
        p.validate(16, &spec).unwrap();
    }

    #[test]
    fn each_qubit_is_equally_likely_in_either_trap() {
        let spec = DeviceSpec::linear(2, 5, 1);
        let c = Circuit::new(8);
        let mut in_trap0 = [0u32; 8];
        for seed in 0..1000 {
            let p = random_place(&c, &spec, seed).unwrap();
            for q in &p.chains()[0] {
                in_trap0[q.0] += 1;
            }
        }
        for count in in_trap0 {
            let f = count as f64 / 1000.0;
            assert!((f - 0.5).abs() <= 0.05, "frequency {f}");
        }
    }
}
