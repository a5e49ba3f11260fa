//! Generates every benchmark family at a few sizes and prints its two-qubit
//! gate count, slice count and average parallelism.
//!
//! cargo run --release --example benchmarks

use qccd::benchgen::{BenchmarkSpec, Family};
use qccd::circuit::compute_slices;

fn main() {
    println!("{:<16} {:>7} {:>9} {:>8} {:>10}", "benchmark", "qubits", "2q gates", "slices", "gates/slc");
    for family in Family::ALL {
        for n in [16, 32, 64, 128] {
            let Some(n) = family.fit_qubits(n) else { continue };
            let spec = BenchmarkSpec::new(family, n);
            let c = spec.generate().unwrap();
            let s = compute_slices(&c);
            println!("{:<16} {:>7} {:>9} {:>8} {:>10.2}", spec.id(), n, c.two_qubit_count(), s.len(), s.mean_gates_per_slice());
        }
    }
}
