//! Parses a small OpenQASM circuit and prints its two-qubit slices, the
//! weighted interaction graph and the gate dependency edges.
//!
//! cargo run --example circuit_analysis [file.qasm]

use qccd::circuit::{compute_slices, dependency_graph, interaction_graph, parse_circuit};

const DEFAULT: &str = r#"
OPENQASM 2.0;
include "qelib1.inc";
qreg q[4];
h q[0];
cx q[0], q[1];
cx q[2], q[3];
cx q[1], q[2];
rz(0.5) q[2];
cx q[0], q[1];
cx q[2], q[3];
"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => DEFAULT.to_string(),
    };
    let c = parse_circuit(&text).unwrap_or_else(|e| panic!("parse error: {e}"));
    println!("{} qubits, {} gates ({} two-qubit)", c.n_qubits(), c.len(), c.two_qubit_count());

    let slices = compute_slices(&c);
    println!("\n{} slices, {:.2} two-qubit gates per slice", slices.len(), slices.mean_gates_per_slice());
    for (i, s) in slices.slices.iter().enumerate() {
        let pairs: Vec<String> = s.iter().map(|&g| {
            let (a, b) = c.gates()[g].pair().unwrap();
            format!("({a},{b})")
        }).collect();
        println!("  slice {i}: {}", pairs.join(" "));
    }

    let g = interaction_graph(&c);
    println!("\ninteraction graph: {} edges, degrees {:?}", g.edge_count(), g.degrees());
    for (pair, w) in g.edges() {
        println!("  {}-{}  x{w}", pair.0, pair.1);
    }

    let deps = dependency_graph(&c);
    let edges: Vec<String> = deps.edges().map(|(a, b)| format!("{a}->{b}")).collect();
    println!("\ndependencies: {}", edges.join(" "));
    println!("topological order: {:?}", deps.topological_order().unwrap());
}
