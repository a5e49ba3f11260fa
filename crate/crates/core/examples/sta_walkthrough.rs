//! Step-by-step spatio-temporal aware allocation of a five-qubit circuit on
//! two traps: ratio list, temporal weights, trap membership and the final
//! chain order that puts heavily interacting qubits at the facing ends.
//!
//! cargo run --example sta_walkthrough

use qccd::circuit::{compute_slices, interaction_graph};
use qccd::placement::{compute_ratios, compute_temporal_weights, place, sta_place, Placement, Strategy};
use qccd::samples;

fn main() {
    let c = samples::allocation_walkthrough();
    let spec = samples::allocation_walkthrough_device();
    println!("device: {}", spec.summary());

    let slices = compute_slices(&c);
    for (i, s) in slices.slices.iter().enumerate() {
        let pairs: Vec<String> = s.iter().map(|&g| {
            let (a, b) = c.gates()[g].pair().unwrap();
            format!("({a},{b})")
        }).collect();
        println!("slice {i}: {}", pairs.join(" "));
    }

    println!("\nratio list (distinct partners / qubits):");
    for e in &compute_ratios(&interaction_graph(&c), c.n_qubits()).0 {
        println!("  {}  {:.2}", e.qubit, e.ratio());
    }

    println!("\ntemporal weights (sum of 2^-slice over shared slices):");
    for (pair, w) in &compute_temporal_weights(&slices, &c).0 {
        println!("  ({}, {})  {w:.4}", pair.0, pair.1);
    }

    let sta = sta_place(&c, &spec).unwrap();
    println!("\nchains, left to right:");
    println!("  sta    {}", fmt_chains(&sta));
    for strategy in [Strategy::Greedy, Strategy::Random] {
        println!("  {strategy:<6} {}", fmt_chains(&place(strategy, &c, &spec, 0).unwrap()));
    }
}

fn fmt_chains(p: &Placement) -> String {
    p.chains()
        .iter()
        .map(|ch| format!("[{}]", ch.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join(" | ")
}
