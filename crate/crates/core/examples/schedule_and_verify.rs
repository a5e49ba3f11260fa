//! Schedules a four-gate circuit on two traps, prints the op timeline and
//! metrics, then shows the verifier rejecting corrupted copies.
//!
//! cargo run --example schedule_and_verify

use qccd::samples;
use qccd::scheduler::{schedule, verify_schedule, ScheduleOptions};

fn main() {
    let (c, placement, spec) = samples::mapping_walkthrough();
    let init = placement.to_state(&spec).unwrap();
    let s = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap();
    print!("{}", s.to_tsv());
    println!();
    print!("{}", s.metrics_text());
    println!("verify: {:?}", verify_schedule(&c, &init, &spec.timing, &s.ops));

    let mut dropped = s.ops.clone();
    let last_gate = dropped.iter().rposition(|o| o.op.gate_index().is_some()).unwrap();
    dropped.remove(last_gate);
    println!("\ndrop a gate:      {}", verify_schedule(&c, &init, &spec.timing, &dropped).unwrap_err());

    let mut early = s.ops.clone();
    let i = early.iter().position(|o| o.op.gate_index() == Some(2)).unwrap();
    let d = early[i].end - early[i].start;
    early[i].start = 0.0;
    early[i].end = d;
    println!("move gate 2 to t=0 (before its operand arrives): {}", verify_schedule(&c, &init, &spec.timing, &early).unwrap_err());

    let mut short = s.ops.clone();
    short[0].end = short[0].start + 1e-7;
    println!("shorten an op:    {}", verify_schedule(&c, &init, &spec.timing, &short).unwrap_err());
}
