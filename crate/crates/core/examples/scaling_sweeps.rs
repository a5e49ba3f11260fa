//! Runs the three device-scaling sweeps on one benchmark family and writes
//! the results as CSV: strong scaling (more traps, fixed trap size), weak
//! scaling (fixed total capacity spread over more traps) and excess
//! capacity (more free slots per trap).
//!
//! cargo run --release --example scaling_sweeps [family] [out_dir]

use qccd::benchgen::Family;
use qccd::cli::{run_sweep, SweepKind, SweepSpec};
use qccd::placement::Strategy;
use qccd::report::{self, EmitOptions, Format};

fn main() {
    let family: Family = std::env::args().nth(1).as_deref().unwrap_or("qft").parse().unwrap();
    let out = std::env::args().nth(2);
    for kind in [SweepKind::Strong, SweepKind::Weak, SweepKind::ExcessFixedIons, SweepKind::ExcessVarIons] {
        let mut spec = SweepSpec::new(kind, family);
        spec.strategies = vec![Strategy::Sta, Strategy::Greedy];
        let records = run_sweep(&spec, "scaling_sweeps example");
        println!("== {kind:?} ({family})");
        println!("{:>6} {:>8} {:>7} {:>10} {:>9} {:>10}", "param", "place", "qubits", "device", "moves", "time_s");
        for r in &records {
            if r.is_warning() {
                println!("{:>6} {:>8} warning: {}", r.sweep_param.unwrap_or(0), r.strategy, r.warning);
            } else {
                println!(
                    "{:>6} {:>8} {:>7} {:>10} {:>9} {:>10.4}",
                    r.sweep_param.unwrap_or(0),
                    r.strategy,
                    r.metrics.n_qubits,
                    format!("{}x{}", r.device.n_traps, r.device.capacity),
                    r.metrics.moves(),
                    r.metrics.total_time
                );
            }
        }
        if let Some(dir) = &out {
            let csv = report::emit(&records, Format::Csv, EmitOptions::default()).unwrap();
            let path = std::path::Path::new(dir).join(format!("sweep-{kind:?}-{family}.csv").to_lowercase());
            std::fs::create_dir_all(dir).unwrap();
            std::fs::write(&path, csv).unwrap();
            println!("wrote {}", path.display());
        }
        println!();
    }
}
