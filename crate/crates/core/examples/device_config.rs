//! Loads a device description from TOML, including a custom timing model,
//! and shows how topology and timing change the result for one benchmark.
//!
//! cargo run --release --example device_config [device.toml]

use qccd::architecture::DeviceSpec;
use qccd::benchgen::{BenchmarkSpec, Family};
use qccd::cli::{run_compile, CompileOptions};
use qccd::placement::Strategy;

const RING: &str = r#"
topology = "ring"
traps = 6
capacity = 17
excess_capacity = 2

[timing]
t_1q = 10e-6
t_2q_base = 100e-6
t_2q_slope = 0.05
t_swap_factor = 3.0
t_split = 40e-6
t_move = 5e-6
t_merge = 40e-6
scaling = "linear"
"#;

fn main() {
    let custom = match std::env::args().nth(1) {
        Some(path) => DeviceSpec::from_file(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => DeviceSpec::from_toml(RING).unwrap(),
    };
    let c = BenchmarkSpec::new(Family::Qft, 64).generate().unwrap();
    let devices = [("linear, default timing", DeviceSpec::linear(6, 17, 2)), ("ring, default timing", DeviceSpec::ring(6, 17, 2)), ("custom", custom)];
    for (name, spec) in devices {
        let rec = run_compile(&c, &spec, &CompileOptions::new("qft-64", Strategy::Sta)).unwrap().record;
        println!("{name:<24} {:<28} shuttles {:>5}  swaps {:>5}  time {:.4} s", spec.summary(), rec.metrics.shuttles, rec.metrics.swaps, rec.metrics.total_time);
    }
    println!("\nround-trip TOML of the default device:\n{}", DeviceSpec::linear(6, 17, 2).to_toml());
}
