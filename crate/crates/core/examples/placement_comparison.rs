//! Compares STA, greedy and random placement on the adder, QFT and QAOA
//! benchmarks at 64 qubits on a linear 6 x 17 device with two free slots
//! per trap. Random placement is averaged over 20 seeds.
//!
//! cargo run --release --example placement_comparison

use qccd::architecture::DeviceSpec;
use qccd::benchgen::{BenchmarkSpec, Family};
use qccd::placement::{place, Strategy};
use qccd::scheduler::{schedule, ScheduleOptions};

fn main() {
    let spec = DeviceSpec::linear(6, 17, 2);
    println!("{:<8} {:<8} {:>12} {:>10} {:>10}", "bench", "place", "time_s", "shuttles", "swaps");
    for family in [Family::Ca, Family::Da, Family::Qft, Family::Qaoa, Family::Qv, Family::Rnd] {
        let c = BenchmarkSpec::new(family, 64).generate().unwrap();
        for strategy in Strategy::ALL {
            let seeds: Vec<u64> = if strategy == Strategy::Random { (0..20).collect() } else { vec![0] };
            let (mut t, mut sh, mut sw) = (0.0, 0.0, 0.0);
            for &seed in &seeds {
                let init = place(strategy, &c, &spec, seed).unwrap().to_state(&spec).unwrap();
                let m = schedule(&c, &init, &spec.timing, ScheduleOptions::default()).unwrap().metrics;
                t += m.total_time;
                sh += m.shuttles as f64;
                sw += m.swaps as f64;
            }
            let k = seeds.len() as f64;
            println!("{:<8} {:<8} {:>12.4} {:>10.1} {:>10.1}", family, strategy, t / k, sh / k, sw / k);
        }
    }
}
