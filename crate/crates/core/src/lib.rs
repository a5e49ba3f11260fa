//! Qubit allocation, ion routing and trap-serialized scheduling for
//! trapped-ion QCCD devices.
//!
//! Pipeline: [`circuit`] parses or builds a circuit and derives slices, the
//! interaction graph and gate dependencies; [`placement`] assigns qubits to
//! trap chains (spatio-temporal aware, greedy or random); [`scheduler`]
//! executes the circuit on a [`architecture::DeviceState`], asking
//! [`router`] for SWAP/shuttle sequences whenever a gate spans two traps;
//! [`report`] aggregates the resulting metrics. [`benchgen`] produces the
//! benchmark families and [`cli`] wires everything into compile, sweep and
//! compare drivers.

pub mod architecture;
pub mod benchgen;
pub mod circuit;
pub mod cli;
pub mod placement;
pub mod report;
pub mod router;
pub mod samples;
pub mod scheduler;

pub use architecture::{build_device, DeviceSpec, DeviceState, PhysOp, TimingModel, Topology};
pub use benchgen::{BenchmarkSpec, Family};
pub use circuit::{parse_circuit, Circuit, QubitId};
pub use placement::{place, Placement, Strategy};
pub use report::RunRecord;
pub use scheduler::{schedule, verify_schedule, Metrics, Schedule, ScheduleOptions};

use thiserror::Error;

/// Any pipeline failure, tagged with the stage it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("circuit: {0}")]
    Circuit(#[from] circuit::CircuitError),
    #[error("architecture: {0}")]
    Device(#[from] architecture::DeviceError),
    #[error("placement: {0}")]
    Placement(#[from] placement::PlacementError),
    #[error("scheduler: {0}")]
    Schedule(#[from] scheduler::ScheduleError),
    #[error("verify: {0}")]
    Verify(#[from] scheduler::Violation),
    #[error("benchgen: {0}")]
    Bench(#[from] benchgen::BenchError),
    #[error("report: {0}")]
    Report(#[from] report::ReportError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Process exit status: 2 for routing deadlock, 3 for a schedule that
    /// fails verification, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schedule(e) if e.is_deadlock() => 2,
            Error::Verify(_) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
