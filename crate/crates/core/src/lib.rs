//! Wireless charging of a multi-cell qubit quantum battery by qubit chargers
//! coupled through a shared lossy pseudomode.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod ergotropy;
pub mod error;
pub mod model;
pub mod numkernel;
pub mod oracle;
pub mod output;
pub mod presets;
pub mod runner;

pub use analysis::{ChargingReport, Efficiency, IntegratorSettings, SweepAxis};
pub use config::RunConfig;
pub use dynamics::{evolve, IntegratorConfig, Trajectory};
pub use ergotropy::ErgotropyBreakdown;
pub use error::{Error, Result};
pub use model::{BellKind, ModelSpec, Scenario};
pub use numkernel::ComplexMatrix;
pub use oracle::SingleChargerParams;
