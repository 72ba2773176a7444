//! Deterministic simulator of a many-core spiking neural network machine.
//!
//! Cores run LIF workloads in 1 ms timesteps and pick a per-millisecond
//! DVFS operating point from the incoming spike load; spikes travel over a
//! key/mask multicast mesh whose links power up per timestep and charge
//! energy per bit; dense layers offload to an emulated MAC array. Every run
//! is bit-identical given the same inputs, for any worker count, with exact
//! fixed-point energy accounting.
//!
//! Start with [`sim::run_simulation`] or the [`sim::Simulation`] builder:
//!
//! ```
//! use spikemesh::{config, network, sim};
//!
//! let sys = config::parse_system_config(
//!     r#"{"mesh":{"width":1,"height":1},"cores_per_chip":2,
//!         "perf_levels":[{"mhz":100,"volts":0.5},{"mhz":200,"volts":0.6}]}"#,
//! )
//! .unwrap();
//! let net = network::parse_network(
//!     r#"{"populations":[{"name":"a","size":20}],
//!         "stimuli":[{"target":"a","rate_hz":200.0}]}"#,
//! )
//! .unwrap();
//! let report = sim::run_simulation(&sys, &net, 100, sim::SimOptions::default()).unwrap();
//! assert_eq!(report.timesteps, 100);
//! ```
//!
//! The `examples/` directory has one runnable example per capability; the
//! `spikemesh` binary wraps the same API as `run`, `capacity`, `validate`,
//! and `dump-tables` subcommands. File formats are specified in
//! `docs/formats.md`.

pub mod accel;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod fabric;
pub mod fixed;
pub mod ledger;
pub mod network;
pub mod place;
pub mod report;
pub mod sim;

pub use config::{parse_system_config, SystemConfig};
pub use error::{Error, Result};
pub use network::{parse_network, NetworkDesc};
pub use sim::{capacity_ratio, run_simulation, SimOptions, Simulation};
