//! Quantum noise budgets for interferometers whose mirrors are locked to a
//! quieter reference through an auxiliary sensor cavity.
//!
//! Everything is linear and evaluated one angular frequency at a time:
//! quadrature algebra ([`specalg`]), physical elements ([`elements`]), the
//! per-frequency network solve ([`network`]), the built-in configurations with
//! their closed forms ([`scenarios`]) and the per-frequency gain optimizer
//! ([`optimizer`]). [`cli`] wires these into configuration files and CSV/JSON output.

pub mod elements;
pub mod cli;
pub mod error;
pub mod network;
pub mod optimizer;
pub mod scenarios;
pub mod specalg;

pub use error::{Error, Result};
pub use network::{budget, GridSpec, NoiseBudget};
pub use scenarios::{Scenario, ScenarioId, Setup};
pub use specalg::{AngularFrequency, Units};
