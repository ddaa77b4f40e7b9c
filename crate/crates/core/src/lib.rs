//! Leakage-aware stochastic simulation of quantum error correcting circuits.
//!
//! The crate is organized around the life cycle of a memory experiment:
//!
//! * [`circuits`] builds repetition-code and rotated-surface-code cycle
//!   circuits, including leakage-removal operations, error-injection layers,
//!   and detector definitions.
//! * [`noise`] holds every stochastic rate and converts physical parameters
//!   into per-gate sampling tables.
//! * [`cz_ladder`] is a first-principles two-transmon model of the diabatic
//!   CZ gate, used as an oracle and default-parameter source for the noise
//!   model.
//! * [`sim`] executes circuits shot by shot with a Pauli frame plus a
//!   per-qubit leakage level label, producing seed-reproducible records.
//! * [`decode`] extracts detection events, builds the weighted detector
//!   graph, and runs exact minimum-weight perfect matching.
//! * [`analysis`] computes detection-probability series, pairwise detector
//!   correlation matrices, nonlinear fits, and error-suppression ratios.

pub mod analysis;
pub mod circuits;
pub mod cz_ladder;
pub mod decode;
mod error;
pub mod noise;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};

/// Crate version recorded in persisted outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
