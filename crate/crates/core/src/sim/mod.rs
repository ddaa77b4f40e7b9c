//! Stochastic trajectory engine: Pauli frame plus per-qubit leakage level.

pub(crate) mod engine;
mod population;
mod record;

pub use engine::{run_batch, run_shot, ExecPlan, Level, Sim};
pub use population::{excess_population, population_series, PopulationSeries, ProbePoint};
pub use record::{BitMatrix, RecordSet, ShotRecord};

use sha2::{Digest, Sha256};

/// Short stable content digest used for provenance checks.
pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out[..8].iter().map(|b| format!("{b:02x}")).collect()
}
