//! Circuit construction for repetition-code and rotated-surface-code memory
//! experiments.
//!
//! Circuits are immutable after build: a time-ordered list of [`Moment`]s
//! over a fixed qubit layout, with cycle boundaries, strategy-specific
//! end-of-cycle operations, and an injection layer in every cycle (an idle
//! layer of the same duration when nothing is injected). Construction is
//! pure and deterministic; building the same arguments twice yields
//! byte-identical serialized text.

mod build;
mod detectors;
mod text;

pub use build::{build_repetition_code, build_surface_code, build_surface_code_with, truncate_for_population};
pub use detectors::{define_detectors, Detector, DetectorSet};

use crate::noise::{InjectionSpec, Pauli};
use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Repetition,
    Surface,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    NoReset,
    Mlr,
    Dqlr,
}

impl Strategy {
    /// Cycle offset between compared measurements in detector definitions.
    pub fn detector_step(self) -> u32 {
        match self {
            Strategy::NoReset => 2,
            Strategy::Mlr | Strategy::Dqlr => 1,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryBasis {
    X,
    Z,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabBasis {
    X,
    Z,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Measure,
}

/// One qubit of the layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitInfo {
    pub id: u32,
    /// Doubled grid coordinate (row, col); data and measure sites interleave.
    pub coord: (i32, i32),
    pub role: Role,
    /// Stabilizer read out by this qubit (measure qubits only).
    pub stabilizer: Option<u32>,
    /// True if this measure qubit is the higher-frequency one in every CZ
    /// pair it participates in; per-pair ranks follow from this flag.
    pub higher_in_pairs: bool,
}

/// One stabilizer of the code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub index: u32,
    pub measure_qubit: u32,
    pub basis: StabBasis,
    /// Data support, sorted by qubit id.
    pub data: Vec<u32>,
    /// Plaquette coordinate, for spatial-adjacency queries.
    pub coord: (i32, i32),
}

impl Stabilizer {
    pub fn weight(&self) -> u8 {
        self.data.len() as u8
    }
}

/// A single scheduled operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(u32),
    /// Axis rotation; realized stochastically (Pauli-twirled) by the engine.
    Rotation { q: u32, axis: Pauli, angle: f64 },
    /// CZ with the higher-frequency qubit listed first.
    Cz { higher: u32, lower: u32 },
    /// |11>-|20> swap between a data qubit and its reset measure partner.
    LeakageIswap { data: u32, measure: u32 },
    Measure(u32),
    MlrReset(u32),
    /// Explicit idle slot (placeholder injection layers).
    Idle(u32),
    /// |1>-|2> rotation injecting leakage.
    LeakInject { q: u32, angle: f64 },
    /// Pauli-error injection rotation.
    PauliInject { q: u32, axis: Pauli, angle: f64 },
}

impl Gate {
    /// Qubits acted on; idle slots report their target too.
    pub fn targets(&self) -> (u32, Option<u32>) {
        match *self {
            Gate::H(q)
            | Gate::Measure(q)
            | Gate::MlrReset(q)
            | Gate::Idle(q)
            | Gate::LeakInject { q, .. }
            | Gate::PauliInject { q, .. }
            | Gate::Rotation { q, .. } => (q, None),
            Gate::Cz { higher, lower } => (higher, Some(lower)),
            Gate::LeakageIswap { data, measure } => (data, Some(measure)),
        }
    }

    fn sort_key(&self) -> u32 {
        let (a, b) = self.targets();
        match b {
            Some(b) => a.min(b),
            None => a,
        }
    }
}

/// Duration class of a moment; physical durations come from `NoiseParams`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentClass {
    /// Single-qubit gate layer.
    Sq,
    /// Injection (or placeholder idle) layer.
    Inject,
    /// Entangling layer.
    Cz,
    /// Leakage-removal interaction layer.
    Iswap,
    /// Readout window (includes the co-scheduled first reset).
    Meas,
    /// Bare reset; treated as instantaneous.
    Reset,
}

/// Set of gates executed concurrently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub class: MomentClass,
    pub gates: Vec<Gate>,
}

impl Moment {
    fn new(class: MomentClass, mut gates: Vec<Gate>) -> Moment {
        gates.sort_by_key(Gate::sort_key);
        Moment { class, gates }
    }
}

/// What a recorded measurement means.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MeasKind {
    /// Stabilizer readout (stabilizer index, cycle).
    Stab(u32, u32),
    /// Final data-qubit readout.
    FinalData,
    /// Leakage-resolving population probe.
    Probe,
}

/// One measurement slot, in record order.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MeasSlot {
    pub qubit: u32,
    pub kind: MeasKind,
}

/// Immutable memory-experiment circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub family: CodeFamily,
    pub distance: u32,
    pub n_cycles: u32,
    pub strategy: Strategy,
    pub memory_basis: MemoryBasis,
    pub qubits: Vec<QubitInfo>,
    pub stabilizers: Vec<Stabilizer>,
    pub moments: Vec<Moment>,
    /// Moment index where each cycle starts, plus one entry past the last
    /// cycle (`n_cycles + 1` entries).
    pub cycle_boundaries: Vec<usize>,
    /// Data qubits whose corrected readout parity is the logical observable.
    pub logical_support: Vec<u32>,
    /// Injection recorded at build time, for bookkeeping and serialization.
    pub injection: InjectionSpec,
    /// Ends with a leakage-resolving probe on all qubits.
    pub probe_at_end: bool,
    /// Ends with a data-qubit readout (memory experiment).
    pub final_data_measure: bool,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn data_qubits(&self) -> impl Iterator<Item = &QubitInfo> {
        self.qubits.iter().filter(|q| q.role == Role::Data)
    }

    pub fn measure_qubits(&self) -> impl Iterator<Item = &QubitInfo> {
        self.qubits.iter().filter(|q| q.role == Role::Measure)
    }

    /// Measurement slots in record order.
    pub fn measurement_plan(&self) -> Vec<MeasSlot> {
        let mut plan = Vec::new();
        let mut stab_round = vec![0u32; self.stabilizers.len()];
        let probe_start = if self.probe_at_end {
            self.moments.len() - 1
        } else {
            usize::MAX
        };
        for (mi, moment) in self.moments.iter().enumerate() {
            for gate in &moment.gates {
                if let Gate::Measure(q) = *gate {
                    let kind = if mi >= probe_start {
                        MeasKind::Probe
                    } else {
                        match self.qubits[q as usize].stabilizer {
                            Some(s) => {
                                let t = stab_round[s as usize];
                                stab_round[s as usize] += 1;
                                MeasKind::Stab(s, t)
                            }
                            None => MeasKind::FinalData,
                        }
                    };
                    plan.push(MeasSlot { qubit: q, kind });
                }
            }
        }
        plan
    }

    /// Measurement-record index of stabilizer `s` at cycle `t`, if present.
    pub fn stab_measurement_index(&self, s: u32, t: u32) -> Option<u32> {
        // Derived once through `measurement_plan` by callers that need many
        // lookups; this convenience scan is for tests.
        self.measurement_plan()
            .iter()
            .position(|slot| slot.kind == MeasKind::Stab(s, t))
            .map(|i| i as u32)
    }

    /// Stable content hash of the canonical serialized form.
    pub fn hash(&self) -> String {
        crate::sim::hex_digest(self.to_text().as_bytes())
    }

    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    pub fn from_text(s: &str) -> crate::Result<Circuit> {
        text::from_text(s)
    }

    /// Moments of one cycle (excludes the final readout / probe tail).
    pub fn cycle_moments(&self, cycle: u32) -> &[Moment] {
        let a = self.cycle_boundaries[cycle as usize];
        let b = self.cycle_boundaries[cycle as usize + 1];
        &self.moments[a..b]
    }
}
