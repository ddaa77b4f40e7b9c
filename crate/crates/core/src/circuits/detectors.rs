//! Detector definitions: which measurement parities are deterministic in the
//! noiseless circuit and therefore flag errors when violated.
//!
//! With reset strategies, a stabilizer's outcome is compared with its
//! previous round; without reset the measure qubit carries its last outcome
//! forward and time-next-neighboring rounds are compared instead. Detectors
//! at the time boundaries exist only for stabilizers sharing the memory
//! basis: the complementary basis starts in a random eigenstate and its
//! first rounds are not deterministic.

use super::{Circuit, MeasKind, MemoryBasis, StabBasis, Strategy};

/// One detector: the XOR of the referenced measurement bits fires it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detector {
    pub stabilizer: u32,
    /// Cycle of the later referenced round; the end boundary uses `n_cycles`.
    pub cycle: u32,
    pub basis: StabBasis,
    /// Stabilizer weight (2 or 4).
    pub weight: u8,
    /// Measurement-record indices whose XOR is the detection event.
    pub refs: Vec<u32>,
    pub time_boundary: bool,
}

/// Complete detector list for one circuit.
#[derive(Clone, Debug)]
pub struct DetectorSet {
    pub circuit_hash: String,
    pub n_stabilizers: u32,
    pub n_cycles: u32,
    pub strategy: Strategy,
    pub memory_basis: MemoryBasis,
    pub detectors: Vec<Detector>,
}

impl DetectorSet {
    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    /// Detector index lookup by (stabilizer, cycle).
    pub fn index_of(&self, stabilizer: u32, cycle: u32) -> Option<usize> {
        self.detectors
            .iter()
            .position(|d| d.stabilizer == stabilizer && d.cycle == cycle)
    }
}

fn basis_matches_memory(basis: StabBasis, memory: MemoryBasis) -> bool {
    matches!(
        (basis, memory),
        (StabBasis::X, MemoryBasis::X) | (StabBasis::Z, MemoryBasis::Z)
    )
}

/// Derive every detector of a built circuit, including time boundaries.
pub fn define_detectors(circuit: &Circuit) -> DetectorSet {
    let plan = circuit.measurement_plan();
    let n_stabs = circuit.stabilizers.len();
    // stab_meas[s][t] = record index of stabilizer s, round t.
    let mut stab_meas: Vec<Vec<u32>> = vec![Vec::new(); n_stabs];
    let mut final_data: Vec<Option<u32>> = vec![None; circuit.n_qubits()];
    for (i, slot) in plan.iter().enumerate() {
        match slot.kind {
            MeasKind::Stab(s, t) => {
                debug_assert_eq!(stab_meas[s as usize].len() as u32, t);
                stab_meas[s as usize].push(i as u32);
            }
            MeasKind::FinalData => final_data[slot.qubit as usize] = Some(i as u32),
            MeasKind::Probe => {}
        }
    }

    let step = circuit.strategy.detector_step();
    let mut detectors = Vec::new();
    for stab in &circuit.stabilizers {
        let rounds = &stab_meas[stab.index as usize];
        let matches = basis_matches_memory(stab.basis, circuit.memory_basis);
        for t in 0..rounds.len() as u32 {
            let refs = if t < step {
                if !matches {
                    continue;
                }
                vec![rounds[t as usize]]
            } else {
                vec![rounds[t as usize], rounds[(t - step) as usize]]
            };
            detectors.push(Detector {
                stabilizer: stab.index,
                cycle: t,
                basis: stab.basis,
                weight: stab.weight(),
                time_boundary: t < step,
                refs,
            });
        }
        // End boundary: compare the stabilizer parity of the data readout
        // with the last (two, without reset) ancilla rounds.
        if circuit.final_data_measure && matches && !rounds.is_empty() {
            let n = rounds.len();
            let mut refs: Vec<u32> = stab
                .data
                .iter()
                .map(|&q| final_data[q as usize].expect("data readout present"))
                .collect();
            refs.push(rounds[n - 1]);
            if step == 2 && n >= 2 {
                refs.push(rounds[n - 2]);
            }
            detectors.push(Detector {
                stabilizer: stab.index,
                cycle: n as u32,
                basis: stab.basis,
                weight: stab.weight(),
                time_boundary: true,
                refs,
            });
        }
    }
    detectors.sort_by_key(|d| (d.cycle, d.stabilizer));
    DetectorSet {
        circuit_hash: circuit.hash(),
        n_stabilizers: n_stabs as u32,
        n_cycles: circuit.n_cycles,
        strategy: circuit.strategy,
        memory_basis: circuit.memory_basis,
        detectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_repetition_code, build_surface_code, build_surface_code_with};
    use crate::noise::InjectionSpec;

    #[test]
    fn surface_detector_columns_and_offsets() {
        let c = build_surface_code(3, 30, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let ds = define_detectors(&c);
        let mut w2 = std::collections::HashSet::new();
        let mut w4 = std::collections::HashSet::new();
        for d in &ds.detectors {
            match d.weight {
                2 => w2.insert(d.stabilizer),
                4 => w4.insert(d.stabilizer),
                w => panic!("weight {w}"),
            };
        }
        assert_eq!(w2.len(), 4);
        assert_eq!(w4.len(), 4);
        // Interior detectors compare adjacent rounds.
        for d in ds.detectors.iter().filter(|d| !d.time_boundary) {
            assert_eq!(d.refs.len(), 2);
        }
        // Z memory: X-basis stabilizers omit both time boundaries.
        assert!(ds
            .detectors
            .iter()
            .filter(|d| d.basis == StabBasis::X)
            .all(|d| !d.time_boundary));
        let z_boundaries = ds
            .detectors
            .iter()
            .filter(|d| d.basis == StabBasis::Z && d.time_boundary)
            .count();
        // 4 Z stabilizers x (start + end).
        assert_eq!(z_boundaries, 8);
    }

    #[test]
    fn memory_basis_selects_boundary_basis() {
        let c = build_surface_code_with(
            3,
            5,
            Strategy::Mlr,
            &InjectionSpec::default(),
            MemoryBasis::X,
        )
        .unwrap();
        let ds = define_detectors(&c);
        assert!(ds
            .detectors
            .iter()
            .filter(|d| d.basis == StabBasis::Z)
            .all(|d| !d.time_boundary));
        assert!(ds
            .detectors
            .iter()
            .any(|d| d.basis == StabBasis::X && d.time_boundary));
    }

    #[test]
    fn no_reset_compares_time_next_neighbors() {
        let c = build_repetition_code(3, 4, Strategy::NoReset, &InjectionSpec::default()).unwrap();
        let ds = define_detectors(&c);
        for d in &ds.detectors {
            if d.time_boundary && d.cycle < 4 {
                assert_eq!(d.refs.len(), 1, "t in {{0,1}} compares against |0> prep");
                assert!(d.cycle <= 1);
            } else if !d.time_boundary {
                // Interior: rounds t and t-2; measurement plan interleaves the
                // two stabilizers, so indices differ by 2 * n_stabs.
                assert_eq!(d.refs.len(), 2);
                assert_eq!(d.refs[0] - d.refs[1], 4);
            } else {
                // End boundary references the final two rounds plus data.
                assert_eq!(d.cycle, 4);
                assert_eq!(d.refs.len(), 4);
            }
        }
    }

    #[test]
    fn mlr_interior_offsets_are_one_cycle() {
        let c = build_repetition_code(21, 1, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let ds = define_detectors(&c);
        let columns: std::collections::HashSet<u32> =
            ds.detectors.iter().map(|d| d.stabilizer).collect();
        assert_eq!(columns.len(), 20);
        let c2 = build_repetition_code(5, 6, Strategy::Dqlr, &InjectionSpec::default()).unwrap();
        let ds2 = define_detectors(&c2);
        for d in ds2.detectors.iter().filter(|d| !d.time_boundary) {
            assert_eq!(d.refs[0] - d.refs[1], 4, "adjacent rounds, 4 stabilizers");
        }
    }

    #[test]
    fn probe_circuits_define_no_final_boundary() {
        let c = build_surface_code(3, 4, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let t = crate::circuits::truncate_for_population(&c, 1, 3).unwrap();
        let ds = define_detectors(&t);
        assert!(ds.detectors.iter().all(|d| d.cycle <= 2));
    }
}
