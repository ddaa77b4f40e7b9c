//! Layout and cycle assembly for the two code families.
//!
//! Surface-code cycle (Z memory), one cycle per row of moments:
//!
//! ```text
//! sq      H on measure qubits and on data qubits with odd plaquette parity
//! inject  injection layer (idle placeholder when nothing is injected)
//! cz x4   entangling layers; X stabilizers walk SW,NE,NW,SE and Z
//!         stabilizers walk NE,SW,NW,SE over their neighbors
//! sq      H on all data qubits
//! (cz layers 3,4 between the two data-H layers)
//! sq      H on measure qubits and on even-parity data qubits
//! meas    readout window (first reset co-scheduled for MLR/DQLR)
//! reset / iswap / reset ...   strategy-dependent tail
//! ```
//!
//! The two single-data-H placements compile the standard CNOT schedule into
//! native CZ + H form: each data qubit is an X-plaquette target in two
//! consecutive layers, so its basis changes exactly twice per cycle. The CZ
//! walk orders put ancilla hook-error pairs on plaquette diagonals, which
//! preserves code distance for both logical operators.
//!
//! The repetition code uses the same skeleton on a chain, with the four CZ
//! moments formed by splitting left- and right-neighbor links over measure
//! parity. Frequency ranks alternate so that leaked data qubits are the
//! lower-frequency partner in half of their CZ pairs.

use super::*;
use crate::noise::{theta_leak, theta_pauli, RoleMask, TargetMask};
use crate::{Error, Result};
use std::collections::BTreeMap;

fn validate_injection(spec: &InjectionSpec, n_qubits: u32) -> Result<()> {
    if !(0.0..=0.5).contains(&spec.p_leak) {
        return Err(Error::InvalidParam(format!(
            "injected leakage population {} outside [0, 0.5]",
            spec.p_leak
        )));
    }
    if !(0.0..=1.0).contains(&spec.p_pauli) {
        return Err(Error::InvalidParam(format!(
            "injected pauli population {} outside [0, 1]",
            spec.p_pauli
        )));
    }
    if spec.p_leak > 0.0 && spec.p_pauli > 0.0 {
        return Err(Error::InvalidParam(
            "leakage and Pauli injection cannot share one layer".into(),
        ));
    }
    if let TargetMask::Qubits(qs) = &spec.targets {
        for &q in qs {
            if q >= n_qubits {
                return Err(Error::InvalidParam(format!(
                    "injection target {q} outside layout of {n_qubits} qubits"
                )));
            }
        }
    }
    Ok(())
}

fn injection_targets(spec: &InjectionSpec, qubits: &[QubitInfo]) -> Vec<u32> {
    match &spec.targets {
        TargetMask::Role(RoleMask::All) => qubits.iter().map(|q| q.id).collect(),
        TargetMask::Role(RoleMask::Data) => qubits
            .iter()
            .filter(|q| q.role == Role::Data)
            .map(|q| q.id)
            .collect(),
        TargetMask::Role(RoleMask::Measure) => qubits
            .iter()
            .filter(|q| q.role == Role::Measure)
            .map(|q| q.id)
            .collect(),
        TargetMask::Qubits(qs) => {
            let mut v = qs.clone();
            v.sort_unstable();
            v.dedup();
            v
        }
    }
}

/// Injection layer for one cycle: rotations when active, idles otherwise.
fn injection_moment(
    spec: &InjectionSpec,
    qubits: &[QubitInfo],
    cycle: u32,
) -> Result<Moment> {
    let targets = injection_targets(spec, qubits);
    let active = spec.active_in_cycle(cycle) && !spec.is_zero();
    let mut gates = Vec::with_capacity(targets.len());
    for q in targets {
        if !active {
            gates.push(Gate::Idle(q));
        } else if spec.p_leak > 0.0 {
            gates.push(Gate::LeakInject { q, angle: theta_leak(spec.p_leak)? });
        } else {
            let axis = match qubits[q as usize].role {
                Role::Data => Pauli::X,
                Role::Measure => Pauli::Z,
            };
            gates.push(Gate::PauliInject { q, axis, angle: theta_pauli(spec.p_pauli)? });
        }
    }
    Ok(Moment::new(MomentClass::Inject, gates))
}

/// Greedy data-to-measure assignment for the leakage-removal interaction;
/// returns one gate list per round.
fn leakage_iswap_rounds(qubits: &[QubitInfo], stabilizers: &[Stabilizer]) -> Vec<Vec<Gate>> {
    let mut adjacency: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for stab in stabilizers {
        for &d in &stab.data {
            adjacency.entry(d).or_default().push(stab.measure_qubit);
        }
    }
    let mut load: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&data, measures) in &adjacency {
        let mut best = measures[0];
        for &m in measures {
            if load.get(&m).map_or(0, Vec::len) < load.get(&best).map_or(0, Vec::len)
                || (load.get(&m).map_or(0, Vec::len) == load.get(&best).map_or(0, Vec::len)
                    && m < best)
            {
                best = m;
            }
        }
        load.entry(best).or_default().push(data);
    }
    let rounds = load.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Vec::new(); rounds];
    for (&measure, datas) in &load {
        for (round, &data) in datas.iter().enumerate() {
            out[round].push(Gate::LeakageIswap { data, measure });
        }
    }
    let _ = qubits;
    out
}

fn strategy_tail(
    strategy: Strategy,
    qubits: &[QubitInfo],
    iswap_rounds: &[Vec<Gate>],
) -> Vec<Moment> {
    let reset = || {
        Moment::new(
            MomentClass::Reset,
            qubits
                .iter()
                .filter(|q| q.role == Role::Measure)
                .map(|q| Gate::MlrReset(q.id))
                .collect(),
        )
    };
    match strategy {
        Strategy::NoReset => vec![],
        Strategy::Mlr => vec![reset()],
        Strategy::Dqlr => {
            let mut tail = vec![reset()];
            for round in iswap_rounds {
                tail.push(Moment::new(MomentClass::Iswap, round.clone()));
                tail.push(reset());
            }
            tail
        }
    }
}

struct CycleTemplate {
    /// Moments of one cycle, with the injection layer rebuilt per cycle.
    head: Vec<Moment>,
    /// Index within `head` after which the injection layer sits.
    inject_after: usize,
    tail: Vec<Moment>,
}

fn assemble(
    family: CodeFamily,
    distance: u32,
    n_cycles: u32,
    strategy: Strategy,
    memory_basis: MemoryBasis,
    injection: &InjectionSpec,
    qubits: Vec<QubitInfo>,
    stabilizers: Vec<Stabilizer>,
    logical_support: Vec<u32>,
    template: CycleTemplate,
    prep: Vec<Moment>,
    readout_head: Vec<Moment>,
) -> Result<Circuit> {
    validate_injection(injection, qubits.len() as u32)?;
    let mut moments = prep;
    let mut cycle_boundaries = Vec::with_capacity(n_cycles as usize + 1);
    for cycle in 0..n_cycles {
        cycle_boundaries.push(moments.len());
        for (i, m) in template.head.iter().enumerate() {
            moments.push(m.clone());
            if i == template.inject_after {
                moments.push(injection_moment(injection, &qubits, cycle)?);
            }
        }
        moments.extend(template.tail.iter().cloned());
    }
    cycle_boundaries.push(moments.len());
    moments.extend(readout_head);
    let data_measure = Moment::new(
        MomentClass::Meas,
        qubits
            .iter()
            .filter(|q| q.role == Role::Data)
            .map(|q| Gate::Measure(q.id))
            .collect(),
    );
    moments.push(data_measure);
    Ok(Circuit {
        family,
        distance,
        n_cycles,
        strategy,
        memory_basis,
        qubits,
        stabilizers,
        moments,
        cycle_boundaries,
        logical_support,
        injection: injection.clone(),
        probe_at_end: false,
        final_data_measure: true,
    })
}

/// Distance-d bit-flip (repetition) code on a chain of `2d - 1` qubits.
pub fn build_repetition_code(
    distance: u32,
    n_cycles: u32,
    strategy: Strategy,
    injection: &InjectionSpec,
) -> Result<Circuit> {
    if distance < 3 || distance % 2 == 0 {
        return Err(Error::InvalidParam(format!(
            "repetition distance {distance} must be odd and >= 3"
        )));
    }
    if n_cycles < 1 {
        return Err(Error::InvalidParam("n_cycles must be >= 1".into()));
    }
    let d = distance;
    let mut qubits = Vec::new();
    for i in 0..d {
        qubits.push(QubitInfo {
            id: i,
            coord: (0, 2 * i as i32),
            role: Role::Data,
            stabilizer: None,
            higher_in_pairs: false,
        });
    }
    let mut stabilizers = Vec::new();
    for k in 0..d - 1 {
        let id = d + k;
        qubits.push(QubitInfo {
            id,
            coord: (0, 2 * k as i32 + 1),
            role: Role::Measure,
            stabilizer: Some(k),
            // Alternating ranks: leaked data qubits get a lower-frequency
            // role in one of their two pairs.
            higher_in_pairs: k % 2 == 0,
        });
        stabilizers.push(Stabilizer {
            index: k,
            measure_qubit: id,
            basis: StabBasis::Z,
            data: vec![k, k + 1],
            coord: (0, 2 * k as i32 + 1),
        });
    }

    let measure_ids: Vec<u32> = (d..2 * d - 1).collect();
    let h_layer = Moment::new(
        MomentClass::Sq,
        measure_ids.iter().map(|&q| Gate::H(q)).collect(),
    );
    let cz = |m: u32, data: u32| -> Gate {
        let k = m - d;
        if k % 2 == 0 {
            Gate::Cz { higher: m, lower: data }
        } else {
            Gate::Cz { higher: data, lower: m }
        }
    };
    let mut layers: [Vec<Gate>; 4] = Default::default();
    for k in 0..d - 1 {
        let m = d + k;
        // Left neighbor in the first parity pair of moments, right in the
        // second; parity split keeps four non-empty CZ layers.
        layers[(k % 2) as usize].push(cz(m, k));
        layers[2 + (k % 2) as usize].push(cz(m, k + 1));
    }
    let mut head = vec![h_layer.clone()];
    head.extend(layers.into_iter().map(|g| Moment::new(MomentClass::Cz, g)));
    head.push(h_layer);
    head.push(Moment::new(
        MomentClass::Meas,
        measure_ids.iter().map(|&q| Gate::Measure(q)).collect(),
    ));
    let rounds = leakage_iswap_rounds(&qubits, &stabilizers);
    let tail = strategy_tail(strategy, &qubits, &rounds);
    let template = CycleTemplate { head, inject_after: 0, tail };

    assemble(
        CodeFamily::Repetition,
        distance,
        n_cycles,
        strategy,
        MemoryBasis::Z,
        injection,
        qubits,
        stabilizers,
        vec![0],
        template,
        vec![],
        vec![],
    )
}

/// Compass directions of a plaquette's data neighbors.
#[derive(Copy, Clone)]
enum Dir {
    Nw,
    Ne,
    Sw,
    Se,
}

const X_ORDER: [Dir; 4] = [Dir::Sw, Dir::Ne, Dir::Nw, Dir::Se];
const Z_ORDER: [Dir; 4] = [Dir::Ne, Dir::Sw, Dir::Nw, Dir::Se];

/// Rotated surface code with Z-basis memory.
pub fn build_surface_code(
    distance: u32,
    n_cycles: u32,
    strategy: Strategy,
    injection: &InjectionSpec,
) -> Result<Circuit> {
    build_surface_code_with(distance, n_cycles, strategy, injection, MemoryBasis::Z)
}

/// Rotated surface code with an explicit memory basis.
pub fn build_surface_code_with(
    distance: u32,
    n_cycles: u32,
    strategy: Strategy,
    injection: &InjectionSpec,
    memory_basis: MemoryBasis,
) -> Result<Circuit> {
    if ![3, 5, 7].contains(&distance) {
        return Err(Error::InvalidParam(format!(
            "surface distance {distance} unsupported (3, 5, or 7)"
        )));
    }
    if n_cycles < 1 {
        return Err(Error::InvalidParam("n_cycles must be >= 1".into()));
    }
    let d = distance as i32;
    let data_id = |r: i32, c: i32| -> u32 { (r * d + c) as u32 };
    let mut qubits = Vec::new();
    for r in 0..d {
        for c in 0..d {
            qubits.push(QubitInfo {
                id: data_id(r, c),
                coord: (2 * r + 1, 2 * c + 1),
                role: Role::Data,
                stabilizer: None,
                higher_in_pairs: false,
            });
        }
    }

    // Candidate plaquettes indexed by their NW data cell.
    let mut stabilizers = Vec::new();
    let mut plaq_dirs: Vec<[Option<u32>; 4]> = Vec::new();
    for pr in -1..d {
        for pc in -1..d {
            let basis = if (pr + pc).rem_euclid(2) == 0 {
                StabBasis::X
            } else {
                StabBasis::Z
            };
            let at = |r: i32, c: i32| -> Option<u32> {
                (r >= 0 && r < d && c >= 0 && c < d).then(|| data_id(r, c))
            };
            let corners = [
                at(pr, pc),         // NW
                at(pr, pc + 1),     // NE
                at(pr + 1, pc),     // SW
                at(pr + 1, pc + 1), // SE
            ];
            let weight = corners.iter().flatten().count();
            let keep = match weight {
                4 => true,
                2 => {
                    let top_bottom = pr == -1 || pr == d - 1;
                    (top_bottom && basis == StabBasis::X)
                        || (!top_bottom && basis == StabBasis::Z)
                }
                _ => false,
            };
            if !keep {
                continue;
            }
            let index = stabilizers.len() as u32;
            let measure_id = (d * d) as u32 + index;
            let mut data: Vec<u32> = corners.iter().flatten().copied().collect();
            data.sort_unstable();
            qubits.push(QubitInfo {
                id: measure_id,
                coord: (2 * pr + 2, 2 * pc + 2),
                role: Role::Measure,
                stabilizer: Some(index),
                // X-type ancillas sit above their data partners in frequency,
                // Z-type below: every bulk data qubit is the lower qubit in
                // two of its four CZ pairs.
                higher_in_pairs: basis == StabBasis::X,
            });
            stabilizers.push(Stabilizer {
                index,
                measure_qubit: measure_id,
                basis,
                data,
                coord: (2 * pr + 2, 2 * pc + 2),
            });
            plaq_dirs.push(corners);
        }
    }
    debug_assert_eq!(stabilizers.len() as i32, d * d - 1);

    let mut cz_layers: [Vec<Gate>; 4] = Default::default();
    for (stab, corners) in stabilizers.iter().zip(&plaq_dirs) {
        let order = match stab.basis {
            StabBasis::X => &X_ORDER,
            StabBasis::Z => &Z_ORDER,
        };
        for (layer, dir) in order.iter().enumerate() {
            let data = match dir {
                Dir::Nw => corners[0],
                Dir::Ne => corners[1],
                Dir::Sw => corners[2],
                Dir::Se => corners[3],
            };
            if let Some(data) = data {
                let gate = if stab.basis == StabBasis::X {
                    Gate::Cz { higher: stab.measure_qubit, lower: data }
                } else {
                    Gate::Cz { higher: data, lower: stab.measure_qubit }
                };
                cz_layers[layer].push(gate);
            }
        }
    }

    let parity_of = |id: u32| -> i32 {
        let r = id as i32 / d;
        let c = id as i32 % d;
        (r + c).rem_euclid(2)
    };
    let measure_ids: Vec<u32> = ((d * d) as u32..(2 * d * d - 1) as u32).collect();
    let odd_data: Vec<u32> = (0..(d * d) as u32).filter(|&q| parity_of(q) == 1).collect();
    let even_data: Vec<u32> = (0..(d * d) as u32).filter(|&q| parity_of(q) == 0).collect();
    let all_data: Vec<u32> = (0..(d * d) as u32).collect();

    let h_moment = |ids: &[u32]| -> Moment {
        Moment::new(MomentClass::Sq, ids.iter().map(|&q| Gate::H(q)).collect())
    };
    let mut open = measure_ids.clone();
    open.extend(&odd_data);
    let mut close = measure_ids.clone();
    close.extend(&even_data);

    let mut head = vec![h_moment(&open)];
    let mut layers = cz_layers.into_iter();
    head.push(Moment::new(MomentClass::Cz, layers.next().unwrap()));
    head.push(Moment::new(MomentClass::Cz, layers.next().unwrap()));
    head.push(h_moment(&all_data));
    head.push(Moment::new(MomentClass::Cz, layers.next().unwrap()));
    head.push(Moment::new(MomentClass::Cz, layers.next().unwrap()));
    head.push(h_moment(&close));
    head.push(Moment::new(
        MomentClass::Meas,
        measure_ids.iter().map(|&q| Gate::Measure(q)).collect(),
    ));
    let rounds = leakage_iswap_rounds(&qubits, &stabilizers);
    let tail = strategy_tail(strategy, &qubits, &rounds);
    let template = CycleTemplate { head, inject_after: 0, tail };

    // Logical support: a data row for Z memory (crosses the Z boundaries),
    // a column for X memory.
    let logical_support: Vec<u32> = match memory_basis {
        MemoryBasis::Z => (0..d).map(|c| data_id(0, c)).collect(),
        MemoryBasis::X => (0..d).map(|r| data_id(r, 0)).collect(),
    };
    // X memory prepares and reads out through an extra transversal H.
    let (prep, readout_head) = match memory_basis {
        MemoryBasis::Z => (vec![], vec![]),
        MemoryBasis::X => (vec![h_moment(&all_data)], vec![h_moment(&all_data)]),
    };

    assemble(
        CodeFamily::Surface,
        distance,
        n_cycles,
        strategy,
        memory_basis,
        injection,
        qubits,
        stabilizers,
        logical_support,
        template,
        prep,
        readout_head,
    )
}

/// Cut the circuit after `moment_in_cycle` of `cycle` and terminate with a
/// leakage-resolving population probe on all qubits.
pub fn truncate_for_population(
    circuit: &Circuit,
    cycle: u32,
    moment_in_cycle: u32,
) -> Result<Circuit> {
    if cycle >= circuit.n_cycles {
        return Err(Error::InvalidParam(format!(
            "cycle {cycle} outside 0..{}",
            circuit.n_cycles
        )));
    }
    let start = circuit.cycle_boundaries[cycle as usize];
    let end = circuit.cycle_boundaries[cycle as usize + 1];
    let len = (end - start) as u32;
    if moment_in_cycle >= len {
        return Err(Error::InvalidParam(format!(
            "moment {moment_in_cycle} outside cycle of {len} moments"
        )));
    }
    let cut = start + moment_in_cycle as usize + 1;
    let mut moments: Vec<Moment> = circuit.moments[..cut].to_vec();
    moments.push(Moment::new(
        MomentClass::Meas,
        circuit.qubits.iter().map(|q| Gate::Measure(q.id)).collect(),
    ));
    let mut cycle_boundaries: Vec<usize> = circuit
        .cycle_boundaries
        .iter()
        .take_while(|&&b| b < cut)
        .copied()
        .collect();
    cycle_boundaries.push(cut);
    Ok(Circuit {
        n_cycles: cycle + 1,
        moments,
        cycle_boundaries,
        probe_at_end: true,
        final_data_measure: false,
        injection: circuit.injection.clone(),
        qubits: circuit.qubits.clone(),
        stabilizers: circuit.stabilizers.clone(),
        logical_support: circuit.logical_support.clone(),
        ..*circuit
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn no_overlap(c: &Circuit) {
        for m in &c.moments {
            let mut seen = HashSet::new();
            for g in &m.gates {
                let (a, b) = g.targets();
                assert!(seen.insert(a), "qubit {a} twice in one moment");
                if let Some(b) = b {
                    assert!(seen.insert(b), "qubit {b} twice in one moment");
                }
            }
        }
    }

    fn cz_moments_per_cycle(c: &Circuit) -> Vec<usize> {
        (0..c.n_cycles)
            .map(|t| {
                c.cycle_moments(t)
                    .iter()
                    .filter(|m| m.class == MomentClass::Cz)
                    .count()
            })
            .collect()
    }

    #[test]
    fn repetition_layout_counts() {
        for d in [3, 5, 21] {
            let c = build_repetition_code(d, 2, Strategy::Mlr, &InjectionSpec::default()).unwrap();
            assert_eq!(c.n_qubits() as u32, 2 * d - 1);
            assert_eq!(c.stabilizers.len() as u32, d - 1);
            assert!(c.stabilizers.iter().all(|s| s.weight() == 2));
            no_overlap(&c);
            assert!(cz_moments_per_cycle(&c).iter().all(|&n| n == 4));
        }
        assert!(build_repetition_code(4, 1, Strategy::Mlr, &InjectionSpec::default()).is_err());
        assert!(build_repetition_code(1, 1, Strategy::Mlr, &InjectionSpec::default()).is_err());
        assert!(build_repetition_code(3, 0, Strategy::Mlr, &InjectionSpec::default()).is_err());
    }

    #[test]
    fn surface_layout_counts() {
        for d in [3u32, 5, 7] {
            let c = build_surface_code(d, 2, Strategy::Dqlr, &InjectionSpec::default()).unwrap();
            assert_eq!(c.n_qubits() as u32, 2 * d * d - 1);
            assert_eq!(c.stabilizers.len() as u32, d * d - 1);
            let w2 = c.stabilizers.iter().filter(|s| s.weight() == 2).count() as u32;
            let w4 = c.stabilizers.iter().filter(|s| s.weight() == 4).count() as u32;
            assert_eq!(w2, 2 * (d - 1));
            assert_eq!(w4, (d - 1) * (d - 1));
            let x = c
                .stabilizers
                .iter()
                .filter(|s| s.basis == StabBasis::X)
                .count() as u32;
            assert_eq!(x, (d * d - 1) / 2);
            no_overlap(&c);
            assert!(cz_moments_per_cycle(&c).iter().all(|&n| n == 4));
            // Every measure qubit has 2 or 4 data neighbors.
            assert!(c.stabilizers.iter().all(|s| s.weight() == 2 || s.weight() == 4));
            // Bulk data qubits participate in exactly one CZ per CZ moment.
            for m in c.cycle_moments(0).iter().filter(|m| m.class == MomentClass::Cz) {
                let mut count = vec![0u32; c.n_qubits()];
                for g in &m.gates {
                    let (a, b) = g.targets();
                    count[a as usize] += 1;
                    count[b.unwrap() as usize] += 1;
                }
                assert!(count.iter().all(|&n| n <= 1));
            }
        }
        assert!(build_surface_code(9, 1, Strategy::Mlr, &InjectionSpec::default()).is_err());
        assert!(build_surface_code(4, 1, Strategy::Mlr, &InjectionSpec::default()).is_err());
    }

    #[test]
    fn moment_count_identical_across_cycles() {
        for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
            let c = build_surface_code(3, 4, strategy, &InjectionSpec::default()).unwrap();
            let lens: Vec<usize> = (0..4).map(|t| c.cycle_moments(t).len()).collect();
            assert!(lens.windows(2).all(|w| w[0] == w[1]), "{strategy:?}: {lens:?}");
        }
    }

    #[test]
    fn injection_layer_swaps_between_idle_and_rotation() {
        let none = InjectionSpec::default();
        let leak = InjectionSpec { p_leak: 0.01, ..InjectionSpec::default() };
        let a = build_surface_code(3, 1, Strategy::Mlr, &none).unwrap();
        let b = build_surface_code(3, 1, Strategy::Mlr, &leak).unwrap();
        assert_eq!(a.moments.len(), b.moments.len());
        let inject_a = &a.moments[1];
        let inject_b = &b.moments[1];
        assert_eq!(inject_a.class, MomentClass::Inject);
        assert!(inject_a.gates.iter().all(|g| matches!(g, Gate::Idle(_))));
        assert!(inject_b
            .gates
            .iter()
            .all(|g| matches!(g, Gate::LeakInject { .. })));
        assert_eq!(inject_a.gates.len(), a.n_qubits());
        // Every other moment identical.
        for (i, (ma, mb)) in a.moments.iter().zip(&b.moments).enumerate() {
            if i != 1 {
                assert_eq!(ma, mb);
            }
        }
    }

    #[test]
    fn pauli_injection_axes_follow_roles() {
        let spec = InjectionSpec { p_pauli: 0.05, ..InjectionSpec::default() };
        let c = build_repetition_code(5, 2, Strategy::Mlr, &spec).unwrap();
        let expected = theta_pauli(0.05).unwrap();
        for t in 0..2 {
            let inject = &c.cycle_moments(t)[1];
            let mut data_seen = 0;
            for g in &inject.gates {
                match *g {
                    Gate::PauliInject { q, axis, angle } => {
                        assert!((angle - expected).abs() < 1e-15);
                        match c.qubits[q as usize].role {
                            Role::Data => {
                                assert_eq!(axis, Pauli::X);
                                data_seen += 1;
                            }
                            Role::Measure => assert_eq!(axis, Pauli::Z),
                        }
                    }
                    ref g => panic!("unexpected gate {g:?}"),
                }
            }
            assert_eq!(data_seen, 5);
        }
    }

    #[test]
    fn injection_only_in_requested_cycle() {
        let spec = InjectionSpec {
            p_leak: 0.5,
            targets: TargetMask::Qubits(vec![4]),
            only_cycle: Some(0),
            ..InjectionSpec::default()
        };
        let c = build_surface_code(3, 3, Strategy::NoReset, &spec).unwrap();
        for t in 0..3 {
            let inject = &c.cycle_moments(t)[1];
            assert_eq!(inject.gates.len(), 1);
            if t == 0 {
                assert!(matches!(inject.gates[0], Gate::LeakInject { q: 4, .. }));
            } else {
                assert!(matches!(inject.gates[0], Gate::Idle(4)));
            }
        }
    }

    #[test]
    fn dqlr_tail_pairs_every_data_qubit_once() {
        let c = build_surface_code(3, 1, Strategy::Dqlr, &InjectionSpec::default()).unwrap();
        let mut covered = HashSet::new();
        let mut iswap_moments = 0;
        for m in c.cycle_moments(0) {
            if m.class == MomentClass::Iswap {
                iswap_moments += 1;
                for g in &m.gates {
                    if let Gate::LeakageIswap { data, .. } = *g {
                        assert!(covered.insert(data));
                    }
                }
            }
        }
        assert_eq!(covered.len(), 9);
        assert_eq!(iswap_moments, 2);
        // Reset follows each interaction round.
        let classes: Vec<MomentClass> = c.cycle_moments(0).iter().map(|m| m.class).collect();
        let tail = &classes[classes.len() - 5..];
        assert_eq!(
            tail,
            [
                MomentClass::Reset,
                MomentClass::Iswap,
                MomentClass::Reset,
                MomentClass::Iswap,
                MomentClass::Reset
            ]
        );
    }

    #[test]
    fn truncation_bounds_and_probe() {
        let c = build_surface_code(3, 4, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let t = truncate_for_population(&c, 2, 3).unwrap();
        assert!(t.probe_at_end);
        assert!(!t.final_data_measure);
        assert_eq!(t.n_cycles, 3);
        let last = t.moments.last().unwrap();
        assert_eq!(last.gates.len(), t.n_qubits());
        assert!(truncate_for_population(&c, 4, 0).is_err());
        assert!(truncate_for_population(&c, 0, 99).is_err());
        // Truncating at the final moment of the last cycle keeps everything.
        let full_len = c.cycle_moments(0).len() as u32;
        let t2 = truncate_for_population(&c, 3, full_len - 1).unwrap();
        assert_eq!(t2.moments.len(), c.cycle_boundaries[4] + 1);
    }

    #[test]
    fn build_is_deterministic() {
        let spec = InjectionSpec { p_leak: 0.02, ..InjectionSpec::default() };
        let a = build_surface_code(5, 7, Strategy::Dqlr, &spec).unwrap();
        let b = build_surface_code(5, 7, Strategy::Dqlr, &spec).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn rejects_dual_injection() {
        let spec = InjectionSpec { p_leak: 0.1, p_pauli: 0.1, ..InjectionSpec::default() };
        assert!(build_surface_code(3, 1, Strategy::Mlr, &spec).is_err());
    }

    #[test]
    fn measurement_plan_orders_stab_rounds() {
        let c = build_repetition_code(3, 2, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let plan = c.measurement_plan();
        // 2 stabilizers x 2 cycles + 3 data.
        assert_eq!(plan.len(), 7);
        assert_eq!(plan[0].kind, MeasKind::Stab(0, 0));
        assert_eq!(plan[1].kind, MeasKind::Stab(1, 0));
        assert_eq!(plan[2].kind, MeasKind::Stab(0, 1));
        assert_eq!(plan[6].kind, MeasKind::FinalData);
    }
}
