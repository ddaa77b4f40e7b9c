//! Weighted detector graph for the decoded (memory) basis.
//!
//! Model-derived edge probabilities come from exhaustive single-error
//! propagation: every entry of every gate, idle, measurement, reset, and
//! injection channel is inserted once into a noiseless run and the fired
//! detectors recorded. Mechanisms firing one detector become boundary
//! edges, two detectors an interior edge; rarer multi-detector mechanisms
//! (correlated two-qubit entries) are decomposed greedily over the edges
//! already found. Leakage channels (transport, twirled phase, relaxation,
//! intrinsic and injected leakage) are deliberately not represented: the
//! decoder sees the standard Pauli graph and leakage shows up as unmodeled
//! correlation between detection events.
//!
//! Parallel mechanisms mapping to one edge combine as
//! `p = p1 (1 - p2) + p2 (1 - p1)`.

use crate::circuits::{Circuit, MemoryBasis, MomentClass, StabBasis};
use crate::decode::matching::solve_defects;
use fusion_blossom::mwpm_solver::SolverSerial;
use fusion_blossom::util::{SolverInitializer, VertexIndex};
use crate::noise::{build_channel_tables, ChannelTables, Effect, NoiseParams};
use crate::sim::engine::{ForcedLoc, ForcedSite, PlanGate};
use crate::sim::{ExecPlan, Sim};
use crate::{circuits::DetectorSet, Error, Result};
use std::collections::HashMap;

/// One edge of the matching graph.
#[derive(Clone, Debug)]
pub struct GraphEdge {
    pub a: u32,
    /// `None` is the boundary.
    pub b: Option<u32>,
    pub p: f64,
    /// `ln((1 - p) / p)` after clamping p into (1e-6, 0.5].
    pub weight: f64,
    pub flips_logical: bool,
}

#[derive(Clone, Debug, Default)]
pub struct GraphWarnings {
    /// Multi-detector mechanisms that could not be decomposed.
    pub decompose_failures: u32,
    /// Mechanisms whose logical flag disagreed with an existing edge.
    pub flag_conflicts: u32,
    /// Empirical entries dropped because they were not positive.
    pub dropped_entries: u32,
}

/// Matching graph over the decode-basis detectors plus one boundary node.
#[derive(Clone, Debug)]
pub struct DetectorGraph {
    pub basis: StabBasis,
    pub n_nodes: usize,
    /// Node -> index into the full detector list.
    pub node_detector: Vec<u32>,
    /// Full-detector index -> node (-1 when not in this basis).
    pub detector_node: Vec<i32>,
    pub edges: Vec<GraphEdge>,
    pub warnings: GraphWarnings,
    /// Static matching-solver description: detector nodes first, then one
    /// virtual vertex per boundary edge; edge order mirrors `edges`.
    initializer: SolverInitializer,
}

impl DetectorGraph {
    /// Fresh exact-matching solver over this graph; reusable across shots.
    pub(crate) fn make_solver(&self) -> SolverSerial {
        SolverSerial::new(&self.initializer)
    }

    /// Edge-list CSV dump.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,p,weight,flips_logical\n");
        for e in &self.edges {
            let b = e.b.map_or("boundary".to_string(), |b| b.to_string());
            s.push_str(&format!("{},{},{},{},{}\n", e.a, b, e.p, e.weight, e.flips_logical));
        }
        s
    }
}

fn clamp_weight(p: f64) -> (f64, f64) {
    let pc = p.clamp(1e-6, 0.5);
    (pc, ((1.0 - pc) / pc).ln())
}

fn combine(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

struct EdgeAccumulator {
    map: HashMap<(u32, Option<u32>), (f64, bool)>,
    warnings: GraphWarnings,
}

impl EdgeAccumulator {
    fn add(&mut self, a: u32, b: Option<u32>, p: f64, flips_logical: bool) {
        let key = match b {
            Some(b) if b < a => (b, Some(a)),
            _ => (a, b),
        };
        match self.map.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let (q, flag) = *e.get();
                if flag != flips_logical {
                    self.warnings.flag_conflicts += 1;
                    // Keep the flag of the dominant mechanism.
                    if p > q {
                        e.insert((combine(p, q), flips_logical));
                        return;
                    }
                }
                e.insert((combine(p, q), flag));
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert((p, flips_logical));
            }
        }
    }
}

/// Fired decode-basis detectors and the mechanism's logical flip, from the
/// flip vector of a forced run.
fn analyze_flips(
    flips: &[bool],
    detectors: &DetectorSet,
    detector_node: &[i32],
    logical_slots: &[u32],
) -> (Vec<u32>, bool) {
    let mut fired = Vec::new();
    for (di, det) in detectors.detectors.iter().enumerate() {
        if detector_node[di] < 0 {
            continue;
        }
        let event = det
            .refs
            .iter()
            .fold(false, |acc, &r| acc ^ flips[r as usize]);
        if event {
            fired.push(detector_node[di] as u32);
        }
    }
    let logical = logical_slots
        .iter()
        .fold(false, |acc, &s| acc ^ flips[s as usize]);
    (fired, logical)
}

/// Build the matching graph from the noise model by error enumeration.
pub fn build_graph(
    circuit: &Circuit,
    params: &NoiseParams,
    detectors: &DetectorSet,
) -> Result<DetectorGraph> {
    let tables = build_channel_tables(params)?;
    build_graph_with_tables(circuit, &tables, detectors)
}

pub(crate) fn build_graph_with_tables(
    circuit: &Circuit,
    tables: &ChannelTables,
    detectors: &DetectorSet,
) -> Result<DetectorGraph> {
    if detectors.circuit_hash != circuit.hash() {
        return Err(Error::Provenance(
            "detector set built for a different circuit".into(),
        ));
    }
    let basis = match circuit.memory_basis {
        MemoryBasis::X => StabBasis::X,
        MemoryBasis::Z => StabBasis::Z,
    };
    let (node_detector, detector_node) = basis_nodes(detectors, basis);
    let plan = ExecPlan::compile(circuit)?;
    let sim = Sim::new(&plan, tables);
    let logical_slots = logical_readout_slots(circuit)?;

    // Enumerate every frame-level mechanism with its probability.
    let mut sites: Vec<(ForcedSite, f64)> = Vec::new();
    for (mi, moment) in plan.moments().iter().enumerate() {
        for (gi, gate) in moment.gates.iter().enumerate() {
            match gate {
                PlanGate::H(_) => {
                    for &(e, p) in tables.sq.entries() {
                        if matches!(e, Effect::Pauli1(_)) && p > 0.0 {
                            sites.push((
                                ForcedSite { moment: mi, loc: ForcedLoc::AfterGate { gate: gi, effect: e } },
                                p,
                            ));
                        }
                    }
                }
                PlanGate::Cz { .. } => {
                    for &(e, p) in tables.cz_both_computational.entries() {
                        if matches!(e, Effect::Pauli2(..)) && p > 0.0 {
                            sites.push((
                                ForcedSite { moment: mi, loc: ForcedLoc::AfterGate { gate: gi, effect: e } },
                                p,
                            ));
                        }
                    }
                }
                PlanGate::Iswap { .. } => {
                    for &(e, p) in tables.dqlr_iswap_comp.entries() {
                        if matches!(e, Effect::PartnerPauli(_)) && p > 0.0 {
                            sites.push((
                                ForcedSite { moment: mi, loc: ForcedLoc::AfterGate { gate: gi, effect: e } },
                                p,
                            ));
                        }
                    }
                }
                PlanGate::Measure { probe, .. } => {
                    if !probe && tables.params.ro_reset_err > 0.0 {
                        sites.push((
                            ForcedSite { moment: mi, loc: ForcedLoc::MeasFlip { gate: gi } },
                            tables.params.ro_reset_err,
                        ));
                    }
                }
                PlanGate::Reset(_) => {
                    for &(e, p) in tables.mlr_reset.entries() {
                        if matches!(e, Effect::ResidualOne) && p > 0.0 {
                            sites.push((
                                ForcedSite { moment: mi, loc: ForcedLoc::ResetOne { gate: gi } },
                                p,
                            ));
                        }
                    }
                }
                PlanGate::Rot { q, axis, p, .. } => {
                    if *p > 0.0 {
                        sites.push((
                            ForcedSite {
                                moment: mi,
                                loc: ForcedLoc::AfterGate {
                                    gate: gi,
                                    effect: Effect::Pauli1(*axis),
                                },
                            },
                            *p,
                        ));
                        let _ = q;
                    }
                }
                PlanGate::LeakInject { .. } => {}
            }
        }
        if moment.class != MomentClass::Reset {
            for &q in &moment.idle {
                let table = match moment.class {
                    MomentClass::Sq | MomentClass::Inject => &tables.idle_sq,
                    MomentClass::Cz | MomentClass::Iswap => &tables.idle_cz,
                    MomentClass::Meas => {
                        if circuit.qubits[q as usize].role == crate::circuits::Role::Data {
                            &tables.idle_ro_data
                        } else {
                            &tables.idle_ro
                        }
                    }
                    MomentClass::Reset => unreachable!(),
                };
                for &(e, p) in table.pauli.entries() {
                    if let Effect::Pauli1(pauli) = e {
                        if p > 0.0 {
                            sites.push((
                                ForcedSite { moment: mi, loc: ForcedLoc::Idle { qubit: q, pauli } },
                                p,
                            ));
                        }
                    }
                }
            }
        }
    }

    // First pass: single- and two-detector mechanisms form the edge
    // dictionary; multi-detector mechanisms wait for decomposition.
    let mut acc = EdgeAccumulator { map: HashMap::new(), warnings: GraphWarnings::default() };
    let mut deferred: Vec<(Vec<u32>, bool, f64)> = Vec::new();
    use rayon::prelude::*;
    let analyzed: Vec<(Vec<u32>, bool, f64)> = sites
        .par_iter()
        .map(|(site, p)| {
            let flips = sim.run_forced(site);
            let (fired, logical) = analyze_flips(&flips, detectors, &detector_node, &logical_slots);
            (fired, logical, *p)
        })
        .collect();
    for (fired, logical, p) in analyzed {
        match fired.len() {
            0 => {
                if logical {
                    // A silent logical flip would break matchability.
                    acc.warnings.decompose_failures += 1;
                }
            }
            1 => acc.add(fired[0], None, p, logical),
            2 => acc.add(fired[0], Some(fired[1]), p, logical),
            _ => deferred.push((fired, logical, p)),
        }
    }
    let dict: std::collections::HashSet<(u32, Option<u32>)> = acc.map.keys().copied().collect();
    for (fired, logical, p) in deferred {
        match decompose(&fired, &dict) {
            Some(parts) => {
                let mut flag_total = false;
                for &(a, b) in &parts {
                    let flag = acc.map[&(a, b)].1;
                    flag_total ^= flag;
                    let entry = acc.map.get_mut(&(a, b)).expect("dict edge");
                    entry.0 = combine(entry.0, p);
                }
                if flag_total != logical {
                    acc.warnings.flag_conflicts += 1;
                }
            }
            None => acc.warnings.decompose_failures += 1,
        }
    }

    let mut edges: Vec<GraphEdge> = acc
        .map
        .into_iter()
        .map(|((a, b), (p, flips_logical))| {
            let (pc, weight) = clamp_weight(p);
            GraphEdge { a, b, p: pc, weight, flips_logical }
        })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b.map_or(u32::MAX, |b| b)));
    finish_graph(basis, node_detector, detector_node, edges, acc.warnings)
}

/// Split a multi-detector firing set into known edges, greedily.
fn decompose(
    fired: &[u32],
    dict: &std::collections::HashSet<(u32, Option<u32>)>,
) -> Option<Vec<(u32, Option<u32>)>> {
    let mut remaining: Vec<u32> = fired.to_vec();
    let mut parts = Vec::new();
    while let Some(&u) = remaining.first() {
        remaining.remove(0);
        let mut matched = None;
        for (i, &v) in remaining.iter().enumerate() {
            let key = (u.min(v), Some(u.max(v)));
            if dict.contains(&key) {
                matched = Some((i, key));
                break;
            }
        }
        match matched {
            Some((i, key)) => {
                remaining.remove(i);
                parts.push(key);
            }
            None if dict.contains(&(u, None)) => parts.push((u, None)),
            None => return None,
        }
    }
    Some(parts)
}

/// Build the graph from empirical pairwise estimates instead of the model.
///
/// `pairs` holds `(detector_a, detector_b, p)` over full-detector indices;
/// `boundary` holds `(detector, p)`. Entries that are not positive are
/// dropped and counted. Logical flags still come from the model-free
/// geometry: they must be supplied per edge by the caller via
/// `flag_fn(det_a, det_b)`.
pub fn build_graph_from_pij(
    detectors: &DetectorSet,
    basis: StabBasis,
    pairs: &[(u32, u32, f64)],
    boundary: &[(u32, f64)],
    mut flag_fn: impl FnMut(u32, Option<u32>) -> bool,
) -> Result<DetectorGraph> {
    let (node_detector, detector_node) = basis_nodes(detectors, basis);
    let mut warnings = GraphWarnings::default();
    let mut edges = Vec::new();
    for &(a, b, p) in pairs {
        if p <= 0.0 {
            warnings.dropped_entries += 1;
            continue;
        }
        let (na, nb) = (detector_node[a as usize], detector_node[b as usize]);
        if na < 0 || nb < 0 {
            return Err(Error::InvalidParam(format!(
                "detector pair ({a}, {b}) outside the {basis:?} basis"
            )));
        }
        let (pc, weight) = clamp_weight(p);
        edges.push(GraphEdge {
            a: na as u32,
            b: Some(nb as u32),
            p: pc,
            weight,
            flips_logical: flag_fn(a, Some(b)),
        });
    }
    for &(a, p) in boundary {
        if p <= 0.0 {
            warnings.dropped_entries += 1;
            continue;
        }
        let na = detector_node[a as usize];
        if na < 0 {
            return Err(Error::InvalidParam(format!(
                "boundary detector {a} outside the {basis:?} basis"
            )));
        }
        let (pc, weight) = clamp_weight(p);
        edges.push(GraphEdge {
            a: na as u32,
            b: None,
            p: pc,
            weight,
            flips_logical: flag_fn(a, None),
        });
    }
    finish_graph(basis, node_detector, detector_node, edges, warnings)
}

fn basis_nodes(detectors: &DetectorSet, basis: StabBasis) -> (Vec<u32>, Vec<i32>) {
    let mut node_detector = Vec::new();
    let mut detector_node = vec![-1i32; detectors.detectors.len()];
    for (di, det) in detectors.detectors.iter().enumerate() {
        if det.basis == basis {
            detector_node[di] = node_detector.len() as i32;
            node_detector.push(di as u32);
        }
    }
    (node_detector, detector_node)
}

fn logical_readout_slots(circuit: &Circuit) -> Result<Vec<u32>> {
    let plan = circuit.measurement_plan();
    let mut slots = Vec::new();
    for &q in &circuit.logical_support {
        let slot = plan
            .iter()
            .position(|s| {
                s.qubit == q && s.kind == crate::circuits::MeasKind::FinalData
            })
            .ok_or_else(|| {
                Error::InvalidCircuit(format!("logical qubit {q} has no final readout"))
            })?;
        slots.push(slot as u32);
    }
    Ok(slots)
}

fn finish_graph(
    basis: StabBasis,
    node_detector: Vec<u32>,
    detector_node: Vec<i32>,
    edges: Vec<GraphEdge>,
    warnings: GraphWarnings,
) -> Result<DetectorGraph> {
    let n = node_detector.len();
    // Solver weights are quantized onto a coarse common lattice (multiples
    // of a tenth of the lightest edge): the event-driven dual growth of the
    // matching solver aligns across edges and runs an order of magnitude
    // faster, at a <=5% relative rounding that only influences near-tie
    // matching choices. Reported weights stay exact.
    let base = edges
        .iter()
        .map(|e| e.weight)
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let base = if base.is_finite() { base / 10.0 } else { 1.0 };
    let mut weighted = Vec::with_capacity(edges.len());
    let mut virtual_vertices = Vec::new();
    let mut next_virtual = n as VertexIndex;
    for e in &edges {
        let b = match e.b {
            Some(b) => b as VertexIndex,
            None => {
                let v = next_virtual;
                next_virtual += 1;
                virtual_vertices.push(v);
                v
            }
        };
        weighted.push((
            e.a as VertexIndex,
            b,
            2 * (e.weight / base).round() as fusion_blossom::util::Weight,
        ));
    }
    let initializer = SolverInitializer::new(next_virtual, weighted, virtual_vertices);
    Ok(DetectorGraph {
        basis,
        n_nodes: n,
        node_detector,
        detector_node,
        edges,
        warnings,
        initializer,
    })
}

/// Decoded verdict for one shot.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    /// Matched node pairs; `None` is the boundary.
    pub matches: Vec<(u32, Option<u32>)>,
    pub total_weight: f64,
    pub logical_flip: bool,
}

/// Decode a set of fired graph nodes with a caller-supplied solver.
pub(crate) fn decode_fired_with(
    graph: &DetectorGraph,
    solver: &mut SolverSerial,
    fired: &[u32],
) -> Result<DecodeResult> {
    if fired.is_empty() {
        return Ok(DecodeResult { matches: vec![], total_weight: 0.0, logical_flip: false });
    }
    let defects: Vec<VertexIndex> = fired.iter().map(|&f| f as VertexIndex).collect();
    let (peers, subgraph) = solve_defects(solver, &defects);
    let mut matches = Vec::with_capacity(fired.len() / 2 + 1);
    for (i, &peer) in peers.iter().enumerate() {
        if (peer as usize) >= graph.n_nodes {
            matches.push((fired[i], None));
        } else if fired[i] < peer as u32 {
            matches.push((fired[i], Some(peer as u32)));
        }
    }
    if matches.iter().map(|m| if m.1.is_some() { 2 } else { 1 }).sum::<usize>() != fired.len() {
        return Err(Error::InvalidParam(
            "matching left defects unpaired (disconnected odd component)".into(),
        ));
    }
    let mut total_weight = 0.0;
    let mut logical_flip = false;
    for &e in &subgraph {
        total_weight += graph.edges[e].weight;
        logical_flip ^= graph.edges[e].flips_logical;
    }
    Ok(DecodeResult { matches, total_weight, logical_flip })
}

pub(crate) fn decode_fired(graph: &DetectorGraph, fired: &[u32]) -> Result<DecodeResult> {
    let mut solver = graph.make_solver();
    decode_fired_with(graph, &mut solver, fired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{
        build_repetition_code, build_surface_code, define_detectors, Strategy,
    };
    use crate::noise::{InjectionSpec, NoiseParams};

    fn toy_graph(n: usize, p: f64) -> DetectorGraph {
        // Chain with boundary at both ends.
        let ds = DetectorSet {
            circuit_hash: "0".into(),
            n_stabilizers: n as u32,
            n_cycles: 1,
            strategy: Strategy::Mlr,
            memory_basis: MemoryBasis::Z,
            detectors: (0..n)
                .map(|s| crate::circuits::Detector {
                    stabilizer: s as u32,
                    cycle: 0,
                    basis: StabBasis::Z,
                    weight: 2,
                    refs: vec![s as u32],
                    time_boundary: true,
                })
                .collect(),
        };
        let pairs: Vec<(u32, u32, f64)> =
            (0..n - 1).map(|i| (i as u32, i as u32 + 1, p)).collect();
        let boundary = vec![(0u32, p), (n as u32 - 1, p)];
        build_graph_from_pij(&ds, StabBasis::Z, &pairs, &boundary, |a, b| {
            a == 0 && b.is_none()
        })
        .unwrap()
    }

    #[test]
    fn uniform_chain_weights() {
        let g = toy_graph(5, 0.01);
        let expect = (0.99f64 / 0.01).ln();
        for e in &g.edges {
            assert!((e.weight - expect).abs() < 1e-12);
        }
        // A lone interior defect pairs across two hops to the near edge.
        let r = decode_fired(&g, &[1]).unwrap();
        assert!((r.total_weight - 2.0 * expect).abs() < 1e-9);
    }

    #[test]
    fn decode_trivial_cases() {
        let g = toy_graph(5, 0.01);
        let r = decode_fired(&g, &[]).unwrap();
        assert!(!r.logical_flip);
        // Two adjacent fired detectors match directly.
        let r = decode_fired(&g, &[1, 2]).unwrap();
        assert_eq!(r.matches, vec![(1, Some(2))]);
        assert!(!r.logical_flip);
        // One fired detector at the left edge: boundary match through the
        // logical-flagged edge.
        let r = decode_fired(&g, &[0]).unwrap();
        assert_eq!(r.matches, vec![(0, None)]);
        assert!(r.logical_flip);
    }

    #[test]
    fn pij_graph_drops_nonpositive_entries() {
        let ds_pairs = [(0u32, 1u32, 0.01), (1, 2, -0.002), (2, 3, 0.0)];
        let g = {
            let ds = DetectorSet {
                circuit_hash: "0".into(),
                n_stabilizers: 4,
                n_cycles: 1,
                strategy: Strategy::Mlr,
                memory_basis: MemoryBasis::Z,
                detectors: (0..4)
                    .map(|s| crate::circuits::Detector {
                        stabilizer: s as u32,
                        cycle: 0,
                        basis: StabBasis::Z,
                        weight: 2,
                        refs: vec![s as u32],
                        time_boundary: true,
                    })
                    .collect(),
            };
            build_graph_from_pij(&ds, StabBasis::Z, &ds_pairs, &[], |_, _| false).unwrap()
        };
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.warnings.dropped_entries, 2);
    }

    #[test]
    fn repetition_model_graph_is_a_chain_with_boundaries() {
        let c = build_repetition_code(5, 3, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let ds = define_detectors(&c);
        let g = build_graph(&c, &NoiseParams::table_s1(), &ds).unwrap();
        assert_eq!(g.n_nodes, ds.detectors.len()); // all Z basis
        assert_eq!(g.warnings.decompose_failures, 0);
        // Boundary edges exist at both chain ends.
        let boundary_stabs: std::collections::HashSet<u32> = g
            .edges
            .iter()
            .filter(|e| e.b.is_none())
            .map(|e| ds.detectors[g.node_detector[e.a as usize] as usize].stabilizer)
            .collect();
        assert!(boundary_stabs.contains(&0));
        assert!(boundary_stabs.contains(&3));
        // Space edges never jump a stabilizer.
        for e in &g.edges {
            if let Some(b) = e.b {
                let da = &ds.detectors[g.node_detector[e.a as usize] as usize];
                let db = &ds.detectors[g.node_detector[b as usize] as usize];
                assert!(da.stabilizer.abs_diff(db.stabilizer) <= 1);
                assert!(da.cycle.abs_diff(db.cycle) <= 2);
            }
        }
        // Logical flags: exactly the boundary side holding data qubit 0.
        assert!(g
            .edges
            .iter()
            .filter(|e| e.flips_logical)
            .all(|e| {
                let da = &ds.detectors[g.node_detector[e.a as usize] as usize];
                da.stabilizer == 0 && e.b.is_none()
            }));
    }

    #[test]
    fn surface_model_graph_contains_diagonal_edges() {
        let c = build_surface_code(3, 4, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let ds = define_detectors(&c);
        let g = build_graph(&c, &NoiseParams::table_s1(), &ds).unwrap();
        assert_eq!(g.warnings.decompose_failures, 0);
        let mut found_diagonal = false;
        for e in &g.edges {
            if let Some(b) = e.b {
                let da = &ds.detectors[g.node_detector[e.a as usize] as usize];
                let db = &ds.detectors[g.node_detector[b as usize] as usize];
                if da.stabilizer != db.stabilizer && da.cycle.abs_diff(db.cycle) == 1 {
                    found_diagonal = true;
                }
            }
        }
        assert!(found_diagonal, "hook errors should produce diagonal edges");
    }
}
