//! Timing smoke checks for the heavy paths; assertions are generous and
//! exist to catch order-of-magnitude regressions.

use lqec_core::circuits::{build_repetition_code, define_detectors, Strategy};
use lqec_core::decode::{build_graph, extract_detection_events, logical_error_probability};
use lqec_core::noise::{build_channel_tables, InjectionSpec, NoiseParams};
use lqec_core::sim::run_batch;
use std::time::Instant;

#[test]
fn bit_flip_pipeline_timing() {
    let mut params = NoiseParams::table_s1();
    params.p_intrinsic_leak_per_cycle = 4.5e-3;
    params.t1_us = 15.0;
    params.t2_us = 19.0;
    params.injection = InjectionSpec { p_leak: 0.01, ..Default::default() };
    let circuit = build_repetition_code(21, 60, Strategy::NoReset, &params.injection).unwrap();
    let tables = build_channel_tables(&params).unwrap();

    println!("rayon threads: {}", rayon::current_num_threads());
    let t0 = Instant::now();
    let records = run_batch(&circuit, &tables, 2000, 7).unwrap();
    let sim_t = t0.elapsed();

    let t0 = Instant::now();
    let detectors = define_detectors(&circuit);
    let events = extract_detection_events(&records, &detectors).unwrap();
    let fired0 = events.fired_in_shot(0).len();
    let extract_t = t0.elapsed();

    let t0 = Instant::now();
    let graph = build_graph(&circuit, &params, &detectors).unwrap();
    let graph_t = t0.elapsed();
    let boundary_edges = graph.edges.iter().filter(|e| e.b.is_none()).count();
    let min_w = graph.edges.iter().map(|e| e.weight).fold(f64::INFINITY, f64::min);
    let max_w = graph.edges.iter().map(|e| e.weight).fold(0.0f64, f64::max);
    println!(
        "graph: {} nodes, {} edges ({} boundary), w in [{:.3}, {:.3}]",
        graph.n_nodes,
        graph.edges.len(),
        boundary_edges,
        min_w,
        max_w
    );

    let t0 = Instant::now();
    let stats = logical_error_probability(&records, &detectors, &graph, &circuit).unwrap();
    let decode_t = t0.elapsed();

    // Sequential per-shot cost on real (clustered) syndromes.
    let t0 = Instant::now();
    let mut solver_shots = 0;
    for shot in 0..50 {
        let fired = events.fired_in_shot(shot);
        let fired_nodes: Vec<u32> = fired
            .iter()
            .filter(|&&d| graph.detector_node[d as usize] >= 0)
            .map(|&d| graph.detector_node[d as usize] as u32)
            .collect();
        let mut ev = vec![false; graph.n_nodes];
        for f in &fired_nodes {
            ev[*f as usize] = true;
        }
        let _ = lqec_core::decode::decode_shot(&graph, &ev).unwrap();
        solver_shots += 1;
    }
    println!("sequential 50-shot decode: {:?} ({solver_shots})", t0.elapsed());

    println!(
        "sim {sim_t:?}, extract {extract_t:?} (fired/shot ~{fired0}), graph {graph_t:?}, decode {decode_t:?}, p_l {}",
        stats.p
    );
    assert!(decode_t.as_secs() < 300);
}
