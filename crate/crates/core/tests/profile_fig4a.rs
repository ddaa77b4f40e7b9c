use lqec_core::circuits::{build_repetition_code, define_detectors, Strategy};
use lqec_core::decode::{build_graph, extract_detection_events, logical_error_probability};
use lqec_core::noise::{build_channel_tables, InjectionSpec, NoiseParams};
use lqec_core::sim::run_batch;
use std::time::Instant;

fn hardware() -> NoiseParams {
    NoiseParams::from_config_str(include_str!("../../../configs/hardware.cfg")).unwrap()
}

#[test]
fn per_point_decode_rates() {
    let shots = 6000;
    for (strategy, p, kind, ro_one) in [
        (Strategy::NoReset, 0.0075, "leak", 1.0),
        (Strategy::Mlr, 0.01, "leak", 1.0),
        (Strategy::Mlr, 0.01, "pauli", 1.0),
        (Strategy::Dqlr, 0.01, "leak", 1.0),
        (Strategy::Dqlr, 0.01, "pauli", 1.0),
        (Strategy::Dqlr, 0.03, "leak", 1.0),
        (Strategy::Dqlr, 0.03, "pauli", 1.0),
    ] {
        let mut params = hardware();
        params.p_leak_readout_as_one = ro_one;
        params.injection = InjectionSpec {
            p_leak: if kind == "leak" { p } else { 0.0 },
            p_pauli: if kind == "pauli" { p } else { 0.0 },
            ..Default::default()
        };
        let circuit = build_repetition_code(21, 60, strategy, &params.injection).unwrap();
        let tables = build_channel_tables(&params).unwrap();
        let t0 = Instant::now();
        let records = run_batch(&circuit, &tables, shots, 7).unwrap();
        let sim_t = t0.elapsed();
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors).unwrap();
        let k: usize = (0..10).map(|s| events.fired_in_shot(s).len()).sum::<usize>() / 10;
        let graph = build_graph(&circuit, &params, &detectors).unwrap();
        let t0 = Instant::now();
        let stats = logical_error_probability(&records, &detectors, &graph, &circuit).unwrap();
        let decode_t = t0.elapsed();
        println!(
            "{strategy:?} {kind} {p} ro_one {ro_one}: k~{k} sim {:.0?} decode {:.1?}ms/shot p_l {:.4} [{:.4},{:.4}]",
            sim_t,
            decode_t.as_secs_f64() * 1000.0 / shots as f64,
            stats.p, stats.ci_low, stats.ci_high
        );
    }
}
