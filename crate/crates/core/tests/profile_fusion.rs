use fusion_blossom::mwpm_solver::{PrimalDualSolver, SolverSerial};
use fusion_blossom::util::{SolverInitializer, SyndromePattern};
use lqec_core::rng::CounterRng;
use std::time::Instant;

#[test]
fn fusion_phase_timing() {
    // Grid graph shaped like a repetition-code detector graph: 20 x 61
    // nodes, space+time+diagonal edges, boundary virtuals on both sides.
    let (s_max, t_max) = (20usize, 61usize);
    let id = |s: usize, t: usize| (t * s_max + s) as fusion_blossom::util::VertexIndex;
    let n = s_max * t_max;
    let mut edges = Vec::new();
    let mut wrng = CounterRng::new(17);
    let mut w = move || 2 * 3500 * (10 + (wrng.next_u64() % 13) as fusion_blossom::util::Weight);
    for t in 0..t_max {
        for s in 0..s_max {
            if s + 1 < s_max {
                edges.push((id(s, t), id(s + 1, t), w()));
            }
            if t + 1 < t_max {
                edges.push((id(s, t), id(s, t + 1), w()));
                if s + 1 < s_max {
                    edges.push((id(s, t), id(s + 1, t + 1), w()));
                }
            }
        }
    }
    let mut virtuals = Vec::new();
    let mut next = n as fusion_blossom::util::VertexIndex;
    for t in 0..t_max {
        for s in [0, s_max - 1] {
            edges.push((id(s, t), next, w()));
            virtuals.push(next);
            next += 1;
        }
    }
    let init = SolverInitializer::new(next, edges, virtuals);
    let t0 = Instant::now();
    let mut solver = SolverSerial::new(&init);
    println!("construct: {:?}", t0.elapsed());

    let mut rng = CounterRng::new(3);
    for &density in &[0.02, 0.08, 0.16] {
        let defects: Vec<_> = (0..n as u32)
            .filter(|_| rng.uniform() < density)
            .map(|x| x as fusion_blossom::util::VertexIndex)
            .collect();
        let k = defects.len();
        let t0 = Instant::now();
        solver.clear();
        let pattern = SyndromePattern::new_vertices(defects.clone());
        solver.solve(&pattern);
        let solve_t = t0.elapsed();
        let t0 = Instant::now();
        let pm = solver.perfect_matching();
        let pm_t = t0.elapsed();
        let t0 = Instant::now();
        let peers = pm.legacy_get_mwpm_result(defects.clone());
        let legacy_t = t0.elapsed();
        let t0 = Instant::now();
        let sub = solver.subgraph();
        let sub_t = t0.elapsed();
        println!(
            "density {density}: k={k} solve {solve_t:?} pm {pm_t:?} legacy {legacy_t:?} subgraph {sub_t:?} (|sub|={})",
            sub.len()
        );
        let _ = peers;
    }
}
