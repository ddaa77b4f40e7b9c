//! Exact minimum-weight perfect matching of defects over a weighted graph.
//!
//! Matched pairs connect through shortest paths in the graph (the metric
//! closure), which is the object a matching decoder minimizes: the total
//! weight of an error subgraph whose odd-degree vertices are exactly the
//! defects. The search is `fusion_blossom`'s exact serial solver; weights
//! are scaled to even integers at 2^-16 relative resolution, and totals are
//! reported from the original floating-point weights. Optimality is
//! cross-checked against an exhaustive pairing oracle over the metric
//! closure in the test suites.

use crate::{Error, Result};
use fusion_blossom::mwpm_solver::{PrimalDualSolver, SolverSerial};
use fusion_blossom::util::{SolverInitializer, SyndromePattern, VertexIndex, Weight};

const SCALE: f64 = (1u64 << 16) as f64;

pub(crate) fn scaled_weight(w: f64) -> Weight {
    2 * ((w * SCALE).round() as Weight)
}

/// Solve one defect set; returns the peer vertex of every defect and the
/// chosen edge indices (into the initializer's edge list).
pub(crate) fn solve_defects(
    solver: &mut SolverSerial,
    defects: &[VertexIndex],
) -> (Vec<VertexIndex>, Vec<usize>) {
    solver.clear();
    let pattern = SyndromePattern::new_vertices(defects.to_vec());
    solver.solve(&pattern);
    let peers = solver
        .perfect_matching()
        .legacy_get_mwpm_result(defects.to_vec());
    let subgraph = solver.subgraph().into_iter().map(|e| e as usize).collect();
    (peers, subgraph)
}

/// Minimum-weight perfect matching over `n` defects and the given weighted
/// edges; pairs may connect through multi-edge paths. Returns matched pairs
/// and the total path weight.
pub fn min_weight_perfect_matching(
    n: usize,
    edges: &[(u32, u32, f64)],
) -> Result<(Vec<(u32, u32)>, f64)> {
    if n == 0 {
        return Ok((vec![], 0.0));
    }
    if n % 2 == 1 {
        return Err(Error::InvalidParam(format!(
            "perfect matching impossible on {n} nodes"
        )));
    }
    for &(a, b, w) in edges {
        if a as usize >= n || b as usize >= n || a == b {
            return Err(Error::InvalidParam(format!("bad edge ({a}, {b}) for n = {n}")));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidParam(format!("bad edge weight {w}")));
        }
    }
    // Feasibility: every connected component must hold an even number of
    // nodes, isolated nodes included.
    {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b, _) in edges {
            let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
            parent[ra] = rb;
        }
        let mut sizes = vec![0usize; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            sizes[r] += 1;
        }
        if sizes.iter().any(|&s| s % 2 == 1) {
            return Err(Error::InvalidParam(
                "edge set admits no perfect matching (odd component)".into(),
            ));
        }
    }
    let weighted_edges: Vec<(VertexIndex, VertexIndex, Weight)> = edges
        .iter()
        .map(|&(a, b, w)| (a as VertexIndex, b as VertexIndex, scaled_weight(w)))
        .collect();
    let initializer = SolverInitializer::new(n as VertexIndex, weighted_edges, vec![]);
    let mut solver = SolverSerial::new(&initializer);
    let defects: Vec<VertexIndex> = (0..n as VertexIndex).collect();
    let (peers, subgraph) = solve_defects(&mut solver, &defects);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(n / 2);
    for (i, &peer) in peers.iter().enumerate() {
        let (a, b) = (i as u32, peer as u32);
        if a < b {
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    if pairs.len() * 2 != n {
        return Err(Error::InvalidParam("solver left defects unmatched".into()));
    }
    let total: f64 = subgraph.iter().map(|&e| edges[e].2).sum();
    Ok((pairs, total))
}

#[cfg(test)]
pub(crate) mod brute {
    /// Exhaustive minimum-weight defect pairing over the metric closure.
    pub fn brute_force_min(n: usize, edges: &[(u32, u32, f64)]) -> Option<(Vec<(u32, u32)>, f64)> {
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(a, b, x) in edges {
            let (a, b) = (a as usize, b as usize);
            if x < dist[a][b] {
                dist[a][b] = x;
                dist[b][a] = x;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        let mut used = vec![false; n];
        let mut best: Option<(Vec<(u32, u32)>, f64)> = None;
        let mut current = Vec::new();
        fn recurse(
            dist: &[Vec<f64>],
            used: &mut [bool],
            current: &mut Vec<(u32, u32)>,
            acc: f64,
            best: &mut Option<(Vec<(u32, u32)>, f64)>,
        ) {
            let n = used.len();
            let first = match (0..n).find(|&i| !used[i]) {
                Some(i) => i,
                None => {
                    if best.as_ref().is_none_or(|(_, bw)| acc < *bw) {
                        *best = Some((current.clone(), acc));
                    }
                    return;
                }
            };
            used[first] = true;
            for j in first + 1..n {
                if !used[j] && dist[first][j].is_finite() {
                    used[j] = true;
                    current.push((first as u32, j as u32));
                    recurse(dist, used, current, acc + dist[first][j], best);
                    current.pop();
                    used[j] = false;
                }
            }
            used[first] = false;
        }
        recurse(&dist, &mut used, &mut current, 0.0, &mut best);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::brute::brute_force_min;
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn trivial_instances() {
        assert_eq!(min_weight_perfect_matching(0, &[]).unwrap().0, vec![]);
        let (pairs, w) = min_weight_perfect_matching(2, &[(0, 1, 3.5)]).unwrap();
        assert_eq!(pairs, vec![(0, 1)]);
        assert!((w - 3.5).abs() < 1e-4);
        assert!(min_weight_perfect_matching(3, &[(0, 1, 1.0)]).is_err());
        assert!(min_weight_perfect_matching(4, &[(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn picks_the_cheaper_pairing() {
        let edges = [(0, 1, 1.0), (2, 3, 1.0), (0, 2, 5.0), (1, 3, 5.0)];
        let (pairs, w) = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
        assert!((w - 2.0).abs() < 1e-9);
    }

    #[test]
    fn routes_through_cheap_paths() {
        // Pairing (0,3) + (1,2) through the chain beats the direct edge.
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 10.0)];
        let (_, w) = min_weight_perfect_matching(4, &edges).unwrap();
        let (_, want) = brute_force_min(4, &edges).unwrap();
        assert_eq!(w, want);
        assert!((w - 2.0).abs() < 1e-9, "chain pairing weighs 2, got {w}");
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = CounterRng::new(0xdec0de);
        for trial in 0..300 {
            let n = 2 * (1 + (rng.next_u64() % 5) as usize); // 2..10 nodes
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    // Integer weights keep totals exactly comparable.
                    let w = (rng.next_u64() % 1000) as f64;
                    edges.push((a, b, w));
                }
            }
            let (_, got) = min_weight_perfect_matching(n, &edges).unwrap();
            let (_, want) = brute_force_min(n, &edges).unwrap();
            assert_eq!(got, want, "trial {trial}, n {n}");
        }
    }
}
