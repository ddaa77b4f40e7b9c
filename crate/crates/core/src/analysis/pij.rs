//! Pairwise detector-correlation estimates and their time reductions.
//!
//! For detectors `i`, `j` with event means `<x_i>`, `<x_j>` and joint mean
//! `<x_i x_j>`, the edge-probability estimate is
//!
//! ```text
//! p_ij = 1/2 - 1/2 sqrt(1 - 4 num / den),
//! num  = <x_i x_j> - <x_i><x_j>,
//! den  = (1 - 2<x_i>)(1 - 2<x_j>) + 4 num,
//! ```
//!
//! with the radicand floored at zero. Negative covariance pushes the
//! radicand above one and carries through as a negative estimate; entries
//! are clamped to [-1/2, 1/2]. Degenerate marginals (`<x> = 1/2` exactly)
//! leave entries undefined (NaN) and are counted.

use crate::circuits::{Circuit, DetectorSet, StabBasis};
use crate::decode::EventMatrix;
use crate::rng::CounterRng;
use crate::{Error, Result};

/// Metadata of one detector inside a [`PijMatrix`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PijNode {
    pub stabilizer: u32,
    pub cycle: u32,
    pub basis: StabBasis,
    pub weight: u8,
}

/// Symmetric matrix of pairwise edge-probability estimates.
#[derive(Clone, Debug)]
pub struct PijMatrix {
    pub n: usize,
    pub n_shots: usize,
    /// Row-major symmetric values; diagonal zero; NaN marks undefined.
    vals: Vec<f64>,
    /// Boundary-edge estimate per detector.
    pub boundary: Vec<f64>,
    pub nodes: Vec<PijNode>,
    pub undefined_entries: u32,
}

impl PijMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.n + j]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,t");
        for node in &self.nodes {
            s.push_str(&format!(",s{}c{}", node.stabilizer, node.cycle));
        }
        s.push('\n');
        for i in 0..self.n {
            s.push_str(&format!("s{}c{}", self.nodes[i].stabilizer, self.nodes[i].cycle));
            s.push_str(",");
            for j in 0..self.n {
                s.push_str(&format!(",{}", self.get(i, j)));
            }
            s.push('\n');
        }
        s
    }
}

fn pij_from_counts(n_shots: f64, ni: u64, nj: u64, nij: u64) -> f64 {
    let xi = ni as f64 / n_shots;
    let xj = nj as f64 / n_shots;
    let xij = nij as f64 / n_shots;
    let num = xij - xi * xj;
    let den = (1.0 - 2.0 * xi) * (1.0 - 2.0 * xj) + 4.0 * num;
    if den == 0.0 || xi == 0.5 || xj == 0.5 {
        return f64::NAN;
    }
    let radicand = 1.0 - 4.0 * num / den;
    let p = 0.5 - 0.5 * radicand.max(0.0).sqrt();
    p.clamp(-0.5, 0.5)
}

/// Estimate every pairwise edge probability from detection events.
pub fn estimate_pij(events: &EventMatrix, detectors: &DetectorSet) -> Result<PijMatrix> {
    if detectors.detectors.len() != events.n_detectors {
        return Err(Error::ShapeMismatch(
            "event matrix does not match detector set".into(),
        ));
    }
    if events.n_shots == 0 {
        return Err(Error::InvalidParam("zero shots".into()));
    }
    let n = events.n_detectors;
    let shots = events.n_shots as f64;
    let ones: Vec<u64> = (0..n)
        .map(|d| {
            events
                .bits
                .row_words(d)
                .iter()
                .map(|w| w.count_ones() as u64)
                .sum()
        })
        .collect();
    let mut vals = vec![0.0; n * n];
    let mut undefined = 0u32;
    use rayon::prelude::*;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let wi = events.bits.row_words(i);
            let mut row = vec![0.0; n];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let wj = events.bits.row_words(j);
                let nij: u64 = wi
                    .iter()
                    .zip(wj)
                    .map(|(a, b)| (a & b).count_ones() as u64)
                    .sum();
                row[j] = pij_from_counts(shots, ones[i], ones[j], nij);
            }
            row
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            if v.is_nan() && i != j {
                undefined += 1;
            }
            vals[i * n + j] = v;
        }
    }
    // Boundary estimates: whatever marginal probability the pairwise edges
    // cannot explain.
    let mut boundary = vec![0.0; n];
    for i in 0..n {
        let xi = ones[i] as f64 / shots;
        let mut acc = 0.0;
        for j in 0..n {
            let p = vals[i * n + j];
            if j != i && p.is_finite() && p > 0.0 {
                acc = acc + p - 2.0 * acc * p;
            }
        }
        boundary[i] = if acc < 0.5 { (xi - acc) / (1.0 - 2.0 * acc) } else { f64::NAN };
    }
    let nodes = detectors
        .detectors
        .iter()
        .map(|d| PijNode {
            stabilizer: d.stabilizer,
            cycle: d.cycle,
            basis: d.basis,
            weight: d.weight,
        })
        .collect();
    Ok(PijMatrix {
        n,
        n_shots: events.n_shots,
        vals,
        boundary,
        nodes,
        undefined_entries: undefined,
    })
}

/// Average correlation as a function of the two cycle indices.
#[derive(Clone, Debug)]
pub struct AvgCorrelation {
    /// Cycle index of each row/column.
    pub cycles: Vec<u32>,
    /// Row-major mean over selected stabilizer pairs; NaN when no pair
    /// contributes.
    pub vals: Vec<f64>,
}

impl AvgCorrelation {
    pub fn get(&self, ti: usize, tj: usize) -> f64 {
        self.vals[ti * self.cycles.len() + tj]
    }

    /// Mean |correlation| at each time distance within a cycle window.
    pub fn mean_abs_by_distance(&self, window: std::ops::RangeInclusive<u32>) -> Vec<(u32, f64)> {
        let n = self.cycles.len();
        let mut acc: std::collections::BTreeMap<u32, (f64, u32)> = std::collections::BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (ti, tj) = (self.cycles[i], self.cycles[j]);
                if !window.contains(&ti) || !window.contains(&tj) || ti <= tj {
                    continue;
                }
                let v = self.get(i, j);
                if v.is_finite() {
                    let e = acc.entry(ti - tj).or_insert((0.0, 0));
                    e.0 += v.abs();
                    e.1 += 1;
                }
            }
        }
        acc.into_iter().map(|(d, (s, c))| (d, s / c as f64)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for t in &self.cycles {
            s.push_str(&format!(",{t}"));
        }
        s.push('\n');
        for (i, t) in self.cycles.iter().enumerate() {
            s.push_str(&t.to_string());
            for j in 0..self.cycles.len() {
                s.push_str(&format!(",{}", self.get(i, j)));
            }
            s.push('\n');
        }
        s
    }
}

fn averaged<F>(pij: &PijMatrix, select: F) -> AvgCorrelation
where
    F: Fn(&PijNode, &PijNode) -> bool,
{
    let mut cycles: Vec<u32> = pij.nodes.iter().map(|n| n.cycle).collect();
    cycles.sort_unstable();
    cycles.dedup();
    let index_of = |t: u32| cycles.binary_search(&t).expect("cycle present");
    let m = cycles.len();
    let mut sums = vec![0.0; m * m];
    let mut counts = vec![0u32; m * m];
    for i in 0..pij.n {
        for j in 0..pij.n {
            if i == j {
                continue;
            }
            let (a, b) = (&pij.nodes[i], &pij.nodes[j]);
            if !select(a, b) {
                continue;
            }
            let v = pij.get(i, j);
            if v.is_finite() {
                let cell = index_of(a.cycle) * m + index_of(b.cycle);
                sums[cell] += v;
                counts[cell] += 1;
            }
        }
    }
    let vals = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    AvgCorrelation { cycles, vals }
}

/// `p̄(t, t')`: mean over pairs on the same stabilizer.
pub fn autocorrelation_avg(pij: &PijMatrix) -> AvgCorrelation {
    averaged(pij, |a, b| a.stabilizer == b.stabilizer)
}

/// Same-stabilizer average restricted to one basis.
pub fn autocorrelation_avg_filtered(pij: &PijMatrix, basis: StabBasis) -> AvgCorrelation {
    averaged(pij, |a, b| {
        a.stabilizer == b.stabilizer && a.basis == basis && b.basis == basis
    })
}

/// Same-basis stabilizer pairs sharing at least one data qubit.
pub fn stab_neighbor_pairs(circuit: &Circuit) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in &circuit.stabilizers {
        for b in &circuit.stabilizers {
            if a.index >= b.index || a.basis != b.basis {
                continue;
            }
            if a.data.iter().any(|q| b.data.contains(q)) {
                out.push((a.index, b.index));
            }
        }
    }
    out
}

/// Mean over nearest-neighbor stabilizer pairs.
pub fn nn_correlation_avg(pij: &PijMatrix, neighbor_pairs: &[(u32, u32)]) -> AvgCorrelation {
    let set: std::collections::HashSet<(u32, u32)> = neighbor_pairs.iter().copied().collect();
    averaged(pij, |a, b| {
        let key = (a.stabilizer.min(b.stabilizer), a.stabilizer.max(b.stabilizer));
        set.contains(&key)
    })
}

/// Block-bootstrap standard deviations of the reduced correlations.
///
/// Shots are split into `blocks` equal chunks; each of `resamples` draws
/// re-aggregates chunk-level sufficient statistics and the SD of the
/// resampled reduction is reported per (t, t') cell.
pub fn correlation_sd_bootstrap(
    events: &EventMatrix,
    detectors: &DetectorSet,
    same_stab: bool,
    neighbor_pairs: &[(u32, u32)],
    blocks: usize,
    resamples: usize,
    seed: u64,
) -> Result<AvgCorrelation> {
    let n = events.n_detectors;
    if detectors.detectors.len() != n {
        return Err(Error::ShapeMismatch("events vs detectors".into()));
    }
    let blocks = blocks.clamp(2, events.n_shots.max(2));
    let nodes: Vec<PijNode> = detectors
        .detectors
        .iter()
        .map(|d| PijNode {
            stabilizer: d.stabilizer,
            cycle: d.cycle,
            basis: d.basis,
            weight: d.weight,
        })
        .collect();
    let nn: std::collections::HashSet<(u32, u32)> = neighbor_pairs.iter().copied().collect();
    let selected: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .filter(|&(i, j)| {
            let (a, b) = (&nodes[i], &nodes[j]);
            if same_stab {
                a.stabilizer == b.stabilizer
            } else {
                let key = (a.stabilizer.min(b.stabilizer), a.stabilizer.max(b.stabilizer));
                nn.contains(&key)
            }
        })
        .collect();
    // Chunk-level counts.
    let chunk = events.n_shots / blocks;
    if chunk == 0 {
        return Err(Error::InvalidParam("more blocks than shots".into()));
    }
    let used = chunk * blocks;
    let count_in = |d: usize, b: usize| -> u64 {
        (b * chunk..(b + 1) * chunk)
            .filter(|&s| events.event(d, s))
            .count() as u64
    };
    let mut ni = vec![0u64; n * blocks];
    for d in 0..n {
        for b in 0..blocks {
            ni[d * blocks + b] = count_in(d, b);
        }
    }
    use rayon::prelude::*;
    let nij: Vec<Vec<u64>> = selected
        .par_iter()
        .map(|&(i, j)| {
            (0..blocks)
                .map(|b| {
                    (b * chunk..(b + 1) * chunk)
                        .filter(|&s| events.event(i, s) && events.event(j, s))
                        .count() as u64
                })
                .collect()
        })
        .collect();

    let mut cycles: Vec<u32> = nodes.iter().map(|n| n.cycle).collect();
    cycles.sort_unstable();
    cycles.dedup();
    let m = cycles.len();
    let index_of = |t: u32| cycles.binary_search(&t).expect("cycle");

    let mut sum = vec![0.0; m * m];
    let mut sumsq = vec![0.0; m * m];
    let mut rng = CounterRng::new(seed);
    for _ in 0..resamples {
        let draw: Vec<usize> = (0..blocks)
            .map(|_| (rng.next_u64() % blocks as u64) as usize)
            .collect();
        let tot = |d: usize| -> u64 { draw.iter().map(|&b| ni[d * blocks + b]).sum() };
        let mut cell_sum = vec![0.0; m * m];
        let mut cell_n = vec![0u32; m * m];
        for (k, &(i, j)) in selected.iter().enumerate() {
            let nij_r: u64 = draw.iter().map(|&b| nij[k][b]).sum();
            let p = pij_from_counts(used as f64, tot(i), tot(j), nij_r);
            if p.is_finite() {
                let cell = index_of(nodes[i].cycle) * m + index_of(nodes[j].cycle);
                cell_sum[cell] += p;
                cell_n[cell] += 1;
            }
        }
        for c in 0..m * m {
            if cell_n[c] > 0 {
                let v = cell_sum[c] / cell_n[c] as f64;
                sum[c] += v;
                sumsq[c] += v * v;
            }
        }
    }
    let vals = (0..m * m)
        .map(|c| {
            let mean = sum[c] / resamples as f64;
            let var = (sumsq[c] / resamples as f64 - mean * mean).max(0.0);
            var.sqrt()
        })
        .collect();
    Ok(AvgCorrelation { cycles, vals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{MemoryBasis, Strategy};
    use crate::sim::BitMatrix;

    fn synth_events(n_det: usize, n_shots: usize, fill: impl Fn(usize, usize) -> bool) -> EventMatrix {
        let mut bits = BitMatrix::zeros(n_det, n_shots);
        for d in 0..n_det {
            for s in 0..n_shots {
                if fill(d, s) {
                    bits.set(d, s, true);
                }
            }
        }
        EventMatrix { n_shots, n_detectors: n_det, circuit_hash: "0".into(), bits }
    }

    fn toy_detectors(n_stabs: u32, n_cycles: u32) -> DetectorSet {
        let mut detectors = Vec::new();
        for t in 0..n_cycles {
            for s in 0..n_stabs {
                detectors.push(crate::circuits::Detector {
                    stabilizer: s,
                    cycle: t,
                    basis: StabBasis::Z,
                    weight: 2,
                    refs: vec![],
                    time_boundary: false,
                });
            }
        }
        DetectorSet {
            circuit_hash: "0".into(),
            n_stabilizers: n_stabs,
            n_cycles,
            strategy: Strategy::Mlr,
            memory_basis: MemoryBasis::Z,
            detectors,
        }
    }

    #[test]
    fn independent_detectors_have_vanishing_pij() {
        let dets = toy_detectors(2, 3);
        let mut rng = CounterRng::new(77);
        let shots = 40_000;
        let mut noise = vec![false; 6 * shots];
        for v in noise.iter_mut() {
            *v = rng.uniform() < 0.1;
        }
        let events = synth_events(6, shots, |d, s| noise[d * shots + s]);
        let pij = estimate_pij(&events, &dets).unwrap();
        let sigma = 3.0 * (0.1f64 * 0.9 / shots as f64).sqrt() / (1.0 - 0.2);
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(pij.get(i, j).abs() < 3.0 * sigma, "p[{i}][{j}] = {}", pij.get(i, j));
                }
            }
        }
        // Boundary picks up the full marginal.
        for i in 0..6 {
            assert!((pij.boundary[i] - 0.1).abs() < 0.01);
        }
    }

    #[test]
    fn correlated_pair_recovers_edge_probability() {
        let dets = toy_detectors(1, 2);
        let shots = 100_000;
        let mut rng = CounterRng::new(5);
        let mut e = vec![false; 2 * shots];
        for s in 0..shots {
            // Shared edge fires both with p = 0.05; independent noise 0.02.
            let shared = rng.uniform() < 0.05;
            e[s] = shared ^ (rng.uniform() < 0.02);
            e[shots + s] = shared ^ (rng.uniform() < 0.02);
        }
        let events = synth_events(2, shots, |d, s| e[d * shots + s]);
        let pij = estimate_pij(&events, &dets).unwrap();
        assert!((pij.get(0, 1) - 0.05).abs() < 0.005, "{}", pij.get(0, 1));
    }

    #[test]
    fn negative_covariance_carries_sign() {
        let dets = toy_detectors(1, 2);
        let shots = 50_000;
        let mut rng = CounterRng::new(6);
        let mut e = vec![false; 2 * shots];
        for s in 0..shots {
            // A mechanism that fires exactly one of the two detectors
            // produces anti-correlated events on top of independent noise.
            let which = rng.uniform();
            let base0 = rng.uniform() < 0.05;
            let base1 = rng.uniform() < 0.05;
            e[s] = base0 ^ (which < 0.15);
            e[shots + s] = base1 ^ (0.15..0.30).contains(&which);
        }
        let events = synth_events(2, shots, |d, s| e[d * shots + s]);
        let pij = estimate_pij(&events, &dets).unwrap();
        assert!(pij.get(0, 1) < -0.02, "{}", pij.get(0, 1));
        assert!(pij.get(0, 1) >= -0.5);
    }

    #[test]
    fn averaging_ops_match_naive_double_loop() {
        let dets = toy_detectors(3, 4);
        let shots = 5_000;
        let mut rng = CounterRng::new(9);
        let mut raw = vec![false; 12 * shots];
        for v in raw.iter_mut() {
            *v = rng.uniform() < 0.15;
        }
        let events = synth_events(12, shots, |d, s| raw[d * shots + s]);
        let pij = estimate_pij(&events, &dets).unwrap();
        let avg = autocorrelation_avg(&pij);
        // Naive oracle.
        for ti in 0..4u32 {
            for tj in 0..4u32 {
                if ti == tj {
                    continue;
                }
                let mut sum = 0.0;
                let mut count = 0;
                for i in 0..12 {
                    for j in 0..12 {
                        if i == j {
                            continue;
                        }
                        let (a, b) = (&pij.nodes[i], &pij.nodes[j]);
                        if a.stabilizer == b.stabilizer && a.cycle == ti && b.cycle == tj {
                            let v = pij.get(i, j);
                            if v.is_finite() {
                                sum += v;
                                count += 1;
                            }
                        }
                    }
                }
                let want = sum / count as f64;
                let got = avg.get(ti as usize, tj as usize);
                assert!((got - want).abs() < 1e-15, "({ti},{tj}): {got} vs {want}");
            }
        }
        // Nearest-neighbor reduction against the same oracle pattern.
        let pairs = vec![(0u32, 1u32), (1, 2)];
        let nn = nn_correlation_avg(&pij, &pairs);
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..12 {
            for j in 0..12 {
                if i == j {
                    continue;
                }
                let (a, b) = (&pij.nodes[i], &pij.nodes[j]);
                let key = (a.stabilizer.min(b.stabilizer), a.stabilizer.max(b.stabilizer));
                if (key == (0, 1) || key == (1, 2)) && a.cycle == 2 && b.cycle == 0 {
                    let v = pij.get(i, j);
                    if v.is_finite() {
                        sum += v;
                        count += 1;
                    }
                }
            }
        }
        assert!((nn.get(2, 0) - sum / count as f64).abs() < 1e-15);
    }

    #[test]
    fn single_stabilizer_autocorrelation_mirrors_raw_matrix() {
        let dets = toy_detectors(1, 3);
        let shots = 2_000;
        let mut rng = CounterRng::new(3);
        let mut raw = vec![false; 3 * shots];
        for v in raw.iter_mut() {
            *v = rng.uniform() < 0.2;
        }
        let events = synth_events(3, shots, |d, s| raw[d * shots + s]);
        let pij = estimate_pij(&events, &dets).unwrap();
        let avg = autocorrelation_avg(&pij);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(avg.get(i, j), pij.get(i, j));
                }
            }
        }
    }
}
