//! Detection-probability series per stabilizer and per weight class.

use crate::circuits::{DetectorSet, StabBasis};
use crate::decode::EventMatrix;
use crate::{Error, Result};

/// One detector column's event rate.
#[derive(Clone, Debug)]
pub struct DetectorRate {
    pub stabilizer: u32,
    pub cycle: u32,
    pub basis: StabBasis,
    pub weight: u8,
    pub time_boundary: bool,
    pub rate: f64,
}

/// Per-(stabilizer, cycle) rates plus weight-class averages by cycle.
#[derive(Clone, Debug)]
pub struct DetectionSeries {
    pub rates: Vec<DetectorRate>,
    /// (cycle, mean over weight-2 stabilizers).
    pub w2_avg: Vec<(u32, f64)>,
    /// (cycle, mean over weight-4 stabilizers).
    pub w4_avg: Vec<(u32, f64)>,
}

impl DetectionSeries {
    /// Weight-class average restricted to interior (non-boundary) columns.
    pub fn weight_avg_interior(&self, weight: u8) -> Vec<(u32, f64)> {
        average(self.rates.iter().filter(|r| r.weight == weight && !r.time_boundary))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("stabilizer,cycle,basis,weight,boundary,rate\n");
        for r in &self.rates {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.stabilizer,
                r.cycle,
                match r.basis {
                    StabBasis::X => "x",
                    StabBasis::Z => "z",
                },
                r.weight,
                r.time_boundary,
                r.rate
            ));
        }
        s
    }
}

fn average<'a>(rates: impl Iterator<Item = &'a DetectorRate>) -> Vec<(u32, f64)> {
    let mut acc: std::collections::BTreeMap<u32, (f64, u32)> = std::collections::BTreeMap::new();
    for r in rates {
        let e = acc.entry(r.cycle).or_insert((0.0, 0));
        e.0 += r.rate;
        e.1 += 1;
    }
    acc.into_iter().map(|(t, (s, c))| (t, s / c as f64)).collect()
}

/// Mean event rate per detector column and weight-class averages.
pub fn detection_probability_series(
    events: &EventMatrix,
    detectors: &DetectorSet,
) -> Result<DetectionSeries> {
    if events.n_detectors != detectors.detectors.len() {
        return Err(Error::ShapeMismatch("events vs detectors".into()));
    }
    if events.n_shots == 0 {
        return Err(Error::InvalidParam("zero shots".into()));
    }
    let rates: Vec<DetectorRate> = detectors
        .detectors
        .iter()
        .enumerate()
        .map(|(i, d)| DetectorRate {
            stabilizer: d.stabilizer,
            cycle: d.cycle,
            basis: d.basis,
            weight: d.weight,
            time_boundary: d.time_boundary,
            rate: events.detector_mean(i),
        })
        .collect();
    let w2_avg = average(rates.iter().filter(|r| r.weight == 2));
    let w4_avg = average(rates.iter().filter(|r| r.weight == 4));
    Ok(DetectionSeries { rates, w2_avg, w4_avg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{Detector, MemoryBasis, Strategy};
    use crate::rng::CounterRng;
    use crate::sim::BitMatrix;

    #[test]
    fn iid_events_produce_a_flat_series() {
        let n_stabs = 4u32;
        let n_cycles = 12u32;
        let mut detectors = Vec::new();
        for t in 0..n_cycles {
            for s in 0..n_stabs {
                detectors.push(Detector {
                    stabilizer: s,
                    cycle: t,
                    basis: StabBasis::Z,
                    weight: if s < 2 { 2 } else { 4 },
                    refs: vec![],
                    time_boundary: false,
                });
            }
        }
        let ds = DetectorSet {
            circuit_hash: "0".into(),
            n_stabilizers: n_stabs,
            n_cycles,
            strategy: Strategy::Mlr,
            memory_basis: MemoryBasis::Z,
            detectors,
        };
        let shots = 30_000;
        let n_det = (n_stabs * n_cycles) as usize;
        let mut bits = BitMatrix::zeros(n_det, shots);
        let mut rng = CounterRng::new(8);
        for d in 0..n_det {
            for s in 0..shots {
                if rng.uniform() < 0.18 {
                    bits.set(d, s, true);
                }
            }
        }
        let events = crate::decode::EventMatrix {
            n_shots: shots,
            n_detectors: n_det,
            circuit_hash: "0".into(),
            bits,
        };
        let series = detection_probability_series(&events, &ds).unwrap();
        let sigma = 3.0 * (0.18f64 * 0.82 / (shots as f64 * 2.0)).sqrt();
        for &(_, rate) in series.w2_avg.iter().chain(&series.w4_avg) {
            assert!((rate - 0.18).abs() < sigma, "rate {rate}");
        }
        assert_eq!(series.w2_avg.len(), n_cycles as usize);
    }

    #[test]
    fn all_zero_events_are_all_zero() {
        let ds = DetectorSet {
            circuit_hash: "0".into(),
            n_stabilizers: 1,
            n_cycles: 2,
            strategy: Strategy::Mlr,
            memory_basis: MemoryBasis::Z,
            detectors: (0..2)
                .map(|t| Detector {
                    stabilizer: 0,
                    cycle: t,
                    basis: StabBasis::Z,
                    weight: 2,
                    refs: vec![],
                    time_boundary: false,
                })
                .collect(),
        };
        let events = crate::decode::EventMatrix {
            n_shots: 10,
            n_detectors: 2,
            circuit_hash: "0".into(),
            bits: BitMatrix::zeros(2, 10),
        };
        let series = detection_probability_series(&events, &ds).unwrap();
        assert!(series.rates.iter().all(|r| r.rate == 0.0));
    }
}
