//! Leakage-population time series via circuit truncation.

use crate::circuits::{truncate_for_population, Circuit};
use crate::noise::ChannelTables;
use crate::rng::mix64;
use crate::sim::run_batch;
use crate::{Error, Result};

/// Probe location: after `moment` of `cycle` (within-cycle index).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ProbePoint {
    pub cycle: u32,
    pub moment: u32,
}

/// Mean leaked fraction (any level above the computational subspace) per
/// probe point, per qubit and averaged by role.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationSeries {
    pub probes: Vec<ProbePoint>,
    pub n_shots: usize,
    /// `per_qubit[probe][qubit]`.
    pub per_qubit: Vec<Vec<f64>>,
    pub data_avg: Vec<f64>,
    pub measure_avg: Vec<f64>,
}

impl PopulationSeries {
    /// Per-probe average over an arbitrary qubit subset.
    pub fn subset_avg(&self, qubits: &[u32]) -> Vec<f64> {
        self.per_qubit
            .iter()
            .map(|row| qubits.iter().map(|&q| row[q as usize]).sum::<f64>() / qubits.len() as f64)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,moment,data_avg,measure_avg");
        for q in 0..self.per_qubit.first().map_or(0, Vec::len) {
            s.push_str(&format!(",q{q}"));
        }
        s.push('\n');
        for (i, p) in self.probes.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{}",
                p.cycle, p.moment, self.data_avg[i], self.measure_avg[i]
            ));
            for v in &self.per_qubit[i] {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Run one truncated circuit per probe point and collect leaked fractions.
///
/// Probe `i` of the series derives its batch seed as
/// `mix64(base_seed ^ mix64(0x70726f6265 + i))`, so separate probes are
/// statistically independent but fully reproducible.
pub fn population_series(
    circuit: &Circuit,
    tables: &ChannelTables,
    n_shots: usize,
    probes: &[ProbePoint],
    base_seed: u64,
) -> Result<PopulationSeries> {
    let mut per_qubit = Vec::with_capacity(probes.len());
    for (i, probe) in probes.iter().enumerate() {
        let truncated = truncate_for_population(circuit, probe.cycle, probe.moment)?;
        let seed = mix64(base_seed ^ mix64(0x70726f_6265 + i as u64));
        let rs = run_batch(&truncated, tables, n_shots, seed)?;
        let (nq, pop) = rs
            .population
            .as_ref()
            .expect("probe circuits record populations");
        let mut counts = vec![0u64; *nq];
        for shot in 0..rs.n_shots {
            let row = &pop[shot * nq..(shot + 1) * nq];
            for (q, &level) in row.iter().enumerate() {
                counts[q] += (level != 0) as u64;
            }
        }
        per_qubit.push(
            counts
                .iter()
                .map(|&c| c as f64 / rs.n_shots as f64)
                .collect::<Vec<f64>>(),
        );
    }
    let data: Vec<u32> = circuit.data_qubits().map(|q| q.id).collect();
    let measure: Vec<u32> = circuit.measure_qubits().map(|q| q.id).collect();
    let series = PopulationSeries {
        probes: probes.to_vec(),
        n_shots,
        data_avg: vec![],
        measure_avg: vec![],
        per_qubit,
    };
    let data_avg = series.subset_avg(&data);
    let measure_avg = series.subset_avg(&measure);
    Ok(PopulationSeries { data_avg, measure_avg, ..series })
}

/// Element-wise difference of two series over the same probes and layout.
/// Statistical noise is preserved: entries may be negative.
pub fn excess_population(
    with_injection: &PopulationSeries,
    baseline: &PopulationSeries,
) -> Result<PopulationSeries> {
    if with_injection.probes != baseline.probes {
        return Err(Error::ShapeMismatch("probe points differ".into()));
    }
    if with_injection.per_qubit.len() != baseline.per_qubit.len()
        || with_injection
            .per_qubit
            .first()
            .map(Vec::len)
            != baseline.per_qubit.first().map(Vec::len)
    {
        return Err(Error::ShapeMismatch("population shapes differ".into()));
    }
    let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
    Ok(PopulationSeries {
        probes: with_injection.probes.clone(),
        n_shots: with_injection.n_shots,
        per_qubit: with_injection
            .per_qubit
            .iter()
            .zip(&baseline.per_qubit)
            .map(|(a, b)| sub(a, b))
            .collect(),
        data_avg: sub(&with_injection.data_avg, &baseline.data_avg),
        measure_avg: sub(&with_injection.measure_avg, &baseline.measure_avg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_surface_code, Strategy};
    use crate::noise::{build_channel_tables, InjectionSpec, NoiseParams};

    #[test]
    fn noiseless_series_is_zero() {
        let c = build_surface_code(3, 2, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let tables = build_channel_tables(&NoiseParams::noiseless()).unwrap();
        let probes = [
            ProbePoint { cycle: 0, moment: 3 },
            ProbePoint { cycle: 1, moment: 9 },
        ];
        let s = population_series(&c, &tables, 200, &probes, 3).unwrap();
        assert!(s.data_avg.iter().all(|&v| v == 0.0));
        assert!(s.measure_avg.iter().all(|&v| v == 0.0));
        let e = excess_population(&s, &s).unwrap();
        assert!(e.per_qubit.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn excess_rejects_mismatched_probes() {
        let c = build_surface_code(3, 2, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let tables = build_channel_tables(&NoiseParams::noiseless()).unwrap();
        let a = population_series(&c, &tables, 10, &[ProbePoint { cycle: 0, moment: 0 }], 3)
            .unwrap();
        let b = population_series(&c, &tables, 10, &[ProbePoint { cycle: 1, moment: 0 }], 3)
            .unwrap();
        assert!(excess_population(&a, &b).is_err());
    }

    #[test]
    fn initial_probe_sees_no_leakage() {
        let c = build_surface_code(3, 2, Strategy::NoReset, &InjectionSpec::default()).unwrap();
        let tables = build_channel_tables(&NoiseParams::table_s1()).unwrap();
        let s = population_series(&c, &tables, 500, &[ProbePoint { cycle: 0, moment: 0 }], 9)
            .unwrap();
        assert!(s.per_qubit[0].iter().all(|&v| v == 0.0));
    }
}
