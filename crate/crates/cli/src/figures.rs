//! Preset study pipelines ("figure bundles"): each produces plot-ready CSV
//! files under `<out_root>/figures/<id>/` and returns its headline numbers
//! for programmatic use. Bundled configs carry the official shot counts and
//! seeds; callers may scale shots down for smoke runs.

use crate::commands::{build_circuit, provenance_header, run_and_decode, save_point};
use crate::config::ExperimentConfig;
use lqec_core::analysis::{
    autocorrelation_avg, detection_probability_series, estimate_pij, fit_exp_decay,
    fit_gompertz, fit_linear, fit_power_law, lambda_from_stats, nn_correlation_avg,
    stab_neighbor_pairs, AvgCorrelation, FitModel, FitResult, LambdaSweep,
};
use lqec_core::circuits::{define_detectors, Circuit, Strategy};
use lqec_core::decode::{extract_detection_events, LogicalStats};
use lqec_core::noise::{build_channel_tables, InjectionSpec, NoiseParams, TargetMask};
use lqec_core::rng::mix64;
use lqec_core::sim::{population_series, PopulationSeries, ProbePoint, RecordSet};
use lqec_core::{Error, Result};
use std::path::{Path, PathBuf};

macro_rules! bundled {
    ($name:literal) => {
        include_str!(concat!("../../../configs/", $name, ".cfg"))
    };
}

/// Bundled configuration text for a figure id.
pub fn bundled_config(id: &str) -> Result<&'static str> {
    Ok(match id {
        "fig1c" => bundled!("fig1c"),
        "fig3a" => bundled!("fig3a"),
        "fig3c" => bundled!("fig3c"),
        "fig4a" => bundled!("fig4a"),
        "fig5a" => bundled!("fig5a"),
        "fig5b" => bundled!("fig5b"),
        "fig5c" => bundled!("fig5c"),
        "figS4" => bundled!("figS4"),
        "figS5" => bundled!("figS5"),
        "figS6" => bundled!("figS6"),
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown figure id `{other}` (fig1c fig3a fig3c fig4a fig5a fig5b fig5c figS4 figS5 figS6)"
            )))
        }
    })
}

fn load_bundled(id: &str, shots: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::parse(bundled_config(id)?, None)?;
    if let Some(s) = shots {
        cfg.shots = s;
    }
    Ok(cfg)
}

fn seed_for(base: u64, tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
    }
    mix64(base ^ h)
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::NoReset => "no_reset",
        Strategy::Mlr => "mlr",
        Strategy::Dqlr => "dqlr",
    }
}

fn fig_dir(out_root: &Path, id: &str) -> Result<PathBuf> {
    let dir = out_root.join("figures").join(id);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_csv(dir: &Path, name: &str, header: &str, body: &str) -> Result<()> {
    std::fs::write(dir.join(name), format!("{header}{body}"))?;
    Ok(())
}

fn end_of_cycle_probes(circuit: &Circuit) -> Vec<ProbePoint> {
    let last = circuit.cycle_moments(0).len() as u32 - 1;
    (0..circuit.n_cycles)
        .map(|cycle| ProbePoint { cycle, moment: last })
        .collect()
}

/// Leakage populations at the end of every cycle, all three strategies.
pub struct Fig3a {
    pub shots: usize,
    pub series: Vec<(Strategy, PopulationSeries)>,
}

pub fn fig3a(out_root: &Path, shots: Option<usize>) -> Result<Fig3a> {
    let cfg = load_bundled("fig3a", shots)?;
    let dir = fig_dir(out_root, "fig3a")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let tables = build_channel_tables(&cfg.noise)?;
    let mut series = Vec::new();
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        let circuit = build_circuit(
            cfg.code,
            cfg.distance,
            cfg.cycles,
            strategy,
            cfg.memory,
            &cfg.injection,
        )?;
        let probes = end_of_cycle_probes(&circuit);
        let seed = seed_for(cfg.base_seed, strategy_name(strategy));
        let pops = population_series(&circuit, &tables, cfg.shots, &probes, seed)?;
        write_csv(
            &dir,
            &format!("populations_{}.csv", strategy_name(strategy)),
            &header,
            &pops.to_csv(),
        )?;
        series.push((strategy, pops));
    }
    Ok(Fig3a { shots: cfg.shots, series })
}

/// Excess-population dynamics after a full |1>->|2> injection on the
/// central data qubit.
pub struct Fig1c {
    pub shots: usize,
    /// Central-qubit excess at the end of each cycle (no removal).
    pub noreset_central_excess: Vec<f64>,
    /// Exponential decay constant fitted over the early cycles.
    pub tau_cycles: f64,
    /// Neighboring qubits whose excess tops 1e-3 anywhere in cycles 0..10.
    pub spread_qubits: usize,
    /// Largest per-qubit excess at cycles >= 2 under full removal.
    pub dqlr_max_excess_after_2: f64,
}

pub fn fig1c(out_root: &Path, shots: Option<usize>) -> Result<Fig1c> {
    let cfg = load_bundled("fig1c", shots)?;
    let dir = fig_dir(out_root, "fig1c")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let tables = build_channel_tables(&cfg.noise)?;
    let central = (cfg.distance * cfg.distance) / 2; // data qubit (d/2, d/2)
    let injected = InjectionSpec {
        p_leak: 0.5,
        p_pauli: 0.0,
        targets: TargetMask::Qubits(vec![central]),
        only_cycle: Some(0),
    };
    let baseline_spec = InjectionSpec { p_leak: 0.0, ..injected.clone() };

    let run = |strategy: Strategy, cycles: u32, shots: usize, tag: &str| -> Result<PopulationSeries> {
        let mut with = None;
        let mut without = None;
        for (name, spec, slot) in [
            ("inj", &injected, &mut with),
            ("base", &baseline_spec, &mut without),
        ] {
            let circuit =
                build_circuit(cfg.code, cfg.distance, cycles, strategy, cfg.memory, spec)?;
            let probes = end_of_cycle_probes(&circuit);
            let seed = seed_for(cfg.base_seed, &format!("{tag}-{name}"));
            *slot = Some(population_series(&circuit, &tables, shots, &probes, seed)?);
        }
        lqec_core::sim::excess_population(&with.unwrap(), &without.unwrap())
    };

    let noreset = run(Strategy::NoReset, cfg.cycles, cfg.shots, "noreset")?;
    write_csv(&dir, "excess_no_reset.csv", &header, &noreset.to_csv())?;
    let central_series: Vec<f64> = noreset
        .per_qubit
        .iter()
        .map(|row| row[central as usize])
        .collect();
    // Fit the decay while the excess is cleanly above the noise floor.
    let fit_points: Vec<(f64, f64)> = central_series
        .iter()
        .enumerate()
        .take(12)
        .map(|(c, &v)| (c as f64, v))
        .filter(|&(_, v)| v > 5e-3)
        .collect();
    let tau = match fit_exp_decay(&fit_points)?.model {
        FitModel::ExpDecay { tau, .. } => tau,
        _ => unreachable!(),
    };
    let spread_qubits = (0..noreset.per_qubit[0].len())
        .filter(|&q| q != central as usize)
        .filter(|&q| {
            noreset
                .per_qubit
                .iter()
                .take(10)
                .any(|row| row[q] > 1e-3)
        })
        .count();

    // Removal variant: a few cycles at higher statistics.
    let dqlr_shots = cfg.shots * 4;
    let dqlr = run(Strategy::Dqlr, 6, dqlr_shots, "dqlr")?;
    write_csv(&dir, "excess_dqlr.csv", &header, &dqlr.to_csv())?;
    let dqlr_max = dqlr
        .per_qubit
        .iter()
        .skip(2)
        .flatten()
        .fold(f64::MIN, |a, &b| a.max(b));

    let mut fit_text = header.clone();
    fit_text.push_str(&format!(
        "central_qubit {central}\ntau_cycles {tau}\nspread_qubits_above_1e-3_by_cycle10 {spread_qubits}\ndqlr_max_excess_from_cycle2 {dqlr_max}\n"
    ));
    std::fs::write(dir.join("summary.txt"), fit_text)?;
    Ok(Fig1c {
        shots: cfg.shots,
        noreset_central_excess: central_series,
        tau_cycles: tau,
        spread_qubits,
        dqlr_max_excess_after_2: dqlr_max,
    })
}

/// Within-cycle leakage dynamics, moment by moment.
pub struct Fig3c {
    pub per_strategy: Vec<(Strategy, PopulationSeries)>,
}

pub fn fig3c(out_root: &Path, shots: Option<usize>) -> Result<Fig3c> {
    let cfg = load_bundled("fig3c", shots)?;
    let dir = fig_dir(out_root, "fig3c")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let tables = build_channel_tables(&cfg.noise)?;
    let probe = cfg.probe.as_ref().expect("fig3c probes per moment");
    let mut out = Vec::new();
    for strategy in [Strategy::Mlr, Strategy::Dqlr] {
        let circuit = build_circuit(
            cfg.code,
            cfg.distance,
            cfg.cycles,
            strategy,
            cfg.memory,
            &cfg.injection,
        )?;
        let per_cycle = circuit.cycle_moments(0).len() as u32;
        let mut probes = Vec::new();
        for cycle in probe.first_cycle..=probe.last_cycle {
            for moment in 0..per_cycle {
                probes.push(ProbePoint { cycle, moment });
            }
        }
        let seed = seed_for(cfg.base_seed, strategy_name(strategy));
        let pops = population_series(&circuit, &tables, cfg.shots, &probes, seed)?;
        write_csv(
            &dir,
            &format!("moments_{}.csv", strategy_name(strategy)),
            &header,
            &pops.to_csv(),
        )?;
        out.push((strategy, pops));
    }
    Ok(Fig3c { per_strategy: out })
}

/// One logical-error curve: (injected population, decoded stats).
pub type Curve = Vec<(f64, LogicalStats)>;

/// Bit-flip code response to injected leakage vs injected Pauli errors.
pub struct Fig4a {
    pub shots: usize,
    pub leak: Vec<(Strategy, Curve)>,
    pub pauli: Vec<(Strategy, Curve)>,
}

impl Fig4a {
    pub fn leak_curve(&self, s: Strategy) -> &Curve {
        &self.leak.iter().find(|(x, _)| *x == s).expect("strategy present").1
    }

    pub fn pauli_curve(&self, s: Strategy) -> &Curve {
        &self.pauli.iter().find(|(x, _)| *x == s).expect("strategy present").1
    }
}

pub fn fig4a(out_root: &Path, shots: Option<usize>) -> Result<Fig4a> {
    let cfg = load_bundled("fig4a", shots)?;
    let dir = fig_dir(out_root, "fig4a")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let points_leak = &cfg.sweep_leak;
    let points_pauli = &cfg.sweep_pauli;
    let mut leak = Vec::new();
    let mut pauli = Vec::new();
    let mut csv = String::from("strategy,kind,p,logical,ci_low,ci_high,errors,shots\n");
    let mut run_curve = |strategy: Strategy, kind: &str, ps: &[f64]| -> Result<Curve> {
        let mut curve = Vec::new();
        for &p in ps {
            let injection = InjectionSpec {
                p_leak: if kind == "leak" { p } else { 0.0 },
                p_pauli: if kind == "pauli" { p } else { 0.0 },
                ..cfg.injection.clone()
            };
            let mut params = cfg.noise.clone();
            params.injection = injection.clone();
            let tables = build_channel_tables(&params)?;
            let circuit = build_circuit(
                cfg.code,
                cfg.distance,
                cfg.cycles,
                strategy,
                cfg.memory,
                &injection,
            )?;
            let seed = seed_for(cfg.base_seed, &format!("{}-{kind}-{p}", strategy_name(strategy)));
            let (_, stats) = run_and_decode(&circuit, &tables, &params, cfg.shots, seed)?;
            csv.push_str(&format!(
                "{},{kind},{p},{},{},{},{},{}\n",
                strategy_name(strategy),
                stats.p,
                stats.ci_low,
                stats.ci_high,
                stats.errors,
                stats.shots
            ));
            curve.push((p, stats));
        }
        Ok(curve)
    };
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        leak.push((strategy, run_curve(strategy, "leak", points_leak)?));
    }
    // Pauli comparison curves where the ordering criteria need them.
    pauli.push((Strategy::Dqlr, run_curve(Strategy::Dqlr, "pauli", points_pauli)?));
    pauli.push((Strategy::Mlr, run_curve(Strategy::Mlr, "pauli", points_pauli)?));
    write_csv(&dir, "logical_error.csv", &header, &csv)?;

    // Offset-power-law guides, where enough points exist.
    let mut fits = String::new();
    for (strategy, curve) in leak.iter().map(|(s, c)| (*s, ("leak", c))).chain(
        pauli.iter().map(|(s, c)| (*s, ("pauli", c))),
    ) {
        let (kind, curve) = curve;
        let pts: Vec<(f64, f64)> = curve
            .iter()
            .filter(|(_, s)| s.errors > 0)
            .map(|(p, s)| (*p, s.p))
            .collect();
        if pts.len() >= 4 {
            if let Ok(fit) = fit_power_law(&pts) {
                fits.push_str(&format!(
                    "{} {kind} {:?} r2 {}\n",
                    strategy_name(strategy),
                    fit.model,
                    fit.r_squared
                ));
            }
        }
    }
    std::fs::write(dir.join("fits.txt"), format!("{header}{fits}"))?;
    Ok(Fig4a { shots: cfg.shots, leak, pauli })
}

/// Records for the 30-cycle distance-3 study, cached on disk per strategy.
pub fn d3_strategy_records(
    out_root: &Path,
    cfg: &ExperimentConfig,
    strategy: Strategy,
) -> Result<(Circuit, NoiseParams, RecordSet)> {
    let dir = out_root
        .join(&cfg.output)
        .join(strategy_name(strategy));
    let circuit = build_circuit(
        cfg.code,
        cfg.distance,
        cfg.cycles,
        strategy,
        cfg.memory,
        &cfg.injection,
    )?;
    if dir.join("records.meta").exists() {
        if let Ok(loaded) = crate::commands::load_point(&dir) {
            if loaded.2.circuit_hash == circuit.hash() && loaded.2.n_shots == cfg.shots {
                return Ok(loaded);
            }
        }
    }
    let tables = build_channel_tables(&cfg.noise)?;
    let seed = seed_for(cfg.base_seed, strategy_name(strategy));
    let records = lqec_core::sim::run_batch(&circuit, &tables, cfg.shots, seed)?;
    save_point(&dir, &cfg.hash(), &circuit, &cfg.noise, &records, None, None, None)?;
    Ok((circuit, cfg.noise.clone(), records))
}

/// Weight-4 detection probability per cycle under each strategy.
pub struct Fig5a {
    pub w4: Vec<(Strategy, Vec<(u32, f64)>)>,
    pub w2: Vec<(Strategy, Vec<(u32, f64)>)>,
}

impl Fig5a {
    pub fn w4_series(&self, s: Strategy) -> &[(u32, f64)] {
        &self.w4.iter().find(|(x, _)| *x == s).expect("strategy present").1
    }
}

pub fn fig5a(out_root: &Path, shots: Option<usize>) -> Result<Fig5a> {
    let cfg = load_bundled("fig5a", shots)?;
    let dir = fig_dir(out_root, "fig5a")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let mut w4 = Vec::new();
    let mut w2 = Vec::new();
    let mut csv = String::from("strategy,weight,cycle,detection\n");
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        let (circuit, _, records) = d3_strategy_records(out_root, &cfg, strategy)?;
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors)?;
        let series = detection_probability_series(&events, &detectors)?;
        // Interior columns: boundary detectors see half an error window.
        let s4 = series.weight_avg_interior(4);
        let s2 = series.weight_avg_interior(2);
        for &(t, r) in &s4 {
            csv.push_str(&format!("{},4,{t},{r}\n", strategy_name(strategy)));
        }
        for &(t, r) in &s2 {
            csv.push_str(&format!("{},2,{t},{r}\n", strategy_name(strategy)));
        }
        w4.push((strategy, s4));
        w2.push((strategy, s2));
    }
    write_csv(&dir, "detection.csv", &header, &csv)?;
    Ok(Fig5a { w4, w2 })
}

/// Full weight-2/weight-4 and per-stabilizer detection series.
pub fn fig_s5(out_root: &Path, shots: Option<usize>) -> Result<Fig5a> {
    let cfg = load_bundled("figS5", shots)?;
    let dir = fig_dir(out_root, "figS5")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let mut w4 = Vec::new();
    let mut w2 = Vec::new();
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        let (circuit, _, records) = d3_strategy_records(out_root, &cfg, strategy)?;
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors)?;
        let series = detection_probability_series(&events, &detectors)?;
        write_csv(
            &dir,
            &format!("detection_{}.csv", strategy_name(strategy)),
            &header,
            &series.to_csv(),
        )?;
        w4.push((strategy, series.weight_avg_interior(4)));
        w2.push((strategy, series.weight_avg_interior(2)));
    }
    Ok(Fig5a { w4, w2 })
}

/// Time-correlation profiles of the detector-pair estimates.
pub struct CorrelationStudy {
    /// Per strategy: |mean correlation| by time distance, same stabilizer.
    pub auto_profile: Vec<(Strategy, Vec<(u32, f64)>)>,
    /// Same over nearest-neighbor stabilizer pairs.
    pub nn_profile: Vec<(Strategy, Vec<(u32, f64)>)>,
    pub window: (u32, u32),
}

/// Pairwise-correlation study over the cached 30-cycle records.
pub fn correlation_study(out_root: &Path, shots: Option<usize>) -> Result<CorrelationStudy> {
    let cfg = load_bundled("figS5", shots)?;
    let dir = fig_dir(out_root, "correlations")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let window = (19u32, 29u32);
    let mut auto_profile = Vec::new();
    let mut nn_profile = Vec::new();
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        let (circuit, _, records) = d3_strategy_records(out_root, &cfg, strategy)?;
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors)?;
        let pij = estimate_pij(&events, &detectors)?;
        let auto = autocorrelation_avg(&pij);
        let pairs = stab_neighbor_pairs(&circuit);
        let nn = nn_correlation_avg(&pij, &pairs);
        let profile = |m: &AvgCorrelation| m.mean_abs_by_distance(window.0..=window.1);
        write_csv(
            &dir,
            &format!("autocorr_{}.csv", strategy_name(strategy)),
            &header,
            &auto.to_csv(),
        )?;
        write_csv(
            &dir,
            &format!("nn_corr_{}.csv", strategy_name(strategy)),
            &header,
            &nn.to_csv(),
        )?;
        let mut profile_csv = String::from("distance,auto_abs,nn_abs\n");
        let (pa, pn) = (profile(&auto), profile(&nn));
        for (i, &(d, v)) in pa.iter().enumerate() {
            let nnv = pn.get(i).map_or(f64::NAN, |&(_, v)| v);
            profile_csv.push_str(&format!("{d},{v},{nnv}\n"));
        }
        write_csv(
            &dir,
            &format!("profile_{}.csv", strategy_name(strategy)),
            &header,
            &profile_csv,
        )?;
        auto_profile.push((strategy, pa));
        nn_profile.push((strategy, pn));
    }
    Ok(CorrelationStudy { auto_profile, nn_profile, window })
}

/// Surface-code logical error against injected leakage.
pub struct Fig5b {
    pub curves: Vec<(Strategy, Curve)>,
}

pub fn fig5b(out_root: &Path, shots: Option<usize>) -> Result<Fig5b> {
    let cfg = load_bundled("fig5b", shots)?;
    let dir = fig_dir(out_root, "fig5b")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let mut csv = String::from("strategy,p_leak,logical,ci_low,ci_high\n");
    let mut curves = Vec::new();
    for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
        let mut curve = Vec::new();
        for &p in &cfg.sweep_leak {
            let injection = InjectionSpec { p_leak: p, ..cfg.injection.clone() };
            let mut params = cfg.noise.clone();
            params.injection = injection.clone();
            let tables = build_channel_tables(&params)?;
            let circuit = build_circuit(
                cfg.code,
                cfg.distance,
                cfg.cycles,
                strategy,
                cfg.memory,
                &injection,
            )?;
            let seed = seed_for(cfg.base_seed, &format!("{}-{p}", strategy_name(strategy)));
            let (_, stats) = run_and_decode(&circuit, &tables, &params, cfg.shots, seed)?;
            csv.push_str(&format!(
                "{},{p},{},{},{}\n",
                strategy_name(strategy),
                stats.p,
                stats.ci_low,
                stats.ci_high
            ));
            curve.push((p, stats));
        }
        curves.push((strategy, curve));
    }
    write_csv(&dir, "logical_error.csv", &header, &csv)?;
    Ok(Fig5b { curves })
}

/// Error-suppression ratio under injected leakage, per removal strategy.
pub struct Fig5c {
    pub sweeps: Vec<(Strategy, LambdaSweep)>,
    pub dqlr_linear: FitResult,
}

impl Fig5c {
    pub fn sweep(&self, s: Strategy) -> &LambdaSweep {
        &self.sweeps.iter().find(|(x, _)| *x == s).expect("strategy present").1
    }
}

/// The suppression-ratio sweep shared by fig5c and `lqec sweep`.
fn lambda_sweep_runs(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<(Strategy, LambdaSweep)>> {
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let (d_low, d_high) = cfg
        .lambda_distances
        .ok_or_else(|| Error::InvalidParam("config needs sweep.lambda_distances".into()))?;
    let mut sweeps = Vec::new();
    for &strategy in &cfg.strategies {
        let mut points = Vec::new();
        for &p in &cfg.sweep_leak {
            let injection = InjectionSpec { p_leak: p, ..cfg.injection.clone() };
            let mut params = cfg.noise.clone();
            params.injection = injection.clone();
            let tables = build_channel_tables(&params)?;
            let mut stats = Vec::new();
            for distance in [d_low, d_high] {
                let circuit = build_circuit(
                    cfg.code,
                    distance,
                    cfg.cycles,
                    strategy,
                    cfg.memory,
                    &injection,
                )?;
                let seed = seed_for(
                    cfg.base_seed,
                    &format!("{}-d{distance}-{p}", strategy_name(strategy)),
                );
                let (_, s) = run_and_decode(&circuit, &tables, &params, cfg.shots, seed)?;
                stats.push(s);
            }
            let result = lambda_from_stats(&stats[0], cfg.cycles, &stats[1], cfg.cycles)?;
            points.push((p, result));
        }
        let sweep = LambdaSweep::new(points);
        write_csv(
            dir,
            &format!("lambda_{}.csv", strategy_name(strategy)),
            &header,
            &sweep.to_csv(),
        )?;
        sweeps.push((strategy, sweep));
    }
    Ok(sweeps)
}

pub fn fig5c(out_root: &Path, shots: Option<usize>) -> Result<Fig5c> {
    let cfg = load_bundled("fig5c", shots)?;
    let dir = fig_dir(out_root, "fig5c")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let sweeps = lambda_sweep_runs(&cfg, &dir)?;
    let dqlr = sweeps
        .iter()
        .find(|(s, _)| *s == Strategy::Dqlr)
        .ok_or_else(|| Error::InvalidParam("sweep must include dqlr".into()))?;
    let dqlr_linear = dqlr.1.fit_inverse_linear()?;
    let mut fits = format!("dqlr_linear {:?} r2 {}\n", dqlr_linear.model, dqlr_linear.r_squared);
    for (strategy, sweep) in &sweeps {
        if let Ok((f5, f7)) = sweep.fit_ratio_of_power_laws() {
            fits.push_str(&format!(
                "{} ratio_of_power_laws low {:?} high {:?}\n",
                strategy_name(*strategy),
                f5.model,
                f7.model
            ));
        }
    }
    std::fs::write(dir.join("fits.txt"), format!("{header}{fits}"))?;
    Ok(Fig5c { sweeps, dqlr_linear })
}

/// `lqec sweep`: the ratio sweep over a user config.
pub fn run_sweep_config(cfg: &ExperimentConfig, out_root: &Path) -> Result<String> {
    let dir = out_root.join(&cfg.output);
    std::fs::create_dir_all(&dir)?;
    let sweeps = lambda_sweep_runs(cfg, &dir)?;
    let mut out = String::new();
    for (strategy, sweep) in &sweeps {
        out.push_str(&format!("{}:\n", strategy_name(*strategy)));
        for (p, r) in &sweep.points {
            out.push_str(&format!(
                "  p={p}: lambda {:.3} (1/lambda {:.4}{})\n",
                r.lambda,
                r.inverse,
                if r.lower_bound_only { ", lower bound" } else { "" }
            ));
        }
        if let Ok(fit) = sweep.fit_inverse_linear() {
            out.push_str(&format!("  linear fit {:?} r2 {:.4}\n", fit.model, fit.r_squared));
        }
    }
    Ok(out)
}

/// Bit-flip logical error as the code runs longer.
pub struct FigS4 {
    pub curves: Vec<(String, Vec<(u32, LogicalStats)>)>,
}

pub fn fig_s4(out_root: &Path, shots: Option<usize>) -> Result<FigS4> {
    let cfg = load_bundled("figS4", shots)?;
    let dir = fig_dir(out_root, "figS4")?;
    let header = provenance_header(&cfg.hash(), cfg.base_seed);
    let cycle_grid: Vec<u32> = vec![5, 10, 15, 20, 25, 30, 40, 50, 60];
    let variants: Vec<(String, Strategy, f64)> = vec![
        ("no_reset".into(), Strategy::NoReset, 0.0),
        ("mlr".into(), Strategy::Mlr, 0.0),
        ("dqlr".into(), Strategy::Dqlr, 0.0),
        ("mlr_inject_1pct".into(), Strategy::Mlr, 0.01),
        ("dqlr_inject_1pct".into(), Strategy::Dqlr, 0.01),
    ];
    let mut csv = String::from("variant,cycles,logical,ci_low,ci_high\n");
    let mut curves = Vec::new();
    for (name, strategy, p_leak) in variants {
        let injection = InjectionSpec { p_leak, ..cfg.injection.clone() };
        let mut params = cfg.noise.clone();
        params.injection = injection.clone();
        let tables = build_channel_tables(&params)?;
        let mut curve = Vec::new();
        for &n in &cycle_grid {
            let circuit =
                build_circuit(cfg.code, cfg.distance, n, strategy, cfg.memory, &injection)?;
            let seed = seed_for(cfg.base_seed, &format!("{name}-{n}"));
            let (_, stats) = run_and_decode(&circuit, &tables, &params, cfg.shots, seed)?;
            csv.push_str(&format!(
                "{name},{n},{},{},{}\n",
                stats.p, stats.ci_low, stats.ci_high
            ));
            curve.push((n, stats));
        }
        curves.push((name, curve));
    }
    write_csv(&dir, "logical_vs_cycles.csv", &header, &csv)?;
    // Saturation-model guides for the growing curves.
    let mut fits = String::new();
    for (name, curve) in &curves {
        let pts: Vec<(f64, f64)> = curve
            .iter()
            .filter(|(_, s)| s.errors > 0)
            .map(|(n, s)| (*n as f64, s.p))
            .collect();
        if pts.len() >= 5 {
            if let Ok(fit) = fit_gompertz(&pts) {
                fits.push_str(&format!("{name} {:?} r2 {}\n", fit.model, fit.r_squared));
            }
        }
    }
    std::fs::write(dir.join("gompertz.txt"), format!("{header}{fits}"))?;
    Ok(FigS4 { curves })
}

/// Linear error-budget fit over the removal sweep (reads fig5c output).
pub fn fig_s6(out_root: &Path) -> Result<FitResult> {
    let src = out_root.join("figures/fig5c/lambda_dqlr.csv");
    let text = std::fs::read_to_string(&src).map_err(|_| {
        Error::InvalidParam(format!(
            "{} not found; run the fig5c bundle first",
            src.display()
        ))
    })?;
    let mut points = Vec::new();
    for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() >= 5 {
            let p: f64 = cells[0].parse().map_err(|_| Error::Parse("bad csv".into()))?;
            let inv: f64 = cells[4].parse().map_err(|_| Error::Parse("bad csv".into()))?;
            points.push((p, inv));
        }
    }
    let fit = fit_linear(&points)?;
    let dir = fig_dir(out_root, "figS6")?;
    std::fs::write(
        dir.join("linear_fit.txt"),
        format!("model {:?}\nr_squared {}\n", fit.model, fit.r_squared),
    )?;
    Ok(fit)
}

/// Run a figure bundle by id.
pub fn run_figure(id: &str, out_root: &Path, shots: Option<usize>) -> Result<String> {
    match id {
        "fig1c" => {
            let r = fig1c(out_root, shots)?;
            Ok(format!(
                "fig1c: tau {:.2} cycles, spread {} qubits, removal residual {:.2e}",
                r.tau_cycles, r.spread_qubits, r.dqlr_max_excess_after_2
            ))
        }
        "fig3a" => {
            let r = fig3a(out_root, shots)?;
            let last = |s: Strategy| {
                r.series
                    .iter()
                    .find(|(x, _)| *x == s)
                    .map(|(_, p)| *p.data_avg.last().unwrap())
                    .unwrap_or(f64::NAN)
            };
            Ok(format!(
                "fig3a: final data leakage no_reset {:.4}, mlr {:.4}, dqlr {:.4}",
                last(Strategy::NoReset),
                last(Strategy::Mlr),
                last(Strategy::Dqlr)
            ))
        }
        "fig3c" => {
            fig3c(out_root, shots)?;
            Ok("fig3c: per-moment population series written".into())
        }
        "fig4a" => {
            let r = fig4a(out_root, shots)?;
            let at = |c: &Curve, p: f64| {
                c.iter()
                    .find(|(x, _)| (*x - p).abs() < 1e-12)
                    .map(|(_, s)| s.p)
                    .unwrap_or(f64::NAN)
            };
            Ok(format!(
                "fig4a at 1% leak: no_reset {:.3}, mlr {:.3}, dqlr {:.3}",
                at(r.leak_curve(Strategy::NoReset), 0.01),
                at(r.leak_curve(Strategy::Mlr), 0.01),
                at(r.leak_curve(Strategy::Dqlr), 0.01)
            ))
        }
        "fig5a" => {
            let r = fig5a(out_root, shots)?;
            let mean = |s: Strategy| {
                let v = r.w4_series(s);
                v.iter().map(|&(_, x)| x).sum::<f64>() / v.len() as f64
            };
            Ok(format!(
                "fig5a mean weight-4 detection: no_reset {:.3}, mlr {:.3}, dqlr {:.3}",
                mean(Strategy::NoReset),
                mean(Strategy::Mlr),
                mean(Strategy::Dqlr)
            ))
        }
        "fig5b" => {
            fig5b(out_root, shots)?;
            Ok("fig5b: logical-error sweep written".into())
        }
        "fig5c" => {
            let r = fig5c(out_root, shots)?;
            let l0 = &r.sweep(Strategy::Dqlr).points[0].1;
            Ok(format!(
                "fig5c: lambda at zero injection {:.2}, dqlr linear fit {:?} (r2 {:.3})",
                l0.lambda, r.dqlr_linear.model, r.dqlr_linear.r_squared
            ))
        }
        "figS4" => {
            fig_s4(out_root, shots)?;
            Ok("figS4: logical error vs cycles written".into())
        }
        "figS5" => {
            fig_s5(out_root, shots)?;
            Ok("figS5: detection series written".into())
        }
        "figS6" => {
            let fit = fig_s6(out_root)?;
            Ok(format!("figS6: {:?} r2 {:.3}", fit.model, fit.r_squared))
        }
        "correlations" => {
            correlation_study(out_root, shots)?;
            Ok("correlations: pairwise-correlation profiles written".into())
        }
        other => Err(Error::InvalidParam(format!("unknown figure id `{other}`"))),
    }
}
