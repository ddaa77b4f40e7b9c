//! Filesystem-facing command implementations.
//!
//! A run writes one directory per sweep point containing the circuit text,
//! the resolved noise parameters, the packed records, and a summary; every
//! text output embeds the config hash, code version, and base seed, and
//! `analyze` refuses records whose hashes do not match their inputs.

use crate::config::{ExperimentConfig, ProbeMode};
use lqec_core::analysis::{
    autocorrelation_avg, correlation_sd_bootstrap, detection_probability_series, estimate_pij,
    fit_gompertz, fit_linear, fit_power_law, nn_correlation_avg, stab_neighbor_pairs,
};
use lqec_core::circuits::{
    build_repetition_code, build_surface_code_with, define_detectors, Circuit, CodeFamily,
    Strategy,
};
use lqec_core::decode::{build_graph, extract_detection_events, logical_error_probability, LogicalStats};
use lqec_core::noise::{build_channel_tables, ChannelTables, InjectionSpec, NoiseParams};
use lqec_core::sim::{population_series, run_batch, PopulationSeries, ProbePoint, RecordSet};
use lqec_core::{cz_ladder, Error, Result};
use std::path::{Path, PathBuf};

pub fn build_circuit(
    code: CodeFamily,
    distance: u32,
    cycles: u32,
    strategy: Strategy,
    memory: lqec_core::circuits::MemoryBasis,
    injection: &InjectionSpec,
) -> Result<Circuit> {
    match code {
        CodeFamily::Repetition => build_repetition_code(distance, cycles, strategy, injection),
        CodeFamily::Surface => {
            build_surface_code_with(distance, cycles, strategy, injection, memory)
        }
    }
}

/// Provenance header prepended to every CSV/text output.
pub fn provenance_header(config_hash: &str, base_seed: u64) -> String {
    format!(
        "# config_hash {config_hash}\n# code_version {}\n# base_seed {base_seed}\n",
        lqec_core::VERSION
    )
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// One sweep point's persisted artifacts and headline numbers.
#[derive(Clone, Debug)]
pub struct PointSummary {
    pub label: String,
    pub dir: PathBuf,
    pub p_leak: f64,
    pub p_pauli: f64,
    pub logical: Option<LogicalStats>,
    pub mean_detection_w2: Option<f64>,
    pub mean_detection_w4: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub config_hash: String,
    pub points: Vec<PointSummary>,
}

fn injection_points(config: &ExperimentConfig) -> Vec<(String, InjectionSpec)> {
    let mut points = Vec::new();
    if config.sweep_leak.is_empty() && config.sweep_pauli.is_empty() {
        points.push(("single".to_string(), config.injection.clone()));
    }
    for &p in &config.sweep_leak {
        let spec = InjectionSpec { p_leak: p, p_pauli: 0.0, ..config.injection.clone() };
        points.push((format!("leak_{p}"), spec));
    }
    for &p in &config.sweep_pauli {
        let spec = InjectionSpec { p_leak: 0.0, p_pauli: p, ..config.injection.clone() };
        points.push((format!("pauli_{p}"), spec));
    }
    points
}

/// Persist one executed point: circuit text, noise, records, summary.
#[allow(clippy::too_many_arguments)]
pub fn save_point(
    dir: &Path,
    config_hash: &str,
    circuit: &Circuit,
    params: &NoiseParams,
    records: &RecordSet,
    logical: Option<&LogicalStats>,
    detection: Option<(f64, f64)>,
    populations: Option<&PopulationSeries>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_text(&dir.join("circuit.txt"), &circuit.to_text())?;
    write_text(&dir.join("noise.cfg"), &params.to_config_string())?;
    records.save(&dir.join("records"))?;
    // The records meta format ignores unknown keys; append provenance.
    let meta = dir.join("records.meta");
    let mut text = std::fs::read_to_string(&meta)?;
    text.push_str(&format!("config_hash {config_hash}\n"));
    std::fs::write(&meta, text)?;
    let mut summary = String::from("lqec-run-summary v1\n");
    summary.push_str(&provenance_header(config_hash, records.base_seed));
    summary.push_str(&format!("circuit_hash {}\n", records.circuit_hash));
    summary.push_str(&format!("params_hash {}\n", records.params_hash));
    summary.push_str(&format!("shots {}\n", records.n_shots));
    summary.push_str(&format!("p_leak {}\n", circuit.injection.p_leak));
    summary.push_str(&format!("p_pauli {}\n", circuit.injection.p_pauli));
    if let Some((w2, w4)) = detection {
        summary.push_str(&format!("detection_mean_w2 {w2}\n"));
        summary.push_str(&format!("detection_mean_w4 {w4}\n"));
    }
    if let Some(stats) = logical {
        summary.push_str(&format!(
            "logical_error {} ci {} {} errors {} shots {}\n",
            stats.p, stats.ci_low, stats.ci_high, stats.errors, stats.shots
        ));
    }
    if let Some(pop) = populations {
        let last = pop.data_avg.len() - 1;
        summary.push_str(&format!(
            "final_population_data {} measure {}\n",
            pop.data_avg[last], pop.measure_avg[last]
        ));
    }
    write_text(&dir.join("summary.txt"), &summary)?;
    Ok(())
}

fn probe_points(config: &ExperimentConfig, circuit: &Circuit) -> Vec<ProbePoint> {
    let spec = config.probe.as_ref().expect("probe config");
    let per_cycle = circuit.cycle_moments(0).len() as u32;
    let mut points = Vec::new();
    for cycle in spec.first_cycle..=spec.last_cycle.min(config.cycles - 1) {
        match spec.mode {
            ProbeMode::EndOfCycle => points.push(ProbePoint { cycle, moment: per_cycle - 1 }),
            ProbeMode::PerMoment => {
                for moment in 0..per_cycle {
                    points.push(ProbePoint { cycle, moment });
                }
            }
        }
    }
    points
}

/// Build circuits, run batches, persist records and summaries.
pub fn cmd_run(config: &ExperimentConfig, out_root: &Path) -> Result<RunSummary> {
    let config_hash = config.hash();
    let run_dir = out_root.join(&config.output);
    let tables = build_channel_tables(&config.noise)?;
    let mut points = Vec::new();
    for (label, injection) in injection_points(config) {
        let mut params = config.noise.clone();
        params.injection = injection.clone();
        let tables = if injection == config.noise.injection {
            tables.clone()
        } else {
            build_channel_tables(&params)?
        };
        let circuit = build_circuit(
            config.code,
            config.distance,
            config.cycles,
            config.strategy,
            config.memory,
            &injection,
        )?;
        let dir = run_dir.join(&label);
        if config.probe.is_some() {
            let probes = probe_points(config, &circuit);
            let series =
                population_series(&circuit, &tables, config.shots, &probes, config.base_seed)?;
            std::fs::create_dir_all(&dir)?;
            write_text(&dir.join("circuit.txt"), &circuit.to_text())?;
            write_text(&dir.join("noise.cfg"), &params.to_config_string())?;
            let mut csv = provenance_header(&config_hash, config.base_seed);
            csv.push_str(&series.to_csv());
            write_text(&dir.join("populations.csv"), &csv)?;
            points.push(PointSummary {
                label,
                dir,
                p_leak: injection.p_leak,
                p_pauli: injection.p_pauli,
                logical: None,
                mean_detection_w2: None,
                mean_detection_w4: None,
            });
            continue;
        }
        let records = run_batch(&circuit, &tables, config.shots, config.base_seed)?;
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors)?;
        let series = detection_probability_series(&events, &detectors)?;
        let mean_of = |rows: &[(u32, f64)]| {
            if rows.is_empty() {
                None
            } else {
                Some(rows.iter().map(|&(_, r)| r).sum::<f64>() / rows.len() as f64)
            }
        };
        let graph = build_graph(&circuit, &params, &detectors)?;
        let logical = logical_error_probability(&records, &detectors, &graph, &circuit)?;
        save_point(
            &dir,
            &config_hash,
            &circuit,
            &params,
            &records,
            Some(&logical),
            Some((
                mean_of(&series.w2_avg).unwrap_or(0.0),
                mean_of(&series.w4_avg).unwrap_or(0.0),
            )),
            None,
        )?;
        points.push(PointSummary {
            label,
            dir,
            p_leak: injection.p_leak,
            p_pauli: injection.p_pauli,
            logical: Some(logical),
            mean_detection_w2: mean_of(&series.w2_avg),
            mean_detection_w4: mean_of(&series.w4_avg),
        });
    }
    Ok(RunSummary { dir: run_dir, config_hash, points })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AnalyzeOp {
    Detection,
    Pij,
    Correlations,
    Logical,
    Events,
}

impl AnalyzeOp {
    pub fn parse_list(s: &str) -> Result<Vec<AnalyzeOp>> {
        s.split(',')
            .map(|op| match op.trim() {
                "detection" => Ok(AnalyzeOp::Detection),
                "pij" => Ok(AnalyzeOp::Pij),
                "correlations" => Ok(AnalyzeOp::Correlations),
                "logical" => Ok(AnalyzeOp::Logical),
                "events" => Ok(AnalyzeOp::Events),
                o => Err(Error::InvalidParam(format!("unknown analyze op `{o}`"))),
            })
            .collect()
    }
}

/// Load a point directory, verifying provenance.
pub fn load_point(dir: &Path) -> Result<(Circuit, NoiseParams, RecordSet)> {
    let circuit = Circuit::from_text(&std::fs::read_to_string(dir.join("circuit.txt"))?)?;
    let params = NoiseParams::load(&dir.join("noise.cfg"))?;
    let records = RecordSet::load(&dir.join("records"))?;
    if records.circuit_hash != circuit.hash() {
        return Err(Error::Provenance(format!(
            "{}: records do not match circuit.txt",
            dir.display()
        )));
    }
    if records.params_hash != params.hash() {
        return Err(Error::Provenance(format!(
            "{}: records do not match noise.cfg",
            dir.display()
        )));
    }
    Ok((circuit, params, records))
}

/// Run analysis ops over executed point directories.
pub fn cmd_analyze(dirs: &[PathBuf], ops: &[AnalyzeOp]) -> Result<()> {
    for dir in dirs {
        let (circuit, params, records) = load_point(dir)?;
        let detectors = define_detectors(&circuit);
        let events = extract_detection_events(&records, &detectors)?;
        let header = {
            // Propagate the recorded config hash when present.
            let meta = std::fs::read_to_string(dir.join("records.meta"))?;
            let hash = meta
                .lines()
                .find_map(|l| l.strip_prefix("config_hash "))
                .unwrap_or("unknown")
                .to_string();
            provenance_header(&hash, records.base_seed)
        };
        for op in ops {
            match op {
                AnalyzeOp::Detection => {
                    let series = detection_probability_series(&events, &detectors)?;
                    write_text(&dir.join("detection.csv"), &(header.clone() + &series.to_csv()))?;
                }
                AnalyzeOp::Pij => {
                    let pij = estimate_pij(&events, &detectors)?;
                    write_text(&dir.join("pij.csv"), &(header.clone() + &pij.to_csv()))?;
                }
                AnalyzeOp::Correlations => {
                    let pij = estimate_pij(&events, &detectors)?;
                    let auto = autocorrelation_avg(&pij);
                    write_text(&dir.join("autocorr.csv"), &(header.clone() + &auto.to_csv()))?;
                    let pairs = stab_neighbor_pairs(&circuit);
                    let nn = nn_correlation_avg(&pij, &pairs);
                    write_text(&dir.join("nn_corr.csv"), &(header.clone() + &nn.to_csv()))?;
                    let sd = correlation_sd_bootstrap(
                        &events, &detectors, true, &pairs, 50, 200, records.base_seed,
                    )?;
                    write_text(&dir.join("autocorr_sd.csv"), &(header.clone() + &sd.to_csv()))?;
                }
                AnalyzeOp::Logical => {
                    let graph = build_graph(&circuit, &params, &detectors)?;
                    let stats = logical_error_probability(&records, &detectors, &graph, &circuit)?;
                    let text = format!(
                        "{header}logical_error {} ci {} {} errors {} shots {}\n",
                        stats.p, stats.ci_low, stats.ci_high, stats.errors, stats.shots
                    );
                    write_text(&dir.join("logical.txt"), &text)?;
                    write_text(&dir.join("graph.csv"), &(header.clone() + &graph.to_csv()))?;
                }
                AnalyzeOp::Events => {
                    if records.n_shots * detectors.len() > 20_000_000 {
                        return Err(Error::InvalidParam(
                            "event CSV export is limited to small sets".into(),
                        ));
                    }
                    write_text(&dir.join("events.csv"), &(header.clone() + &events.to_csv()))?;
                }
            }
        }
    }
    Ok(())
}

/// Transport matrix and phase report for the two-transmon gate model.
pub fn cmd_ladder(
    calibrate: Option<f64>,
    g: Option<f64>,
    eta: Option<f64>,
    t_hold: f64,
    levels: usize,
    relative: bool,
    out: Option<&Path>,
) -> Result<String> {
    let params = match (calibrate, g, eta) {
        (Some(target), None, None) => cz_ladder::calibrate_to_transport(target, t_hold, levels)?,
        (None, Some(g), Some(eta)) => cz_ladder::LadderParams::new(g, eta, t_hold, levels)?,
        _ => {
            return Err(Error::InvalidParam(
                "pass either --calibrate or both --g and --eta".into(),
            ))
        }
    };
    let matrix = cz_ladder::transport_matrix(&params, relative)?;
    let phases = cz_ladder::leak_phase(&params)?;
    let mut report = String::new();
    report.push_str(&format!(
        "g_rad_per_ns {}\neta_rad_per_ns {}\nt_hold_ns {}\ng_over_eta {}\n",
        params.g,
        params.eta,
        params.t_hold,
        params.g / params.eta
    ));
    let g_eff = cz_ladder::effective_coupling(params.g, params.eta)?;
    report.push_str(&format!(
        "transport_30_12_closed_form {}\n",
        cz_ladder::transport_probability(g_eff, params.t_hold)
    ));
    for (name, v) in matrix.resonance_summary() {
        report.push_str(&format!("mean_abs_transport_{name} {v}\n"));
    }
    report.push_str(&format!(
        "phase_h0 {}\nphase_h1 {}\nphase_h2 {}\n",
        phases[0], phases[1], phases[2]
    ));
    if let Some(path) = out {
        write_text(path, &matrix.to_csv())?;
    }
    Ok(report)
}

/// Fit a named model to `x,y` CSV data.
pub fn cmd_fit(model: &str, data: &Path, out: Option<&Path>) -> Result<String> {
    let text = std::fs::read_to_string(data)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
            continue;
        }
        let (x, y) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `x,y`", i + 1)))?;
        points.push((
            x.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad x", i + 1)))?,
            y.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad y", i + 1)))?,
        ));
    }
    let fit = match model {
        "power" => fit_power_law(&points)?,
        "gompertz" => fit_gompertz(&points)?,
        "linear" => fit_linear(&points)?,
        o => return Err(Error::InvalidParam(format!("unknown fit model `{o}`"))),
    };
    let mut report = format!("model {:?}\n", fit.model);
    report.push_str(&format!(
        "r_squared {}\nresidual_norm {}\ndegenerate {}\nconverged {}\n",
        fit.r_squared, fit.residual_norm, fit.degenerate, fit.converged
    ));
    if let Some(path) = out {
        write_text(path, &report)?;
    }
    Ok(report)
}

/// Shared runner: build, execute, decode one circuit.
pub fn run_and_decode(
    circuit: &Circuit,
    tables: &ChannelTables,
    params: &NoiseParams,
    shots: usize,
    seed: u64,
) -> Result<(RecordSet, LogicalStats)> {
    let records = run_batch(circuit, tables, shots, seed)?;
    let detectors = define_detectors(circuit);
    let graph = build_graph(circuit, params, &detectors)?;
    let stats = logical_error_probability(&records, &detectors, &graph, circuit)?;
    Ok((records, stats))
}
