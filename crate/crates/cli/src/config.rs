//! Experiment configuration files.
//!
//! Flat key-value text with sections:
//!
//! ```text
//! [experiment]
//! code = "surface"            # surface | repetition
//! distance = 3
//! cycles = 30
//! strategy = "dqlr"           # no_reset | mlr | dqlr
//! memory = "z"                # x | z (surface code only)
//! shots = 50000
//! base_seed = 7
//! output = "my_run"           # subdirectory under the output root
//!
//! [injection]                 # optional; defaults to none
//! p_leak = 0.0                # injected leakage population per layer
//! p_pauli = 0.0               # injected Pauli population per layer
//! targets = "all"             # all | data | measure | [qubit ids]
//! # only_cycle = 0            # restrict injection to one cycle
//!
//! [sweep]                     # optional
//! leak = [0.0, 0.005, 0.01]   # one run per value
//! # pauli = [...]
//! # lambda_distances = [5, 7] # `sweep` command: ratio between two codes
//! # strategies = ["mlr", "dqlr"]
//!
//! [probe]                     # optional: population probes instead of
//! mode = "end_of_cycle"       # detector records; end_of_cycle | per_moment
//! # cycles = [25, 30]         # probed cycle range, inclusive
//!
//! [noise]
//! file = "builtin:table_s1"   # base parameter set; remaining keys override
//! p_intrinsic_leak_per_cycle = 5e-3
//! ```
//!
//! All times carry units in their key names (`t1_us`, `t_cz_ns`). The
//! resolved configuration hashes into every output file.

use lqec_core::circuits::{CodeFamily, MemoryBasis, Strategy};
use lqec_core::noise::{InjectionSpec, NoiseParams};
use lqec_core::{Error, Result};
use std::path::Path;

pub const BUILTIN_TABLE_S1: &str = include_str!("../../../configs/table_s1.cfg");
pub const BUILTIN_HARDWARE: &str = include_str!("../../../configs/hardware.cfg");

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ProbeMode {
    EndOfCycle,
    PerMoment,
}

#[derive(Clone, Debug)]
pub struct ProbeSpec {
    pub mode: ProbeMode,
    /// Probed cycles, inclusive.
    pub first_cycle: u32,
    pub last_cycle: u32,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub code: CodeFamily,
    pub distance: u32,
    pub cycles: u32,
    pub strategy: Strategy,
    pub memory: MemoryBasis,
    pub shots: usize,
    pub base_seed: u64,
    pub output: String,
    pub injection: InjectionSpec,
    pub sweep_leak: Vec<f64>,
    pub sweep_pauli: Vec<f64>,
    pub lambda_distances: Option<(u32, u32)>,
    pub strategies: Vec<Strategy>,
    pub probe: Option<ProbeSpec>,
    pub noise: NoiseParams,
    canonical: String,
}

fn str_of<'a>(v: &'a toml::Value, what: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Parse(format!("{what} must be a string")))
}

fn merge(base: &mut toml::value::Table, over: toml::value::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Resolve a `[noise]` table: optional `file` base plus inline overrides.
fn resolve_noise(
    section: Option<toml::Value>,
    base_dir: Option<&Path>,
) -> Result<NoiseParams> {
    let mut table = match section {
        None => toml::value::Table::new(),
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(Error::Parse("[noise] must be a table".into())),
    };
    let base = match table.remove("file") {
        None => NoiseParams::table_s1(),
        Some(f) => {
            let name = f
                .as_str()
                .ok_or_else(|| Error::Parse("noise.file must be a string".into()))?
                .to_string();
            let text = match name.as_str() {
                "builtin:table_s1" => BUILTIN_TABLE_S1.to_string(),
                "builtin:hardware" => BUILTIN_HARDWARE.to_string(),
                path => {
                    let p = match base_dir {
                        Some(d) => d.join(path),
                        None => path.into(),
                    };
                    std::fs::read_to_string(&p).map_err(|e| {
                        Error::Parse(format!("noise file {}: {e}", p.display()))
                    })?
                }
            };
            NoiseParams::from_config_str(&text)?
        }
    };
    let mut value = toml::Value::try_from(&base)
        .map_err(|e| Error::Parse(format!("noise serialize: {e}")))?;
    merge(value.as_table_mut().expect("noise is a table"), table);
    let params: NoiseParams = value
        .try_into()
        .map_err(|e| Error::Parse(format!("noise overrides: {e}")))?;
    params.validate()?;
    Ok(params)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let root: toml::Value =
            toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        let exp = root
            .get("experiment")
            .ok_or_else(|| Error::Parse("missing [experiment] section".into()))?;
        let get = |key: &str| -> Result<&toml::Value> {
            exp.get(key)
                .ok_or_else(|| Error::Parse(format!("missing experiment.{key}")))
        };
        let code = match str_of(get("code")?, "experiment.code")? {
            "surface" => CodeFamily::Surface,
            "repetition" => CodeFamily::Repetition,
            o => return Err(Error::Parse(format!("unknown code family `{o}`"))),
        };
        let strategy = parse_strategy(str_of(get("strategy")?, "experiment.strategy")?)?;
        let memory = match exp.get("memory").map(|v| str_of(v, "experiment.memory")) {
            None => MemoryBasis::Z,
            Some(v) => match v? {
                "x" => MemoryBasis::X,
                "z" => MemoryBasis::Z,
                o => return Err(Error::Parse(format!("unknown memory basis `{o}`"))),
            },
        };
        let int = |key: &str| -> Result<i64> {
            get(key)?
                .as_integer()
                .ok_or_else(|| Error::Parse(format!("experiment.{key} must be an integer")))
        };
        let shots = int("shots")?;
        if shots < 1 {
            return Err(Error::InvalidParam("shots must be >= 1".into()));
        }
        let injection: InjectionSpec = match root.get("injection") {
            None => InjectionSpec::default(),
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|e| Error::Parse(format!("[injection]: {e}")))?,
        };
        let mut sweep_leak = Vec::new();
        let mut sweep_pauli = Vec::new();
        let mut lambda_distances = None;
        let mut strategies = vec![strategy];
        if let Some(sweep) = root.get("sweep") {
            let floats = |key: &str| -> Result<Vec<f64>> {
                match sweep.get(key) {
                    None => Ok(vec![]),
                    Some(v) => v
                        .as_array()
                        .ok_or_else(|| Error::Parse(format!("sweep.{key} must be an array")))?
                        .iter()
                        .map(|x| {
                            x.as_float()
                                .or_else(|| x.as_integer().map(|i| i as f64))
                                .ok_or_else(|| Error::Parse(format!("sweep.{key}: bad number")))
                        })
                        .collect(),
                }
            };
            sweep_leak = floats("leak")?;
            sweep_pauli = floats("pauli")?;
            if let Some(v) = sweep.get("lambda_distances") {
                let arr = v
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::Parse("sweep.lambda_distances needs two entries".into()))?;
                let d = |i: usize| arr[i].as_integer().map(|x| x as u32);
                lambda_distances = Some((
                    d(0).ok_or_else(|| Error::Parse("bad distance".into()))?,
                    d(1).ok_or_else(|| Error::Parse("bad distance".into()))?,
                ));
            }
            if let Some(v) = sweep.get("strategies") {
                strategies = v
                    .as_array()
                    .ok_or_else(|| Error::Parse("sweep.strategies must be an array".into()))?
                    .iter()
                    .map(|s| parse_strategy(s.as_str().unwrap_or("")))
                    .collect::<Result<_>>()?;
            }
        }
        let probe = match root.get("probe") {
            None => None,
            Some(p) => {
                let mode = match p.get("mode").map(|v| str_of(v, "probe.mode")) {
                    Some(Ok("end_of_cycle")) => ProbeMode::EndOfCycle,
                    Some(Ok("per_moment")) => ProbeMode::PerMoment,
                    Some(Ok(o)) => return Err(Error::Parse(format!("unknown probe mode `{o}`"))),
                    _ => return Err(Error::Parse("probe.mode missing".into())),
                };
                let cycles = int("cycles")? as u32;
                let (first, last) = match p.get("cycles") {
                    None => (0, cycles - 1),
                    Some(v) => {
                        let arr = v
                            .as_array()
                            .filter(|a| a.len() == 2)
                            .ok_or_else(|| Error::Parse("probe.cycles needs two entries".into()))?;
                        (
                            arr[0].as_integer().unwrap_or(0) as u32,
                            arr[1].as_integer().unwrap_or(0) as u32,
                        )
                    }
                };
                Some(ProbeSpec { mode, first_cycle: first, last_cycle: last })
            }
        };
        let mut noise = resolve_noise(root.get("noise").cloned(), base_dir)?;
        noise.injection = injection.clone();

        let config = ExperimentConfig {
            code,
            distance: int("distance")? as u32,
            cycles: int("cycles")? as u32,
            strategy,
            memory,
            shots: shots as usize,
            base_seed: int("base_seed")? as u64,
            output: str_of(get("output")?, "experiment.output")?.to_string(),
            injection,
            sweep_leak,
            sweep_pauli,
            lambda_distances,
            strategies,
            probe,
            noise,
            canonical: String::new(),
        };
        let canonical = config.canonical_text(text);
        Ok(ExperimentConfig { canonical, ..config })
    }

    fn canonical_text(&self, raw: &str) -> String {
        // Raw text plus the fully resolved noise block, so configs with the
        // same semantics hash identically regardless of file references.
        format!("{raw}\n# resolved-noise\n{}", self.noise.to_config_string())
    }

    /// Hash recorded in every output of a run.
    pub fn hash(&self) -> String {
        lqec_core::sim::hex_digest(self.canonical.as_bytes())
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    match s {
        "no_reset" => Ok(Strategy::NoReset),
        "mlr" => Ok(Strategy::Mlr),
        "dqlr" => Ok(Strategy::Dqlr),
        o => Err(Error::Parse(format!("unknown strategy `{o}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[experiment]
code = "surface"
distance = 3
cycles = 30
strategy = "dqlr"
shots = 1000
base_seed = 7
output = "demo"

[injection]
p_leak = 0.01

[sweep]
leak = [0.0, 0.01]

[noise]
p_intrinsic_leak_per_cycle = 5e-3
t1_us = 20.0
t2_us = 20.0
"#;

    #[test]
    fn parses_and_hashes() {
        let c = ExperimentConfig::parse(SAMPLE, None).unwrap();
        assert_eq!(c.distance, 3);
        assert_eq!(c.noise.p_intrinsic_leak_per_cycle, 5e-3);
        assert_eq!(c.noise.t1_us, 20.0);
        // Untouched keys keep their defaults.
        assert_eq!(c.noise.cz_pauli, 1e-3);
        assert_eq!(c.noise.injection.p_leak, 0.01);
        assert_eq!(c.sweep_leak, vec![0.0, 0.01]);
        let c2 = ExperimentConfig::parse(SAMPLE, None).unwrap();
        assert_eq!(c.hash(), c2.hash());
        let c3 = ExperimentConfig::parse(&SAMPLE.replace("base_seed = 7", "base_seed = 8"), None)
            .unwrap();
        assert_ne!(c.hash(), c3.hash());
    }

    #[test]
    fn rejects_zero_shots_and_bad_values() {
        assert!(ExperimentConfig::parse(&SAMPLE.replace("shots = 1000", "shots = 0"), None).is_err());
        assert!(
            ExperimentConfig::parse(&SAMPLE.replace("\"dqlr\"", "\"magic\""), None).is_err()
        );
        assert!(ExperimentConfig::parse("not toml [", None).is_err());
    }

    #[test]
    fn builtin_noise_files_parse() {
        let t = NoiseParams::from_config_str(BUILTIN_TABLE_S1).unwrap();
        assert_eq!(t, NoiseParams::table_s1());
        let h = NoiseParams::from_config_str(BUILTIN_HARDWARE).unwrap();
        assert!(h.p_intrinsic_leak_per_cycle > 0.0);
    }
}
