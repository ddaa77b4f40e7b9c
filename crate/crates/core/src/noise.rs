//! Stochastic error model: physical parameters, closed-form injection and
//! twirl formulas, and the per-gate sampling tables consumed by the
//! trajectory engine.
//!
//! Probabilities inside tables are held both as `f64` (for inspection and
//! statistical tests) and as 64-bit fixed-point cumulative thresholds (the
//! only form touched while sampling). Tables are pure functions of
//! [`NoiseParams`]; changing parameters means rebuilding tables.

use crate::rng::{threshold, CounterRng};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Single-qubit Pauli error.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// (x, z) symplectic components.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }
}

/// One sampled outcome of a gate-level error channel.
///
/// Transport effects name the two-qubit level transitions of the diabatic CZ
/// in |HL> ordering: `Transport12To30` moves leakage from the lower qubit
/// into |3> of the higher qubit, `Transport31To22` spreads leakage from a
/// |3> higher qubit onto the lower qubit, and the primed variants are the
/// reverse rotations.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Identity,
    /// Pauli on the gate target.
    Pauli1(Pauli),
    /// Paulis on a CZ pair (at least one non-identity).
    Pauli2(Option<Pauli>, Option<Pauli>),
    /// Pauli on the computational partner of a gate with a leaked input.
    PartnerPauli(Pauli),
    /// Computational qubit leaks to |2>.
    LeakToL2,
    /// (H=C1, L=L2) -> (H=L3, L=C0).
    Transport12To30,
    /// (H=L3, L=C0) -> (H=C1, L=L2).
    Transport30To12,
    /// (H=L3, L=C1) -> (H=L2, L=L2).
    Transport31To22,
    /// (H=L2, L=L2) -> (H=L3, L=C1).
    Transport22To31,
    /// Measurement assignment error.
    FlipOutcome,
    /// Reset leaves the qubit in |1>.
    ResidualOne,
    /// Reset leaves the qubit in |2>.
    ResidualLeak,
}

/// Categorical error channel with fixed-point sampling thresholds.
#[derive(Clone, Debug)]
pub struct EffectTable {
    label: &'static str,
    entries: Vec<(Effect, f64)>,
    cum: Vec<u64>,
}

impl EffectTable {
    /// Build from non-identity entries; the identity remainder is added
    /// automatically. Probabilities must sum to at most 1 within 1e-12.
    fn new(label: &'static str, mut entries: Vec<(Effect, f64)>) -> Result<Self> {
        entries.retain(|&(_, p)| p != 0.0);
        let total: f64 = entries.iter().map(|&(_, p)| p).sum();
        if !(0.0..=1.0 + 1e-12).contains(&total) {
            return Err(Error::InvalidParam(format!(
                "channel table `{label}` probabilities sum to {total}"
            )));
        }
        for &(e, p) in &entries {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!(
                    "channel table `{label}` entry {e:?} has probability {p}"
                )));
            }
        }
        entries.push((Effect::Identity, (1.0 - total).max(0.0)));
        let mut cum = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for &(_, p) in &entries {
            acc += p;
            cum.push(threshold(acc));
        }
        *cum.last_mut().expect("non-empty") = u64::MAX;
        Ok(EffectTable { label, entries, cum })
    }

    pub fn label(&self) -> &'static str {
        self.label
    }

    /// Entries including the trailing identity remainder; probabilities sum
    /// to 1 within 1e-12.
    pub fn entries(&self) -> &[(Effect, f64)] {
        &self.entries
    }

    #[inline]
    pub fn sample(&self, rng: &mut CounterRng) -> Effect {
        self.entries[rng.pick(&self.cum)].0
    }
}

/// Idle channel for one moment-duration class.
#[derive(Clone, Debug)]
pub struct IdleClass {
    /// Pauli channel applied to idling computational qubits.
    pub pauli: EffectTable,
    /// Fixed-point threshold for one |2> relaxation step over the duration.
    pub relax_l2: u64,
    /// Same for |3> -> |2>.
    pub relax_l3: u64,
    pub relax_l2_p: f64,
    pub relax_l3_p: f64,
}

/// Which qubits an injection layer touches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetMask {
    Role(RoleMask),
    Qubits(Vec<u32>),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleMask {
    All,
    Data,
    Measure,
}

impl Default for TargetMask {
    fn default() -> Self {
        TargetMask::Role(RoleMask::All)
    }
}

/// Per-cycle error injection settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InjectionSpec {
    /// Injected leakage population per layer.
    pub p_leak: f64,
    /// Injected Pauli population per layer.
    pub p_pauli: f64,
    pub targets: TargetMask,
    /// `None` injects every cycle; `Some(c)` only in cycle `c`.
    pub only_cycle: Option<u32>,
}

impl Default for InjectionSpec {
    fn default() -> Self {
        InjectionSpec {
            p_leak: 0.0,
            p_pauli: 0.0,
            targets: TargetMask::default(),
            only_cycle: None,
        }
    }
}

impl InjectionSpec {
    pub fn is_zero(&self) -> bool {
        self.p_leak == 0.0 && self.p_pauli == 0.0
    }

    pub fn active_in_cycle(&self, cycle: u32) -> bool {
        match self.only_cycle {
            None => true,
            Some(c) => c == cycle,
        }
    }
}

/// Every stochastic rate of the device model. Times carry their unit in the
/// field name; all probabilities are per gate application unless noted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub sq_pauli: f64,
    pub cz_pauli: f64,
    pub ro_reset_err: f64,
    /// Recorded idling error over the readout window; kept for reference and
    /// consistency checks, not sampled (idle errors derive from t1/t2).
    pub idle_pauli: f64,
    /// Extra depolarizing on data qubits dynamically decoupled through the
    /// readout window.
    pub dd_pauli: f64,
    pub t1_us: f64,
    pub t2_us: f64,
    pub t_sq_ns: f64,
    pub t_cz_ns: f64,
    pub t_ro_reset_ns: f64,
    /// |30> <-> |12> two-photon transport probability per CZ.
    pub p_transport_30_12: f64,
    /// |31> <-> |22> transport probability per CZ.
    pub p_transport_31_22: f64,
    /// Phase picked up by the partner of a |2> higher qubit during CZ.
    pub leak_phase_phi: f64,
    /// Leakage generated by circuit operations, per qubit per cycle.
    pub p_intrinsic_leak_per_cycle: f64,
    /// Fraction of intrinsic leakage assigned to the measurement window; the
    /// remainder is split evenly over the four CZ moments.
    pub intrinsic_leak_meas_frac: f64,
    /// Reset residual |1> population.
    pub mlr_residual_one: f64,
    /// Reset residual |2> population.
    pub mlr_residual_leak: f64,
    /// Extra Pauli rate on the data qubit per leakage-removal interaction.
    pub dqlr_extra_pauli: f64,
    /// |2> relaxation enhancement: rate = t1_leak_factor / t1.
    pub t1_leak_factor: f64,
    /// Probability a leaked qubit is assigned "1" by two-outcome readout.
    pub p_leak_readout_as_one: f64,
    pub injection: InjectionSpec,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams::table_s1()
    }
}

impl NoiseParams {
    /// Hypothetical-device rates plus this crate's leakage defaults.
    pub fn table_s1() -> Self {
        NoiseParams {
            sq_pauli: 2e-4,
            cz_pauli: 1e-3,
            ro_reset_err: 1e-2,
            idle_pauli: 3e-3,
            dd_pauli: 1e-3,
            t1_us: 75.0,
            t2_us: 75.0,
            t_sq_ns: 15.0,
            t_cz_ns: 25.0,
            t_ro_reset_ns: 300.0,
            p_transport_30_12: 0.18,
            p_transport_31_22: 0.61,
            leak_phase_phi: 0.65 * std::f64::consts::PI,
            p_intrinsic_leak_per_cycle: 0.0,
            intrinsic_leak_meas_frac: 0.5,
            mlr_residual_one: 2e-3,
            mlr_residual_leak: 1.2e-4,
            dqlr_extra_pauli: 1e-3,
            t1_leak_factor: 2.0,
            p_leak_readout_as_one: 1.0,
            injection: InjectionSpec::default(),
        }
    }

    /// All rates zero, lifetimes effectively infinite.
    pub fn noiseless() -> Self {
        NoiseParams {
            sq_pauli: 0.0,
            cz_pauli: 0.0,
            ro_reset_err: 0.0,
            idle_pauli: 0.0,
            dd_pauli: 0.0,
            t1_us: 1e12,
            t2_us: 1e12,
            p_transport_30_12: 0.0,
            p_transport_31_22: 0.0,
            leak_phase_phi: 0.0,
            p_intrinsic_leak_per_cycle: 0.0,
            mlr_residual_one: 0.0,
            mlr_residual_leak: 0.0,
            dqlr_extra_pauli: 0.0,
            ..NoiseParams::table_s1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("sq_pauli", self.sq_pauli),
            ("cz_pauli", self.cz_pauli),
            ("ro_reset_err", self.ro_reset_err),
            ("idle_pauli", self.idle_pauli),
            ("dd_pauli", self.dd_pauli),
            ("p_transport_30_12", self.p_transport_30_12),
            ("p_transport_31_22", self.p_transport_31_22),
            ("p_intrinsic_leak_per_cycle", self.p_intrinsic_leak_per_cycle),
            ("intrinsic_leak_meas_frac", self.intrinsic_leak_meas_frac),
            ("mlr_residual_one", self.mlr_residual_one),
            ("mlr_residual_leak", self.mlr_residual_leak),
            ("dqlr_extra_pauli", self.dqlr_extra_pauli),
            ("p_leak_readout_as_one", self.p_leak_readout_as_one),
            ("injection.p_pauli", self.injection.p_pauli),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(0.0..=0.5).contains(&self.injection.p_leak) {
            return Err(Error::InvalidParam(format!(
                "injection.p_leak = {} outside [0, 0.5]",
                self.injection.p_leak
            )));
        }
        let times = [
            ("t1_us", self.t1_us),
            ("t2_us", self.t2_us),
            ("t_sq_ns", self.t_sq_ns),
            ("t_cz_ns", self.t_cz_ns),
            ("t_ro_reset_ns", self.t_ro_reset_ns),
        ];
        for (name, t) in times {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {t} must be > 0")));
            }
        }
        if !(0.0..std::f64::consts::TAU).contains(&self.leak_phase_phi) {
            return Err(Error::InvalidParam(format!(
                "leak_phase_phi = {} outside [0, 2pi)",
                self.leak_phase_phi
            )));
        }
        if self.t1_leak_factor <= 0.0 {
            return Err(Error::InvalidParam("t1_leak_factor must be > 0".into()));
        }
        Ok(())
    }

    /// Parse from the flat key-value config text (one `key = value` per
    /// line, optionally under a `[noise]` section header).
    pub fn from_config_str(text: &str) -> Result<Self> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| Error::Parse(format!("noise config: {e}")))?;
        let section = match value.get("noise") {
            Some(v) => v.clone(),
            None => value,
        };
        let params: NoiseParams = section
            .try_into()
            .map_err(|e| Error::Parse(format!("noise config: {e}")))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    /// Canonical key-value serialization (also used for hashing).
    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("noise params serialize")
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_config_string())?;
        Ok(())
    }

    /// Hex digest of the canonical serialization.
    pub fn hash(&self) -> String {
        crate::sim::hex_digest(self.to_config_string().as_bytes())
    }
}

/// Rotation angle injecting leakage population `p_leak` into a qubit with
/// |1>-population one half: `2 asin(sqrt(2 p_leak))`.
pub fn theta_leak(p_leak: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p_leak) {
        return Err(Error::InvalidParam(format!(
            "leak population {p_leak} outside [0, 0.5]"
        )));
    }
    Ok(2.0 * (2.0 * p_leak).sqrt().asin())
}

/// Rotation angle flipping computational population with probability
/// `p_pauli`: `2 asin(sqrt(p_pauli))`.
pub fn theta_pauli(p_pauli: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_pauli) {
        return Err(Error::InvalidParam(format!(
            "pauli population {p_pauli} outside [0, 1]"
        )));
    }
    Ok(2.0 * p_pauli.sqrt().asin())
}

/// Z-error probability of the Pauli-twirled phase channel `sin^2(phi / 2)`.
pub fn twirl_phase_to_z(phi: f64) -> f64 {
    debug_assert!((0.0..std::f64::consts::TAU).contains(&phi));
    let s = (phi / 2.0).sin();
    s * s
}

/// Pauli-twirled relaxation and dephasing over `duration_ns`.
///
/// `p_x = p_y = (1 - exp(-d/t1)) / 4`, and
/// `p_z = (1 - exp(-d/t_phi)) / 2 - p_x` with `1/t_phi = 1/t2 - 1/(2 t1)`,
/// all clamped to [0, 1].
pub fn idle_pauli_rates(duration_ns: f64, t1_us: f64, t2_us: f64) -> (f64, f64, f64) {
    if duration_ns <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let d_us = duration_ns * 1e-3;
    let p_x = (1.0 - (-d_us / t1_us).exp()) / 4.0;
    let inv_t_phi = 1.0 / t2_us - 1.0 / (2.0 * t1_us);
    let p_z = (1.0 - (-d_us * inv_t_phi).exp()) / 2.0 - p_x;
    let clamp = |p: f64| p.clamp(0.0, 1.0);
    (clamp(p_x), clamp(p_x), clamp(p_z))
}

/// Compose two independent Pauli channels into one categorical channel.
fn compose_pauli(a: &[(Option<Pauli>, f64)], b: &[(Option<Pauli>, f64)]) -> Vec<(Option<Pauli>, f64)> {
    let mut out: [f64; 4] = [0.0; 4];
    let idx = |p: Option<Pauli>| -> usize {
        match p {
            None => 0,
            Some(Pauli::X) => 1,
            Some(Pauli::Y) => 2,
            Some(Pauli::Z) => 3,
        }
    };
    let unidx = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
    for &(pa, wa) in a {
        for &(pb, wb) in b {
            let (xa, za) = pa.map(Pauli::bits).unwrap_or((false, false));
            let (xb, zb) = pb.map(Pauli::bits).unwrap_or((false, false));
            let prod = Pauli::from_bits(xa ^ xb, za ^ zb);
            out[idx(prod)] += wa * wb;
        }
    }
    (0..4).map(|i| (unidx[i], out[i])).collect()
}

fn depolarizing(p: f64) -> Vec<(Option<Pauli>, f64)> {
    vec![
        (None, 1.0 - p),
        (Some(Pauli::X), p / 3.0),
        (Some(Pauli::Y), p / 3.0),
        (Some(Pauli::Z), p / 3.0),
    ]
}

fn partner_entries(channel: &[(Option<Pauli>, f64)]) -> Vec<(Effect, f64)> {
    channel
        .iter()
        .filter_map(|&(p, w)| p.map(|p| (Effect::PartnerPauli(p), w)))
        .collect()
}

/// Per-gate sampling tables for one [`NoiseParams`] value.
///
/// CZ tables with a leaked input are conditioned on the computational
/// partner's |1>-content where the transport requires it; the engine
/// resolves the content before choosing a table.
#[derive(Clone, Debug)]
pub struct ChannelTables {
    pub params: NoiseParams,
    /// Depolarizing channel after every single-qubit gate.
    pub sq: EffectTable,
    /// Two-qubit depolarizing channel after a CZ with both inputs
    /// computational.
    pub cz_both_computational: EffectTable,
    /// CZ with the higher qubit in |2>: twirled phase error on the partner.
    pub cz_higher_l2: EffectTable,
    /// CZ with the lower qubit in |2>, higher content |1>: |12> -> |30>.
    pub cz_lower_l2_content1: EffectTable,
    /// CZ with the lower qubit in |2>, higher content |0>.
    pub cz_lower_l2_content0: EffectTable,
    /// CZ with the higher qubit in |3>, lower content |0>: |30> -> |12>.
    pub cz_higher_l3_content0: EffectTable,
    /// CZ with the higher qubit in |3>, lower content |1>: |31> -> |22>.
    pub cz_higher_l3_content1: EffectTable,
    /// CZ with both qubits in |2>: |22> -> |31>.
    pub cz_both_l2: EffectTable,
    /// Any other leaked CZ level pair: partner depolarization only.
    pub cz_other_leaked: EffectTable,
    /// Idle channels by moment duration class.
    pub idle_sq: IdleClass,
    pub idle_cz: IdleClass,
    pub idle_ro: IdleClass,
    /// Data qubits idling through the readout window (includes `dd_pauli`).
    pub idle_ro_data: IdleClass,
    /// Two-outcome measurement assignment channel.
    pub measure: EffectTable,
    /// Reset residual channel.
    pub mlr_reset: EffectTable,
    /// Leakage-removal interaction on computational inputs.
    pub dqlr_iswap_comp: EffectTable,
    /// Threshold for reading a leaked qubit as "1".
    pub leak_readout_as_one: u64,
    /// Intrinsic leakage threshold per CZ moment.
    pub intrinsic_leak_cz: u64,
    pub intrinsic_leak_cz_p: f64,
    /// Intrinsic leakage threshold at the measurement window.
    pub intrinsic_leak_meas: u64,
    pub intrinsic_leak_meas_p: f64,
    /// Twirled-Z probability from `leak_phase_phi`.
    pub twirl_z_p: f64,
}

impl ChannelTables {
    /// Iterate over every categorical table, for statistical verification.
    pub fn all_tables(&self) -> Vec<&EffectTable> {
        let mut v = vec![
            &self.sq,
            &self.cz_both_computational,
            &self.cz_higher_l2,
            &self.cz_lower_l2_content1,
            &self.cz_lower_l2_content0,
            &self.cz_higher_l3_content0,
            &self.cz_higher_l3_content1,
            &self.cz_both_l2,
            &self.cz_other_leaked,
            &self.measure,
            &self.mlr_reset,
            &self.dqlr_iswap_comp,
        ];
        v.push(&self.idle_sq.pauli);
        v.push(&self.idle_cz.pauli);
        v.push(&self.idle_ro.pauli);
        v.push(&self.idle_ro_data.pauli);
        v
    }
}

fn idle_class(
    label: &'static str,
    duration_ns: f64,
    params: &NoiseParams,
    extra_depol: f64,
) -> Result<IdleClass> {
    let (px, py, pz) = idle_pauli_rates(duration_ns, params.t1_us, params.t2_us);
    let base = vec![
        (None, 1.0 - px - py - pz),
        (Some(Pauli::X), px),
        (Some(Pauli::Y), py),
        (Some(Pauli::Z), pz),
    ];
    let channel = if extra_depol > 0.0 {
        compose_pauli(&base, &depolarizing(extra_depol))
    } else {
        base
    };
    let entries = channel
        .iter()
        .filter_map(|&(p, w)| p.map(|p| (Effect::Pauli1(p), w)))
        .collect();
    let d_us = duration_ns * 1e-3;
    let relax_l2_p = 1.0 - (-d_us * params.t1_leak_factor / params.t1_us).exp();
    let relax_l3_p = 1.0 - (-d_us * (params.t1_leak_factor + 1.0) / params.t1_us).exp();
    Ok(IdleClass {
        pauli: EffectTable::new(label, entries)?,
        relax_l2: threshold(relax_l2_p),
        relax_l3: threshold(relax_l3_p),
        relax_l2_p,
        relax_l3_p,
    })
}

/// Build every sampling table from validated parameters.
///
/// Rejects `t2 > 2 t1` (unphysical dephasing) in addition to
/// [`NoiseParams::validate`].
pub fn build_channel_tables(params: &NoiseParams) -> Result<ChannelTables> {
    params.validate()?;
    if params.t2_us > 2.0 * params.t1_us + 1e-9 {
        return Err(Error::InvalidParam(format!(
            "t2 = {} exceeds 2*t1 = {}",
            params.t2_us,
            2.0 * params.t1_us
        )));
    }

    let sq_entries = depolarizing(params.sq_pauli)
        .iter()
        .filter_map(|&(p, w)| p.map(|p| (Effect::Pauli1(p), w)))
        .collect();
    let sq = EffectTable::new("sq_depolarizing", sq_entries)?;

    // Uniform two-qubit depolarizing: 15 non-identity pairs at p/15.
    let mut cz_entries = Vec::with_capacity(15);
    let opts = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
    for &a in &opts {
        for &b in &opts {
            if a.is_none() && b.is_none() {
                continue;
            }
            cz_entries.push((Effect::Pauli2(a, b), params.cz_pauli / 15.0));
        }
    }
    let cz_both_computational = EffectTable::new("cz_depolarizing", cz_entries)?;

    let twirl_z_p = twirl_phase_to_z(params.leak_phase_phi);
    let partner_depol = depolarizing(params.cz_pauli);
    let twirl = vec![(None, 1.0 - twirl_z_p), (Some(Pauli::Z), twirl_z_p)];
    let cz_higher_l2 = EffectTable::new(
        "cz_higher_l2",
        partner_entries(&compose_pauli(&twirl, &partner_depol)),
    )?;

    let twirl_with_depol = compose_pauli(&twirl, &partner_depol);
    let transport_then = |label: &'static str,
                          effect: Effect,
                          p_t: f64,
                          residual: &[(Option<Pauli>, f64)]|
     -> Result<EffectTable> {
        let mut entries = vec![(effect, p_t)];
        for (e, w) in partner_entries(residual) {
            entries.push((e, w * (1.0 - p_t)));
        }
        EffectTable::new(label, entries)
    };
    // A leaked lower qubit dresses the pair through the same two-photon
    // resonance, so the computational higher qubit acquires the twirled
    // phase whether or not transport completes.
    let cz_lower_l2_content1 = transport_then(
        "cz_lower_l2_content1",
        Effect::Transport12To30,
        params.p_transport_30_12,
        &twirl_with_depol,
    )?;
    let cz_lower_l2_content0 =
        EffectTable::new("cz_lower_l2_content0", partner_entries(&twirl_with_depol))?;
    let cz_higher_l3_content0 = transport_then(
        "cz_higher_l3_content0",
        Effect::Transport30To12,
        params.p_transport_30_12,
        &twirl_with_depol,
    )?;
    let cz_higher_l3_content1 = transport_then(
        "cz_higher_l3_content1",
        Effect::Transport31To22,
        params.p_transport_31_22,
        &twirl_with_depol,
    )?;
    let cz_both_l2 = EffectTable::new(
        "cz_both_l2",
        vec![(Effect::Transport22To31, params.p_transport_31_22)],
    )?;
    let cz_other_leaked =
        EffectTable::new("cz_other_leaked", partner_entries(&partner_depol))?;

    let idle_sq = idle_class("idle_sq", params.t_sq_ns, params, 0.0)?;
    let idle_cz = idle_class("idle_cz", params.t_cz_ns, params, 0.0)?;
    let idle_ro = idle_class("idle_ro", params.t_ro_reset_ns, params, 0.0)?;
    let idle_ro_data = idle_class("idle_ro_data", params.t_ro_reset_ns, params, params.dd_pauli)?;

    let measure = EffectTable::new(
        "measure_assignment",
        vec![(Effect::FlipOutcome, params.ro_reset_err)],
    )?;
    let mlr_reset = EffectTable::new(
        "mlr_reset",
        vec![
            (Effect::ResidualLeak, params.mlr_residual_leak),
            (
                Effect::ResidualOne,
                params.mlr_residual_one * (1.0 - params.mlr_residual_leak),
            ),
        ],
    )?;
    let dqlr_iswap_comp = EffectTable::new(
        "dqlr_iswap_comp",
        partner_entries(&depolarizing(params.dqlr_extra_pauli)),
    )?;

    let intrinsic_leak_cz_p =
        params.p_intrinsic_leak_per_cycle * (1.0 - params.intrinsic_leak_meas_frac) / 4.0;
    let intrinsic_leak_meas_p =
        params.p_intrinsic_leak_per_cycle * params.intrinsic_leak_meas_frac;

    Ok(ChannelTables {
        params: params.clone(),
        sq,
        cz_both_computational,
        cz_higher_l2,
        cz_lower_l2_content1,
        cz_lower_l2_content0,
        cz_higher_l3_content0,
        cz_higher_l3_content1,
        cz_both_l2,
        cz_other_leaked,
        idle_sq,
        idle_cz,
        idle_ro,
        idle_ro_data,
        measure,
        mlr_reset,
        dqlr_iswap_comp,
        leak_readout_as_one: threshold(params.p_leak_readout_as_one),
        intrinsic_leak_cz: threshold(intrinsic_leak_cz_p),
        intrinsic_leak_cz_p,
        intrinsic_leak_meas: threshold(intrinsic_leak_meas_p),
        intrinsic_leak_meas_p,
        twirl_z_p,
    })
}
