//! Shot execution: Pauli frame propagation with a per-qubit level label.
//!
//! Measurement bits are recorded as flips relative to the noiseless
//! reference run, which makes detector extraction a pure XOR over recorded
//! bits. A leaked qubit reads out absolutely (it is assigned "1" with the
//! configured probability), so its flip needs the reference value of that
//! measurement: zero for stabilizers sharing the memory basis, a per-shot
//! frozen random sign for the complementary basis, and the initial content
//! for classical data readouts. A qubit returning from leakage comes back
//! in |1> with a scrambled phase where the reference is a known
//! computational state, and with a fully scrambled frame where the
//! reference is a superposition (a Pauli frame cannot express a definite
//! state against a superposed reference).
//!
//! Every stochastic decision draws from the shot's counter-based stream in
//! a fixed order, so a (circuit, params, seed) triple replays exactly.

use crate::circuits::{Circuit, Gate, MeasKind, MemoryBasis, MomentClass, Role, Strategy};
use crate::noise::{ChannelTables, Effect, IdleClass, Pauli};
use crate::rng::{shot_key, threshold, CounterRng};
use crate::sim::{BitMatrix, RecordSet, ShotRecord};
use crate::{Error, Result};
use rayon::prelude::*;

/// Leakage level label of one qubit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Level {
    /// Computational subspace; the Pauli frame is meaningful.
    C,
    L2,
    L3,
}

impl Level {
    pub fn is_leaked(self) -> bool {
        self != Level::C
    }

    pub fn code(self) -> u8 {
        match self {
            Level::C => 0,
            Level::L2 => 1,
            Level::L3 => 2,
        }
    }
}

/// Reference value entering a leaked qubit's recorded flip.
#[derive(Copy, Clone, Debug)]
pub(crate) enum LeakRef {
    Zero,
    /// Frozen per-shot random stabilizer sign.
    Sigma(u32),
    /// Initial content of a classical data qubit.
    InitBit,
    /// Reference is an unknown codeword bit.
    Random,
}

#[derive(Clone, Debug)]
pub(crate) enum PlanGate {
    H(u32),
    Cz {
        higher: u32,
        lower: u32,
    },
    Iswap {
        data: u32,
        measure: u32,
    },
    Measure {
        q: u32,
        slot: u32,
        leak_ref: LeakRef,
        probe: bool,
    },
    Reset(u32),
    LeakInject {
        q: u32,
        cycle: u16,
        /// Conversion threshold for a qubit known in |1>.
        th_full: u64,
        /// Conversion threshold for a superposed qubit.
        th_half: u64,
    },
    Rot {
        q: u32,
        axis: Pauli,
        th: u64,
        /// Twirled flip probability, kept for error enumeration.
        p: f64,
        record: bool,
        cycle: u16,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct PlanMoment {
    pub class: MomentClass,
    pub gates: Vec<PlanGate>,
    /// Qubits idling through this moment (includes explicit idle slots).
    pub idle: Vec<u32>,
    /// Qubits targeted by a CZ this moment, for intrinsic-leak draws.
    pub cz_targets: Vec<u32>,
}

/// Circuit compiled for execution.
#[derive(Clone, Debug)]
pub struct ExecPlan {
    pub n_qubits: usize,
    /// Measurement slots per shot (probe slots included).
    pub n_slots: usize,
    pub circuit_hash: String,
    pub has_probe: bool,
    pub(crate) moments: Vec<PlanMoment>,
    pub(crate) z_definite: Vec<bool>,
    pub(crate) is_data: Vec<bool>,
    pub(crate) n_stabilizers: usize,
}

impl ExecPlan {
    pub fn compile(circuit: &Circuit) -> Result<ExecPlan> {
        let n_qubits = circuit.n_qubits();
        let z_definite: Vec<bool> = circuit
            .qubits
            .iter()
            .map(|q| {
                circuit.family == crate::circuits::CodeFamily::Repetition && q.role == Role::Data
            })
            .collect();
        let is_data: Vec<bool> = circuit.qubits.iter().map(|q| q.role == Role::Data).collect();

        let plan_slots = circuit.measurement_plan();
        let mut slot_iter = plan_slots.iter().enumerate();
        let mut moments = Vec::with_capacity(circuit.moments.len());
        let mut moment_cycle = vec![u16::MAX; circuit.moments.len()];
        for (c, w) in circuit.cycle_boundaries.windows(2).enumerate() {
            for m in w[0]..w[1] {
                moment_cycle[m] = c as u16;
            }
        }

        for (mi, moment) in circuit.moments.iter().enumerate() {
            let mut touched = vec![false; n_qubits];
            let mut gates = Vec::with_capacity(moment.gates.len());
            let mut cz_targets = Vec::new();
            for gate in &moment.gates {
                let (a, b) = gate.targets();
                touched[a as usize] = true;
                if let Some(b) = b {
                    touched[b as usize] = true;
                }
                let compiled = match *gate {
                    Gate::H(q) => Some(PlanGate::H(q)),
                    Gate::Cz { higher, lower } => {
                        cz_targets.push(higher.min(lower));
                        cz_targets.push(higher.max(lower));
                        Some(PlanGate::Cz { higher, lower })
                    }
                    Gate::LeakageIswap { data, measure } => {
                        Some(PlanGate::Iswap { data, measure })
                    }
                    Gate::MlrReset(q) => Some(PlanGate::Reset(q)),
                    Gate::Idle(q) => {
                        touched[q as usize] = false;
                        None
                    }
                    Gate::Measure(q) => {
                        let (slot, meas) = slot_iter
                            .next()
                            .ok_or_else(|| Error::InvalidCircuit("measurement plan short".into()))?;
                        debug_assert_eq!(meas.qubit, q);
                        let (leak_ref, probe) = match meas.kind {
                            MeasKind::Probe => (LeakRef::Zero, true),
                            MeasKind::FinalData => {
                                if z_definite[q as usize] {
                                    (LeakRef::InitBit, false)
                                } else {
                                    (LeakRef::Random, false)
                                }
                            }
                            MeasKind::Stab(s, t) => {
                                let stab = &circuit.stabilizers[s as usize];
                                let matches = matches!(
                                    (stab.basis, circuit.memory_basis),
                                    (crate::circuits::StabBasis::X, MemoryBasis::X)
                                        | (crate::circuits::StabBasis::Z, MemoryBasis::Z)
                                );
                                let r = if matches {
                                    LeakRef::Zero
                                } else {
                                    match circuit.strategy {
                                        Strategy::Mlr | Strategy::Dqlr => LeakRef::Sigma(s),
                                        Strategy::NoReset => {
                                            if t % 2 == 0 {
                                                LeakRef::Sigma(s)
                                            } else {
                                                LeakRef::Zero
                                            }
                                        }
                                    }
                                };
                                (r, false)
                            }
                        };
                        Some(PlanGate::Measure { q, slot: slot as u32, leak_ref, probe })
                    }
                    Gate::LeakInject { q, angle } => {
                        let p = (angle / 2.0).sin().powi(2);
                        Some(PlanGate::LeakInject {
                            q,
                            cycle: moment_cycle[mi],
                            th_full: threshold(p),
                            th_half: threshold(p / 2.0),
                        })
                    }
                    Gate::Rotation { q, axis, angle } => {
                        let p = (angle / 2.0).sin().powi(2);
                        Some(PlanGate::Rot {
                            q,
                            axis,
                            th: threshold(p),
                            p,
                            record: false,
                            cycle: moment_cycle[mi],
                        })
                    }
                    Gate::PauliInject { q, axis, angle } => {
                        let p = (angle / 2.0).sin().powi(2);
                        Some(PlanGate::Rot {
                            q,
                            axis,
                            th: threshold(p),
                            p,
                            record: true,
                            cycle: moment_cycle[mi],
                        })
                    }
                };
                gates.extend(compiled);
            }
            let idle: Vec<u32> = (0..n_qubits as u32)
                .filter(|&q| !touched[q as usize])
                .collect();
            moments.push(PlanMoment { class: moment.class, gates, idle, cz_targets });
        }
        if slot_iter.next().is_some() {
            return Err(Error::InvalidCircuit("measurement plan long".into()));
        }
        Ok(ExecPlan {
            n_qubits,
            n_slots: plan_slots.len(),
            circuit_hash: circuit.hash(),
            has_probe: circuit.probe_at_end,
            moments,
            z_definite,
            is_data,
            n_stabilizers: circuit.stabilizers.len(),
        })
    }

    pub(crate) fn moments(&self) -> &[PlanMoment] {
        &self.moments
    }
}

struct ShotState {
    level: Vec<Level>,
    fx: Vec<bool>,
    fz: Vec<bool>,
    init: Vec<bool>,
    sigma: Vec<Option<bool>>,
    flips: Vec<bool>,
    population: Option<Vec<u8>>,
    injected: Vec<(u16, u16)>,
    rng: CounterRng,
}

/// Executor bound to one compiled circuit and one table set.
pub struct Sim<'a> {
    pub plan: &'a ExecPlan,
    pub tables: &'a ChannelTables,
}

impl<'a> Sim<'a> {
    pub fn new(plan: &'a ExecPlan, tables: &'a ChannelTables) -> Sim<'a> {
        Sim { plan, tables }
    }

    fn idle_class(&self, class: MomentClass, data: bool) -> &IdleClass {
        match class {
            MomentClass::Sq | MomentClass::Inject => &self.tables.idle_sq,
            MomentClass::Cz | MomentClass::Iswap => &self.tables.idle_cz,
            MomentClass::Meas => {
                if data {
                    &self.tables.idle_ro_data
                } else {
                    &self.tables.idle_ro
                }
            }
            MomentClass::Reset => unreachable!("reset moments are instantaneous"),
        }
    }

    #[inline]
    fn apply_pauli(state: &mut ShotState, q: u32, p: Pauli) {
        if state.level[q as usize] == Level::C {
            let (x, z) = p.bits();
            state.fx[q as usize] ^= x;
            state.fz[q as usize] ^= z;
        }
    }

    /// |1>-content of a computational qubit: tracked where the reference is
    /// a known bit, a fair draw where it is a superposition.
    #[inline]
    fn content_bit(&self, state: &mut ShotState, q: u32) -> bool {
        if self.plan.z_definite[q as usize] {
            state.init[q as usize] ^ state.fx[q as usize]
        } else {
            state.rng.bit()
        }
    }

    fn return_to_c(&self, state: &mut ShotState, q: u32, content: bool) {
        state.level[q as usize] = Level::C;
        if self.plan.z_definite[q as usize] {
            state.fx[q as usize] = state.init[q as usize] ^ content;
        } else {
            state.fx[q as usize] = state.rng.bit();
        }
        state.fz[q as usize] = state.rng.bit();
    }

    fn sigma(state: &mut ShotState, s: u32) -> bool {
        let slot = &mut state.sigma[s as usize];
        match *slot {
            Some(b) => b,
            None => {
                let b = state.rng.bit();
                *slot = Some(b);
                b
            }
        }
    }

    fn exec_cz(&self, state: &mut ShotState, higher: u32, lower: u32) {
        let (h, l) = (higher as usize, lower as usize);
        match (state.level[h], state.level[l]) {
            (Level::C, Level::C) => {
                state.fz[h] ^= state.fx[l];
                state.fz[l] ^= state.fx[h];
                if let Effect::Pauli2(a, b) = self.tables.cz_both_computational.sample(&mut state.rng)
                {
                    if let Some(p) = a {
                        Self::apply_pauli(state, higher, p);
                    }
                    if let Some(p) = b {
                        Self::apply_pauli(state, lower, p);
                    }
                }
            }
            (Level::L2, Level::C) => {
                if let Effect::PartnerPauli(p) = self.tables.cz_higher_l2.sample(&mut state.rng) {
                    Self::apply_pauli(state, lower, p);
                }
            }
            (Level::C, Level::L2) => {
                let table = if self.content_bit(state, higher) {
                    &self.tables.cz_lower_l2_content1
                } else {
                    &self.tables.cz_lower_l2_content0
                };
                match table.sample(&mut state.rng) {
                    Effect::Transport12To30 => {
                        state.level[h] = Level::L3;
                        self.return_to_c(state, lower, false);
                    }
                    Effect::PartnerPauli(p) => Self::apply_pauli(state, higher, p),
                    _ => {}
                }
            }
            (Level::L3, Level::C) => {
                let table = if self.content_bit(state, lower) {
                    &self.tables.cz_higher_l3_content1
                } else {
                    &self.tables.cz_higher_l3_content0
                };
                match table.sample(&mut state.rng) {
                    Effect::Transport30To12 => {
                        self.return_to_c(state, higher, true);
                        state.level[l] = Level::L2;
                    }
                    Effect::Transport31To22 => {
                        state.level[h] = Level::L2;
                        state.level[l] = Level::L2;
                    }
                    Effect::PartnerPauli(p) => Self::apply_pauli(state, lower, p),
                    _ => {}
                }
            }
            (Level::L2, Level::L2) => {
                if let Effect::Transport22To31 = self.tables.cz_both_l2.sample(&mut state.rng) {
                    state.level[h] = Level::L3;
                    self.return_to_c(state, lower, true);
                }
            }
            (Level::C, Level::L3) => {
                if let Effect::PartnerPauli(p) = self.tables.cz_other_leaked.sample(&mut state.rng)
                {
                    Self::apply_pauli(state, higher, p);
                }
            }
            (Level::L3, Level::L2) | (Level::L2, Level::L3) | (Level::L3, Level::L3) => {}
        }
    }

    fn exec_iswap(&self, state: &mut ShotState, data: u32, measure: u32) {
        let (d, m) = (data as usize, measure as usize);
        if state.level[m].is_leaked() {
            return;
        }
        let m_content = state.fx[m];
        match (state.level[d], m_content) {
            (Level::L2, false) => {
                // |20> -> |11>: leakage removed from the data qubit.
                self.return_to_c(state, data, true);
                state.fx[m] = true;
                state.fz[m] = false;
            }
            (Level::C, true) => {
                // Residual |1> converts data-qubit |1> content into |2>.
                if self.content_bit(state, data) {
                    state.level[d] = Level::L2;
                    state.fx[m] = false;
                    state.fz[m] = false;
                }
            }
            (Level::C, false) => {
                if let Effect::PartnerPauli(p) = self.tables.dqlr_iswap_comp.sample(&mut state.rng)
                {
                    Self::apply_pauli(state, data, p);
                }
            }
            // |21> and |3x> sit outside the swapped subspace.
            (Level::L2, true) | (Level::L3, _) => {}
        }
    }

    fn exec_measure(&self, state: &mut ShotState, q: u32, slot: u32, leak_ref: LeakRef, probe: bool) {
        let qi = q as usize;
        if probe {
            if let Some(pop) = &mut state.population {
                pop[qi] = state.level[qi].code();
            }
            return;
        }
        let assign_flip = matches!(self.tables.measure.sample(&mut state.rng), Effect::FlipOutcome);
        let flip = if state.level[qi] == Level::C {
            let f = state.fx[qi] ^ assign_flip;
            // Projection: the recorded state becomes the new phase reference.
            state.fz[qi] = false;
            f
        } else {
            let read_one = state.rng.chance(self.tables.leak_readout_as_one);
            let reference = match leak_ref {
                LeakRef::Zero => false,
                LeakRef::Sigma(s) => Self::sigma(state, s),
                LeakRef::InitBit => state.init[qi],
                LeakRef::Random => state.rng.bit(),
            };
            read_one ^ assign_flip ^ reference
        };
        state.flips[slot as usize] = flip;
    }

    fn exec_moment(&self, state: &mut ShotState, moment: &PlanMoment) {
        for gate in &moment.gates {
            match *gate {
                PlanGate::H(q) => {
                    let qi = q as usize;
                    if state.level[qi] == Level::C {
                        let (x, z) = (state.fx[qi], state.fz[qi]);
                        state.fx[qi] = z;
                        state.fz[qi] = x;
                        if let Effect::Pauli1(p) = self.tables.sq.sample(&mut state.rng) {
                            Self::apply_pauli(state, q, p);
                        }
                    }
                }
                PlanGate::Cz { higher, lower } => self.exec_cz(state, higher, lower),
                PlanGate::Iswap { data, measure } => self.exec_iswap(state, data, measure),
                PlanGate::Measure { q, slot, leak_ref, probe } => {
                    self.exec_measure(state, q, slot, leak_ref, probe)
                }
                PlanGate::Reset(q) => {
                    let qi = q as usize;
                    state.level[qi] = Level::C;
                    state.fx[qi] = false;
                    state.fz[qi] = false;
                    match self.tables.mlr_reset.sample(&mut state.rng) {
                        Effect::ResidualOne => state.fx[qi] = true,
                        Effect::ResidualLeak => state.level[qi] = Level::L2,
                        _ => {}
                    }
                }
                PlanGate::LeakInject { q, cycle, th_full, th_half } => {
                    let qi = q as usize;
                    match state.level[qi] {
                        Level::C => {
                            let converted = if self.plan.z_definite[qi] {
                                let content = state.init[qi] ^ state.fx[qi];
                                content && state.rng.chance(th_full)
                            } else {
                                state.rng.chance(th_half)
                            };
                            if converted {
                                state.level[qi] = Level::L2;
                                state.injected.push((cycle, q as u16));
                            }
                        }
                        Level::L2 => {
                            // The same rotation moves |2> population back.
                            if state.rng.chance(th_full) {
                                self.return_to_c(state, q, true);
                            }
                        }
                        Level::L3 => {}
                    }
                }
                PlanGate::Rot { q, axis, th, record, cycle, .. } => {
                    if state.level[q as usize] == Level::C && state.rng.chance(th) {
                        Self::apply_pauli(state, q, axis);
                        if record {
                            state.injected.push((cycle, q as u16));
                        }
                    }
                }
            }
        }
        if moment.class == MomentClass::Reset {
            return;
        }
        // Idle errors on untouched computational qubits.
        for &q in &moment.idle {
            let qi = q as usize;
            if state.level[qi] == Level::C {
                let table = self.idle_class(moment.class, self.plan.is_data[qi]);
                if let Effect::Pauli1(p) = table.pauli.sample(&mut state.rng) {
                    Self::apply_pauli(state, q, p);
                }
            }
        }
        // Leakage relaxation over the moment duration, every leaked qubit.
        for qi in 0..self.plan.n_qubits {
            match state.level[qi] {
                Level::C => {}
                Level::L2 => {
                    let th = self.idle_class(moment.class, self.plan.is_data[qi]).relax_l2;
                    if state.rng.chance(th) {
                        self.return_to_c(state, qi as u32, true);
                    }
                }
                Level::L3 => {
                    let th = self.idle_class(moment.class, self.plan.is_data[qi]).relax_l3;
                    if state.rng.chance(th) {
                        state.level[qi] = Level::L2;
                    }
                }
            }
        }
        // Intrinsic leakage generated by the moment's operations.
        match moment.class {
            MomentClass::Cz if self.tables.intrinsic_leak_cz > 0 => {
                for &q in &moment.cz_targets {
                    if state.level[q as usize] == Level::C
                        && state.rng.chance(self.tables.intrinsic_leak_cz)
                    {
                        state.level[q as usize] = Level::L2;
                    }
                }
            }
            MomentClass::Meas if self.tables.intrinsic_leak_meas > 0 => {
                for qi in 0..self.plan.n_qubits {
                    if state.level[qi] == Level::C
                        && state.rng.chance(self.tables.intrinsic_leak_meas)
                    {
                        state.level[qi] = Level::L2;
                    }
                }
            }
            _ => {}
        }
    }

    /// Execute one shot with the given seed.
    pub fn run(&self, seed: u64) -> ShotRecord {
        let n = self.plan.n_qubits;
        let mut state = ShotState {
            level: vec![Level::C; n],
            fx: vec![false; n],
            fz: vec![false; n],
            init: vec![false; n],
            sigma: vec![None; self.plan.n_stabilizers],
            flips: vec![false; self.plan.n_slots],
            population: self.plan.has_probe.then(|| vec![0u8; n]),
            injected: Vec::new(),
            rng: CounterRng::new(seed),
        };
        // Classical data qubits start in a fresh random bitstring each shot.
        for qi in 0..n {
            if self.plan.z_definite[qi] {
                state.init[qi] = state.rng.bit();
            }
        }
        for moment in &self.plan.moments {
            self.exec_moment(&mut state, moment);
        }
        ShotRecord {
            seed,
            flips: state.flips,
            population: state.population,
            injected_flags: state.injected,
        }
    }
}

/// Where a single deterministic error is applied in a forced run.
#[derive(Clone, Debug)]
pub(crate) enum ForcedLoc {
    /// Apply this effect right after gate `gate` executes.
    AfterGate { gate: usize, effect: Effect },
    /// Pauli on an idling qubit.
    Idle { qubit: u32, pauli: Pauli },
    /// Flip the outcome of the measurement performed by gate `gate`.
    MeasFlip { gate: usize },
    /// Residual |1> after the reset performed by gate `gate`.
    ResetOne { gate: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct ForcedSite {
    pub moment: usize,
    pub loc: ForcedLoc,
}

impl<'a> Sim<'a> {
    /// Noiseless deterministic run with one error inserted; returns flips.
    ///
    /// Only frame-level mechanisms are supported (graph construction skips
    /// leakage channels by design), so no randomness is needed.
    pub(crate) fn run_forced(&self, site: &ForcedSite) -> Vec<bool> {
        let n = self.plan.n_qubits;
        let mut fx = vec![false; n];
        let mut fz = vec![false; n];
        let mut flips = vec![false; self.plan.n_slots];
        let apply = |fx: &mut [bool], fz: &mut [bool], q: u32, p: Pauli| {
            let (x, z) = p.bits();
            fx[q as usize] ^= x;
            fz[q as usize] ^= z;
        };
        for (mi, moment) in self.plan.moments.iter().enumerate() {
            for (gi, gate) in moment.gates.iter().enumerate() {
                let forced = mi == site.moment;
                match *gate {
                    PlanGate::H(q) => {
                        let qi = q as usize;
                        let (x, z) = (fx[qi], fz[qi]);
                        fx[qi] = z;
                        fz[qi] = x;
                    }
                    PlanGate::Cz { higher, lower } => {
                        fz[higher as usize] ^= fx[lower as usize];
                        fz[lower as usize] ^= fx[higher as usize];
                    }
                    PlanGate::Iswap { .. } => {}
                    PlanGate::Measure { q, slot, .. } => {
                        let mut f = fx[q as usize];
                        if forced && matches!(site.loc, ForcedLoc::MeasFlip { gate } if gate == gi)
                        {
                            f = !f;
                        }
                        flips[slot as usize] = f;
                        fz[q as usize] = false;
                    }
                    PlanGate::Reset(q) => {
                        fx[q as usize] = false;
                        fz[q as usize] = false;
                        if forced && matches!(site.loc, ForcedLoc::ResetOne { gate } if gate == gi)
                        {
                            fx[q as usize] = true;
                        }
                    }
                    PlanGate::LeakInject { .. } | PlanGate::Rot { .. } => {}
                }
                if forced {
                    if let ForcedLoc::AfterGate { gate, ref effect } = site.loc {
                        if gate == gi {
                            match *effect {
                                Effect::Pauli1(p) => {
                                    let (q, _) = gate_target(&moment.gates[gi]);
                                    apply(&mut fx, &mut fz, q, p);
                                }
                                Effect::Pauli2(a, b) => {
                                    let (qa, qb) = gate_target(&moment.gates[gi]);
                                    if let Some(p) = a {
                                        apply(&mut fx, &mut fz, qa, p);
                                    }
                                    if let (Some(p), Some(qb)) = (b, qb) {
                                        apply(&mut fx, &mut fz, qb, p);
                                    }
                                }
                                Effect::PartnerPauli(p) => {
                                    // Only enumerated for the removal
                                    // interaction, acting on the data qubit.
                                    let (q, _) = gate_target(&moment.gates[gi]);
                                    apply(&mut fx, &mut fz, q, p);
                                }
                                ref other => {
                                    unreachable!("forced effect {other:?} is not frame-level")
                                }
                            }
                        }
                    }
                }
            }
            if mi == site.moment {
                if let ForcedLoc::Idle { qubit, pauli } = site.loc {
                    apply(&mut fx, &mut fz, qubit, pauli);
                }
            }
        }
        flips
    }
}

fn gate_target(g: &PlanGate) -> (u32, Option<u32>) {
    match *g {
        PlanGate::H(q)
        | PlanGate::Measure { q, .. }
        | PlanGate::Reset(q)
        | PlanGate::LeakInject { q, .. }
        | PlanGate::Rot { q, .. } => (q, None),
        PlanGate::Cz { higher, lower } => (higher, Some(lower)),
        PlanGate::Iswap { data, measure } => (data, Some(measure)),
    }
}

/// One shot against an uncompiled circuit (compiles the plan first).
pub fn run_shot(circuit: &Circuit, tables: &ChannelTables, seed: u64) -> Result<ShotRecord> {
    let plan = ExecPlan::compile(circuit)?;
    Ok(Sim::new(&plan, tables).run(seed))
}

/// Batch execution; shot `i` uses the key `shot_key(base_seed, i)` and the
/// result is identical for any worker count or scheduling.
pub fn run_batch(
    circuit: &Circuit,
    tables: &ChannelTables,
    n_shots: usize,
    base_seed: u64,
) -> Result<RecordSet> {
    if n_shots == 0 {
        return Err(Error::InvalidParam("n_shots must be >= 1".into()));
    }
    let plan = ExecPlan::compile(circuit)?;
    let bits = n_shots as u128 * plan.n_slots as u128;
    if bits > 1 << 40 {
        return Err(Error::InvalidParam(format!(
            "batch of {bits} bits exceeds the in-memory limit; no partial results are produced"
        )));
    }
    let sim = Sim::new(&plan, tables);
    let mut flips = BitMatrix::zeros(n_shots, plan.n_slots);
    let n_pop = if plan.has_probe { plan.n_qubits } else { 1 };
    let mut pop = vec![0u8; n_shots * n_pop];
    let injected_counts = flips
        .par_rows()
        .zip(pop.par_chunks_mut(n_pop))
        .enumerate()
        .map(|(shot, (row, pop_row))| {
            let rec = sim.run(shot_key(base_seed, shot as u64));
            for (col, &bit) in rec.flips.iter().enumerate() {
                if bit {
                    row[col / 64] |= 1 << (col % 64);
                }
            }
            if let Some(p) = rec.population {
                pop_row.copy_from_slice(&p);
            }
            let mut counts = vec![0u64; plan.n_qubits];
            for &(_, q) in &rec.injected_flags {
                counts[q as usize] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; plan.n_qubits],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(RecordSet {
        circuit_hash: plan.circuit_hash.clone(),
        params_hash: tables.params.hash(),
        n_shots,
        base_seed,
        n_measurements: plan.n_slots,
        flips,
        population: plan.has_probe.then_some((plan.n_qubits, pop)),
        injected_counts,
        code_version: crate::VERSION.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_repetition_code, build_surface_code, Strategy};
    use crate::noise::{build_channel_tables, InjectionSpec, NoiseParams, TargetMask};

    fn noiseless_tables() -> ChannelTables {
        build_channel_tables(&NoiseParams::noiseless()).unwrap()
    }

    #[test]
    fn noiseless_shots_are_silent() {
        for strategy in [Strategy::NoReset, Strategy::Mlr, Strategy::Dqlr] {
            let c = build_surface_code(3, 3, strategy, &InjectionSpec::default()).unwrap();
            let tables = noiseless_tables();
            let rec = run_shot(&c, &tables, 1234).unwrap();
            assert!(rec.flips.iter().all(|&b| !b), "{strategy:?}");
            assert!(rec.injected_flags.is_empty());
        }
    }

    #[test]
    fn replay_is_exact() {
        let mut params = NoiseParams::table_s1();
        params.p_intrinsic_leak_per_cycle = 5e-3;
        params.injection.p_leak = 0.01;
        let tables = build_channel_tables(&params).unwrap();
        let c = build_surface_code(3, 5, Strategy::Dqlr, &params.injection).unwrap();
        let a = run_shot(&c, &tables, 987).unwrap();
        let b = run_shot(&c, &tables, 987).unwrap();
        assert_eq!(a.flips, b.flips);
        assert_eq!(a.injected_flags, b.injected_flags);
        let c2 = run_shot(&c, &tables, 988).unwrap();
        assert!(a.flips != c2.flips || a.injected_flags != c2.injected_flags);
    }

    #[test]
    fn batch_equals_individual_shots() {
        let params = NoiseParams::table_s1();
        let tables = build_channel_tables(&params).unwrap();
        let c = build_repetition_code(5, 3, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let rs = run_batch(&c, &tables, 16, 42).unwrap();
        let plan = ExecPlan::compile(&c).unwrap();
        let sim = Sim::new(&plan, &tables);
        for shot in 0..16 {
            let rec = sim.run(shot_key(42, shot as u64));
            for (col, &bit) in rec.flips.iter().enumerate() {
                assert_eq!(rs.flips.get(shot, col), bit);
            }
        }
    }

    #[test]
    fn mlr_reset_removes_leakage() {
        // One leaked qubit, reset with zero residuals: computational |0>.
        let mut params = NoiseParams::noiseless();
        params.injection = InjectionSpec {
            p_leak: 0.5,
            targets: TargetMask::Qubits(vec![3]),
            only_cycle: Some(0),
            ..InjectionSpec::default()
        };
        let c = build_repetition_code(3, 1, Strategy::Mlr, &params.injection).unwrap();
        let tables = build_channel_tables(&params).unwrap();
        // Probe right after the reset moment.
        let probed = crate::circuits::truncate_for_population(
            &c,
            0,
            c.cycle_moments(0).len() as u32 - 1,
        )
        .unwrap();
        let mut leaked_before_reset = 0;
        let mut leaked_after = 0;
        let plan = ExecPlan::compile(&probed).unwrap();
        let sim = Sim::new(&plan, &tables);
        // Probe just before the reset: cut one moment earlier.
        let pre = crate::circuits::truncate_for_population(
            &c,
            0,
            c.cycle_moments(0).len() as u32 - 2,
        )
        .unwrap();
        let pre_plan = ExecPlan::compile(&pre).unwrap();
        let pre_sim = Sim::new(&pre_plan, &tables);
        for shot in 0..256 {
            let rec = sim.run(shot_key(7, shot));
            let pop = rec.population.unwrap();
            leaked_after += pop.iter().filter(|&&l| l != 0).count();
            let rec = pre_sim.run(shot_key(7, shot));
            let pop = rec.population.unwrap();
            leaked_before_reset += (pop[3] != 0) as usize;
        }
        // Full |1>->|2> rotation on a random-bit data qubit leaks half the
        // shots... qubit 3 is the first measure qubit (superposed): half.
        assert!(leaked_before_reset > 80, "{leaked_before_reset}");
        assert_eq!(leaked_after, 0, "reset clears every level");
    }

    #[test]
    fn dqlr_removes_data_leakage_within_a_cycle() {
        let mut params = NoiseParams::noiseless();
        params.injection = InjectionSpec {
            p_leak: 0.5,
            targets: TargetMask::Qubits(vec![0]),
            only_cycle: Some(0),
            ..InjectionSpec::default()
        };
        // Qubit 0 is a data qubit; transports off during this check.
        let c = build_repetition_code(3, 2, Strategy::Dqlr, &params.injection).unwrap();
        let tables = build_channel_tables(&params).unwrap();
        let end = crate::circuits::truncate_for_population(
            &c,
            0,
            c.cycle_moments(0).len() as u32 - 1,
        )
        .unwrap();
        let plan = ExecPlan::compile(&end).unwrap();
        let sim = Sim::new(&plan, &tables);
        for shot in 0..256 {
            let rec = sim.run(shot_key(11, shot));
            let pop = rec.population.unwrap();
            assert!(pop.iter().all(|&l| l == 0), "shot {shot}: {pop:?}");
        }
    }

    #[test]
    fn leakage_labels_only_decrease_without_creation_paths() {
        let mut params = NoiseParams::noiseless();
        params.p_transport_30_12 = 0.18; // moves labels, conserves count
        params.t1_us = 20.0;
        params.t2_us = 20.0;
        params.injection = InjectionSpec {
            p_leak: 0.5,
            only_cycle: Some(0),
            ..InjectionSpec::default()
        };
        let c = build_surface_code(3, 6, Strategy::NoReset, &params.injection).unwrap();
        let tables = build_channel_tables(&params).unwrap();
        let mut last = f64::INFINITY;
        for cycle in 0..6 {
            let probed = crate::circuits::truncate_for_population(
                &c,
                cycle,
                c.cycle_moments(0).len() as u32 - 1,
            )
            .unwrap();
            let rs = run_batch(&probed, &tables, 2000, 5).unwrap();
            let (nq, pop) = rs.population.as_ref().unwrap();
            let leaked: usize = pop.iter().filter(|&&l| l != 0).count();
            let mean = leaked as f64 / (rs.n_shots as f64 * *nq as f64);
            assert!(
                mean <= last + 3.0 * (mean / (rs.n_shots as f64)).sqrt().max(1e-3),
                "labels grew: {mean} > {last}"
            );
            last = mean;
        }
    }

    #[test]
    fn forced_single_x_fires_adjacent_detectors_only() {
        let c = build_repetition_code(5, 4, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let tables = noiseless_tables();
        let plan = ExecPlan::compile(&c).unwrap();
        let sim = Sim::new(&plan, &tables);
        // X on data qubit 2 while idling in the first cycle's first moment.
        let flips = sim.run_forced(&ForcedSite {
            moment: c.cycle_boundaries[0],
            loc: ForcedLoc::Idle { qubit: 2, pauli: Pauli::X },
        });
        let ds = crate::circuits::define_detectors(&c);
        let fired: Vec<(u32, u32)> = ds
            .detectors
            .iter()
            .filter(|d| d.refs.iter().fold(false, |acc, &r| acc ^ flips[r as usize]))
            .map(|d| (d.stabilizer, d.cycle))
            .collect();
        // Data qubit 2 sits between stabilizers 1 and 2; the error happens
        // before cycle 0's readout, so both fire at t = 0 only.
        assert_eq!(fired, vec![(1, 0), (2, 0)]);
    }
}
