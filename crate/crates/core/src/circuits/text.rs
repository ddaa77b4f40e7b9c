//! Versioned line-oriented circuit text format.
//!
//! ```text
//! lqec-circuit v1
//! family surface            # surface | repetition
//! distance 3
//! cycles 30
//! strategy dqlr             # no_reset | mlr | dqlr
//! memory z                  # x | z
//! injection leak=0 pauli=0 targets=all cycle=*
//! probe none                # none | end
//! final_readout yes         # yes | no
//! qubit <id> <row> <col> data
//! qubit <id> <row> <col> measure <higher|lower>
//! stab <index> q=<measure> b=<x|z> at=<row>,<col> data=<id>,<id>,...
//! logical <id>,<id>,...
//! boundaries <m0>,<m1>,...
//! moment <class> GATE(targets;params) ...
//! end
//! ```
//!
//! One moment per line; gates are `KIND(targets;params)` with targets and
//! params comma-separated. Gate kinds: `H`, `ROT` (params `axis,angle`),
//! `CZ` (higher-frequency qubit first), `LISWAP` (data first), `M`, `R`,
//! `IDLE`, `LEAK` (param `angle`), `PINJ` (params `axis,angle`). Angles
//! print with shortest round-trip precision; parse-then-print is the
//! identity on canonical text.

use super::*;
use crate::noise::{RoleMask, TargetMask};
use crate::{Error, Result};

fn pauli_code(p: Pauli) -> &'static str {
    match p {
        Pauli::X => "x",
        Pauli::Y => "y",
        Pauli::Z => "z",
    }
}

fn parse_pauli(s: &str) -> Result<Pauli> {
    match s {
        "x" => Ok(Pauli::X),
        "y" => Ok(Pauli::Y),
        "z" => Ok(Pauli::Z),
        _ => Err(Error::Parse(format!("bad pauli axis `{s}`"))),
    }
}

fn gate_text(g: &Gate) -> String {
    match *g {
        Gate::H(q) => format!("H({q};)"),
        Gate::Rotation { q, axis, angle } => format!("ROT({q};{},{angle})", pauli_code(axis)),
        Gate::Cz { higher, lower } => format!("CZ({higher},{lower};)"),
        Gate::LeakageIswap { data, measure } => format!("LISWAP({data},{measure};)"),
        Gate::Measure(q) => format!("M({q};)"),
        Gate::MlrReset(q) => format!("R({q};)"),
        Gate::Idle(q) => format!("IDLE({q};)"),
        Gate::LeakInject { q, angle } => format!("LEAK({q};{angle})"),
        Gate::PauliInject { q, axis, angle } => format!("PINJ({q};{},{angle})", pauli_code(axis)),
    }
}

fn parse_gate(s: &str) -> Result<Gate> {
    let open = s
        .find('(')
        .ok_or_else(|| Error::Parse(format!("gate `{s}` missing `(`")))?;
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("gate `{s}` missing `)`")));
    }
    let kind = &s[..open];
    let body = &s[open + 1..s.len() - 1];
    let (targets, params) = body
        .split_once(';')
        .ok_or_else(|| Error::Parse(format!("gate `{s}` missing `;`")))?;
    let t: Vec<u32> = if targets.is_empty() {
        vec![]
    } else {
        targets
            .split(',')
            .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad target in `{s}`"))))
            .collect::<Result<_>>()?
    };
    let p: Vec<&str> = if params.is_empty() {
        vec![]
    } else {
        params.split(',').collect()
    };
    let angle = |i: usize| -> Result<f64> {
        p.get(i)
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad angle in `{s}`")))
    };
    let one = |t: &[u32]| -> Result<u32> {
        if t.len() == 1 {
            Ok(t[0])
        } else {
            Err(Error::Parse(format!("gate `{s}` expects one target")))
        }
    };
    let two = |t: &[u32]| -> Result<(u32, u32)> {
        if t.len() == 2 {
            Ok((t[0], t[1]))
        } else {
            Err(Error::Parse(format!("gate `{s}` expects two targets")))
        }
    };
    match kind {
        "H" => Ok(Gate::H(one(&t)?)),
        "M" => Ok(Gate::Measure(one(&t)?)),
        "R" => Ok(Gate::MlrReset(one(&t)?)),
        "IDLE" => Ok(Gate::Idle(one(&t)?)),
        "CZ" => {
            let (higher, lower) = two(&t)?;
            Ok(Gate::Cz { higher, lower })
        }
        "LISWAP" => {
            let (data, measure) = two(&t)?;
            Ok(Gate::LeakageIswap { data, measure })
        }
        "LEAK" => Ok(Gate::LeakInject { q: one(&t)?, angle: angle(0)? }),
        "ROT" => Ok(Gate::Rotation {
            q: one(&t)?,
            axis: parse_pauli(p.first().copied().unwrap_or(""))?,
            angle: angle(1)?,
        }),
        "PINJ" => Ok(Gate::PauliInject {
            q: one(&t)?,
            axis: parse_pauli(p.first().copied().unwrap_or(""))?,
            angle: angle(1)?,
        }),
        _ => Err(Error::Parse(format!("unknown gate kind `{kind}`"))),
    }
}

fn class_code(c: MomentClass) -> &'static str {
    match c {
        MomentClass::Sq => "sq",
        MomentClass::Inject => "inject",
        MomentClass::Cz => "cz",
        MomentClass::Iswap => "iswap",
        MomentClass::Meas => "meas",
        MomentClass::Reset => "reset",
    }
}

fn parse_class(s: &str) -> Result<MomentClass> {
    Ok(match s {
        "sq" => MomentClass::Sq,
        "inject" => MomentClass::Inject,
        "cz" => MomentClass::Cz,
        "iswap" => MomentClass::Iswap,
        "meas" => MomentClass::Meas,
        "reset" => MomentClass::Reset,
        _ => return Err(Error::Parse(format!("unknown moment class `{s}`"))),
    })
}

fn targets_text(t: &TargetMask) -> String {
    match t {
        TargetMask::Role(RoleMask::All) => "all".into(),
        TargetMask::Role(RoleMask::Data) => "data".into(),
        TargetMask::Role(RoleMask::Measure) => "measure".into(),
        TargetMask::Qubits(qs) => {
            let ids: Vec<String> = qs.iter().map(u32::to_string).collect();
            format!("q:{}", ids.join(","))
        }
    }
}

fn parse_targets(s: &str) -> Result<TargetMask> {
    Ok(match s {
        "all" => TargetMask::Role(RoleMask::All),
        "data" => TargetMask::Role(RoleMask::Data),
        "measure" => TargetMask::Role(RoleMask::Measure),
        _ => {
            let ids = s
                .strip_prefix("q:")
                .ok_or_else(|| Error::Parse(format!("bad injection targets `{s}`")))?;
            TargetMask::Qubits(
                ids.split(',')
                    .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad qubit id `{x}`"))))
                    .collect::<Result<_>>()?,
            )
        }
    })
}

pub fn to_text(c: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("lqec-circuit v1\n");
    s.push_str(&format!(
        "family {}\n",
        match c.family {
            CodeFamily::Repetition => "repetition",
            CodeFamily::Surface => "surface",
        }
    ));
    s.push_str(&format!("distance {}\n", c.distance));
    s.push_str(&format!("cycles {}\n", c.n_cycles));
    s.push_str(&format!(
        "strategy {}\n",
        match c.strategy {
            Strategy::NoReset => "no_reset",
            Strategy::Mlr => "mlr",
            Strategy::Dqlr => "dqlr",
        }
    ));
    s.push_str(&format!(
        "memory {}\n",
        match c.memory_basis {
            MemoryBasis::X => "x",
            MemoryBasis::Z => "z",
        }
    ));
    let cyc = match c.injection.only_cycle {
        None => "*".to_string(),
        Some(t) => t.to_string(),
    };
    s.push_str(&format!(
        "injection leak={} pauli={} targets={} cycle={}\n",
        c.injection.p_leak,
        c.injection.p_pauli,
        targets_text(&c.injection.targets),
        cyc
    ));
    s.push_str(&format!("probe {}\n", if c.probe_at_end { "end" } else { "none" }));
    s.push_str(&format!(
        "final_readout {}\n",
        if c.final_data_measure { "yes" } else { "no" }
    ));
    for q in &c.qubits {
        match q.role {
            Role::Data => {
                s.push_str(&format!("qubit {} {} {} data\n", q.id, q.coord.0, q.coord.1))
            }
            Role::Measure => s.push_str(&format!(
                "qubit {} {} {} measure {}\n",
                q.id,
                q.coord.0,
                q.coord.1,
                if q.higher_in_pairs { "higher" } else { "lower" }
            )),
        }
    }
    for st in &c.stabilizers {
        let data: Vec<String> = st.data.iter().map(u32::to_string).collect();
        s.push_str(&format!(
            "stab {} q={} b={} at={},{} data={}\n",
            st.index,
            st.measure_qubit,
            match st.basis {
                StabBasis::X => "x",
                StabBasis::Z => "z",
            },
            st.coord.0,
            st.coord.1,
            data.join(",")
        ));
    }
    let logical: Vec<String> = c.logical_support.iter().map(u32::to_string).collect();
    s.push_str(&format!("logical {}\n", logical.join(",")));
    let bounds: Vec<String> = c.cycle_boundaries.iter().map(usize::to_string).collect();
    s.push_str(&format!("boundaries {}\n", bounds.join(",")));
    for m in &c.moments {
        s.push_str(&format!("moment {}", class_code(m.class)));
        for g in &m.gates {
            s.push(' ');
            s.push_str(&gate_text(g));
        }
        s.push('\n');
    }
    s.push_str("end\n");
    s
}

pub fn from_text(text: &str) -> Result<Circuit> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != "lqec-circuit v1" {
        return Err(Error::Parse(format!("unsupported header `{header}`")));
    }
    let mut family = None;
    let mut distance = None;
    let mut cycles = None;
    let mut strategy = None;
    let mut memory = None;
    let mut injection = InjectionSpec::default();
    let mut probe_at_end = false;
    let mut final_data_measure = true;
    let mut qubits: Vec<QubitInfo> = Vec::new();
    let mut stabilizers: Vec<Stabilizer> = Vec::new();
    let mut logical_support = Vec::new();
    let mut cycle_boundaries = Vec::new();
    let mut moments = Vec::new();
    let mut saw_end = false;

    let kv = |line: &str, key: &str| -> Result<String> {
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("expected `{key} ...`, got `{line}`")))
    };

    for line in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let word = line.split(' ').next().unwrap_or("");
        match word {
            "family" => {
                family = Some(match kv(line, "family")?.as_str() {
                    "repetition" => CodeFamily::Repetition,
                    "surface" => CodeFamily::Surface,
                    o => return Err(Error::Parse(format!("unknown family `{o}`"))),
                })
            }
            "distance" => {
                distance = Some(
                    kv(line, "distance")?
                        .parse()
                        .map_err(|_| Error::Parse("bad distance".into()))?,
                )
            }
            "cycles" => {
                cycles = Some(
                    kv(line, "cycles")?
                        .parse()
                        .map_err(|_| Error::Parse("bad cycles".into()))?,
                )
            }
            "strategy" => {
                strategy = Some(match kv(line, "strategy")?.as_str() {
                    "no_reset" => Strategy::NoReset,
                    "mlr" => Strategy::Mlr,
                    "dqlr" => Strategy::Dqlr,
                    o => return Err(Error::Parse(format!("unknown strategy `{o}`"))),
                })
            }
            "memory" => {
                memory = Some(match kv(line, "memory")?.as_str() {
                    "x" => MemoryBasis::X,
                    "z" => MemoryBasis::Z,
                    o => return Err(Error::Parse(format!("unknown memory basis `{o}`"))),
                })
            }
            "injection" => {
                for field in kv(line, "injection")?.split(' ') {
                    let (k, v) = field
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("bad injection field `{field}`")))?;
                    match k {
                        "leak" => {
                            injection.p_leak =
                                v.parse().map_err(|_| Error::Parse("bad leak".into()))?
                        }
                        "pauli" => {
                            injection.p_pauli =
                                v.parse().map_err(|_| Error::Parse("bad pauli".into()))?
                        }
                        "targets" => injection.targets = parse_targets(v)?,
                        "cycle" => {
                            injection.only_cycle = if v == "*" {
                                None
                            } else {
                                Some(v.parse().map_err(|_| Error::Parse("bad cycle".into()))?)
                            }
                        }
                        o => return Err(Error::Parse(format!("unknown injection field `{o}`"))),
                    }
                }
            }
            "probe" => probe_at_end = kv(line, "probe")? == "end",
            "final_readout" => final_data_measure = kv(line, "final_readout")? == "yes",
            "qubit" => {
                let rest = kv(line, "qubit")?;
                let f: Vec<&str> = rest.split(' ').collect();
                if f.len() < 4 {
                    return Err(Error::Parse(format!("bad qubit line `{line}`")));
                }
                let parse_i = |s: &str| -> Result<i32> {
                    s.parse().map_err(|_| Error::Parse(format!("bad coord `{s}`")))
                };
                let id: u32 =
                    f[0].parse().map_err(|_| Error::Parse("bad qubit id".into()))?;
                let coord = (parse_i(f[1])?, parse_i(f[2])?);
                let (role, higher) = match f[3] {
                    "data" => (Role::Data, false),
                    "measure" => (
                        Role::Measure,
                        match f.get(4) {
                            Some(&"higher") => true,
                            Some(&"lower") => false,
                            _ => return Err(Error::Parse("measure qubit missing rank".into())),
                        },
                    ),
                    o => return Err(Error::Parse(format!("unknown role `{o}`"))),
                };
                if id as usize != qubits.len() {
                    return Err(Error::Parse(format!("qubit ids must be dense, got {id}")));
                }
                qubits.push(QubitInfo { id, coord, role, stabilizer: None, higher_in_pairs: higher });
            }
            "stab" => {
                let rest = kv(line, "stab")?;
                let f: Vec<&str> = rest.split(' ').collect();
                if f.len() != 5 {
                    return Err(Error::Parse(format!("bad stab line `{line}`")));
                }
                let index: u32 =
                    f[0].parse().map_err(|_| Error::Parse("bad stab index".into()))?;
                let measure_qubit = f[1]
                    .strip_prefix("q=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse("bad stab measure".into()))?;
                let basis = match f[2].strip_prefix("b=") {
                    Some("x") => StabBasis::X,
                    Some("z") => StabBasis::Z,
                    _ => return Err(Error::Parse("bad stab basis".into())),
                };
                let coord = f[3]
                    .strip_prefix("at=")
                    .and_then(|v| v.split_once(','))
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| Error::Parse("bad stab coord".into()))?;
                let data: Vec<u32> = f[4]
                    .strip_prefix("data=")
                    .ok_or_else(|| Error::Parse("bad stab data".into()))?
                    .split(',')
                    .map(|x| x.parse().map_err(|_| Error::Parse("bad stab data id".into())))
                    .collect::<Result<_>>()?;
                if index as usize != stabilizers.len() {
                    return Err(Error::Parse("stab indices must be dense".into()));
                }
                stabilizers.push(Stabilizer { index, measure_qubit, basis, data, coord });
            }
            "logical" => {
                logical_support = kv(line, "logical")?
                    .split(',')
                    .map(|x| x.parse().map_err(|_| Error::Parse("bad logical id".into())))
                    .collect::<Result<_>>()?;
            }
            "boundaries" => {
                cycle_boundaries = kv(line, "boundaries")?
                    .split(',')
                    .map(|x| x.parse().map_err(|_| Error::Parse("bad boundary".into())))
                    .collect::<Result<_>>()?;
            }
            "moment" => {
                let rest = kv(line, "moment")?;
                let mut parts = rest.split(' ');
                let class = parse_class(parts.next().unwrap_or(""))?;
                let gates: Vec<Gate> = parts.map(parse_gate).collect::<Result<_>>()?;
                moments.push(Moment { class, gates });
            }
            "end" => saw_end = true,
            _ => return Err(Error::Parse(format!("unexpected line `{line}`"))),
        }
    }
    if !saw_end {
        return Err(Error::Parse("missing `end` line".into()));
    }
    for st in &stabilizers {
        let q = qubits
            .get_mut(st.measure_qubit as usize)
            .ok_or_else(|| Error::Parse("stab references unknown qubit".into()))?;
        q.stabilizer = Some(st.index);
    }
    let circuit = Circuit {
        family: family.ok_or_else(|| Error::Parse("missing family".into()))?,
        distance: distance.ok_or_else(|| Error::Parse("missing distance".into()))?,
        n_cycles: cycles.ok_or_else(|| Error::Parse("missing cycles".into()))?,
        strategy: strategy.ok_or_else(|| Error::Parse("missing strategy".into()))?,
        memory_basis: memory.ok_or_else(|| Error::Parse("missing memory".into()))?,
        qubits,
        stabilizers,
        moments,
        cycle_boundaries,
        logical_support,
        injection,
        probe_at_end,
        final_data_measure,
    };
    if circuit.cycle_boundaries.len() != circuit.n_cycles as usize + 1 {
        return Err(Error::Parse("boundary count != cycles + 1".into()));
    }
    if circuit
        .cycle_boundaries
        .iter()
        .any(|&b| b > circuit.moments.len())
    {
        return Err(Error::Parse("boundary outside moment list".into()));
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_repetition_code, build_surface_code, truncate_for_population};
    use crate::noise::InjectionSpec;

    #[test]
    fn round_trip_is_identity() {
        let spec = InjectionSpec {
            p_leak: 0.013,
            targets: TargetMask::Qubits(vec![0, 4, 8]),
            only_cycle: Some(1),
            ..InjectionSpec::default()
        };
        for c in [
            build_surface_code(3, 3, Strategy::Dqlr, &spec).unwrap(),
            build_surface_code(5, 2, Strategy::NoReset, &InjectionSpec::default()).unwrap(),
            build_repetition_code(5, 4, Strategy::Mlr, &InjectionSpec::default()).unwrap(),
        ] {
            let text = c.to_text();
            let parsed = Circuit::from_text(&text).unwrap();
            assert_eq!(parsed, c);
            assert_eq!(parsed.to_text(), text);
        }
    }

    #[test]
    fn probe_circuits_round_trip() {
        let c = build_surface_code(3, 2, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let t = truncate_for_population(&c, 1, 2).unwrap();
        let parsed = Circuit::from_text(&t.to_text()).unwrap();
        assert_eq!(parsed, t);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(Circuit::from_text("nonsense").is_err());
        let c = build_repetition_code(3, 1, Strategy::Mlr, &InjectionSpec::default()).unwrap();
        let text = c.to_text();
        assert!(Circuit::from_text(&text.replace("CZ(", "CX(")).is_err());
        assert!(Circuit::from_text(&text.replace("end\n", "")).is_err());
        assert!(Circuit::from_text(&text.replace("strategy mlr", "strategy magic")).is_err());
    }

    #[test]
    fn angles_print_with_round_trip_precision() {
        let spec = InjectionSpec { p_leak: 0.01, ..InjectionSpec::default() };
        let c = build_repetition_code(3, 1, Strategy::Mlr, &spec).unwrap();
        let text = c.to_text();
        let angle = crate::noise::theta_leak(0.01).unwrap();
        assert!(text.contains(&format!("LEAK(0;{angle})")));
    }
}
