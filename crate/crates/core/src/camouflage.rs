//! Camouflage compiler.
//!
//! Selected 2-input gates become `CAMO` cells. The netlist keeps only the
//! structure; each cell's function goes into a [`CamoConfig`], which records
//! the branch assignment and the pH pair that program it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::IsfetParams;
use crate::gate::{assignment_for, GateError, GatePhProgram, TruthTable2};
use crate::netlist::{counting_lanes, vector_from_index, Bindings, Gate, GateKind, Netlist, NetlistError};

/// Largest input count accepted for exhaustive equivalence checking.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CamoError {
    #[error("gate {gate} is not camouflageable: {reason}")]
    NotCamouflageable { gate: String, reason: String },
    #[error("no gate named {0}")]
    UnknownGate(String),
    #[error("camouflage rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("config has no entry for camouflaged gate {0}")]
    MissingEntry(String),
    #[error("config entry {0} does not match any camouflaged gate")]
    ExtraEntry(String),
    #[error("config lists gate {0} more than once")]
    DuplicateEntry(String),
    #[error("gate {gate}: function {function} has no .bench primitive")]
    NoPrimitive { gate: String, function: TruthTable2 },
    #[error("invalid camouflage config: {0}")]
    InvalidConfig(String),
    #[error("I/O signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("exhaustive check needs at most {MAX_EXHAUSTIVE_INPUTS} inputs, netlist has {0}")]
    TooManyInputs(usize),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// Programming record for one `CAMO` instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamoGateEntry {
    pub name: String,
    pub function_name: String,
    pub function_bits: u8,
    /// LVT on the `V_OUT` side, minterm order `m = 2A + B`.
    pub assignment: [bool; 4],
    pub ph_low: f64,
    pub ph_high: f64,
}

impl CamoGateEntry {
    pub fn new(name: impl Into<String>, function: TruthTable2, ph_low: f64, ph_high: f64) -> Self {
        Self {
            name: name.into(),
            function_name: function.name().to_string(),
            function_bits: function.bits(),
            assignment: assignment_for(function).lvt_on_out_side,
            ph_low,
            ph_high,
        }
    }

    pub fn function(&self) -> Result<TruthTable2, CamoError> {
        Ok(TruthTable2::new(self.function_bits)?)
    }

    pub fn program(&self) -> Result<GatePhProgram, CamoError> {
        Ok(GatePhProgram::for_function(
            self.function()?,
            self.ph_low,
            self.ph_high,
        )?)
    }
}

/// The secret half of a camouflaged design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamoConfig {
    pub params: IsfetParams,
    pub gates: Vec<CamoGateEntry>,
}

impl CamoConfig {
    pub fn validate(&self) -> Result<(), CamoError> {
        self.params
            .validate()
            .map_err(|e| CamoError::InvalidConfig(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for e in &self.gates {
            if !seen.insert(e.name.as_str()) {
                return Err(CamoError::DuplicateEntry(e.name.clone()));
            }
            let bad = |m: String| Err(CamoError::InvalidConfig(format!("gate {}: {m}", e.name)));
            let f = match TruthTable2::new(e.function_bits) {
                Ok(f) => f,
                Err(err) => return bad(err.to_string()),
            };
            match e.function_name.parse::<TruthTable2>() {
                Ok(named) if named == f => {}
                _ => {
                    return bad(format!(
                        "function_name {} does not match bits {}",
                        e.function_name, e.function_bits
                    ))
                }
            }
            if e.assignment != assignment_for(f).lvt_on_out_side {
                return bad(format!("assignment {:?} does not realize {}", e.assignment, f));
            }
            if !(e.ph_low < e.ph_high) {
                return bad(format!("ph_low {} must be below ph_high {}", e.ph_low, e.ph_high));
            }
            if let Err(err) = check_ph_pair(&self.params, e.ph_low, e.ph_high) {
                return bad(err.to_string());
            }
        }
        Ok(())
    }

    pub fn bindings(&self) -> Result<Bindings, CamoError> {
        self.gates.iter().map(|e| Ok((e.name.clone(), e.function()?))).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CamoError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CamoError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that entries cover exactly the `CAMO` gates of `camo`.
    pub fn check_coverage(&self, camo: &Netlist) -> Result<(), CamoError> {
        let mut entries = BTreeSet::new();
        for e in &self.gates {
            if !entries.insert(e.name.as_str()) {
                return Err(CamoError::DuplicateEntry(e.name.clone()));
            }
        }
        let cells: BTreeSet<&str> = camo
            .camo_gates()
            .into_iter()
            .map(|g| camo.gates()[g].name.as_str())
            .collect();
        if let Some(missing) = cells.difference(&entries).next() {
            return Err(CamoError::MissingEntry(missing.to_string()));
        }
        if let Some(extra) = entries.difference(&cells).next() {
            return Err(CamoError::ExtraEntry(extra.to_string()));
        }
        Ok(())
    }
}

fn check_ph_pair(params: &IsfetParams, ph_low: f64, ph_high: f64) -> Result<(), CamoError> {
    GatePhProgram::new(assignment_for(TruthTable2::FALSE), ph_low, ph_high)?;
    let lo = params.vth_from_ph(ph_low).map_err(GateError::from)?;
    let hi = params.vth_from_ph(ph_high).map_err(GateError::from)?;
    if !(lo < hi) {
        return Err(CamoError::InvalidConfig(format!(
            "pH {ph_low}/{ph_high} give thresholds {lo} V / {hi} V; LVT must sit below HVT"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionPolicy {
    Explicit(Vec<String>),
    /// Camouflage `round(rate * eligible)` gates chosen with a seeded RNG.
    Fraction {
        rate: f64,
        seed: u64,
    },
}

/// Why `gate` cannot become a `CAMO` cell, if it cannot.
fn ineligibility(gate: &Gate) -> Option<String> {
    if gate.kind == GateKind::Camo {
        Some("already camouflaged".into())
    } else if gate.kind.truth_table().is_none() {
        Some(format!("{} is not a 2-input function", gate.kind))
    } else if gate.fanin.len() != 2 {
        Some(format!(
            "{}-input {}; only 2-input gates map onto the cell",
            gate.fanin.len(),
            gate.kind
        ))
    } else {
        None
    }
}

pub fn eligible_gates(n: &Netlist) -> Vec<usize> {
    (0..n.gates().len())
        .filter(|&g| ineligibility(&n.gates()[g]).is_none())
        .collect()
}

/// Replaces the selected gates with `CAMO` cells programmed to their
/// original function.
pub fn camouflage(
    n: &Netlist,
    policy: &SelectionPolicy,
    ph_low: f64,
    ph_high: f64,
    params: &IsfetParams,
) -> Result<(Netlist, CamoConfig), CamoError> {
    params.validate().map_err(GateError::from)?;
    if !(ph_low < ph_high) {
        return Err(CamoError::InvalidConfig(format!(
            "ph_low {ph_low} must be below ph_high {ph_high}"
        )));
    }
    check_ph_pair(params, ph_low, ph_high)?;

    let selected: BTreeSet<usize> = match policy {
        SelectionPolicy::Explicit(names) => {
            let mut set = BTreeSet::new();
            for name in names {
                let g = n.gate_index(name).ok_or_else(|| CamoError::UnknownGate(name.clone()))?;
                if let Some(reason) = ineligibility(&n.gates()[g]) {
                    return Err(CamoError::NotCamouflageable {
                        gate: name.clone(),
                        reason,
                    });
                }
                set.insert(g);
            }
            set
        }
        SelectionPolicy::Fraction { rate, seed } => {
            if !(0.0..=1.0).contains(rate) {
                return Err(CamoError::InvalidRate(*rate));
            }
            let pool = eligible_gates(n);
            let count = (rate * pool.len() as f64).round() as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rand::seq::index::sample(&mut rng, pool.len(), count)
                .into_iter()
                .map(|k| pool[k])
                .collect()
        }
    };

    let mut gates = n.gates().to_vec();
    let mut entries = Vec::with_capacity(selected.len());
    for &g in &selected {
        let f = gates[g].kind.truth_table().expect("eligible gates are binary");
        entries.push(CamoGateEntry::new(gates[g].name.clone(), f, ph_low, ph_high));
        gates[g].kind = GateKind::Camo;
    }
    let camo = n.with_gates(gates)?;
    Ok((
        camo,
        CamoConfig {
            params: *params,
            gates: entries,
        },
    ))
}

/// Restores concrete gates from a camouflaged netlist and its config.
pub fn decamouflage(camo: &Netlist, cfg: &CamoConfig) -> Result<Netlist, CamoError> {
    cfg.check_coverage(camo)?;
    let by_name: BTreeMap<&str, &CamoGateEntry> = cfg.gates.iter().map(|e| (e.name.as_str(), e)).collect();
    let mut gates = camo.gates().to_vec();
    for gate in gates.iter_mut().filter(|g| g.kind == GateKind::Camo) {
        let f = by_name[gate.name.as_str()].function()?;
        if let Some(kind) = GateKind::from_truth_table(f) {
            gate.kind = kind;
            continue;
        }
        let (kind, keep) = match f {
            TruthTable2::A => (GateKind::Buf, 0),
            TruthTable2::B => (GateKind::Buf, 1),
            TruthTable2::NOT_A => (GateKind::Not, 0),
            TruthTable2::NOT_B => (GateKind::Not, 1),
            _ => {
                return Err(CamoError::NoPrimitive {
                    gate: gate.name.clone(),
                    function: f,
                })
            }
        };
        gate.kind = kind;
        gate.fanin = vec![gate.fanin[keep].clone()];
    }
    Ok(camo.with_gates(gates)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceMode {
    Exhaustive,
    Random { vectors: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent {
        vectors: u64,
        exhaustive: bool,
    },
    Counterexample {
        inputs: Vec<bool>,
        left: Vec<bool>,
        right: Vec<bool>,
        /// Vectors checked up to and including the counterexample.
        vectors_checked: u64,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent {
                vectors,
                exhaustive: true,
            } => {
                write!(f, "equivalent ({vectors}/{vectors} vectors)")
            }
            Verdict::Equivalent {
                vectors,
                exhaustive: false,
            } => {
                write!(f, "no counterexample in {vectors} vectors")
            }
            Verdict::Counterexample {
                inputs, left, right, ..
            } => write!(
                f,
                "counterexample: inputs {} give {} vs {}",
                bits(inputs),
                bits(left),
                bits(right)
            ),
        }
    }
}

/// Compares `left` and `right` on the same input vectors. `bindings` supplies
/// functions for `CAMO` gates in either netlist.
pub fn verify_equivalence(
    left: &Netlist,
    right: &Netlist,
    bindings: &Bindings,
    mode: EquivalenceMode,
) -> Result<Verdict, CamoError> {
    if left.inputs() != right.inputs() {
        return Err(CamoError::SignatureMismatch(format!(
            "inputs [{}] vs [{}]",
            left.inputs().join(", "),
            right.inputs().join(", ")
        )));
    }
    if left.outputs() != right.outputs() {
        return Err(CamoError::SignatureMismatch(format!(
            "outputs [{}] vs [{}]",
            left.outputs().join(", "),
            right.outputs().join(", ")
        )));
    }
    let lf = left.camo_functions(bindings)?;
    let rf = right.camo_functions(bindings)?;
    let n_in = left.inputs().len();

    // First differing lane of a 64-vector block, if any.
    let diff = |lanes: &[u64], live: u64| -> Option<(u32, Vec<u64>, Vec<u64>)> {
        let lo = left.eval_lanes(&lf, lanes);
        let ro = right.eval_lanes(&rf, lanes);
        let mask = lo.iter().zip(&ro).fold(0u64, |m, (a, b)| m | (a ^ b)) & live;
        (mask != 0).then(|| (mask.trailing_zeros(), lo, ro))
    };
    let lane_bits = |words: &[u64], lane: u32| -> Vec<bool> { words.iter().map(|w| (w >> lane) & 1 == 1).collect() };
    let live_mask = |count: u64| if count >= 64 { !0 } else { (1u64 << count) - 1 };

    match mode {
        EquivalenceMode::Exhaustive => {
            if n_in > MAX_EXHAUSTIVE_INPUTS {
                return Err(CamoError::TooManyInputs(n_in));
            }
            let total = 1u64 << n_in;
            let blocks = total.div_ceil(64);
            let hit = (0..blocks).into_par_iter().find_map_first(|blk| {
                let base = blk * 64;
                diff(&counting_lanes(n_in, base), live_mask(total - base)).map(|(lane, lo, ro)| {
                    let index = base + lane as u64;
                    Verdict::Counterexample {
                        inputs: vector_from_index(n_in, index),
                        left: lane_bits(&lo, lane),
                        right: lane_bits(&ro, lane),
                        vectors_checked: index + 1,
                    }
                })
            });
            Ok(hit.unwrap_or(Verdict::Equivalent {
                vectors: total,
                exhaustive: true,
            }))
        }
        EquivalenceMode::Random { vectors, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut base = 0u64;
            while base < vectors {
                let lanes: Vec<u64> = (0..n_in).map(|_| rng.gen()).collect();
                if let Some((lane, lo, ro)) = diff(&lanes, live_mask(vectors - base)) {
                    return Ok(Verdict::Counterexample {
                        inputs: lane_bits(&lanes, lane),
                        left: lane_bits(&lo, lane),
                        right: lane_bits(&ro, lane),
                        vectors_checked: base + lane as u64 + 1,
                    });
                }
                base += 64;
            }
            Ok(Verdict::Equivalent {
                vectors,
                exhaustive: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::random::{random_netlist, RandomNetlistSpec};
    use crate::netlist::{eval_logic, parse_bench, serialize_bench, C17_BENCH};
    use proptest::prelude::*;

    fn c17() -> Netlist {
        parse_bench(C17_BENCH).unwrap()
    }

    fn explicit(names: &[&str]) -> SelectionPolicy {
        SelectionPolicy::Explicit(names.iter().map(|s| s.to_string()).collect())
    }

    fn p() -> IsfetParams {
        IsfetParams::default()
    }

    #[test]
    fn explicit_two_nands() {
        let (camo, cfg) = camouflage(&c17(), &explicit(&["16", "22"]), 2.0, 10.0, &p()).unwrap();
        assert_eq!(camo.camo_gates().len(), 2);
        assert_eq!(cfg.gates.len(), 2);
        for e in &cfg.gates {
            assert_eq!(e.function().unwrap(), TruthTable2::NAND);
            assert_eq!(e.function_name, "NAND");
            assert_eq!(e.assignment, [true, true, true, false]);
        }
        cfg.validate().unwrap();
        cfg.check_coverage(&camo).unwrap();
    }

    #[test]
    fn rate_zero_and_one() {
        let n = c17();
        let (same, cfg) = camouflage(&n, &SelectionPolicy::Fraction { rate: 0.0, seed: 9 }, 2.0, 10.0, &p()).unwrap();
        assert_eq!(same, n);
        assert!(cfg.gates.is_empty());
        assert_eq!(serialize_bench(&same), serialize_bench(&n));

        let (all, cfg) = camouflage(&n, &SelectionPolicy::Fraction { rate: 1.0, seed: 9 }, 2.0, 10.0, &p()).unwrap();
        assert!(all.gates().iter().all(|g| g.kind == GateKind::Camo));
        assert_eq!(cfg.gates.len(), 6);
    }

    #[test]
    fn fraction_is_deterministic() {
        let n = c17();
        let pol = SelectionPolicy::Fraction { rate: 0.5, seed: 42 };
        let a = camouflage(&n, &pol, 2.0, 10.0, &p()).unwrap();
        let b = camouflage(&n, &pol, 2.0, 10.0, &p()).unwrap();
        assert_eq!(serialize_bench(&a.0), serialize_bench(&b.0));
        assert_eq!(a.1.to_json(), b.1.to_json());
        assert_eq!(a.1.gates.len(), 3);
    }

    #[test]
    fn ineligible_selections() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\nt = NOT(a)\ny = AND(t, b, c)\nz = OR(a, b)\n",
        )
        .unwrap();
        let e = camouflage(&n, &explicit(&["t"]), 2.0, 10.0, &p()).unwrap_err();
        assert!(matches!(e, CamoError::NotCamouflageable { ref gate, .. } if gate == "t"));
        let e = camouflage(&n, &explicit(&["y"]), 2.0, 10.0, &p()).unwrap_err();
        assert!(matches!(e, CamoError::NotCamouflageable { ref gate, .. } if gate == "y"));
        assert!(e.to_string().contains("not camouflageable"));
        let e = camouflage(&n, &explicit(&["a"]), 2.0, 10.0, &p()).unwrap_err();
        assert_eq!(e, CamoError::UnknownGate("a".into()));
        let (camo, _) = camouflage(&n, &explicit(&["z"]), 2.0, 10.0, &p()).unwrap();
        let e = camouflage(&camo, &explicit(&["z"]), 2.0, 10.0, &p()).unwrap_err();
        assert!(matches!(e, CamoError::NotCamouflageable { .. }));
        // Fraction policy skips what cannot be camouflaged.
        let (all, cfg) = camouflage(&n, &SelectionPolicy::Fraction { rate: 1.0, seed: 0 }, 2.0, 10.0, &p()).unwrap();
        assert_eq!(cfg.gates.len(), 1);
        assert_eq!(all.camo_gates(), vec![2]);
        assert_eq!(
            camouflage(&n, &SelectionPolicy::Fraction { rate: 1.5, seed: 0 }, 2.0, 10.0, &p()).unwrap_err(),
            CamoError::InvalidRate(1.5)
        );
        assert!(camouflage(&n, &explicit(&["z"]), 10.0, 2.0, &p()).is_err());
        assert!(camouflage(&n, &explicit(&["z"]), 5.0, 5.0, &p()).is_err());
    }

    #[test]
    fn decamouflage_inverts() {
        let n = c17();
        let (camo, cfg) = camouflage(&n, &explicit(&["10", "19", "23"]), 2.0, 10.0, &p()).unwrap();
        assert_eq!(decamouflage(&camo, &cfg).unwrap(), n);
    }

    #[test]
    fn coverage_errors() {
        let (camo, cfg) = camouflage(&c17(), &explicit(&["10", "19"]), 2.0, 10.0, &p()).unwrap();
        let mut short = cfg.clone();
        short.gates.retain(|e| e.name != "19");
        assert_eq!(
            decamouflage(&camo, &short).unwrap_err(),
            CamoError::MissingEntry("19".into())
        );
        let mut long = cfg.clone();
        long.gates.push(CamoGateEntry::new("nope", TruthTable2::OR, 2.0, 10.0));
        assert_eq!(
            decamouflage(&camo, &long).unwrap_err(),
            CamoError::ExtraEntry("nope".into())
        );
        let mut dup = cfg.clone();
        dup.gates.push(cfg.gates[0].clone());
        assert!(matches!(decamouflage(&camo, &dup), Err(CamoError::DuplicateEntry(_))));
    }

    #[test]
    fn decamouflage_single_literal_functions() {
        let camo = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = CAMO(a, b)\n").unwrap();
        for f in TruthTable2::all() {
            let cfg = CamoConfig {
                params: p(),
                gates: vec![CamoGateEntry::new("y", f, 2.0, 10.0)],
            };
            match decamouflage(&camo, &cfg) {
                Ok(plain) => {
                    for v in 0..4 {
                        let x = vector_from_index(2, v);
                        assert_eq!(
                            eval_logic(&plain, &x, &Bindings::new()).unwrap(),
                            vec![f.eval(x[0], x[1])]
                        );
                    }
                }
                Err(e) => {
                    assert!(matches!(e, CamoError::NoPrimitive { .. }));
                    assert!(matches!(f.bits(), 0b0000 | 0b0010 | 0b0100 | 0b1011 | 0b1101 | 0b1111));
                }
            }
        }
    }

    #[test]
    fn config_json_shape_and_validation() {
        let (_, cfg) = camouflage(&c17(), &explicit(&["11"]), 2.0, 10.0, &p()).unwrap();
        let json = cfg.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let g = &v["gates"][0];
        assert_eq!(g["name"], "11");
        assert_eq!(g["function_name"], "NAND");
        assert_eq!(g["function_bits"], 14);
        assert_eq!(g["assignment"], serde_json::json!([true, true, true, false]));
        assert_eq!(g["ph_low"], 2.0);
        assert_eq!(g["ph_high"], 10.0);
        assert_eq!(v["params"]["sensitivity"], 0.059);
        assert_eq!(CamoConfig::from_json(&json).unwrap(), cfg);

        let tampered = json.replace("\"function_bits\": 14", "\"function_bits\": 6");
        assert!(matches!(
            CamoConfig::from_json(&tampered),
            Err(CamoError::InvalidConfig(_))
        ));
        let swapped = json.replace("\"ph_low\": 2.0", "\"ph_low\": 12.0");
        assert!(CamoConfig::from_json(&swapped).is_err());
        assert!(CamoConfig::from_json("{").is_err());
    }

    #[test]
    fn verify_examples() {
        let n = c17();
        let (camo, cfg) = camouflage(&n, &explicit(&["16", "22"]), 2.0, 10.0, &p()).unwrap();
        let bind = cfg.bindings().unwrap();
        let v = verify_equivalence(&n, &camo, &bind, EquivalenceMode::Exhaustive).unwrap();
        assert_eq!(
            v,
            Verdict::Equivalent {
                vectors: 32,
                exhaustive: true
            }
        );
        assert_eq!(v.to_string(), "equivalent (32/32 vectors)");
        assert!(
            verify_equivalence(&n, &n, &Bindings::new(), EquivalenceMode::Exhaustive)
                .unwrap()
                .is_equivalent()
        );

        let mut wrong = bind.clone();
        wrong.insert("16".into(), TruthTable2::NOR);
        let v = verify_equivalence(&n, &camo, &wrong, EquivalenceMode::Exhaustive).unwrap();
        let Verdict::Counterexample {
            inputs, left, right, ..
        } = v
        else {
            panic!("expected counterexample")
        };
        let l = eval_logic(&n, &inputs, &Bindings::new()).unwrap();
        let r = eval_logic(&camo, &inputs, &wrong).unwrap();
        assert_eq!((l.clone(), r.clone()), (left, right));
        assert_ne!(l, r);

        let v = verify_equivalence(&n, &camo, &bind, EquivalenceMode::Random { vectors: 100, seed: 3 }).unwrap();
        assert_eq!(v.to_string(), "no counterexample in 100 vectors");
        let v = verify_equivalence(&n, &camo, &wrong, EquivalenceMode::Random { vectors: 1000, seed: 3 }).unwrap();
        assert!(!v.is_equivalent());
    }

    #[test]
    fn verify_signature_and_limits() {
        let a = parse_bench("INPUT(a)\nOUTPUT(a)\n").unwrap();
        let b = parse_bench("INPUT(b)\nOUTPUT(b)\n").unwrap();
        assert!(matches!(
            verify_equivalence(&a, &b, &Bindings::new(), EquivalenceMode::Exhaustive),
            Err(CamoError::SignatureMismatch(_))
        ));
        let wide: String = (0..25).map(|i| format!("INPUT(x{i})\n")).collect::<String>() + "OUTPUT(x0)\n";
        let w = parse_bench(&wide).unwrap();
        assert_eq!(
            verify_equivalence(&w, &w, &Bindings::new(), EquivalenceMode::Exhaustive),
            Err(CamoError::TooManyInputs(25))
        );
        assert!(verify_equivalence(
            &w,
            &w,
            &Bindings::new(),
            EquivalenceMode::Random { vectors: 500, seed: 1 }
        )
        .unwrap()
        .is_equivalent());
    }

    #[test]
    fn file_leaks_no_function_bits() {
        // Same structure, different functions at the camouflaged sites.
        let a = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nt = AND(a, b)\ny = XOR(t, c)\n").unwrap();
        let b = parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nt = NOR(a, b)\ny = XNOR(t, c)\n").unwrap();
        let pol = explicit(&["t", "y"]);
        let (ca, fa) = camouflage(&a, &pol, 2.0, 10.0, &p()).unwrap();
        let (cb, fb) = camouflage(&b, &pol, 2.0, 10.0, &p()).unwrap();
        assert_eq!(serialize_bench(&ca), serialize_bench(&cb));
        assert_ne!(fa, fb);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bound_camo_is_equivalent(seed in any::<u64>(), n_in in 1usize..=12, n_g in 1usize..=30, rate in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = random_netlist(&mut rng, &RandomNetlistSpec { inputs: n_in, gates: n_g, outputs: 2, max_fanin: 3 });
            let (camo, cfg) = camouflage(&n, &SelectionPolicy::Fraction { rate, seed }, 2.0, 10.0, &p()).unwrap();
            let v = verify_equivalence(&n, &camo, &cfg.bindings().unwrap(), EquivalenceMode::Exhaustive).unwrap();
            prop_assert!(v.is_equivalent());
            prop_assert_eq!(decamouflage(&camo, &cfg).unwrap(), n);
        }
    }
}
