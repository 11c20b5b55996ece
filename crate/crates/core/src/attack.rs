//! Reverse-engineering attack models.
//!
//! Threat model: the attacker holds the camouflaged netlist (recovered by
//! delayering and imaging) and, for the oracle attack, a working chip used as
//! a black-box I/O oracle. The pH programming is never visible.
//!
//! * [`profiling_attack`] reads threshold assignments off the die. Implanted
//!   thresholds (conventional TVD) are exposed by dopant profiling;
//!   electrolyte-defined thresholds (ISFET-TVD) leave nothing in the silicon.
//! * [`oracle_attack`] prunes candidate functions for the `CAMO` cells by
//!   comparing the candidate circuit with the oracle on queried inputs. Up to
//!   `joint_limit` joint candidates are enumerated exactly; beyond that an
//!   optional per-gate pass uses three-valued simulation, which can only
//!   discard a candidate when the mismatch holds whatever the other cells do.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camouflage::{CamoConfig, MAX_EXHAUSTIVE_INPUTS};
use crate::gate::{function_of, BranchAssignment, TruthTable2};
use crate::netlist::{counting_lanes, Bindings, GateKind, Netlist, NetlistError};

pub const DEFAULT_JOINT_LIMIT: u64 = 65_536;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("{gates} camouflaged gates give {candidates} joint candidates, above the limit of {limit}; enable marginal fallback or raise the limit")]
    Capacity { gates: usize, candidates: u128, limit: u64 },
    #[error("exhaustive queries need at most {MAX_EXHAUSTIVE_INPUTS} inputs, netlist has {0}")]
    TooManyInputs(usize),
    #[error("oracle I/O does not match the camouflaged netlist: {0}")]
    SignatureMismatch(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// How a gate's threshold voltages were set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMechanism {
    /// Mask-programmed implants; readable by dopant profiling.
    Implant,
    /// Post-fabrication electrolyte; nothing to read in the silicon.
    Electrolyte,
}

/// Per-gate threshold mechanism of a build. Fixed once constructed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeviceVisibility {
    tags: BTreeMap<String, ThresholdMechanism>,
}

impl DeviceVisibility {
    /// Every `CAMO` gate built the same way.
    pub fn uniform(camo: &Netlist, mechanism: ThresholdMechanism) -> Self {
        let tags = camo
            .camo_gates()
            .into_iter()
            .map(|g| (camo.gates()[g].name.clone(), mechanism))
            .collect();
        Self { tags }
    }

    /// Conventional TVD: all cells implant-programmed.
    pub fn conventional_tvd(camo: &Netlist) -> Self {
        Self::uniform(camo, ThresholdMechanism::Implant)
    }

    /// ISFET-TVD: all cells electrolyte-programmed.
    pub fn isfet_tvd(camo: &Netlist) -> Self {
        Self::uniform(camo, ThresholdMechanism::Electrolyte)
    }

    pub fn from_tags(tags: BTreeMap<String, ThresholdMechanism>) -> Self {
        Self { tags }
    }

    pub fn tag(&self, gate: &str) -> Option<ThresholdMechanism> {
        self.tags.get(gate).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateResolution {
    Resolved(TruthTable2),
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilingResult {
    /// One entry per `CAMO` gate, in file order.
    pub gates: Vec<(String, GateResolution)>,
}

impl ProfilingResult {
    pub fn resolved_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|(_, r)| matches!(r, GateResolution::Resolved(_)))
            .count()
    }

    /// 1.0 when there is nothing to resolve.
    pub fn resolved_fraction(&self) -> f64 {
        if self.gates.is_empty() {
            1.0
        } else {
            self.resolved_count() as f64 / self.gates.len() as f64
        }
    }

    /// Functions recovered so far.
    pub fn bindings(&self) -> Bindings {
        self.gates
            .iter()
            .filter_map(|(n, r)| match r {
                GateResolution::Resolved(f) => Some((n.clone(), *f)),
                GateResolution::Unresolved => None,
            })
            .collect()
    }
}

/// Reads each cell's LVT/HVT layout off the physical die `die`.
///
/// Implant-tagged cells resolve through [`function_of`]; electrolyte-tagged
/// or untagged cells, and cells missing from `die`, stay unresolved.
pub fn profiling_attack(camo: &Netlist, die: &CamoConfig, vis: &DeviceVisibility) -> ProfilingResult {
    let gates = camo
        .camo_gates()
        .into_iter()
        .map(|g| {
            let name = &camo.gates()[g].name;
            let readable = vis.tag(name) == Some(ThresholdMechanism::Implant);
            let res = match die.gates.iter().find(|e| &e.name == name) {
                Some(entry) if readable => GateResolution::Resolved(function_of(BranchAssignment {
                    lvt_on_out_side: entry.assignment,
                })),
                _ => GateResolution::Unresolved,
            };
            (name.clone(), res)
        })
        .collect();
    ProfilingResult { gates }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStrategy {
    /// All `2^inputs` vectors in counting order.
    ExhaustiveInputs,
    Random {
        queries: u64,
        seed: u64,
    },
}

impl QueryStrategy {
    pub fn label(&self) -> String {
        match self {
            QueryStrategy::ExhaustiveInputs => "exhaustive".into(),
            QueryStrategy::Random { queries, seed } => format!("random({queries},seed={seed})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackOptions {
    pub strategy: QueryStrategy,
    pub joint_limit: u64,
    /// Fall back to per-gate pruning instead of failing above `joint_limit`.
    pub marginal_fallback: bool,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self {
            strategy: QueryStrategy::ExhaustiveInputs,
            joint_limit: DEFAULT_JOINT_LIMIT,
            marginal_fallback: false,
        }
    }
}

/// A working chip: the netlist plus whatever programs its `CAMO` cells.
#[derive(Debug, Clone, Copy)]
pub struct Oracle<'a> {
    pub netlist: &'a Netlist,
    pub bindings: &'a Bindings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub inputs: Vec<bool>,
    pub outputs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateState {
    pub camo_gates: Vec<String>,
    /// Joint survivors were enumerated exactly (otherwise counts are the
    /// product of per-gate marginals, an upper bound).
    pub exact: bool,
    /// Surviving joint assignments; nibble `i` is the function of gate `i`.
    /// Empty unless `exact`.
    pub survivors: Vec<u64>,
    pub marginals: Vec<BTreeSet<TruthTable2>>,
    /// Joint survivor count after `q` queries, `q = 0..=queries`.
    pub history: Vec<u128>,
    pub queries: Vec<QueryRecord>,
}

pub fn decode_joint(code: u64, gates: usize) -> Vec<TruthTable2> {
    (0..gates)
        .map(|i| TruthTable2::new(((code >> (4 * i)) & 0xf) as u8).expect("nibble"))
        .collect()
}

pub fn encode_joint(funcs: &[TruthTable2]) -> u64 {
    funcs
        .iter()
        .enumerate()
        .fold(0, |acc, (i, f)| acc | (f.bits() as u64) << (4 * i))
}

impl CandidateState {
    pub fn joint_survivors(&self) -> u128 {
        *self.history.last().expect("history has the initial count")
    }

    pub fn ambiguity_bits(&self) -> f64 {
        if self.exact {
            (self.joint_survivors() as f64).log2()
        } else {
            self.marginals.iter().map(|m| (m.len() as f64).log2()).sum()
        }
    }

    /// Queries after which the survivor count stopped changing.
    pub fn queries_to_resolution(&self) -> u64 {
        let last = self.joint_survivors();
        self.history.iter().position(|&c| c == last).unwrap_or(0) as u64
    }

    pub fn resolved_gate_fraction(&self) -> f64 {
        if self.marginals.is_empty() {
            1.0
        } else {
            self.marginals.iter().filter(|m| m.len() == 1).count() as f64 / self.marginals.len() as f64
        }
    }

    pub fn survivor_bindings(&self) -> impl Iterator<Item = Bindings> + '_ {
        self.survivors.iter().map(|&code| {
            self.camo_gates
                .iter()
                .cloned()
                .zip(decode_joint(code, self.camo_gates.len()))
                .collect()
        })
    }

    pub fn contains(&self, truth: &Bindings) -> bool {
        let funcs: Option<Vec<TruthTable2>> = self.camo_gates.iter().map(|g| truth.get(g).copied()).collect();
        let Some(funcs) = funcs else { return false };
        if self.exact {
            self.survivors.contains(&encode_joint(&funcs))
        } else {
            funcs.iter().zip(&self.marginals).all(|(f, m)| m.contains(f))
        }
    }
}

/// Query vectors in blocks of 64 lanes: (input lane words, live lane mask).
fn query_blocks(n_in: usize, strategy: QueryStrategy) -> Result<Vec<(Vec<u64>, u64)>, AttackError> {
    let live = |count: u64| if count >= 64 { !0u64 } else { (1u64 << count) - 1 };
    let mut blocks = Vec::new();
    match strategy {
        QueryStrategy::ExhaustiveInputs => {
            if n_in > MAX_EXHAUSTIVE_INPUTS {
                return Err(AttackError::TooManyInputs(n_in));
            }
            let total = 1u64 << n_in;
            let mut base = 0;
            while base < total {
                blocks.push((counting_lanes(n_in, base), live(total - base)));
                base += 64;
            }
        }
        QueryStrategy::Random { queries, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut base = 0;
            while base < queries {
                blocks.push(((0..n_in).map(|_| rng.gen()).collect(), live(queries - base)));
                base += 64;
            }
        }
    }
    Ok(blocks)
}

fn lane(words: &[u64], k: u32) -> Vec<bool> {
    words.iter().map(|w| (w >> k) & 1 == 1).collect()
}

/// Oracle-guided pruning of the `CAMO` cell functions of `camo`.
pub fn oracle_attack(camo: &Netlist, oracle: Oracle<'_>, opts: &AttackOptions) -> Result<CandidateState, AttackError> {
    if camo.inputs() != oracle.netlist.inputs() || camo.outputs() != oracle.netlist.outputs() {
        return Err(AttackError::SignatureMismatch(format!(
            "{} in/{} out vs {} in/{} out",
            camo.inputs().len(),
            camo.outputs().len(),
            oracle.netlist.inputs().len(),
            oracle.netlist.outputs().len()
        )));
    }
    let cells = camo.camo_gates();
    let g = cells.len();
    let camo_gates: Vec<String> = cells.iter().map(|&i| camo.gates()[i].name.clone()).collect();
    let all: BTreeSet<TruthTable2> = TruthTable2::all().collect();

    let candidates: u128 = 16u128.checked_pow(g as u32).unwrap_or(u128::MAX);
    let exact = candidates <= opts.joint_limit as u128;
    if !exact && !opts.marginal_fallback {
        return Err(AttackError::Capacity {
            gates: g,
            candidates,
            limit: opts.joint_limit,
        });
    }

    let n_in = camo.inputs().len();
    let blocks = query_blocks(n_in, opts.strategy)?;
    let oracle_funcs = oracle.netlist.camo_functions(oracle.bindings)?;
    let oracle_out: Vec<Vec<u64>> = blocks
        .iter()
        .map(|(lanes, _)| oracle.netlist.eval_lanes(&oracle_funcs, lanes))
        .collect();
    let mut queries = Vec::new();
    for ((lanes, live), outs) in blocks.iter().zip(&oracle_out) {
        for k in 0..(64 - live.leading_zeros()) {
            queries.push(QueryRecord {
                inputs: lane(lanes, k),
                outputs: lane(outs, k),
            });
        }
    }

    if g == 0 {
        // Nothing hidden: the single empty assignment survives every query.
        return Ok(CandidateState {
            camo_gates,
            exact: true,
            survivors: vec![0],
            marginals: Vec::new(),
            history: vec![1; queries.len() + 1],
            queries,
        });
    }

    if exact {
        let total = candidates as u64;
        // Query index at which each candidate is first contradicted.
        let killed_at: Vec<Option<usize>> = (0..total)
            .into_par_iter()
            .map_init(
                || (vec![None; camo.gates().len()], Vec::new()),
                |(funcs, scratch), code| {
                    for (i, f) in decode_joint(code, g).into_iter().enumerate() {
                        funcs[cells[i]] = Some(f);
                    }
                    for (b, ((lanes, live), want)) in blocks.iter().zip(&oracle_out).enumerate() {
                        camo.eval_lanes_into(funcs, lanes, scratch);
                        let got = camo.output_lanes(scratch);
                        let bad = got.iter().zip(want).fold(0, |m, (x, y)| m | (x ^ y)) & live;
                        if bad != 0 {
                            return Some(b * 64 + bad.trailing_zeros() as usize);
                        }
                    }
                    None
                },
            )
            .collect();
        let mut drops = vec![0u128; queries.len()];
        for q in killed_at.iter().flatten() {
            drops[*q] += 1;
        }
        let mut history = Vec::with_capacity(queries.len() + 1);
        let mut alive = candidates;
        history.push(alive);
        for d in drops {
            alive -= d;
            history.push(alive);
        }
        let survivors: Vec<u64> = (0..total).filter(|&c| killed_at[c as usize].is_none()).collect();
        let mut marginals = vec![BTreeSet::new(); g];
        for &code in &survivors {
            for (i, f) in decode_joint(code, g).into_iter().enumerate() {
                marginals[i].insert(f);
            }
        }
        return Ok(CandidateState {
            camo_gates,
            exact: true,
            survivors,
            marginals,
            history,
            queries,
        });
    }

    let mut marginals = vec![all; g];
    let product = |m: &[BTreeSet<TruthTable2>]| m.iter().fold(1u128, |p, s| p.saturating_mul(s.len() as u128));
    let mut history = vec![product(&marginals)];
    for q in &queries {
        loop {
            let mut changed = false;
            for i in 0..g {
                let keep: BTreeSet<TruthTable2> = marginals[i]
                    .iter()
                    .copied()
                    .filter(|&f| !ternary_contradicts(camo, &cells, &marginals, i, f, q))
                    .collect();
                if keep.len() != marginals[i].len() {
                    marginals[i] = keep;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        history.push(product(&marginals));
    }
    Ok(CandidateState {
        camo_gates,
        exact: false,
        survivors: Vec::new(),
        marginals,
        history,
        queries,
    })
}

/// Three-valued net value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    Zero,
    One,
    X,
}

impl Tri {
    fn of(b: bool) -> Self {
        if b {
            Tri::One
        } else {
            Tri::Zero
        }
    }

    fn not(self) -> Self {
        match self {
            Tri::Zero => Tri::One,
            Tri::One => Tri::Zero,
            Tri::X => Tri::X,
        }
    }

    fn options(self) -> &'static [bool] {
        match self {
            Tri::Zero => &[false],
            Tri::One => &[true],
            Tri::X => &[false, true],
        }
    }
}

/// True when fixing cell `target` to `f` mismatches the oracle on `q` no
/// matter which surviving functions the other cells take.
fn ternary_contradicts(
    camo: &Netlist,
    cells: &[usize],
    marginals: &[BTreeSet<TruthTable2>],
    target: usize,
    f: TruthTable2,
    q: &QueryRecord,
) -> bool {
    let n_in = camo.inputs().len();
    let mut val: Vec<Tri> = q.inputs.iter().map(|&b| Tri::of(b)).collect();
    val.resize(n_in + camo.gates().len(), Tri::X);
    let slot = |net: &str| -> usize {
        match camo.driver(net).expect("validated netlist") {
            crate::netlist::Driver::Input(i) => i,
            crate::netlist::Driver::Gate(g) => n_in + g,
        }
    };
    for &gi in camo.topo_order() {
        let gate = &camo.gates()[gi];
        let ins: Vec<Tri> = gate.fanin.iter().map(|n| val[slot(n)]).collect();
        let out = match gate.kind {
            GateKind::And | GateKind::Nand => {
                let v = if ins.contains(&Tri::Zero) {
                    Tri::Zero
                } else if ins.iter().all(|&t| t == Tri::One) {
                    Tri::One
                } else {
                    Tri::X
                };
                if gate.kind == GateKind::Nand {
                    v.not()
                } else {
                    v
                }
            }
            GateKind::Or | GateKind::Nor => {
                let v = if ins.contains(&Tri::One) {
                    Tri::One
                } else if ins.iter().all(|&t| t == Tri::Zero) {
                    Tri::Zero
                } else {
                    Tri::X
                };
                if gate.kind == GateKind::Nor {
                    v.not()
                } else {
                    v
                }
            }
            GateKind::Xor | GateKind::Xnor => {
                let v = if ins.contains(&Tri::X) {
                    Tri::X
                } else {
                    Tri::of(ins.iter().filter(|&&t| t == Tri::One).count() % 2 == 1)
                };
                if gate.kind == GateKind::Xnor {
                    v.not()
                } else {
                    v
                }
            }
            GateKind::Not => ins[0].not(),
            GateKind::Buf => ins[0],
            GateKind::Camo => {
                let k = cells.iter().position(|&c| c == gi).expect("camo cell index");
                let single = [f];
                let funcs: &mut dyn Iterator<Item = &TruthTable2> = if k == target {
                    &mut single.iter()
                } else {
                    &mut marginals[k].iter()
                };
                let mut seen = [false; 2];
                for func in funcs {
                    for &a in ins[0].options() {
                        for &b in ins[1].options() {
                            seen[func.eval(a, b) as usize] = true;
                        }
                    }
                }
                match seen {
                    [true, false] => Tri::Zero,
                    [false, true] => Tri::One,
                    _ => Tri::X,
                }
            }
        };
        val[n_in + gi] = out;
    }
    camo.outputs()
        .iter()
        .zip(&q.outputs)
        .any(|(o, &want)| val[slot(o)] == Tri::of(!want))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub netlist: String,
    pub camo_gates: Vec<String>,
    pub strategy: String,
    pub queries: u64,
    pub joint_survivors: u128,
    pub exact: bool,
    pub ambiguity_bits: f64,
    pub queries_to_resolution: u64,
    pub resolved_gate_fraction: f64,
    pub per_gate_marginals: BTreeMap<String, Vec<String>>,
}

pub fn resilience_report(netlist: &str, strategy: &QueryStrategy, state: &CandidateState) -> AttackReport {
    AttackReport {
        netlist: netlist.to_string(),
        camo_gates: state.camo_gates.clone(),
        strategy: strategy.label(),
        queries: state.queries.len() as u64,
        joint_survivors: state.joint_survivors(),
        exact: state.exact,
        ambiguity_bits: state.ambiguity_bits(),
        queries_to_resolution: state.queries_to_resolution(),
        resolved_gate_fraction: state.resolved_gate_fraction(),
        per_gate_marginals: state
            .camo_gates
            .iter()
            .zip(&state.marginals)
            .map(|(n, m)| (n.clone(), m.iter().map(|f| f.name().to_string()).collect()))
            .collect(),
    }
}

pub const REPORT_CSV_HEADER: &str =
    "netlist,camo_gates,strategy,queries,joint_survivors,exact,ambiguity_bits,queries_to_resolution,resolved_gate_fraction";

pub fn reports_csv(reports: &[AttackReport]) -> String {
    let mut s = String::from(REPORT_CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.6},{},{:.6}",
            r.netlist,
            r.camo_gates.len(),
            r.strategy,
            r.queries,
            r.joint_survivors,
            r.exact,
            r.ambiguity_bits,
            r.queries_to_resolution,
            r.resolved_gate_fraction
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camouflage::{camouflage, verify_equivalence, EquivalenceMode, SelectionPolicy};
    use crate::device::IsfetParams;
    use crate::netlist::random::{random_netlist, RandomNetlistSpec};
    use crate::netlist::{parse_bench, vector_from_index, C17_BENCH};
    use proptest::prelude::*;

    fn c17_camo(names: &[&str]) -> (Netlist, Netlist, CamoConfig) {
        let n = parse_bench(C17_BENCH).unwrap();
        let pol = SelectionPolicy::Explicit(names.iter().map(|s| s.to_string()).collect());
        let (camo, cfg) = camouflage(&n, &pol, 2.0, 10.0, &IsfetParams::default()).unwrap();
        (n, camo, cfg)
    }

    fn no_bindings() -> &'static Bindings {
        static EMPTY: Bindings = Bindings::new();
        &EMPTY
    }

    #[test]
    fn profiling_dichotomy_on_c17() {
        let (n, camo, cfg) = c17_camo(&["10", "11", "16", "19", "22", "23"]);
        let conv = profiling_attack(&camo, &cfg, &DeviceVisibility::conventional_tvd(&camo));
        assert_eq!(conv.resolved_fraction(), 1.0);
        let v = verify_equivalence(&n, &camo, &conv.bindings(), EquivalenceMode::Exhaustive).unwrap();
        assert!(v.is_equivalent());

        let isfet = profiling_attack(&camo, &cfg, &DeviceVisibility::isfet_tvd(&camo));
        assert_eq!(isfet.resolved_count(), 0);
        assert_eq!(isfet.resolved_fraction(), 0.0);
    }

    #[test]
    fn profiling_mixed_tags() {
        let (_, camo, cfg) = c17_camo(&["10", "16", "23"]);
        let tags = BTreeMap::from([
            ("10".to_string(), ThresholdMechanism::Implant),
            ("16".to_string(), ThresholdMechanism::Electrolyte),
            ("23".to_string(), ThresholdMechanism::Implant),
        ]);
        let r = profiling_attack(&camo, &cfg, &DeviceVisibility::from_tags(tags));
        let resolved: Vec<&str> = r
            .gates
            .iter()
            .filter(|(_, g)| matches!(g, GateResolution::Resolved(_)))
            .map(|(n, _)| n.as_str())
            .collect();
        assert_eq!(resolved, ["10", "23"]);
        assert!(r.bindings().values().all(|&f| f == TruthTable2::NAND));
    }

    #[test]
    fn no_camo_gates_is_trivially_resolved() {
        let n = parse_bench(C17_BENCH).unwrap();
        let st = oracle_attack(
            &n,
            Oracle {
                netlist: &n,
                bindings: no_bindings(),
            },
            &AttackOptions::default(),
        )
        .unwrap();
        assert_eq!(st.joint_survivors(), 1);
        assert_eq!(st.queries.len(), 32);
        assert_eq!(st.history, vec![1; 33]);
        assert_eq!(st.ambiguity_bits(), 0.0);
        assert_eq!(st.queries_to_resolution(), 0);
    }

    #[test]
    fn zero_queries_two_gates() {
        let (n, camo, _) = c17_camo(&["16", "22"]);
        let opts = AttackOptions {
            strategy: QueryStrategy::Random { queries: 0, seed: 1 },
            ..Default::default()
        };
        let st = oracle_attack(
            &camo,
            Oracle {
                netlist: &n,
                bindings: no_bindings(),
            },
            &opts,
        )
        .unwrap();
        assert_eq!(st.joint_survivors(), 256);
        assert_eq!(st.ambiguity_bits(), 8.0);
        let r = resilience_report("c17", &opts.strategy, &st);
        assert_eq!(r.ambiguity_bits, 8.0);
        assert_eq!(r.queries, 0);
    }

    /// Independent count: every joint binding, every vector, scalar evaluation.
    fn brute_survivors(orig: &Netlist, camo: &Netlist, names: &[String]) -> Vec<Vec<TruthTable2>> {
        let n_in = orig.inputs().len();
        let mut out = Vec::new();
        let g = names.len();
        for code in 0..16u64.pow(g as u32) {
            let funcs: Vec<TruthTable2> = (0..g)
                .map(|i| TruthTable2::new(((code >> (4 * i)) & 15) as u8).unwrap())
                .collect();
            let bind: Bindings = names.iter().cloned().zip(funcs.iter().copied()).collect();
            let ok = (0..1u64 << n_in).all(|v| {
                let x = vector_from_index(n_in, v);
                crate::netlist::eval_logic(orig, &x, &Bindings::new()).unwrap()
                    == crate::netlist::eval_logic(camo, &x, &bind).unwrap()
            });
            if ok {
                out.push(funcs);
            }
        }
        out
    }

    #[test]
    fn one_gate_exhaustive() {
        let (n, camo, cfg) = c17_camo(&["19"]);
        let st = oracle_attack(
            &camo,
            Oracle {
                netlist: &n,
                bindings: no_bindings(),
            },
            &AttackOptions::default(),
        )
        .unwrap();
        assert_eq!(st.queries.len(), 32);
        assert!(st.joint_survivors() >= 1);
        assert!(st.contains(&cfg.bindings().unwrap()));
        for b in st.survivor_bindings() {
            assert!(verify_equivalence(&n, &camo, &b, EquivalenceMode::Exhaustive)
                .unwrap()
                .is_equivalent());
        }
        let brute = brute_survivors(&n, &camo, &st.camo_gates);
        assert_eq!(st.joint_survivors() as usize, brute.len());
    }

    #[test]
    fn two_gates_exhaustive_matches_brute_force() {
        let (n, camo, cfg) = c17_camo(&["11", "23"]);
        let st = oracle_attack(
            &camo,
            Oracle {
                netlist: &n,
                bindings: no_bindings(),
            },
            &AttackOptions::default(),
        )
        .unwrap();
        let brute = brute_survivors(&n, &camo, &st.camo_gates);
        assert_eq!(st.joint_survivors() as usize, brute.len());
        let expect_bits = (brute.len() as f64).log2();
        assert_eq!(
            resilience_report("c17", &QueryStrategy::ExhaustiveInputs, &st).ambiguity_bits,
            expect_bits
        );
        assert!(st.contains(&cfg.bindings().unwrap()));
        assert!(st.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(st.history[0], 256);
    }

    #[test]
    fn capacity_and_fallback() {
        let (n, camo, cfg) = c17_camo(&["10", "11", "16", "19", "22"]);
        let oracle = Oracle {
            netlist: &n,
            bindings: no_bindings(),
        };
        let err = oracle_attack(&camo, oracle, &AttackOptions::default()).unwrap_err();
        assert!(matches!(err, AttackError::Capacity { gates: 5, .. }));
        let opts = AttackOptions {
            marginal_fallback: true,
            ..Default::default()
        };
        let st = oracle_attack(&camo, oracle, &opts).unwrap();
        assert!(!st.exact);
        assert!(st.contains(&cfg.bindings().unwrap()));
        assert!(st.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(st.joint_survivors() < 16u128.pow(5));
    }

    #[test]
    fn oracle_may_itself_be_camouflaged() {
        let (_, camo, cfg) = c17_camo(&["16", "22"]);
        let truth = cfg.bindings().unwrap();
        let st = oracle_attack(
            &camo,
            Oracle {
                netlist: &camo,
                bindings: &truth,
            },
            &AttackOptions::default(),
        )
        .unwrap();
        assert!(st.contains(&truth));
    }

    #[test]
    fn report_exports() {
        let (n, camo, _) = c17_camo(&["16"]);
        let st = oracle_attack(
            &camo,
            Oracle {
                netlist: &n,
                bindings: no_bindings(),
            },
            &AttackOptions::default(),
        )
        .unwrap();
        let r = resilience_report("c17", &QueryStrategy::ExhaustiveInputs, &st);
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "netlist",
            "camo_gates",
            "strategy",
            "queries",
            "joint_survivors",
            "ambiguity_bits",
            "per_gate_marginals",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let csv = reports_csv(&[r.clone(), r]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(REPORT_CSV_HEADER));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn truth_always_survives(seed in any::<u64>(), n_in in 1usize..=10, n_g in 2usize..=20,
                                 cells in 1usize..=3, queries in 0u64..200, marginal in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = random_netlist(&mut rng, &RandomNetlistSpec { inputs: n_in, gates: n_g, outputs: 2, max_fanin: 2 });
            let rate = cells as f64 / crate::camouflage::eligible_gates(&n).len().max(1) as f64;
            let (camo, cfg) = camouflage(&n, &SelectionPolicy::Fraction { rate: rate.min(1.0), seed }, 2.0, 10.0, &IsfetParams::default()).unwrap();
            let truth = cfg.bindings().unwrap();
            let opts = AttackOptions {
                strategy: QueryStrategy::Random { queries, seed },
                joint_limit: if marginal { 1 } else { DEFAULT_JOINT_LIMIT },
                marginal_fallback: marginal,
            };
            let st = oracle_attack(&camo, Oracle { netlist: &n, bindings: no_bindings() }, &opts).unwrap();
            prop_assert!(st.contains(&truth));
            prop_assert!(st.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(st.history.len() as u64, queries + 1);
        }

        #[test]
        fn exhaustive_survivors_are_equivalent(seed in any::<u64>(), n_in in 1usize..=8, n_g in 2usize..=15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = random_netlist(&mut rng, &RandomNetlistSpec { inputs: n_in, gates: n_g, outputs: 2, max_fanin: 2 });
            let (camo, _) = camouflage(&n, &SelectionPolicy::Fraction { rate: 0.2, seed }, 2.0, 10.0, &IsfetParams::default()).unwrap();
            prop_assume!(camo.camo_gates().len() <= 3);
            let st = oracle_attack(&camo, Oracle { netlist: &n, bindings: no_bindings() }, &AttackOptions::default()).unwrap();
            for b in st.survivor_bindings() {
                prop_assert!(verify_equivalence(&n, &camo, &b, EquivalenceMode::Exhaustive).unwrap().is_equivalent());
            }
        }
    }
}
