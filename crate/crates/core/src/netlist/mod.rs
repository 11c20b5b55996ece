//! Combinational gate-level netlists.
//!
//! A [`Netlist`] is validated on construction: every net has one driver,
//! every fan-in is defined, arities match and the gate graph is acyclic. After
//! that it is immutable. Evaluation is bit-parallel, 64 input vectors per
//! pass, with `CAMO` gates taking their function from a binding table.

mod bench;
pub mod random;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::gate::TruthTable2;

pub use bench::{parse_bench, serialize_bench};

/// ISCAS-85 c17.
pub const C17_BENCH: &str = "\
# c17
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
";

/// Functions bound to camouflaged gates, by gate (output net) name.
pub type Bindings = BTreeMap<String, TruthTable2>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    /// Camouflaged 2-input cell whose function is set by pH programming.
    Camo,
}

impl GateKind {
    pub const BINARY: [GateKind; 6] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
    ];

    pub fn token(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Camo => "CAMO",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "NAND" => GateKind::Nand,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" => GateKind::Not,
            "BUF" | "BUFF" => GateKind::Buf,
            "CAMO" => GateKind::Camo,
            _ => return None,
        })
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => n == 1,
            GateKind::Camo => n == 2,
            _ => n >= 2,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            GateKind::Not | GateKind::Buf => "1",
            GateKind::Camo => "2",
            _ => "at least 2",
        }
    }

    /// Truth table of a 2-input instance of this kind.
    pub fn truth_table(self) -> Option<TruthTable2> {
        Some(match self {
            GateKind::And => TruthTable2::AND,
            GateKind::Or => TruthTable2::OR,
            GateKind::Nand => TruthTable2::NAND,
            GateKind::Nor => TruthTable2::NOR,
            GateKind::Xor => TruthTable2::XOR,
            GateKind::Xnor => TruthTable2::XNOR,
            _ => return None,
        })
    }

    pub fn from_truth_table(f: TruthTable2) -> Option<Self> {
        Self::BINARY.into_iter().find(|k| k.truth_table() == Some(f))
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    /// Output net name; also the instance name.
    pub name: String,
    pub kind: GateKind,
    pub fanin: Vec<String>,
}

impl Gate {
    pub fn new(name: impl Into<String>, kind: GateKind, fanin: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind,
            fanin: fanin.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Gate(usize),
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

/// Optional location prefix for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct At(pub Option<Location>);

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(loc) => write!(f, "{loc}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetlistError {
    #[error("{at}syntax error: {msg}")]
    Syntax { msg: String, at: At },
    #[error("{at}invalid net name {name:?}")]
    InvalidName { name: String, at: At },
    #[error("{at}unknown gate kind {kind}")]
    UnknownGateKind { kind: String, at: At },
    #[error("{at}duplicate driver for net {net}")]
    DuplicateDriver { net: String, at: At },
    #[error("{at}undefined net {net}")]
    UndefinedNet { net: String, at: At },
    #[error("{at}gate {gate}: {kind} takes {expected} input(s), got {got}")]
    Arity {
        gate: String,
        kind: GateKind,
        expected: &'static str,
        got: usize,
        at: At,
    },
    #[error("{at}combinational cycle through net {net}")]
    Cycle { net: String, at: At },
    #[error("unprogrammed camouflaged gate {0}")]
    Unprogrammed(String),
    #[error("expected {expected} input values, got {got}")]
    InputLength { expected: usize, got: usize },
}

/// Source positions gathered by the parser, used only for diagnostics.
#[derive(Debug, Default, Clone)]
pub(crate) struct SourceMap {
    pub inputs: Vec<Location>,
    pub outputs: Vec<Location>,
    /// Per gate: statement location and one location per fan-in token.
    pub gates: Vec<(Location, Vec<Location>)>,
}

impl SourceMap {
    fn input(&self, i: usize) -> At {
        At(self.inputs.get(i).copied())
    }
    fn output(&self, i: usize) -> At {
        At(self.outputs.get(i).copied())
    }
    fn gate(&self, g: usize) -> At {
        At(self.gates.get(g).map(|x| x.0))
    }
    fn fanin(&self, g: usize, k: usize) -> At {
        At(self.gates.get(g).and_then(|x| x.1.get(k).copied()))
    }
}

pub fn is_valid_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_')
}

#[derive(Debug, Clone)]
pub struct Netlist {
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<Gate>,
    drivers: HashMap<String, Driver>,
    /// Gate indices in topological order.
    order: Vec<usize>,
    /// Fan-in as net slots: inputs first, then gates by index.
    fanin_slots: Vec<Vec<usize>>,
    output_slots: Vec<usize>,
}

impl PartialEq for Netlist {
    /// Structural equality: same I/O lists and same gates in the same order.
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs && self.gates == other.gates
    }
}

impl Eq for Netlist {}

impl Netlist {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, gates: Vec<Gate>) -> Result<Self, NetlistError> {
        Self::build(inputs, outputs, gates, &SourceMap::default())
    }

    pub(crate) fn build(
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
        src: &SourceMap,
    ) -> Result<Self, NetlistError> {
        for (i, name) in inputs.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(NetlistError::InvalidName {
                    name: name.clone(),
                    at: src.input(i),
                });
            }
        }
        for (i, name) in outputs.iter().enumerate() {
            if !is_valid_name(name) {
                return Err(NetlistError::InvalidName {
                    name: name.clone(),
                    at: src.output(i),
                });
            }
        }
        for (g, gate) in gates.iter().enumerate() {
            if !is_valid_name(&gate.name) {
                return Err(NetlistError::InvalidName {
                    name: gate.name.clone(),
                    at: src.gate(g),
                });
            }
            if let Some((k, bad)) = gate.fanin.iter().enumerate().find(|(_, f)| !is_valid_name(f)) {
                return Err(NetlistError::InvalidName {
                    name: bad.clone(),
                    at: src.fanin(g, k),
                });
            }
            if !gate.kind.arity_ok(gate.fanin.len()) {
                return Err(NetlistError::Arity {
                    gate: gate.name.clone(),
                    kind: gate.kind,
                    expected: gate.kind.arity_text(),
                    got: gate.fanin.len(),
                    at: src.gate(g),
                });
            }
        }

        let mut drivers = HashMap::with_capacity(inputs.len() + gates.len());
        for (i, name) in inputs.iter().enumerate() {
            if drivers.insert(name.clone(), Driver::Input(i)).is_some() {
                return Err(NetlistError::DuplicateDriver {
                    net: name.clone(),
                    at: src.input(i),
                });
            }
        }
        for (g, gate) in gates.iter().enumerate() {
            if drivers.insert(gate.name.clone(), Driver::Gate(g)).is_some() {
                return Err(NetlistError::DuplicateDriver {
                    net: gate.name.clone(),
                    at: src.gate(g),
                });
            }
        }

        let slot = |d: Driver| match d {
            Driver::Input(i) => i,
            Driver::Gate(g) => inputs.len() + g,
        };
        let mut fanin_slots = Vec::with_capacity(gates.len());
        for (g, gate) in gates.iter().enumerate() {
            let mut slots = Vec::with_capacity(gate.fanin.len());
            for (k, net) in gate.fanin.iter().enumerate() {
                match drivers.get(net) {
                    Some(d) => slots.push(slot(*d)),
                    None => {
                        return Err(NetlistError::UndefinedNet {
                            net: net.clone(),
                            at: src.fanin(g, k),
                        })
                    }
                }
            }
            fanin_slots.push(slots);
        }
        let mut output_slots = Vec::with_capacity(outputs.len());
        for (i, net) in outputs.iter().enumerate() {
            match drivers.get(net) {
                Some(d) => output_slots.push(slot(*d)),
                None => {
                    return Err(NetlistError::UndefinedNet {
                        net: net.clone(),
                        at: src.output(i),
                    })
                }
            }
        }

        let order = topo_order(inputs.len(), &fanin_slots).map_err(|g| NetlistError::Cycle {
            net: gates[g].name.clone(),
            at: src.gate(g),
        })?;

        Ok(Self {
            inputs,
            outputs,
            gates,
            drivers,
            order,
            fanin_slots,
            output_slots,
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn driver(&self, net: &str) -> Option<Driver> {
        self.drivers.get(net).copied()
    }

    pub fn gate_index(&self, name: &str) -> Option<usize> {
        match self.driver(name)? {
            Driver::Gate(g) => Some(g),
            Driver::Input(_) => None,
        }
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.order
    }

    /// Indices of `CAMO` gates, in file order.
    pub fn camo_gates(&self) -> Vec<usize> {
        (0..self.gates.len())
            .filter(|&g| self.gates[g].kind == GateKind::Camo)
            .collect()
    }

    /// Same primary I/O over a new gate list. Revalidates.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Self, NetlistError> {
        Self::new(self.inputs.clone(), self.outputs.clone(), gates)
    }

    /// Looks up a function for every `CAMO` gate, indexed by gate.
    pub fn camo_functions(&self, bindings: &Bindings) -> Result<Vec<Option<TruthTable2>>, NetlistError> {
        self.gates
            .iter()
            .map(|g| match g.kind {
                GateKind::Camo => bindings
                    .get(&g.name)
                    .copied()
                    .map(Some)
                    .ok_or_else(|| NetlistError::Unprogrammed(g.name.clone())),
                _ => Ok(None),
            })
            .collect()
    }

    /// Evaluates 64 input vectors at once. `inputs[i]` holds lane bits for
    /// primary input `i`; `camo` comes from [`Netlist::camo_functions`].
    /// `values` is scratch space and ends up holding every net.
    pub fn eval_lanes_into(&self, camo: &[Option<TruthTable2>], inputs: &[u64], values: &mut Vec<u64>) {
        debug_assert_eq!(inputs.len(), self.inputs.len());
        values.clear();
        values.extend_from_slice(inputs);
        values.resize(self.inputs.len() + self.gates.len(), 0);
        let n_in = self.inputs.len();
        for &g in &self.order {
            let f = &self.fanin_slots[g];
            let v = |k: usize| values[f[k]];
            let r = match self.gates[g].kind {
                GateKind::And => f.iter().fold(!0, |acc, &s| acc & values[s]),
                GateKind::Or => f.iter().fold(0, |acc, &s| acc | values[s]),
                GateKind::Nand => !f.iter().fold(!0, |acc, &s| acc & values[s]),
                GateKind::Nor => !f.iter().fold(0, |acc, &s| acc | values[s]),
                GateKind::Xor => f.iter().fold(0, |acc, &s| acc ^ values[s]),
                GateKind::Xnor => !f.iter().fold(0, |acc, &s| acc ^ values[s]),
                GateKind::Not => !v(0),
                GateKind::Buf => v(0),
                GateKind::Camo => {
                    let tt = camo[g].expect("camo gate without a bound function");
                    tt.eval_lanes(v(0), v(1))
                }
            };
            values[n_in + g] = r;
        }
    }

    pub fn output_lanes(&self, values: &[u64]) -> Vec<u64> {
        self.output_slots.iter().map(|&s| values[s]).collect()
    }

    pub fn eval_lanes(&self, camo: &[Option<TruthTable2>], inputs: &[u64]) -> Vec<u64> {
        let mut values = Vec::new();
        self.eval_lanes_into(camo, inputs, &mut values);
        self.output_lanes(&values)
    }
}

/// Kahn's algorithm, ties broken by file order. On a cycle returns the index
/// of a gate that lies on it.
fn topo_order(n_inputs: usize, fanin_slots: &[Vec<usize>]) -> Result<Vec<usize>, usize> {
    let n = fanin_slots.len();
    let mut indeg = vec![0usize; n];
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, slots) in fanin_slots.iter().enumerate() {
        for &s in slots {
            if s >= n_inputs {
                indeg[g] += 1;
                fanout[s - n_inputs].push(g);
            }
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&g| indeg[g] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(g) = ready.pop_first() {
        order.push(g);
        for &h in &fanout[g] {
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.insert(h);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover gate has a leftover fan-in; walking back must revisit.
    let mut seen = vec![false; n];
    let mut g = (0..n).find(|&g| indeg[g] > 0).expect("leftover gate");
    while !seen[g] {
        seen[g] = true;
        g = fanin_slots[g]
            .iter()
            .filter(|&&s| s >= n_inputs && indeg[s - n_inputs] > 0)
            .map(|&s| s - n_inputs)
            .next()
            .expect("leftover gate has a leftover fan-in");
    }
    Err(g)
}

/// Evaluates one input vector.
pub fn eval_logic(n: &Netlist, inputs: &[bool], bindings: &Bindings) -> Result<Vec<bool>, NetlistError> {
    if inputs.len() != n.inputs().len() {
        return Err(NetlistError::InputLength {
            expected: n.inputs().len(),
            got: inputs.len(),
        });
    }
    let camo = n.camo_functions(bindings)?;
    let lanes: Vec<u64> = inputs.iter().map(|&b| b as u64).collect();
    Ok(n.eval_lanes(&camo, &lanes).into_iter().map(|w| w & 1 == 1).collect())
}

/// Lane words for input vectors `base .. base + 64`, where bit `i` of the
/// vector index drives primary input `i`.
pub fn counting_lanes(n_inputs: usize, base: u64) -> Vec<u64> {
    (0..n_inputs)
        .map(|i| {
            let mut w = 0u64;
            for lane in 0..64u64 {
                if ((base + lane) >> i) & 1 == 1 {
                    w |= 1 << lane;
                }
            }
            w
        })
        .collect()
}

/// Input vector for a counting index, bit `i` driving input `i`.
pub fn vector_from_index(n_inputs: usize, index: u64) -> Vec<bool> {
    (0..n_inputs).map(|i| (index >> i) & 1 == 1).collect()
}
