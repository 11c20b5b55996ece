//! Static model of the 2-input differential TVD gate.
//!
//! Each side of the differential pull-down network has one series branch per
//! input minterm, and for any input exactly one branch per side conducts. The
//! branch for minterm `m` is LVT on one side and HVT on the mirror side; the
//! LVT side sinks more current and discharges its precharged node first. When
//! the `V_OUT` node loses the race, the output inverter drives `OUT` high.
//!
//! Minterms are indexed `m = 2*A + B`. A [`TruthTable2`] is written as the
//! 4-bit string `f(0) f(1) f(2) f(3)`, so XOR is `0b0110` and AND is `0b0001`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{quadratic_current, DeviceError, IsfetParams, PH_MAX, PH_MIN};

/// Devices stacked in every pull-down branch (one per input literal).
pub const SERIES_STACK_DEPTH: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("unknown function name {0:?}")]
    UnknownFunction(String),
    #[error("truth table value {0} exceeds 4 bits")]
    TruthTableRange(u32),
    #[error("pH program inverted: ph_low {ph_low} > ph_high {ph_high}")]
    InvertedProgram { ph_low: f64, ph_high: f64 },
    #[error("unresolvable gate: V_OUT and V_OUT_BAR branches draw equal current ({current:e} A) for inputs {a}{b}; the camouflaged gate is unprogrammed")]
    Unresolvable { a: u8, b: u8, current: f64 },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// A 2-input Boolean function.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruthTable2(u8);

/// Canonical names, indexed by the 4-bit value.
const CANONICAL_NAMES: [&str; 16] = [
    "FALSE",
    "AND",
    "A_AND_NOT_B",
    "A",
    "NOT_A_AND_B",
    "B",
    "XOR",
    "OR",
    "NOR",
    "XNOR",
    "NOT_B",
    "A_OR_NOT_B",
    "NOT_A",
    "NOT_A_OR_B",
    "NAND",
    "TRUE",
];

const ALIASES: [(&str, u8); 8] = [
    ("ZERO", 0b0000),
    ("ONE", 0b1111),
    ("B_IMPLIES_A", 0b1011),
    ("A_IMPLIES_B", 0b1101),
    ("A_INHIBIT_B", 0b0010),
    ("B_INHIBIT_A", 0b0100),
    ("BUF_A", 0b0011),
    ("BUF_B", 0b0101),
];

impl TruthTable2 {
    pub const FALSE: Self = Self(0b0000);
    pub const AND: Self = Self(0b0001);
    pub const A: Self = Self(0b0011);
    pub const B: Self = Self(0b0101);
    pub const XOR: Self = Self(0b0110);
    pub const OR: Self = Self(0b0111);
    pub const NOR: Self = Self(0b1000);
    pub const XNOR: Self = Self(0b1001);
    pub const NOT_B: Self = Self(0b1010);
    pub const NOT_A: Self = Self(0b1100);
    pub const NAND: Self = Self(0b1110);
    pub const TRUE: Self = Self(0b1111);

    pub fn new(bits: u8) -> Result<Self, GateError> {
        if bits < 16 {
            Ok(Self(bits))
        } else {
            Err(GateError::TruthTableRange(bits as u32))
        }
    }

    pub fn from_fn(f: impl Fn(bool, bool) -> bool) -> Self {
        let mut bits = 0;
        for m in 0..4 {
            if f(m & 2 != 0, m & 1 != 0) {
                bits |= 1 << (3 - m);
            }
        }
        Self(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Output for minterm `m = 2A + B`.
    pub fn output(self, m: usize) -> bool {
        debug_assert!(m < 4);
        (self.0 >> (3 - m)) & 1 == 1
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        self.output(2 * a as usize + b as usize)
    }

    /// Applies the function lane-wise to 64 input pairs at once.
    pub fn eval_lanes(self, a: u64, b: u64) -> u64 {
        let mut r = 0;
        if self.output(0) {
            r |= !a & !b;
        }
        if self.output(1) {
            r |= !a & b;
        }
        if self.output(2) {
            r |= a & !b;
        }
        if self.output(3) {
            r |= a & b;
        }
        r
    }

    pub fn complement(self) -> Self {
        Self(!self.0 & 0xf)
    }

    pub fn name(self) -> &'static str {
        CANONICAL_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..16).map(Self)
    }
}

impl fmt::Debug for TruthTable2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({:04b})", self.name(), self.0)
    }
}

impl fmt::Display for TruthTable2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TruthTable2 {
    type Err = GateError;

    /// Accepts canonical names, aliases, decimal `0..=15`, `0b....` and `0x.`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let upper = t.to_ascii_uppercase().replace('-', "_");
        if let Some(i) = CANONICAL_NAMES.iter().position(|n| *n == upper) {
            return Ok(Self(i as u8));
        }
        if let Some((_, v)) = ALIASES.iter().find(|(n, _)| *n == upper) {
            return Ok(Self(*v));
        }
        let parsed = if let Some(b) = upper.strip_prefix("0B") {
            u32::from_str_radix(b, 2).ok()
        } else if let Some(h) = upper.strip_prefix("0X") {
            u32::from_str_radix(h, 16).ok()
        } else {
            upper.parse::<u32>().ok()
        };
        match parsed {
            Some(v) if v < 16 => Ok(Self(v as u8)),
            Some(v) => Err(GateError::TruthTableRange(v)),
            None => Err(GateError::UnknownFunction(t.to_string())),
        }
    }
}

/// Which side carries the LVT device of each minterm branch.
///
/// `lvt_on_out_side[m]` true means the `V_OUT`-side branch for minterm `m` is
/// LVT and its mirror on the `V_OUT_BAR` side is HVT. Storing one bit per
/// minterm keeps the two sides complementary by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchAssignment {
    pub lvt_on_out_side: [bool; 4],
}

impl BranchAssignment {
    pub fn all() -> impl Iterator<Item = Self> {
        (0u8..16).map(|v| Self {
            lvt_on_out_side: [v & 8 != 0, v & 4 != 0, v & 2 != 0, v & 1 != 0],
        })
    }
}

impl fmt::Display for BranchAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, lvt) in self.lvt_on_out_side.iter().enumerate() {
            if m > 0 {
                f.write_str(" ")?;
            }
            write!(f, "m{}:{}", m, if *lvt { "LVT|HVT" } else { "HVT|LVT" })?;
        }
        Ok(())
    }
}

pub fn assignment_for(f: TruthTable2) -> BranchAssignment {
    BranchAssignment {
        lvt_on_out_side: [f.output(0), f.output(1), f.output(2), f.output(3)],
    }
}

pub fn function_of(a: BranchAssignment) -> TruthTable2 {
    TruthTable2::from_fn(|x, y| a.lvt_on_out_side[2 * x as usize + y as usize])
}

/// Every 2-input function is an admissible program.
pub fn realizable_functions() -> BTreeSet<TruthTable2> {
    BranchAssignment::all().map(function_of).collect()
}

/// pH programming of one gate: the two solutions and where they go.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatePhProgram {
    /// Solution applied to LVT-role devices.
    pub ph_low: f64,
    /// Solution applied to HVT-role devices.
    pub ph_high: f64,
    pub assignment: BranchAssignment,
}

impl GatePhProgram {
    /// `ph_low == ph_high` is accepted and models an unprogrammed gate; the
    /// evaluators report it as unresolvable.
    pub fn new(assignment: BranchAssignment, ph_low: f64, ph_high: f64) -> Result<Self, GateError> {
        for ph in [ph_low, ph_high] {
            if !(PH_MIN..=PH_MAX).contains(&ph) {
                return Err(DeviceError::PhOutOfRange(ph).into());
            }
        }
        if ph_low > ph_high {
            return Err(GateError::InvertedProgram { ph_low, ph_high });
        }
        Ok(Self {
            ph_low,
            ph_high,
            assignment,
        })
    }

    pub fn for_function(f: TruthTable2, ph_low: f64, ph_high: f64) -> Result<Self, GateError> {
        Self::new(assignment_for(f), ph_low, ph_high)
    }

    /// `(V_OUT side pH, V_OUT_BAR side pH)` of the branch for minterm `m`.
    pub fn branch_ph(&self, m: usize) -> (f64, f64) {
        if self.assignment.lvt_on_out_side[m] {
            (self.ph_low, self.ph_high)
        } else {
            (self.ph_high, self.ph_low)
        }
    }
}

/// Current of one series branch whose devices all sit in the same solution.
///
/// The stack is collapsed into one effective device with the gain divided by
/// the stack depth. `v_gs` is the lowest gate drive in the stack.
pub fn branch_current(params: &IsfetParams, ph: f64, v_gs: f64, v_ds: f64) -> Result<f64, DeviceError> {
    let vth = params.vth_from_ph(ph)?;
    let k = params.k_gain / SERIES_STACK_DEPTH as f64;
    Ok(quadratic_current(k, vth, v_gs, v_ds.max(0.0)))
}

/// Winner-take-all evaluation at the onset of the evaluation phase.
///
/// Both conducting branches see `v_gs = v_ds = vdd`. Returns `true` iff the
/// `V_OUT`-side branch draws strictly more current.
pub fn evaluate_static(program: &GatePhProgram, params: &IsfetParams, a: bool, b: bool) -> Result<bool, GateError> {
    params.validate()?;
    let m = 2 * a as usize + b as usize;
    let (ph_out, ph_bar) = program.branch_ph(m);
    let vdd = params.vdd;
    let i_out = branch_current(params, ph_out, vdd, vdd)?;
    let i_bar = branch_current(params, ph_bar, vdd, vdd)?;
    if i_out == i_bar {
        return Err(GateError::Unresolvable {
            a: a as u8,
            b: b as u8,
            current: i_out,
        });
    }
    Ok(i_out > i_bar)
}
