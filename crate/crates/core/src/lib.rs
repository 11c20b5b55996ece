//! Reconfigurable ISFET threshold-voltage-defined (TVD) camouflaged logic.
//!
//! * [`device`]: ISFET current model and the pH to threshold-voltage law.
//! * [`gate`]: static model of the 2-input differential TVD cell.
//! * [`transient`]: precharge/evaluate transient simulation of one cell.
//! * [`netlist`]: `.bench` netlists and bit-parallel evaluation.
//! * [`camouflage`]: the camouflage compiler and equivalence checking.
//! * [`attack`]: profiling and oracle-guided reverse-engineering attacks.

// `!(a < b)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod camouflage;
pub mod device;
pub mod gate;
pub mod netlist;
pub mod transient;

pub use attack::{
    oracle_attack, profiling_attack, resilience_report, AttackOptions, AttackReport, CandidateState, DeviceVisibility,
    Oracle, QueryStrategy, ThresholdMechanism,
};
pub use camouflage::{
    camouflage, decamouflage, verify_equivalence, CamoConfig, CamoGateEntry, EquivalenceMode, SelectionPolicy, Verdict,
};
pub use device::{ids, iv_sweep, BiasPoint, IsfetParams};
pub use gate::{
    assignment_for, evaluate_static, function_of, realizable_functions, BranchAssignment, GatePhProgram, TruthTable2,
};
pub use netlist::{eval_logic, parse_bench, serialize_bench, Bindings, Gate, GateKind, Netlist};
pub use transient::{margin_report, simulate, GateTrace, Resolution, SimConfig};
