//! Deterministic workloads shared by the benchmarks.

use phcamo_core::netlist::random::{random_netlist, RandomNetlistSpec};
use phcamo_core::netlist::C17_BENCH;
use phcamo_core::{camouflage, parse_bench, CamoConfig, IsfetParams, Netlist, SelectionPolicy};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c17() -> Netlist {
    parse_bench(C17_BENCH).expect("c17 parses")
}

/// Random 2-input DAG, the same for a given `seed`.
pub fn random_design(inputs: usize, gates: usize, seed: u64) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomNetlistSpec {
        inputs,
        gates,
        outputs: 4,
        max_fanin: 2,
    };
    random_netlist(&mut rng, &spec)
}

/// `design` with the named gates camouflaged at pH 2/10.
pub fn camouflaged(design: &Netlist, gates: &[&str]) -> (Netlist, CamoConfig) {
    let policy = SelectionPolicy::Explicit(gates.iter().map(|g| g.to_string()).collect());
    camouflage(design, &policy, 2.0, 10.0, &IsfetParams::default()).expect("gates are eligible")
}

/// `design` with a seeded fraction of its gates camouflaged.
pub fn camouflaged_fraction(design: &Netlist, rate: f64, seed: u64) -> (Netlist, CamoConfig) {
    camouflage(
        design,
        &SelectionPolicy::Fraction { rate, seed },
        2.0,
        10.0,
        &IsfetParams::default(),
    )
    .expect("fraction in range")
}
