//! Seeded random combinational netlists for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Gate, GateKind, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomNetlistSpec {
    pub inputs: usize,
    pub gates: usize,
    /// Minimum number of outputs; every sink gate is an output regardless.
    pub outputs: usize,
    /// Largest fan-in for n-ary gates. 2 restricts to 2-input gates.
    pub max_fanin: usize,
}

/// Builds a DAG where each gate draws fan-in from the inputs and earlier
/// gates. Names are `i<k>` for inputs and `g<k>` for gates.
pub fn random_netlist<R: Rng + ?Sized>(rng: &mut R, spec: &RandomNetlistSpec) -> Netlist {
    assert!(spec.inputs >= 1, "need at least one input");
    let inputs: Vec<String> = (0..spec.inputs).map(|i| format!("i{i}")).collect();
    let mut nets = inputs.clone();
    let mut gates = Vec::with_capacity(spec.gates);
    let mut used = vec![false; spec.gates];

    for g in 0..spec.gates {
        let roll: f64 = rng.gen();
        let (kind, arity) = if roll < 0.15 {
            (*[GateKind::Not, GateKind::Buf].choose(rng).unwrap(), 1)
        } else {
            let kind = *GateKind::BINARY.choose(rng).unwrap();
            let arity = if spec.max_fanin > 2 && roll > 0.85 {
                rng.gen_range(3..=spec.max_fanin)
            } else {
                2
            };
            (kind, arity)
        };
        let mut fanin = Vec::with_capacity(arity);
        if nets.len() >= arity {
            for k in rand::seq::index::sample(rng, nets.len(), arity) {
                fanin.push(k);
            }
        } else {
            for _ in 0..arity {
                fanin.push(rng.gen_range(0..nets.len()));
            }
        }
        for &k in &fanin {
            if k >= spec.inputs {
                used[k - spec.inputs] = true;
            }
        }
        let name = format!("g{g}");
        gates.push(Gate {
            name: name.clone(),
            kind,
            fanin: fanin.iter().map(|&k| nets[k].clone()).collect(),
        });
        nets.push(name);
    }

    let mut outputs: Vec<String> = (0..spec.gates).filter(|&g| !used[g]).map(|g| format!("g{g}")).collect();
    let mut rest: Vec<String> = nets.iter().filter(|n| !outputs.contains(n)).cloned().collect();
    rest.shuffle(rng);
    while outputs.len() < spec.outputs {
        match rest.pop() {
            Some(n) => outputs.push(n),
            None => break,
        }
    }
    Netlist::new(inputs, outputs, gates).expect("generator emits valid netlists")
}
