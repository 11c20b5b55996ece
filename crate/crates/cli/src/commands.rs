use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;
use phcamo_core::attack::{GateResolution, ThresholdMechanism};
use phcamo_core::camouflage::eligible_gates;
use phcamo_core::device::iv_sweep_csv;
use phcamo_core::netlist::serialize_bench;
use phcamo_core::transient::margin_csv;
use phcamo_core::{
    assignment_for, camouflage as camo_netlist, iv_sweep, margin_report, oracle_attack, parse_bench, profiling_attack,
    resilience_report, simulate, verify_equivalence, AttackOptions, Bindings, CamoConfig, DeviceVisibility,
    EquivalenceMode, GatePhProgram, Netlist, Oracle, QueryStrategy, Resolution, SelectionPolicy, SimConfig,
    TruthTable2, Verdict,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{read_input, Classify, Failure, Run};
use crate::{CamouflageArgs, GateArgs, Mechanism, OracleArgs, ProfilingArgs, SweepArgs, VerifyArgs};

fn load_netlist(run: &mut Run, path: &Path) -> Result<Netlist, Failure> {
    Ok(load_netlist_text(run, path)?.0)
}

fn load_netlist_text(run: &mut Run, path: &Path) -> Result<(Netlist, String), Failure> {
    let text = read_input(path)?;
    run.input(path);
    let n = parse_bench(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .domain()?;
    Ok((n, text))
}

fn load_config(run: &mut Run, path: &Path) -> Result<CamoConfig, Failure> {
    let text = read_input(path)?;
    run.input(path);
    CamoConfig::from_json(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .domain()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn linspace(lo: f64, hi: f64, points: u32) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / f64::from(points - 1);
    (0..points).map(|i| lo + step * f64::from(i)).collect()
}

pub fn sweep(dir: &Path, a: &SweepArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "sweep");
    let params = a.device.params();
    params.validate().domain()?;
    let vgs_max = a.vgs_max.unwrap_or(params.vdd);
    let grid = linspace(a.vgs_min, vgs_max, a.points);
    let rows = iv_sweep(&params, &grid, a.vds, &a.ph).domain()?;
    let path = run.write(&a.output, &iv_sweep_csv(&rows))?;
    run.params(json!({ "args": a, "device": params, "vgs_max": vgs_max }));
    run.finish()?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn bit_char(r: Resolution) -> char {
    match r {
        Resolution::Resolved(true) => '1',
        Resolution::Resolved(false) => '0',
        Resolution::Unresolved => 'x',
    }
}

#[derive(Serialize)]
struct WaveformMeta<'a> {
    function: &'a str,
    function_bits: u8,
    inputs: String,
    ph_low: f64,
    ph_high: f64,
    assignment: [bool; 4],
    output: String,
    resolve_time: Option<f64>,
    samples: usize,
    stride: u32,
    csv: String,
}

pub fn gate(dir: &Path, a: &GateArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "gate");
    let params = a.device.params();
    params.validate().domain()?;
    let cfg = SimConfig {
        clock_freq: a.clock_freq,
        c_node: a.c_node,
        dt: a.dt,
        ..SimConfig::with_vdd(params.vdd)
    };
    let prog = GatePhProgram::for_function(a.func, a.ph_low, a.ph_high).domain()?;
    let name = a.func.name();

    let mut bits = Vec::new();
    for &(x, y) in &a.inputs.0 {
        let trace = simulate(&prog, &params, &cfg, x, y).domain()?;
        let tag = format!("{}{}", x as u8, y as u8);
        let csv_name = format!("gate_{name}_{tag}.csv");
        let csv = run.write(&csv_name, &trace.to_csv(a.stride as usize))?;
        let meta = WaveformMeta {
            function: name,
            function_bits: a.func.bits(),
            inputs: tag.clone(),
            ph_low: a.ph_low,
            ph_high: a.ph_high,
            assignment: prog.assignment.lvt_on_out_side,
            output: bit_char(trace.resolution).to_string(),
            resolve_time: trace.resolve_time,
            samples: trace.len(),
            stride: a.stride,
            csv: csv.display().to_string(),
        };
        run.write_json(&format!("gate_{name}_{tag}.json"), &meta)?;
        match trace.resolve_time {
            Some(t) => println!(
                "{tag} -> {} (resolved {:.1} ps into evaluation)",
                bit_char(trace.resolution),
                t * 1e12
            ),
            None => println!("{tag} -> x (unresolved)"),
        }
        bits.push(bit_char(trace.resolution).to_string());
    }
    if let Some(vds) = a.margin_vds {
        let rows = margin_report(&prog, &params, &cfg, vds).domain()?;
        run.write("margin.csv", &margin_csv(&rows))?;
    }
    run.params(json!({ "args": a, "device": params, "sim": cfg }));
    run.finish()?;
    println!("bits: {}", bits.join(","));
    Ok(())
}

pub fn derive_table(dir: &Path) -> Result<(), Failure> {
    let mut run = Run::new(dir, "derive-table");
    println!(
        "{:<6} {:<12} branch assignment (V_OUT side | V_OUT_BAR side)",
        "bits", "function"
    );
    for f in TruthTable2::all() {
        println!("{:04b}   {:<12} {}", f.bits(), f.name(), assignment_for(f));
    }
    run.params(json!({}));
    run.finish()
}

pub fn camouflage(dir: &Path, a: &CamouflageArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "camouflage");
    let params = a.device.params();
    let (n, text) = load_netlist_text(&mut run, &a.netlist)?;
    let policy = match (&a.gates, a.rate) {
        (Some(g), _) => SelectionPolicy::Explicit(g.clone()),
        (None, Some(rate)) => {
            run.seed(a.seed);
            SelectionPolicy::Fraction { rate, seed: a.seed }
        }
        (None, None) => return Err(anyhow!("one of --gates or --rate is required")).usage(),
    };
    let (camo, cfg) = camo_netlist(&n, &policy, a.ph_low, a.ph_high, &params).domain()?;
    // Nothing selected: pass the source through untouched.
    let out = if cfg.gates.is_empty() {
        text
    } else {
        serialize_bench(&camo)
    };
    run.write(&a.output_netlist, &out)?;
    run.write(&a.output_config, &cfg.to_json())?;
    run.params(json!({ "args": a, "device": params }));
    run.finish()?;
    println!(
        "camouflaged {} of {} eligible gates",
        cfg.gates.len(),
        eligible_gates(&n).len()
    );
    Ok(())
}

pub fn verify(dir: &Path, a: &VerifyArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "verify");
    let left = load_netlist(&mut run, &a.left)?;
    let right = load_netlist(&mut run, &a.right)?;
    let bindings = match &a.config {
        Some(p) => load_config(&mut run, p)?.bindings().domain()?,
        None => Bindings::new(),
    };
    let mode = match a.vectors {
        Some(vectors) => {
            run.seed(a.seed);
            EquivalenceMode::Random { vectors, seed: a.seed }
        }
        None => EquivalenceMode::Exhaustive,
    };
    let verdict = verify_equivalence(&left, &right, &bindings, mode).domain()?;
    let report = match &verdict {
        Verdict::Equivalent { vectors, exhaustive } => json!({
            "equivalent": true, "vectors": vectors, "exhaustive": exhaustive, "summary": verdict.to_string(),
        }),
        Verdict::Counterexample {
            inputs,
            left,
            right,
            vectors_checked,
        } => json!({
            "equivalent": false, "vectors": vectors_checked, "inputs": inputs,
            "left": left, "right": right, "summary": verdict.to_string(),
        }),
    };
    run.write_json("verify.json", &report)?;
    run.params(json!({ "args": a }));
    run.finish()?;
    if verdict.is_equivalent() {
        println!("{verdict}");
        Ok(())
    } else {
        Err(anyhow!("not equivalent: {verdict}")).domain()
    }
}

#[derive(Serialize)]
struct ProfilingReport {
    netlist: String,
    mechanism: Mechanism,
    camo_gates: Vec<String>,
    resolved_count: usize,
    resolved_fraction: f64,
    recovered: BTreeMap<String, Option<String>>,
}

pub fn profiling(dir: &Path, a: &ProfilingArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "attack profiling");
    let camo = load_netlist(&mut run, &a.netlist)?;
    let die = load_config(&mut run, &a.config)?;
    let mech = match a.mechanism {
        Mechanism::Implant => ThresholdMechanism::Implant,
        Mechanism::Electrolyte => ThresholdMechanism::Electrolyte,
    };
    let result = profiling_attack(&camo, &die, &DeviceVisibility::uniform(&camo, mech));
    let report = ProfilingReport {
        netlist: stem(&a.netlist),
        mechanism: a.mechanism,
        camo_gates: result.gates.iter().map(|(n, _)| n.clone()).collect(),
        resolved_count: result.resolved_count(),
        resolved_fraction: result.resolved_fraction(),
        recovered: result
            .gates
            .iter()
            .map(|(n, r)| {
                let f = match r {
                    GateResolution::Resolved(f) => Some(f.name().to_string()),
                    GateResolution::Unresolved => None,
                };
                (n.clone(), f)
            })
            .collect(),
    };
    run.write_json(&a.output, &report)?;
    run.params(json!({ "args": a }));
    run.finish()?;
    println!(
        "resolved {} of {} camouflaged gates ({:.1}%)",
        report.resolved_count,
        report.camo_gates.len(),
        report.resolved_fraction * 100.0
    );
    Ok(())
}

pub fn oracle(dir: &Path, a: &OracleArgs) -> Result<(), Failure> {
    let mut run = Run::new(dir, "attack oracle");
    let camo = load_netlist(&mut run, &a.netlist)?;
    let chip = load_netlist(&mut run, &a.oracle)?;
    let chip_bindings = match &a.oracle_config {
        Some(p) => load_config(&mut run, p)?.bindings().domain()?,
        None => Bindings::new(),
    };
    let strategy = match a.queries {
        Some(queries) => {
            run.seed(a.seed);
            QueryStrategy::Random { queries, seed: a.seed }
        }
        None => QueryStrategy::ExhaustiveInputs,
    };
    let opts = AttackOptions {
        strategy,
        joint_limit: a.joint_limit,
        marginal_fallback: a.marginal_fallback,
    };
    let oracle = Oracle {
        netlist: &chip,
        bindings: &chip_bindings,
    };
    let state = oracle_attack(&camo, oracle, &opts).domain()?;
    let report = resilience_report(&stem(&a.netlist), &strategy, &state);
    run.write_json(&a.output, &report)?;
    run.params(json!({ "args": a }));
    run.finish()?;
    println!(
        "{} queries: {} joint survivors{}, {:.3} bits of ambiguity",
        report.queries,
        report.joint_survivors,
        if report.exact { "" } else { " (upper bound)" },
        report.ambiguity_bits
    );
    Ok(())
}
