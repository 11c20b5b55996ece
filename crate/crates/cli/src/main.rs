//! `phcamo`: ISFET threshold-voltage-defined gates, pH-programmed
//! camouflaging and reverse-engineering attacks from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phcamo_core::{IsfetParams, TruthTable2};
use serde::Serialize;

mod commands;
mod output;

use output::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "phcamo",
    version,
    about = "pH-programmed threshold-defined logic and camouflaging"
)]
struct Cli {
    /// Directory for artifacts and manifest.json.
    #[arg(long, global = true, env = "PHCAMO_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// I_DS against V_GS for a list of pH values, as CSV.
    Sweep(SweepArgs),
    /// Transient simulation of one gate.
    Gate(GateArgs),
    /// All 16 functions with their LVT/HVT branch assignment.
    DeriveTable,
    /// Replace gates of a .bench netlist with CAMO cells.
    Camouflage(CamouflageArgs),
    /// Check two netlists for functional equivalence.
    Verify(VerifyArgs),
    /// Run a reverse-engineering attack.
    #[command(subcommand)]
    Attack(AttackCommand),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeviceArgs {
    /// Transconductance parameter k, A/V^2.
    #[arg(long, default_value_t = 1e-4)]
    pub k_gain: f64,
    /// Threshold voltage at the reference pH, volts.
    #[arg(long, default_value_t = 0.3)]
    pub vth0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub ph_ref: f64,
    /// Threshold shift per pH unit, V/pH.
    #[arg(long, default_value_t = 0.059)]
    pub sensitivity: f64,
    #[arg(long, default_value_t = 1.8)]
    pub vdd: f64,
}

impl DeviceArgs {
    pub fn params(&self) -> IsfetParams {
        IsfetParams {
            k_gain: self.k_gain,
            vth0: self.vth0,
            ph_ref: self.ph_ref,
            sensitivity: self.sensitivity,
            vdd: self.vdd,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    #[arg(long, default_value_t = 0.0)]
    pub vgs_min: f64,
    /// Defaults to vdd.
    #[arg(long)]
    pub vgs_max: Option<f64>,
    /// Grid points, evenly spaced and including both ends.
    #[arg(long, default_value_t = 19, value_parser = clap::value_parser!(u32).range(1..))]
    pub points: u32,
    #[arg(long, default_value_t = 0.1)]
    pub vds: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,10")]
    pub ph: Vec<f64>,
    /// File name inside the output directory.
    #[arg(long, default_value = "iv.csv")]
    pub output: String,
}

#[derive(Debug, Args, Serialize)]
pub struct GateArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Function name (XOR, NAND, A_AND_NOT_B, ...) or truth table number 0-15.
    #[arg(long, value_parser = parse_function)]
    #[serde(serialize_with = "serialize_function")]
    pub func: TruthTable2,
    /// pH that sets the low-threshold devices.
    #[arg(long, default_value_t = 2.0)]
    pub ph_low: f64,
    /// pH that sets the high-threshold devices.
    #[arg(long, default_value_t = 10.0)]
    pub ph_high: f64,
    /// `all`, or one vector `ab` such as `01`.
    #[arg(long, default_value = "all", value_parser = parse_inputs)]
    pub inputs: InputSet,
    /// Keep every n-th waveform sample.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub stride: u32,
    /// Time step, seconds.
    #[arg(long, default_value_t = 1e-12)]
    pub dt: f64,
    #[arg(long, default_value_t = 20e6)]
    pub clock_freq: f64,
    /// Capacitance of each differential node, farads.
    #[arg(long, default_value_t = 1e-14)]
    pub c_node: f64,
    /// Also write margin.csv with branch currents probed at this V_DS.
    #[arg(long)]
    pub margin_vds: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CamouflageArgs {
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Input .bench netlist.
    #[arg(long)]
    pub netlist: PathBuf,
    /// Comma-separated gate names to camouflage.
    #[arg(
        long,
        value_delimiter = ',',
        conflicts_with = "rate",
        required_unless_present = "rate"
    )]
    pub gates: Option<Vec<String>>,
    /// Fraction of eligible gates to camouflage, chosen with `--seed`.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub ph_low: f64,
    #[arg(long, default_value_t = 10.0)]
    pub ph_high: f64,
    #[arg(long, default_value = "camo.bench")]
    pub output_netlist: String,
    #[arg(long, default_value = "camo.json")]
    pub output_config: String,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    /// CamoConfig supplying functions for CAMO cells.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Check this many random vectors instead of all of them.
    #[arg(long)]
    pub vectors: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum AttackCommand {
    /// Read cell layouts off the die; works only on implant-programmed cells.
    Profiling(ProfilingArgs),
    /// Prune candidate functions with input/output queries to a working chip.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Conventional TVD: thresholds set by implants.
    Implant,
    /// ISFET-TVD: thresholds set by electrolyte pH.
    Electrolyte,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfilingArgs {
    /// Camouflaged .bench netlist.
    #[arg(long)]
    pub netlist: PathBuf,
    /// CamoConfig of the die being profiled.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "electrolyte")]
    pub mechanism: Mechanism,
    #[arg(long, default_value = "attack_report.json")]
    pub output: String,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Camouflaged .bench netlist seen by the attacker.
    #[arg(long)]
    pub netlist: PathBuf,
    /// Netlist of the working chip.
    #[arg(long)]
    pub oracle: PathBuf,
    /// CamoConfig programming the oracle's CAMO cells, if it has any.
    #[arg(long)]
    pub oracle_config: Option<PathBuf>,
    /// Random queries; all input vectors when omitted.
    #[arg(long)]
    pub queries: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest joint candidate space enumerated exactly.
    #[arg(long, default_value_t = phcamo_core::attack::DEFAULT_JOINT_LIMIT)]
    pub joint_limit: u64,
    /// Use per-gate pruning instead of failing above the joint limit.
    #[arg(long)]
    pub marginal_fallback: bool,
    #[arg(long, default_value = "attack_report.json")]
    pub output: String,
}

fn parse_function(s: &str) -> Result<TruthTable2, String> {
    s.parse().map_err(|e: phcamo_core::gate::GateError| e.to_string())
}

fn serialize_function<S: serde::Serializer>(f: &TruthTable2, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(f.name())
}

/// Input vectors `(a, b)` for `gate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSet(pub Vec<(bool, bool)>);

impl Serialize for InputSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&(a, b)| format!("{}{}", a as u8, b as u8)))
    }
}

fn parse_inputs(s: &str) -> Result<InputSet, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(InputSet(vec![
            (false, false),
            (false, true),
            (true, false),
            (true, true),
        ]));
    }
    match s.as_bytes() {
        [a @ (b'0' | b'1'), b @ (b'0' | b'1')] => Ok(InputSet(vec![(*a == b'1', *b == b'1')])),
        _ => Err(format!("expected `all` or two bits like `01`, got `{s}`")),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let dir = &cli.out_dir;
    match cli.command {
        Command::Sweep(a) => commands::sweep(dir, &a),
        Command::Gate(a) => commands::gate(dir, &a),
        Command::DeriveTable => commands::derive_table(dir),
        Command::Camouflage(a) => commands::camouflage(dir, &a),
        Command::Verify(a) => commands::verify(dir, &a),
        Command::Attack(AttackCommand::Profiling(a)) => commands::profiling(dir, &a),
        Command::Attack(AttackCommand::Oracle(a)) => commands::oracle(dir, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let mut lines = rendered.lines();
            let first = lines.next().unwrap_or_default();
            eprintln!("error[usage]: {}", first.strip_prefix("error: ").unwrap_or(first));
            for line in lines {
                eprintln!("{line}");
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
