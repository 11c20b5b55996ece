//! Fixed-step transient simulation of one differential TVD gate.
//!
//! Two state variables: the precharged nodes `V_OUT` and `V_OUT_BAR`, each
//! with capacitance `c_node`. During the low clock half both nodes charge
//! toward `vdd` through the precharge switches. During the high half the
//! clock foot is closed and each node discharges through its pull-down
//! network while the cross-coupled PMOS pair (each gated by the opposite
//! node) regenerates the difference. `OUT` and `OUT_BAR` are ideal inverters
//! at `trip`. Integration is forward Euler.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{quadratic_current, DeviceError, IsfetParams};
use crate::gate::{branch_current, GateError, GatePhProgram, SERIES_STACK_DEPTH};

/// Node excursion beyond the rails that is tolerated before clamping.
pub const RAIL_SLACK: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("time step unstable: {node} reached {volts:.4} V at t = {time:e} s; reduce dt (currently {dt:e} s)")]
    Unstable {
        node: &'static str,
        volts: f64,
        time: f64,
        dt: f64,
    },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub vdd: f64,
    pub clock_freq: f64,
    pub c_node: f64,
    pub dt: f64,
    /// Output inverter switching threshold.
    pub trip: f64,
    /// Minimum `|V_OUT - V_OUT_BAR|` before a winner is declared.
    pub resolve_margin: f64,
    /// On-resistance of the precharge switches, ohms.
    pub precharge_resistance: f64,
    /// Gain of the cross-coupled PMOS pair; `None` uses the ISFET `k_gain`.
    pub regen_k: Option<f64>,
    /// |Vth| of the cross-coupled PMOS pair; `None` uses the ISFET `vth0`.
    pub regen_vth: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::with_vdd(1.8)
    }
}

impl SimConfig {
    /// Defaults with the trip point at mid-rail of `vdd`.
    pub fn with_vdd(vdd: f64) -> Self {
        Self {
            vdd,
            clock_freq: 20e6,
            c_node: 1e-14,
            dt: 1e-12,
            trip: vdd / 2.0,
            resolve_margin: 0.1,
            precharge_resistance: 1e3,
            regen_k: None,
            regen_vth: None,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.clock_freq
    }

    /// Number of integration steps in one clock period.
    pub fn steps(&self) -> usize {
        (self.period() / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.vdd) {
            return bad(format!("vdd must be > 0, got {}", self.vdd));
        }
        if !positive(self.clock_freq) {
            return bad(format!("clock_freq must be > 0, got {}", self.clock_freq));
        }
        if !positive(self.c_node) {
            return bad(format!("c_node must be > 0, got {}", self.c_node));
        }
        if !positive(self.dt) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        // Need enough samples per half period to see the race at all.
        if self.dt * 200.0 > self.period() {
            return bad(format!(
                "dt {:e} s is not small against the clock period {:e} s",
                self.dt,
                self.period()
            ));
        }
        if !(self.trip > 0.0 && self.trip < self.vdd) {
            return bad(format!("trip must be in (0, vdd), got {}", self.trip));
        }
        if !positive(self.resolve_margin) {
            return bad(format!("resolve_margin must be > 0, got {}", self.resolve_margin));
        }
        if !positive(self.precharge_resistance) {
            return bad(format!(
                "precharge_resistance must be > 0, got {}",
                self.precharge_resistance
            ));
        }
        if matches!(self.regen_k, Some(k) if !positive(k)) {
            return bad("regen_k must be > 0".into());
        }
        if matches!(self.regen_vth, Some(v) if !(v > 0.0 && v < self.vdd)) {
            return bad("regen_vth must be in (0, vdd)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Resolved(bool),
    Unresolved,
}

impl Resolution {
    pub fn bit(self) -> Option<bool> {
        match self {
            Resolution::Resolved(b) => Some(b),
            Resolution::Unresolved => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateTrace {
    pub time: Vec<f64>,
    pub v_out: Vec<f64>,
    pub v_out_bar: Vec<f64>,
    pub out: Vec<f64>,
    pub out_bar: Vec<f64>,
    /// Index of the first evaluation-phase sample.
    pub eval_start: usize,
    pub resolution: Resolution,
    /// Seconds from the start of evaluation; `None` when unresolved.
    pub resolve_time: Option<f64>,
}

pub const WAVEFORM_CSV_HEADER: &str = "t,v_out,v_out_bar,out,out_bar";

impl GateTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Waveform CSV, keeping every `stride`-th sample plus the last one.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut s = String::with_capacity(self.len() / stride * 72 + 64);
        s.push_str(WAVEFORM_CSV_HEADER);
        s.push('\n');
        let last = self.len().saturating_sub(1);
        for i in (0..self.len()).filter(|i| i % stride == 0 || *i == last) {
            let _ = writeln!(
                s,
                "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                self.time[i], self.v_out[i], self.v_out_bar[i], self.out[i], self.out_bar[i]
            );
        }
        s
    }

    pub fn eval_v_out(&self) -> &[f64] {
        &self.v_out[self.eval_start..]
    }

    pub fn eval_v_out_bar(&self) -> &[f64] {
        &self.v_out_bar[self.eval_start..]
    }
}

/// One side of the differential pull-down network, resolved to thresholds.
struct PullDown {
    /// Per minterm branch: (gate drive, vth).
    branches: [(f64, f64); 4],
    k: f64,
}

impl PullDown {
    fn new(
        program: &GatePhProgram,
        params: &IsfetParams,
        vdd: f64,
        a: bool,
        b: bool,
        out_side: bool,
    ) -> Result<Self, DeviceError> {
        let rail = |on: bool| if on { vdd } else { 0.0 };
        let mut branches = [(0.0, 0.0); 4];
        for (m, br) in branches.iter_mut().enumerate() {
            // Branch m is gated by the literals that are true exactly on m.
            let lit_a = if m & 2 != 0 { rail(a) } else { rail(!a) };
            let lit_b = if m & 1 != 0 { rail(b) } else { rail(!b) };
            let (ph_out, ph_bar) = program.branch_ph(m);
            let ph = if out_side { ph_out } else { ph_bar };
            *br = (lit_a.min(lit_b), params.vth_from_ph(ph)?);
        }
        Ok(Self {
            branches,
            k: params.k_gain / SERIES_STACK_DEPTH as f64,
        })
    }

    fn current(&self, v_node: f64) -> f64 {
        self.branches
            .iter()
            .map(|&(v_gs, vth)| quadratic_current(self.k, vth, v_gs, v_node.max(0.0)))
            .sum()
    }
}

/// Simulates one clock period (precharge half, then evaluation half) from
/// fully discharged nodes.
pub fn simulate(
    program: &GatePhProgram,
    params: &IsfetParams,
    cfg: &SimConfig,
    a: bool,
    b: bool,
) -> Result<GateTrace, SimError> {
    params.validate()?;
    cfg.validate()?;
    let vdd = cfg.vdd;
    let pdn_out = PullDown::new(program, params, vdd, a, b, true)?;
    let pdn_bar = PullDown::new(program, params, vdd, a, b, false)?;
    let k_p = cfg.regen_k.unwrap_or(params.k_gain);
    let vt_p = cfg.regen_vth.unwrap_or(params.vth0);
    let pmos = |gate: f64, node: f64| quadratic_current(k_p, vt_p, vdd - gate, (vdd - node).max(0.0));
    let g_pre = 1.0 / cfg.precharge_resistance;
    let inv = |v: f64| if v < cfg.trip { vdd } else { 0.0 };

    let n = cfg.steps();
    let half = n / 2;
    let dt = cfg.dt;
    let step_gain = dt / cfg.c_node;

    let mut trace = GateTrace {
        time: Vec::with_capacity(n + 1),
        v_out: Vec::with_capacity(n + 1),
        v_out_bar: Vec::with_capacity(n + 1),
        out: Vec::with_capacity(n + 1),
        out_bar: Vec::with_capacity(n + 1),
        eval_start: half,
        resolution: Resolution::Unresolved,
        resolve_time: None,
    };
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let push = |t: &mut GateTrace, i: usize, x: f64, y: f64| {
        t.time.push(i as f64 * dt);
        t.v_out.push(x);
        t.v_out_bar.push(y);
        t.out.push(inv(x));
        t.out_bar.push(inv(y));
    };
    push(&mut trace, 0, x, y);

    for i in 0..n {
        let evaluating = i >= half;
        let (ix, iy) = if evaluating {
            (pmos(y, x) - pdn_out.current(x), pmos(x, y) - pdn_bar.current(y))
        } else {
            (pmos(y, x) + g_pre * (vdd - x), pmos(x, y) + g_pre * (vdd - y))
        };
        let nx = x + step_gain * ix;
        let ny = y + step_gain * iy;
        let time = (i + 1) as f64 * dt;
        for (node, v) in [("V_OUT", nx), ("V_OUT_BAR", ny)] {
            if !(v >= -RAIL_SLACK && v <= vdd + RAIL_SLACK) {
                return Err(SimError::Unstable {
                    node,
                    volts: v,
                    time,
                    dt,
                });
            }
        }
        x = nx.clamp(0.0, vdd);
        y = ny.clamp(0.0, vdd);
        push(&mut trace, i + 1, x, y);

        if evaluating && trace.resolution == Resolution::Unresolved {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            if hi - lo >= cfg.resolve_margin && lo < cfg.trip {
                // V_OUT losing the race drives OUT high.
                trace.resolution = Resolution::Resolved(x < y);
                trace.resolve_time = Some(time - half as f64 * dt);
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginRow {
    pub minterm: usize,
    pub a: bool,
    pub b: bool,
    pub i_lvt: f64,
    pub i_hvt: f64,
    pub ratio: f64,
    pub resolution: Resolution,
    pub resolve_time: Option<f64>,
}

/// LVT/HVT branch current ratio at `v_gs = vdd`, `v_ds = probe_vds`, and the
/// simulated resolve time, for each minterm.
pub fn margin_report(
    program: &GatePhProgram,
    params: &IsfetParams,
    cfg: &SimConfig,
    probe_vds: f64,
) -> Result<Vec<MarginRow>, SimError> {
    let i_lvt = branch_current(params, program.ph_low, cfg.vdd, probe_vds)?;
    let i_hvt = branch_current(params, program.ph_high, cfg.vdd, probe_vds)?;
    let ratio = if i_lvt == i_hvt { 1.0 } else { i_lvt / i_hvt };
    (0..4)
        .map(|m| {
            let (a, b) = (m & 2 != 0, m & 1 != 0);
            let trace = simulate(program, params, cfg, a, b)?;
            Ok(MarginRow {
                minterm: m,
                a,
                b,
                i_lvt,
                i_hvt,
                ratio,
                resolution: trace.resolution,
                resolve_time: trace.resolve_time,
            })
        })
        .collect()
}

pub const MARGIN_CSV_HEADER: &str = "minterm,a,b,i_lvt,i_hvt,ratio,resolved_output,resolve_time";

pub fn margin_csv(rows: &[MarginRow]) -> String {
    let mut s = String::from(MARGIN_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let out = match r.resolution {
            Resolution::Resolved(b) => (b as u8).to_string(),
            Resolution::Unresolved => "unresolved".into(),
        };
        let t = r.resolve_time.map(|t| format!("{t:.6e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{:.6e},{:.6e},{:.6e},{},{}",
            r.minterm, r.a as u8, r.b as u8, r.i_lvt, r.i_hvt, r.ratio, out, t
        );
    }
    s
}
