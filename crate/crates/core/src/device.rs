//! ISFET device model.
//!
//! The threshold voltage of an ISFET follows the pH of the electrolyte on its
//! sensing gate with a linear (Nernstian) slope, which is what lets a
//! threshold-voltage-defined gate be programmed after fabrication. Drain
//! current uses the long-channel quadratic model: cutoff, triode and a
//! saturation clamp at `v_ds = v_gs - vth`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest pH accepted anywhere in the model.
pub const PH_MIN: f64 = 0.0;
/// Highest pH accepted anywhere in the model.
pub const PH_MAX: f64 = 14.0;
/// Ideal Nernst slope at room temperature, volts per pH unit.
pub const NERNST_SLOPE: f64 = 0.059;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("pH {0} outside [0, 14]")]
    PhOutOfRange(f64),
    #[error("invalid device parameter: {0}")]
    InvalidParams(String),
    #[error("invalid bias point: {0}")]
    InvalidBias(String),
    #[error("empty V_GS grid")]
    EmptyGrid,
    #[error("V_GS grid is not monotone at index {0}")]
    NonMonotoneGrid(usize),
    #[error("empty pH list")]
    EmptyPhList,
}

fn check_ph(ph: f64) -> Result<f64, DeviceError> {
    if (PH_MIN..=PH_MAX).contains(&ph) {
        Ok(ph)
    } else {
        Err(DeviceError::PhOutOfRange(ph))
    }
}

/// Constants and pH calibration for one n-type ISFET.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsfetParams {
    /// `mu_n * c_ox * W / L`, in A/V^2. Geometry is folded in here.
    pub k_gain: f64,
    /// Threshold voltage at `ph_ref`, volts.
    pub vth0: f64,
    pub ph_ref: f64,
    /// Threshold shift per pH unit, V/pH.
    pub sensitivity: f64,
    pub vdd: f64,
}

impl Default for IsfetParams {
    /// 300 mV at pH 2 with the Nernst slope, so pH 10 lands at 772 mV.
    fn default() -> Self {
        Self {
            k_gain: 1e-4,
            vth0: 0.3,
            ph_ref: 2.0,
            sensitivity: NERNST_SLOPE,
            vdd: 1.8,
        }
    }
}

impl IsfetParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let bad = |msg: String| Err(DeviceError::InvalidParams(msg));
        if !(self.k_gain > 0.0 && self.k_gain.is_finite()) {
            return bad(format!("k_gain must be > 0, got {}", self.k_gain));
        }
        if !(self.vdd > 0.0 && self.vdd.is_finite()) {
            return bad(format!("vdd must be > 0, got {}", self.vdd));
        }
        if !(PH_MIN..=PH_MAX).contains(&self.ph_ref) {
            return bad(format!("ph_ref must be in [0, 14], got {}", self.ph_ref));
        }
        if !(self.sensitivity >= 0.0 && self.sensitivity.is_finite()) {
            return bad(format!("sensitivity must be >= 0, got {}", self.sensitivity));
        }
        if !(self.vth0 > 0.0 && self.vth0 < self.vdd) {
            return bad(format!("vth0 must be in (0, vdd), got {}", self.vth0));
        }
        Ok(())
    }

    /// Threshold voltage for an electrolyte of the given pH.
    pub fn vth_from_ph(&self, ph: f64) -> Result<f64, DeviceError> {
        let ph = check_ph(ph)?;
        Ok(self.vth0 + self.sensitivity * (ph - self.ph_ref))
    }

    /// Same device with its gain scaled, e.g. for a series stack.
    pub fn with_gain(&self, k_gain: f64) -> Self {
        Self { k_gain, ..*self }
    }
}

/// Terminal voltages and electrolyte pH for one current evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    /// Reference-electrode to source voltage.
    pub v_gs: f64,
    pub v_ds: f64,
    pub ph: f64,
}

impl BiasPoint {
    pub fn new(v_gs: f64, v_ds: f64, ph: f64) -> Result<Self, DeviceError> {
        check_ph(ph)?;
        if !(v_ds >= 0.0) {
            return Err(DeviceError::InvalidBias(format!("v_ds must be >= 0, got {v_ds}")));
        }
        if !v_gs.is_finite() || !v_ds.is_finite() {
            return Err(DeviceError::InvalidBias("non-finite voltage".into()));
        }
        Ok(Self { v_gs, v_ds, ph })
    }
}

/// Quadratic-model drain current for a known threshold voltage.
///
/// Shared by [`ids`] and the transient engine, which resolves each branch's
/// threshold once up front.
pub fn quadratic_current(k_gain: f64, vth: f64, v_gs: f64, v_ds: f64) -> f64 {
    let v_ov = v_gs - vth;
    if v_ov <= 0.0 || v_ds <= 0.0 {
        0.0
    } else if v_ds < v_ov {
        k_gain * (v_ov * v_ds - 0.5 * v_ds * v_ds)
    } else {
        0.5 * k_gain * v_ov * v_ov
    }
}

/// Drain-source current of the ISFET at `bias`.
pub fn ids(params: &IsfetParams, bias: &BiasPoint) -> Result<f64, DeviceError> {
    let bias = BiasPoint::new(bias.v_gs, bias.v_ds, bias.ph)?;
    let vth = params.vth_from_ph(bias.ph)?;
    Ok(quadratic_current(params.k_gain, vth, bias.v_gs, bias.v_ds))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvRow {
    pub v_gs: f64,
    pub ph: f64,
    pub i_ds: f64,
}

/// I_DS over a V_GS grid for each pH, at fixed V_DS.
///
/// Rows are ordered by `v_gs` first, then by `ph` in the order given.
pub fn iv_sweep(
    params: &IsfetParams,
    v_gs_grid: &[f64],
    v_ds: f64,
    ph_list: &[f64],
) -> Result<Vec<IvRow>, DeviceError> {
    if v_gs_grid.is_empty() {
        return Err(DeviceError::EmptyGrid);
    }
    if ph_list.is_empty() {
        return Err(DeviceError::EmptyPhList);
    }
    if v_gs_grid.len() > 1 {
        let rising = v_gs_grid[1] > v_gs_grid[0];
        for (i, w) in v_gs_grid.windows(2).enumerate() {
            let ok = if rising { w[1] > w[0] } else { w[1] < w[0] };
            if !ok {
                return Err(DeviceError::NonMonotoneGrid(i + 1));
            }
        }
    }
    for &ph in ph_list {
        check_ph(ph)?;
    }
    let mut rows = Vec::with_capacity(v_gs_grid.len() * ph_list.len());
    for &v_gs in v_gs_grid {
        for &ph in ph_list {
            let i_ds = ids(params, &BiasPoint::new(v_gs, v_ds, ph)?)?;
            rows.push(IvRow { v_gs, ph, i_ds });
        }
    }
    Ok(rows)
}

pub const IV_CSV_HEADER: &str = "v_gs,ph,i_ds";

pub fn iv_sweep_csv(rows: &[IvRow]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(IV_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{:.6e},{:.6e},{:.6e}", r.v_gs, r.ph, r.i_ds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vth_at_reference_ph_is_vth0() {
        let p = IsfetParams::default();
        assert_eq!(p.vth_from_ph(2.0).unwrap(), 0.3);
    }

    #[test]
    fn vth_at_ph10() {
        // 0.3 + 8 * 0.059
        let p = IsfetParams::default();
        assert!(close(p.vth_from_ph(10.0).unwrap(), 0.772, 1e-12));
    }

    #[test]
    fn nernst_slope_per_unit() {
        let p = IsfetParams::default();
        let d = p.vth_from_ph(3.0).unwrap() - p.vth_from_ph(2.0).unwrap();
        assert!(close(d, 0.059, 1e-12));
    }

    #[test]
    fn out_of_range_ph_is_rejected() {
        let p = IsfetParams::default();
        assert_eq!(p.vth_from_ph(14.5), Err(DeviceError::PhOutOfRange(14.5)));
        assert_eq!(p.vth_from_ph(-0.1), Err(DeviceError::PhOutOfRange(-0.1)));
        assert!(p.vth_from_ph(f64::NAN).is_err());
    }

    #[test]
    fn ids_examples() {
        let p = IsfetParams::default();
        let i = |v_gs, v_ds, ph| ids(&p, &BiasPoint::new(v_gs, v_ds, ph).unwrap()).unwrap();
        // 1e-4 * (1.5 * 0.1 - 0.005)
        assert!(close(i(1.8, 0.1, 2.0), 1.45e-5, 1e-18));
        // 1e-4 * (1.028 * 0.1 - 0.005)
        assert!(close(i(1.8, 0.1, 10.0), 9.78e-6, 1e-18));
        // 0.5 * 1e-4 * 1.028^2
        assert!(close(i(1.8, 1.8, 10.0), 5.28392e-5, 1e-17));
        assert_eq!(i(0.2, 0.5, 2.0), 0.0);
        assert_eq!(i(0.2, 1.8, 2.0), 0.0);
    }

    #[test]
    fn bias_rejects_negative_vds() {
        assert!(matches!(
            BiasPoint::new(1.0, -0.1, 7.0),
            Err(DeviceError::InvalidBias(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(IsfetParams::default().validate().is_ok());
        let mut p = IsfetParams {
            vth0: 1.9,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = IsfetParams::default();
        p.k_gain = 0.0;
        assert!(p.validate().is_err());
        p = IsfetParams::default();
        p.sensitivity = -0.01;
        assert!(p.validate().is_err());
    }

    #[test]
    fn sweep_single_point_is_one_ids_call() {
        let p = IsfetParams::default();
        let rows = iv_sweep(&p, &[1.2], 0.3, &[7.0]).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = ids(&p, &BiasPoint::new(1.2, 0.3, 7.0).unwrap()).unwrap();
        assert_eq!(rows[0].i_ds, direct);
    }

    #[test]
    fn sweep_rows_and_csv() {
        let p = IsfetParams::default();
        let rows = iv_sweep(&p, &[1.8], 0.1, &[2.0, 10.0]).unwrap();
        assert!(close(rows[0].i_ds, 1.45e-5, 1e-18));
        assert!(close(rows[1].i_ds, 9.78e-6, 1e-18));
        let csv = iv_sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("v_gs,ph,i_ds"));
        assert_eq!(lines.next(), Some("1.800000e0,2.000000e0,1.450000e-5"));
        assert_eq!(lines.next(), Some("1.800000e0,1.000000e1,9.780000e-6"));
    }

    #[test]
    fn sweep_fixed_bias_orders_ph_4_9_above_9_2() {
        let p = IsfetParams::default();
        for v_gs in [1.0, 1.4, 1.8] {
            let rows = iv_sweep(&p, &[v_gs], 1.0, &[4.9, 9.2]).unwrap();
            assert!(rows[0].i_ds > rows[1].i_ds);
        }
    }

    #[test]
    fn sweep_errors() {
        let p = IsfetParams::default();
        assert_eq!(iv_sweep(&p, &[], 0.1, &[2.0]), Err(DeviceError::EmptyGrid));
        assert_eq!(iv_sweep(&p, &[1.0], 0.1, &[]), Err(DeviceError::EmptyPhList));
        assert_eq!(
            iv_sweep(&p, &[1.0, 1.2, 1.1], 0.1, &[2.0]),
            Err(DeviceError::NonMonotoneGrid(2))
        );
        assert_eq!(iv_sweep(&p, &[1.0], 0.1, &[15.0]), Err(DeviceError::PhOutOfRange(15.0)));
        assert!(iv_sweep(&p, &[1.8, 1.0], 0.1, &[2.0]).is_ok());
    }

    proptest! {
        #[test]
        fn vth_is_linear_in_ph(ph in 0.0f64..=7.0, delta in 0.0f64..=7.0) {
            let p = IsfetParams::default();
            let d = p.vth_from_ph(ph + delta).unwrap() - p.vth_from_ph(ph).unwrap();
            prop_assert!((d - p.sensitivity * delta).abs() < 1e-14);
        }

        #[test]
        fn ids_non_negative(v_gs in -2.0f64..3.0, v_ds in 0.0f64..3.0, ph in 0.0f64..=14.0) {
            let p = IsfetParams::default();
            prop_assert!(ids(&p, &BiasPoint::new(v_gs, v_ds, ph).unwrap()).unwrap() >= 0.0);
        }

        #[test]
        fn ids_non_increasing_in_ph(v_ds in 0.01f64..1.8, ph1 in 0.0f64..=14.0, ph2 in 0.0f64..=14.0) {
            let p = IsfetParams::default();
            let (lo, hi) = if ph1 <= ph2 { (ph1, ph2) } else { (ph2, ph1) };
            let a = ids(&p, &BiasPoint::new(1.8, v_ds, lo).unwrap()).unwrap();
            let b = ids(&p, &BiasPoint::new(1.8, v_ds, hi).unwrap()).unwrap();
            prop_assert!(a >= b);
            if hi > lo {
                prop_assert!(a > b);
            }
        }

        #[test]
        fn triode_meets_saturation_at_boundary(v_gs in 0.5f64..3.0, ph in 0.0f64..=14.0) {
            let p = IsfetParams::default();
            let vth = p.vth_from_ph(ph).unwrap();
            let v_ov = v_gs - vth;
            prop_assume!(v_ov > 0.0);
            let triode = p.k_gain * (v_ov * v_ov - 0.5 * v_ov * v_ov);
            let sat = quadratic_current(p.k_gain, vth, v_gs, v_ov);
            prop_assert!((triode - sat).abs() <= 1e-15 * sat);
        }
    }
}
