//! Log-log regression of scaling integrals against horizon or radius.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which scaling integral a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Quantity {
    I1,
    I2,
    I3,
    J1,
    J2,
    J3,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Quantity::I1 => "I1",
            Quantity::I2 => "I2",
            Quantity::I3 => "I3",
            Quantity::J1 => "J1",
            Quantity::J2 => "J2",
            Quantity::J3 => "J3",
        };
        f.write_str(s)
    }
}

/// The variable swept in a scaling regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Horizon,
    Radius,
    /// log(ln R) abscissa used by the critical-case regression
    LogRadius,
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepVariable::Horizon => "T",
            SweepVariable::Radius => "R",
            SweepVariable::LogRadius => "lnR",
        };
        f.write_str(s)
    }
}

/// Result of fitting log(value) against log(x).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub quantity: Quantity,
    pub sweep_var: SweepVariable,
    pub samples: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub theory_slope: f64,
    /// exp of the fitted intercept: the constant absorbed by the estimates
    pub prefactor: f64,
    /// RMS residual of the log-log fit
    pub fit_residual: f64,
}

impl ScalingReport {
    pub fn slope_error(&self) -> f64 {
        (self.fitted_slope - self.theory_slope).abs()
    }

    /// CSV rows: quantity, sweep_var, x, value, fitted_slope, theory_slope, abs_err.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,sweep_var,x,value,fitted_slope,theory_slope,abs_err\n");
        for &(x, v) in &self.samples {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.quantity,
                self.sweep_var,
                x,
                v,
                self.fitted_slope,
                self.theory_slope,
                self.slope_error()
            ));
        }
        out
    }
}

/// Least-squares slope of log(value) vs log(x).
///
/// Requires at least 3 positive samples whose abscissas span at least a
/// factor of 4 (the critical-case schedule spans ln R over one factor of
/// 4, which is the narrowest sweep the laboratory uses).
pub fn fit_scaling_exponent(
    samples: &[(f64, f64)],
    quantity: Quantity,
    sweep_var: SweepVariable,
    theory_slope: f64,
) -> Result<ScalingReport> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut xmin = f64::INFINITY;
    let mut xmax = 0.0_f64;
    for &(x, v) in samples {
        if !(x > 0.0 && v > 0.0) {
            return Err(Error::Fit(format!(
                "samples must be positive, got ({x}, {v})"
            )));
        }
        xmin = xmin.min(x);
        xmax = xmax.max(x);
    }
    if xmax / xmin < 4.0 {
        return Err(Error::Fit(format!(
            "abscissas span only a factor of {:.2}; need at least 4",
            xmax / xmin
        )));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, v) in samples {
        let lx = x.ln();
        let ly = v.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for &(x, v) in samples {
        let resid = v.ln() - (intercept + slope * x.ln());
        ss += resid * resid;
    }
    Ok(ScalingReport {
        quantity,
        sweep_var,
        samples: samples.to_vec(),
        fitted_slope: slope,
        theory_slope,
        prefactor: intercept.exp(),
        fit_residual: (ss / n).sqrt(),
    })
}
