//! Trajectory classification and blow-up time extrapolation.
//!
//! The extrapolation fits sup_norm^{-(p-1)} against t over the final
//! growth window; the root of the linear fit is the blow-up time estimate
//! (exact for the ODE ansatz u' = u^p). A free-exponent fit of
//! log sup_norm against log(T* - t) is reported alongside as a
//! diagnostic, since the memory term modifies the true rate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Blowup,
    Bounded,
    Undecided,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Outcome::Blowup => "blowup",
            Outcome::Bounded => "bounded",
            Outcome::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// Outcome classification plus fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub outcome: Outcome,
    pub t_star_estimate: Option<f64>,
    /// fitted alpha in sup_norm ~ C (T* - t)^{-alpha}
    pub fit_exponent: Option<f64>,
    pub fit_residual: f64,
    pub threshold_hit_time: Option<f64>,
}

fn check_sorted(series: &[(f64, f64)]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidParam("empty norm series".into()));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParam("norm series times must be increasing".into()));
    }
    Ok(())
}

/// Classify a sup-norm series.
///
/// Blow-up: the series crosses the threshold, or the solver diverged.
/// Bounded: the horizon was reached with final sup-norm below half the
/// threshold and a last-decade growth factor below 1.05. Anything else is
/// undecided.
pub fn detect(
    series: &[(f64, f64)],
    threshold: f64,
    horizon: f64,
    diverged: bool,
) -> Result<Outcome> {
    check_sorted(series)?;
    if !(threshold > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidParam("threshold and horizon must be positive".into()));
    }
    if diverged || series.iter().any(|&(_, s)| s >= threshold) {
        return Ok(Outcome::Blowup);
    }
    let (t_last, sup_last) = *series.last().unwrap();
    if t_last >= horizon * (1.0 - 1e-9) && sup_last < 0.5 * threshold {
        // growth factor over the last decade of time
        let t_decade = horizon / 10.0;
        let sup_at_decade = series
            .iter()
            .filter(|&&(t, _)| t <= t_decade)
            .last()
            .map(|&(_, s)| s)
            .unwrap_or(series[0].1);
        let tiny = 1e-300;
        let growth = (sup_last + tiny) / (sup_at_decade + tiny);
        if growth < 1.05 {
            return Ok(Outcome::Bounded);
        }
    }
    Ok(Outcome::Undecided)
}

/// Blow-up time estimate and fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TStarFit {
    pub t_star: f64,
    /// free exponent alpha from log sup vs log(T* - t)
    pub exponent: f64,
    /// RMS residual of the linear fit of sup^{-(p-1)} vs t
    pub residual: f64,
    pub window_len: usize,
}

/// Fit the final growth window and extrapolate the blow-up time.
///
/// The window is the suffix of samples with sup-norm at least 10% of the
/// series maximum, at least 10 samples. The window must be nondecreasing.
pub fn estimate_t_star(series: &[(f64, f64)], p: f64) -> Result<TStarFit> {
    check_sorted(series)?;
    if !(p > 1.0) {
        return Err(Error::InvalidParam(format!("p must exceed 1, got {p}")));
    }
    let sup_max = series.iter().map(|&(_, s)| s).fold(0.0_f64, f64::max);
    if !(sup_max > 0.0) {
        return Err(Error::Fit("series has no growth".into()));
    }
    let start = series
        .iter()
        .position(|&(_, s)| s >= 0.1 * sup_max)
        .unwrap();
    let window = &series[start..];
    if window.len() < 10 {
        return Err(Error::Fit(format!(
            "growth window has only {} samples; need at least 10",
            window.len()
        )));
    }
    if window.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::Fit("non-monotone tail: no growth window".into()));
    }
    // linear fit of y = sup^{-(p-1)} against t; the root is T*
    let n = window.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, s) in window {
        let y = s.powf(-(p - 1.0));
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    if !(slope < 0.0) {
        return Err(Error::Fit("fit slope is not negative: no approach to blow-up".into()));
    }
    let t_star = -intercept / slope;
    let mut ss = 0.0;
    for &(t, s) in window {
        let y = s.powf(-(p - 1.0));
        let r = y - (intercept + slope * t);
        ss += r * r;
    }
    let residual = (ss / n).sqrt();
    // free-exponent diagnostic: log sup vs log(T* - t)
    let mut fit_pts = 0.0;
    let (mut sx2, mut sy2, mut sxx2, mut sxy2) = (0.0, 0.0, 0.0, 0.0);
    for &(t, s) in window {
        if t_star - t <= 0.0 || s <= 0.0 {
            continue;
        }
        let lx = (t_star - t).ln();
        let ly = s.ln();
        fit_pts += 1.0;
        sx2 += lx;
        sy2 += ly;
        sxx2 += lx * lx;
        sxy2 += lx * ly;
    }
    let exponent = if fit_pts >= 3.0 {
        -(fit_pts * sxy2 - sx2 * sy2) / (fit_pts * sxx2 - sx2 * sx2)
    } else {
        f64::NAN
    };
    Ok(TStarFit { t_star, exponent, residual, window_len: window.len() })
}

/// Assemble the report a run hands back.
pub fn build_report(
    series: &[(f64, f64)],
    threshold: f64,
    horizon: f64,
    diverged: bool,
    p: f64,
) -> BlowupReport {
    let outcome = detect(series, threshold, horizon, diverged).unwrap_or(Outcome::Undecided);
    let threshold_hit_time = series
        .iter()
        .find(|&&(_, s)| s >= threshold)
        .map(|&(t, _)| t);
    match outcome {
        Outcome::Blowup => match estimate_t_star(series, p) {
            Ok(fit) => BlowupReport {
                outcome,
                t_star_estimate: Some(fit.t_star.max(series.last().unwrap().0)),
                fit_exponent: Some(fit.exponent),
                fit_residual: fit.residual,
                threshold_hit_time,
            },
            Err(_) => BlowupReport {
                // the fit needs a clean monotone tail; fall back to the
                // last time marched, which lower-bounds T*
                outcome,
                t_star_estimate: Some(series.last().unwrap().0),
                fit_exponent: None,
                fit_residual: f64::NAN,
                threshold_hit_time,
            },
        },
        _ => BlowupReport {
            outcome,
            t_star_estimate: None,
            fit_exponent: None,
            fit_residual: 0.0,
            threshold_hit_time,
        },
    }
}
