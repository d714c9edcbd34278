//! Cutoff families used by the scaling machinery.
//!
//! Four shapes: a polynomial time cutoff psi, a smoothstep-based space
//! cutoff xi (flat inside radius R, zero beyond sqrt(2) R), a logarithmic
//! space cutoff phi for the critical case (flat inside sqrt(R), zero
//! beyond R), and a compactly supported time bump eta.

use crate::error::{Error, Result};

/// Quintic smoothstep: 0 for w <= 0, 1 for w >= 1, C^2 monotone between.
pub fn smoothstep(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else if w >= 1.0 {
        1.0
    } else {
        w * w * w * (10.0 + w * (-15.0 + 6.0 * w))
    }
}

pub fn smoothstep_d1(w: f64) -> f64 {
    if !(0.0..=1.0).contains(&w) {
        0.0
    } else {
        30.0 * w * w * (1.0 - w) * (1.0 - w)
    }
}

pub fn smoothstep_d2(w: f64) -> f64 {
    if !(0.0..=1.0).contains(&w) {
        0.0
    } else {
        60.0 * w * (1.0 - w) * (1.0 - 2.0 * w)
    }
}

/// Value and derivatives of a cutoff at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// psi(t) = (1 - t/T)^m on [0, T].
#[derive(Debug, Clone, Copy)]
pub struct TimeCutoff {
    t_horizon: f64,
    m: u32,
}

impl TimeCutoff {
    pub fn new(t_horizon: f64, m: u32) -> Result<Self> {
        if !(t_horizon > 0.0) {
            return Err(Error::InvalidParam(format!("T must be positive, got {t_horizon}")));
        }
        if m == 0 {
            return Err(Error::InvalidParam("power m must be positive".into()));
        }
        Ok(Self { t_horizon, m })
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn eval(&self, t: f64) -> Result<CutoffEval> {
        if !(0.0..=self.t_horizon).contains(&t) {
            return Err(Error::InvalidParam(format!(
                "t = {t} outside [0, {}]",
                self.t_horizon
            )));
        }
        let w = 1.0 - t / self.t_horizon;
        let m = self.m as f64;
        let inv_t = 1.0 / self.t_horizon;
        let value = w.powf(m);
        let d1 = -m * inv_t * w.powf(m - 1.0);
        let d2 = if self.m >= 2 {
            m * (m - 1.0) * inv_t * inv_t * w.powf(m - 2.0)
        } else {
            0.0
        };
        Ok(CutoffEval { value, d1, d2 })
    }
}

/// xi(x) = Phi(|x|^2 / R^2) with Phi(z) = smoothstep(2 - z)^ell:
/// identically 1 for |x| <= R, zero for |x| >= sqrt(2) R.
#[derive(Debug, Clone, Copy)]
pub struct SpaceCutoff {
    r_scale: f64,
    ell: u32,
}

impl SpaceCutoff {
    pub fn new(r_scale: f64, ell: u32) -> Result<Self> {
        if !(r_scale > 0.0) {
            return Err(Error::InvalidParam(format!("R must be positive, got {r_scale}")));
        }
        if ell == 0 {
            return Err(Error::InvalidParam("power ell must be positive".into()));
        }
        Ok(Self { r_scale, ell })
    }

    /// Power that keeps xi^{-1/(p-1)} |Delta xi|^{p/(p-1)} bounded.
    pub fn ell_for_p(p: f64) -> u32 {
        (2.0 * p / (p - 1.0)).ceil() as u32
    }

    pub fn for_p(r_scale: f64, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParam(format!("p must exceed 1, got {p}")));
        }
        Self::new(r_scale, Self::ell_for_p(p))
    }

    pub fn r_scale(&self) -> f64 {
        self.r_scale
    }

    /// Outer edge of the support, sqrt(2) R.
    pub fn r_support(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.r_scale
    }

    fn phi_base(&self, z: f64) -> (f64, f64, f64) {
        let ell = self.ell as f64;
        let s = smoothstep(2.0 - z);
        // d/dz smoothstep(2 - z) = -smoothstep'(2 - z)
        let s1 = -smoothstep_d1(2.0 - z);
        let s2 = smoothstep_d2(2.0 - z);
        let v = s.powf(ell);
        let d1 = if s > 0.0 { ell * s.powf(ell - 1.0) * s1 } else { 0.0 };
        let d2 = if s > 0.0 {
            ell * (ell - 1.0) * s.powf(ell - 2.0) * s1 * s1 + ell * s.powf(ell - 1.0) * s2
        } else {
            0.0
        };
        (v, d1, d2)
    }

    /// Value, radial first and second derivatives at radius r.
    pub fn eval_radial(&self, r: f64) -> Result<CutoffEval> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParam(format!("radius must be nonnegative, got {r}")));
        }
        let rr = self.r_scale * self.r_scale;
        let z = r * r / rr;
        let (v, p1, p2) = self.phi_base(z);
        let dz = 2.0 * r / rr;
        Ok(CutoffEval {
            value: v,
            d1: p1 * dz,
            d2: p2 * dz * dz + p1 * 2.0 / rr,
        })
    }

    /// Radial Laplacian at r in dimension n.
    pub fn laplacian(&self, r: f64, n_dim: u32) -> Result<f64> {
        let e = self.eval_radial(r)?;
        if r < 1e-300 {
            // radial symmetry: Delta f(0) = N f''(0)
            Ok(n_dim as f64 * e.d2)
        } else {
            Ok(e.d2 + (n_dim as f64 - 1.0) / r * e.d1)
        }
    }
}

/// Profile of the edge function F for the logarithmic cutoff.
#[derive(Debug, Clone, Copy)]
pub enum FShape {
    /// F(s) = (1 - smoothstep(s))^kappa: 1 for s <= 0, 0 for s >= 1.
    Smooth { kappa: u32 },
    /// F identically 1 on (-inf, 1), 0 beyond. Discontinuous; exists only
    /// so the non-integrable configuration can be exercised and flagged.
    Flat,
}

impl FShape {
    /// kappa that makes phi^{-1/(p-1)} |Delta phi|^{p/(p-1)} integrable.
    pub fn kappa_for_p(p: f64) -> u32 {
        (((p + 1.0) / (p - 1.0)).ceil() as u32 + 1).max(2)
    }

    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            FShape::Smooth { kappa } => {
                let k = kappa as f64;
                let g = 1.0 - smoothstep(s);
                let g1 = -smoothstep_d1(s);
                let g2 = -smoothstep_d2(s);
                if g <= 0.0 {
                    (0.0, 0.0, 0.0)
                } else {
                    (
                        g.powf(k),
                        k * g.powf(k - 1.0) * g1,
                        k * (k - 1.0) * g.powf(k - 2.0) * g1 * g1 + k * g.powf(k - 1.0) * g2,
                    )
                }
            }
            FShape::Flat => {
                if s < 1.0 {
                    (1.0, 0.0, 0.0)
                } else {
                    (0.0, 0.0, 0.0)
                }
            }
        }
    }
}

/// phi(x) = F(ln(|x| / sqrt(R)) / ln(sqrt(R))): 1 for |x| <= sqrt(R),
/// 0 for |x| >= R.
#[derive(Debug, Clone, Copy)]
pub struct LogCutoff {
    r_outer: f64,
    f_shape: FShape,
}

/// Evaluation of the log cutoff including the assembled radial Laplacian.
#[derive(Debug, Clone, Copy)]
pub struct LogCutoffEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub laplacian: f64,
}

impl LogCutoff {
    pub fn new(r_outer: f64, f_shape: FShape) -> Result<Self> {
        if !(r_outer > 1.0) {
            return Err(Error::InvalidParam(format!(
                "outer radius must exceed 1, got {r_outer}"
            )));
        }
        Ok(Self { r_outer, f_shape })
    }

    pub fn for_p(r_outer: f64, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParam(format!("p must exceed 1, got {p}")));
        }
        Self::new(r_outer, FShape::Smooth { kappa: FShape::kappa_for_p(p) })
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn f_shape(&self) -> FShape {
        self.f_shape
    }

    /// ln(sqrt(R)), the log scale of the cutoff.
    pub fn log_scale(&self) -> f64 {
        0.5 * self.r_outer.ln()
    }

    /// Map radius to the argument of F.
    pub fn s_of_r(&self, r: f64) -> f64 {
        let l = self.log_scale();
        (r.ln() - l) / l
    }

    pub fn eval_radial(&self, r: f64, n_dim: u32) -> Result<LogCutoffEval> {
        if !(r > 0.0) {
            // the cutoff equals 1 in a neighborhood of the origin
            if r == 0.0 {
                return Ok(LogCutoffEval { value: 1.0, d1: 0.0, d2: 0.0, laplacian: 0.0 });
            }
            return Err(Error::InvalidParam(format!("radius must be nonnegative, got {r}")));
        }
        let l = self.log_scale();
        let s = self.s_of_r(r);
        let (f, f1, f2) = self.f_shape.eval(s);
        let d1 = f1 / (r * l);
        let d2 = (f2 / l - f1) / (r * r * l);
        let lap = (f2 / (l * l) + f1 * (n_dim as f64 - 2.0) / l) / (r * r);
        Ok(LogCutoffEval { value: f, d1, d2, laplacian: lap })
    }
}

/// nu(s) = exp(-1 / (s (1 - s))) on (0, 1), zero elsewhere.
pub fn bump_nu(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let g = s * (1.0 - s);
    (-1.0 / g).exp()
}

pub fn bump_nu_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let g = s * (1.0 - s);
    let v = (-1.0 / g).exp();
    if v == 0.0 {
        return 0.0;
    }
    v * (1.0 - 2.0 * s) / (g * g)
}

/// eta(t) = nu(t / T): smooth bump supported strictly inside (0, T).
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    t_horizon: f64,
}

impl Bump {
    pub fn new(t_horizon: f64) -> Result<Self> {
        if !(t_horizon > 0.0) {
            return Err(Error::InvalidParam(format!("T must be positive, got {t_horizon}")));
        }
        Ok(Self { t_horizon })
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn eval(&self, t: f64) -> Result<CutoffEval> {
        if !(0.0..=self.t_horizon).contains(&t) {
            return Err(Error::InvalidParam(format!(
                "t = {t} outside [0, {}]",
                self.t_horizon
            )));
        }
        let s = t / self.t_horizon;
        Ok(CutoffEval {
            value: bump_nu(s),
            d1: bump_nu_d1(s) / self.t_horizon,
            d2: 0.0,
        })
    }
}
