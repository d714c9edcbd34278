//! Weak-formulation residual of a computed trajectory.
//!
//! Multiplying the equation by a space-time test function and integrating
//! by parts (the test function vanishes at t = T and outside a ball inside
//! the domain) gives the identity
//!
//!   -int u0 (phi - k Lap phi)|_{t=0}
//!     - int int u phi_t + k int int u Lap phi_t - int int u Lap phi
//!   = reaction * int int |u|^p (right-RL phi) + int int omega phi,
//!
//! where the memory term has been moved onto the test function by the
//! fractional Fubini identity. Both sides are assembled from the stored
//! profiles with cell-volume space sums and trapezoidal time quadrature;
//! the defect between them is the reported residual.

use crate::error::{Error, Result};
use crate::fracint::{self, FractionalSpec};
use crate::solver::{ProblemSpec, RadialGrid, Trajectory};
use crate::testfn::cutoffs::{Bump, LogCutoff, SpaceCutoff, TimeCutoff};

/// Factorized space-time test function.
#[derive(Debug, Clone, Copy)]
pub enum TestFunction {
    /// psi(t) xi(x): polynomial time decay with the smoothstep ball cutoff.
    Subcritical { psi: TimeCutoff, xi: SpaceCutoff },
    /// eta(t) phi(x): time bump with the logarithmic cutoff.
    Critical { eta: Bump, phi: LogCutoff },
}

impl TestFunction {
    pub fn t_horizon(&self) -> f64 {
        match self {
            TestFunction::Subcritical { psi, .. } => psi.t_horizon(),
            TestFunction::Critical { eta, .. } => eta.t_horizon(),
        }
    }

    /// Outer edge of the spatial support.
    pub fn r_support(&self) -> f64 {
        match self {
            TestFunction::Subcritical { xi, .. } => xi.r_support(),
            TestFunction::Critical { phi, .. } => phi.r_outer(),
        }
    }

    /// Time factor and its derivative at t.
    fn time_eval(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            TestFunction::Subcritical { psi, .. } => {
                let e = psi.eval(t)?;
                Ok((e.value, e.d1))
            }
            TestFunction::Critical { eta, .. } => {
                let e = eta.eval(t)?;
                Ok((e.value, e.d1))
            }
        }
    }

    /// Spatial value and Laplacian at radius r.
    fn space_eval(&self, r: f64, n_dim: u32) -> Result<(f64, f64)> {
        match self {
            TestFunction::Subcritical { xi, .. } => {
                let v = xi.eval_radial(r)?.value;
                let lap = xi.laplacian(r, n_dim)?;
                Ok((v, lap))
            }
            TestFunction::Critical { phi, .. } => {
                let e = phi.eval_radial(r, n_dim)?;
                Ok((e.value, e.laplacian))
            }
        }
    }

    /// (I^gamma_{T-} of the time factor) at t.
    fn right_frac_time(&self, t: f64, gamma_ord: f64) -> Result<f64> {
        let t_end = self.t_horizon();
        if t >= t_end {
            return Ok(0.0);
        }
        if gamma_ord == 0.0 {
            return Ok(self.time_eval(t)?.0);
        }
        match self {
            TestFunction::Subcritical { psi, .. } => {
                fracint::rl_right_poly_closed_form(psi.m(), gamma_ord, t_end, t)
            }
            TestFunction::Critical { eta, .. } => {
                let eta = *eta;
                fracint::right_rl_integral(
                    |s| eta.eval(s).map(|e| e.value).unwrap_or(0.0),
                    t,
                    t_end,
                    FractionalSpec::new(gamma_ord)?,
                )
            }
        }
    }
}

/// Both sides of the weak identity and their defect.
#[derive(Debug, Clone, Copy)]
pub struct WeakResidual {
    /// parabolic side (initial term plus the integrated-by-parts operators)
    pub lhs: f64,
    /// source side (memory term on the test function plus the forcing)
    pub rhs: f64,
    pub residual: f64,
    /// residual scaled by the larger side magnitude
    pub relative: f64,
}

/// Assemble the weak identity on a trajectory's stored profiles.
///
/// The trajectory must have profile storage enabled and must cover the
/// test function's time horizon; the spatial support must sit strictly
/// inside the grid so the space boundary terms vanish.
pub fn weak_residual(
    traj: &Trajectory,
    spec: &ProblemSpec,
    grid: &RadialGrid,
    tf: &TestFunction,
) -> Result<WeakResidual> {
    spec.validate()?;
    if traj.profiles.len() < 3 {
        return Err(Error::InvalidParam(
            "trajectory has fewer than 3 stored profiles; enable store_every".into(),
        ));
    }
    let t_end = tf.t_horizon();
    let last_t = traj.profiles.last().unwrap().0;
    if last_t < t_end * (1.0 - 1e-9) {
        return Err(Error::InvalidParam(format!(
            "trajectory ends at t = {last_t}, before the test horizon T = {t_end}"
        )));
    }
    if tf.r_support() > grid.r_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParam(format!(
            "test function support radius {} exceeds the grid radius {}",
            tf.r_support(),
            grid.r_max
        )));
    }
    let nodes = grid.nodes();
    let vols = grid.cell_volumes();
    let omega: Vec<f64> = nodes.iter().map(|&r| spec.omega.eval(r)).collect();
    let mut sp_val = vec![0.0; grid.n_r];
    let mut sp_lap = vec![0.0; grid.n_r];
    for i in 0..grid.n_r {
        let (v, lap) = tf.space_eval(nodes[i], grid.n_dim)?;
        sp_val[i] = v;
        sp_lap[i] = lap;
    }
    // forcing space factor is time-independent
    let omega_sp: f64 = omega
        .iter()
        .zip(&sp_val)
        .zip(&vols)
        .map(|((&w, &v), &vol)| w * v * vol)
        .sum();

    // per-sample time data, clipped to [0, T]
    struct Slice {
        t: f64,
        /// int u phi_space
        u_val: f64,
        /// int u Lap(phi_space)
        u_lap: f64,
        /// int |u|^p phi_space... scaled by the right-RL time kernel later
        up_val: f64,
        time_v: f64,
        time_d: f64,
        frac_kernel: f64,
    }
    let mut slices = Vec::new();
    for (t, u) in &traj.profiles {
        if *t > t_end * (1.0 + 1e-12) {
            break;
        }
        let t = t.min(t_end);
        let (time_v, time_d) = tf.time_eval(t)?;
        let frac_kernel = tf.right_frac_time(t, spec.gamma)?;
        let mut u_val = 0.0;
        let mut u_lap = 0.0;
        let mut up_val = 0.0;
        for i in 0..grid.n_r {
            let w = u[i] * vols[i];
            u_val += w * sp_val[i];
            u_lap += w * sp_lap[i];
            up_val += u[i].abs().powf(spec.p) * vols[i] * sp_val[i];
        }
        slices.push(Slice { t, u_val, u_lap, up_val, time_v, time_d, frac_kernel });
    }
    if slices.len() < 3 {
        return Err(Error::InvalidParam(
            "fewer than 3 stored profiles inside the test horizon".into(),
        ));
    }
    // trapezoid over the (possibly nonuniform) stored times
    let mut int_u_dphi = 0.0; // int int u phi_space psi'
    let mut int_ulap_dphi = 0.0; // int int u Lap(phi_space) psi'
    let mut int_ulap_phi = 0.0; // int int u Lap(phi_space) psi
    let mut int_mem = 0.0; // int int |u|^p phi_space K
    let mut int_force = 0.0; // int int omega phi_space psi
    for w in slices.windows(2) {
        let h = w[1].t - w[0].t;
        if h <= 0.0 {
            continue;
        }
        let avg = |f: &dyn Fn(&Slice) -> f64| 0.5 * h * (f(&w[0]) + f(&w[1]));
        int_u_dphi += avg(&|s| s.u_val * s.time_d);
        int_ulap_dphi += avg(&|s| s.u_lap * s.time_d);
        int_ulap_phi += avg(&|s| s.u_lap * s.time_v);
        int_mem += avg(&|s| s.up_val * s.frac_kernel);
        int_force += avg(&|s| s.time_v) * omega_sp;
    }
    let first = &slices[0];
    let initial = -(first.u_val - spec.k * first.u_lap) * first.time_v;
    let lhs = initial - int_u_dphi + spec.k * int_ulap_dphi - int_ulap_phi;
    let rhs = spec.reaction * int_mem + int_force;
    let residual = lhs - rhs;
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(WeakResidual { lhs, rhs, residual, relative: residual.abs() / scale })
}
