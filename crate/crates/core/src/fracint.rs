//! Left and right Riemann-Liouville fractional integrals of order
//! `gamma` in [0, 1).
//!
//! The left integral on sampled data uses product-trapezoidal convolution
//! quadrature: the data is treated as piecewise linear and the weakly
//! singular kernel (t-s)^{gamma-1}/Gamma(gamma) is integrated exactly
//! against each linear piece. The weights are nonnegative and integrate
//! constants exactly, which is what the tests pin down.
//!
//! `gamma = 0` is taken to mean the identity operator (the local-in-time
//! case of the equation).

use crate::error::{Error, Result};
use crate::quad;
use statrs::function::gamma::gamma;

/// Fractional order for the memory term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalSpec {
    gamma: f64,
}

impl FractionalSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParam(format!(
                "fractional order gamma must lie in [0, 1), got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True for the local (identity-operator) case.
    pub fn is_local(&self) -> bool {
        self.gamma == 0.0
    }
}

/// Product-trapezoidal weights for the left integral on a uniform grid.
///
/// Row `n` holds w[n][0..=n] with (I^gamma f)(t_n) ~= sum_j w[n][j] f(t_j).
/// Rows are generated on demand; nothing triangular is stored.
#[derive(Debug, Clone)]
pub struct QuadratureWeights {
    dt: f64,
    gamma: f64,
}

impl QuadratureWeights {
    pub fn new(dt: f64, gamma: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParam(format!("dt must be positive, got {dt}")));
        }
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(Error::InvalidParam(format!(
                "quadrature weights need gamma in (0, 1), got {gamma}"
            )));
        }
        Ok(Self { dt, gamma })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Weight row for the approximation at t_n = n * dt.
    pub fn row(&self, n: usize) -> Vec<f64> {
        let g = self.gamma;
        let scale = self.dt.powf(g) / gamma(g + 2.0);
        if n == 0 {
            return vec![0.0];
        }
        let nf = n as f64;
        let mut w = Vec::with_capacity(n + 1);
        w.push(scale * ((nf - 1.0).powf(g + 1.0) - nf.powf(g + 1.0) + (g + 1.0) * nf.powf(g)));
        for j in 1..n {
            let d = (n - j) as f64;
            w.push(scale * ((d + 1.0).powf(g + 1.0) - 2.0 * d.powf(g + 1.0) + (d - 1.0).powf(g + 1.0)));
        }
        w.push(scale);
        w
    }

    /// Exact value of the row sum: t_n^gamma / Gamma(gamma + 1).
    pub fn row_sum_exact(&self, n: usize) -> f64 {
        (self.dt * n as f64).powf(self.gamma) / gamma(self.gamma + 1.0)
    }
}

/// Left integral (I^gamma_{0+} u)(t_n) of uniformly sampled data.
///
/// `samples[j]` is u(j * dt); the result is the product-integration value
/// at the final sample time. For `gamma = 0` this is the identity and the
/// last sample is returned.
pub fn left_rl_integral(samples: &[f64], spec: FractionalSpec, dt: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParam("empty sample array".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParam(format!("dt must be positive, got {dt}")));
    }
    if spec.is_local() {
        return Ok(*samples.last().unwrap());
    }
    let n = samples.len() - 1;
    let w = QuadratureWeights::new(dt, spec.gamma())?.row(n);
    Ok(w.iter().zip(samples).map(|(wi, fi)| wi * fi).sum())
}

/// Left integral of piecewise-linear data on an arbitrary increasing time
/// grid, evaluated at the final grid point. Used by the solver when the
/// step size has been adapted. Kernel moments are exact per sub-interval.
pub fn left_rl_nonuniform(times: &[f64], samples: &[f64], gamma_ord: f64) -> Result<f64> {
    if times.len() != samples.len() || times.is_empty() {
        return Err(Error::InvalidParam(
            "times and samples must be nonempty and of equal length".into(),
        ));
    }
    if gamma_ord == 0.0 {
        return Ok(*samples.last().unwrap());
    }
    if !(0.0 < gamma_ord && gamma_ord < 1.0) {
        return Err(Error::InvalidParam(format!(
            "gamma must lie in [0, 1), got {gamma_ord}"
        )));
    }
    let tn = *times.last().unwrap();
    let inv_g1 = 1.0 / gamma(gamma_ord + 1.0);
    let inv_g = 1.0 / gamma(gamma_ord);
    let mut acc = 0.0;
    for j in 0..times.len() - 1 {
        let (t0, t1) = (times[j], times[j + 1]);
        let h = t1 - t0;
        if !(h > 0.0) {
            return Err(Error::InvalidParam("time grid must be strictly increasing".into()));
        }
        // sigma = tn - s runs over [a, b]
        let a = tn - t1;
        let b = tn - t0;
        let m0 = (b.powf(gamma_ord) - a.powf(gamma_ord)) * inv_g1;
        // m1 = int_a^b sigma^{g-1} (b - sigma) dsigma / Gamma(g)
        let m1 = (b * (b.powf(gamma_ord) - a.powf(gamma_ord)) / gamma_ord
            - (b.powf(gamma_ord + 1.0) - a.powf(gamma_ord + 1.0)) / (gamma_ord + 1.0))
            * inv_g;
        let slope = (samples[j + 1] - samples[j]) / h;
        acc += samples[j] * m0 + slope * m1;
    }
    Ok(acc)
}

/// Right integral (I^gamma_{T-} f)(t) by adaptive quadrature.
///
/// The substitution u = (s - t)^gamma removes the endpoint singularity,
/// leaving 1/Gamma(gamma+1) * int_0^{(T-t)^gamma} f(t + u^{1/gamma}) du.
pub fn right_rl_integral<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    t_end: f64,
    spec: FractionalSpec,
) -> Result<f64> {
    if !(t >= 0.0 && t < t_end) {
        return Err(Error::InvalidParam(format!(
            "need 0 <= t < T, got t = {t}, T = {t_end}"
        )));
    }
    let g = spec.gamma();
    if !(g > 0.0) {
        return Err(Error::InvalidParam(
            "right integral requires gamma in (0, 1)".into(),
        ));
    }
    let upper = (t_end - t).powf(g);
    let inv_g1 = 1.0 / gamma(g + 1.0);
    let value = quad::integrate(
        |u| f(t + u.powf(1.0 / g)),
        0.0,
        upper,
        1e-10,
    )? * inv_g1;
    if !value.is_finite() {
        return Err(Error::NonFinite("right RL integral".into()));
    }
    Ok(value)
}

/// Closed form of the right integral of the time cutoff (1 - t/T)^m:
/// Gamma(m+1)/Gamma(gamma+m+1) * T^gamma * (1 - t/T)^{m+gamma}.
pub fn rl_right_poly_closed_form(m: u32, gamma_ord: f64, t_end: f64, t: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParam("cutoff power m must be positive".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParam(format!("T must be positive, got {t_end}")));
    }
    if !(0.0..1.0).contains(&gamma_ord) {
        return Err(Error::InvalidParam(format!(
            "gamma must lie in [0, 1), got {gamma_ord}"
        )));
    }
    if !(0.0..t_end).contains(&t) {
        return Err(Error::InvalidParam(format!(
            "t must lie in [0, T), got t = {t}, T = {t_end}"
        )));
    }
    let mf = m as f64;
    Ok(gamma(mf + 1.0) / gamma(gamma_ord + mf + 1.0)
        * t_end.powf(gamma_ord)
        * (1.0 - t / t_end).powf(mf + gamma_ord))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn spec_rejects_out_of_range() {
        assert!(FractionalSpec::new(-0.1).is_err());
        assert!(FractionalSpec::new(1.0).is_err());
        assert!(FractionalSpec::new(0.0).unwrap().is_local());
    }

    #[test]
    fn constant_samples_half_order() {
        // c * t^{1/2} / Gamma(3/2) at t = 1
        let c = 2.5;
        let n = 64;
        let dt = 1.0 / n as f64;
        let samples = vec![c; n + 1];
        let spec = FractionalSpec::new(0.5).unwrap();
        let v = left_rl_integral(&samples, spec, dt).unwrap();
        assert_relative_eq!(v, c / gamma(1.5), max_relative = 1e-13);
    }

    #[test]
    fn single_sample_is_zero_interval() {
        let spec = FractionalSpec::new(0.5).unwrap();
        let v = left_rl_integral(&[7.0], spec, 0.1).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn gamma_zero_is_identity() {
        let spec = FractionalSpec::new(0.0).unwrap();
        let v = left_rl_integral(&[1.0, 2.0, 3.5], spec, 0.1).unwrap();
        assert_eq!(v, 3.5);
    }

    #[test]
    fn empty_samples_rejected() {
        let spec = FractionalSpec::new(0.5).unwrap();
        assert!(left_rl_integral(&[], spec, 0.1).is_err());
    }

    #[test]
    fn weights_nonnegative_and_sum_exactly() {
        for &g in &[0.1, 0.5, 0.9] {
            let w = QuadratureWeights::new(0.01, g).unwrap();
            for n in [1usize, 2, 7, 50] {
                let row = w.row(n);
                assert_eq!(row.len(), n + 1);
                assert!(row.iter().all(|&x| x >= 0.0), "negative weight at gamma={g}, n={n}");
                let sum: f64 = row.iter().sum();
                assert_relative_eq!(sum, w.row_sum_exact(n), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn nonuniform_matches_uniform() {
        let n = 40;
        let dt = 1.0 / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let samples: Vec<f64> = times.iter().map(|&t| (2.0 * t).sin() + 1.0).collect();
        let spec = FractionalSpec::new(0.4).unwrap();
        let a = left_rl_integral(&samples, spec, dt).unwrap();
        let b = left_rl_nonuniform(&times, &samples, 0.4).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn right_integral_of_constant() {
        let spec = FractionalSpec::new(0.5).unwrap();
        let v = right_rl_integral(|_| 1.0, 0.0, 1.0, spec).unwrap();
        assert_relative_eq!(v, 1.0 / gamma(1.5), max_relative = 1e-10);
    }

    #[test]
    fn right_integral_of_zero() {
        let spec = FractionalSpec::new(0.5).unwrap();
        let v = right_rl_integral(|_| 0.0, 0.0, 1.0, spec).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn right_integral_rejects_bad_interval() {
        let spec = FractionalSpec::new(0.5).unwrap();
        assert!(right_rl_integral(|_| 1.0, 1.0, 1.0, spec).is_err());
        assert!(right_rl_integral(|_| 1.0, 2.0, 1.0, spec).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // psi(t) = (1 - t/T)^m against the right kernel
        let (m, g, t_end) = (2u32, 0.5, 1.0);
        let spec = FractionalSpec::new(g).unwrap();
        for &t in &[0.0, 0.3, 0.9] {
            let quad_val = right_rl_integral(
                |s| (1.0 - s / t_end).powi(m as i32),
                t,
                t_end,
                spec,
            )
            .unwrap();
            let cf = rl_right_poly_closed_form(m, g, t_end, t).unwrap();
            assert_relative_eq!(quad_val, cf, max_relative = 1e-8);
        }
    }

    #[test]
    fn closed_form_vanishes_at_horizon() {
        let v = rl_right_poly_closed_form(2, 0.5, 1.0, 1.0 - 1e-12).unwrap();
        assert!(v < 1e-24);
    }

    #[test]
    fn closed_form_homogeneity_in_t_end() {
        // fixed t/T, scaling T by lambda scales the value by lambda^gamma
        let (m, g) = (3u32, 0.3);
        let frac = 0.4;
        let v1 = rl_right_poly_closed_form(m, g, 1.0, frac).unwrap();
        let v2 = rl_right_poly_closed_form(m, g, 10.0, 10.0 * frac).unwrap();
        assert_relative_eq!(v2 / v1, 10.0_f64.powf(g), max_relative = 1e-12);
    }

    #[test]
    fn closed_form_rejects_t_outside_range() {
        assert!(rl_right_poly_closed_form(2, 0.5, 1.0, 1.0).is_err());
        assert!(rl_right_poly_closed_form(2, 0.5, 1.0, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn linearity(a in -3.0..3.0f64, b in -3.0..3.0f64, g in 0.05..0.95f64) {
            let n = 32;
            let dt = 0.03;
            let f: Vec<f64> = (0..=n).map(|i| ((i as f64) * 0.2).sin()).collect();
            let gsamp: Vec<f64> = (0..=n).map(|i| ((i as f64) * 0.13).cos()).collect();
            let combo: Vec<f64> = f.iter().zip(&gsamp).map(|(x, y)| a * x + b * y).collect();
            let spec = FractionalSpec::new(g).unwrap();
            let lhs = left_rl_integral(&combo, spec, dt).unwrap();
            let rhs = a * left_rl_integral(&f, spec, dt).unwrap()
                + b * left_rl_integral(&gsamp, spec, dt).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }

        #[test]
        fn positivity(g in 0.05..0.95f64, seed in 0u64..1000) {
            let n = 24;
            let samples: Vec<f64> = (0..=n)
                .map(|i| ((i as f64 + seed as f64) * 0.7).sin().abs())
                .collect();
            let spec = FractionalSpec::new(g).unwrap();
            let v = left_rl_integral(&samples, spec, 0.05).unwrap();
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn semigroup_spot_check() {
        // I^a(I^b f) = I^{a+b} f for f(t) = t on [0, 1], a = b = 0.25
        let n = 2048;
        let dt = 1.0 / n as f64;
        let spec_b = FractionalSpec::new(0.25).unwrap();
        let inner: Vec<f64> = (0..=n)
            .map(|i| {
                let samples: Vec<f64> = (0..=i).map(|j| j as f64 * dt).collect();
                left_rl_integral(&samples, spec_b, dt).unwrap_or(0.0)
            })
            .collect();
        let spec_a = FractionalSpec::new(0.25).unwrap();
        let lhs = left_rl_integral(&inner, spec_a, dt).unwrap();
        // I^{1/2} t at t = 1 is t^{3/2} / Gamma(5/2) evaluated... precisely
        // Gamma(2)/Gamma(2.5) * 1^{1.5}
        let exact = gamma(2.0) / gamma(2.5);
        assert_relative_eq!(lhs, exact, max_relative = 1e-4);
    }
}
