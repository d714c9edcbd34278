//! Independent oracles for the acceptance criteria.
//!
//! Everything here is deliberately built from scratch (composite Simpson,
//! explicit product-rectangle time stepping, hardcoded Gamma constants)
//! so that agreement with the crate is a genuine cross-check rather than
//! the same algorithm compared against itself.

#![allow(dead_code)]

/// Gamma(1.5) = sqrt(pi)/2.
pub const GAMMA_1_5: f64 = 0.886_226_925_452_758;
/// Gamma(1.25).
pub const GAMMA_1_25: f64 = 0.906_402_477_055_477;
/// Gamma(1.75).
pub const GAMMA_1_75: f64 = 0.919_062_526_848_883;

/// Composite Simpson rule with n (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Left Riemann-Liouville integral (I^gamma_{0+} f)(t) by the substitution
/// u = (t - s)^gamma, which removes the kernel singularity:
///   1/Gamma(gamma+1) * int_0^{t^gamma} f(t - u^{1/gamma}) du,
/// evaluated with composite Simpson. `gamma_fact` is Gamma(gamma + 1).
pub fn left_rl_oracle<F: Fn(f64) -> f64>(f: F, gamma_ord: f64, t: f64, gamma_fact: f64) -> f64 {
    let upper = t.powf(gamma_ord);
    let g = |u: f64| {
        if u <= 0.0 {
            f(t)
        } else {
            f(t - u.powf(1.0 / gamma_ord))
        }
    };
    simpson(g, 0.0, upper, 200_000) / gamma_fact
}

/// Threshold-crossing time of the spatially uniform integro-ODE
///   u' = I^gamma_{0+}(u^p) + omega0,  u(0) = 0,
/// marched with fixed-step explicit Euler. The memory term uses midpoint
/// product-rectangle quadrature with the kernel increments
/// ((t_n - t_j)^gamma - (t_n - t_{j+1})^gamma) / Gamma(gamma+1)
/// precomputed on the uniform step lattice. Returns the first time the
/// state exceeds `cap`, or None if `max_steps` is exhausted first.
pub fn integro_ode_crossing(
    p: f64,
    gamma_ord: f64,
    gamma_fact: f64,
    omega0: f64,
    dt: f64,
    cap: f64,
    max_steps: usize,
) -> Option<f64> {
    // kernel primitive (d * dt)^gamma / Gamma(gamma+1) on the lattice
    let kern: Vec<f64> = (0..=max_steps + 1)
        .map(|d| (d as f64 * dt).powf(gamma_ord) / gamma_fact)
        .collect();
    let mut u = vec![0.0_f64];
    let mut fmid: Vec<f64> = Vec::new();
    for n in 0..max_steps {
        let mut mem = 0.0;
        for (j, fm) in fmid.iter().enumerate() {
            mem += fm * (kern[n - j] - kern[n - j - 1]);
        }
        let un = u[n];
        let un1 = un + dt * (mem + omega0);
        fmid.push((0.5 * (un + un1)).powf(p));
        u.push(un1);
        if un1 > cap {
            return Some((n + 1) as f64 * dt);
        }
    }
    None
}
