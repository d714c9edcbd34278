//! End-to-end acceptance suite: ten numbered criteria, each printed as a
//! single PASS/FAIL line (run with `--nocapture` to see them on success).
//! Tolerances are pinned here and nowhere else; the oracles live in
//! `common` and are implemented independently of the crate.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use ppblow::blowup::Outcome;
use ppblow::fracint::{
    left_rl_integral, right_rl_integral, rl_right_poly_closed_form, FractionalSpec,
    QuadratureWeights,
};
use ppblow::solver::{run, run_from, Bc, Control, ProblemSpec, Profile, RadialGrid};
use ppblow::testfn::{
    compute_i, fit_scaling_exponent, j_space_factor, j_time_factor, m_from_p,
    omega_positivity_radius, weak_residual, FShape, PositivitySearch, Quantity, SpaceCutoff,
    SubcriticalParams, SweepVariable, TestFunction, TimeCutoff, Which,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Tally {
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn report(&mut self, idx: u32, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("acceptance {idx:02} {name:<28} {verdict}  ({detail})");
        if !pass {
            self.failures.push(format!("{idx:02} {name}: {detail}"));
        }
    }
}

fn grid3(r_max: f64, n_r: usize, bc: Bc) -> RadialGrid {
    RadialGrid::new(3, r_max, n_r, bc).unwrap()
}

fn gaussian_omega(amp: f64) -> Profile {
    Profile::Gaussian { amp, width: 1.0 }
}

/// 1. Right-integral quadrature against the closed form of the polynomial
///    cutoff on 20 seeded random (m, gamma, T, t) tuples, within 1e-6.
fn criterion_1(t: &mut Tally) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let m: u32 = rng.gen_range(1..=4);
        let g: f64 = rng.gen_range(0.05..0.95);
        let t_end: f64 = rng.gen_range(0.5..20.0);
        let tt: f64 = rng.gen_range(0.0..0.9) * t_end;
        let spec = FractionalSpec::new(g).unwrap();
        let quad_val =
            right_rl_integral(|s| (1.0 - s / t_end).powi(m as i32), tt, t_end, spec).unwrap();
        let closed = rl_right_poly_closed_form(m, g, t_end, tt).unwrap();
        worst = worst.max((quad_val - closed).abs() / closed.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    t.report(
        1,
        "fractional-closed-form",
        worst <= 1e-6 && secs < 10.0,
        format!("max rel err {worst:.2e}, {secs:.1}s"),
    );
}

/// 2. Convolution-weight row sums equal t^gamma/Gamma(gamma+1) to 1e-13
///    (Gamma constants hardcoded in the oracle), and the left integral
///    converges with order >= 1.8 over three halvings against an
///    independent Simpson oracle.
fn criterion_2(t: &mut Tally) {
    let mut worst_sum = 0.0_f64;
    for &(g, gf) in &[
        (0.25, common::GAMMA_1_25),
        (0.5, common::GAMMA_1_5),
        (0.75, common::GAMMA_1_75),
    ] {
        let w = QuadratureWeights::new(0.01, g).unwrap();
        for n in [1usize, 5, 50, 500] {
            let sum: f64 = w.row(n).iter().sum();
            let exact = (0.01 * n as f64).powf(g) / gf;
            worst_sum = worst_sum.max((sum - exact).abs() / exact);
        }
    }

    let f = |x: f64| (2.0 * x).sin() + 1.0;
    let g = 0.5;
    let reference = common::left_rl_oracle(f, g, 1.0, common::GAMMA_1_5);
    let spec = FractionalSpec::new(g).unwrap();
    let mut errs = Vec::new();
    for n in [128usize, 256, 512, 1024] {
        let dt = 1.0 / n as f64;
        let samples: Vec<f64> = (0..=n).map(|i| f(i as f64 * dt)).collect();
        let v = left_rl_integral(&samples, spec, dt).unwrap();
        errs.push((v - reference).abs());
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    t.report(
        2,
        "weights-and-convergence",
        worst_sum <= 1e-13 && min_order >= 1.8,
        format!("row-sum rel err {worst_sum:.2e}, orders {orders:.2?}"),
    );
}

/// 3. Subcritical scaling integrals at (p, gamma, N) = (2, 0.5, 3):
///    T-slopes (-1.5, -1.5, +0.5) at R = 1e2, R-slopes (3, -1, -1) at
///    T = 1e4, all within 0.05, in under 60 s.
fn criterion_3(t: &mut Tally) {
    let start = Instant::now();
    let (p, g, n_dim) = (2.0, 0.5, 3u32);
    let quantities = [Quantity::I1, Quantity::I2, Quantity::I3];
    let whichs = [Which::First, Which::Second, Which::Third];
    let mut worst = 0.0_f64;
    let mut detail = String::new();

    let t_theory = [-1.5, -1.5, 0.5];
    for i in 0..3 {
        let samples: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&t_h| {
                let params =
                    SubcriticalParams { t_horizon: t_h, r_scale: 1e2, p, gamma: g, n_dim };
                (t_h, compute_i(params, whichs[i]).unwrap())
            })
            .collect();
        let rep =
            fit_scaling_exponent(&samples, quantities[i], SweepVariable::Horizon, t_theory[i])
                .unwrap();
        worst = worst.max(rep.slope_error());
        detail.push_str(&format!("{}(T)={:+.3} ", quantities[i], rep.fitted_slope));
    }

    let r_theory = [3.0, -1.0, -1.0];
    for i in 0..3 {
        let samples: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&r| {
                let params =
                    SubcriticalParams { t_horizon: 1e4, r_scale: r, p, gamma: g, n_dim };
                (r, compute_i(params, whichs[i]).unwrap())
            })
            .collect();
        let rep = fit_scaling_exponent(&samples, quantities[i], SweepVariable::Radius, r_theory[i])
            .unwrap();
        worst = worst.max(rep.slope_error());
        detail.push_str(&format!("{}(R)={:+.3} ", quantities[i], rep.fitted_slope));
    }
    let secs = start.elapsed().as_secs_f64();
    t.report(
        3,
        "subcritical-scaling",
        worst <= 0.05 && secs < 60.0,
        format!("{detail}max dev {worst:.1e}, {secs:.1}s"),
    );
}

/// 4. Critical-case factors in N = 3 (p = 3): the J2/J3 space factor
///    scales like (ln R)^{-1/2} over ln R in {10, 20, 40} and the
///    derivative-power time factor like T^{-1/2} over T in {1e2..1e4},
///    both slopes within 0.05.
fn criterion_4(t: &mut Tally) {
    let p = 3.0;
    let shape = FShape::Smooth { kappa: FShape::kappa_for_p(p) };
    let space_samples: Vec<(f64, f64)> = [10.0_f64, 20.0, 40.0]
        .iter()
        .map(|&l| (l, j_space_factor(l.exp(), p, 3, shape).unwrap()))
        .collect();
    let space = fit_scaling_exponent(&space_samples, Quantity::J2, SweepVariable::LogRadius, -0.5)
        .unwrap();
    let time_samples: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t_h| (t_h, j_time_factor(t_h, p, Which::Second).unwrap()))
        .collect();
    let time =
        fit_scaling_exponent(&time_samples, Quantity::J2, SweepVariable::Horizon, -0.5).unwrap();
    let worst = space.slope_error().max(time.slope_error());
    t.report(
        4,
        "critical-log-scaling",
        worst <= 0.05,
        format!(
            "space slope {:+.4}, time slope {:+.4}",
            space.fitted_slope, time.fitted_slope
        ),
    );
}

/// 5. Linear solver verification: the Dirichlet eigenmode decays at rate
///    lambda/(1 + k lambda) to 1e-3, and the heat-kernel run shows
///    observed order >= 0.9 in dt and >= 1.8 in dr (orders taken from
///    error differences so the fixed bias of the other variable cancels).
fn criterion_5(t: &mut Tally) {
    // eigenmode decay
    let grid = grid3(1.0, 201, Bc::Dirichlet);
    let spec = ProblemSpec {
        k: 1.0,
        p: 2.0,
        gamma: 0.0,
        reaction: 0.0,
        omega: Profile::Zero,
        u0: Profile::Zero,
    };
    let u0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| if r < 1e-12 { PI } else { (PI * r).sin() / r })
        .collect();
    let control = Control { dt0: 1e-4, horizon: 0.5, adaptive: false, ..Control::default() };
    let (traj, _) = run_from(u0, &spec, &grid, &control).unwrap();
    let first = &traj.series[0];
    let last = traj.series.last().unwrap();
    let rate = (first.sup_norm / last.sup_norm).ln() / (last.t - first.t);
    let pi2 = PI * PI;
    let rate_err = (rate - pi2 / (1.0 + pi2)).abs() / (pi2 / (1.0 + pi2));

    // heat kernel: pure heat equation, exact spreading Gaussian
    let t0 = 0.5;
    let horizon = 0.5;
    let heat_spec = ProblemSpec {
        k: 0.0,
        p: 2.0,
        gamma: 0.0,
        reaction: 0.0,
        omega: Profile::Zero,
        u0: Profile::Gaussian { amp: (4.0 * PI * t0).powf(-1.5), width: (4.0 * t0).sqrt() },
    };
    let sup_err = |n_r: usize, dt: f64| -> f64 {
        let grid = grid3(10.0, n_r, Bc::Neumann);
        // storing only first and last profile: the cadence never triggers,
        // but the final profile is always appended
        let control = Control {
            dt0: dt,
            horizon,
            adaptive: false,
            store_every: 1_000_000,
            ..Control::default()
        };
        let (traj, _) = run(&heat_spec, &grid, &control).unwrap();
        assert!(traj.reached_horizon);
        let (_, u) = traj.profiles.last().unwrap();
        let tf = t0 + horizon;
        grid.nodes()
            .iter()
            .zip(u)
            .map(|(&r, &v)| {
                (v - (4.0 * PI * tf).powf(-1.5) * (-r * r / (4.0 * tf)).exp()).abs()
            })
            .fold(0.0_f64, f64::max)
    };
    let e_dt: Vec<f64> = [8e-3, 4e-3, 2e-3].iter().map(|&dt| sup_err(257, dt)).collect();
    let e_dr: Vec<f64> = [65usize, 129, 257].iter().map(|&n| sup_err(n, 1e-3)).collect();
    let diff_order = |e: &[f64]| -> f64 {
        let (d1, d2) = (e[0] - e[1], e[1] - e[2]);
        if d1 > 0.0 && d2 > 0.0 {
            (d1 / d2).log2()
        } else {
            f64::NAN
        }
    };
    let order_dt = diff_order(&e_dt);
    let order_dr = diff_order(&e_dr);
    t.report(
        5,
        "linear-solver-orders",
        rate_err <= 1e-3 && order_dt >= 0.9 && order_dr >= 1.8,
        format!("decay rel err {rate_err:.1e}, order dt {order_dt:.2}, order dr {order_dr:.2}"),
    );
}

/// 6. Blow-up time extrapolation: the uniform tan run hits pi/2 within 1%
///    and the gamma = 0.5 uniform run lands within 2% of a 100x-finer
///    explicit integro-ODE reference.
fn criterion_6(t: &mut Tally) {
    let grid = grid3(1.0, 16, Bc::Neumann);
    let tan_spec = ProblemSpec {
        k: 0.0,
        p: 2.0,
        gamma: 0.0,
        reaction: 1.0,
        omega: Profile::Constant { value: 1.0 },
        u0: Profile::Zero,
    };
    let control = Control { dt0: 1e-3, horizon: 2.0, threshold: 1e6, ..Control::default() };
    let (_, report) = run(&tan_spec, &grid, &control).unwrap();
    let tan_t_star = report.t_star_estimate.unwrap_or(f64::NAN);
    let tan_err = (tan_t_star - FRAC_PI_2).abs() / FRAC_PI_2;

    let frac_spec = ProblemSpec { gamma: 0.5, k: 1.0, ..tan_spec };
    let control = Control { dt0: 1e-2, horizon: 3.0, threshold: 1e6, ..Control::default() };
    let (_, report) = run(&frac_spec, &grid, &control).unwrap();
    let frac_t_star = report.t_star_estimate.unwrap_or(f64::NAN);
    let reference =
        common::integro_ode_crossing(2.0, 0.5, common::GAMMA_1_5, 1.0, 1e-4, 1e6, 40_000)
            .unwrap();
    let frac_err = (frac_t_star - reference).abs() / reference;
    t.report(
        6,
        "blowup-time-extrapolation",
        report.outcome == Outcome::Blowup && tan_err <= 0.01 && frac_err <= 0.02,
        format!(
            "tan {tan_t_star:.4} (err {tan_err:.1e}), frac {frac_t_star:.4} vs ref {reference:.4} (err {frac_err:.1e})"
        ),
    );
}

/// 7. Neumann mass balance: the flux form telescopes, so the mass change
///    matches the time-accumulated source integral with a defect below
///    5 * dt * horizon * max |RHS integral|.
fn criterion_7(t: &mut Tally) {
    let grid = grid3(5.0, 64, Bc::Neumann);
    let spec = ProblemSpec {
        k: 1.0,
        p: 2.0,
        gamma: 0.0,
        reaction: 1.0,
        omega: Profile::Gaussian { amp: 0.5, width: 1.0 },
        u0: Profile::Gaussian { amp: 0.2, width: 1.5 },
    };
    let control = Control {
        dt0: 1e-2,
        horizon: 1.0,
        adaptive: false,
        store_every: 1,
        ..Control::default()
    };
    let (traj, _) = run(&spec, &grid, &control).unwrap();
    let vols = grid.cell_volumes();
    let omega_int: f64 = grid
        .nodes()
        .iter()
        .zip(&vols)
        .map(|(&r, &v)| spec.omega.eval(r) * v)
        .sum();
    // gamma = 0: the memory term is just reaction * |u^n|^p, so the exact
    // per-step source integral is recoverable from the stored profiles
    let mut rhs_accum = 0.0;
    let mut max_rhs = 0.0_f64;
    for (i, sample) in traj.series.iter().enumerate().skip(1) {
        let (_, u_prev) = &traj.profiles[i - 1];
        let mem_int: f64 = u_prev
            .iter()
            .zip(&vols)
            .map(|(&u, &v)| spec.reaction * u.abs().powf(spec.p) * v)
            .sum();
        let rhs = mem_int + omega_int;
        max_rhs = max_rhs.max(rhs.abs());
        rhs_accum += sample.dt * rhs;
    }
    let mass0 = traj.series[0].mass;
    let mass1 = traj.series.last().unwrap().mass;
    let defect = (mass1 - mass0 - rhs_accum).abs();
    let bound = 5.0 * control.dt0 * control.horizon * max_rhs;
    t.report(
        7,
        "neumann-mass-balance",
        defect <= bound,
        format!("defect {defect:.2e} <= bound {bound:.2e}"),
    );
}

/// 8. The weak-formulation residual of a linear-regime run shrinks by at
///    least 1.8x under a simultaneous (dt, dr) halving.
fn criterion_8(t: &mut Tally) {
    let run_linear = |n_r: usize, dt: f64| {
        let grid = grid3(6.0, n_r, Bc::Neumann);
        let spec = ProblemSpec {
            k: 1.0,
            p: 2.0,
            gamma: 0.0,
            reaction: 0.0,
            omega: Profile::Gaussian { amp: 0.3, width: 1.0 },
            u0: Profile::Gaussian { amp: 0.2, width: 1.5 },
        };
        let control = Control {
            dt0: dt,
            horizon: 0.5,
            adaptive: false,
            store_every: 1,
            ..Control::default()
        };
        let (traj, _) = run(&spec, &grid, &control).unwrap();
        let tf = TestFunction::Subcritical {
            psi: TimeCutoff::new(0.5, m_from_p(spec.p).unwrap()).unwrap(),
            xi: SpaceCutoff::for_p(3.0, spec.p).unwrap(),
        };
        weak_residual(&traj, &spec, &grid, &tf).unwrap()
    };
    let coarse = run_linear(65, 4e-3);
    let fine = run_linear(129, 2e-3);
    let ratio = coarse.residual.abs() / fine.residual.abs();
    t.report(
        8,
        "weak-residual-refinement",
        ratio >= 1.8,
        format!(
            "residual {:.2e} -> {:.2e}, ratio {ratio:.2}",
            coarse.residual, fine.residual
        ),
    );
}

/// 9. Theorem shadow in N = 3, k = 1 with the Gaussian forcing amp 0.1:
///    supercritical-forcing and memory rows blow up, the small-data
///    global row stays bounded, and the critical row never looks like
///    decay to boundedness.
fn criterion_9(t: &mut Tally) {
    let base = ProblemSpec {
        k: 1.0,
        p: 2.0,
        gamma: 0.0,
        reaction: 1.0,
        omega: gaussian_omega(0.1),
        u0: Profile::Zero,
    };
    let run_case = |spec: ProblemSpec, grid: RadialGrid, control: Control| {
        let (traj, report) = run(&spec, &grid, &control).unwrap();
        (traj, report)
    };

    let (_, rep_a) = run_case(
        base,
        grid3(10.0, 65, Bc::Neumann),
        Control { dt0: 1e-2, horizon: 1e3, threshold: 1e8, ..Control::default() },
    );
    let (_, rep_b) = run_case(
        ProblemSpec { p: 6.0, gamma: 0.5, ..base },
        grid3(2.0, 33, Bc::Neumann),
        Control { dt0: 1e-2, horizon: 60.0, threshold: 1e6, ..Control::default() },
    );
    let (_, rep_c) = run_case(
        ProblemSpec { p: 6.0, ..base },
        grid3(15.0, 151, Bc::Dirichlet),
        Control { dt0: 5e-2, horizon: 1e3, threshold: 1e8, ..Control::default() },
    );
    let (traj_d, rep_d) = run_case(
        ProblemSpec { p: 3.0, ..base },
        grid3(10.0, 65, Bc::Neumann),
        Control { dt0: 1e-2, horizon: 1e3, threshold: 1e8, ..Control::default() },
    );
    // critical row: blow-up, or undecided with monotone growth; a decay
    // to boundedness would contradict the blow-up result at p = p_c
    let series = traj_d.norm_series();
    let monotone = series.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
    let d_ok = rep_d.outcome == Outcome::Blowup
        || (rep_d.outcome == Outcome::Undecided && monotone);
    t.report(
        9,
        "theorem-shadow",
        rep_a.outcome == Outcome::Blowup
            && rep_b.outcome == Outcome::Blowup
            && rep_c.outcome == Outcome::Bounded
            && d_ok,
        format!(
            "(p=2,g=0) {} | (p=6,g=0.5) {} | (p=6,g=0) {} | (p=3,g=0) {}",
            rep_a.outcome, rep_b.outcome, rep_c.outcome, rep_d.outcome
        ),
    );
}

/// 10. The positivity-radius search returns a finite radius for a forcing
///     with oracle-verified positive integral and none for an
///     oracle-verified negative-integral example.
fn criterion_10(t: &mut Tally) {
    let positive = |r: f64| 0.1 * (1.0 - 0.1 * r * r) * (-r * r).exp();
    let negative = |r: f64| (r * r - 3.0) * (-r * r).exp();
    let oracle_pos = common::simpson(|r| positive(r) * r * r, 0.0, 30.0, 20_000);
    let oracle_neg = common::simpson(|r| negative(r) * r * r, 0.0, 30.0, 20_000);
    let search = PositivitySearch::default();
    let found_pos = omega_positivity_radius(positive, search).unwrap();
    let found_neg = omega_positivity_radius(negative, search).unwrap();
    t.report(
        10,
        "positivity-radius",
        oracle_pos > 0.0 && oracle_neg < 0.0 && found_pos.is_some() && found_neg.is_none(),
        format!(
            "oracle ({oracle_pos:.2e}, {oracle_neg:.2e}), search ({found_pos:?}, {found_neg:?})"
        ),
    );
}

#[test]
fn acceptance() {
    let mut tally = Tally::new();
    criterion_1(&mut tally);
    criterion_2(&mut tally);
    criterion_3(&mut tally);
    criterion_4(&mut tally);
    criterion_5(&mut tally);
    criterion_6(&mut tally);
    criterion_7(&mut tally);
    criterion_8(&mut tally);
    criterion_9(&mut tally);
    criterion_10(&mut tally);
    assert!(
        tally.failures.is_empty(),
        "acceptance failures:\n{}",
        tally.failures.join("\n")
    );
}
