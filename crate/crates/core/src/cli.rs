//! Command-line front end: simulate, sweep, verify, residual, tstar.

use crate::blowup;
use crate::config::{self, RunConfig};
use crate::error::{Error, Result};
use crate::fracint::{self, FractionalSpec, QuadratureWeights};
use crate::solver::{self, Trajectory};
use crate::sweep;
use crate::testfn::{self, SweepVariable, TestFunction, Which};
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable that overrides the config path (the only override).
pub const CONFIG_ENV: &str = "PPBLOW_CONFIG";

#[derive(Parser)]
#[command(
    name = "ppblow",
    about = "Numerical laboratory for a pseudo-parabolic equation with a fractional memory nonlinearity",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one radial simulation and write trajectory CSV + report JSON
    Simulate {
        /// configuration file
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
    },
    /// Run a (p, gamma, k) parameter grid and write the outcome map CSV
    Sweep {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        /// worker count (default: available parallelism)
        #[arg(short = 'j', long = "workers")]
        workers: Option<usize>,
    },
    /// Check the numerical machinery; exit status reflects pass/fail
    Verify {
        #[arg(value_enum)]
        what: VerifyWhat,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long = "ndim", default_value_t = 3)]
        n_dim: u32,
    },
    /// Assemble the weak-formulation residual of a run
    Residual {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        /// test-function family
        #[arg(long = "testfn", value_enum)]
        testfn: TestFnKind,
    },
    /// Extrapolate the blow-up time from a trajectory CSV
    Tstar {
        /// CSV with t and sup_norm columns (trajectory format or two-column)
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyWhat {
    Fracint,
    Scaling,
    Critical,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestFnKind {
    Subcritical,
    Critical,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path with status 0
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { config } => cmd_simulate(&resolve_config_path(config)),
        Command::Sweep { config, workers } => cmd_sweep(&resolve_config_path(config), workers),
        Command::Verify { what, p, gamma, n_dim } => match what {
            VerifyWhat::Fracint => cmd_verify_fracint(),
            VerifyWhat::Scaling => cmd_verify_scaling(p, gamma, n_dim),
            VerifyWhat::Critical => cmd_verify_critical(n_dim),
        },
        Command::Residual { config, testfn } => cmd_residual(&resolve_config_path(config), testfn),
        Command::Tstar { input, p } => cmd_tstar(&input, p),
    }
}

fn resolve_config_path(flag: PathBuf) -> PathBuf {
    match std::env::var_os(CONFIG_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag,
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    config::parse(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Io(format!("creating {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

/// Standard header comment block for text/CSV artifacts.
fn header(hash: &str) -> String {
    format!("# ppblow output\n# config_hash = {hash}\n")
}

fn trajectory_csv(traj: &Trajectory, hash: &str) -> String {
    let mut out = header(hash);
    out.push_str("t,dt,sup_norm,l2_norm,mass,boundary_value\n");
    for s in &traj.series {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.dt, s.sup_norm, s.l2_norm, s.mass, s.boundary_value
        );
    }
    out
}

/// Write the resolved config echo next to the other artifacts.
fn write_resolved(cfg: &RunConfig, dir: &Path, hash: &str) -> Result<()> {
    let text = format!("{}{}", header(hash), config::serialize(cfg));
    write_file(&dir.join("resolved_config.ini"), &text)
}

fn cmd_simulate(path: &Path) -> Result<i32> {
    let cfg = load_config(path)?;
    let hash = config::config_hash(&cfg);
    let (traj, report) = solver::run(&cfg.problem, &cfg.grid, &cfg.control)?;
    let dir = PathBuf::from(&cfg.output_dir);
    write_resolved(&cfg, &dir, &hash)?;
    write_file(&dir.join("trajectory.csv"), &trajectory_csv(&traj, &hash))?;
    let json = serde_json::json!({
        "config_hash": hash,
        "outcome": report.outcome,
        "t_star_estimate": report.t_star_estimate,
        "fit_exponent": report.fit_exponent,
        "fit_residual": report.fit_residual,
        "threshold_hit_time": report.threshold_hit_time,
        "steps": traj.steps,
        "reached_horizon": traj.reached_horizon,
        "diverged": traj.diverged,
        "boundary_value_final": traj.series.last().map(|s| s.boundary_value),
    });
    write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&json)?)?;
    println!(
        "outcome = {}, t_star = {}, steps = {}",
        report.outcome,
        report
            .t_star_estimate
            .map(|t| format!("{t:.6}"))
            .unwrap_or_else(|| "-".into()),
        traj.steps
    );
    Ok(0)
}

fn cmd_sweep(path: &Path, workers: Option<usize>) -> Result<i32> {
    let cfg = load_config(path)?;
    let hash = config::config_hash(&cfg);
    let sweep_cfg = cfg.to_sweep_config()?;
    let results = match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParam(format!("worker pool: {e}")))?
            .install(|| sweep::run_sweep(&sweep_cfg)),
        _ => sweep::run_sweep(&sweep_cfg),
    }?;
    let dir = PathBuf::from(&cfg.output_dir);
    write_resolved(&cfg, &dir, &hash)?;
    write_file(
        &dir.join("map.csv"),
        &format!("{}{}", header(&hash), sweep::map_csv(&results)),
    )?;
    let table = sweep::classify_map(&results)?;
    write_file(&dir.join("map.txt"), &format!("{}{}", header(&hash), table))?;
    print!("{table}");
    Ok(0)
}

/// Deterministic 64-bit mixer for reproducible test tuples.
fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn cmd_verify_fracint() -> Result<i32> {
    // identity check: adaptive right integral vs the closed form on 20
    // reproducible (m, gamma, T, t) tuples
    let mut state = 0x5eed_u64;
    let mut max_rel: f64 = 0.0;
    for _ in 0..20 {
        let m = 1 + (splitmix(&mut state) * 4.0) as u32;
        let gamma = 0.05 + 0.9 * splitmix(&mut state);
        let t_end = 0.5 + 9.5 * splitmix(&mut state);
        let t = 0.95 * t_end * splitmix(&mut state);
        let quad = fracint::right_rl_integral(
            |s| (1.0 - s / t_end).powi(m as i32),
            t,
            t_end,
            FractionalSpec::new(gamma)?,
        )?;
        let exact = fracint::rl_right_poly_closed_form(m, gamma, t_end, t)?;
        let rel = (quad - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
        max_rel = max_rel.max(rel);
    }
    // weight row sums against the exact value t_n^gamma / Gamma(gamma+1)
    let mut max_rowsum_rel: f64 = 0.0;
    for &gamma in &[0.25, 0.5, 0.75] {
        let w = QuadratureWeights::new(1e-2, gamma)?;
        for n in [1usize, 7, 100] {
            let sum: f64 = w.row(n).iter().sum();
            let exact = w.row_sum_exact(n);
            max_rowsum_rel = max_rowsum_rel.max((sum - exact).abs() / exact);
        }
    }
    let identity_pass = max_rel <= 1e-6;
    let rowsum_pass = max_rowsum_rel <= 1e-13;
    let json = serde_json::json!({
        "check": "fracint",
        "identity_max_rel_error": max_rel,
        "identity_tolerance": 1e-6,
        "row_sum_max_rel_error": max_rowsum_rel,
        "row_sum_tolerance": 1e-13,
        "pass": identity_pass && rowsum_pass,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(if identity_pass && rowsum_pass { 0 } else { 2 })
}

struct SlopeCheck {
    label: String,
    fitted: f64,
    theory: f64,
}

fn slope_json(checks: &[SlopeCheck], tol: f64, name: &str) -> Result<i32> {
    let pass = checks.iter().all(|c| (c.fitted - c.theory).abs() <= tol);
    let json = serde_json::json!({
        "check": name,
        "tolerance": tol,
        "slopes": checks.iter().map(|c| serde_json::json!({
            "label": c.label,
            "fitted": c.fitted,
            "theory": c.theory,
            "abs_err": (c.fitted - c.theory).abs(),
        })).collect::<Vec<_>>(),
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(if pass { 0 } else { 2 })
}

fn cmd_verify_scaling(p: f64, gamma: f64, n_dim: u32) -> Result<i32> {
    let t_values = [1e2, 1e3, 1e4];
    let r_values = [1e2, 1e3, 1e4];
    let r_fixed = 1e2;
    let t_fixed = 1e4;
    let n = n_dim as f64;
    let t_theory = [
        -(gamma + 1.0) / (p - 1.0),
        -(gamma + 1.0) / (p - 1.0),
        1.0 - gamma / (p - 1.0),
    ];
    let r_theory = [n, n - 2.0 * p / (p - 1.0), n - 2.0 * p / (p - 1.0)];
    let mut checks = Vec::new();
    for (idx, which) in [Which::First, Which::Second, Which::Third].into_iter().enumerate() {
        let quantity = [testfn::Quantity::I1, testfn::Quantity::I2, testfn::Quantity::I3][idx];
        let t_samples: Vec<(f64, f64)> = t_values
            .iter()
            .map(|&t| {
                let params = testfn::SubcriticalParams {
                    t_horizon: t,
                    r_scale: r_fixed,
                    p,
                    gamma,
                    n_dim,
                };
                testfn::compute_i(params, which).map(|v| (t, v))
            })
            .collect::<Result<_>>()?;
        let rep =
            testfn::fit_scaling_exponent(&t_samples, quantity, SweepVariable::Horizon, t_theory[idx])?;
        checks.push(SlopeCheck {
            label: format!("{quantity} vs T"),
            fitted: rep.fitted_slope,
            theory: t_theory[idx],
        });
        let r_samples: Vec<(f64, f64)> = r_values
            .iter()
            .map(|&r| {
                let params = testfn::SubcriticalParams {
                    t_horizon: t_fixed,
                    r_scale: r,
                    p,
                    gamma,
                    n_dim,
                };
                testfn::compute_i(params, which).map(|v| (r, v))
            })
            .collect::<Result<_>>()?;
        let rep =
            testfn::fit_scaling_exponent(&r_samples, quantity, SweepVariable::Radius, r_theory[idx])?;
        checks.push(SlopeCheck {
            label: format!("{quantity} vs R"),
            fitted: rep.fitted_slope,
            theory: r_theory[idx],
        });
    }
    slope_json(&checks, 0.05, "scaling")
}

fn cmd_verify_critical(n_dim: u32) -> Result<i32> {
    let p = testfn::p_critical(n_dim)?;
    if !p.is_finite() {
        return Err(Error::InvalidParam(
            "critical verification needs dimension >= 3".into(),
        ));
    }
    let n = n_dim as f64;
    let shape = testfn::FShape::Smooth { kappa: testfn::FShape::kappa_for_p(p) };
    let space_theory = (2.0 - n) / 2.0;
    let mut checks = Vec::new();
    // space factors against ln R
    let ln_r_values = [10.0_f64, 20.0, 40.0];
    let space_samples: Vec<(f64, f64)> = ln_r_values
        .iter()
        .map(|&l| testfn::j_space_factor(l.exp(), p, n_dim, shape).map(|v| (l, v)))
        .collect::<Result<_>>()?;
    for q in [testfn::Quantity::J2, testfn::Quantity::J3] {
        let rep = testfn::fit_scaling_exponent(
            &space_samples,
            q,
            SweepVariable::LogRadius,
            space_theory,
        )?;
        checks.push(SlopeCheck {
            label: format!("{q} space vs lnR"),
            fitted: rep.fitted_slope,
            theory: space_theory,
        });
    }
    // time factors against T (J1 and J2 share the derivative form)
    let t_values = [1e2, 1e3, 1e4];
    let time_theory = 1.0 - p / (p - 1.0);
    let time_samples: Vec<(f64, f64)> = t_values
        .iter()
        .map(|&t| testfn::j_time_factor(t, p, Which::Second).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    for q in [testfn::Quantity::J1, testfn::Quantity::J2] {
        let rep =
            testfn::fit_scaling_exponent(&time_samples, q, SweepVariable::Horizon, time_theory)?;
        checks.push(SlopeCheck {
            label: format!("{q} time vs T"),
            fitted: rep.fitted_slope,
            theory: time_theory,
        });
    }
    slope_json(&checks, 0.05, "critical")
}

fn cmd_residual(path: &Path, kind: TestFnKind) -> Result<i32> {
    let mut cfg = load_config(path)?;
    if cfg.control.store_every == 0 {
        cfg.control.store_every = 1;
    }
    let hash = config::config_hash(&cfg);
    let (traj, _) = solver::run(&cfg.problem, &cfg.grid, &cfg.control)?;
    let tf = match kind {
        TestFnKind::Subcritical => {
            let m = testfn::m_from_p(cfg.problem.p)?;
            TestFunction::Subcritical {
                psi: testfn::TimeCutoff::new(cfg.control.horizon, m)?,
                // keep the support strictly inside the grid
                xi: testfn::SpaceCutoff::for_p(
                    cfg.grid.r_max / std::f64::consts::SQRT_2 * 0.99,
                    cfg.problem.p,
                )?,
            }
        }
        TestFnKind::Critical => TestFunction::Critical {
            eta: testfn::Bump::new(cfg.control.horizon)?,
            phi: testfn::LogCutoff::for_p(cfg.grid.r_max * 0.99, cfg.problem.p)?,
        },
    };
    let res = testfn::weak_residual(&traj, &cfg.problem, &cfg.grid, &tf)?;
    let json = serde_json::json!({
        "config_hash": hash,
        "lhs": res.lhs,
        "rhs": res.rhs,
        "residual": res.residual,
        "relative": res.relative,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(0)
}

fn cmd_tstar(path: &Path, p: f64) -> Result<i32> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    let series = parse_norm_series(&text)?;
    let fit = blowup::estimate_t_star(&series, p)?;
    let json = serde_json::json!({
        "t_star": fit.t_star,
        "fit_exponent": fit.exponent,
        "fit_residual": fit.residual,
        "window_len": fit.window_len,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(0)
}

/// Accepts the trajectory CSV (t,dt,sup_norm,...) or a plain two-column
/// t,sup CSV; comment lines (#) and a header row are skipped.
fn parse_norm_series(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut sup_col = 1usize;
    let mut series = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0].parse::<f64>().is_err() {
            // header row: locate the sup_norm column if named
            if let Some(idx) = fields.iter().position(|&f| f == "sup_norm") {
                sup_col = idx;
            }
            continue;
        }
        if fields.len() <= sup_col {
            return Err(Error::Io(format!("row has too few columns: {line:?}")));
        }
        let t = fields[0]
            .parse::<f64>()
            .map_err(|_| Error::Io(format!("bad time value {:?}", fields[0])))?;
        let s = fields[sup_col]
            .parse::<f64>()
            .map_err(|_| Error::Io(format!("bad sup_norm value {:?}", fields[sup_col])))?;
        series.push((t, s));
    }
    if series.is_empty() {
        return Err(Error::Io("no data rows found".into()));
    }
    Ok(series)
}
