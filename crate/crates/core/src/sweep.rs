//! Parameter-grid driver: run every (p, gamma, k) combination, classify
//! each trajectory, and emit an empirical outcome map.

use crate::blowup::Outcome;
use crate::error::{Error, Result};
use crate::solver::{self, Bc, Control, Profile, ProblemSpec, RadialGrid};
use crate::testfn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Half-width of the near-critical band |p - p_c| that gets flagged.
pub const NEAR_CRITICAL_BAND: f64 = 0.1;

/// Grid of cases sharing spatial/temporal settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub k_values: Vec<f64>,
    pub n_dim: u32,
    pub omega_amp: f64,
    pub omega_width: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub dt0: f64,
    pub horizon: f64,
    pub threshold: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() {
            return Err(Error::Config { key: "sweep.p".into(), msg: "empty p list".into() });
        }
        if self.gamma_values.is_empty() {
            return Err(Error::Config {
                key: "sweep.gamma".into(),
                msg: "empty gamma list".into(),
            });
        }
        if self.k_values.is_empty() {
            return Err(Error::Config { key: "sweep.k".into(), msg: "empty k list".into() });
        }
        for &p in &self.p_values {
            if !(p > 1.0) {
                return Err(Error::Config {
                    key: "sweep.p".into(),
                    msg: format!("p must exceed 1, got {p}"),
                });
            }
        }
        for &g in &self.gamma_values {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config {
                    key: "sweep.gamma".into(),
                    msg: format!("gamma must lie in [0, 1), got {g}"),
                });
            }
        }
        for &k in &self.k_values {
            if !(k >= 0.0) {
                return Err(Error::Config {
                    key: "sweep.k".into(),
                    msg: format!("k must be nonnegative, got {k}"),
                });
            }
        }
        if !(self.omega_amp > 0.0 && self.omega_width > 0.0) {
            return Err(Error::Config {
                key: "sweep.omega_amp".into(),
                msg: "the forcing must have positive amplitude and width".into(),
            });
        }
        // the theorem machinery needs int omega > 0; verify it via the
        // positivity-radius search
        let (amp, width) = (self.omega_amp, self.omega_width);
        let found = testfn::omega_positivity_radius(
            move |r| amp * (-r * r / (width * width)).exp(),
            testfn::PositivitySearch { n_dim: self.n_dim, ..Default::default() },
        )?;
        if found.is_none() {
            return Err(Error::Config {
                key: "sweep.omega_amp".into(),
                msg: "no radius with positive forcing integral found".into(),
            });
        }
        Ok(())
    }

    fn cases(&self) -> Vec<(f64, f64, f64)> {
        let mut v = Vec::new();
        for &p in &self.p_values {
            for &g in &self.gamma_values {
                for &k in &self.k_values {
                    v.push((p, g, k));
                }
            }
        }
        // deterministic order regardless of scheduling
        v.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        v
    }
}

/// One grid point's classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub n_dim: u32,
    pub k: f64,
    pub p: f64,
    pub gamma: f64,
    pub omega_amp: f64,
    pub outcome: Outcome,
    pub t_star: Option<f64>,
    pub steps: usize,
    pub flagged_near_critical: bool,
    pub wall_ms: u64,
    /// per-case failure message; such rows report outcome undecided
    pub error: Option<String>,
}

fn run_case(cfg: &SweepConfig, p: f64, gamma: f64, k: f64) -> CaseResult {
    let start = std::time::Instant::now();
    let p_c = testfn::p_critical(cfg.n_dim).unwrap_or(f64::INFINITY);
    let flagged = p_c.is_finite() && (p - p_c).abs() < NEAR_CRITICAL_BAND;
    let spec = ProblemSpec {
        k,
        p,
        gamma,
        reaction: 1.0,
        omega: Profile::Gaussian { amp: cfg.omega_amp, width: cfg.omega_width },
        u0: Profile::Zero,
    };
    let result = RadialGrid::new(cfg.n_dim, cfg.r_max, cfg.n_r, Bc::Neumann).and_then(|grid| {
        let control = Control {
            dt0: cfg.dt0,
            horizon: cfg.horizon,
            threshold: cfg.threshold,
            ..Control::default()
        };
        solver::run(&spec, &grid, &control)
    });
    let (outcome, t_star, steps, error) = match result {
        Ok((traj, report)) => (report.outcome, report.t_star_estimate, traj.steps, None),
        Err(e) => (Outcome::Undecided, None, 0, Some(e.to_string())),
    };
    CaseResult {
        n_dim: cfg.n_dim,
        k,
        p,
        gamma,
        omega_amp: cfg.omega_amp,
        outcome,
        t_star,
        steps,
        flagged_near_critical: flagged,
        wall_ms: start.elapsed().as_millis() as u64,
        error,
    }
}

/// Run every case (in parallel when a rayon pool is available) and return
/// the results sorted by (p, gamma, k). Case failures become per-row
/// errors, never a sweep abort.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CaseResult>> {
    cfg.validate()?;
    let cases = cfg.cases();
    let mut results: Vec<CaseResult> = cases
        .par_iter()
        .map(|&(p, g, k)| run_case(cfg, p, g, k))
        .collect();
    results.sort_by(|a, b| {
        a.p.total_cmp(&b.p)
            .then(a.gamma.total_cmp(&b.gamma))
            .then(a.k.total_cmp(&b.k))
    });
    Ok(results)
}

/// Map CSV (deterministic apart from the wall-time column).
pub fn map_csv(results: &[CaseResult]) -> String {
    let mut out =
        String::from("N,k,p,gamma,omega_amp,outcome,t_star,steps,flagged_near_critical,wall_ms\n");
    for r in results {
        let t_star = r
            .t_star
            .map(|t| format!("{t:.16e}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{}\n",
            r.n_dim,
            r.k,
            r.p,
            r.gamma,
            r.omega_amp,
            r.outcome,
            t_star,
            r.steps,
            r.flagged_near_critical,
            r.wall_ms
        ));
    }
    out
}

/// Pivot the results into a p (rows) x gamma (columns) outcome table,
/// annotating the critical exponent p_c = N/(N-2).
pub fn classify_map(results: &[CaseResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InvalidParam("no results to classify".into()));
    }
    let n_dim = results[0].n_dim;
    let p_c = testfn::p_critical(n_dim)?;
    let mut p_values: Vec<f64> = results.iter().map(|r| r.p).collect();
    p_values.sort_by(f64::total_cmp);
    p_values.dedup();
    let mut g_values: Vec<f64> = results.iter().map(|r| r.gamma).collect();
    g_values.sort_by(f64::total_cmp);
    g_values.dedup();
    let cell = |p: f64, g: f64| -> String {
        let matched: Vec<&CaseResult> = results
            .iter()
            .filter(|r| r.p == p && r.gamma == g)
            .collect();
        if matched.is_empty() {
            return "-".into();
        }
        let mut outcomes: Vec<String> = matched.iter().map(|r| r.outcome.to_string()).collect();
        outcomes.dedup();
        let mut s = outcomes.join("/");
        if matched.iter().any(|r| r.flagged_near_critical) {
            s.push('*');
        }
        s
    };
    let mut out = String::new();
    out.push_str(&format!(
        "outcome map, N = {n_dim}, p_c = {}\n",
        if p_c.is_finite() { format!("{p_c:.4}") } else { "inf".into() }
    ));
    out.push_str("p \\ gamma |");
    for g in &g_values {
        out.push_str(&format!(" {g:>9.3} |"));
    }
    out.push('\n');
    for p in &p_values {
        let marker = if p_c.is_finite() && (p - p_c).abs() < 1e-12 {
            " (= p_c)"
        } else if p_c.is_finite() && *p > p_c {
            " (> p_c)"
        } else {
            ""
        };
        out.push_str(&format!("{p:>9.3}{marker:<8} |"));
        for g in &g_values {
            out.push_str(&format!(" {:>9} |", cell(*p, *g)));
        }
        out.push('\n');
    }
    out.push_str("(* = near-critical band, classification advisory only)\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SweepConfig {
        SweepConfig {
            p_values: vec![2.0],
            gamma_values: vec![0.0],
            k_values: vec![1.0],
            n_dim: 3,
            omega_amp: 0.5,
            omega_width: 1.0,
            r_max: 8.0,
            n_r: 33,
            dt0: 1e-2,
            horizon: 20.0,
            threshold: 1e6,
        }
    }

    #[test]
    fn empty_gamma_list_rejected() {
        let cfg = SweepConfig { gamma_values: vec![], ..small_cfg() };
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("gamma"), "{e}");
    }

    #[test]
    fn invalid_p_rejected() {
        let cfg = SweepConfig { p_values: vec![0.5], ..small_cfg() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_case_runs_and_classifies() {
        let results = run_sweep(&small_cfg()).unwrap();
        assert_eq!(results.len(), 1);
        assert!(results[0].error.is_none());
        let table = classify_map(&results).unwrap();
        assert!(table.contains("p_c = 3.0000"), "{table}");
    }

    #[test]
    fn csv_deterministic_modulo_wall_time() {
        let cfg = small_cfg();
        let strip = |csv: String| -> String {
            csv.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = strip(map_csv(&run_sweep(&cfg).unwrap()));
        let b = strip(map_csv(&run_sweep(&cfg).unwrap()));
        assert_eq!(a, b);
    }

    #[test]
    fn results_independent_of_worker_count() {
        let cfg = SweepConfig {
            p_values: vec![2.0, 4.0],
            gamma_values: vec![0.0, 0.5],
            horizon: 5.0,
            ..small_cfg()
        };
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_sweep(&cfg).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_sweep(&cfg).unwrap());
        let key = |r: &CaseResult| (r.p, r.gamma, r.k, r.outcome, r.steps);
        assert_eq!(
            serial.iter().map(key).collect::<Vec<_>>(),
            parallel.iter().map(key).collect::<Vec<_>>()
        );
    }

    #[test]
    fn near_critical_flagging() {
        let cfg = SweepConfig { p_values: vec![2.95], horizon: 2.0, ..small_cfg() };
        let results = run_sweep(&cfg).unwrap();
        assert!(results[0].flagged_near_critical);
    }
}
