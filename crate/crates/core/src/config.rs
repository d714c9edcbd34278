//! Flat key=value configuration files.
//!
//! Sections: [problem], [grid], [time], [blowup], [output], plus [sweep]
//! for grid runs. The format is deliberately trivial (one `key = value`
//! per line, `#` comments) so any language can parse the artifacts.
//! Parsing and canonical re-serialization are mutually idempotent, and a
//! sha256 of the canonical form stamps every output file.

use crate::error::{Error, Result};
use crate::solver::{Bc, Control, Profile, ProblemSpec, RadialGrid};
use crate::sweep::SweepConfig;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Fully resolved single-run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub grid: RadialGrid,
    pub control: Control,
    pub output_dir: String,
    /// present only when a [sweep] section was given
    pub sweep: Option<SweepLists>,
}

/// The list-valued part of a sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLists {
    pub p_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub k_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec {
                k: 1.0,
                p: 2.0,
                gamma: 0.0,
                reaction: 1.0,
                omega: Profile::Gaussian { amp: 0.1, width: 1.0 },
                u0: Profile::Zero,
            },
            grid: RadialGrid { n_dim: 3, r_max: 10.0, n_r: 129, bc: Bc::Neumann },
            control: Control::default(),
            output_dir: "out".into(),
            sweep: None,
        }
    }
}

fn parse_num(section: &str, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config {
        key: format!("{section}.{key}"),
        msg: format!("expected a number, got {v:?}"),
    })
}

fn parse_usize(section: &str, key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Config {
        key: format!("{section}.{key}"),
        msg: format!("expected a nonnegative integer, got {v:?}"),
    })
}

fn parse_bool(section: &str, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config {
            key: format!("{section}.{key}"),
            msg: format!("expected true or false, got {v:?}"),
        }),
    }
}

fn parse_list(section: &str, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_num(section, key, s.trim()))
        .collect()
}

/// Profile described by its own keys inside a section (prefix omega_/u0_).
#[derive(Debug, Default)]
struct ProfileKeys {
    kind: Option<String>,
    amp: Option<f64>,
    width: Option<f64>,
    quad_coeff: Option<f64>,
}

impl ProfileKeys {
    fn build(&self, path: &str, default: Profile) -> Result<Profile> {
        let Some(kind) = &self.kind else {
            if self.amp.is_some() || self.width.is_some() || self.quad_coeff.is_some() {
                return Err(Error::Config {
                    key: format!("{path}_kind"),
                    msg: "profile parameters given without a kind".into(),
                });
            }
            return Ok(default);
        };
        let amp = self.amp.unwrap_or(1.0);
        let width = self.width.unwrap_or(1.0);
        match kind.as_str() {
            "zero" => Ok(Profile::Zero),
            "constant" => Ok(Profile::Constant { value: amp }),
            "gaussian" => Ok(Profile::Gaussian { amp, width }),
            "poly_gaussian" => Ok(Profile::PolyGaussian {
                amp,
                quad_coeff: self.quad_coeff.unwrap_or(0.0),
                width,
            }),
            other => Err(Error::Config {
                key: format!("{path}_kind"),
                msg: format!(
                    "unknown profile kind {other:?}; expected zero, constant, gaussian or poly_gaussian"
                ),
            }),
        }
    }
}

/// Parse the INI-style text into a resolved config (defaults applied).
pub fn parse(text: &str) -> Result<RunConfig> {
    // gather raw entries first so errors can name section.key
    let mut entries: BTreeMap<(String, String), String> = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config {
                key: format!("line {}", lineno + 1),
                msg: format!("expected `key = value`, got {line:?}"),
            });
        };
        if section.is_empty() {
            return Err(Error::Config {
                key: k.trim().to_string(),
                msg: "key appears before any [section] header".into(),
            });
        }
        entries.insert(
            (section.clone(), k.trim().to_string()),
            v.trim().to_string(),
        );
    }

    let mut cfg = RunConfig::default();
    let mut omega = ProfileKeys::default();
    let mut u0 = ProfileKeys::default();
    let mut sweep: Option<SweepLists> = None;
    for ((sec, key), val) in &entries {
        let path = || format!("{sec}.{key}");
        match (sec.as_str(), key.as_str()) {
            ("problem", "k") => cfg.problem.k = parse_num(sec, key, val)?,
            ("problem", "p") => cfg.problem.p = parse_num(sec, key, val)?,
            ("problem", "gamma") => cfg.problem.gamma = parse_num(sec, key, val)?,
            ("problem", "reaction") => cfg.problem.reaction = parse_num(sec, key, val)?,
            ("problem", "omega_kind") => omega.kind = Some(val.clone()),
            ("problem", "omega_amp") => omega.amp = Some(parse_num(sec, key, val)?),
            ("problem", "omega_width") => omega.width = Some(parse_num(sec, key, val)?),
            ("problem", "omega_quad_coeff") => {
                omega.quad_coeff = Some(parse_num(sec, key, val)?)
            }
            ("problem", "u0_kind") => u0.kind = Some(val.clone()),
            ("problem", "u0_amp") => u0.amp = Some(parse_num(sec, key, val)?),
            ("problem", "u0_width") => u0.width = Some(parse_num(sec, key, val)?),
            ("problem", "u0_quad_coeff") => u0.quad_coeff = Some(parse_num(sec, key, val)?),
            ("grid", "n_dim") => cfg.grid.n_dim = parse_usize(sec, key, val)? as u32,
            ("grid", "r_max") => cfg.grid.r_max = parse_num(sec, key, val)?,
            ("grid", "n_r") => cfg.grid.n_r = parse_usize(sec, key, val)?,
            ("grid", "bc") => {
                cfg.grid.bc = match val.as_str() {
                    "neumann" => Bc::Neumann,
                    "dirichlet" => Bc::Dirichlet,
                    other => {
                        return Err(Error::Config {
                            key: path(),
                            msg: format!("expected neumann or dirichlet, got {other:?}"),
                        })
                    }
                }
            }
            ("time", "dt0") => cfg.control.dt0 = parse_num(sec, key, val)?,
            ("time", "horizon") => cfg.control.horizon = parse_num(sec, key, val)?,
            ("time", "adaptive") => cfg.control.adaptive = parse_bool(sec, key, val)?,
            ("time", "store_every") => cfg.control.store_every = parse_usize(sec, key, val)?,
            ("time", "max_steps") => cfg.control.max_steps = parse_usize(sec, key, val)?,
            ("blowup", "threshold") => cfg.control.threshold = parse_num(sec, key, val)?,
            ("output", "dir") => cfg.output_dir = val.clone(),
            ("sweep", "p") => {
                sweep.get_or_insert_with(SweepLists::empty).p_values = parse_list(sec, key, val)?
            }
            ("sweep", "gamma") => {
                sweep.get_or_insert_with(SweepLists::empty).gamma_values =
                    parse_list(sec, key, val)?
            }
            ("sweep", "k") => {
                sweep.get_or_insert_with(SweepLists::empty).k_values = parse_list(sec, key, val)?
            }
            _ => {
                return Err(Error::Config {
                    key: path(),
                    msg: "unknown configuration key".into(),
                })
            }
        }
    }
    cfg.problem.omega = omega.build("problem.omega", cfg.problem.omega)?;
    cfg.problem.u0 = u0.build("problem.u0", cfg.problem.u0)?;
    cfg.sweep = sweep;
    cfg.problem.validate()?;
    cfg.control.validate()?;
    // re-run the grid invariants (fields were set directly)
    RadialGrid::new(cfg.grid.n_dim, cfg.grid.r_max, cfg.grid.n_r, cfg.grid.bc)?;
    Ok(cfg)
}

impl SweepLists {
    fn empty() -> Self {
        Self { p_values: vec![], gamma_values: vec![], k_values: vec![] }
    }
}

fn profile_lines(out: &mut String, prefix: &str, profile: &Profile) {
    match *profile {
        Profile::Zero => out.push_str(&format!("{prefix}_kind = zero\n")),
        Profile::Constant { value } => {
            out.push_str(&format!("{prefix}_kind = constant\n"));
            out.push_str(&format!("{prefix}_amp = {value}\n"));
        }
        Profile::Gaussian { amp, width } => {
            out.push_str(&format!("{prefix}_kind = gaussian\n"));
            out.push_str(&format!("{prefix}_amp = {amp}\n"));
            out.push_str(&format!("{prefix}_width = {width}\n"));
        }
        Profile::PolyGaussian { amp, quad_coeff, width } => {
            out.push_str(&format!("{prefix}_kind = poly_gaussian\n"));
            out.push_str(&format!("{prefix}_amp = {amp}\n"));
            out.push_str(&format!("{prefix}_quad_coeff = {quad_coeff}\n"));
            out.push_str(&format!("{prefix}_width = {width}\n"));
        }
    }
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical serialization: every key explicit, fixed order.
pub fn serialize(cfg: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str("[problem]\n");
    out.push_str(&format!("k = {}\n", cfg.problem.k));
    out.push_str(&format!("p = {}\n", cfg.problem.p));
    out.push_str(&format!("gamma = {}\n", cfg.problem.gamma));
    out.push_str(&format!("reaction = {}\n", cfg.problem.reaction));
    profile_lines(&mut out, "omega", &cfg.problem.omega);
    profile_lines(&mut out, "u0", &cfg.problem.u0);
    out.push_str("\n[grid]\n");
    out.push_str(&format!("n_dim = {}\n", cfg.grid.n_dim));
    out.push_str(&format!("r_max = {}\n", cfg.grid.r_max));
    out.push_str(&format!("n_r = {}\n", cfg.grid.n_r));
    out.push_str(&format!(
        "bc = {}\n",
        match cfg.grid.bc {
            Bc::Neumann => "neumann",
            Bc::Dirichlet => "dirichlet",
        }
    ));
    out.push_str("\n[time]\n");
    out.push_str(&format!("dt0 = {}\n", cfg.control.dt0));
    out.push_str(&format!("horizon = {}\n", cfg.control.horizon));
    out.push_str(&format!("adaptive = {}\n", cfg.control.adaptive));
    out.push_str(&format!("store_every = {}\n", cfg.control.store_every));
    out.push_str(&format!("max_steps = {}\n", cfg.control.max_steps));
    out.push_str("\n[blowup]\n");
    out.push_str(&format!("threshold = {}\n", cfg.control.threshold));
    out.push_str("\n[output]\n");
    out.push_str(&format!("dir = {}\n", cfg.output_dir));
    if let Some(sweep) = &cfg.sweep {
        out.push_str("\n[sweep]\n");
        out.push_str(&format!("p = {}\n", join_list(&sweep.p_values)));
        out.push_str(&format!("gamma = {}\n", join_list(&sweep.gamma_values)));
        out.push_str(&format!("k = {}\n", join_list(&sweep.k_values)));
    }
    out
}

/// Hex sha256 of the canonical serialization.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serialize(cfg).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// Promote to a sweep configuration; requires a [sweep] section.
    pub fn to_sweep_config(&self) -> Result<SweepConfig> {
        let lists = self.sweep.as_ref().ok_or_else(|| Error::Config {
            key: "sweep".into(),
            msg: "missing [sweep] section".into(),
        })?;
        let (omega_amp, omega_width) = match self.problem.omega {
            Profile::Gaussian { amp, width } => (amp, width),
            _ => {
                return Err(Error::Config {
                    key: "problem.omega_kind".into(),
                    msg: "sweeps use the gaussian forcing family".into(),
                })
            }
        };
        Ok(SweepConfig {
            p_values: lists.p_values.clone(),
            gamma_values: lists.gamma_values.clone(),
            k_values: lists.k_values.clone(),
            n_dim: self.grid.n_dim,
            omega_amp,
            omega_width,
            r_max: self.grid.r_max,
            n_r: self.grid.n_r,
            dt0: self.control.dt0,
            horizon: self.control.horizon,
            threshold: self.control.threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# a run
[problem]
k = 1.0
p = 2
gamma = 0.5
omega_kind = gaussian
omega_amp = 0.1
omega_width = 1.0

[grid]
n_dim = 3
r_max = 8
n_r = 65

[time]
dt0 = 0.005
horizon = 2.0

[blowup]
threshold = 1e6
";

    #[test]
    fn parses_and_applies_defaults() {
        let cfg = parse(SAMPLE).unwrap();
        assert_eq!(cfg.problem.p, 2.0);
        assert_eq!(cfg.grid.n_r, 65);
        assert_eq!(cfg.grid.bc, Bc::Neumann); // default
        assert_eq!(cfg.control.threshold, 1e6);
        assert_eq!(cfg.problem.u0, Profile::Zero); // default
    }

    #[test]
    fn round_trip_idempotent() {
        let cfg = parse(SAMPLE).unwrap();
        let text = serialize(&cfg);
        let cfg2 = parse(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(text, serialize(&cfg2));
        assert_eq!(config_hash(&cfg), config_hash(&cfg2));
    }

    #[test]
    fn unknown_key_named_with_path() {
        let e = parse("[problem]\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("problem.bogus"), "{e}");
    }

    #[test]
    fn type_mismatch_named_with_path() {
        let e = parse("[grid]\nn_r = many\n").unwrap_err();
        assert!(e.to_string().contains("grid.n_r"), "{e}");
    }

    #[test]
    fn invalid_p_reported() {
        let e = parse("[problem]\np = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("p must exceed 1"), "{e}");
    }

    #[test]
    fn sweep_section_round_trips() {
        let text = format!("{SAMPLE}\n[sweep]\np = 2, 3\ngamma = 0, 0.5\nk = 1\n");
        let cfg = parse(&text).unwrap();
        let sweep = cfg.to_sweep_config().unwrap();
        assert_eq!(sweep.p_values, vec![2.0, 3.0]);
        assert_eq!(sweep.gamma_values, vec![0.0, 0.5]);
        let cfg2 = parse(&serialize(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn hash_changes_with_content() {
        let a = parse(SAMPLE).unwrap();
        let mut b = a.clone();
        b.problem.p = 3.0;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
