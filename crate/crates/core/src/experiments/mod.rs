//! Experiment runner: test-function catalog, convergence along approach
//! paths, domination reports and the invariant verification suite.

pub mod catalog;
pub mod convergence;
pub mod domination;
pub mod verify;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cones::ConeKind;
use crate::config::{LogGrid, QuadratureConfig};
use crate::error::{Error, Result};
use crate::hermite::FunctionRep;
use crate::ou::ou_apply;
use crate::poisson::poisson_apply;
use crate::quadrature::log_grid;

pub use catalog::{catalog, catalog_names, lookup, ClassTag, TestFunction};
pub use convergence::{run_convergence, run_tangential_contrast, ContrastReport, ConvergenceRecord, PathSample};
pub use domination::{run_domination_report, BoundRow, DominationReport, DominationRow};
pub use verify::{run_verify_suite, VerifyLevel, VerifyRecord, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semigroup {
    Ou,
    Poisson,
}

impl Semigroup {
    /// `T_t f(y)` or `P_t f(y)` by the dispatching route.
    pub fn apply(self, f: &FunctionRep, y: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
        match self {
            Semigroup::Ou => ou_apply(f, y, t, cfg),
            Semigroup::Poisson => poisson_apply(f, y, t, cfg),
        }
    }
}

impl fmt::Display for Semigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semigroup::Ou => "ou",
            Semigroup::Poisson => "poisson",
        })
    }
}

impl FromStr for Semigroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ou" => Ok(Semigroup::Ou),
            "poisson" => Ok(Semigroup::Poisson),
            other => Err(Error::config("semigroup", format!("expected `ou` or `poisson`, got `{other}`"))),
        }
    }
}

/// Everything a convergence, contrast or domination run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub semigroup: Semigroup,
    pub function: String,
    pub apexes: Vec<Vec<f64>>,
    pub cone: ConeKind,
    /// Relative aperture at which cone paths travel.
    pub eta: f64,
    /// Ratio `t_{k+1} / t_k` along paths.
    pub decay: f64,
    /// Points per path; derived from `alpha_min` when absent.
    pub path_len: Option<usize>,
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub alphas_per_decade: usize,
    /// `|y - x| = t^exponent` on tangential paths.
    pub tangential_exponent: f64,
    pub quadrature: QuadratureConfig,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

/// Apex grid used when none is given: integer points with `|x| <= 3`
/// (spacing 1 in `d <= 2`, coordinates in `{-1, 0, 1}` for `d = 3`).
pub fn default_apexes(dim: usize) -> Vec<Vec<f64>> {
    let coords: Vec<f64> = match dim {
        1 => (-3..=3).map(f64::from).collect(),
        2 => (-2..=2).map(f64::from).collect(),
        _ => vec![-1.0, 0.0, 1.0],
    };
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                coords.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().map(|v| v * v).sum::<f64>() <= 9.0);
    out
}

impl ExperimentConfig {
    pub fn new(dim: usize, function: &str) -> Self {
        let quadrature = QuadratureConfig::default();
        Self {
            dim,
            semigroup: Semigroup::Ou,
            function: function.to_string(),
            apexes: default_apexes(dim),
            cone: ConeKind::ParabolicGaussian,
            eta: 0.25,
            decay: 0.5,
            path_len: None,
            alpha_max: 1e-1,
            alpha_min: 1e-4,
            alphas_per_decade: 4,
            tangential_exponent: 0.25,
            seed: quadrature.seed,
            quadrature,
            out: None,
        }
    }

    /// Quadrature settings with the experiment seed applied.
    pub fn effective_quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            seed: self.seed,
            ..self.quadrature.clone()
        }
    }

    /// Decreasing geometric grid from `alpha_max` to `alpha_min`.
    pub fn alphas(&self) -> Vec<f64> {
        let decades = (self.alpha_max / self.alpha_min).log10();
        let n = (decades * self.alphas_per_decade as f64).round().max(1.0) as usize + 1;
        let mut g = log_grid(self.alpha_min, self.alpha_max, n);
        g.reverse();
        g
    }

    /// Path length reaching two steps below `alpha_min` from height `t0`.
    pub(crate) fn path_len_from(&self, t0: f64) -> usize {
        self.path_len.unwrap_or_else(|| {
            let steps = ((self.alpha_min / t0).ln() / self.decay.ln()).ceil().max(0.0) as usize;
            steps + 2
        })
    }

    pub fn validate(&self) -> Result<TestFunction> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::config("dim", "must be 1, 2 or 3"));
        }
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return Err(Error::config("eta", "must lie in [0, 1)"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::config("decay", "must lie in (0, 1)"));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max && self.alpha_max.is_finite()) {
            return Err(Error::config("alpha_min", "need 0 < alpha_min < alpha_max < inf"));
        }
        if self.alphas_per_decade == 0 {
            return Err(Error::config("alphas_per_decade", "must be >= 1"));
        }
        if self.path_len == Some(0) {
            return Err(Error::config("path_len", "must be >= 1"));
        }
        if !(self.tangential_exponent > 0.0 && self.tangential_exponent < 0.5) {
            return Err(Error::config("tangential_exponent", "must lie in (0, 1/2)"));
        }
        if self.apexes.is_empty() {
            return Err(Error::config("apex", "need at least one apex"));
        }
        for a in &self.apexes {
            if a.len() != self.dim || a.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("apex", format!("apex {a:?} does not match dimension {}", self.dim)));
            }
        }
        let q = self.effective_quadrature();
        q.validate()?;
        lookup(self.dim, &self.function, &q)
    }

    /// Applies one `key = value` setting. Returns `Ok(false)` for keys this
    /// config does not own so callers can handle them.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::config(key.clone(), format!("`{v}` is not a number")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::config(key.clone(), format!("`{v}` is not a non-negative integer")))
        };
        let q = &mut self.quadrature;
        match key.as_str() {
            "dim" => {
                self.dim = int(value)?;
                if self.apexes.first().is_some_and(|a| a.len() != self.dim) {
                    self.apexes = default_apexes(self.dim);
                }
            }
            "semigroup" => self.semigroup = value.parse()?,
            "function" => self.function = value.to_string(),
            "apex" => self.apexes = parse_apexes(value)?,
            "cone" => {
                self.cone = value
                    .parse()
                    .map_err(|e: Error| Error::config("cone", e.to_string()))?
            }
            "eta" => self.eta = num(value)?,
            "decay" => self.decay = num(value)?,
            "path-len" => self.path_len = Some(int(value)?),
            "alpha-max" => self.alpha_max = num(value)?,
            "alpha-min" => self.alpha_min = num(value)?,
            "alphas-per-decade" => self.alphas_per_decade = int(value)?,
            "exponent" => self.tangential_exponent = num(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::config("seed", format!("`{value}` is not an integer")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "gh-nodes" => q.gh_nodes = int(value)?,
            "improper-nodes" => q.improper_nodes = int(value)?,
            "ball-nodes" => q.ball_nodes = int(value)?,
            "cone-radial" => q.cone_radial = int(value)?,
            "cone-angular" => q.cone_angular = int(value)?,
            "fd-step" => q.fd_step = num(value)?,
            "mc-samples" => q.mc_samples = int(value)?,
            "time-grid" => q.time_grid = parse_grid(&key, value)?,
            "radius-grid" => q.radius_grid = parse_grid(&key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Points separated by `;`, coordinates by `,` (`"0,0; 1,-1"`).
pub fn parse_apexes(value: &str) -> Result<Vec<Vec<f64>>> {
    value
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_point)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::config("apex", e.to_string()))
}

pub fn parse_point(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Error::arg(format!("`{}` is not a coordinate", c.trim())))
        })
        .collect()
}

// "count,lo,hi"
fn parse_grid(key: &str, value: &str) -> Result<LogGrid> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let bad = || Error::config(key, format!("expected `count,lo,hi`, got `{value}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(LogGrid::new(
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", n + 1), format!("expected `key = value`, got `{line}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// `1.5;-2` style rendering used in CSV cells.
pub fn format_point(p: &[f64]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_apexes_stay_in_the_ball() {
        assert_eq!(default_apexes(1).len(), 7);
        let a2 = default_apexes(2);
        assert_eq!(a2.len(), 25);
        assert!(a2.iter().all(|p| p.iter().map(|v| v * v).sum::<f64>() <= 9.0));
        assert_eq!(default_apexes(3).len(), 27);
    }

    #[test]
    fn alpha_grid() {
        let cfg = ExperimentConfig::new(1, "one");
        let a = cfg.alphas();
        assert_eq!(a.len(), 13);
        assert_eq!(a[0], 1e-1);
        assert_eq!(*a.last().unwrap(), 1e-4);
        assert!(a.iter().any(|v| (v / 1e-3 - 1.0).abs() < 1e-12));
        assert!(a.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kv_round_trip() {
        let text = "dim = 2\n# comment\nfunction = bump\napex = 0,0; 1,1\ncone = truncated-parabolic\ngh_nodes = 20\ntime-grid = 8, 1e-3, 1\nformat = json\n";
        let mut cfg = ExperimentConfig::new(1, "one");
        let mut rest = Vec::new();
        for (k, v) in parse_kv(text).unwrap() {
            if !cfg.apply(&k, &v).unwrap() {
                rest.push(k);
            }
        }
        assert_eq!(rest, vec!["format"]);
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.apexes, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(cfg.cone, ConeKind::TruncatedParabolic);
        assert_eq!(cfg.quadrature.gh_nodes, 20);
        assert_eq!(cfg.quadrature.time_grid, LogGrid::new(8, 1e-3, 1.0));
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = ExperimentConfig::new(1, "one");
        cfg.eta = 1.5;
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "eta"));
        let cfg = ExperimentConfig::new(4, "one");
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "dim"));
        let cfg = ExperimentConfig::new(1, "missing");
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "function"));
        let mut cfg = ExperimentConfig::new(1, "one");
        assert!(cfg.apply("eta", "abc").is_err());
        assert!(parse_kv("no equals sign").is_err());
    }
}
