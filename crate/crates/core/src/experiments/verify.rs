use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{catalog, run_convergence, run_domination_report, ClassTag, ExperimentConfig, Semigroup, TestFunction};
use crate::cones::{cone_contains, cone_path, ConeKind, ConeSpec};
use crate::config::{LogGrid, QuadratureConfig};
use crate::error::{Error, Result};
use crate::hermite::{enumerate_multi_indices, gram_matrix, hermite_eval, FunctionRep, HermiteSeries};
use crate::measure::{gaussian_norm_1d_adaptive, gaussian_norm_of};
use crate::ou::{mehler_scales, ou_apply_1d_adaptive, ou_apply_change_of_var, ou_apply_kernel, ou_apply_spectral, ou_series};
use crate::poisson::{
    bochner_scalar, poisson_apply_kernel, poisson_apply_spectral, poisson_apply_subordination, poisson_series,
    SubordinationQuadrature,
};
use crate::quadrature::AdaptiveTolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Fast,
    Full,
}

impl fmt::Display for VerifyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyLevel::Fast => "fast",
            VerifyLevel::Full => "full",
        })
    }
}

impl FromStr for VerifyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fast" => Ok(VerifyLevel::Fast),
            "full" => Ok(VerifyLevel::Full),
            other => Err(Error::config("level", format!("expected `fast` or `full`, got `{other}`"))),
        }
    }
}

/// One checked invariant; `margin` is the measured defect and passes when
/// it does not exceed `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub invariant: String,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub seed: u64,
    pub pass: bool,
    pub records: Vec<VerifyRecord>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Suite {
    records: Vec<VerifyRecord>,
}

impl Suite {
    fn push(&mut self, invariant: impl Into<String>, margin: f64, tolerance: f64) {
        self.records.push(VerifyRecord {
            invariant: invariant.into(),
            margin,
            tolerance,
            pass: margin <= tolerance,
        });
    }

    // an error inside a check is a failed record, not an aborted suite
    fn run(&mut self, invariant: &str, tolerance: f64, check: impl FnOnce() -> Result<f64>) {
        let margin = check().unwrap_or(f64::INFINITY);
        self.push(invariant, margin, tolerance);
    }
}

fn random_series(rng: &mut ChaCha8Rng, dim: usize, max_degree: u32) -> Result<HermiteSeries> {
    let terms = enumerate_multi_indices(dim, max_degree)?
        .into_iter()
        .map(|b| (b, rng.gen_range(-1.0..1.0)))
        .collect::<Vec<_>>();
    HermiteSeries::from_terms(dim, terms)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, bound: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
}

fn orthonormality(dim: usize) -> Result<f64> {
    let betas = enumerate_multi_indices(dim, 6)?;
    let g = gram_matrix(&betas, &QuadratureConfig::default())?;
    let mut worst: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(worst)
}

fn eigenrelation(dim: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for beta in enumerate_multi_indices(dim, 6)? {
        let s = HermiteSeries::basis(beta.clone());
        for _ in 0..20 {
            let x = random_point(rng, dim, 3.0);
            let l = s.generator(&x)?;
            worst = worst.max((l + beta.degree() as f64 * hermite_eval(&beta, &x)?).abs());
        }
    }
    Ok(worst)
}

fn markov(dim: usize) -> Result<f64> {
    let one = FunctionRep::pointwise(dim, |_| 1.0);
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for t in LogGrid::new(11, 1e-4, 10.0).values() {
        for x in [vec![0.0; dim], vec![4.0 / (dim as f64).sqrt(); dim], vec![-2.5; dim]] {
            worst = worst.max((ou_apply_kernel(&one, &x, t, &cfg)? - 1.0).abs());
        }
    }
    Ok(worst)
}

fn ou_routes(dim: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let cfg = QuadratureConfig {
        gh_nodes: 40,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let s = random_series(rng, dim, 6)?;
        let f: FunctionRep = s.clone().into();
        for t in [0.1, 1.0, 4.0] {
            let x = random_point(rng, dim, 2.0);
            let a = ou_apply_kernel(&f, &x, t, &cfg)?;
            let b = ou_apply_change_of_var(&f, &x, t, &cfg)?;
            let c = ou_apply_spectral(&s, &x, t)?;
            worst = worst.max((a - c).abs()).max((b - c).abs()).max((a - b).abs());
        }
    }
    Ok(worst)
}

fn poisson_routes(dim: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let cfg = QuadratureConfig {
        gh_nodes: 12,
        ..Default::default()
    };
    let s = random_series(rng, dim, 6)?;
    let f: FunctionRep = s.clone().into();
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 1.0, 4.0] {
        let x = random_point(rng, dim, 2.0);
        let a = poisson_apply_subordination(&f, &x, t, &cfg)?;
        let b = poisson_apply_kernel(&f, &x, t, &cfg)?;
        let c = poisson_apply_spectral(&s, &x, t)?;
        worst = worst.max((a - c).abs()).max((b - c).abs()).max((a - b).abs());
    }
    Ok(worst)
}

fn bochner() -> Result<f64> {
    let q = SubordinationQuadrature::for_time(QuadratureConfig::default().improper_nodes, 1.0)?;
    Ok([0.0, 0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&l| (bochner_scalar(l, &q) - (-l).exp()).abs())
        .fold(0.0, f64::max))
}

fn semigroup_spectral(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in 1..=3 {
        let s = random_series(rng, dim, 6)?;
        let x = random_point(rng, dim, 2.0);
        for (t, u) in [(0.3, 0.7), (1e-3, 2.0)] {
            let a = ou_apply_spectral(&s, &x, t + u)?;
            let b = ou_apply_spectral(&ou_series(&s, u), &x, t)?;
            let c = poisson_apply_spectral(&s, &x, t + u)?;
            let d = poisson_apply_spectral(&poisson_series(&s, u), &x, t)?;
            worst = worst.max((a - b).abs() / a.abs().max(1.0)).max((c - d).abs() / c.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn semigroup_quadrature(rng: &mut ChaCha8Rng, poisson: bool) -> Result<f64> {
    let cfg = QuadratureConfig {
        gh_nodes: 16,
        ..Default::default()
    };
    let s = random_series(rng, 1, 6)?;
    let f: FunctionRep = s.clone().into();
    let mut worst: f64 = 0.0;
    for (t, u) in [(0.2, 0.5), (1.0, 0.3)] {
        let x = [rng.gen_range(-2.0..2.0)];
        let (direct, inner_fn): (f64, FunctionRep) = if poisson {
            let (f, cfg) = (f.clone(), cfg.clone());
            (
                poisson_apply_subordination(&f, &x, t + u, &cfg)?,
                FunctionRep::pointwise(1, move |y| poisson_apply_subordination(&f, y, u, &cfg).unwrap_or(f64::NAN)),
            )
        } else {
            let (f, cfg) = (f.clone(), cfg.clone());
            (
                ou_apply_kernel(&f, &x, t + u, &cfg)?,
                FunctionRep::pointwise(1, move |y| ou_apply_kernel(&f, y, u, &cfg).unwrap_or(f64::NAN)),
            )
        };
        let composed = if poisson {
            poisson_apply_subordination(&inner_fn, &x, t, &cfg)?
        } else {
            ou_apply_kernel(&inner_fn, &x, t, &cfg)?
        };
        worst = worst.max((direct - composed).abs());
    }
    Ok(worst)
}

/// `max (||T_t f||_p / ||f||_p - 1)` over `t` and the finite exponents of
/// `entry`, in `d = 1` with adaptive quadrature throughout.
fn contraction_1d(entry: &TestFunction, times: &[f64]) -> Result<f64> {
    let tol = AdaptiveTolerance {
        abs: 1e-14,
        rel: 1e-11,
        max_intervals: 400,
    };
    let mut worst = f64::NEG_INFINITY;
    for p in [1.0, 2.0, 4.0].into_iter().filter(|&p| p <= entry.max_exponent) {
        let base = gaussian_norm_1d_adaptive(p, &entry.breakpoints_1d, tol, |x| entry.rep.eval(&[x]))?;
        for &t in times {
            let norm = match entry.rep.as_series() {
                Some(s) => {
                    let ts = ou_series(s, t);
                    gaussian_norm_1d_adaptive(p, &[], tol, |x| ts.eval(&[x]))?
                }
                None => {
                    let r = mehler_scales(t).0;
                    let cuts: Vec<f64> = entry.breakpoints_1d.iter().map(|b| b / r).collect();
                    gaussian_norm_1d_adaptive(p, &cuts, tol, |x| {
                        ou_apply_1d_adaptive(|y| entry.rep.eval(&[y]), x, t, &entry.breakpoints_1d, tol)
                    })?
                }
            };
            worst = worst.max(norm / base - 1.0);
        }
    }
    Ok(worst)
}

// iterated adaptive quadrature; the inner norm is itself a function of x_1
fn gaussian_norm_2d_adaptive(p: f64, tol: AdaptiveTolerance, g: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    gaussian_norm_1d_adaptive(p, &[], tol, |a| gaussian_norm_1d_adaptive(p, &[], tol, |b| g(&[a, b])))
}

/// Same ratio in `d = 2` for series entries (iterated adaptive quadrature,
/// since `|f|^p` has kinks along the zero set) and the smooth positive bump
/// (tensor Gauss-Hermite).
fn contraction_2d(entry: &TestFunction, times: &[f64]) -> Result<f64> {
    let cfg = QuadratureConfig {
        gh_nodes: 32,
        ..Default::default()
    };
    let tol = AdaptiveTolerance {
        abs: 1e-13,
        rel: 1e-10,
        max_intervals: 200,
    };
    let mut worst = f64::NEG_INFINITY;
    for p in [1.0, 2.0, 4.0] {
        match entry.rep.as_series() {
            Some(s) => {
                let base = gaussian_norm_2d_adaptive(p, tol, |x| s.eval(x))?;
                for &t in times {
                    let ts = ou_series(s, t);
                    worst = worst.max(gaussian_norm_2d_adaptive(p, tol, |x| ts.eval(x))? / base - 1.0);
                }
            }
            None => {
                let base = gaussian_norm_of(2, p, &cfg, |x| entry.rep.eval(x))?;
                for &t in times {
                    let norm = gaussian_norm_of(2, p, &cfg, |x| ou_apply_change_of_var(&entry.rep, x, t, &cfg))?;
                    worst = worst.max(norm / base - 1.0);
                }
            }
        }
    }
    Ok(worst)
}

fn cone_inclusion(rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let mut violations = 0usize;
    for _ in 0..samples {
        let dim = rng.gen_range(1..=3);
        let x = random_point(rng, dim, 5.0 / (dim as f64).sqrt());
        let t: f64 = 10f64.powf(rng.gen_range(-6.0..0.0));
        let y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(-1.0..1.0) * t.sqrt()).collect();
        let inner = ConeSpec::new(x.clone(), ConeKind::TruncatedParabolic).expect("finite apex");
        let outer = ConeSpec::new(x, ConeKind::ParabolicGaussian).expect("finite apex");
        if cone_contains(&inner, &y, t) && !cone_contains(&outer, &y, t) {
            violations += 1;
        }
    }
    violations as f64
}

fn path_validity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut bad = 0usize;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=3);
        let spec = ConeSpec::new(random_point(rng, dim, 5.0), ConeKind::ALL[rng.gen_range(0..3)])?;
        let path = cone_path(&spec, 30, rng.gen_range(0.0..0.99), rng.gen_range(0.05..0.95))?;
        bad += path.points.iter().filter(|(y, t)| !cone_contains(&spec, y, *t)).count();
    }
    Ok(bad as f64)
}

struct ConvergenceSummary {
    final_error: f64,
    monotone_defect: f64,
}

fn convergence_sweep(dim: usize, semigroup: Semigroup, names: &[String], alpha_min: f64) -> Result<ConvergenceSummary> {
    let mut out = ConvergenceSummary {
        final_error: 0.0,
        monotone_defect: 0.0,
    };
    for name in names {
        for cone in ConeKind::ALL {
            let mut cfg = ExperimentConfig::new(dim, name);
            cfg.semigroup = semigroup;
            cfg.cone = cone;
            cfg.alpha_min = alpha_min;
            let recs = run_convergence(&cfg)?;
            for w in recs.windows(2).filter(|w| w[0].apex == w[1].apex) {
                out.monotone_defect = out.monotone_defect.max(w[0].sup_error - w[1].sup_error);
            }
            for r in recs.iter().filter(|r| r.alpha == alpha_min) {
                out.final_error = out.final_error.max(r.sup_error);
            }
        }
    }
    Ok(out)
}

fn bounded_continuous_sweep(dim: usize, semigroup: Semigroup, gh_nodes: usize) -> Result<ConvergenceSummary> {
    let mut out = ConvergenceSummary {
        final_error: 0.0,
        monotone_defect: 0.0,
    };
    for cone in ConeKind::ALL {
        let mut cfg = ExperimentConfig::new(dim, "bump");
        cfg.semigroup = semigroup;
        cfg.cone = cone;
        cfg.quadrature.gh_nodes = gh_nodes;
        let recs = run_convergence(&cfg)?;
        for w in recs.windows(2).filter(|w| w[0].apex == w[1].apex) {
            out.monotone_defect = out.monotone_defect.max(w[0].sup_error - w[1].sup_error);
        }
        for r in recs.iter().filter(|r| (r.alpha / 1e-3 - 1.0).abs() < 1e-12) {
            out.final_error = out.final_error.max(r.sup_error);
        }
    }
    Ok(out)
}

fn constant_domination(dim: usize) -> Result<f64> {
    let mut cfg = ExperimentConfig::new(dim, "one");
    cfg.cone = ConeKind::TruncatedParabolic;
    cfg.quadrature.time_grid = LogGrid::new(16, 1e-4, 10.0);
    cfg.quadrature.radius_grid = LogGrid::new(16, 1e-3, 8.0);
    cfg.quadrature.cone_radial = 4;
    cfg.quadrature.cone_angular = 6;
    cfg.quadrature.ball_nodes = 16;
    let report = run_domination_report(&cfg)?;
    Ok(report.rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max))
}

/// Runs every invariant check. `fast` covers `d <= 2` with reduced sweeps;
/// `full` adds `d = 3`, the `d = 2` Poisson routes and larger samples.
pub fn run_verify_suite(level: VerifyLevel) -> VerifyReport {
    let seed = QuadratureConfig::default().seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = level == VerifyLevel::Full;
    let max_dim = if full { 3 } else { 2 };
    let mut suite = Suite { records: Vec::new() };

    for d in 1..=max_dim {
        suite.run(&format!("orthonormality d={d}"), 1e-8, || orthonormality(d));
    }
    for d in 1..=max_dim {
        suite.run(&format!("eigenrelation d={d}"), 1e-8, || eigenrelation(d, &mut rng));
    }
    for d in 1..=2 {
        suite.run(&format!("markov d={d}"), 1e-10, || markov(d));
    }
    for d in 1..=max_dim {
        suite.run(&format!("ou route agreement d={d}"), 1e-8, || ou_routes(d, &mut rng));
    }
    suite.run("bochner identity", 1e-10, bochner);
    for d in 1..=(if full { 2 } else { 1 }) {
        suite.run(&format!("poisson route agreement d={d}"), 1e-6, || poisson_routes(d, &mut rng));
    }
    suite.run("semigroup law spectral", 1e-13, || semigroup_spectral(&mut rng));
    suite.run("semigroup law ou kernel d=1", 1e-7, || semigroup_quadrature(&mut rng, false));
    suite.run("semigroup law poisson subordination d=1", 1e-7, || {
        semigroup_quadrature(&mut rng, true)
    });

    let times: &[f64] = if full { &[1e-4, 1e-2, 1.0, 10.0] } else { &[1e-4, 1.0] };
    suite.run("contraction d=1", 1e-6, || {
        let mut worst = f64::NEG_INFINITY;
        for entry in catalog(1, &QuadratureConfig::default())? {
            worst = worst.max(contraction_1d(&entry, times)?);
        }
        Ok(worst)
    });
    if full {
        suite.run("contraction d=2 smooth entries", 1e-6, || {
            let mut worst = f64::NEG_INFINITY;
            for entry in catalog(2, &QuadratureConfig::default())? {
                if entry.has_tag(ClassTag::Polynomial) || entry.name == "bump" {
                    worst = worst.max(contraction_2d(&entry, times)?);
                }
            }
            Ok(worst)
        });
    }

    let samples = if full { 100_000 } else { 10_000 };
    let v = cone_inclusion(&mut rng, samples);
    suite.push(format!("cone inclusion {samples} samples"), v, 0.0);
    suite.run("cone path validity", 0.0, || path_validity(&mut rng));

    let dims: &[usize] = if full { &[1, 2] } else { &[1] };
    for &d in dims {
        let names: Vec<String> = match catalog(d, &QuadratureConfig::default()) {
            Ok(c) => c
                .into_iter()
                .filter(|e| e.has_tag(ClassTag::Polynomial))
                .map(|e| e.name)
                .collect(),
            Err(_) => Vec::new(),
        };
        for (semigroup, tol) in [(Semigroup::Ou, 1e-6), (Semigroup::Poisson, 1e-5)] {
            match convergence_sweep(d, semigroup, &names, 1e-16) {
                Ok(s) => {
                    suite.push(format!("{semigroup} convergence polynomials d={d}"), s.final_error, tol);
                    suite.push(format!("{semigroup} convergence monotone polynomials d={d}"), s.monotone_defect, 0.0);
                }
                Err(_) => suite.push(format!("{semigroup} convergence polynomials d={d}"), f64::INFINITY, tol),
            }
        }
        let gh = if d == 1 { 64 } else { 24 };
        match bounded_continuous_sweep(d, Semigroup::Ou, gh) {
            Ok(s) => {
                suite.push(format!("ou convergence bump alpha=1e-3 d={d}"), s.final_error, 1e-2);
                suite.push(format!("ou convergence monotone bump d={d}"), s.monotone_defect, 0.0);
            }
            Err(_) => suite.push(format!("ou convergence bump alpha=1e-3 d={d}"), f64::INFINITY, 1e-2),
        }
    }
    for &d in dims {
        suite.run(&format!("domination constant ratio d={d}"), 0.0, || constant_domination(d));
    }

    let pass = suite.records.iter().all(|r| r.pass);
    VerifyReport {
        level,
        seed,
        pass,
        records: suite.records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names() {
        assert_eq!("fast".parse::<VerifyLevel>().unwrap(), VerifyLevel::Fast);
        assert_eq!(VerifyLevel::Full.to_string(), "full");
        assert!("slow".parse::<VerifyLevel>().is_err());
    }

    #[test]
    fn contraction_helpers_hold_on_d1_entries() {
        let cat = catalog(1, &QuadratureConfig::default()).unwrap();
        for name in ["ball-indicator", "spike", "x3"] {
            let e = cat.iter().find(|e| e.name == name).unwrap();
            let m = contraction_1d(e, &[1e-4, 1.0]).unwrap();
            assert!(m <= 1e-6, "{name}: {m}");
        }
    }
}
