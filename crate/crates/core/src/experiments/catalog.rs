use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::hermite::{enumerate_multi_indices, project_chaos, FunctionRep, HermiteSeries, MultiIndex};
use crate::measure::{gaussian_ball_measure, gaussian_norm, gaussian_norm_1d_adaptive, GaussianBall};
use crate::quadrature::{integrate_to_infinity, AdaptiveTolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "polynomial")]
    Polynomial,
    #[serde(rename = "bounded-continuous")]
    BoundedContinuous,
    #[serde(rename = "indicator")]
    Indicator,
    /// In `L^1(gamma)` but unbounded on the quadrature range.
    #[serde(rename = "L1-only")]
    L1Only,
}

/// A named catalog entry.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: String,
    pub rep: FunctionRep,
    pub tags: Vec<ClassTag>,
    /// `||f||_{1, gamma}`.
    pub norm1: f64,
    pub nonnegative: bool,
    /// Largest `p` with `||f||_p < inf`.
    pub max_exponent: f64,
    /// Jumps or kinks of the one-dimensional restriction; used as
    /// breakpoints by adaptive quadrature.
    pub breakpoints_1d: Vec<f64>,
    jump_sphere: Option<(Vec<f64>, f64)>,
}

impl TestFunction {
    pub fn has_tag(&self, tag: ClassTag) -> bool {
        self.tags.contains(&tag)
    }

    /// `false` exactly on the jump set of the entry.
    pub fn continuous_at(&self, x: &[f64]) -> bool {
        match &self.jump_sphere {
            None => true,
            Some((c, r)) => {
                let d = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                d != *r
            }
        }
    }
}

/// Closed unit ball indicator centred at the origin.
pub fn ball_indicator(dim: usize) -> FunctionRep {
    FunctionRep::pointwise(dim, |x| {
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            1.0
        } else {
            0.0
        }
    })
}

/// `e^{-|x - (1, .., 1)|^2}`.
pub fn bump(dim: usize) -> FunctionRep {
    FunctionRep::pointwise(dim, |x| (-x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>()).exp())
}

/// `(1 + |u|)^{-(d+1)} e^{|u|^2 / 2}`, in `L^p(gamma_d)` exactly for `p <= 2`.
pub fn spike(dim: usize) -> FunctionRep {
    let power = -((dim + 1) as f64);
    FunctionRep::pointwise(dim, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 + r2.sqrt()).powf(power) * (0.5 * r2).exp()
    })
}

fn first_coordinate_power(dim: usize, k: u32, cfg: &QuadratureConfig) -> Result<HermiteSeries> {
    let mono = FunctionRep::pointwise(dim, move |x| x[0].powi(k as i32));
    let mut out = HermiteSeries::new(dim)?;
    for n in 0..=k {
        for (b, c) in project_chaos(&mono, n, cfg)?.terms() {
            out.add(b.clone(), c)?;
        }
    }
    Ok(out)
}

// int_{R^d} g(|u|) d gamma_d for radial g, as a one-dimensional integral
fn radial_mean(dim: usize, g: impl Fn(f64) -> f64) -> Result<f64> {
    let d = dim as f64;
    let sphere = 2.0 * PI.powf(d / 2.0) / libm::tgamma(d / 2.0);
    let v = integrate_to_infinity(
        |r| {
            let w = (-r * r).exp();
            Ok(if w == 0.0 { 0.0 } else { g(r) * w * r.powf(d - 1.0) })
        },
        0.0,
        AdaptiveTolerance::default(),
    )?;
    Ok(sphere * PI.powf(-d / 2.0) * v)
}

/// Names of the default catalog in dimension `dim`, in catalog order.
pub fn catalog_names(dim: usize) -> Result<Vec<String>> {
    if dim == 0 {
        return Err(Error::arg("dimension must be >= 1"));
    }
    let mut names = vec!["one".to_string(), "two".to_string()];
    for beta in enumerate_multi_indices(dim, 4)?.into_iter().filter(|b| b.degree() >= 1) {
        names.push(format!("h{beta}"));
    }
    for n in ["x", "x2", "x3", "bump", "ball-indicator", "spike"] {
        names.push(n.to_string());
    }
    Ok(names)
}

/// The default catalog in dimension `dim`: `one`, `two`, `h(beta)` for
/// `1 <= |beta| <= 4`, `x`, `x2`, `x3` in the first coordinate, `bump`,
/// `ball-indicator` and `spike`.
pub fn catalog(dim: usize, cfg: &QuadratureConfig) -> Result<Vec<TestFunction>> {
    catalog_names(dim)?.iter().map(|n| lookup(dim, n, cfg)).collect()
}

fn polynomial(name: &str, s: HermiteSeries, nonnegative: bool, cfg: &QuadratureConfig) -> Result<TestFunction> {
    let dim = s.dim();
    let first_axis_only = s.terms().all(|(b, _)| b.entries()[1..].iter().all(|&k| k == 0));
    let rep: FunctionRep = s.into();
    // |f| has kinks at the roots, which tensor Gauss-Hermite resolves poorly
    let norm1 = if first_axis_only {
        gaussian_norm_1d_adaptive(1.0, &[], AdaptiveTolerance::default(), |x| {
            let mut y = vec![0.0; dim];
            y[0] = x;
            rep.eval(&y)
        })?
    } else {
        gaussian_norm(&rep, 1.0, cfg)?
    };
    let mut tags = vec![ClassTag::Polynomial];
    if rep.as_series().is_some_and(|s| s.max_degree() == 0) {
        tags.push(ClassTag::BoundedContinuous);
    }
    Ok(TestFunction {
        name: name.to_string(),
        rep,
        tags,
        norm1,
        nonnegative,
        max_exponent: f64::INFINITY,
        breakpoints_1d: Vec::new(),
        jump_sphere: None,
    })
}

/// Catalog entry by name.
pub fn lookup(dim: usize, name: &str, cfg: &QuadratureConfig) -> Result<TestFunction> {
    if dim == 0 {
        return Err(Error::arg("dimension must be >= 1"));
    }
    match name {
        "one" => polynomial(name, HermiteSeries::constant(dim, 1.0)?, true, cfg),
        "two" => polynomial(name, HermiteSeries::constant(dim, 2.0)?, true, cfg),
        "x" | "x2" | "x3" => {
            let k = match name {
                "x" => 1,
                "x2" => 2,
                _ => 3,
            };
            polynomial(name, first_coordinate_power(dim, k, cfg)?, k == 2, cfg)
        }
        "bump" => {
            let b = bump(dim);
            let norm1 = if dim == 1 {
                gaussian_norm_1d_adaptive(1.0, &[1.0], AdaptiveTolerance::default(), |x| b.eval(&[x]))?
            } else {
                gaussian_norm(&b, 1.0, cfg)?
            };
            Ok(TestFunction {
                name: name.into(),
                rep: b,
                tags: vec![ClassTag::BoundedContinuous],
                norm1,
                nonnegative: true,
                max_exponent: f64::INFINITY,
                breakpoints_1d: vec![1.0],
                jump_sphere: None,
            })
        }
        "ball-indicator" => {
            let unit = GaussianBall::new(vec![0.0; dim], 1.0)?;
            Ok(TestFunction {
                name: name.into(),
                rep: ball_indicator(dim),
                tags: vec![ClassTag::Indicator],
                norm1: gaussian_ball_measure(&unit, cfg)?,
                nonnegative: true,
                max_exponent: f64::INFINITY,
                breakpoints_1d: vec![-1.0, 1.0],
                jump_sphere: Some((vec![0.0; dim], 1.0)),
            })
        }
        "spike" => {
            let power = -((dim + 1) as f64);
            Ok(TestFunction {
                name: name.into(),
                rep: spike(dim),
                tags: vec![ClassTag::L1Only],
                norm1: radial_mean(dim, |r| (1.0 + r).powf(power) * (0.5 * r * r).exp())?,
                nonnegative: true,
                max_exponent: 2.0,
                breakpoints_1d: vec![0.0],
                jump_sphere: None,
            })
        }
        _ => {
            let beta = name
                .strip_prefix('h')
                .and_then(|rest| rest.parse::<MultiIndex>().ok())
                .filter(|b| b.dim() == dim && (1..=4).contains(&b.degree()));
            match beta {
                Some(b) => polynomial(name, HermiteSeries::basis(b), false, cfg),
                None => Err(Error::config(
                    "function",
                    format!("`{name}` is not in the catalog for d = {dim}"),
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::HashSet;

    #[test]
    fn names_are_unique_and_norms_finite() {
        let cfg = QuadratureConfig::default();
        for d in 1..=3 {
            let cat = catalog(d, &cfg).unwrap();
            let names: HashSet<_> = cat.iter().map(|e| e.name.clone()).collect();
            assert_eq!(names.len(), cat.len());
            for e in &cat {
                assert!(e.norm1.is_finite() && e.norm1 > 0.0, "{} in d={d}", e.name);
            }
        }
        assert!(lookup(2, "h(1,1)", &cfg).is_ok());
        assert!(lookup(2, "h(1,0,0)", &cfg).is_err());
        assert!(lookup(1, "h(5)", &cfg).is_err());
        assert_eq!(catalog_names(1).unwrap().len(), 2 + 4 + 6);
        assert!(matches!(lookup(2, "nope", &cfg), Err(Error::Config { .. })));
    }

    #[test]
    fn monomials_are_exact_series() {
        let cfg = QuadratureConfig::default();
        let x3 = lookup(2, "x3", &cfg).unwrap();
        let s = x3.rep.as_series().unwrap();
        assert_eq!(s.len(), 2);
        let c3 = s.coefficient(&MultiIndex::new(vec![3, 0]).unwrap());
        assert_relative_eq!(c3, 3f64.sqrt() / 2.0, max_relative = 1e-13);
        for x in [-2.0, 0.3, 1.7] {
            assert_relative_eq!(s.eval(&[x, 5.0]).unwrap(), x * x * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_norms() {
        let cfg = QuadratureConfig::default();
        // ||x||_1 = E|X| with X ~ N(0, 1/2)
        assert_relative_eq!(lookup(1, "x", &cfg).unwrap().norm1, 1.0 / PI.sqrt(), max_relative = 1e-10);
        // bump: int e^{-(x-1)^2} e^{-x^2} dx / sqrt(pi) = e^{-1/2} / sqrt(2)
        assert_relative_eq!(
            lookup(1, "bump", &cfg).unwrap().norm1,
            (-0.5f64).exp() / 2f64.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(lookup(1, "ball-indicator", &cfg).unwrap().norm1, libm::erf(1.0), max_relative = 1e-12);
        let spike1 = gaussian_norm_1d_adaptive(1.0, &[0.0], AdaptiveTolerance::default(), |x| {
            Ok((1.0 + x.abs()).powi(-2) * (0.5 * x * x).exp())
        })
        .unwrap();
        assert_relative_eq!(lookup(1, "spike", &cfg).unwrap().norm1, spike1, max_relative = 1e-10);
    }

    #[test]
    fn continuity_flags() {
        let cfg = QuadratureConfig::default();
        let ind = lookup(2, "ball-indicator", &cfg).unwrap();
        assert!(ind.continuous_at(&[0.0, 0.0]));
        assert!(!ind.continuous_at(&[1.0, 0.0]));
        assert!(lookup(2, "bump", &cfg).unwrap().continuous_at(&[1.0, 0.0]));
    }
}
