//! The Poisson-Hermite semigroup, subordinated to the Ornstein-Uhlenbeck
//! semigroup by
//! `P_t f = pi^{-1/2} int_0^inf u^{-1/2} e^{-u} T_{t^2/4u} f du`.
//!
//! With `u = v^2` the weight becomes `2 pi^{-1/2} e^{-v^2} dv`, which is
//! smooth at the origin. The remaining factor `T_{t^2/4v^2}` changes on the
//! scale `v ~ t`, so the fixed rule is graded geometrically from `v ~ t/10`
//! up to `v = 1` and uniform on `[1, V]`.
//!
//! The kernel route integrates the Mehler kernel against the density of
//! `r = e^{-s}`, `s = t^2/4u`. Its mass near `r = 0` decays only like
//! `(-log r)^{-1/2}`, so it is parametrised by `w = (-log r)^{-1/2}`:
//! `P_t f(x) = t pi^{-1/2} int_0^inf e^{-t^2 w^2/4} M_{r(w)} f(x) dw`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cones::{ConeKind, ConeSpec};
use crate::config::QuadratureConfig;
use crate::error::{check_finite, Error, Result};
use crate::hermite::{FunctionRep, HermiteSeries};
use crate::measure::MaximalEstimate;
use crate::ou::{cone_maximal, gaussian_mean, mehler_kernel_quadrature, mehler_scales, ou_apply, time_maximal};
use crate::quadrature::{gauss_legendre, integrate_adaptive, AdaptiveTolerance};

const PANEL_ORDER: usize = 10;
const TAIL_PANELS: usize = 4;
const MIN_PANELS: usize = 6;
/// `e^{-V^2} / V < 1e-12` for the upper cutoff `V`.
pub const SUBORDINATION_CUTOFF: f64 = 6.5;
const GRADING_START: f64 = 1e-3;

/// Composite Gauss-Legendre rule in `v` for `2 pi^{-1/2} int_0^V e^{-v^2} g(v) dv`.
///
/// The node count is rounded down to a multiple of 10 (at least 60).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinationQuadrature {
    pub nodes: Vec<f64>,
    /// Weights with the factor `2 pi^{-1/2} e^{-v^2}` folded in.
    pub weights: Vec<f64>,
    pub cutoff: f64,
}

impl SubordinationQuadrature {
    /// Rule for time `t`: the geometric grading starts at `min(1e-3, t/10)`.
    pub fn for_time(node_count: usize, t: f64) -> Result<Self> {
        if node_count < 16 {
            return Err(Error::arg("subordination rule needs at least 16 nodes"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::arg(format!("time must be positive, got {t}")));
        }
        let panels = (node_count / PANEL_ORDER).max(MIN_PANELS);
        let graded = panels - 1 - TAIL_PANELS;
        let start = GRADING_START.min(t / 10.0);
        let ratio = (1.0 / start).powf(1.0 / graded as f64);
        let mut edges = vec![0.0, start];
        for k in 1..graded {
            edges.push(start * ratio.powi(k as i32));
        }
        edges.push(1.0);
        for k in 1..=TAIL_PANELS {
            edges.push(1.0 + (SUBORDINATION_CUTOFF - 1.0) * k as f64 / TAIL_PANELS as f64);
        }
        let gl = gauss_legendre(PANEL_ORDER);
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        let c = 2.0 / PI.sqrt();
        for e in edges.windows(2) {
            let (mid, half) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for (&s, &w) in gl.nodes.iter().zip(&gl.weights) {
                let v = mid + half * s;
                nodes.push(v);
                weights.push(c * half * w * (-v * v).exp());
            }
        }
        Ok(Self {
            nodes,
            weights,
            cutoff: SUBORDINATION_CUTOFF,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_k w_k g(t^2 / 4 v_k^2)`, the subordinated average of an OU
    /// quantity `g(s)` at time `t`.
    pub fn subordinate<G>(&self, t: f64, mut g: G) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for (&v, &w) in self.nodes.iter().zip(&self.weights) {
            total += w * g(t * t / (4.0 * v * v))?;
        }
        Ok(total)
    }
}

/// `pi^{-1/2} int u^{-1/2} e^{-u} e^{-lambda^2/4u} du` under `quad`; equals
/// `e^{-lambda}` exactly.
pub fn bochner_scalar(lambda: f64, quad: &SubordinationQuadrature) -> f64 {
    let mut total = 0.0;
    for (&v, &w) in quad.nodes.iter().zip(&quad.weights) {
        total += w * (-lambda * lambda / (4.0 * v * v)).exp();
    }
    total
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("time must be positive and finite, got {t}")))
    }
}

fn check_point(f: &FunctionRep, x: &[f64]) -> Result<()> {
    if x.len() != f.dim() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg(format!(
            "point must be finite with dimension {}, got {:?}",
            f.dim(),
            x
        )));
    }
    Ok(())
}

/// `P_t f(x)` by the subordination rule; the inner `T_s` is spectral for
/// series and Gauss-Hermite quadrature otherwise.
pub fn poisson_apply_subordination(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    check_point(f, x)?;
    let quad = SubordinationQuadrature::for_time(cfg.improper_nodes, t)?;
    let v = quad.subordinate(t, |s| if s > 0.0 { ou_apply(f, x, s, cfg) } else { f.eval(x) })?;
    check_finite("poisson subordination", x, v)
}

/// Tolerances for the adaptive `w`-integral of the kernel route.
pub const KERNEL_TOLERANCE: AdaptiveTolerance = AdaptiveTolerance {
    abs: 1e-12,
    rel: 1e-11,
    max_intervals: 2000,
};

/// `P_t f(x)` from the explicit double-integral kernel: an adaptive
/// Gauss-Kronrod integral over `r` (as `w = (-log r)^{-1/2}`) of Mehler
/// kernel quadratures in `y`.
pub fn poisson_apply_kernel(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    check_point(f, x)?;
    // e^{-t^2 W^2 / 4} = e^{-45} beyond the upper limit
    let upper = 2.0 * 45f64.sqrt() / t;
    let v = integrate_adaptive(
        |w| {
            if w == 0.0 {
                return Ok(0.0);
            }
            let weight = (-0.25 * t * t * w * w).exp();
            if weight == 0.0 {
                return Ok(0.0);
            }
            let (r, s) = mehler_scales(1.0 / (w * w));
            Ok(weight * mehler_kernel_quadrature(f, x, r, s, cfg)?)
        },
        0.0,
        upper,
        KERNEL_TOLERANCE,
    )?;
    check_finite("poisson kernel", x, t / PI.sqrt() * v)
}

/// `sum_beta e^{-t sqrt|beta|} c_beta h_beta(x)`; `t = 0` is the identity.
pub fn poisson_apply_spectral(f: &HermiteSeries, x: &[f64], t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::arg(format!("time must be >= 0, got {t}")));
    }
    poisson_series(f, t).eval(x)
}

/// `P_t f` as a series.
pub fn poisson_series(f: &HermiteSeries, t: f64) -> HermiteSeries {
    f.map_by_degree(|k| (-t * (k as f64).sqrt()).exp())
}

/// `P_t f(x)`: spectral for series, subordination otherwise.
pub fn poisson_apply(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    match f {
        FunctionRep::Series(s) => {
            check_time(t)?;
            check_point(f, x)?;
            poisson_apply_spectral(s, x, t)
        }
        FunctionRep::Pointwise(_) => poisson_apply_subordination(f, x, t, cfg),
    }
}

/// `P* f(x) = sup_t |P_t f(x)|` over the time grid plus the `t -> inf` limit.
pub fn poisson_maximal(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<MaximalEstimate> {
    check_point(f, x)?;
    let mean = gaussian_mean(f, cfg)?;
    time_maximal(cfg, mean, |t| poisson_apply(f, x, t, cfg))
}

/// `sup |P_t f(y)|` over the gaussian cone (linear aperture) with apex `x`.
pub fn poisson_nontangential_maximal(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<MaximalEstimate> {
    check_point(f, x)?;
    let spec = ConeSpec::new(x.to_vec(), ConeKind::Gaussian)?;
    cone_maximal(&spec, cfg, |y, t| poisson_apply(f, y, t, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_1d, MultiIndex};
    use crate::measure::Argmax;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn h(entries: &[u32]) -> HermiteSeries {
        HermiteSeries::basis(MultiIndex::new(entries.to_vec()).unwrap())
    }

    #[test]
    fn bochner_identity() {
        for t in [1e-12, 1e-3, 0.1, 1.0, 4.0] {
            let q = SubordinationQuadrature::for_time(200, t).unwrap();
            assert_eq!(q.len(), 200);
            for lambda in [0.0, 0.5, 1.0, 2.0, 5.0] {
                let v = bochner_scalar(lambda * t, &q);
                assert!((v - (-lambda * t).exp()).abs() < 1e-10, "t={t} lambda={lambda}");
            }
        }
        let q = SubordinationQuadrature::for_time(16, 1.0).unwrap();
        assert_eq!(q.len(), 60);
        assert!(SubordinationQuadrature::for_time(8, 1.0).is_err());
    }

    #[test]
    fn tail_beyond_cutoff_is_negligible() {
        let u = SUBORDINATION_CUTOFF * SUBORDINATION_CUTOFF;
        assert!((-u).exp() / u.sqrt() < 1e-12);
    }

    #[test]
    fn subordination_examples() {
        let c = cfg();
        let one = FunctionRep::pointwise(1, |_| 1.0);
        assert!((poisson_apply_subordination(&one, &[0.4], 0.7, &c).unwrap() - 1.0).abs() < 1e-12);
        let f: FunctionRep = h(&[1]).into();
        let v = poisson_apply_subordination(&f, &[1.0], 1.0, &c).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp() * 2f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(v, 0.5203, epsilon = 1e-4);
        let f: FunctionRep = h(&[4]).into();
        let v = poisson_apply_subordination(&f, &[0.0], 1.0, &c).unwrap();
        assert_relative_eq!(v, (-2.0f64).exp() * 12.0 / 384f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(v, 0.082_876, epsilon = 1e-6);
    }

    #[test]
    fn pointwise_subordination_matches_spectral() {
        let s = h(&[3]);
        let pw = {
            let s = s.clone();
            FunctionRep::pointwise(1, move |x| s.eval(x).unwrap())
        };
        let c = QuadratureConfig { gh_nodes: 16, ..cfg() };
        for t in [0.1, 1.0, 4.0] {
            let a = poisson_apply_subordination(&pw, &[0.6], t, &c).unwrap();
            let b = poisson_apply_spectral(&s, &[0.6], t).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_route_examples() {
        let c = QuadratureConfig { gh_nodes: 40, ..cfg() };
        let one = FunctionRep::pointwise(1, |_| 1.0);
        assert!((poisson_apply_kernel(&one, &[0.0], 0.8, &c).unwrap() - 1.0).abs() < 1e-6);
        let s = h(&[2]);
        let f: FunctionRep = s.clone().into();
        let k = poisson_apply_kernel(&f, &[0.5], 0.8, &c).unwrap();
        let expect = (-0.8 * 2f64.sqrt()).exp() * hermite_1d(2, 0.5);
        assert!((k - expect).abs() < 1e-6);
        assert!((k - poisson_apply_subordination(&f, &[0.5], 0.8, &c).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn spectral_properties() {
        let s = h(&[1, 1]);
        let x = [0.3, 1.2];
        assert_eq!(poisson_apply_spectral(&s, &x, 0.0).unwrap(), s.eval(&x).unwrap());
        let t = 0.9;
        assert_relative_eq!(
            poisson_apply_spectral(&s, &x, t).unwrap(),
            (-t * 2f64.sqrt()).exp() * s.eval(&x).unwrap(),
            max_relative = 1e-15
        );
        // second time derivative equals |beta| P_t
        let e = 1e-3;
        let p = |t: f64| poisson_apply_spectral(&s, &x, t).unwrap();
        let d2 = (p(t + e) - 2.0 * p(t) + p(t - e)) / (e * e);
        assert_relative_eq!(d2, 2.0 * p(t), max_relative = 1e-5);
    }

    #[test]
    fn maximal_examples() {
        let c = cfg();
        let one: FunctionRep = HermiteSeries::constant(1, 1.0).unwrap().into();
        assert_eq!(poisson_maximal(&one, &[0.5], &c).unwrap().value, 1.0);
        assert_eq!(poisson_nontangential_maximal(&one, &[0.5], &c).unwrap().value, 1.0);
        let f: FunctionRep = h(&[1]).into();
        let m = poisson_maximal(&f, &[1.0], &c).unwrap();
        assert_relative_eq!(m.value, 2f64.sqrt() * (-1e-4f64).exp(), max_relative = 1e-14);
        assert_eq!(m.argmax, Argmax::Time(1e-4));
        let nt = poisson_nontangential_maximal(&f, &[1.0], &c).unwrap();
        for t in c.time_grid.values() {
            assert!(nt.value >= poisson_apply_spectral(f.as_series().unwrap(), &[1.0], t).unwrap().abs());
        }
    }

    #[test]
    fn rejects_bad_time() {
        let f: FunctionRep = h(&[1]).into();
        assert!(poisson_apply_subordination(&f, &[0.0], 0.0, &cfg()).is_err());
        assert!(poisson_apply_kernel(&f, &[0.0], -1.0, &cfg()).is_err());
        assert!(poisson_apply_spectral(f.as_series().unwrap(), &[0.0], -0.5).is_err());
    }
}
