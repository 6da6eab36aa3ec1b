//! The Ornstein-Uhlenbeck semigroup
//! `T_t f(x) = int f(e^{-t} x + sqrt(1 - e^{-2t}) u) gamma_d(du)`
//! and its maximal functions.
//!
//! Every quadrature route works in the variable `u`, so the
//! `(1 - e^{-2t})^{-d/2}` factor of the Mehler kernel is never formed
//! against a singular grid. The kernel route still evaluates the Mehler
//! density at the mapped nodes, which keeps it an independent cross-check of
//! the change-of-variable route.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cones::{ConeKind, ConeSpec};
use crate::config::QuadratureConfig;
use crate::error::{check_finite, Error, Result};
use crate::hermite::{FunctionRep, HermiteSeries};
use crate::measure::{first_max, gaussian_norm, hl_maximal, Argmax, MaximalEstimate};
use crate::quadrature::{gauss_hermite, integrate_real_line, tensor_sum, AdaptiveTolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuRoute {
    Kernel,
    ChangeOfVar,
    Spectral,
}

/// One evaluation of `T_t f(x)` tagged with the route that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuEvaluation {
    pub x: Vec<f64>,
    pub t: f64,
    pub route: OuRoute,
    pub value: f64,
}

/// `(e^{-t}, sqrt(1 - e^{-2t}))`, accurate for small `t`.
pub(crate) fn mehler_scales(t: f64) -> (f64, f64) {
    ((-t).exp(), (-(-2.0 * t).exp_m1()).sqrt())
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::arg(format!("time must be positive, got {t}")))
    }
}

fn check_point(f: &FunctionRep, x: &[f64]) -> Result<()> {
    if x.len() != f.dim() {
        return Err(Error::arg(format!(
            "dimension mismatch: function has {}, point has {}",
            f.dim(),
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("point has non-finite coordinates"));
    }
    Ok(())
}

/// Mehler-kernel quadrature with `y = r x + s u`, where `r` and `s` are the
/// Mehler scales; `t = +inf` is allowed and gives the mean.
pub(crate) fn mehler_kernel_quadrature(f: &FunctionRep, x: &[f64], r: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let d = x.len();
    let rule = gauss_hermite(cfg.gh_nodes);
    let mut y = vec![0.0; d];
    let norm = PI.powf(-(d as f64) / 2.0);
    let v = tensor_sum(d, &rule, |u| {
        let mut dist2 = 0.0;
        let mut u2 = 0.0;
        for i in 0..d {
            y[i] = r * x[i] + s * u[i];
            let diff = (y[i] - r * x[i]) / s;
            dist2 += diff * diff;
            u2 += u[i] * u[i];
        }
        // Mehler density in y times the Jacobian s^d, over the GH weight
        let kernel = norm * (-dist2).exp();
        let weight = norm * (-u2).exp();
        let ratio = if weight > 0.0 { kernel / weight } else { 1.0 };
        Ok(ratio * f.eval_unchecked(&y)?)
    })?;
    check_finite("ou kernel", x, v)
}

/// `T_t f(x)` by Gauss-Hermite quadrature of the Mehler kernel.
pub fn ou_apply_kernel(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    check_point(f, x)?;
    let (r, s) = mehler_scales(t);
    mehler_kernel_quadrature(f, x, r, s, cfg)
}

/// `T_t f(x) = int f(s u + r x) gamma(du)` by Gauss-Hermite quadrature.
pub fn ou_apply_change_of_var(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    check_point(f, x)?;
    let (r, s) = mehler_scales(t);
    change_of_var(f, x, r, s, cfg)
}

fn change_of_var(f: &FunctionRep, x: &[f64], r: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let rule = gauss_hermite(cfg.gh_nodes);
    let mut y = vec![0.0; x.len()];
    let v = tensor_sum(x.len(), &rule, |u| {
        for ((yi, ui), xi) in y.iter_mut().zip(u).zip(x) {
            *yi = s * ui + r * xi;
        }
        f.eval_unchecked(&y)
    })?;
    check_finite("ou change of variable", x, v)
}

/// `sum_beta e^{-t|beta|} c_beta h_beta(x)`; `t = 0` is the identity.
pub fn ou_apply_spectral(f: &HermiteSeries, x: &[f64], t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::arg(format!("time must be >= 0, got {t}")));
    }
    f.map_by_degree(|k| (-t * k as f64).exp()).eval(x)
}

/// `T_t f` as a series.
pub fn ou_series(f: &HermiteSeries, t: f64) -> HermiteSeries {
    f.map_by_degree(|k| (-t * k as f64).exp())
}

/// `T_t f(x)` by the cheapest exact route: spectral for series, the
/// change-of-variable quadrature otherwise.
pub fn ou_apply(f: &FunctionRep, x: &[f64], t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    match f {
        FunctionRep::Series(s) => {
            check_time(t)?;
            check_point(f, x)?;
            ou_apply_spectral(s, x, t)
        }
        FunctionRep::Pointwise(_) => ou_apply_change_of_var(f, x, t, cfg),
    }
}

/// `T_t f(x)` for `d = 1` by adaptive Gauss-Kronrod quadrature in `u`.
///
/// `breakpoints` are the kinks or jumps of `f`; they are mapped into the
/// `u` variable so every discontinuity sits on a panel edge.
pub fn ou_apply_1d_adaptive<G>(mut f: G, x: f64, t: f64, breakpoints: &[f64], tol: AdaptiveTolerance) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    check_time(t)?;
    let (r, s) = mehler_scales(t);
    let cuts: Vec<f64> = breakpoints.iter().map(|b| (b - r * x) / s).collect();
    let v = integrate_real_line(
        |u| {
            let w = (-u * u).exp();
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(f(s * u + r * x)? * w / PI.sqrt())
        },
        &cuts,
        tol,
    )?;
    check_finite("ou adaptive", &[x], v)
}

/// `int f d gamma_d`, the `t -> inf` limit of `T_t f(x)`.
pub fn gaussian_mean(f: &FunctionRep, cfg: &QuadratureConfig) -> Result<f64> {
    match f {
        FunctionRep::Series(s) => Ok(s.coefficient(&crate::hermite::MultiIndex::zero(s.dim()))),
        FunctionRep::Pointwise(_) => {
            let zero = vec![0.0; f.dim()];
            change_of_var(f, &zero, 0.0, 1.0, cfg)
        }
    }
}

/// Sup of `|u(x, t)|` over the time grid with the `t -> inf` limit `|limit|`
/// appended as the last cell.
pub(crate) fn time_maximal<U>(cfg: &QuadratureConfig, limit: f64, mut u: U) -> Result<MaximalEstimate>
where
    U: FnMut(f64) -> Result<f64>,
{
    let mut times = cfg.time_grid.values();
    times.push(f64::INFINITY);
    let grid_size = times.len();
    let (value, t) = first_max(times, |&t| {
        if t.is_infinite() {
            Ok(limit.abs())
        } else {
            Ok(u(t)?.abs())
        }
    })?
    .expect("time grid is never empty");
    Ok(MaximalEstimate {
        value,
        argmax: Argmax::Time(t),
        grid_size,
    })
}

/// `T* f(x) = sup_t |T_t f(x)|` over the configured time grid plus `t = inf`.
pub fn ou_maximal(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<MaximalEstimate> {
    check_point(f, x)?;
    let mean = gaussian_mean(f, cfg)?;
    time_maximal(cfg, mean, |t| ou_apply(f, x, t, cfg))
}

/// Unit directions used for cone cross-sections: `+-1` in `d = 1`, equally
/// spaced angles in `d = 2`, a Fibonacci sphere in `d = 3`, and the signed
/// coordinate axes plus diagonals beyond that.
pub(crate) fn cross_section_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![rho * a.cos(), rho * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::new();
            for i in 0..dim {
                for sign in [-1.0, 1.0] {
                    let mut v = vec![0.0; dim];
                    v[i] = sign;
                    out.push(v);
                }
            }
            let diag = 1.0 / (dim as f64).sqrt();
            out.push(vec![diag; dim]);
            out.push(vec![-diag; dim]);
            out
        }
    }
}

/// The `(y, t)` cells searched by the non-tangential maximal functions,
/// ordered by `t` ascending and then `y` lexicographically.
pub fn cone_grid(spec: &ConeSpec, cfg: &QuadratureConfig) -> Vec<(Vec<f64>, f64)> {
    let dirs = cross_section_directions(spec.dim(), cfg.cone_angular);
    let mut cells = Vec::new();
    for t in cfg.time_grid.values() {
        let ap = spec.aperture(t);
        if ap <= 0.0 {
            continue;
        }
        let mut section = vec![spec.apex.clone()];
        for j in 1..cfg.cone_radial {
            let rho = ap * j as f64 / cfg.cone_radial as f64;
            for u in &dirs {
                section.push(spec.apex.iter().zip(u).map(|(x, ui)| x + rho * ui).collect());
            }
        }
        section.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        section.dedup();
        cells.extend(section.into_iter().map(|y| (y, t)));
    }
    cells
}

/// Sup of `|u(y, t)|` over [`cone_grid`].
pub(crate) fn cone_maximal<U>(spec: &ConeSpec, cfg: &QuadratureConfig, mut u: U) -> Result<MaximalEstimate>
where
    U: FnMut(&[f64], f64) -> Result<f64>,
{
    let cells = cone_grid(spec, cfg);
    let grid_size = cells.len();
    match first_max(cells, |(y, t)| Ok(u(y, *t)?.abs()))? {
        Some((value, (y, t))) => Ok(MaximalEstimate {
            value,
            argmax: Argmax::Cone { y, t },
            grid_size,
        }),
        None => Err(Error::arg("time grid has no point inside the cone")),
    }
}

/// `sup |T_t f(y)|` over the cone of the given kind with apex `x`.
pub fn nontangential_maximal(f: &FunctionRep, x: &[f64], kind: ConeKind, cfg: &QuadratureConfig) -> Result<MaximalEstimate> {
    check_point(f, x)?;
    let spec = ConeSpec::new(x.to_vec(), kind)?;
    cone_maximal(&spec, cfg, |y, t| ou_apply(f, y, t, cfg))
}

/// The ingredients of `T* f(x) <= C_d M_gamma f(x) + (2 v |x|)^d e^{|x|^2} ||f||_1`.
///
/// `ratio` is `lhs / (hl_maximal + tail)`, an empirical lower bound for
/// any admissible `C_d >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalBound {
    pub lhs: f64,
    pub hl_maximal: f64,
    pub tail: f64,
    pub ratio: f64,
}

pub fn verify_gutierrez_urbina_bound(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<MaximalBound> {
    check_point(f, x)?;
    let norm1 = gaussian_norm(f, 1.0, cfg)?;
    let lhs = ou_maximal(f, x, cfg)?.value;
    let hl = hl_maximal(f, x, cfg)?.value;
    let n2: f64 = x.iter().map(|v| v * v).sum();
    let tail = n2.sqrt().max(2.0).powi(x.len() as i32) * n2.exp() * norm1;
    let rhs = hl + tail;
    Ok(MaximalBound {
        lhs,
        hl_maximal: hl,
        tail,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LogGrid;
    use crate::hermite::{hermite_1d, MultiIndex};
    use approx::assert_relative_eq;
    use libm::erf;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn h(entries: &[u32]) -> FunctionRep {
        HermiteSeries::basis(MultiIndex::new(entries.to_vec()).unwrap()).into()
    }

    fn one(d: usize) -> FunctionRep {
        HermiteSeries::constant(d, 1.0).unwrap().into()
    }

    #[test]
    fn constant_is_preserved() {
        let c = cfg();
        let f = FunctionRep::pointwise(2, |_| 1.0);
        for t in [1e-4, 0.3, 10.0] {
            for x in [[0.0, 0.0], [4.0, -1.0]] {
                assert!((ou_apply_kernel(&f, &x, t, &c).unwrap() - 1.0).abs() < 1e-12);
                assert!((ou_apply_change_of_var(&f, &x, t, &c).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn h2_example() {
        let f = h(&[2]);
        let expect = (-1.0f64).exp() * hermite_1d(2, 1.0);
        assert_relative_eq!(expect, 0.260_130_0, epsilon = 1e-7);
        let c = cfg();
        assert_relative_eq!(ou_apply_kernel(&f, &[1.0], 0.5, &c).unwrap(), expect, epsilon = 1e-13);
        assert_relative_eq!(ou_apply_change_of_var(&f, &[1.0], 0.5, &c).unwrap(), expect, epsilon = 1e-13);
        assert_relative_eq!(ou_apply_spectral(f.as_series().unwrap(), &[1.0], 0.5).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn long_time_limit_is_the_mean() {
        let f = FunctionRep::pointwise(1, |x| x[0]);
        let v = ou_apply_kernel(&f, &[2.0], 40.0, &cfg()).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn spectral_identity_at_zero_and_eigen_decay() {
        let s = HermiteSeries::from_terms(
            2,
            [
                (MultiIndex::new(vec![1, 2]).unwrap(), 0.5),
                (MultiIndex::new(vec![0, 0]).unwrap(), -1.0),
            ],
        )
        .unwrap();
        let x = [0.3, -0.7];
        assert_eq!(ou_apply_spectral(&s, &x, 0.0).unwrap(), s.eval(&x).unwrap());
        let b = HermiteSeries::basis(MultiIndex::new(vec![1, 2]).unwrap());
        let v = ou_apply_spectral(&b, &x, 0.7).unwrap() / b.eval(&x).unwrap();
        assert_relative_eq!(v, (-2.1f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_time() {
        let f = one(1);
        assert!(matches!(ou_apply_kernel(&f, &[0.0], 0.0, &cfg()), Err(Error::Argument(_))));
        assert!(ou_apply_change_of_var(&f, &[0.0], -1.0, &cfg()).is_err());
        assert!(ou_apply_spectral(f.as_series().unwrap(), &[0.0], -1.0).is_err());
    }

    #[test]
    fn adaptive_route_matches_closed_form_for_indicator() {
        // T_t 1_[-1,1](x) = (erf((1 - r x)/s) + erf((1 + r x)/s)) / 2
        let f = |y: f64| Ok(if y.abs() <= 1.0 { 1.0 } else { 0.0 });
        for (x, t) in [(0.0, 1e-4), (0.9, 0.01), (2.0, 1.0)] {
            let (r, s) = mehler_scales(t);
            let exact = 0.5 * (erf((1.0 - r * x) / s) + erf((1.0 + r * x) / s));
            let v = ou_apply_1d_adaptive(f, x, t, &[-1.0, 1.0], AdaptiveTolerance::default()).unwrap();
            assert_relative_eq!(v, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn maximal_examples() {
        let c = cfg();
        let m = ou_maximal(&one(1), &[0.3], &c).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.grid_size, 65);
        let m = ou_maximal(&h(&[2]), &[1.0], &c).unwrap();
        assert_relative_eq!(m.value, hermite_1d(2, 1.0) * (-2e-4f64).exp(), max_relative = 1e-14);
        assert_eq!(m.argmax, Argmax::Time(1e-4));
    }

    #[test]
    fn maximal_indicator_against_refined_grid() {
        let f = FunctionRep::pointwise(1, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 });
        let c = QuadratureConfig {
            gh_nodes: 200,
            ..cfg()
        };
        let m = ou_maximal(&f, &[0.0], &c).unwrap();
        assert!(m.value > erf(1.0) && m.value < 1.0 + 1e-12);
        let fine = QuadratureConfig {
            time_grid: c.time_grid.refined(10),
            ..c.clone()
        };
        let mf = ou_maximal(&f, &[0.0], &fine).unwrap();
        assert!((mf.value - m.value).abs() < 1e-3);
    }

    #[test]
    fn nontangential_examples() {
        let c = cfg();
        for kind in [ConeKind::ParabolicGaussian, ConeKind::TruncatedParabolic] {
            assert_eq!(nontangential_maximal(&one(2), &[0.5, 0.5], kind, &c).unwrap().value, 1.0);
        }
        let f = h(&[1]);
        let trunc = nontangential_maximal(&f, &[0.0], ConeKind::TruncatedParabolic, &c).unwrap();
        let par = nontangential_maximal(&f, &[0.0], ConeKind::ParabolicGaussian, &c).unwrap();
        assert!(trunc.value <= par.value);

        // sup of e^{-t} sqrt(2) y over y < sqrt(t), t < 1/4 is attained at the corner
        let corner = (-0.25f64).exp() * 0.5 * 2f64.sqrt();
        let mut brute: f64 = 0.0;
        for i in 0..2000 {
            let t = 0.25 * (i as f64 + 0.5) / 2000.0;
            for j in 0..2000 {
                brute = brute.max((-t).exp() * 2f64.sqrt() * t.sqrt() * j as f64 / 2000.0);
            }
        }
        assert!((brute - corner).abs() < 1e-3);
        assert!(trunc.value < corner);
        let fine = QuadratureConfig {
            time_grid: LogGrid::new(200, 0.2, 0.25),
            cone_radial: 2000,
            ..c
        };
        let dense = nontangential_maximal(&f, &[0.0], ConeKind::TruncatedParabolic, &fine).unwrap();
        assert!((dense.value - brute).abs() < 1e-3);
    }

    #[test]
    fn cone_grid_is_ordered_and_inside() {
        let c = QuadratureConfig {
            time_grid: LogGrid::new(16, 1e-3, 1.0),
            cone_radial: 4,
            cone_angular: 6,
            ..cfg()
        };
        for kind in ConeKind::ALL {
            let spec = ConeSpec::new(vec![1.5, -0.5], kind).unwrap();
            let cells = cone_grid(&spec, &c);
            assert!(!cells.is_empty());
            for w in cells.windows(2) {
                assert!(w[0].1 <= w[1].1);
            }
            for (y, t) in &cells {
                assert!(crate::cones::cone_contains(&spec, y, *t));
            }
        }
    }

    #[test]
    fn bound_ingredients() {
        let c = cfg();
        let b = verify_gutierrez_urbina_bound(&one(1), &[0.0], &c).unwrap();
        assert_eq!(b.lhs, 1.0);
        assert_eq!(b.hl_maximal, 1.0);
        assert_relative_eq!(b.tail, 2.0, max_relative = 1e-14);
        let b = verify_gutierrez_urbina_bound(&h(&[2]), &[1.0], &c).unwrap();
        assert!(b.lhs.is_finite() && b.hl_maximal.is_finite() && b.tail.is_finite());
        assert!(b.ratio > 0.0 && b.ratio < 1.0);
    }
}
