//! The Gaussian measure `gamma_d(dx) = pi^{-d/2} e^{-|x|^2} dx`, ball
//! measures, `L^p(gamma_d)` norms and the Gaussian Hardy-Littlewood maximal
//! function.
//!
//! Balls are closed. Integrals over a ball in `d <= 3` are iterated
//! Gauss-Legendre rules after `y_i = c_i + rho_i sin(theta_i)`, where
//! `rho_i` is the half-chord left by the previous axes; the substitution
//! removes the square-root edges of the chords. `d > 3` falls back to seeded
//! Monte Carlo with points uniform in the ball.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use libm::{erf, erfc, tgamma};

use crate::config::QuadratureConfig;
use crate::error::{check_finite, Error, Result};
use crate::hermite::FunctionRep;
use crate::quadrature::{gauss_hermite, gauss_legendre, integrate_real_line, tensor_sum, AdaptiveTolerance};

/// Largest dimension handled by deterministic ball quadrature.
pub const DETERMINISTIC_BALL_DIM: usize = 3;

/// `pi^{-d/2} e^{-|x|^2}`
pub fn gaussian_density(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-r2).exp() * PI.powf(-(x.len() as f64) / 2.0)
}

/// The closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBall {
    center: Vec<f64>,
    radius: f64,
}

impl GaussianBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::arg("ball center needs dimension >= 1"));
        }
        if !(radius > 0.0) || radius.is_nan() {
            return Err(Error::arg(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let d2: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.radius * self.radius
    }
}

// gamma_1 mass of [a, b]
fn interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        0.5 * (erf(b) - erf(a))
    }
}


/// `gamma_d(B)`. Closed form in `d = 1`; iterated quadrature with an exact
/// innermost axis in `d = 2, 3`; Monte Carlo beyond.
pub fn gaussian_ball_measure(ball: &GaussianBall, cfg: &QuadratureConfig) -> Result<f64> {
    let d = ball.dim();
    let r = ball.radius;
    if r.is_infinite() {
        return Ok(1.0);
    }
    match d {
        1 => {
            let c = ball.center[0];
            Ok(interval_mass(c - r, c + r))
        }
        2..=DETERMINISTIC_BALL_DIM => {
            let rule = gauss_legendre(cfg.ball_nodes);
            let mut point = vec![0.0; d];
            let v = ball_recursion(&ball.center, &rule.nodes, &rule.weights, 0, r, 1.0, &mut point, &mut |p, rho| {
                // last axis in closed form; the other axes carry their density
                let last = d - 1;
                let lead: f64 = p[..last].iter().map(|v| (-v * v).exp() / PI.sqrt()).product();
                let c = ball.center[last];
                Ok(lead * interval_mass(c - rho, c + rho))
            })?;
            Ok(v.clamp(f64::MIN_POSITIVE, 1.0))
        }
        _ => {
            let (m, _) = monte_carlo_ball(ball, cfg, |_| Ok(1.0))?;
            Ok(m.clamp(f64::MIN_POSITIVE, 1.0))
        }
    }
}

// Integrates over the first `d - 1` axes with the sine substitution and hands
// the final half-chord to `inner`. `scale` carries the accumulated Jacobian.
#[allow(clippy::too_many_arguments)]
fn ball_recursion<F>(
    center: &[f64],
    nodes: &[f64],
    weights: &[f64],
    axis: usize,
    rho: f64,
    scale: f64,
    point: &mut [f64],
    inner: &mut F,
) -> Result<f64>
where
    F: FnMut(&[f64], f64) -> Result<f64>,
{
    let d = center.len();
    if axis + 1 == d {
        return Ok(scale * inner(point, rho)?);
    }
    let mut total = 0.0;
    for (&s, &w) in nodes.iter().zip(weights) {
        let theta = FRAC_PI_2 * s;
        let (sin, cos) = theta.sin_cos();
        point[axis] = center[axis] + rho * sin;
        let jac = FRAC_PI_2 * w * rho * cos;
        total += ball_recursion(center, nodes, weights, axis + 1, rho * cos, scale * jac, point, inner)?;
    }
    Ok(total)
}

/// `int_B g d gamma_d` together with `gamma_d(B)` computed on the same nodes,
/// so that ratios of the two are exact for constant `g`.
pub fn ball_integral<G>(ball: &GaussianBall, cfg: &QuadratureConfig, mut g: G) -> Result<(f64, f64)>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    if ball.dim() > DETERMINISTIC_BALL_DIM {
        return monte_carlo_ball(ball, cfg, g);
    }
    let rule = gauss_legendre(cfg.ball_nodes);
    let mut point = vec![0.0; ball.dim()];
    let mut out = (0.0, 0.0);
    sine_rule_sweep(&ball.center, &rule.nodes, &rule.weights, 0, ball.radius, 1.0, &mut point, &mut g, &mut out)?;
    Ok(out)
}

// Full sine-substituted product rule over the ball; accumulates
// (int g d gamma, int d gamma) into `out`.
#[allow(clippy::too_many_arguments)]
fn sine_rule_sweep<G>(
    center: &[f64],
    nodes: &[f64],
    weights: &[f64],
    axis: usize,
    rho: f64,
    scale: f64,
    point: &mut [f64],
    g: &mut G,
    out: &mut (f64, f64),
) -> Result<()>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    let last = axis + 1 == center.len();
    for (&s, &w) in nodes.iter().zip(weights) {
        let (sin, cos) = (FRAC_PI_2 * s).sin_cos();
        point[axis] = center[axis] + rho * sin;
        let jac = scale * FRAC_PI_2 * w * rho * cos;
        if last {
            let jw = jac * gaussian_density(point);
            out.1 += jw;
            out.0 += jw * g(point)?;
        } else {
            sine_rule_sweep(center, nodes, weights, axis + 1, rho * cos, jac, point, g, out)?;
        }
    }
    Ok(())
}

fn monte_carlo_ball<G>(ball: &GaussianBall, cfg: &QuadratureConfig, mut g: G) -> Result<(f64, f64)>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    let d = ball.dim();
    let df = d as f64;
    let volume = PI.powf(df / 2.0) * ball.radius.powf(df) / tgamma(df / 2.0 + 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dir = vec![0.0; d];
    let mut point = vec![0.0; d];
    let (mut acc, mut mass) = (0.0, 0.0);
    for _ in 0..cfg.mc_samples {
        let mut norm = 0.0_f64;
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm += *v * *v;
        }
        let norm = norm.sqrt();
        let radial = ball.radius * rng.gen::<f64>().powf(1.0 / df);
        for ((p, c), v) in point.iter_mut().zip(&ball.center).zip(&dir) {
            *p = c + radial * v / norm;
        }
        let dens = gaussian_density(&point);
        mass += dens;
        acc += dens * g(&point)?;
    }
    let n = cfg.mc_samples as f64;
    Ok((volume * acc / n, volume * mass / n))
}

/// `(int |f|^p d gamma_d)^{1/p}` by tensor Gauss-Hermite quadrature.
pub fn gaussian_norm(f: &FunctionRep, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    gaussian_norm_of(f.dim(), p, cfg, |x| f.eval_unchecked(x))
}

/// [`gaussian_norm`] for any evaluator on `R^dim`.
pub fn gaussian_norm_of<G>(dim: usize, p: f64, cfg: &QuadratureConfig, mut g: G) -> Result<f64>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    if !(p >= 1.0) {
        return Err(Error::arg(format!("norm exponent must be >= 1, got {p}")));
    }
    let rule = gauss_hermite(cfg.gh_nodes);
    let s = tensor_sum(dim, &rule, |x| Ok(g(x)?.abs().powf(p)))?;
    check_finite("gaussian norm", &[], s.powf(1.0 / p))
}

/// One-dimensional `L^p(gamma_1)` norm by adaptive Gauss-Kronrod on the real
/// line. Suited to integrands with jumps, kinks or slow tails where the
/// Gauss-Hermite rule converges slowly.
pub fn gaussian_norm_1d_adaptive<G>(p: f64, breakpoints: &[f64], tol: AdaptiveTolerance, mut g: G) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(p >= 1.0) {
        return Err(Error::arg(format!("norm exponent must be >= 1, got {p}")));
    }
    let s = integrate_real_line(
        |x| {
            let w = (-x * x).exp();
            if w == 0.0 {
                return Ok(0.0);
            }
            // weight folded in before the power so e^{x^2/2}-type growth cannot overflow
            Ok((g(x)?.abs() * (w / PI.sqrt()).powf(1.0 / p)).powf(p))
        },
        breakpoints,
        tol,
    )?;
    check_finite("gaussian norm", &[], s.powf(1.0 / p))
}

/// Where a supremum over a search grid was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Argmax {
    Radius(f64),
    /// `f64::INFINITY` marks the `t -> inf` limit.
    Time(f64),
    Cone { y: Vec<f64>, t: f64 },
}

/// A supremum estimated over a finite grid; a lower bound for the true value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalEstimate {
    pub value: f64,
    pub argmax: Argmax,
    pub grid_size: usize,
}

/// Scans `cells` in order and keeps the first strict maximum, so ties resolve
/// to the earliest cell.
pub(crate) fn first_max<C, I, F>(cells: I, mut eval: F) -> Result<Option<(f64, C)>>
where
    I: IntoIterator<Item = C>,
    F: FnMut(&C) -> Result<f64>,
{
    let mut best: Option<(f64, C)> = None;
    for c in cells {
        let v = eval(&c)?;
        match &best {
            Some((b, _)) if !(v > *b) => {}
            _ => best = Some((v, c)),
        }
    }
    Ok(best)
}

/// `M_gamma f(x) = sup_r gamma(B(x,r))^{-1} int_{B(x,r)} |f| d gamma` over the
/// configured radius grid.
pub fn hl_maximal(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<MaximalEstimate> {
    if x.len() != f.dim() {
        return Err(Error::arg("dimension mismatch in hl_maximal"));
    }
    let radii = cfg.radius_grid.values();
    let grid_size = radii.len();
    let best = first_max(radii, |&r| {
        let ball = GaussianBall::new(x.to_vec(), r)?;
        let (num, den) = ball_integral(&ball, cfg, |y| Ok(f.eval_unchecked(y)?.abs()))?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    })?
    .expect("radius grid is never empty");
    Ok(MaximalEstimate {
        value: best.0,
        argmax: Argmax::Radius(best.1),
        grid_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LogGrid;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn density_examples() {
        assert_relative_eq!(gaussian_density(&[0.0]), 1.0 / PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gaussian_density(&[0.0, 0.0]), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(gaussian_density(&[2.0]), (-4.0f64).exp() / PI.sqrt(), max_relative = 1e-15);
    }

    // independent oracle: adaptive quadrature of the density over [c-r, c+r]
    fn interval_oracle(c: f64, r: f64) -> f64 {
        crate::quadrature::integrate_adaptive(
            |u| Ok((-u * u).exp() / PI.sqrt()),
            c - r,
            c + r,
            AdaptiveTolerance::default(),
        )
        .unwrap()
    }

    #[test]
    fn ball_measure_examples_1d() {
        let c = cfg();
        let inf = GaussianBall::new(vec![0.0], f64::INFINITY).unwrap();
        assert_eq!(gaussian_ball_measure(&inf, &c).unwrap(), 1.0);
        let unit = GaussianBall::new(vec![0.0], 1.0).unwrap();
        let v = gaussian_ball_measure(&unit, &c).unwrap();
        assert_relative_eq!(v, 0.842_700_792_949_714_9, max_relative = 1e-14);
        assert_relative_eq!(v, interval_oracle(0.0, 1.0), max_relative = 1e-12);
        let off = GaussianBall::new(vec![2.0], 0.5).unwrap();
        let v = gaussian_ball_measure(&off, &c).unwrap();
        assert_relative_eq!(v, 0.5 * (erf(2.5) - erf(1.5)), max_relative = 1e-12);
        assert_relative_eq!(v, interval_oracle(2.0, 0.5), max_relative = 1e-12);
        assert!((v - 0.016_744).abs() < 1e-6);
        let big = GaussianBall::new(vec![0.0], 10.0).unwrap();
        assert!(gaussian_ball_measure(&big, &c).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn ball_measure_2d_matches_polar_closed_form() {
        // centred disc: gamma_2(B(0,r)) = 1 - e^{-r^2}
        for r in [0.1, 0.7, 1.5, 3.0] {
            let b = GaussianBall::new(vec![0.0, 0.0], r).unwrap();
            let v = gaussian_ball_measure(&b, &cfg()).unwrap();
            assert_relative_eq!(v, 1.0 - (-r * r).exp(), max_relative = 1e-12);
            let (_, m) = ball_integral(&b, &cfg(), |_| Ok(1.0)).unwrap();
            assert_relative_eq!(m, v, max_relative = 1e-10);
        }
    }

    #[test]
    fn ball_measure_3d_matches_radial_integral() {
        // gamma_3(B(0,r)) = erf(r) - 2 r e^{-r^2} / sqrt(pi)
        for r in [0.3, 1.0, 2.2] {
            let b = GaussianBall::new(vec![0.0; 3], r).unwrap();
            let v = gaussian_ball_measure(&b, &cfg()).unwrap();
            let exact = erf(r) - 2.0 * r * (-r * r).exp() / PI.sqrt();
            assert_relative_eq!(v, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn ball_measure_monotone_in_radius() {
        for d in 1..=4 {
            let mut last = 0.0;
            for r in [0.05, 0.2, 0.6, 1.3, 2.5, 4.0] {
                let b = GaussianBall::new(vec![0.4; d], r).unwrap();
                let cfg = QuadratureConfig {
                    mc_samples: 20_000,
                    ..cfg()
                };
                let v = gaussian_ball_measure(&b, &cfg).unwrap();
                assert!(v > 0.0 && v <= 1.0);
                if d <= 3 {
                    assert!(v >= last, "d={d} r={r}");
                }
                last = v;
            }
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let b = GaussianBall::new(vec![0.1; 5], 1.0).unwrap();
        let c = QuadratureConfig {
            mc_samples: 5000,
            ..cfg()
        };
        assert_eq!(gaussian_ball_measure(&b, &c).unwrap(), gaussian_ball_measure(&b, &c).unwrap());
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(GaussianBall::new(vec![0.0], 0.0).is_err());
        assert!(GaussianBall::new(vec![0.0], f64::NAN).is_err());
        assert!(GaussianBall::new(vec![], 1.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let c = cfg();
        let k = FunctionRep::pointwise(2, |_| -3.0);
        for p in [1.0, 2.0, 4.5] {
            assert_relative_eq!(gaussian_norm(&k, p, &c).unwrap(), 3.0, max_relative = 1e-13);
        }
        let x = FunctionRep::pointwise(1, |x| x[0]);
        assert_relative_eq!(gaussian_norm(&x, 2.0, &c).unwrap(), 0.5f64.sqrt(), max_relative = 1e-13);
        let h = FunctionRep::pointwise(2, |x| crate::hermite::hermite_1d(3, x[0]) * crate::hermite::hermite_1d(1, x[1]));
        assert_relative_eq!(gaussian_norm(&h, 2.0, &c).unwrap(), 1.0, max_relative = 1e-12);
        assert!(gaussian_norm(&x, 0.5, &c).is_err());
    }

    #[test]
    fn adaptive_norm_handles_jumps() {
        let tol = AdaptiveTolerance::default();
        let v = gaussian_norm_1d_adaptive(1.0, &[-1.0, 1.0], tol, |x| Ok(if x.abs() <= 1.0 { 1.0 } else { 0.0 })).unwrap();
        assert_relative_eq!(v, erf(1.0), max_relative = 1e-11);
        let v = gaussian_norm_1d_adaptive(1.0, &[], tol, |x| Ok(x.abs())).unwrap();
        assert_relative_eq!(v, 1.0 / PI.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn hl_maximal_examples() {
        let c = cfg();
        let one = FunctionRep::pointwise(1, |_| 1.0);
        for x in [-2.0, 0.0, 1.3] {
            let m = hl_maximal(&one, &[x], &c).unwrap();
            assert_relative_eq!(m.value, 1.0, max_relative = 1e-13);
            assert_eq!(m.grid_size, 64);
        }
        let ind = FunctionRep::pointwise(1, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 });
        let m = hl_maximal(&ind, &[0.0], &c).unwrap();
        assert_relative_eq!(m.value, 1.0, max_relative = 1e-13);
        assert_eq!(m.argmax, Argmax::Radius(1e-3));
    }

    #[test]
    fn hl_maximal_abs_against_finer_grid() {
        let c = cfg();
        let f = FunctionRep::pointwise(1, |x| x[0].abs());
        let coarse = hl_maximal(&f, &[0.0], &c).unwrap();
        let fine_cfg = QuadratureConfig {
            radius_grid: LogGrid::new(640, 1e-3, 8.0),
            ..c
        };
        let fine = hl_maximal(&f, &[0.0], &fine_cfg).unwrap();
        assert!(((coarse.value - fine.value) / fine.value).abs() < 1e-2);
        assert!(coarse.value <= fine.value * (1.0 + 1e-12));
    }

    #[test]
    fn hl_maximal_homogeneous_and_dominates_mean() {
        let c = cfg();
        let bump = FunctionRep::pointwise(2, |x| (-(x[0] - 1.0).powi(2) - (x[1] - 1.0).powi(2)).exp());
        let scaled = FunctionRep::pointwise(2, |x| 3.5 * (-(x[0] - 1.0).powi(2) - (x[1] - 1.0).powi(2)).exp());
        let x = [0.5, -1.0];
        let a = hl_maximal(&bump, &x, &c).unwrap();
        let b = hl_maximal(&scaled, &x, &c).unwrap();
        assert_relative_eq!(b.value, 3.5 * a.value, max_relative = 1e-13);
        let mean = gaussian_norm(&bump, 1.0, &c).unwrap();
        assert!(a.value >= mean - 1e-3);
    }
}
