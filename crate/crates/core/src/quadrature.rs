//! Quadrature primitives shared by every module.
//!
//! * Gauss-Hermite rules for the weight `e^{-x^2}`, rescaled so the weights sum
//!   to one. A tensor product of these integrates against `gamma_d` directly.
//! * Gauss-Legendre rules on `[-1, 1]`.
//! * An adaptive Gauss-Kronrod (7/15) integrator for finite and half-infinite
//!   intervals, used where integrands have jumps or kinks.
//!
//! Rules are computed once per node count and cached for the life of the process.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

type RuleCache = RwLock<HashMap<usize, Arc<GaussRule>>>;

fn cached(cache: &'static OnceLock<RuleCache>, n: usize, build: fn(usize) -> GaussRule) -> Arc<GaussRule> {
    let cache = cache.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build(n));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// `n`-point Gauss-Hermite rule with probability weights: `sum_k w_k g(x_k)`
/// approximates `pi^{-1/2} int g(x) e^{-x^2} dx`, exactly for polynomials of
/// degree `< 2n`.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    cached(&CACHE, n, build_gauss_hermite)
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    cached(&CACHE, n, build_gauss_legendre)
}

// Orthonormal Hermite recurrence with Newton polishing; initial guesses from
// the classical asymptotic placement of the largest roots.
fn build_gauss_hermite(n: usize) -> GaussRule {
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p1, p2) = orthonormal_hermite_pair(n, z, pim4);
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                let (_, p2) = orthonormal_hermite_pair(n, z, pim4);
                pp = (2.0 * nf).sqrt() * p2;
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        let w = 2.0 / (pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // odd n: the middle node is exactly zero
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    let mut rule = GaussRule {
        nodes: nodes.into_iter().rev().collect(),
        weights: weights.into_iter().rev().map(|w| w / total).collect(),
    };
    // keep exact symmetry after the reversal
    for k in 0..n / 2 {
        let j = n - 1 - k;
        rule.nodes[k] = -rule.nodes[j];
        rule.weights[k] = rule.weights[j];
    }
    rule
}

// Returns (p_n(z), p_{n-1}(z)) for the orthonormal Hermite polynomials.
fn orthonormal_hermite_pair(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

fn build_gauss_legendre(n: usize) -> GaussRule {
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Tensor-product sum `sum_k w_k f(x_k)` over `rule^dim`.
///
/// Nodes are visited in odometer order with the last axis fastest, so the sum
/// is reproducible run to run.
pub fn tensor_sum<F>(dim: usize, rule: &GaussRule, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    tensor_sum_indexed(dim, rule, |_, p| f(p))
}

/// Like [`tensor_sum`] but also hands the per-axis node indices to `f`.
pub fn tensor_sum_indexed<F>(dim: usize, rule: &GaussRule, mut f: F) -> Result<f64>
where
    F: FnMut(&[usize], &[f64]) -> Result<f64>,
{
    let mut total = 0.0;
    for_each_tensor_node(dim, rule, |idx, point, w| {
        total += w * f(idx, point)?;
        Ok(())
    })?;
    Ok(total)
}

/// Visits every node of `rule^dim` with its indices, coordinates and weight.
pub fn for_each_tensor_node<F>(dim: usize, rule: &GaussRule, mut f: F) -> Result<()>
where
    F: FnMut(&[usize], &[f64], f64) -> Result<()>,
{
    let n = rule.len();
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = vec![rule.nodes[0]; dim];
    loop {
        let w: f64 = idx.iter().map(|&i| rule.weights[i]).product();
        f(&idx, &point, w)?;
        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < n {
                point[axis] = rule.nodes[idx[axis]];
                break;
            }
            idx[axis] = 0;
            point[axis] = rule.nodes[0];
        }
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and subdivision budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k15 = GK_WEIGHTS_K15[7] * fc;
    let mut g7 = GK_WEIGHTS_G7[3] * fc;
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let s = f(c - dx)? + f(c + dx)?;
        k15 += GK_WEIGHTS_K15[j] * s;
        if j % 2 == 1 {
            g7 += GK_WEIGHTS_G7[j / 2] * s;
        }
    }
    Ok(Panel {
        a,
        b,
        value: k15 * h,
        error: ((k15 - g7) * h).abs(),
    })
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs, rel * |I|)` or the interval budget runs out.
/// Running out of budget is not an error; the best estimate is returned.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, tol: AdaptiveTolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg("integrate_adaptive needs finite bounds"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![kronrod15(&mut f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) || panels.len() >= tol.max_intervals {
            return Ok(value);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval cannot be split further in floating point
            return Ok(value);
        }
        panels.push(kronrod15(&mut f, p.a, mid)?);
        panels.push(kronrod15(&mut f, mid, p.b)?);
    }
}

/// Integral of `f` over `[a, inf)` through the map `x = a + (1 - s) / s`.
pub fn integrate_to_infinity<F>(mut f: F, a: f64, tol: AdaptiveTolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_adaptive(
        |s| {
            let x = a + (1.0 - s) / s;
            let v = f(x)?;
            Ok(if v == 0.0 { 0.0 } else { v / (s * s) })
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integral of `f` over the real line, split at the supplied breakpoints
/// (sorted internally; zero is used when none are given).
pub fn integrate_real_line<F>(mut f: F, breakpoints: &[f64], tol: AdaptiveTolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|c| c.is_finite()).collect();
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let first = cuts[0];
    let last = cuts[cuts.len() - 1];
    let mut total = integrate_to_infinity(|x| f(2.0 * first - x), first, tol)?;
    for w in cuts.windows(2) {
        total += integrate_adaptive(&mut f, w[0], w[1], tol)?;
    }
    total += integrate_to_infinity(&mut f, last, tol)?;
    Ok(total)
}
