//! Normalized Hermite polynomials in `d` variables, Fourier-Hermite
//! coefficients against `gamma_d`, Wiener-chaos projections and the
//! Ornstein-Uhlenbeck generator `L = (1/2) Laplacian - <x, grad>`.
//!
//! `h_beta` is the tensor product of one-dimensional polynomials
//! `h_n = H_n / sqrt(2^n n!)`, where `H_n` is the physicists' Hermite
//! polynomial. Values come from the three-term recurrence with the
//! normalization folded into every step, so `2^n n!` is never formed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::QuadratureConfig;
use crate::error::{check_finite, Error, Result};
use crate::quadrature::{for_each_tensor_node, gauss_hermite};

/// Largest total degree accepted anywhere in the crate.
pub const MAX_DEGREE: u32 = 60;

/// A multi-index `beta` in `N^d`, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    entries: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::arg("multi-index needs dimension >= 1"));
        }
        let degree: u32 = entries.iter().sum();
        if degree > MAX_DEGREE {
            return Err(Error::arg(format!("degree {degree} exceeds the cap of {MAX_DEGREE}")));
        }
        Ok(Self { entries, degree })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: vec![0; dim.max(1)],
            degree: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `|beta|`
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }
}

impl Ord for MultiIndex {
    // degree first; within a degree, larger leading entries come first:
    // (0,0) < (1,0) < (0,1) < (2,0) < (1,1) < (0,2)
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.entries.cmp(&self.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(m: MultiIndex) -> Self {
        m.entries
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for MultiIndex {
    type Err = Error;
    /// Accepts `2,1` or `(2,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = body
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::arg(format!("bad multi-index entry `{p}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// All `beta` with `|beta| <= max_degree` in graded lexicographic order.
/// There are `C(d + max_degree, d)` of them.
pub fn enumerate_multi_indices(dim: usize, max_degree: u32) -> Result<Vec<MultiIndex>> {
    if dim == 0 {
        return Err(Error::arg("dimension must be >= 1"));
    }
    if max_degree > MAX_DEGREE {
        return Err(Error::arg(format!("max_degree {max_degree} exceeds the cap of {MAX_DEGREE}")));
    }
    let mut out = Vec::new();
    for n in 0..=max_degree {
        out.extend(indices_of_degree(dim, n));
    }
    Ok(out)
}

/// All `beta` with `|beta| = n`, largest leading entry first.
pub fn indices_of_degree(dim: usize, n: u32) -> Vec<MultiIndex> {
    fn fill(prefix: &mut Vec<u32>, dim: usize, left: u32, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(MultiIndex {
                entries: prefix.clone(),
                degree: prefix.iter().sum(),
            });
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            fill(prefix, dim, left - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        fill(&mut Vec::with_capacity(dim), dim, n, &mut out);
    }
    out
}

/// Writes `h_0(x), .., h_n(x)` into `out` (which is resized to `n + 1`).
pub fn hermite_1d_table(n: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(std::f64::consts::SQRT_2 * x);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 * x * out[k] - (2.0 * kf).sqrt() * out[k - 1]) / (2.0 * (kf + 1.0)).sqrt();
        out.push(next);
    }
}

/// One-dimensional `h_n(x)`.
pub fn hermite_1d(n: u32, x: f64) -> f64 {
    let mut t = Vec::with_capacity(n as usize + 1);
    hermite_1d_table(n as usize, x, &mut t);
    t[n as usize]
}

// h_n^{(order)} from a table of h_0..h_n, using h_n' = sqrt(2n) h_{n-1}.
fn derivative_from_table(table: &[f64], n: usize, order: usize) -> f64 {
    if order > n {
        return 0.0;
    }
    let factor: f64 = (0..order).map(|j| (2.0 * (n - j) as f64).sqrt()).product();
    factor * table[n - order]
}

fn check_dim(beta: &MultiIndex, x: &[f64]) -> Result<()> {
    if beta.dim() != x.len() {
        return Err(Error::arg(format!(
            "dimension mismatch: multi-index has {} entries, point has {}",
            beta.dim(),
            x.len()
        )));
    }
    Ok(())
}

/// `h_beta(x)`.
pub fn hermite_eval(beta: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_dim(beta, x)?;
    let mut t = Vec::new();
    let mut v = 1.0;
    for (&b, &xi) in beta.entries.iter().zip(x) {
        hermite_1d_table(b as usize, xi, &mut t);
        v *= t[b as usize];
    }
    Ok(v)
}

/// Exact `d h_beta / d x_axis` (axis is zero-based).
pub fn hermite_deriv(beta: &MultiIndex, axis: usize, x: &[f64]) -> Result<f64> {
    check_dim(beta, x)?;
    if axis >= beta.dim() {
        return Err(Error::arg(format!("axis {axis} out of range for dimension {}", beta.dim())));
    }
    let mut t = Vec::new();
    let mut v = 1.0;
    for (i, (&b, &xi)) in beta.entries.iter().zip(x).enumerate() {
        hermite_1d_table(b as usize, xi, &mut t);
        v *= if i == axis {
            derivative_from_table(&t, b as usize, 1)
        } else {
            t[b as usize]
        };
    }
    Ok(v)
}

/// A finitely supported Hermite expansion `sum_beta c_beta h_beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteSeries {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl HermiteSeries {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("dimension must be >= 1"));
        }
        Ok(Self {
            dim,
            coeffs: BTreeMap::new(),
        })
    }

    /// The single-term series `h_beta`.
    pub fn basis(beta: MultiIndex) -> Self {
        let dim = beta.dim();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(beta, 1.0);
        Self { dim, coeffs }
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        let mut s = Self::new(dim)?;
        s.insert(MultiIndex::zero(dim), c)?;
        Ok(s)
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut s = Self::new(dim)?;
        for (b, c) in terms {
            s.add(b, c)?;
        }
        Ok(s)
    }

    /// Sets the coefficient of `beta`; a zero coefficient removes the term.
    pub fn insert(&mut self, beta: MultiIndex, c: f64) -> Result<()> {
        self.check_key(&beta)?;
        if c == 0.0 {
            self.coeffs.remove(&beta);
        } else {
            self.coeffs.insert(beta, c);
        }
        Ok(())
    }

    pub fn add(&mut self, beta: MultiIndex, c: f64) -> Result<()> {
        self.check_key(&beta)?;
        let v = self.coeffs.get(&beta).copied().unwrap_or(0.0) + c;
        self.insert(beta, v)
    }

    fn check_key(&self, beta: &MultiIndex) -> Result<()> {
        if beta.dim() != self.dim {
            return Err(Error::arg(format!(
                "multi-index {beta} does not match series dimension {}",
                self.dim
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, beta: &MultiIndex) -> f64 {
        self.coeffs.get(beta).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(b, &c)| (b, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|beta|` carrying a nonzero coefficient (0 for the empty series).
    pub fn max_degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// `J_n` applied to the series: the terms with `|beta| = n`.
    pub fn chaos(&self, n: u32) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(b, _)| b.degree() == n)
                .map(|(b, &c)| (b.clone(), c))
                .collect(),
        }
    }

    /// Multiplies each coefficient by `m(|beta|)`; this is how spectral
    /// multipliers such as `e^{-t|beta|}` act.
    pub fn map_by_degree(&self, m: impl Fn(u32) -> f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(b, &c)| (b.clone(), c * m(b.degree())))
                .filter(|(_, c)| *c != 0.0)
                .collect(),
        }
    }

    fn tables(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut maxes = vec![0usize; self.dim];
        for b in self.coeffs.keys() {
            for (m, &e) in maxes.iter_mut().zip(&b.entries) {
                *m = (*m).max(e as usize);
            }
        }
        maxes
            .iter()
            .zip(x)
            .map(|(&m, &xi)| {
                let mut t = Vec::with_capacity(m + 1);
                hermite_1d_table(m, xi, &mut t);
                t
            })
            .collect()
    }

    /// `sum_beta c_beta h_beta(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::arg(format!(
                "dimension mismatch: series has {}, point has {}",
                self.dim,
                x.len()
            )));
        }
        let tables = self.tables(x);
        Ok(self
            .coeffs
            .iter()
            .map(|(b, &c)| {
                c * b
                    .entries
                    .iter()
                    .zip(&tables)
                    .map(|(&e, t)| t[e as usize])
                    .product::<f64>()
            })
            .sum())
    }

    /// Exact `L f(x)`, differentiating every term.
    pub fn generator(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::arg("dimension mismatch in generator"));
        }
        let tables = self.tables(x);
        let mut total = 0.0;
        for (b, &c) in &self.coeffs {
            let mut term = 0.0;
            for i in 0..self.dim {
                let bi = b.entries[i] as usize;
                let d1 = derivative_from_table(&tables[i], bi, 1);
                let d2 = derivative_from_table(&tables[i], bi, 2);
                let rest: f64 = (0..self.dim)
                    .filter(|&j| j != i)
                    .map(|j| tables[j][b.entries[j] as usize])
                    .product();
                term += (0.5 * d2 - x[i] * d1) * rest;
            }
            total += c * term;
        }
        Ok(total)
    }
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A black-box function on `R^d`.
#[derive(Clone)]
pub struct PointwiseFn {
    dim: usize,
    eval: Arc<Evaluator>,
}

impl PointwiseFn {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn call(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

impl fmt::Debug for PointwiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointwiseFn").field("dim", &self.dim).finish_non_exhaustive()
    }
}

/// A test function: either evaluated pointwise or held as a Hermite series.
#[derive(Debug, Clone)]
pub enum FunctionRep {
    Pointwise(PointwiseFn),
    Series(HermiteSeries),
}

impl FunctionRep {
    pub fn pointwise(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FunctionRep::Pointwise(PointwiseFn::new(dim, eval))
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionRep::Pointwise(p) => p.dim,
            FunctionRep::Series(s) => s.dim,
        }
    }

    pub fn as_series(&self) -> Option<&HermiteSeries> {
        match self {
            FunctionRep::Series(s) => Some(s),
            FunctionRep::Pointwise(_) => None,
        }
    }

    /// `f(x)`; non-finite results are reported with the offending point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!(
                "dimension mismatch: function has {}, point has {}",
                self.dim(),
                x.len()
            )));
        }
        let v = match self {
            FunctionRep::Pointwise(p) => p.call(x),
            FunctionRep::Series(s) => s.eval(x)?,
        };
        check_finite("function", x, v)
    }

    /// Same as [`eval`](Self::eval) without the dimension check, for hot loops
    /// whose points are built with the right length.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            FunctionRep::Pointwise(p) => p.call(x),
            FunctionRep::Series(s) => s.eval(x)?,
        };
        check_finite("function", x, v)
    }
}

impl From<HermiteSeries> for FunctionRep {
    fn from(s: HermiteSeries) -> Self {
        FunctionRep::Series(s)
    }
}

/// `f^(beta) = int f h_beta d gamma_d`.
///
/// Series inputs return the stored coefficient. Pointwise inputs use the
/// tensor Gauss-Hermite rule with `cfg.gh_nodes` nodes per axis, which is
/// exact for polynomial `f h_beta` of degree below `2 * gh_nodes` per axis.
pub fn fourier_hermite_coeff(f: &FunctionRep, beta: &MultiIndex, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(fourier_hermite_coeffs(f, std::slice::from_ref(beta), cfg)?[0])
}

/// Batched [`fourier_hermite_coeff`]: `f` is evaluated once per node.
pub fn fourier_hermite_coeffs(f: &FunctionRep, betas: &[MultiIndex], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let dim = f.dim();
    for b in betas {
        if b.dim() != dim {
            return Err(Error::arg(format!("multi-index {b} does not match dimension {dim}")));
        }
    }
    if let FunctionRep::Series(s) = f {
        return Ok(betas.iter().map(|b| s.coefficient(b)).collect());
    }
    let (sums, _) = coefficient_sums(f, betas, cfg)?;
    Ok(sums)
}

// Returns the coefficient sums and the quadrature value of int f^2 d gamma.
fn coefficient_sums(f: &FunctionRep, betas: &[MultiIndex], cfg: &QuadratureConfig) -> Result<(Vec<f64>, f64)> {
    let dim = f.dim();
    let rule = gauss_hermite(cfg.gh_nodes);
    let max_entry = betas.iter().map(MultiIndex::max_entry).max().unwrap_or(0) as usize;
    // node_tables[k][n] = h_n(node_k)
    let node_tables: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let mut t = Vec::new();
            hermite_1d_table(max_entry, x, &mut t);
            t
        })
        .collect();
    let mut sums = vec![0.0; betas.len()];
    let mut square = 0.0;
    for_each_tensor_node(dim, &rule, |idx, point, w| {
        let fv = f.eval_unchecked(point)?;
        let wf = w * fv;
        square += wf * fv;
        for (s, b) in sums.iter_mut().zip(betas) {
            let h: f64 = b
                .entries
                .iter()
                .zip(idx)
                .map(|(&e, &k)| node_tables[k][e as usize])
                .product();
            *s += wf * h;
        }
        Ok(())
    })?;
    Ok((sums, square))
}

/// Quadrature Gram matrix `<h_alpha, h_beta>_gamma` for the given indices,
/// accumulated node by node so the cost is one pass over the tensor grid.
pub fn gram_matrix(betas: &[MultiIndex], cfg: &QuadratureConfig) -> Result<Vec<Vec<f64>>> {
    let Some(first) = betas.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    if betas.iter().any(|b| b.dim() != dim) {
        return Err(Error::arg("mixed dimensions in gram_matrix"));
    }
    let rule = gauss_hermite(cfg.gh_nodes);
    let max_entry = betas.iter().map(MultiIndex::max_entry).max().unwrap_or(0) as usize;
    let node_tables: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            let mut t = Vec::new();
            hermite_1d_table(max_entry, x, &mut t);
            t
        })
        .collect();
    let m = betas.len();
    let mut gram = vec![0.0; m * m];
    let mut values = vec![0.0; m];
    for_each_tensor_node(dim, &rule, |idx, _, w| {
        for (v, b) in values.iter_mut().zip(betas) {
            *v = b
                .entries
                .iter()
                .zip(idx)
                .map(|(&e, &k)| node_tables[k][e as usize])
                .product();
        }
        for i in 0..m {
            let wi = w * values[i];
            let row = &mut gram[i * m..(i + 1) * m];
            for j in i..m {
                row[j] += wi * values[j];
            }
        }
        Ok(())
    })?;
    Ok((0..m)
        .map(|i| (0..m).map(|j| if j >= i { gram[i * m + j] } else { gram[j * m + i] }).collect())
        .collect())
}

/// `J_n f = sum_{|beta| = n} f^(beta) h_beta`.
///
/// For pointwise `f`, coefficients below `1e-12 * max(1, ||f||_2)` are taken
/// as quadrature round-off of exact zeros and dropped.
pub fn project_chaos(f: &FunctionRep, n: u32, cfg: &QuadratureConfig) -> Result<HermiteSeries> {
    if n > MAX_DEGREE {
        return Err(Error::arg(format!("chaos level {n} exceeds the cap of {MAX_DEGREE}")));
    }
    let dim = f.dim();
    if let FunctionRep::Series(s) = f {
        return Ok(s.chaos(n));
    }
    let betas = indices_of_degree(dim, n);
    let (coeffs, square) = coefficient_sums(f, &betas, cfg)?;
    let cutoff = 1e-12 * square.sqrt().max(1.0);
    HermiteSeries::from_terms(
        dim,
        betas.into_iter().zip(coeffs).filter(|(_, c)| c.abs() > cutoff),
    )
}

/// `L f(x)`. Series use exact derivatives; pointwise functions use central
/// differences with step `cfg.fd_step` (error `O(step^2)`).
pub fn generator_apply(f: &FunctionRep, x: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::arg("dimension mismatch in generator_apply"));
    }
    match f {
        FunctionRep::Series(s) => s.generator(x),
        FunctionRep::Pointwise(_) => {
            let h = cfg.fd_step;
            let f0 = f.eval(x)?;
            let mut p = x.to_vec();
            let mut total = 0.0;
            for i in 0..x.len() {
                p[i] = x[i] + h;
                let fp = f.eval(&p)?;
                p[i] = x[i] - h;
                let fm = f.eval(&p)?;
                p[i] = x[i];
                let second = (fp - 2.0 * f0 + fm) / (h * h);
                let first = (fp - fm) / (2.0 * h);
                total += 0.5 * second - x[i] * first;
            }
            Ok(total)
        }
    }
}
