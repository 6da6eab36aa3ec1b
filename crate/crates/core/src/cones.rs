//! Gaussian cones over a boundary point `x` and paths approaching `(x, 0)`.
//!
//! | kind                  | cross-section at height `t`          | heights            |
//! |-----------------------|--------------------------------------|--------------------|
//! | `parabolic-gaussian`  | `|y - x| < min(sqrt t, 1/|x|, 1)`    | `t > 0`            |
//! | `gaussian`            | `|y - x| < min(t, 1/|x|, 1)`         | `t > 0`            |
//! | `truncated-parabolic` | `|y - x| < sqrt t`                   | `0 < t < min(1/|x|^2, 1/4)` |
//!
//! `1/|x|` is `+inf` at the origin. All inequalities are strict.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    ParabolicGaussian,
    Gaussian,
    TruncatedParabolic,
}

impl ConeKind {
    pub const ALL: [ConeKind; 3] = [
        ConeKind::ParabolicGaussian,
        ConeKind::Gaussian,
        ConeKind::TruncatedParabolic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConeKind::ParabolicGaussian => "parabolic-gaussian",
            ConeKind::Gaussian => "gaussian",
            ConeKind::TruncatedParabolic => "truncated-parabolic",
        }
    }
}

impl fmt::Display for ConeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown cone kind `{s}` (expected parabolic-gaussian, gaussian or truncated-parabolic)"
                ))
            })
    }
}

/// A cone of the given kind with apex `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub apex: Vec<f64>,
    pub kind: ConeKind,
}

impl ConeSpec {
    pub fn new(apex: Vec<f64>, kind: ConeKind) -> Result<Self> {
        if apex.is_empty() || apex.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("cone apex must be a finite point of dimension >= 1"));
        }
        Ok(Self { apex, kind })
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    fn apex_norm(&self) -> f64 {
        self.apex.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Supremum of admissible heights (exclusive); `+inf` when unbounded.
    pub fn max_time(&self) -> f64 {
        match self.kind {
            ConeKind::TruncatedParabolic => {
                let n = self.apex_norm();
                (1.0 / (n * n)).min(0.25)
            }
            _ => f64::INFINITY,
        }
    }

    /// Radius of the cross-section at height `t`; zero outside the height range.
    pub fn aperture(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.max_time()) {
            return 0.0;
        }
        let inv = 1.0 / self.apex_norm();
        match self.kind {
            ConeKind::ParabolicGaussian => t.sqrt().min(inv).min(1.0),
            ConeKind::Gaussian => t.min(inv).min(1.0),
            ConeKind::TruncatedParabolic => t.sqrt(),
        }
    }
}

/// Strict membership of `(y, t)` in the cone.
pub fn cone_contains(spec: &ConeSpec, y: &[f64], t: f64) -> bool {
    if y.len() != spec.dim() {
        return false;
    }
    let dist = y
        .iter()
        .zip(&spec.apex)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    dist < spec.aperture(t)
}

/// A finite sequence `(y_k, t_k)` with `t_k` strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachPath {
    pub spec: ConeSpec,
    pub points: Vec<(Vec<f64>, f64)>,
    pub eta: f64,
}

fn check_path_args(n: usize, decay: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("path needs at least one point"));
    }
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::arg(format!("decay must lie in (0, 1), got {decay}")));
    }
    Ok(())
}

/// [`cone_path_along`] in the direction of the first coordinate axis.
pub fn cone_path(spec: &ConeSpec, n: usize, eta: f64, decay: f64) -> Result<ApproachPath> {
    let mut u = vec![0.0; spec.dim()];
    u[0] = 1.0;
    cone_path_along(spec, &u, n, eta, decay)
}

/// `t_k = t_0 decay^k`, `y_k = x + eta * aperture(t_k) * u` for `k < n`.
///
/// `t_0` is `1` for unbounded cones and `decay * max_time` otherwise. When
/// the offset is comparable to the float spacing at the apex, it is halved
/// until the rounded point is strictly inside.
pub fn cone_path_along(spec: &ConeSpec, direction: &[f64], n: usize, eta: f64, decay: f64) -> Result<ApproachPath> {
    check_path_args(n, decay)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::arg(format!("eta must lie in [0, 1), got {eta}")));
    }
    if direction.len() != spec.dim() {
        return Err(Error::arg("direction dimension does not match the apex"));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::arg("direction must be a nonzero finite vector"));
    }
    let t0 = (decay * spec.max_time()).min(1.0);
    if !(t0 > 0.0) {
        return Err(Error::arg("cone admits no positive height"));
    }
    let mut points = Vec::with_capacity(n);
    let mut t = t0;
    for _ in 0..n {
        if !(t > 0.0) {
            return Err(Error::arg("path heights underflowed; use fewer points or a slower decay"));
        }
        let mut step = eta * spec.aperture(t) / norm;
        let mut y: Vec<f64> = spec.apex.iter().zip(direction).map(|(x, u)| x + step * u).collect();
        // offsets near the float spacing at the apex can round outward
        while !cone_contains(spec, &y, t) {
            step *= 0.5;
            if step == 0.0 {
                y = spec.apex.clone();
                break;
            }
            y = spec.apex.iter().zip(direction).map(|(x, u)| x + step * u).collect();
        }
        points.push((y, t));
        t *= decay;
    }
    Ok(ApproachPath {
        spec: spec.clone(),
        points,
        eta,
    })
}

/// Points with `|y_k - x| = t_k^exponent` along the first axis and
/// `t_k = decay^k`. For `exponent < 1/2` they eventually leave every
/// parabolic cone.
pub fn tangential_path(x: &[f64], n: usize, exponent: f64, decay: f64) -> Result<Vec<(Vec<f64>, f64)>> {
    check_path_args(n, decay)?;
    if !(exponent > 0.0 && exponent < 0.5) {
        return Err(Error::arg(format!("exponent must lie in (0, 1/2), got {exponent}")));
    }
    if x.is_empty() {
        return Err(Error::arg("apex must have dimension >= 1"));
    }
    let mut t = 1.0_f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut y = x.to_vec();
        y[0] += t.powf(exponent);
        out.push((y, t));
        t *= decay;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(x: &[f64], kind: ConeKind) -> ConeSpec {
        ConeSpec::new(x.to_vec(), kind).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(cone_contains(&spec(&[0.0], ConeKind::ParabolicGaussian), &[0.1], 0.04));
        assert!(!cone_contains(&spec(&[3.0, 0.0], ConeKind::TruncatedParabolic), &[3.0, 0.0], 0.2));
        assert!(!cone_contains(&spec(&[0.0], ConeKind::Gaussian), &[0.05], 0.04));
        assert!(cone_contains(&spec(&[0.0], ConeKind::Gaussian), &[0.03], 0.04));
    }

    #[test]
    fn boundary_is_excluded() {
        let s = spec(&[0.0], ConeKind::ParabolicGaussian);
        assert!(!cone_contains(&s, &[0.5], 0.25));
        let s = spec(&[0.0], ConeKind::TruncatedParabolic);
        assert!(!cone_contains(&s, &[0.0], 0.25));
        assert!(!cone_contains(&s, &[0.0], 0.0));
    }

    #[test]
    fn origin_apex_has_no_norm_clause() {
        let s = spec(&[0.0, 0.0], ConeKind::ParabolicGaussian);
        assert!((s.aperture(0.49) - 0.7).abs() < 1e-15);
        assert_eq!(s.aperture(4.0), 1.0);
        let s = spec(&[0.0, 0.0], ConeKind::Gaussian);
        assert_eq!(s.aperture(0.3), 0.3);
    }

    #[test]
    fn cross_section_shrinks_with_apex_norm() {
        for kind in ConeKind::ALL {
            let mut last = f64::INFINITY;
            for k in 0..8 {
                let a = spec(&[0.5 * k as f64], kind).aperture(0.01);
                assert!(a <= last);
                last = a;
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in ConeKind::ALL {
            assert_eq!(kind.to_string().parse::<ConeKind>().unwrap(), kind);
        }
        assert!("sideways".parse::<ConeKind>().is_err());
    }

    #[test]
    fn random_paths_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=3);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let kind = ConeKind::ALL[rng.gen_range(0..3)];
            let eta = rng.gen_range(0.0..0.999);
            let decay = rng.gen_range(0.05..0.95);
            let s = spec(&x, kind);
            let path = cone_path(&s, 20, eta, decay).unwrap();
            for w in path.points.windows(2) {
                assert!(w[1].1 < w[0].1);
            }
            for (y, t) in &path.points {
                assert!(cone_contains(&s, y, *t));
                if kind == ConeKind::TruncatedParabolic {
                    assert!(cone_contains(&spec(&x, ConeKind::ParabolicGaussian), y, *t));
                }
            }
        }
    }

    #[test]
    fn zero_eta_is_the_vertical_path() {
        let s = spec(&[1.0, -2.0], ConeKind::Gaussian);
        let path = cone_path(&s, 5, 0.0, 0.5).unwrap();
        assert!(path.points.iter().all(|(y, _)| y == &s.apex));
    }

    #[test]
    fn tangential_points_leave_the_parabolic_cone() {
        let x = [0.5];
        let s = spec(&x, ConeKind::ParabolicGaussian);
        let path = tangential_path(&x, 40, 0.25, 0.5).unwrap();
        assert!(path.windows(2).all(|w| w[1].1 < w[0].1));
        let (y, t) = path.last().unwrap();
        assert!(!cone_contains(&s, y, *t));
        assert!((y[0] - x[0] - t.powf(0.25)).abs() < 1e-15);
        assert!(tangential_path(&x, 4, 0.5, 0.5).is_err());
    }
}
