use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::log_grid;

/// A log-spaced grid over a positive parameter (radius or time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl LogGrid {
    pub const fn new(count: usize, lo: f64, hi: f64) -> Self {
        Self { count, lo, hi }
    }

    pub fn values(&self) -> Vec<f64> {
        log_grid(self.lo, self.hi, self.count)
    }

    /// Inserts the geometric midpoint between neighbours `factor - 1` times
    /// per gap. Every point of `self` stays in the result bit-for-bit.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            count: (self.count - 1) * factor.max(1) + 1,
            ..*self
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::config(field, "grid needs at least 2 points"));
        }
        if !(self.lo > 0.0 && self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::config(field, "grid bounds must satisfy 0 < lo < hi < inf"));
        }
        Ok(())
    }
}

/// Node counts, grids and step sizes used by every numerical routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Hermite nodes per axis.
    pub gh_nodes: usize,
    /// Nodes of the fixed rule for the subordination integral.
    pub improper_nodes: usize,
    /// Radii searched by the Hardy-Littlewood maximal function.
    pub radius_grid: LogGrid,
    /// Times searched by the semigroup maximal functions.
    pub time_grid: LogGrid,
    /// Relative radii per cone cross-section (0, 1/n, .., (n-1)/n).
    pub cone_radial: usize,
    /// Directions per cone cross-section when `d >= 2`.
    pub cone_angular: usize,
    /// Gauss-Legendre nodes per axis for integrals over balls.
    pub ball_nodes: usize,
    /// Central-difference step for the generator on black-box functions.
    pub fd_step: f64,
    /// Monte Carlo sample count for ball measures when `d > 3`.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gh_nodes: 64,
            improper_nodes: 200,
            radius_grid: LogGrid::new(64, 1e-3, 8.0),
            time_grid: LogGrid::new(64, 1e-4, 10.0),
            cone_radial: 12,
            cone_angular: 16,
            ball_nodes: 48,
            fd_step: 1e-4,
            mc_samples: 200_000,
            seed: 0x5eed,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gh_nodes < 2 {
            return Err(Error::config("gh_nodes", "need at least 2 nodes"));
        }
        if self.improper_nodes < 16 {
            return Err(Error::config("improper_nodes", "need at least 16 nodes"));
        }
        if self.cone_radial < 2 || self.cone_angular < 2 || self.ball_nodes < 2 {
            return Err(Error::config("cone_radial/cone_angular/ball_nodes", "need at least 2"));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::config("fd_step", "must be positive"));
        }
        if self.mc_samples < 2 {
            return Err(Error::config("mc_samples", "need at least 2 samples"));
        }
        self.radius_grid.validate("radius_grid")?;
        self.time_grid.validate("time_grid")
    }

    /// Refines every search grid by `factor`; quadrature node counts are kept.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            radius_grid: self.radius_grid.refined(factor),
            time_grid: self.time_grid.refined(factor),
            cone_radial: self.cone_radial * factor.max(1),
            cone_angular: self.cone_angular * factor.max(1),
            ..self.clone()
        }
    }
}
