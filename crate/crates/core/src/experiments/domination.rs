use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{format_point, ExperimentConfig, Semigroup};
use crate::cones::{ConeKind, ConeSpec};
use crate::error::{Error, Result};
use crate::measure::hl_maximal;
use crate::ou::{cone_maximal, ou_maximal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationRow {
    pub apex: Vec<f64>,
    /// Non-tangential maximal function over the configured cone.
    pub maximal: f64,
    pub hl_maximal: f64,
    pub ratio: f64,
}

/// `T* f(x)` against `M_gamma f(x) + (2 v |x|)^d e^{|x|^2} ||f||_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub apex: Vec<f64>,
    pub lhs: f64,
    pub hl_maximal: f64,
    pub tail: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub function: String,
    pub semigroup: Semigroup,
    pub cone: ConeKind,
    pub rows: Vec<DominationRow>,
    pub max_ratio: f64,
    pub max_ratio_apex: Vec<f64>,
    pub bound_rows: Vec<BoundRow>,
    pub max_bound_ratio: f64,
    pub max_bound_apex: Vec<f64>,
}

fn argmax<'a>(items: impl Iterator<Item = (&'a Vec<f64>, f64)>) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for (a, r) in items {
        if r > best.0 {
            best = (r, a.clone());
        }
    }
    best
}

/// Per-apex ratio of the non-tangential maximal function to `M_gamma f`,
/// plus the three-term pointwise bound for `T* f`. Needs `f >= 0`.
pub fn run_domination_report(cfg: &ExperimentConfig) -> Result<DominationReport> {
    let entry = cfg.validate()?;
    if !entry.nonnegative {
        return Err(Error::config(
            "function",
            format!("`{}` takes negative values; the domination report needs f >= 0", entry.name),
        ));
    }
    let q = cfg.effective_quadrature();
    let f = &entry.rep;
    let mut rows = Vec::new();
    let mut bound_rows = Vec::new();
    for apex in &cfg.apexes {
        let spec = ConeSpec::new(apex.clone(), cfg.cone)?;
        let maximal = cone_maximal(&spec, &q, |y, t| cfg.semigroup.apply(f, y, t, &q))?.value;
        let hl = hl_maximal(f, apex, &q)?.value;
        rows.push(DominationRow {
            apex: apex.clone(),
            maximal,
            hl_maximal: hl,
            ratio: maximal / hl,
        });
        let lhs = ou_maximal(f, apex, &q)?.value;
        let n2: f64 = apex.iter().map(|v| v * v).sum();
        let tail = n2.sqrt().max(2.0).powi(apex.len() as i32) * n2.exp() * entry.norm1;
        bound_rows.push(BoundRow {
            apex: apex.clone(),
            lhs,
            hl_maximal: hl,
            tail,
            ratio: lhs / (hl + tail),
        });
    }
    let (max_ratio, max_ratio_apex) = argmax(rows.iter().map(|r| (&r.apex, r.ratio)));
    let (max_bound_ratio, max_bound_apex) = argmax(bound_rows.iter().map(|r| (&r.apex, r.ratio)));
    Ok(DominationReport {
        function: entry.name,
        semigroup: cfg.semigroup,
        cone: cfg.cone,
        rows,
        max_ratio,
        max_ratio_apex,
        bound_rows,
        max_bound_ratio,
        max_bound_apex,
    })
}

/// CSV with header `apex,maximal,hl_maximal,ratio`.
pub fn write_domination_csv<W: Write>(report: &DominationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["apex", "maximal", "hl_maximal", "ratio"]).map_err(io)?;
    for r in &report.rows {
        w.write_record([
            format_point(&r.apex),
            r.maximal.to_string(),
            r.hl_maximal.to_string(),
            r.ratio.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LogGrid;

    fn coarse(dim: usize, function: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(dim, function);
        cfg.cone = ConeKind::TruncatedParabolic;
        cfg.quadrature.time_grid = LogGrid::new(16, 1e-4, 10.0);
        cfg.quadrature.radius_grid = LogGrid::new(16, 1e-3, 8.0);
        cfg.quadrature.cone_radial = 4;
        cfg.quadrature.cone_angular = 6;
        cfg.quadrature.gh_nodes = 24;
        cfg.quadrature.ball_nodes = 16;
        cfg
    }

    #[test]
    fn constant_ratio_is_exactly_one() {
        for d in [1, 2] {
            let report = run_domination_report(&coarse(d, "one")).unwrap();
            assert!(report.rows.iter().all(|r| r.ratio == 1.0));
            assert_eq!(report.max_ratio, 1.0);
        }
    }

    #[test]
    fn spike_ratio_is_finite() {
        let mut cfg = coarse(1, "spike");
        cfg.apexes = vec![vec![-2.0], vec![0.0], vec![2.0]];
        let report = run_domination_report(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        assert!(report.bound_rows.iter().all(|r| r.ratio.is_finite()));
    }

    #[test]
    fn rejects_signed_functions() {
        assert!(run_domination_report(&coarse(1, "h(1)")).is_err());
    }

    #[test]
    fn csv_header() {
        let mut cfg = coarse(1, "bump");
        cfg.apexes = vec![vec![0.0]];
        let report = run_domination_report(&cfg).unwrap();
        let mut buf = Vec::new();
        write_domination_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("apex,maximal,hl_maximal,ratio\n0,"));
    }
}
