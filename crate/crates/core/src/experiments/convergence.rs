use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{format_point, ExperimentConfig, TestFunction};
use crate::cones::{cone_contains, cone_path, tangential_path, ConeSpec};
use crate::error::{Error, Result};
use crate::measure::first_max;

/// Sup over path points with `t < alpha` of `|S_t f(y) - f(x)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub apex: Vec<f64>,
    pub alpha: f64,
    pub sup_error: f64,
    pub y_star: Vec<f64>,
    pub t_star: f64,
}

/// One evaluated path point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub apex: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub error: f64,
    pub in_cone: bool,
}

fn evaluate_path(
    cfg: &ExperimentConfig,
    entry: &TestFunction,
    apex: &[f64],
    points: &[(Vec<f64>, f64)],
    spec: &ConeSpec,
) -> Result<Vec<PathSample>> {
    let q = cfg.effective_quadrature();
    let target = entry.rep.eval(apex)?;
    points
        .iter()
        .map(|(y, t)| {
            let v = cfg.semigroup.apply(&entry.rep, y, *t, &q)?;
            Ok(PathSample {
                apex: apex.to_vec(),
                y: y.clone(),
                t: *t,
                error: (v - target).abs(),
                in_cone: cone_contains(spec, y, *t),
            })
        })
        .collect()
}

// samples are scanned by increasing t, so ties go to the smallest t
fn records_from_samples(cfg: &ExperimentConfig, apex: &[f64], samples: &[PathSample]) -> Result<Vec<ConvergenceRecord>> {
    let mut by_t: Vec<&PathSample> = samples.iter().collect();
    by_t.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut out = Vec::new();
    for alpha in cfg.alphas() {
        let below = by_t.iter().copied().filter(|s| s.t < alpha);
        let (sup_error, s) = first_max(below, |s| Ok(s.error))?.ok_or_else(|| {
            Error::config(
                "path_len",
                format!("path at apex {apex:?} never drops below alpha = {alpha}"),
            )
        })?;
        out.push(ConvergenceRecord {
            apex: apex.to_vec(),
            alpha,
            sup_error,
            y_star: s.y.clone(),
            t_star: s.t,
        });
    }
    Ok(out)
}

fn sort_records(records: &mut [ConvergenceRecord]) {
    records.sort_by(|a, b| {
        a.apex
            .iter()
            .zip(&b.apex)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.alpha.total_cmp(&b.alpha))
    });
}

fn cone_samples(cfg: &ExperimentConfig, entry: &TestFunction, apex: &[f64]) -> Result<Vec<PathSample>> {
    let spec = ConeSpec::new(apex.to_vec(), cfg.cone)?;
    let t0 = (cfg.decay * spec.max_time()).min(1.0);
    let path = cone_path(&spec, cfg.path_len_from(t0), cfg.eta, cfg.decay)?;
    evaluate_path(cfg, entry, apex, &path.points, &spec)
}

/// Convergence of `S_t f(y) -> f(x)` along a cone path per apex, one
/// record per alpha. Rows are sorted by apex, then by increasing alpha.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>> {
    let entry = cfg.validate()?;
    let mut out = Vec::new();
    for apex in &cfg.apexes {
        let samples = cone_samples(cfg, &entry, apex)?;
        out.extend(records_from_samples(cfg, apex, &samples)?);
    }
    sort_records(&mut out);
    Ok(out)
}

/// Cone-path and tangential-path convergence side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub cone: Vec<ConvergenceRecord>,
    pub tangential: Vec<ConvergenceRecord>,
    /// Every tangential point with its membership in the configured cone.
    pub tangential_points: Vec<PathSample>,
}

pub fn run_tangential_contrast(cfg: &ExperimentConfig) -> Result<ContrastReport> {
    let entry = cfg.validate()?;
    let mut cone = Vec::new();
    let mut tangential = Vec::new();
    let mut points = Vec::new();
    for apex in &cfg.apexes {
        let samples = cone_samples(cfg, &entry, apex)?;
        cone.extend(records_from_samples(cfg, apex, &samples)?);
        let spec = ConeSpec::new(apex.clone(), cfg.cone)?;
        let path = tangential_path(apex, cfg.path_len_from(1.0), cfg.tangential_exponent, cfg.decay)?;
        let samples = evaluate_path(cfg, &entry, apex, &path, &spec)?;
        tangential.extend(records_from_samples(cfg, apex, &samples)?);
        points.extend(samples);
    }
    sort_records(&mut cone);
    sort_records(&mut tangential);
    Ok(ContrastReport {
        cone,
        tangential,
        tangential_points: points,
    })
}

/// CSV with header `apex,alpha,sup_error,y_star,t_star`.
pub fn write_convergence_csv<W: Write>(records: &[ConvergenceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["apex", "alpha", "sup_error", "y_star", "t_star"]).map_err(io)?;
    for r in records {
        w.write_record([
            format_point(&r.apex),
            r.alpha.to_string(),
            r.sup_error.to_string(),
            format_point(&r.y_star),
            r.t_star.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with header `path,apex,alpha,sup_error,y_star,t_star,in_cone`, where
/// `in_cone` is the membership of the maximizing point.
pub fn write_contrast_csv<W: Write>(report: &ContrastReport, cfg: &ExperimentConfig, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["path", "apex", "alpha", "sup_error", "y_star", "t_star", "in_cone"])
        .map_err(io)?;
    for (label, records) in [("cone", &report.cone), ("tangential", &report.tangential)] {
        for r in records {
            let spec = ConeSpec::new(r.apex.clone(), cfg.cone)?;
            w.write_record([
                label.to_string(),
                format_point(&r.apex),
                r.alpha.to_string(),
                r.sup_error.to_string(),
                format_point(&r.y_star),
                r.t_star.to_string(),
                cone_contains(&spec, &r.y_star, r.t_star).to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
