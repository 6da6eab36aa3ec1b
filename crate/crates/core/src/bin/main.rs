use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gauss_semigroup::cones::ConeKind;
use gauss_semigroup::error::{Error, Result};
use gauss_semigroup::experiments::convergence::{write_contrast_csv, write_convergence_csv};
use gauss_semigroup::experiments::domination::write_domination_csv;
use gauss_semigroup::experiments::{
    format_point, parse_kv, parse_point, run_convergence, run_domination_report, run_tangential_contrast,
    run_verify_suite, ExperimentConfig, Semigroup, VerifyLevel,
};
use gauss_semigroup::hermite::{enumerate_multi_indices, fourier_hermite_coeffs, hermite_eval, MultiIndex};
use gauss_semigroup::measure::{hl_maximal, MaximalEstimate};
use gauss_semigroup::ou::{
    nontangential_maximal, ou_apply_change_of_var, ou_apply_kernel, ou_apply_spectral, ou_maximal, OuEvaluation,
    OuRoute,
};
use gauss_semigroup::poisson::{
    poisson_apply_kernel, poisson_apply_spectral, poisson_apply_subordination, poisson_maximal,
    poisson_nontangential_maximal,
};

#[derive(Parser)]
#[command(name = "gauss-semigroup", version, about = "Gaussian semigroup experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    semigroup: Option<String>,
    #[arg(long)]
    cone: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    /// Apex list: coordinates separated by `,`, points by `;`.
    #[arg(long, allow_hyphen_values = true)]
    apex: Option<String>,
    #[arg(long)]
    gh_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Auto,
    Kernel,
    ChangeOfVar,
    Subordination,
    Spectral,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MaximalKind {
    Ou,
    Poisson,
    Nontangential,
    Hl,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate h_beta(x).
    HermiteEval {
        #[arg(long)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fourier-Hermite coefficients of a catalog function up to a degree.
    Coeff {
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[command(flatten)]
        common: Common,
    },
    /// T_t f(x).
    OuApply {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "auto")]
        route: Route,
        #[command(flatten)]
        common: Common,
    },
    /// P_t f(x).
    PoissonApply {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "auto")]
        route: Route,
        #[command(flatten)]
        common: Common,
    },
    /// Grid estimate of a maximal function at each apex.
    Maximal {
        #[arg(long, value_enum, default_value = "ou")]
        kind: MaximalKind,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence along cone paths.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Cone paths against tangential paths.
    Contrast {
        #[command(flatten)]
        common: Common,
    },
    /// Non-tangential maximal function against M_gamma.
    Dominate {
        #[command(flatten)]
        common: Common,
    },
    /// Invariant verification suite; exits nonzero on any failure.
    Verify {
        #[arg(long, default_value = "fast")]
        level: String,
        #[command(flatten)]
        common: Common,
    },
}

fn experiment_config(common: &Common, default_cone: ConeKind) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(1, "one");
    cfg.cone = default_cone;
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in parse_kv(&text)? {
            if k == "format" || k == "level" {
                continue;
            }
            if !cfg.apply(&k, &v)? {
                return Err(Error::Config {
                    field: k,
                    message: "unknown key".into(),
                });
            }
        }
    }
    let flags = [
        ("dim", common.dim.map(|v| v.to_string())),
        ("function", common.function.clone()),
        ("semigroup", common.semigroup.clone()),
        ("cone", common.cone.clone()),
        ("eta", common.eta.map(|v| v.to_string())),
        ("decay", common.decay.map(|v| v.to_string())),
        ("apex", common.apex.clone()),
        ("gh-nodes", common.gh_nodes.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.apply(k, &v)?;
        }
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn format_of(common: &Common, default: Format) -> Result<Format> {
    if let Some(f) = common.format {
        return Ok(f);
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in parse_kv(&text)? {
            if k == "format" {
                return Format::from_str(&v, true).map_err(|_| Error::Config {
                    field: "format".into(),
                    message: format!("expected `csv` or `json`, got `{v}`"),
                });
            }
        }
    }
    Ok(default)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn write_rows(header: &[&str], rows: &[Vec<String>], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MaximalRow {
    apex: Vec<f64>,
    #[serde(flatten)]
    estimate: MaximalEstimate,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::HermiteEval { beta, x, common } => {
            let beta: MultiIndex = beta.parse()?;
            let x = parse_point(&x)?;
            let v = hermite_eval(&beta, &x)?;
            let mut out = sink(&common.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&serde_json::json!({ "beta": beta.to_string(), "x": x, "value": v }), &mut out)?,
                Format::Csv => write_rows(
                    &["beta", "x", "value"],
                    &[vec![beta.to_string(), format_point(&x), v.to_string()]],
                    &mut out,
                )?,
            }
            out.flush()?;
        }
        Command::Coeff { degree, common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let entry = cfg.validate()?;
            let betas = enumerate_multi_indices(cfg.dim, degree)?;
            let c = fourier_hermite_coeffs(&entry.rep, &betas, &cfg.effective_quadrature())?;
            let rows: Vec<Vec<String>> = betas.iter().zip(&c).map(|(b, v)| vec![b.to_string(), v.to_string()]).collect();
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => {
                    let map: Vec<_> = betas
                        .iter()
                        .zip(&c)
                        .map(|(b, v)| serde_json::json!({ "beta": b.to_string(), "coefficient": v }))
                        .collect();
                    write_json(&map, &mut out)?
                }
                Format::Csv => write_rows(&["beta", "coefficient"], &rows, &mut out)?,
            }
            out.flush()?;
        }
        Command::OuApply { x, t, route, common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let entry = cfg.validate()?;
            let q = cfg.effective_quadrature();
            let x = parse_point(&x)?;
            let (route, value) = match (route, entry.rep.as_series()) {
                (Route::Spectral, Some(s)) | (Route::Auto, Some(s)) => (OuRoute::Spectral, ou_apply_spectral(s, &x, t)?),
                (Route::Spectral, None) => return Err(Error::Argument(format!("`{}` has no series form", entry.name))),
                (Route::Kernel, _) => (OuRoute::Kernel, ou_apply_kernel(&entry.rep, &x, t, &q)?),
                (Route::ChangeOfVar, _) | (Route::Auto, None) => {
                    (OuRoute::ChangeOfVar, ou_apply_change_of_var(&entry.rep, &x, t, &q)?)
                }
                (Route::Subordination, _) => return Err(Error::Argument("subordination is a Poisson route".into())),
            };
            let eval = OuEvaluation { x, t, route, value };
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&eval, &mut out)?,
                Format::Csv => write_rows(
                    &["x", "t", "route", "value"],
                    &[vec![
                        format_point(&eval.x),
                        t.to_string(),
                        format!("{:?}", eval.route).to_lowercase(),
                        value.to_string(),
                    ]],
                    &mut out,
                )?,
            }
            out.flush()?;
        }
        Command::PoissonApply { x, t, route, common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let entry = cfg.validate()?;
            let q = cfg.effective_quadrature();
            let x = parse_point(&x)?;
            let (name, value) = match (route, entry.rep.as_series()) {
                (Route::Spectral, Some(s)) | (Route::Auto, Some(s)) => ("spectral", poisson_apply_spectral(s, &x, t)?),
                (Route::Spectral, None) => return Err(Error::Argument(format!("`{}` has no series form", entry.name))),
                (Route::Kernel, _) => ("kernel", poisson_apply_kernel(&entry.rep, &x, t, &q)?),
                (Route::Subordination, _) | (Route::Auto, None) => {
                    ("subordination", poisson_apply_subordination(&entry.rep, &x, t, &q)?)
                }
                (Route::ChangeOfVar, _) => return Err(Error::Argument("change-of-var is an OU route".into())),
            };
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(
                    &serde_json::json!({ "x": x, "t": t, "route": name, "value": value }),
                    &mut out,
                )?,
                Format::Csv => write_rows(
                    &["x", "t", "route", "value"],
                    &[vec![format_point(&x), t.to_string(), name.to_string(), value.to_string()]],
                    &mut out,
                )?,
            }
            out.flush()?;
        }
        Command::Maximal { kind, common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let entry = cfg.validate()?;
            let q = cfg.effective_quadrature();
            let mut rows = Vec::new();
            for apex in &cfg.apexes {
                let estimate = match kind {
                    MaximalKind::Ou => ou_maximal(&entry.rep, apex, &q)?,
                    MaximalKind::Poisson => poisson_maximal(&entry.rep, apex, &q)?,
                    MaximalKind::Hl => hl_maximal(&entry.rep, apex, &q)?,
                    MaximalKind::Nontangential => match cfg.semigroup {
                        Semigroup::Ou => {
                            nontangential_maximal(&entry.rep, apex, cfg.cone, &q)?
                        }
                        Semigroup::Poisson => poisson_nontangential_maximal(&entry.rep, apex, &q)?,
                    },
                };
                rows.push(MaximalRow {
                    apex: apex.clone(),
                    estimate,
                });
            }
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&rows, &mut out)?,
                Format::Csv => {
                    let table: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| vec![format_point(&r.apex), r.estimate.value.to_string(), r.estimate.grid_size.to_string()])
                        .collect();
                    write_rows(&["apex", "value", "grid_size"], &table, &mut out)?
                }
            }
            out.flush()?;
        }
        Command::Converge { common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let records = run_convergence(&cfg)?;
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&records, &mut out)?,
                Format::Csv => write_convergence_csv(&records, &mut out)?,
            }
            out.flush()?;
        }
        Command::Contrast { common } => {
            let cfg = experiment_config(&common, ConeKind::ParabolicGaussian)?;
            let report = run_tangential_contrast(&cfg)?;
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&report, &mut out)?,
                Format::Csv => write_contrast_csv(&report, &cfg, &mut out)?,
            }
            out.flush()?;
        }
        Command::Dominate { common } => {
            let cfg = experiment_config(&common, ConeKind::TruncatedParabolic)?;
            let report = run_domination_report(&cfg)?;
            let mut out = sink(&cfg.out)?;
            match format_of(&common, Format::Csv)? {
                Format::Json => write_json(&report, &mut out)?,
                Format::Csv => write_domination_csv(&report, &mut out)?,
            }
            out.flush()?;
        }
        Command::Verify { level, common } => {
            let level: VerifyLevel = level.parse()?;
            let report = run_verify_suite(level);
            let mut out = sink(&common.out)?;
            writeln!(out, "{}", report.to_json())?;
            out.flush()?;
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
