use std::ffi::OsString;

use serde::Serialize;
use wml_core::expt::{catalog, grid_points, run_experiment, sweep_kernel, Check, GridAxis, Overrides, SweepTable};
use wml_core::feature::{FeatureMapSpec, FeatureVector};
use wml_core::geom::{
    jacobian, metric_tensor, numerical_rank, transversality_check, JacobianReport, MetricTensor, RankReport,
    StratumSpec, TransversalityConfig, TransversalityReport, DEFAULT_RANK_TOL,
};
use wml_core::model::{KernelFamily, ModelFamily};
use wml_core::quad::QuadratureConfig;

use crate::config::{self, CommandKind, OutputFormat, ParseFailure, RunConfig, StratumText};
use crate::output::{csv_string, emit, flatten, format_float, to_json};

/// Why a command did not succeed, and the exit code that goes with it.
enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// The computation ran and failed: exit 1.
    Failed(String),
}

impl From<wml_core::Error> for Failure {
    fn from(e: wml_core::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Failed(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Failed(format!("cannot write output: {e}"))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("WML_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("WML_THREADS must be a non-negative integer, got `{text}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Failed(e.to_string()))?;
    }
    Ok(())
}

fn list(cfg: &RunConfig) -> Result<(), Failure> {
    #[derive(Serialize)]
    struct Entry {
        name: &'static str,
        summary: &'static str,
    }
    let entries: Vec<Entry> = catalog().iter().map(|e| Entry { name: e.name, summary: e.summary }).collect();
    let doc = match cfg.format {
        OutputFormat::Json => to_json(&entries)?,
        OutputFormat::Csv => csv_string(
            &["name".into(), "summary".into()],
            &entries.iter().map(|e| vec![e.name.to_string(), e.summary.to_string()]).collect::<Vec<_>>(),
        )?,
    };
    Ok(emit(&doc, cfg.out.as_deref())?)
}

fn threshold_of(check: &Check) -> f64 {
    match *check {
        Check::Below { limit } | Check::Above { limit } => limit,
        Check::Within { target, .. } | Check::Equals { target } => target,
    }
}

fn check_kind(check: &Check) -> &'static str {
    match check {
        Check::Below { .. } => "below",
        Check::Above { .. } => "above",
        Check::Within { .. } => "within",
        Check::Equals { .. } => "equals",
    }
}

fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let name = cfg.experiment.as_deref().unwrap_or_default();
    let overrides = Overrides { quadrature: cfg.quadrature_override(), seed: cfg.seed };
    let result = run_experiment(name, &overrides)?;
    let doc = match cfg.format {
        OutputFormat::Json => to_json(&result)?,
        OutputFormat::Csv if cfg.table => {
            let table = result
                .table
                .as_ref()
                .ok_or_else(|| Failure::Usage(format!("experiment `{name}` has no table; drop --table")))?;
            let rows: Vec<Vec<String>> =
                table.rows.iter().map(|r| r.iter().map(|&x| format_float(x)).collect()).collect();
            csv_string(&table.columns, &rows)?
        }
        OutputFormat::Csv => {
            let header: Vec<String> = ["experiment", "metric", "value", "check", "threshold", "tolerance_used", "pass"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = result
                .metrics
                .iter()
                .map(|m| {
                    vec![
                        result.name.clone(),
                        m.name.clone(),
                        format_float(m.value),
                        check_kind(&m.check).to_string(),
                        format_float(threshold_of(&m.check)),
                        format_float(m.tolerance_used),
                        m.pass.to_string(),
                    ]
                })
                .collect();
            csv_string(&header, &rows)?
        }
    };
    emit(&doc, cfg.out.as_deref())?;
    if let Some(d) = &result.diagnostic {
        return Err(Failure::Failed(format!("experiment `{name}` aborted: {d}")));
    }
    match result.first_failure() {
        Some(m) => Err(Failure::Failed(format!(
            "experiment `{name}` failed: metric `{}` = {} (required {})",
            m.name,
            format_float(m.value),
            m.check
        ))),
        None => Ok(()),
    }
}

/// Model family with its box widened to contain `points`.
fn family_for(cfg: &RunConfig, points: &[Vec<f64>]) -> Result<ModelFamily, Failure> {
    let model = cfg.model.as_ref().ok_or_else(|| Failure::Usage("--model is required".into()))?;
    let (fam, _) = ModelFamily::of_model(model);
    let bounds = fam
        .bounds
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            points.iter().fold((lo, hi), |(lo, hi), p| (lo.min(p[i]), hi.max(p[i])))
        })
        .collect();
    Ok(fam.with_bounds(bounds)?)
}

fn kernel_family(cfg: &RunConfig) -> KernelFamily {
    let mut kfam = if cfg.free_center {
        KernelFamily::scale_and_center(cfg.kernel_form)
    } else {
        KernelFamily::scale_only(cfg.kernel_form)
    };
    kfam.fixed_center = cfg.c.lo;
    kfam
}

fn feature_spec(cfg: &RunConfig) -> Result<FeatureMapSpec, Failure> {
    Ok(FeatureMapSpec::new(cfg.orders.clone(), cfg.path, cfg.quadrature(QuadratureConfig::differencing()))?)
}

fn strata(cfg: &RunConfig, dim: usize) -> Result<Vec<StratumSpec>, Failure> {
    cfg.strata
        .iter()
        .map(|text| {
            let parsed: StratumText = text.parse().map_err(|e: config::UsageError| Failure::Usage(e.to_string()))?;
            let spec = match parsed {
                StratumText::Coordinate { index, value } => StratumSpec::coordinate(text.clone(), dim, index, value),
                StratumText::Sphere { radius } => StratumSpec::sphere(text.clone(), vec![0.0; dim], radius),
            };
            spec.map_err(|e| Failure::Usage(format!("invalid value for --stratum: {e}")))
        })
        .collect()
}

#[derive(Serialize)]
struct EvalReport {
    model: String,
    kernel: String,
    theta: Vec<f64>,
    lambda: Vec<f64>,
    features: FeatureVector,
    jacobian: JacobianReport,
    metric_tensor: MetricTensor,
    model_rank: RankReport,
    joint_rank: RankReport,
    transversality: TransversalityReport,
}

fn eval(cfg: &RunConfig) -> Result<(), Failure> {
    let model = cfg.model.ok_or_else(|| Failure::Usage("--model is required".into()))?;
    let (_, theta) = ModelFamily::of_model(&model);
    let fam = family_for(cfg, std::slice::from_ref(&theta))?;
    let kfam = kernel_family(cfg);
    let lambda = if cfg.free_center { vec![cfg.s.lo, cfg.c.lo] } else { vec![cfg.s.lo] };
    let kernel = kfam.build(&lambda)?;
    let spec = feature_spec(cfg)?;
    let jac = jacobian(&fam, &kfam, &theta, &lambda, &spec)?;
    let strata = strata(cfg, jac.n_features())?;
    let transversality = transversality_check(&jac, &strata, &jac.values, &TransversalityConfig::default())?;
    let report = EvalReport {
        model: model.to_string(),
        kernel: kernel.to_string(),
        features: jac.values.clone(),
        metric_tensor: metric_tensor(&jac),
        model_rank: numerical_rank(&jac.d_theta, DEFAULT_RANK_TOL),
        joint_rank: numerical_rank(&jac.joint(), DEFAULT_RANK_TOL),
        transversality,
        jacobian: jac,
        theta,
        lambda,
    };
    let doc = match cfg.format {
        OutputFormat::Json => to_json(&report)?,
        OutputFormat::Csv => {
            let v = serde_json::to_value(&report).map_err(|e| Failure::Failed(e.to_string()))?;
            let rows: Vec<Vec<String>> = flatten(&v).into_iter().map(|(k, v)| vec![k, v]).collect();
            csv_string(&["key".into(), "value".into()], &rows)?
        }
    };
    Ok(emit(&doc, cfg.out.as_deref())?)
}

fn sweep_csv(table: &SweepTable) -> std::io::Result<String> {
    let mut header: Vec<String> = table.lambda_names.iter().chain(&table.theta_names).cloned().collect();
    header.extend(
        ["det_g", "condition_number", "correlation_det", "model_rank", "joint_rank", "enrichment"]
            .iter()
            .map(|s| s.to_string()),
    );
    header.extend(table.strata.iter().map(|s| format!("verdict[{s}]")));
    header.push("error".into());
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.lambda.iter().chain(&r.theta).map(|&x| format_float(x)).collect();
            row.extend([r.det_g, r.condition_number, r.correlation_det].map(format_float));
            row.extend([r.model_rank, r.joint_rank, r.enrichment].map(|n| n.to_string()));
            for i in 0..table.strata.len() {
                row.push(match r.verdicts.get(i) {
                    Some(v) => serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    None => String::new(),
                });
            }
            row.push(r.error.clone().unwrap_or_default());
            row
        })
        .collect();
    csv_string(&header, &rows)
}

fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let model = cfg.model.ok_or_else(|| Failure::Usage("--model is required".into()))?;
    let (base, theta0) = ModelFamily::of_model(&model);
    let names = base.param_names();
    if let Some((unknown, _)) = cfg.grids.iter().find(|(n, _)| !names.contains(&n.as_str())) {
        return Err(Failure::Usage(format!(
            "invalid value for --grid: `{unknown}` is not a parameter of {} (expected one of {names:?})",
            model.name()
        )));
    }
    let axes: Vec<GridAxis> = names
        .iter()
        .zip(&theta0)
        .map(|(n, &t)| cfg.grids.iter().rev().find(|(g, _)| g == n).map_or(GridAxis::point(t), |(_, a)| *a))
        .collect();
    let thetas = grid_points(&axes);
    let fam = family_for(cfg, &thetas)?;
    let kfam = kernel_family(cfg);
    let lambdas = if cfg.free_center { grid_points(&[cfg.s, cfg.c]) } else { grid_points(&[cfg.s]) };
    let spec = feature_spec(cfg)?;
    let n_features = cfg.orders.len() * model.populations().map_or(1, |p| p.len());
    let strata = strata(cfg, n_features)?;
    let table = sweep_kernel(&fam, &kfam, &spec, &lambdas, &thetas, &strata, &TransversalityConfig::default())?;
    let doc = match cfg.format {
        OutputFormat::Json => to_json(&table)?,
        OutputFormat::Csv => sweep_csv(&table)?,
    };
    emit(&doc, cfg.out.as_deref())?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    match table.rows.iter().find_map(|r| r.error.as_ref().map(|e| (r, e))) {
        Some((r, e)) => Err(Failure::Failed(format!(
            "{failed} of {} sweep rows failed; first at λ = {:?}, θ = {:?}: {e}",
            table.rows.len(),
            r.lambda,
            r.theta
        ))),
        None => Ok(()),
    }
}

fn execute(cfg: &RunConfig) -> Result<(), Failure> {
    configure_threads()?;
    match cfg.command {
        CommandKind::List => list(cfg),
        CommandKind::Run => run(cfg),
        CommandKind::Eval => eval(cfg),
        CommandKind::Sweep => sweep(cfg),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 failed computation, 2 usage error.
pub fn run_cli<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::parse_from(argv) {
        Ok(cfg) => cfg,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            // help and version are successful exits
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(ParseFailure::Usage(e)) => {
            eprintln!("error: {e}");
            eprintln!("run `wml --help` for usage");
            return 2;
        }
    };
    match execute(&cfg) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
