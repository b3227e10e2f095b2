use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feature::FeatureMapSpec;
use crate::geom::{
    jacobian, metric_tensor, numerical_rank, transversality_check, StratumSpec, TransversalityConfig, Verdict,
};
use crate::model::{KernelFamily, ModelFamily};

/// One grid axis: `lo:hi:n` (linear) or `loglo:hi:n` (geometric).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub log: bool,
}

impl GridAxis {
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self { lo, hi, n, log: false }.validated()
    }

    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self { lo, hi, n, log: true }.validated()
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x, n: 1, log: false }
    }

    fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::EmptyGrid("grid axis has n = 0".into()));
        }
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidParameter("grid bounds must be finite".into()));
        }
        if self.log && !(self.lo > 0.0 && self.hi > 0.0) {
            return Err(Error::InvalidParameter("geometric grid needs positive bounds".into()));
        }
        Ok(self)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i == 0 {
                    return self.lo;
                }
                if i == self.n - 1 {
                    return self.hi;
                }
                let t = i as f64 / last;
                if self.log {
                    (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 && self.lo == self.hi && !self.log {
            return write!(f, "{}", self.lo);
        }
        let prefix = if self.log { "log" } else { "" };
        write!(f, "{prefix}{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl FromStr for GridAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (log, body) = match s.strip_prefix("log") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let bad = || Error::Parse(format!("grid `{s}` is not `lo:hi:n`, `loglo:hi:n` or a single number"));
        let parts: Vec<&str> = body.split(':').collect();
        match parts.as_slice() {
            [x] if !log => Ok(Self::point(x.trim().parse().map_err(|_| bad())?)),
            [lo, hi, n] => {
                let lo = lo.trim().parse().map_err(|_| bad())?;
                let hi = hi.trim().parse().map_err(|_| bad())?;
                let n = n.trim().parse().map_err(|_| bad())?;
                Self { lo, hi, n, log }.validated()
            }
            _ => Err(bad()),
        }
    }
}

/// Cartesian product of the axes, last axis varying fastest.
pub fn grid_points(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub det_g: f64,
    pub condition_number: f64,
    pub correlation_det: f64,
    pub model_rank: usize,
    pub joint_rank: usize,
    pub enrichment: usize,
    pub verdicts: Vec<Verdict>,
    /// Error text when this row could not be evaluated; numeric fields are
    /// then NaN or zero.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub lambda_names: Vec<String>,
    pub theta_names: Vec<String>,
    pub strata: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates metric, rank and transversality diagnostics at every
/// `(λ, θ)` pair, λ outermost. Rows are computed in parallel and returned
/// in grid order. A failing row carries its error instead of aborting the
/// sweep.
pub fn sweep_kernel(
    fam: &ModelFamily,
    kfam: &KernelFamily,
    spec: &FeatureMapSpec,
    lambdas: &[Vec<f64>],
    thetas: &[Vec<f64>],
    strata: &[StratumSpec],
    cfg: &TransversalityConfig,
) -> Result<SweepTable> {
    if lambdas.is_empty() {
        return Err(Error::EmptyGrid("kernel (λ) grid is empty".into()));
    }
    if thetas.is_empty() {
        return Err(Error::EmptyGrid("parameter (θ) grid is empty".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !kfam.contains(l)) {
        return Err(Error::InvalidParameter(format!("λ = {l:?} outside the kernel box {:?}", kfam.bounds)));
    }
    if let Some(t) = thetas.iter().find(|t| !fam.contains(t)) {
        return Err(Error::InvalidParameter(format!("θ = {t:?} outside the family box {:?}", fam.bounds)));
    }
    let pairs: Vec<(&Vec<f64>, &Vec<f64>)> =
        lambdas.iter().flat_map(|l| thetas.iter().map(move |t| (l, t))).collect();
    let rows = pairs
        .into_par_iter()
        .map(|(lambda, theta)| match sweep_row(fam, kfam, spec, lambda, theta, strata, cfg) {
            Ok(row) => row,
            Err(e) => SweepRow {
                lambda: lambda.clone(),
                theta: theta.clone(),
                det_g: f64::NAN,
                condition_number: f64::NAN,
                correlation_det: f64::NAN,
                model_rank: 0,
                joint_rank: 0,
                enrichment: 0,
                verdicts: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepTable {
        lambda_names: kfam.param_names().iter().map(|s| s.to_string()).collect(),
        theta_names: fam.param_names().iter().map(|s| s.to_string()).collect(),
        strata: strata.iter().map(|s| s.name.clone()).collect(),
        rows,
    })
}

fn sweep_row(
    fam: &ModelFamily,
    kfam: &KernelFamily,
    spec: &FeatureMapSpec,
    lambda: &[f64],
    theta: &[f64],
    strata: &[StratumSpec],
    cfg: &TransversalityConfig,
) -> Result<SweepRow> {
    let jac = jacobian(fam, kfam, theta, lambda, spec)?;
    let g = metric_tensor(&jac);
    let report = transversality_check(&jac, strata, &jac.values, cfg)?;
    Ok(SweepRow {
        lambda: lambda.to_vec(),
        theta: theta.to_vec(),
        det_g: g.det,
        condition_number: g.condition_number,
        correlation_det: g.correlation_det,
        model_rank: numerical_rank(&jac.d_theta, cfg.rank_rel_tol).rank,
        joint_rank: report.joint_rank,
        enrichment: report.enrichment,
        verdicts: report.verdicts.iter().map(|v| v.verdict).collect(),
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::KernelNormalization;

    #[test]
    fn grid_parsing() {
        let g: GridAxis = "1:100:12".parse().unwrap();
        assert_eq!(g.values().len(), 12);
        assert_eq!(g.values()[0], 1.0);
        assert_eq!(g.values()[11], 100.0);
        let l: GridAxis = "log1:100:3".parse().unwrap();
        let v = l.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!("2.5".parse::<GridAxis>().unwrap().values(), vec![2.5]);
        assert!("1:2".parse::<GridAxis>().is_err());
        assert!(matches!("1:2:0".parse::<GridAxis>(), Err(Error::EmptyGrid(_))));
        assert!("log0:2:3".parse::<GridAxis>().is_err());
        for text in ["1:100:12", "log1:100:12", "0.5"] {
            let g: GridAxis = text.parse().unwrap();
            assert_eq!(g.to_string().parse::<GridAxis>().unwrap(), g);
        }
    }

    #[test]
    fn product_order() {
        let axes = [GridAxis::linear(0.0, 1.0, 2).unwrap(), GridAxis::linear(5.0, 6.0, 2).unwrap()];
        assert_eq!(
            grid_points(&axes),
            vec![vec![0.0, 5.0], vec![0.0, 6.0], vec![1.0, 5.0], vec![1.0, 6.0]]
        );
        assert_eq!(grid_points(&[]), vec![Vec::<f64>::new()]);
    }

    #[test]
    fn empty_grids() {
        let fam = ModelFamily::gaussian();
        let kfam = KernelFamily::scale_only(KernelNormalization::Probability);
        let spec = FeatureMapSpec::consecutive(2);
        let cfg = TransversalityConfig::default();
        assert!(matches!(
            sweep_kernel(&fam, &kfam, &spec, &[], &[vec![0.0, 1.0]], &[], &cfg),
            Err(Error::EmptyGrid(_))
        ));
        assert!(matches!(
            sweep_kernel(&fam, &kfam, &spec, &[vec![1.0]], &[], &[], &cfg),
            Err(Error::EmptyGrid(_))
        ));
    }

    #[test]
    fn cauchy_joint_rank_is_one() {
        let fam = ModelFamily::cauchy();
        let kfam = KernelFamily::scale_only(KernelNormalization::UnitPeak);
        let spec = FeatureMapSpec::consecutive(0);
        let lambdas = grid_points(&[GridAxis::linear(0.5, 3.0, 3).unwrap()]);
        let thetas = grid_points(&[GridAxis::linear(-1.0, 1.0, 3).unwrap()]);
        let t = sweep_kernel(&fam, &kfam, &spec, &lambdas, &thetas, &[], &TransversalityConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert!(t.rows.iter().all(|r| r.joint_rank == 1 && r.error.is_none()));
        assert_eq!(t.rows[1].lambda, vec![0.5]);
        assert_eq!(t.rows[1].theta, vec![0.0]);
    }
}
