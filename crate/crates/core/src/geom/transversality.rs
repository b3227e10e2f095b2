use nalgebra::DMatrix;
use serde::Serialize;

use super::jacobian::JacobianReport;
use super::rank::{numerical_rank, rank_against, DEFAULT_RANK_TOL};
use super::strata::StratumSpec;
use crate::error::{Error, Result};
use crate::feature::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransversalityConfig {
    pub rank_rel_tol: f64,
    /// `|g(y)|` at or below this counts as lying on the stratum.
    pub intersection_tol: f64,
}

impl Default for TransversalityConfig {
    fn default() -> Self {
        Self { rank_rel_tol: DEFAULT_RANK_TOL, intersection_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Transversal,
    NonTransversal,
    /// The point is off the stratum, so the condition holds vacuously.
    NoIntersection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumVerdict {
    pub stratum: String,
    pub codim: usize,
    pub verdict: Verdict,
    /// `|g(y)|`
    pub residual: f64,
    /// Rank of the normal projection `[π_N D_θF | π_N D_λF]`, when computed.
    pub projected_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub submersive: bool,
    pub model_rank: usize,
    pub joint_rank: usize,
    /// `joint_rank − model_rank`: directions the kernel adds.
    pub enrichment: usize,
    pub verdicts: Vec<StratumVerdict>,
    /// The feature point `y = F(θ, λ)` the verdicts refer to.
    pub point: Vec<f64>,
}

/// Rank-based transversality verdicts at `y = F(θ, λ)`.
///
/// A surjective joint Jacobian makes every stratum transversal. Otherwise a
/// stratum through `y` is transversal iff the normal projections of the
/// model and kernel columns together span its normal space.
pub fn transversality_check(
    jac: &JacobianReport,
    strata: &[StratumSpec],
    y: &FeatureVector,
    cfg: &TransversalityConfig,
) -> Result<TransversalityReport> {
    let n = jac.n_features();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "Jacobian has {n} rows, feature vector has {}",
            y.len()
        )));
    }
    if let Some(s) = strata.iter().find(|s| s.ambient_dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "stratum `{}` lives in dimension {}, features have {n}",
            s.name,
            s.ambient_dim()
        )));
    }
    let joint = jac.joint();
    let model_rank = numerical_rank(&jac.d_theta, cfg.rank_rel_tol).rank;
    let joint_report = numerical_rank(&joint, cfg.rank_rel_tol);
    let joint_rank = joint_report.rank;
    let joint_scale = joint_report.singular_values.first().copied().unwrap_or(0.0);
    let submersive = joint_rank == n;

    let mut verdicts = Vec::with_capacity(strata.len());
    for s in strata {
        let residual = s.residual(&y.values)?.iter().map(|r| r * r).sum::<f64>().sqrt();
        let (verdict, projected_rank) = if submersive {
            (Verdict::Transversal, None)
        } else if residual > cfg.intersection_tol {
            (Verdict::NoIntersection, None)
        } else {
            let normals: DMatrix<f64> = s.normal_basis_at(&y.values)?;
            let projected = &normals * &joint;
            // rounding in the normal basis must not count as rank
            let r = rank_against(&projected, cfg.rank_rel_tol, joint_scale);
            let v = if r == s.codim() { Verdict::Transversal } else { Verdict::NonTransversal };
            (v, Some(r))
        };
        verdicts.push(StratumVerdict {
            stratum: s.name.clone(),
            codim: s.codim(),
            verdict,
            residual,
            projected_rank,
        });
    }
    Ok(TransversalityReport {
        submersive,
        model_rank,
        joint_rank,
        enrichment: joint_rank.saturating_sub(model_rank),
        verdicts,
        point: y.values.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector { values, entries: vec![] }
    }

    #[test]
    fn kernel_alone_can_make_it_submersive() {
        let j = JacobianReport::from_blocks(DMatrix::zeros(2, 1), DMatrix::identity(2, 2), fv(vec![0.0, 0.0])).unwrap();
        let strata = [StratumSpec::coordinate("y0", 2, 0, 0.0).unwrap()];
        let r = transversality_check(&j, &strata, &j.values, &TransversalityConfig::default()).unwrap();
        assert!(r.submersive);
        assert_eq!(r.model_rank, 0);
        assert_eq!(r.enrichment, 2);
        assert_eq!(r.verdicts[0].verdict, Verdict::Transversal);
    }

    #[test]
    fn component_criterion_when_not_submersive() {
        // rank-1 Jacobian in R², image along e0
        let dt = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let dl = DMatrix::from_row_slice(2, 1, &[2.0, 0.0]);
        let j = JacobianReport::from_blocks(dt, dl, fv(vec![0.0, 0.0])).unwrap();
        let strata = [
            StratumSpec::coordinate("y0=0", 2, 0, 0.0).unwrap(),
            StratumSpec::coordinate("y1=0", 2, 1, 0.0).unwrap(),
            StratumSpec::coordinate("y1=3", 2, 1, 3.0).unwrap(),
        ];
        let r = transversality_check(&j, &strata, &j.values, &TransversalityConfig::default()).unwrap();
        assert!(!r.submersive);
        assert_eq!(r.enrichment, 0);
        assert_eq!(r.verdicts[0].verdict, Verdict::Transversal);
        assert_eq!(r.verdicts[1].verdict, Verdict::NonTransversal);
        assert_eq!(r.verdicts[2].verdict, Verdict::NoIntersection);
    }

    #[test]
    fn dimension_mismatch() {
        let j = JacobianReport::from_blocks(DMatrix::zeros(2, 1), DMatrix::zeros(2, 1), fv(vec![0.0, 0.0])).unwrap();
        let bad = [StratumSpec::coordinate("y", 3, 0, 0.0).unwrap()];
        assert!(matches!(
            transversality_check(&j, &bad, &j.values, &TransversalityConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(transversality_check(&j, &[], &fv(vec![1.0]), &TransversalityConfig::default()).is_err());
    }
}
