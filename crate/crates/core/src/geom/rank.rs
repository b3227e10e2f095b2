use nalgebra::DMatrix;
use serde::Serialize;

use super::serialize_rows;

/// Relative singular-value threshold used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tol_used: f64,
}

/// Numerical rank: the number of singular values above
/// `rel_tol · σ_max · max(rows, cols)`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> RankReport {
    let mut singular_values = singular_values(m);
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tol_used = rel_tol * sigma_max * m.nrows().max(m.ncols()) as f64;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        singular_values.iter().filter(|&&s| s > tol_used).count()
    };
    RankReport { singular_values, rank, tol_used }
}

/// Rank of `m` with the threshold scaled by `reference` (a singular value
/// of some parent matrix) instead of by `m`'s own largest singular value.
pub(crate) fn rank_against(m: &DMatrix<f64>, rel_tol: f64, reference: f64) -> usize {
    let tol = rel_tol * reference * m.nrows().max(m.ncols()) as f64;
    singular_values(m).iter().filter(|&&s| s > tol && s > 0.0).count()
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().map(|s| s.abs()).collect()
}

/// `G = (DΦ)ᵀ DΦ`, the first fundamental form of the feature-map immersion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTensor {
    #[serde(serialize_with = "serialize_rows")]
    pub g: DMatrix<f64>,
    pub det: f64,
    /// `σ_max² / σ_min²` of the model Jacobian; infinite when singular.
    pub condition_number: f64,
    /// `det(G_ab / √(G_aa G_bb))`.
    pub correlation_det: f64,
}

impl MetricTensor {
    pub fn from_model_jacobian(d_theta: &DMatrix<f64>) -> Self {
        let g = d_theta.tr_mul(d_theta);
        let p = d_theta.ncols();
        let mut sv = singular_values(d_theta);
        sv.sort_by(|a, b| b.total_cmp(a));
        // fewer features than parameters: G is rank deficient
        let det = if sv.len() < p || p == 0 {
            0.0
        } else {
            sv.iter().map(|s| s * s).product()
        };
        let condition_number = match (sv.first(), sv.get(p.saturating_sub(1))) {
            (Some(&hi), Some(&lo)) if sv.len() >= p && lo > 0.0 => (hi / lo).powi(2),
            _ => f64::INFINITY,
        };
        let diag: f64 = (0..p).map(|a| g[(a, a)]).product();
        let correlation_det = if diag > 0.0 { det / diag } else { 0.0 };
        Self { g, det, condition_number, correlation_det }
    }

    /// Smallest eigenvalue of `G`.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.g.is_empty() {
            return 0.0;
        }
        self.g.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.g.nrows();
        (0..n).all(|a| (0..n).all(|b| (self.g[(a, b)] - self.g[(b, a)]).abs() <= tol))
    }

    /// Eigenvalues no lower than `-1e-10 · trace`.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-10 * self.g.trace().abs()
    }
}

pub fn metric_tensor(j: &super::JacobianReport) -> MetricTensor {
    MetricTensor::from_model_jacobian(&j.d_theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_basics() {
        assert_eq!(numerical_rank(&DMatrix::identity(3, 3), DEFAULT_RANK_TOL).rank, 3);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 4), DEFAULT_RANK_TOL).rank, 0);
        let u = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let v = DMatrix::from_column_slice(4, 1, &[0.3, 1.0, 2.0, -1.0]);
        let r = numerical_rank(&(&u * v.transpose()), DEFAULT_RANK_TOL);
        assert_eq!(r.rank, 1);
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(numerical_rank(&DMatrix::zeros(0, 2), DEFAULT_RANK_TOL).rank, 0);
    }

    #[test]
    fn metric_identity_and_rank_one() {
        let id = MetricTensor::from_model_jacobian(&DMatrix::identity(2, 2));
        assert_eq!(id.g, DMatrix::identity(2, 2));
        assert!((id.det - 1.0).abs() < 1e-15);
        assert!((id.condition_number - 1.0).abs() < 1e-12);
        let rep = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -0.5, -0.5]);
        let m = MetricTensor::from_model_jacobian(&rep);
        assert!(m.det.abs() < 1e-12);
        assert!(m.is_psd());
        // more parameters than features
        let wide = MetricTensor::from_model_jacobian(&DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
        assert_eq!(wide.det, 0.0);
        assert!(wide.condition_number.is_infinite());
    }
}
