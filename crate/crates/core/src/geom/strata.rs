use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::rank::{numerical_rank, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};

/// Catalog of regular level sets `{y : g(y) = 0}` in feature space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `y_index = value`
    Coordinate { dim: usize, index: usize, value: f64 },
    /// `A y = b` with `A` of full row rank.
    Affine { rows: Vec<Vec<f64>>, rhs: Vec<f64> },
    /// `|y − center| = radius`
    Sphere { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumSpec {
    pub name: String,
    pub constraint: Constraint,
}

impl StratumSpec {
    pub fn coordinate(name: impl Into<String>, dim: usize, index: usize, value: f64) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch(format!("coordinate {index} in dimension {dim}")));
        }
        Ok(Self { name: name.into(), constraint: Constraint::Coordinate { dim, index, value } })
    }

    pub fn affine(name: impl Into<String>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 || rows.iter().any(|r| r.len() != dim) || rhs.len() != rows.len() {
            return Err(Error::DimensionMismatch("affine stratum needs c rows of equal length and c offsets".into()));
        }
        let a = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        if numerical_rank(&a, DEFAULT_RANK_TOL).rank != rows.len() {
            return Err(Error::InvalidParameter("affine stratum rows must be linearly independent".into()));
        }
        Ok(Self { name: name.into(), constraint: Constraint::Affine { rows, rhs } })
    }

    pub fn sphere(name: impl Into<String>, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) {
            return Err(Error::InvalidParameter("sphere needs a center and positive radius".into()));
        }
        Ok(Self { name: name.into(), constraint: Constraint::Sphere { center, radius } })
    }

    /// Dimension of the ambient feature space.
    pub fn ambient_dim(&self) -> usize {
        match &self.constraint {
            Constraint::Coordinate { dim, .. } => *dim,
            Constraint::Affine { rows, .. } => rows[0].len(),
            Constraint::Sphere { center, .. } => center.len(),
        }
    }

    pub fn codim(&self) -> usize {
        match &self.constraint {
            Constraint::Affine { rows, .. } => rows.len(),
            _ => 1,
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() == self.ambient_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "stratum `{}` lives in dimension {}, point has {}",
                self.name,
                self.ambient_dim(),
                y.len()
            )))
        }
    }

    /// `g(y)`, one entry per constraint.
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        Ok(match &self.constraint {
            Constraint::Coordinate { index, value, .. } => vec![y[*index] - value],
            Constraint::Affine { rows, rhs } => rows
                .iter()
                .zip(rhs)
                .map(|(r, b)| r.iter().zip(y).map(|(a, v)| a * v).sum::<f64>() - b)
                .collect(),
            Constraint::Sphere { center, radius } => {
                let d: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                vec![d.sqrt() - radius]
            }
        })
    }

    /// Orthonormal rows spanning the normal space `N_y D` (rows of `Dg`).
    ///
    /// For points slightly off the level set this is the normal space of
    /// the nearest point, which for this catalog is the same expression.
    pub fn normal_basis_at(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(y)?;
        let n = y.len();
        let dg: DMatrix<f64> = match &self.constraint {
            Constraint::Coordinate { index, .. } => {
                let mut m = DMatrix::zeros(1, n);
                m[(0, *index)] = 1.0;
                m
            }
            Constraint::Affine { rows, .. } => DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]),
            Constraint::Sphere { center, .. } => {
                let d = DVector::from_iterator(n, y.iter().zip(center).map(|(a, c)| a - c));
                let norm = d.norm();
                if norm == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "normal of sphere `{}` undefined at its center",
                        self.name
                    )));
                }
                DMatrix::from_row_slice(1, n, (d / norm).as_slice())
            }
        };
        // Orthonormalize rows: Q of the QR of Dgᵀ.
        let c = dg.nrows();
        let q = dg.transpose().qr().q();
        Ok(q.columns(0, c).transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_stratum() {
        let s = StratumSpec::coordinate("w1=0", 3, 1, 0.0).unwrap();
        assert_eq!(s.codim(), 1);
        assert_eq!(s.residual(&[5.0, 0.25, 1.0]).unwrap(), vec![0.25]);
        let n = s.normal_basis_at(&[0.0, 0.0, 0.0]).unwrap();
        assert!((n[(0, 1)].abs() - 1.0).abs() < 1e-15);
        assert!(StratumSpec::coordinate("bad", 2, 2, 0.0).is_err());
        assert!(matches!(s.residual(&[1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn affine_normals_are_orthonormal() {
        let s = StratumSpec::affine("plane", vec![vec![1.0, 1.0, 0.0], vec![0.0, 2.0, 1.0]], vec![0.0, 1.0]).unwrap();
        assert_eq!(s.codim(), 2);
        let n = s.normal_basis_at(&[0.0, 0.0, 0.0]).unwrap();
        let gram = &n * n.transpose();
        assert!((gram - DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
        assert!(StratumSpec::affine("dependent", vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn sphere_normal_is_radial() {
        let s = StratumSpec::sphere("unit", vec![0.0, 0.0], 1.0).unwrap();
        assert!(s.residual(&[0.6, 0.8]).unwrap()[0].abs() < 1e-15);
        let n = s.normal_basis_at(&[0.6, 0.8]).unwrap();
        let dot = n[(0, 0)] * 0.6 + n[(0, 1)] * 0.8;
        assert!((dot.abs() - 1.0).abs() < 1e-14);
        assert!(s.normal_basis_at(&[0.0, 0.0]).is_err());
    }
}
