use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::serialize_rows;
use crate::error::{Error, Result};
use crate::feature::{feature_map, FeatureMapSpec, FeatureVector};
use crate::model::{KernelFamily, ModelFamily};

/// `DF = (D_θF, D_λF)` at one `(θ, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    /// `(K+1) × p`
    #[serde(serialize_with = "serialize_rows")]
    pub d_theta: DMatrix<f64>,
    /// `(K+1) × q`
    #[serde(serialize_with = "serialize_rows")]
    pub d_lambda: DMatrix<f64>,
    /// Coarse step per column, θ columns first.
    pub step_sizes: Vec<f64>,
    /// `|extrapolated − coarse|` per entry, `(K+1) × (p+q)`.
    #[serde(serialize_with = "serialize_rows")]
    pub error_estimates: DMatrix<f64>,
    /// `F(θ, λ)` at the evaluation point.
    pub values: FeatureVector,
}

impl JacobianReport {
    /// Assembles a report from given blocks (no differentiation).
    pub fn from_blocks(d_theta: DMatrix<f64>, d_lambda: DMatrix<f64>, values: FeatureVector) -> Result<Self> {
        if d_theta.nrows() != d_lambda.nrows() || d_theta.nrows() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "blocks have {} and {} rows for {} features",
                d_theta.nrows(),
                d_lambda.nrows(),
                values.len()
            )));
        }
        let cols = d_theta.ncols() + d_lambda.ncols();
        Ok(Self {
            error_estimates: DMatrix::zeros(d_theta.nrows(), cols),
            step_sizes: vec![0.0; cols],
            d_theta,
            d_lambda,
            values,
        })
    }

    /// `[D_θF | D_λF]`
    pub fn joint(&self) -> DMatrix<f64> {
        let rows = self.d_theta.nrows();
        let (p, q) = (self.d_theta.ncols(), self.d_lambda.ncols());
        let mut m = DMatrix::zeros(rows, p + q);
        m.columns_mut(0, p).copy_from(&self.d_theta);
        m.columns_mut(p, q).copy_from(&self.d_lambda);
        m
    }

    pub fn n_features(&self) -> usize {
        self.d_theta.nrows()
    }
}

/// Finite-difference Jacobian of the joint feature map.
///
/// Each column uses central differences at `h = ε^{1/3}·max(1, |x|)` and
/// `h/2`, combined by one Richardson step. Quadrature tolerances should be
/// 1e-10 relative or tighter, otherwise the difference quotients are noise.
pub fn jacobian(
    fam: &ModelFamily,
    kfam: &KernelFamily,
    theta: &[f64],
    lambda: &[f64],
    spec: &FeatureMapSpec,
) -> Result<JacobianReport> {
    let kernel = kfam.build(lambda)?;
    let values = feature_map(fam, theta, &kernel, spec)?;
    let (p, q) = (fam.dim(), kfam.dim());
    let rows = values.len();

    let eval = |point: &[f64]| -> Result<Vec<f64>> {
        let (t, l) = point.split_at(p);
        Ok(feature_map(fam, t, &kfam.build(l)?, spec)?.values)
    };
    let mut x0 = theta.to_vec();
    x0.extend_from_slice(lambda);
    let bounds: Vec<(f64, f64)> = fam.bounds.iter().chain(&kfam.bounds).copied().collect();

    let columns: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..p + q)
        .into_par_iter()
        .map(|a| {
            let h = f64::EPSILON.cbrt() * x0[a].abs().max(1.0);
            let (lo, hi) = bounds[a];
            if x0[a] - h < lo || x0[a] + h > hi {
                return Err(Error::StepUnderflow { index: a, value: x0[a], step: h });
            }
            let shifted = |delta: f64| {
                let mut x = x0.clone();
                x[a] += delta;
                eval(&x)
            };
            let (fp, fm) = (shifted(h)?, shifted(-h)?);
            let (hp, hm) = (shifted(0.5 * h)?, shifted(-0.5 * h)?);
            let mut col = Vec::with_capacity(rows);
            let mut err = Vec::with_capacity(rows);
            for r in 0..rows {
                let coarse = (fp[r] - fm[r]) / (2.0 * h);
                let fine = (hp[r] - hm[r]) / h;
                let extrapolated = (4.0 * fine - coarse) / 3.0;
                col.push(extrapolated);
                err.push((extrapolated - coarse).abs());
            }
            Ok((col, err, h))
        })
        .collect::<Result<_>>()?;

    let mut d_theta = DMatrix::zeros(rows, p);
    let mut d_lambda = DMatrix::zeros(rows, q);
    let mut error_estimates = DMatrix::zeros(rows, p + q);
    let mut step_sizes = Vec::with_capacity(p + q);
    for (a, (col, err, h)) in columns.into_iter().enumerate() {
        for r in 0..rows {
            if a < p {
                d_theta[(r, a)] = col[r];
            } else {
                d_lambda[(r, a - p)] = col[r];
            }
            error_estimates[(r, a)] = err[r];
        }
        step_sizes.push(h);
    }
    Ok(JacobianReport { d_theta, d_lambda, step_sizes, error_estimates, values })
}
