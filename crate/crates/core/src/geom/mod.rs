//! Differential diagnostics of the joint feature map `F(θ, λ) = Φ_λ(θ)`:
//! Jacobians, the metric tensor, numerical rank, transversality verdicts,
//! codimension thresholds and a numerical injectivity probe.

mod jacobian;
mod probe;
mod rank;
mod strata;
mod thresholds;
mod transversality;

pub use jacobian::{jacobian, JacobianReport};
pub use probe::{injectivity_probe, CollisionCandidate, ProbeConfig};
pub use rank::{metric_tensor, numerical_rank, MetricTensor, RankReport, DEFAULT_RANK_TOL};
pub use strata::{Constraint, StratumSpec};
pub use thresholds::{codimension_thresholds, ThresholdReport};
pub use transversality::{transversality_check, StratumVerdict, TransversalityConfig, TransversalityReport, Verdict};

use nalgebra::DMatrix;
use serde::ser::{SerializeSeq, Serializer};

/// Serializes a matrix as a list of rows.
pub(crate) fn serialize_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}
