//! Weak moments of parametric models under Gaussian kernels, the feature
//! maps they define, and rank-based transversality diagnostics for those
//! maps.
//!
//! Modules, bottom-up:
//!
//! - [`quad`]: adaptive Gauss–Kronrod on the real line and half-line,
//!   Gauss–Hermite rules.
//! - [`model`]: model catalog, kernel family, classical moments and Fisher
//!   information.
//! - [`feature`]: weak moments (density and characteristic-function
//!   routes), feature maps, weak characteristic function and cumulants,
//!   influence bounds.
//! - [`geom`]: Jacobians, metric tensor, numerical rank, transversality,
//!   codimension thresholds, injectivity probe.
//! - [`expt`]: the self-checking experiment catalog and kernel sweeps.

// `!(x > 0.0)` rejects NaN as well; node tables keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod error;
pub mod expt;
pub mod feature;
pub mod geom;
pub mod model;
pub mod quad;

pub use error::{Error, Result};
