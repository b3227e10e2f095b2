//! Weak moments `w_j = E[X^j φ(X)]`, the feature map built from them, the
//! weak characteristic function, weak cumulants of the kernel-tilted law and
//! influence bounds.
//!
//! Two routes compute a weak moment. The density route integrates
//! `x^j φ(x) f(x)` over the model's support. The characteristic-function
//! route uses Parseval with the forward transform `Ψ(u) = ∫ψ(x)e^{-iux}dx`:
//! for a real test function `ψ`,
//!
//! ```text
//! ∫ ψ f dx = (1/2π) ∫ χ(u) Ψ(u) du,      χ(u) = E[e^{iuX}],
//! ```
//!
//! and `Ψ_j` of `x^j φ(x)` has a closed form for the Gaussian kernel, so
//! models known only through `χ` still get weak moments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KernelSpec, ModelFamily, ModelSpec, Support};
use crate::quad::{gauss_hermite, integrate_half_line, integrate_real_line, IntegralResult, QuadratureConfig, QuadValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentPath {
    Density,
    CharFn,
    /// Density when the model has one, characteristic function otherwise.
    #[default]
    Auto,
}

impl fmt::Display for MomentPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Density => "density",
            Self::CharFn => "charfn",
            Self::Auto => "auto",
        })
    }
}

impl FromStr for MomentPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Self::Density),
            "charfn" => Ok(Self::CharFn),
            "auto" => Ok(Self::Auto),
            other => Err(Error::Parse(format!(
                "unknown path `{other}` (expected density, charfn or auto)"
            ))),
        }
    }
}

/// Which weak moments make up the feature vector, and how to compute them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    orders: Vec<u32>,
    pub path: MomentPath,
    pub quadrature: QuadratureConfig,
}

impl FeatureMapSpec {
    /// Orders must be non-empty and strictly increasing.
    pub fn new(orders: Vec<u32>, path: MomentPath, quadrature: QuadratureConfig) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidParameter("at least one moment order is required".into()));
        }
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "moment orders must be strictly increasing, got {orders:?}"
            )));
        }
        quadrature.validate()?;
        Ok(Self { orders, path, quadrature })
    }

    /// Orders `0, 1, …, k`.
    pub fn consecutive(k: u32) -> Self {
        Self {
            orders: (0..=k).collect(),
            path: MomentPath::Auto,
            quadrature: QuadratureConfig::oscillatory(),
        }
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// `K` where the orders are `j_0 < … < j_K`.
    pub fn k(&self) -> u32 {
        self.orders.len() as u32 - 1
    }

    pub fn with_path(mut self, path: MomentPath) -> Self {
        self.path = path;
        self
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureConfig) -> Self {
        self.quadrature = quadrature;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakMoment {
    pub value: f64,
    pub error_estimate: f64,
    /// Route actually taken (never `Auto`).
    pub path: MomentPath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureEntry {
    pub order: u32,
    /// Population index for two-sample models.
    pub population: Option<usize>,
    pub path: MomentPath,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub entries: Vec<FeatureEntry>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakCumulants {
    /// `κ_1, …, κ_J` of the tilted law `fφ / w_0`.
    pub kappa: Vec<f64>,
    pub w0: f64,
}

/// `x^j φ(x) f(x)`, with zero wherever the kernel or density vanishes so
/// that huge `x^j` never meets an underflowed factor.
fn density_integrand(m: &ModelSpec, k: &KernelSpec, j: u32, x: f64) -> f64 {
    let phi = k.value(x);
    if phi == 0.0 {
        return 0.0;
    }
    let f = match m.density(x) {
        Ok(f) => f,
        Err(_) => return f64::NAN,
    };
    if f == 0.0 {
        return 0.0;
    }
    x.powi(j as i32) * phi * f
}

fn integrate_on<T, F>(support: Support, f: F, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let r = match support {
        Support::RealLine => integrate_real_line(f, cfg)?,
        Support::PositiveHalfLine => integrate_half_line(f, cfg)?,
    };
    r.require_converged()
}

fn check_pairable(m: &ModelSpec) -> Result<()> {
    if m.populations().is_some() {
        return Err(Error::Unsupported(
            "weak moments of a two-sample model are taken per population".into(),
        ));
    }
    Ok(())
}

fn weak_moment_density(m: &ModelSpec, k: &KernelSpec, j: u32, cfg: &QuadratureConfig) -> Result<WeakMoment> {
    if !m.has_density() {
        return Err(Error::NoDensity(m.to_string()));
    }
    let r = integrate_on(m.support(), |x| density_integrand(m, k, j, x), cfg)?;
    Ok(WeakMoment {
        value: r.value,
        error_estimate: r.error_estimate,
        path: MomentPath::Density,
    })
}

fn weak_moment_charfn(m: &ModelSpec, k: &KernelSpec, j: u32, cfg: &QuadratureConfig) -> Result<WeakMoment> {
    // Fails with Unsupported for models without a closed-form χ.
    m.char_fn(0.0)?;
    let integrand = |u: f64| {
        let psi = k.moment_transform(j, u);
        if psi == Complex64::new(0.0, 0.0) {
            return 0.0;
        }
        match m.char_fn(u) {
            Ok(chi) => (chi * psi).re / (2.0 * PI),
            Err(_) => f64::NAN,
        }
    };
    let r = integrate_real_line(integrand, cfg)?.require_converged()?;
    Ok(WeakMoment {
        value: r.value,
        error_estimate: r.error_estimate,
        path: MomentPath::CharFn,
    })
}

/// `w_j = ⟨T_θ, x^j φ⟩` along the route selected by `path`.
pub fn weak_moment_with(
    m: &ModelSpec,
    k: &KernelSpec,
    j: u32,
    path: MomentPath,
    cfg: &QuadratureConfig,
) -> Result<WeakMoment> {
    check_pairable(m)?;
    match path {
        MomentPath::Density => weak_moment_density(m, k, j, cfg),
        MomentPath::CharFn => weak_moment_charfn(m, k, j, cfg),
        MomentPath::Auto => {
            if m.has_density() {
                weak_moment_density(m, k, j, cfg)
            } else {
                weak_moment_charfn(m, k, j, cfg)
            }
        }
    }
}

pub fn weak_moment(m: &ModelSpec, k: &KernelSpec, j: u32, spec: &FeatureMapSpec) -> Result<WeakMoment> {
    weak_moment_with(m, k, j, spec.path, &spec.quadrature)
}

/// Density-route weak moment with an `n`-node Gauss–Hermite rule centred on
/// the kernel. Only for real-line models.
pub fn weak_moment_gauss_hermite(m: &ModelSpec, k: &KernelSpec, j: u32, n: usize) -> Result<f64> {
    check_pairable(m)?;
    if !m.has_density() {
        return Err(Error::NoDensity(m.to_string()));
    }
    if m.support() != Support::RealLine {
        return Err(Error::Unsupported("Gauss–Hermite weak moments need a real-line model".into()));
    }
    // x = c + √2·s·t turns φ(x)dx into peak·√2·s·e^{-t²}dt
    let scale = std::f64::consts::SQRT_2 * k.scale;
    let g = |x: f64| x.powi(j as i32) * m.density(x).unwrap_or(f64::NAN);
    Ok(k.peak() * scale * gauss_hermite(g, n, k.center, scale)?)
}

/// Evaluates `Φ(θ) = (w_{j_0}, …, w_{j_K})`. For a two-sample family the
/// per-population vectors are concatenated.
pub fn feature_map(fam: &ModelFamily, theta: &[f64], k: &KernelSpec, spec: &FeatureMapSpec) -> Result<FeatureVector> {
    let model = fam.build(theta)?;
    feature_vector(&model, k, spec)
}

/// [`feature_map`] for an already-built model.
pub fn feature_vector(model: &ModelSpec, k: &KernelSpec, spec: &FeatureMapSpec) -> Result<FeatureVector> {
    let populations: Vec<(Option<usize>, ModelSpec)> = match model.populations() {
        Some(pops) => pops.into_iter().enumerate().map(|(i, p)| (Some(i), p)).collect(),
        None => vec![(None, *model)],
    };
    let mut values = Vec::with_capacity(populations.len() * spec.orders.len());
    let mut entries = Vec::with_capacity(values.capacity());
    for (population, m) in &populations {
        for &j in &spec.orders {
            let w = weak_moment(m, k, j, spec).map_err(|e| e.at_order(j))?;
            values.push(w.value);
            entries.push(FeatureEntry {
                order: j,
                population: *population,
                path: w.path,
                error_estimate: w.error_estimate,
            });
        }
    }
    Ok(FeatureVector { values, entries })
}

/// `E[e^{iuX} φ(X)]` by complex quadrature of the density.
pub fn weak_char_fn(m: &ModelSpec, k: &KernelSpec, u: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    check_pairable(m)?;
    if !m.has_density() {
        return Err(Error::NoDensity(m.to_string()));
    }
    // Same real integrand as the order-0 weak moment, rotated by e^{iux}.
    let r = integrate_on(
        m.support(),
        |x| Complex64::from_polar(density_integrand(m, k, 0, x), u * x),
        cfg,
    )?;
    Ok(r.value)
}

/// Cumulants from raw moments `m_1, …, m_J` (`m_0 = 1`) by the recursion
/// `κ_n = m_n − Σ_{i=1}^{n−1} C(n−1, i−1) κ_i m_{n−i}`.
pub fn moments_to_cumulants(raw: &[f64]) -> Vec<f64> {
    let mut m = Vec::with_capacity(raw.len() + 1);
    m.push(1.0);
    m.extend_from_slice(raw);
    let mut kappa = vec![0.0; raw.len() + 1];
    for n in 1..=raw.len() {
        let mut acc = m[n];
        let mut binom = 1.0; // C(n-1, i-1)
        for i in 1..n {
            acc -= binom * kappa[i] * m[n - i];
            binom = binom * (n - i) as f64 / i as f64;
        }
        kappa[n] = acc;
    }
    kappa.remove(0);
    kappa
}

/// Cumulants `κ_1..κ_J` (J ≤ 6) of the tilted law `p_φ = fφ / w_0`.
///
/// Moments are taken about the tilted mean so the higher cumulants do not
/// suffer cancellation when the mean is large.
pub fn weak_cumulants(m: &ModelSpec, k: &KernelSpec, max_order: u32, cfg: &QuadratureConfig) -> Result<WeakCumulants> {
    if !(1..=6).contains(&max_order) {
        return Err(Error::InvalidParameter(format!(
            "weak cumulants are available for orders 1..=6, got {max_order}"
        )));
    }
    check_pairable(m)?;
    if !m.has_density() {
        return Err(Error::NoDensity(m.to_string()));
    }
    let w0 = weak_moment_density(m, k, 0, cfg)?.value;
    if !(w0 > 0.0) {
        return Err(Error::InvalidParameter(format!("tilted law needs w_0 > 0, got {w0}")));
    }
    let mean = weak_moment_density(m, k, 1, cfg)?.value / w0;
    let mut central = vec![0.0; max_order as usize];
    for r in 2..=max_order {
        let v = integrate_on(
            m.support(),
            |x| {
                let base = density_integrand(m, k, 0, x);
                if base == 0.0 {
                    0.0
                } else {
                    (x - mean).powi(r as i32) * base
                }
            },
            cfg,
        )
        .map_err(|e| e.at_order(r))?
        .value;
        central[r as usize - 1] = v / w0;
    }
    let mut kappa = moments_to_cumulants(&central);
    kappa[0] = mean;
    Ok(WeakCumulants { kappa, w0 })
}

/// Influence of a point mass at `x` on the linear functional `w_j`:
/// `x^j φ(x) − w_j`.
pub fn influence_value(k: &KernelSpec, j: u32, x: f64, w_j: f64) -> f64 {
    x.powi(j as i32) * k.value(x) - w_j
}

/// `sup_x |x^j φ(x)|`.
///
/// The stationary points solve `x² − c·x − j·s² = 0`; with `c = 0` they are
/// `±s√j`. The bound depends on the kernel alone.
pub fn influence_bound(k: &KernelSpec, j: u32) -> f64 {
    if j == 0 {
        return k.peak();
    }
    let (s, c) = (k.scale, k.center);
    let jf = j as f64;
    let disc = (c * c + 4.0 * jf * s * s).sqrt();
    [(c + disc) / 2.0, (c - disc) / 2.0]
        .into_iter()
        .map(|x| (x.powi(j as i32) * k.value(x)).abs())
        .fold(0.0, f64::max)
}

/// Grid-search supremum of `|x^j φ(x)|` over `[lo, hi]` with spacing `step`.
pub fn influence_bound_grid(k: &KernelSpec, j: u32, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| {
            let x = lo + i as f64 * step;
            (x.powi(j as i32) * k.value(x)).abs()
        })
        .fold(0.0, f64::max)
}
