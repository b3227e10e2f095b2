//! Parametric models, the Gaussian kernel family, and the classical
//! quantities (moments, Fisher information) used as baselines.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_half_line, integrate_real_line, QuadratureConfig};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// A one-dimensional parametric distribution.
///
/// `SymmetricStable` is specified through its characteristic function only;
/// it has a closed-form density just at `alpha = 1` (Cauchy) and
/// `alpha = 2` (Gaussian with standard deviation `sigma·√2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Gaussian { mu: f64, sigma: f64 },
    Cauchy { mu: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// `(1 + a·sin(2π ln x))` times the standard log-normal density.
    StieltjesLogNormal { a: f64 },
    SymmetricStable { alpha: f64, mu: f64, sigma: f64 },
    TwoSampleGaussian { mu1: f64, mu2: f64, sigma1: f64, sigma2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    RealLine,
    PositiveHalfLine,
}

/// Parameter selector for score-based quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Location,
    Scale,
    /// The Stieltjes perturbation weight `a`.
    Weight,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * SQRT_2PI)
}

fn cauchy_pdf(x: f64, mu: f64, scale: f64) -> f64 {
    let z = x - mu;
    scale / (PI * (scale * scale + z * z))
}

fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (x * sigma * SQRT_2PI)
}

/// Raw moments `E[X^n]` of `N(mu, var)`; `m` may be complex, which is how the
/// Fourier transforms of `x^j φ(x)` are evaluated.
pub(crate) fn gaussian_raw_moment(n: u32, mean: Complex64, var: f64) -> Complex64 {
    // M_n = mean·M_{n-1} + (n-1)·var·M_{n-2}
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = mean;
    for k in 2..=n {
        let next = mean * cur + prev * ((k - 1) as f64 * var);
        prev = cur;
        cur = next;
    }
    cur
}

impl ModelSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::Gaussian { mu, sigma }.validated()
    }
    pub fn cauchy(mu: f64) -> Result<Self> {
        Self::Cauchy { mu }.validated()
    }
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::LogNormal { mu, sigma }.validated()
    }
    pub fn stieltjes(a: f64) -> Result<Self> {
        Self::StieltjesLogNormal { a }.validated()
    }
    pub fn stable(alpha: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::SymmetricStable { alpha, mu, sigma }.validated()
    }
    pub fn two_sample(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        Self::TwoSampleGaussian { mu1, mu2, sigma1, sigma2 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { mu, sigma } | Self::LogNormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
            Self::Cauchy { mu } => finite("mu", mu),
            Self::StieltjesLogNormal { a } => {
                if a.is_finite() && a.abs() <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("|a| must be at most 1, got {a}")))
                }
            }
            Self::SymmetricStable { alpha, mu, sigma } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2], got {alpha}")));
                }
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
            Self::TwoSampleGaussian { mu1, mu2, sigma1, sigma2 } => {
                finite("mu1", mu1)?;
                finite("mu2", mu2)?;
                positive("sigma1", sigma1)?;
                positive("sigma2", sigma2)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Cauchy { .. } => "cauchy",
            Self::LogNormal { .. } => "lognormal",
            Self::StieltjesLogNormal { .. } => "stieltjes",
            Self::SymmetricStable { .. } => "stable",
            Self::TwoSampleGaussian { .. } => "twosample",
        }
    }

    pub fn support(&self) -> Support {
        match self {
            Self::LogNormal { .. } | Self::StieltjesLogNormal { .. } => Support::PositiveHalfLine,
            _ => Support::RealLine,
        }
    }

    /// The two populations of a two-sample model.
    pub fn populations(&self) -> Option<[ModelSpec; 2]> {
        match *self {
            Self::TwoSampleGaussian { mu1, mu2, sigma1, sigma2 } => Some([
                Self::Gaussian { mu: mu1, sigma: sigma1 },
                Self::Gaussian { mu: mu2, sigma: sigma2 },
            ]),
            _ => None,
        }
    }

    pub fn has_density(&self) -> bool {
        match *self {
            Self::SymmetricStable { alpha, .. } => alpha == 1.0 || alpha == 2.0,
            Self::TwoSampleGaussian { .. } => false,
            _ => true,
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if self.support() == Support::PositiveHalfLine && !(x > 0.0) {
            return Err(Error::OutOfSupport { x });
        }
        Ok(match *self {
            Self::Gaussian { mu, sigma } => normal_pdf(x, mu, sigma),
            Self::Cauchy { mu } => cauchy_pdf(x, mu, 1.0),
            Self::LogNormal { mu, sigma } => lognormal_pdf(x, mu, sigma),
            Self::StieltjesLogNormal { a } => {
                (1.0 + a * (2.0 * PI * x.ln()).sin()) * lognormal_pdf(x, 0.0, 1.0)
            }
            Self::SymmetricStable { alpha, mu, sigma } => {
                if alpha == 2.0 {
                    normal_pdf(x, mu, sigma * std::f64::consts::SQRT_2)
                } else if alpha == 1.0 {
                    cauchy_pdf(x, mu, sigma)
                } else {
                    return Err(Error::NoDensity(self.to_string()));
                }
            }
            Self::TwoSampleGaussian { .. } => {
                return Err(Error::Unsupported(
                    "a two-sample model has one density per population".into(),
                ))
            }
        })
    }

    /// `E[e^{iuX}]`.
    pub fn char_fn(&self, u: f64) -> Result<Complex64> {
        let exponent = match *self {
            Self::Gaussian { mu, sigma } => Complex64::new(-0.5 * sigma * sigma * u * u, u * mu),
            Self::Cauchy { mu } => Complex64::new(-u.abs(), u * mu),
            Self::SymmetricStable { alpha, mu, sigma } => {
                Complex64::new(-(sigma * u).abs().powf(alpha), u * mu)
            }
            Self::LogNormal { .. } | Self::StieltjesLogNormal { .. } => {
                return Err(Error::Unsupported(format!(
                    "{} has no closed-form characteristic function; use the density path",
                    self.name()
                )))
            }
            Self::TwoSampleGaussian { .. } => {
                return Err(Error::Unsupported("characteristic function of a two-sample model".into()))
            }
        };
        Ok(exponent.exp())
    }

    /// `E[X^n]`, or [`Error::Undefined`] when the moment diverges.
    pub fn classical_moment(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        match *self {
            Self::Gaussian { mu, sigma } => {
                Ok(gaussian_raw_moment(n, Complex64::new(mu, 0.0), sigma * sigma).re)
            }
            Self::Cauchy { .. } => Err(Error::Undefined { order: n }),
            Self::LogNormal { mu, sigma } => {
                let nf = n as f64;
                Ok((nf * mu + 0.5 * nf * nf * sigma * sigma).exp())
            }
            // The perturbation integrates to zero against every power of x.
            Self::StieltjesLogNormal { .. } => {
                let nf = n as f64;
                Ok((0.5 * nf * nf).exp())
            }
            Self::SymmetricStable { alpha, mu, sigma } => {
                if alpha == 2.0 {
                    Ok(gaussian_raw_moment(n, Complex64::new(mu, 0.0), 2.0 * sigma * sigma).re)
                } else if n == 1 && alpha > 1.0 {
                    Ok(mu)
                } else {
                    Err(Error::Undefined { order: n })
                }
            }
            Self::TwoSampleGaussian { .. } => {
                Err(Error::Unsupported("moments of a two-sample model".into()))
            }
        }
    }

    /// `∂/∂θ log f(x)` for the selected parameter.
    pub fn score(&self, which: Parameter, x: f64) -> Result<f64> {
        let unsupported = || {
            Error::Unsupported(format!("parameter {which:?} for model {}", self.name()))
        };
        match (*self, which) {
            (Self::Gaussian { mu, sigma }, Parameter::Location) => Ok((x - mu) / (sigma * sigma)),
            (Self::Gaussian { mu, sigma }, Parameter::Scale) => {
                let z = (x - mu) / sigma;
                Ok((z * z - 1.0) / sigma)
            }
            (Self::Cauchy { mu }, Parameter::Location) => {
                let z = x - mu;
                Ok(2.0 * z / (1.0 + z * z))
            }
            (Self::LogNormal { mu, sigma }, Parameter::Location) => {
                Ok((x.ln() - mu) / (sigma * sigma))
            }
            (Self::LogNormal { mu, sigma }, Parameter::Scale) => {
                let z = (x.ln() - mu) / sigma;
                Ok((z * z - 1.0) / sigma)
            }
            (Self::StieltjesLogNormal { a }, Parameter::Weight) => {
                let s = (2.0 * PI * x.ln()).sin();
                Ok(s / (1.0 + a * s))
            }
            (Self::SymmetricStable { alpha: 2.0, mu, sigma }, _) => {
                // N(mu, 2σ²): chain rule through τ = σ√2
                let tau = sigma * std::f64::consts::SQRT_2;
                let twin = Self::Gaussian { mu, sigma: tau };
                match which {
                    Parameter::Location => twin.score(which, x),
                    Parameter::Scale => Ok(twin.score(which, x)? * std::f64::consts::SQRT_2),
                    Parameter::Weight => Err(unsupported()),
                }
            }
            (Self::SymmetricStable { alpha: 1.0, mu, sigma }, _) => {
                let z = x - mu;
                let d = sigma * sigma + z * z;
                match which {
                    Parameter::Location => Ok(2.0 * z / d),
                    Parameter::Scale => Ok(1.0 / sigma - 2.0 * sigma / d),
                    Parameter::Weight => Err(unsupported()),
                }
            }
            (Self::SymmetricStable { .. }, _) => Err(Error::NoDensity(self.to_string())),
            _ => Err(unsupported()),
        }
    }

    /// `∫ (∂ log f/∂θ)² f dx` by quadrature over the model's support.
    pub fn classical_fisher_info(&self, which: Parameter, cfg: &QuadratureConfig) -> Result<f64> {
        if !self.has_density() {
            return match self {
                Self::TwoSampleGaussian { .. } => {
                    Err(Error::Unsupported("Fisher information of a two-sample model".into()))
                }
                _ => Err(Error::NoDensity(self.to_string())),
            };
        }
        if let Self::StieltjesLogNormal { a } = *self {
            if a.abs() >= 1.0 {
                return Err(Error::InvalidParameter(
                    "Fisher information in a diverges at |a| = 1".into(),
                ));
            }
        }
        self.score(which, 1.0)?;
        let integrand = |x: f64| {
            let f = self.density(x).unwrap_or(0.0);
            if f == 0.0 {
                return 0.0;
            }
            let s = self.score(which, x).unwrap_or(0.0);
            s * s * f
        };
        let r = match self.support() {
            Support::RealLine => integrate_real_line(integrand, cfg)?,
            Support::PositiveHalfLine => integrate_half_line(integrand, cfg)?,
        };
        Ok(r.require_converged()?.value)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Gaussian { mu, sigma } => write!(f, "gaussian:mu={mu},sigma={sigma}"),
            Self::Cauchy { mu } => write!(f, "cauchy:mu={mu}"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal:mu={mu},sigma={sigma}"),
            Self::StieltjesLogNormal { a } => write!(f, "stieltjes:a={a}"),
            Self::SymmetricStable { alpha, mu, sigma } => {
                write!(f, "stable:alpha={alpha},mu={mu},sigma={sigma}")
            }
            Self::TwoSampleGaussian { mu1, mu2, sigma1, sigma2 } => write!(
                f,
                "twosample:mu1={mu1},mu2={mu2},sigma1={sigma1},sigma2={sigma2}"
            ),
        }
    }
}

/// Parses `key=value,key=value` into pairs, checking keys against `allowed`.
pub(crate) fn parse_pairs<'a>(body: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::Parse(format!(
                "unknown key `{k}` (expected one of {})",
                allowed.join(", ")
            )));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::Parse(format!("duplicate key `{k}`")));
        }
        out.push((k, v.trim()));
    }
    Ok(out)
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{key}` expects a number, got `{v}`")))
}

fn lookup(pairs: &[(&str, &str)], key: &str, default: f64) -> Result<f64> {
    pairs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(k, v)| parse_f64(k, v))
        .unwrap_or(Ok(default))
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `name:key=value,...`; omitted keys take standard defaults
    /// (locations 0, scales 1, `a = 0`, `alpha = 2`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let m = match name.trim() {
            "gaussian" | "normal" => {
                let p = parse_pairs(body, &["mu", "sigma"])?;
                Self::Gaussian { mu: lookup(&p, "mu", 0.0)?, sigma: lookup(&p, "sigma", 1.0)? }
            }
            "cauchy" => {
                let p = parse_pairs(body, &["mu"])?;
                Self::Cauchy { mu: lookup(&p, "mu", 0.0)? }
            }
            "lognormal" => {
                let p = parse_pairs(body, &["mu", "sigma"])?;
                Self::LogNormal { mu: lookup(&p, "mu", 0.0)?, sigma: lookup(&p, "sigma", 1.0)? }
            }
            "stieltjes" => {
                let p = parse_pairs(body, &["a"])?;
                Self::StieltjesLogNormal { a: lookup(&p, "a", 0.0)? }
            }
            "stable" => {
                let p = parse_pairs(body, &["alpha", "mu", "sigma"])?;
                Self::SymmetricStable {
                    alpha: lookup(&p, "alpha", 2.0)?,
                    mu: lookup(&p, "mu", 0.0)?,
                    sigma: lookup(&p, "sigma", 1.0)?,
                }
            }
            "twosample" => {
                let p = parse_pairs(body, &["mu1", "mu2", "sigma1", "sigma2"])?;
                Self::TwoSampleGaussian {
                    mu1: lookup(&p, "mu1", 0.0)?,
                    mu2: lookup(&p, "mu2", 0.0)?,
                    sigma1: lookup(&p, "sigma1", 1.0)?,
                    sigma2: lookup(&p, "sigma2", 1.0)?,
                }
            }
            other => return Err(Error::Parse(format!("unknown model `{other}`"))),
        };
        m.validated()
    }
}

/// Which parametric family a [`ModelFamily`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    /// θ = (μ, σ)
    Gaussian,
    /// θ = (μ)
    Cauchy,
    /// θ = (μ, σ)
    LogNormal,
    /// θ = (a)
    Stieltjes,
    /// θ = (μ, σ) at fixed α
    Stable { alpha: f64 },
    /// θ = (μ₁, μ₂, σ₁, σ₂)
    TwoSampleGaussian,
}

/// A parametric family `θ ↦ ModelSpec` with the box used for probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFamily {
    pub kind: FamilyKind,
    /// Closed bounds per parameter; the constructor is total on the box.
    pub bounds: Vec<(f64, f64)>,
}

impl ModelFamily {
    pub fn new(kind: FamilyKind) -> Self {
        let loc = (-5.0, 5.0);
        let scale = (0.05, 10.0);
        let bounds = match kind {
            FamilyKind::Gaussian | FamilyKind::Stable { .. } => vec![loc, scale],
            FamilyKind::Cauchy => vec![loc],
            FamilyKind::LogNormal => vec![(-2.0, 2.0), (0.05, 3.0)],
            FamilyKind::Stieltjes => vec![(-1.0, 1.0)],
            FamilyKind::TwoSampleGaussian => vec![loc, loc, scale, scale],
        };
        Self { kind, bounds }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "family has {} parameters, got {} bounds",
                self.dim(),
                bounds.len()
            )));
        }
        if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::InvalidParameter("box bounds must satisfy lo <= hi".into()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn gaussian() -> Self {
        Self::new(FamilyKind::Gaussian)
    }
    pub fn cauchy() -> Self {
        Self::new(FamilyKind::Cauchy)
    }
    pub fn lognormal() -> Self {
        Self::new(FamilyKind::LogNormal)
    }
    pub fn stieltjes() -> Self {
        Self::new(FamilyKind::Stieltjes)
    }
    pub fn stable(alpha: f64) -> Self {
        Self::new(FamilyKind::Stable { alpha })
    }
    pub fn two_sample() -> Self {
        Self::new(FamilyKind::TwoSampleGaussian)
    }

    pub fn dim(&self) -> usize {
        self.param_names().len()
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self.kind {
            FamilyKind::Gaussian | FamilyKind::LogNormal | FamilyKind::Stable { .. } => &["mu", "sigma"],
            FamilyKind::Cauchy => &["mu"],
            FamilyKind::Stieltjes => &["a"],
            FamilyKind::TwoSampleGaussian => &["mu1", "mu2", "sigma1", "sigma2"],
        }
    }

    pub fn support(&self) -> Support {
        match self.kind {
            FamilyKind::LogNormal | FamilyKind::Stieltjes => Support::PositiveHalfLine,
            _ => Support::RealLine,
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta.iter().zip(&self.bounds).all(|(t, (lo, hi))| *lo <= *t && *t <= *hi)
    }

    /// Builds the model at θ, which must lie in the box.
    pub fn build(&self, theta: &[f64]) -> Result<ModelSpec> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "family expects {} parameters, got {}",
                self.dim(),
                theta.len()
            )));
        }
        if !self.contains(theta) {
            return Err(Error::InvalidParameter(format!(
                "θ = {theta:?} lies outside the family box {:?}",
                self.bounds
            )));
        }
        self.build_unchecked(theta)
    }

    pub(crate) fn build_unchecked(&self, t: &[f64]) -> Result<ModelSpec> {
        match self.kind {
            FamilyKind::Gaussian => ModelSpec::gaussian(t[0], t[1]),
            FamilyKind::Cauchy => ModelSpec::cauchy(t[0]),
            FamilyKind::LogNormal => ModelSpec::lognormal(t[0], t[1]),
            FamilyKind::Stieltjes => ModelSpec::stieltjes(t[0]),
            FamilyKind::Stable { alpha } => ModelSpec::stable(alpha, t[0], t[1]),
            FamilyKind::TwoSampleGaussian => ModelSpec::two_sample(t[0], t[1], t[2], t[3]),
        }
    }

    /// The family a model belongs to and its parameter vector there.
    pub fn of_model(m: &ModelSpec) -> (Self, Vec<f64>) {
        match *m {
            ModelSpec::Gaussian { mu, sigma } => (Self::gaussian(), vec![mu, sigma]),
            ModelSpec::Cauchy { mu } => (Self::cauchy(), vec![mu]),
            ModelSpec::LogNormal { mu, sigma } => (Self::lognormal(), vec![mu, sigma]),
            ModelSpec::StieltjesLogNormal { a } => (Self::stieltjes(), vec![a]),
            ModelSpec::SymmetricStable { alpha, mu, sigma } => (Self::stable(alpha), vec![mu, sigma]),
            ModelSpec::TwoSampleGaussian { mu1, mu2, sigma1, sigma2 } => {
                (Self::two_sample(), vec![mu1, mu2, sigma1, sigma2])
            }
        }
    }
}

/// Constant in front of the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelNormalization {
    /// `(2πs²)^{-1/2}`: the kernel is a probability density.
    #[default]
    Probability,
    /// Peak value 1: `φ(x) = exp(-(x-c)²/(2s²))`.
    UnitPeak,
}

impl fmt::Display for KernelNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Probability => "probability",
            Self::UnitPeak => "unit-peak",
        })
    }
}

impl FromStr for KernelNormalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probability" => Ok(Self::Probability),
            "unit-peak" => Ok(Self::UnitPeak),
            other => Err(Error::Parse(format!(
                "unknown kernel form `{other}` (expected probability or unit-peak)"
            ))),
        }
    }
}

/// Gaussian kernel `φ(x) ∝ exp(-(x-c)²/(2s²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub scale: f64,
    pub center: f64,
    #[serde(default)]
    pub normalization: KernelNormalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub d_scale: Option<f64>,
    pub d_center: Option<f64>,
}

impl KernelSpec {
    pub fn new(scale: f64, center: f64) -> Result<Self> {
        Self { scale, center, normalization: KernelNormalization::Probability }.validated()
    }

    pub fn unit_peak(scale: f64, center: f64) -> Result<Self> {
        Self { scale, center, normalization: KernelNormalization::UnitPeak }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        positive("kernel scale s", self.scale)?;
        finite("kernel center c", self.center)?;
        Ok(self)
    }

    /// `φ(c)`.
    pub fn peak(&self) -> f64 {
        match self.normalization {
            KernelNormalization::Probability => 1.0 / (SQRT_2PI * self.scale),
            KernelNormalization::UnitPeak => 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.scale;
        self.peak() * (-0.5 * z * z).exp()
    }

    /// `ln φ(x)`, finite wherever `x` is, including where `φ(x)` underflows.
    pub fn ln_value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.scale;
        self.peak().ln() - 0.5 * z * z
    }

    /// `φ(x)` and, when `derivs` is set, `∂φ/∂s` and `∂φ/∂c`.
    pub fn eval(&self, x: f64, derivs: bool) -> KernelEval {
        let value = self.value(x);
        if !derivs {
            return KernelEval { value, d_scale: None, d_center: None };
        }
        let s = self.scale;
        let d = x - self.center;
        let d_scale = match self.normalization {
            KernelNormalization::Probability => value * (d * d / (s * s * s) - 1.0 / s),
            KernelNormalization::UnitPeak => value * d * d / (s * s * s),
        };
        KernelEval {
            value,
            d_scale: Some(d_scale),
            d_center: Some(value * d / (s * s)),
        }
    }

    /// `Ψ_j(u) = ∫ x^j φ(x) e^{-iux} dx`.
    ///
    /// Completing the square gives `Ψ_0(u)·E[(m + sZ)^j]` with the complex
    /// shift `m = c - i s² u`.
    pub fn moment_transform(&self, j: u32, u: f64) -> Complex64 {
        let s2 = self.scale * self.scale;
        let mass = self.peak() * SQRT_2PI * self.scale;
        let psi0 = Complex64::new(-0.5 * s2 * u * u, -u * self.center).exp() * mass;
        psi0 * gaussian_raw_moment(j, Complex64::new(self.center, -s2 * u), s2)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={},c={},form={}", self.scale, self.center, self.normalization)
    }
}

impl FromStr for KernelSpec {
    type Err = Error;
    /// `s=1,c=0,form=probability`; `c` defaults to 0 and `form` to probability.
    fn from_str(s: &str) -> Result<Self> {
        let p = parse_pairs(s, &["s", "c", "form"])?;
        let scale = p
            .iter()
            .find(|(k, _)| *k == "s")
            .map(|(k, v)| parse_f64(k, v))
            .ok_or_else(|| Error::Parse("kernel needs `s=<scale>`".into()))??;
        let normalization = match p.iter().find(|(k, _)| *k == "form") {
            Some((_, v)) => v.parse()?,
            None => KernelNormalization::Probability,
        };
        Self { scale, center: lookup(&p, "c", 0.0)?, normalization }.validated()
    }
}

/// The kernel family `λ ↦ φ_λ` with λ = (s) or λ = (s, c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    pub normalization: KernelNormalization,
    pub free_center: bool,
    /// Center used when it is not a free parameter.
    pub fixed_center: f64,
    pub bounds: Vec<(f64, f64)>,
}

impl KernelFamily {
    pub fn scale_only(normalization: KernelNormalization) -> Self {
        Self {
            normalization,
            free_center: false,
            fixed_center: 0.0,
            bounds: vec![(1e-3, 1e6)],
        }
    }

    pub fn scale_and_center(normalization: KernelNormalization) -> Self {
        Self {
            normalization,
            free_center: true,
            fixed_center: 0.0,
            bounds: vec![(1e-3, 1e6), (-50.0, 50.0)],
        }
    }

    pub fn dim(&self) -> usize {
        if self.free_center {
            2
        } else {
            1
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        if self.free_center {
            &["s", "c"]
        } else {
            &["s"]
        }
    }

    pub fn contains(&self, lambda: &[f64]) -> bool {
        lambda.len() == self.dim()
            && lambda.iter().zip(&self.bounds).all(|(l, (lo, hi))| *lo <= *l && *l <= *hi)
    }

    pub fn build(&self, lambda: &[f64]) -> Result<KernelSpec> {
        if lambda.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "kernel family expects {} parameters, got {}",
                self.dim(),
                lambda.len()
            )));
        }
        if !self.contains(lambda) {
            return Err(Error::InvalidParameter(format!(
                "λ = {lambda:?} lies outside the kernel box {:?}",
                self.bounds
            )));
        }
        let center = if self.free_center { lambda[1] } else { self.fixed_center };
        KernelSpec { scale: lambda[0], center, normalization: self.normalization }.validated()
    }

    /// The λ vector that reproduces `k` in this family.
    pub fn params_of(&self, k: &KernelSpec) -> Vec<f64> {
        if self.free_center {
            vec![k.scale, k.center]
        } else {
            vec![k.scale]
        }
    }
}
