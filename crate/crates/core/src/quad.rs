//! Adaptive Gauss–Kronrod integration over the real line and the positive
//! half-line, plus a Gauss–Hermite rule for Gaussian-weighted integrands.
//!
//! The real line is mapped onto (-1, 1) with `x = t / (1 - t^2)` and the
//! transformed integrand is integrated by interval bisection, always refining
//! the segment with the largest error estimate. The half-line is reduced to
//! the real line with `x = e^y`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets shared by every quadrature call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Node count for fixed-node rules (Gauss–Hermite).
    pub node_count: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            node_count: 200,
        }
    }
}

impl QuadratureConfig {
    /// Defaults with the larger subdivision budget used for oscillatory
    /// integrands (`sin(2π ln x)` factors, `e^{iux}` pairings).
    pub fn oscillatory() -> Self {
        Self {
            max_subdivisions: 8000,
            ..Self::default()
        }
    }

    /// Tight settings for integrals that feed finite differences: the
    /// difference quotients amplify quadrature noise by `1/h`.
    pub fn differencing() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Self::oscillatory()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_subdivisions >= 1
            && self.node_count >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "quadrature config requires positive tolerances and budgets, got {self:?}"
            )))
        }
    }

    fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T> IntegralResult<T> {
    /// Turns a budget-exhausted result into [`Error::NonConvergence`].
    pub fn require_converged(self) -> Result<Self>
    where
        T: QuadValue,
    {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                value: self.value.modulus(),
                error_estimate: self.error_estimate,
            })
        }
    }
}

/// Scalar types the adaptive rule can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// Gauss–Kronrod 10/21 point pair (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Ties broken by position so the refinement order is deterministic.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One Gauss–Kronrod panel in the variable `t`. `g` returns the transformed
/// integrand together with the original abscissa for diagnostics.
fn kronrod21<T, G>(g: &G, a: f64, b: f64) -> Result<Segment<T>>
where
    T: QuadValue,
    G: Fn(f64) -> (T, f64),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<T> {
        let (v, x) = g(t);
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { x })
        }
    };

    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];
    let f_center = eval(center)?;
    let mut res_g = T::default();
    let mut res_k = f_center * WGK[10];
    let mut res_abs = WGK[10] * f_center.modulus();

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g = res_g + (f1 + f2) * WG[j];
        res_k = res_k + (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.modulus() + f2.modulus());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k = res_k + (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.modulus() + f2.modulus());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).modulus();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }

    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).modulus();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error: err,
    })
}

/// Adaptive bisection of `g` over `[a, b]`.
fn adaptive<T, G>(g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: QuadValue,
    G: Fn(f64) -> (T, f64),
{
    cfg.validate()?;
    let first = kronrod21(&g, a, b)?;
    let mut evaluations = 21;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // Segments too narrow to bisect in floating point.
    let mut frozen: Vec<Segment<T>> = Vec::new();
    let mut subdivisions = 0;

    while total_err > cfg.tolerance_for(total.modulus()) && subdivisions < cfg.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs().max(1e-300) {
            frozen.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = kronrod21(&g, worst.a, mid)?;
        let right = kronrod21(&g, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum left to right so the result does not depend on refinement drift.
    let mut segments: Vec<Segment<T>> = heap.into_vec();
    segments.extend(frozen);
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = T::default();
    let mut error_estimate = 0.0;
    for s in &segments {
        value = value + s.value;
        error_estimate += s.error;
    }
    let converged = error_estimate <= cfg.tolerance_for(value.modulus());
    Ok(IntegralResult {
        value,
        error_estimate,
        evaluations,
        converged,
    })
}

/// Integrates over `[a, b]` directly (finite interval, no transform).
pub fn integrate_interval<T, F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(|x| (f(x), x), a, b, cfg)
}

/// Integrates `f` over the whole real line.
///
/// `f` must be absolutely integrable. A budget overrun is reported through
/// `converged = false`, not as an error.
pub fn integrate_real_line<T, F>(f: F, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    adaptive(
        |t| {
            let d = 1.0 - t * t;
            let x = t / d;
            let jac = (1.0 + t * t) / (d * d);
            (f(x) * jac, x)
        },
        -1.0,
        1.0,
        cfg,
    )
}

/// Integrates `f` over `(0, ∞)` through `x = e^y`.
///
/// Nodes whose image underflows to 0 or overflows to ∞ contribute nothing;
/// `f` is never evaluated there.
pub fn integrate_half_line<T, F>(f: F, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_real_line(
        |y| {
            let x = y.exp();
            if x == 0.0 || !x.is_finite() {
                T::default()
            } else {
                f(x) * x
            }
        },
        cfg,
    )
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for the weight
/// `e^{-x^2}`, nodes in descending order.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Gauss–Hermite rule needs n >= 1".into()));
        }
        // π^{-1/4}
        const PIM4: f64 = 0.751_125_544_464_942_5;
        // Starting nodes from the eigenvalues of the Jacobi matrix, then
        // Newton-polished on the orthonormal recurrence, which also yields
        // the weights.
        let jacobi = DMatrix::from_fn(n, n, |r, c| {
            if r.abs_diff(c) == 1 {
                (r.max(c) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes = jacobi.symmetric_eigenvalues().as_slice().to_vec();
        nodes.sort_by(|a, b| b.total_cmp(a));
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for (z, w) in nodes.iter_mut().zip(weights.iter_mut()) {
            let mut pp = 0.0;
            for _ in 0..4 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = *z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let step = p1 / pp;
                *z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            *w = 2.0 / (pp * pp);
        }
        // exact symmetry
        for i in 0..n / 2 {
            let (z, w) = (0.5 * (nodes[i] - nodes[n - 1 - i]), 0.5 * (weights[i] + weights[n - 1 - i]));
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, center: f64, scale: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let at = center + scale * x;
            let v = f(at);
            if !v.is_finite() {
                return Err(Error::NonFiniteEvaluation { x: at });
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// `Σ w_i f(center + scale·x_i)` for the `n`-point Hermite rule; this is
/// `∫ e^{-x^2} f(center + scale·x) dx`, exact for polynomials of degree ≤ 2n-1.
pub fn gauss_hermite<F: Fn(f64) -> f64>(f: F, n: usize, center: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    GaussHermiteRule::new(n)?.apply(f, center, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn std_normal(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    fn lognormal(x: f64) -> f64 {
        let l = x.ln();
        (-0.5 * l * l).exp() / (x * (2.0 * PI).sqrt())
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate_real_line(|x: f64| (-x * x).exp(), &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normal_density_normalizes() {
        let r = integrate_real_line(std_normal, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let r = integrate_real_line(|x: f64| x * (-x * x).exp(), &cfg()).unwrap();
        assert!(r.converged);
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn heavy_tail_cauchy() {
        let r = integrate_real_line(|x: f64| 1.0 / (PI * (1.0 + x * x)), &cfg()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_on_half_line() {
        let r = integrate_half_line(|x: f64| (-x).exp(), &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lognormal_normalizes() {
        let r = integrate_half_line(lognormal, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_second_moment_perturbation_vanishes() {
        let f = |x: f64| match lognormal(x) {
            0.0 => 0.0,
            d => x * x * (2.0 * PI * x.ln()).sin() * d,
        };
        let c = QuadratureConfig::oscillatory();
        let r = integrate_half_line(f, &c).unwrap();
        assert!(r.value.abs() < c.abs_tol * 10.0, "{r:?}");
    }

    #[test]
    fn complex_integrand() {
        // ∫ e^{iux} N(0,1)(x) dx = e^{-u²/2}
        let u = 1.3;
        let r = integrate_real_line(|x: f64| Complex64::from_polar(std_normal(x), u * x), &cfg()).unwrap();
        assert!((r.value.re - (-0.5 * u * u).exp()).abs() < 1e-12);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn non_finite_is_reported() {
        let r = integrate_real_line(|x: f64| if x > 0.5 { f64::NAN } else { (-x * x).exp() }, &cfg());
        assert!(matches!(r, Err(Error::NonFiniteEvaluation { .. })));
    }

    #[test]
    fn budget_exhaustion_flags_nonconvergence() {
        let tight = QuadratureConfig {
            max_subdivisions: 1,
            ..cfg()
        };
        let r = integrate_real_line(|x: f64| (10.0 * x).sin().abs() / (1.0 + x * x), &tight).unwrap();
        assert!(!r.converged);
        assert!(r.require_converged().is_err());
    }

    #[test]
    fn converged_implies_within_tolerance() {
        let c = cfg();
        for f in [
            (|x: f64| (-x * x).exp()) as fn(f64) -> f64,
            |x| 1.0 / (1.0 + x * x),
            |x| x.powi(4) * (-0.5 * x * x).exp(),
        ] {
            let r = integrate_real_line(f, &c).unwrap();
            if r.converged {
                assert!(r.error_estimate <= c.abs_tol.max(c.rel_tol * r.value.abs()));
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = QuadratureConfig { rel_tol: 0.0, ..cfg() };
        assert!(integrate_real_line(|x: f64| (-x * x).exp(), &bad).is_err());
    }

    #[test]
    fn hermite_zeroth_and_second_moments() {
        for n in [1, 2, 5, 20, 200] {
            let r = gauss_hermite(|_| 1.0, n, 0.0, 1.0).unwrap();
            assert!((r - PI.sqrt()).abs() < 1e-12, "n={n}: {r}");
        }
        for n in [2, 3, 10, 100] {
            let r = gauss_hermite(|x| x * x, n, 0.0, 1.0).unwrap();
            assert!((r - PI.sqrt() / 2.0).abs() < 1e-12, "n={n}: {r}");
        }
    }

    #[test]
    fn hermite_exact_for_top_degree() {
        // degree 2n-1 polynomial with shifted/scaled argument vs adaptive rule
        for n in [1usize, 3, 6, 10] {
            let deg = 2 * n as i32 - 1;
            let p = move |x: f64| (0..=deg).map(|k| (0.3 + 0.1 * k as f64) * x.powi(k)).sum::<f64>();
            let (center, scale) = (0.4, 0.8);
            let gh = gauss_hermite(p, n, center, scale).unwrap();
            let tight = QuadratureConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..cfg() };
            let ad = integrate_real_line(|x: f64| (-x * x).exp() * p(center + scale * x), &tight).unwrap();
            assert!((gh - ad.value).abs() <= 1e-12 * ad.value.abs(), "n={n}: {gh} vs {}", ad.value);
        }
    }

    #[test]
    fn hermite_rejects_bad_input() {
        assert!(gauss_hermite(|_| 1.0, 0, 0.0, 1.0).is_err());
        assert!(gauss_hermite(|_| 1.0, 4, 0.0, -1.0).is_err());
        assert!(matches!(
            gauss_hermite(|_| f64::INFINITY, 4, 0.0, 1.0),
            Err(Error::NonFiniteEvaluation { .. })
        ));
    }
}
