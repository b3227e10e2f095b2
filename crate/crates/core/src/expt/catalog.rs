use std::f64::consts::PI;

use rayon::prelude::*;

use super::fixtures::{SINGULAR_LIMIT, STIELTJES_KERNEL_BREAK, TILTED_GAUSSIAN};
use super::{CatalogEntry, Check, Metric, Overrides, Table};
use crate::error::Result;
use crate::feature::{weak_cumulants, weak_moment_with, FeatureMapSpec, MomentPath};
use crate::geom::{
    codimension_thresholds, injectivity_probe, jacobian, metric_tensor, numerical_rank, ProbeConfig, DEFAULT_RANK_TOL,
};
use crate::model::{KernelFamily, KernelNormalization, KernelSpec, ModelFamily, ModelSpec, Parameter};
use crate::quad::{integrate_half_line, integrate_real_line, QuadratureConfig};

type Outcome = Result<(Vec<Metric>, Option<Table>)>;

pub(super) static ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "stieltjes-cancellation",
        summary: "∫x^n sin(2π ln x) dLN(0,1) vanishes for n = 0..10",
        run: stieltjes_cancellation,
    },
    CatalogEntry {
        name: "stieltjes-kernel-break",
        summary: "a Gaussian kernel separates the Stieltjes class from the log-normal",
        run: stieltjes_kernel_break,
    },
    CatalogEntry {
        name: "lognormal-classical-moments",
        summary: "log-normal moments equal exp(n²/2) for n ≤ 6",
        run: lognormal_classical_moments,
    },
    CatalogEntry {
        name: "cauchy-fisher",
        summary: "Cauchy location Fisher information is 1/2",
        run: cauchy_fisher,
    },
    CatalogEntry {
        name: "cauchy-submersion",
        summary: "Cauchy w_0 jointly in (μ, s) has rank 1 and increases in s",
        run: cauchy_submersion,
    },
    CatalogEntry {
        name: "lognormal-immersion",
        summary: "log-normal (w_0, w_1) is an immersion in (μ, σ)",
        run: lognormal_immersion,
    },
    CatalogEntry {
        name: "behrens-fisher-w0",
        summary: "Gaussian w_0 closed form and nuisance flattening in s",
        run: behrens_fisher_w0,
    },
    CatalogEntry {
        name: "singular-limit",
        summary: "metric degeneration of the Gaussian feature map as s grows",
        run: singular_limit,
    },
    CatalogEntry {
        name: "type0-charpath",
        summary: "stable weak moments through the characteristic function",
        run: type0_charpath,
    },
    CatalogEntry {
        name: "sinusoidal-orthogonality",
        summary: "sin(c(X−μ)) is orthogonal to the Gaussian scale score",
        run: sinusoidal_orthogonality,
    },
    CatalogEntry {
        name: "gaussian-tilted-cumulants",
        summary: "kernel-tilted Gaussian stays Gaussian",
        run: gaussian_tilted_cumulants,
    },
    CatalogEntry {
        name: "thresholds",
        summary: "codimension thresholds for p = 3, K = 7",
        run: thresholds,
    },
];

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn stieltjes_cancellation(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::oscillatory());
    let ln = ModelSpec::lognormal(0.0, 1.0)?;
    let rows: Vec<Vec<f64>> = (0..=10)
        .into_par_iter()
        .map(|n| {
            let r = integrate_half_line(
                |x: f64| match ln.density(x) {
                    Ok(0.0) => 0.0,
                    Ok(f) => x.powi(n) * (2.0 * PI * x.ln()).sin() * f,
                    Err(_) => f64::NAN,
                },
                &cfg,
            )?;
            let scale = (0.5 * (n * n) as f64).exp();
            Ok(vec![n as f64, r.value, r.error_estimate, r.value / scale, f64::from(u8::from(r.converged))])
        })
        .collect::<Result<_>>()?;
    let max_abs = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    let mut table = Table::new(&["n", "integral", "error_estimate", "relative_to_moment", "converged"]);
    table.rows = rows;
    Ok((vec![Metric::new("max_abs_integral", max_abs, Check::Below { limit: 1e-8 })], Some(table)))
}

fn stieltjes_kernel_break(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig { rel_tol: 1e-12, abs_tol: 1e-13, ..QuadratureConfig::oscillatory() });
    let k = KernelSpec::unit_peak(1.0, 0.0)?;
    let (ln, st) = (ModelSpec::lognormal(0.0, 1.0)?, ModelSpec::stieltjes(1.0)?);
    // J_n pairs x^n φ with the perturbation dμ_1 − dμ_0
    let rows: Vec<Vec<f64>> = (0..=6)
        .into_par_iter()
        .map(|n| {
            let r = integrate_half_line(
                |x: f64| {
                    let phi = k.value(x);
                    match (ln.density(x), st.density(x)) {
                        (Ok(f0), Ok(_)) if phi == 0.0 || f0 == 0.0 => 0.0,
                        (Ok(f0), Ok(f1)) => x.powi(n as i32) * phi * (f1 - f0),
                        _ => f64::NAN,
                    }
                },
                &cfg,
            )?
            .require_converged()?;
            let want = STIELTJES_KERNEL_BREAK[n];
            Ok(vec![n as f64, r.value, want, ((r.value - want) / want).abs()])
        })
        .collect::<Result<_>>()?;
    let max_abs = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    let max_rel = rows.iter().map(|r| r[3]).fold(0.0, f64::max);

    // the probe looks for a distinct pair a ≠ a' with equal kernel features
    let fam = ModelFamily::stieltjes();
    let spec = FeatureMapSpec::new((0..=2).collect(), MomentPath::Density, QuadratureConfig::oscillatory())?;
    let probe = ProbeConfig { n_starts: 4, max_sweeps: 12, seed: o.seed.unwrap_or(0), ..ProbeConfig::default() };
    let collisions = injectivity_probe(&fam, &k, &spec, &probe);

    let mut table = Table::new(&["n", "j_n", "oracle", "relative_deviation"]);
    table.rows = rows;
    Ok((
        vec![
            Metric::new("max_abs_j", max_abs, Check::Above { limit: 1e-6 }),
            Metric::new("max_rel_deviation_from_oracle", max_rel, Check::Below { limit: 1e-8 }),
            Metric::new("probe_collisions", collisions.len() as f64, Check::Equals { target: 0.0 }),
        ],
        Some(table),
    ))
}

fn lognormal_classical_moments(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::default());
    let ln = ModelSpec::lognormal(0.0, 1.0)?;
    let rows: Vec<Vec<f64>> = (0..=6)
        .into_par_iter()
        .map(|n| {
            let r = integrate_half_line(
                |x: f64| match ln.density(x) {
                    Ok(0.0) => 0.0,
                    Ok(f) => x.powi(n) * f,
                    Err(_) => f64::NAN,
                },
                &cfg,
            )?
            .require_converged()?;
            let want = (0.5 * (n * n) as f64).exp();
            Ok(vec![n as f64, r.value, want, ((r.value - want) / want).abs()])
        })
        .collect::<Result<_>>()?;
    let max_rel = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let mut table = Table::new(&["n", "quadrature", "exp_n2_over_2", "relative_error"]);
    table.rows = rows;
    Ok((vec![Metric::new("max_rel_error", max_rel, Check::Below { limit: 1e-6 })], Some(table)))
}

fn cauchy_fisher(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::default());
    let info = ModelSpec::cauchy(0.0)?.classical_fisher_info(Parameter::Location, &cfg)?;
    Ok((vec![Metric::new("fisher_information", info, Check::Within { target: 0.5, tol: 1e-6 })], None))
}

fn cauchy_submersion(o: &Overrides) -> Outcome {
    let fam = ModelFamily::cauchy();
    let kfam = KernelFamily::scale_only(KernelNormalization::UnitPeak);
    let spec = FeatureMapSpec::new(vec![0], MomentPath::Density, o.quadrature_or(QuadratureConfig::differencing()))?;
    let points: Vec<(f64, f64)> =
        linspace(-2.0, 2.0, 5).into_iter().flat_map(|mu| linspace(0.5, 4.0, 5).into_iter().map(move |s| (mu, s))).collect();
    let rows: Vec<Vec<f64>> = points
        .into_par_iter()
        .map(|(mu, s)| {
            let j = jacobian(&fam, &kfam, &[mu], &[s], &spec)?;
            let rank = numerical_rank(&j.joint(), DEFAULT_RANK_TOL).rank;
            Ok(vec![mu, s, j.d_theta[(0, 0)], j.d_lambda[(0, 0)], rank as f64])
        })
        .collect::<Result<_>>()?;
    let rank_one = rows.iter().filter(|r| r[4] == 1.0).count();
    let min_ds = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    let n = rows.len();
    let mut table = Table::new(&["mu", "s", "dF_dmu", "dF_ds", "joint_rank"]);
    table.rows = rows;
    Ok((
        vec![
            Metric::new("rank_one_points", rank_one as f64, Check::Equals { target: n as f64 }),
            Metric::new("min_dF_ds", min_ds, Check::Above { limit: 0.0 }),
        ],
        Some(table),
    ))
}

fn lognormal_immersion(o: &Overrides) -> Outcome {
    let fam = ModelFamily::lognormal();
    let kfam = KernelFamily::scale_only(KernelNormalization::Probability);
    let spec = FeatureMapSpec::new(vec![0, 1], MomentPath::Density, o.quadrature_or(QuadratureConfig::differencing()))?;
    let points: Vec<(f64, f64)> = [-0.5, 0.0, 0.5]
        .into_iter()
        .flat_map(|mu| [0.5, 1.0, 1.5].into_iter().map(move |sigma| (mu, sigma)))
        .collect();
    let rows: Vec<Vec<f64>> = points
        .into_par_iter()
        .map(|(mu, sigma)| {
            let j = jacobian(&fam, &kfam, &[mu, sigma], &[1.0], &spec)?;
            let g = metric_tensor(&j);
            let model_rank = numerical_rank(&j.d_theta, DEFAULT_RANK_TOL).rank;
            let joint_rank = numerical_rank(&j.joint(), DEFAULT_RANK_TOL).rank;
            let psd = g.is_symmetric(1e-12 * g.g.norm()) && g.is_psd();
            Ok(vec![mu, sigma, model_rank as f64, joint_rank as f64, g.det, f64::from(u8::from(psd))])
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let count = |col: usize, want: f64| rows.iter().filter(|r| r[col] == want).count() as f64;
    let min_det = rows.iter().map(|r| r[4]).fold(f64::INFINITY, f64::min);
    let metrics = vec![
        Metric::new("model_rank_2_points", count(2, 2.0), Check::Equals { target: n }),
        Metric::new("joint_rank_2_points", count(3, 2.0), Check::Equals { target: n }),
        Metric::new("min_det_g", min_det, Check::Above { limit: 0.0 }),
        Metric::new("metric_psd_points", count(5, 1.0), Check::Equals { target: n }),
    ];
    let mut table = Table::new(&["mu", "sigma", "model_rank", "joint_rank", "det_g", "metric_psd"]);
    table.rows = rows;
    Ok((metrics, Some(table)))
}

fn gaussian_w0(mu: f64, sigma: f64, s: f64) -> f64 {
    let v = sigma * sigma + s * s;
    (-mu * mu / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

fn behrens_fisher_w0(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::default());
    let w0 = |mu: f64, sigma: f64, s: f64| -> Result<f64> {
        let k = KernelSpec::new(s, 0.0)?;
        Ok(weak_moment_with(&ModelSpec::gaussian(mu, sigma)?, &k, 0, MomentPath::Density, &cfg)?.value)
    };
    let mut grid = Vec::new();
    for mu in [-1.0, 0.0, 1.5] {
        for sigma in [0.5, 1.0, 2.0] {
            for s in [0.5, 1.0, 3.0] {
                grid.push((mu, sigma, s));
            }
        }
    }
    let max_rel = grid
        .into_par_iter()
        .map(|(mu, sigma, s)| {
            let want = gaussian_w0(mu, sigma, s);
            Ok(((w0(mu, sigma, s)? - want) / want).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    // nuisance flattening: relative spread of w_0 over σ at fixed μ
    let sigmas = linspace(0.5, 2.0, 7);
    let scales = [1.0, 3.0, 10.0, 30.0];
    let rows: Vec<Vec<f64>> = scales
        .par_iter()
        .map(|&s| {
            let ws = sigmas.iter().map(|&sigma| w0(0.5, sigma, s)).collect::<Result<Vec<f64>>>()?;
            let mean = ws.iter().sum::<f64>() / ws.len() as f64;
            let spread = ws.iter().map(|w| (w - mean).abs()).fold(0.0, f64::max) / mean;
            Ok(vec![s, mean, spread])
        })
        .collect::<Result<_>>()?;
    let spreads: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let mut table = Table::new(&["s", "mean_w0", "spread_sigma"]);
    table.rows = rows;
    Ok((
        vec![
            Metric::new("max_rel_error_closed_form", max_rel, Check::Below { limit: 1e-8 }),
            Metric::flag("spread_strictly_decreasing", strictly_decreasing(&spreads)),
        ],
        Some(table),
    ))
}

fn singular_limit(o: &Overrides) -> Outcome {
    let fam = ModelFamily::gaussian();
    let kfam = KernelFamily::scale_only(KernelNormalization::Probability);
    let spec = FeatureMapSpec::new(vec![0, 1, 2], MomentPath::Density, o.quadrature_or(QuadratureConfig::differencing()))?;
    let rows: Vec<Vec<f64>> = SINGULAR_LIMIT
        .par_iter()
        .map(|oracle| {
            let s = oracle[0];
            let j = jacobian(&fam, &kfam, &[1.0, 1.0], &[s], &spec)?;
            let g = metric_tensor(&j);
            let psd = g.is_symmetric(1e-12 * g.g.norm()) && g.is_psd();
            Ok(vec![
                s,
                g.det,
                g.condition_number,
                g.correlation_det,
                ((g.det - oracle[1]) / oracle[1]).abs(),
                f64::from(u8::from(psd)),
            ])
        })
        .collect::<Result<_>>()?;
    // trend from s = 2 on
    let tail = &rows[1..];
    let dets: Vec<f64> = tail.iter().map(|r| r[1]).collect();
    let conds: Vec<f64> = tail.iter().map(|r| r[2]).collect();
    let oracle_dets: Vec<f64> = SINGULAR_LIMIT[1..].iter().map(|r| r[1]).collect();
    let oracle_conds: Vec<f64> = SINGULAR_LIMIT[1..].iter().map(|r| r[2]).collect();
    let same_trend = strictly_decreasing(&oracle_dets) && oracle_conds.windows(2).all(|w| w[1] >= w[0]);
    let max_dev = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    let psd = rows.iter().all(|r| r[5] == 1.0);
    let mut table = Table::new(&["s", "det_g", "condition_number", "correlation_det", "det_rel_deviation", "metric_psd"]);
    table.rows = rows;
    Ok((
        vec![
            Metric::flag("det_strictly_decreasing_from_s2", strictly_decreasing(&dets)),
            Metric::flag("condition_nondecreasing_from_s2", conds.windows(2).all(|w| w[1] >= w[0])),
            Metric::flag("oracle_trend_agrees", same_trend),
            Metric::new("max_det_rel_deviation_from_oracle", max_dev, Check::Below { limit: 1e-6 }),
            Metric::flag("metric_psd", psd),
        ],
        Some(table),
    ))
}

fn type0_charpath(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::oscillatory());
    let k = KernelSpec::new(1.0, 0.3)?;
    let mu = 0.4;
    let twins = [
        (ModelSpec::stable(1.0, mu, 1.0)?, ModelSpec::cauchy(mu)?),
        (ModelSpec::stable(2.0, mu, 1.0)?, ModelSpec::gaussian(mu, std::f64::consts::SQRT_2)?),
    ];
    let mut jobs = Vec::new();
    for (i, pair) in twins.iter().enumerate() {
        for j in 0..=4 {
            jobs.push((i, *pair, j));
        }
    }
    let rows: Vec<Vec<f64>> = jobs
        .into_par_iter()
        .map(|(i, (stable, twin), j)| {
            let via_char = weak_moment_with(&stable, &k, j, MomentPath::CharFn, &cfg)?.value;
            let via_density = weak_moment_with(&twin, &k, j, MomentPath::Density, &cfg)?.value;
            let alpha = if i == 0 { 1.0 } else { 2.0 };
            Ok(vec![alpha, j as f64, via_char, via_density, ((via_char - via_density) / via_density).abs()])
        })
        .collect::<Result<_>>()?;
    let max_rel = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    let heavy = ModelSpec::stable(1.5, mu, 1.0)?;
    let heavy_ok = (0..=2)
        .map(|j| weak_moment_with(&heavy, &k, j, MomentPath::CharFn, &cfg).map(|w| w.value.is_finite()))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let mut table = Table::new(&["alpha", "j", "charfn_path", "density_path", "relative_difference"]);
    table.rows = rows;
    Ok((
        vec![
            Metric::new("max_rel_difference_twins", max_rel, Check::Below { limit: 1e-6 }),
            Metric::flag("alpha_1_5_finite", heavy_ok),
        ],
        Some(table),
    ))
}

fn sinusoidal_orthogonality(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig::default());
    let (mu, sigma) = (0.3, 1.2);
    let m = ModelSpec::gaussian(mu, sigma)?;
    let rows: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|c| {
            let r = integrate_real_line(
                |x: f64| match (m.density(x), m.score(Parameter::Scale, x)) {
                    (Ok(0.0), _) => 0.0,
                    (Ok(f), Ok(score)) => (c * (x - mu)).sin() * score * f,
                    _ => f64::NAN,
                },
                &cfg,
            )?;
            Ok(vec![c, r.value])
        })
        .collect::<Result<_>>()?;
    let max_abs = rows.iter().map(|r| r[1].abs()).fold(0.0, f64::max);
    let mut table = Table::new(&["c", "expectation"]);
    table.rows = rows;
    Ok((vec![Metric::new("max_abs_expectation", max_abs, Check::Below { limit: 1e-10 })], Some(table)))
}

fn gaussian_tilted_cumulants(o: &Overrides) -> Outcome {
    let cfg = o.quadrature_or(QuadratureConfig { rel_tol: 1e-12, abs_tol: 1e-13, ..QuadratureConfig::default() });
    let (mu, sigma, s, c) = (0.7, 1.3, 0.9, 0.2);
    let wc = weak_cumulants(&ModelSpec::gaussian(mu, sigma)?, &KernelSpec::new(s, c)?, 4, &cfg)?;
    // product of N(μ, σ²) and N(c, s²) is proportional to N(mean, var)
    let v = sigma * sigma + s * s;
    let mean = (mu * s * s + c * sigma * sigma) / v;
    let var = sigma * sigma * s * s / v;
    let w0 = (-(mu - c) * (mu - c) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
    let kappa = &wc.kappa;
    let mut table = Table::new(&["order", "kappa"]);
    table.rows = kappa.iter().enumerate().map(|(i, k)| vec![(i + 1) as f64, *k]).collect();
    Ok((
        vec![
            Metric::new("kappa_1", kappa[0], Check::Within { target: mean, tol: 1e-8 }),
            Metric::new("kappa_2", kappa[1], Check::Within { target: var, tol: 1e-8 }),
            Metric::new("abs_kappa_3", kappa[2].abs(), Check::Below { limit: 1e-6 }),
            Metric::new("abs_kappa_4", kappa[3].abs(), Check::Below { limit: 1e-6 }),
            Metric::new("w0", wc.w0, Check::Within { target: w0, tol: 1e-8 * w0 }),
            Metric::new("closed_form_vs_oracle", (w0 - TILTED_GAUSSIAN[0]).abs() + (mean - TILTED_GAUSSIAN[1]).abs()
                + (var - TILTED_GAUSSIAN[2]).abs(), Check::Below { limit: 1e-14 }),
        ],
        Some(table),
    ))
}

fn thresholds(_: &Overrides) -> Outcome {
    let t = codimension_thresholds(3, 7);
    Ok((
        vec![
            Metric::flag("identifiability_generic", t.identifiability_generic),
            Metric::flag("info_regular_generic", t.info_regular_generic),
            Metric::new("self_intersection_codim", t.self_intersection_codim as f64, Check::Equals { target: 8.0 }),
            Metric::new("sigma1_codim", t.sigma1_codim as f64, Check::Equals { target: 6.0 }),
        ],
        None,
    ))
}
