use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::feature::{feature_map, FeatureMapSpec};
use crate::model::{KernelSpec, ModelFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub n_starts: usize,
    /// Minimum Euclidean distance between the two parameter points.
    pub separation: f64,
    /// Pairs whose feature distance falls below `tol` are reported.
    pub tol: f64,
    pub seed: u64,
    /// Pattern-search sweeps per start.
    pub max_sweeps: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { n_starts: 8, separation: 0.1, tol: 1e-8, seed: 0, max_sweeps: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionCandidate {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    /// `|Φ(θ₁) − Φ(θ₂)|²`
    pub objective: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sq_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Searches for distinct parameters with (numerically) equal feature
/// vectors. An empty result means no collision was found, not that none
/// exists.
///
/// Each start draws a pair at least `separation` apart and runs a
/// coordinate pattern search on `|Φ(θ₁) − Φ(θ₂)|²`, halving the steps
/// whenever a sweep makes no progress. Moves that leave the box or violate
/// the separation are rejected.
pub fn injectivity_probe(
    fam: &ModelFamily,
    k: &KernelSpec,
    spec: &FeatureMapSpec,
    cfg: &ProbeConfig,
) -> Vec<CollisionCandidate> {
    let p = fam.dim();
    let widths: Vec<f64> = fam.bounds.iter().map(|(lo, hi)| hi - lo).collect();
    let diameter = widths.iter().map(|w| w * w).sum::<f64>().sqrt();
    if !(cfg.separation > 0.0) || diameter < cfg.separation {
        return Vec::new();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::with_capacity(cfg.n_starts);
    for _ in 0..cfg.n_starts {
        for _attempt in 0..1000 {
            let mut draw = || -> Vec<f64> {
                fam.bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect()
            };
            let (a, b) = (draw(), draw());
            if distance(&a, &b) >= cfg.separation {
                starts.push((a, b));
                break;
            }
        }
    }

    let features = |theta: &[f64]| feature_map(fam, theta, k, spec).ok().map(|f| f.values);
    let mut found: Vec<CollisionCandidate> = starts
        .into_par_iter()
        .filter_map(|(t1, t2)| {
            let mut z: Vec<f64> = t1.iter().chain(&t2).copied().collect();
            let mut f1 = features(&z[..p])?;
            let mut f2 = features(&z[p..])?;
            let mut best = sq_gap(&f1, &f2);
            let mut steps: Vec<f64> = widths.iter().chain(&widths).map(|w| 0.25 * w).collect();
            let floor: Vec<f64> = steps.iter().map(|s| s * 1e-7).collect();
            for _ in 0..cfg.max_sweeps {
                if best < cfg.tol * cfg.tol * 1e-4 || steps.iter().zip(&floor).all(|(s, f)| s <= f) {
                    break;
                }
                let mut improved = false;
                for i in 0..2 * p {
                    if steps[i] == 0.0 {
                        continue;
                    }
                    for dir in [1.0, -1.0] {
                        let mut cand = z.clone();
                        cand[i] += dir * steps[i];
                        let (lo, hi) = fam.bounds[i % p];
                        if cand[i] < lo || cand[i] > hi || distance(&cand[..p], &cand[p..]) < cfg.separation {
                            continue;
                        }
                        let moved = if i < p { features(&cand[..p]) } else { features(&cand[p..]) };
                        let Some(moved) = moved else { continue };
                        let obj = if i < p { sq_gap(&moved, &f2) } else { sq_gap(&f1, &moved) };
                        if obj < best {
                            best = obj;
                            z = cand;
                            if i < p {
                                f1 = moved;
                            } else {
                                f2 = moved;
                            }
                            improved = true;
                            break;
                        }
                    }
                }
                if !improved {
                    steps.iter_mut().for_each(|s| *s *= 0.5);
                }
            }
            (best < cfg.tol * cfg.tol).then(|| CollisionCandidate {
                theta1: z[..p].to_vec(),
                theta2: z[p..].to_vec(),
                objective: best,
            })
        })
        .collect();
    found.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapsed_box_gives_no_pairs() {
        let fam = ModelFamily::stieltjes().with_bounds(vec![(0.2, 0.2)]).unwrap();
        let k = KernelSpec::new(1.0, 0.0).unwrap();
        let out = injectivity_probe(&fam, &k, &FeatureMapSpec::consecutive(1), &ProbeConfig::default());
        assert!(out.is_empty());
    }

    #[test]
    fn gaussian_location_family_is_injective_under_kernel() {
        // w_0, w_1 separate locations in [-2, 2]
        let fam = ModelFamily::gaussian().with_bounds(vec![(-2.0, 2.0), (1.0, 1.0)]).unwrap();
        let k = KernelSpec::new(1.0, 0.3).unwrap();
        let cfg = ProbeConfig { n_starts: 3, max_sweeps: 20, ..ProbeConfig::default() };
        assert!(injectivity_probe(&fam, &k, &FeatureMapSpec::consecutive(1), &cfg).is_empty());
    }
}
