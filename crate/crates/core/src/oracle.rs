//! Independent brute-force minimizer over the feasible polytope, used to
//! cross-check the closed-form projection on desk-scale instances.
//!
//! The feasible set fixes every (s, w) slice's total mass at Pr(s)·Pr(w), so
//! the KL objective decomposes into independent per-slice problems over
//! scaled simplices. Each slice is solved generically: the best of a batch of
//! Dirichlet draws seeds a projected coordinate descent that repeatedly
//! rebalances coordinate pairs by bisecting the directional derivative. The
//! closed form is never consulted, so agreement between the two routes is
//! evidence rather than tautology.

use crate::dist::JointDistribution;
use crate::equalize::feasibility_check;
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest instance (total cell count) the oracle accepts.
pub const MAX_ORACLE_CELLS: usize = 200;

const PAIR_BISECTIONS: usize = 80;

/// Numerically minimizes KL(Q, dist) over { Q ≥ 0 : Q(s,·,w) sums to
/// Pr(s)·Pr(w) for every (s, w) }, from `samples` Dirichlet starts per slice
/// refined by `iterations` coordinate-descent sweeps. Deterministic for a
/// fixed seed.
pub fn brute_force_project(
    dist: &JointDistribution,
    iterations: usize,
    samples: usize,
    seed: u64,
) -> Result<JointDistribution> {
    let schema = dist.schema();
    if schema.cell_count() > MAX_ORACLE_CELLS {
        return Err(Error::InstanceTooLarge {
            cells: schema.cell_count(),
            max: MAX_ORACLE_CELLS,
        });
    }
    let report = feasibility_check(dist);
    if !report.feasible() {
        return Err(Error::Infeasible(report));
    }

    let ps = dist.outcome_marginal();
    let pw = dist.protected_marginal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; schema.cell_count()];

    // Slices in fixed (s, w) order so the rng stream is reproducible.
    for s in 0..schema.outcome_len() {
        for w in 0..schema.protected_len() {
            let target_mass = ps[s] * pw[w];
            let support: Vec<usize> = (0..schema.unprotected_len())
                .filter(|&u| dist.probability(s, u, w) > 0.0)
                .collect();
            if support.is_empty() {
                // Feasibility guarantees the demanded mass is zero here.
                continue;
            }
            let p: Vec<f64> = support
                .iter()
                .map(|&u| dist.probability(s, u, w))
                .collect();
            let q = minimize_slice(&p, target_mass, iterations, samples, &mut rng);
            for (&u, &mass) in support.iter().zip(&q) {
                out[schema.cell_index(s, u, w)] = mass;
            }
        }
    }
    JointDistribution::from_probabilities(schema.clone(), out)
}

/// Minimizes Σ qᵢ·ln(qᵢ/pᵢ) subject to q ≥ 0, Σ qᵢ = mass.
fn minimize_slice(
    p: &[f64],
    mass: f64,
    iterations: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let k = p.len();
    if k == 1 {
        return vec![mass];
    }

    // Multi-start: best of `samples` uniform-simplex draws (uniform split
    // when no samples are requested).
    let mut best = vec![mass / k as f64; k];
    let mut best_obj = slice_objective(&best, p);
    for _ in 0..samples {
        let draw = scaled_simplex_draw(k, mass, rng);
        let obj = slice_objective(&draw, p);
        if obj < best_obj {
            best_obj = obj;
            best = draw;
        }
    }

    // Projected coordinate descent: each pass rebalances every coordinate
    // pair by a 1-D bisection of the directional derivative
    // ln((qᵢ+t)/pᵢ) − ln((qⱼ−t)/pⱼ), which is increasing in t.
    let mut q = best;
    for _ in 0..iterations {
        let mut largest_shift = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (q[i], q[j]);
                if a + b == 0.0 {
                    continue;
                }
                let (mut lo, mut hi) = (-a, b);
                for _ in 0..PAIR_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    let g = ((a + mid) / p[i]).ln() - ((b - mid) / p[j]).ln();
                    if g < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                q[i] = a + t;
                q[j] = b - t;
                largest_shift = largest_shift.max(t.abs());
            }
        }
        if largest_shift <= 1e-15 * mass {
            break;
        }
    }
    q
}

fn slice_objective(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(&qi, &pi)| qi * (qi / pi).ln())
        .sum()
}

/// A uniform draw from the simplex scaled to `mass`, via normalized
/// exponential variates.
fn scaled_simplex_draw(k: usize, mass: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut draw: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = draw.iter().sum();
    for x in &mut draw {
        *x *= mass / total;
    }
    draw
}
