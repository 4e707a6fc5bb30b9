//! Synthetic dataset generation from a three-stage generative chain with a
//! planted protected → unprotected → outcome correlation path.
//!
//! The chain factorizes as Pr(w) · Pr(u|w) · Pr(s|u,w): protected attributes
//! are drawn first, unprotected predictors depend on them, and the outcome
//! depends on both. Even when the outcome table itself ignores w, the
//! leakage through u leaves the outcome correlated with the protected
//! attributes — the proxy effect these fixtures exist to reproduce.
//!
//! Sampling uses the ChaCha8 stream cipher as its pseudo-random generator,
//! seeded directly with the configured 64-bit seed, drawing one f64 per
//! variable in (w, u, s) order per record. Identical seeds therefore yield
//! identical datasets on every platform.

use crate::dist::{JointDistribution, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};
use crate::estimate::Dataset;
use crate::schema::VariableSchema;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A generative chain over a schema, with sample count and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    schema: VariableSchema,
    /// Pr(w): one probability per protected cell.
    protected_prior: Vec<f64>,
    /// Pr(u|w): one row per protected cell, each over unprotected cells.
    unprotected_given_protected: Vec<Vec<f64>>,
    /// Pr(s|u,w): one row per (u, w) pair (index u·|W|+w), each over
    /// outcome levels.
    outcome_given_rest: Vec<Vec<f64>>,
    sample_count: usize,
    seed: u64,
}

fn check_row(name: &str, row: &[f64], expected_len: usize) -> Result<()> {
    if row.len() != expected_len {
        return Err(Error::InvalidTable(format!(
            "{name}: expected {expected_len} entries, got {}",
            row.len()
        )));
    }
    if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidTable(format!(
            "{name}: entries must be finite and nonnegative"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidTable(format!(
            "{name}: row sums to {sum:.12}, expected 1"
        )));
    }
    Ok(())
}

impl SynthConfig {
    pub fn new(
        schema: VariableSchema,
        protected_prior: Vec<f64>,
        unprotected_given_protected: Vec<Vec<f64>>,
        outcome_given_rest: Vec<Vec<f64>>,
        sample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let (s_len, u_len, w_len) = (
            schema.outcome_len(),
            schema.unprotected_len(),
            schema.protected_len(),
        );
        check_row("protected prior", &protected_prior, w_len)?;
        if unprotected_given_protected.len() != w_len {
            return Err(Error::InvalidTable(format!(
                "unprotected table: expected {w_len} rows, got {}",
                unprotected_given_protected.len()
            )));
        }
        for (w, row) in unprotected_given_protected.iter().enumerate() {
            check_row(&format!("unprotected row {w}"), row, u_len)?;
        }
        if outcome_given_rest.len() != u_len * w_len {
            return Err(Error::InvalidTable(format!(
                "outcome table: expected {} rows, got {}",
                u_len * w_len,
                outcome_given_rest.len()
            )));
        }
        for (i, row) in outcome_given_rest.iter().enumerate() {
            check_row(&format!("outcome row {i}"), row, s_len)?;
        }
        if sample_count == 0 {
            return Err(Error::InvalidTable(
                "sample count must be at least 1".into(),
            ));
        }
        Ok(SynthConfig {
            schema,
            protected_prior,
            unprotected_given_protected,
            outcome_given_rest,
            sample_count,
            seed,
        })
    }

    pub fn schema(&self) -> &VariableSchema {
        &self.schema
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Copy of the configuration with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        out
    }

    /// Copy of the configuration with a different sample count (must be ≥ 1).
    pub fn with_sample_count(&self, sample_count: usize) -> Result<Self> {
        if sample_count == 0 {
            return Err(Error::InvalidTable(
                "sample count must be at least 1".into(),
            ));
        }
        let mut out = self.clone();
        out.sample_count = sample_count;
        Ok(out)
    }

    pub fn protected_prior(&self) -> &[f64] {
        &self.protected_prior
    }

    pub fn unprotected_given_protected(&self) -> &[Vec<f64>] {
        &self.unprotected_given_protected
    }

    pub fn outcome_given_rest(&self) -> &[Vec<f64>] {
        &self.outcome_given_rest
    }
}

/// The exact joint implied by the chain:
/// Pr(s,u,w) = Pr(w) · Pr(u|w) · Pr(s|u,w).
pub fn ground_truth_joint(config: &SynthConfig) -> Result<JointDistribution> {
    let schema = config.schema();
    let (s_len, u_len, w_len) = (
        schema.outcome_len(),
        schema.unprotected_len(),
        schema.protected_len(),
    );
    let mut mass = vec![0.0; schema.cell_count()];
    for w in 0..w_len {
        for u in 0..u_len {
            for s in 0..s_len {
                mass[schema.cell_index(s, u, w)] = config.protected_prior[w]
                    * config.unprotected_given_protected[w][u]
                    * config.outcome_given_rest[u * w_len + w][s];
            }
        }
    }
    JointDistribution::from_probabilities(schema.clone(), mass)
}

/// Draws `sample_count` records ancestrally (w, then u|w, then s|u,w) from a
/// ChaCha8 generator seeded with the config's seed.
pub fn sample(config: &SynthConfig) -> Result<Dataset> {
    let schema = config.schema();
    let w_len = schema.protected_len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(config.sample_count);
    for _ in 0..config.sample_count {
        let w = draw(&config.protected_prior, &mut rng);
        let u = draw(&config.unprotected_given_protected[w], &mut rng);
        let s = draw(&config.outcome_given_rest[u * w_len + w], &mut rng);
        records.push(schema.assignment_of(s, u, w));
    }
    Dataset::new(schema.clone(), records)
}

/// Inverse-CDF draw from a normalized row.
fn draw(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in row.iter().enumerate() {
        cum += p;
        if r < cum {
            return i;
        }
    }
    row.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Axis;
    use crate::equalize::{outcome_equalize, verify_insensitivity};
    use crate::estimate::{estimate_joint, SmoothingSpec};
    use crate::schema::{Role, Variable};

    /// Binary track → fitness → graduation chain where graduation depends on
    /// the track only through fitness.
    pub(crate) fn playground_config(n: usize, seed: u64) -> SynthConfig {
        let schema = VariableSchema::new(vec![
            Variable::new("graduation", Role::Outcome, vec!["grad".into(), "nograd".into()])
                .unwrap(),
            Variable::new("fitness", Role::Unprotected, vec!["fit".into(), "unfit".into()])
                .unwrap(),
            Variable::new("track", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        SynthConfig::new(
            schema,
            vec![0.5, 0.5],
            vec![vec![0.7, 0.3], vec![0.3, 0.7]],
            vec![
                vec![0.8, 0.2], // fit, a
                vec![0.8, 0.2], // fit, b
                vec![0.4, 0.6], // unfit, a
                vec![0.4, 0.6], // unfit, b
            ],
            n,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn ground_truth_matches_the_factorization() {
        let config = playground_config(10, 0);
        let joint = ground_truth_joint(&config).unwrap();
        // Pr(grad, fit, a) = 0.5 · 0.7 · 0.8.
        assert!((joint.probability(0, 0, 0) - 0.28).abs() < 1e-15);
        assert!((joint.probability(1, 1, 1) - 0.5 * 0.7 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn leakage_is_real_despite_no_direct_path() {
        let joint = ground_truth_joint(&playground_config(10, 0)).unwrap();
        let mi = joint
            .mutual_information(Axis::Outcome, Axis::Protected)
            .unwrap();
        assert!(mi > 0.01, "I(S;W) = {mi}");
        assert!((mi - 0.013403454678062).abs() < 1e-12);
    }

    #[test]
    fn no_leakage_when_tables_ignore_the_protected_axis() {
        let schema = playground_config(10, 0).schema().clone();
        let config = SynthConfig::new(
            schema,
            vec![0.5, 0.5],
            vec![vec![0.6, 0.4], vec![0.6, 0.4]],
            vec![
                vec![0.8, 0.2],
                vec![0.8, 0.2],
                vec![0.4, 0.6],
                vec![0.4, 0.6],
            ],
            10,
            0,
        )
        .unwrap();
        let joint = ground_truth_joint(&config).unwrap();
        let mi = joint
            .mutual_information(Axis::Outcome, Axis::Protected)
            .unwrap();
        assert!(mi < 1e-14);
    }

    #[test]
    fn deterministic_chain_gives_a_point_mass() {
        let schema = playground_config(10, 0).schema().clone();
        let config = SynthConfig::new(
            schema,
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 1.0],
            ],
            10,
            0,
        )
        .unwrap();
        let joint = ground_truth_joint(&config).unwrap();
        // All mass on (nograd, unfit, a).
        assert_eq!(joint.probability(1, 1, 0), 1.0);
        assert_eq!(joint.probabilities().iter().filter(|&&p| p > 0.0).count(), 1);
    }

    #[test]
    fn equalization_closes_the_loop() {
        let joint = ground_truth_joint(&playground_config(10, 0)).unwrap();
        let eq = outcome_equalize(&joint, None).unwrap();
        assert!(verify_insensitivity(&eq, 1e-10).pass);
        let mi = eq.mutual_information(Axis::Outcome, Axis::Protected).unwrap();
        assert!(mi <= 1e-10);
    }

    #[test]
    fn sample_count_and_determinism() {
        let config = playground_config(5, 99);
        let a = sample(&config).unwrap();
        assert_eq!(a.len(), 5);
        let b = sample(&config).unwrap();
        assert_eq!(a.records(), b.records());
        let c = sample(&config.with_seed(100)).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn estimator_recovers_ground_truth_at_scale() {
        let config = playground_config(100_000, 42);
        let truth = ground_truth_joint(&config).unwrap();
        let data = sample(&config).unwrap();
        let (est, diag) = estimate_joint(&data, &SmoothingSpec::none()).unwrap();
        assert_eq!(diag.empty_cells, 0);
        let tv: f64 = truth
            .probabilities()
            .iter()
            .zip(est.probabilities())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.02, "total variation {tv}");
    }

    #[test]
    fn estimator_error_shrinks_with_sample_size() {
        let tv_at = |n: usize| -> f64 {
            // Average over a few seeds so the check is about scale, not one
            // lucky draw.
            let mut total = 0.0;
            for seed in [1, 2, 3] {
                let config = playground_config(n, seed);
                let truth = ground_truth_joint(&config).unwrap();
                let (est, _) =
                    estimate_joint(&sample(&config).unwrap(), &SmoothingSpec::none()).unwrap();
                total += truth
                    .probabilities()
                    .iter()
                    .zip(est.probabilities())
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / 2.0;
            }
            total / 3.0
        };
        let (t3, t4, t5) = (tv_at(1_000), tv_at(10_000), tv_at(100_000));
        assert!(t4 < t3, "{t4} !< {t3}");
        assert!(t5 < t4, "{t5} !< {t4}");
    }

    #[test]
    fn invalid_tables_are_rejected() {
        let schema = playground_config(10, 0).schema().clone();
        let bad_prior = SynthConfig::new(
            schema.clone(),
            vec![0.6, 0.6],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5]; 4],
            10,
            0,
        );
        assert!(matches!(bad_prior, Err(Error::InvalidTable(_))));

        let bad_shape = SynthConfig::new(
            schema,
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5]],
            vec![vec![0.5, 0.5]; 4],
            10,
            0,
        );
        assert!(matches!(bad_shape, Err(Error::InvalidTable(_))));
    }
}
