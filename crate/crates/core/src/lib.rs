//! Decorrelating discrete predictive distributions from protected attributes.
//!
//! Given a joint distribution over an outcome, ordinary predictors, and
//! protected attributes (race, sex, class, ...), this crate computes the
//! unique closest distribution — in Kullback-Leibler divergence — under
//! which knowing the outcome reveals nothing about the protected attributes.
//! The projection has a closed form: each (outcome, protected) slice is
//! rescaled by Pr(s)·Pr(w)/Pr(s, w), which preserves all within-slice
//! structure while forcing the (outcome, protected) marginal to factor.
//!
//! The crate covers the full workflow around the projection:
//!
//! - [`dist`]: exact algebra on dense categorical joint tables —
//!   marginals, conditionals, KL divergence, mutual information (nats).
//! - [`equalize`]: the projection itself, structural-zero feasibility
//!   checking, scoped equalization for subpopulations where an outcome is
//!   impossible by necessity, and constraint verification.
//! - [`oracle`]: an independent brute-force minimizer over the feasible
//!   polytope for cross-checking the closed form on small instances.
//! - [`estimate`]: plug-in estimation from CSV records with explicit
//!   smoothing and empty-cell diagnostics.
//! - [`synth`]: synthetic data from generative chains with planted
//!   protected-attribute leakage, for end-to-end testing.
//! - [`audit`]: before/after mutual information, information cost, and
//!   threshold-policy allocation rates.
//! - [`format`]: the text formats shared by the library and the CLI.
//!
//! ```
//! use outcome_equal::{
//!     outcome_equalize, verify_insensitivity, JointDistribution, Role, Variable,
//!     VariableSchema,
//! };
//!
//! let schema = VariableSchema::new(vec![
//!     Variable::new("hired", Role::Outcome, vec!["yes".into(), "no".into()]).unwrap(),
//!     Variable::new("side", Role::Protected, vec!["north".into(), "south".into()]).unwrap(),
//! ])
//! .unwrap();
//! let joint =
//!     JointDistribution::from_probabilities(schema, vec![0.4, 0.2, 0.1, 0.3]).unwrap();
//! let adjusted = outcome_equalize(&joint, None).unwrap();
//! assert!(verify_insensitivity(&adjusted, 1e-10).pass);
//! ```

pub mod audit;
pub mod dist;
pub mod equalize;
pub mod error;
pub mod estimate;
pub mod format;
pub mod oracle;
pub mod schema;
pub mod synth;

pub use audit::{audit, policy_disparity, AuditReport, GroupAllocation, ThresholdPolicy};
pub use dist::{Axis, ConditionalTable, JointDistribution, ProbTable, NORMALIZATION_TOLERANCE};
pub use equalize::{
    feasibility_check, information_cost, outcome_equalize, verify_insensitivity,
    verify_scoped_insensitivity, FeasibilityReport, InfeasiblePair, InsensitivityCheck,
    ScopeSpec,
};
pub use error::{Error, Result};
pub use estimate::{
    estimate_joint, load_csv, parse_csv, write_csv, Dataset, EstimateDiagnostics, SmoothingSpec,
};
pub use oracle::{brute_force_project, MAX_ORACLE_CELLS};
pub use schema::{Assignment, Role, Variable, VariableSchema};
pub use synth::{ground_truth_joint, sample, SynthConfig};

/// Version string reported by the CLI and embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
