//! Before/after auditing: group-dependence of outcomes, the information cost
//! of equalization, and empirical allocation rates of threshold policies.
//!
//! The report keeps two kinds of statement apart. Joint-level independence
//! (mutual information, KL cost) is an exact property of the distributions.
//! Allocation rates of a deterministic threshold rule are empirical
//! measurements: thresholding an equalized distribution does not inherit the
//! joint-level guarantee, so disparities are reported as measured, never
//! asserted to be zero.

use crate::dist::{Axis, JointDistribution};
use crate::equalize::information_cost;
use crate::error::{Error, Result};
use crate::schema::VariableSchema;

/// Allocate to every (u, w) cell whose conditional probability of the target
/// outcome reaches the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPolicy {
    target_outcome: String,
    tau: f64,
}

impl ThresholdPolicy {
    pub fn new(target_outcome: impl Into<String>, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidThreshold { tau });
        }
        Ok(ThresholdPolicy {
            target_outcome: target_outcome.into(),
            tau,
        })
    }

    pub fn target_outcome(&self) -> &str {
        &self.target_outcome
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn target_index(&self, schema: &VariableSchema) -> Result<usize> {
        schema
            .outcome_variable()
            .level_index(&self.target_outcome)
            .ok_or_else(|| Error::UnknownOutcomeLevel {
                value: self.target_outcome.clone(),
            })
    }
}

/// Allocation rates of one protected group under both distributions.
/// `None` marks a group with zero population mass (rate undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAllocation {
    pub group: String,
    pub rate_original: Option<f64>,
    pub rate_equalized: Option<f64>,
}

/// Policy evaluation section of an audit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySection {
    pub target_outcome: String,
    pub tau: f64,
    pub allocations: Vec<GroupAllocation>,
    /// Positive-weight (u, w) cells whose conditional was undefined under
    /// the queried distribution; such cells are excluded from the rate.
    pub undefined_queries: usize,
    /// Max pairwise rate difference across defined groups, per distribution.
    pub disparity_original: f64,
    pub disparity_equalized: f64,
}

/// The full audit: exact joint-level quantities plus optional empirical
/// policy rates. Population weights for policy evaluation always come from
/// the original distribution — the adjustment changes scores, not who
/// exists.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// I(outcome; protected) under the original distribution, nats.
    pub mi_before: f64,
    /// I(outcome; protected) under the equalized distribution, nats.
    pub mi_after: f64,
    /// KL(equalized, original), nats.
    pub information_cost: f64,
    pub policy: Option<PolicySection>,
    /// The cost restated as an asymptotic error exponent.
    pub chernoff_stein_note: String,
}

/// Compares a distribution with its equalized counterpart and, when a policy
/// is given, measures per-group allocation rates under both.
pub fn audit(
    original: &JointDistribution,
    equalized: &JointDistribution,
    policy: Option<&ThresholdPolicy>,
) -> Result<AuditReport> {
    if original.schema() != equalized.schema() {
        return Err(Error::SchemaMismatch);
    }
    let mi_before = original.mutual_information(Axis::Outcome, Axis::Protected)?;
    let mi_after = equalized.mutual_information(Axis::Outcome, Axis::Protected)?;
    let cost = information_cost(original, equalized)?;

    let policy_section = match policy {
        None => None,
        Some(p) => Some(evaluate_policy(original, equalized, p)?),
    };

    let note = format!(
        "an optimal test distinguishing allocations drawn under the adjusted distribution \
         from allocations drawn under the original has error probability decaying like \
         exp(-n * {cost:.6}) after n observations; smaller cost means the two regimes are \
         harder to tell apart"
    );
    Ok(AuditReport {
        mi_before,
        mi_after,
        information_cost: cost,
        policy: policy_section,
        chernoff_stein_note: note,
    })
}

fn evaluate_policy(
    original: &JointDistribution,
    equalized: &JointDistribution,
    policy: &ThresholdPolicy,
) -> Result<PolicySection> {
    let schema = original.schema();
    let target = policy.target_index(schema)?;
    let w_len = schema.protected_len();
    let u_len = schema.unprotected_len();
    let pw = original.protected_marginal();

    // Pr(u, w) and Pr(target, u, w) per distribution.
    let uw_mass = |d: &JointDistribution, u: usize, w: usize| -> f64 {
        (0..schema.outcome_len()).map(|s| d.probability(s, u, w)).sum()
    };

    let mut undefined_queries = 0usize;
    let mut allocations = Vec::with_capacity(w_len);
    for w in 0..w_len {
        if pw[w] == 0.0 {
            allocations.push(GroupAllocation {
                group: schema.protected_label(w),
                rate_original: None,
                rate_equalized: None,
            });
            continue;
        }
        let mut rates = [0.0f64; 2];
        for (slot, d) in [original, equalized].into_iter().enumerate() {
            for u in 0..u_len {
                let weight = uw_mass(original, u, w) / pw[w];
                if weight == 0.0 {
                    continue;
                }
                let cell_mass = uw_mass(d, u, w);
                if cell_mass == 0.0 {
                    // Population present, conditional undefined: count and
                    // exclude from the rate.
                    undefined_queries += 1;
                    continue;
                }
                let conditional = d.probability(target, u, w) / cell_mass;
                if conditional >= policy.tau() {
                    rates[slot] += weight;
                }
            }
        }
        allocations.push(GroupAllocation {
            group: schema.protected_label(w),
            rate_original: Some(rates[0].min(1.0)),
            rate_equalized: Some(rates[1].min(1.0)),
        });
    }

    let disparity = |pick: fn(&GroupAllocation) -> Option<f64>| -> f64 {
        let defined: Vec<f64> = allocations.iter().filter_map(pick).collect();
        let mut max = 0.0f64;
        for (i, a) in defined.iter().enumerate() {
            for b in &defined[i + 1..] {
                max = max.max((a - b).abs());
            }
        }
        max
    };

    Ok(PolicySection {
        target_outcome: policy.target_outcome().to_string(),
        tau: policy.tau(),
        disparity_original: disparity(|g| g.rate_original),
        disparity_equalized: disparity(|g| g.rate_equalized),
        allocations,
        undefined_queries,
    })
}

/// Max pairwise absolute difference of group allocation rates under one
/// distribution, with both weights and conditionals taken from it. Zero
/// means the deterministic rule treats every (defined) group at the same
/// rate.
pub fn policy_disparity(dist: &JointDistribution, policy: &ThresholdPolicy) -> Result<f64> {
    let section = evaluate_policy(dist, dist, policy)?;
    Ok(section.disparity_original)
}

impl AuditReport {
    /// Human-readable table.
    pub fn to_human_text(&self) -> String {
        let mut out = String::new();
        out.push_str("== joint-level independence (exact) ==\n");
        out.push_str(&format!(
            "  mutual information outcome~protected, original : {:.9} nats\n",
            self.mi_before
        ));
        out.push_str(&format!(
            "  mutual information outcome~protected, adjusted : {:.9} nats\n",
            self.mi_after
        ));
        out.push_str(&format!(
            "  information cost KL(adjusted, original)        : {:.9} nats\n",
            self.information_cost
        ));
        out.push_str(&format!("  note: {}\n", self.chernoff_stein_note));
        if let Some(p) = &self.policy {
            out.push_str(&format!(
                "== threshold-policy allocation rates (empirical; target {:?}, tau {}) ==\n",
                p.target_outcome, p.tau
            ));
            out.push_str(
                "  population weights from the original distribution; a deterministic \
                 threshold rule\n  need not inherit joint-level independence, so rates are \
                 reported as measured\n",
            );
            for g in &p.allocations {
                let fmt = |r: Option<f64>| match r {
                    Some(v) => format!("{v:.6}"),
                    None => "undefined".to_string(),
                };
                out.push_str(&format!(
                    "  group {:<20} original {:<10} adjusted {}\n",
                    g.group,
                    fmt(g.rate_original),
                    fmt(g.rate_equalized)
                ));
            }
            out.push_str(&format!(
                "  max rate disparity: original {:.6}, adjusted {:.6}\n",
                p.disparity_original, p.disparity_equalized
            ));
            if p.undefined_queries > 0 {
                out.push_str(&format!(
                    "  {} positive-weight cell(s) had undefined conditionals and were \
                     excluded\n",
                    p.undefined_queries
                ));
            }
        }
        out
    }

    /// Machine-readable key/value document. `comments` are emitted first,
    /// one `#` line each.
    pub fn to_machine_text(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("report: outcome-equal-audit v1\n");
        out.push_str(&format!("mi_before_nats: {:.17e}\n", self.mi_before));
        out.push_str(&format!("mi_after_nats: {:.17e}\n", self.mi_after));
        out.push_str(&format!(
            "information_cost_nats: {:.17e}\n",
            self.information_cost
        ));
        out.push_str(&format!("chernoff_stein_note: {}\n", self.chernoff_stein_note));
        if let Some(p) = &self.policy {
            out.push_str(&format!("policy_target: {}\n", p.target_outcome));
            out.push_str(&format!("policy_tau: {:.17e}\n", p.tau));
            out.push_str("population_weights: original\n");
            for g in &p.allocations {
                out.push_str(&format!("group: {}\n", g.group));
                let fmt = |r: Option<f64>| match r {
                    Some(v) => format!("{v:.17e}"),
                    None => "undefined".to_string(),
                };
                out.push_str(&format!("rate_original: {}\n", fmt(g.rate_original)));
                out.push_str(&format!("rate_equalized: {}\n", fmt(g.rate_equalized)));
            }
            out.push_str(&format!(
                "disparity_original: {:.17e}\n",
                p.disparity_original
            ));
            out.push_str(&format!(
                "disparity_equalized: {:.17e}\n",
                p.disparity_equalized
            ));
            out.push_str(&format!(
                "undefined_conditional_queries: {}\n",
                p.undefined_queries
            ));
        }
        out
    }
}
