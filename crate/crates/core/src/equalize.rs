//! The outcome-equal projection: the unique KL-minimal reweighting of a joint
//! distribution under which the outcome carries no information about the
//! protected attributes.
//!
//! The insensitivity constraint requires the corrected joint's
//! (outcome, protected) marginal to factor as Pr(s)·Pr(w). The closed-form
//! minimizer rescales each (s, w) slice:
//!
//! ```text
//! Pr_X(s, u, w) = Pr(s, u, w) · Pr(s) / Pr(s | w)
//! ```
//!
//! which leaves every within-slice conditional Pr(u | s, w) untouched. A
//! structural zero — Pr(s, w) = 0 while Pr(s) > 0 and Pr(w) > 0 — makes the
//! constraint unsatisfiable; such instances are rejected, never silently
//! repaired. Subpopulations where an outcome is impossible by necessity are
//! handled by scoping: the projection is applied independently within each
//! cell of the exempted protected variables.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::schema::VariableSchema;

/// An (outcome, protected-cell) pair whose mandated mass cannot be placed.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasiblePair {
    /// Outcome level label.
    pub outcome: String,
    /// Protected cell label (composite levels joined with "∧").
    pub group: String,
    /// The mass Pr(s)·Pr(w) the constraint demands on a cell that holds
    /// exactly zero.
    pub demanded_mass: f64,
}

/// Result of scanning a distribution for structural zeros.
///
/// Feasibility is the absence of infeasible pairs, so the flag is derived
/// rather than stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub pairs: Vec<InfeasiblePair>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.feasible() {
            return write!(f, "feasible: no structural zeros block the constraint");
        }
        writeln!(
            f,
            "{} (outcome, group) pair(s) demand mass on empty cells:",
            self.pairs.len()
        )?;
        for p in &self.pairs {
            writeln!(
                f,
                "  ({}, {}): demanded {:.9}, actual 0",
                p.outcome, p.group, p.demanded_mass
            )?;
        }
        write!(f, "supply a scope that exempts the impossible pairs")
    }
}

/// Protected variables whose cells are exempted from cross-cell equalization.
/// Within each scope cell, the projection runs over the remaining protected
/// variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScopeSpec {
    names: Vec<String>,
}

impl ScopeSpec {
    /// Duplicate names are collapsed; validation against a schema happens at
    /// the point of use.
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for n in names {
            let n = n.into();
            if !out.contains(&n) {
                out.push(n);
            }
        }
        ScopeSpec { names: out }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Pass/fail summary of the insensitivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct InsensitivityCheck {
    pub max_violation: f64,
    pub tol: f64,
    pub pass: bool,
    /// Outcome level of the worst (s, w) pair.
    pub worst_outcome: String,
    /// Protected cell of the worst (s, w) pair.
    pub worst_group: String,
}

/// Lists every (s, w) pair with Pr(s, w) = 0 while Pr(s) > 0 and Pr(w) > 0.
/// Outcome levels that never occur make the constraint vacuous and are not
/// listed.
pub fn feasibility_check(dist: &JointDistribution) -> FeasibilityReport {
    let schema = dist.schema();
    let pairs = infeasible_pairs(dist)
        .into_iter()
        .map(|(s, w, demanded_mass)| InfeasiblePair {
            outcome: schema.outcome_label(s).to_string(),
            group: schema.protected_label(w),
            demanded_mass,
        })
        .collect();
    FeasibilityReport { pairs }
}

fn infeasible_pairs(dist: &JointDistribution) -> Vec<(usize, usize, f64)> {
    let schema = dist.schema();
    let ps = dist.outcome_marginal();
    let pw = dist.protected_marginal();
    let psw = dist.outcome_protected_marginal();
    let w_len = schema.protected_len();
    let mut out = Vec::new();
    for s in 0..schema.outcome_len() {
        for w in 0..w_len {
            if psw[s * w_len + w] == 0.0 && ps[s] > 0.0 && pw[w] > 0.0 {
                out.push((s, w, ps[s] * pw[w]));
            }
        }
    }
    out
}

/// Computes the KL-minimal distribution whose (outcome, protected) marginal
/// factors as a product, optionally within scope cells.
///
/// Without a scope the whole table must be feasible. With a scope, each
/// positive-mass scope cell is conditioned on, projected over the remaining
/// protected variables, and recombined with its original mass; zero-mass
/// scope cells contribute nothing.
pub fn outcome_equalize(
    dist: &JointDistribution,
    scope: Option<&ScopeSpec>,
) -> Result<JointDistribution> {
    match scope {
        None => {
            let report = feasibility_check(dist);
            if !report.feasible() {
                return Err(Error::Infeasible(report));
            }
            apply_projection(dist)
        }
        Some(scope) if scope.is_empty() => outcome_equalize(dist, None),
        Some(scope) => equalize_scoped(dist, scope),
    }
}

/// The closed-form rescale; feasibility must already hold.
fn apply_projection(dist: &JointDistribution) -> Result<JointDistribution> {
    let schema = dist.schema();
    let ps = dist.outcome_marginal();
    let pw = dist.protected_marginal();
    let psw = dist.outcome_protected_marginal();
    let w_len = schema.protected_len();
    let mut out = vec![0.0; schema.cell_count()];
    for (cell, &p) in dist.probabilities().iter().enumerate() {
        let (s, _, w) = schema.cell_coords(cell);
        let slice_mass = psw[s * w_len + w];
        if slice_mass > 0.0 {
            // Pr(s)/Pr(s|w) = Pr(s)·Pr(w)/Pr(s,w); zero cells stay zero.
            out[cell] = p * (ps[s] * pw[w] / slice_mass);
        }
    }
    JointDistribution::from_probabilities(schema.clone(), out)
}

/// Decomposition of a schema into scope cells: the exempted protected
/// variables index the cells, everything else forms the sub-schema.
struct ScopeSplit {
    sub_schema: VariableSchema,
    /// Number of scope cells.
    cell_count: usize,
    /// For each full cell: (scope cell index, sub-schema cell index).
    cell_map: Vec<(usize, usize)>,
    /// Display label per scope cell.
    labels: Vec<String>,
    /// Per scope cell and sub-schema protected index, the full protected
    /// label (scope levels and remaining levels merged in schema order).
    full_group_labels: Vec<Vec<String>>,
}

impl ScopeSplit {
    fn new(schema: &VariableSchema, scope: &ScopeSpec) -> Result<ScopeSplit> {
        let mut scope_ids = Vec::new();
        for name in scope.names() {
            match schema.variable(name) {
                Some((i, v)) if v.role() == crate::schema::Role::Protected => {
                    if !scope_ids.contains(&i) {
                        scope_ids.push(i);
                    }
                }
                _ => {
                    return Err(Error::UnknownScopeVariable { name: name.clone() });
                }
            }
        }
        scope_ids.sort_unstable();

        let remaining_protected = schema
            .variables()
            .iter()
            .enumerate()
            .filter(|(i, v)| {
                v.role() == crate::schema::Role::Protected && !scope_ids.contains(i)
            })
            .count();
        if remaining_protected == 0 {
            return Err(Error::EmptyScopeCellSchema);
        }

        let sub_vars: Vec<_> = schema
            .variables()
            .iter()
            .enumerate()
            .filter(|(i, _)| !scope_ids.contains(i))
            .map(|(_, v)| v.clone())
            .collect();
        let sub_schema = VariableSchema::new(sub_vars)?;

        let scope_shape: Vec<usize> = scope_ids
            .iter()
            .map(|&i| schema.variables()[i].levels().len())
            .collect();
        let cell_count: usize = scope_shape.iter().product();

        // Scope cells in row-major order of the scope variables (schema order).
        let mut labels = Vec::with_capacity(cell_count);
        for g in 0..cell_count {
            let coords = decompose(g, &scope_shape);
            labels.push(
                scope_ids
                    .iter()
                    .zip(&coords)
                    .map(|(&i, &c)| schema.variables()[i].levels()[c].as_str())
                    .collect::<Vec<_>>()
                    .join("∧"),
            );
        }

        let mut cell_map = Vec::with_capacity(schema.cell_count());
        for cell in 0..schema.cell_count() {
            let (s, u, w) = schema.cell_coords(cell);
            let assignment = schema.assignment_of(s, u, w);
            let idx = assignment.indices();
            let g = scope_ids
                .iter()
                .zip(&scope_shape)
                .fold(0, |acc, (&i, &n)| acc * n + idx[i]);
            let sub_idx: Vec<usize> = (0..idx.len())
                .filter(|i| !scope_ids.contains(i))
                .map(|i| idx[i])
                .collect();
            let (ss, su, sw) =
                sub_schema.split_assignment(&crate::schema::Assignment::new(sub_idx));
            cell_map.push((g, sub_schema.cell_index(ss, su, sw)));
        }

        // Full protected label for each (scope cell, sub protected cell):
        // levels of all protected variables in schema order.
        let mut full_group_labels =
            vec![vec![String::new(); sub_schema.protected_len()]; cell_count];
        let mut seen = vec![vec![false; sub_schema.protected_len()]; cell_count];
        for cell in 0..schema.cell_count() {
            let (_, _, w) = schema.cell_coords(cell);
            let (g, sub_cell) = cell_map[cell];
            let (_, _, sub_w) = sub_schema.cell_coords(sub_cell);
            if !seen[g][sub_w] {
                seen[g][sub_w] = true;
                full_group_labels[g][sub_w] = schema.protected_label(w);
            }
        }

        Ok(ScopeSplit {
            sub_schema,
            cell_count,
            cell_map,
            labels,
            full_group_labels,
        })
    }

    /// Splits a mass vector into per-scope-cell totals and conditional
    /// distributions (`None` for zero-mass scope cells).
    fn split(&self, mass: &[f64]) -> (Vec<f64>, Vec<Option<JointDistribution>>) {
        let mut totals = vec![0.0; self.cell_count];
        let mut subs = vec![vec![0.0; self.sub_schema.cell_count()]; self.cell_count];
        for (cell, &p) in mass.iter().enumerate() {
            let (g, sub_cell) = self.cell_map[cell];
            totals[g] += p;
            subs[g][sub_cell] = p;
        }
        let dists = subs
            .into_iter()
            .zip(&totals)
            .map(|(raw, &t)| {
                if t > 0.0 {
                    let cond: Vec<f64> = raw.iter().map(|&x| x / t).collect();
                    Some(
                        JointDistribution::from_probabilities(self.sub_schema.clone(), cond)
                            .expect("conditional of a valid distribution is valid"),
                    )
                } else {
                    None
                }
            })
            .collect();
        (totals, dists)
    }
}

fn decompose(mut code: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; shape.len()];
    for (i, &n) in shape.iter().enumerate().rev() {
        out[i] = code % n;
        code /= n;
    }
    out
}

fn equalize_scoped(dist: &JointDistribution, scope: &ScopeSpec) -> Result<JointDistribution> {
    let schema = dist.schema();
    let split = ScopeSplit::new(schema, scope)?;
    let (totals, subs) = split.split(dist.probabilities());

    // Every positive-mass scope cell must be feasible on its own; collect all
    // blocking pairs in one report rather than failing on the first cell.
    let mut blocking = Vec::new();
    for (g, sub) in subs.iter().enumerate() {
        if let Some(sub) = sub {
            for (s, sub_w, demanded) in infeasible_pairs(sub) {
                blocking.push(InfeasiblePair {
                    outcome: split.sub_schema.outcome_label(s).to_string(),
                    group: split.full_group_labels[g][sub_w].clone(),
                    // Demanded mass expressed at full-population scale.
                    demanded_mass: totals[g] * demanded,
                });
            }
        }
    }
    if !blocking.is_empty() {
        return Err(Error::Infeasible(FeasibilityReport { pairs: blocking }));
    }

    let mut out = vec![0.0; schema.cell_count()];
    let mut projected: Vec<Option<JointDistribution>> = Vec::with_capacity(subs.len());
    for sub in &subs {
        projected.push(match sub {
            Some(d) => Some(apply_projection(d)?),
            None => None,
        });
    }
    for cell in 0..schema.cell_count() {
        let (g, sub_cell) = split.cell_map[cell];
        if let Some(eq) = &projected[g] {
            out[cell] = totals[g] * eq.probabilities()[sub_cell];
        }
    }
    JointDistribution::from_probabilities(schema.clone(), out)
}

/// Measures the worst absolute residual of the product constraint:
/// max over (s, w) of |Pr(s, w) − Pr(s)·Pr(w)|, against the distribution's
/// own marginals. Passes iff the maximum is within `tol`.
///
/// Panics if `tol` is not strictly positive.
pub fn verify_insensitivity(dist: &JointDistribution, tol: f64) -> InsensitivityCheck {
    assert!(tol > 0.0, "tolerance must be strictly positive");
    let schema = dist.schema();
    let ps = dist.outcome_marginal();
    let pw = dist.protected_marginal();
    let psw = dist.outcome_protected_marginal();
    let w_len = schema.protected_len();
    let mut max_violation = 0.0;
    let mut worst = (0usize, 0usize);
    for s in 0..schema.outcome_len() {
        for w in 0..w_len {
            let v = (psw[s * w_len + w] - ps[s] * pw[w]).abs();
            if v > max_violation {
                max_violation = v;
                worst = (s, w);
            }
        }
    }
    InsensitivityCheck {
        max_violation,
        tol,
        pass: max_violation <= tol,
        worst_outcome: schema.outcome_label(worst.0).to_string(),
        worst_group: schema.protected_label(worst.1),
    }
}

/// Per-scope-cell insensitivity of the remaining protected variables: the
/// check runs on each positive-mass scope cell's conditional distribution.
/// Zero-mass scope cells report `None`.
pub fn verify_scoped_insensitivity(
    dist: &JointDistribution,
    scope: &ScopeSpec,
    tol: f64,
) -> Result<Vec<(String, Option<InsensitivityCheck>)>> {
    let split = ScopeSplit::new(dist.schema(), scope)?;
    let (_, subs) = split.split(dist.probabilities());
    Ok(split
        .labels
        .iter()
        .zip(&subs)
        .map(|(label, sub)| {
            (
                label.clone(),
                sub.as_ref().map(|d| verify_insensitivity(d, tol)),
            )
        })
        .collect())
}

/// The predictive information given up to satisfy the constraint:
/// KL(equalized, original) in nats. The policy-valid distribution is the
/// first KL argument.
pub fn information_cost(
    original: &JointDistribution,
    equalized: &JointDistribution,
) -> Result<f64> {
    equalized.kl_divergence(original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Axis;
    use crate::schema::{Role, Variable};

    fn sw_schema() -> VariableSchema {
        VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap()
    }

    fn fixture() -> JointDistribution {
        // {(1,a):0.4, (0,a):0.1, (1,b):0.2, (0,b):0.3}
        JointDistribution::from_probabilities(sw_schema(), vec![0.4, 0.2, 0.1, 0.3]).unwrap()
    }

    /// S = {care, no-care}, W = sex × race, with Pr(care | male) = 0.
    fn prenatal() -> JointDistribution {
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["care".into(), "nocare".into()]).unwrap(),
            Variable::new("sex", Role::Protected, vec!["male".into(), "female".into()])
                .unwrap(),
            Variable::new("race", Role::Protected, vec!["r1".into(), "r2".into()]).unwrap(),
        ])
        .unwrap();
        // w order: male∧r1, male∧r2, female∧r1, female∧r2
        JointDistribution::from_probabilities(
            schema,
            vec![
                0.0, 0.0, 0.2, 0.1, // care
                0.3, 0.2, 0.1, 0.1, // nocare
            ],
        )
        .unwrap()
    }

    #[test]
    fn full_support_is_feasible() {
        let report = feasibility_check(&fixture());
        assert!(report.feasible());
        assert!(report.pairs.is_empty());
    }

    #[test]
    fn prenatal_zeros_are_reported_per_race() {
        let report = feasibility_check(&prenatal());
        assert!(!report.feasible());
        let pairs: Vec<(String, String)> = report
            .pairs
            .iter()
            .map(|p| (p.outcome.clone(), p.group.clone()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("care".to_string(), "male∧r1".to_string()),
                ("care".to_string(), "male∧r2".to_string()),
            ]
        );
        // Pr(care) = 0.3, Pr(male∧r1) = 0.3.
        assert!((report.pairs[0].demanded_mass - 0.09).abs() < 1e-12);
    }

    #[test]
    fn vanished_outcome_level_is_vacuous() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.6, 0.4, 0.0, 0.0])
            .unwrap();
        assert!(feasibility_check(&d).feasible());
    }

    #[test]
    fn fixture_equalizes_to_product_of_marginals() {
        let eq = outcome_equalize(&fixture(), None).unwrap();
        let expect = [0.3, 0.3, 0.2, 0.2];
        for (got, want) in eq.probabilities().iter().zip(expect) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn already_insensitive_input_is_fixed_point() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.3, 0.3, 0.2, 0.2])
            .unwrap();
        let eq = outcome_equalize(&d, None).unwrap();
        for (got, want) in eq.probabilities().iter().zip(d.probabilities()) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let err = outcome_equalize(&prenatal(), None).unwrap_err();
        match err {
            Error::Infeasible(report) => assert_eq!(report.pairs.len(), 2),
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn equalizer_output_passes_verification() {
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("u", Role::Unprotected, vec!["x".into(), "y".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        let d = JointDistribution::from_probabilities(
            schema,
            vec![0.10, 0.05, 0.15, 0.05, 0.20, 0.10, 0.05, 0.30],
        )
        .unwrap();
        let eq = outcome_equalize(&d, None).unwrap();
        let check = verify_insensitivity(&eq, 1e-10);
        assert!(check.pass, "violation {}", check.max_violation);
        // Conditional Pr(u | s, w) preserved wherever Pr(s, w) > 0.
        let orig_cond = d
            .conditional(&[Axis::Unprotected], &[Axis::Outcome, Axis::Protected])
            .unwrap();
        let eq_cond = eq
            .conditional(&[Axis::Unprotected], &[Axis::Outcome, Axis::Protected])
            .unwrap();
        for s in 0..2 {
            for w in 0..2 {
                let a = orig_cond.row(&[s, w]).unwrap();
                let b = eq_cond.row(&[s, w]).unwrap();
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn raw_fixture_fails_verification_with_residual_point_one() {
        let check = verify_insensitivity(&fixture(), 1e-10);
        assert!(!check.pass);
        assert!((check.max_violation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn product_distribution_passes_verification() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.42, 0.18, 0.28, 0.12])
            .unwrap();
        assert!(verify_insensitivity(&d, 1e-10).pass);
    }

    #[test]
    fn information_cost_matches_direct_evaluation() {
        let d = fixture();
        let eq = outcome_equalize(&d, None).unwrap();
        let cost = information_cost(&d, &eq).unwrap();
        // 0.3·ln(0.75) + 0.2·ln 2 + 0.3·ln 1.5 + 0.2·ln(2/3) = 0.4·ln 3 − 0.5·ln 2.
        assert!((cost - 0.092871325187271).abs() < 1e-12);
    }

    #[test]
    fn information_cost_of_fixed_point_is_zero() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.3, 0.3, 0.2, 0.2])
            .unwrap();
        let eq = outcome_equalize(&d, None).unwrap();
        assert!(information_cost(&d, &eq).unwrap().abs() < 1e-14);
    }

    #[test]
    fn scope_makes_prenatal_feasible_and_leaves_men_untouched() {
        let d = prenatal();
        let scope = ScopeSpec::new(["sex"]);
        let eq = outcome_equalize(&d, Some(&scope)).unwrap();

        // Male cells (w ∈ {0, 1}) carry over exactly.
        for s in 0..2 {
            for w in 0..2 {
                assert!((eq.probability(s, 0, w) - d.probability(s, 0, w)).abs() <= 1e-12);
            }
        }
        // Female cells become the within-female product of marginals.
        let expect = [0.18, 0.12, 0.12, 0.08];
        let got = [
            eq.probability(0, 0, 2),
            eq.probability(0, 0, 3),
            eq.probability(1, 0, 2),
            eq.probability(1, 0, 3),
        ];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= 1e-12);
        }
        // Within each sex, outcome ⟂ race at 1e-10.
        for (_, check) in verify_scoped_insensitivity(&eq, &scope, 1e-10).unwrap() {
            assert!(check.unwrap().pass);
        }
        // Scope-cell masses preserved.
        let sex_mass = |j: &JointDistribution, lo: usize, hi: usize| -> f64 {
            (0..2).map(|s| (lo..hi).map(|w| j.probability(s, 0, w)).sum::<f64>()).sum()
        };
        assert!((sex_mass(&eq, 0, 2) - sex_mass(&d, 0, 2)).abs() <= 1e-12);
        assert!((sex_mass(&eq, 2, 4) - sex_mass(&d, 2, 4)).abs() <= 1e-12);
    }

    #[test]
    fn scope_over_all_protected_variables_is_rejected() {
        let err = outcome_equalize(&fixture(), Some(&ScopeSpec::new(["w"]))).unwrap_err();
        assert!(matches!(err, Error::EmptyScopeCellSchema));
    }

    #[test]
    fn unknown_scope_variable_is_rejected() {
        let err = outcome_equalize(&prenatal(), Some(&ScopeSpec::new(["s"]))).unwrap_err();
        assert!(matches!(err, Error::UnknownScopeVariable { .. }));
        let err = outcome_equalize(&prenatal(), Some(&ScopeSpec::new(["zip"]))).unwrap_err();
        assert!(matches!(err, Error::UnknownScopeVariable { .. }));
    }

    #[test]
    fn scoped_infeasibility_reports_full_group_labels() {
        // Scoping by race does not help here: within r1, (care, male) is
        // empty while both care and male occur, so the r1 sub-problem is
        // itself infeasible and the report must name the full group.
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["care".into(), "nocare".into()]).unwrap(),
            Variable::new("sex", Role::Protected, vec!["male".into(), "female".into()])
                .unwrap(),
            Variable::new("race", Role::Protected, vec!["r1".into(), "r2".into()]).unwrap(),
        ])
        .unwrap();
        let d = JointDistribution::from_probabilities(
            schema,
            vec![
                0.0, 0.1, 0.2, 0.1, // care: male∧r1 empty
                0.3, 0.1, 0.1, 0.1, // nocare
            ],
        )
        .unwrap();
        let err = outcome_equalize(&d, Some(&ScopeSpec::new(["race"]))).unwrap_err();
        match err {
            Error::Infeasible(report) => {
                assert_eq!(report.pairs.len(), 1);
                assert_eq!(report.pairs[0].outcome, "care");
                assert_eq!(report.pairs[0].group, "male∧r1");
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn zero_mass_scope_cells_contribute_nothing() {
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("g", Role::Protected, vec!["p".into(), "q".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        // All mass sits in scope cell g = p.
        let d = JointDistribution::from_probabilities(
            schema,
            vec![0.4, 0.2, 0.0, 0.0, 0.1, 0.3, 0.0, 0.0],
        )
        .unwrap();
        let eq = outcome_equalize(&d, Some(&ScopeSpec::new(["g"]))).unwrap();
        for s in 0..2 {
            for w in 0..2 {
                assert_eq!(eq.probability(s, 0, 2 + w), 0.0);
            }
        }
        let (_, checks): (Vec<_>, Vec<_>) =
            verify_scoped_insensitivity(&eq, &ScopeSpec::new(["g"]), 1e-10)
                .unwrap()
                .into_iter()
                .unzip();
        assert!(checks[0].as_ref().unwrap().pass);
        assert!(checks[1].is_none());
    }

    #[test]
    fn equalize_is_idempotent() {
        let eq1 = outcome_equalize(&fixture(), None).unwrap();
        let eq2 = outcome_equalize(&eq1, None).unwrap();
        for (a, b) in eq1.probabilities().iter().zip(eq2.probabilities()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn support_is_preserved_exactly() {
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("u", Role::Unprotected, vec!["x".into(), "y".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        // (1, y, a) is empty but Pr(1, a) > 0: feasible, zero must survive.
        let d = JointDistribution::from_probabilities(
            schema,
            vec![0.2, 0.1, 0.0, 0.1, 0.2, 0.1, 0.1, 0.2],
        )
        .unwrap();
        let eq = outcome_equalize(&d, None).unwrap();
        for (p, x) in d.probabilities().iter().zip(eq.probabilities()) {
            if *p == 0.0 {
                assert_eq!(*x, 0.0);
            }
        }
        // No InfiniteDivergence on the equalizer's output.
        assert!(information_cost(&d, &eq).is_ok());
    }
}
