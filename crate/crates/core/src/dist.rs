//! Exact algebra on finite discrete joint distributions: construction,
//! marginalization, conditioning, KL divergence, and mutual information.
//!
//! All probabilities are stored in linear space as a dense tensor over the
//! flattened (outcome, unprotected, protected) axes. All quantities of
//! information are in nats (natural log), with the 0·ln 0 ≡ 0 convention.

use crate::error::{Error, Result};
use crate::schema::{Assignment, VariableSchema};

/// Slack allowed when checking that probabilities sum to one at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// One of the three flattened axes of a joint table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Outcome,
    Unprotected,
    Protected,
}

impl Axis {
    fn len(self, schema: &VariableSchema) -> usize {
        match self {
            Axis::Outcome => schema.outcome_len(),
            Axis::Unprotected => schema.unprotected_len(),
            Axis::Protected => schema.protected_len(),
        }
    }

    fn coord(self, coords: (usize, usize, usize)) -> usize {
        match self {
            Axis::Outcome => coords.0,
            Axis::Unprotected => coords.1,
            Axis::Protected => coords.2,
        }
    }
}

/// Canonical axis order used for marginal and conditional tables.
const AXIS_ORDER: [Axis; 3] = [Axis::Outcome, Axis::Unprotected, Axis::Protected];

/// A normalized probability tensor over the cells of a [`VariableSchema`].
///
/// Immutable after construction; every operation returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    schema: VariableSchema,
    mass: Vec<f64>,
}

impl JointDistribution {
    /// Builds a distribution from a dense row-major probability list
    /// (protected index fastest, then unprotected, then outcome).
    pub fn from_probabilities(schema: VariableSchema, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != schema.cell_count() {
            return Err(Error::WrongCellCount {
                expected: schema.cell_count(),
                found: mass.len(),
            });
        }
        for (cell, &p) in mass.iter().enumerate() {
            if p < 0.0 {
                let (s, u, w) = schema.cell_coords(cell);
                return Err(Error::NegativeMass {
                    cell: schema.cell_label(s, u, w),
                    value: p,
                });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized {
                sum,
                tol: NORMALIZATION_TOLERANCE,
            });
        }
        Ok(JointDistribution { schema, mass })
    }

    /// Builds a distribution from sparse (assignment, probability) entries.
    /// Unlisted cells default to zero; duplicate cells are rejected.
    pub fn from_table(schema: VariableSchema, entries: &[(Assignment, f64)]) -> Result<Self> {
        let mut mass = vec![0.0; schema.cell_count()];
        let mut seen = vec![false; schema.cell_count()];
        for (assignment, p) in entries {
            schema.validate_assignment(assignment)?;
            let (s, u, w) = schema.split_assignment(assignment);
            let cell = schema.cell_index(s, u, w);
            if seen[cell] {
                return Err(Error::DuplicateCell {
                    cell: schema.cell_label(s, u, w),
                });
            }
            seen[cell] = true;
            mass[cell] = *p;
        }
        Self::from_probabilities(schema, mass)
    }

    pub fn schema(&self) -> &VariableSchema {
        &self.schema
    }

    /// Dense row-major cell probabilities.
    pub fn probabilities(&self) -> &[f64] {
        &self.mass
    }

    pub fn probability(&self, s: usize, u: usize, w: usize) -> f64 {
        self.mass[self.schema.cell_index(s, u, w)]
    }

    /// Pr(s): marginal over the outcome axis.
    pub fn outcome_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.schema.outcome_len()];
        for (cell, &p) in self.mass.iter().enumerate() {
            out[self.schema.cell_coords(cell).0] += p;
        }
        out
    }

    /// Pr(w): marginal over the protected axis.
    pub fn protected_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.schema.protected_len()];
        for (cell, &p) in self.mass.iter().enumerate() {
            out[self.schema.cell_coords(cell).2] += p;
        }
        out
    }

    /// Pr(s, w): joint marginal of outcome and protected axes,
    /// indexed `s * protected_len + w`.
    pub fn outcome_protected_marginal(&self) -> Vec<f64> {
        let w_len = self.schema.protected_len();
        let mut out = vec![0.0; self.schema.outcome_len() * w_len];
        for (cell, &p) in self.mass.iter().enumerate() {
            let (s, _, w) = self.schema.cell_coords(cell);
            out[s * w_len + w] += p;
        }
        out
    }

    /// Sums out every axis not in `keep`. The result's axes follow the
    /// canonical (outcome, unprotected, protected) order.
    pub fn marginal(&self, keep: &[Axis]) -> Result<ProbTable> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let axes: Vec<Axis> = AXIS_ORDER
            .into_iter()
            .filter(|a| keep.contains(a))
            .collect();
        let shape: Vec<usize> = axes.iter().map(|a| a.len(&self.schema)).collect();
        let mut values = vec![0.0; shape.iter().product()];
        for (cell, &p) in self.mass.iter().enumerate() {
            let coords = self.schema.cell_coords(cell);
            values[flat_coord(&axes, &shape, coords)] += p;
        }
        Ok(ProbTable {
            axes,
            shape,
            values,
        })
    }

    /// Pr(target | given). Rows are indexed by the given-cell; a row whose
    /// given-cell has zero marginal mass is `None` (undefined), never
    /// fabricated.
    pub fn conditional(&self, target: &[Axis], given: &[Axis]) -> Result<ConditionalTable> {
        if target.is_empty() || given.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        if target.iter().any(|a| given.contains(a)) {
            return Err(Error::OverlappingAxes);
        }
        let target_axes: Vec<Axis> = AXIS_ORDER
            .into_iter()
            .filter(|a| target.contains(a))
            .collect();
        let given_axes: Vec<Axis> = AXIS_ORDER
            .into_iter()
            .filter(|a| given.contains(a))
            .collect();
        let target_shape: Vec<usize> = target_axes.iter().map(|a| a.len(&self.schema)).collect();
        let given_shape: Vec<usize> = given_axes.iter().map(|a| a.len(&self.schema)).collect();
        let target_len: usize = target_shape.iter().product();
        let given_len: usize = given_shape.iter().product();

        let mut joint = vec![0.0; given_len * target_len];
        let mut given_mass = vec![0.0; given_len];
        for (cell, &p) in self.mass.iter().enumerate() {
            let coords = self.schema.cell_coords(cell);
            let t = flat_coord(&target_axes, &target_shape, coords);
            let g = flat_coord(&given_axes, &given_shape, coords);
            joint[g * target_len + t] += p;
            given_mass[g] += p;
        }
        let rows = (0..given_len)
            .map(|g| {
                if given_mass[g] > 0.0 {
                    Some(
                        joint[g * target_len..(g + 1) * target_len]
                            .iter()
                            .map(|&x| x / given_mass[g])
                            .collect(),
                    )
                } else {
                    None
                }
            })
            .collect();
        Ok(ConditionalTable {
            target_axes,
            given_axes,
            target_shape,
            given_shape,
            rows,
        })
    }

    /// Σ p·ln(p/q) in nats, with 0·ln(0/q) ≡ 0. Requires identical schemas
    /// and supp(p) ⊆ supp(q); mass escaping the support of `other` is an
    /// [`Error::InfiniteDivergence`].
    pub fn kl_divergence(&self, other: &JointDistribution) -> Result<f64> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch);
        }
        let mut sum = 0.0;
        for (cell, (&p, &q)) in self.mass.iter().zip(&other.mass).enumerate() {
            if p > 0.0 {
                if q == 0.0 {
                    let (s, u, w) = self.schema.cell_coords(cell);
                    return Err(Error::InfiniteDivergence {
                        cell: self.schema.cell_label(s, u, w),
                        p_mass: p,
                    });
                }
                sum += p * (p / q).ln();
            }
        }
        Ok(sum)
    }

    /// I(x; y) in nats: the KL divergence between the (x, y) marginal and
    /// the product of its own single-axis marginals. Zero iff independent.
    pub fn mutual_information(&self, x: Axis, y: Axis) -> Result<f64> {
        if x == y {
            return Err(Error::SameAxis);
        }
        let pair = self.marginal(&[x, y])?;
        let (nx, ny) = (pair.shape[0], pair.shape[1]);
        let mut mx = vec![0.0; nx];
        let mut my = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                mx[i] += pair.values[i * ny + j];
                my[j] += pair.values[i * ny + j];
            }
        }
        let mut sum = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let p = pair.values[i * ny + j];
                if p > 0.0 {
                    sum += p * (p / (mx[i] * my[j])).ln();
                }
            }
        }
        Ok(sum.max(0.0))
    }
}

fn flat_coord(axes: &[Axis], shape: &[usize], coords: (usize, usize, usize)) -> usize {
    axes.iter()
        .zip(shape)
        .fold(0, |acc, (a, &n)| acc * n + a.coord(coords))
}

/// A probability table over a subset of the three axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    axes: Vec<Axis>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl ProbTable {
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Row-major values in axis order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.shape.len(), "coordinate arity mismatch");
        let flat = idx
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i);
        self.values[flat]
    }
}

/// Pr(target | given) with one row per given-cell; undefined rows are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    target_axes: Vec<Axis>,
    given_axes: Vec<Axis>,
    target_shape: Vec<usize>,
    given_shape: Vec<usize>,
    rows: Vec<Option<Vec<f64>>>,
}

impl ConditionalTable {
    pub fn target_axes(&self) -> &[Axis] {
        &self.target_axes
    }

    pub fn given_axes(&self) -> &[Axis] {
        &self.given_axes
    }

    /// Distribution over target cells for one given-cell, or `None` when the
    /// given-cell has zero mass.
    pub fn row(&self, given: &[usize]) -> Option<&[f64]> {
        assert_eq!(given.len(), self.given_shape.len(), "coordinate arity mismatch");
        let flat = given
            .iter()
            .zip(&self.given_shape)
            .fold(0, |acc, (&i, &n)| acc * n + i);
        self.rows[flat].as_deref()
    }

    pub fn rows(&self) -> &[Option<Vec<f64>>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Role, Variable};

    pub(crate) fn sw_schema() -> VariableSchema {
        VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap()
    }

    /// The worked 2×1×2 fixture: {(1,a):0.4, (0,a):0.1, (1,b):0.2, (0,b):0.3}.
    pub(crate) fn fixture() -> JointDistribution {
        JointDistribution::from_table(
            sw_schema(),
            &[
                (Assignment::new(vec![0, 0]), 0.4),
                (Assignment::new(vec![1, 0]), 0.1),
                (Assignment::new(vec![0, 1]), 0.2),
                (Assignment::new(vec![1, 1]), 0.3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn from_table_accepts_the_fixture() {
        let d = fixture();
        assert_eq!(d.probabilities(), &[0.4, 0.2, 0.1, 0.3]);
        assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn from_table_rejects_bad_input() {
        let short = JointDistribution::from_table(
            sw_schema(),
            &[
                (Assignment::new(vec![0, 0]), 0.4),
                (Assignment::new(vec![1, 0]), 0.1),
                (Assignment::new(vec![0, 1]), 0.2),
                (Assignment::new(vec![1, 1]), 0.2),
            ],
        );
        assert!(matches!(short, Err(Error::NotNormalized { .. })));

        let dup = JointDistribution::from_table(
            sw_schema(),
            &[
                (Assignment::new(vec![0, 0]), 0.5),
                (Assignment::new(vec![0, 0]), 0.5),
            ],
        );
        assert!(matches!(dup, Err(Error::DuplicateCell { .. })));

        let neg = JointDistribution::from_probabilities(sw_schema(), vec![1.2, -0.2, 0.0, 0.0]);
        assert!(matches!(neg, Err(Error::NegativeMass { .. })));

        let bad = JointDistribution::from_table(sw_schema(), &[(Assignment::new(vec![2, 0]), 1.0)]);
        assert!(matches!(bad, Err(Error::BadAssignment { .. })));
    }

    #[test]
    fn point_distribution_on_single_cell_schema() {
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["x".into()]).unwrap(),
            Variable::new("u", Role::Unprotected, vec!["y".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["z".into()]).unwrap(),
        ])
        .unwrap();
        let d = JointDistribution::from_probabilities(schema, vec![1.0]).unwrap();
        assert_eq!(d.probabilities(), &[1.0]);
    }

    #[test]
    fn marginals_match_hand_summation() {
        let d = fixture();
        let s = d.marginal(&[Axis::Outcome]).unwrap();
        assert!((s.get(&[0]) - 0.6).abs() < 1e-12);
        assert!((s.get(&[1]) - 0.4).abs() < 1e-12);
        let w = d.marginal(&[Axis::Protected]).unwrap();
        assert!((w.get(&[0]) - 0.5).abs() < 1e-12);
        assert!((w.get(&[1]) - 0.5).abs() < 1e-12);
        assert!(matches!(d.marginal(&[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn full_marginal_is_identity() {
        let d = fixture();
        let all = d
            .marginal(&[Axis::Outcome, Axis::Unprotected, Axis::Protected])
            .unwrap();
        assert_eq!(all.values(), d.probabilities());
    }

    #[test]
    fn marginal_consistency() {
        let d = fixture();
        let via_sw = d.marginal(&[Axis::Outcome, Axis::Protected]).unwrap();
        let s_direct = d.marginal(&[Axis::Outcome]).unwrap();
        for s in 0..2 {
            let from_sw: f64 = (0..2).map(|w| via_sw.get(&[s, w])).sum();
            assert!((from_sw - s_direct.get(&[s])).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_matches_hand_division() {
        let d = fixture();
        let c = d.conditional(&[Axis::Outcome], &[Axis::Protected]).unwrap();
        let row_a = c.row(&[0]).unwrap();
        let row_b = c.row(&[1]).unwrap();
        assert!((row_a[0] - 0.8).abs() < 1e-12);
        assert!((row_b[0] - 0.4).abs() < 1e-12);
        assert!((row_a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_flags_zero_mass_rows_undefined() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.6, 0.0, 0.4, 0.0])
            .unwrap();
        let c = d.conditional(&[Axis::Outcome], &[Axis::Protected]).unwrap();
        assert!(c.row(&[0]).is_some());
        assert!(c.row(&[1]).is_none());
    }

    #[test]
    fn conditional_rejects_overlap() {
        let d = fixture();
        assert!(matches!(
            d.conditional(&[Axis::Outcome], &[Axis::Outcome]),
            Err(Error::OverlappingAxes)
        ));
    }

    #[test]
    fn uniform_conditional_equals_uniform_marginal() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.25; 4]).unwrap();
        let c = d.conditional(&[Axis::Outcome], &[Axis::Protected]).unwrap();
        for w in 0..2 {
            for &p in c.row(&[w]).unwrap() {
                assert!((p - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let d = fixture();
        assert_eq!(d.kl_divergence(&d).unwrap(), 0.0);
    }

    #[test]
    fn kl_matches_direct_evaluation() {
        // Two-cell p = (0.5, 0.5), q = (0.25, 0.75):
        // 0.5·ln 2 + 0.5·ln(2/3) = 0.143841036225890.
        let schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into()]).unwrap(),
            Variable::new("w", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        let p = JointDistribution::from_probabilities(schema.clone(), vec![0.5, 0.5]).unwrap();
        let q = JointDistribution::from_probabilities(schema, vec![0.25, 0.75]).unwrap();
        assert!((p.kl_divergence(&q).unwrap() - 0.143841036225890).abs() < 1e-12);
    }

    #[test]
    fn kl_detects_escaping_support() {
        let p = JointDistribution::from_probabilities(sw_schema(), vec![0.4, 0.2, 0.1, 0.3])
            .unwrap();
        let q = JointDistribution::from_probabilities(sw_schema(), vec![0.5, 0.0, 0.2, 0.3])
            .unwrap();
        assert!(matches!(
            p.kl_divergence(&q),
            Err(Error::InfiniteDivergence { .. })
        ));
    }

    #[test]
    fn kl_rejects_schema_mismatch() {
        let d = fixture();
        let other_schema = VariableSchema::new(vec![
            Variable::new("s", Role::Outcome, vec!["1".into(), "0".into()]).unwrap(),
            Variable::new("g", Role::Protected, vec!["a".into(), "b".into()]).unwrap(),
        ])
        .unwrap();
        let q =
            JointDistribution::from_probabilities(other_schema, vec![0.25; 4]).unwrap();
        assert!(matches!(d.kl_divergence(&q), Err(Error::SchemaMismatch)));
    }

    #[test]
    fn mutual_information_of_product_is_zero() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.3, 0.3, 0.2, 0.2])
            .unwrap();
        assert!(d.mutual_information(Axis::Outcome, Axis::Protected).unwrap() < 1e-12);
    }

    #[test]
    fn mutual_information_matches_hand_values() {
        let d = JointDistribution::from_probabilities(sw_schema(), vec![0.4, 0.1, 0.1, 0.4])
            .unwrap();
        let mi = d.mutual_information(Axis::Outcome, Axis::Protected).unwrap();
        assert!((mi - 0.192744757021757).abs() < 1e-12);

        let corr = JointDistribution::from_probabilities(sw_schema(), vec![0.5, 0.0, 0.0, 0.5])
            .unwrap();
        let mi = corr
            .mutual_information(Axis::Outcome, Axis::Protected)
            .unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_rejects_same_axis() {
        let d = fixture();
        assert!(matches!(
            d.mutual_information(Axis::Outcome, Axis::Outcome),
            Err(Error::SameAxis)
        ));
    }

    #[test]
    fn mutual_information_is_symmetric() {
        let d = fixture();
        let a = d.mutual_information(Axis::Outcome, Axis::Protected).unwrap();
        let b = d.mutual_information(Axis::Protected, Axis::Outcome).unwrap();
        assert_eq!(a, b);
    }

    /// I(S;W) must equal KL(SW marginal, product of marginals) term for term.
    #[test]
    fn chain_identity_is_exact() {
        let d = fixture();
        let pair = d.marginal(&[Axis::Outcome, Axis::Protected]).unwrap();
        let (nx, ny) = (pair.shape()[0], pair.shape()[1]);
        let mut mx = vec![0.0; nx];
        let mut my = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                mx[i] += pair.values()[i * ny + j];
                my[j] += pair.values()[i * ny + j];
            }
        }
        let joint =
            JointDistribution::from_probabilities(sw_schema(), pair.values().to_vec()).unwrap();
        let product: Vec<f64> = (0..nx)
            .flat_map(|i| (0..ny).map(move |j| (i, j)))
            .map(|(i, j)| mx[i] * my[j])
            .collect();
        let product = JointDistribution::from_probabilities(sw_schema(), product).unwrap();
        let via_kl = joint.kl_divergence(&product).unwrap();
        let via_mi = d.mutual_information(Axis::Outcome, Axis::Protected).unwrap();
        assert_eq!(via_kl, via_mi);
    }
}
