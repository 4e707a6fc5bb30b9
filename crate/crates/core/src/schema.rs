//! Variable schemas for finite discrete joint distributions.
//!
//! A schema is an ordered list of categorical variables, each tagged with a
//! role: the single `Outcome` variable, zero or more `Unprotected` predictors,
//! and one or more `Protected` attributes. The three flattened axes of a joint
//! table — outcome levels, the cartesian product of unprotected levels, and
//! the cartesian product of protected levels — are derived deterministically
//! from the declaration order.

use crate::error::{Error, Result};

/// The role a variable plays in the decorrelation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// The policy-relevant variable being predicted.
    Outcome,
    /// An ordinary predictor.
    Unprotected,
    /// An attribute on which decisions must not depend.
    Protected,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Outcome => "outcome",
            Role::Unprotected => "unprotected",
            Role::Protected => "protected",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "outcome" => Some(Role::Outcome),
            "unprotected" => Some(Role::Unprotected),
            "protected" => Some(Role::Protected),
            _ => None,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single categorical variable: name, role, and its ordered level labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    name: String,
    role: Role,
    levels: Vec<String>,
}

/// Labels double as tokens in the text formats (CSV cells, comma-separated
/// level lists, bracketed row keys), so a small character set is reserved.
fn check_label(kind: &str, label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::InvalidSchema(format!("{kind} label is empty")));
    }
    if label != label.trim() {
        return Err(Error::InvalidSchema(format!(
            "{kind} label {label:?} has leading or trailing whitespace"
        )));
    }
    if label.chars().any(|c| ",#[]".contains(c) || c.is_control()) {
        return Err(Error::InvalidSchema(format!(
            "{kind} label {label:?} contains a reserved character (comma, '#', brackets, or control)"
        )));
    }
    Ok(())
}

impl Variable {
    pub fn new(name: impl Into<String>, role: Role, levels: Vec<String>) -> Result<Self> {
        let name = name.into();
        check_label("variable", &name)?;
        if levels.is_empty() {
            return Err(Error::InvalidSchema(format!(
                "variable {name:?} has no levels"
            )));
        }
        for level in &levels {
            check_label("level", level)?;
        }
        for (i, a) in levels.iter().enumerate() {
            if levels[..i].contains(a) {
                return Err(Error::InvalidSchema(format!(
                    "variable {name:?} declares level {a:?} twice"
                )));
            }
        }
        Ok(Variable { name, role, levels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    /// Index of a level label, if declared.
    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// One level index per schema variable, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(indices: Vec<usize>) -> Self {
        Assignment(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// An ordered, validated list of variables with derived axis layout.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableSchema {
    variables: Vec<Variable>,
    outcome: usize,
    unprotected: Vec<usize>,
    protected_vars: Vec<usize>,
}

impl VariableSchema {
    /// Validates the role invariants: exactly one outcome variable and at
    /// least one protected variable. Variable names must be unique.
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|o| o.name == v.name) {
                return Err(Error::InvalidSchema(format!(
                    "variable name {:?} declared twice",
                    v.name
                )));
            }
        }
        let outcomes: Vec<usize> = indices_with_role(&variables, Role::Outcome);
        if outcomes.len() != 1 {
            return Err(Error::InvalidSchema(format!(
                "schema must declare exactly one outcome variable, found {}",
                outcomes.len()
            )));
        }
        let protected_vars = indices_with_role(&variables, Role::Protected);
        if protected_vars.is_empty() {
            return Err(Error::InvalidSchema(
                "schema must declare at least one protected variable".into(),
            ));
        }
        let unprotected = indices_with_role(&variables, Role::Unprotected);
        Ok(VariableSchema {
            outcome: outcomes[0],
            unprotected,
            protected_vars,
            variables,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<(usize, &Variable)> {
        self.variables
            .iter()
            .enumerate()
            .find(|(_, v)| v.name == name)
    }

    pub fn outcome_variable(&self) -> &Variable {
        &self.variables[self.outcome]
    }

    pub fn unprotected_variables(&self) -> impl Iterator<Item = &Variable> {
        self.unprotected.iter().map(|&i| &self.variables[i])
    }

    pub fn protected_variables(&self) -> impl Iterator<Item = &Variable> {
        self.protected_vars.iter().map(|&i| &self.variables[i])
    }

    /// Number of outcome levels.
    pub fn outcome_len(&self) -> usize {
        self.variables[self.outcome].levels.len()
    }

    /// Size of the flattened unprotected axis (1 when there are no
    /// unprotected variables).
    pub fn unprotected_len(&self) -> usize {
        self.unprotected
            .iter()
            .map(|&i| self.variables[i].levels.len())
            .product()
    }

    /// Size of the flattened protected axis.
    pub fn protected_len(&self) -> usize {
        self.protected_vars
            .iter()
            .map(|&i| self.variables[i].levels.len())
            .product()
    }

    /// Total number of joint cells.
    pub fn cell_count(&self) -> usize {
        self.outcome_len() * self.unprotected_len() * self.protected_len()
    }

    /// Flat index of a cell. Layout is row-major over (outcome, unprotected,
    /// protected): the protected index varies fastest.
    pub fn cell_index(&self, s: usize, u: usize, w: usize) -> usize {
        (s * self.unprotected_len() + u) * self.protected_len() + w
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    pub fn cell_coords(&self, cell: usize) -> (usize, usize, usize) {
        let w = cell % self.protected_len();
        let rest = cell / self.protected_len();
        let u = rest % self.unprotected_len();
        let s = rest / self.unprotected_len();
        (s, u, w)
    }

    pub fn validate_assignment(&self, assignment: &Assignment) -> Result<()> {
        let idx = assignment.indices();
        if idx.len() != self.variables.len() {
            return Err(Error::BadAssignment {
                detail: format!(
                    "expected {} indices, got {}",
                    self.variables.len(),
                    idx.len()
                ),
            });
        }
        for (i, (&ix, v)) in idx.iter().zip(&self.variables).enumerate() {
            if ix >= v.levels.len() {
                return Err(Error::BadAssignment {
                    detail: format!(
                        "index {ix} out of range for variable {:?} ({} levels) at position {i}",
                        v.name,
                        v.levels.len()
                    ),
                });
            }
        }
        Ok(())
    }

    /// Axis coordinates of a (valid) assignment.
    pub fn split_assignment(&self, assignment: &Assignment) -> (usize, usize, usize) {
        let idx = assignment.indices();
        let s = idx[self.outcome];
        let u = self.composite(&self.unprotected, idx);
        let w = self.composite(&self.protected_vars, idx);
        (s, u, w)
    }

    /// Assignment whose axis coordinates are (s, u, w).
    pub fn assignment_of(&self, s: usize, u: usize, w: usize) -> Assignment {
        let mut idx = vec![0usize; self.variables.len()];
        idx[self.outcome] = s;
        self.decompose(&self.unprotected, u, &mut idx);
        self.decompose(&self.protected_vars, w, &mut idx);
        Assignment(idx)
    }

    fn composite(&self, vars: &[usize], idx: &[usize]) -> usize {
        vars.iter()
            .fold(0, |acc, &i| acc * self.variables[i].levels.len() + idx[i])
    }

    fn decompose(&self, vars: &[usize], mut code: usize, idx: &mut [usize]) {
        for &i in vars.iter().rev() {
            let len = self.variables[i].levels.len();
            idx[i] = code % len;
            code /= len;
        }
    }

    pub fn outcome_label(&self, s: usize) -> &str {
        &self.variables[self.outcome].levels[s]
    }

    /// Display label of a composite unprotected cell ("·" when trivial).
    pub fn unprotected_label(&self, u: usize) -> String {
        self.joined_label(&self.unprotected, u)
    }

    /// Display label of a composite protected cell, e.g. "male∧r1".
    pub fn protected_label(&self, w: usize) -> String {
        self.joined_label(&self.protected_vars, w)
    }

    fn joined_label(&self, vars: &[usize], code: usize) -> String {
        if vars.is_empty() {
            return "·".to_string();
        }
        let mut idx = vec![0usize; self.variables.len()];
        self.decompose(vars, code, &mut idx);
        vars.iter()
            .map(|&i| self.variables[i].levels[idx[i]].as_str())
            .collect::<Vec<_>>()
            .join("∧")
    }

    /// Display label of a full joint cell, e.g. "(grad, fit, a)".
    pub fn cell_label(&self, s: usize, u: usize, w: usize) -> String {
        format!(
            "({}, {}, {})",
            self.outcome_label(s),
            self.unprotected_label(u),
            self.protected_label(w)
        )
    }
}

fn indices_with_role(variables: &[Variable], role: Role) -> Vec<usize> {
    variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.role == role)
        .map(|(i, _)| i)
        .collect()
}
