//! Sparse linear programs with bounded variables, an embedded revised simplex
//! solver and a backend-independent optimality certificate.

mod certify;
pub mod dump;
mod lu;
mod refine;
mod simplex;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use certify::{certify, Certificate};
pub use refine::minmax_row_duals;
pub use simplex::{RevisedSimplex, SimplexOptions};

/// Index of a variable inside a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of a constraint row inside a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub tag: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub tag: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("variable `{tag}` has inverted bounds [{lower}, {upper}]")]
    InvertedBounds { tag: String, lower: f64, upper: f64 },
    #[error("`{tag}`: {what} is not a finite number")]
    NonFinite { tag: String, what: &'static str },
    #[error("constraint `{tag}` references unknown variable #{var}")]
    UnknownVariable { tag: String, var: usize },
    #[error("duplicate tag `{0}`")]
    DuplicateTag(String),
    #[error("iteration limit of {0} reached before convergence")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// A minimization problem `min c·x + offset` over sense-tagged sparse rows and
/// bounded variables. Variable and row tags are unique and are the join keys
/// used by the analytics layer.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective_offset: f64,
    var_tags: HashMap<String, VarId>,
    row_tags: HashMap<String, RowId>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        lower: f64,
        upper: f64,
        objective: f64,
        tag: impl Into<String>,
    ) -> Result<VarId, LpError> {
        let tag = tag.into();
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY
        {
            return Err(LpError::NonFinite { tag, what: "bound" });
        }
        if !objective.is_finite() {
            return Err(LpError::NonFinite { tag, what: "objective coefficient" });
        }
        if lower > upper {
            return Err(LpError::InvertedBounds { tag, lower, upper });
        }
        if self.var_tags.contains_key(&tag) {
            return Err(LpError::DuplicateTag(tag));
        }
        let id = VarId(self.variables.len());
        self.var_tags.insert(tag.clone(), id);
        self.variables.push(Variable { tag, lower, upper, objective });
        Ok(id)
    }

    /// Registers a row. Repeated variables are merged and exact zeros dropped,
    /// keeping first-occurrence order.
    pub fn add_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
        tag: impl Into<String>,
    ) -> Result<RowId, LpError> {
        let tag = tag.into();
        if !rhs.is_finite() {
            return Err(LpError::NonFinite { tag, what: "right-hand side" });
        }
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        let mut slot: HashMap<VarId, usize> = HashMap::new();
        for (v, a) in terms {
            if v.0 >= self.variables.len() {
                return Err(LpError::UnknownVariable { tag, var: v.0 });
            }
            if !a.is_finite() {
                return Err(LpError::NonFinite { tag, what: "coefficient" });
            }
            match slot.get(&v) {
                Some(&k) => merged[k].1 += a,
                None => {
                    slot.insert(v, merged.len());
                    merged.push((v, a));
                }
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        if self.row_tags.contains_key(&tag) {
            return Err(LpError::DuplicateTag(tag));
        }
        let id = RowId(self.constraints.len());
        self.row_tags.insert(tag.clone(), id);
        self.constraints.push(Constraint { tag, terms: merged, sense, rhs });
        Ok(id)
    }

    pub fn set_objective(&mut self, var: VarId, coefficient: f64) {
        self.variables[var.0].objective = coefficient;
    }

    pub fn add_objective(&mut self, var: VarId, coefficient: f64) {
        self.variables[var.0].objective += coefficient;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<(), LpError> {
        let v = &mut self.variables[var.0];
        if lower > upper {
            return Err(LpError::InvertedBounds { tag: v.tag.clone(), lower, upper });
        }
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraint(&self, id: RowId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_by_tag(&self, tag: &str) -> Option<VarId> {
        self.var_tags.get(tag).copied()
    }

    pub fn constraint_by_tag(&self, tag: &str) -> Option<RowId> {
        self.row_tags.get(tag).copied()
    }

    /// `c·x + offset` at an arbitrary point.
    pub fn evaluate_objective(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| v.objective * xv)
            .sum::<f64>()
            + self.objective_offset
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        RevisedSimplex::default().solve(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

/// Evidence attached to a non-optimal outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Rows and variables still violated when phase one stalled.
    Infeasibility { rows: Vec<RowId>, variables: Vec<VarId> },
    /// A variable whose improving direction has no limiting bound.
    UnboundedRay { variable: VarId },
}

/// Primal values, row duals and reduced costs, all in the units of the
/// original (unscaled) program. `dual[i]` is the sensitivity of the optimal
/// objective to the right-hand side of row `i`; `reduced_cost[j] = c_j - y·A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub reduced_cost: Vec<f64>,
    pub iterations: usize,
    pub witness: Option<Witness>,
    /// Basic columns at termination: `j` for variable `j`, `n + i` for the
    /// logical of row `i`, where `n` is the number of variables.
    pub basis: Vec<usize>,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.primal[v.0]
    }

    pub fn row_dual(&self, r: RowId) -> f64 {
        self.dual[r.0]
    }

    /// Replaces the row duals and recomputes reduced costs against `lp`.
    pub fn with_duals(mut self, lp: &LinearProgram, dual: Vec<f64>) -> Self {
        self.reduced_cost = reduced_costs(lp, &dual);
        self.dual = dual;
        self
    }
}

/// `c_j - Σ_i y_i A_ij` for every variable.
pub fn reduced_costs(lp: &LinearProgram, dual: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = lp.variables.iter().map(|v| v.objective).collect();
    for (row, &y) in lp.constraints.iter().zip(dual) {
        if y != 0.0 {
            for &(v, a) in &row.terms {
                d[v.0] -= y * a;
            }
        }
    }
    d
}

/// A solver backend. The certificate checker does not depend on which one
/// produced the solution.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<Solution, LpError>;
}
