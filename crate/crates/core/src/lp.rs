//! Sparse linear program container with bounded variables and named rows.
//!
//! The builder emits variables and rows in a fixed order; that order is part
//! of the determinism contract (the solver breaks ties by variable index).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Index of a variable in a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Index of a row in a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowId(pub usize);

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    /// Sparse coefficients, strictly increasing by variable index.
    pub coeffs: Vec<(VarId, f64)>,
}

/// A minimisation problem: `min cᵀx + offset` subject to the rows and bounds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub name: String,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Constant added to the objective (e.g. fixed O&M on carried-over
    /// capacity). Reported objectives always include it.
    pub objective_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate row name `{0}`")]
    DuplicateRow(String),
    #[error("variable `{name}` has infeasible bounds [{lower}, {upper}]")]
    InfeasibleBounds { name: String, lower: String, upper: String },
    #[error("variable `{0}` has a non-finite objective coefficient")]
    BadObjective(String),
    #[error("row `{row}` references unknown variable index {var}")]
    UnknownVariable { row: String, var: usize },
    #[error("row `{0}` has a non-finite coefficient or rhs")]
    BadCoefficient(String),
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        LinearProgram {
            name: name.into(),
            variables: Vec::new(),
            rows: Vec::new(),
            objective_offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            objective,
        });
        id
    }

    /// Adds a row. Coefficients may arrive in any order; they are sorted and
    /// duplicate variable entries are summed.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: f64,
        mut coeffs: Vec<(VarId, f64)>,
    ) -> RowId {
        coeffs.sort_by_key(|(v, _)| v.0);
        coeffs.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        coeffs.retain(|(_, c)| *c != 0.0);
        let id = RowId(self.rows.len());
        self.rows.push(Row {
            name: name.into(),
            sense,
            rhs,
            coeffs,
        });
        id
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    /// Name→id maps; both are bijections on a validated program.
    pub fn var_names(&self) -> BTreeMap<&str, VarId> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect()
    }

    pub fn row_names(&self) -> BTreeMap<&str, RowId> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.as_str(), RowId(i)))
            .collect()
    }

    /// Structural validation: unique names, sane bounds, finite data,
    /// in-range variable references. Returns every violation found.
    pub fn validate(&self) -> Result<(), Vec<LpError>> {
        let mut errors = Vec::new();
        let mut seen = BTreeMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if let Some(_prev) = seen.insert(v.name.as_str(), i) {
                errors.push(LpError::DuplicateVariable(v.name.clone()));
            }
            if v.lower > v.upper {
                errors.push(LpError::InfeasibleBounds {
                    name: v.name.clone(),
                    lower: fmt_f64(v.lower),
                    upper: fmt_f64(v.upper),
                });
            }
            if !v.objective.is_finite() {
                errors.push(LpError::BadObjective(v.name.clone()));
            }
        }
        let mut seen_rows = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(_prev) = seen_rows.insert(r.name.as_str(), i) {
                errors.push(LpError::DuplicateRow(r.name.clone()));
            }
            if !r.rhs.is_finite() {
                errors.push(LpError::BadCoefficient(r.name.clone()));
            }
            for (v, c) in &r.coeffs {
                if v.0 >= self.variables.len() {
                    errors.push(LpError::UnknownVariable {
                        row: r.name.clone(),
                        var: v.0,
                    });
                }
                if !c.is_finite() {
                    errors.push(LpError::BadCoefficient(r.name.clone()));
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Evaluates a row's left-hand side at a point.
    pub fn row_activity(&self, row: RowId, values: &[f64]) -> f64 {
        self.rows[row.0]
            .coeffs
            .iter()
            .map(|(v, c)| c * values[v.0])
            .sum()
    }

    /// Objective value at a point, including the constant offset.
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        let linear: f64 = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum();
        linear + self.objective_offset
    }
}

pub(crate) fn fmt_errors(errors: &[LpError]) -> String {
    use alloc::string::ToString;
    let mut out = String::new();
    for (i, e) in errors.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&e.to_string());
    }
    out
}

pub(crate) fn fmt_f64(x: f64) -> String {
    use alloc::string::ToString;
    if x == f64::INFINITY {
        String::from("+inf")
    } else if x == f64::NEG_INFINITY {
        String::from("-inf")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_row_sorts_and_merges_coefficients() {
        let mut lp = LinearProgram::new("t");
        let a = lp.add_var("a", 0.0, 1.0, 1.0);
        let b = lp.add_var("b", 0.0, 1.0, 1.0);
        let r = lp.add_row(
            "r",
            Sense::Le,
            1.0,
            alloc::vec![(b, 2.0), (a, 1.0), (b, 3.0)],
        );
        assert_eq!(lp.row(r).coeffs, alloc::vec![(a, 1.0), (b, 5.0)]);
    }

    #[test]
    fn validate_reports_every_violation() {
        let mut lp = LinearProgram::new("t");
        lp.add_var("x", 2.0, 1.0, 1.0);
        lp.add_var("x", 0.0, 1.0, f64::NAN);
        lp.add_row("r", Sense::Eq, 0.0, alloc::vec![(VarId(7), 1.0)]);
        let errors = lp.validate().unwrap_err();
        assert_eq!(errors.len(), 4);
    }
}
