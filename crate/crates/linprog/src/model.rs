use std::fmt;

use thiserror::Error;

/// Index of a column in a [`LinearProgram`].
pub type VarId = usize;

/// Sense of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One sparse constraint row `coeffs · x (relation) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(VarId),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("row {row} references unknown variable {var}")]
    UnknownVariable { row: usize, var: VarId },
    #[error("basis factorisation failed repeatedly")]
    Numerical,
}

/// A minimisation program with box bounds and optional integrality marks.
///
/// `min c·x  s.t.  rows, lower <= x <= upper`, with `lower` allowed to be
/// `-inf` and `upper` allowed to be `+inf`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub rows: Vec<Constraint>,
    /// Constant added to every reported objective value.
    pub objective_offset: f64,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> VarId {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(false);
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, cost: f64) -> VarId {
        let v = self.add_var(cost, 0.0, 1.0);
        self.integer[v] = true;
        v
    }

    pub fn add_row(&mut self, coeffs: Vec<(VarId, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }

    /// Checks the structural invariants: finite data, ordered bounds, valid indices.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(LpError::NonFinite("column arrays of unequal length"));
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.objective_offset.is_finite() {
            return Err(LpError::NonFinite("objective"));
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(LpError::NonFinite("bounds"));
            }
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::InvertedBounds(j));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite("right-hand side"));
            }
            for &(var, a) in &row.coeffs {
                if var >= n {
                    return Err(LpError::UnknownVariable { row: i, var });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite("constraint coefficient"));
                }
            }
        }
        Ok(())
    }

    /// Objective value of `x`, including the constant offset.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest violation of any row or bound by `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let act = self.row_activity(i, x);
            let viol = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Same program with every integrality mark cleared.
    pub fn relaxed(&self) -> LinearProgram {
        let mut lp = self.clone();
        lp.integer.iter_mut().for_each(|b| *b = false);
        lp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    /// Branch-and-bound stopped on its time or node budget; `x` holds the
    /// incumbent when one was found.
    TimeLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterLimit => "iteration-limit",
            Status::TimeLimit => "time-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    /// Objective of `x`; `+inf` when no point is available.
    pub objective: f64,
    pub x: Vec<f64>,
    /// Simplex pivots (summed over all nodes for branch-and-bound).
    pub iterations: usize,
    /// Branch-and-bound nodes processed; 1 for a plain LP solve.
    pub nodes: usize,
    /// Best proven lower bound. Equal to `objective` when optimal.
    pub bound: f64,
}

impl LpSolution {
    pub(crate) fn without_point(status: Status, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::INFINITY,
            x: Vec::new(),
            iterations,
            nodes: 1,
            bound: f64::NEG_INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// True when every entry of `x` is within `tol` of an integer.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.x.iter().all(|v| (v - v.round()).abs() <= tol)
    }
}
