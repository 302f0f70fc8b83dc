//! Self-contained linear programming for the bidding models: a bounded-variable
//! revised simplex with sparse LU basis factorization, triangular crash,
//! composite (infeasibility-minimizing) phase 1 and Bland anti-cycling on ties.
//!
//! Problems are stated as `maximize c'x + offset` subject to sparse rows with
//! `<=`, `=`, `>=` senses and per-variable bounds (infinities allowed).

mod lu;
pub mod oracle;
mod simplex;

use thiserror::Error;

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Sense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// A linear program in maximization form.
///
/// Rows are stored sparsely (CSR). Variable bounds default to `[0, +inf)`;
/// use [`LinearProgram::set_bounds`] with `f64::NEG_INFINITY` /
/// `f64::INFINITY` for free or one-sided variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    objective_offset: f64,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    senses: Vec<Sense>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            objective_offset: 0.0,
            row_ptr: vec![0],
            row_cols: Vec::new(),
            row_vals: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.senses.len()
    }

    /// Sets the objective coefficient of a column (maximization).
    pub fn set_objective(&mut self, col: usize, coef: f64) {
        self.objective[col] = coef;
    }

    /// Adds to the objective coefficient of a column.
    pub fn add_objective(&mut self, col: usize, coef: f64) {
        self.objective[col] += coef;
    }

    /// Constant term added to the objective value (used to report income from
    /// decisions that were fixed before the program was built).
    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn add_objective_offset(&mut self, offset: f64) {
        self.objective_offset += offset;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.lower[col], self.upper[col])
    }

    /// Appends a row; `terms` are `(column, coefficient)` pairs. Returns the row index.
    pub fn add_row(&mut self, sense: Sense, rhs: f64, terms: &[(usize, f64)]) -> usize {
        for &(c, v) in terms {
            self.row_cols.push(c);
            self.row_vals.push(v);
        }
        self.row_ptr.push(self.row_cols.len());
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.senses.len() - 1
    }

    pub fn row(&self, i: usize) -> (Sense, f64, &[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (
            self.senses[i],
            self.rhs[i],
            &self.row_cols[a..b],
            &self.row_vals[a..b],
        )
    }

    /// Checks the structural invariants: matching dimensions, finite
    /// coefficients, finite rhs, lower <= upper, column indices in range.
    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err(LpError::DimensionMismatch(format!(
                "objective/bounds length must equal num_vars = {}",
                self.num_vars
            )));
        }
        if self.rhs.len() != self.senses.len() || self.row_ptr.len() != self.senses.len() + 1 {
            return Err(LpError::DimensionMismatch(
                "row metadata lengths disagree".into(),
            ));
        }
        for (j, &c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(LpError::InvalidProgram(format!(
                    "objective[{j}] is not finite"
                )));
            }
        }
        if !self.objective_offset.is_finite() {
            return Err(LpError::InvalidProgram("objective offset not finite".into()));
        }
        for j in 0..self.num_vars {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidProgram(format!("bounds of x{j} malformed")));
            }
            if l > u {
                return Err(LpError::InvalidProgram(format!(
                    "bounds of x{j} empty: {l} > {u}"
                )));
            }
        }
        for (k, (&c, &v)) in self.row_cols.iter().zip(&self.row_vals).enumerate() {
            if c >= self.num_vars {
                return Err(LpError::DimensionMismatch(format!(
                    "row entry {k} references column {c} >= {}",
                    self.num_vars
                )));
            }
            if !v.is_finite() {
                return Err(LpError::InvalidProgram(format!(
                    "coefficient for column {c} not finite"
                )));
            }
        }
        for (i, &b) in self.rhs.iter().enumerate() {
            if !b.is_finite() {
                return Err(LpError::InvalidProgram(format!("rhs[{i}] not finite")));
            }
        }
        Ok(())
    }

    /// Plain-text dump, one constraint per line, for debugging.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let term = |out: &mut String, first: &mut bool, v: f64, j: usize| {
            if *first {
                let _ = write!(out, "{v} x{j}");
                *first = false;
            } else if v < 0.0 {
                let _ = write!(out, " - {} x{j}", -v);
            } else {
                let _ = write!(out, " + {v} x{j}");
            }
        };
        s.push_str("maximize ");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut s, &mut first, c, j);
            }
        }
        if self.objective_offset != 0.0 {
            let _ = write!(s, " + {}", self.objective_offset);
        }
        if first {
            s.push('0');
        }
        s.push('\n');
        for i in 0..self.num_rows() {
            let (sense, rhs, cols, vals) = self.row(i);
            let _ = write!(s, "r{i}: ");
            let mut first = true;
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0.0 {
                    term(&mut s, &mut first, v, c);
                }
            }
            if first {
                s.push('0');
            }
            let _ = writeln!(s, " {sense} {rhs}");
        }
        for j in 0..self.num_vars {
            let _ = writeln!(s, "x{j} in [{}, {}]", self.lower[j], self.upper[j]);
        }
        s
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve. `x` holds the structural variables; for non-optimal
/// statuses it is the last iterate and `objective_value` is `-inf`
/// (infeasible) or `+inf` (unbounded).
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Allowed constraint/bound violation in the returned point.
    pub feasibility_tol: f64,
    /// Reduced-cost threshold below which a column is considered priced out.
    pub optimality_tol: f64,
    /// Entries smaller than this never serve as pivots.
    pub pivot_tol: f64,
    /// Iteration cap; `None` means `50 * (rows + cols)`.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            max_iterations: None,
        }
    }
}

/// Solves with default options.
pub fn solve(lp: &LinearProgram) -> Result<Solution, LpError> {
    solve_with(lp, &SolveOptions::default())
}

/// Solves with explicit options.
pub fn solve_with(lp: &LinearProgram, opts: &SolveOptions) -> Result<Solution, LpError> {
    lp.validate()?;
    simplex::solve(lp, opts)
}

pub use simplex::{Basis, SolveStats};

/// Solves and reports work counters (iterations, factorizations, kernel
/// timings); used by performance diagnostics.
pub fn solve_with_stats(
    lp: &LinearProgram,
    opts: &SolveOptions,
) -> Result<(Solution, SolveStats), LpError> {
    lp.validate()?;
    simplex::solve_with_stats(lp, opts)
}

/// Solves starting from the basis of a previously solved program with the
/// same shape, and returns the final basis for the next warm start plus the
/// work counters. A basis of the wrong shape is ignored (cold start).
pub fn solve_warm(
    lp: &LinearProgram,
    opts: &SolveOptions,
    warm: Option<&Basis>,
) -> Result<(Solution, Basis, SolveStats), LpError> {
    lp.validate()?;
    simplex::solve_warm(lp, opts, warm)
}

/// Residual report from replaying a point against the program definition.
/// Independent of the solver: recomputes every row from scratch.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub max_constraint_violation: f64,
    pub max_bound_violation: f64,
    pub objective_value: f64,
}

impl FeasibilityReport {
    pub fn is_within(&self, tol: f64) -> bool {
        self.max_constraint_violation <= tol && self.max_bound_violation <= tol
    }
}

/// Evaluates constraint and bound residuals of `x` against `lp`.
pub fn check_feasible(lp: &LinearProgram, x: &[f64]) -> Result<FeasibilityReport, LpError> {
    if x.len() != lp.num_vars {
        return Err(LpError::DimensionMismatch(format!(
            "point has {} entries, program has {} variables",
            x.len(),
            lp.num_vars
        )));
    }
    let mut max_row = 0.0f64;
    for i in 0..lp.num_rows() {
        let (sense, rhs, cols, vals) = lp.row(i);
        let ax: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        let viol = match sense {
            Sense::Le => ax - rhs,
            Sense::Ge => rhs - ax,
            Sense::Eq => (ax - rhs).abs(),
        };
        max_row = max_row.max(viol);
    }
    let mut max_bound = 0.0f64;
    for j in 0..lp.num_vars {
        max_bound = max_bound.max(lp.lower[j] - x[j]).max(x[j] - lp.upper[j]);
    }
    let mut obj = lp.objective_offset;
    for (j, &c) in lp.objective.iter().enumerate() {
        obj += c * x[j];
    }
    Ok(FeasibilityReport {
        max_constraint_violation: max_row.max(0.0),
        max_bound_violation: max_bound.max(0.0),
        objective_value: obj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_mentions_every_row() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 2.0);
        lp.add_row(Sense::Le, 4.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_row(Sense::Le, 2.0, &[(0, 1.0)]);
        let d = lp.dump();
        assert!(d.contains("r0:"));
        assert!(d.contains("r1:"));
        assert!(d.contains("maximize"));
    }

    #[test]
    fn validate_rejects_bad_bounds() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(lp.validate().is_err());
    }

    #[test]
    fn validate_rejects_out_of_range_column() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(Sense::Le, 1.0, &[(3, 1.0)]);
        assert!(matches!(
            lp.validate(),
            Err(LpError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn check_feasible_reports_constructed_violation() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(Sense::Le, 1.0, &[(0, 1.0), (1, 1.0)]);
        let report = check_feasible(&lp, &[1.0, 0.5]).unwrap();
        assert!((report.max_constraint_violation - 0.5).abs() < 1e-12);
    }
}
