//! Linear programs in standard equality form
//!
//! ```text
//! minimize c^T x  subject to  A x = b,  x >= 0
//! ```
//!
//! solved by a revised simplex method ([`solve`]) or, for small instances, by
//! an exact rational tableau simplex ([`solve_exact`]). Objective entries may
//! be `+inf`; those variables are fixed at zero before solving, and every
//! certificate refers to the remaining columns.

mod exact;
mod mps;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{solve_exact, solve_rational, ExactLpResult, RationalProgram, EXACT_COLUMN_LIMIT};
pub use mps::write_mps;
pub use simplex::{solve, solve_with};

/// Primal feasibility tolerance.
pub const TAU_FEAS: f64 = 1e-9;
/// Duality gap tolerance.
pub const TAU_GAP: f64 = 1e-8;
/// Minimum margin `y^T b` of an infeasibility certificate.
pub const TAU_FARKAS: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    Invalid(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("feasibility is numerically ambiguous: phase-one residual {residual:e}, certificate margin {margin:e}")]
    Ambiguous { residual: f64, margin: f64 },
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("{columns} columns exceed the exact solver limit of {limit}")]
    TooLarge { columns: usize, limit: usize },
}

/// Compressed sparse column storage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Duplicates are summed; explicit zeros are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, LpError> {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &t {
            if i >= rows || j >= cols {
                return Err(LpError::Invalid(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !v.is_finite() {
                return Err(LpError::Invalid(format!("entry ({i}, {j}) = {v}")));
            }
        }
        t.sort_by_key(|&(i, j, _)| (j, i));
        let mut col_ptr = vec![0; cols + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((i, j));
            row_idx.push(i);
            values.push(v);
            col_ptr[j + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut m = Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, LpError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LpError::Invalid("ragged dense matrix".into()));
        }
        Self::from_triplets(
            r,
            c,
            rows.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    fn drop_zeros(&mut self) {
        let mut ptr = vec![0; self.cols + 1];
        let mut k = 0;
        for j in 0..self.cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.values[p] != 0.0 {
                    self.row_idx[k] = self.row_idx[p];
                    self.values[k] = self.values[p];
                    k += 1;
                }
            }
            ptr[j + 1] = k;
        }
        self.row_idx.truncate(k);
        self.values.truncate(k);
        self.col_ptr = ptr;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate().take(self.cols) {
            if xj != 0.0 {
                let (idx, val) = self.column(j);
                for (&i, &v) in idx.iter().zip(val) {
                    out[i] += v * xj;
                }
            }
        }
        out
    }

    /// `y^T a_j`.
    pub fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        let (idx, val) = self.column(j);
        idx.iter().zip(val).map(|(&i, &v)| y[i] * v).sum()
    }

    /// `A^T y`.
    pub fn tmul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| self.dot_column(j, y)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for j in 0..self.cols {
            let (idx, val) = self.column(j);
            for (&i, &v) in idx.iter().zip(val) {
                out[i][j] = v;
            }
        }
        out
    }
}

/// `min c^T x, A x = b, x >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    objective: Vec<f64>,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, matrix: SparseMatrix, rhs: Vec<f64>) -> Result<Self, LpError> {
        if matrix.rows == 0 || matrix.cols == 0 {
            return Err(LpError::Invalid("need at least one row and one column".into()));
        }
        if objective.len() != matrix.cols || rhs.len() != matrix.rows {
            return Err(LpError::Invalid(format!(
                "{} costs and {} right-hand sides for a {}x{} matrix",
                objective.len(),
                rhs.len(),
                matrix.rows,
                matrix.cols
            )));
        }
        if let Some(c) = objective.iter().find(|c| c.is_nan() || **c == f64::NEG_INFINITY) {
            return Err(LpError::Invalid(format!("objective coefficient {c}")));
        }
        if let Some(b) = rhs.iter().find(|b| !b.is_finite()) {
            return Err(LpError::Invalid(format!("right-hand side {b}")));
        }
        Ok(Self {
            objective,
            matrix,
            rhs,
        })
    }

    pub fn from_dense(objective: Vec<f64>, rows: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self, LpError> {
        Self::new(objective, SparseMatrix::from_dense(rows)?, rhs)
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    /// `max_i |(A x - b)_i|`, plus the most negative entry of `x` if any.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul(x);
        let row = ax
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        row.max(neg)
    }

    /// `c^T x` with `inf * 0 = 0`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(&c, &v)| if v == 0.0 { 0.0 } else { c * v })
            .sum()
    }

    /// `max_j (y^T a_j - c_j)^+` over finite-cost columns.
    pub fn dual_infeasibility(&self, y: &[f64]) -> f64 {
        (0..self.cols())
            .filter(|&j| self.objective[j].is_finite())
            .map(|j| self.matrix.dot_column(j, y) - self.objective[j])
            .fold(0.0, f64::max)
    }
}

/// Incremental row-by-row construction.
#[derive(Clone, Debug, Default)]
pub struct LpBuilder {
    objective: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, cost: f64) -> usize {
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, entries: &[(usize, f64)], rhs: f64) -> usize {
        let i = self.rhs.len();
        self.triplets.extend(entries.iter().map(|&(j, v)| (i, j, v)));
        self.rhs.push(rhs);
        i
    }

    /// Adds `v` to entry `(row, col)`.
    pub fn add_entry(&mut self, row: usize, col: usize, v: f64) {
        self.triplets.push((row, col, v));
    }

    pub fn add_empty_row(&mut self, rhs: f64) -> usize {
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn build(self) -> Result<LinearProgram, LpError> {
        let m = SparseMatrix::from_triplets(self.rhs.len(), self.objective.len(), self.triplets)?;
        LinearProgram::new(self.objective, m, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A vector `y` with `y^T A <= 0` and `y^T b > 0`, proving `A x = b, x >= 0`
/// has no solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    /// `y^T b`.
    pub margin: f64,
    /// `max_j (y^T a_j)^+` over finite-cost columns.
    pub max_violation: f64,
}

impl FarkasCertificate {
    /// Recomputes margin and violation from `lp`.
    pub fn evaluate(lp: &LinearProgram, y: Vec<f64>) -> Self {
        let margin = y.iter().zip(lp.rhs()).map(|(a, b)| a * b).sum();
        let max_violation = (0..lp.cols())
            .filter(|&j| lp.objective()[j].is_finite())
            .map(|j| lp.matrix().dot_column(j, &y))
            .fold(0.0, f64::max);
        Self {
            y,
            margin,
            max_violation,
        }
    }

    /// Independent check against `lp` with the given tolerances.
    pub fn verify(&self, lp: &LinearProgram, tol_feas: f64, tol_farkas: f64) -> bool {
        if self.y.len() != lp.rows() || self.y.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let fresh = Self::evaluate(lp, self.y.clone());
        fresh.margin > tol_farkas && fresh.max_violation <= tol_feas
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpStats {
    pub iterations: usize,
    pub phase_one_iterations: usize,
    pub refactorizations: usize,
    pub bland_fallback: bool,
    pub retried: bool,
    pub eliminated_columns: usize,
    pub primal_residual: f64,
    pub duality_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal point when optimal; empty otherwise.
    pub primal: Vec<f64>,
    /// `c^T x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// Dual solution `y` with `A^T y <= c` when optimal.
    pub dual: Vec<f64>,
    pub farkas: Option<FarkasCertificate>,
    /// Improving ray `d >= 0`, `A d = 0`, `c^T d < 0` when unbounded.
    pub ray: Option<Vec<f64>>,
    pub stats: LpStats,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `y^T b`.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        self.dual.iter().zip(lp.rhs()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    /// Goldfarb–Reid steepest edge with a permanent switch to Bland's rule
    /// after a run of degenerate pivots.
    SteepestEdge,
    /// Most negative reduced cost, same fallback.
    Dantzig,
    /// Bland's rule from the first pivot.
    Bland,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LpOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub tol_farkas: f64,
    /// `None` scales with the problem size.
    pub max_iterations: Option<usize>,
    pub pricing: Pricing,
    pub refactor_every: usize,
    pub degenerate_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            tol_feas: TAU_FEAS,
            tol_gap: TAU_GAP,
            tol_farkas: TAU_FARKAS,
            max_iterations: None,
            pricing: Pricing::SteepestEdge,
            refactor_every: 64,
            degenerate_limit: 50,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 0, 2.0), (1, 2, 0.0), (1, 1, -1.0)])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense(), vec![vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0]]);
        assert_eq!(m.mul(&[1.0, 2.0, 3.0]), vec![3.0, -2.0]);
        assert_eq!(m.tmul(&[1.0, 1.0]), vec![3.0, -1.0, 0.0]);
        assert!(SparseMatrix::from_triplets(1, 1, [(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn rejects_malformed_programs() {
        assert!(LinearProgram::from_dense(vec![f64::NAN], &[vec![1.0]], vec![1.0]).is_err());
        assert!(LinearProgram::from_dense(vec![1.0], &[vec![1.0]], vec![f64::INFINITY]).is_err());
        assert!(LinearProgram::from_dense(vec![1.0, 2.0], &[vec![1.0]], vec![1.0]).is_err());
        assert!(LinearProgram::from_dense(vec![f64::INFINITY], &[vec![1.0]], vec![1.0]).is_ok());
    }

    #[test]
    fn farkas_verification_is_independent() {
        let lp = LinearProgram::from_dense(vec![0.0], &[vec![1.0], vec![1.0]], vec![1.0, 2.0]).unwrap();
        let good = FarkasCertificate::evaluate(&lp, vec![-1.0, 1.0]);
        assert!(good.verify(&lp, TAU_FEAS, TAU_FARKAS));
        let bad = FarkasCertificate {
            y: vec![1.0, 1.0],
            margin: 3.0,
            max_violation: 0.0,
        };
        assert!(!bad.verify(&lp, TAU_FEAS, TAU_FARKAS));
    }
}
