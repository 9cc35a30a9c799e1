//! The symmetric N-marginal transport problem
//!
//! ```text
//! F_N[mu] = C(N,2)^-1 inf { C_N[gamma] : gamma exchangeable, gamma_1 = mu }
//! ```
//!
//! The direct formulation has one variable per N-multiset of support points;
//! the reduced formulation optimizes over pair measures constrained to be
//! N-representable (see [`crate::representability`]).

use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cost::{nbody_cost_with, pair_integral_with, CostError, CostFunction, CostMatrix};
use crate::lp::{self, LinearProgram, LpBuilder, LpError, LpOptions, LpStats, LpStatus};
use crate::measure::multiset::{binomial_f64, sequence_counts, MultisetSpace};
use crate::measure::{AnyMeasure, Density, DiscreteMeasure, MeasureError, NBodyMeasure, PairMeasure};
use crate::report::ext_f64;
use crate::representability::{representable_pair_ot, RepresentabilityError};

/// Default cap on LP variables.
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Error)]
#[error(
    "{variables} LP variables exceed the budget of {budget}; use fewer support points or bodies"
)]
pub struct BudgetExceeded {
    pub variables: String,
    pub budget: usize,
}

/// Number of size-`size` multisets over `points` points, checked against
/// `budget`.
pub fn multiset_budget(points: usize, size: usize, budget: usize) -> Result<usize, BudgetExceeded> {
    let card = MultisetSpace::new(points, size).cardinality();
    match card {
        Some(c) if c <= budget as u128 => Ok(c as usize),
        Some(c) => Err(BudgetExceeded {
            variables: c.to_string(),
            budget,
        }),
        None => Err(BudgetExceeded {
            variables: format!("C({points}+{size}-1, {size})"),
            budget,
        }),
    }
}

#[derive(Debug, Error)]
pub enum MmotError {
    #[error("need at least two bodies, got {0}")]
    BodyCount(usize),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("measure: {0}")]
    Measure(#[from] MeasureError),
    #[error("cost: {0}")]
    Cost(#[from] CostError),
    #[error("linear program: {0}")]
    Lp(#[from] LpError),
    #[error("representability: {0}")]
    Representability(Box<RepresentabilityError>),
    #[error("post-solve check failed: {0}")]
    Check(String),
}

impl From<RepresentabilityError> for MmotError {
    fn from(e: RepresentabilityError) -> Self {
        match e {
            RepresentabilityError::Budget(b) => MmotError::Budget(b),
            other => MmotError::Representability(Box::new(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    #[default]
    Direct,
    Reduced,
}

#[derive(Clone, Debug)]
pub struct MmotProblem {
    pub mu: DiscreteMeasure,
    pub n: usize,
    pub cost: CostFunction,
    pub formulation: Formulation,
    pub budget: usize,
    pub lp: LpOptions,
}

impl MmotProblem {
    pub fn new(mu: DiscreteMeasure, n: usize, cost: CostFunction) -> Result<Self, MmotError> {
        if n < 2 {
            return Err(MmotError::BodyCount(n));
        }
        Ok(Self {
            mu,
            n,
            cost,
            formulation: Formulation::Direct,
            budget: DEFAULT_BUDGET,
            lp: LpOptions::default(),
        })
    }

    pub fn with_formulation(mut self, f: Formulation) -> Self {
        self.formulation = f;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_lp_options(mut self, lp: LpOptions) -> Self {
        self.lp = lp;
        self
    }
}

/// Outcome of a transport solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub formulation: Formulation,
    pub n: usize,
    /// Optimal cost per pair, `+inf` when no finite-cost plan exists.
    #[serde(with = "ext_f64")]
    pub value: f64,
    /// `C(N,2) * value`.
    #[serde(with = "ext_f64")]
    pub total: f64,
    pub status: LpStatus,
    /// Multiset N-body plan (direct) or pair measure (reduced).
    #[serde(serialize_with = "measure_doc")]
    pub measure: Option<AnyMeasure>,
    /// `max_i |gamma_1(i) - mu(i)|`.
    pub marginal_residual: f64,
    pub lp: LpStats,
    pub variables: usize,
    pub wall_time_secs: f64,
}

fn measure_doc<S: Serializer>(m: &Option<AnyMeasure>, s: S) -> Result<S::Ok, S::Error> {
    m.as_ref().map(AnyMeasure::to_doc).serialize(s)
}

impl SolveReport {
    pub fn nbody(&self) -> Option<&NBodyMeasure> {
        match &self.measure {
            Some(AnyMeasure::Many(g)) => Some(g),
            _ => None,
        }
    }

    pub fn pair(&self) -> Option<PairMeasure> {
        match &self.measure {
            Some(AnyMeasure::Pair(p)) => Some(p.clone()),
            Some(AnyMeasure::Many(g)) => g.pair_marginal().ok(),
            _ => None,
        }
    }
}

/// Rescales LP weights whose total is within `1e-7` of one; anything further
/// off is a solver failure.
pub(crate) fn normalize_plan(mut w: Vec<f64>) -> Result<Vec<f64>, MmotError> {
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-7 {
        return Err(MmotError::Check(format!("plan has total mass {total}")));
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

pub fn solve_mmot(p: &MmotProblem) -> Result<SolveReport, MmotError> {
    match p.formulation {
        Formulation::Direct => solve_direct(p),
        Formulation::Reduced => solve_reduced_with(&p.mu, p.n, &p.cost, p.budget, &p.lp),
    }
}

/// The direct LP: one column per N-multiset in lexicographic order, one row
/// per support point.
pub fn direct_lp(p: &MmotProblem) -> Result<LinearProgram, MmotError> {
    let m = p.mu.len();
    let n = p.n;
    multiset_budget(m, n, p.budget)?;
    let c = p.cost.matrix(p.mu.grid())?;
    let pairs = binomial_f64(n, 2);
    let space = MultisetSpace::new(m, n);
    let mut b = LpBuilder::new();
    for i in 0..m {
        b.add_empty_row(p.mu.weights()[i]);
    }
    for seq in space.iter() {
        let counts = sequence_counts(&seq, m);
        let j = b.add_variable(c.multiset_pair_sum(&counts) / pairs);
        for (i, &ci) in counts.iter().enumerate() {
            if ci > 0 {
                b.add_entry(i, j, ci as f64 / n as f64);
            }
        }
    }
    Ok(b.build()?)
}

fn solve_direct(p: &MmotProblem) -> Result<SolveReport, MmotError> {
    let start = Instant::now();
    let n = p.n;
    let vars = multiset_budget(p.mu.len(), n, p.budget)?;
    let c = p.cost.matrix(p.mu.grid())?;
    let pairs = binomial_f64(n, 2);
    let lp = direct_lp(p)?;
    let res = lp::solve_with(&lp, &p.lp)?;
    if res.status == LpStatus::Infeasible {
        return Ok(infinite_report(Formulation::Direct, n, res.stats, vars, start));
    }
    if res.status != LpStatus::Optimal {
        return Err(MmotError::Check("transport LP reported unbounded".into()));
    }
    let gamma = NBodyMeasure::multiset(p.mu.grid().clone(), n, normalize_plan(res.primal)?)?;
    let value = res.objective;
    let recomputed = nbody_cost_with(&c, &gamma) / pairs;
    check_value(value, recomputed)?;
    let marginal_residual = marginal_gap(&gamma.one_marginal()?, &p.mu);
    Ok(SolveReport {
        formulation: Formulation::Direct,
        n,
        value,
        total: value * pairs,
        status: LpStatus::Optimal,
        measure: Some(AnyMeasure::Many(gamma)),
        marginal_residual,
        lp: res.stats,
        variables: vars,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

pub(crate) fn check_value(lp_value: f64, recomputed: f64) -> Result<(), MmotError> {
    if (lp_value - recomputed).abs() > 1e-9 * lp_value.abs().max(1.0) {
        return Err(MmotError::Check(format!(
            "LP value {lp_value} differs from the plan's cost {recomputed}"
        )));
    }
    Ok(())
}

pub(crate) fn marginal_gap(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn infinite_report(
    formulation: Formulation,
    n: usize,
    lp: LpStats,
    variables: usize,
    start: Instant,
) -> SolveReport {
    SolveReport {
        formulation,
        n,
        value: f64::INFINITY,
        total: f64::INFINITY,
        status: LpStatus::Infeasible,
        measure: None,
        marginal_residual: f64::NAN,
        lp,
        variables,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

/// Minimizes `int c d mu_2` over N-representable pair measures with marginal
/// `mu`, as one LP.
pub fn solve_reduced(mu: &DiscreteMeasure, n: usize, cost: &CostFunction) -> Result<SolveReport, MmotError> {
    solve_reduced_with(mu, n, cost, DEFAULT_BUDGET, &LpOptions::default())
}

pub fn solve_reduced_with(
    mu: &DiscreteMeasure,
    n: usize,
    cost: &CostFunction,
    budget: usize,
    opts: &LpOptions,
) -> Result<SolveReport, MmotError> {
    if n < 2 {
        return Err(MmotError::BodyCount(n));
    }
    let start = Instant::now();
    let sol = representable_pair_ot(mu, n, cost, budget, opts)?;
    let pairs = binomial_f64(n, 2);
    let Some(pair) = sol.pair else {
        return Ok(infinite_report(Formulation::Reduced, n, sol.lp, sol.variables, start));
    };
    let c = cost.matrix(mu.grid())?;
    check_value(sol.value, pair_integral_with(&c, &pair))?;
    let marginal_residual = marginal_gap(&pair.marginal(), mu);
    Ok(SolveReport {
        formulation: Formulation::Reduced,
        n,
        value: sol.value,
        total: sol.value * pairs,
        status: LpStatus::Optimal,
        measure: Some(AnyMeasure::Pair(pair)),
        marginal_residual,
        lp: sol.lp,
        variables: sol.variables,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// `int c d(mu (x) mu)`; `+inf` for singular costs on atoms.
pub fn mean_field_value(mu: &DiscreteMeasure, cost: &CostFunction) -> Result<f64, CostError> {
    let c = cost.matrix(mu.grid())?;
    Ok(mean_field_with(&c, mu))
}

pub(crate) fn mean_field_with(c: &CostMatrix, mu: &DiscreteMeasure) -> f64 {
    pair_integral_with(c, &mu.product_pair())
}

/// `V_SCE[rho] = C(N,2) F_N[rho / N]` for a density of total mass `N`.
pub fn sce_value(rho: &Density, cost: &CostFunction) -> Result<f64, MmotError> {
    sce_value_with(rho, cost, DEFAULT_BUDGET)
}

pub fn sce_value_with(rho: &Density, cost: &CostFunction, budget: usize) -> Result<f64, MmotError> {
    let p = MmotProblem::new(rho.normalized(), rho.particles(), cost.clone())?.with_budget(budget);
    Ok(solve_mmot(&p)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SupportGrid;
    use std::sync::Arc;

    const E_INV: f64 = 0.36787944117144233;

    fn uniform_two() -> DiscreteMeasure {
        DiscreteMeasure::uniform(Arc::new(SupportGrid::line(&[0.0, 1.0]).unwrap()))
    }

    fn gauss() -> CostFunction {
        CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).unwrap()
    }

    /// Balanced-split closed form for the two-point Gaussian ladder.
    fn ladder(n: usize) -> f64 {
        let m = n.div_ceil(2) as f64;
        ((m - 1.0) + m * E_INV) / (2.0 * m - 1.0)
    }

    #[test]
    fn two_point_ladder() {
        for n in 2..=8 {
            let p = MmotProblem::new(uniform_two(), n, gauss()).unwrap();
            let r = solve_mmot(&p).unwrap();
            assert!((r.value - ladder(n)).abs() < 1e-10, "N = {n}: {}", r.value);
            assert!(r.marginal_residual < 1e-12);
        }
    }

    #[test]
    fn reduced_matches_direct() {
        for n in 2..=6 {
            let d = solve_mmot(&MmotProblem::new(uniform_two(), n, gauss()).unwrap()).unwrap();
            let r = solve_reduced(&uniform_two(), n, &gauss()).unwrap();
            assert!((d.value - r.value).abs() < 1e-8, "N = {n}");
        }
    }

    #[test]
    fn truncated_quadratic_is_zero_on_the_diagonal() {
        let c = CostFunction::truncated_quadratic(2.0).unwrap();
        for n in 2..=5 {
            let r = solve_mmot(&MmotProblem::new(uniform_two(), n, c.clone()).unwrap()).unwrap();
            assert!(r.value.abs() < 1e-12);
        }
    }

    #[test]
    fn coulomb_on_atoms() {
        let mu = uniform_two();
        assert_eq!(mean_field_value(&mu, &CostFunction::coulomb()).unwrap(), f64::INFINITY);
        // N = 2 can avoid the diagonal, N = 3 cannot
        let r2 = solve_mmot(&MmotProblem::new(mu.clone(), 2, CostFunction::coulomb()).unwrap()).unwrap();
        assert!((r2.value - 1.0).abs() < 1e-12);
        let r3 = solve_mmot(&MmotProblem::new(mu, 3, CostFunction::coulomb()).unwrap()).unwrap();
        assert_eq!(r3.value, f64::INFINITY);
        assert_eq!(r3.status, LpStatus::Infeasible);
    }

    #[test]
    fn sce_normalization() {
        let rho = uniform_two().scaled(4);
        let v = sce_value(&rho, &gauss()).unwrap();
        assert!((v - 6.0 * (1.0 + 2.0 * E_INV) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn budget_is_enforced() {
        let mu = DiscreteMeasure::uniform(Arc::new(SupportGrid::line(&[0.0, 1.0, 2.0, 3.0]).unwrap()));
        let p = MmotProblem::new(mu, 10, gauss()).unwrap().with_budget(100);
        assert!(matches!(solve_mmot(&p), Err(MmotError::Budget(_))));
        assert!(matches!(MmotProblem::new(uniform_two(), 1, gauss()), Err(MmotError::BodyCount(1))));
    }
}
