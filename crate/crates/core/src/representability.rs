//! N-representability of symmetric pair measures.
//!
//! A symmetric `mu_2` is N-representable when it is the 2-marginal of an
//! exchangeable N-body measure. With the multiset parametrization this is the
//! LP feasibility problem
//!
//! ```text
//! sum_M P_M(u) w_M = mu_2(u)  for every unordered pair u,   w >= 0,
//! ```
//!
//! where `P_M(u)` is the probability that two distinct slots of a uniformly
//! ordered `M` land on `u`. An infeasible system comes with a Farkas vector,
//! which is the certificate of non-representability.

use serde::Serialize;
use thiserror::Error;

use crate::cost::{pair_integral_with, CostError, CostFunction};
use crate::lp::{
    self, FarkasCertificate, LinearProgram, LpBuilder, LpError, LpOptions, LpStats, LpStatus,
};
use crate::measure::multiset::{binomial_f64, sequence_counts, MultisetSpace};
use crate::measure::{upper_index, DiscreteMeasure, MeasureError, NBodyMeasure, PairMeasure};
use crate::mmot::{multiset_budget, normalize_plan, BudgetExceeded, DEFAULT_BUDGET};

/// Margins below `MARGINAL_FACTOR * tau_farkas` are reported as marginal.
pub const MARGINAL_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum RepresentabilityError {
    #[error("representability needs N >= 2, got {0}")]
    Order(usize),
    #[error("pair measure is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("measure: {0}")]
    Measure(#[from] MeasureError),
    #[error("cost: {0}")]
    Cost(#[from] CostError),
    #[error("linear program: {0}")]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// Neither a witness nor a certificate with a safe margin was found.
    Marginal,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentabilityAnswer {
    pub n: usize,
    pub verdict: Verdict,
    /// Multiset-mode N-body measure whose 2-marginal is `mu_2`.
    #[serde(serialize_with = "witness_doc")]
    pub witness: Option<NBodyMeasure>,
    /// `max |witness_2 - mu_2|` over ordered pairs.
    pub witness_residual: Option<f64>,
    /// Over the rows of [`representability_lp`]: one per unordered pair
    /// `(i <= j)` in row-major order.
    pub certificate: Option<FarkasCertificate>,
    pub certificate_verified: bool,
    pub lp: LpStats,
}

fn witness_doc<S: serde::Serializer>(w: &Option<NBodyMeasure>, s: S) -> Result<S::Ok, S::Error> {
    w.as_ref()
        .map(|g| crate::measure::AnyMeasure::Many(g.clone()).to_doc())
        .serialize(s)
}

impl RepresentabilityAnswer {
    pub fn feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

/// `P_M(u)` for every unordered pair with nonzero probability.
fn pair_probabilities(counts: &[usize], k: usize) -> Vec<(usize, f64)> {
    let m = counts.len();
    let denom = (k * (k - 1)) as f64;
    let mut out = Vec::new();
    for i in 0..m {
        let ci = counts[i];
        if ci == 0 {
            continue;
        }
        if ci >= 2 {
            out.push((upper_index(m, i, i), (ci * (ci - 1)) as f64 / denom));
        }
        for j in i + 1..m {
            if counts[j] > 0 {
                out.push((upper_index(m, i, j), (2 * ci * counts[j]) as f64 / denom));
            }
        }
    }
    out
}

fn checked_symmetric(mu2: &PairMeasure) -> Result<PairMeasure, RepresentabilityError> {
    if mu2.is_symmetric() {
        return Ok(mu2.clone());
    }
    let m = mu2.points();
    let asym = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (mu2.weight(i, j) - mu2.weight(j, i)).abs())
        .fold(0.0, f64::max);
    if asym > 1e-12 {
        return Err(RepresentabilityError::NotSymmetric(asym));
    }
    Ok(mu2.symmetrized())
}

/// The feasibility LP: rows are unordered pairs, columns N-multisets in
/// lexicographic order, zero objective.
pub fn representability_lp(
    mu2: &PairMeasure,
    n: usize,
    budget: usize,
) -> Result<LinearProgram, RepresentabilityError> {
    if n < 2 {
        return Err(RepresentabilityError::Order(n));
    }
    let m = mu2.points();
    multiset_budget(m, n, budget)?;
    let mut b = LpBuilder::new();
    for t in mu2.upper_totals() {
        b.add_empty_row(t);
    }
    for seq in MultisetSpace::new(m, n).iter() {
        let j = b.add_variable(0.0);
        for (u, p) in pair_probabilities(&sequence_counts(&seq, m), n) {
            b.add_entry(u, j, p);
        }
    }
    Ok(b.build()?)
}

pub fn is_n_representable(mu2: &PairMeasure, n: usize) -> Result<RepresentabilityAnswer, RepresentabilityError> {
    is_n_representable_with(mu2, n, DEFAULT_BUDGET, &LpOptions::default())
}

pub fn is_n_representable_with(
    mu2: &PairMeasure,
    n: usize,
    budget: usize,
    opts: &LpOptions,
) -> Result<RepresentabilityAnswer, RepresentabilityError> {
    let mu2 = checked_symmetric(mu2)?;
    let lp = representability_lp(&mu2, n, budget)?;
    let marginal = |stats: LpStats, cert: Option<FarkasCertificate>| RepresentabilityAnswer {
        n,
        verdict: Verdict::Marginal,
        witness: None,
        witness_residual: None,
        certificate: cert,
        certificate_verified: false,
        lp: stats,
    };
    let res = match lp::solve_with(&lp, opts) {
        Ok(r) => r,
        Err(LpError::Ambiguous { .. }) => return Ok(marginal(LpStats::default(), None)),
        Err(e) => return Err(e.into()),
    };
    match res.status {
        LpStatus::Optimal => {
            let witness = NBodyMeasure::multiset(mu2.grid().clone(), n, normalize_plan(res.primal).map_err(
                |e| RepresentabilityError::Lp(LpError::NumericalBreakdown(e.to_string())),
            )?)?;
            let got = witness.pair_marginal()?;
            let residual = got
                .weights()
                .iter()
                .zip(mu2.weights())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(RepresentabilityAnswer {
                n,
                verdict: Verdict::Feasible,
                witness: Some(witness),
                witness_residual: Some(residual),
                certificate: None,
                certificate_verified: false,
                lp: res.stats,
            })
        }
        LpStatus::Infeasible => {
            let cert = res.farkas.expect("infeasible results carry a certificate");
            let verified = cert.verify(&lp, opts.tol_feas, opts.tol_farkas);
            if !verified || cert.margin < MARGINAL_FACTOR * opts.tol_farkas {
                return Ok(marginal(res.stats, Some(cert)));
            }
            Ok(RepresentabilityAnswer {
                n,
                verdict: Verdict::Infeasible,
                witness: None,
                witness_residual: None,
                certificate: Some(cert),
                certificate_verified: verified,
                lp: res.stats,
            })
        }
        LpStatus::Unbounded => Err(LpError::NumericalBreakdown("feasibility LP unbounded".into()).into()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub n: usize,
    pub m: usize,
    pub n_verdict: Verdict,
    pub m_verdict: Verdict,
    /// `!(N-representable && !M-representable)`.
    pub holds: bool,
}

/// N-representable implies M-representable for `M <= N`.
pub fn monotonicity_check(
    mu2: &PairMeasure,
    n: usize,
    m: usize,
) -> Result<MonotonicityReport, RepresentabilityError> {
    if m < 2 || m > n {
        return Err(RepresentabilityError::Order(m));
    }
    let a = is_n_representable(mu2, n)?;
    let b = is_n_representable(mu2, m)?;
    Ok(MonotonicityReport {
        n,
        m,
        n_verdict: a.verdict,
        m_verdict: b.verdict,
        holds: !(a.verdict == Verdict::Feasible && b.verdict == Verdict::Infeasible),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "k")]
pub enum ProbeVerdict {
    RepresentableUpTo(usize),
    RefutedAt(usize),
    MarginalAt(usize),
}

/// Runs the N-representability test for `N = 2..=k_max` and stops at the
/// first failure.
pub fn infinite_representability_probe(
    mu2: &PairMeasure,
    k_max: usize,
) -> Result<ProbeVerdict, RepresentabilityError> {
    if k_max < 2 {
        return Err(RepresentabilityError::Order(k_max));
    }
    for k in 2..=k_max {
        match is_n_representable(mu2, k)?.verdict {
            Verdict::Feasible => {}
            Verdict::Infeasible => return Ok(ProbeVerdict::RefutedAt(k)),
            Verdict::Marginal => return Ok(ProbeVerdict::MarginalAt(k)),
        }
    }
    Ok(ProbeVerdict::RepresentableUpTo(k_max))
}

/// Solution of the pair transport problem under k-representability.
#[derive(Clone, Debug)]
pub struct PairOtSolution {
    /// `min int c d mu_2`, `+inf` if no finite-cost representable plan exists.
    pub value: f64,
    pub pair: Option<PairMeasure>,
    /// The k-body measure representing the optimal pair measure.
    pub witness: Option<NBodyMeasure>,
    pub lp: LpStats,
    pub variables: usize,
}

/// `min int c d mu_2` over k-representable symmetric `mu_2` with marginal
/// `mu`. Variables are the upper-triangle pair masses `p_u` and the k-multiset
/// weights `w_M`; rows tie `p = P w` and fix the marginal of `p`.
pub fn representable_pair_ot(
    mu: &DiscreteMeasure,
    k: usize,
    cost: &CostFunction,
    budget: usize,
    opts: &LpOptions,
) -> Result<PairOtSolution, RepresentabilityError> {
    if k < 2 {
        return Err(RepresentabilityError::Order(k));
    }
    let m = mu.len();
    let upper = m * (m + 1) / 2;
    let multisets = multiset_budget(m, k, budget.saturating_sub(upper))?;
    let c = cost.matrix(mu.grid())?;

    let mut b = LpBuilder::new();
    for _ in 0..upper {
        b.add_empty_row(0.0);
    }
    let marginal_row: Vec<usize> = (0..m).map(|i| b.add_empty_row(mu.weights()[i])).collect();
    for i in 0..m {
        for j in i..m {
            let u = upper_index(m, i, j);
            let var = b.add_variable(c.get(i, j));
            debug_assert_eq!(var, u);
            b.add_entry(u, var, 1.0);
            if i == j {
                b.add_entry(marginal_row[i], var, 1.0);
            } else {
                b.add_entry(marginal_row[i], var, 0.5);
                b.add_entry(marginal_row[j], var, 0.5);
            }
        }
    }
    for seq in MultisetSpace::new(m, k).iter() {
        let var = b.add_variable(0.0);
        for (u, p) in pair_probabilities(&sequence_counts(&seq, m), k) {
            b.add_entry(u, var, -p);
        }
    }
    let lp = b.build()?;
    let res = lp::solve_with(&lp, opts)?;
    let variables = upper + multisets;
    match res.status {
        LpStatus::Infeasible => Ok(PairOtSolution {
            value: f64::INFINITY,
            pair: None,
            witness: None,
            lp: res.stats,
            variables,
        }),
        LpStatus::Unbounded => Err(LpError::NumericalBreakdown("pair transport LP unbounded".into()).into()),
        LpStatus::Optimal => {
            let wrap = |e: crate::mmot::MmotError| {
                RepresentabilityError::Lp(LpError::NumericalBreakdown(e.to_string()))
            };
            let p = normalize_plan(res.primal[..upper].to_vec()).map_err(wrap)?;
            let w = normalize_plan(res.primal[upper..].to_vec()).map_err(wrap)?;
            let pair = PairMeasure::symmetric_from_fn(mu.grid().clone(), |i, j| p[upper_index(m, i, j)])?;
            let witness = NBodyMeasure::multiset(mu.grid().clone(), k, w)?;
            let value = res.objective;
            let direct = pair_integral_with(&c, &pair);
            if (direct - value).abs() > 1e-9 * value.abs().max(1.0) {
                return Err(LpError::NumericalBreakdown(format!(
                    "pair value {direct} differs from LP value {value}"
                ))
                .into());
            }
            Ok(PairOtSolution {
                value,
                pair: Some(pair),
                witness: Some(witness),
                lp: res.stats,
                variables,
            })
        }
    }
}

/// `V^{SCE,k}[N mu] = C(N,2) * min { int c d mu_2 : mu_2 k-representable,
/// mu_2 -> mu }`. Any `k >= 2` is accepted, including `k > N`.
pub fn hierarchy_value(
    mu: &DiscreteMeasure,
    n: usize,
    k: usize,
    cost: &CostFunction,
) -> Result<f64, RepresentabilityError> {
    hierarchy_value_with(mu, n, k, cost, DEFAULT_BUDGET, &LpOptions::default())
}

pub fn hierarchy_value_with(
    mu: &DiscreteMeasure,
    n: usize,
    k: usize,
    cost: &CostFunction,
    budget: usize,
    opts: &LpOptions,
) -> Result<f64, RepresentabilityError> {
    if n < 2 {
        return Err(RepresentabilityError::Order(n));
    }
    Ok(binomial_f64(n, 2) * representable_pair_ot(mu, k, cost, budget, opts)?.value)
}
