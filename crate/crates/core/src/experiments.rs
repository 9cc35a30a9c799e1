//! Experiment drivers: convergence of `F_N` to the mean field, the
//! k-representability hierarchy, the regularized-Coulomb deficit trend, the
//! truncated-quadratic counterexample and a Diaconis–Freedman sweep.
//!
//! Each run yields an [`ExperimentResult`]: a table, property checks, summary
//! numbers and metadata. Rows are computed in parallel and collected in
//! parameter order; nothing depends on timing unless `timing` is enabled.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{classify_positive_definite, CostError, CostFunction, Definiteness};
use crate::definetti::df_tv_bound_check;
use crate::fourier::{FourierError, TorusGrid};
use crate::lp::LpOptions;
use crate::measure::multiset::binomial_f64;
use crate::measure::{DiscreteMeasure, MeasureError, SupportGrid};
use crate::mmot::{
    mean_field_with, multiset_budget, solve_mmot, Formulation, MmotError, MmotProblem, DEFAULT_BUDGET,
};
use crate::report::{canonical_json, sha256_hex, Bundle, Cell, Plot, ReportError, Series, Table};
use crate::representability::{hierarchy_value_with, RepresentabilityError};
use crate::sampling::random_exchangeable;

/// Slack for monotonicity and sign checks on LP values.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Mmot(#[from] MmotError),
    #[error("representability: {0}")]
    Representability(#[from] RepresentabilityError),
    #[error("cost: {0}")]
    Cost(#[from] CostError),
    #[error("measure: {0}")]
    Measure(#[from] MeasureError),
    #[error("fourier: {0}")]
    Fourier(#[from] FourierError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
}

impl ExperimentError {
    /// Configuration problems, as opposed to failures while computing.
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Spec(_) | ExperimentError::Cost(CostError::BadSpec(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Points {
    Line(Vec<f64>),
    Grid(Vec<Vec<f64>>),
}

/// A discrete probability measure given inline. Weights default to uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub points: Points,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Vec<f64>>,
}

impl MeasureSpec {
    pub fn uniform_line(xs: &[f64]) -> Self {
        Self {
            points: Points::Line(xs.to_vec()),
            weights: None,
            period: None,
        }
    }

    pub fn build(&self) -> Result<DiscreteMeasure, ExperimentError> {
        let pts = match &self.points {
            Points::Line(xs) => xs.iter().map(|x| vec![*x]).collect(),
            Points::Grid(p) => p.clone(),
        };
        let grid = match &self.period {
            Some(per) => SupportGrid::periodic(pts, per.clone())?,
            None => SupportGrid::new(pts)?,
        };
        let grid = Arc::new(grid);
        Ok(match &self.weights {
            Some(w) => DiscreteMeasure::new(grid, w.clone())?,
            None => DiscreteMeasure::uniform(grid),
        })
    }
}

/// Inclusive integer range written `[from, to]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange(pub usize, pub usize);

impl IntRange {
    fn checked(self, what: &str, min: usize) -> Result<Vec<usize>, ExperimentError> {
        if self.0 > self.1 {
            return Err(ExperimentError::Spec(format!("{what} range [{}, {}] is empty", self.0, self.1)));
        }
        if self.0 < min {
            return Err(ExperimentError::Spec(format!("{what} range must start at {min} or above")));
        }
        Ok((self.0..=self.1).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub mu: MeasureSpec,
    pub cost: String,
    pub n_range: IntRange,
    #[serde(default)]
    pub formulation: Formulation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    /// One-body marginal; the density is `rho = n * mu`.
    pub mu: MeasureSpec,
    pub n: usize,
    pub cost: String,
    pub k_range: IntRange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficitSpec {
    pub mu: MeasureSpec,
    pub cost: String,
    pub n_range: IntRange,
}

fn default_counter_range() -> IntRange {
    IntRange(2, 6)
}

fn default_torus_points() -> usize {
    64
}

fn default_torus_period() -> f64 {
    16.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub sigma: f64,
    pub mu: MeasureSpec,
    #[serde(default = "default_counter_range")]
    pub n_range: IntRange,
    /// 1-d torus on which the spectrum of the cost is evaluated.
    #[serde(default = "default_torus_points")]
    pub torus_points: usize,
    #[serde(default = "default_torus_period")]
    pub torus_period: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfSweepSpec {
    pub samples: usize,
    /// Support sizes are drawn from `2..=max_points` (grid `{0, ..., m-1}`).
    pub max_points: usize,
    /// Body counts are drawn from `2..=max_n`.
    pub max_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Convergence(ConvergenceSpec),
    Hierarchy(HierarchySpec),
    DeficitScaling(DeficitSpec),
    Counterexample(CounterexampleSpec),
    DfBoundSweep(DfSweepSpec),
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Convergence(_) => "convergence",
            ExperimentSpec::Hierarchy(_) => "hierarchy",
            ExperimentSpec::DeficitScaling(_) => "deficit_scaling",
            ExperimentSpec::Counterexample(_) => "counterexample",
            ExperimentSpec::DfBoundSweep(_) => "df_bound_sweep",
        }
    }

    /// Range and budget checks, without solving anything.
    pub fn validate(&self, budget: usize) -> Result<(), ExperimentError> {
        let last = |v: Vec<usize>| *v.last().expect("checked ranges are nonempty");
        match self {
            ExperimentSpec::Convergence(s) => {
                let m = s.mu.build()?.len();
                CostFunction::from_spec(&s.cost)?;
                multiset_budget(m, last(s.n_range.checked("N", 2)?), budget).map_err(MmotError::from)?;
            }
            ExperimentSpec::DeficitScaling(s) => {
                let m = s.mu.build()?.len();
                let c = CostFunction::from_spec(&s.cost)?;
                if !c.bounded() {
                    return Err(ExperimentError::Spec("deficit scaling needs a bounded (regularized) cost".into()));
                }
                multiset_budget(m, last(s.n_range.checked("N", 2)?), budget).map_err(MmotError::from)?;
            }
            ExperimentSpec::Hierarchy(s) => {
                let m = s.mu.build()?.len();
                CostFunction::from_spec(&s.cost)?;
                if s.n < 2 {
                    return Err(ExperimentError::Spec("hierarchy needs n >= 2".into()));
                }
                let k = last(s.k_range.checked("k", 2)?).max(s.n);
                multiset_budget(m, k, budget).map_err(MmotError::from)?;
            }
            ExperimentSpec::Counterexample(s) => {
                if !(s.sigma > 1.0 && s.sigma.is_finite()) {
                    return Err(ExperimentError::Spec(format!("sigma must exceed 1, got {}", s.sigma)));
                }
                let m = s.mu.build()?.len();
                multiset_budget(m, last(s.n_range.checked("N", 2)?), budget).map_err(MmotError::from)?;
                TorusGrid::new(1, s.torus_points, s.torus_period)?;
            }
            ExperimentSpec::DfBoundSweep(s) => {
                if s.samples == 0 || s.max_points < 2 || s.max_n < 2 {
                    return Err(ExperimentError::Spec(
                        "df_bound_sweep needs samples >= 1, max_points >= 2, max_n >= 2".into(),
                    ));
                }
                multiset_budget(s.max_points, s.max_n, budget).map_err(MmotError::from)?;
            }
        }
        Ok(())
    }
}

/// Settings shared by every experiment in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    pub seed: u64,
    pub budget: usize,
    pub lp: LpOptions,
    /// Fill the wall-time column. Off by default so outputs are reproducible
    /// byte for byte.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: DEFAULT_BUDGET,
            lp: LpOptions::default(),
            timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub crate_version: String,
    /// SHA-256 of the canonical JSON of the spec and run options.
    pub config_hash: String,
    pub seed: u64,
    pub budget: usize,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub kind: String,
    pub spec: ExperimentSpec,
    pub table: Table,
    pub checks: Vec<Check>,
    /// Scalar outputs; `None` when not applicable.
    pub summary: BTreeMap<String, Option<f64>>,
    pub metadata: Metadata,
    #[serde(skip)]
    pub plot: Option<Plot>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// `result.json`, `<kind>.csv` and, when there is a plot, `<kind>.svg`.
    pub fn to_bundle(&self) -> Result<Bundle, ExperimentError> {
        Ok(Bundle {
            result: Some(serde_json::to_value(self).map_err(ReportError::from)?),
            tables: vec![(self.kind.clone(), self.table.clone())],
            plots: self.plot.iter().map(|p| (self.kind.clone(), p.clone())).collect(),
        })
    }
}

fn metadata(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Metadata, ExperimentError> {
    let config = serde_json::json!({ "spec": spec, "options": opts });
    let tolerances = [
        ("check", CHECK_TOL),
        ("lp_feasibility", opts.lp.tol_feas),
        ("lp_gap", opts.lp.tol_gap),
        ("lp_farkas", opts.lp.tol_farkas),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(Metadata {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: sha256_hex(canonical_json(&config)?.as_bytes()),
        seed: opts.seed,
        budget: opts.budget,
        tolerances,
    })
}

pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentResult, ExperimentError> {
    spec.validate(opts.budget)?;
    let (table, checks, summary, plot) = match spec {
        ExperimentSpec::Convergence(s) => run_convergence(s, opts)?,
        ExperimentSpec::Hierarchy(s) => run_hierarchy(s, opts)?,
        ExperimentSpec::DeficitScaling(s) => run_deficit_scaling(s, opts)?,
        ExperimentSpec::Counterexample(s) => run_counterexample(s, opts)?,
        ExperimentSpec::DfBoundSweep(s) => run_df_bound_sweep(s, opts)?,
    };
    Ok(ExperimentResult {
        kind: spec.kind().to_string(),
        spec: spec.clone(),
        table,
        checks,
        summary,
        metadata: metadata(spec, opts)?,
        plot,
    })
}

type Parts = (Table, Vec<Check>, BTreeMap<String, Option<f64>>, Option<Plot>);

fn timed<T>(opts: &RunOptions, f: impl FnOnce() -> Result<T, ExperimentError>) -> Result<(T, Cell), ExperimentError> {
    let start = Instant::now();
    let v = f()?;
    let t = if opts.timing {
        Cell::Num(start.elapsed().as_secs_f64())
    } else {
        Cell::Empty
    };
    Ok((v, t))
}

fn f_n(mu: &DiscreteMeasure, n: usize, cost: &CostFunction, f: Formulation, opts: &RunOptions) -> Result<f64, ExperimentError> {
    let p = MmotProblem::new(mu.clone(), n, cost.clone())?
        .with_formulation(f)
        .with_budget(opts.budget)
        .with_lp_options(opts.lp.clone());
    Ok(solve_mmot(&p)?.value)
}

/// Grid-relative positive definiteness on a torus enclosing the support;
/// `None` when no such torus exists or the cost is singular there.
pub fn grid_definiteness(mu: &DiscreteMeasure, cost: &CostFunction) -> Option<Definiteness> {
    let torus = TorusGrid::enclosing(mu.grid(), 64).ok()?;
    if mu.grid().points().iter().any(|p| torus.lattice_index(p).is_err()) {
        return None;
    }
    classify_positive_definite(cost, &torus).ok().map(|c| c.class)
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - CHECK_TOL)
}

fn line_plot(title: &str, x: &str, y: &str, series: Vec<Series>, asymptote: Option<(&str, f64)>) -> Plot {
    Plot {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        series,
        asymptote: asymptote.map(|(l, v)| (l.to_string(), v)),
    }
}

fn series(label: &str, xs: &[usize], ys: &[f64]) -> Series {
    Series {
        label: label.into(),
        points: xs.iter().zip(ys).map(|(x, y)| (*x as f64, *y)).collect(),
    }
}

pub fn run_convergence(s: &ConvergenceSpec, opts: &RunOptions) -> Result<Parts, ExperimentError> {
    let mu = s.mu.build()?;
    let cost = CostFunction::from_spec(&s.cost)?;
    let ns = s.n_range.checked("N", 2)?;
    let c = cost.matrix(mu.grid())?;
    let mf = mean_field_with(&c, &mu);
    let pd = matches!(
        grid_definiteness(&mu, &cost),
        Some(Definiteness::Positive | Definiteness::StrictlyPositive)
    );
    // the rate claim needs a bounded, grid-positive-definite cost
    let sup = (pd && cost.bounded()).then(|| c.sup_finite());

    let rows: Vec<(f64, Cell)> = ns
        .par_iter()
        .map(|&n| timed(opts, || f_n(&mu, n, &cost, s.formulation, opts)))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();

    let mut table = Table::new(&["n", "f_n", "mean_field", "gap", "rate_bound", "within_bound", "wall_time_s"]);
    let mut rate_ok = true;
    for (&n, (v, t)) in ns.iter().zip(&rows) {
        let gap = mf - v;
        let bound = sup.map(|s| s / n as f64);
        let within = bound.map(|b| gap <= b + CHECK_TOL);
        rate_ok &= within.unwrap_or(true);
        table.push(vec![
            n.into(),
            (*v).into(),
            mf.into(),
            gap.into(),
            bound.into(),
            within.map_or(Cell::Empty, Cell::from),
            t.clone(),
        ]);
    }
    let mut checks = vec![
        Check::new("f_n_nondecreasing", nondecreasing(&values), format!("{values:?}")),
        Check::new(
            "gap_nonnegative",
            values.iter().all(|v| mf - v >= -CHECK_TOL),
            format!("mean field {mf}"),
        ),
    ];
    if sup.is_some() {
        checks.push(Check::new("gap_within_sup_c_over_n", rate_ok, "gap <= sup c / N"));
    }
    let mut summary = BTreeMap::new();
    summary.insert("mean_field".into(), Some(mf));
    summary.insert("sup_cost".into(), sup);
    summary.insert("grid_positive_definite".into(), Some(if pd { 1.0 } else { 0.0 }));
    let plot = line_plot("F_N against N", "N", "F_N", vec![series("F_N", &ns, &values)], Some(("mean field", mf)));
    Ok((table, checks, summary, Some(plot)))
}

pub fn run_hierarchy(s: &HierarchySpec, opts: &RunOptions) -> Result<Parts, ExperimentError> {
    let mu = s.mu.build()?;
    let cost = CostFunction::from_spec(&s.cost)?;
    let ks = s.k_range.checked("k", 2)?;
    let pairs = binomial_f64(s.n, 2);
    let limit = pairs * mean_field_with(&cost.matrix(mu.grid())?, &mu);

    let rows: Vec<(f64, Cell)> = ks
        .par_iter()
        .map(|&k| timed(opts, || Ok(hierarchy_value_with(&mu, s.n, k, &cost, opts.budget, &opts.lp)?)))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();

    let mut table = Table::new(&["k", "v_sce_k", "limit_binom_n2_mean_field", "gap", "wall_time_s"]);
    for (&k, (v, t)) in ks.iter().zip(&rows) {
        table.push(vec![k.into(), (*v).into(), limit.into(), (limit - v).into(), t.clone()]);
    }
    let mut checks = vec![Check::new("chain_nondecreasing", nondecreasing(&values), format!("{values:?}"))];
    let mut summary = BTreeMap::new();
    summary.insert("limit".into(), Some(limit));
    if let Some(pos) = ks.iter().position(|&k| k == s.n) {
        let sce = pairs * f_n(&mu, s.n, &cost, Formulation::Direct, opts)?;
        let diff = (values[pos] - sce).abs();
        checks.push(Check::new(
            "k_equals_n_matches_sce",
            diff <= CHECK_TOL * sce.abs().max(1.0),
            format!("V^k = {}, sce = {sce}", values[pos]),
        ));
        summary.insert("sce_value".into(), Some(sce));
    }
    let plot = line_plot(
        "Representability hierarchy",
        "k",
        "V_SCE^k",
        vec![series("V_SCE^k", &ks, &values)],
        Some(("C(N,2) mean field", limit)),
    );
    Ok((table, checks, summary, Some(plot)))
}

/// Least-squares slope and RMS residual of `log y` against `log x`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 || logs.len() != points.len() {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let b = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let a = my - b * mx;
    let rms = (logs.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((b, rms))
}

pub fn run_deficit_scaling(s: &DeficitSpec, opts: &RunOptions) -> Result<Parts, ExperimentError> {
    let mu = s.mu.build()?;
    let cost = CostFunction::from_spec(&s.cost)?;
    let ns = s.n_range.checked("N", 2)?;
    let mf = mean_field_with(&cost.matrix(mu.grid())?, &mu);

    let rows: Vec<(f64, Cell)> = ns
        .par_iter()
        .map(|&n| timed(opts, || f_n(&mu, n, &cost, Formulation::Direct, opts)))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "n",
        "v_sce_binom_n2",
        "j_n2_over_2",
        "ratio",
        "deficit",
        "wall_time_s",
    ]);
    let mut ratios = Vec::new();
    let mut deficits = Vec::new();
    for (&n, (f, t)) in ns.iter().zip(&rows) {
        let v = binomial_f64(n, 2) * f;
        let j = (n * n) as f64 / 2.0 * mf;
        let ratio = v / j;
        ratios.push(ratio);
        deficits.push(j - v);
        table.push(vec![n.into(), v.into(), j.into(), ratio.into(), (j - v).into(), t.clone()]);
    }
    let top = ns.len() / 2;
    let fit_points: Vec<(f64, f64)> = ns[top..].iter().map(|&n| n as f64).zip(deficits[top..].iter().copied()).collect();
    let fit = power_law_fit(&fit_points);
    let checks = vec![
        Check::new("ratio_at_most_one", ratios.iter().all(|r| *r <= 1.0 + CHECK_TOL), format!("{ratios:?}")),
        Check::new("ratio_nondecreasing", nondecreasing(&ratios), format!("{ratios:?}")),
        Check::new("deficit_nonnegative", deficits.iter().all(|d| *d >= -CHECK_TOL), format!("{deficits:?}")),
    ];
    let mut summary = BTreeMap::new();
    summary.insert("mean_field".into(), Some(mf));
    summary.insert("deficit_exponent".into(), fit.map(|f| f.0));
    summary.insert("deficit_fit_rms_residual".into(), fit.map(|f| f.1));
    let plot = line_plot(
        "V_SCE / J against N",
        "N",
        "ratio",
        vec![series("V_SCE / J", &ns, &ratios)],
        Some(("1", 1.0)),
    );
    Ok((table, checks, summary, Some(plot)))
}

pub fn run_counterexample(s: &CounterexampleSpec, opts: &RunOptions) -> Result<Parts, ExperimentError> {
    let mu = s.mu.build()?;
    let cost = CostFunction::truncated_quadratic(s.sigma)?;
    let ns = s.n_range.checked("N", 2)?;
    let c = cost.matrix(mu.grid())?;
    let mf = mean_field_with(&c, &mu);
    let torus = TorusGrid::new(1, s.torus_points, s.torus_period)?;
    let spectrum = classify_positive_definite(&cost, &torus)?;
    let ell0 = cost.eval(&vec![0.0; mu.grid().dimension()]);

    let rows: Vec<(f64, Cell)> = ns
        .par_iter()
        .map(|&n| timed(opts, || f_n(&mu, n, &cost, Formulation::Direct, opts)))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();

    let mut table = Table::new(&["n", "f_n", "mean_field", "gap", "independent_suboptimal", "wall_time_s"]);
    for (&n, (v, t)) in ns.iter().zip(&rows) {
        table.push(vec![n.into(), (*v).into(), mf.into(), (mf - v).into(), (mf > v + CHECK_TOL).into(), t.clone()]);
    }
    let atoms: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let mut checks = vec![
        Check::new("cost_vanishes_at_zero", ell0.abs() <= 1e-15, format!("l(0) = {ell0}")),
        Check::new(
            "spectrum_has_negative_coefficient",
            spectrum.class == Definiteness::Indefinite,
            format!("min coefficient {}", spectrum.min_coefficient),
        ),
        Check::new("f_n_zero", values.iter().all(|v| v.abs() <= CHECK_TOL), format!("{values:?}")),
    ];
    if atoms.len() >= 2 {
        let mut min_l = f64::INFINITY;
        let mut min_mass = f64::INFINITY;
        for &i in &atoms {
            for &j in &atoms {
                if i != j {
                    min_l = min_l.min(c.get(i, j));
                    min_mass = min_mass.min(mu.weights()[i] * mu.weights()[j]);
                }
            }
        }
        let floor = 0.5 * min_l * min_mass;
        let worst = values.iter().map(|v| mf - v).fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "independent_strictly_suboptimal",
            worst >= floor - CHECK_TOL && worst > 0.0,
            format!("smallest gap {worst}, floor {floor}"),
        ));
    }
    let mut summary = BTreeMap::new();
    summary.insert("mean_field".into(), Some(mf));
    summary.insert("spectrum_min".into(), Some(spectrum.min_coefficient));
    summary.insert("cost_at_zero".into(), Some(ell0));
    let plot = line_plot(
        "Truncated quadratic cost",
        "N",
        "F_N",
        vec![series("F_N", &ns, &values)],
        Some(("mean field", mf)),
    );
    Ok((table, checks, summary, Some(plot)))
}

/// Deterministic per-sample generator: the run seed selects the key, the
/// sample index the stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn run_df_bound_sweep(s: &DfSweepSpec, opts: &RunOptions) -> Result<Parts, ExperimentError> {
    let rows: Vec<_> = (0..s.samples)
        .into_par_iter()
        .map(|i| -> Result<_, ExperimentError> {
            let mut rng = sample_rng(opts.seed, i as u64);
            let m = rng.random_range(2..=s.max_points);
            let n = rng.random_range(2..=s.max_n);
            let xs: Vec<f64> = (0..m).map(|x| x as f64).collect();
            let grid = Arc::new(SupportGrid::line(&xs)?);
            let support = rng.random_range(1..=6);
            let gamma = random_exchangeable(&mut rng, grid, n, support)?;
            Ok((m, n, df_tv_bound_check(&gamma)?))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["sample", "points", "n", "tv", "setwise_tv", "bound", "one_marginal_tv", "pass"]);
    let mut worst_slack = f64::INFINITY;
    for (i, (m, n, r)) in rows.iter().enumerate() {
        worst_slack = worst_slack.min(r.bound - r.setwise_tv);
        table.push(vec![
            i.into(),
            (*m).into(),
            (*n).into(),
            r.tv.into(),
            r.setwise_tv.into(),
            r.bound.into(),
            r.one_marginal_tv.into(),
            r.pass.into(),
        ]);
    }
    let failed = rows.iter().filter(|r| !r.2.pass).count();
    let checks = vec![Check::new("all_within_bound", failed == 0, format!("{failed} of {} failed", rows.len()))];
    let mut summary = BTreeMap::new();
    summary.insert("smallest_slack".into(), Some(worst_slack));
    Ok((table, checks, summary, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> MeasureSpec {
        MeasureSpec::uniform_line(&[0.0, 1.0])
    }

    const GAUSS: &str = "gaussian:s=0.7071067811865476";

    #[test]
    fn convergence_two_point_ladder() {
        let spec = ExperimentSpec::Convergence(ConvergenceSpec {
            mu: two_points(),
            cost: GAUSS.into(),
            n_range: IntRange(2, 10),
            formulation: Formulation::Direct,
        });
        let r = run(&spec, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.checks.iter().any(|c| c.name == "gap_within_sup_c_over_n"));
        let f = r.table.numbers("f_n").unwrap();
        let e = (-1.0f64).exp();
        assert!((f[0].unwrap() - e).abs() < 1e-9);
        assert!((f[2].unwrap() - (1.0 + 2.0 * e) / 3.0).abs() < 1e-9);
        assert_eq!(r.table.rows.len(), 9);
        assert!(r.table.column("wall_time_s").unwrap().iter().all(|c| *c == Cell::Empty));
    }

    #[test]
    fn counterexample_flags_indefinite_cost() {
        let spec = ExperimentSpec::Counterexample(CounterexampleSpec {
            sigma: 2.0,
            mu: two_points(),
            n_range: IntRange(2, 6),
            torus_points: 64,
            torus_period: 16.0,
        });
        let r = run(&spec, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        let mf = r.summary["mean_field"].unwrap();
        assert!((mf - ((-0.125f64).exp() - (-2.0f64).exp()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn convergence_without_definiteness_blanks_the_claim() {
        let spec = ExperimentSpec::Convergence(ConvergenceSpec {
            mu: two_points(),
            cost: "truncated_quadratic:sigma=2".into(),
            n_range: IntRange(2, 4),
            formulation: Formulation::Direct,
        });
        let r = run(&spec, &RunOptions::default()).unwrap();
        assert!(r.passed());
        assert!(r.table.column("rate_bound").unwrap().iter().all(|c| *c == Cell::Empty));
    }

    #[test]
    fn hierarchy_and_deficit() {
        let spec = ExperimentSpec::Hierarchy(HierarchySpec {
            mu: two_points(),
            n: 4,
            cost: GAUSS.into(),
            k_range: IntRange(2, 8),
        });
        let r = run(&spec, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.checks.iter().any(|c| c.name == "k_equals_n_matches_sce"));

        let spec = ExperimentSpec::DeficitScaling(DeficitSpec {
            mu: MeasureSpec::uniform_line(&[0.0, 1.0, 2.0, 3.0]),
            cost: "coulomb_regularized:eps=0.25".into(),
            n_range: IntRange(2, 8),
        });
        let r = run(&spec, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.summary["deficit_exponent"].is_some());
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = ExperimentSpec::DfBoundSweep(DfSweepSpec { samples: 30, max_points: 4, max_n: 6 });
        let opts = RunOptions { seed: 9, ..RunOptions::default() };
        let a = run(&spec, &opts).unwrap();
        let b = run(&spec, &opts).unwrap();
        assert!(a.passed());
        assert_eq!(a.table.to_csv().unwrap(), b.table.to_csv().unwrap());
        let c = run(&spec, &RunOptions { seed: 10, ..opts }).unwrap();
        assert_ne!(a.metadata.config_hash, c.metadata.config_hash);
    }

    #[test]
    fn spec_validation() {
        let bad = ExperimentSpec::Convergence(ConvergenceSpec {
            mu: two_points(),
            cost: GAUSS.into(),
            n_range: IntRange(5, 3),
            formulation: Formulation::Direct,
        });
        assert!(matches!(bad.validate(DEFAULT_BUDGET), Err(ExperimentError::Spec(_))));
        let big = ExperimentSpec::Convergence(ConvergenceSpec {
            mu: MeasureSpec::uniform_line(&(0..40).map(f64::from).collect::<Vec<_>>()),
            cost: GAUSS.into(),
            n_range: IntRange(2, 12),
            formulation: Formulation::Direct,
        });
        assert!(matches!(big.validate(DEFAULT_BUDGET), Err(ExperimentError::Mmot(MmotError::Budget(_)))));
        let json = r#"{"kind":"df_bound_sweep","samples":1,"max_points":2,"max_n":2,"extra":1}"#;
        assert!(serde_json::from_str::<ExperimentSpec>(json).is_err());
        let json = r#"{"kind":"df_bound_sweep","samples":1,"max_points":2,"max_n":2}"#;
        assert!(serde_json::from_str::<ExperimentSpec>(json).is_ok());
    }

    #[test]
    fn power_law_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (2..8).map(|n| (n as f64, 3.0 * (n as f64).powf(1.5))).collect();
        let (b, rms) = power_law_fit(&pts).unwrap();
        assert!((b - 1.5).abs() < 1e-12 && rms < 1e-12);
        assert!(power_law_fit(&[(2.0, 0.0), (3.0, 1.0)]).is_none());
    }
}
