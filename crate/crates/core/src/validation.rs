//! The invariant suite behind `mmot validate`: every module's cheap
//! self-consistency checks, run on seeded random instances.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::cost::{nbody_cost, pair_cost_integral, CostFunction};
use crate::definetti::{df_tv_bound_check, mixture_pair_marginal};
use crate::experiments::{self, sample_rng, Check, ExperimentSpec, RunOptions};
use crate::fourier::{plancherel_bilinear_sampled, variance_decomposition_sampled, TorusGrid};
use crate::lp::{self, solve_exact, LinearProgram, LpStatus};
use crate::measure::{DiscreteMeasure, NBodyMeasure, PairMeasure, SupportGrid};
use crate::mmot::{solve_mmot, solve_reduced, Formulation, MmotProblem};
use crate::representability::{is_n_representable, Verdict};
use crate::sampling::{random_exchangeable, random_measure, random_mixture};

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

type Suite = fn(u64) -> Result<Vec<Check>, String>;

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn line(m: usize) -> Arc<SupportGrid> {
    let xs: Vec<f64> = (0..m).map(|x| x as f64).collect();
    Arc::new(SupportGrid::line(&xs).expect("distinct points"))
}

fn gaussian() -> CostFunction {
    CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).expect("positive width")
}

fn measure_suite(seed: u64) -> Result<Vec<Check>, String> {
    let mut worst_marginal: f64 = 0.0;
    let mut worst_cost: f64 = 0.0;
    for i in 0..20 {
        let mut rng = sample_rng(seed, i);
        let m = rng.random_range(2..=4);
        let n = rng.random_range(2..=5);
        let mu = random_measure(&mut rng, line(m));
        let g = NBodyMeasure::product(&mu, n).map_err(err)?;
        worst_marginal = worst_marginal.max(g.one_marginal().map_err(err)?.tv_distance(&mu).map_err(err)?);
        let pair = g.pair_marginal().map_err(err)?;
        worst_marginal = worst_marginal.max(pair.tv_distance(&mu.product_pair()).map_err(err)?);
        // C_N[product] = C(N,2) * mean field
        let c = gaussian();
        let lhs = nbody_cost(&c, &g).map_err(err)?;
        let rhs = (n * (n - 1) / 2) as f64 * pair_cost_integral(&c, &mu.product_pair()).map_err(err)?;
        worst_cost = worst_cost.max((lhs - rhs).abs());
    }
    Ok(vec![
        check("measure.product_marginals", worst_marginal <= 1e-12, format!("max deviation {worst_marginal:e}")),
        check("cost.product_nbody_cost", worst_cost <= 1e-10, format!("max deviation {worst_cost:e}")),
    ])
}

fn lp_suite(seed: u64) -> Result<Vec<Check>, String> {
    let mut mismatches = 0;
    for i in 0..30 {
        let mut rng = sample_rng(seed ^ 0x1b, i);
        let (r, c) = (6, 12);
        let dense: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.random_range(-8i32..=8) as f64 / 4.0).collect())
            .collect();
        let x: Vec<f64> = (0..c).map(|_| rng.random_range(0..3) as f64).collect();
        let b: Vec<f64> = dense.iter().map(|row| row.iter().zip(&x).map(|(a, v)| a * v).sum()).collect();
        let cost: Vec<f64> = (0..c).map(|_| rng.random_range(0..8) as f64 / 4.0).collect();
        let p = LinearProgram::from_dense(cost, &dense, b).map_err(err)?;
        let f = lp::solve(&p).map_err(err)?;
        let e = solve_exact(&p).map_err(err)?;
        let agree = f.status == e.status
            && (f.status != LpStatus::Optimal || (f.objective - e.objective_f64()).abs() <= 1e-8);
        if !agree {
            mismatches += 1;
        }
    }
    Ok(vec![check("lp.float_matches_exact", mismatches == 0, format!("{mismatches} of 30 differ"))])
}

fn mmot_suite(_seed: u64) -> Result<Vec<Check>, String> {
    let mu = DiscreteMeasure::uniform(line(2));
    let e = (-1.0f64).exp();
    let mut worst: f64 = 0.0;
    let mut reduced: f64 = 0.0;
    for n in 2..=6usize {
        let m = n.div_ceil(2) as f64;
        let closed = ((m - 1.0) + m * e) / (2.0 * m - 1.0);
        let p = MmotProblem::new(mu.clone(), n, gaussian()).map_err(err)?;
        let v = solve_mmot(&p).map_err(err)?.value;
        worst = worst.max((v - closed).abs());
        let r = solve_reduced(&mu, n, &gaussian()).map_err(err)?.value;
        reduced = reduced.max((r - v).abs());
    }
    let p = MmotProblem::new(DiscreteMeasure::uniform(line(3)), 3, gaussian())
        .map_err(err)?
        .with_formulation(Formulation::Reduced);
    let residual = solve_mmot(&p).map_err(err)?.marginal_residual;
    Ok(vec![
        check("mmot.two_point_ladder", worst <= 1e-9, format!("max deviation {worst:e}")),
        check("mmot.reduced_equals_direct", reduced <= 1e-9, format!("max deviation {reduced:e}")),
        check("mmot.marginal_residual", residual <= 1e-9, format!("{residual:e}")),
    ])
}

fn representability_suite(seed: u64) -> Result<Vec<Check>, String> {
    let anti = PairMeasure::new(line(2), vec![0.0, 0.5, 0.5, 0.0]).map_err(err)?;
    let two = is_n_representable(&anti, 2).map_err(err)?;
    let three = is_n_representable(&anti, 3).map_err(err)?;
    let mut products_ok = true;
    for i in 0..10 {
        let mut rng = sample_rng(seed ^ 0x2c, i);
        let mu = random_measure(&mut rng, line(3));
        products_ok &= is_n_representable(&mu.product_pair(), 5).map_err(err)?.feasible();
    }
    // the 2-marginal of any exchangeable N-body measure is N-representable
    let mut marginals_ok = true;
    for i in 0..10 {
        let mut rng = sample_rng(seed ^ 0x2d, i);
        let g = random_exchangeable(&mut rng, line(3), 4, 5).map_err(err)?;
        marginals_ok &= is_n_representable(&g.pair_marginal().map_err(err)?, 4).map_err(err)?.feasible();
    }
    Ok(vec![
        check("representability.anticorrelated_n2", two.feasible(), format!("{:?}", two.verdict)),
        check(
            "representability.anticorrelated_n3",
            three.verdict == Verdict::Infeasible && three.certificate_verified,
            format!("{:?}", three.verdict),
        ),
        check("representability.products", products_ok, "mu (x) mu is 5-representable"),
        check("representability.marginals", marginals_ok, "gamma_2 is N-representable"),
    ])
}

fn definetti_suite(seed: u64) -> Result<Vec<Check>, String> {
    let mut failed = 0;
    for i in 0..50 {
        let mut rng = sample_rng(seed ^ 0x3e, i);
        let m = rng.random_range(2..=4);
        let n = rng.random_range(2..=6);
        let g = random_exchangeable(&mut rng, line(m), n, 6).map_err(err)?;
        if !df_tv_bound_check(&g).map_err(err)?.pass {
            failed += 1;
        }
    }
    let g3 = NBodyMeasure::product(&DiscreteMeasure::uniform(line(2)), 3).map_err(err)?;
    let tv = df_tv_bound_check(&g3).map_err(err)?.tv;
    Ok(vec![
        check("definetti.bound_on_random", failed == 0, format!("{failed} of 50 failed")),
        check("definetti.uniform_cube", (tv - 1.0 / 3.0).abs() <= 1e-12, format!("tv {tv}")),
    ])
}

fn fourier_suite(seed: u64) -> Result<Vec<Check>, String> {
    let torus = TorusGrid::new(1, 16, 8.0).map_err(err)?;
    let grid = Arc::new(torus.support_grid());
    let kernel = torus.sample_cost(&gaussian()).map_err(err)?;
    let mut plancherel: f64 = 0.0;
    let mut identity: f64 = 0.0;
    let mut min_variance = f64::INFINITY;
    let mut pair_route: f64 = 0.0;
    for i in 0..20 {
        let mut rng = sample_rng(seed ^ 0x4f, i);
        let a: Vec<f64> = (0..torus.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..torus.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        plancherel = plancherel.max(plancherel_bilinear_sampled(&torus, &kernel, &a, &b).map_err(err)?.relative_error());
        let mix = random_mixture(&mut rng, grid.clone(), 3, 4);
        let d = variance_decomposition_sampled(&torus, &kernel, &mix).map_err(err)?;
        identity = identity.max(d.identity_error);
        min_variance = min_variance.min(d.variance_term);
        // the mixture pair marginal integrates to c_infinity
        let c = pair_cost_integral(&gaussian(), &mixture_pair_marginal(&mix)).map_err(err)?;
        pair_route = pair_route.max((c - d.c_infinity).abs());
    }
    Ok(vec![
        check("fourier.plancherel", plancherel <= 1e-10, format!("max relative error {plancherel:e}")),
        check("fourier.variance_identity", identity <= 1e-10, format!("max error {identity:e}")),
        check(
            "fourier.variance_nonnegative",
            min_variance >= -1e-12,
            format!("min variance term {min_variance:e}"),
        ),
        check("fourier.pair_marginal_route", pair_route <= 1e-10, format!("max deviation {pair_route:e}")),
    ])
}

fn experiments_suite(_seed: u64) -> Result<Vec<Check>, String> {
    let spec: ExperimentSpec = serde_json::from_value(serde_json::json!({
        "kind": "counterexample",
        "sigma": 2.0,
        "mu": { "points": [0.0, 1.0] },
    }))
    .map_err(err)?;
    let r = experiments::run(&spec, &RunOptions::default()).map_err(err)?;
    Ok(r
        .checks
        .into_iter()
        .map(|c| Check {
            name: format!("experiments.counterexample.{}", c.name),
            ..c
        })
        .collect())
}

const SUITES: [(&str, Suite); 7] = [
    ("measure", measure_suite),
    ("lp", lp_suite),
    ("mmot", mmot_suite),
    ("representability", representability_suite),
    ("definetti", definetti_suite),
    ("fourier", fourier_suite),
    ("experiments", experiments_suite),
];

/// Runs every suite; a suite that errors contributes one failed check.
pub fn run_validation(seed: u64) -> ValidationReport {
    let checks = SUITES
        .iter()
        .flat_map(|(name, suite)| match suite(seed) {
            Ok(c) => c,
            Err(e) => vec![check(&format!("{name}.error"), false, e)],
        })
        .collect();
    ValidationReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let r = run_validation(7);
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.checks.len() >= 15);
    }
}
