use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mmot_core::cost::CostError;
use mmot_core::definetti::{df_lift, df_tv_bound_check, df_tv_bound_check_k};
use mmot_core::experiments::{self, ExperimentError, ExperimentResult};
use mmot_core::fourier::{dft, uniqueness_check, variance_decomposition_sampled, FourierError, TorusGrid};
use mmot_core::lp::write_mps;
use mmot_core::mmot::{direct_lp, solve_mmot, Formulation, MmotError};
use mmot_core::report::{format_f64, persist, Bundle, Cell, Table};
use mmot_core::representability::{is_n_representable_with, RepresentabilityError, Verdict};
use mmot_core::validation::run_validation;
use mmot_core::{AnyMeasure, CostFunction, MmotProblem, Mixture};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{CliError, GlobalOpts};

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn read_measure(path: &Path) -> Result<AnyMeasure, CliError> {
    AnyMeasure::from_json(&read_input(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn cost_error(e: CostError) -> CliError {
    match e {
        CostError::BadSpec(_) | CostError::InvalidParameter(_) | CostError::Io { .. } => CliError::Config(e.to_string()),
        other => CliError::domain("cost", other),
    }
}

fn parse_cost(spec: &str) -> Result<CostFunction, CliError> {
    CostFunction::from_spec(spec).map_err(cost_error)
}

fn mmot_error(e: MmotError) -> CliError {
    match e {
        MmotError::BodyCount(_) => CliError::Config(e.to_string()),
        MmotError::Cost(c) => cost_error(c),
        MmotError::Budget(_) => CliError::domain("budget", e),
        MmotError::Lp(_) => CliError::domain("lp", e),
        MmotError::Check(_) => CliError::domain("check_failed", e),
        other => CliError::domain("mmot", other),
    }
}

fn representability_error(e: RepresentabilityError) -> CliError {
    match e {
        RepresentabilityError::Order(_) => CliError::Config(e.to_string()),
        RepresentabilityError::Budget(_) => CliError::domain("budget", e),
        RepresentabilityError::NotSymmetric(_) => CliError::domain("not_symmetric", e),
        other => CliError::domain("representability", other),
    }
}

fn fourier_error(e: FourierError) -> CliError {
    CliError::domain("fourier", e)
}

fn experiment_error(e: ExperimentError) -> CliError {
    if e.is_config() {
        CliError::Config(e.to_string())
    } else {
        CliError::domain("experiment", e)
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::domain("io", e))
}

fn write_bundle(bundle: &Bundle, dir: &Path) -> Result<(), CliError> {
    let manifest = persist(bundle, dir).map_err(|e| CliError::domain("io", e))?;
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    Ok(())
}

fn write_result(result: Value, dir: &Path) -> Result<(), CliError> {
    write_bundle(
        &Bundle {
            result: Some(result),
            ..Bundle::default()
        },
        dir,
    )
}

pub fn solve(
    g: &GlobalOpts,
    mu_path: &Path,
    cost_spec: &str,
    n: usize,
    formulation: Formulation,
    mps: Option<&Path>,
) -> Result<(), CliError> {
    let mu = read_measure(mu_path)?
        .into_one()
        .map_err(|e| CliError::Config(format!("{}: {e}", mu_path.display())))?;
    let cost = parse_cost(cost_spec)?;
    let problem = MmotProblem::new(mu.clone(), n, cost)
        .map_err(mmot_error)?
        .with_formulation(formulation)
        .with_budget(g.budget());
    if let Some(path) = mps {
        if formulation != Formulation::Direct {
            return Err(CliError::Config("--mps needs --formulation direct".into()));
        }
        let lp = direct_lp(&problem).map_err(mmot_error)?;
        let file = File::create(path).map_err(|e| CliError::domain("io", format!("{}: {e}", path.display())))?;
        write_mps(&lp, "mmot", BufWriter::new(file))
            .map_err(|e| CliError::domain("io", format!("{}: {e}", path.display())))?;
    }
    let report = solve_mmot(&problem).map_err(mmot_error)?;
    println!("F_{n} = {:.6}", report.value);
    println!("C_N = {}", format_f64(report.total));
    println!("status: {:?}, marginal residual {:e}", report.status, report.marginal_residual);
    write_result(
        json!({
            "command": "solve",
            "cost": cost_spec,
            "n": n,
            "mu": AnyMeasure::One(mu).to_doc(),
            "report": to_value(&report)?,
        }),
        &g.out_dir(),
    )
}

pub fn repcheck(g: &GlobalOpts, mu2_path: &Path, n: usize) -> Result<(), CliError> {
    let mu2 = read_measure(mu2_path)?
        .into_pair()
        .map_err(|e| CliError::Config(format!("{}: {e}", mu2_path.display())))?;
    let answer =
        is_n_representable_with(&mu2, n, g.budget(), &Default::default()).map_err(representability_error)?;
    let word = match answer.verdict {
        Verdict::Feasible => "feasible",
        Verdict::Infeasible => "infeasible",
        Verdict::Marginal => "marginal",
    };
    println!("{word}");
    if let Some(c) = &answer.certificate {
        println!(
            "certificate: margin {:e}, verified {}",
            c.margin, answer.certificate_verified
        );
    }
    write_result(
        json!({
            "command": "repcheck",
            "mu2": AnyMeasure::Pair(mu2).to_doc(),
            "answer": to_value(&answer)?,
        }),
        &g.out_dir(),
    )
}

pub fn lift(g: &GlobalOpts, gamma_path: &Path, k: Option<usize>) -> Result<(), CliError> {
    let gamma = read_measure(gamma_path)?
        .into_nbody()
        .map_err(|e| CliError::Config(format!("{}: {e}", gamma_path.display())))?;
    let bad_order = |e: mmot_core::measure::MeasureError| CliError::Config(e.to_string());
    let pair = df_tv_bound_check(&gamma).map_err(bad_order)?;
    let general = k.map(|k| df_tv_bound_check_k(&gamma, k)).transpose().map_err(bad_order)?;
    let mixture = df_lift(&gamma).map_err(|e| CliError::domain("measure", e))?;
    println!(
        "N = {}: setwise tv {} vs bound {}: {}",
        pair.n,
        format_f64(pair.setwise_tv),
        format_f64(pair.bound),
        if pair.pass { "PASS" } else { "FAIL" }
    );
    if let Some(b) = &general {
        println!(
            "k = {}: tv {} vs bound {}: {}",
            b.k,
            format_f64(b.tv),
            format_f64(b.bound),
            if b.pass { "PASS" } else { "FAIL" }
        );
    }
    let passed = pair.pass && general.as_ref().is_none_or(|b| b.pass);
    write_result(
        json!({
            "command": "lift",
            "pair_bound": to_value(&pair)?,
            "k_bound": to_value(&general)?,
            "lift": to_value(&mixture.to_doc())?,
        }),
        &g.out_dir(),
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::domain("check_failed", "de Finetti bound violated"))
    }
}

pub fn fourier(g: &GlobalOpts, mixture_path: &Path, cost_spec: &str) -> Result<(), CliError> {
    let mixture: Mixture = serde_json::from_str(&read_input(mixture_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", mixture_path.display())))?;
    let cost = parse_cost(cost_spec)?;
    let grid = mixture.grid();
    // a periodic lattice is used as is; any other grid is embedded in a torus
    let torus = TorusGrid::from_support_grid(grid)
        .or_else(|_| TorusGrid::enclosing(grid, 64))
        .map_err(fourier_error)?;
    let kernel = torus.sample_cost(&cost).map_err(fourier_error)?;
    let dec = variance_decomposition_sampled(&torus, &kernel, &mixture).map_err(fourier_error)?;
    let uniq = uniqueness_check(&torus, &kernel, &mixture).map_err(fourier_error)?;
    let spectrum = dft(&torus, &kernel);

    let mut columns = vec!["index".to_string()];
    columns.extend((0..torus.dimension()).map(|a| format!("k{a}")));
    columns.extend(["real".to_string(), "imag".to_string()]);
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&names);
    for (idx, c) in spectrum.values().iter().enumerate() {
        let mut row = vec![Cell::from(idx)];
        row.extend(torus.frequency(idx).into_iter().map(Cell::from));
        row.push(Cell::from(c.re));
        row.push(Cell::from(c.im));
        table.push(row);
    }

    println!("mean field     {}", format_f64(dec.mean_field));
    println!("variance term  {}", format_f64(dec.variance_term));
    println!("c_infinity     {}", format_f64(dec.c_infinity));
    println!("identity error {:e}", dec.identity_error);
    println!("spectrum min   {}", format_f64(uniq.spectrum_min));
    let result = json!({
        "command": "fourier",
        "cost": cost_spec,
        "torus": {
            "dimension": torus.dimension(),
            "per_axis": torus.per_axis(),
            "period": torus.period(),
        },
        "decomposition": to_value(&dec)?,
        "uniqueness": to_value(&uniq)?,
    });
    write_bundle(
        &Bundle {
            result: Some(result),
            tables: vec![("spectrum".to_string(), table)],
            plots: Vec::new(),
        },
        &g.out_dir(),
    )
}

fn summarize(r: &ExperimentResult) {
    let failed = r.failures();
    println!(
        "{}: {} rows, {} of {} checks passed",
        r.kind,
        r.table.rows.len(),
        r.checks.len() - failed.len(),
        r.checks.len()
    );
    for c in failed {
        println!("  FAIL {}: {}", c.name, c.detail);
    }
}

pub fn experiment(g: &GlobalOpts, config_path: &Path) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = g.budget {
        cfg.budget = budget;
    }
    let out = g
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("mmot-out"));
    let opts = cfg.run_options();
    for spec in &cfg.experiments {
        spec.validate(opts.budget).map_err(experiment_error)?;
    }
    let single = cfg.experiments.len() == 1;
    let mut failures = 0;
    for (i, spec) in cfg.experiments.iter().enumerate() {
        let result = experiments::run(spec, &opts).map_err(experiment_error)?;
        summarize(&result);
        let dir = if single {
            out.clone()
        } else {
            out.join(format!("{:02}_{}", i + 1, spec.kind()))
        };
        write_bundle(&result.to_bundle().map_err(experiment_error)?, &dir)?;
        if !result.passed() {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::domain(
            "check_failed",
            format!("{failures} experiment(s) had failing checks"),
        ));
    }
    Ok(())
}

pub fn validate(g: &GlobalOpts) -> Result<(), CliError> {
    let report = run_validation(g.seed());
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    write_result(to_value(&report)?, &g.out_dir())?;
    let failed = report.failures().len();
    if failed > 0 {
        return Err(CliError::domain("check_failed", format!("{failed} invariant check(s) failed")));
    }
    println!("all {} checks passed", report.checks.len());
    Ok(())
}
