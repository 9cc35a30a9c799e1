//! The floating-point simplex against the exact rational simplex.

use mmot_core::lp::{
    solve, solve_exact, solve_with, write_mps, FarkasCertificate, LinearProgram, LpOptions,
    LpStatus, Pricing, TAU_FARKAS, TAU_FEAS, TAU_GAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entries are multiples of 1/8 so the exact solver sees the same data.
fn random_lp(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LinearProgram {
    let dense: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        0.0
                    } else {
                        rng.random_range(-16i32..=16) as f64 / 8.0
                    }
                })
                .collect()
        })
        .collect();
    let kind = rng.random_range(0..3);
    let rhs: Vec<f64> = match kind {
        // feasible by construction
        0 | 1 => {
            let x: Vec<f64> = (0..cols)
                .map(|_| if rng.random_bool(0.5) { rng.random_range(0..4) as f64 / 4.0 } else { 0.0 })
                .collect();
            dense.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect()
        }
        _ => (0..rows).map(|_| rng.random_range(-8i32..=8) as f64 / 4.0).collect(),
    };
    let cost: Vec<f64> = (0..cols)
        .map(|_| {
            if kind == 0 {
                rng.random_range(0..16) as f64 / 8.0
            } else {
                rng.random_range(-8i32..=16) as f64 / 8.0
            }
        })
        .collect();
    LinearProgram::from_dense(cost, &dense, rhs).unwrap()
}

#[test]
fn float_and_exact_agree_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut counts = [0usize; 3];
    for case in 0..200 {
        let lp = random_lp(&mut rng, 10, 20);
        let exact = solve_exact(&lp).unwrap();
        let float = solve(&lp).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert_eq!(float.status, exact.status, "case {case}");
        match float.status {
            LpStatus::Optimal => {
                counts[0] += 1;
                let v = exact.objective_f64();
                assert!((float.objective - v).abs() <= 1e-8, "case {case}: {} vs {v}", float.objective);
                assert!(lp.primal_residual(&float.primal) <= TAU_FEAS * 4.0);
                assert!(float.dual_objective(&lp) <= float.objective + TAU_GAP);
            }
            LpStatus::Infeasible => {
                counts[1] += 1;
                let cert = float.farkas.as_ref().unwrap();
                assert!(cert.verify(&lp, TAU_FEAS, TAU_FARKAS), "case {case}");
                let exact_cert = exact.to_float(&lp).farkas.unwrap();
                assert!(exact_cert.margin > 0.0 && exact_cert.max_violation <= 1e-12);
            }
            LpStatus::Unbounded => {
                counts[2] += 1;
                let d = float.ray.as_ref().unwrap();
                assert!(d.iter().all(|v| *v >= 0.0));
                assert!(lp.evaluate(d) < 0.0);
            }
        }
    }
    // the generator must exercise every outcome
    assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
}

#[test]
fn every_pricing_rule_reaches_the_same_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let lp = random_lp(&mut rng, 8, 16);
        let reference = solve_exact(&lp).unwrap();
        for pricing in [Pricing::SteepestEdge, Pricing::Dantzig, Pricing::Bland] {
            let r = solve_with(&lp, &LpOptions { pricing, ..LpOptions::default() }).unwrap();
            assert_eq!(r.status, reference.status);
            if r.status == LpStatus::Optimal {
                assert!((r.objective - reference.objective_f64()).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn degenerate_program_with_tied_vertices() {
    // min x1 + x2 + x3 + x4 subject to x1 + x2 = 1, x3 + x4 = 1, x1 + x3 = 1:
    // every vertex has value 2, and the third row is degenerate at x = e1 + e4
    let lp = LinearProgram::from_dense(
        vec![1.0; 4],
        &[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0, 0.0]],
        vec![1.0, 1.0, 1.0],
    )
    .unwrap();
    let exact = solve_exact(&lp).unwrap();
    for pricing in [Pricing::SteepestEdge, Pricing::Bland] {
        let r = solve_with(&lp, &LpOptions { pricing, ..LpOptions::default() }).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-12);
        assert!((r.objective - exact.objective_f64()).abs() < 1e-12);
    }
}

#[test]
fn highly_degenerate_feasibility_problem_terminates() {
    // many identical columns and a zero right-hand side row
    let mut rows = vec![vec![1.0; 60], vec![0.0; 60]];
    for j in 0..60 {
        rows[1][j] = if j % 2 == 0 { 1.0 } else { -1.0 };
    }
    let lp = LinearProgram::from_dense(vec![0.0; 60], &rows, vec![1.0, 0.0]).unwrap();
    let opts = LpOptions { degenerate_limit: 2, ..LpOptions::default() };
    let r = solve_with(&lp, &opts).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
}

#[test]
fn transportation_example() {
    let e = (-1.0f64).exp();
    let lp = LinearProgram::from_dense(
        vec![1.0, e, e, 1.0],
        &[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ],
        vec![0.5; 4],
    )
    .unwrap();
    let r = solve(&lp).unwrap();
    assert!((r.objective - e).abs() < 1e-12);
    let x = solve_exact(&lp).unwrap();
    assert!((x.objective_f64() - e).abs() < 1e-15);
}

#[test]
fn infeasible_pair_certificate_from_both_solvers() {
    let lp = LinearProgram::from_dense(vec![1.0], &[vec![1.0], vec![1.0]], vec![1.0, 2.0]).unwrap();
    let f = solve(&lp).unwrap();
    let e = solve_exact(&lp).unwrap();
    assert_eq!(f.status, LpStatus::Infeasible);
    assert_eq!(e.status, LpStatus::Infeasible);
    let y = e.to_float(&lp).farkas.unwrap().y;
    assert!(FarkasCertificate::evaluate(&lp, y).verify(&lp, TAU_FEAS, TAU_FARKAS));
}

#[test]
fn mps_dump_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lp = random_lp(&mut rng, 4, 6);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_mps(&lp, "rand", &mut a).unwrap();
    write_mps(&lp, "rand", &mut b).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().ends_with("ENDATA\n"));
}
