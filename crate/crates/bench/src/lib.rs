//! Fixed inputs shared by the benchmarks, built from seeded generators so
//! every run times the same instances.

use std::sync::Arc;

use mmot_core::experiments::sample_rng;
use mmot_core::fourier::TorusGrid;
use mmot_core::sampling::{random_exchangeable, random_measure};
use mmot_core::{CostFunction, DiscreteMeasure, MmotProblem, PairMeasure, SupportGrid};

pub const SEED: u64 = 2024;

pub fn line(m: usize) -> Arc<SupportGrid> {
    let xs: Vec<f64> = (0..m).map(|x| x as f64).collect();
    Arc::new(SupportGrid::line(&xs).expect("distinct points"))
}

pub fn gaussian() -> CostFunction {
    CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).expect("positive width")
}

/// Uniform measure on `m` points with the Gaussian pair cost.
pub fn transport_problem(m: usize, n: usize) -> MmotProblem {
    MmotProblem::new(DiscreteMeasure::uniform(line(m)), n, gaussian()).expect("n >= 2")
}

/// A random measure on `m` points; its product pair is representable.
pub fn product_pair(m: usize) -> PairMeasure {
    random_measure(&mut sample_rng(SEED, m as u64), line(m)).product_pair()
}

/// The 2-marginal of a random exchangeable `n`-body measure on `m` points.
pub fn exchangeable_pair(m: usize, n: usize) -> PairMeasure {
    let mut rng = sample_rng(SEED ^ 0x55, (m * 100 + n) as u64);
    random_exchangeable(&mut rng, line(m), n, 8)
        .and_then(|g| g.pair_marginal())
        .expect("valid sizes")
}

/// The perfectly anticorrelated pair on two points.
pub fn anticorrelated() -> PairMeasure {
    PairMeasure::new(line(2), vec![0.0, 0.5, 0.5, 0.0]).expect("normalized")
}

/// A `d`-dimensional torus with `per_axis` points and its sampled Gaussian
/// kernel.
pub fn torus_kernel(d: usize, per_axis: usize) -> (TorusGrid, Vec<f64>) {
    let torus = TorusGrid::new(d, per_axis, per_axis as f64 / 2.0).expect("small torus");
    let kernel = torus.sample_cost(&gaussian()).expect("bounded cost");
    (torus, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(transport_problem(3, 4).n, 4);
        assert!(product_pair(4).is_symmetric());
        assert!(exchangeable_pair(3, 5).is_symmetric());
        assert_eq!(torus_kernel(2, 16).1.len(), 256);
    }
}
