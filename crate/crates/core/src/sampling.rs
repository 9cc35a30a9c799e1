//! Seeded random instances for property checks and fuzz experiments.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::definetti::Mixture;
use crate::measure::multiset::MultisetSpace;
use crate::measure::{DiscreteMeasure, MeasureError, NBodyMeasure, SupportGrid};

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Random weights on `support` distinct indices out of `len`, all others zero.
pub fn random_weights<R: Rng>(rng: &mut R, len: usize, support: usize) -> Vec<f64> {
    let mut w = vec![0.0; len];
    for i in sample(rng, len, support.clamp(1, len)) {
        w[i] = rng.random_range(0.05..1.0);
    }
    normalize(w)
}

/// A random probability measure with full support on `grid`.
pub fn random_measure<R: Rng>(rng: &mut R, grid: Arc<SupportGrid>) -> DiscreteMeasure {
    let w = random_weights(rng, grid.len(), grid.len());
    DiscreteMeasure::new(grid, w).expect("normalized")
}

/// A random probability measure supported on at most `atoms` points.
pub fn random_sparse_measure<R: Rng>(
    rng: &mut R,
    grid: Arc<SupportGrid>,
    atoms: usize,
) -> DiscreteMeasure {
    let support = rng.random_range(1..=atoms.clamp(1, grid.len()));
    let w = random_weights(rng, grid.len(), support);
    DiscreteMeasure::new(grid, w).expect("normalized")
}

/// A random exchangeable measure in multiset mode with a random number of
/// support multisets (at most `max_support`).
pub fn random_exchangeable<R: Rng>(
    rng: &mut R,
    grid: Arc<SupportGrid>,
    n: usize,
    max_support: usize,
) -> Result<NBodyMeasure, MeasureError> {
    let len = MultisetSpace::new(grid.len(), n)
        .len()
        .ok_or_else(|| MeasureError::TooLarge(format!("{n}-multisets")))?;
    let support = rng.random_range(1..=max_support.clamp(1, len));
    NBodyMeasure::multiset(grid, n, random_weights(rng, len, support))
}

/// A random mixture with `components` components, each supported on at most
/// `atoms` points.
pub fn random_mixture<R: Rng>(
    rng: &mut R,
    grid: Arc<SupportGrid>,
    components: usize,
    atoms: usize,
) -> Mixture {
    let comps = (0..components.max(1))
        .map(|_| random_sparse_measure(rng, grid.clone(), atoms))
        .collect::<Vec<_>>();
    let w = random_weights(rng, comps.len(), comps.len());
    Mixture::new(comps, w).expect("components share the grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_valid_and_seeded() {
        let g = Arc::new(SupportGrid::line(&[0.0, 1.0, 2.0]).unwrap());
        let a = random_exchangeable(&mut ChaCha8Rng::seed_from_u64(1), g.clone(), 4, 5).unwrap();
        let b = random_exchangeable(&mut ChaCha8Rng::seed_from_u64(1), g.clone(), 4, 5).unwrap();
        assert_eq!(a, b);
        let mix = random_mixture(&mut ChaCha8Rng::seed_from_u64(2), g, 3, 2);
        assert_eq!(mix.components().len(), 3);
        assert!(mix
            .components()
            .iter()
            .all(|q| q.weights().iter().filter(|w| **w > 0.0).count() <= 2));
    }
}
