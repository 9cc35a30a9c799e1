//! Probability measures on finite supports: one-body measures, pair measures
//! and N-body measures (dense tuples or symmetric multisets).

mod grid;
mod json;
pub mod multiset;
mod nbody;

use std::sync::Arc;

use thiserror::Error;

pub use grid::SupportGrid;
pub(crate) use grid::minimum_image;
pub use json::{AnyMeasure, MeasureDoc, WeightScheme};
pub use nbody::{NBodyMeasure, NBodyWeights, MAX_ENTRIES};

/// Normalization tolerance for every measure constructor.
pub const TAU_NORM: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("measures live on different grids")]
    GridMismatch,
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("{0} entries exceed the representable size")]
    TooLarge(String),
    #[error("invalid marginal order {k} for an {n}-body measure")]
    BadMarginal { k: usize, n: usize },
}

pub(crate) fn check_weights(weights: &[f64], expected_len: usize) -> Result<(), MeasureError> {
    if weights.len() != expected_len {
        return Err(MeasureError::InvalidWeights(format!(
            "expected {expected_len} weights, got {}",
            weights.len()
        )));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
    {
        return Err(MeasureError::InvalidWeights(format!("weight {i} = {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TAU_NORM {
        return Err(MeasureError::NotNormalized(total));
    }
    Ok(())
}

fn same_grid(a: &Arc<SupportGrid>, b: &Arc<SupportGrid>) -> Result<(), MeasureError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(MeasureError::GridMismatch)
    }
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// A probability measure on the points of a [`SupportGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    grid: Arc<SupportGrid>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(grid: Arc<SupportGrid>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        check_weights(&weights, grid.len())?;
        Ok(Self { grid, weights })
    }

    pub fn uniform(grid: Arc<SupportGrid>) -> Self {
        let m = grid.len();
        Self {
            weights: vec![1.0 / m as f64; m],
            grid,
        }
    }

    pub fn dirac(grid: Arc<SupportGrid>, at: usize) -> Self {
        let mut weights = vec![0.0; grid.len()];
        weights[at] = 1.0;
        Self { grid, weights }
    }

    pub fn grid(&self) -> &Arc<SupportGrid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `mu (x) mu`.
    pub fn product_pair(&self) -> PairMeasure {
        let m = self.len();
        let mut weights = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                weights[i * m + j] = self.weights[i] * self.weights[j];
            }
        }
        PairMeasure {
            grid: self.grid.clone(),
            weights,
        }
    }

    /// Total variation as the sum of absolute weight differences.
    pub fn tv_distance(&self, other: &Self) -> Result<f64, MeasureError> {
        same_grid(&self.grid, &other.grid)?;
        Ok(l1_distance(&self.weights, &other.weights))
    }

    /// `rho = N mu`.
    pub fn scaled(&self, particles: usize) -> Density {
        Density {
            grid: self.grid.clone(),
            weights: self.weights.iter().map(|w| w * particles as f64).collect(),
            particles,
        }
    }
}

/// A density of `N` particles: nonnegative weights summing to `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    grid: Arc<SupportGrid>,
    weights: Vec<f64>,
    particles: usize,
}

impl Density {
    pub fn new(grid: Arc<SupportGrid>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        let total: f64 = weights.iter().sum();
        let particles = total.round();
        if particles < 1.0 || (total - particles).abs() > TAU_NORM * particles {
            return Err(MeasureError::InvalidWeights(format!(
                "density integrates to {total}, not a positive integer"
            )));
        }
        let particles = particles as usize;
        let normalized: Vec<f64> = weights.iter().map(|w| w / particles as f64).collect();
        check_weights(&normalized, grid.len())?;
        Ok(Self {
            grid,
            weights,
            particles,
        })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `rho / N`.
    pub fn normalized(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            grid: self.grid.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| w / self.particles as f64)
                .collect(),
        }
    }
}

/// A probability measure on pairs of grid points, stored as a dense
/// row-major `m x m` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMeasure {
    grid: Arc<SupportGrid>,
    weights: Vec<f64>,
}

impl PairMeasure {
    pub fn new(grid: Arc<SupportGrid>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        let m = grid.len();
        check_weights(&weights, m * m)?;
        Ok(Self { grid, weights })
    }

    /// Symmetric pair measure from upper-triangle totals: `upper[(i, j)]`
    /// for `i < j` is split evenly between `(i, j)` and `(j, i)`.
    pub fn symmetric_from_fn(
        grid: Arc<SupportGrid>,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, MeasureError> {
        let m = grid.len();
        let mut weights = vec![0.0; m * m];
        for i in 0..m {
            weights[i * m + i] = f(i, i);
            for j in i + 1..m {
                let half = f(i, j) / 2.0;
                weights[i * m + j] = half;
                weights[j * m + i] = half;
            }
        }
        Self::new(grid, weights)
    }

    /// `(Id, Id)_# mu`.
    pub fn diagonal(mu: &DiscreteMeasure) -> Self {
        let m = mu.len();
        let mut weights = vec![0.0; m * m];
        for (i, w) in mu.weights.iter().enumerate() {
            weights[i * m + i] = *w;
        }
        Self {
            grid: mu.grid.clone(),
            weights,
        }
    }

    pub fn grid(&self) -> &Arc<SupportGrid> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> usize {
        self.grid.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.points() + j]
    }

    /// Exact symmetry `w[i][j] == w[j][i]`.
    pub fn is_symmetric(&self) -> bool {
        let m = self.points();
        (0..m).all(|i| (i + 1..m).all(|j| self.weight(i, j) == self.weight(j, i)))
    }

    pub fn symmetrized(&self) -> Self {
        let m = self.points();
        let mut weights = self.weights.clone();
        for i in 0..m {
            for j in i + 1..m {
                let avg = 0.5 * (self.weight(i, j) + self.weight(j, i));
                weights[i * m + j] = avg;
                weights[j * m + i] = avg;
            }
        }
        Self {
            grid: self.grid.clone(),
            weights,
        }
    }

    /// Law of the first coordinate.
    pub fn marginal(&self) -> DiscreteMeasure {
        let m = self.points();
        let weights = (0..m)
            .map(|i| self.weights[i * m..(i + 1) * m].iter().sum())
            .collect();
        DiscreteMeasure {
            grid: self.grid.clone(),
            weights,
        }
    }

    /// Law of the second coordinate.
    pub fn second_marginal(&self) -> DiscreteMeasure {
        let m = self.points();
        let weights = (0..m)
            .map(|j| (0..m).map(|i| self.weight(i, j)).sum())
            .collect();
        DiscreteMeasure {
            grid: self.grid.clone(),
            weights,
        }
    }

    /// Total mass off the diagonal.
    pub fn off_diagonal_mass(&self) -> f64 {
        let m = self.points();
        (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.weight(i, j))
            .sum()
    }

    pub fn tv_distance(&self, other: &Self) -> Result<f64, MeasureError> {
        same_grid(&self.grid, &other.grid)?;
        Ok(l1_distance(&self.weights, &other.weights))
    }

    /// Upper-triangle totals `w[i][i]` and `w[i][j] + w[j][i]` for `i < j`,
    /// in row-major order over `i <= j`.
    pub fn upper_totals(&self) -> Vec<f64> {
        let m = self.points();
        let mut out = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            out.push(self.weight(i, i));
            for j in i + 1..m {
                out.push(self.weight(i, j) + self.weight(j, i));
            }
        }
        out
    }
}

/// Position of the unordered pair `{i, j}` (`i <= j`) in [`PairMeasure::upper_totals`].
pub fn upper_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * i.saturating_sub(1) / 2 + (j - i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> Arc<SupportGrid> {
        Arc::new(SupportGrid::line(&[0.0, 1.0]).unwrap())
    }

    #[test]
    fn upper_index_matches_layout() {
        for m in 1..6 {
            let mut expected = 0;
            for i in 0..m {
                for j in i..m {
                    assert_eq!(upper_index(m, i, j), expected, "m={m} i={i} j={j}");
                    assert_eq!(upper_index(m, j, i), expected);
                    expected += 1;
                }
            }
        }
    }

    #[test]
    fn rejects_unnormalized_and_negative() {
        let g = two_points();
        assert!(matches!(
            DiscreteMeasure::new(g.clone(), vec![0.5, 0.6]),
            Err(MeasureError::NotNormalized(_))
        ));
        assert!(DiscreteMeasure::new(g.clone(), vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new(g, vec![0.5, 0.5 + 1e-10]).is_ok());
    }

    #[test]
    fn tv_examples() {
        let g = two_points();
        let mu = DiscreteMeasure::uniform(g.clone());
        assert_eq!(mu.tv_distance(&mu).unwrap(), 0.0);
        let a = DiscreteMeasure::dirac(g.clone(), 0);
        let b = DiscreteMeasure::dirac(g.clone(), 1);
        assert_eq!(a.tv_distance(&b).unwrap(), 2.0);
        let tv = mu
            .product_pair()
            .tv_distance(&PairMeasure::diagonal(&mu))
            .unwrap();
        assert_eq!(tv, 1.0);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = DiscreteMeasure::uniform(two_points());
        let b = DiscreteMeasure::uniform(Arc::new(SupportGrid::line(&[0.0, 2.0]).unwrap()));
        assert!(matches!(a.tv_distance(&b), Err(MeasureError::GridMismatch)));
    }

    #[test]
    fn density_round_trip() {
        let mu = DiscreteMeasure::uniform(two_points());
        let rho = mu.scaled(4);
        assert_eq!(rho.particles(), 4);
        assert_eq!(rho.weights(), &[2.0, 2.0]);
        assert_eq!(rho.normalized(), mu);
    }
}
