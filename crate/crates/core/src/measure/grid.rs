use serde::{Deserialize, Serialize};

use super::MeasureError;

/// A finite point set in `R^d`, optionally viewed as a subset of the torus
/// `[0, L_1) x ... x [0, L_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportGrid {
    dimension: usize,
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<Vec<f64>>,
}

impl SupportGrid {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let dimension = points.first().map(Vec::len).unwrap_or(0);
        Self::build(dimension, points, None)
    }

    /// Points on the real line.
    pub fn line(xs: &[f64]) -> Result<Self, MeasureError> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn periodic(points: Vec<Vec<f64>>, period: Vec<f64>) -> Result<Self, MeasureError> {
        let dimension = points.first().map(Vec::len).unwrap_or(0);
        Self::build(dimension, points, Some(period))
    }

    fn build(
        dimension: usize,
        points: Vec<Vec<f64>>,
        period: Option<Vec<f64>>,
    ) -> Result<Self, MeasureError> {
        let grid = Self {
            dimension,
            points,
            period,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Re-checks the invariants; used after deserialization.
    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.points.is_empty() {
            return Err(MeasureError::InvalidGrid("grid has no points".into()));
        }
        if self.dimension == 0 {
            return Err(MeasureError::InvalidGrid("dimension must be positive".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != self.dimension {
                return Err(MeasureError::InvalidGrid(format!(
                    "point {i} has {} coordinates, expected {}",
                    p.len(),
                    self.dimension
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(MeasureError::InvalidGrid(format!("point {i} is not finite")));
            }
        }
        if let Some(period) = &self.period {
            if period.len() != self.dimension || period.iter().any(|&l| !(l > 0.0 && l.is_finite()))
            {
                return Err(MeasureError::InvalidGrid("bad period".into()));
            }
            for (i, p) in self.points.iter().enumerate() {
                if p.iter().zip(period).any(|(&x, &l)| !(0.0..l).contains(&x)) {
                    return Err(MeasureError::InvalidGrid(format!(
                        "point {i} lies outside the periodic cell"
                    )));
                }
            }
        }
        let mut keys: Vec<Vec<u64>> = self
            .points
            .iter()
            .map(|p| p.iter().map(|x| (x + 0.0).to_bits()).collect())
            .collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeasureError::InvalidGrid("duplicate points".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn period(&self) -> Option<&[f64]> {
        self.period.as_deref()
    }

    /// `x_i - x_j`; on a periodic grid each component is reduced to the
    /// minimum image in `[-L/2, L/2)`.
    pub fn displacement(&self, i: usize, j: usize) -> Vec<f64> {
        let (a, b) = (&self.points[i], &self.points[j]);
        match &self.period {
            None => a.iter().zip(b).map(|(x, y)| x - y).collect(),
            Some(period) => a
                .iter()
                .zip(b)
                .zip(period)
                .map(|((x, y), &l)| minimum_image(x - y, l))
                .collect(),
        }
    }
}

pub(crate) fn minimum_image(dx: f64, period: f64) -> f64 {
    let r = dx.rem_euclid(period);
    if r >= period / 2.0 {
        r - period
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(SupportGrid::line(&[0.0, 1.0, 0.0]).is_err());
        assert!(SupportGrid::new(vec![]).is_err());
        assert!(SupportGrid::new(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn periodic_bounds_and_images() {
        assert!(SupportGrid::periodic(vec![vec![4.0]], vec![4.0]).is_err());
        let g = SupportGrid::periodic(vec![vec![0.0], vec![3.0]], vec![4.0]).unwrap();
        assert_eq!(g.displacement(0, 1), vec![1.0]);
        assert_eq!(g.displacement(1, 0), vec![-1.0]);
    }
}
