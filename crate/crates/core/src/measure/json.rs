//! JSON form shared by every measure type.
//!
//! ```json
//! {"grid": {"dimension": 1, "points": [[0.0], [1.0]]},
//!  "arity": 2, "scheme": "multiset", "weights": [0.25, 0.5, 0.25]}
//! ```
//!
//! Floats are written as shortest round-trip decimals and parsed with
//! correct rounding, so weights survive a round trip bit for bit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DiscreteMeasure, MeasureError, NBodyMeasure, PairMeasure, SupportGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Dense,
    Multiset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    pub grid: SupportGrid,
    pub arity: usize,
    pub scheme: WeightScheme,
    pub weights: Vec<f64>,
}

/// Any of the three measure kinds, keyed by arity.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMeasure {
    One(DiscreteMeasure),
    Pair(PairMeasure),
    Many(NBodyMeasure),
}

impl AnyMeasure {
    pub fn arity(&self) -> usize {
        match self {
            AnyMeasure::One(_) => 1,
            AnyMeasure::Pair(_) => 2,
            AnyMeasure::Many(g) => g.arity(),
        }
    }

    pub fn to_doc(&self) -> MeasureDoc {
        match self {
            AnyMeasure::One(m) => MeasureDoc {
                grid: (**m.grid()).clone(),
                arity: 1,
                scheme: WeightScheme::Dense,
                weights: m.weights().to_vec(),
            },
            AnyMeasure::Pair(p) => MeasureDoc {
                grid: (**p.grid()).clone(),
                arity: 2,
                scheme: WeightScheme::Dense,
                weights: p.weights().to_vec(),
            },
            AnyMeasure::Many(g) => MeasureDoc {
                grid: (**g.grid()).clone(),
                arity: g.arity(),
                scheme: if g.is_multiset() {
                    WeightScheme::Multiset
                } else {
                    WeightScheme::Dense
                },
                weights: g.raw_weights().to_vec(),
            },
        }
    }

    /// Dense arity-1 and arity-2 documents become [`AnyMeasure::One`] and
    /// [`AnyMeasure::Pair`]; everything else is an N-body measure.
    pub fn from_doc(doc: MeasureDoc) -> Result<Self, MeasureError> {
        doc.grid.validate()?;
        let grid = Arc::new(doc.grid);
        match (doc.arity, doc.scheme) {
            (1, _) => Ok(AnyMeasure::One(DiscreteMeasure::new(grid, doc.weights)?)),
            (2, WeightScheme::Dense) => Ok(AnyMeasure::Pair(PairMeasure::new(grid, doc.weights)?)),
            (k, WeightScheme::Dense) => Ok(AnyMeasure::Many(NBodyMeasure::dense(grid, k, doc.weights)?)),
            (k, WeightScheme::Multiset) => {
                Ok(AnyMeasure::Many(NBodyMeasure::multiset(grid, k, doc.weights)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("measure documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let doc: MeasureDoc = serde_json::from_str(text)
            .map_err(|e| MeasureError::InvalidWeights(format!("bad measure JSON: {e}")))?;
        Self::from_doc(doc)
    }

    /// Pair view: a dense pair measure as-is, or the 2-marginal of a
    /// 2-body multiset measure.
    pub fn into_pair(self) -> Result<PairMeasure, MeasureError> {
        match self {
            AnyMeasure::Pair(p) => Ok(p),
            AnyMeasure::Many(g) if g.arity() == 2 => g.pair_marginal(),
            other => Err(MeasureError::ArityMismatch(other.arity(), 2)),
        }
    }

    pub fn into_one(self) -> Result<DiscreteMeasure, MeasureError> {
        match self {
            AnyMeasure::One(m) => Ok(m),
            other => Err(MeasureError::ArityMismatch(other.arity(), 1)),
        }
    }

    pub fn into_nbody(self) -> Result<NBodyMeasure, MeasureError> {
        match self {
            AnyMeasure::Many(g) => Ok(g),
            AnyMeasure::Pair(p) => NBodyMeasure::dense(p.grid().clone(), 2, p.weights().to_vec()),
            AnyMeasure::One(_) => Err(MeasureError::ArityMismatch(1, 2)),
        }
    }

    /// Sum of absolute differences between two measures of equal arity.
    pub fn tv_distance(&self, other: &Self) -> Result<f64, MeasureError> {
        if self.arity() != other.arity() {
            return Err(MeasureError::ArityMismatch(self.arity(), other.arity()));
        }
        match (self, other) {
            (AnyMeasure::One(a), AnyMeasure::One(b)) => a.tv_distance(b),
            (AnyMeasure::Pair(a), AnyMeasure::Pair(b)) => a.tv_distance(b),
            _ => {
                let a = self.clone().into_nbody()?;
                let b = other.clone().into_nbody()?;
                a.tv_distance(&b)
            }
        }
    }
}
