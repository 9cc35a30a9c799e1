//! Finite de Finetti mixtures `nu = sum_a nu_a delta_{Q_a}` and the
//! Diaconis–Freedman lift of an exchangeable N-body measure.
//!
//! The lift of `gamma_N` mixes the empirical measures `(delta_{w_1} + ... +
//! delta_{w_N}) / N` of its configurations with their `gamma_N` weights. Its
//! k-marginals are mixtures of k-fold products, hence representable for every
//! k, and its 2-marginal is within `1/N` of `gamma_2` in the set-wise total
//! variation norm.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::measure::multiset::MultisetSpace;
use crate::measure::{
    check_weights, l1_distance, DiscreteMeasure, MeasureError, NBodyMeasure, PairMeasure,
    SupportGrid, TAU_NORM,
};

/// A finitely supported probability measure over one-body measures that
/// share a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    components: Vec<DiscreteMeasure>,
    weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureDoc {
    pub grid: SupportGrid,
    pub components: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Mixture {
    pub fn new(components: Vec<DiscreteMeasure>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        let first = components
            .first()
            .ok_or_else(|| MeasureError::InvalidWeights("a mixture needs a component".into()))?;
        check_weights(&weights, components.len())?;
        if components[1..]
            .iter()
            .any(|q| !Arc::ptr_eq(q.grid(), first.grid()) && q.grid() != first.grid())
        {
            return Err(MeasureError::GridMismatch);
        }
        Ok(Self {
            components,
            weights,
        })
    }

    /// `delta_mu`.
    pub fn single(mu: DiscreteMeasure) -> Self {
        Self {
            components: vec![mu],
            weights: vec![1.0],
        }
    }

    pub fn components(&self) -> &[DiscreteMeasure] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> &Arc<SupportGrid> {
        self.components[0].grid()
    }

    /// `sum_a nu_a Q_a`, the one-body marginal of the mixture.
    pub fn barycenter(&self) -> DiscreteMeasure {
        let mut w = vec![0.0; self.grid().len()];
        for (q, &a) in self.components.iter().zip(&self.weights) {
            for (x, &y) in w.iter_mut().zip(q.weights()) {
                *x += a * y;
            }
        }
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|x| *x /= total);
        }
        DiscreteMeasure::new(self.grid().clone(), w).expect("convex combination of measures")
    }

    /// `sum_a nu_a Q_a (x) Q_a`, symmetric by construction.
    pub fn pair_marginal(&self) -> PairMeasure {
        let m = self.grid().len();
        let mut w = vec![0.0; m * m];
        for (q, &a) in self.components.iter().zip(&self.weights) {
            let q = q.weights();
            for i in 0..m {
                if q[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    w[i * m + j] += a * q[i] * q[j];
                }
            }
        }
        // exact symmetry regardless of summation order
        for i in 0..m {
            for j in 0..i {
                w[i * m + j] = w[j * m + i];
            }
        }
        PairMeasure::new(self.grid().clone(), w).expect("mixture of products is normalized")
    }

    /// `sum_a nu_a Q_a^{(x) k}` in multiset mode.
    pub fn k_marginal(&self, k: usize) -> Result<NBodyMeasure, MeasureError> {
        let mut total: Option<Vec<f64>> = None;
        for (q, &a) in self.components.iter().zip(&self.weights) {
            let p = NBodyMeasure::product(q, k)?;
            let w = p.raw_weights();
            match &mut total {
                None => total = Some(w.iter().map(|x| a * x).collect()),
                Some(t) => t.iter_mut().zip(w).for_each(|(t, x)| *t += a * x),
            }
        }
        NBodyMeasure::multiset(self.grid().clone(), k, total.unwrap_or_default())
    }

    pub fn to_doc(&self) -> MixtureDoc {
        MixtureDoc {
            grid: (**self.grid()).clone(),
            components: self.components.iter().map(|q| q.weights().to_vec()).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_doc(doc: MixtureDoc) -> Result<Self, MeasureError> {
        doc.grid.validate()?;
        let grid = Arc::new(doc.grid);
        let components = doc
            .components
            .into_iter()
            .map(|w| DiscreteMeasure::new(grid.clone(), w))
            .collect::<Result<_, _>>()?;
        Self::new(components, doc.weights)
    }
}

impl Serialize for Mixture {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mixture {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Self::from_doc(MixtureDoc::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `sum_a nu_a Q_a (x) Q_a`.
pub fn mixture_pair_marginal(nu: &Mixture) -> PairMeasure {
    nu.pair_marginal()
}

/// The Diaconis–Freedman mixture of `gamma`: one component per support
/// multiset, equal to its empirical measure, weighted by its mass.
pub fn df_lift(gamma: &NBodyMeasure) -> Result<Mixture, MeasureError> {
    let n = gamma.arity() as f64;
    let grid = gamma.grid().clone();
    let entries = gamma.multiset_entries();
    let mut components = Vec::with_capacity(entries.len());
    let mut weights = Vec::with_capacity(entries.len());
    for (counts, w) in entries {
        let emp = counts.iter().map(|&c| c as f64 / n).collect();
        components.push(DiscreteMeasure::new(grid.clone(), emp)?);
        weights.push(w);
    }
    Mixture::new(components, weights)
}

/// k-point marginal of the Diaconis–Freedman lift of `gamma`.
pub fn df_lift_marginal(gamma: &NBodyMeasure, k: usize) -> Result<NBodyMeasure, MeasureError> {
    if k == 0 {
        return Err(MeasureError::BadMarginal {
            k,
            n: gamma.arity(),
        });
    }
    df_lift(gamma)?.k_marginal(k)
}

/// Outcome of comparing `gamma_2` with the lift's 2-marginal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DfBoundReport {
    pub n: usize,
    /// `sum |gamma_2 - P_2|` over ordered pairs.
    pub tv: f64,
    /// `sup_A |gamma_2(A) - P_2(A)|`, half of `tv`.
    pub setwise_tv: f64,
    /// `1 / N`, the bound on `setwise_tv`.
    pub bound: f64,
    /// `sum |gamma_1 - P_1|`, zero in exact arithmetic.
    pub one_marginal_tv: f64,
    pub pass: bool,
}

fn dense_pair(gamma: &NBodyMeasure) -> Result<Vec<f64>, MeasureError> {
    Ok(gamma.pair_marginal()?.weights().to_vec())
}

/// Checks `sup_A |gamma_2(A) - P_2(A)| <= 1/N` and `gamma_1 = P_1`.
///
/// The lift's 2-marginal is `(1 - 1/N) gamma_2 + (1/N) diag(gamma_1)`, so the
/// sum of absolute differences is `(2/N)` times the off-diagonal mass of
/// `gamma_2`; the set-wise distance is half of it.
pub fn df_tv_bound_check(gamma: &NBodyMeasure) -> Result<DfBoundReport, MeasureError> {
    let n = gamma.arity();
    if n < 2 {
        return Err(MeasureError::BadMarginal { k: 2, n });
    }
    let lift2 = df_lift_marginal(gamma, 2)?;
    let tv = l1_distance(&dense_pair(gamma)?, &dense_pair(&lift2)?);
    let one = gamma.one_marginal()?;
    let one_lift = df_lift_marginal(gamma, 1)?.one_marginal()?;
    let one_marginal_tv = one.tv_distance(&one_lift)?;
    let bound = 1.0 / n as f64;
    let setwise_tv = tv / 2.0;
    Ok(DfBoundReport {
        n,
        tv,
        setwise_tv,
        bound,
        one_marginal_tv,
        pass: setwise_tv <= bound + TAU_NORM && one_marginal_tv <= TAU_NORM,
    })
}

/// `sum |gamma_k - P_k|` over multisets against `k (k - 1) / N`; an
/// empirical check only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DfGeneralBound {
    pub k: usize,
    pub tv: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn df_tv_bound_check_k(gamma: &NBodyMeasure, k: usize) -> Result<DfGeneralBound, MeasureError> {
    let n = gamma.arity();
    if k == 0 || k > n {
        return Err(MeasureError::BadMarginal { k, n });
    }
    let a = gamma.symmetrize().marginal(k)?;
    let b = df_lift_marginal(gamma, k)?;
    // multiset weights aggregate orderings with identical per-tuple values,
    // so their L1 distance equals the tuple-level one
    let tv = l1_distance(a.raw_weights(), b.raw_weights());
    let bound = (k * (k - 1)) as f64 / n as f64;
    Ok(DfGeneralBound {
        k,
        tv,
        bound,
        pass: tv <= bound + TAU_NORM,
    })
}

/// Number of multisets the lift's k-marginal spans; useful for budgeting.
pub fn lift_marginal_size(points: usize, k: usize) -> Option<usize> {
    MultisetSpace::new(points, k).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> Arc<SupportGrid> {
        Arc::new(SupportGrid::line(&[0.0, 1.0]).unwrap())
    }

    #[test]
    fn pair_marginal_examples() {
        let g = two_points();
        let mu = DiscreteMeasure::new(g.clone(), vec![0.3, 0.7]).unwrap();
        let p = Mixture::single(mu.clone()).pair_marginal();
        assert_eq!(p, mu.product_pair());

        let nu = Mixture::new(
            vec![DiscreteMeasure::dirac(g.clone(), 0), DiscreteMeasure::dirac(g.clone(), 1)],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(nu.pair_marginal().weights(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(nu.pair_marginal().marginal().weights(), nu.barycenter().weights());
    }

    #[test]
    fn lift_of_dirac_is_exact() {
        let g = two_points();
        let gamma = NBodyMeasure::diagonal_pushforward(&DiscreteMeasure::dirac(g, 1), 4).unwrap();
        for k in 1..=4 {
            let lift = df_lift_marginal(&gamma, k).unwrap();
            assert_eq!(lift.tv_distance(&gamma.marginal(k).unwrap()).unwrap(), 0.0);
        }
        assert_eq!(df_tv_bound_check(&gamma).unwrap().tv, 0.0);
    }

    #[test]
    fn lift_of_two_body_product() {
        // (1 - 1/2) gamma_2 + (1/2) diag(gamma_1)
        let g = two_points();
        let mu = DiscreteMeasure::uniform(g);
        let gamma = NBodyMeasure::product(&mu, 2).unwrap();
        let lift = df_lift_marginal(&gamma, 2).unwrap().pair_marginal().unwrap();
        let expected = [0.375, 0.125, 0.125, 0.375];
        for (a, b) in lift.weights().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bound_examples() {
        let g = two_points();
        let mu = DiscreteMeasure::uniform(g.clone());
        let r = df_tv_bound_check(&NBodyMeasure::product(&mu, 3).unwrap()).unwrap();
        assert!((r.tv - 1.0 / 3.0).abs() < 1e-12 && r.pass);

        let anti = NBodyMeasure::dense(g, 2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let r = df_tv_bound_check(&anti).unwrap();
        assert!((r.setwise_tv - 0.5).abs() < 1e-15 && r.pass);
    }

    #[test]
    fn json_round_trip() {
        let g = two_points();
        let nu = Mixture::new(
            vec![DiscreteMeasure::uniform(g.clone()), DiscreteMeasure::dirac(g, 0)],
            vec![0.25, 0.75],
        )
        .unwrap();
        let text = serde_json::to_string(&nu).unwrap();
        let back: Mixture = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nu);
        assert!(serde_json::from_str::<Mixture>(&text.replace("0.75", "0.5")).is_err());
    }
}
