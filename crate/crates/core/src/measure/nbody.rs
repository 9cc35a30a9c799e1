use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::multiset::{
    multinomial_f64, sequence_counts, submultisets, MultisetSpace,
};
use super::{
    check_weights, l1_distance, same_grid, DiscreteMeasure, MeasureError, PairMeasure,
    SupportGrid, TAU_NORM,
};

/// Upper bound on the number of stored weights of any N-body measure.
pub const MAX_ENTRIES: usize = 1 << 25;

/// Weight storage of an [`NBodyMeasure`].
#[derive(Clone, Debug, PartialEq)]
pub enum NBodyWeights {
    /// One weight per ordered tuple; index is base-`m` with the first slot
    /// most significant.
    Dense(Vec<f64>),
    /// One weight per multiset, in lexicographic multiset order. The weight is
    /// the total mass of all orderings of the multiset.
    Multiset(Vec<f64>),
}

/// A probability measure on `arity`-tuples of grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct NBodyMeasure {
    grid: Arc<SupportGrid>,
    arity: usize,
    weights: NBodyWeights,
}

fn dense_len(m: usize, arity: usize) -> Result<usize, MeasureError> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| m.checked_pow(a))
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| MeasureError::TooLarge(format!("{m}^{arity}")))
}

fn multiset_len(m: usize, arity: usize) -> Result<usize, MeasureError> {
    MultisetSpace::new(m, arity)
        .len()
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| MeasureError::TooLarge(format!("C({m}+{arity}-1, {arity})")))
}

fn decode_tuple(mut index: usize, m: usize, arity: usize, out: &mut [usize]) {
    for slot in (0..arity).rev() {
        out[slot] = index % m;
        index /= m;
    }
}

fn encode_tuple(tuple: &[usize], m: usize) -> usize {
    tuple.iter().fold(0, |acc, &a| acc * m + a)
}

impl NBodyMeasure {
    pub fn dense(
        grid: Arc<SupportGrid>,
        arity: usize,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if arity == 0 {
            return Err(MeasureError::InvalidWeights("arity must be positive".into()));
        }
        check_weights(&weights, dense_len(grid.len(), arity)?)?;
        Ok(Self {
            grid,
            arity,
            weights: NBodyWeights::Dense(weights),
        })
    }

    pub fn multiset(
        grid: Arc<SupportGrid>,
        arity: usize,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if arity == 0 {
            return Err(MeasureError::InvalidWeights("arity must be positive".into()));
        }
        check_weights(&weights, multiset_len(grid.len(), arity)?)?;
        Ok(Self {
            grid,
            arity,
            weights: NBodyWeights::Multiset(weights),
        })
    }

    /// Builds a multiset-mode measure from sparse `(counts, weight)` entries.
    pub fn from_multiset_entries(
        grid: Arc<SupportGrid>,
        arity: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self, MeasureError> {
        let space = MultisetSpace::new(grid.len(), arity);
        let mut weights = vec![0.0; multiset_len(grid.len(), arity)?];
        for (counts, w) in entries {
            if counts.len() != grid.len() || counts.iter().sum::<usize>() != arity {
                return Err(MeasureError::InvalidWeights(format!(
                    "multiplicities {counts:?} do not describe a size-{arity} multiset"
                )));
            }
            weights[space.rank_counts(&counts)] += w;
        }
        Self::multiset(grid, arity, weights)
    }

    /// `mu^{(x) n}` in multiset mode: multinomial weights.
    pub fn product(mu: &DiscreteMeasure, n: usize) -> Result<Self, MeasureError> {
        let m = mu.len();
        let len = multiset_len(m, n)?;
        let q = mu.weights();
        let mut weights = Vec::with_capacity(len);
        for seq in MultisetSpace::new(m, n).iter() {
            let counts = sequence_counts(&seq, m);
            let mut w = multinomial_f64(&counts);
            for (i, &c) in counts.iter().enumerate() {
                if c > 0 {
                    w *= q[i].powi(c as i32);
                }
            }
            weights.push(w);
        }
        Ok(Self {
            grid: mu.grid().clone(),
            arity: n,
            weights: NBodyWeights::Multiset(weights),
        })
    }

    /// Mass `mu(x)` on the tuple `(x, ..., x)`.
    pub fn diagonal_pushforward(mu: &DiscreteMeasure, k: usize) -> Result<Self, MeasureError> {
        let m = mu.len();
        let space = MultisetSpace::new(m, k);
        let mut weights = vec![0.0; multiset_len(m, k)?];
        for (i, &w) in mu.weights().iter().enumerate() {
            weights[space.rank(&vec![i; k])] = w;
        }
        Ok(Self {
            grid: mu.grid().clone(),
            arity: k,
            weights: NBodyWeights::Multiset(weights),
        })
    }

    pub fn grid(&self) -> &Arc<SupportGrid> {
        &self.grid
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weights(&self) -> &NBodyWeights {
        &self.weights
    }

    pub fn is_multiset(&self) -> bool {
        matches!(self.weights, NBodyWeights::Multiset(_))
    }

    /// Nonzero `(multiplicities, weight)` pairs. Dense measures are aggregated
    /// by sorting each tuple.
    pub fn multiset_entries(&self) -> Vec<(Vec<usize>, f64)> {
        let m = self.grid.len();
        match &self.weights {
            NBodyWeights::Multiset(w) => MultisetSpace::new(m, self.arity)
                .iter()
                .zip(w)
                .filter(|(_, &w)| w != 0.0)
                .map(|(seq, &w)| (sequence_counts(&seq, m), w))
                .collect(),
            NBodyWeights::Dense(w) => {
                let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
                let mut tuple = vec![0; self.arity];
                for (idx, &w) in w.iter().enumerate() {
                    if w != 0.0 {
                        decode_tuple(idx, m, self.arity, &mut tuple);
                        *acc.entry(sequence_counts(&tuple, m)).or_default() += w;
                    }
                }
                let mut out: Vec<_> = acc.into_iter().collect();
                out.sort_by(|a, b| b.0.cmp(&a.0));
                out
            }
        }
    }

    /// Average over all coordinate permutations, returned in multiset mode.
    pub fn symmetrize(&self) -> Self {
        match &self.weights {
            NBodyWeights::Multiset(_) => self.clone(),
            NBodyWeights::Dense(w) => {
                let m = self.grid.len();
                let space = MultisetSpace::new(m, self.arity);
                let mut out = vec![0.0; space.len().expect("dense size bounds multiset size")];
                let mut tuple = vec![0; self.arity];
                for (idx, &w) in w.iter().enumerate() {
                    if w != 0.0 {
                        decode_tuple(idx, m, self.arity, &mut tuple);
                        tuple.sort_unstable();
                        out[space.rank(&tuple)] += w;
                    }
                }
                Self {
                    grid: self.grid.clone(),
                    arity: self.arity,
                    weights: NBodyWeights::Multiset(out),
                }
            }
        }
    }

    /// Expands to per-tuple weights; multiset mass is spread evenly over the
    /// distinct orderings.
    pub fn to_dense(&self) -> Result<Self, MeasureError> {
        match &self.weights {
            NBodyWeights::Dense(_) => Ok(self.clone()),
            NBodyWeights::Multiset(w) => {
                let m = self.grid.len();
                let mut out = vec![0.0; dense_len(m, self.arity)?];
                let mut tuple = vec![0; self.arity];
                for (idx, slot) in out.iter_mut().enumerate() {
                    decode_tuple(idx, m, self.arity, &mut tuple);
                    let counts = sequence_counts(&tuple, m);
                    tuple.sort_unstable();
                    let mw = w[MultisetSpace::new(m, self.arity).rank(&tuple)];
                    if mw != 0.0 {
                        *slot = mw / multinomial_f64(&counts);
                    }
                }
                Ok(Self {
                    grid: self.grid.clone(),
                    arity: self.arity,
                    weights: NBodyWeights::Dense(out),
                })
            }
        }
    }

    /// The `k`-point marginal. Multiset input yields multiset output
    /// (sampling `k` of the `N` slots without replacement); dense input is
    /// projected onto its first `k` slots.
    pub fn marginal(&self, k: usize) -> Result<Self, MeasureError> {
        if k == 0 || k > self.arity {
            return Err(MeasureError::BadMarginal { k, n: self.arity });
        }
        match &self.weights {
            NBodyWeights::Dense(_) => self.marginal_on(&(0..k).collect::<Vec<_>>()),
            NBodyWeights::Multiset(_) => {
                let m = self.grid.len();
                let space = MultisetSpace::new(m, k);
                let mut out = vec![0.0; multiset_len(m, k)?];
                for (counts, w) in self.multiset_entries() {
                    for (sub, p) in submultisets(&counts, k) {
                        out[space.rank_counts(&sub)] += w * p;
                    }
                }
                Ok(Self {
                    grid: self.grid.clone(),
                    arity: k,
                    weights: NBodyWeights::Multiset(out),
                })
            }
        }
    }

    /// Projection of a dense measure onto the given slots (in that order).
    /// Multiset input is expanded first.
    pub fn marginal_on(&self, slots: &[usize]) -> Result<Self, MeasureError> {
        if slots.is_empty() || slots.iter().any(|&s| s >= self.arity) {
            return Err(MeasureError::BadMarginal {
                k: slots.len(),
                n: self.arity,
            });
        }
        let dense = self.to_dense()?;
        let NBodyWeights::Dense(w) = &dense.weights else {
            unreachable!()
        };
        let m = self.grid.len();
        let mut out = vec![0.0; dense_len(m, slots.len())?];
        let mut tuple = vec![0; self.arity];
        let mut proj = vec![0; slots.len()];
        for (idx, &w) in w.iter().enumerate() {
            if w != 0.0 {
                decode_tuple(idx, m, self.arity, &mut tuple);
                for (p, &s) in proj.iter_mut().zip(slots) {
                    *p = tuple[s];
                }
                out[encode_tuple(&proj, m)] += w;
            }
        }
        Ok(Self {
            grid: self.grid.clone(),
            arity: slots.len(),
            weights: NBodyWeights::Dense(out),
        })
    }

    /// Two-point marginal as a dense pair measure.
    pub fn pair_marginal(&self) -> Result<PairMeasure, MeasureError> {
        if self.arity < 2 {
            return Err(MeasureError::BadMarginal { k: 2, n: self.arity });
        }
        let m = self.grid.len();
        let mut weights = vec![0.0; m * m];
        match &self.weights {
            NBodyWeights::Multiset(_) => {
                let n = self.arity as f64;
                let denom = n * (n - 1.0);
                for (counts, w) in self.multiset_entries() {
                    for i in 0..m {
                        if counts[i] == 0 {
                            continue;
                        }
                        let ci = counts[i] as f64;
                        weights[i * m + i] += w * ci * (ci - 1.0) / denom;
                        for j in i + 1..m {
                            let p = w * ci * counts[j] as f64 / denom;
                            weights[i * m + j] += p;
                            weights[j * m + i] += p;
                        }
                    }
                }
            }
            NBodyWeights::Dense(_) => {
                let NBodyWeights::Dense(w) = self.marginal_on(&[0, 1])?.weights else {
                    unreachable!()
                };
                weights = w;
            }
        }
        PairMeasure::new(self.grid.clone(), renormalize_roundoff(weights)?)
    }

    pub fn one_marginal(&self) -> Result<DiscreteMeasure, MeasureError> {
        let m = self.grid.len();
        let mut weights = vec![0.0; m];
        match &self.weights {
            NBodyWeights::Multiset(_) => {
                let n = self.arity as f64;
                for (counts, w) in self.multiset_entries() {
                    for (i, &c) in counts.iter().enumerate() {
                        weights[i] += w * c as f64 / n;
                    }
                }
            }
            NBodyWeights::Dense(w) => {
                let stride = m.pow(self.arity as u32 - 1);
                for (idx, &w) in w.iter().enumerate() {
                    weights[idx / stride] += w;
                }
            }
        }
        DiscreteMeasure::new(self.grid.clone(), weights)
    }

    /// Checks invariance of a dense measure under `min(N!, 720)` random
    /// coordinate permutations. Multiset measures are symmetric by construction.
    pub fn check_symmetry<R: Rng>(&self, rng: &mut R, tol: f64) -> bool {
        let NBodyWeights::Dense(w) = &self.weights else {
            return true;
        };
        let m = self.grid.len();
        let samples = (1..=self.arity).try_fold(1usize, |acc, i| {
            acc.checked_mul(i).filter(|&v| v <= 720)
        });
        let samples = samples.unwrap_or(720);
        let mut perm: Vec<usize> = (0..self.arity).collect();
        let mut tuple = vec![0; self.arity];
        let mut permuted = vec![0; self.arity];
        for _ in 0..samples {
            perm.shuffle(rng);
            for (idx, &wi) in w.iter().enumerate() {
                decode_tuple(idx, m, self.arity, &mut tuple);
                for (slot, &p) in permuted.iter_mut().zip(&perm) {
                    *slot = tuple[p];
                }
                if (w[encode_tuple(&permuted, m)] - wi).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Sum of absolute differences. Mixed storage modes are compared after
    /// expanding the multiset side; arities must agree.
    pub fn tv_distance(&self, other: &Self) -> Result<f64, MeasureError> {
        same_grid(&self.grid, &other.grid)?;
        if self.arity != other.arity {
            return Err(MeasureError::ArityMismatch(self.arity, other.arity));
        }
        match (&self.weights, &other.weights) {
            (NBodyWeights::Multiset(a), NBodyWeights::Multiset(b))
            | (NBodyWeights::Dense(a), NBodyWeights::Dense(b)) => Ok(l1_distance(a, b)),
            _ => {
                let (a, b) = (self.to_dense()?, other.to_dense()?);
                match (&a.weights, &b.weights) {
                    (NBodyWeights::Dense(a), NBodyWeights::Dense(b)) => Ok(l1_distance(a, b)),
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Raw weight slice regardless of mode.
    pub fn raw_weights(&self) -> &[f64] {
        match &self.weights {
            NBodyWeights::Dense(w) | NBodyWeights::Multiset(w) => w,
        }
    }
}

/// Sums of products can drift a few ulps past the normalization tolerance on
/// very large supports; anything within `TAU_NORM` is passed through unchanged.
fn renormalize_roundoff(weights: Vec<f64>) -> Result<Vec<f64>, MeasureError> {
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() <= TAU_NORM {
        Ok(weights)
    } else {
        Err(MeasureError::NotNormalized(total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize) -> Arc<SupportGrid> {
        Arc::new(SupportGrid::line(&(0..m).map(|i| i as f64).collect::<Vec<_>>()).unwrap())
    }

    /// Brute-force product weights: enumerate all m^n tuples and aggregate.
    fn brute_product(q: &[f64], n: usize) -> Vec<f64> {
        let m = q.len();
        let space = MultisetSpace::new(m, n);
        let mut out = vec![0.0; space.len().unwrap()];
        let mut tuple = vec![0; n];
        for idx in 0..m.pow(n as u32) {
            decode_tuple(idx, m, n, &mut tuple);
            let w: f64 = tuple.iter().map(|&a| q[a]).product();
            tuple.sort_unstable();
            out[space.rank(&tuple)] += w;
        }
        out
    }

    #[test]
    fn product_examples() {
        let g = grid(2);
        let dirac = DiscreteMeasure::dirac(g.clone(), 0);
        let p = NBodyMeasure::product(&dirac, 3).unwrap();
        assert_eq!(p.raw_weights(), &[1.0, 0.0, 0.0, 0.0]);

        let mu = DiscreteMeasure::uniform(g);
        let p2 = NBodyMeasure::product(&mu, 2).unwrap();
        assert_eq!(p2.raw_weights(), &[0.25, 0.5, 0.25]);
        let p3 = NBodyMeasure::product(&mu, 3).unwrap();
        assert_eq!(p3.raw_weights(), brute_product(&[0.5, 0.5], 3).as_slice());
        assert_eq!(p3.raw_weights(), &[0.125, 0.375, 0.375, 0.125]);
    }

    #[test]
    fn product_matches_tuple_enumeration() {
        let g = grid(3);
        let mu = DiscreteMeasure::new(g, vec![0.2, 0.3, 0.5]).unwrap();
        for n in 2..6 {
            let p = NBodyMeasure::product(&mu, n).unwrap();
            let brute = brute_product(mu.weights(), n);
            assert!(l1_distance(p.raw_weights(), &brute) < 1e-14);
        }
    }

    #[test]
    fn marginal_examples() {
        let g = grid(2);
        let mu = DiscreteMeasure::uniform(g.clone());
        let p4 = NBodyMeasure::product(&mu, 4).unwrap();
        assert_eq!(p4.one_marginal().unwrap(), mu);

        // anticorrelated pair measure
        let anti = PairMeasure::new(g.clone(), vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(anti.marginal(), mu);

        let gamma = NBodyMeasure::multiset(g.clone(), 3, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let pair = gamma.pair_marginal().unwrap();
        let expected = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
        assert!(l1_distance(pair.weights(), &expected) < 1e-15);
        // the same pair law through the multiset route
        let m2 = gamma.marginal(2).unwrap();
        assert!(l1_distance(m2.raw_weights(), &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) < 1e-15);
        // and through tuple expansion
        let dense_pair = gamma.to_dense().unwrap().marginal_on(&[1, 2]).unwrap();
        assert!(l1_distance(dense_pair.raw_weights(), &expected) < 1e-15);
    }

    #[test]
    fn symmetrize_examples() {
        let g = grid(2);
        // delta at (A, B)
        let d = NBodyMeasure::dense(g.clone(), 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let s = d.symmetrize();
        assert_eq!(s.raw_weights(), &[0.0, 1.0, 0.0]);
        let dense = s.to_dense().unwrap();
        assert_eq!(dense.raw_weights(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(dense.symmetrize(), s);

        // delta at (A, A, B) spreads over 3 orderings
        let mut w = vec![0.0; 8];
        w[encode_tuple(&[0, 0, 1], 2)] = 1.0;
        let s3 = NBodyMeasure::dense(g, 3, w).unwrap().symmetrize().to_dense().unwrap();
        for t in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert!((s3.raw_weights()[encode_tuple(&t, 2)] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_pushforward_examples() {
        let g = grid(2);
        let mu = DiscreteMeasure::uniform(g.clone());
        let d2 = NBodyMeasure::diagonal_pushforward(&mu, 2).unwrap();
        assert_eq!(d2.pair_marginal().unwrap(), PairMeasure::diagonal(&mu));
        let d5 = NBodyMeasure::diagonal_pushforward(&mu, 5).unwrap();
        assert_eq!(d5.one_marginal().unwrap(), mu);
        let a = DiscreteMeasure::dirac(g, 0);
        let da = NBodyMeasure::diagonal_pushforward(&a, 2).unwrap();
        assert_eq!(da.raw_weights(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn symmetry_check_detects_asymmetry() {
        let g = grid(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let asym = NBodyMeasure::dense(g.clone(), 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!asym.check_symmetry(&mut rng, 1e-12));
        assert!(asym.symmetrize().to_dense().unwrap().check_symmetry(&mut rng, 1e-12));
    }

    #[test]
    fn arity_mismatch() {
        let mu = DiscreteMeasure::uniform(grid(2));
        let a = NBodyMeasure::product(&mu, 2).unwrap();
        let b = NBodyMeasure::product(&mu, 3).unwrap();
        assert!(matches!(a.tv_distance(&b), Err(MeasureError::ArityMismatch(2, 3))));
        assert!(a.marginal(3).is_err());
    }

    #[test]
    fn mixed_mode_tv() {
        let mu = DiscreteMeasure::uniform(grid(3));
        let a = NBodyMeasure::product(&mu, 3).unwrap();
        let b = a.to_dense().unwrap();
        assert!(a.tv_distance(&b).unwrap() < 1e-15);
    }
}
