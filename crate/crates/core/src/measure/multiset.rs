//! Size-`n` multisets over `m` support points.
//!
//! A multiset is stored as its non-decreasing index sequence `a_1 <= ... <= a_n`.
//! The enumeration order is lexicographic on that sequence, so for `m = 2, n = 3`
//! the order is `000, 001, 011, 111`.

/// Binomial coefficient as `u128`, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(n, k)` as a float; exact for every value below 2^53.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Number of orderings of a multiset with the given multiplicities.
pub fn multinomial_f64(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut acc = 1.0f64;
    for &c in counts {
        total += c;
        acc *= binomial_f64(total, c);
    }
    acc
}

/// The space of all size-`n` multisets over `m` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultisetSpace {
    points: usize,
    size: usize,
}

impl MultisetSpace {
    pub fn new(points: usize, size: usize) -> Self {
        Self { points, size }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `C(m + n - 1, n)`, or `None` if it does not fit in `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        if self.points == 0 {
            return Some(if self.size == 0 { 1 } else { 0 });
        }
        binomial((self.points + self.size - 1) as u64, self.size as u64)
    }

    /// Cardinality as `usize`; `None` if it overflows.
    pub fn len(&self) -> Option<usize> {
        self.cardinality().and_then(|c| usize::try_from(c).ok())
    }

    pub fn iter(&self) -> MultisetIter {
        MultisetIter {
            points: self.points,
            current: if self.points == 0 && self.size > 0 {
                None
            } else {
                Some(vec![0; self.size])
            },
        }
    }

    /// Lexicographic rank of a non-decreasing sequence.
    pub fn rank(&self, seq: &[usize]) -> usize {
        debug_assert_eq!(seq.len(), self.size);
        let mut rank = 0usize;
        let mut prev = 0usize;
        for (pos, &a) in seq.iter().enumerate() {
            let remaining = self.size - pos - 1;
            for v in prev..a {
                // completions of length `remaining` over symbols v..m
                rank += MultisetSpace::new(self.points - v, remaining)
                    .len()
                    .expect("rank within a space that fits in memory");
            }
            prev = a;
        }
        rank
    }

    /// Rank of the multiset with the given multiplicity vector.
    pub fn rank_counts(&self, counts: &[usize]) -> usize {
        self.rank(&counts_to_sequence(counts))
    }
}

/// Iterator over non-decreasing sequences in lexicographic order.
pub struct MultisetIter {
    points: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for MultisetIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        if let Some(p) = (0..next.len()).rev().find(|&p| next[p] + 1 < self.points) {
            let v = next[p] + 1;
            for slot in next.iter_mut().skip(p) {
                *slot = v;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Multiplicity vector of length `m` for a sequence.
pub fn sequence_counts(seq: &[usize], points: usize) -> Vec<usize> {
    let mut counts = vec![0; points];
    for &a in seq {
        counts[a] += 1;
    }
    counts
}

pub fn counts_to_sequence(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect()
}

/// Every way of drawing a size-`k` sub-multiset from `counts`, with the
/// probability of drawing it as the first `k` of a uniformly random ordering:
/// `prod_i C(n_i, k_i) / C(n, k)`.
pub fn submultisets(counts: &[usize], k: usize) -> Vec<(Vec<usize>, f64)> {
    let n: usize = counts.iter().sum();
    let total = binomial_f64(n, k);
    let mut out = Vec::new();
    let mut current = vec![0usize; counts.len()];
    fn recurse(
        counts: &[usize],
        idx: usize,
        left: usize,
        current: &mut Vec<usize>,
        ways: f64,
        total: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if idx == counts.len() {
            if left == 0 {
                out.push((current.clone(), ways / total));
            }
            return;
        }
        let tail: usize = counts[idx + 1..].iter().sum();
        let lo = left.saturating_sub(tail);
        for take in lo..=counts[idx].min(left) {
            current[idx] = take;
            recurse(
                counts,
                idx + 1,
                left - take,
                current,
                ways * binomial_f64(counts[idx], take),
                total,
                out,
            );
        }
        current[idx] = 0;
    }
    if k <= n {
        recurse(counts, 0, k, &mut current, 1.0, total, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_in_lex_order() {
        let all: Vec<_> = MultisetSpace::new(2, 3).iter().collect();
        assert_eq!(
            all,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]
        );
    }

    #[test]
    fn rank_matches_enumeration() {
        for (m, n) in [(1, 4), (3, 3), (4, 5), (5, 2), (2, 9)] {
            let space = MultisetSpace::new(m, n);
            let all: Vec<_> = space.iter().collect();
            assert_eq!(all.len(), space.len().unwrap());
            for (i, s) in all.iter().enumerate() {
                assert_eq!(space.rank(s), i);
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(41, 30), Some(3_159_461_968));
        assert_eq!(binomial_f64(10, 3), 120.0);
        assert_eq!(multinomial_f64(&[2, 1]), 3.0);
        assert_eq!(multinomial_f64(&[1, 1, 1]), 6.0);
    }

    #[test]
    fn submultiset_probabilities_sum_to_one() {
        let subs = submultisets(&[2, 1], 2);
        let total: f64 = subs.iter().map(|s| s.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let aa = subs.iter().find(|s| s.0 == vec![2, 0]).unwrap();
        assert!((aa.1 - 1.0 / 3.0).abs() < 1e-15);
    }
}
