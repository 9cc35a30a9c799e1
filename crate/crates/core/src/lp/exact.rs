//! Exact rational simplex on a dense tableau with Bland's rule.
//!
//! Slow by design and independent of the floating-point solver: it shares no
//! code with it beyond the [`LinearProgram`] type, so the two can serve as
//! oracles for each other.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{FarkasCertificate, LinearProgram, LpError, LpResult, LpStats, LpStatus};

/// Largest column count accepted by the exact solver.
pub const EXACT_COLUMN_LIMIT: usize = 5000;

/// `min c^T x, A x = b, x >= 0` over the rationals; `None` costs are `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalProgram {
    pub objective: Vec<Option<BigRational>>,
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
}

impl RationalProgram {
    /// Exact conversion of every binary64 entry.
    pub fn from_float(lp: &LinearProgram) -> Self {
        let q = |v: f64| BigRational::from_float(v).expect("finite entries");
        let objective = lp
            .objective()
            .iter()
            .map(|&c| c.is_finite().then(|| q(c)))
            .collect();
        let rows = lp
            .matrix()
            .to_dense()
            .into_iter()
            .map(|row| row.into_iter().map(q).collect())
            .collect();
        let rhs = lp.rhs().iter().map(|&b| q(b)).collect();
        Self {
            objective,
            rows,
            rhs,
        }
    }

    /// Builds from small integer ratios `(numerator, denominator)`.
    pub fn from_ratios(
        objective: &[Option<(i64, i64)>],
        rows: &[Vec<(i64, i64)>],
        rhs: &[(i64, i64)],
    ) -> Self {
        let q = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self {
            objective: objective.iter().map(|c| c.map(q)).collect(),
            rows: rows.iter().map(|r| r.iter().copied().map(q).collect()).collect(),
            rhs: rhs.iter().copied().map(q).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactLpResult {
    pub status: LpStatus,
    pub primal: Vec<BigRational>,
    pub objective: Option<BigRational>,
    pub dual: Vec<BigRational>,
    pub farkas: Option<Vec<BigRational>>,
    pub ray: Option<Vec<BigRational>>,
    pub pivots: usize,
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl ExactLpResult {
    pub fn objective_f64(&self) -> f64 {
        match self.status {
            LpStatus::Optimal => to_f64(self.objective.as_ref().expect("optimal value")),
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        }
    }

    /// Rounded view for comparison with [`super::solve`].
    pub fn to_float(&self, lp: &LinearProgram) -> LpResult {
        let v = |xs: &[BigRational]| xs.iter().map(to_f64).collect::<Vec<_>>();
        LpResult {
            status: self.status,
            primal: v(&self.primal),
            objective: self.objective_f64(),
            dual: v(&self.dual),
            farkas: self
                .farkas
                .as_ref()
                .map(|y| FarkasCertificate::evaluate(lp, v(y))),
            ray: self.ray.as_ref().map(|d| v(d)),
            stats: LpStats {
                iterations: self.pivots,
                ..LpStats::default()
            },
        }
    }
}

pub fn solve_exact(lp: &LinearProgram) -> Result<ExactLpResult, LpError> {
    solve_rational(&RationalProgram::from_float(lp))
}

struct Tableau {
    /// `r` constraint rows of width `n + r + 1`; the last entry is the
    /// right-hand side.
    t: Vec<Vec<BigRational>>,
    /// Reduced costs, last entry `-objective`.
    z: Vec<BigRational>,
    basis: Vec<usize>,
    n: usize,
    r: usize,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + self.r + 1
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width();
        let inv = self.t[p][q].recip();
        for k in 0..w {
            let v = &self.t[p][k] * &inv;
            self.t[p][k] = v;
        }
        let prow = self.t[p].clone();
        for i in 0..self.r {
            if i != p && !self.t[i][q].is_zero() {
                let f = self.t[i][q].clone();
                for k in 0..w {
                    if !prow[k].is_zero() {
                        let v = &self.t[i][k] - &f * &prow[k];
                        self.t[i][k] = v;
                    }
                }
            }
        }
        if !self.z[q].is_zero() {
            let f = self.z[q].clone();
            for k in 0..w {
                if !prow[k].is_zero() {
                    let v = &self.z[k] - &f * &prow[k];
                    self.z[k] = v;
                }
            }
        }
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// Bland's rule; returns the unbounded column if one is found.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Option<usize> {
        let rhs = self.width() - 1;
        loop {
            let q = (0..self.n + self.r).find(|&j| allowed(j) && self.z[j].is_negative())?;
            let mut best: Option<(usize, BigRational)> = None;
            for i in 0..self.r {
                if self.t[i][q].is_positive() {
                    let ratio = &self.t[i][rhs] / &self.t[i][q];
                    let better = match &best {
                        None => true,
                        Some((b, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*b])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((p, _)) => self.pivot(p, q),
                None => return Some(q),
            }
        }
    }
}

pub fn solve_rational(p: &RationalProgram) -> Result<ExactLpResult, LpError> {
    let cols = p.objective.len();
    if cols > EXACT_COLUMN_LIMIT {
        return Err(LpError::TooLarge {
            columns: cols,
            limit: EXACT_COLUMN_LIMIT,
        });
    }
    let r = p.rows.len();
    if r == 0 || cols == 0 || p.rhs.len() != r || p.rows.iter().any(|row| row.len() != cols) {
        return Err(LpError::Invalid("inconsistent rational program".into()));
    }
    let kept: Vec<usize> = (0..cols).filter(|&j| p.objective[j].is_some()).collect();
    let n = kept.len();
    let flip: Vec<BigRational> = p
        .rhs
        .iter()
        .map(|b| if b.is_negative() { -BigRational::one() } else { BigRational::one() })
        .collect();

    let width = n + r + 1;
    let mut t = vec![vec![BigRational::zero(); width]; r];
    for i in 0..r {
        for (k, &j) in kept.iter().enumerate() {
            t[i][k] = &p.rows[i][j] * &flip[i];
        }
        t[i][n + i] = BigRational::one();
        t[i][width - 1] = &p.rhs[i] * &flip[i];
    }
    // phase one: minimize the sum of artificials
    let mut z = vec![BigRational::zero(); width];
    for row in &t {
        for k in 0..n {
            z[k] -= &row[k];
        }
        z[width - 1] -= &row[width - 1];
    }
    let mut tab = Tableau {
        t,
        z,
        basis: (n..n + r).collect(),
        n,
        r,
        pivots: 0,
    };
    tab.run(|_| true);

    let phase_one = -tab.z[width - 1].clone();
    if phase_one.is_positive() {
        // y_i = 1 - d_{artificial i}
        let y = (0..r)
            .map(|i| (BigRational::one() - &tab.z[n + i]) * &flip[i])
            .collect();
        return Ok(ExactLpResult {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            objective: None,
            dual: Vec::new(),
            farkas: Some(y),
            ray: None,
            pivots: tab.pivots,
        });
    }
    for row in 0..r {
        if tab.basis[row] >= n {
            if let Some(q) = (0..n).find(|&j| !tab.t[row][j].is_zero()) {
                tab.pivot(row, q);
            }
        }
    }

    // phase two
    let cost = |j: usize| -> BigRational {
        if j < n {
            p.objective[kept[j]].clone().expect("kept columns are finite")
        } else {
            BigRational::zero()
        }
    };
    let mut z = vec![BigRational::zero(); width];
    for (j, zj) in z.iter_mut().enumerate().take(n + r) {
        *zj = cost(j);
    }
    for i in 0..r {
        let cb = cost(tab.basis[i]);
        if !cb.is_zero() {
            for (k, zk) in z.iter_mut().enumerate() {
                *zk -= &cb * &tab.t[i][k];
            }
        }
    }
    tab.z = z;
    if let Some(q) = tab.run(|j| j < n) {
        let mut d = vec![BigRational::zero(); cols];
        d[kept[q]] = BigRational::one();
        for i in 0..r {
            if tab.basis[i] < n {
                d[kept[tab.basis[i]]] = -tab.t[i][q].clone();
            }
        }
        return Ok(ExactLpResult {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            objective: None,
            dual: Vec::new(),
            farkas: None,
            ray: Some(d),
            pivots: tab.pivots,
        });
    }
    let mut x = vec![BigRational::zero(); cols];
    for i in 0..r {
        if tab.basis[i] < n {
            x[kept[tab.basis[i]]] = tab.t[i][width - 1].clone();
        }
    }
    let objective = -tab.z[width - 1].clone();
    let dual = (0..r).map(|i| -&tab.z[n + i] * &flip[i]).collect();
    Ok(ExactLpResult {
        status: LpStatus::Optimal,
        primal: x,
        objective: Some(objective),
        dual,
        farkas: None,
        ray: None,
        pivots: tab.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn trivial_programs() {
        let p = RationalProgram::from_ratios(&[Some((1, 1))], &[vec![(1, 1)]], &[(1, 1)]);
        let r = solve_rational(&p).unwrap();
        assert_eq!(r.objective, Some(q(1, 1)));
        assert_eq!(r.dual, vec![q(1, 1)]);

        let p = RationalProgram::from_ratios(&[Some((1, 1))], &[vec![(1, 1)], vec![(1, 1)]], &[(1, 1), (2, 1)]);
        let r = solve_rational(&p).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        let y = r.farkas.unwrap();
        let yb = &y[0] + &y[1] * q(2, 1);
        let ya = &y[0] + &y[1];
        assert!(yb.is_positive() && !ya.is_positive());
    }

    #[test]
    fn transport_with_symbolic_cost() {
        // cost matrix [[1, 1/3], [1/3, 1]] between uniform marginals: optimum 1/3
        let rows = vec![
            vec![(1, 1), (1, 1), (0, 1), (0, 1)],
            vec![(0, 1), (0, 1), (1, 1), (1, 1)],
            vec![(1, 1), (0, 1), (1, 1), (0, 1)],
            vec![(0, 1), (1, 1), (0, 1), (1, 1)],
        ];
        let c = [Some((1, 1)), Some((1, 3)), Some((1, 3)), Some((1, 1))];
        let p = RationalProgram::from_ratios(&c, &rows, &[(1, 2); 4]);
        let r = solve_rational(&p).unwrap();
        assert_eq!(r.objective, Some(q(1, 3)));
        let dual_obj: BigRational = r.dual.iter().map(|y| y * q(1, 2)).sum();
        assert_eq!(dual_obj, q(1, 3));
    }

    #[test]
    fn size_limit() {
        let p = RationalProgram {
            objective: vec![Some(q(0, 1)); EXACT_COLUMN_LIMIT + 1],
            rows: vec![vec![q(1, 1); EXACT_COLUMN_LIMIT + 1]],
            rhs: vec![q(1, 1)],
        };
        assert!(matches!(solve_rational(&p), Err(LpError::TooLarge { .. })));
    }
}
