//! Two-phase revised simplex with a dense explicit basis inverse.
//!
//! The basis inverse is updated by product-form pivots and rebuilt by
//! Gauss–Jordan elimination every `refactor_every` pivots. Pricing is
//! Goldfarb–Reid steepest edge (exact reference weights) with a Harris
//! two-pass ratio test; a long run of degenerate pivots switches the solve to
//! Bland's rule for good, which guarantees termination.
//!
//! Every result is checked against the original data before it is returned;
//! a failed check triggers one Bland-only retry and then a
//! [`LpError::NumericalBreakdown`].

use super::{
    FarkasCertificate, LinearProgram, LpError, LpOptions, LpResult, LpStats, LpStatus, Pricing,
    SparseMatrix,
};

const PIVOT_TOL: f64 = 1e-9;
const DRIVE_OUT_TOL: f64 = 1e-7;
const DEGENERATE_STEP: f64 = 1e-12;

pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    solve_with(lp, &LpOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &LpOptions) -> Result<LpResult, LpError> {
    match attempt(lp, opts, opts.pricing, opts.refactor_every) {
        Ok(r) => Ok(r),
        Err(first @ (LpError::NumericalBreakdown(_) | LpError::Ambiguous { .. })) => {
            if opts.pricing == Pricing::Bland && opts.refactor_every <= 16 {
                return Err(first);
            }
            let mut r = attempt(lp, opts, Pricing::Bland, opts.refactor_every.min(16))?;
            r.stats.retried = true;
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// The problem after eliminating infinite-cost columns and empty rows, with
/// rows scaled to unit norm and nonnegative right-hand sides.
struct Prepared {
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Original column of each kept column.
    cols: Vec<usize>,
    /// Original row of each kept row.
    rows: Vec<usize>,
    /// `kept row i = factor[i] * original row rows[i]`.
    factor: Vec<f64>,
}

enum Presolve {
    Ready(Prepared),
    /// An empty row with nonzero right-hand side.
    EmptyRow(usize),
    /// An empty column with negative cost.
    FreeRay(usize),
}

fn presolve(lp: &LinearProgram) -> Presolve {
    let a = lp.matrix();
    let cols: Vec<usize> = (0..lp.cols())
        .filter(|&j| lp.objective()[j].is_finite())
        .collect();
    for &j in &cols {
        if a.column(j).0.is_empty() && lp.objective()[j] < 0.0 {
            return Presolve::FreeRay(j);
        }
    }
    let mut norm2 = vec![0.0; lp.rows()];
    for &j in &cols {
        let (idx, val) = a.column(j);
        for (&i, &v) in idx.iter().zip(val) {
            norm2[i] += v * v;
        }
    }
    let mut new_row = vec![usize::MAX; lp.rows()];
    let mut rows = Vec::new();
    let mut factor = Vec::new();
    let mut b = Vec::new();
    for i in 0..lp.rows() {
        if norm2[i] == 0.0 {
            if lp.rhs()[i] != 0.0 {
                return Presolve::EmptyRow(i);
            }
            continue;
        }
        let flip = if lp.rhs()[i] < 0.0 { -1.0 } else { 1.0 };
        let f = flip / norm2[i].sqrt();
        new_row[i] = rows.len();
        rows.push(i);
        factor.push(f);
        b.push(f * lp.rhs()[i]);
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for (k, &j) in cols.iter().enumerate() {
        let (idx, val) = a.column(j);
        for (&i, &v) in idx.iter().zip(val) {
            triplets.push((new_row[i], k, factor[new_row[i]] * v));
        }
    }
    let scaled = SparseMatrix::from_triplets(rows.len(), cols.len(), triplets)
        .expect("indices come from a valid matrix");
    let c = cols.iter().map(|&j| lp.objective()[j]).collect();
    Presolve::Ready(Prepared {
        a: scaled,
        b,
        c,
        cols,
        rows,
        factor,
    })
}

fn attempt(
    lp: &LinearProgram,
    opts: &LpOptions,
    pricing: Pricing,
    refactor_every: usize,
) -> Result<LpResult, LpError> {
    let eliminated = lp.objective().iter().filter(|c| c.is_infinite()).count();
    let prep = match presolve(lp) {
        Presolve::Ready(p) => p,
        Presolve::EmptyRow(i) => {
            let mut y = vec![0.0; lp.rows()];
            y[i] = lp.rhs()[i].signum();
            return infeasible(lp, opts, y, lp.rhs()[i].abs(), eliminated);
        }
        Presolve::FreeRay(j) => {
            let mut d = vec![0.0; lp.cols()];
            d[j] = 1.0;
            return unbounded(lp, d, eliminated);
        }
    };
    let stats = LpStats {
        eliminated_columns: eliminated,
        ..LpStats::default()
    };
    if prep.rows.is_empty() {
        // every remaining column is empty with nonnegative cost
        return optimal(lp, opts, vec![0.0; lp.cols()], vec![0.0; lp.rows()], stats);
    }

    let max_iter = opts
        .max_iterations
        .unwrap_or_else(|| 100_000usize.max(20 * (prep.a.rows() + prep.a.cols())));
    let mut s = Simplex::new(&prep, pricing, refactor_every.max(1), opts.degenerate_limit, max_iter);
    s.stats = stats;

    // phase one
    let b_scale = prep.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    s.set_phase_one();
    s.run(1e-10)?;
    s.stats.phase_one_iterations = s.stats.iterations;
    let residual: f64 = s
        .basis
        .iter()
        .zip(&s.xb)
        .filter(|(&j, _)| j >= s.n)
        .map(|(_, &x)| x.max(0.0))
        .sum();
    if residual > opts.tol_feas * b_scale {
        let ys = s.duals();
        let mut y = vec![0.0; lp.rows()];
        for (k, &i) in prep.rows.iter().enumerate() {
            y[i] = ys[k] * prep.factor[k];
        }
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > 0.0 {
            y.iter_mut().for_each(|v| *v /= norm);
        }
        let mut r = infeasible(lp, opts, y, residual, eliminated)?;
        r.stats = s.stats.clone();
        return Ok(r);
    }
    s.drive_out_artificials()?;

    // phase two
    let c_scale = prep.c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    s.set_phase_two();
    match s.run(1e-9 * c_scale)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded { entering, w } => {
            let mut d = vec![0.0; lp.cols()];
            d[prep.cols[entering]] = 1.0;
            for (i, &j) in s.basis.iter().enumerate() {
                if j < s.n {
                    d[prep.cols[j]] = (-w[i]).max(0.0);
                }
            }
            let mut r = unbounded(lp, d, eliminated)?;
            r.stats = s.stats.clone();
            return Ok(r);
        }
    }
    let mut x = vec![0.0; lp.cols()];
    for (i, &j) in s.basis.iter().enumerate() {
        if j < s.n {
            x[prep.cols[j]] = s.xb[i];
        }
    }
    let ys = s.duals();
    let mut y = vec![0.0; lp.rows()];
    for (k, &i) in prep.rows.iter().enumerate() {
        y[i] = ys[k] * prep.factor[k];
    }
    optimal(lp, opts, x, y, s.stats.clone())
}

fn optimal(
    lp: &LinearProgram,
    opts: &LpOptions,
    mut x: Vec<f64>,
    y: Vec<f64>,
    mut stats: LpStats,
) -> Result<LpResult, LpError> {
    let b_scale = lp.rhs().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(v) = x.iter().find(|v| **v < -opts.tol_feas * b_scale) {
        return Err(LpError::NumericalBreakdown(format!("negative primal entry {v:e}")));
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let residual = lp.primal_residual(&x);
    if residual > opts.tol_feas * b_scale {
        return Err(LpError::NumericalBreakdown(format!("primal residual {residual:e}")));
    }
    let objective = lp.evaluate(&x);
    let dual_obj: f64 = y.iter().zip(lp.rhs()).map(|(a, b)| a * b).sum();
    let gap = (objective - dual_obj).abs();
    if gap > opts.tol_gap * objective.abs().max(1.0) {
        return Err(LpError::NumericalBreakdown(format!("duality gap {gap:e}")));
    }
    let c_scale = lp
        .objective()
        .iter()
        .filter(|c| c.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let dual_inf = lp.dual_infeasibility(&y);
    if dual_inf > 1e-7 * c_scale {
        return Err(LpError::NumericalBreakdown(format!("dual infeasibility {dual_inf:e}")));
    }
    stats.primal_residual = residual;
    stats.duality_gap = gap;
    Ok(LpResult {
        status: LpStatus::Optimal,
        primal: x,
        objective,
        dual: y,
        farkas: None,
        ray: None,
        stats,
    })
}

fn infeasible(
    lp: &LinearProgram,
    opts: &LpOptions,
    y: Vec<f64>,
    residual: f64,
    eliminated: usize,
) -> Result<LpResult, LpError> {
    let cert = FarkasCertificate::evaluate(lp, y);
    if !cert.verify(lp, opts.tol_feas, opts.tol_farkas) {
        return Err(LpError::Ambiguous {
            residual,
            margin: cert.margin,
        });
    }
    Ok(LpResult {
        status: LpStatus::Infeasible,
        primal: Vec::new(),
        objective: f64::INFINITY,
        dual: Vec::new(),
        farkas: Some(cert),
        ray: None,
        stats: LpStats {
            eliminated_columns: eliminated,
            ..LpStats::default()
        },
    })
}

fn unbounded(lp: &LinearProgram, d: Vec<f64>, eliminated: usize) -> Result<LpResult, LpError> {
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ad = lp.matrix().mul(&d);
    let slope = lp.evaluate(&d);
    if ad.iter().any(|v| v.abs() > 1e-9 * scale.max(1.0)) || slope >= 0.0 {
        return Err(LpError::NumericalBreakdown("unbounded ray failed verification".into()));
    }
    Ok(LpResult {
        status: LpStatus::Unbounded,
        primal: Vec::new(),
        objective: f64::NEG_INFINITY,
        dual: Vec::new(),
        farkas: None,
        ray: Some(d),
        stats: LpStats {
            eliminated_columns: eliminated,
            ..LpStats::default()
        },
    })
}


enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize, w: Vec<f64> },
}

const NONBASIC: usize = usize::MAX;

/// Variables `0..n` are the kept columns, `n..n + r` the artificial unit
/// columns.
struct Simplex<'a> {
    a: &'a SparseMatrix,
    b: &'a [f64],
    c: &'a [f64],
    r: usize,
    n: usize,
    cost: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<usize>,
    excluded: Vec<bool>,
    /// Row-major `r x r` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    gamma: Vec<f64>,
    phase_two: bool,
    steepest: bool,
    bland: bool,
    refactor_every: usize,
    since_refactor: usize,
    degenerate_limit: usize,
    degenerate_run: usize,
    max_iter: usize,
    stats: LpStats,
}

impl<'a> Simplex<'a> {
    fn new(
        p: &'a Prepared,
        pricing: Pricing,
        refactor_every: usize,
        degenerate_limit: usize,
        max_iter: usize,
    ) -> Self {
        let r = p.a.rows();
        let n = p.a.cols();
        let mut binv = vec![0.0; r * r];
        for i in 0..r {
            binv[i * r + i] = 1.0;
        }
        let mut position = vec![NONBASIC; n + r];
        for i in 0..r {
            position[n + i] = i;
        }
        Self {
            a: &p.a,
            b: &p.b,
            c: &p.c,
            r,
            n,
            cost: vec![0.0; n + r],
            basis: (n..n + r).collect(),
            position,
            excluded: vec![false; n + r],
            binv,
            xb: p.b.clone(),
            gamma: vec![1.0; n + r],
            phase_two: false,
            steepest: pricing == Pricing::SteepestEdge,
            bland: pricing == Pricing::Bland,
            refactor_every,
            since_refactor: 0,
            degenerate_limit,
            degenerate_run: 0,
            max_iter,
            stats: LpStats::default(),
        }
    }

    /// `v^T a_j`.
    fn dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            self.a.dot_column(j, v)
        } else {
            v[j - self.n]
        }
    }

    /// `B^-1 a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let r = self.r;
        let mut w = vec![0.0; r];
        if j < self.n {
            let (idx, val) = self.a.column(j);
            for (&k, &v) in idx.iter().zip(val) {
                for (i, wi) in w.iter_mut().enumerate() {
                    *wi += self.binv[i * r + k] * v;
                }
            }
        } else {
            let k = j - self.n;
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = self.binv[i * r + k];
            }
        }
        w
    }

    /// `u^T B^-1`.
    fn btran(&self, u: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut out = vec![0.0; r];
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                let row = &self.binv[i * r..(i + 1) * r];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += ui * b;
                }
            }
        }
        out
    }

    fn duals(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.btran(&cb)
    }

    fn set_phase_one(&mut self) {
        for j in 0..self.n + self.r {
            self.cost[j] = if j < self.n { 0.0 } else { 1.0 };
        }
        // B = I: reference weights are exact
        for j in 0..self.n {
            let (_, val) = self.a.column(j);
            self.gamma[j] = 1.0 + val.iter().map(|v| v * v).sum::<f64>();
        }
    }

    fn set_phase_two(&mut self) {
        self.phase_two = true;
        for j in 0..self.n {
            self.cost[j] = self.c[j];
        }
        for j in self.n..self.n + self.r {
            self.cost[j] = 0.0;
            if self.position[j] == NONBASIC {
                self.excluded[j] = true;
            }
        }
        if self.steepest && !self.bland {
            let work = self.a.nnz().saturating_mul(self.r);
            for j in 0..self.n {
                self.gamma[j] = if work <= 50_000_000 && self.position[j] == NONBASIC {
                    1.0 + self.ftran(j).iter().map(|v| v * v).sum::<f64>()
                } else {
                    1.0
                };
            }
        }
    }

    /// Rebuilds `B^-1` by Gauss–Jordan elimination with partial pivoting and
    /// recomputes the basic solution.
    fn refactor(&mut self) -> Result<(), LpError> {
        let r = self.r;
        let mut m = vec![0.0; r * r];
        for (col, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                let (idx, val) = self.a.column(j);
                for (&i, &v) in idx.iter().zip(val) {
                    m[i * r + col] = v;
                }
            } else {
                m[(j - self.n) * r + col] = 1.0;
            }
        }
        let mut inv = vec![0.0; r * r];
        for i in 0..r {
            inv[i * r + i] = 1.0;
        }
        for col in 0..r {
            let piv = (col..r)
                .max_by(|&x, &y| m[x * r + col].abs().total_cmp(&m[y * r + col].abs()))
                .expect("nonempty range");
            let pv = m[piv * r + col];
            if pv.abs() < 1e-13 {
                return Err(LpError::NumericalBreakdown("singular basis".into()));
            }
            if piv != col {
                for k in 0..r {
                    m.swap(piv * r + k, col * r + k);
                    inv.swap(piv * r + k, col * r + k);
                }
            }
            let inv_pv = 1.0 / pv;
            for k in 0..r {
                m[col * r + k] *= inv_pv;
                inv[col * r + k] *= inv_pv;
            }
            for i in 0..r {
                if i != col {
                    let f = m[i * r + col];
                    if f != 0.0 {
                        for k in 0..r {
                            m[i * r + k] -= f * m[col * r + k];
                            inv[i * r + k] -= f * inv[col * r + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        let mut xb = vec![0.0; r];
        for (i, x) in xb.iter_mut().enumerate() {
            *x = (0..r).map(|k| self.binv[i * r + k] * self.b[k]).sum();
        }
        for x in &mut xb {
            if *x < 0.0 {
                if *x < -1e-7 {
                    return Err(LpError::NumericalBreakdown(format!(
                        "basic solution lost feasibility ({x:e})"
                    )));
                }
                *x = 0.0;
            }
        }
        self.xb = xb;
        self.since_refactor = 0;
        self.stats.refactorizations += 1;
        Ok(())
    }

    fn price(&self, tol: f64) -> Option<usize> {
        let y = self.duals();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.r {
            if self.position[j] != NONBASIC || self.excluded[j] {
                continue;
            }
            let d = self.cost[j] - self.dot(j, &y);
            if d >= -tol {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            let score = if self.steepest { d * d / self.gamma[j] } else { -d };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Harris two-pass ratio test; `None` means unbounded.
    fn ratio_test(&self, w: &[f64]) -> Option<usize> {
        let blocks_at_zero =
            |i: usize| self.phase_two && self.basis[i] >= self.n && w[i].abs() > PIVOT_TOL;
        let candidate = |i: usize| w[i] > PIVOT_TOL || blocks_at_zero(i);
        let ratio = |i: usize| {
            if blocks_at_zero(i) {
                0.0
            } else {
                self.xb[i].max(0.0) / w[i]
            }
        };
        if self.bland {
            let mut min = f64::INFINITY;
            for i in (0..self.r).filter(|&i| candidate(i)) {
                min = min.min(ratio(i));
            }
            if !min.is_finite() {
                return None;
            }
            let slack = 1e-12 * min.max(1.0);
            return (0..self.r)
                .filter(|&i| candidate(i) && ratio(i) <= min + slack)
                .min_by_key(|&i| self.basis[i]);
        }
        let mut bound = f64::INFINITY;
        for i in (0..self.r).filter(|&i| candidate(i)) {
            let relaxed = if blocks_at_zero(i) {
                0.0
            } else {
                (self.xb[i].max(0.0) + 1e-9) / w[i]
            };
            bound = bound.min(relaxed);
        }
        if !bound.is_finite() {
            return None;
        }
        (0..self.r)
            .filter(|&i| candidate(i) && ratio(i) <= bound)
            .max_by(|&x, &y| w[x].abs().total_cmp(&w[y].abs()).then(y.cmp(&x)))
    }

    fn pivot(&mut self, q: usize, p: usize, w: &[f64]) {
        let r = self.r;
        let wp = w[p];
        let theta = if self.phase_two && self.basis[p] >= self.n {
            0.0
        } else {
            (self.xb[p].max(0.0) / wp).max(0.0)
        };
        for i in 0..r {
            if i != p {
                self.xb[i] -= theta * w[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-9 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[p] = theta;

        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if !self.bland && self.degenerate_limit > 0 && self.degenerate_run >= self.degenerate_limit {
                self.bland = true;
                self.stats.bland_fallback = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        let leaving = self.basis[p];
        if self.steepest && !self.bland {
            let rho: Vec<f64> = self.binv[p * r..(p + 1) * r].to_vec();
            let v = self.btran(w);
            let gamma_q = 1.0 + w.iter().map(|x| x * x).sum::<f64>();
            for j in 0..self.n {
                if self.position[j] != NONBASIC || j == q || self.excluded[j] {
                    continue;
                }
                let alpha = self.dot(j, &rho);
                if alpha == 0.0 {
                    continue;
                }
                let ratio = alpha / wp;
                let g = self.gamma[j] - 2.0 * ratio * self.dot(j, &v) + ratio * ratio * gamma_q;
                self.gamma[j] = g.max(1.0 + ratio * ratio);
            }
            self.gamma[leaving] = (gamma_q / (wp * wp)).max(1.0);
        }

        // product-form update of the inverse
        let inv_wp = 1.0 / wp;
        for k in 0..r {
            self.binv[p * r + k] *= inv_wp;
        }
        for i in 0..r {
            if i != p && w[i] != 0.0 {
                let f = w[i];
                for k in 0..r {
                    self.binv[i * r + k] -= f * self.binv[p * r + k];
                }
            }
        }
        self.basis[p] = q;
        self.position[q] = p;
        self.position[leaving] = NONBASIC;
        if leaving >= self.n {
            self.excluded[leaving] = true;
        }
        self.since_refactor += 1;
        self.stats.iterations += 1;
    }

    fn run(&mut self, tol: f64) -> Result<PhaseEnd, LpError> {
        loop {
            if self.stats.iterations >= self.max_iter {
                return Err(LpError::IterationLimit(self.max_iter));
            }
            if self.since_refactor >= self.refactor_every {
                self.refactor()?;
            }
            let Some(q) = self.price(tol) else {
                if self.since_refactor > 0 {
                    // confirm optimality against a fresh factorization
                    self.refactor()?;
                    if self.price(tol).is_some() {
                        continue;
                    }
                }
                return Ok(PhaseEnd::Optimal);
            };
            let w = self.ftran(q);
            let Some(p) = self.ratio_test(&w) else {
                return Ok(PhaseEnd::Unbounded { entering: q, w });
            };
            self.pivot(q, p, &w);
        }
    }

    /// Pivots zero-level artificials out of the basis where a kept column can
    /// replace them; rows where none can are redundant.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let r = self.r;
        let mut changed = false;
        for p in 0..r {
            if self.basis[p] < self.n {
                continue;
            }
            let rho: Vec<f64> = self.binv[p * r..(p + 1) * r].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.position[j] != NONBASIC {
                    continue;
                }
                let a = self.dot(j, &rho).abs();
                if a > DRIVE_OUT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((q, _)) = best {
                let w = self.ftran(q);
                self.xb[p] = 0.0;
                self.pivot(q, p, &w);
                changed = true;
            }
        }
        if changed {
            self.refactor()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{FarkasCertificate, TAU_FARKAS, TAU_FEAS};

    const E_INV: f64 = 0.36787944117144233;

    fn transport(cost: [[f64; 2]; 2], a: [f64; 2], b: [f64; 2]) -> LinearProgram {
        // x_ij at index 2 i + j
        let rows = vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ];
        let c = vec![cost[0][0], cost[0][1], cost[1][0], cost[1][1]];
        LinearProgram::from_dense(c, &rows, vec![a[0], a[1], b[0], b[1]]).unwrap()
    }

    #[test]
    fn single_variable() {
        let lp = LinearProgram::from_dense(vec![1.0], &[vec![1.0]], vec![1.0]).unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
        assert!((r.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_give_a_certificate() {
        let lp = LinearProgram::from_dense(vec![1.0], &[vec![1.0], vec![1.0]], vec![1.0, 2.0]).unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        let cert = r.farkas.unwrap();
        assert!(cert.verify(&lp, TAU_FEAS, TAU_FARKAS));
        let fresh = FarkasCertificate::evaluate(&lp, cert.y.clone());
        assert!(fresh.margin > TAU_FARKAS && fresh.max_violation <= TAU_FEAS);
    }

    #[test]
    fn two_point_transport() {
        let lp = transport([[1.0, E_INV], [E_INV, 1.0]], [0.5, 0.5], [0.5, 0.5]);
        for pricing in [Pricing::SteepestEdge, Pricing::Dantzig, Pricing::Bland] {
            let opts = LpOptions {
                pricing,
                ..LpOptions::default()
            };
            let r = solve_with(&lp, &opts).unwrap();
            assert!((r.objective - E_INV).abs() < 1e-12, "{pricing:?}");
            assert!(r.dual_objective(&lp) <= r.objective + 1e-8);
        }
    }

    #[test]
    fn unbounded_ray() {
        // min -x1 s.t. x1 - x2 = 0
        let lp = LinearProgram::from_dense(vec![-1.0, 0.0], &[vec![1.0, -1.0]], vec![0.0]).unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
        let d = r.ray.unwrap();
        assert!(d[0] > 0.0 && (d[0] - d[1]).abs() < 1e-12);
    }

    #[test]
    fn infinite_costs_are_eliminated() {
        let lp = LinearProgram::from_dense(
            vec![f64::INFINITY, 2.0],
            &[vec![1.0, 1.0]],
            vec![1.0],
        )
        .unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.primal, vec![0.0, 1.0]);
        assert_eq!(r.stats.eliminated_columns, 1);

        let lp = LinearProgram::from_dense(vec![f64::INFINITY, 2.0], &[vec![1.0, 0.0]], vec![1.0])
            .unwrap();
        let r = solve(&lp).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let rows = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 0.0, 0.0]];
        let lp = LinearProgram::from_dense(vec![3.0, 1.0, 2.0], &rows, vec![1.0, 2.0, 0.25]).unwrap();
        let r = solve(&lp).unwrap();
        assert!((r.objective - (0.75 + 0.75)).abs() < 1e-12);
    }
}
