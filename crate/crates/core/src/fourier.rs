//! Fourier analysis on the discrete torus `(h Z / L Z)^d`, `h = L / M`.
//!
//! Normalization:
//!
//! * grid functions: `f^(k) = h^d sum_x f(x) exp(-i k.x)` and
//!   `f(x) = L^-d sum_k f^(k) exp(i k.x)`;
//! * measures: `Q^(k) = sum_x Q({x}) exp(-i k.x)` (no quadrature weight);
//! * frequencies `k = 2 pi n / L`, `n` in `[0, M)^d`.
//!
//! With this pair the quadratic identity reads
//! `sum_{x,y} l(x - y) Q(x) Q(y) = L^-d sum_k l^(k) |Q^(k)|^2`,
//! i.e. the continuum constant `(2 pi)^-d` becomes exactly `L^-d`. The
//! identities here are exact finite sums, not limits.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::cost::{CostError, CostFunction};
use crate::definetti::Mixture;
use crate::measure::{minimum_image, DiscreteMeasure, SupportGrid};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("grid is not a uniform periodic lattice: {0}")]
    NotUniform(String),
    #[error("point {0:?} is not a lattice point of the torus")]
    OffLattice(Vec<f64>),
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error("torus with {0} points is too large")]
    TooLarge(usize),
    #[error("cost: {0}")]
    Cost(String),
}

impl From<CostError> for FourierError {
    fn from(e: CostError) -> Self {
        FourierError::Cost(e.to_string())
    }
}

const MAX_TORUS_POINTS: usize = 1 << 22;

/// A uniform lattice with `M` points per axis and period `L` on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    dimension: usize,
    per_axis: usize,
    period: f64,
}

impl TorusGrid {
    pub fn new(dimension: usize, per_axis: usize, period: f64) -> Result<Self, FourierError> {
        if dimension == 0 || per_axis == 0 || !(period > 0.0 && period.is_finite()) {
            return Err(FourierError::NotUniform(format!(
                "d = {dimension}, M = {per_axis}, L = {period}"
            )));
        }
        let len = u32::try_from(dimension)
            .ok()
            .and_then(|d| per_axis.checked_pow(d))
            .filter(|&n| n <= MAX_TORUS_POINTS)
            .ok_or(FourierError::TooLarge(per_axis))?;
        let _ = len;
        Ok(Self {
            dimension,
            per_axis,
            period,
        })
    }

    /// Recognizes a periodic [`SupportGrid`] whose points are exactly the full
    /// lattice `{0, h, ..., (M-1) h}^d` in lexicographic order.
    pub fn from_support_grid(grid: &SupportGrid) -> Result<Self, FourierError> {
        let period = grid
            .period()
            .ok_or_else(|| FourierError::NotUniform("grid is not periodic".into()))?;
        let l = period[0];
        if period.iter().any(|&p| p != l) {
            return Err(FourierError::NotUniform("unequal periods".into()));
        }
        let d = grid.dimension();
        let per_axis = (grid.len() as f64).powf(1.0 / d as f64).round() as usize;
        let torus = Self::new(d, per_axis, l)?;
        if torus.len() != grid.len() {
            return Err(FourierError::NotUniform(format!(
                "{} points is not a full {d}-dimensional lattice",
                grid.len()
            )));
        }
        let h = torus.spacing();
        for (idx, p) in grid.points().iter().enumerate() {
            let coords = torus.coordinates(idx);
            if p.iter().zip(&coords).any(|(a, b)| (a - b).abs() > 1e-9 * h) {
                return Err(FourierError::NotUniform(format!("point {idx} is off the lattice")));
            }
        }
        Ok(torus)
    }

    /// A 1-d torus containing every point of `grid` as a lattice point, with
    /// spacing equal to the smallest coordinate gap and at least `min_points`
    /// lattice points (rounded up to a power of two).
    pub fn enclosing(grid: &SupportGrid, min_points: usize) -> Result<Self, FourierError> {
        let d = grid.dimension();
        let mut coords: Vec<f64> = grid.points().iter().flatten().copied().collect();
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let h = coords
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|g| *g > 1e-12)
            .fold(f64::INFINITY, f64::min);
        let h = if h.is_finite() { h } else { 1.0 };
        let extent = coords.last().unwrap_or(&0.0) - coords.first().unwrap_or(&0.0);
        let needed = ((2.0 * extent / h).ceil() as usize + 1).max(min_points);
        let mut per_axis = needed.next_power_of_two();
        while per_axis.pow(d as u32) > MAX_TORUS_POINTS && per_axis > 2 {
            per_axis /= 2;
        }
        Self::new(d, per_axis, per_axis as f64 * h)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^d`.
    pub fn quadrature_weight(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dimension as i32)
    }

    /// Lattice multi-index of a linear index (first axis most significant).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dimension];
        for slot in out.iter_mut().rev() {
            *slot = idx % self.per_axis;
            idx /= self.per_axis;
        }
        out
    }

    pub fn coordinates(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(idx).iter().map(|&n| n as f64 * h).collect()
    }

    /// Angular frequency of spectral index `idx`, with each component mapped
    /// to the signed range `[-M/2, M/2)`.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        let m = self.per_axis as i64;
        self.multi_index(idx)
            .iter()
            .map(|&n| {
                let n = n as i64;
                let signed = if n >= (m + 1) / 2 { n - m } else { n };
                2.0 * std::f64::consts::PI * signed as f64 / self.period
            })
            .collect()
    }

    pub fn support_grid(&self) -> SupportGrid {
        let points = (0..self.len()).map(|i| self.coordinates(i)).collect();
        SupportGrid::periodic(points, vec![self.period; self.dimension])
            .expect("lattice points are distinct and inside the cell")
    }

    /// Linear lattice index of a point, after reduction modulo `L`.
    pub fn lattice_index(&self, point: &[f64]) -> Result<usize, FourierError> {
        if point.len() != self.dimension {
            return Err(FourierError::OffLattice(point.to_vec()));
        }
        let h = self.spacing();
        let mut idx = 0usize;
        for &x in point {
            let r = x.rem_euclid(self.period) / h;
            let n = r.round();
            if (r - n).abs() > 1e-9 {
                return Err(FourierError::OffLattice(point.to_vec()));
            }
            idx = idx * self.per_axis + (n as usize % self.per_axis);
        }
        Ok(idx)
    }

    /// Lattice weights of a measure whose support points lie on the torus.
    pub fn embed(&self, mu: &DiscreteMeasure) -> Result<Vec<f64>, FourierError> {
        let mut out = vec![0.0; self.len()];
        for (p, &w) in mu.grid().points().iter().zip(mu.weights()) {
            out[self.lattice_index(p)?] += w;
        }
        Ok(out)
    }

    /// `l` at the minimum-image displacement of every lattice point.
    pub fn sample_cost(&self, cost: &CostFunction) -> Result<Vec<f64>, FourierError> {
        (0..self.len())
            .map(|idx| {
                let z: Vec<f64> = self
                    .coordinates(idx)
                    .iter()
                    .map(|&x| minimum_image(x, self.period))
                    .collect();
                let v = cost.eval(&z);
                if v.is_nan() {
                    Err(FourierError::Cost(format!("no cost value at {z:?}")))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Lattice index of `a - b`.
    fn difference(&self, a: usize, b: usize) -> usize {
        let (ia, ib) = (self.multi_index(a), self.multi_index(b));
        ia.iter().zip(&ib).fold(0, |acc, (&x, &y)| {
            acc * self.per_axis + (x + self.per_axis - y) % self.per_axis
        })
    }
}

/// Complex coefficients indexed like the lattice.
#[derive(Clone, Debug)]
pub struct TorusSpectrum {
    torus: TorusGrid,
    values: Vec<Complex64>,
}

impl TorusSpectrum {
    pub fn torus(&self) -> &TorusGrid {
        &self.torus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Rows of `index, frequency components..., real, imaginary`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string()];
        header.extend((0..self.torus.dimension).map(|a| format!("k{a}")));
        header.push("real".into());
        header.push("imag".into());
        w.write_record(&header)?;
        for (idx, c) in self.values.iter().enumerate() {
            let mut row = vec![idx.to_string()];
            row.extend(self.torus.frequency(idx).iter().map(|k| k.to_string()));
            row.push(c.re.to_string());
            row.push(c.im.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fft_nd(torus: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let m = torus.per_axis;
    let d = torus.dimension;
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + offset + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[base + offset + t * stride] = *v;
                }
            }
        }
    }
}

/// Forward transform of a grid function, with quadrature weight `h^d`.
pub fn dft(torus: &TorusGrid, f: &[f64]) -> TorusSpectrum {
    assert_eq!(f.len(), torus.len(), "sample count must match the torus");
    let mut data: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(torus, &mut data, false);
    let w = torus.quadrature_weight();
    for v in &mut data {
        *v *= w;
    }
    TorusSpectrum {
        torus: torus.clone(),
        values: data,
    }
}

/// Inverse of [`dft`].
pub fn inverse_dft(spectrum: &TorusSpectrum) -> Vec<Complex64> {
    let mut data = spectrum.values.clone();
    fft_nd(&spectrum.torus, &mut data, true);
    let scale = 1.0 / spectrum.torus.volume();
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// `Q^(k) = sum_x q(x) exp(-i k.x)` for lattice weights `q`.
pub fn measure_transform(torus: &TorusGrid, q: &[f64]) -> Vec<Complex64> {
    assert_eq!(q.len(), torus.len(), "weight count must match the torus");
    let mut data: Vec<Complex64> = q.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(torus, &mut data, false);
    data
}

/// Both sides of a Plancherel identity.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PlancherelCheck {
    /// Direct double sum over lattice points.
    pub lhs: f64,
    /// `L^-d sum_k l^(k) Q^(k) conj(Q~^(k))`, real part.
    pub rhs: f64,
    /// Imaginary part of the spectral sum; zero up to rounding.
    pub rhs_imag: f64,
    pub abs_error: f64,
}

impl PlancherelCheck {
    pub fn relative_error(&self) -> f64 {
        self.abs_error / self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

fn check_len(torus: &TorusGrid, v: &[f64]) -> Result<(), FourierError> {
    if v.len() != torus.len() {
        return Err(FourierError::Length {
            expected: torus.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `sum_{x,y} l(x - y) a(x) b(y)` by direct summation over lattice indices.
pub fn direct_bilinear(torus: &TorusGrid, kernel: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = torus.len();
    let mut total = 0.0;
    for x in 0..n {
        if a[x] == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for y in 0..n {
            if b[y] != 0.0 {
                inner += kernel[torus.difference(x, y)] * b[y];
            }
        }
        total += a[x] * inner;
    }
    total
}

/// Bilinear identity for a sampled kernel and two lattice weight vectors.
pub fn plancherel_bilinear_sampled(
    torus: &TorusGrid,
    kernel: &[f64],
    q: &[f64],
    q_tilde: &[f64],
) -> Result<PlancherelCheck, FourierError> {
    check_len(torus, kernel)?;
    check_len(torus, q)?;
    check_len(torus, q_tilde)?;
    let lhs = direct_bilinear(torus, kernel, q, q_tilde);
    let l_hat = dft(torus, kernel);
    let qh = measure_transform(torus, q);
    let qth = measure_transform(torus, q_tilde);
    let sum: Complex64 = l_hat
        .values
        .iter()
        .zip(&qh)
        .zip(&qth)
        .map(|((l, a), b)| l * a.conj() * b)
        .sum();
    let rhs = sum / torus.volume();
    Ok(PlancherelCheck {
        lhs,
        rhs: rhs.re,
        rhs_imag: rhs.im,
        abs_error: (lhs - rhs.re).abs(),
    })
}

pub fn plancherel_quadratic_sampled(
    torus: &TorusGrid,
    kernel: &[f64],
    q: &[f64],
) -> Result<PlancherelCheck, FourierError> {
    plancherel_bilinear_sampled(torus, kernel, q, q)
}

/// `sum l(x - y) dQ dQ` both ways, for a cost sampled on the torus.
pub fn plancherel_quadratic(
    torus: &TorusGrid,
    cost: &CostFunction,
    q: &DiscreteMeasure,
) -> Result<PlancherelCheck, FourierError> {
    let kernel = torus.sample_cost(cost)?;
    plancherel_quadratic_sampled(torus, &kernel, &torus.embed(q)?)
}

pub fn plancherel_bilinear(
    torus: &TorusGrid,
    cost: &CostFunction,
    q: &DiscreteMeasure,
    q_tilde: &DiscreteMeasure,
) -> Result<PlancherelCheck, FourierError> {
    let kernel = torus.sample_cost(cost)?;
    plancherel_bilinear_sampled(torus, &kernel, &torus.embed(q)?, &torus.embed(q_tilde)?)
}

/// The infinite-body cost of a mixture split into mean field plus spectral
/// variance.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct VarianceDecomposition {
    /// `sum l(x - y) mu(x) mu(y)` with `mu` the mixture barycenter, direct sum.
    pub mean_field: f64,
    /// `L^-d sum_k l^(k) (Var Re Q^(k) + Var Im Q^(k))` under the mixing weights.
    pub variance_term: f64,
    /// `sum_a nu_a sum l(x - y) Q_a(x) Q_a(y)`, direct sum.
    pub c_infinity: f64,
    /// Mean field through `L^-d sum_k l^(k) |sum_a nu_a Q_a^(k)|^2`.
    pub mean_field_spectral: f64,
    /// `|c_infinity - mean_field - variance_term|`.
    pub identity_error: f64,
}

/// Computes every term of the decomposition, each through its own route.
pub fn variance_decomposition_sampled(
    torus: &TorusGrid,
    kernel: &[f64],
    mixture: &Mixture,
) -> Result<VarianceDecomposition, FourierError> {
    check_len(torus, kernel)?;
    let comps: Vec<Vec<f64>> = mixture
        .components()
        .iter()
        .map(|q| torus.embed(q))
        .collect::<Result<_, _>>()?;
    let nu = mixture.weights();
    let n = torus.len();
    let mut bary = vec![0.0; n];
    for (q, &w) in comps.iter().zip(nu) {
        for (b, &x) in bary.iter_mut().zip(q) {
            *b += w * x;
        }
    }
    let mean_field = direct_bilinear(torus, kernel, &bary, &bary);
    let c_infinity: f64 = comps
        .iter()
        .zip(nu)
        .map(|(q, &w)| w * direct_bilinear(torus, kernel, q, q))
        .sum();

    let l_hat: Vec<f64> = dft(torus, kernel).values.iter().map(|c| c.re).collect();
    let transforms: Vec<Vec<Complex64>> = comps.iter().map(|q| measure_transform(torus, q)).collect();
    let mut variance_sum = 0.0;
    let mut mean_sum = 0.0;
    for k in 0..n {
        let (mut m_re, mut m_im) = (0.0, 0.0);
        for (t, &w) in transforms.iter().zip(nu) {
            let z = t[k];
            m_re += w * z.re;
            m_im += w * z.im;
        }
        // two-pass variance keeps cancellation small
        let (mut v_re, mut v_im) = (0.0, 0.0);
        for (t, &w) in transforms.iter().zip(nu) {
            let z = t[k];
            v_re += w * (z.re - m_re) * (z.re - m_re);
            v_im += w * (z.im - m_im) * (z.im - m_im);
        }
        variance_sum += l_hat[k] * (v_re + v_im);
        mean_sum += l_hat[k] * (m_re * m_re + m_im * m_im);
    }
    let variance_term = variance_sum / torus.volume();
    let mean_field_spectral = mean_sum / torus.volume();
    Ok(VarianceDecomposition {
        mean_field,
        variance_term,
        c_infinity,
        mean_field_spectral,
        identity_error: (c_infinity - mean_field - variance_term).abs(),
    })
}

pub fn variance_decomposition(
    torus: &TorusGrid,
    cost: &CostFunction,
    mixture: &Mixture,
) -> Result<VarianceDecomposition, FourierError> {
    let kernel = torus.sample_cost(cost)?;
    variance_decomposition_sampled(torus, &kernel, mixture)
}

/// How close a vanishing variance term forces the mixture to a single
/// component.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct UniquenessReport {
    pub variance_term: f64,
    pub spectrum_min: f64,
    /// `max_a tv(Q_a, mu)` over components with positive weight.
    pub max_component_tv: f64,
    /// When the spectrum is strictly positive: a bound on `max_a tv(Q_a, mu)`
    /// implied by the variance term, `sqrt(V L^d / (l^_min nu_a))` maximized
    /// over components.
    pub stability_bound: Option<f64>,
}

/// With `l^ >= l^_min > 0`, `V >= l^_min M^d / L^d sum_a nu_a |Q_a - mu|_2^2`,
/// and `|.|_1 <= sqrt(M^d) |.|_2` on the lattice.
pub fn uniqueness_check(
    torus: &TorusGrid,
    kernel: &[f64],
    mixture: &Mixture,
) -> Result<UniquenessReport, FourierError> {
    let dec = variance_decomposition_sampled(torus, kernel, mixture)?;
    let spectrum_min = dft(torus, kernel)
        .values
        .iter()
        .map(|c| c.re)
        .fold(f64::INFINITY, f64::min);
    let mu = mixture.barycenter();
    let mut max_tv: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for (q, &w) in mixture.components().iter().zip(mixture.weights()) {
        if w > 0.0 {
            let tv = q.tv_distance(&mu).map_err(|e| FourierError::Cost(e.to_string()))?;
            max_tv = max_tv.max(tv);
            bound = bound.max((dec.variance_term.max(0.0) * torus.volume() / (spectrum_min * w)).sqrt());
        }
    }
    Ok(UniquenessReport {
        variance_term: dec.variance_term,
        spectrum_min,
        max_component_tv: max_tv,
        stability_bound: (spectrum_min > 0.0).then_some(bound),
    })
}

/// Random search for a mixture with a negative variance term. Candidates are
/// two-component mixtures of random lattice measures with few atoms; the most
/// negative one found is returned.
pub fn find_negative_variance<R: Rng>(
    torus: &TorusGrid,
    kernel: &[f64],
    rng: &mut R,
    tries: usize,
) -> Result<Option<(Mixture, f64)>, FourierError> {
    let grid = Arc::new(torus.support_grid());
    let n = torus.len();
    let mut best: Option<(Mixture, f64)> = None;
    for _ in 0..tries {
        let mut comps = Vec::new();
        for _ in 0..2 {
            let atoms = rng.random_range(1..=3usize);
            let mut w = vec![0.0; n];
            for _ in 0..atoms {
                w[rng.random_range(0..n)] += rng.random_range(0.1..1.0);
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            comps.push(
                DiscreteMeasure::new(grid.clone(), w).map_err(|e| FourierError::Cost(e.to_string()))?,
            );
        }
        let a: f64 = rng.random_range(0.1..0.9);
        let mix = Mixture::new(comps, vec![a, 1.0 - a]).map_err(|e| FourierError::Cost(e.to_string()))?;
        let v = variance_decomposition_sampled(torus, kernel, &mix)?.variance_term;
        if v < best.as_ref().map_or(0.0, |b| b.1) {
            best = Some((mix, v));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus() -> TorusGrid {
        TorusGrid::new(1, 16, 8.0).unwrap()
    }

    #[test]
    fn delta_and_constant_spectra() {
        let t = torus();
        let mut delta = vec![0.0; 16];
        delta[0] = 1.0;
        let s = dft(&t, &delta);
        for c in s.values() {
            assert!((c - Complex64::new(t.quadrature_weight(), 0.0)).norm() < 1e-15);
        }
        let s = dft(&t, &[3.0; 16]);
        assert!((s.values()[0].re - 3.0 * 8.0).abs() < 1e-12);
        assert!(s.values()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn round_trip_and_even_real() {
        let t = TorusGrid::new(2, 8, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..t.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let back = inverse_dft(&dft(&t, &f));
        let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b.re).abs() <= 1e-12 * scale && b.im.abs() <= 1e-12 * scale);
        }
        // even function: f(x) = f(-x)
        let even: Vec<f64> = (0..t.len())
            .map(|i| {
                let j = t.difference(0, i);
                f[i] + f[j]
            })
            .collect();
        let s = dft(&t, &even);
        assert!(s.values().iter().all(|c| c.im.abs() < 1e-12));
    }

    #[test]
    fn plancherel_examples() {
        let t = torus();
        let g = Arc::new(t.support_grid());
        let cost = CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let delta0 = DiscreteMeasure::dirac(g.clone(), 0);
        let p = plancherel_quadratic(&t, &cost, &delta0).unwrap();
        assert!((p.lhs - 1.0).abs() < 1e-15 && (p.rhs - 1.0).abs() < 1e-12);

        let uniform = DiscreteMeasure::uniform(g.clone());
        let kernel = t.sample_cost(&cost).unwrap();
        let mean: f64 = kernel.iter().sum::<f64>() / 16.0;
        let p = plancherel_quadratic(&t, &cost, &uniform).unwrap();
        assert!((p.lhs - mean).abs() < 1e-14 && (p.rhs - mean).abs() < 1e-12);

        // Q = delta_0, Q~ = delta_a with a = 1.5 (lattice index 3)
        let delta_a = DiscreteMeasure::dirac(g, 3);
        let p = plancherel_bilinear(&t, &cost, &delta0, &delta_a).unwrap();
        let expected = cost.eval(&[1.5]);
        assert!((p.lhs - expected).abs() < 1e-15 && (p.rhs - expected).abs() < 1e-12);
    }

    #[test]
    fn two_dirac_mixture_decomposition() {
        let t = torus();
        let g = Arc::new(t.support_grid());
        let cost = CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        // points 0 and 1 are lattice indices 0 and 2
        let mix = Mixture::new(
            vec![DiscreteMeasure::dirac(g.clone(), 0), DiscreteMeasure::dirac(g, 2)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let dec = variance_decomposition(&t, &cost, &mix).unwrap();
        let e = (-1.0f64).exp();
        assert!((dec.c_infinity - 1.0).abs() < 1e-15);
        assert!((dec.mean_field - (1.0 + e) / 2.0).abs() < 1e-15);
        assert!((dec.variance_term - (1.0 - e) / 2.0).abs() < 1e-12);
        assert!(dec.identity_error < 1e-12);
    }

    #[test]
    fn off_lattice_points_are_rejected() {
        let t = torus();
        let g = Arc::new(SupportGrid::line(&[0.25]).unwrap());
        assert!(matches!(
            t.embed(&DiscreteMeasure::dirac(g, 0)),
            Err(FourierError::OffLattice(_))
        ));
        let not_periodic = SupportGrid::line(&[0.0, 0.5]).unwrap();
        assert!(TorusGrid::from_support_grid(&not_periodic).is_err());
        assert_eq!(TorusGrid::from_support_grid(&t.support_grid()).unwrap(), t);
    }

    #[test]
    fn spectrum_csv_has_one_row_per_frequency() {
        let t = torus();
        let s = dft(&t, &[1.0; 16]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("index,k0,real,imag"));
    }
}
