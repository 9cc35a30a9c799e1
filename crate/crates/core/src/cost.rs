//! Translation-invariant symmetric pair costs `c(x, y) = l(x - y)`.
//!
//! Costs take values in `[0, +inf]`. In every weighted sum a zero weight
//! annihilates an infinite cost (`0 * inf = 0`), so Coulomb costs can be
//! integrated against measures that put no mass on the diagonal.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::fourier::{dft, FourierError, TorusGrid, TorusSpectrum};
use crate::measure::multiset::binomial_f64;
use crate::measure::{NBodyMeasure, NBodyWeights, PairMeasure, SupportGrid};

/// Spectral sign tolerance, relative to the largest coefficient magnitude.
pub const TAU_SPEC: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("invalid cost parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse cost spec `{0}`")]
    BadSpec(String),
    #[error("tabulated cost has no value for displacement {0:?}")]
    MissingTableEntry(Vec<f64>),
    #[error("cost is infinite at the origin; no grid spectrum exists")]
    Singular,
    #[error("dimension mismatch: cost table is {table}-dimensional, grid is {grid}-dimensional")]
    Dimension { table: usize, grid: usize },
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error("reading cost table {path}: {source}")]
    Io {
        path: String,
        source: csv::Error,
    },
}

/// A cost given by values on a finite set of displacements. Lookups try
/// `z` and then `-z`, with an absolute coordinate tolerance of `1e-9`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    dimension: usize,
    entries: Vec<(Vec<f64>, f64)>,
}

impl CostTable {
    pub fn new(entries: Vec<(Vec<f64>, f64)>) -> Result<Self, CostError> {
        let dimension = entries
            .first()
            .map(|e| e.0.len())
            .ok_or_else(|| CostError::InvalidParameter("empty cost table".into()))?;
        for (z, v) in &entries {
            if z.len() != dimension || z.iter().any(|x| !x.is_finite()) {
                return Err(CostError::InvalidParameter(format!("bad displacement {z:?}")));
            }
            if v.is_nan() || *v < 0.0 {
                return Err(CostError::InvalidParameter(format!(
                    "cost value {v} at {z:?} must lie in [0, inf]"
                )));
            }
        }
        Ok(Self { dimension, entries })
    }

    /// Rows of `dz_1, ..., dz_d, value`; `inf` is accepted as a value.
    pub fn from_csv(path: &Path) -> Result<Self, CostError> {
        let io = |source| CostError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(io)?;
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(io)?;
            let nums: Vec<f64> = record
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CostError::InvalidParameter(format!("{}: {e}", path.display())))?;
            if nums.len() < 2 {
                return Err(CostError::InvalidParameter(format!(
                    "{}: rows need a displacement and a value",
                    path.display()
                )));
            }
            let (z, v) = nums.split_at(nums.len() - 1);
            entries.push((z.to_vec(), v[0]));
        }
        Self::new(entries)
    }

    fn lookup(&self, z: &[f64]) -> Option<f64> {
        let close = |a: &[f64], sign: f64| {
            a.iter()
                .zip(z)
                .all(|(x, y)| (x - sign * y).abs() <= 1e-9)
        };
        self.entries
            .iter()
            .find(|(d, _)| close(d, 1.0))
            .or_else(|| self.entries.iter().find(|(d, _)| close(d, -1.0)))
            .map(|e| e.1)
    }
}

/// The built-in cost families.
#[derive(Clone, Debug, PartialEq)]
pub enum CostKind {
    /// `1/|z|`.
    Coulomb,
    /// `1/max(|z|, eps)`.
    CoulombRegularized { eps: f64 },
    /// `1/|z|` off the origin, `kappa / h` at the origin: the cell-averaged
    /// self-interaction of a cell of diameter `h`.
    CoulombCell { cell_diameter: f64, kappa: f64 },
    /// `exp(-|z|^2 / (2 s^2))`.
    Gaussian { s: f64 },
    /// `exp(-|z|^2 / (2 sigma^2)) - exp(-sigma^2 |z|^2 / 2)`, `sigma > 1`.
    TruncatedQuadratic { sigma: f64 },
    /// `|z|^2`.
    Quadratic,
    Constant { value: f64 },
    Tabulated(CostTable),
}

/// A symmetric pair cost with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct CostFunction {
    kind: CostKind,
}

fn positive(name: &str, v: f64) -> Result<f64, CostError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CostError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl CostFunction {
    pub fn coulomb() -> Self {
        Self {
            kind: CostKind::Coulomb,
        }
    }

    pub fn coulomb_regularized(eps: f64) -> Result<Self, CostError> {
        Ok(Self {
            kind: CostKind::CoulombRegularized {
                eps: positive("eps", eps)?,
            },
        })
    }

    pub fn coulomb_cell(cell_diameter: f64, kappa: f64) -> Result<Self, CostError> {
        Ok(Self {
            kind: CostKind::CoulombCell {
                cell_diameter: positive("h", cell_diameter)?,
                kappa: positive("kappa", kappa)?,
            },
        })
    }

    pub fn gaussian(s: f64) -> Result<Self, CostError> {
        Ok(Self {
            kind: CostKind::Gaussian {
                s: positive("s", s)?,
            },
        })
    }

    pub fn truncated_quadratic(sigma: f64) -> Result<Self, CostError> {
        if !(sigma > 1.0 && sigma.is_finite()) {
            return Err(CostError::InvalidParameter(format!(
                "sigma must exceed 1, got {sigma}"
            )));
        }
        Ok(Self {
            kind: CostKind::TruncatedQuadratic { sigma },
        })
    }

    pub fn quadratic() -> Self {
        Self {
            kind: CostKind::Quadratic,
        }
    }

    pub fn constant(value: f64) -> Result<Self, CostError> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(CostError::InvalidParameter(format!("constant {value}")));
        }
        Ok(Self {
            kind: CostKind::Constant { value },
        })
    }

    pub fn tabulated(table: CostTable) -> Self {
        Self {
            kind: CostKind::Tabulated(table),
        }
    }

    /// Parses `name` or `name:key=value,key=value`. A tabulated cost is
    /// `tabulated:path=<csv file>`.
    pub fn from_spec(spec: &str) -> Result<Self, CostError> {
        let bad = || CostError::BadSpec(spec.to_string());
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut params = BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(bad)?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |key: &str| -> Result<f64, CostError> {
            params
                .get(key)
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())
        };
        let expect_keys = |keys: &[&str]| -> Result<(), CostError> {
            if params.keys().all(|k| keys.contains(&k.as_str())) && params.len() == keys.len() {
                Ok(())
            } else {
                Err(bad())
            }
        };
        match name.trim() {
            "coulomb" => expect_keys(&[]).map(|_| Self::coulomb()),
            "coulomb_regularized" => {
                expect_keys(&["eps"])?;
                Self::coulomb_regularized(num("eps")?)
            }
            "coulomb_cell" => {
                expect_keys(&["h", "kappa"])?;
                Self::coulomb_cell(num("h")?, num("kappa")?)
            }
            "gaussian" => {
                expect_keys(&["s"])?;
                Self::gaussian(num("s")?)
            }
            "truncated_quadratic" => {
                expect_keys(&["sigma"])?;
                Self::truncated_quadratic(num("sigma")?)
            }
            "quadratic" => expect_keys(&[]).map(|_| Self::quadratic()),
            "constant" => {
                expect_keys(&["value"])?;
                Self::constant(num("value")?)
            }
            "tabulated" => {
                expect_keys(&["path"])?;
                let path = params.get("path").ok_or_else(bad)?;
                Ok(Self::tabulated(CostTable::from_csv(Path::new(path))?))
            }
            _ => Err(bad()),
        }
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            CostKind::Coulomb => "coulomb",
            CostKind::CoulombRegularized { .. } => "coulomb_regularized",
            CostKind::CoulombCell { .. } => "coulomb_cell",
            CostKind::Gaussian { .. } => "gaussian",
            CostKind::TruncatedQuadratic { .. } => "truncated_quadratic",
            CostKind::Quadratic => "quadratic",
            CostKind::Constant { .. } => "constant",
            CostKind::Tabulated(_) => "tabulated",
        }
    }

    pub fn parameters(&self) -> BTreeMap<&'static str, f64> {
        let mut p = BTreeMap::new();
        match &self.kind {
            CostKind::CoulombRegularized { eps } => {
                p.insert("eps", *eps);
            }
            CostKind::CoulombCell {
                cell_diameter,
                kappa,
            } => {
                p.insert("h", *cell_diameter);
                p.insert("kappa", *kappa);
            }
            CostKind::Gaussian { s } => {
                p.insert("s", *s);
            }
            CostKind::TruncatedQuadratic { sigma } => {
                p.insert("sigma", *sigma);
            }
            CostKind::Constant { value } => {
                p.insert("value", *value);
            }
            _ => {}
        }
        p
    }

    /// Whether `l` is bounded on all of `R^d`.
    pub fn bounded(&self) -> bool {
        match &self.kind {
            CostKind::Coulomb | CostKind::CoulombCell { .. } | CostKind::Quadratic => false,
            CostKind::CoulombRegularized { .. }
            | CostKind::Gaussian { .. }
            | CostKind::TruncatedQuadratic { .. }
            | CostKind::Constant { .. } => true,
            CostKind::Tabulated(t) => t.entries.iter().all(|e| e.1.is_finite()),
        }
    }

    pub fn singular_at_zero(&self) -> bool {
        match &self.kind {
            CostKind::Coulomb => true,
            CostKind::Tabulated(t) => t.lookup(&vec![0.0; t.dimension]) == Some(f64::INFINITY),
            _ => false,
        }
    }

    /// Whether the continuum Fourier transform of `l` is known to be
    /// nonnegative. Grid-relative certification is [`classify_positive_definite`].
    pub fn claims_positive_definite(&self) -> bool {
        matches!(
            self.kind,
            CostKind::Coulomb | CostKind::Gaussian { .. } | CostKind::Constant { .. }
        )
    }

    /// `l(z)`. Tabulated costs return `NaN` for displacements missing from
    /// the table; [`CostFunction::matrix`] turns that into an error.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|x| x * x).sum();
        let r = r2.sqrt();
        match &self.kind {
            CostKind::Coulomb => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / r
                }
            }
            CostKind::CoulombRegularized { eps } => 1.0 / r.max(*eps),
            CostKind::CoulombCell {
                cell_diameter,
                kappa,
            } => {
                if r == 0.0 {
                    kappa / cell_diameter
                } else {
                    1.0 / r
                }
            }
            CostKind::Gaussian { s } => (-r2 / (2.0 * s * s)).exp(),
            CostKind::TruncatedQuadratic { sigma } => {
                (-r2 / (2.0 * sigma * sigma)).exp() - (-sigma * sigma * r2 / 2.0).exp()
            }
            CostKind::Quadratic => r2,
            CostKind::Constant { value } => *value,
            CostKind::Tabulated(t) => t.lookup(z).unwrap_or(f64::NAN),
        }
    }

    /// The matrix `c(x_i, x_j)` over a grid, using minimum-image
    /// displacements on periodic grids.
    pub fn matrix(&self, grid: &SupportGrid) -> Result<CostMatrix, CostError> {
        if let CostKind::Tabulated(t) = &self.kind {
            if t.dimension != grid.dimension() {
                return Err(CostError::Dimension {
                    table: t.dimension,
                    grid: grid.dimension(),
                });
            }
        }
        let m = grid.len();
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let z = grid.displacement(i, j);
                let v = self.eval(&z);
                if v.is_nan() {
                    return Err(CostError::MissingTableEntry(z));
                }
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Ok(CostMatrix { points: m, values })
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let params = self.parameters();
        if !params.is_empty() {
            let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", body.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for CostFunction {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_spec(s)
    }
}

/// `c(x_i, x_j)` for all grid pairs, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    points: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.points + j]
    }

    /// Largest finite entry.
    pub fn sup_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    /// Sum of `c` over unordered pairs of a multiset with the given
    /// multiplicities: `sum_i C(n_i, 2) c_ii + sum_{i<j} n_i n_j c_ij`.
    pub fn multiset_pair_sum(&self, counts: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &ci) in counts.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            if ci >= 2 {
                total += binomial_f64(ci, 2) * self.get(i, i);
            }
            for (j, &cj) in counts.iter().enumerate().skip(i + 1) {
                if cj > 0 {
                    total += (ci * cj) as f64 * self.get(i, j);
                }
            }
        }
        total
    }
}

/// `w * v` with `0 * inf = 0`.
#[inline]
pub fn ext_mul(weight: f64, value: f64) -> f64 {
    if weight == 0.0 {
        0.0
    } else {
        weight * value
    }
}

/// `sum_{i,j} c(x_i, x_j) mu2[i][j]`.
pub fn pair_cost_integral(cost: &CostFunction, pair: &PairMeasure) -> Result<f64, CostError> {
    let c = cost.matrix(pair.grid())?;
    Ok(pair_integral_with(&c, pair))
}

pub(crate) fn pair_integral_with(c: &CostMatrix, pair: &PairMeasure) -> f64 {
    let m = pair.points();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += ext_mul(pair.weight(i, j), c.get(i, j));
        }
    }
    total
}

/// `C_N[gamma] = E[sum_{a<b} c(x_a, x_b)]`, evaluated directly on the stored
/// weights (multiset pair counts or tuple enumeration).
pub fn nbody_cost(cost: &CostFunction, gamma: &NBodyMeasure) -> Result<f64, CostError> {
    let c = cost.matrix(gamma.grid())?;
    Ok(nbody_cost_with(&c, gamma))
}

pub(crate) fn nbody_cost_with(c: &CostMatrix, gamma: &NBodyMeasure) -> f64 {
    match gamma.weights() {
        NBodyWeights::Multiset(_) => gamma
            .multiset_entries()
            .into_iter()
            .map(|(counts, w)| ext_mul(w, c.multiset_pair_sum(&counts)))
            .sum(),
        NBodyWeights::Dense(w) => {
            let m = c.points();
            let n = gamma.arity();
            let mut tuple = vec![0usize; n];
            let mut total = 0.0;
            for (idx, &wt) in w.iter().enumerate() {
                if wt == 0.0 {
                    continue;
                }
                let mut rest = idx;
                for slot in (0..n).rev() {
                    tuple[slot] = rest % m;
                    rest /= m;
                }
                let mut s = 0.0;
                for a in 0..n {
                    for b in a + 1..n {
                        s += c.get(tuple[a], tuple[b]);
                    }
                }
                total += ext_mul(wt, s);
            }
            total
        }
    }
}

/// Sign class of a sampled cost's torus spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    StrictlyPositive,
    Positive,
    Indefinite,
}

/// Result of [`classify_positive_definite`]. The verdict is relative to the
/// torus it was computed on.
#[derive(Clone, Debug)]
pub struct SpectralClass {
    pub class: Definiteness,
    pub min_coefficient: f64,
    pub max_coefficient: f64,
    pub spectrum: TorusSpectrum,
}

/// Samples `l` at the minimum-image lattice displacements of the torus,
/// transforms, and classifies by the sign of the smallest real coefficient.
pub fn classify_positive_definite(
    cost: &CostFunction,
    torus: &TorusGrid,
) -> Result<SpectralClass, CostError> {
    let samples = torus.sample_cost(cost)?;
    if samples.iter().any(|v| v.is_infinite()) {
        return Err(CostError::Singular);
    }
    let spectrum = dft(torus, &samples);
    let re: Vec<f64> = spectrum.values().iter().map(|c| c.re).collect();
    let min = re.iter().copied().fold(f64::INFINITY, f64::min);
    let max = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = spectrum
        .values()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = TAU_SPEC * scale;
    let class = if min > tol {
        Definiteness::StrictlyPositive
    } else if min >= -tol {
        Definiteness::Positive
    } else {
        Definiteness::Indefinite
    };
    Ok(SpectralClass {
        class,
        min_coefficient: min,
        max_coefficient: max,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DiscreteMeasure;
    use proptest::prelude::*;
    use std::sync::Arc;

    const E_INV: f64 = 0.36787944117144233;

    fn line(xs: &[f64]) -> Arc<SupportGrid> {
        Arc::new(SupportGrid::line(xs).unwrap())
    }

    fn unit_gauss() -> CostFunction {
        CostFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2).unwrap()
    }

    #[test]
    fn pair_integral_examples() {
        let g = line(&[0.0, 1.0]);
        let anti = PairMeasure::new(g.clone(), vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let v = pair_cost_integral(&unit_gauss(), &anti).unwrap();
        assert!((v - E_INV).abs() < 1e-15);

        let diag = PairMeasure::new(g.clone(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pair_cost_integral(&CostFunction::coulomb(), &diag).unwrap(), f64::INFINITY);
        // zero mass on the diagonal: Coulomb stays finite
        assert!((pair_cost_integral(&CostFunction::coulomb(), &anti).unwrap() - 1.0).abs() < 1e-15);

        let mu = DiscreteMeasure::new(g, vec![0.3, 0.7]).unwrap();
        let tq = CostFunction::truncated_quadratic(2.0).unwrap();
        assert_eq!(pair_cost_integral(&tq, &PairMeasure::diagonal(&mu)).unwrap(), 0.0);
    }

    #[test]
    fn nbody_cost_examples() {
        // equilateral triangle with unit sides
        let g = Arc::new(
            SupportGrid::new(vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 3f64.sqrt() / 2.0],
            ])
            .unwrap(),
        );
        let abc = NBodyMeasure::from_multiset_entries(g, 3, [(vec![1, 1, 1], 1.0)]).unwrap();
        assert!((nbody_cost(&CostFunction::coulomb(), &abc).unwrap() - 3.0).abs() < 1e-12);

        let g = line(&[0.0, 1.0]);
        let mu = DiscreteMeasure::uniform(g.clone());
        let p2 = NBodyMeasure::product(&mu, 2).unwrap();
        // four tuples: (0,0), (0,1), (1,0), (1,1)
        let brute = 0.25 * 1.0 + 0.25 * E_INV + 0.25 * E_INV + 0.25 * 1.0;
        assert!((nbody_cost(&unit_gauss(), &p2).unwrap() - brute).abs() < 1e-15);

        let m001 = NBodyMeasure::from_multiset_entries(g, 3, [(vec![2, 1], 1.0)]).unwrap();
        let v = nbody_cost(&unit_gauss(), &m001).unwrap();
        assert!((v - (1.0 + 2.0 * E_INV)).abs() < 1e-15);
        let dense = nbody_cost(&unit_gauss(), &m001.to_dense().unwrap()).unwrap();
        assert!((dense - v).abs() < 1e-14);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "coulomb",
            "coulomb_regularized:eps=0.25",
            "coulomb_cell:h=1,kappa=1.5",
            "gaussian:s=0.5",
            "truncated_quadratic:sigma=2",
            "quadratic",
            "constant:value=1",
        ] {
            let c = CostFunction::from_spec(s).unwrap();
            assert_eq!(CostFunction::from_spec(&c.to_string()).unwrap(), c);
        }
        assert!(CostFunction::from_spec("gaussian").is_err());
        assert!(CostFunction::from_spec("gaussian:s=1,t=2").is_err());
        assert!(CostFunction::from_spec("truncated_quadratic:sigma=0.5").is_err());
        assert!(CostFunction::from_spec("banana").is_err());
    }

    #[test]
    fn tabulated_lookup_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cost.csv");
        std::fs::write(&path, "# dz,value\n0,inf\n1,0.5\n2,0.25\n").unwrap();
        let c = CostFunction::tabulated(CostTable::from_csv(&path).unwrap());
        assert!(c.singular_at_zero());
        assert!(!c.bounded());
        assert_eq!(c.eval(&[-1.0]), 0.5);
        let g = SupportGrid::line(&[0.0, 1.0, 2.0]).unwrap();
        let mtx = c.matrix(&g).unwrap();
        assert_eq!(mtx.get(2, 0), 0.25);
        let far = SupportGrid::line(&[0.0, 3.0]).unwrap();
        assert!(matches!(c.matrix(&far), Err(CostError::MissingTableEntry(_))));
    }

    #[test]
    fn truncated_quadratic_zero_only_at_origin() {
        let c = CostFunction::truncated_quadratic(2.0).unwrap();
        assert_eq!(c.eval(&[0.0]), 0.0);
        for i in 1..2000 {
            let z = i as f64 * 0.01;
            assert!(c.eval(&[z]) > 0.0, "z = {z}");
        }
    }

    #[test]
    fn classification_examples() {
        let torus = TorusGrid::new(1, 32, 32.0).unwrap();
        let g = classify_positive_definite(&unit_gauss(), &torus).unwrap();
        assert_eq!(g.class, Definiteness::StrictlyPositive);

        let fine = TorusGrid::new(1, 64, 16.0).unwrap();
        let tq = classify_positive_definite(&CostFunction::truncated_quadratic(2.0).unwrap(), &fine)
            .unwrap();
        assert_eq!(tq.class, Definiteness::Indefinite);
        assert!(tq.min_coefficient < 0.0);

        let one = classify_positive_definite(&CostFunction::constant(1.0).unwrap(), &torus).unwrap();
        assert_eq!(one.class, Definiteness::Positive);
        let nonzero = one
            .spectrum
            .values()
            .iter()
            .filter(|c| c.norm() > 1e-9)
            .count();
        assert_eq!(nonzero, 1);

        assert!(matches!(
            classify_positive_definite(&CostFunction::coulomb(), &torus),
            Err(CostError::Singular)
        ));
    }

    proptest! {
        #[test]
        fn costs_are_even_and_nonnegative(x in -20.0f64..20.0, y in -20.0f64..20.0) {
            for c in [
                unit_gauss(),
                CostFunction::coulomb(),
                CostFunction::coulomb_regularized(0.25).unwrap(),
                CostFunction::truncated_quadratic(2.0).unwrap(),
                CostFunction::quadratic(),
            ] {
                let a = c.eval(&[x, y]);
                prop_assert_eq!(a, c.eval(&[-x, -y]));
                prop_assert!(a >= 0.0);
            }
        }
    }
}
