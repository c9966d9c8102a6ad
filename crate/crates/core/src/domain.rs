//! Shared domain types: variance profiles, diagonal matrices over C, spectral
//! curves and solver settings.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectral::stieltjes_density;

/// A `d x d` symmetric matrix of nonnegative standard deviations `A[i][j]`.
///
/// Entries are stored row-major together with their squares, which are the
/// weights the covariance map actually uses.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    d: usize,
    entries: Vec<f64>,
    squared: Vec<f64>,
}

impl VarianceProfile {
    /// Builds a profile from rows, rejecting ragged, non-finite, negative or
    /// asymmetric input.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        let mut entries = Vec::with_capacity(d * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(d, entries)
    }

    pub fn from_row_major(d: usize, entries: Vec<f64>) -> Result<Self> {
        validate_square(d, &entries)?;
        for i in 0..d {
            for j in 0..d {
                let value = entries[i * d + j];
                if value < 0.0 {
                    return Err(Error::NegativeEntry { i, j, value });
                }
            }
        }
        let squared = entries.iter().map(|a| a * a).collect();
        Ok(Self {
            d,
            entries,
            squared,
        })
    }

    /// Accepts a real profile of arbitrary sign and keeps `|A[i][j]|`.
    ///
    /// Phases of the entries are absorbed by the circular family, so only the
    /// moduli matter.
    pub fn from_signed(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|row| row.into_iter().map(f64::abs).collect())
            .collect();
        Self::new(rows)
    }

    /// Accepts a selfadjoint complex profile and keeps `|A[i][j]|`.
    pub fn from_complex(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            for (j, value) in row.iter().enumerate() {
                if !value.re.is_finite() || !value.im.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                let deviation = (rows[i][j] - rows[j][i].conj()).norm();
                if deviation > 0.0 {
                    return Err(Error::AsymmetricProfile {
                        i,
                        j,
                        upper: rows[i][j].norm(),
                        lower: rows[j][i].norm(),
                    });
                }
            }
        }
        Self::new(
            rows.into_iter()
                .map(|row| row.into_iter().map(|a| a.norm()).collect())
                .collect(),
        )
    }

    /// Builds a profile from the squared entries `A[i][j]^2`, keeping those
    /// squares bit-exact.
    pub fn from_squared(d: usize, squared: Vec<f64>) -> Result<Self> {
        validate_square(d, &squared)?;
        for i in 0..d {
            for j in 0..d {
                let value = squared[i * d + j];
                if value < 0.0 {
                    return Err(Error::NegativeEntry { i, j, value });
                }
            }
        }
        let entries = squared.iter().map(|s| s.sqrt()).collect();
        Ok(Self {
            d,
            entries,
            squared,
        })
    }

    pub fn from_fn(d: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let entries = (0..d * d).map(|k| f(k / d, k % d)).collect();
        Self::from_row_major(d, entries)
    }

    pub fn ones(d: usize) -> Result<Self> {
        Self::from_fn(d, |_, _| 1.0)
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::from_fn(d, |_, _| 0.0)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::from_fn(d, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn squared(&self, i: usize, j: usize) -> f64 {
        self.squared[i * self.d + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major squared entries.
    pub fn squared_entries(&self) -> &[f64] {
        &self.squared
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// `K_i = sum_j A[i][j]^2` for every row.
    pub fn row_square_sums(&self) -> Vec<f64> {
        self.squared.chunks(self.d).map(|r| r.iter().sum()).collect()
    }

    /// The common row sum of squares, if all rows agree to `rel_tol`.
    pub fn constant_row_square_sum(&self, rel_tol: f64) -> Option<f64> {
        let sums = self.row_square_sums();
        let first = sums[0];
        sums.iter()
            .all(|s| (s - first).abs() <= rel_tol * first.abs().max(f64::MIN_POSITIVE))
            .then_some(first)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_row_major(self.d, self.entries.iter().map(|a| a * c.abs()).collect())
    }

    /// `P A P^T` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(self.d, perm)?;
        let mut entries = vec![0.0; self.d * self.d];
        for i in 0..self.d {
            for j in 0..self.d {
                entries[perm[i] * self.d + perm[j]] = self.get(i, j);
            }
        }
        Self::from_row_major(self.d, entries)
    }
}

fn validate_square(d: usize, values: &[f64]) -> Result<()> {
    if d == 0 {
        return Err(Error::EmptyDimension);
    }
    if values.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: values.len(),
        });
    }
    for i in 0..d {
        for j in 0..d {
            if !values[i * d + j].is_finite() {
                return Err(Error::NonFinite { i, j });
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            let (upper, lower) = (values[i * d + j], values[j * d + i]);
            if upper != lower {
                return Err(Error::AsymmetricProfile { i, j, upper, lower });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_permutation(d: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: perm.len(),
        });
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || std::mem::replace(&mut seen[p], true) {
            return Err(invalid("perm", "not a permutation"));
        }
    }
    Ok(())
}

/// A diagonal matrix in `M_d(C)`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDiagonal(Vec<Complex64>);

impl ComplexDiagonal {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Self(values))
    }

    pub fn filled(d: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; d])
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::filled(d, Complex64::new(1.0, 0.0))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::filled(d, Complex64::new(0.0, 0.0))
    }

    /// `-iI`, the default starting point of the fixed-point iteration.
    pub fn minus_i(d: usize) -> Result<Self> {
        Self::filled(d, Complex64::new(0.0, -1.0))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    /// `(1/d) sum_i D[i]`.
    pub fn normalized_trace(&self) -> Complex64 {
        self.0.iter().sum::<Complex64>() / self.0.len() as f64
    }

    /// `sum_i |D[i]|`, the entrywise 1-norm restricted to the diagonal.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).sum()
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Entrywise product; the matrix product of two diagonals.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Every entry lies strictly in the lower half-plane.
    pub fn is_lower_half_plane(&self) -> bool {
        self.0.iter().all(|v| v.im < 0.0)
    }

    /// Applies the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(self.dim(), perm)?;
        let mut values = self.0.clone();
        for (i, &p) in perm.iter().enumerate() {
            values[p] = self.0[i];
        }
        Ok(Self(values))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ComplexDiagonal {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Scalar Cauchy transform values on the line `Im z = epsilon` and the
/// density obtained by Stieltjes inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    epsilon: f64,
    xs: Vec<f64>,
    g_values: Vec<Complex64>,
    density: Vec<f64>,
}

impl SpectralCurve {
    pub fn new(epsilon: f64, xs: Vec<f64>, g_values: Vec<Complex64>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        check_increasing(&xs)?;
        if xs.len() != g_values.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                actual: g_values.len(),
            });
        }
        let density = stieltjes_density(&g_values)?;
        Ok(Self {
            epsilon,
            xs,
            g_values,
            density,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn g_values(&self) -> &[Complex64] {
        &self.g_values
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

pub(crate) fn check_increasing(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid("xs", "grid is empty"));
    }
    for (index, x) in xs.iter().enumerate() {
        if !x.is_finite() || (index > 0 && *x <= xs[index - 1]) {
            return Err(Error::GridNotIncreasing { index });
        }
    }
    Ok(())
}

/// `x_min, x_min + step, ...` up to `x_max` (inclusive when it lies on the
/// lattice up to rounding).
pub fn uniform_grid(x_min: f64, x_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", format!("must be positive, got {step}")));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(invalid("x_min", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
    }
    let n = ((x_max - x_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| x_min + k as f64 * step).collect())
}

/// Convergence controls for the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Threshold on the successive-difference 1-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Imaginary offset of the evaluation points.
    pub epsilon: f64,
    /// Bound on the fixed-point residual required to declare convergence.
    pub residual_tol: f64,
}

impl SolverSettings {
    pub const DEFAULT_TOL: f64 = 1e-3;
    pub const DEFAULT_MAX_ITER: usize = 10_000;
    pub const DEFAULT_EPSILON: f64 = 1e-3;

    /// Settings with the residual bound defaulting to `10 * tol`.
    pub fn new(tol: f64, max_iter: usize, epsilon: f64) -> Result<Self> {
        let settings = Self {
            tol,
            max_iter,
            epsilon,
            residual_tol: 10.0 * tol,
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn with_residual_tol(mut self, residual_tol: f64) -> Result<Self> {
        self.residual_tol = residual_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.residual_tol > 0.0) {
            return Err(invalid(
                "residual_tol",
                format!("must be positive, got {}", self.residual_tol),
            ));
        }
        Ok(())
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            epsilon: Self::DEFAULT_EPSILON,
            residual_tol: 10.0 * Self::DEFAULT_TOL,
        }
    }
}
