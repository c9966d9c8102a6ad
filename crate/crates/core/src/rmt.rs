//! Finite block-Gaussian approximations of `A ∘ X` and their spectra.
//!
//! `X` is a `dN x dN` Hermitian matrix whose `N x N` blocks have i.i.d.
//! entries of variance `1/N`: diagonal entries real `N(0, 1/N)`, the rest
//! complex with independent real and imaginary parts of variance `1/(2N)`.
//! Block `(i, j)` of the mixture is `A[i][j] X^(i,j)`.

use faer::{c64, Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::VarianceProfile;
use crate::error::{invalid, Error, Result};
use crate::rng::{ordered_chunks, stream, Domain};
use crate::sampler::ProfileSource;
use crate::spectral::EmpiricalDistribution;

/// Bound on the estimated floating-point work of one simulation call.
pub const WORK_LIMIT: f64 = 1e11;

/// Relative tolerance of the Hermitian check in [`eigenvalues`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Shape of the block matrix: a `d x d` grid of `block_n x block_n` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMatrixSpec {
    pub d: usize,
    pub block_n: usize,
}

impl BlockMatrixSpec {
    pub fn new(d: usize, block_n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        if block_n == 0 {
            return Err(invalid("block_N", "must be positive"));
        }
        Ok(Self { d, block_n })
    }

    /// Total size `d * N`.
    pub fn size(&self) -> usize {
        self.d * self.block_n
    }
}

pub(crate) fn check_work(required: f64) -> Result<()> {
    if required > WORK_LIMIT {
        return Err(Error::WorkGuard {
            required,
            limit: WORK_LIMIT,
        });
    }
    Ok(())
}

fn check_profile(profile: &VarianceProfile, spec: &BlockMatrixSpec) -> Result<()> {
    if profile.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            actual: profile.dim(),
        });
    }
    Ok(())
}

/// Adds `scale * (A ∘ X)` to `dst` for a fresh `X` drawn from `rng`.
///
/// Lower-triangle entries are drawn in a fixed order (zero profile entries
/// included) and mirrored, so `dst` stays exactly Hermitian.
pub(crate) fn accumulate_mixture<R: Rng>(
    dst: &mut Mat<c64>,
    profile: &VarianceProfile,
    n: usize,
    scale: f64,
    rng: &mut R,
) {
    let d = profile.dim();
    let real_sd = (1.0 / n as f64).sqrt();
    let part_sd = (0.5 / n as f64).sqrt();
    for bi in 0..d {
        for bj in 0..=bi {
            let w = scale * profile.get(bi, bj);
            for r in 0..n {
                let cols = if bi == bj { r + 1 } else { n };
                for s in 0..cols {
                    let (row, col) = (bi * n + r, bj * n + s);
                    if row == col {
                        let x: f64 = rng.sample(StandardNormal);
                        dst[(row, col)].re += w * real_sd * x;
                    } else {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        let v = c64::new(w * part_sd * re, w * part_sd * im);
                        dst[(row, col)] += v;
                        dst[(col, row)] += v.conj();
                    }
                }
            }
        }
    }
}

/// One draw of `A ∘ X`, determined by `(seed, index)`.
pub fn sample_mixture_matrix(
    profile: &VarianceProfile,
    spec: &BlockMatrixSpec,
    seed: u64,
    index: u64,
) -> Result<Mat<c64>> {
    check_profile(profile, spec)?;
    let size = spec.size();
    let mut m = Mat::<c64>::zeros(size, size);
    let mut rng = stream(seed, Domain::Matrix, index);
    accumulate_mixture(&mut m, profile, spec.block_n, 1.0, &mut rng);
    Ok(m)
}

/// `max |M - M^*|` over all entries.
pub fn hermitian_deviation(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn max_modulus(m: &Mat<c64>) -> f64 {
    let mut max: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            max = max.max(m[(i, j)].norm());
        }
    }
    max
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::EmptyDimension);
    }
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOLERANCE * max_modulus(m).max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    let mut values = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Pooled eigenvalues of `n_matrices` independent draws; draw `k` uses
/// profile stream `k` and matrix stream `k`.
pub fn ensemble_spectrum<S: ProfileSource>(
    sampler: &S,
    spec: &BlockMatrixSpec,
    n_matrices: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    if sampler.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            actual: sampler.dim(),
        });
    }
    if n_matrices == 0 {
        return Err(invalid("n_matrices", "must be positive"));
    }
    check_work(n_matrices as f64 * (spec.size() as f64).powi(3))?;
    let parts = ordered_chunks(n_matrices, |range| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(range.len() * spec.size());
        for k in range {
            let profile = sampler.sample(seed, k as u64)?;
            let m = sample_mixture_matrix(&profile, spec, seed, k as u64)?;
            out.extend(eigenvalues(&m)?);
        }
        Ok(out)
    });
    let mut pooled = Vec::with_capacity(n_matrices * spec.size());
    for p in parts {
        pooled.extend(p?);
    }
    EmpiricalDistribution::new(pooled)
}
