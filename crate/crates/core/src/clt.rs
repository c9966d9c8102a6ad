//! Limits of normalized sums of independent semicircular mixtures.
//!
//! The limit is operator-valued semicircular with covariance
//! `hat_eta(D)[i] = sum_j E[A[i][j]^2] D[j]`. Finite-size checks build the
//! sums from block-Gaussian matrices.

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::domain::{ComplexDiagonal, VarianceProfile};
use crate::error::{invalid, Error, Result};
use crate::moments::{sum_words, MomentEstimate};
use crate::montecarlo::Moments;
use crate::rmt::{accumulate_mixture, check_work, eigenvalues, BlockMatrixSpec};
use crate::rng::{ordered_chunks, stream, Domain};
use crate::sampler::{ProfileSampler, ProfileSource};
use crate::solver::weighted_sums;

/// Symmetric nonnegative matrix of second moments `E[A[i][j]^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCovarianceProfile {
    effective: VarianceProfile,
}

impl MeanCovarianceProfile {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rows.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d),
            });
        }
        Self::from_row_major(d, rows.concat())
    }

    pub fn from_row_major(d: usize, second_moments: Vec<f64>) -> Result<Self> {
        Ok(Self {
            effective: VarianceProfile::from_squared(d, second_moments)?,
        })
    }

    /// Second moments of a deterministic profile, `A[i][j]^2`.
    pub fn from_profile(profile: &VarianceProfile) -> Self {
        Self::from_row_major(profile.dim(), profile.squared_entries().to_vec())
            .expect("squares of a valid profile are valid")
    }

    /// Exact second moments of the sampler's entry laws.
    pub fn from_sampler(sampler: &ProfileSampler) -> Self {
        Self::from_row_major(sampler.dim(), sampler.second_moments())
            .expect("second moments of a valid sampler are valid")
    }

    pub fn dim(&self) -> usize {
        self.effective.dim()
    }

    /// Row-major second moments.
    pub fn second_moments(&self) -> &[f64] {
        self.effective.squared_entries()
    }

    /// The profile `sqrt(E[A^2])`, whose squared entries equal the second
    /// moments bit for bit.
    pub fn effective_profile(&self) -> &VarianceProfile {
        &self.effective
    }
}

/// `hat_eta(D)[i] = sum_j E[A[i][j]^2] D[j]`.
pub fn hat_eta(cov: &MeanCovarianceProfile, diag: &ComplexDiagonal) -> Result<ComplexDiagonal> {
    if cov.dim() != diag.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            actual: diag.dim(),
        });
    }
    let mut out = vec![Complex64::default(); diag.dim()];
    weighted_sums(cov.second_moments(), diag.values(), &mut out);
    ComplexDiagonal::new(out)
}

/// `lim E(S_N^m)`: the sum over NC2(m) of the η-words built from `hat_eta`.
pub fn clt_limit_moment(cov: &MeanCovarianceProfile, m: usize) -> ComplexDiagonal {
    sum_words(m, cov.dim(), cov.second_moments())
}

/// Finite-size check of a normalized sum at one summand count.
#[derive(Debug, Clone, PartialEq)]
pub struct CltMoments {
    pub n_sum: usize,
    /// One estimate of `E[trd E(S^m)]` per requested order.
    pub estimates: Vec<(usize, MomentEstimate)>,
}

/// Estimates `E[trd E(S^m)]` for `S = sum_n A^(n) ∘ X^(n) / sqrt(n_sum)` from
/// `trials` matrices of size `d * matrix_n`.
///
/// Summand `n` of trial `t` uses profile and matrix stream `t * n_sum + n`.
pub fn empirical_clt_moments<S: ProfileSource>(
    sampler: &S,
    n_sum: usize,
    matrix_n: usize,
    orders: &[usize],
    trials: usize,
    seed: u64,
) -> Result<CltMoments> {
    if n_sum == 0 {
        return Err(invalid("N_sum", "must be positive"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let spec = BlockMatrixSpec::new(sampler.dim(), matrix_n)?;
    let size = spec.size() as f64;
    check_work(trials as f64 * (n_sum as f64 * size * size + size.powi(3)))?;
    let scale = 1.0 / (n_sum as f64).sqrt();

    let parts = ordered_chunks(trials, |range| -> Result<Vec<Moments>> {
        let mut acc = vec![Moments::default(); orders.len()];
        for t in range {
            let mut s = Mat::<c64>::zeros(spec.size(), spec.size());
            for n in 0..n_sum {
                let index = (t * n_sum + n) as u64;
                let profile = sampler.sample(seed, index)?;
                let mut rng = stream(seed, Domain::Matrix, index);
                accumulate_mixture(&mut s, &profile, matrix_n, scale, &mut rng);
            }
            let ev = eigenvalues(&s)?;
            for (a, &m) in acc.iter_mut().zip(orders) {
                a.push(ev.iter().map(|v| v.powi(m as i32)).sum::<f64>() / size);
            }
        }
        Ok(acc)
    });
    let mut total = vec![Moments::default(); orders.len()];
    for p in parts {
        for (t, a) in total.iter_mut().zip(&p?) {
            t.merge(a);
        }
    }
    Ok(CltMoments {
        n_sum,
        estimates: orders
            .iter()
            .zip(&total)
            .map(|(&m, t)| (m, MomentEstimate::from_moments(t)))
            .collect(),
    })
}

/// Single-order form of [`empirical_clt_moments`].
pub fn empirical_clt_moment<S: ProfileSource>(
    sampler: &S,
    n_sum: usize,
    matrix_n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    Ok(empirical_clt_moments(sampler, n_sum, matrix_n, &[m], trials, seed)?.estimates[0].1)
}

/// Simulated `E[E(Z1 Z2 B Z2 Z1)]` against `hat_eta(hat_eta(B))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCancellation {
    pub lhs: ComplexDiagonal,
    pub rhs: ComplexDiagonal,
    /// `||lhs - rhs||_1 / ||rhs||_1`, zero when both vanish.
    pub rel_err: f64,
}

/// Trial `t` draws `Z1` from stream `2t` and `Z2` from stream `2t + 1`.
pub fn pair_cancellation_check(
    sampler: &ProfileSampler,
    matrix_n: usize,
    b: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PairCancellation> {
    let d = sampler.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(invalid("B", "entries must be finite"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let spec = BlockMatrixSpec::new(d, matrix_n)?;
    let size = spec.size();
    check_work(trials as f64 * 2.0 * ((size as f64).powi(2) + (size as f64).powi(3)))?;

    let draw = |index: u64| -> Result<Mat<c64>> {
        let profile = sampler.sample(seed, index)?;
        let mut z = Mat::<c64>::zeros(size, size);
        accumulate_mixture(&mut z, &profile, matrix_n, 1.0, &mut stream(seed, Domain::Matrix, index));
        Ok(z)
    };

    let parts = ordered_chunks(trials, |range| -> Result<Vec<Complex64>> {
        let mut sums = vec![Complex64::default(); d];
        for t in range {
            let z1 = draw(2 * t as u64)?;
            let z2 = draw(2 * t as u64 + 1)?;
            let mut z2b = z2.clone();
            for col in 0..size {
                let w = b[col / matrix_n];
                for row in 0..size {
                    z2b[(row, col)] *= w;
                }
            }
            let p = &z1 * &(&z2b * &z2);
            for (i, s) in sums.iter_mut().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for r in i * matrix_n..(i + 1) * matrix_n {
                    for k in 0..size {
                        acc += p[(r, k)] * z1[(k, r)];
                    }
                }
                *s += acc / matrix_n as f64;
            }
        }
        Ok(sums)
    });
    let mut total = vec![Complex64::default(); d];
    for p in parts {
        for (t, v) in total.iter_mut().zip(&p?) {
            *t += v;
        }
    }
    let lhs = ComplexDiagonal::new(total.into_iter().map(|v| v / trials as f64).collect())?;
    let cov = MeanCovarianceProfile::from_sampler(sampler);
    let rhs = hat_eta(&cov, &hat_eta(&cov, &ComplexDiagonal::from_real(b)?)?)?;
    let norm = rhs.l1_norm();
    let diff = lhs.l1_distance(&rhs)?;
    let rel_err = if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / norm
    };
    Ok(PairCancellation { lhs, rhs, rel_err })
}
