//! Fixed-point computation of `G(zI)` for a fixed variance profile.
//!
//! The covariance map of `H = A ∘ X` sends diagonals to diagonals,
//! `eta(D)[i] = sum_j A[i][j]^2 D[j]`, and the Cauchy transform is the unique
//! lower-half-plane fixed point of `T(D) = (zI - eta(D))^{-1}`. All state is a
//! length-`d` complex vector, so one iteration costs `O(d^2)`.

use num_complex::Complex64;

use crate::domain::{check_increasing, ComplexDiagonal, SolverSettings, VarianceProfile};
use crate::error::{invalid, Error, Result};

/// Outcome of one fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    /// Last accepted iterate.
    pub g: ComplexDiagonal,
    /// Number of map applications that produced `g` from the initial value.
    pub iterations: usize,
    /// `||T(g) - g||_1` at the returned iterate.
    pub step: f64,
    /// `||(zI - eta(g)) g - I||_1` at the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

impl FixedPointResult {
    /// Map evaluations spent, including the final convergence check.
    pub fn evaluations(&self) -> usize {
        self.iterations + 1
    }
}

/// `out[i] = sum_j weights[i][j] * input[j]` for row-major `weights`.
#[inline]
pub(crate) fn weighted_sums(weights: &[f64], input: &[Complex64], out: &mut [Complex64]) {
    let d = input.len();
    for (row, o) in weights.chunks_exact(d).zip(out.iter_mut()) {
        *o = row.iter().zip(input).map(|(w, v)| v * *w).sum();
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

fn check_upper(z: Complex64) -> Result<()> {
    if !(z.im > 0.0 && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NotUpperHalfPlane(z.im));
    }
    Ok(())
}

/// The covariance map `eta(D)[i] = sum_j A[i][j]^2 D[j]`.
pub fn eta(profile: &VarianceProfile, diag: &ComplexDiagonal) -> Result<ComplexDiagonal> {
    check_dim(profile.dim(), diag.dim())?;
    let mut out = vec![Complex64::default(); diag.dim()];
    weighted_sums(profile.squared_entries(), diag.values(), &mut out);
    ComplexDiagonal::new(out)
}

/// One application of `T(D)[i] = 1 / (z - eta(D)[i])`.
pub fn t_map(profile: &VarianceProfile, z: Complex64, diag: &ComplexDiagonal) -> Result<ComplexDiagonal> {
    check_upper(z)?;
    let e = eta(profile, diag)?;
    ComplexDiagonal::new(e.values().iter().map(|v| (z - v).inv()).collect())
}

#[inline]
fn modulus(v: Complex64) -> f64 {
    v.norm_sqr().sqrt()
}

/// Iterates `T` from `init` until the successive difference drops below
/// `settings.tol` and the fixed-point residual below `settings.residual_tol`.
///
/// Failing to converge within `settings.max_iter` is reported through
/// [`FixedPointResult::converged`], not as an error.
pub fn solve_point(
    profile: &VarianceProfile,
    z: Complex64,
    init: &ComplexDiagonal,
    settings: &SolverSettings,
) -> Result<FixedPointResult> {
    settings.validate()?;
    check_upper(z)?;
    let d = profile.dim();
    check_dim(d, init.dim())?;
    if let Some(i) = init.values().iter().position(|v| !(v.im <= 0.0) || !v.re.is_finite()) {
        return Err(invalid(
            "init",
            format!("entry {i} is not in the closed lower half-plane"),
        ));
    }
    Ok(iterate(profile.squared_entries(), z, init.values().to_vec(), settings))
}

fn iterate(weights: &[f64], z: Complex64, mut cur: Vec<Complex64>, settings: &SolverSettings) -> FixedPointResult {
    let d = cur.len();
    let mut next = vec![Complex64::default(); d];
    let mut denom = vec![Complex64::default(); d];
    let bound = d as f64 / z.im;
    let mut n = 0;
    loop {
        weighted_sums(weights, &cur, &mut denom);
        let mut step = 0.0;
        for i in 0..d {
            denom[i] = z - denom[i];
            next[i] = denom[i].inv();
            step += modulus(next[i] - cur[i]);
        }
        debug_assert!(
            next.iter().map(|v| modulus(*v)).sum::<f64>() <= bound * (1.0 + 1e-12),
            "iterate escaped the norm bound d / Im z"
        );
        let done = n == settings.max_iter;
        if step < settings.tol || done {
            let residual: f64 = cur
                .iter()
                .zip(&denom)
                .map(|(g, w)| modulus(w * g - 1.0))
                .sum();
            let converged = step < settings.tol && residual <= settings.residual_tol;
            if converged || done {
                return FixedPointResult {
                    g: ComplexDiagonal::new(cur).expect("dimension is positive"),
                    iterations: n,
                    step,
                    residual,
                    converged,
                };
            }
        }
        std::mem::swap(&mut cur, &mut next);
        n += 1;
    }
}

/// Solves at `x + i*epsilon` for every abscissa, warm-starting each point from
/// the previous converged iterate (the first point, and any point after a
/// failed one, starts from `-iI`).
pub fn solve_grid(
    profile: &VarianceProfile,
    xs: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<FixedPointResult>> {
    settings.validate()?;
    check_increasing(xs)?;
    let cold = ComplexDiagonal::minus_i(profile.dim())?;
    let mut results: Vec<FixedPointResult> = Vec::with_capacity(xs.len());
    for &x in xs {
        let init = match results.last() {
            Some(prev) if prev.converged => prev.g.values().to_vec(),
            _ => cold.values().to_vec(),
        };
        let z = Complex64::new(x, settings.epsilon);
        results.push(iterate(profile.squared_entries(), z, init, settings));
    }
    Ok(results)
}

/// `G(zI) = (z - sqrt(z^2 - 4K)) / (2K) * I` for profiles whose rows all have
/// squared sum `K`.
///
/// Of the two roots of `K g^2 - z g + 1 = 0` exactly one lies in the lower
/// half-plane when `Im z > 0`; that root is returned.
pub fn closed_form_constant_rowsum(k: f64, z: Complex64) -> Result<Complex64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid("K", format!("must be positive, got {k}")));
    }
    check_upper(z)?;
    let s = (z * z - 4.0 * k).sqrt();
    // Pick the sign that avoids cancellation, then recover the partner root
    // from the product of roots `1/K`.
    let wide = if (z + s).norm_sqr() >= (z - s).norm_sqr() { z + s } else { z - s };
    let first = 2.0 / wide;
    let second = (k * first).inv();
    Ok(if first.im < 0.0 { first } else { second })
}
