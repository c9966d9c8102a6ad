//! Monte-Carlo averaging of fixed-point solutions over random profiles.
//!
//! Draw `k` uses profile stream `k` and a cold start at the first grid point.
//! Draws in which any grid point fails to converge are discarded and counted.
//! Partial results are combined in draw-chunk order, so the output is
//! bit-identical for any worker count.

use num_complex::Complex64;

use crate::domain::{ComplexDiagonal, SolverSettings, SpectralCurve, VarianceProfile};
use crate::error::{invalid, Error, Result};
use crate::rng::ordered_chunks;
use crate::sampler::ProfileSource;
use crate::solver::{solve_grid, FixedPointResult};

/// Mean Cauchy transform on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTransformResult {
    /// `trd` of the mean diagonal, with its Stieltjes density.
    pub curve: SpectralCurve,
    /// Mean diagonal `E[G(x + i eps)]` per grid point.
    pub mean_diagonals: Vec<ComplexDiagonal>,
    pub draws: usize,
    pub discarded: usize,
    /// Standard error of the mean of `Im trd G` per grid point.
    pub per_point_stderr: Vec<f64>,
    /// Total applications of the fixed-point map, discarded draws included.
    pub map_evaluations: u64,
}

impl MeanTransformResult {
    pub fn used(&self) -> usize {
        self.draws - self.discarded
    }

    /// Multiply-adds spent in the covariance map, `map_evaluations * d^2`.
    pub fn eta_multiply_adds(&self) -> u64 {
        let d = self.mean_diagonals[0].dim() as u64;
        self.map_evaluations * d * d
    }
}

/// Running mean and centered sum of squares, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Standard error of the mean; zero below two samples.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2.max(0.0) / (n - 1.0) / n).sqrt()
    }
}

struct Partial {
    sums: Vec<Complex64>,
    im_trace: Vec<Moments>,
    kept: usize,
    discarded: usize,
    evaluations: u64,
}

impl Partial {
    fn new(points: usize, d: usize) -> Self {
        Self {
            sums: vec![Complex64::default(); points * d],
            im_trace: vec![Moments::default(); points],
            kept: 0,
            discarded: 0,
            evaluations: 0,
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.im_trace.iter_mut().zip(&other.im_trace) {
            a.merge(b);
        }
        self.kept += other.kept;
        self.discarded += other.discarded;
        self.evaluations += other.evaluations;
    }
}

/// `E[G(x + i eps)]` over `draws` profiles, with `E[G]` estimated by the mean
/// of converged per-draw solutions.
pub fn mean_cauchy<S: ProfileSource>(
    sampler: &S,
    xs: &[f64],
    settings: &SolverSettings,
    draws: usize,
    seed: u64,
) -> Result<MeanTransformResult> {
    mean_cauchy_observed(sampler, xs, settings, draws, seed, |_, _, _| {})
}

/// As [`mean_cauchy`], passing every per-draw grid solution to `observer`.
pub fn mean_cauchy_observed<S, F>(
    sampler: &S,
    xs: &[f64],
    settings: &SolverSettings,
    draws: usize,
    seed: u64,
    observer: F,
) -> Result<MeanTransformResult>
where
    S: ProfileSource,
    F: Fn(u64, &VarianceProfile, &[FixedPointResult]) + Sync,
{
    if draws == 0 {
        return Err(invalid("M", "need at least one draw"));
    }
    settings.validate()?;
    crate::domain::check_increasing(xs)?;
    let d = sampler.dim();
    let points = xs.len();

    let partials = ordered_chunks(draws, |range| -> Result<Partial> {
        let mut part = Partial::new(points, d);
        for k in range {
            let index = k as u64;
            let profile = sampler.sample(seed, index)?;
            let results = solve_grid(&profile, xs, settings)?;
            observer(index, &profile, &results);
            part.evaluations += results.iter().map(|r| r.evaluations() as u64).sum::<u64>();
            if !results.iter().all(|r| r.converged) {
                part.discarded += 1;
                continue;
            }
            part.kept += 1;
            for (p, r) in results.iter().enumerate() {
                for (s, g) in part.sums[p * d..(p + 1) * d].iter_mut().zip(r.g.values()) {
                    *s += g;
                }
                part.im_trace[p].push(r.g.normalized_trace().im);
            }
        }
        Ok(part)
    });

    let mut total = Partial::new(points, d);
    for part in partials {
        total.merge(&part?);
    }
    if total.kept == 0 {
        return Err(Error::AllDrawsDiscarded { draws });
    }

    let kept = total.kept as f64;
    let mean_diagonals: Vec<ComplexDiagonal> = total
        .sums
        .chunks_exact(d)
        .map(|s| ComplexDiagonal::new(s.iter().map(|v| v / kept).collect()))
        .collect::<Result<_>>()?;
    let g_values = mean_diagonals.iter().map(ComplexDiagonal::normalized_trace).collect();
    Ok(MeanTransformResult {
        curve: SpectralCurve::new(settings.epsilon, xs.to_vec(), g_values)?,
        mean_diagonals,
        draws,
        discarded: total.discarded,
        per_point_stderr: total.im_trace.iter().map(Moments::stderr).collect(),
        map_evaluations: total.evaluations,
    })
}
