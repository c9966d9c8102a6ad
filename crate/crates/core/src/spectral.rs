//! Stieltjes inversion, quadrature moments and distances between a
//! theoretical density and an empirical eigenvalue sample.
//!
//! Densities are treated as piecewise linear between grid points and zero
//! outside the grid. Histograms live on the global lattice `[k w, (k+1) w)`,
//! so histograms of different samples with the same bin width always align.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::SpectralCurve;
use crate::error::{invalid, Error, Result};

/// Largest positive imaginary part accepted (and clamped) as rounding noise.
pub const LEAK_TOLERANCE: f64 = 1e-12;

/// Density above which a grid end counts as truncating the support.
pub const EDGE_THRESHOLD: f64 = 1e-6;

/// `-Im g / pi` per point.
pub fn stieltjes_density(g: &[Complex64]) -> Result<Vec<f64>> {
    g.iter()
        .enumerate()
        .map(|(index, v)| {
            if v.im > LEAK_TOLERANCE || v.im.is_nan() {
                Err(Error::PositiveImaginary { index, imag: v.im })
            } else {
                Ok((-v.im / PI).max(0.0))
            }
        })
        .collect()
}

/// Trapezoid moment of a density curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoment {
    pub value: f64,
    /// Larger of the densities at the two grid ends.
    pub edge_density: f64,
    /// The grid ends carry density above [`EDGE_THRESHOLD`].
    pub truncated: bool,
}

/// `int x^m density(x) dx` by the trapezoid rule on the curve's grid.
pub fn quadrature_moment(curve: &SpectralCurve, m: u32) -> QuadratureMoment {
    let (xs, rho) = (curve.xs(), curve.density());
    let f = |k: usize| xs[k].powi(m as i32) * rho[k];
    let value = (1..xs.len())
        .map(|k| 0.5 * (xs[k] - xs[k - 1]) * (f(k) + f(k - 1)))
        .sum();
    let edge_density = rho[0].max(rho[rho.len() - 1]);
    QuadratureMoment {
        value,
        edge_density,
        truncated: edge_density > EDGE_THRESHOLD,
    }
}

/// Total mass `int density`.
pub fn mass(curve: &SpectralCurve) -> f64 {
    quadrature_moment(curve, 0).value
}

/// Cumulative distribution of a piecewise-linear density.
struct DensityCdf<'a> {
    xs: &'a [f64],
    rho: &'a [f64],
    cumulative: Vec<f64>,
}

impl<'a> DensityCdf<'a> {
    fn new(curve: &'a SpectralCurve) -> Self {
        let (xs, rho) = (curve.xs(), curve.density());
        let mut cumulative = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for k in 1..xs.len() {
            acc += 0.5 * (xs[k] - xs[k - 1]) * (rho[k] + rho[k - 1]);
            cumulative.push(acc);
        }
        Self { xs, rho, cumulative }
    }

    fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.total();
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[k + 1] - self.xs[k];
        let t = x - self.xs[k];
        let slope = (self.rho[k + 1] - self.rho[k]) / h;
        self.cumulative[k] + self.rho[k] * t + 0.5 * slope * t * t
    }
}

/// Sorted sample of real values, typically pooled eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

/// Counts on the lattice bins `[origin + k w, origin + (k+1) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Left edge of the first bin, a multiple of `bin_width`.
    pub origin: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Left edges and normalized densities `count / (total * w)`.
    pub fn densities(&self) -> Vec<(f64, f64)> {
        let scale = 1.0 / (self.total as f64 * self.bin_width);
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (self.origin + k as f64 * self.bin_width, c as f64 * scale))
            .collect()
    }
}

fn check_bin_width(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(invalid("bin_width", format!("must be positive, got {w}")));
    }
    Ok(())
}

#[inline]
fn lattice_index(x: f64, w: f64) -> i64 {
    (x / w).floor() as i64
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(k) = samples.iter().position(|x| !x.is_finite()) {
            return Err(invalid("samples", format!("sample {k} is not finite")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `< x`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// `(1/n) sum x^m`.
    pub fn moment(&self, m: u32) -> f64 {
        self.samples.iter().map(|x| x.powi(m as i32)).sum::<f64>() / self.len() as f64
    }

    pub fn histogram(&self, bin_width: f64) -> Result<Histogram> {
        check_bin_width(bin_width)?;
        let lo = lattice_index(self.min(), bin_width);
        let hi = lattice_index(self.max(), bin_width);
        Ok(self.histogram_on(bin_width, lo, hi))
    }

    /// Counts for lattice bins `lo..=hi`; samples outside are ignored.
    fn histogram_on(&self, bin_width: f64, lo: i64, hi: i64) -> Histogram {
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for &x in &self.samples {
            let k = lattice_index(x, bin_width);
            if (lo..=hi).contains(&k) {
                counts[(k - lo) as usize] += 1;
            }
        }
        Histogram {
            origin: lo as f64 * bin_width,
            bin_width,
            counts,
            total: self.len() as u64,
        }
    }
}

/// `sum_bins |hist density - mean theory density| * w` over the lattice bins
/// covering both the grid and the sample.
///
/// The theory density is not renormalized, so mass lost to the grid ends or
/// to smoothing shows up in the distance.
pub fn l1_density_distance(curve: &SpectralCurve, emp: &EmpiricalDistribution, bin_width: f64) -> Result<f64> {
    check_bin_width(bin_width)?;
    let cdf = DensityCdf::new(curve);
    let xs = curve.xs();
    let lo = lattice_index(xs[0].min(emp.min()), bin_width);
    let hi = lattice_index(xs[xs.len() - 1].max(emp.max()), bin_width);
    let hist = emp.histogram_on(bin_width, lo, hi);
    let n = emp.len() as f64;
    Ok((lo..=hi)
        .zip(&hist.counts)
        .map(|(k, &count)| {
            let left = k as f64 * bin_width;
            let theory = cdf.eval(left + bin_width) - cdf.eval(left);
            (count as f64 / n - theory).abs()
        })
        .sum())
}

/// `sup_x |F_theory(x) - F_emp(x)|`, evaluated on both sides of every jump
/// of the empirical distribution.
pub fn ks_distance(curve: &SpectralCurve, emp: &EmpiricalDistribution) -> f64 {
    let cdf = DensityCdf::new(curve);
    let n = emp.len() as f64;
    let mut sup: f64 = 0.0;
    let mut k = 0;
    let s = emp.samples();
    while k < s.len() {
        let x = s[k];
        let mut j = k;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        let f = cdf.eval(x);
        sup = sup.max((f - k as f64 / n).abs()).max((f - j as f64 / n).abs());
        k = j;
    }
    sup
}

/// Histogram L1 distance between two samples on the shared lattice.
pub fn l1_distance_empirical(a: &EmpiricalDistribution, b: &EmpiricalDistribution, bin_width: f64) -> Result<f64> {
    check_bin_width(bin_width)?;
    let lo = lattice_index(a.min().min(b.min()), bin_width);
    let hi = lattice_index(a.max().max(b.max()), bin_width);
    let (ha, hb) = (a.histogram_on(bin_width, lo, hi), b.histogram_on(bin_width, lo, hi));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(ha
        .counts
        .iter()
        .zip(&hb.counts)
        .map(|(&ca, &cb)| (ca as f64 / na - cb as f64 / nb).abs())
        .sum())
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance_empirical(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    a.samples()
        .iter()
        .chain(b.samples())
        .map(|&x| {
            let right = (a.cdf(x) - b.cdf(x)).abs();
            let left = (a.cdf_left(x) - b.cdf_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}
