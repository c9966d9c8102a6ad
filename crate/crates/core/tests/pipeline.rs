use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};
use semimix::montecarlo::mean_cauchy;
use semimix::solver::closed_form_constant_rowsum;
use semimix::spectral::{ks_distance, l1_density_distance, EmpiricalDistribution};
use semimix::{
    uniform_grid, Complex64, ProfileLaw, ProfileSampler, ProfileSource, Result, SolverSettings, SpectralCurve,
    VarianceProfile,
};

/// Profiles `[[c, s], [s, c]]` with `c^2 + s^2 = K` random, so every draw has
/// constant row sums.
struct RotatedPair;

impl RotatedPair {
    fn radius_and_angle(seed: u64, index: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let r = Weibull::new(2f64.sqrt(), 2.0).unwrap().sample(&mut rng);
        (r, rng.random_range(0.0..PI / 2.0))
    }
}

impl ProfileSource for RotatedPair {
    fn dim(&self) -> usize {
        2
    }

    fn sample(&self, seed: u64, index: u64) -> Result<VarianceProfile> {
        let (r, t) = Self::radius_and_angle(seed, index);
        let (c, s) = (r * t.cos(), r * t.sin());
        VarianceProfile::new(vec![vec![c, s], vec![s, c]])
    }
}

fn rayleigh(d: usize) -> ProfileSampler {
    ProfileSampler::new(d, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![]).unwrap()
}

#[test]
fn random_constant_rowsum_matches_averaged_closed_form() {
    let settings = SolverSettings::new(1e-6, 100_000, 1e-2).unwrap();
    let xs = uniform_grid(-5.0, 5.0, 0.25).unwrap();
    let draws = 300;
    let result = mean_cauchy(&RotatedPair, &xs, &settings, draws, 7).unwrap();
    assert_eq!(result.discarded, 0);
    for (p, &x) in xs.iter().enumerate() {
        let z = Complex64::new(x, settings.epsilon);
        let oracle: Complex64 = (0..draws as u64)
            .map(|k| {
                let (r, _) = RotatedPair::radius_and_angle(7, k);
                closed_form_constant_rowsum(r * r, z).unwrap()
            })
            .sum::<Complex64>()
            / draws as f64;
        let got = result.curve.g_values()[p];
        let slack = 2.0 * result.per_point_stderr[p] + 1e-4;
        assert!((got.im - oracle.im).abs() <= slack, "x={x}: {got} vs {oracle}");
        assert!((got.re - oracle.re).abs() <= 1e-4, "x={x}: {got} vs {oracle}");
    }
}

#[test]
fn stderr_shrinks_like_inverse_sqrt_draws() {
    let sampler = rayleigh(2);
    let settings = SolverSettings::default();
    let xs = uniform_grid(-2.0, 2.0, 0.5).unwrap();
    let small = mean_cauchy(&sampler, &xs, &settings, 250, 3).unwrap();
    let large = mean_cauchy(&sampler, &xs, &settings, 1000, 3).unwrap();
    let mut ratios: Vec<f64> = small
        .per_point_stderr
        .iter()
        .zip(&large.per_point_stderr)
        .map(|(s, l)| l / s)
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    assert!((0.4..=0.6).contains(&median), "{ratios:?}");
}

#[test]
fn refining_tolerance_moves_the_mean_by_order_tol() {
    let sampler = rayleigh(3);
    let xs = uniform_grid(-8.0, 8.0, 0.05).unwrap();
    let coarse = SolverSettings::new(1e-3, 20_000, 1e-3).unwrap();
    let fine = SolverSettings::new(1e-4, 200_000, 1e-3).unwrap();
    let a = mean_cauchy(&sampler, &xs, &coarse, 40, 5).unwrap();
    let b = mean_cauchy(&sampler, &xs, &fine, 40, 5).unwrap();
    for (p, (ga, gb)) in a.mean_diagonals.iter().zip(&b.mean_diagonals).enumerate() {
        let gap = ga.l1_distance(gb).unwrap();
        assert!(gap <= 10.0 * coarse.tol, "x={}: {gap}", xs[p]);
    }
}

#[test]
fn mean_diagonals_respect_norm_bound() {
    let sampler = rayleigh(3);
    let settings = SolverSettings::default();
    let xs = uniform_grid(-6.0, 6.0, 0.1).unwrap();
    let r = mean_cauchy(&sampler, &xs, &settings, 30, 2).unwrap();
    for g in &r.mean_diagonals {
        assert!(g.l1_norm() <= 3.0 / settings.epsilon);
        assert!(g.is_lower_half_plane());
    }
    assert!(r.curve.density().iter().all(|&v| v >= 0.0));
    assert!(r.discarded <= r.draws);
}

#[test]
fn mean_transform_is_independent_of_worker_count() {
    let sampler = rayleigh(3);
    let settings = SolverSettings::default();
    let xs = uniform_grid(-6.0, 6.0, 0.1).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mean_cauchy(&sampler, &xs, &settings, 70, 11).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert_eq!(one.curve.density(), four.curve.density());
    assert_eq!(one.per_point_stderr, four.per_point_stderr);
}

fn semicircle_cdf(x: f64) -> f64 {
    let x = x.clamp(-2.0, 2.0);
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
}

/// Inverse-CDF samples from the unit-variance semicircle.
fn semicircle_samples(n: usize, seed: u64) -> EmpiricalDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let (mut lo, mut hi) = (-2.0, 2.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if semicircle_cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    EmpiricalDistribution::new(samples).unwrap()
}

fn exact_semicircle_curve() -> SpectralCurve {
    let xs = uniform_grid(-2.5, 2.5, 0.001).unwrap();
    let g = xs
        .iter()
        .map(|&x| Complex64::new(0.0, -(4.0 - x * x).max(0.0).sqrt() / 2.0))
        .collect();
    SpectralCurve::new(1e-3, xs, g).unwrap()
}

#[test]
fn distances_against_sampled_semicircle() {
    let curve = exact_semicircle_curve();
    let emp = semicircle_samples(100_000, 21);
    let l1 = l1_density_distance(&curve, &emp, 0.1).unwrap();
    let ks = ks_distance(&curve, &emp);
    assert!(l1 < 0.03, "{l1}");
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn distances_use_smoothed_density_consistently() {
    // The eps-smoothed closed form sits close to the exact density.
    let xs = uniform_grid(-3.0, 3.0, 0.01).unwrap();
    let g = xs
        .iter()
        .map(|&x| closed_form_constant_rowsum(1.0, Complex64::new(x, 1e-3)).unwrap())
        .collect();
    let smoothed = SpectralCurve::new(1e-3, xs, g).unwrap();
    let emp = semicircle_samples(50_000, 4);
    assert!(l1_density_distance(&smoothed, &emp, 0.1).unwrap() < 0.04);
    assert!(ks_distance(&smoothed, &emp) < 0.01);
}
