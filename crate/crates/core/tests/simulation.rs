use semimix::clt::{clt_limit_moment, empirical_clt_moment, MeanCovarianceProfile};
use semimix::moments::mean_moment;
use semimix::rmt::{eigenvalues, ensemble_spectrum, sample_mixture_matrix, BlockMatrixSpec};
use semimix::solver::closed_form_constant_rowsum;
use semimix::spectral::l1_density_distance;
use semimix::{uniform_grid, Complex64, ProfileLaw, ProfileSampler, SpectralCurve, VarianceProfile};

fn spec(d: usize, n: usize) -> BlockMatrixSpec {
    BlockMatrixSpec::new(d, n).unwrap()
}

#[test]
fn all_ones_ensemble_matches_closed_form_density() {
    let sampler = ProfileSampler::constant(&VarianceProfile::ones(3).unwrap());
    let emp = ensemble_spectrum(&sampler, &spec(3, 100), 100, 6).unwrap();
    assert_eq!(emp.len(), 100 * 300);
    let xs = uniform_grid(-4.5, 4.5, 0.01).unwrap();
    let g = xs
        .iter()
        .map(|&x| closed_form_constant_rowsum(3.0, Complex64::new(x, 1e-3)).unwrap())
        .collect();
    let curve = SpectralCurve::new(1e-3, xs, g).unwrap();
    let l1 = l1_density_distance(&curve, &emp, 0.1).unwrap();
    assert!(l1 < 0.05, "{l1}");
}

#[test]
fn ensemble_second_moment_matches_mean_moment() {
    let sampler = ProfileSampler::new(2, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![]).unwrap();
    let n_matrices = 300;
    let spectrum = ensemble_spectrum(&sampler, &spec(2, 40), n_matrices, 8).unwrap();
    let exact = mean_moment(&sampler, 2, n_matrices, 8).unwrap();
    // Matrix k and moment draw k share profile k.
    let simulated = spectrum.moment(2);
    assert!((simulated - exact.mean).abs() <= 3.0 * exact.stderr, "{simulated} vs {exact:?}");
}

#[test]
fn spectrum_scales_linearly_with_profile() {
    let a = VarianceProfile::new(vec![vec![1.0, 0.4], vec![0.4, 0.7]]).unwrap();
    let c = 1.7;
    let s = spec(2, 60);
    let base = eigenvalues(&sample_mixture_matrix(&a, &s, 3, 0).unwrap()).unwrap();
    let scaled = eigenvalues(&sample_mixture_matrix(&a.scaled(c).unwrap(), &s, 3, 0).unwrap()).unwrap();
    let moment = |v: &[f64], m: i32| v.iter().map(|x| x.powi(m)).sum::<f64>() / v.len() as f64;
    assert!((moment(&scaled, 2) / moment(&base, 2) - c * c).abs() < 1e-9);
    assert!((moment(&scaled, 4) / moment(&base, 4) - c.powi(4)).abs() < 1e-8);
}

#[test]
fn block_diagonal_profile_spectrum_is_a_union() {
    let a = VarianceProfile::new(vec![vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let m = sample_mixture_matrix(&a, &spec(2, 200), 1, 0).unwrap();
    let ev = eigenvalues(&m).unwrap();
    let m2 = ev.iter().map(|x| x * x).sum::<f64>() / ev.len() as f64;
    // Union of semicircles with variances 1 and 9.
    assert!((m2 - 5.0).abs() < 0.2, "{m2}");
}

#[test]
fn clt_second_moment_is_exact_at_every_scale() {
    let sampler = ProfileSampler::new(2, ProfileLaw::Uniform { a: 0.0, b: 2.0 }, vec![]).unwrap();
    let cov = MeanCovarianceProfile::from_sampler(&sampler);
    let limit = clt_limit_moment(&cov, 2).normalized_trace().re;
    for n_sum in [1, 3, 9] {
        let e = empirical_clt_moment(&sampler, n_sum, 60, 2, 40, 12).unwrap();
        assert!((e.mean - limit).abs() <= 3.0 * e.stderr, "N_sum={n_sum}: {e:?} vs {limit}");
    }
}

#[test]
fn clt_single_summand_matches_mean_moment() {
    let a = VarianceProfile::new(vec![vec![0.5, 1.0], vec![1.0, 0.2]]).unwrap();
    let sampler = ProfileSampler::constant(&a);
    let exact = mean_moment(&sampler, 4, 1, 0).unwrap().mean;
    let e = empirical_clt_moment(&sampler, 1, 150, 4, 20, 2).unwrap();
    assert!((e.mean - exact).abs() < 0.05 * exact, "{e:?} vs {exact}");
}

#[test]
fn odd_limit_moments_vanish() {
    let cov = MeanCovarianceProfile::new(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    for m in [1, 3, 5, 7, 9] {
        assert!(clt_limit_moment(&cov, m).values().iter().all(|v| *v == Complex64::default()));
    }
}
