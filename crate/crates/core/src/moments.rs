//! Operator-valued moments of `H = A ∘ X` as sums of nested η-words, and an
//! independent entrywise Wick expansion used to check them.

use num_complex::Complex64;

use crate::domain::{ComplexDiagonal, VarianceProfile};
use crate::error::{Error, Result};
use crate::montecarlo::Moments;
use crate::pairing::{catalan, enumerate_nc2, NoncrossingPairing};
use crate::rng::ordered_chunks;
use crate::sampler::ProfileSource;
use crate::solver::weighted_sums;

/// Largest number of elementary terms the Wick expansion may visit.
pub const WICK_TERM_LIMIT: f64 = 1e8;

/// Evaluates the η-word of `pi` with `map` as η.
///
/// Scanning left to right, an opener starts a new factor `I`; a closer
/// applies `map` to the finished factor and multiplies the result into the
/// enclosing one.
pub(crate) fn reduce_word(
    pi: &NoncrossingPairing,
    d: usize,
    mut map: impl FnMut(&[Complex64], &mut [Complex64]),
) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut stack: Vec<Vec<Complex64>> = vec![vec![one; d]];
    let mut image = vec![Complex64::default(); d];
    for opens in pi.openers() {
        if opens {
            stack.push(vec![one; d]);
        } else {
            let done = stack.pop().expect("pairing is balanced");
            map(&done, &mut image);
            let parent = stack.last_mut().expect("pairing is balanced");
            for (p, v) in parent.iter_mut().zip(&image) {
                *p *= v;
            }
        }
    }
    debug_assert_eq!(stack.len(), 1);
    stack.pop().expect("root factor")
}

/// Sums the η-words of all non-crossing pairings of `{1..m}`.
pub(crate) fn sum_words(m: usize, d: usize, weights: &[f64]) -> ComplexDiagonal {
    let mut total = vec![Complex64::default(); d];
    for pi in enumerate_nc2(m) {
        let word = reduce_word(&pi, d, |x, out| weighted_sums(weights, x, out));
        for (t, w) in total.iter_mut().zip(&word) {
            *t += w;
        }
    }
    ComplexDiagonal::new(total).expect("dimension is positive")
}

fn check_pairing(pi: &NoncrossingPairing) -> Result<()> {
    if pi.m() == 0 {
        return Ok(());
    }
    NoncrossingPairing::new(pi.m(), pi.pairs().to_vec()).map(|_| ())
}

/// `kappa_pi` for the profile `a`: the nested η-word of `pi`.
pub fn kappa_pi(a: &VarianceProfile, pi: &NoncrossingPairing) -> Result<ComplexDiagonal> {
    check_pairing(pi)?;
    let word = reduce_word(pi, a.dim(), |x, out| weighted_sums(a.squared_entries(), x, out));
    ComplexDiagonal::new(word)
}

/// `E(H^m) = sum over NC2(m) of kappa_pi`; zero for odd `m`, `I` for `m = 0`.
pub fn ov_moment(a: &VarianceProfile, m: usize) -> ComplexDiagonal {
    sum_words(m, a.dim(), a.squared_entries())
}

/// `trd E(H^m)` by explicit expansion over index tuples and Wick pairings of
/// the circular family, `phi(X_ij X_kl) = delta_il delta_jk`.
pub fn wick_entrywise_moment(a: &VarianceProfile, m: usize) -> Result<Complex64> {
    let d = a.dim();
    let pairings = if m % 2 == 0 { catalan((m / 2) as u32) } else { 0 };
    let terms = (d as f64).powi(m as i32) * pairings as f64;
    if terms > WICK_TERM_LIMIT {
        return Err(Error::WorkGuard {
            required: terms,
            limit: WICK_TERM_LIMIT,
        });
    }
    if m % 2 != 0 {
        return Ok(Complex64::default());
    }
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let matchings: Vec<Vec<(usize, usize)>> = perfect_matchings(m)
        .into_iter()
        .filter(|p| !crosses(p))
        .collect();

    let mut idx = vec![0usize; m];
    let mut total = 0.0;
    loop {
        // Letter k is X[idx[k]][idx[k+1 mod m]].
        let next = |k: usize| idx[(k + 1) % m];
        let weight: f64 = (0..m).map(|k| a.get(idx[k], next(k))).product();
        if weight != 0.0 {
            let phi = matchings
                .iter()
                .filter(|pairs| {
                    pairs
                        .iter()
                        .all(|&(p, q)| idx[p] == next(q) && next(p) == idx[q])
                })
                .count();
            total += weight * phi as f64;
        }
        // Advance the odometer over {0..d}^m.
        let mut k = 0;
        loop {
            if k == m {
                return Ok(Complex64::new(total / d as f64, 0.0));
            }
            idx[k] += 1;
            if idx[k] < d {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Every perfect matching of `0..m` (0-based, pairs `(p, q)` with `p < q`).
fn perfect_matchings(m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let partner = free.remove(k);
            cur.push((first, partner));
            rec(free, cur, out);
            cur.pop();
            free.insert(k, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(&mut (0..m).collect(), &mut Vec::new(), &mut out);
    out
}

fn crosses(pairs: &[(usize, usize)]) -> bool {
    pairs.iter().any(|&(a, b)| {
        pairs
            .iter()
            .any(|&(c, e)| a < c && c < b && b < e)
    })
}

/// Monte-Carlo mean of a scalar and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
}

impl MomentEstimate {
    pub(crate) fn from_moments(m: &Moments) -> Self {
        Self {
            mean: m.mean,
            stderr: m.stderr(),
            draws: m.count as usize,
        }
    }
}

/// `E[trd E(H^m)]` over `draws` profiles; draw `k` uses profile stream `k`,
/// the same profiles the Monte-Carlo transform sees for the same seed.
pub fn mean_moment<S: ProfileSource>(source: &S, m: usize, draws: usize, seed: u64) -> Result<MomentEstimate> {
    if draws == 0 {
        return Err(crate::error::invalid("M", "need at least one draw"));
    }
    let partials = ordered_chunks(draws, |range| -> Result<Moments> {
        let mut acc = Moments::default();
        for k in range {
            let profile = source.sample(seed, k as u64)?;
            acc.push(ov_moment(&profile, m).normalized_trace().re);
        }
        Ok(acc)
    });
    let mut total = Moments::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(MomentEstimate::from_moments(&total))
}

/// `phi(b1 b2 b1 b2)` for free `b1, b2`:
/// `phi(b1^2) phi(b2)^2 + phi(b1)^2 phi(b2^2) - phi(b1)^2 phi(b2)^2`.
pub fn free_mixed_moment_abab(phi_a1: f64, phi_a1_sq: f64, phi_a2: f64, phi_a2_sq: f64) -> f64 {
    let (s1, s2) = (phi_a1 * phi_a1, phi_a2 * phi_a2);
    phi_a1_sq * s2 + s1 * phi_a2_sq - s1 * s2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{ProfileLaw, ProfileSampler};
    use crate::solver::eta;
    use proptest::prelude::*;

    fn diag_real(v: &[f64]) -> ComplexDiagonal {
        ComplexDiagonal::from_real(v).unwrap()
    }

    fn profile() -> VarianceProfile {
        VarianceProfile::new(vec![
            vec![0.4, 1.2, 0.0],
            vec![1.2, 0.9, 0.3],
            vec![0.0, 0.3, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn single_pair_is_eta_of_identity() {
        let a = profile();
        let pi = NoncrossingPairing::new(2, vec![(1, 2)]).unwrap();
        let id = ComplexDiagonal::identity(3).unwrap();
        assert_eq!(kappa_pi(&a, &pi).unwrap(), eta(&a, &id).unwrap());
    }

    #[test]
    fn nested_example_word() {
        let a = profile();
        let pi = NoncrossingPairing::new(8, vec![(1, 6), (2, 3), (4, 5), (7, 8)]).unwrap();
        let e = |x: &ComplexDiagonal| eta(&a, x).unwrap();
        let e_id = e(&ComplexDiagonal::identity(3).unwrap());
        let expected = e(&e_id.product(&e_id).unwrap()).product(&e_id).unwrap();
        assert_eq!(kappa_pi(&a, &pi).unwrap(), expected);
    }

    #[test]
    fn identity_profile_gives_identity() {
        let id = VarianceProfile::identity(3).unwrap();
        for pi in enumerate_nc2(8) {
            assert_eq!(kappa_pi(&id, &pi).unwrap(), ComplexDiagonal::identity(3).unwrap());
        }
    }

    #[test]
    fn ov_moment_examples() {
        let a = profile();
        let sums = a.row_square_sums();
        assert_eq!(ov_moment(&a, 2), diag_real(&sums));
        assert_eq!(ov_moment(&VarianceProfile::ones(1).unwrap(), 4), diag_real(&[2.0]));
        assert_eq!(ov_moment(&VarianceProfile::ones(2).unwrap(), 4), diag_real(&[8.0, 8.0]));
        assert_eq!(ov_moment(&a, 5), ComplexDiagonal::zeros(3).unwrap());
        assert_eq!(ov_moment(&a, 0), ComplexDiagonal::identity(3).unwrap());
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        let one = VarianceProfile::ones(1).unwrap();
        for k in 0..8u32 {
            assert_eq!(ov_moment(&one, 2 * k as usize)[0].re, catalan(k) as f64);
        }
    }

    #[test]
    fn wick_examples() {
        let a = profile();
        let m2 = a.squared_entries().iter().sum::<f64>() / 3.0;
        assert!((wick_entrywise_moment(&a, 2).unwrap().re - m2).abs() < 1e-14);
        assert_eq!(wick_entrywise_moment(&VarianceProfile::ones(1).unwrap(), 4).unwrap().re, 2.0);
        assert_eq!(wick_entrywise_moment(&a, 3).unwrap(), Complex64::default());
        assert_eq!(wick_entrywise_moment(&a, 0).unwrap().re, 1.0);
    }

    #[test]
    fn wick_guard() {
        let big = VarianceProfile::ones(10).unwrap();
        assert!(matches!(wick_entrywise_moment(&big, 8), Err(Error::WorkGuard { .. })));
    }

    #[test]
    fn perfect_matching_counts() {
        // (m - 1)!! matchings, Catalan(m/2) of them non-crossing.
        for (m, all, nc) in [(2, 1, 1), (4, 3, 2), (6, 15, 5), (8, 105, 14)] {
            let ms = perfect_matchings(m);
            assert_eq!(ms.len(), all);
            assert_eq!(ms.iter().filter(|p| !crosses(p)).count(), nc);
        }
    }

    #[test]
    fn mean_moment_examples() {
        let a = profile();
        let constant = ProfileSampler::constant(&a);
        let est = mean_moment(&constant, 4, 7, 2).unwrap();
        assert_eq!(est.mean, ov_moment(&a, 4).normalized_trace().re);
        assert_eq!(est.stderr, 0.0);

        let ray = ProfileSampler::new(1, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![]).unwrap();
        let est = mean_moment(&ray, 2, 4000, 5).unwrap();
        assert!((est.mean - 2.0).abs() < 3.0 * est.stderr, "{est:?}");
        assert_eq!(mean_moment(&ray, 3, 50, 5).unwrap().mean, 0.0);
    }

    #[test]
    fn free_mixed_moment_examples() {
        assert_eq!(free_mixed_moment_abab(0.0, 1.0, 0.0, 1.0), 0.0);
        assert_eq!(free_mixed_moment_abab(1.0, 2.0, 1.0, 2.0), 3.0);
        assert_eq!(free_mixed_moment_abab(1.7, 5.0, 0.0, 1.0), 1.7 * 1.7);
    }

    fn profile_strategy() -> impl Strategy<Value = VarianceProfile> {
        (1usize..4).prop_flat_map(|d| {
            proptest::collection::vec(0.0..2.0f64, d * d).prop_map(move |v| {
                VarianceProfile::from_fn(d, |i, j| v[i.min(j) * d + i.max(j)]).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn recursion_matches_wick(a in profile_strategy(), half in 0usize..4) {
            let m = 2 * half;
            let lhs = ov_moment(&a, m).normalized_trace().re;
            let rhs = wick_entrywise_moment(&a, m).unwrap().re;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300), "{} vs {}", lhs, rhs);
        }

        #[test]
        fn moments_are_nonnegative_and_dominated(a in profile_strategy(), half in 0usize..5) {
            let m = 2 * half;
            let mom = ov_moment(&a, m);
            prop_assert!(mom.values().iter().all(|v| v.re >= 0.0 && v.im == 0.0));
            let ones = VarianceProfile::ones(a.dim()).unwrap();
            let bound = a.max_entry().powi(m as i32) * ov_moment(&ones, m).normalized_trace().re;
            prop_assert!(mom.normalized_trace().re <= bound * (1.0 + 1e-12));
        }
    }
}
