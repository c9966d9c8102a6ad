//! Random variance profiles.
//!
//! Entries on and above the diagonal are drawn independently and mirrored
//! below it. A draw is a pure function of `(sampler, seed, draw_index)`.

use rand::distr::{Bernoulli, Distribution, Uniform};
use rand::Rng;
use rand_distr::{Exp, Weibull};
use serde::{Deserialize, Serialize};

use crate::domain::VarianceProfile;
use crate::error::{invalid, Error, Result};
use crate::rng::{stream, Domain};

/// Law shared by all entries of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ProfileLaw {
    /// Density `x / sigma^2 * exp(-x^2 / (2 sigma^2))` on `x >= 0`.
    Rayleigh { sigma: f64 },
    /// `|U|` for `U` uniform on `[a, b)`.
    Uniform { a: f64, b: f64 },
    /// A fixed profile; no randomness.
    Constant { matrix: Vec<Vec<f64>> },
    /// `c` with probability `p`, else `0`.
    BernoulliScaled { p: f64, c: f64 },
    /// Exponential with rate `lambda`.
    Exponential { lambda: f64 },
}

/// Law of a single overridden entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EntryLaw {
    Rayleigh { sigma: f64 },
    Uniform { a: f64, b: f64 },
    BernoulliScaled { p: f64, c: f64 },
    Exponential { lambda: f64 },
    Fixed { value: f64 },
}

/// Replaces the law of entry `(i, j)` and its mirror `(j, i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryOverride {
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub law: EntryLaw,
}

impl EntryLaw {
    fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite, got {v}")))
            }
        };
        match *self {
            EntryLaw::Rayleigh { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid("sigma", format!("must be positive, got {sigma}")));
                }
            }
            EntryLaw::Uniform { a, b } => {
                finite("a", a)?;
                finite("b", b)?;
                if a >= b {
                    return Err(invalid("b", format!("need a < b, got [{a}, {b}]")));
                }
            }
            EntryLaw::BernoulliScaled { p, c } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
                }
                finite("c", c)?;
            }
            EntryLaw::Exponential { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("lambda", format!("must be positive, got {lambda}")));
                }
            }
            EntryLaw::Fixed { value } => finite("value", value)?,
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let v: f64 = match *self {
            EntryLaw::Rayleigh { sigma } => Weibull::new(sigma * std::f64::consts::SQRT_2, 2.0)
                .expect("validated")
                .sample(rng),
            EntryLaw::Uniform { a, b } => Uniform::new(a, b).expect("validated").sample(rng),
            EntryLaw::BernoulliScaled { p, c } => {
                if Bernoulli::new(p).expect("validated").sample(rng) {
                    c
                } else {
                    0.0
                }
            }
            EntryLaw::Exponential { lambda } => Exp::new(lambda).expect("validated").sample(rng),
            EntryLaw::Fixed { value } => value,
        };
        v.abs()
    }

    /// `E[X^2]` of the drawn (absolute) value.
    pub fn second_moment(&self) -> f64 {
        match *self {
            EntryLaw::Rayleigh { sigma } => 2.0 * sigma * sigma,
            EntryLaw::Uniform { a, b } => (a * a + a * b + b * b) / 3.0,
            EntryLaw::BernoulliScaled { p, c } => p * c * c,
            EntryLaw::Exponential { lambda } => 2.0 / (lambda * lambda),
            EntryLaw::Fixed { value } => value * value,
        }
    }
}

/// Anything that produces variance profiles indexed by `(seed, draw_index)`.
pub trait ProfileSource: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, seed: u64, draw_index: u64) -> Result<VarianceProfile>;
}

/// Independent entries (up to symmetry) with optional per-entry laws.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSampler {
    d: usize,
    law: ProfileLaw,
    overrides: Vec<EntryOverride>,
    /// Per packed upper-triangle position: `None` uses the base law.
    entry_laws: Vec<Option<EntryLaw>>,
    constant: Option<VarianceProfile>,
}

impl ProfileSampler {
    pub fn new(d: usize, law: ProfileLaw, overrides: Vec<EntryOverride>) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyDimension);
        }
        let constant = match &law {
            ProfileLaw::Constant { matrix } => {
                let p = VarianceProfile::new(matrix.clone())?;
                if p.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: p.dim(),
                    });
                }
                Some(p)
            }
            other => {
                base_entry_law(other).expect("non-constant").validate()?;
                None
            }
        };
        let mut entry_laws = vec![None; d * (d + 1) / 2];
        for o in &overrides {
            if o.i >= d || o.j >= d {
                return Err(invalid(
                    "overrides",
                    format!("entry ({}, {}) is outside a {d}x{d} profile", o.i, o.j),
                ));
            }
            o.law.validate()?;
            entry_laws[packed(d, o.i, o.j)] = Some(o.law.clone());
        }
        Ok(Self {
            d,
            law,
            overrides,
            entry_laws,
            constant,
        })
    }

    pub fn constant(profile: &VarianceProfile) -> Self {
        Self::new(
            profile.dim(),
            ProfileLaw::Constant {
                matrix: profile.rows(),
            },
            Vec::new(),
        )
        .expect("a valid profile is a valid constant law")
    }

    pub fn law(&self) -> &ProfileLaw {
        &self.law
    }

    pub fn overrides(&self) -> &[EntryOverride] {
        &self.overrides
    }

    /// Row-major `E[A[i][j]^2]`.
    pub fn second_moments(&self) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = match (&self.entry_laws[packed(d, i, j)], &self.constant) {
                    (Some(law), _) => law.second_moment(),
                    (None, Some(p)) => p.squared(i, j),
                    (None, None) => base_entry_law(&self.law).expect("non-constant").second_moment(),
                };
            }
        }
        out
    }

    pub fn sample_profile(&self, seed: u64, draw_index: u64) -> Result<VarianceProfile> {
        let d = self.d;
        let mut rng = stream(seed, Domain::Profile, draw_index);
        let base = base_entry_law(&self.law);
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let value = match (&self.entry_laws[packed(d, i, j)], &self.constant, &base) {
                    (Some(law), _, _) => law.draw(&mut rng),
                    (None, Some(p), _) => p.get(i, j),
                    (None, None, Some(law)) => law.draw(&mut rng),
                    (None, None, None) => unreachable!("constant law always stores its profile"),
                };
                entries[i * d + j] = value;
                entries[j * d + i] = value;
            }
        }
        VarianceProfile::from_row_major(d, entries)
    }
}

/// Position of `(min(i, j), max(i, j))` in the packed upper triangle.
fn packed(d: usize, i: usize, j: usize) -> usize {
    let (a, b) = (i.min(j), i.max(j));
    a * d - a * (a + 1) / 2 + b
}

fn base_entry_law(law: &ProfileLaw) -> Option<EntryLaw> {
    Some(match *law {
        ProfileLaw::Rayleigh { sigma } => EntryLaw::Rayleigh { sigma },
        ProfileLaw::Uniform { a, b } => EntryLaw::Uniform { a, b },
        ProfileLaw::BernoulliScaled { p, c } => EntryLaw::BernoulliScaled { p, c },
        ProfileLaw::Exponential { lambda } => EntryLaw::Exponential { lambda },
        ProfileLaw::Constant { .. } => return None,
    })
}

impl ProfileSource for ProfileSampler {
    fn dim(&self) -> usize {
        self.d
    }

    fn sample(&self, seed: u64, draw_index: u64) -> Result<VarianceProfile> {
        self.sample_profile(seed, draw_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rayleigh(d: usize) -> ProfileSampler {
        ProfileSampler::new(d, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![]).unwrap()
    }

    #[test]
    fn packed_positions_are_a_bijection() {
        for d in 1..6 {
            let mut seen = vec![false; d * (d + 1) / 2];
            for i in 0..d {
                for j in i..d {
                    let k = packed(d, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(packed(d, j, i), k);
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn constant_law_is_degenerate() {
        let s = ProfileSampler::new(
            2,
            ProfileLaw::Constant {
                matrix: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            },
            vec![],
        )
        .unwrap();
        for seed in [0, 1, 99] {
            assert_eq!(s.sample_profile(seed, 5).unwrap(), VarianceProfile::ones(2).unwrap());
        }
        assert_eq!(s.second_moments(), vec![1.0; 4]);
    }

    #[test]
    fn rayleigh_mean_entry() {
        let s = rayleigh(3);
        let n = 100_000;
        let mean: f64 = (0..n).map(|k| s.sample_profile(11, k).unwrap().get(0, 1)).sum::<f64>() / n as f64;
        let expected = (std::f64::consts::PI / 2.0).sqrt();
        assert!((mean / expected - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn second_moments_match_sampling() {
        let laws = [
            ProfileLaw::Rayleigh { sigma: 0.7 },
            ProfileLaw::Uniform { a: -1.0, b: 2.0 },
            ProfileLaw::BernoulliScaled { p: 0.3, c: 2.0 },
            ProfileLaw::Exponential { lambda: 1.5 },
        ];
        for law in laws {
            let s = ProfileSampler::new(1, law.clone(), vec![]).unwrap();
            let n = 50_000;
            let values: Vec<f64> = (0..n).map(|k| s.sample_profile(3, k).unwrap().squared(0, 0)).collect();
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let expected = s.second_moments()[0];
            assert!((mean - expected).abs() < 4.0 * (var / n as f64).sqrt(), "{law:?}: {mean} vs {expected}");
        }
    }

    #[test]
    fn overrides_apply_symmetrically() {
        let s = ProfileSampler::new(
            3,
            ProfileLaw::Rayleigh { sigma: 1.0 },
            vec![EntryOverride {
                i: 2,
                j: 0,
                law: EntryLaw::Fixed { value: -4.0 },
            }],
        )
        .unwrap();
        let p = s.sample_profile(1, 2).unwrap();
        assert_eq!(p.get(0, 2), 4.0);
        assert_eq!(p.get(2, 0), 4.0);
        assert_eq!(s.second_moments()[2], 16.0);
        assert_eq!(s.second_moments()[6], 16.0);
        assert_eq!(s.second_moments()[1], 2.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = [
            ProfileLaw::Rayleigh { sigma: 0.0 },
            ProfileLaw::Uniform { a: 1.0, b: 1.0 },
            ProfileLaw::BernoulliScaled { p: 1.5, c: 1.0 },
            ProfileLaw::Exponential { lambda: -1.0 },
            ProfileLaw::Constant {
                matrix: vec![vec![1.0, 2.0], vec![3.0, 1.0]],
            },
        ];
        for law in bad {
            assert!(ProfileSampler::new(2, law, vec![]).is_err());
        }
        let wrong_dim = ProfileLaw::Constant { matrix: vec![vec![1.0]] };
        assert!(matches!(
            ProfileSampler::new(2, wrong_dim, vec![]),
            Err(Error::DimensionMismatch { .. })
        ));
        let outside = EntryOverride {
            i: 0,
            j: 5,
            law: EntryLaw::Fixed { value: 1.0 },
        };
        assert!(ProfileSampler::new(2, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![outside]).is_err());
        assert_eq!(
            ProfileSampler::new(0, ProfileLaw::Rayleigh { sigma: 1.0 }, vec![]),
            Err(Error::EmptyDimension)
        );
    }

    #[test]
    fn serde_round_trip() {
        let json = r#"{"law":"bernoulli_scaled","p":0.5,"c":2.0}"#;
        let law: ProfileLaw = serde_json::from_str(json).unwrap();
        assert_eq!(law, ProfileLaw::BernoulliScaled { p: 0.5, c: 2.0 });
        let o: EntryOverride = serde_json::from_str(r#"{"i":0,"j":1,"law":"fixed","value":3.0}"#).unwrap();
        assert_eq!(o.law, EntryLaw::Fixed { value: 3.0 });
    }

    proptest! {
        #[test]
        fn draws_are_valid_and_reproducible(seed in any::<u64>(), index in any::<u64>(), d in 1usize..6) {
            let s = rayleigh(d);
            let a = s.sample_profile(seed, index).unwrap();
            prop_assert_eq!(&a, &s.sample_profile(seed, index).unwrap());
            for i in 0..d {
                for j in 0..d {
                    prop_assert!(a.get(i, j) >= 0.0);
                    prop_assert_eq!(a.get(i, j), a.get(j, i));
                }
            }
            prop_assert_ne!(a, s.sample_profile(seed, index.wrapping_add(1)).unwrap());
        }
    }
}
