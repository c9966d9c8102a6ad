//! Non-crossing perfect pairings of `{1, ..., m}`.

use crate::error::{Error, Result};

/// A non-crossing perfect matching of `{1, ..., m}`, pairs sorted by their
/// smaller element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoncrossingPairing {
    m: usize,
    pairs: Vec<(usize, usize)>,
}

impl NoncrossingPairing {
    /// Validates that `pairs` is a perfect, non-crossing matching of `1..=m`.
    pub fn new(m: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if m % 2 != 0 {
            return Err(Error::InvalidPairing(format!("m = {m} is odd")));
        }
        let mut partner = vec![0usize; m + 1];
        for &(a, b) in &pairs {
            if !(1 <= a && a < b && b <= m) {
                return Err(Error::InvalidPairing(format!("pair ({a}, {b}) out of range 1..={m}")));
            }
            if partner[a] != 0 || partner[b] != 0 {
                return Err(Error::InvalidPairing(format!("pair ({a}, {b}) reuses an element")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        if pairs.len() * 2 != m {
            return Err(Error::InvalidPairing("matching is not perfect".into()));
        }
        // Non-crossing iff the opens and closes nest like brackets.
        let mut open = Vec::with_capacity(m / 2);
        for k in 1..=m {
            if partner[k] > k {
                open.push(k);
            } else if open.pop() != Some(partner[k]) {
                return Err(Error::InvalidPairing(format!(
                    "pair ({}, {k}) crosses another pair",
                    partner[k]
                )));
            }
        }
        pairs.sort_unstable();
        Ok(Self { m, pairs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// For each position `1..=m` (index `k - 1`): `true` at the smaller
    /// element of its pair.
    pub fn openers(&self) -> Vec<bool> {
        let mut out = vec![false; self.m];
        for &(a, _) in &self.pairs {
            out[a - 1] = true;
        }
        out
    }
}

/// All non-crossing pairings of `{1, ..., m}`.
///
/// Order: the partner of the smallest element increases, then the inner
/// interval's pairings vary slowest. Odd `m` gives an empty list; `m = 0`
/// gives the single empty pairing.
pub fn enumerate_nc2(m: usize) -> Vec<NoncrossingPairing> {
    if m % 2 != 0 {
        return Vec::new();
    }
    intervals(1, m)
        .into_iter()
        .map(|mut pairs| {
            pairs.sort_unstable();
            NoncrossingPairing { m, pairs }
        })
        .collect()
}

/// Pairings of the interval `lo..=hi` (empty when `lo > hi`).
fn intervals(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in (lo + 1..=hi).step_by(2) {
        let inner = intervals(lo + 1, k - 1);
        let outer = intervals(k + 1, hi);
        for a in &inner {
            for b in &outer {
                let mut pairs = Vec::with_capacity(1 + a.len() + b.len());
                pairs.push((lo, k));
                pairs.extend_from_slice(a);
                pairs.extend_from_slice(b);
                out.push(pairs);
            }
        }
    }
    out
}

/// `C_k = binom(2k, k) / (k + 1)`.
pub fn catalan(k: u32) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}
