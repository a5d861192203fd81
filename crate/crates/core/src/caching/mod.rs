//! Coded-caching content layer.
//!
//! The rate-level pieces ([`load`], [`effective_weight`], [`collapse_weights`])
//! feed the scheme evaluations; the bit-level pieces ([`centralized_place`],
//! [`decentralized_place`], [`build_codewords`], [`decode`]) run an actual
//! placement and XOR delivery on random file contents.

mod delivery;
mod placement;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::subset::{binomial, UserSet};

pub use delivery::{build_codewords, decode, BatchSummary, Codeword, CodewordBatch, Demand};
pub use placement::{
    centralized_place, decentralized_place, Bits, CacheState, CacheSummary, Library, UserCache,
};

/// Upper bound on users for bit-exact placement (decentralized delivery
/// enumerates every subset).
pub const MAX_BIT_EXACT_USERS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Centralized,
    Decentralized,
}

impl Placement {
    pub const ALL: [Placement; 2] = [Placement::Centralized, Placement::Decentralized];

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Centralized => "centralized",
            Placement::Decentralized => "decentralized",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "centralized" => Ok(Placement::Centralized),
            "d" | "decentralized" => Ok(Placement::Decentralized),
            other => domain(format!("unknown placement '{other}' (expected c or d)")),
        }
    }
}

/// `floor(x * n)` that absorbs representation error in `x` (so 0.3 * 10
/// gives 3, not 2).
pub(crate) fn floor_product(x: f64, n: usize) -> usize {
    let p = x * n as f64;
    let r = p.round();
    if (p - r).abs() <= 1e-9 * p.abs().max(1.0) {
        r as usize
    } else {
        p.floor() as usize
    }
}

fn check_cache_fraction(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return domain(format!("cache fraction m = {m} outside [0, 1]"));
    }
    Ok(())
}

/// Parameters of one content-delivery system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    users: usize,
    files: usize,
    cache_fraction: f64,
    file_bits: usize,
    placement: Placement,
    padded: bool,
}

impl SystemParams {
    /// Validates the parameters. Centralized placement requires
    /// `C(K, b)` to divide `file_bits`; use [`SystemParams::new_padded`] to
    /// append zero bits instead.
    pub fn new(
        users: usize,
        files: usize,
        cache_fraction: f64,
        file_bits: usize,
        placement: Placement,
    ) -> Result<Self> {
        let params = Self::build(users, files, cache_fraction, file_bits, placement, false)?;
        if placement == Placement::Centralized {
            let parts = params.subfile_count()?;
            if !file_bits.is_multiple_of(parts) {
                return Err(Error::Divisibility {
                    file_bits,
                    users,
                    b: params.b(),
                    parts,
                });
            }
        }
        Ok(params)
    }

    /// Like [`SystemParams::new`], but centralized files are zero-padded up to
    /// the next multiple of `C(K, b)`. See [`SystemParams::effective_file_bits`].
    pub fn new_padded(
        users: usize,
        files: usize,
        cache_fraction: f64,
        file_bits: usize,
        placement: Placement,
    ) -> Result<Self> {
        Self::build(users, files, cache_fraction, file_bits, placement, true)
    }

    fn build(
        users: usize,
        files: usize,
        cache_fraction: f64,
        file_bits: usize,
        placement: Placement,
        padded: bool,
    ) -> Result<Self> {
        check_cache_fraction(cache_fraction)?;
        if users < 1 {
            return domain("need at least one user");
        }
        if files < users {
            return domain(format!("library of {files} files cannot serve {users} distinct demands"));
        }
        if file_bits < 1 {
            return domain("file size must be at least one bit");
        }
        Ok(Self {
            users,
            files,
            cache_fraction,
            file_bits,
            placement,
            padded,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn cache_fraction(&self) -> f64 {
        self.cache_fraction
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    /// `b = floor(m K)`: the number of users caching each centralized sub-file.
    pub fn b(&self) -> usize {
        floor_product(self.cache_fraction, self.users).min(self.users)
    }

    /// Number of centralized sub-files per file, `C(K, b)`.
    pub fn subfile_count(&self) -> Result<usize> {
        binomial(self.users, self.b()).ok_or_else(|| Error::Domain("C(K, b) overflows".into()))
    }

    /// File size after padding. Equal to `file_bits` unless this is a padded
    /// centralized configuration.
    pub fn effective_file_bits(&self) -> usize {
        match (self.placement, self.padded) {
            (Placement::Centralized, true) => {
                let parts = self.subfile_count().unwrap_or(1);
                self.file_bits.div_ceil(parts) * parts
            }
            _ => self.file_bits,
        }
    }

    /// Bits of each file a decentralized user caches, `floor(m F)`.
    pub fn cached_bits_per_file(&self) -> usize {
        floor_product(self.cache_fraction, self.file_bits)
    }

    pub fn load(&self) -> f64 {
        load(self.cache_fraction, self.users, self.placement).expect("validated at construction")
    }
}

/// Number of file-sized multicast transmissions `T(m, K)` needed to serve
/// `K` distinct demands.
///
/// Centralized: `(1 - m) K / (1 + m K)`. Decentralized:
/// `(1 - m) (1 - (1 - m)^K) / m`, extended by continuity to `K` at `m = 0`.
pub fn load(m: f64, users: usize, placement: Placement) -> Result<f64> {
    check_cache_fraction(m)?;
    if users < 1 {
        return domain("need at least one user");
    }
    let k = users as f64;
    Ok(match placement {
        Placement::Centralized => (1.0 - m) * k / (1.0 + m * k),
        Placement::Decentralized => {
            if m == 0.0 {
                k
            } else {
                // 1 - (1 - m)^K without cancellation for small m
                let miss_all = -(k * (-m).ln_1p()).exp_m1();
                (1.0 - m) * miss_all / m
            }
        }
    })
}

/// `phi_k = k / T(m, k)`, the collapsed priority of the k-th strongest user.
pub fn effective_weight(m: f64, k: usize, placement: Placement) -> Result<f64> {
    if m == 1.0 {
        return domain("effective weight undefined at m = 1 (zero load)");
    }
    Ok(k as f64 / load(m, k, placement)?)
}

/// `[phi_1, ..., phi_K]` for the caching weight profile.
pub fn weight_profile(m: f64, users: usize, placement: Placement) -> Result<Vec<f64>> {
    (1..=users)
        .map(|k| effective_weight(m, k, placement))
        .collect()
}

/// Subset weights `theta_S = |S| / T(m, |S|)` for every non-empty subset of
/// `users` users. Only meant for small `users`.
pub fn caching_subset_weights(
    m: f64,
    users: usize,
    placement: Placement,
) -> Result<BTreeMap<UserSet, f64>> {
    if users > MAX_BIT_EXACT_USERS {
        return domain(format!("subset enumeration limited to {MAX_BIT_EXACT_USERS} users"));
    }
    let by_size = weight_profile(m, users, placement)?;
    Ok((1u64..(1u64 << users))
        .map(|mask| {
            let s = UserSet::from_mask(mask);
            (s, by_size[s.len() - 1])
        })
        .collect())
}

/// Collapses per-subset weights to per-user effective weights.
///
/// `order[r]` is the original user at channel rank `r` (strongest first).
/// The result is indexed by rank: `phi[r]` is the largest weight of any
/// subset whose weakest member has rank `r`. Subsets absent from `theta`
/// weigh zero.
pub fn collapse_weights(
    theta: &BTreeMap<UserSet, f64>,
    users: usize,
    order: &[usize],
) -> Result<Vec<f64>> {
    if order.len() != users {
        return domain(format!("order has {} entries for {users} users", order.len()));
    }
    let mut rank = vec![usize::MAX; users];
    for (r, &u) in order.iter().enumerate() {
        if u >= users || rank[u] != usize::MAX {
            return domain("order is not a permutation of the users");
        }
        rank[u] = r;
    }
    let mut phi = vec![0.0f64; users];
    for (&subset, &w) in theta {
        if !(w >= 0.0) {
            return domain(format!("negative or NaN weight {w} for subset {subset}"));
        }
        let mut weakest: Option<usize> = None;
        for u in subset.iter() {
            let Some(&r) = rank.get(u) else {
                return domain(format!("subset {subset} references users beyond {users}"));
            };
            weakest = Some(weakest.map_or(r, |w| w.max(r)));
        }
        if let Some(r) = weakest {
            phi[r] = phi[r].max(w);
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn load_examples() {
        assert_eq!(load(0.1, 10, Placement::Centralized).unwrap(), 4.5);
        assert_eq!(load(1.0, 7, Placement::Decentralized).unwrap(), 0.0);
        assert_eq!(load(1.0, 7, Placement::Centralized).unwrap(), 0.0);
        let expected = 9.0 * (1.0 - 0.9f64.powi(10));
        assert!(close(load(0.1, 10, Placement::Decentralized).unwrap(), expected, 1e-14));
        assert!(close(expected, 5.8618, 1e-4));
        for p in Placement::ALL {
            assert_eq!(load(0.0, 13, p).unwrap(), 13.0);
        }
    }

    #[test]
    fn load_domain_errors() {
        assert!(load(-0.1, 3, Placement::Centralized).is_err());
        assert!(load(1.5, 3, Placement::Decentralized).is_err());
        assert!(load(f64::NAN, 3, Placement::Decentralized).is_err());
        assert!(load(0.5, 0, Placement::Centralized).is_err());
    }

    #[test]
    fn decentralized_load_is_continuous_at_zero() {
        let at_zero = load(0.0, 50, Placement::Decentralized).unwrap();
        let near = load(1e-12, 50, Placement::Decentralized).unwrap();
        assert!((at_zero - near).abs() < 1e-8);
    }

    #[test]
    fn effective_weight_examples() {
        let w1 = effective_weight(0.1, 1, Placement::Centralized).unwrap();
        assert!(close(w1, 1.1 / 0.9, 1e-14));
        let w10 = effective_weight(0.1, 10, Placement::Centralized).unwrap();
        assert!(close(w10, 10.0 / 4.5, 1e-14));
        assert!(effective_weight(1.0, 3, Placement::Decentralized).is_err());
    }

    #[test]
    fn effective_weight_strictly_increasing() {
        for p in Placement::ALL {
            for step in 1..20 {
                let m = step as f64 * 0.05;
                let w = weight_profile(m, 200, p).unwrap();
                for k in 1..w.len() {
                    assert!(w[k] > w[k - 1], "{p} m={m} k={}", k + 1);
                }
            }
            // without caching every user costs one full transmission: flat
            let w = weight_profile(0.0, 200, p).unwrap();
            assert!(w.iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn collapse_small_example() {
        let theta: BTreeMap<_, _> = [
            (UserSet::singleton(0), 3.0),
            (UserSet::singleton(1), 1.0),
            (UserSet::from_mask(0b11), 2.0),
        ]
        .into_iter()
        .collect();
        assert_eq!(collapse_weights(&theta, 2, &[0, 1]).unwrap(), vec![3.0, 2.0]);
        // with user 1 strongest, {0} and {0,1} both end at rank 1
        assert_eq!(collapse_weights(&theta, 2, &[1, 0]).unwrap(), vec![1.0, 3.0]);
    }

    #[test]
    fn collapse_uniform_and_missing() {
        let theta: BTreeMap<_, _> = (1u64..16).map(|m| (UserSet::from_mask(m), 0.7)).collect();
        assert_eq!(collapse_weights(&theta, 4, &[2, 0, 3, 1]).unwrap(), vec![0.7; 4]);
        let sparse: BTreeMap<_, _> = [(UserSet::from_mask(0b101), 1.5)].into_iter().collect();
        assert_eq!(collapse_weights(&sparse, 3, &[0, 1, 2]).unwrap(), vec![0.0, 0.0, 1.5]);
    }

    #[test]
    fn collapse_caching_profile_matches_effective_weight() {
        for p in Placement::ALL {
            let theta = caching_subset_weights(0.1, 4, p).unwrap();
            let phi = collapse_weights(&theta, 4, &[3, 1, 0, 2]).unwrap();
            for (k, &w) in phi.iter().enumerate() {
                assert!(close(w, effective_weight(0.1, k + 1, p).unwrap(), 1e-15));
            }
        }
    }

    #[test]
    fn collapse_rejects_bad_input() {
        let neg: BTreeMap<_, _> = [(UserSet::singleton(0), -1.0)].into_iter().collect();
        assert!(collapse_weights(&neg, 1, &[0]).is_err());
        let out_of_range: BTreeMap<_, _> = [(UserSet::singleton(5), 1.0)].into_iter().collect();
        assert!(collapse_weights(&out_of_range, 2, &[0, 1]).is_err());
        assert!(collapse_weights(&BTreeMap::new(), 2, &[0, 0]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(0, 1, 0.5, 8, Placement::Centralized).is_err());
        assert!(SystemParams::new(3, 2, 0.5, 8, Placement::Centralized).is_err());
        assert!(SystemParams::new(3, 3, 1.2, 8, Placement::Centralized).is_err());
        assert!(SystemParams::new(3, 3, 0.5, 0, Placement::Decentralized).is_err());
        // b = 1, C(3,1) = 3 does not divide 8
        let err = SystemParams::new(3, 3, 0.5, 8, Placement::Centralized).unwrap_err();
        assert!(matches!(err, Error::Divisibility { parts: 3, .. }));
        let padded = SystemParams::new_padded(3, 3, 0.5, 8, Placement::Centralized).unwrap();
        assert_eq!(padded.effective_file_bits(), 9);
        let ok = SystemParams::new(4, 4, 0.5, 48, Placement::Centralized).unwrap();
        assert_eq!(ok.b(), 2);
        assert_eq!(ok.subfile_count().unwrap(), 6);
        assert_eq!(ok.effective_file_bits(), 48);
    }

    #[test]
    fn floor_product_absorbs_rounding() {
        assert_eq!(floor_product(0.3, 10), 3);
        assert_eq!(floor_product(0.7, 10), 7);
        assert_eq!(floor_product(0.29, 100), 29);
        assert_eq!(floor_product(0.3, 1000), 300);
        assert_eq!(floor_product(0.35, 10), 3);
        assert_eq!(floor_product(0.05, 4), 0);
    }

    #[test]
    fn placement_parsing() {
        assert_eq!("c".parse::<Placement>().unwrap(), Placement::Centralized);
        assert_eq!("Decentralized".parse::<Placement>().unwrap(), Placement::Decentralized);
        assert!("x".parse::<Placement>().is_err());
    }
}
