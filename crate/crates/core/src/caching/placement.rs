use std::collections::BTreeMap;
use std::sync::Arc;

use bitvec::prelude::*;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Placement, SystemParams, MAX_BIT_EXACT_USERS};
use crate::error::{domain, Result};
use crate::subset::{combinations, UserSet};

/// Bit buffer used for files, sub-files and codeword payloads.
pub type Bits = BitVec<u8, Lsb0>;

/// The server's file library.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Library {
    files: Vec<Bits>,
}

impl Library {
    pub fn new(files: Vec<Bits>) -> Self {
        Self { files }
    }

    /// `files` files of `bits` uniformly random bits each.
    pub fn random(files: usize, bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..files)
            .map(|_| (0..bits).map(|_| rng.random::<bool>()).collect())
            .collect();
        Self { files }
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn file(&self, i: usize) -> &Bits {
        &self.files[i]
    }

    pub fn files(&self) -> &[Bits] {
        &self.files
    }
}

/// Sub-files held by one user, keyed by `(file index, caching subset)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserCache {
    entries: BTreeMap<(usize, UserSet), Bits>,
}

impl UserCache {
    pub fn get(&self, file: usize, subset: UserSet) -> Option<&Bits> {
        self.entries.get(&(file, subset))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, UserSet), &Bits)> {
        self.entries.iter()
    }

    pub fn cached_bits(&self) -> usize {
        self.entries.values().map(|b| b.len()).sum()
    }
}

/// Result of a placement phase.
///
/// Besides the per-user caches, the state keeps the public sub-file layout
/// (which bit positions of each file make up `W_{i|S}`) and the server's
/// copy of the (possibly padded) library.
#[derive(Clone, Debug)]
pub struct CacheState {
    params: SystemParams,
    seed: Option<u64>,
    layout: Vec<BTreeMap<UserSet, Vec<usize>>>,
    caches: Vec<UserCache>,
    library: Arc<Library>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheSummary {
    pub placement: Placement,
    pub seed: Option<u64>,
    pub users: usize,
    pub files: usize,
    pub file_bits: usize,
    pub effective_file_bits: usize,
    pub subfiles_per_file: Vec<usize>,
    pub cached_bits_per_user: Vec<usize>,
}

impl CacheState {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn placement(&self) -> Placement {
        self.params.placement()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn users(&self) -> usize {
        self.params.users()
    }

    pub fn user(&self, k: usize) -> &UserCache {
        &self.caches[k]
    }

    /// Bit positions of `W_{file|subset}` in the effective file; sub-files
    /// that ended up empty are absent.
    pub fn layout(&self, file: usize) -> &BTreeMap<UserSet, Vec<usize>> {
        &self.layout[file]
    }

    /// The sub-file `W_{file|subset}` as held by the server.
    pub fn subfile(&self, file: usize, subset: UserSet) -> Bits {
        match self.layout[file].get(&subset) {
            Some(pos) => {
                let src = self.library.file(file);
                pos.iter().map(|&p| src[p]).collect()
            }
            None => Bits::new(),
        }
    }

    pub(crate) fn server_file(&self, file: usize) -> &Bits {
        self.library.file(file)
    }

    pub fn summary(&self) -> CacheSummary {
        CacheSummary {
            placement: self.placement(),
            seed: self.seed,
            users: self.users(),
            files: self.params.files(),
            file_bits: self.params.file_bits(),
            effective_file_bits: self.params.effective_file_bits(),
            subfiles_per_file: self.layout.iter().map(|l| l.len()).collect(),
            cached_bits_per_user: self.caches.iter().map(UserCache::cached_bits).collect(),
        }
    }

    fn from_layout(
        params: &SystemParams,
        seed: Option<u64>,
        layout: Vec<BTreeMap<UserSet, Vec<usize>>>,
        library: Library,
    ) -> Self {
        let mut caches = vec![UserCache::default(); params.users()];
        for (i, per_file) in layout.iter().enumerate() {
            let src = library.file(i);
            for (&subset, positions) in per_file {
                if subset.is_empty() {
                    continue;
                }
                let bits: Bits = positions.iter().map(|&p| src[p]).collect();
                for k in subset.iter() {
                    caches[k].entries.insert((i, subset), bits.clone());
                }
            }
        }
        Self {
            params: params.clone(),
            seed,
            layout,
            caches,
            library: Arc::new(library),
        }
    }
}

fn check_library(params: &SystemParams, library: &Library) -> Result<()> {
    if params.users() > MAX_BIT_EXACT_USERS {
        return domain(format!(
            "bit-exact placement supports at most {MAX_BIT_EXACT_USERS} users"
        ));
    }
    if library.len() != params.files() {
        return domain(format!(
            "library has {} files, parameters expect {}",
            library.len(),
            params.files()
        ));
    }
    if let Some((i, f)) = library
        .files()
        .iter()
        .enumerate()
        .find(|(_, f)| f.len() != params.file_bits())
    {
        return domain(format!(
            "file {i} has {} bits, parameters expect {}",
            f.len(),
            params.file_bits()
        ));
    }
    Ok(())
}

/// Splits each file into `C(K, b)` equal sub-files, assigned to the
/// `b`-subsets in lexicographic order, and gives every user the sub-files of
/// the subsets containing it.
pub fn centralized_place(params: &SystemParams, library: Library) -> Result<CacheState> {
    if params.placement() != Placement::Centralized {
        return domain("centralized_place called with decentralized parameters");
    }
    check_library(params, &library)?;
    let parts = params.subfile_count()?;
    let eff = params.effective_file_bits();
    if !eff.is_multiple_of(parts) {
        return domain(format!("effective file size {eff} not divisible by {parts}"));
    }
    let library = if eff > params.file_bits() {
        Library::new(
            library
                .files
                .into_iter()
                .map(|mut f| {
                    f.resize(eff, false);
                    f
                })
                .collect(),
        )
    } else {
        library
    };
    let width = eff / parts;
    let per_file: BTreeMap<UserSet, Vec<usize>> = combinations(params.users(), params.b())
        .enumerate()
        .map(|(s, subset)| (subset, (s * width..(s + 1) * width).collect()))
        .collect();
    let layout = vec![per_file; params.files()];
    Ok(CacheState::from_layout(params, None, layout, library))
}

/// Every user independently caches `floor(m F)` uniformly chosen bits of
/// every file. Sub-file `W_{i|S}` collects, in position order, the bits of
/// file `i` cached by exactly the users in `S`.
pub fn decentralized_place(
    params: &SystemParams,
    library: Library,
    seed: u64,
) -> Result<CacheState> {
    if params.placement() != Placement::Decentralized {
        return domain("decentralized_place called with centralized parameters");
    }
    check_library(params, &library)?;
    let f = params.file_bits();
    let per_file = params.cached_bits_per_file();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut owners = vec![vec![0u64; f]; params.files()];
    for k in 0..params.users() {
        for file_owners in owners.iter_mut() {
            for p in index::sample(&mut rng, f, per_file) {
                file_owners[p] |= 1u64 << k;
            }
        }
    }
    let layout = owners
        .into_iter()
        .map(|file_owners| {
            let mut groups: BTreeMap<UserSet, Vec<usize>> = BTreeMap::new();
            for (p, mask) in file_owners.into_iter().enumerate() {
                groups.entry(UserSet::from_mask(mask)).or_default().push(p);
            }
            groups
        })
        .collect();
    Ok(CacheState::from_layout(params, Some(seed), layout, library))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(users: usize, m: f64, bits: usize) -> (SystemParams, Library) {
        let p = SystemParams::new(users, users, m, bits, Placement::Centralized).unwrap();
        (p, Library::random(users, bits, 7))
    }

    #[test]
    fn two_user_half_cache() {
        let (p, lib) = central(2, 0.5, 2);
        let state = centralized_place(&p, lib.clone()).unwrap();
        for i in 0..2 {
            let s0 = UserSet::singleton(0);
            let s1 = UserSet::singleton(1);
            assert_eq!(state.user(0).get(i, s0).unwrap()[..], lib.file(i)[0..1]);
            assert!(state.user(0).get(i, s1).is_none());
            assert_eq!(state.user(1).get(i, s1).unwrap()[..], lib.file(i)[1..2]);
            assert!(state.user(1).get(i, s0).is_none());
        }
    }

    #[test]
    fn zero_cache_is_empty() {
        let (p, lib) = central(3, 0.0, 5);
        let state = centralized_place(&p, lib).unwrap();
        assert_eq!(p.b(), 0);
        for k in 0..3 {
            assert_eq!(state.user(k).cached_bits(), 0);
        }
        assert_eq!(state.layout(0).keys().copied().collect::<Vec<_>>(), vec![UserSet::empty()]);
    }

    #[test]
    fn centralized_volume_and_partition() {
        let (p, lib) = central(4, 0.5, 48);
        let state = centralized_place(&p, lib.clone()).unwrap();
        for k in 0..4 {
            // m N F = 0.5 * 4 * 48
            assert_eq!(state.user(k).cached_bits(), 96);
        }
        for i in 0..4 {
            let mut rebuilt = Bits::new();
            for subset in combinations(4, 2) {
                rebuilt.extend_from_bitslice(&state.subfile(i, subset));
            }
            assert_eq!(&rebuilt, lib.file(i));
            for k in 0..4 {
                for (&(file, subset), _) in state.user(k).entries() {
                    assert!(subset.contains(k));
                    assert_eq!(subset.len(), 2);
                    let _ = file;
                }
            }
        }
    }

    #[test]
    fn padding_extends_files() {
        let p = SystemParams::new_padded(3, 3, 0.4, 10, Placement::Centralized).unwrap();
        let state = centralized_place(&p, Library::random(3, 10, 1)).unwrap();
        assert_eq!(state.summary().effective_file_bits, 12);
        assert_eq!(state.user(0).cached_bits(), 3 * 4);
    }

    #[test]
    fn decentralized_full_cache_and_determinism() {
        let p = SystemParams::new(3, 3, 1.0, 40, Placement::Decentralized).unwrap();
        let lib = Library::random(3, 40, 2);
        let state = decentralized_place(&p, lib.clone(), 9).unwrap();
        for i in 0..3 {
            let keys: Vec<_> = state.layout(i).keys().copied().collect();
            assert_eq!(keys, vec![UserSet::full(3)]);
        }
        let a = decentralized_place(&p, lib.clone(), 11).unwrap();
        let b = decentralized_place(&p, lib, 11).unwrap();
        assert_eq!(a.layout, b.layout);
        assert_eq!(a.caches, b.caches);
    }

    #[test]
    fn decentralized_memory_is_exact() {
        let p = SystemParams::new(4, 5, 0.3, 101, Placement::Decentralized).unwrap();
        let state = decentralized_place(&p, Library::random(5, 101, 3), 4).unwrap();
        for k in 0..4 {
            assert_eq!(state.user(k).cached_bits(), 30 * 5);
        }
    }

    #[test]
    fn decentralized_subfile_sizes_follow_binomial() {
        // E|W_{i|S}| = F m^j (1-m)^(K-j) with j = |S|
        let (users, m, f, trials) = (3usize, 0.3, 1000usize, 1000u64);
        let p = SystemParams::new(users, users, m, f, Placement::Decentralized).unwrap();
        let lib = Library::random(users, f, 0);
        let mut sums = vec![(0.0f64, 0.0f64); 8];
        for seed in 0..trials {
            let state = decentralized_place(&p, lib.clone(), seed).unwrap();
            for mask in 0..8u64 {
                let n = state.layout(0).get(&UserSet::from_mask(mask)).map_or(0, Vec::len) as f64;
                sums[mask as usize].0 += n;
                sums[mask as usize].1 += n * n;
            }
        }
        for (mask, (s, s2)) in sums.into_iter().enumerate() {
            let j = (mask as u64).count_ones() as i32;
            let expected = f as f64 * m.powi(j) * (1.0 - m).powi(users as i32 - j);
            let mean = s / trials as f64;
            let var = (s2 / trials as f64 - mean * mean) * trials as f64 / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            assert!((mean - expected).abs() <= 3.0 * se, "mask {mask}: {mean} vs {expected}");
        }
    }

    #[test]
    fn rejects_mismatched_library() {
        let p = SystemParams::new(2, 2, 0.5, 4, Placement::Centralized).unwrap();
        assert!(centralized_place(&p, Library::random(3, 4, 0)).is_err());
        assert!(centralized_place(&p, Library::random(2, 5, 0)).is_err());
        let d = SystemParams::new(2, 2, 0.5, 4, Placement::Decentralized).unwrap();
        assert!(centralized_place(&d, Library::random(2, 4, 0)).is_err());
    }
}
