use std::collections::HashMap;

use bitvec::field::BitField;
use bitvec::slice::BitSlice;
use bitvec::order::Lsb0;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::placement::{Bits, CacheState};
use super::Placement;
use crate::error::{Error, Result};
use crate::subset::{combinations, UserSet};

/// Demanded file index per user. Demands must be distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Demand(Vec<usize>);

impl Demand {
    /// User `k` requests file `k`.
    pub fn identity(users: usize) -> Self {
        Demand((0..users).collect())
    }

    pub fn new(files: Vec<usize>) -> Self {
        Demand(files)
    }

    pub fn file_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    fn validate(&self, users: usize, library: usize) -> Result<()> {
        if self.0.len() != users {
            return Err(Error::Demand(format!(
                "{} entries for {users} users",
                self.0.len()
            )));
        }
        let mut seen = vec![false; library];
        for (k, &f) in self.0.iter().enumerate() {
            if f >= library {
                return Err(Error::Demand(format!(
                    "user {k} requests file {f}, library has {library}"
                )));
            }
            if std::mem::replace(&mut seen[f], true) {
                return Err(Error::Demand(format!("file {f} requested twice")));
            }
        }
        Ok(())
    }
}

/// `V_J`: the XOR of `W_{d_k | J \ {k}}` over `k` in `J`, each constituent
/// zero-padded to the longest one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub subset: UserSet,
    pub payload: Bits,
    /// Unpadded length of each constituent, `(user, bits)`.
    pub lengths: Vec<(usize, usize)>,
}

impl Codeword {
    fn constituent_len(&self, user: usize) -> Option<usize> {
        self.lengths.iter().find(|(u, _)| *u == user).map(|&(_, n)| n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodewordBatch {
    demand: Demand,
    codewords: Vec<Codeword>,
    /// SHA-256 of each user's demanded file, for decode verification.
    digests: Vec<[u8; 32]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    pub demand: Vec<usize>,
    pub codewords: usize,
    pub total_payload_bits: usize,
    /// `(subset size, codeword count, payload bits)`
    pub by_size: Vec<(usize, usize, usize)>,
}

impl CodewordBatch {
    pub fn demand(&self) -> &Demand {
        &self.demand
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn codewords_mut(&mut self) -> &mut Vec<Codeword> {
        &mut self.codewords
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Bits put on the shared link.
    pub fn total_payload_bits(&self) -> usize {
        self.codewords.iter().map(|c| c.payload.len()).sum()
    }

    pub fn summary(&self) -> BatchSummary {
        let mut by_size: Vec<(usize, usize, usize)> = Vec::new();
        for c in &self.codewords {
            let s = c.subset.len();
            match by_size.iter_mut().find(|e| e.0 == s) {
                Some(e) => {
                    e.1 += 1;
                    e.2 += c.payload.len();
                }
                None => by_size.push((s, 1, c.payload.len())),
            }
        }
        by_size.sort_unstable();
        BatchSummary {
            demand: self.demand.0.clone(),
            codewords: self.codewords.len(),
            total_payload_bits: self.total_payload_bits(),
            by_size,
        }
    }
}

fn digest(bits: &BitSlice<u8, Lsb0>) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((bits.len() as u64).to_le_bytes());
    for chunk in bits.chunks(8) {
        h.update([chunk.load_le::<u8>()]);
    }
    h.finalize().into()
}

fn xor_into(acc: &mut Bits, part: &BitSlice<u8, Lsb0>) {
    if part.len() > acc.len() {
        acc.resize(part.len(), false);
    }
    let n = part.len();
    *acc.get_mut(..n).expect("resized above") ^= part;
}

/// Delivery phase: one codeword per subset with a non-empty constituent.
/// Centralized placement only emits subsets of size `b + 1`.
pub fn build_codewords(cache: &CacheState, demand: &Demand) -> Result<CodewordBatch> {
    let params = cache.params();
    let users = params.users();
    demand.validate(users, params.files())?;

    let sizes: Vec<usize> = match params.placement() {
        Placement::Centralized => vec![params.b() + 1],
        Placement::Decentralized => (1..=users).collect(),
    };
    let mut codewords = Vec::new();
    for size in sizes {
        for subset in combinations(users, size) {
            let mut payload = Bits::new();
            let mut lengths = Vec::with_capacity(size);
            for k in subset.iter() {
                let part = cache.subfile(demand.file_of(k), subset.without(k));
                lengths.push((k, part.len()));
                xor_into(&mut payload, &part);
            }
            if lengths.iter().any(|&(_, n)| n > 0) {
                codewords.push(Codeword {
                    subset,
                    payload,
                    lengths,
                });
            }
        }
    }
    let digests = (0..users)
        .map(|k| {
            let f = cache.server_file(demand.file_of(k));
            digest(&f[..params.file_bits()])
        })
        .collect();
    Ok(CodewordBatch {
        demand: demand.clone(),
        codewords,
        digests,
    })
}

/// Recovers user `user`'s demanded file from its own cache and the batch.
///
/// Only `cache.user(user)` and the public layout are read. The reassembled
/// file is checked against the digest carried by the batch.
pub fn decode(user: usize, cache: &CacheState, batch: &CodewordBatch) -> Result<Bits> {
    let params = cache.params();
    let fail = |reason: String| Error::DecodeVerification { user, reason };
    if user >= params.users() {
        return Err(fail(format!("no such user ({} users)", params.users())));
    }
    if batch.demand.0.len() != params.users() || batch.digests.len() != params.users() {
        return Err(fail("batch was built for a different user count".into()));
    }
    let own = cache.user(user);
    let wanted = batch.demand.file_of(user);
    let by_subset: HashMap<UserSet, &Codeword> =
        batch.codewords.iter().map(|c| (c.subset, c)).collect();

    let mut file = Bits::repeat(false, params.effective_file_bits());
    for (&subset, positions) in cache.layout(wanted) {
        let piece: Bits = if subset.contains(user) {
            own.get(wanted, subset)
                .cloned()
                .ok_or_else(|| fail(format!("sub-file {subset} missing from own cache")))?
        } else {
            let target = subset.with(user);
            let cw = by_subset
                .get(&target)
                .ok_or_else(|| fail(format!("no codeword for subset {target}")))?;
            let len = cw
                .constituent_len(user)
                .ok_or_else(|| fail(format!("codeword {target} lacks a header for this user")))?;
            if len != positions.len() || cw.payload.len() < len {
                return Err(fail(format!(
                    "codeword {target} length mismatch ({len} vs {})",
                    positions.len()
                )));
            }
            let mut acc = cw.payload.clone();
            for j in target.iter().filter(|&j| j != user) {
                let (file_j, key) = (batch.demand.file_of(j), target.without(j));
                if !cache.layout(file_j).contains_key(&key) {
                    // sub-file with no bits
                    continue;
                }
                let side = own
                    .get(file_j, key)
                    .ok_or_else(|| fail(format!("side information for user {j} missing")))?;
                if side.len() > acc.len() {
                    return Err(fail(format!("codeword {target} shorter than side information")));
                }
                xor_into(&mut acc, side);
            }
            acc.truncate(len);
            acc
        };
        if piece.len() != positions.len() {
            return Err(fail(format!("sub-file {subset} has unexpected length")));
        }
        for (&p, bit) in positions.iter().zip(piece.iter()) {
            file.set(p, *bit);
        }
    }
    file.truncate(params.file_bits());
    if digest(&file) != batch.digests[user] {
        return Err(fail("reassembled file does not match its digest".into()));
    }
    Ok(file)
}
