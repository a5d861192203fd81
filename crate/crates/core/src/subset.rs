//! Compact user subsets for up to 64 users.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of user indices (0-based) packed into a 64-bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserSet(u64);

impl UserSet {
    pub const MAX_USERS: usize = 64;

    pub const fn empty() -> Self {
        UserSet(0)
    }

    pub const fn from_mask(mask: u64) -> Self {
        UserSet(mask)
    }

    /// All users `0..n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= Self::MAX_USERS);
        if n == 64 {
            UserSet(u64::MAX)
        } else {
            UserSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(user: usize) -> Self {
        assert!(user < Self::MAX_USERS);
        UserSet(1u64 << user)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, user: usize) -> bool {
        user < Self::MAX_USERS && self.0 & (1u64 << user) != 0
    }

    pub fn with(self, user: usize) -> Self {
        UserSet(self.0 | (1u64 << user))
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1u64 << user))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest member, i.e. the weakest user when indices follow decreasing
    /// channel order.
    pub fn max_member(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for UserSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(UserSet::empty(), UserSet::with)
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, u) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str("}")
    }
}

/// Size-`k` subsets of `0..n` in lexicographic order of their sorted members.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = UserSet> {
    assert!(n <= UserSet::MAX_USERS);
    let mut idx: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = idx.as_mut()?;
        let out: UserSet = current.iter().copied().collect();
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                idx = None;
                break;
            }
            i -= 1;
            if current[i] < n - k + i {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}
