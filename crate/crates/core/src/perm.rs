//! Permutations of `[k]` in one-line notation.
//!
//! Values are stored 0-based; everything that crosses a serialization
//! boundary (`Display`, `FromStr`, serde) is 1-based, e.g. `"(2,1,3)"`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, mismatch, resource, Error, Result};

/// Largest `k` accepted by [`all_permutations`] unless a caller raises it.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 9;

/// Largest ground set a [`Permutation`] can hold.
pub const MAX_K: usize = 64;

/// A bijection of `[k]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn xor(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl Permutation {
    pub fn identity(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("permutation size k must be at least 1"));
        }
        if k > MAX_K {
            return Err(invalid(format!("permutation size {k} exceeds {MAX_K}")));
        }
        Ok(Self { map: (0..k as u8).collect() })
    }

    /// Builds a permutation from 0-based images.
    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let k = images.len();
        if k == 0 || k > MAX_K {
            return Err(invalid(format!("permutation size {k} out of range 1..={MAX_K}")));
        }
        let mut seen = 0u64;
        for &v in &images {
            if v as usize >= k {
                return Err(invalid(format!("value {} out of range for k={k}", v as usize + 1)));
            }
            if seen & (1 << v) != 0 {
                return Err(invalid(format!("value {} repeated", v as usize + 1)));
            }
            seen |= 1 << v;
        }
        Ok(Self { map: images })
    }

    /// Builds a permutation from 1-based one-line notation.
    pub fn from_one_line(values: &[usize]) -> Result<Self> {
        let images = values
            .iter()
            .map(|&v| {
                if v == 0 || v > MAX_K {
                    Err(invalid(format!("value {v} is not a valid 1-based entry")))
                } else {
                    Ok((v - 1) as u8)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(images)
    }

    pub(crate) fn from_images_unchecked(images: Vec<u8>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Self { map: images }
    }

    pub fn k(&self) -> usize {
        self.map.len()
    }

    /// 0-based image of 0-based position `i`.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.map[i] as usize
    }

    pub fn images(&self) -> &[u8] {
        &self.map
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.map.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        self.check_same_k(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation { map: other.map.iter().map(|&i| self.map[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.k()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v as usize] = i as u8;
        }
        Permutation { map: inv }
    }

    /// True iff `self(i) != other(i)` for every position.
    pub fn is_derangement_of(&self, other: &Permutation) -> Result<bool> {
        self.check_same_k(other)?;
        Ok(self.map.iter().zip(&other.map).all(|(a, b)| a != b))
    }

    pub fn has_fixed_point(&self) -> bool {
        self.map.iter().enumerate().any(|(i, &v)| i == v as usize)
    }

    pub fn parity(&self) -> Parity {
        // k minus the number of cycles is the number of transpositions.
        let mut visited = vec![false; self.k()];
        let mut cycles = 0;
        for start in 0..self.k() {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.map[i] as usize;
            }
        }
        if (self.k() - cycles).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Position of this permutation in the lexicographic order of all
    /// permutations of `[k]` (0-based).
    pub fn rank(&self) -> u64 {
        let k = self.k();
        let mut used = 0u64;
        let mut rank = 0u64;
        for (i, &v) in self.map.iter().enumerate() {
            let below = (((1u64 << v) - 1) & !used).count_ones() as u64;
            rank = rank * (k - i) as u64 + below;
            used |= 1 << v;
        }
        rank
    }

    /// Inverse of [`Permutation::rank`].
    pub fn unrank(k: usize, mut rank: u64) -> Result<Permutation> {
        if k == 0 || k > 20 {
            return Err(invalid(format!("unrank supports 1 <= k <= 20, got {k}")));
        }
        let total = factorial_u64(k);
        if rank >= total {
            return Err(invalid(format!("rank {rank} out of range for k={k}")));
        }
        let mut pool: Vec<u8> = (0..k as u8).collect();
        let mut map = Vec::with_capacity(k);
        for i in 0..k {
            let block = factorial_u64(k - 1 - i);
            let idx = (rank / block) as usize;
            rank %= block;
            map.push(pool.remove(idx));
        }
        Ok(Permutation { map })
    }

    fn check_same_k(&self, other: &Permutation) -> Result<()> {
        if self.k() != other.k() {
            return Err(mismatch(format!(
                "permutations of different sizes ({} vs {})",
                self.k(),
                other.k()
            )));
        }
        Ok(())
    }
}

pub(crate) fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, self.map.iter().map(|&v| v as u64 + 1))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = parse_tuple(s)?;
        let values: Vec<usize> = values.into_iter().map(|v| v as usize).collect();
        Permutation::from_one_line(&values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, values: impl Iterator<Item = u64>) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in values.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

/// Formats a colour vector as `"(a,b,c)"`.
pub fn format_tuple(values: &[u32]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("({})", inner.join(","))
}

/// Parses `"(a,b,c)"` into positive integers. Whitespace around entries is
/// tolerated; the parentheses are required.
pub fn parse_tuple(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected parenthesised tuple, got {s:?}")))?;
    if inner.trim().is_empty() {
        return Err(Error::Parse("empty tuple".into()));
    }
    inner
        .split(',')
        .map(|part| {
            let v: u32 = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tuple entry {part:?} in {s:?}")))?;
            if v == 0 {
                return Err(Error::Parse(format!("entries are 1-based, got 0 in {s:?}")));
            }
            Ok(v)
        })
        .collect()
}

/// Iterator over all permutations of `[k]` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<u8>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { map: current })
    }
}

/// Advances `v` to its lexicographic successor; false when `v` was the last.
pub(crate) fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn all_permutations(k: usize) -> Result<Permutations> {
    all_permutations_with_limit(k, DEFAULT_ENUMERATION_LIMIT)
}

pub fn all_permutations_with_limit(k: usize, limit: usize) -> Result<Permutations> {
    if k == 0 {
        return Err(invalid("permutation size k must be at least 1"));
    }
    if k > limit {
        return Err(resource(format!(
            "enumerating all {k}! permutations exceeds the configured limit k <= {limit}"
        )));
    }
    Ok(Permutations { next: Some((0..k as u8).collect()) })
}

/// Every permutation of a small `[k]` indexed by lexicographic rank, with
/// precomputed composition and inversion tables.
///
/// The tables are quadratic in `k!`, so construction is limited to `k <= 7`.
#[derive(Debug, Clone)]
pub struct PermTable {
    k: usize,
    perms: Vec<Permutation>,
    compose: Vec<u16>,
    inverse: Vec<u16>,
}

impl PermTable {
    pub const MAX_K: usize = 7;

    pub fn new(k: usize) -> Result<Self> {
        if k > Self::MAX_K {
            return Err(resource(format!("permutation table limited to k <= {}", Self::MAX_K)));
        }
        let perms: Vec<Permutation> = all_permutations(k)?.collect();
        let n = perms.len();
        let mut compose = vec![0u16; n * n];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                compose[a * n + b] = pa.compose_unchecked(pb).rank() as u16;
            }
        }
        let inverse = perms.iter().map(|p| p.inverse().rank() as u16).collect();
        Ok(Self { k, perms, compose, inverse })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of permutations, `k!`.
    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn get(&self, rank: usize) -> &Permutation {
        &self.perms[rank]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Rank of `perm(a) ∘ perm(b)`.
    #[inline]
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.compose[a * self.perms.len() + b] as usize
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn identity_rank(&self) -> usize {
        0
    }
}
