//! Correspondence covers and list assignments of `K_{d,t}`.
//!
//! `sigma[i][j]` matches the list of `u_i` to the list of `v_j`: position `p`
//! of `L(u_i)` is joined to position `sigma[i][j](p)` of `L(v_j)`. Colour
//! vectors are permutations from colouring index to list position, so a
//! packing needs `sigma[i][j] ∘ c(u_i)` and `c(v_j)` to be derangements of
//! each other on every edge.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};
use crate::perm::Permutation;

/// Version written into cover and assignment files.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "CoverRepr", into = "CoverRepr")]
pub struct CorrespondenceCover {
    k: usize,
    sigma: Vec<Vec<Permutation>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverRepr {
    version: u32,
    d: usize,
    t: usize,
    k: usize,
    sigma: Vec<Vec<Permutation>>,
}

impl From<CorrespondenceCover> for CoverRepr {
    fn from(c: CorrespondenceCover) -> Self {
        CoverRepr { version: FORMAT_VERSION, d: c.d(), t: c.t(), k: c.k, sigma: c.sigma }
    }
}

impl TryFrom<CoverRepr> for CorrespondenceCover {
    type Error = Error;

    fn try_from(r: CoverRepr) -> Result<Self> {
        check_version(r.version)?;
        let cover = CorrespondenceCover::new(r.sigma)?;
        if (cover.d(), cover.t(), cover.k()) != (r.d, r.t, r.k) {
            return Err(mismatch(format!(
                "declared d={}, t={}, k={} but sigma is {}x{} over k={}",
                r.d,
                r.t,
                r.k,
                cover.d(),
                cover.t(),
                cover.k()
            )));
        }
        Ok(cover)
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format version {v}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

impl CorrespondenceCover {
    /// `sigma[i][j]` for `i < d`, `j < t`.
    pub fn new(sigma: Vec<Vec<Permutation>>) -> Result<Self> {
        let d = sigma.len();
        let t = sigma.first().map_or(0, Vec::len);
        if d == 0 || t == 0 {
            return Err(invalid("cover needs d, t >= 1"));
        }
        if sigma.iter().any(|row| row.len() != t) {
            return Err(mismatch("sigma rows have different lengths"));
        }
        let k = sigma[0][0].k();
        if sigma.iter().flatten().any(|p| p.k() != k) {
            return Err(mismatch("matchings of different sizes in one cover"));
        }
        Ok(Self { k, sigma })
    }

    /// All matchings identity.
    pub fn standard(d: usize, t: usize, k: usize) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(invalid("cover needs d, t >= 1"));
        }
        let id = Permutation::identity(k)?;
        Ok(Self { k, sigma: vec![vec![id; t]; d] })
    }

    /// The 3-fold cover of `K_{2,2}` with no packing: identity everywhere
    /// except `sigma[1][1]`, which swaps positions 2 and 3.
    pub fn two_by_two_unpackable() -> Self {
        let mut c = Self::standard(2, 2, 3).expect("valid sizes");
        c.sigma[1][1] = Permutation::from_one_line(&[1, 3, 2]).expect("valid permutation");
        c
    }

    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    pub fn t(&self) -> usize {
        self.sigma[0].len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> &[Vec<Permutation>] {
        &self.sigma
    }

    pub fn get(&self, i: usize, j: usize) -> &Permutation {
        &self.sigma[i][j]
    }

    /// The `d` matchings at `v_j`.
    pub fn column(&self, j: usize) -> Vec<Permutation> {
        self.sigma.iter().map(|row| row[j].clone()).collect()
    }

    pub fn with_entry(&self, i: usize, j: usize, p: Permutation) -> Result<Self> {
        if i >= self.d() || j >= self.t() {
            return Err(invalid(format!("entry ({i},{j}) outside a {}x{} cover", self.d(), self.t())));
        }
        if p.k() != self.k {
            return Err(mismatch("replacement matching has the wrong size"));
        }
        let mut c = self.clone();
        c.sigma[i][j] = p;
        Ok(c)
    }

    /// Appends a vertex to `V` with the given `d` matchings.
    pub fn push_column(&mut self, matchings: Vec<Permutation>) -> Result<()> {
        if matchings.len() != self.d() {
            return Err(mismatch(format!("{} matchings for d={}", matchings.len(), self.d())));
        }
        if matchings.iter().any(|p| p.k() != self.k) {
            return Err(mismatch("matching has the wrong size"));
        }
        for (row, m) in self.sigma.iter_mut().zip(matchings) {
            row.push(m);
        }
        Ok(())
    }

    /// Builds a cover from its columns (the matchings at each `v_j`).
    pub fn from_columns(columns: Vec<Vec<Permutation>>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(invalid("cover needs t >= 1"));
        };
        let d = first.len();
        let mut sigma = vec![Vec::with_capacity(columns.len()); d];
        for col in columns {
            if col.len() != d {
                return Err(mismatch("columns have different lengths"));
            }
            for (row, p) in sigma.iter_mut().zip(col) {
                row.push(p);
            }
        }
        Self::new(sigma)
    }

    /// The same cover seen from the other side: `U` and `V` swap and every
    /// matching is inverted.
    pub fn transpose(&self) -> Self {
        let sigma = (0..self.t())
            .map(|j| self.sigma.iter().map(|row| row[j].inverse()).collect())
            .collect();
        Self { k: self.k, sigma }
    }

    /// Relabels each list of `V` so `sigma[0][j]` is the identity, then each
    /// list of `U` so `sigma[i][0]` is the identity. Packability and
    /// colourability are unchanged because only positions inside lists move.
    pub fn canonicalize(&self) -> Self {
        let mut sigma = self.sigma.clone();
        for j in 0..self.t() {
            let relabel = sigma[0][j].inverse();
            for row in sigma.iter_mut() {
                row[j] = relabel.compose_unchecked(&row[j]);
            }
        }
        for row in sigma.iter_mut() {
            let relabel = row[0].inverse();
            for p in row.iter_mut() {
                *p = p.compose_unchecked(&relabel);
            }
        }
        Self { k: self.k, sigma }
    }

    pub fn is_canonical(&self) -> bool {
        self.sigma[0].iter().all(Permutation::is_identity) && self.sigma.iter().all(|row| row[0].is_identity())
    }

    pub fn to_partial(&self) -> PartialMatchingCover {
        PartialMatchingCover {
            k: self.k,
            sigma: self
                .sigma
                .iter()
                .map(|row| row.iter().map(PartialInjection::from).collect())
                .collect(),
        }
    }
}

/// An injection from a subset of `[k]` into `[k]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PartialInjection {
    map: Vec<Option<u8>>,
}

impl PartialInjection {
    /// `map[p]` is the 0-based image of position `p`, if any.
    pub fn new(map: Vec<Option<u8>>) -> Result<Self> {
        let k = map.len();
        if k == 0 || k > 64 {
            return Err(invalid(format!("injection size {k} out of range")));
        }
        let mut seen = 0u64;
        for &v in map.iter().flatten() {
            if v as usize >= k {
                return Err(invalid(format!("image {} out of range for k={k}", v as usize + 1)));
            }
            if seen & 1 << v != 0 {
                return Err(invalid(format!("image {} used twice; not injective", v as usize + 1)));
            }
            seen |= 1 << v;
        }
        Ok(Self { map })
    }

    pub fn empty(k: usize) -> Result<Self> {
        Self::new(vec![None; k])
    }

    pub fn k(&self) -> usize {
        self.map.len()
    }

    pub fn image(&self, p: usize) -> Option<usize> {
        self.map[p].map(usize::from)
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// Lexicographically smallest permutation extending this injection: each
    /// unmapped position in turn takes the smallest unused image.
    pub fn complete(&self) -> Permutation {
        let mut used = self.map.iter().flatten().fold(0u64, |m, &v| m | 1 << v);
        let images = self
            .map
            .iter()
            .map(|v| {
                v.unwrap_or_else(|| {
                    let free = (!used).trailing_zeros() as u8;
                    used |= 1 << free;
                    free
                })
            })
            .collect();
        Permutation::from_images_unchecked(images)
    }
}

impl From<&Permutation> for PartialInjection {
    fn from(p: &Permutation) -> Self {
        Self { map: p.images().iter().map(|&v| Some(v)).collect() }
    }
}

/// A cover whose matchings may be partial.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PartialMatchingCover {
    k: usize,
    sigma: Vec<Vec<PartialInjection>>,
}

impl PartialMatchingCover {
    pub fn new(sigma: Vec<Vec<PartialInjection>>) -> Result<Self> {
        let d = sigma.len();
        let t = sigma.first().map_or(0, Vec::len);
        if d == 0 || t == 0 {
            return Err(invalid("cover needs d, t >= 1"));
        }
        if sigma.iter().any(|row| row.len() != t) {
            return Err(mismatch("sigma rows have different lengths"));
        }
        let k = sigma[0][0].k();
        if sigma.iter().flatten().any(|p| p.k() != k) {
            return Err(mismatch("matchings of different sizes in one cover"));
        }
        Ok(Self { k, sigma })
    }

    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    pub fn t(&self) -> usize {
        self.sigma[0].len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &PartialInjection {
        &self.sigma[i][j]
    }

    /// Completes every matching lexicographically. Completion only adds
    /// constraints, so an unpackable instance stays unpackable.
    pub fn normalize(&self) -> CorrespondenceCover {
        CorrespondenceCover {
            k: self.k,
            sigma: self
                .sigma
                .iter()
                .map(|row| row.iter().map(PartialInjection::complete).collect())
                .collect(),
        }
    }

    /// Swaps the sides, inverting every injection.
    pub fn transpose(&self) -> Self {
        let sigma = (0..self.t())
            .map(|j| {
                self.sigma
                    .iter()
                    .map(|row| {
                        let mut inv = vec![None; self.k];
                        for (p, v) in row[j].map.iter().enumerate() {
                            if let Some(v) = v {
                                inv[*v as usize] = Some(p as u8);
                            }
                        }
                        PartialInjection { map: inv }
                    })
                    .collect()
            })
            .collect();
        Self { k: self.k, sigma }
    }
}

/// Lists on both sides of `K_{a,b}`; every list has `k` distinct positive
/// colours. Lists are kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "AssignmentRepr", into = "AssignmentRepr")]
pub struct ListAssignment {
    k: usize,
    u_lists: Vec<Vec<u32>>,
    v_lists: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentRepr {
    version: u32,
    a: usize,
    b: usize,
    k: usize,
    u_lists: Vec<Vec<u32>>,
    v_lists: Vec<Vec<u32>>,
}

impl From<ListAssignment> for AssignmentRepr {
    fn from(l: ListAssignment) -> Self {
        AssignmentRepr {
            version: FORMAT_VERSION,
            a: l.a(),
            b: l.b(),
            k: l.k,
            u_lists: l.u_lists,
            v_lists: l.v_lists,
        }
    }
}

impl TryFrom<AssignmentRepr> for ListAssignment {
    type Error = Error;

    fn try_from(r: AssignmentRepr) -> Result<Self> {
        check_version(r.version)?;
        let l = ListAssignment::new(r.u_lists, r.v_lists)?;
        if (l.a(), l.b(), l.k()) != (r.a, r.b, r.k) {
            return Err(mismatch(format!(
                "declared a={}, b={}, k={} but lists give a={}, b={}, k={}",
                r.a,
                r.b,
                r.k,
                l.a(),
                l.b(),
                l.k()
            )));
        }
        Ok(l)
    }
}

impl ListAssignment {
    pub fn new(u_lists: Vec<Vec<u32>>, v_lists: Vec<Vec<u32>>) -> Result<Self> {
        if u_lists.is_empty() || v_lists.is_empty() {
            return Err(invalid("both sides need at least one vertex"));
        }
        let k = u_lists[0].len();
        if k == 0 || k > 64 {
            return Err(invalid(format!("list size {k} out of range")));
        }
        let sort = |lists: Vec<Vec<u32>>| -> Result<Vec<Vec<u32>>> {
            lists
                .into_iter()
                .map(|mut l| {
                    if l.len() != k {
                        return Err(invalid(format!("list sizes differ ({} vs {k})", l.len())));
                    }
                    if l.contains(&0) {
                        return Err(invalid("colours must be positive"));
                    }
                    l.sort_unstable();
                    if l.windows(2).any(|w| w[0] == w[1]) {
                        return Err(invalid(format!("list {l:?} repeats a colour")));
                    }
                    Ok(l)
                })
                .collect()
        };
        let u_lists = sort(u_lists)?;
        let v_lists = sort(v_lists)?;
        Ok(Self { k, u_lists, v_lists })
    }

    pub fn a(&self) -> usize {
        self.u_lists.len()
    }

    pub fn b(&self) -> usize {
        self.v_lists.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u_lists(&self) -> &[Vec<u32>] {
        &self.u_lists
    }

    pub fn v_lists(&self) -> &[Vec<u32>] {
        &self.v_lists
    }

    pub fn transpose(&self) -> Self {
        Self { k: self.k, u_lists: self.v_lists.clone(), v_lists: self.u_lists.clone() }
    }

    /// Exact partial matchings between list positions (position `p` of a
    /// list is its `p`-th smallest colour; shared colours are matched to
    /// themselves) together with their lexicographic completion.
    pub fn to_correspondence(&self) -> ListCorrespondence {
        let sigma = self
            .u_lists
            .iter()
            .map(|lu| {
                self.v_lists
                    .iter()
                    .map(|lv| {
                        let map = lu.iter().map(|c| lv.binary_search(c).ok().map(|q| q as u8)).collect();
                        PartialInjection { map }
                    })
                    .collect()
            })
            .collect();
        let partial = PartialMatchingCover { k: self.k, sigma };
        ListCorrespondence {
            cover: partial.normalize(),
            partial,
            u_colours: self.u_lists.clone(),
            v_colours: self.v_lists.clone(),
        }
    }
}

/// Result of [`ListAssignment::to_correspondence`].
#[derive(Clone, Debug)]
pub struct ListCorrespondence {
    /// Matchings that join exactly the shared colours.
    pub partial: PartialMatchingCover,
    /// Lexicographic completion of `partial`.
    pub cover: CorrespondenceCover,
    /// `u_colours[i][p]` is the colour at position `p` of `L(u_i)`.
    pub u_colours: Vec<Vec<u32>>,
    pub v_colours: Vec<Vec<u32>>,
}
