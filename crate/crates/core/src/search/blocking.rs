//! Covers of `K_{d,t}` as set covers.
//!
//! Fix the configurations of the `d`-side (packing matrices, colourings, ...)
//! as the *elements*. Each vertex of the other side is an *option* (its
//! matchings or its list) and blocks the elements it cannot be extended
//! against. A `t`-vertex instance without packing or colouring is exactly a
//! choice of at most `t` options blocking every element.
//!
//! For correspondence covers the options fix their first matching to the
//! identity (relabelling the vertex's own list), and packing elements fix
//! their first row to the identity (relabelling colourings).

use std::time::Instant;

use rayon::prelude::*;

use crate::cover::CorrespondenceCover;
use crate::error::{invalid, resource, Error, Result};
use crate::matching::has_left_perfect_matching;
use crate::packing::{full_mask, PackingMatrix};
use crate::perm::{Permutation, PermTable};

/// Largest `options x blocked-per-option` table built unless raised.
pub const DEFAULT_TABLE_LIMIT: u64 = 200_000_000;

/// Elements, options and which options block which elements.
#[derive(Debug, Clone)]
pub struct BlockingSystem {
    n_elements: usize,
    blocked: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetCoverOutcome {
    /// Options (in the order chosen) blocking every element.
    Covered(Vec<usize>),
    NoCover,
}

impl BlockingSystem {
    /// `blocked[o]` lists the elements option `o` blocks.
    pub fn new(n_elements: usize, mut blocked: Vec<Vec<u32>>) -> Result<Self> {
        for b in blocked.iter_mut() {
            b.sort_unstable();
            b.dedup();
            if b.last().is_some_and(|&e| e as usize >= n_elements) {
                return Err(invalid("blocked element out of range"));
            }
        }
        Ok(Self { n_elements, blocked })
    }

    pub fn element_count(&self) -> usize {
        self.n_elements
    }

    pub fn option_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn blocked(&self, option: usize) -> &[u32] {
        &self.blocked[option]
    }

    /// Options blocking each element, in increasing order.
    pub fn blockers(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n_elements];
        for (o, b) in self.blocked.iter().enumerate() {
            for &e in b {
                out[e as usize].push(o as u32);
            }
        }
        out
    }

    /// Elements blocked by none of `options`.
    pub fn surviving(&self, options: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.n_elements];
        for &o in options {
            for &e in &self.blocked[o] {
                hit[e as usize] = true;
            }
        }
        (0..self.n_elements).filter(|&e| !hit[e]).collect()
    }

    /// Searches for at most `max_options` options blocking every element.
    ///
    /// Branches on the uncovered element with the fewest blockers; branch
    /// `i` excludes the options of branches `0..i`, and the result is the
    /// first cover in that branch order whatever the thread schedule.
    pub fn min_cover(&self, max_options: usize, deadline: Option<Instant>) -> Result<SetCoverOutcome> {
        if self.n_elements == 0 {
            return Ok(SetCoverOutcome::Covered(Vec::new()));
        }
        let words = self.n_elements.div_ceil(64);
        let sets: Vec<Vec<u64>> = self
            .blocked
            .iter()
            .map(|b| {
                let mut s = vec![0u64; words];
                for &e in b {
                    s[e as usize / 64] |= 1 << (e % 64);
                }
                s
            })
            .collect();
        let blockers = self.blockers();
        let ctx = CoverCtx { sets: &sets, blockers: &blockers, deadline };
        let mut uncovered = vec![0u64; words];
        for e in 0..self.n_elements {
            uncovered[e / 64] |= 1 << (e % 64);
        }
        if max_options == 0 {
            return Ok(SetCoverOutcome::NoCover);
        }
        let Some(e) = ctx.pick(&uncovered) else {
            return Ok(SetCoverOutcome::Covered(Vec::new()));
        };
        let branches = ctx.branch_order(e, &uncovered, &vec![false; self.blocked.len()]);
        let found = branches.par_iter().enumerate().find_map_first(|(n, &o)| {
            let mut excluded = vec![false; self.blocked.len()];
            for &prev in &branches[..n] {
                excluded[prev] = true;
            }
            let rest = minus(&uncovered, &sets[o]);
            let mut chosen = vec![o];
            match ctx.search(&rest, max_options - 1, &mut excluded, &mut chosen) {
                Ok(true) => Some(Ok(chosen)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        });
        Ok(match found.transpose()? {
            Some(chosen) => SetCoverOutcome::Covered(chosen),
            None => SetCoverOutcome::NoCover,
        })
    }
}

struct CoverCtx<'a> {
    sets: &'a [Vec<u64>],
    blockers: &'a [Vec<u32>],
    deadline: Option<Instant>,
}

fn minus(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & !y).collect()
}

fn count(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

fn overlap(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

impl CoverCtx<'_> {
    /// Uncovered element with the fewest blockers, lowest index on ties.
    fn pick(&self, uncovered: &[u64]) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (w, &word) in uncovered.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let e = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let n = self.blockers[e].len();
                if best.is_none_or(|(b, _)| n < b) {
                    best = Some((n, e));
                }
            }
        }
        best.map(|(_, e)| e)
    }

    /// Blockers of `e` not yet excluded, most newly covered elements first.
    fn branch_order(&self, e: usize, uncovered: &[u64], excluded: &[bool]) -> Vec<usize> {
        let mut opts: Vec<(usize, usize)> = self.blockers[e]
            .iter()
            .map(|&o| o as usize)
            .filter(|&o| !excluded[o])
            .map(|o| (overlap(uncovered, &self.sets[o]), o))
            .collect();
        opts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        opts.into_iter().map(|(_, o)| o).collect()
    }

    fn search(&self, uncovered: &[u64], depth: usize, excluded: &mut [bool], chosen: &mut Vec<usize>) -> Result<bool> {
        let remaining = count(uncovered);
        if remaining == 0 {
            return Ok(true);
        }
        if depth == 0 {
            return Ok(false);
        }
        if self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(resource("time budget exhausted during set-cover search"));
        }
        let e = self.pick(uncovered).expect("nonempty");
        let branches = self.branch_order(e, uncovered, excluded);
        // The `depth` largest gains must be able to cover the rest.
        let mut gains: Vec<usize> = (0..self.sets.len())
            .filter(|&o| !excluded[o])
            .map(|o| overlap(uncovered, &self.sets[o]))
            .collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        if gains.iter().take(depth).sum::<usize>() < remaining {
            return Ok(false);
        }
        let mut newly_excluded = Vec::new();
        let mut found = false;
        for &o in &branches {
            let rest = minus(uncovered, &self.sets[o]);
            chosen.push(o);
            if self.search(&rest, depth - 1, excluded, chosen)? {
                found = true;
                break;
            }
            chosen.pop();
            excluded[o] = true;
            newly_excluded.push(o);
        }
        for o in newly_excluded {
            excluded[o] = false;
        }
        Ok(found)
    }
}

/// Mixed-radix index of a tuple, first entry most significant.
fn encode(digits: impl Iterator<Item = usize>, base: usize) -> usize {
    digits.fold(0, |acc, x| acc * base + x)
}

fn decode(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// What the elements of a [`CoverSpace`] are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Packing matrices with first row the identity.
    Packing,
    /// Colourings of the `d`-side by list positions.
    Colouring,
}

/// All `k`-fold correspondence options for one vertex against `d` fixed
/// vertices, as a [`BlockingSystem`].
#[derive(Debug, Clone)]
pub struct CoverSpace {
    d: usize,
    k: usize,
    kind: SpaceKind,
    table: PermTable,
    base_blocked: usize,
    system: BlockingSystem,
}

impl CoverSpace {
    pub fn new(kind: SpaceKind, d: usize, k: usize) -> Result<Self> {
        Self::with_limit(kind, d, k, DEFAULT_TABLE_LIMIT)
    }

    pub fn with_limit(kind: SpaceKind, d: usize, k: usize, limit: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be positive"));
        }
        if k > PermTable::MAX_K {
            return Err(resource(format!("option tables support k <= {}, got {k}", PermTable::MAX_K)));
        }
        let table = PermTable::new(k)?;
        let n = table.len();
        let options = (n as u128).pow(d as u32 - 1);
        let elements = match kind {
            SpaceKind::Packing => options,
            SpaceKind::Colouring => (k as u128).pow(d as u32),
        };
        if elements > limit as u128 || options > limit as u128 {
            return Err(resource(format!("{elements} elements and {options} options exceed the limit of {limit}")));
        }
        // Elements blocked by the all-identity option.
        let base: Vec<Vec<usize>> = match kind {
            SpaceKind::Packing => (0..options as usize)
                .map(|e| decode(e, n, d - 1))
                .filter(|ranks| {
                    let mut rows = vec![table.get(table.identity_rank()).clone()];
                    rows.extend(ranks.iter().map(|&r| table.get(r).clone()));
                    PackingMatrix::new(rows).expect("rows share k").is_forbidden()
                })
                .collect(),
            SpaceKind::Colouring => (0..elements as usize)
                .map(|e| decode(e, k, d))
                .filter(|c| c.iter().fold(0u64, |m, &x| m | 1 << x) == full_mask(k))
                .collect(),
        };
        if options * base.len() as u128 > limit as u128 {
            return Err(resource(format!(
                "{options} options blocking {} elements each exceed the limit of {limit}",
                base.len()
            )));
        }
        let blocked = (0..options as usize)
            .into_par_iter()
            .map(|o| {
                let sigma = decode(o, n, d - 1);
                let inv: Vec<usize> = sigma.iter().map(|&s| table.inverse(s)).collect();
                base.iter()
                    .map(|f| match kind {
                        SpaceKind::Packing => {
                            encode(f.iter().zip(&inv).map(|(&fi, &si)| table.compose(si, fi)), n) as u32
                        }
                        SpaceKind::Colouring => {
                            let first = std::iter::once(f[0]);
                            let rest = f[1..].iter().zip(&inv).map(|(&fi, &si)| table.get(si).image(fi));
                            encode(first.chain(rest), k) as u32
                        }
                    })
                    .collect()
            })
            .collect();
        let system = BlockingSystem::new(elements as usize, blocked)?;
        Ok(Self { d, k, kind, table, base_blocked: base.len(), system })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn system(&self) -> &BlockingSystem {
        &self.system
    }

    /// Number of elements each option blocks.
    pub fn blocked_per_option(&self) -> usize {
        self.base_blocked
    }

    /// The `d` matchings of an option, first one the identity.
    pub fn option_column(&self, option: usize) -> Vec<Permutation> {
        let mut col = vec![self.table.get(self.table.identity_rank()).clone()];
        col.extend(decode(option, self.table.len(), self.d - 1).into_iter().map(|r| self.table.get(r).clone()));
        col
    }

    /// Option equivalent to a column of matchings after relabelling the
    /// vertex's list so the first matching is the identity.
    pub fn column_option(&self, column: &[Permutation]) -> Result<usize> {
        if column.len() != self.d || column.iter().any(|p| p.k() != self.k) {
            return Err(Error::DimensionMismatch("column does not fit this space".into()));
        }
        let relabel = column[0].inverse();
        Ok(encode(column[1..].iter().map(|p| relabel.compose_unchecked(p).rank() as usize), self.table.len()))
    }

    /// Cover whose `v_j` uses option `options[j]`.
    pub fn cover_of(&self, options: &[usize]) -> Result<CorrespondenceCover> {
        CorrespondenceCover::from_columns(options.iter().map(|&o| self.option_column(o)).collect())
    }

    /// The packing matrix (or the colouring as 0-based positions) of an
    /// element.
    pub fn element_rows(&self, element: usize) -> Vec<Vec<usize>> {
        match self.kind {
            SpaceKind::Packing => {
                let mut rows = vec![self.table.get(self.table.identity_rank()).images().iter().map(|&v| v as usize).collect()];
                rows.extend(
                    decode(element, self.table.len(), self.d - 1)
                        .into_iter()
                        .map(|r| self.table.get(r).images().iter().map(|&v| v as usize).collect()),
                );
                rows
            }
            SpaceKind::Colouring => decode(element, self.k, self.d).into_iter().map(|c| vec![c]).collect(),
        }
    }
}

/// Checks whether some bijection `[k] -> list` avoids `rows[i][x]` at every
/// position `x`; `rows` hold colours.
pub(crate) fn list_extends(rows: &[&[u32]], list: &[u32]) -> bool {
    let k = list.len();
    let mut adj = [0u64; 64];
    for (x, a) in adj.iter_mut().enumerate().take(k) {
        *a = list
            .iter()
            .enumerate()
            .filter(|(_, c)| rows.iter().all(|r| r[x] != **c))
            .fold(0u64, |m, (q, _)| m | 1 << q);
    }
    has_left_perfect_matching(&adj[..k])
}
