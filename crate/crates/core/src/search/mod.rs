//! Exact deciders, unpackable-cover constructors and small exact
//! chromatic-type computations.

pub mod blocking;
pub mod cases;
pub mod chi;
pub mod decide;
pub mod greedy;
pub mod hunt;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cover::{CorrespondenceCover, ListAssignment, PartialMatchingCover};
use crate::perm::Permutation;

pub use blocking::{BlockingSystem, SetCoverOutcome};
pub use decide::{
    decide_correspondence_colouring, decide_correspondence_packing, decide_list_colouring, decide_list_packing,
    decide_partial_packing,
};

/// Limits for a search. Outcomes depend only on `max_candidates` and `seed`;
/// `max_seconds` is a safety cutoff that turns into a resource error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    pub max_candidates: u64,
    pub max_seconds: Option<f64>,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_candidates: 100_000_000, max_seconds: None, seed: 0 }
    }
}

impl SearchBudget {
    pub fn with_candidates(max_candidates: u64) -> Self {
        Self { max_candidates, ..Self::default() }
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        self.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)))
    }
}

/// Colour vectors of every vertex: `u_rows[i]` for `u_i`, `v_rows[j]` for
/// `v_j`, each mapping colouring index to list position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PackingWitness {
    pub u_rows: Vec<Permutation>,
    pub v_rows: Vec<Permutation>,
}

impl PackingWitness {
    /// Checks the derangement condition on every edge. The error names the
    /// first failing edge.
    pub fn check(&self, cover: &CorrespondenceCover) -> Result<(), String> {
        self.check_partial(&cover.to_partial())
    }

    pub fn check_partial(&self, cover: &PartialMatchingCover) -> Result<(), String> {
        if self.u_rows.len() != cover.d() || self.v_rows.len() != cover.t() {
            return Err(format!(
                "witness has {}+{} rows for a cover of K_{{{},{}}}",
                self.u_rows.len(),
                self.v_rows.len(),
                cover.d(),
                cover.t()
            ));
        }
        if self.u_rows.iter().chain(&self.v_rows).any(|r| r.k() != cover.k()) {
            return Err("witness row has the wrong size".into());
        }
        for (i, u) in self.u_rows.iter().enumerate() {
            for (j, v) in self.v_rows.iter().enumerate() {
                let m = cover.get(i, j);
                for x in 0..cover.k() {
                    if m.image(u.image(x)) == Some(v.image(x)) {
                        return Err(format!(
                            "edge u{}-v{} conflicts in colouring {}",
                            i + 1,
                            j + 1,
                            x + 1
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, cover: &CorrespondenceCover) -> bool {
        self.check(cover).is_ok()
    }

    pub(crate) fn transposed(self) -> Self {
        Self { u_rows: self.v_rows, v_rows: self.u_rows }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackingOutcome {
    Packable(PackingWitness),
    NotPackable,
}

impl PackingOutcome {
    pub fn is_packable(&self) -> bool {
        matches!(self, PackingOutcome::Packable(_))
    }

    pub fn witness(&self) -> Option<&PackingWitness> {
        match self {
            PackingOutcome::Packable(w) => Some(w),
            PackingOutcome::NotPackable => None,
        }
    }
}

/// A packing of a list assignment in the original colours:
/// `u_colourings[i][x]` is the colour of `u_i` in colouring `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ListPackingWitness {
    pub u_colourings: Vec<Vec<u32>>,
    pub v_colourings: Vec<Vec<u32>>,
}

impl ListPackingWitness {
    pub fn check(&self, assignment: &ListAssignment) -> Result<(), String> {
        let k = assignment.k();
        let rows_ok = |rows: &[Vec<u32>], lists: &[Vec<u32>], side: &str| -> Result<(), String> {
            if rows.len() != lists.len() {
                return Err(format!("{side}: {} colourings for {} vertices", rows.len(), lists.len()));
            }
            for (n, (row, list)) in rows.iter().zip(lists).enumerate() {
                let mut sorted = row.clone();
                sorted.sort_unstable();
                if row.len() != k || sorted != *list {
                    return Err(format!("{side}{}: colours {row:?} are not an ordering of {list:?}", n + 1));
                }
            }
            Ok(())
        };
        rows_ok(&self.u_colourings, assignment.u_lists(), "u")?;
        rows_ok(&self.v_colourings, assignment.v_lists(), "v")?;
        for (i, u) in self.u_colourings.iter().enumerate() {
            for (j, v) in self.v_colourings.iter().enumerate() {
                if let Some(x) = (0..k).find(|&x| u[x] == v[x]) {
                    return Err(format!("edge u{}-v{} share colour {} in colouring {}", i + 1, j + 1, u[x], x + 1));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListPackingOutcome {
    Packable(ListPackingWitness),
    NotPackable,
}

impl ListPackingOutcome {
    pub fn is_packable(&self) -> bool {
        matches!(self, ListPackingOutcome::Packable(_))
    }
}

/// One proper colouring: 0-based list positions of every vertex, written
/// 1-based like every other position in the file formats.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColouringWitness {
    #[serde(with = "one_based")]
    pub u: Vec<usize>,
    #[serde(with = "one_based")]
    pub v: Vec<usize>,
}

mod one_based {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| p + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        Vec::<usize>::deserialize(d)?
            .into_iter()
            .map(|p| p.checked_sub(1).ok_or_else(|| D::Error::custom("positions are 1-based")))
            .collect()
    }
}

impl ColouringWitness {
    pub fn check(&self, cover: &CorrespondenceCover) -> Result<(), String> {
        self.check_partial(&cover.to_partial())
    }

    pub fn check_partial(&self, cover: &PartialMatchingCover) -> Result<(), String> {
        if self.u.len() != cover.d() || self.v.len() != cover.t() {
            return Err("colouring has the wrong number of vertices".into());
        }
        if self.u.iter().chain(&self.v).any(|&p| p >= cover.k()) {
            return Err("colour position out of range".into());
        }
        for (i, &cu) in self.u.iter().enumerate() {
            for (j, &cv) in self.v.iter().enumerate() {
                if cover.get(i, j).image(cu) == Some(cv) {
                    return Err(format!("edge u{}-v{} is monochromatic", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }
}

/// A proper list colouring in the original colours.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ListColouringWitness {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
}

impl ListColouringWitness {
    pub fn check(&self, assignment: &ListAssignment) -> Result<(), String> {
        if self.u.len() != assignment.a() || self.v.len() != assignment.b() {
            return Err("colouring has the wrong number of vertices".into());
        }
        for (c, l) in self.u.iter().zip(assignment.u_lists()).chain(self.v.iter().zip(assignment.v_lists())) {
            if !l.contains(c) {
                return Err(format!("colour {c} not in list {l:?}"));
            }
        }
        if let Some(c) = self.u.iter().find(|c| self.v.contains(c)) {
            return Err(format!("colour {c} used on both sides"));
        }
        Ok(())
    }
}
