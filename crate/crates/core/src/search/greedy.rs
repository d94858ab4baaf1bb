//! Greedy construction of a cover without packing.
//!
//! Every packing matrix is blocked by the same number of options, so some
//! option blocks at least a `1/x` share of the survivors, `x` being the
//! ratio of all to forbidden matrices. Taking the best option each step
//! therefore never needs more vertices than the floored iteration.

use num_bigint::BigUint;

use super::blocking::{CoverSpace, SpaceKind};
use crate::cover::CorrespondenceCover;
use crate::error::{invalid, Error, Result};
use crate::thresholds::next_iterate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyResult {
    pub cover: CorrespondenceCover,
    /// Surviving packing matrices (first row fixed) before each step and
    /// after the last: `trace[0]` is all of them, the last entry is 0.
    pub trace: Vec<u64>,
    /// Options blocking nothing new are never chosen, so each entry is
    /// positive.
    pub removed: Vec<u64>,
    /// Matrices blocked by each option.
    pub blocked_per_option: u64,
}

impl GreedyResult {
    pub fn t(&self) -> usize {
        self.cover.t()
    }

    /// Whether every step met the averaging guarantee
    /// `X_s <= floor((1 - 1/x) X_{s-1})`.
    pub fn meets_averaging_bound(&self) -> bool {
        let x0 = BigUint::from(self.trace[0]);
        let w = BigUint::from(self.blocked_per_option);
        self.trace
            .windows(2)
            .all(|p| BigUint::from(p[1]) <= next_iterate(&BigUint::from(p[0]), &x0, &w))
    }
}

/// Builds a `k`-fold cover of `K_{d,t}` without packing, adding the option
/// that blocks the most surviving matrices (lowest index on ties, which is
/// the lexicographically smallest column of matchings).
pub fn greedy_unpackable_cover(d: usize, k: usize) -> Result<GreedyResult> {
    if d < 2 || (k != 2 * d - 1 && k != 2 * d - 2) {
        return Err(invalid(format!("greedy construction needs d >= 2 and k in {{2d-2, 2d-1}}, got d={d}, k={k}")));
    }
    let space = CoverSpace::new(SpaceKind::Packing, d, k)?;
    let system = space.system();
    let blockers = system.blockers();
    let n = system.element_count();
    let mut gain: Vec<u64> = (0..system.option_count()).map(|o| system.blocked(o).len() as u64).collect();
    let mut alive = vec![true; n];
    let mut surviving = n as u64;
    let mut trace = vec![surviving];
    let mut removed = Vec::new();
    let mut chosen = Vec::new();
    while surviving > 0 {
        let (best, &g) = gain
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .ok_or_else(|| Error::Internal("no options".into()))?;
        if g == 0 {
            return Err(Error::Internal("surviving matrices that no option blocks".into()));
        }
        for &e in system.blocked(best) {
            let e = e as usize;
            if alive[e] {
                alive[e] = false;
                for &o in &blockers[e] {
                    gain[o as usize] -= 1;
                }
            }
        }
        surviving -= g;
        chosen.push(best);
        trace.push(surviving);
        removed.push(g);
    }
    Ok(GreedyResult {
        cover: space.cover_of(&chosen)?,
        trace,
        removed,
        blocked_per_option: space.blocked_per_option() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{decide_correspondence_packing, PackingOutcome, SearchBudget};

    #[test]
    fn base_case_two_vertices() {
        let g = greedy_unpackable_cover(2, 3).unwrap();
        assert_eq!(g.t(), 2);
        assert_eq!(g.removed, vec![3, 3]);
        assert!(g.meets_averaging_bound());
        let out = decide_correspondence_packing(&g.cover, &SearchBudget::default()).unwrap();
        assert_eq!(out, PackingOutcome::NotPackable);
    }

    #[test]
    fn d3_k4_within_iteration_bound() {
        let g = greedy_unpackable_cover(3, 4).unwrap();
        assert!(g.t() <= 54, "t = {}", g.t());
        assert_eq!(g.trace[0], 576);
        assert!(g.meets_averaging_bound());
        let out = decide_correspondence_packing(&g.cover, &SearchBudget::default()).unwrap();
        assert_eq!(out, PackingOutcome::NotPackable);
    }

    #[test]
    fn rejects_other_list_sizes() {
        assert!(greedy_unpackable_cover(3, 6).is_err());
        assert!(greedy_unpackable_cover(1, 1).is_err());
    }
}
