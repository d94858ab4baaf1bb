//! Bipartite matching between positions and colours.
//!
//! Left vertices are indexed `0..adj.len()`, right vertices are bit indices of
//! the `u64` adjacency masks, so both sides hold at most 64 vertices. Kuhn's
//! augmenting-path algorithm is plenty for the `k <= 11` instances here, and
//! scanning neighbours in increasing bit order makes every result
//! deterministic.

const NONE: u8 = u8::MAX;

/// Result of [`maximum_matching`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Right vertex matched to each left vertex.
    pub left_to_right: Vec<Option<usize>>,
    pub size: usize,
}

impl Matching {
    /// Hall deficiency of the left side: `max |A| - |N(A)|` over all subsets,
    /// which by König's theorem equals the number of unmatched left vertices.
    pub fn deficiency(&self) -> usize {
        self.left_to_right.len() - self.size
    }
}

fn try_augment(u: usize, adj: &[u64], visited: &mut u64, match_right: &mut [u8; 64], match_left: &mut [u8; 64]) -> bool {
    let mut cand = adj[u] & !*visited;
    while cand != 0 {
        let r = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if *visited & (1 << r) != 0 {
            continue;
        }
        *visited |= 1 << r;
        let owner = match_right[r];
        if owner == NONE || try_augment(owner as usize, adj, visited, match_right, match_left) {
            match_right[r] = u as u8;
            match_left[u] = r as u8;
            return true;
        }
    }
    false
}

pub fn maximum_matching(adj: &[u64]) -> Matching {
    assert!(adj.len() <= 64, "matching engine supports at most 64 left vertices");
    let mut match_right = [NONE; 64];
    let mut match_left = [NONE; 64];
    let mut size = 0;
    for u in 0..adj.len() {
        let mut visited = 0u64;
        if try_augment(u, adj, &mut visited, &mut match_right, &mut match_left) {
            size += 1;
        }
    }
    Matching {
        left_to_right: (0..adj.len())
            .map(|u| (match_left[u] != NONE).then_some(match_left[u] as usize))
            .collect(),
        size,
    }
}

/// A matching saturating every left vertex, if one exists.
pub fn left_perfect_matching(adj: &[u64]) -> Option<Vec<usize>> {
    let m = maximum_matching(adj);
    if m.size != adj.len() {
        return None;
    }
    Some(m.left_to_right.into_iter().map(|r| r.expect("saturated")).collect())
}

/// Allocation-free existence test for a left-saturating matching.
pub fn has_left_perfect_matching(adj: &[u64]) -> bool {
    debug_assert!(adj.len() <= 64);
    if adj.contains(&0) {
        return false;
    }
    let mut match_right = [NONE; 64];
    let mut match_left = [NONE; 64];
    let mut taken = 0u64;
    for u in 0..adj.len() {
        // Cheap greedy step before the full augmenting search.
        let free = adj[u] & !taken;
        if free != 0 {
            let r = free.trailing_zeros() as usize;
            match_right[r] = u as u8;
            match_left[u] = r as u8;
            taken |= 1 << r;
            continue;
        }
        let mut visited = 0u64;
        if !try_augment(u, adj, &mut visited, &mut match_right, &mut match_left) {
            return false;
        }
        taken = match_left[..=u].iter().fold(0, |m, &r| m | 1 << r);
    }
    true
}

/// Neighbourhood of a set of left vertices given as a bitmask.
#[inline]
pub fn neighbourhood(adj: &[u64], left_set: u64) -> u64 {
    let mut n = 0u64;
    let mut s = left_set;
    while s != 0 {
        let u = s.trailing_zeros() as usize;
        s &= s - 1;
        n |= adj[u];
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hall's condition by brute force over all left subsets.
    fn hall_holds(adj: &[u64]) -> bool {
        (1u64..(1 << adj.len())).all(|s| neighbourhood(adj, s).count_ones() >= s.count_ones())
    }

    fn max_deficiency_brute(adj: &[u64]) -> usize {
        (0u64..(1 << adj.len()))
            .map(|s| (s.count_ones() as isize - neighbourhood(adj, s).count_ones() as isize).max(0) as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn simple_cases() {
        assert_eq!(left_perfect_matching(&[0b01, 0b10]), Some(vec![0, 1]));
        assert_eq!(left_perfect_matching(&[0b11, 0b01]), Some(vec![1, 0]));
        assert_eq!(left_perfect_matching(&[0b01, 0b01]), None);
        assert!(!has_left_perfect_matching(&[0b01, 0b01]));
        assert!(has_left_perfect_matching(&[]));
    }

    #[test]
    fn agrees_with_hall_on_all_small_graphs() {
        // Every bipartite graph with 3 left and 3 right vertices.
        for code in 0u32..(1 << 9) {
            let adj: Vec<u64> = (0..3).map(|u| ((code >> (3 * u)) & 0b111) as u64).collect();
            let m = maximum_matching(&adj);
            assert_eq!(has_left_perfect_matching(&adj), hall_holds(&adj), "{adj:?}");
            assert_eq!(m.deficiency(), max_deficiency_brute(&adj), "{adj:?}");
            for (u, r) in m.left_to_right.iter().enumerate() {
                if let Some(r) = r {
                    assert!(adj[u] & (1 << r) != 0);
                }
            }
        }
    }
}
