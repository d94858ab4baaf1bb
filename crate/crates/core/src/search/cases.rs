//! Case analysis for 3-list packings of `K_{3,t}`.
//!
//! A U-side list assignment is determined up to renaming colours and
//! reordering vertices by how many colours each set of vertices shares:
//! `counts[p]` is the number of colours lying in exactly the lists of the
//! vertices in the bitmask `p`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, resource, Result};
use crate::packing::for_each_combination;
use crate::perm::{all_permutations, format_tuple, Permutation};

use super::blocking::list_extends;

/// Largest number of vertices whose list types are enumerated.
pub const MAX_TYPE_VERTICES: usize = 4;

/// A canonical type: `counts[p - 1]` colours are shared by exactly the
/// vertices in mask `p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ListType {
    a: usize,
    counts: Vec<usize>,
}

impl ListType {
    pub fn vertices(&self) -> usize {
        self.a
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Lists realizing the type. Colours are numbered from 1 in increasing
    /// order of their vertex mask.
    pub fn lists(&self) -> Vec<Vec<u32>> {
        let mut lists = vec![Vec::new(); self.a];
        let mut colour = 0u32;
        for (p, &n) in self.counts.iter().enumerate() {
            let mask = p + 1;
            for _ in 0..n {
                colour += 1;
                for (i, l) in lists.iter_mut().enumerate() {
                    if mask >> i & 1 == 1 {
                        l.push(colour);
                    }
                }
            }
        }
        lists
    }

    pub fn colour_count(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Whether all lists are pairwise different.
    pub fn has_distinct_lists(&self) -> bool {
        let lists = self.lists();
        lists.iter().collect::<BTreeSet<_>>().len() == lists.len()
    }
}

fn mask_counts(lists: &[Vec<u32>]) -> Vec<usize> {
    let a = lists.len();
    let mut counts = vec![0; (1 << a) - 1];
    let colours: BTreeSet<u32> = lists.iter().flatten().copied().collect();
    for c in colours {
        let mask = lists.iter().enumerate().filter(|(_, l)| l.contains(&c)).fold(0, |m, (i, _)| m | 1 << i);
        counts[mask - 1] += 1;
    }
    counts
}

fn permuted(counts: &[usize], a: usize, perm: &Permutation) -> Vec<usize> {
    let mut out = vec![0; counts.len()];
    for (p, &n) in counts.iter().enumerate() {
        let mask = p + 1;
        let image = (0..a).filter(|&i| mask >> i & 1 == 1).fold(0, |m, i| m | 1 << perm.image(i));
        out[image - 1] = n;
    }
    out
}

fn canonical(counts: &[usize], a: usize) -> Vec<usize> {
    all_permutations(a)
        .expect("a is small")
        .map(|p| permuted(counts, a, &p))
        .min()
        .expect("at least one permutation")
}

/// Canonical type of a list assignment (lists of any sizes).
pub fn list_type_of(lists: &[Vec<u32>]) -> Result<ListType> {
    let a = lists.len();
    if a == 0 || a > MAX_TYPE_VERTICES {
        return Err(invalid(format!("list types need 1..={MAX_TYPE_VERTICES} vertices, got {a}")));
    }
    for l in lists {
        if l.iter().collect::<BTreeSet<_>>().len() != l.len() {
            return Err(invalid(format!("list {l:?} repeats a colour")));
        }
    }
    Ok(ListType { a, counts: canonical(&mask_counts(lists), a) })
}

/// All types of `a` lists of size `k`, in increasing canonical order. With
/// `distinct`, lists must be pairwise different.
pub fn list_types(a: usize, k: usize, distinct: bool) -> Result<Vec<ListType>> {
    if a == 0 || a > MAX_TYPE_VERTICES {
        return Err(invalid(format!("list types need 1..={MAX_TYPE_VERTICES} vertices, got {a}")));
    }
    if k == 0 {
        return Err(invalid("list size must be positive"));
    }
    if k > 7 {
        return Err(resource(format!("list types are enumerated for k <= 7, got {k}")));
    }
    let mut out = BTreeSet::new();
    let mut counts = vec![0; (1 << a) - 1];
    let mut remaining = vec![k; a];
    fill(0, a, &mut counts, &mut remaining, &mut |c| {
        if canonical(c, a) == c {
            let t = ListType { a, counts: c.to_vec() };
            if !distinct || t.has_distinct_lists() {
                out.insert(t);
            }
        }
    });
    Ok(out.into_iter().collect())
}

fn fill(p: usize, a: usize, counts: &mut [usize], remaining: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if p == counts.len() {
        if remaining.iter().all(|&r| r == 0) {
            emit(counts);
        }
        return;
    }
    let mask = p + 1;
    let members: Vec<usize> = (0..a).filter(|&i| mask >> i & 1 == 1).collect();
    // Vertex i's last pattern is the largest mask containing it; its list
    // must be full after that pattern.
    let cap = members.iter().map(|&i| remaining[i]).min().unwrap_or(0);
    for n in 0..=cap {
        for &i in &members {
            remaining[i] -= n;
        }
        let feasible = (0..a).all(|i| remaining[i] == 0 || (mask + 1..1 << a).any(|m| m >> i & 1 == 1));
        if feasible {
            counts[p] = n;
            fill(p + 1, a, counts, remaining, emit);
        }
        for &i in &members {
            remaining[i] += n;
        }
    }
    counts[p] = 0;
}

/// The isomorphism types of three pairwise different 3-lists.
pub fn u_side_list_types() -> Vec<ListType> {
    list_types(3, 3, true).expect("small parameters")
}

/// Colour vectors of the U-side written as rows of colours: entry `[i][x]`
/// is the colour of `u_i` in colouring `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColourMatrix {
    rows: Vec<Vec<u32>>,
}

impl ColourMatrix {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || k == 0 || k > 64 {
            return Err(invalid("colour matrix needs at least one row of 1..=64 colours"));
        }
        for r in &rows {
            if r.len() != k {
                return Err(invalid("colour matrix rows differ in length"));
            }
            if r.iter().collect::<BTreeSet<_>>().len() != k {
                return Err(invalid(format!("row {} repeats a colour", format_tuple(r))));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.rows[0].len()
    }

    /// The lists, each sorted.
    pub fn lists(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|r| {
                let mut l = r.clone();
                l.sort_unstable();
                l
            })
            .collect()
    }

    /// All colours in increasing order.
    pub fn colours(&self) -> Vec<u32> {
        self.rows.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Whether `list` can be ordered so it differs from every row at every
    /// position.
    pub fn extends(&self, list: &[u32]) -> bool {
        let rows: Vec<&[u32]> = self.rows.iter().map(Vec::as_slice).collect();
        list.len() == self.k() && list_extends(&rows, list)
    }

    /// Every matrix obtained by reordering the rows other than the first,
    /// in lexicographic order of the reorderings.
    pub fn reorderings(&self) -> Result<Vec<ColourMatrix>> {
        let perms: Vec<Permutation> = all_permutations(self.k())?.collect();
        let mut out = vec![vec![self.rows[0].clone()]];
        for row in &self.rows[1..] {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    perms.iter().map(move |p| {
                        let mut m = prefix.clone();
                        m.push((0..row.len()).map(|x| row[p.image(x)]).collect());
                        m
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(|rows| ColourMatrix { rows }).collect())
    }

    /// Number of reorderings (first row fixed) that `list` cannot extend.
    pub fn forbidden_reorderings(&self, list: &[u32]) -> Result<usize> {
        Ok(self.reorderings()?.iter().filter(|m| !m.extends(list)).count())
    }
}

impl fmt::Display for ColourMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| format_tuple(r)).collect();
        write!(f, "{}", rows.join(","))
    }
}

impl fmt::Debug for ColourMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColourMatrix[{self}]")
    }
}

/// Whether some ordering of `v_list` is a derangement of every row of `m`.
pub fn check_case_matrix(m: &ColourMatrix, v_list: &[u32]) -> bool {
    m.extends(v_list)
}

fn subsets(universe: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut sorted = universe.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::new();
    for_each_combination(sorted.len(), k, |mask| {
        out.push((0..sorted.len()).filter(|&i| mask >> i & 1 == 1).map(|i| sorted[i]).collect());
    });
    out
}

/// The `k`-subsets of `universe` that `m` cannot extend, sorted.
pub fn blocking_lists(m: &ColourMatrix, universe: &[u32]) -> Vec<Vec<u32>> {
    subsets(universe, m.k()).into_iter().filter(|l| !m.extends(l)).collect()
}

/// The `k`-subsets of `universe` blocking `m` with row `row` in some order.
pub fn blocking_lists_any_row_order(m: &ColourMatrix, row: usize, universe: &[u32]) -> Result<Vec<Vec<u32>>> {
    if row >= m.d() {
        return Err(invalid(format!("row {row} out of range")));
    }
    let mut out = BTreeSet::new();
    for p in all_permutations(m.k())? {
        let mut rows = m.rows.clone();
        rows[row] = (0..m.k()).map(|x| m.rows[row][p.image(x)]).collect();
        out.extend(blocking_lists(&ColourMatrix { rows }, universe));
    }
    Ok(out.into_iter().collect())
}

const CASE_ROWS: [[[u32; 3]; 3]; 12] = [
    [[1, 2, 3], [1, 2, 4], [1, 3, 4]],
    [[1, 2, 3], [1, 2, 4], [1, 5, 3]],
    [[3, 2, 1], [2, 4, 1], [3, 4, 5]],
    [[1, 2, 3], [1, 2, 4], [6, 5, 3]],
    [[1, 2, 4], [1, 5, 3], [6, 2, 3]],
    [[1, 2, 3], [1, 2, 4], [1, 2, 5]],
    [[1, 2, 3], [4, 5, 6], [1, 7, 8]],
    [[1, 2, 3], [4, 5, 6], [9, 7, 8]],
    [[1, 2, 3], [1, 2, 4], [6, 1, 5]],
    [[1, 2, 3], [1, 4, 5], [6, 1, 7]],
    [[1, 2, 3], [1, 2, 4], [5, 6, 7]],
    [[1, 2, 3], [1, 4, 5], [6, 2, 7]],
];

/// The representative matrix of case `n` (1-based, `1..=12`), one per
/// type of three different 3-lists.
pub fn case_matrix(n: usize) -> Result<ColourMatrix> {
    let rows = CASE_ROWS.get(n.wrapping_sub(1)).ok_or_else(|| invalid(format!("case {n} not in 1..=12")))?;
    ColourMatrix::new(rows.iter().map(|r| r.to_vec()).collect())
}
