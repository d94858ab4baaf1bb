//! Packing matrices: `d` rows, each a permutation of `[k]`, where row `i` is
//! the colour vector of `u_i` (entry `j` is the colour `u_i` receives in the
//! `j`-th colouring).
//!
//! A matrix is *forbidden* when no permutation of `[k]` is a derangement of
//! every row, i.e. the partial packing cannot be extended to a vertex whose
//! matchings to all of `u_1..u_d` are the identity.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, mismatch, Error, Result};
use crate::matching::{has_left_perfect_matching, left_perfect_matching, neighbourhood};
use crate::perm::Permutation;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PackingMatrix {
    rows: Vec<Permutation>,
}

/// Shapes of a maximal Hall obstruction of a forbidden `d x (2d-2)` matrix.
///
/// An `(a, b)` obstruction is a set of `a` positions of the sought extension
/// that can only take `b` distinct colours between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObstructionKind {
    /// `(d-1, d-2)`: `d-1` positions whose columns form a Latin rectangle on
    /// `d` colours.
    Rectangle,
    /// `(d, d-2)`: `d` positions whose columns form a Latin square.
    Square,
    /// `(d, d-1)`: `d` positions whose columns all contain the same `d-1`
    /// colours plus one extra each.
    Spread,
}

impl ObstructionKind {
    /// The `(positions, colours)` shape for `d` rows.
    pub fn shape(self, d: usize) -> (usize, usize) {
        match self {
            ObstructionKind::Rectangle => (d - 1, d - 2),
            ObstructionKind::Square => (d, d - 2),
            ObstructionKind::Spread => (d, d - 1),
        }
    }
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ObstructionKind::Rectangle => "(d-1,d-2)",
            ObstructionKind::Square => "(d,d-2)",
            ObstructionKind::Spread => "(d,d-1)",
        };
        f.write_str(name)
    }
}

/// Witness for a maximal obstruction. Positions and colours are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    pub kind: ObstructionKind,
    /// Blocked positions `J` of the extension.
    pub positions: Vec<usize>,
    /// The only colours `C` available to the positions in `J`.
    pub colours: Vec<usize>,
}

/// The two list sizes of interest for `d` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldMode {
    /// `k = 2d - 1`.
    Odd,
    /// `k = 2d - 2`.
    Even,
}

impl FoldMode {
    /// List size `k` for `d` rows.
    pub fn k(self, d: usize) -> usize {
        match self {
            FoldMode::Odd => 2 * d - 1,
            FoldMode::Even => (2 * d).saturating_sub(2),
        }
    }
}

/// Colour set `C` and position set `J` (both 1-based, sorted) such that the
/// submatrix on the positions `J` is a Latin square with values in `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinWitness {
    pub colours: Vec<usize>,
    pub positions: Vec<usize>,
}

impl PackingMatrix {
    pub fn new(rows: Vec<Permutation>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(invalid("packing matrix needs at least one row"));
        };
        let k = first.k();
        if rows.iter().any(|r| r.k() != k) {
            return Err(mismatch("packing matrix rows have different sizes"));
        }
        Ok(Self { rows })
    }

    /// Builds a matrix from 1-based rows.
    pub fn from_rows(rows: &[&[usize]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Permutation::from_one_line(r)).collect::<Result<_>>()?)
    }

    /// Builds a matrix from a `k x d` display whose columns are the colour
    /// vectors, the transposed layout used in printed tables.
    pub fn from_columns(display: &[Vec<usize>]) -> Result<Self> {
        let Some(first) = display.first() else {
            return Err(invalid("empty display"));
        };
        let d = first.len();
        if display.iter().any(|r| r.len() != d) {
            return Err(mismatch("display rows have different lengths"));
        }
        let rows = (0..d)
            .map(|i| Permutation::from_one_line(&display.iter().map(|r| r[i]).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        Self::new(rows)
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.rows[0].k()
    }

    pub fn rows(&self) -> &[Permutation] {
        &self.rows
    }

    /// Bitmask of colours (0-based) appearing at each position.
    pub fn column_masks(&self) -> Vec<u64> {
        (0..self.k())
            .map(|j| self.rows.iter().fold(0u64, |m, r| m | 1 << r.image(j)))
            .collect()
    }

    /// Bitmask of colours still admissible at each position of an extension.
    pub fn admissible_masks(&self) -> Vec<u64> {
        let full = full_mask(self.k());
        self.column_masks().into_iter().map(|m| full & !m).collect()
    }

    /// A permutation that is a derangement of every row, if one exists.
    pub fn find_common_derangement(&self) -> Option<Permutation> {
        let assignment = left_perfect_matching(&self.admissible_masks())?;
        let images = assignment.into_iter().map(|c| c as u8).collect();
        Some(Permutation::from_images_unchecked(images))
    }

    pub fn is_forbidden(&self) -> bool {
        !has_left_perfect_matching(&self.admissible_masks())
    }

    /// Replaces each row `r_i` by `matchings[i] ∘ r_i`.
    pub fn transformed(&self, matchings: &[Permutation]) -> Result<PackingMatrix> {
        if matchings.len() != self.d() {
            return Err(mismatch(format!("{} matchings for {} rows", matchings.len(), self.d())));
        }
        let rows = self
            .rows
            .iter()
            .zip(matchings)
            .map(|(r, m)| m.compose(r))
            .collect::<Result<_>>()?;
        Ok(PackingMatrix { rows })
    }

    /// Extension at a vertex whose matching to `u_i` is `matchings[i]`.
    pub fn find_extension_with_matchings(&self, matchings: &[Permutation]) -> Result<Option<Permutation>> {
        Ok(self.transformed(matchings)?.find_common_derangement())
    }

    /// Classifies the maximal Hall obstruction of a forbidden `d x (2d-2)`
    /// matrix.
    ///
    /// The violator of largest deficiency `|J| - |N(J)|` wins; ties go to the
    /// smaller `J`, then to the lexicographically smallest `J`.
    pub fn classify_obstructions(&self) -> Result<ObstructionReport> {
        let (d, k) = (self.d(), self.k());
        if d < 3 || k != 2 * d - 2 {
            return Err(invalid(format!("obstruction classification needs d >= 3 and k = 2d-2, got d={d}, k={k}")));
        }
        if !self.is_forbidden() {
            return Err(invalid("matrix is not forbidden"));
        }
        let adm = self.admissible_masks();
        let mut best: Option<(usize, u64, u64)> = None;
        for size in 1..=k {
            for_each_combination(k, size, |set| {
                let n = neighbourhood(&adm, set);
                let nsize = n.count_ones() as usize;
                if nsize < size {
                    let def = size - nsize;
                    if best.is_none_or(|(b, _, _)| def > b) {
                        best = Some((def, set, n));
                    }
                }
            });
        }
        let (_, set, n) = best.ok_or_else(|| Error::Internal("forbidden matrix without Hall violator".into()))?;
        let a = set.count_ones() as usize;
        let b = n.count_ones() as usize;
        let kind = [ObstructionKind::Rectangle, ObstructionKind::Square, ObstructionKind::Spread]
            .into_iter()
            .find(|kind| kind.shape(d) == (a, b))
            .ok_or_else(|| Error::Internal(format!("unexpected obstruction shape ({a},{b}) for d={d}")))?;
        Ok(ObstructionReport { kind, positions: mask_to_one_based(set), colours: mask_to_one_based(n) })
    }

    /// Finds `(C, J)` with `|C| = |J| = d` such that the columns at positions
    /// `J` form a Latin square on `C`; the lexicographically smallest `J` is
    /// returned.
    ///
    /// For `k = 2d-1` such a witness exists exactly when the matrix is
    /// forbidden. For `k = 2d-2` it exists exactly for the `(d, d-2)`
    /// obstructions.
    pub fn latin_witness(&self, mode: FoldMode) -> Result<Option<LatinWitness>> {
        let (d, k) = (self.d(), self.k());
        if k != mode.k(d) {
            return Err(invalid(format!("k={k} does not match the requested mode for d={d}")));
        }
        let masks = self.column_masks();
        let mut best: Option<Vec<usize>> = None;
        for (j, &m) in masks.iter().enumerate() {
            if m.count_ones() as usize != d {
                continue;
            }
            let group: Vec<usize> = (j..k).filter(|&p| masks[p] == m).take(d).collect();
            if group.len() == d && best.as_ref().is_none_or(|b| group < *b) {
                best = Some(group);
            }
        }
        Ok(best.map(|positions| LatinWitness {
            colours: mask_to_one_based(masks[positions[0]]),
            positions: positions.iter().map(|p| p + 1).collect(),
        }))
    }
}

pub(crate) fn full_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn mask_to_one_based(mut m: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
    out
}

/// Calls `f` with every `size`-subset of `0..n` as a bitmask, in
/// lexicographic order of the sorted element lists.
pub(crate) fn for_each_combination(n: usize, size: usize, mut f: impl FnMut(u64)) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(idx.iter().fold(0u64, |m, &i| m | 1 << i));
        let Some(pos) = (0..size).rev().find(|&i| idx[i] != i + n - size) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..size {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

impl fmt::Display for PackingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PackingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "PackingMatrix[{}]", rows.join(" "))
    }
}

impl FromStr for PackingMatrix {
    type Err = Error;

    /// One serialized permutation per line; blank lines are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Permutation>>>()?;
        Self::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;

    fn m(rows: &[&[usize]]) -> PackingMatrix {
        PackingMatrix::from_rows(rows).unwrap()
    }

    fn brute_forbidden(mat: &PackingMatrix) -> bool {
        !all_permutations(mat.k())
            .unwrap()
            .any(|p| mat.rows().iter().all(|r| p.is_derangement_of(r).unwrap()))
    }

    pub(crate) fn forbidden_samples() -> [PackingMatrix; 3] {
        let a = PackingMatrix::from_columns(&[
            vec![1, 2, 3, 4],
            vec![2, 1, 4, 3],
            vec![3, 4, 2, 1],
            vec![4, 3, 5, 6],
            vec![5, 6, 1, 5],
            vec![6, 5, 6, 2],
        ])
        .unwrap();
        let b = PackingMatrix::from_columns(&[
            vec![1, 2, 3, 4],
            vec![2, 1, 4, 3],
            vec![3, 4, 2, 1],
            vec![4, 3, 1, 2],
            vec![5, 6, 5, 5],
            vec![6, 5, 6, 6],
        ])
        .unwrap();
        let c = PackingMatrix::from_columns(&[
            vec![1, 2, 3, 4],
            vec![2, 1, 4, 3],
            vec![3, 6, 2, 1],
            vec![6, 3, 1, 2],
            vec![5, 4, 5, 5],
            vec![4, 5, 6, 6],
        ])
        .unwrap();
        [a, b, c]
    }

    #[test]
    fn common_derangement_examples() {
        assert_eq!(m(&[&[1, 2, 3], &[2, 1, 3]]).find_common_derangement(), None);
        let p = m(&[&[1, 2, 3], &[1, 2, 3]]).find_common_derangement().unwrap();
        assert!(!p.has_fixed_point());
        assert_eq!(m(&[&[1, 2]]).find_common_derangement().unwrap().to_string(), "(2,1)");
    }

    #[test]
    fn forbidden_examples() {
        for a in forbidden_samples() {
            assert_eq!((a.d(), a.k()), (4, 6));
            assert!(a.is_forbidden());
            assert!(brute_forbidden(&a));
        }
        let id5 = [1, 2, 3, 4, 5];
        assert!(!m(&[&id5, &id5, &id5]).is_forbidden());
        assert!(!m(&[&[1, 2, 3], &[2, 3, 1]]).is_forbidden());
    }

    #[test]
    fn sample_obstruction_kinds() {
        let kinds: Vec<_> = forbidden_samples().iter().map(|a| a.classify_obstructions().unwrap()).collect();
        assert_eq!(kinds[0].kind, ObstructionKind::Rectangle);
        assert_eq!(kinds[0].positions, vec![1, 2, 3]);
        assert_eq!(kinds[0].colours, vec![5, 6]);
        assert_eq!(kinds[1].kind, ObstructionKind::Square);
        assert_eq!(kinds[1].positions, vec![1, 2, 3, 4]);
        assert_eq!(kinds[2].kind, ObstructionKind::Spread);
        assert_eq!(kinds[2].colours, vec![4, 5, 6]);
    }

    #[test]
    fn classification_rejects_bad_input() {
        assert!(m(&[&[1, 2, 3], &[2, 1, 3]]).classify_obstructions().is_err());
        let id4 = [1, 2, 3, 4];
        assert!(m(&[&id4, &id4, &id4]).classify_obstructions().is_err());
    }

    #[test]
    fn extension_with_matchings() {
        let base = m(&[&[1, 2, 3], &[1, 2, 3]]);
        let id = Permutation::identity(3).unwrap();
        let swap23 = Permutation::from_one_line(&[1, 3, 2]).unwrap();
        let direct = m(&[&[1, 2, 3], &[1, 3, 2]]);
        let via = base.transformed(&[id.clone(), swap23.clone()]).unwrap();
        assert_eq!(via, direct);
        assert_eq!(
            base.find_extension_with_matchings(&[id.clone(), swap23]).unwrap().is_some(),
            !brute_forbidden(&direct)
        );
        assert_eq!(
            base.find_extension_with_matchings(&[id.clone(), id.clone()]).unwrap(),
            base.find_common_derangement()
        );
        assert!(base.find_extension_with_matchings(&[id]).is_err());
    }

    #[test]
    fn latin_witness_examples() {
        let w = m(&[&[1, 2, 3], &[2, 1, 3]]).latin_witness(FoldMode::Odd).unwrap().unwrap();
        assert_eq!((w.colours, w.positions), (vec![1, 2], vec![1, 2]));
        assert_eq!(m(&[&[1, 2, 3], &[2, 3, 1]]).latin_witness(FoldMode::Odd).unwrap(), None);
        let a = m(&[&[1, 2, 3, 4, 5], &[2, 3, 1, 4, 5], &[3, 1, 2, 4, 5]]);
        assert!(a.is_forbidden());
        let w = a.latin_witness(FoldMode::Odd).unwrap().unwrap();
        assert_eq!((w.colours, w.positions), (vec![1, 2, 3], vec![1, 2, 3]));
        assert!(a.latin_witness(FoldMode::Even).is_err());
        let sq = &forbidden_samples()[1];
        let w = sq.latin_witness(FoldMode::Even).unwrap().unwrap();
        assert_eq!((w.colours, w.positions), (vec![1, 2, 3, 4], vec![1, 2, 3, 4]));
        assert_eq!(forbidden_samples()[0].latin_witness(FoldMode::Even).unwrap(), None);
    }

    #[test]
    fn text_round_trip() {
        let a = &forbidden_samples()[2];
        let back: PackingMatrix = a.to_string().parse().unwrap();
        assert_eq!(&back, a);
        assert!("(1,2)\n(1,2,3)".parse::<PackingMatrix>().is_err());
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |m| seen.push(mask_to_one_based(m)));
        assert_eq!(seen.len(), 10);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(seen[0], vec![1, 2, 3]);
    }
}
