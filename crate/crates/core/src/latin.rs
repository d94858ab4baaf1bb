//! Latin rectangles and squares: validity, exhaustive counting, and the table
//! of known square counts.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{invalid, mismatch, resource, Result};
use crate::exact::factorial;

/// Largest order counted by exhaustive enumeration unless raised explicitly.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 6;

/// Largest order with a known square count.
pub const MAX_KNOWN_ORDER: usize = 11;

/// Number of Latin squares of order 1 through 11 (McKay and Wanless,
/// "On the number of Latin squares", Ann. Comb. 9 (2005)). Each value is
/// `n! (n-1)! R(n)` for the published count `R(n)` of reduced squares; orders
/// up to 5 (6 in the long suite) are re-derived by enumeration in the tests.
const KNOWN_SQUARE_COUNTS: [&str; MAX_KNOWN_ORDER] = [
    "1",
    "2",
    "12",
    "576",
    "161280",
    "812851200",
    "61479419904000",
    "108776032459082956800",
    "5524751496156892842531225600",
    "9982437658213039871725064756920320000",
    "776966836171770144107444346734230682311065600000",
];

/// Published number of Latin squares of order `n`, for `1 <= n <= 11`.
pub fn known_latin_square_count(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(invalid("Latin square order must be at least 1"));
    }
    if n > MAX_KNOWN_ORDER {
        return Err(invalid(format!(
            "the number of Latin squares of order {n} is not known (known up to {MAX_KNOWN_ORDER})"
        )));
    }
    Ok(KNOWN_SQUARE_COUNTS[n - 1].parse().expect("table entries are decimal"))
}

/// Checks row and column distinctness of an `r x n` array with entries drawn
/// from `value_set`.
pub fn is_latin(rows: &[Vec<u32>], value_set: &[u32]) -> Result<bool> {
    let Some(first) = rows.first() else {
        return Err(mismatch("array has no rows"));
    };
    let n = first.len();
    if n == 0 {
        return Err(mismatch("array has no columns"));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(mismatch("rows have different lengths"));
    }
    if rows.len() > n {
        return Err(mismatch(format!("{} rows exceed {n} columns", rows.len())));
    }
    if let Some(bad) = rows.iter().flatten().find(|v| !value_set.contains(v)) {
        return Err(invalid(format!("entry {bad} is not in the value set")));
    }
    let rows_ok = rows.iter().all(|r| all_distinct(r.iter().copied()));
    let cols_ok = (0..n).all(|j| all_distinct(rows.iter().map(|r| r[j])));
    Ok(rows_ok && cols_ok)
}

fn all_distinct(values: impl Iterator<Item = u32>) -> bool {
    let mut seen = std::collections::HashSet::new();
    values.into_iter().all(|v| seen.insert(v))
}

/// Number of `r x n` Latin rectangles on the values `[n]`; the empty
/// rectangle (`r = 0`) counts once.
pub fn count_latin_rectangles(r: usize, n: usize) -> Result<BigUint> {
    count_latin_rectangles_with_limit(r, n, DEFAULT_ENUMERATION_LIMIT)
}

pub fn count_latin_rectangles_with_limit(r: usize, n: usize, limit: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(invalid("rectangle width must be positive"));
    }
    if r > n {
        return Err(mismatch(format!("{r} rows exceed {n} columns")));
    }
    if n > limit {
        return Err(resource(format!("enumeration limited to n <= {limit}, got {n}")));
    }
    if n > 16 {
        return Err(resource("enumeration supports n <= 16"));
    }
    if r == 0 {
        return Ok(BigUint::from(1u32));
    }
    // Relabelling values maps rectangles with first row p bijectively onto
    // rectangles with first row identity, so count those and scale by n!.
    let fixed = count_with_identity_first_row(r, n);
    Ok(factorial(n) * BigUint::from(fixed))
}

/// Number of Latin squares of order `n`: enumerated up to the enumeration
/// limit, taken from the published table above it.
pub fn count_latin_squares(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(invalid("Latin square order must be at least 1"));
    }
    if n <= DEFAULT_ENUMERATION_LIMIT {
        // The last row of a square is forced by the first n-1.
        count_latin_rectangles(n.saturating_sub(1).max(1), n)
    } else {
        known_latin_square_count(n)
    }
}

fn count_with_identity_first_row(r: usize, n: usize) -> u64 {
    let mut cols = vec![0u32; n];
    for (j, c) in cols.iter_mut().enumerate() {
        *c = 1 << j;
    }
    if r == 1 {
        return 1;
    }
    // Split over the second row so the work parallelises; the sum does not
    // depend on how rayon schedules the pieces.
    let mut second_rows = Vec::new();
    collect_rows(n, &cols, 0, 0, &mut vec![0u8; n], &mut second_rows);
    second_rows
        .par_iter()
        .map(|row| {
            let mut cols = cols.clone();
            for (j, &v) in row.iter().enumerate() {
                cols[j] |= 1 << v;
            }
            extend(r - 2, n, &mut cols)
        })
        .sum()
}

fn collect_rows(n: usize, cols: &[u32], pos: usize, used: u32, row: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == n {
        out.push(row.clone());
        return;
    }
    let mut avail = !used & !cols[pos] & ((1u32 << n) - 1);
    while avail != 0 {
        let v = avail.trailing_zeros();
        avail &= avail - 1;
        row[pos] = v as u8;
        collect_rows(n, cols, pos + 1, used | 1 << v, row, out);
    }
}

/// Counts ways to add `remaining` further rows.
fn extend(remaining: usize, n: usize, cols: &mut [u32]) -> u64 {
    if remaining == 0 {
        return 1;
    }
    fill_row(0, n, 0, remaining, cols)
}

fn fill_row(pos: usize, n: usize, used: u32, remaining: usize, cols: &mut [u32]) -> u64 {
    if pos == n {
        return extend(remaining - 1, n, cols);
    }
    let mut total = 0;
    let mut avail = !used & !cols[pos] & ((1u32 << n) - 1);
    while avail != 0 {
        let v = avail.trailing_zeros();
        avail &= avail - 1;
        cols[pos] |= 1 << v;
        total += fill_row(pos + 1, n, used | 1 << v, remaining, cols);
        cols[pos] &= !(1 << v);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_latin_examples() {
        assert!(is_latin(&[vec![1]], &[1]).unwrap());
        assert!(is_latin(&[vec![1, 2], vec![2, 1]], &[1, 2]).unwrap());
        assert!(!is_latin(&[vec![1, 2], vec![1, 2]], &[1, 2]).unwrap());
        assert!(is_latin(&[vec![1, 2], vec![2]], &[1, 2]).is_err());
        assert!(is_latin(&[vec![1], vec![1]], &[1]).is_err());
        assert!(is_latin(&[vec![1, 3]], &[1, 2]).is_err());
    }

    #[test]
    fn rectangle_examples() {
        assert_eq!(count_latin_rectangles(1, 4).unwrap(), BigUint::from(24u32));
        assert_eq!(count_latin_rectangles(3, 4).unwrap(), BigUint::from(576u32));
        assert_eq!(count_latin_rectangles(2, 3).unwrap(), BigUint::from(12u32));
        assert!(count_latin_rectangles(4, 3).is_err());
        assert!(count_latin_rectangles(2, 7).is_err());
    }

    #[test]
    fn square_counts_small() {
        let expected = [1u64, 2, 12, 576, 161280];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(count_latin_squares(i + 1).unwrap(), BigUint::from(e));
        }
    }

    #[test]
    fn table_matches_enumeration_up_to_five() {
        for n in 1..=5 {
            assert_eq!(count_latin_squares(n).unwrap(), known_latin_square_count(n).unwrap());
        }
        assert!(known_latin_square_count(12).is_err());
    }

    #[test]
    #[ignore = "long: enumerates all 812851200 squares of order 6 (with symmetry)"]
    fn table_matches_enumeration_order_six() {
        assert_eq!(count_latin_rectangles(5, 6).unwrap(), known_latin_square_count(6).unwrap());
    }
}
