//! Counts of forbidden packing matrices and the threshold quantities built
//! from them.
//!
//! For `d` rows and list size `k`, `X0 = (k!)^d` is the number of packing
//! matrices and `w` the number of forbidden ones. The greedy cover argument
//! removes at least a `w / X0` share of the surviving matrices per added
//! vertex, which gives the iteration and the closed-form estimates below.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{invalid, resource, Error, Result};
use crate::exact::{binomial, factorial, format_sci, ln_bounds, ratio, to_biguint, Rounding};
use crate::latin::{known_latin_square_count, MAX_KNOWN_ORDER};
use crate::matching::has_left_perfect_matching;
use crate::packing::FoldMode;
use crate::perm::{all_permutations, factorial_u64};

/// Largest number of fixed-first-row matrices [`forbidden_count_brute`]
/// visits unless a caller raises it.
pub const DEFAULT_BRUTE_BUDGET: u64 = 50_000_000;

/// Largest `k` the brute-force counter handles (one byte per position).
pub const MAX_BRUTE_K: usize = 8;

/// Default step limit for the exact iteration in [`threshold_table`]; the
/// iteration only runs when the estimate is within the limit, which covers
/// `d <= 4`.
pub const DEFAULT_ITERATION_LIMIT: u64 = 1_000_000;

fn check_d(d: usize, min: usize) -> Result<()> {
    if d < min || d > MAX_KNOWN_ORDER {
        return Err(invalid(format!("d must lie in {min}..={MAX_KNOWN_ORDER}, got {d}")));
    }
    Ok(())
}

/// Number of forbidden `d x (2d-1)` packing matrices,
/// `C(2d-1, d)^2 ((d-1)!)^d N(d)`.
pub fn w_odd(d: usize) -> Result<BigUint> {
    check_d(d, 2)?;
    let c = binomial(2 * d - 1, d);
    Ok(&c * &c * factorial(d - 1).pow(d as u32) * known_latin_square_count(d)?)
}

/// The three partial counts whose combination `w1 - (d-1) w2 + w3` is the
/// number of forbidden `d x (2d-2)` matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenSubcounts {
    /// Matrices with `d-1` positions forming a Latin rectangle on `d`
    /// colours, counted once per such position set.
    pub w1: BigUint,
    /// Matrices with `d` positions forming a Latin square.
    pub w2: BigUint,
    /// Matrices whose only obstruction is `d` positions sharing `d-1`
    /// colours.
    pub w3: BigUint,
}

pub fn w_even_subcounts(d: usize) -> Result<EvenSubcounts> {
    check_d(d, 3)?;
    let n = known_latin_square_count(d)?;
    let c_d = binomial(2 * d - 2, d);
    let c_d1 = binomial(2 * d - 2, d - 1);
    let f1 = factorial(d - 1).pow(d as u32);
    let f2 = factorial(d - 2).pow(d as u32);
    let dm1 = BigUint::from(d - 1);
    let w1 = &n * &c_d * &c_d1 * &f1;
    let w2 = &n * &c_d * &c_d * &f2;
    let w3 = &n * &c_d * &c_d1 * (&f1 - dm1.pow(3) * &f2);
    Ok(EvenSubcounts { w1, w2, w3 })
}

/// Number of forbidden `d x (2d-2)` packing matrices, evaluated from the
/// closed form in exact rationals and cross-checked against
/// [`w_even_subcounts`].
pub fn w_even(d: usize) -> Result<BigUint> {
    check_d(d, 3)?;
    let n = BigInt::from(known_latin_square_count(d)?);
    let big = |v: BigUint| BigRational::from_integer(BigInt::from(v));
    let dd = BigInt::from(d);
    let dm1 = BigRational::from_integer(BigInt::from(d - 1));
    let bracket = big(factorial(d - 1).pow(d as u32)) * BigRational::from_integer(BigInt::from(2))
        - &dm1 * &dm1 * (&dm1 + BigRational::new(BigInt::one(), dd)) * big(factorial(d - 2).pow(d as u32));
    let value = BigRational::from_integer(n)
        * big(binomial(2 * d - 2, d))
        * big(binomial(2 * d - 2, d - 1))
        * bracket;
    let w = to_biguint(&value)
        .ok_or_else(|| Error::Internal(format!("forbidden-count formula is not a nonnegative integer at d={d}")))?;
    let s = w_even_subcounts(d)?;
    if &s.w1 + &s.w3 != &w + BigUint::from(d - 1) * &s.w2 {
        return Err(Error::Internal(format!("partial counts disagree with the closed form at d={d}")));
    }
    Ok(w)
}

/// `(k!)^d`, the number of `d x k` packing matrices.
pub fn total_matrices(d: usize, k: usize) -> BigUint {
    factorial(k).pow(d as u32)
}

/// `(w, X0)` for the given list size.
pub fn counts(d: usize, mode: FoldMode) -> Result<(BigUint, BigUint)> {
    let w = match mode {
        FoldMode::Odd => w_odd(d)?,
        FoldMode::Even => w_even(d)?,
    };
    Ok((w, total_matrices(d, mode.k(d))))
}

/// `((2d-1)!)^d / w_odd(d)`.
pub fn x_ratio(d: usize) -> Result<BigRational> {
    let (w, x0) = counts(d, FoldMode::Odd)?;
    Ok(ratio(&x0, &w))
}

/// `((2d-2)!)^d / w_even(d)`.
pub fn y_ratio(d: usize) -> Result<BigRational> {
    let (w, x0) = counts(d, FoldMode::Even)?;
    Ok(ratio(&x0, &w))
}

/// Number of forbidden `d x k` matrices with the first row fixed to the
/// identity, by exhaustive Hall checks.
pub fn forbidden_count_fixed_first_row(d: usize, k: usize, budget: u64) -> Result<u64> {
    if d == 0 || k == 0 {
        return Err(invalid("d and k must be positive"));
    }
    if k > MAX_BRUTE_K {
        return Err(resource(format!("brute-force counting supports k <= {MAX_BRUTE_K}, got {k}")));
    }
    let candidates = (factorial_u64(k) as u128).checked_pow(d as u32 - 1).unwrap_or(u128::MAX);
    if candidates > budget as u128 {
        return Err(resource(format!(
            "{candidates} matrices with fixed first row exceed the budget of {budget}"
        )));
    }
    // Byte j of a packed row holds the colour bit of position j, so OR-ing
    // packed rows yields every column's colour set at once.
    let packed: Vec<u64> = all_permutations(k)?
        .map(|p| p.images().iter().enumerate().fold(0u64, |acc, (j, &c)| acc | (1u64 << c) << (8 * j)))
        .collect();
    let first = packed[0];
    if d == 1 {
        return Ok(u64::from(is_forbidden_packed(first, k)));
    }
    Ok(packed
        .par_iter()
        .map(|&second| count_rows(&packed, first | second, d - 2, k))
        .sum())
}

fn count_rows(packed: &[u64], acc: u64, remaining: usize, k: usize) -> u64 {
    if remaining == 0 {
        return u64::from(is_forbidden_packed(acc, k));
    }
    packed.iter().map(|&row| count_rows(packed, acc | row, remaining - 1, k)).sum()
}

fn is_forbidden_packed(columns: u64, k: usize) -> bool {
    let full = (1u64 << k) - 1;
    let mut adj = [0u64; MAX_BRUTE_K];
    for (j, a) in adj.iter_mut().enumerate().take(k) {
        *a = !(columns >> (8 * j)) & full;
    }
    !has_left_perfect_matching(&adj[..k])
}

/// Number of forbidden `d x k` packing matrices: the fixed-first-row count
/// times `k!`, since relabelling colours permutes matrices while preserving
/// forbiddenness.
pub fn forbidden_count_brute(d: usize, k: usize, budget: u64) -> Result<BigUint> {
    Ok(factorial(k) * forbidden_count_fixed_first_row(d, k, budget)?)
}

/// `floor((1 - w/X0) X)`, written as `X - ceil(X w / X0)`.
pub fn next_iterate(x: &BigUint, x0: &BigUint, w: &BigUint) -> BigUint {
    let removed = (x * w + x0 - 1u32) / x0;
    x - removed.min(x.clone())
}

/// Steps of `X_s = X_{s-1} - ceil(X_{s-1} w / X0)` from `X0` down to zero.
pub fn iteration_bound(x0: &BigUint, w: &BigUint) -> Result<BigUint> {
    iteration_bound_limited(x0, w, u64::MAX)?.ok_or_else(|| resource("iteration did not terminate"))
}

/// Like [`iteration_bound`], giving up with `None` after `max_steps`.
pub fn iteration_bound_limited(x0: &BigUint, w: &BigUint, max_steps: u64) -> Result<Option<BigUint>> {
    check_counts(x0, w)?;
    if x0.bits() + w.bits() <= 128 {
        let x0 = x0.to_u128().expect("fits");
        let w = w.to_u128().expect("fits");
        let mut x = x0;
        let mut steps = 0u64;
        while x > 0 {
            if steps == max_steps {
                return Ok(None);
            }
            x -= (x * w).div_ceil(x0);
            steps += 1;
        }
        return Ok(Some(BigUint::from(steps)));
    }
    let mut x = x0.clone();
    let mut steps = 0u64;
    while !x.is_zero() {
        if steps == max_steps {
            return Ok(None);
        }
        x = next_iterate(&x, x0, w);
        steps += 1;
    }
    Ok(Some(BigUint::from(steps)))
}

fn check_counts(x0: &BigUint, w: &BigUint) -> Result<()> {
    if w.is_zero() {
        return Err(invalid("w must be positive"));
    }
    if w > x0 {
        return Err(invalid("w must not exceed X0"));
    }
    Ok(())
}

/// `[lo, hi]` enclosing `ln(n)` with `prec` fractional bits.
fn ln_interval(n: &BigUint, prec: u32) -> (BigRational, BigRational) {
    let (lo, hi) = ln_bounds(n, prec);
    let den = BigInt::one() << prec;
    (BigRational::new(lo, den.clone()), BigRational::new(hi, den))
}

/// Ceiling of a real number given by ever tighter enclosures.
fn certified_ceil(enclose: impl Fn(u32) -> Option<(BigRational, BigRational)>) -> Result<BigUint> {
    let mut prec = 64;
    while prec <= 1 << 16 {
        if let Some((lo, hi)) = enclose(prec) {
            let (lo, hi) = (lo.ceil(), hi.ceil());
            if lo == hi {
                return lo
                    .to_integer()
                    .to_biguint()
                    .ok_or_else(|| Error::Internal("negative estimate".into()));
            }
        }
        prec *= 2;
    }
    Err(resource("could not separate the estimate from an integer"))
}

/// `ceil(x (ln w + 1))` with `x = X0 / w`, i.e. `x (ln X0 - ln x + 1)`.
/// Upper bound on [`iteration_bound`]; this is the estimate printed next to
/// the floored iteration in the threshold table.
pub fn estimate_bound(x0: &BigUint, w: &BigUint) -> Result<BigUint> {
    check_counts(x0, w)?;
    let x = ratio(x0, w);
    certified_ceil(|p| {
        let (lo, hi) = ln_interval(w, p);
        let one = BigRational::one();
        Some((&x * (lo + &one), &x * (hi + one)))
    })
}

/// `ceil(log_{1-1/x}(x / X0) + x)`: steps until at most `x` matrices survive
/// under the unfloored recursion, plus `x` single-removal steps.
pub fn log_estimate(x0: &BigUint, w: &BigUint) -> Result<BigUint> {
    check_counts(x0, w)?;
    if w == x0 {
        return Err(invalid("log estimate needs w < X0"));
    }
    let x = ratio(x0, w);
    let rest = x0 - w;
    certified_ceil(|p| {
        // log_{1-1/x}(x/X0) = ln w / (ln X0 - ln(X0 - w)).
        let (num_lo, num_hi) = ln_interval(w, p);
        let (a_lo, a_hi) = ln_interval(x0, p);
        let (b_lo, b_hi) = ln_interval(&rest, p);
        let den_lo = a_lo - b_hi;
        let den_hi = a_hi - b_lo;
        if den_lo <= BigRational::zero() {
            return None;
        }
        Some((num_lo / den_hi + &x, num_hi / den_lo + &x))
    })
}

/// `ceil(x ln X0)`, the coarsest estimate of the greedy argument.
pub fn total_log_estimate(x0: &BigUint, w: &BigUint) -> Result<BigUint> {
    check_counts(x0, w)?;
    let x = ratio(x0, w);
    certified_ceil(|p| {
        let (lo, hi) = ln_interval(x0, p);
        Some((&x * lo, &x * hi))
    })
}

/// Threshold quantities for one `d` and list size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdRow {
    pub d: usize,
    pub mode: FoldMode,
    pub k: usize,
    /// Forbidden matrices.
    pub w: BigUint,
    /// All matrices, `(k!)^d`.
    pub x0: BigUint,
    /// `X0 / w`.
    pub ratio: BigRational,
    /// Exact floored iteration; `None` when it exceeded the step limit.
    pub iteration: Option<BigUint>,
    /// See [`estimate_bound`].
    pub estimate: BigUint,
    /// See [`log_estimate`].
    pub log_estimate: BigUint,
    /// See [`total_log_estimate`].
    pub total_log_estimate: BigUint,
}

/// Values at or above this print in scientific notation.
const SCI_THRESHOLD: u64 = 1_000_000_000_000_000_000;

impl ThresholdRow {
    pub fn new(d: usize, mode: FoldMode, iteration_limit: u64) -> Result<Self> {
        let (w, x0) = counts(d, mode)?;
        let estimate = estimate_bound(&x0, &w)?;
        // Only attempted when the estimate, which bounds the step count,
        // fits within the limit.
        let iteration = if estimate <= BigUint::from(iteration_limit) {
            iteration_bound_limited(&x0, &w, iteration_limit)?
        } else {
            None
        };
        Ok(Self {
            d,
            mode,
            k: mode.k(d),
            ratio: ratio(&x0, &w),
            iteration,
            estimate,
            log_estimate: log_estimate(&x0, &w)?,
            total_log_estimate: total_log_estimate(&x0, &w)?,
            w,
            x0,
        })
    }

    /// Number of vertices the greedy argument needs: the exact iteration when
    /// known, the estimate otherwise.
    pub fn greedy_bound(&self) -> &BigUint {
        self.iteration.as_ref().unwrap_or(&self.estimate)
    }

    /// Greedy bound as printed: `"54 (62)"` when the iteration improves on
    /// the estimate, 3 significant digits rounded up for large values.
    pub fn greedy_cell(&self) -> String {
        let show = |v: &BigUint| {
            if *v >= BigUint::from(SCI_THRESHOLD) {
                format_sci(&BigRational::from_integer(BigInt::from(v.clone())), 3, Rounding::Up)
            } else {
                v.to_string()
            }
        };
        match &self.iteration {
            Some(it) if *it < self.estimate => format!("{} ({})", show(it), show(&self.estimate)),
            _ => show(&self.estimate),
        }
    }

    /// `X0 / w` as printed: exact when integral, otherwise 3 significant
    /// digits rounded down.
    pub fn ratio_cell(&self) -> String {
        if self.ratio.is_integer() {
            self.ratio.to_integer().to_string()
        } else {
            format_sci(&self.ratio, 3, Rounding::Down)
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "k": self.k,
            "w": self.w.to_string(),
            "x0": self.x0.to_string(),
            "ratio": self.ratio.to_string(),
            "ratio_is_integer": self.ratio.is_integer(),
            "iteration": self.iteration.as_ref().map(ToString::to_string),
            "estimate": self.estimate.to_string(),
            "log_estimate": self.log_estimate.to_string(),
            "total_log_estimate": self.total_log_estimate.to_string(),
        })
    }
}

/// One line of the threshold table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableLine {
    pub d: usize,
    /// Lists of size `2d-2`: bounds the least `t` with a `(2d-2)`-fold cover
    /// of `K_{d,t}` without packing from above. Absent for `d = 2`.
    pub upper: Option<ThresholdRow>,
    /// Lists of size `2d-1`: every `(2d-1)`-fold cover of `K_{d,t}` packs
    /// for `t` below this row's ratio.
    pub lower: ThresholdRow,
}

impl TableLine {
    /// Whether the upper bound is strictly below the lower bound.
    pub fn separated(&self) -> Option<bool> {
        self.upper.as_ref().map(|u| {
            BigRational::from_integer(BigInt::from(u.greedy_bound().clone())) < self.lower.ratio
        })
    }

    pub fn to_json(&self) -> Value {
        let upper = self.upper.as_ref().map(|u| {
            let mut v = u.to_json();
            v["cell"] = json!(u.greedy_cell());
            v
        });
        let mut lower = self.lower.to_json();
        lower["cell"] = json!(self.lower.ratio_cell());
        json!({ "d": self.d, "upper": upper, "lower": lower, "separated": self.separated() })
    }
}

/// Rows `d_min..=d_max` of the threshold table.
pub fn threshold_table(d_min: usize, d_max: usize, iteration_limit: u64) -> Result<Vec<TableLine>> {
    if d_min < 2 || d_min > d_max || d_max > MAX_KNOWN_ORDER {
        return Err(invalid(format!("need 2 <= d_min <= d_max <= {MAX_KNOWN_ORDER}")));
    }
    (d_min..=d_max)
        .into_par_iter()
        .map(|d| {
            Ok(TableLine {
                d,
                upper: if d >= 3 { Some(ThresholdRow::new(d, FoldMode::Even, iteration_limit)?) } else { None },
                lower: ThresholdRow::new(d, FoldMode::Odd, iteration_limit)?,
            })
        })
        .collect()
}

/// Aligned text rendering of [`threshold_table`] output.
pub fn render_table(lines: &[TableLine]) -> String {
    let rows: Vec<(String, String, String)> = lines
        .iter()
        .map(|l| {
            (
                l.d.to_string(),
                l.upper.as_ref().map_or_else(|| "-".to_string(), ThresholdRow::greedy_cell),
                l.lower.ratio_cell(),
            )
        })
        .collect();
    let header = ("d".to_string(), "greedy upper bound (k=2d-2)".to_string(), "packing lower bound (k=2d-1)".to_string());
    let w1 = rows.iter().map(|r| r.1.len()).chain([header.1.len()]).max().unwrap_or(0);
    let w0 = rows.iter().map(|r| r.0.len()).chain([1]).max().unwrap_or(1);
    let mut out = String::new();
    for (a, b, c) in std::iter::once(&header).chain(&rows) {
        out.push_str(&format!("{a:>w0$}  {b:<w1$}  {c}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn odd_counts() {
        assert_eq!(w_odd(2).unwrap(), n(18));
        assert_eq!(w_odd(3).unwrap(), n(9600));
        assert_eq!(w_odd(4).unwrap(), binomial(7, 4).pow(2) * n(6u64.pow(4) * 576));
        assert!(w_odd(1).is_err());
        assert!(w_odd(12).is_err());
    }

    #[test]
    fn even_counts() {
        assert_eq!(w_even(3).unwrap(), n(1920));
        assert_eq!(w_even(4).unwrap(), n(367027200));
        let s = w_even_subcounts(3).unwrap();
        assert_eq!((s.w1, s.w2, s.w3), (n(2304), n(192), n(0)));
        let s = w_even_subcounts(4).unwrap();
        assert_eq!((s.w1, s.w2, s.w3), (n(223948800), n(2073600), n(149299200)));
        for d in 3..=11 {
            assert!(w_even(d).is_ok());
        }
        assert!(w_even(2).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(x_ratio(2).unwrap(), BigRational::from_integer(BigInt::from(2)));
        assert_eq!(x_ratio(3).unwrap(), BigRational::from_integer(BigInt::from(180)));
        assert_eq!(y_ratio(3).unwrap(), BigRational::new(BigInt::from(36), BigInt::from(5)));
        assert!(!x_ratio(7).unwrap().is_integer());
    }

    #[test]
    fn brute_small() {
        assert_eq!(forbidden_count_brute(2, 3, DEFAULT_BRUTE_BUDGET).unwrap(), n(18));
        assert_eq!(forbidden_count_brute(1, 1, DEFAULT_BRUTE_BUDGET).unwrap(), n(1));
        assert_eq!(forbidden_count_brute(1, 4, DEFAULT_BRUTE_BUDGET).unwrap(), n(0));
        assert_eq!(forbidden_count_brute(3, 4, DEFAULT_BRUTE_BUDGET).unwrap(), n(1920));
        assert!(matches!(forbidden_count_brute(4, 6, DEFAULT_BRUTE_BUDGET), Err(Error::ResourceLimit(_))));
        assert!(matches!(forbidden_count_brute(2, 9, u64::MAX), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn iteration_examples() {
        assert_eq!(iteration_bound(&n(7), &n(7)).unwrap(), n(1));
        assert_eq!(iteration_bound(&n(13824), &n(1920)).unwrap(), n(54));
        let x0 = factorial(6).pow(4);
        assert_eq!(iteration_bound(&x0, &n(367027200)).unwrap(), n(14853));
        assert!(iteration_bound(&n(5), &n(0)).is_err());
        assert_eq!(iteration_bound_limited(&n(13824), &n(1920), 10).unwrap(), None);
        // Big-integer path agrees with the u128 path.
        let mut x = n(13824);
        let mut steps = 0;
        while !x.is_zero() {
            x = next_iterate(&x, &n(13824), &n(1920));
            steps += 1;
        }
        assert_eq!(steps, 54);
    }

    #[test]
    fn estimates() {
        assert_eq!(estimate_bound(&n(13824), &n(1920)).unwrap(), n(62));
        assert_eq!(estimate_bound(&factorial(6).pow(4), &n(367027200)).unwrap(), n(15172));
        assert_eq!(log_estimate(&n(13824), &n(1920)).unwrap(), n(58));
        assert_eq!(total_log_estimate(&n(13824), &n(1920)).unwrap(), n(69));
        assert!(log_estimate(&n(5), &n(5)).is_err());
    }

    #[test]
    fn table_cells() {
        let lines = threshold_table(3, 4, DEFAULT_ITERATION_LIMIT).unwrap();
        assert_eq!(lines[0].upper.as_ref().unwrap().greedy_cell(), "54 (62)");
        assert_eq!(lines[1].upper.as_ref().unwrap().greedy_cell(), "14853 (15172)");
        assert_eq!(lines[0].lower.ratio_cell(), "180");
        assert_eq!(lines[0].separated(), Some(true));
        let text = render_table(&lines);
        assert!(text.contains("54 (62)"));
        assert!(threshold_table(1, 3, 1).is_err());
    }

    #[test]
    fn full_table_cells() {
        let lines = threshold_table(2, 11, DEFAULT_ITERATION_LIMIT).unwrap();
        let upper: Vec<String> = lines.iter().skip(1).map(|l| l.upper.as_ref().unwrap().greedy_cell()).collect();
        let lower: Vec<String> = lines.iter().map(|l| l.lower.ratio_cell()).collect();
        assert_eq!(
            upper,
            [
                "54 (62)",
                "14853 (15172)",
                "413809958",
                "551649401930292",
                "5.97e22",
                "4.73e32",
                "3.02e44",
                "1.63e58",
                "7.72e73"
            ]
        );
        assert_eq!(
            lower,
            [
                "2",
                "180",
                "705600",
                "308629440000",
                "7808216194437120000",
                "1.99e28",
                "4.55e39",
                // 9.909e52 exactly.
                "9.90e52",
                "2.10e68",
                "4.45e85"
            ]
        );
        assert!(lines.iter().skip(1).all(|l| l.separated() == Some(true)));
    }
}
