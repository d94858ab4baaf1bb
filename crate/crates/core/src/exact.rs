//! Exact arithmetic helpers: factorials, binomials, rationals, a rigorous
//! enclosure of the natural logarithm, and directed-rounding scientific
//! notation.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact nonnegative count.
pub type ExactCount = BigUint;

/// Exact rational in lowest terms.
pub type ExactRatio = BigRational;

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // Each partial product is itself a binomial coefficient, so the division
    // is exact at every step.
    (0..k as u64).fold(BigUint::one(), |acc, i| acc * (n as u64 - i) / (i + 1))
}

pub fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn to_biguint(r: &BigRational) -> Option<BigUint> {
    if r.is_integer() && !r.is_negative() {
        r.to_integer().to_biguint()
    } else {
        None
    }
}

pub fn ceil_div(num: &BigInt, den: &BigInt) -> BigInt {
    num.div_ceil(den)
}

/// Lower and upper bound of `ln(n)`, both scaled by `2^prec` and rounded
/// outward, so `lo / 2^prec <= ln(n) <= hi / 2^prec`.
pub fn ln_bounds(n: &BigUint, prec: u32) -> (BigInt, BigInt) {
    assert!(!n.is_zero(), "ln(0) is undefined");
    if n.is_one() {
        return (BigInt::zero(), BigInt::zero());
    }
    // n = 2^e * f with f in [1, 2); ln f = 2 atanh((f-1)/(f+1)).
    let e = n.bits() - 1;
    let pow2 = BigUint::one() << e;
    let num = BigInt::from(n - &pow2);
    let den = BigInt::from(n + &pow2);
    let (f_lo, f_hi) = atanh_bounds(&num, &den, prec);
    let (l2_lo, l2_hi) = atanh_bounds(&BigInt::one(), &BigInt::from(3), prec);
    let e = BigInt::from(e);
    let lo = (&e * l2_lo + f_lo) * 2;
    let hi = (&e * l2_hi + f_hi) * 2;
    (lo, hi)
}

/// Bounds on `atanh(num/den)` scaled by `2^prec`, for `0 <= num/den <= 1/3`.
fn atanh_bounds(num: &BigInt, den: &BigInt, prec: u32) -> (BigInt, BigInt) {
    debug_assert!(!num.is_negative() && BigInt::from(3) * num <= *den);
    let scale = BigInt::one() << prec;
    let z_lo = (num * &scale).div_floor(den);
    let z_hi = (num * &scale).div_ceil(den);
    let z2_lo = (&z_lo * &z_lo).div_floor(&scale);
    let z2_hi = (&z_hi * &z_hi).div_ceil(&scale);

    let mut lo = BigInt::zero();
    let mut pow = z_lo;
    let mut i = 0u32;
    while !pow.is_zero() {
        lo += pow.div_floor(&BigInt::from(2 * i + 1));
        pow = (&pow * &z2_lo).div_floor(&scale);
        i += 1;
    }

    let mut hi = BigInt::zero();
    let mut pow = z_hi;
    let mut i = 0u32;
    // Stop once a term is at most one ulp; the remaining tail is bounded by
    // that term times 1/(1 - z^2) <= 9/8, so two extra ulps cover it.
    loop {
        hi += pow.div_ceil(&BigInt::from(2 * i + 1));
        if pow <= BigInt::one() {
            hi += 2;
            break;
        }
        pow = (&pow * &z2_hi).div_ceil(&scale);
        i += 1;
    }
    (lo, hi)
}

/// Floating-point natural logarithm of an arbitrarily large integer.
pub fn ln_f64(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        if let Some(v) = n.to_f64() {
            if v.is_finite() {
                return v.ln();
            }
        }
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().abs().to_biguint().unwrap_or_default();
    let den = r.denom().to_biguint().unwrap_or_default();
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_f64(&num) - ln_f64(&den)).exp()
}

/// How to round the mantissa in [`format_sci`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

/// Formats a positive rational as `m.mm e<exp>` with `sig` significant digits,
/// e.g. `"5.97e22"`.
pub fn format_sci(value: &BigRational, sig: usize, rounding: Rounding) -> String {
    assert!(value.is_positive(), "format_sci needs a positive value");
    assert!(sig >= 1);
    let ten = BigInt::from(10);
    // Find e with 10^e <= value < 10^(e+1).
    let num_digits = value.numer().to_string().len() as i64;
    let den_digits = value.denom().to_string().len() as i64;
    let mut e = num_digits - den_digits;
    let pow10 = |p: i64| -> BigRational {
        if p >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), p as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-p) as usize))
        }
    };
    while pow10(e) > *value {
        e -= 1;
    }
    while pow10(e + 1) <= *value {
        e += 1;
    }
    let scaled = value / pow10(e - (sig as i64 - 1));
    let mut mantissa = match rounding {
        Rounding::Down => scaled.floor().to_integer(),
        Rounding::Up => scaled.ceil().to_integer(),
        Rounding::Nearest => scaled.round().to_integer(),
    };
    let limit = num_traits::pow(ten.clone(), sig);
    if mantissa >= limit {
        mantissa /= &ten;
        e += 1;
    }
    let digits = mantissa.to_string();
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        format!("{head}e{e}")
    } else {
        format!("{head}.{tail}e{e}")
    }
}

/// Floor of a rational, clamped at zero.
pub fn floor_to_biguint(r: &BigRational) -> BigUint {
    let f = r.floor().to_integer();
    match f.sign() {
        Sign::Minus => BigUint::zero(),
        _ => f.to_biguint().unwrap_or_default(),
    }
}
