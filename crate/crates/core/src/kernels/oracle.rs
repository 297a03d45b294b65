//! Naive reference implementations used by the test suites.
//!
//! Each function does the obvious digit-by-digit or field-by-field thing
//! and shares no code with the word-parallel versions.

use crate::bignum::Big;

/// Re-encodes the base-`c` digits of `x` in base `d`, one digit at a time.
pub fn convert_base(x: &Big, c: u64, d: u64, s: usize) -> Big {
    let digits = digits_of(x, c, s);
    from_digits(&digits, d)
}

/// The `s` least significant base-`c` digits of `x`.
pub fn digits_of(x: &Big, c: u64, s: usize) -> Vec<u64> {
    let mut rest = *x;
    let mut out = Vec::with_capacity(s);
    for _ in 0..s {
        let (q, r) = rest.divrem_u64(c);
        out.push(r);
        rest = q;
    }
    out
}

/// `Σ digits[j]·d^j`, by Horner's rule from the top.
pub fn from_digits(digits: &[u64], d: u64) -> Big {
    let mut acc = Big::ZERO;
    for &a in digits.iter().rev() {
        acc = acc.mul_u64(d).add_u64(a);
    }
    acc
}

/// Index of the first zero value, scanning from the front.
pub fn find_first_zero(values: &[u64]) -> Option<usize> {
    values.iter().position(|&v| v == 0)
}

/// `|{i : k >= a_i}|`.
pub fn rank(k: u64, values: &[u64]) -> usize {
    values.iter().filter(|&&a| k >= a).count()
}

/// Output bit `2i` is input bit `i`, output bit `2i+1` is input bit `q/2+i`.
pub fn shuffle(bits: &[bool]) -> Vec<bool> {
    let half = bits.len() / 2;
    let mut out = vec![false; bits.len()];
    for i in 0..half {
        out[2 * i] = bits[i];
        out[2 * i + 1] = bits[half + i];
    }
    out
}

pub fn unshuffle(bits: &[bool]) -> Vec<bool> {
    let half = bits.len() / 2;
    let mut out = vec![false; bits.len()];
    for i in 0..half {
        out[i] = bits[2 * i];
        out[half + i] = bits[2 * i + 1];
    }
    out
}

/// Inserts `value` at `slot` (or removes `slot` when `value` is `None`).
pub fn splice(values: &[u64], slot: usize, value: Option<u64>) -> Vec<u64> {
    let mut out = values.to_vec();
    match value {
        Some(v) => out.insert(slot, v),
        None => {
            out.remove(slot);
        }
    }
    out
}

pub fn bits_of(x: &Big, len: usize) -> Vec<bool> {
    (0..len).map(|i| x.bit(i)).collect()
}

pub fn big_of_bits(bits: &[bool]) -> Big {
    let mut out = Big::ZERO;
    for (i, &b) in bits.iter().enumerate() {
        out.set_bit(i, b);
    }
    out
}
