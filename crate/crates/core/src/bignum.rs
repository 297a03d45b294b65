//! Fixed-width little-endian unsigned integers.
//!
//! Every value the color store handles is bounded by a small multiple of
//! `log2 n` bits, so a stack array of limbs with truncating arithmetic is
//! enough. [`Big`] holds one big digit (plus spill bits); [`Wide`] is the
//! scratch width used by the word-parallel base converter.

use std::cmp::Ordering;
use std::fmt;

/// Limb count of [`Big`].
pub const BIG_LIMBS: usize = 8;
/// Limb count of [`Wide`].
pub const WIDE_LIMBS: usize = 16;

pub type Big = UInt<BIG_LIMBS>;
pub type Wide = UInt<WIDE_LIMBS>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct UInt<const L: usize> {
    limbs: [u64; L],
}

impl<const L: usize> Default for UInt<L> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const L: usize> fmt::Debug for UInt<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x")?;
        let top = self.used_limbs().max(1);
        for (i, limb) in self.limbs[..top].iter().rev().enumerate() {
            if i == 0 {
                write!(f, "{limb:x}")?;
            } else {
                write!(f, "_{limb:016x}")?;
            }
        }
        Ok(())
    }
}

impl<const L: usize> UInt<L> {
    pub const ZERO: Self = Self { limbs: [0; L] };
    pub const BITS: usize = 64 * L;

    pub const fn from_u64(v: u64) -> Self {
        let mut limbs = [0; L];
        limbs[0] = v;
        Self { limbs }
    }

    pub fn from_u128(v: u128) -> Self {
        let mut out = Self::ZERO;
        out.limbs[0] = v as u64;
        if L > 1 {
            out.limbs[1] = (v >> 64) as u64;
        } else {
            assert!(v >> 64 == 0, "value does not fit");
        }
        out
    }

    pub fn from_limbs(src: &[u64]) -> Self {
        let mut out = Self::ZERO;
        for (i, &limb) in src.iter().enumerate() {
            if i < L {
                out.limbs[i] = limb;
            } else {
                assert!(limb == 0, "value does not fit in {} bits", Self::BITS);
            }
        }
        out
    }

    /// Converts between widths; panics if the value does not fit.
    pub fn resize<const M: usize>(&self) -> UInt<M> {
        UInt::<M>::from_limbs(&self.limbs)
    }

    pub fn limbs(&self) -> &[u64; L] {
        &self.limbs
    }

    pub fn limbs_mut(&mut self) -> &mut [u64; L] {
        &mut self.limbs
    }

    pub fn low_u64(&self) -> u64 {
        self.limbs[0]
    }

    /// The value as `u64`, or `None` if it is wider.
    pub fn to_u64(&self) -> Option<u64> {
        if self.limbs[1..].iter().all(|&l| l == 0) {
            Some(self.limbs[0])
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn used_limbs(&self) -> usize {
        self.limbs.iter().rposition(|&l| l != 0).map_or(0, |i| i + 1)
    }

    pub fn bit_len(&self) -> usize {
        match self.limbs.iter().rposition(|&l| l != 0) {
            Some(i) => 64 * i + 64 - self.limbs[i].leading_zeros() as usize,
            None => 0,
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.limbs.iter().map(|l| l.count_ones()).sum()
    }

    /// Index of the lowest set bit, or `None` for zero.
    pub fn trailing_zeros(&self) -> Option<usize> {
        self.limbs
            .iter()
            .position(|&l| l != 0)
            .map(|i| 64 * i + self.limbs[i].trailing_zeros() as usize)
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < Self::BITS);
        (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, on: bool) {
        let mask = 1u64 << (i % 64);
        if on {
            self.limbs[i / 64] |= mask;
        } else {
            self.limbs[i / 64] &= !mask;
        }
    }

    /// `2^width - 1`.
    pub fn low_mask(width: usize) -> Self {
        assert!(width <= Self::BITS);
        let mut out = Self::ZERO;
        let full = width / 64;
        for limb in &mut out.limbs[..full] {
            *limb = u64::MAX;
        }
        if !width.is_multiple_of(64) {
            out.limbs[full] = (1u64 << (width % 64)) - 1;
        }
        out
    }

    pub fn power_of_two(exp: usize) -> Self {
        let mut out = Self::ZERO;
        out.set_bit(exp, true);
        out
    }

    /// Reads `width <= 64` bits starting at bit `offset`.
    pub fn bits(&self, offset: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && offset + width <= Self::BITS);
        if width == 0 {
            return 0;
        }
        let li = offset / 64;
        let sh = offset % 64;
        let mut v = self.limbs[li] >> sh;
        if sh != 0 && sh + width > 64 {
            v |= self.limbs[li + 1] << (64 - sh);
        }
        if width == 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }

    /// Overwrites `width <= 64` bits starting at `offset` with the low bits of `value`.
    pub fn set_bits(&mut self, offset: usize, width: usize, value: u64) {
        debug_assert!(width <= 64 && offset + width <= Self::BITS);
        if width == 0 {
            return;
        }
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let value = value & mask;
        let li = offset / 64;
        let sh = offset % 64;
        self.limbs[li] = (self.limbs[li] & !(mask << sh)) | (value << sh);
        if sh != 0 && sh + width > 64 {
            let hi_bits = sh + width - 64;
            let hi_mask = (1u64 << hi_bits) - 1;
            self.limbs[li + 1] = (self.limbs[li + 1] & !hi_mask) | (value >> (64 - sh));
        }
    }

    /// Bits `[offset, offset + width)` as a new integer.
    pub fn field(&self, offset: usize, width: usize) -> Self {
        self.shr(offset).and(&Self::low_mask(width))
    }

    /// Replaces bits `[offset, offset + width)` with the low `width` bits of `value`.
    pub fn set_field(&mut self, offset: usize, width: usize, value: &Self) {
        let mask = Self::low_mask(width).shl(offset);
        let placed = value.and(&Self::low_mask(width)).shl(offset);
        *self = self.and(&mask.not()).or(&placed);
    }

    pub fn and(&self, o: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.limbs.iter_mut().zip(&o.limbs) {
            *a &= b;
        }
        out
    }

    pub fn or(&self, o: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.limbs.iter_mut().zip(&o.limbs) {
            *a |= b;
        }
        out
    }

    pub fn xor(&self, o: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.limbs.iter_mut().zip(&o.limbs) {
            *a ^= b;
        }
        out
    }

    pub fn not(&self) -> Self {
        let mut out = *self;
        for a in out.limbs.iter_mut() {
            *a = !*a;
        }
        out
    }

    /// Left shift, truncated to the width.
    pub fn shl(&self, n: usize) -> Self {
        if n >= Self::BITS {
            return Self::ZERO;
        }
        let mut out = Self::ZERO;
        let ls = n / 64;
        let bs = n % 64;
        for i in (ls..L).rev() {
            let src = i - ls;
            let mut v = self.limbs[src] << bs;
            if bs != 0 && src > 0 {
                v |= self.limbs[src - 1] >> (64 - bs);
            }
            out.limbs[i] = v;
        }
        out
    }

    pub fn shr(&self, n: usize) -> Self {
        if n >= Self::BITS {
            return Self::ZERO;
        }
        let mut out = Self::ZERO;
        let ls = n / 64;
        let bs = n % 64;
        for i in 0..L - ls {
            let src = i + ls;
            let mut v = self.limbs[src] >> bs;
            if bs != 0 && src + 1 < L {
                v |= self.limbs[src + 1] << (64 - bs);
            }
            out.limbs[i] = v;
        }
        out
    }

    /// Addition; panics on overflow of the fixed width.
    pub fn add(&self, o: &Self) -> Self {
        let (out, carry) = self.overflowing_add(o);
        assert!(!carry, "UInt addition overflow");
        out
    }

    pub fn wrapping_add(&self, o: &Self) -> Self {
        self.overflowing_add(o).0
    }

    fn overflowing_add(&self, o: &Self) -> (Self, bool) {
        let mut out = Self::ZERO;
        let mut carry = false;
        for i in 0..L {
            let (s1, c1) = self.limbs[i].overflowing_add(o.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out.limbs[i] = s2;
            carry = c1 || c2;
        }
        (out, carry)
    }

    pub fn add_u64(&self, v: u64) -> Self {
        self.add(&Self::from_u64(v))
    }

    /// Subtraction; panics if `o > self`.
    pub fn sub(&self, o: &Self) -> Self {
        let (out, borrow) = self.overflowing_sub(o);
        assert!(!borrow, "UInt subtraction underflow");
        out
    }

    pub fn wrapping_sub(&self, o: &Self) -> Self {
        self.overflowing_sub(o).0
    }

    fn overflowing_sub(&self, o: &Self) -> (Self, bool) {
        let mut out = Self::ZERO;
        let mut borrow = false;
        for i in 0..L {
            let (d1, b1) = self.limbs[i].overflowing_sub(o.limbs[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out.limbs[i] = d2;
            borrow = b1 || b2;
        }
        (out, borrow)
    }

    pub fn sub_u64(&self, v: u64) -> Self {
        self.sub(&Self::from_u64(v))
    }

    /// Product with a single limb; panics on overflow.
    pub fn mul_u64(&self, m: u64) -> Self {
        let mut out = Self::ZERO;
        let mut carry: u128 = 0;
        for i in 0..L {
            let p = self.limbs[i] as u128 * m as u128 + carry;
            out.limbs[i] = p as u64;
            carry = p >> 64;
        }
        assert!(carry == 0, "UInt multiplication overflow");
        out
    }

    /// Full product; panics if it does not fit.
    pub fn mul(&self, o: &Self) -> Self {
        let (out, overflow) = self.mul_inner(o);
        assert!(!overflow, "UInt multiplication overflow");
        out
    }

    /// Product modulo `2^BITS`.
    pub fn wrapping_mul(&self, o: &Self) -> Self {
        self.mul_inner(o).0
    }

    fn mul_inner(&self, o: &Self) -> (Self, bool) {
        let na = self.used_limbs();
        let nb = o.used_limbs();
        let mut out = Self::ZERO;
        let mut overflow = false;
        for i in 0..na {
            let a = self.limbs[i] as u128;
            if a == 0 {
                continue;
            }
            let mut carry: u128 = 0;
            for j in 0..nb {
                let k = i + j;
                if k >= L {
                    if o.limbs[j] != 0 {
                        overflow = true;
                    }
                    continue;
                }
                let p = a * o.limbs[j] as u128 + out.limbs[k] as u128 + carry;
                out.limbs[k] = p as u64;
                carry = p >> 64;
            }
            let mut k = i + nb;
            while carry != 0 {
                if k >= L {
                    overflow = true;
                    break;
                }
                let s = out.limbs[k] as u128 + carry;
                out.limbs[k] = s as u64;
                carry = s >> 64;
                k += 1;
            }
        }
        (out, overflow)
    }

    /// Quotient and remainder by a single limb.
    pub fn divrem_u64(&self, d: u64) -> (Self, u64) {
        assert!(d != 0, "division by zero");
        let mut q = Self::ZERO;
        let mut rem: u128 = 0;
        for i in (0..self.used_limbs()).rev() {
            let cur = (rem << 64) | self.limbs[i] as u128;
            q.limbs[i] = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        (q, rem as u64)
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let mut q = Self::ZERO;
        let mut r = Self::ZERO;
        divrem_limbs(&self.limbs, &d.limbs, &mut q.limbs, &mut r.limbs);
        (q, r)
    }

    /// The value modulo 3, using `2^64 = 1 (mod 3)`.
    pub fn mod3(&self) -> u64 {
        let mut acc: u128 = 0;
        for &l in &self.limbs {
            acc += l as u128;
        }
        (acc % 3) as u64
    }
}

impl<const L: usize> PartialOrd for UInt<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const L: usize> Ord for UInt<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..L).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl<const L: usize> From<u64> for UInt<L> {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

/// Schoolbook long division (Knuth, TAOCP vol. 2, algorithm D) on limb slices.
///
/// `quo` and `rem` must be at least as long as `num`; they are overwritten.
pub fn divrem_limbs(num: &[u64], den: &[u64], quo: &mut [u64], rem: &mut [u64]) {
    quo.iter_mut().for_each(|l| *l = 0);
    rem.iter_mut().for_each(|l| *l = 0);
    let n = den.iter().rposition(|&l| l != 0).map_or(0, |i| i + 1);
    assert!(n > 0, "division by zero");
    let m = num.iter().rposition(|&l| l != 0).map_or(0, |i| i + 1);
    if m < n {
        rem[..m].copy_from_slice(&num[..m]);
        return;
    }
    if n == 1 {
        let d = den[0] as u128;
        let mut r: u128 = 0;
        for i in (0..m).rev() {
            let cur = (r << 64) | num[i] as u128;
            quo[i] = (cur / d) as u64;
            r = cur % d;
        }
        rem[0] = r as u64;
        return;
    }

    const B: u128 = 1 << 64;
    let s = den[n - 1].leading_zeros();
    // Normalized copies; `un` carries one extra limb.
    let mut vn = [0u64; 2 * WIDE_LIMBS];
    let mut un = [0u64; 2 * WIDE_LIMBS + 1];
    assert!(n <= vn.len() && m < un.len(), "operands too wide for division scratch");
    for i in (1..n).rev() {
        vn[i] = shl_pair(den[i], den[i - 1], s);
    }
    vn[0] = den[0] << s;
    un[m] = if s == 0 { 0 } else { num[m - 1] >> (64 - s) };
    for i in (1..m).rev() {
        un[i] = shl_pair(num[i], num[i - 1], s);
    }
    un[0] = num[0] << s;

    let vtop = vn[n - 1] as u128;
    let vnext = vn[n - 2] as u128;
    for j in (0..=m - n).rev() {
        let top = ((un[j + n] as u128) << 64) | un[j + n - 1] as u128;
        let mut qhat = top / vtop;
        let mut rhat = top % vtop;
        while qhat >= B || qhat * vnext > ((rhat << 64) | un[j + n - 2] as u128) {
            qhat -= 1;
            rhat += vtop;
            if rhat >= B {
                break;
            }
        }
        // Multiply and subtract.
        let mut borrow: i128 = 0;
        for i in 0..n {
            let p = qhat * vn[i] as u128;
            let t = un[i + j] as i128 - borrow - (p as u64) as i128;
            un[i + j] = t as u64;
            borrow = (p >> 64) as i128 - (t >> 64);
        }
        let t = un[j + n] as i128 - borrow;
        un[j + n] = t as u64;
        let mut qd = qhat as u64;
        if t < 0 {
            // Add back.
            qd = qd.wrapping_sub(1);
            let mut carry: u128 = 0;
            for i in 0..n {
                let s2 = un[i + j] as u128 + vn[i] as u128 + carry;
                un[i + j] = s2 as u64;
                carry = s2 >> 64;
            }
            un[j + n] = un[j + n].wrapping_add(carry as u64);
        }
        if j < quo.len() {
            quo[j] = qd;
        } else {
            assert!(qd == 0, "quotient does not fit");
        }
    }
    for i in 0..n {
        rem[i] = if s == 0 {
            un[i]
        } else {
            (un[i] >> s) | (un[i + 1] << (64 - s))
        };
    }
}

#[inline]
fn shl_pair(hi: u64, lo: u64, s: u32) -> u64 {
    if s == 0 {
        hi
    } else {
        (hi << s) | (lo >> (64 - s))
    }
}

/// `3^e` computed by plain repeated multiplication; used to build tables and by tests.
pub fn pow3_naive<const L: usize>(e: u32) -> UInt<L> {
    let mut acc = UInt::<L>::from_u64(1);
    for _ in 0..e {
        acc = acc.mul_u64(3);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn to_biguint<const L: usize>(x: &UInt<L>) -> BigUint {
        let mut bytes = Vec::new();
        for l in x.limbs() {
            bytes.extend_from_slice(&l.to_le_bytes());
        }
        BigUint::from_bytes_le(&bytes)
    }

    fn big_from_parts(parts: &[u64], bits: usize) -> Big {
        Big::from_limbs(parts).and(&Big::low_mask(bits))
    }

    #[test]
    fn bit_fields_round_trip() {
        let mut x = Big::ZERO;
        x.set_bits(60, 10, 0x3ff);
        assert_eq!(x.bits(60, 10), 0x3ff);
        assert_eq!(x.bits(59, 12), 0x7fe);
        x.set_bits(60, 10, 0x155);
        assert_eq!(x.bits(60, 10), 0x155);
        assert_eq!(x.bit_len(), 69);
    }

    #[test]
    fn division_matches_known_values() {
        let three_200: Big = pow3_naive(200);
        assert_eq!(three_200.bit_len(), 317);
        let three_120: Big = pow3_naive(120);
        let (q, r) = three_200.divrem(&three_120);
        assert_eq!(q, pow3_naive::<BIG_LIMBS>(80));
        assert!(r.is_zero());
        let (q, r) = three_200.add_u64(5).divrem(&three_120);
        assert_eq!(q, pow3_naive::<BIG_LIMBS>(80));
        assert_eq!(r, Big::from_u64(5));
    }

    proptest! {
        #[test]
        fn divrem_matches_biguint(
            a in proptest::collection::vec(any::<u64>(), 8),
            b in proptest::collection::vec(any::<u64>(), 8),
            abits in 1usize..512,
            bbits in 1usize..512,
        ) {
            let x = big_from_parts(&a, abits);
            let mut y = big_from_parts(&b, bbits);
            if y.is_zero() { y = Big::from_u64(1); }
            let (q, r) = x.divrem(&y);
            let (bx, by) = (to_biguint(&x), to_biguint(&y));
            prop_assert_eq!(to_biguint(&q), &bx / &by);
            prop_assert_eq!(to_biguint(&r), &bx % &by);
        }

        #[test]
        fn mul_add_sub_match_biguint(
            a in proptest::collection::vec(any::<u64>(), 8),
            b in proptest::collection::vec(any::<u64>(), 8),
            abits in 0usize..256,
            bbits in 0usize..256,
        ) {
            let x = big_from_parts(&a, abits);
            let y = big_from_parts(&b, bbits);
            let (bx, by) = (to_biguint(&x), to_biguint(&y));
            prop_assert_eq!(to_biguint(&x.mul(&y)), &bx * &by);
            prop_assert_eq!(to_biguint(&x.add(&y)), &bx + &by);
            if x >= y {
                prop_assert_eq!(to_biguint(&x.sub(&y)), &bx - &by);
            }
            prop_assert_eq!(x.mod3(), (&bx % 3u32).iter_u64_digits().next().unwrap_or(0));
        }

        #[test]
        fn shifts_match_biguint(a in proptest::collection::vec(any::<u64>(), 8), s in 0usize..520) {
            let x = Big::from_limbs(&a);
            let bx = to_biguint(&x);
            let modulus = BigUint::from(1u8) << 512;
            prop_assert_eq!(to_biguint(&x.shl(s)), (&bx << s) % &modulus);
            prop_assert_eq!(to_biguint(&x.shr(s)), &bx >> s);
        }
    }
}
