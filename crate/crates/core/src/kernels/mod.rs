//! Word-parallel primitives over packed bit fields.
//!
//! Everything here treats a slice of `u64` limbs as one long machine word
//! and touches it with a bounded number of limb operations. Each call
//! charges the limbs it touches to a thread-local step counter so tests can
//! check the cost bounds.

pub mod convert;
pub mod oracle;

use std::cell::Cell;

use crate::bignum::Big;

pub use convert::{convert_base, ConversionPlan};

thread_local! {
    static STEPS: Cell<u64> = const { Cell::new(0) };
}

/// Word operations charged on this thread since the last reset.
pub fn kernel_steps() -> u64 {
    STEPS.with(|s| s.get())
}

pub fn reset_kernel_steps() {
    STEPS.with(|s| s.set(0));
}

#[inline]
pub(crate) fn charge(words: usize) {
    STEPS.with(|s| s.set(s.get() + words as u64));
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("gray list is full ({capacity} entries)")]
    CapacityExceeded { capacity: usize },
    #[error("slot {slot} out of range for a list of {len} fields")]
    SlotOutOfRange { slot: usize, len: usize },
    #[error("insert requires a value")]
    MissingValue,
}

/// `m` fields of `f` bits each, least significant field first.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PackedFields {
    words: Vec<u64>,
    m: usize,
    f: usize,
}

impl PackedFields {
    pub fn zeroed(m: usize, f: usize) -> Self {
        assert!((1..=64).contains(&f), "field width must be in 1..=64");
        Self {
            words: vec![0; (m * f).div_ceil(64).max(1)],
            m,
            f,
        }
    }

    pub fn from_values(values: &[u64], f: usize) -> Self {
        let mut p = Self::zeroed(values.len(), f);
        for (i, &v) in values.iter().enumerate() {
            p.set(i, v);
        }
        p
    }

    /// Wraps raw words; bits above `m·f` must be zero.
    pub fn from_words(words: Vec<u64>, m: usize, f: usize) -> Self {
        assert!(words.len() * 64 >= m * f);
        let p = Self { words, m, f };
        debug_assert!(p.tail_is_clear());
        p
    }

    fn tail_is_clear(&self) -> bool {
        let bits = self.m * self.f;
        (bits..self.words.len() * 64).all(|b| (self.words[b / 64] >> (b % 64)) & 1 == 0)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn width(&self) -> usize {
        self.f
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Field `i`, 0-based.
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.m);
        read_bits(&self.words, i * self.f, self.f)
    }

    pub fn set(&mut self, i: usize, v: u64) {
        assert!(i < self.m);
        assert!(self.f == 64 || v >> self.f == 0, "value exceeds field width");
        write_bits(&mut self.words, i * self.f, self.f, v);
    }

    pub fn values(&self) -> Vec<u64> {
        (0..self.m).map(|i| self.get(i)).collect()
    }
}

pub(crate) fn read_bits(words: &[u64], offset: usize, width: usize) -> u64 {
    if width == 0 {
        return 0;
    }
    let li = offset / 64;
    let sh = offset % 64;
    let mut v = words[li] >> sh;
    if sh != 0 && sh + width > 64 {
        v |= words[li + 1] << (64 - sh);
    }
    if width == 64 {
        v
    } else {
        v & ((1u64 << width) - 1)
    }
}

pub(crate) fn write_bits(words: &mut [u64], offset: usize, width: usize, value: u64) {
    if width == 0 {
        return;
    }
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let value = value & mask;
    let li = offset / 64;
    let sh = offset % 64;
    words[li] = (words[li] & !(mask << sh)) | (value << sh);
    if sh != 0 && sh + width > 64 {
        let hi = (1u64 << (sh + width - 64)) - 1;
        words[li + 1] = (words[li + 1] & !hi) | (value >> (64 - sh));
    }
}

/// The pattern with bit `f-1` of each of `m` fields set, and its complement
/// within the fields.
fn field_masks(m: usize, f: usize, nwords: usize) -> (Vec<u64>, Vec<u64>) {
    let mut high = vec![0u64; nwords];
    let mut low = vec![0u64; nwords];
    let bits = m * f;
    // One bit at a time is fine for building: the result is a constant of the
    // (m, f) pair and is what a table-driven implementation would load.
    for i in 0..m {
        let b = i * f + f - 1;
        high[b / 64] |= 1 << (b % 64);
    }
    for w in 0..nwords {
        let valid = if (w + 1) * 64 <= bits {
            u64::MAX
        } else if w * 64 >= bits {
            0
        } else {
            (1u64 << (bits - w * 64)) - 1
        };
        low[w] = valid & !high[w];
    }
    charge(nwords);
    (high, low)
}

/// Smallest 0-based index of a zero field, or `None`.
///
/// Adds the all-ones-below-the-top pattern to the low bits of every field:
/// the top bit of a field ends up set exactly when the field was nonzero.
pub fn find_first_zero_field(p: &PackedFields) -> Option<usize> {
    if p.m == 0 {
        return None;
    }
    let n = p.words.len();
    let (high, low) = field_masks(p.m, p.f, n);
    let mut carry = false;
    let mut found = None;
    for w in 0..n {
        let a = p.words[w] & low[w];
        let (s1, c1) = a.overflowing_add(low[w]);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        carry = c1 || c2;
        let nz = (s2 | p.words[w]) & high[w];
        let zero = high[w] & !nz;
        if zero != 0 {
            found = Some((w * 64 + zero.trailing_zeros() as usize) / p.f);
            break;
        }
    }
    charge(n);
    found
}

/// Number of fields `a_i` with `a_i <= k`.
///
/// Broadcasts `k` into every field with one multiplication and compares all
/// fields at once with the unsigned parallel `<=` of Vigna's broadword rank.
/// The final count is a population count.
pub fn rank_packed(k: u64, p: &PackedFields) -> usize {
    assert!(
        p.f >= 64 || (p.m as u128) < (1u128 << p.f),
        "rank requires m < 2^f"
    );
    assert!(p.f == 64 || k >> p.f == 0, "key exceeds field width");
    if p.m == 0 {
        return 0;
    }
    let n = p.words.len();
    let (high, low) = field_masks(p.m, p.f, n);
    // ones = Σ 2^{i f}; broadcast = k · ones.
    let ones = shr_words(&high, p.f - 1, n);
    let y = mul_words_scalar(&ones, k);
    // t = (y | H) - (x & ~H): no borrow ever crosses a field boundary.
    let mut borrow = false;
    let mut count = 0usize;
    for w in 0..n {
        let x = p.words[w];
        let a = y[w] | high[w];
        let b = x & low[w];
        let (d1, b1) = a.overflowing_sub(b);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        borrow = b1 || b2;
        let le = ((d2 | (x ^ y[w])) ^ (x & !y[w])) & high[w];
        count += le.count_ones() as usize;
    }
    charge(3 * n);
    count
}

/// [`rank_packed`] for a list that fits one word. `ones` has bit `i·f` set
/// for each of the `m` fields in use; fields above them must be zero.
#[inline]
pub fn rank_word(k: u64, x: u64, ones: u64, f: usize) -> usize {
    let high = ones << (f - 1);
    let y = k.wrapping_mul(ones);
    let d = (y | high).wrapping_sub(x & !high);
    let le = ((d | (x ^ y)) ^ (x & !y)) & high;
    charge(1);
    le.count_ones() as usize
}

fn mul_words_scalar(a: &[u64], k: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len()];
    let mut carry: u128 = 0;
    for (o, &x) in out.iter_mut().zip(a) {
        let p = x as u128 * k as u128 + carry;
        *o = p as u64;
        carry = p >> 64;
    }
    charge(a.len());
    out
}

/// First gray field (`00`) among the 2-bit fields `[start, m)` of a loose
/// color vector.
pub fn first_zero_pair(words: &[u64], m: usize, start: usize) -> Option<usize> {
    const LO: u64 = 0x5555_5555_5555_5555;
    if start >= m {
        return None;
    }
    let first = start / 32;
    let last = (m - 1) / 32;
    for w in first..=last {
        let x = words[w];
        let mut zero = !(x | (x >> 1)) & LO;
        if w == first {
            zero &= u64::MAX << (2 * (start % 32));
        }
        if w == last && !m.is_multiple_of(32) {
            zero &= (1u64 << (2 * (m % 32))) - 1;
        }
        if zero != 0 {
            charge(w - first + 1);
            return Some(w * 32 + zero.trailing_zeros() as usize / 2);
        }
    }
    charge(last - first + 1);
    None
}

/// Interleaves the two halves of a `q`-bit vector: output bit `2i` is input
/// bit `i` and output bit `2i+1` is input bit `q/2 + i`.
pub fn shuffle_halves(x: &Big, q: usize) -> Big {
    assert!(q.is_multiple_of(2), "shuffle needs an even length");
    assert!(q <= Big::BITS);
    let half = q / 2;
    let lo = x.field(0, half);
    let hi = x.field(half, half);
    let mut out = Big::ZERO;
    let limbs = out.limbs_mut();
    for i in 0..half.div_ceil(32) {
        let a = spread_bits(read_bits(lo.limbs(), 32 * i, 32.min(half - 32 * i)));
        let b = spread_bits(read_bits(hi.limbs(), 32 * i, 32.min(half - 32 * i)));
        limbs[i] = a | (b << 1);
    }
    charge(3 * half.div_ceil(32) + 2);
    out
}

/// Inverse of [`shuffle_halves`].
pub fn unshuffle_halves(x: &Big, q: usize) -> Big {
    assert!(q.is_multiple_of(2), "unshuffle needs an even length");
    assert!(q <= Big::BITS);
    let half = q / 2;
    let mut lo = Big::ZERO;
    let mut hi = Big::ZERO;
    for i in 0..half.div_ceil(32) {
        let w = x.limbs()[i];
        let take = 32.min(half - 32 * i);
        lo.set_bits(32 * i, take, compact_bits(w));
        hi.set_bits(32 * i, take, compact_bits(w >> 1));
    }
    charge(3 * half.div_ceil(32) + 2);
    lo.or(&hi.shl(half)).and(&Big::low_mask(q))
}

/// Moves bit `i` of a 32-bit value to bit `2i`.
#[inline]
pub fn spread_bits(x: u64) -> u64 {
    let mut x = x & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

/// Gathers the even bits of `x` into the low 32 bits.
#[inline]
pub fn compact_bits(x: u64) -> u64 {
    let mut x = x & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    (x | (x >> 16)) & 0x0000_0000_ffff_ffff
}

/// Moves 2-bit unit `i` of a 32-bit value to bits `4i..4i+2`.
#[inline]
pub fn spread_pairs(x: u64) -> u64 {
    let mut x = x & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    (x | (x << 2)) & 0x3333_3333_3333_3333
}

/// Inverse of [`spread_pairs`].
#[inline]
pub fn compact_pairs(x: u64) -> u64 {
    let mut x = x & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    (x | (x >> 16)) & 0x0000_0000_ffff_ffff
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splice {
    Insert(u64),
    Delete,
}

/// Opens a gap at `slot` for a new field, or closes the gap left by
/// removing field `slot`.
pub fn splice_field(
    list: &PackedFields,
    slot: usize,
    op: Splice,
    capacity: usize,
) -> Result<PackedFields, KernelError> {
    let f = list.f;
    let len = list.m;
    match op {
        Splice::Insert(v) => {
            if len >= capacity {
                return Err(KernelError::CapacityExceeded { capacity });
            }
            if slot > len {
                return Err(KernelError::SlotOutOfRange { slot, len });
            }
            let mut out = PackedFields::zeroed(len + 1, f);
            let bits = (len + 1) * f;
            let nw = out.words.len();
            // low part stays, high part moves up one field.
            for w in 0..nw {
                let lo = mask_below(w, slot * f);
                let src = list.words.get(w).copied().unwrap_or(0);
                out.words[w] = src & lo;
            }
            let shifted = shl_words(&list.words, f, nw);
            for w in 0..nw {
                let keep = !mask_below(w, (slot + 1) * f) & mask_below(w, bits);
                out.words[w] |= shifted[w] & keep;
            }
            write_bits(&mut out.words, slot * f, f, v);
            charge(3 * nw);
            Ok(out)
        }
        Splice::Delete => {
            if slot >= len {
                return Err(KernelError::SlotOutOfRange { slot, len });
            }
            let mut out = PackedFields::zeroed(len - 1, f);
            let nw = out.words.len();
            let bits = (len - 1) * f;
            let shifted = shr_words(&list.words, f, nw);
            for w in 0..nw {
                let src = list.words.get(w).copied().unwrap_or(0);
                let lo = mask_below(w, slot * f);
                out.words[w] = (src & lo) | (shifted[w] & !lo & mask_below(w, bits));
            }
            charge(3 * nw);
            Ok(out)
        }
    }
}

/// Word `w` of the mask with bits `[0, bits)` set.
fn mask_below(w: usize, bits: usize) -> u64 {
    if bits >= (w + 1) * 64 {
        u64::MAX
    } else if bits <= w * 64 {
        0
    } else {
        (1u64 << (bits - w * 64)) - 1
    }
}

fn shl_words(src: &[u64], n: usize, out_len: usize) -> Vec<u64> {
    let mut out = vec![0u64; out_len];
    let ls = n / 64;
    let bs = n % 64;
    for (i, o) in out.iter_mut().enumerate() {
        if i < ls {
            continue;
        }
        let s = i - ls;
        let mut v = src.get(s).copied().unwrap_or(0) << bs;
        if bs != 0 && s > 0 {
            v |= src.get(s - 1).copied().unwrap_or(0) >> (64 - bs);
        }
        *o = v;
    }
    out
}

fn shr_words(src: &[u64], n: usize, out_len: usize) -> Vec<u64> {
    let mut out = vec![0u64; out_len];
    let ls = n / 64;
    let bs = n % 64;
    for (i, o) in out.iter_mut().enumerate() {
        let s = i + ls;
        let mut v = src.get(s).copied().unwrap_or(0) >> bs;
        if bs != 0 {
            v |= src.get(s + 1).copied().unwrap_or(0).checked_shl(64 - bs as u32).unwrap_or(0);
        }
        *o = v;
    }
    out
}

/// Sorted-list splice inside a [`Big`]: the list has `count` fields of
/// width `f` starting at bit `offset` and room for `capacity` fields.
pub fn splice_in_place(
    x: &mut Big,
    offset: usize,
    f: usize,
    count: usize,
    capacity: usize,
    slot: usize,
    op: Splice,
) -> Result<(), KernelError> {
    let region = capacity * f;
    let list = x.field(offset, region);
    let below = Big::low_mask(slot * f);
    let new = match op {
        Splice::Insert(v) => {
            if count >= capacity {
                return Err(KernelError::CapacityExceeded { capacity });
            }
            if slot > count {
                return Err(KernelError::SlotOutOfRange { slot, len: count });
            }
            list.and(&below)
                .or(&Big::from_u64(v).shl(slot * f))
                .or(&list.and(&below.not()).shl(f))
        }
        Splice::Delete => {
            if slot >= count {
                return Err(KernelError::SlotOutOfRange { slot, len: count });
            }
            list.and(&below).or(&list.shr(f).and(&below.not()))
        }
    };
    x.set_field(offset, region, &new);
    charge(6);
    Ok(())
}

/// Rank of `k` among the `count` sorted fields stored in a [`Big`]: the
/// number of entries `<= k`.
pub fn rank_in_place(x: &Big, offset: usize, f: usize, count: usize, k: u64) -> usize {
    if count == 0 {
        return 0;
    }
    // Gray lists are short and fit in one or two limbs; reuse the slice kernel.
    let bits = count * f;
    let mut words = [0u64; 4];
    let nw = bits.div_ceil(64);
    for (w, slot) in words.iter_mut().enumerate().take(nw) {
        *slot = x.bits(offset + 64 * w, 64.min(bits - 64 * w));
    }
    let p = PackedFields {
        words: words[..nw].to_vec(),
        m: count,
        f,
    };
    rank_packed(k, &p)
}

#[cfg(test)]
mod tests {
    use super::oracle;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spec_examples() {
        let p = PackedFields::from_values(&[1, 0, 2], 2);
        assert_eq!(p.words()[0], 33);
        assert_eq!(find_first_zero_field(&p), Some(1));
        assert_eq!(find_first_zero_field(&PackedFields::from_values(&[1, 1], 2)), None);
        assert_eq!(find_first_zero_field(&PackedFields::from_values(&[0], 2)), Some(0));
        assert_eq!(rank_packed(2, &PackedFields::from_values(&[0, 3, 1], 2)), 2);
        assert_eq!(rank_packed(3, &PackedFields::from_values(&[2, 3, 1], 2)), 3);
        assert_eq!(rank_packed(0, &PackedFields::from_values(&[1, 2, 3], 2)), 0);
    }

    #[test]
    fn shuffle_small() {
        // (1,1,0,0) read as bits 0..4
        let x = Big::from_u64(0b0011);
        assert_eq!(shuffle_halves(&x, 4), Big::from_u64(0b0101));
        assert_eq!(unshuffle_halves(&Big::from_u64(0b0101), 4), x);
        for v in 0..4 {
            assert_eq!(shuffle_halves(&Big::from_u64(v), 2), Big::from_u64(v));
        }
    }

    #[test]
    fn rank_word_matches_slice_rank() {
        for f in 2..=8usize {
            for m in 0..=(64 / f).min((1 << f) - 1) {
                let mut vals: Vec<u64> = (0..m as u64).map(|i| (i * 5 + 3) % (1 << f)).collect();
                vals.sort();
                let p = PackedFields::from_values(&vals, f);
                let x = p.words()[0];
                let ones = (0..m).fold(0u64, |a, i| a | 1 << (i * f));
                for k in 0..(1u64 << f) {
                    assert_eq!(rank_word(k, x, ones, f), rank_packed(k, &p), "f={f} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn splice_examples() {
        let l = PackedFields::from_values(&[3, 9], 4);
        let r = splice_field(&l, 1, Splice::Insert(5), 4).unwrap();
        assert_eq!(r.values(), vec![3, 5, 9]);
        let l = PackedFields::from_values(&[7], 4);
        assert!(splice_field(&l, 0, Splice::Delete, 4).unwrap().is_empty());
        let full = PackedFields::from_values(&[1, 2], 4);
        assert_eq!(
            splice_field(&full, 0, Splice::Insert(0), 2),
            Err(KernelError::CapacityExceeded { capacity: 2 })
        );
    }

    #[test]
    fn first_zero_pair_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let m = rng.gen_range(1..=256);
            let vals: Vec<u64> = (0..m)
                .map(|_| if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..4) })
                .collect();
            let p = PackedFields::from_values(&vals, 2);
            let start = rng.gen_range(0..=m);
            let want = (start..m).find(|&i| vals[i] == 0);
            assert_eq!(first_zero_pair(p.words(), m, start), want);
        }
    }

    #[test]
    fn splice_in_place_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5000 {
            let f = rng.gen_range(1..=10);
            let cap = rng.gen_range(1..=12);
            let count = rng.gen_range(0..=cap);
            let offset = rng.gen_range(0..200);
            let mut x = Big::ZERO;
            let junk: u64 = rng.gen();
            x.set_bits(offset + cap * f, 20, junk);
            x.set_bits(offset.saturating_sub(5), 5.min(offset), junk);
            let vals: Vec<u64> = (0..count).map(|_| rng.gen_range(0..(1u64 << f))).collect();
            for (i, &v) in vals.iter().enumerate() {
                x.set_bits(offset + i * f, f, v);
            }
            let before = x;
            let slot = rng.gen_range(0..=count);
            if rng.gen_bool(0.5) && count < cap {
                let v = rng.gen_range(0..(1u64 << f));
                splice_in_place(&mut x, offset, f, count, cap, slot, Splice::Insert(v)).unwrap();
                let want = oracle::splice(&vals, slot, Some(v));
                for (i, &w) in want.iter().enumerate() {
                    assert_eq!(x.bits(offset + i * f, f), w);
                }
            } else if slot < count {
                splice_in_place(&mut x, offset, f, count, cap, slot, Splice::Delete).unwrap();
                let want = oracle::splice(&vals, slot, None);
                for (i, &w) in want.iter().enumerate() {
                    assert_eq!(x.bits(offset + i * f, f), w);
                }
            }
            // Bits outside the list region are untouched.
            let outside = Big::low_mask(cap * f).shl(offset).not();
            assert_eq!(x.and(&outside), before.and(&outside));
        }
    }
}
