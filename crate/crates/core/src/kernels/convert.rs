//! Radix conversion between bases 2, 3 and 4 in `O(log s)` word-parallel steps.
//!
//! Every conversion goes through the loose form, a vector of 2-bit fields
//! holding one digit each. Bases 2 and 4 map to and from it by bit
//! spreading. Base 3 is split top-down: a slot holding `v < 3^{2g}` becomes
//! two slots holding `v / 3^g` and `v mod 3^g`, for every slot at once, with
//! the quotient taken by a multiply-by-reciprocal and shift. Packing back to
//! base 3 runs the same tree bottom-up.

use crate::bignum::{Big, Wide, WIDE_LIMBS};

use super::{charge, compact_bits, compact_pairs, spread_bits, spread_pairs};

/// Largest digit count the scratch width supports.
pub const MAX_DIGITS: usize = Wide::BITS / 4;

const EVEN: u64 = 0x5555_5555_5555_5555;

#[derive(Debug, Clone)]
struct Level {
    /// Half the digit count of a slot at this level.
    g: usize,
    pow: Wide,
    recip: Wide,
    shift: usize,
}

/// Cached per-digit-count constants: `3^g`, the reciprocal of `3^g` and its
/// shift for each level `g = s'/2, s'/4, …, 1`, where `s'` is `s` rounded up
/// to a power of two.
#[derive(Debug, Clone)]
pub struct ConversionPlan {
    s: usize,
    s_pad: usize,
    levels: Vec<Level>,
}

impl ConversionPlan {
    pub fn new(s: usize) -> Self {
        assert!(s >= 1, "digit count must be positive");
        assert!(s <= MAX_DIGITS, "at most {MAX_DIGITS} digits fit the scratch");
        let s_pad = s.next_power_of_two();
        let mut levels = Vec::new();
        let mut g = s_pad / 2;
        while g >= 1 {
            let pow: Wide = crate::bignum::pow3_naive(g as u32);
            let v_max = pow.mul(&pow).sub_u64(1);
            let shift = v_max.mul(&pow).bit_len();
            let (q, r) = Wide::power_of_two(shift).divrem(&pow);
            let recip = if r.is_zero() { q } else { q.add_u64(1) };
            // The per-slot product and the quotient must both fit the slot.
            assert!(v_max.mul(&recip).bit_len() <= 8 * g);
            assert!(pow.bit_len() <= 8 * g - shift.min(8 * g));
            levels.push(Level {
                g,
                pow,
                recip,
                shift,
            });
            g /= 2;
        }
        Self { s, s_pad, levels }
    }

    pub fn digits(&self) -> usize {
        self.s
    }

    /// Bits held by the cached constants.
    pub fn bits_used(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.pow.bit_len() + l.recip.bit_len() + usize::BITS as usize)
            .sum::<usize>()
            + 2 * usize::BITS as usize
    }

    /// Converts `x = Σ a_j c^j` to `Σ a_j d^j`.
    pub fn convert(&self, x: &Big, c: u32, d: u32) -> Big {
        assert!((2..=4).contains(&c) && (2..=4).contains(&d), "radix must be 2, 3 or 4");
        let loose = self.unpack(x, c);
        check_digits(&loose, self.s, c.min(d));
        self.pack(&loose, d)
    }

    /// Regular value to loose 2-bit fields.
    pub fn base3_to_loose(&self, x: &Big) -> Big {
        self.unpack(x, 3)
    }

    /// Loose 2-bit fields (each `< 3`) to the base-3 value.
    pub fn loose_to_base3(&self, loose: &Big) -> Big {
        check_digits(loose, self.s, 3);
        self.pack(loose, 3)
    }

    fn unpack(&self, x: &Big, c: u32) -> Big {
        let s = self.s;
        match c {
            4 => {
                assert!(x.bit_len() <= 2 * s, "value has more than {s} base-4 digits");
                charge(1);
                *x
            }
            2 => {
                assert!(x.bit_len() <= s, "value has more than {s} base-2 digits");
                let mut out = Big::ZERO;
                for w in 0..(2 * s).div_ceil(64) {
                    out.limbs_mut()[w] = spread_bits(x.bits(32 * w, 32.min(Big::BITS - 32 * w)));
                }
                charge((2 * s).div_ceil(64));
                out
            }
            3 => {
                let mut xw: Wide = x.resize();
                for lvl in &self.levels {
                    let g = lvl.g;
                    let slots = self.s_pad / (2 * g);
                    let hi_mask = periodic_mask(lvl.pow.bit_len(), 8 * g, slots);
                    let hi = xw.wrapping_mul(&lvl.recip).shr(lvl.shift).and(&hi_mask);
                    let adj = Wide::power_of_two(4 * g).sub(&lvl.pow);
                    xw = xw.wrapping_add(&hi.wrapping_mul(&adj));
                    charge(WIDE_LIMBS * (lvl.recip.used_limbs() + adj.used_limbs() + 4));
                }
                // 4-bit fields down to 2-bit fields.
                let mut out = Big::ZERO;
                let limbs = xw.limbs();
                for w in 0..(2 * self.s_pad).div_ceil(64) {
                    let lo = compact_pairs(limbs[2 * w]);
                    let hi = compact_pairs(limbs[2 * w + 1]);
                    out.limbs_mut()[w] = lo | (hi << 32);
                }
                charge(WIDE_LIMBS);
                assert!(
                    out.bit_len() <= 2 * s,
                    "value is not below 3^{s}"
                );
                out
            }
            _ => unreachable!(),
        }
    }

    fn pack(&self, loose: &Big, d: u32) -> Big {
        let s = self.s;
        match d {
            4 => *loose,
            2 => {
                let mut out = Big::ZERO;
                for w in 0..(2 * s).div_ceil(64) {
                    out.set_bits(32 * w, 32, compact_bits(loose.limbs()[w]));
                }
                charge((2 * s).div_ceil(64));
                out
            }
            3 => {
                let mut xw = Wide::ZERO;
                for w in 0..(2 * self.s_pad).div_ceil(64) {
                    let v = loose.limbs()[w];
                    xw.limbs_mut()[2 * w] = spread_pairs(v);
                    xw.limbs_mut()[2 * w + 1] = spread_pairs(v >> 32);
                }
                for lvl in self.levels.iter().rev() {
                    let g = lvl.g;
                    let slots = self.s_pad / (2 * g);
                    let mask = periodic_mask(4 * g, 8 * g, slots);
                    let lo = xw.and(&mask);
                    let hi = xw.shr(4 * g).and(&mask);
                    xw = lo.wrapping_add(&hi.wrapping_mul(&lvl.pow));
                    charge(WIDE_LIMBS * (lvl.pow.used_limbs() + 4));
                }
                xw.resize()
            }
            _ => unreachable!(),
        }
    }
}

/// Low `width` bits set in each of `count` consecutive `period`-bit slots,
/// built by doubling.
fn periodic_mask(width: usize, period: usize, count: usize) -> Wide {
    let mut m = Wide::low_mask(width);
    let mut covered = 1;
    while covered < count {
        m = m.or(&m.shl(period * covered));
        covered *= 2;
        charge(WIDE_LIMBS);
    }
    m.and(&Wide::low_mask((period * count).min(Wide::BITS)))
}

/// Asserts that the loose vector holds only digits below `bound` in its first
/// `s` fields and nothing above.
fn check_digits(loose: &Big, s: usize, bound: u32) {
    assert!(loose.bit_len() <= 2 * s, "digits beyond position {s}");
    let bad = loose.limbs().iter().any(|&w| match bound {
        2 => w & !EVEN != 0,
        3 => w & (w >> 1) & EVEN != 0,
        _ => false,
    });
    charge(loose.used_limbs().max(1));
    assert!(!bad, "digit not below {bound}");
}

/// `Σ a_j d^j` for `x = Σ a_j c^j`, with `s` digits.
pub fn convert_base(x: &Big, c: u32, d: u32, s: usize) -> Big {
    ConversionPlan::new(s).convert(x, c, d)
}

#[cfg(test)]
mod tests {
    use super::super::oracle;
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(convert_base(&Big::from_u64(7), 3, 4, 3), Big::from_u64(9));
        assert_eq!(convert_base(&Big::ZERO, 4, 3, 8), Big::ZERO);
        assert_eq!(convert_base(&Big::from_u64(5), 3, 4, 2), Big::from_u64(6));
    }

    #[test]
    fn large_round_trip() {
        for s in [1usize, 2, 3, 31, 64, 100, 200, 250, 256] {
            let plan = ConversionPlan::new(s);
            let top: Big = crate::bignum::pow3_naive(s as u32).sub_u64(1);
            for x in [Big::ZERO, Big::from_u64(1), top, top.divrem_u64(7).0] {
                let loose = plan.convert(&x, 3, 4);
                assert_eq!(loose, oracle::convert_base(&x, 3, 4, s));
                assert_eq!(plan.convert(&loose, 4, 3), x);
            }
        }
    }

    #[test]
    #[should_panic]
    fn rejects_three_in_base_four() {
        convert_base(&Big::from_u64(3), 4, 3, 2);
    }

    #[test]
    #[should_panic]
    fn rejects_zero_digits() {
        convert_base(&Big::from_u64(0), 4, 3, 0);
    }
}
