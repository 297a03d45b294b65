//! Bit positions inside one `F`-bit container and the conversions between
//! the compact and loose forms.
//!
//! ```text
//! compact   | bw [0,q) | count, entries | ...        | prev | next | 0     | . | tag=0 | 0 |
//! master    | low F-3Λ bits of the value            | prev | next | slave | . | tag=1 | 0 |
//! slave     | bw [0,q) | count, entries | reloc (3Λ) | master (Λ-1)             | 0 | 0 |
//! ```
//!
//! The pointer fields of masters and left compact containers sit at the same
//! offsets, so list surgery does not care which of the two it is editing.

use crate::bignum::Big;
use crate::kernels::{first_zero_pair, rank_word};

use super::params::StoreParams;
use super::Color;

#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub q: usize,
    pub lambda: usize,
    pub cap: usize,
    pub field_bits: usize,
    pub ptr_bits: usize,
    /// Start of the pointer area of left containers; also where a master's
    /// value is cut.
    pub split: usize,
    pub tag: usize,
    pub reloc: usize,
    pub reloc_bits: usize,
    pub master: usize,
    pub entries: usize,
    /// Bit `i·λ` set for every gray-list slot.
    ones: u64,
}

impl Layout {
    pub fn new(p: &StoreParams) -> Self {
        let f = p.field_bits;
        let l = p.log_n;
        let split = f - 3 * l;
        let ones = (0..p.gray_capacity).fold(0u64, |a, i| a | 1 << (i * p.lambda));
        let lay = Self {
            q: p.q,
            lambda: p.lambda,
            cap: p.gray_capacity,
            field_bits: f,
            ptr_bits: l - 1,
            split,
            tag: f - 2,
            reloc: f - 1 - 4 * l,
            reloc_bits: 3 * l,
            master: f - 1 - l,
            entries: p.q + p.lambda,
            ones,
        };
        assert!(lay.entries + lay.cap * lay.lambda <= lay.reloc);
        assert!(lay.split + 3 * lay.ptr_bits < lay.tag);
        assert!(lay.cap * lay.lambda <= 64);
        lay
    }

    #[inline]
    pub fn is_master(&self, x: &Big) -> bool {
        x.bit(self.tag)
    }

    #[inline]
    pub fn prev(&self, x: &Big) -> usize {
        x.bits(self.split, self.ptr_bits) as usize
    }

    #[inline]
    pub fn next(&self, x: &Big) -> usize {
        x.bits(self.split + self.ptr_bits, self.ptr_bits) as usize
    }

    #[inline]
    pub fn slave(&self, x: &Big) -> usize {
        x.bits(self.split + 2 * self.ptr_bits, self.ptr_bits) as usize
    }

    pub fn set_prev(&self, x: &mut Big, v: usize) {
        x.set_bits(self.split, self.ptr_bits, v as u64);
    }

    pub fn set_next(&self, x: &mut Big, v: usize) {
        x.set_bits(self.split + self.ptr_bits, self.ptr_bits, v as u64);
    }

    pub fn set_slave(&self, x: &mut Big, v: usize) {
        x.set_bits(self.split + 2 * self.ptr_bits, self.ptr_bits, v as u64);
    }

    /// Master pointer of a slave.
    #[inline]
    pub fn master_of(&self, x: &Big) -> usize {
        x.bits(self.master, self.ptr_bits) as usize
    }

    pub fn relocated(&self, x: &Big) -> Big {
        x.field(self.reloc, self.reloc_bits)
    }

    /// Value bits that stay in a master.
    pub fn low(&self, v: &Big) -> Big {
        v.and(&Big::low_mask(self.split))
    }

    /// Value bits that move to the slave.
    pub fn top(&self, v: &Big) -> Big {
        v.shr(self.split)
    }

    pub fn join(&self, low: &Big, top: &Big) -> Big {
        self.low(low).or(&top.shl(self.split))
    }

    /// A master holding `value`, with the given links.
    pub fn master_image(&self, value: &Big, prev: usize, next: usize, slave: usize) -> Big {
        let mut x = self.low(value);
        self.set_prev(&mut x, prev);
        self.set_next(&mut x, next);
        self.set_slave(&mut x, slave);
        x.set_bit(self.tag, true);
        x
    }

    /// Keeps the compact payload of `x` and makes it a left compact
    /// container with the given links.
    pub fn as_left(&self, x: &Big, prev: usize, next: usize) -> Big {
        let mut y = x.and(&Big::low_mask(self.reloc));
        self.set_prev(&mut y, prev);
        self.set_next(&mut y, next);
        y
    }

    /// Keeps the compact payload of `x` and makes it a slave.
    pub fn as_slave(&self, x: &Big, reloc: &Big, master: usize) -> Big {
        let mut y = x.and(&Big::low_mask(self.reloc));
        y.set_field(self.reloc, self.reloc_bits, reloc);
        y.set_bits(self.master, self.ptr_bits, master as u64);
        y
    }

    /// Replaces the compact payload of `x`, keeping everything from the
    /// relocation area upward.
    pub fn with_payload(&self, x: &Big, payload: &Big) -> Big {
        x.and(&Big::low_mask(self.reloc).not()).or(payload)
    }

    #[inline]
    pub fn gray_count(&self, x: &Big) -> usize {
        x.bits(self.q, self.lambda) as usize
    }

    #[inline]
    fn gray_word(&self, x: &Big) -> u64 {
        x.bits(self.entries, self.cap * self.lambda)
    }

    pub fn gray_entry(&self, x: &Big, k: usize) -> usize {
        x.bits(self.entries + k * self.lambda, self.lambda) as usize
    }

    fn ones(&self, count: usize) -> u64 {
        if count * self.lambda >= 64 {
            self.ones
        } else {
            self.ones & ((1u64 << (count * self.lambda)) - 1)
        }
    }

    /// Number of gray-list entries `<= i`.
    #[inline]
    pub fn gray_rank(&self, x: &Big, i: usize) -> usize {
        let count = self.gray_count(x);
        if count == 0 {
            return 0;
        }
        rank_word(i as u64, self.gray_word(x), self.ones(count), self.lambda)
    }

    #[inline]
    pub fn is_listed(&self, x: &Big, i: usize) -> bool {
        let r = self.gray_rank(x, i);
        r > 0 && self.gray_entry(x, r - 1) == i
    }

    /// Position of color `i` in the black-and-white vector.
    #[inline]
    pub fn bw_pos(&self, i: usize) -> usize {
        let half = self.q / 2;
        if i < half {
            2 * i
        } else {
            2 * (i - half) + 1
        }
    }

    #[inline]
    pub fn compact_color(&self, x: &Big, i: usize) -> Color {
        if x.bit(self.bw_pos(i)) {
            Color::White
        } else if self.is_listed(x, i) {
            Color::Gray
        } else {
            Color::Black
        }
    }

    /// Loose form of a compact payload.
    pub fn compact_to_loose(&self, x: &Big) -> Big {
        let q = self.q;
        let even_q = even_mask(q);
        let bw = x.field(0, q);
        let low = bw.and(&even_q).or(&bw.shr(1).and(&even_q).shl(q));
        let high = low.xor(&even_mask(2 * q)).shl(1);
        let mut loose = low.or(&high);
        for k in 0..self.gray_count(x) {
            loose.set_bits(2 * self.gray_entry(x, k), 2, 0);
        }
        loose
    }

    /// Compact payload (bits below the relocation area) for a loose vector,
    /// or `None` when it holds more grays than the list can take.
    pub fn loose_to_compact(&self, loose: &Big) -> Option<Big> {
        let q = self.q;
        let low = loose.and(&even_mask(2 * q));
        let mut x = low.and(&Big::low_mask(q)).or(&low.shr(q).shl(1));
        let mut count = 0;
        let mut at = 0;
        while let Some(i) = first_zero_pair(loose.limbs(), q, at) {
            if count == self.cap {
                return None;
            }
            x.set_bits(self.entries + count * self.lambda, self.lambda, i as u64);
            count += 1;
            at = i + 1;
        }
        x.set_bits(q, self.lambda, count as u64);
        Some(x)
    }

    /// Inserts `i` (not yet listed) into the gray list; false when full.
    pub fn list_insert(&self, x: &mut Big, i: usize) -> bool {
        let count = self.gray_count(x);
        if count == self.cap {
            return false;
        }
        let slot = self.gray_rank(x, i);
        crate::kernels::splice_in_place(
            x,
            self.entries,
            self.lambda,
            count,
            self.cap,
            slot,
            crate::kernels::Splice::Insert(i as u64),
        )
        .expect("gray list has room");
        x.set_bits(self.q, self.lambda, count as u64 + 1);
        true
    }

    /// Removes the listed entry `i`.
    pub fn list_remove(&self, x: &mut Big, i: usize) {
        let count = self.gray_count(x);
        let slot = self.gray_rank(x, i) - 1;
        debug_assert_eq!(self.gray_entry(x, slot), i);
        crate::kernels::splice_in_place(
            x,
            self.entries,
            self.lambda,
            count,
            self.cap,
            slot,
            crate::kernels::Splice::Delete,
        )
        .expect("entry is listed");
        x.set_bits(self.q, self.lambda, count as u64 - 1);
    }
}

/// Bits `0, 2, 4, …` below `width`.
pub fn even_mask(width: usize) -> Big {
    let mut m = Big::ZERO;
    for l in m.limbs_mut() {
        *l = 0x5555_5555_5555_5555;
    }
    m.and(&Big::low_mask(width))
}

/// Number of `00` fields among the first `q` fields of a loose vector.
pub fn loose_gray_count(loose: &Big, q: usize) -> usize {
    let z = loose.or(&loose.shr(1)).not().and(&even_mask(2 * q));
    z.count_ones() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{shuffle_halves, unshuffle_halves};

    fn layout(n: usize) -> Layout {
        StoreParams::new(n).unwrap().layout()
    }

    #[test]
    fn offsets_for_a_million() {
        let l = layout(1 << 20);
        assert_eq!(l.split, 317 - 60);
        assert_eq!(l.reloc, 317 - 1 - 80);
        assert_eq!(l.master, 317 - 21);
        assert_eq!(l.tag, 315);
        assert_eq!(l.entries, 208);
        assert_eq!(l.cap, 3);
    }

    #[test]
    fn compact_round_trip() {
        let l = layout(1 << 12);
        let q = l.q;
        let mut loose = Big::ZERO;
        for i in 0..q {
            let c = match i % 5 {
                0 | 3 => 2u64,
                _ => 1,
            };
            loose.set_bits(2 * i, 2, c);
        }
        for g in [0usize, q / 2, q - 1].iter().take(l.cap) {
            loose.set_bits(2 * g, 2, 0);
        }
        let x = l.loose_to_compact(&loose).unwrap();
        assert_eq!(l.compact_to_loose(&x), loose);
        for i in 0..q {
            let want = match loose.bits(2 * i, 2) {
                0 => Color::Gray,
                1 => Color::White,
                _ => Color::Black,
            };
            assert_eq!(l.compact_color(&x, i), want, "i={i}");
        }
        // The bw vector is the shuffle of the natural low-bit vector.
        let mut natural = Big::ZERO;
        for i in 0..q {
            natural.set_bit(i, loose.bit(2 * i));
        }
        assert_eq!(x.field(0, q), shuffle_halves(&natural, q));
        assert_eq!(unshuffle_halves(&x.field(0, q), q), natural);
    }

    #[test]
    fn overfull_loose_is_rejected() {
        let l = layout(1 << 12);
        let loose = Big::ZERO; // all gray
        assert!(l.loose_to_compact(&loose).is_none());
        assert_eq!(loose_gray_count(&loose, l.q), l.q);
    }

    #[test]
    fn list_edits_keep_order() {
        let l = layout(1 << 20);
        let mut x = Big::ZERO;
        assert!(l.list_insert(&mut x, 150));
        assert!(l.list_insert(&mut x, 3));
        assert!(l.list_insert(&mut x, 77));
        assert!(!l.list_insert(&mut x, 9));
        let got: Vec<usize> = (0..3).map(|k| l.gray_entry(&x, k)).collect();
        assert_eq!(got, vec![3, 77, 150]);
        assert!(l.is_listed(&x, 77) && !l.is_listed(&x, 78));
        l.list_remove(&mut x, 77);
        assert_eq!(l.gray_count(&x), 2);
        assert_eq!((l.gray_entry(&x, 0), l.gray_entry(&x, 1)), (3, 150));
    }
}
