use crate::bignum::{pow3_naive, Big};
use crate::pow3::bump;

use super::{read_big, write_big, ArrayCounters};

/// Bits for the length, the field width and the digit count.
const REGISTER_BITS: usize = 192;

/// Digit `j` occupies bits `[(j-1)·F, j·F)` of one flat bit vector.
#[derive(Debug, Clone)]
pub struct PackedArray {
    len: usize,
    field_bits: usize,
    universe: Big,
    words: Vec<u64>,
    counters: ArrayCounters,
}

impl PackedArray {
    pub fn new(len: usize, q: usize, fill: &Big) -> Self {
        assert!(len >= 1, "array needs at least one element");
        let universe: Big = pow3_naive(q as u32);
        assert!(*fill < universe, "fill value out of range");
        let field_bits = universe.bit_len();
        let mut a = Self {
            len,
            field_bits,
            universe,
            words: vec![0; (len * field_bits).div_ceil(64)],
            counters: ArrayCounters::default(),
        };
        if !fill.is_zero() {
            for j in 1..=len {
                write_big(&mut a.words, (j - 1) * field_bits, field_bits, fill);
            }
        }
        a
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn field_bits(&self) -> usize {
        self.field_bits
    }

    /// Bit offset of element `j`.
    pub fn offset(&self, j: usize) -> usize {
        (j - 1) * self.field_bits
    }

    #[inline]
    pub fn read(&self, j: usize) -> Big {
        assert!(j >= 1 && j <= self.len, "index {j} out of range");
        bump(&self.counters.reads, 1);
        bump(&self.counters.node_decodes, 1);
        bump(&self.counters.depth_weight, 1);
        read_big(&self.words, self.offset(j), self.field_bits)
    }

    #[inline]
    pub fn write(&mut self, j: usize, v: &Big) {
        assert!(j >= 1 && j <= self.len, "index {j} out of range");
        assert!(*v < self.universe, "digit out of range");
        bump(&self.counters.writes, 1);
        bump(&self.counters.node_encodes, 1);
        bump(&self.counters.depth_weight, 1);
        let off = self.offset(j);
        write_big(&mut self.words, off, self.field_bits, v);
    }

    pub fn payload_bits(&self) -> usize {
        self.len * self.field_bits
    }

    /// Payload, the universe constant, and the registers.
    pub fn bits_used(&self) -> usize {
        self.payload_bits() + self.field_bits + REGISTER_BITS
    }

    pub fn counters(&self) -> &ArrayCounters {
        &self.counters
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_and_ledger() {
        let a = PackedArray::new(5242, 200, &Big::ZERO);
        assert_eq!(a.field_bits(), 317);
        assert_eq!(a.offset(3), 634);
        assert_eq!(a.payload_bits(), 1_661_714);
    }

    #[test]
    fn read_write() {
        let mut a = PackedArray::new(4, 200, &Big::ZERO);
        assert!(a.read(3).is_zero());
        let top: Big = pow3_naive::<8>(200).sub_u64(1);
        a.write(2, &top);
        a.write(1, &Big::from_u64(5));
        assert_eq!(a.read(2), top);
        assert_eq!(a.read(1), Big::from_u64(5));
        assert!(a.read(3).is_zero());
    }
}
