use serde::{Deserialize, Serialize};

use crate::bignum::{pow3_naive, Big};
use crate::kernels::convert::MAX_DIGITS;

/// Word length assumed by the cost model.
pub const MODEL_WORD_BITS: usize = 64;

/// `⌊log2 3 · 2^64⌋`.
const LOG2_3_FIXED: u128 = 29_237_397_617_229_858_719;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("n = {n} is below the smallest supported size {n_min}")]
    TooSmall { n: usize, n_min: usize },
    #[error("n = {n} needs {q} digits per container; at most {max} are supported")]
    TooLarge { n: usize, q: usize, max: usize },
}

/// Sizes and bit offsets derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreParams {
    pub n: usize,
    pub w_model: usize,
    /// `⌊log2 n⌋`.
    pub log_n: usize,
    /// Colors per container, `10·⌊log2 n⌋`.
    pub q: usize,
    /// `⌈log2 q⌉`, the width of a gray-list entry.
    pub lambda: usize,
    /// Number of containers, `⌊n/q⌋`.
    pub containers: usize,
    /// `⌈q·log2 3⌉`.
    pub field_bits: usize,
    /// Bits between the end of the black-and-white vector and the relocation area.
    pub gray_budget: usize,
    pub gray_capacity: usize,
    /// Vertices past the last container.
    pub leftover: usize,
}

impl StoreParams {
    pub fn new(n: usize) -> Result<Self, ParamsError> {
        let n_min = n_min();
        if n < n_min {
            return Err(ParamsError::TooSmall { n, n_min });
        }
        let p = Self::unchecked(n);
        if p.q > MAX_DIGITS {
            return Err(ParamsError::TooLarge {
                n,
                q: p.q,
                max: MAX_DIGITS,
            });
        }
        debug_assert!(p.feasible());
        Ok(p)
    }

    /// The formulas without the feasibility checks.
    pub fn unchecked(n: usize) -> Self {
        assert!(n >= 2, "n must be at least 2");
        let log_n = floor_log2(n);
        let q = 10 * log_n;
        let lambda = ceil_log2(q);
        let containers = n / q;
        let field_bits = pow3_naive::<{ crate::bignum::BIG_LIMBS }>(q as u32).bit_len();
        let value_bits = field_bits - 1;
        let gray_budget =
            (value_bits as isize - q as isize - 3 * log_n as isize - (log_n as isize - 1) - 1)
                .max(0) as usize;
        let gray_capacity = if gray_budget >= lambda {
            (lambda - 1).min((gray_budget - lambda) / lambda)
        } else {
            0
        };
        Self {
            n,
            w_model: MODEL_WORD_BITS,
            log_n,
            q,
            lambda,
            containers,
            field_bits,
            gray_budget,
            gray_capacity,
            leftover: n - containers * q,
        }
    }

    fn feasible(&self) -> bool {
        self.containers >= 1
            && self.gray_capacity >= 1
            && ceil_log2(self.containers + 1) < self.log_n
    }

    pub fn value_bits(&self) -> usize {
        self.field_bits - 1
    }

    pub fn layout(&self) -> super::layout::Layout {
        super::layout::Layout::new(self)
    }
}

/// Smallest `n` from which every larger size (up to the supported maximum)
/// has a nonempty container array, a gray capacity of at least one and
/// pointers that fit `⌊log2 n⌋ − 1` bits.
pub fn n_min() -> usize {
    static CACHE: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *CACHE.get_or_init(|| {
        let max_log = MAX_DIGITS / 10;
        let mut best = 1usize << max_log;
        for log_n in (1..=max_log).rev() {
            let lo = 1usize << log_n;
            let hi = (lo << 1) - 1;
            let top = StoreParams::unchecked(hi);
            if top.gray_capacity == 0 || ceil_log2(top.containers + 1) >= log_n {
                break;
            }
            let q = 10 * log_n;
            if q > hi {
                break;
            }
            best = lo.max(q);
        }
        best
    })
}

/// Largest supported `n`.
pub fn n_max() -> usize {
    (1usize << (MAX_DIGITS / 10 + 1)) - 1
}

/// `⌈n·log2 3⌉`, the information-theoretic size of `n` colors.
pub fn min_color_bits(n: usize) -> u64 {
    let prod = n as u128 * LOG2_3_FIXED;
    let whole = (prod >> 64) as u64;
    // log2 3 is irrational, so the product is never an integer for n > 0.
    if n == 0 {
        0
    } else {
        whole + 1
    }
}

pub fn floor_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    if x == 1 {
        0
    } else {
        floor_log2(x - 1) + 1
    }
}

/// `3^q` as a big integer, for range checks.
pub fn universe(q: usize) -> Big {
    pow3_naive(q as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn million_vertex_example() {
        let p = StoreParams::new(1 << 20).unwrap();
        assert_eq!(
            (p.log_n, p.q, p.lambda, p.containers, p.field_bits, p.gray_capacity),
            (20, 200, 8, 5242, 317, 3)
        );
    }

    #[test]
    fn smallest_size() {
        let m = n_min();
        assert!(m <= 1024);
        assert!(StoreParams::new(m).is_ok());
        assert!(StoreParams::new(m - 1).is_err());
        for n in m..4096 {
            let p = StoreParams::new(n).unwrap();
            assert!(p.gray_capacity >= 1 && p.containers >= 1);
        }
    }

    #[test]
    fn color_bits() {
        assert_eq!(min_color_bits(1), 2);
        assert_eq!(min_color_bits(2), 4);
        assert_eq!(min_color_bits(1 << 20), 1_661_954);
    }
}
