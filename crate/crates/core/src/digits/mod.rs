//! An array of `N` big digits, each in `[0, 3^q)`.
//!
//! Two backends share one interface:
//!
//! * [`PackedArray`] stores each digit in `F = ⌈q·log2 3⌉` bits, so access is
//!   one field read and the waste is below one bit per element.
//! * [`SpillArray`] lays the digits out on an implicit heap-ordered binary
//!   tree and lets the fractional part of each node spill into its parent,
//!   so the whole array costs `N·log2 3^q` bits plus `O(log² N)`. Access
//!   walks the root-to-node path.

mod packed;
mod spill;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::bignum::Big;
use crate::pow3::Pow3Mode;

pub use packed::PackedArray;
pub use spill::{g_step, LevelMode, LevelParams, SpillArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Packed,
    Spill,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "packed" => Ok(Backend::Packed),
            "spill" => Ok(Backend::Spill),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Packed => "packed",
            Backend::Spill => "spill",
        })
    }
}

/// Access counters. Updated with plain load/store pairs so that reads can
/// take `&self`; exact whenever one thread uses the array.
#[derive(Debug, Default)]
pub struct ArrayCounters {
    pub reads: AtomicU64,
    pub writes: AtomicU64,
    pub node_decodes: AtomicU64,
    pub node_encodes: AtomicU64,
    pub g_steps: AtomicU64,
    /// Sum over accesses of `depth(j) + 1`.
    pub depth_weight: AtomicU64,
}

impl Clone for ArrayCounters {
    fn clone(&self) -> Self {
        let c = |a: &AtomicU64| AtomicU64::new(a.load(Ordering::Relaxed));
        Self {
            reads: c(&self.reads),
            writes: c(&self.writes),
            node_decodes: c(&self.node_decodes),
            node_encodes: c(&self.node_encodes),
            g_steps: c(&self.g_steps),
            depth_weight: c(&self.depth_weight),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayStats {
    pub reads: u64,
    pub writes: u64,
    pub node_decodes: u64,
    pub node_encodes: u64,
    pub g_steps: u64,
    pub depth_weight: u64,
}

impl ArrayCounters {
    pub fn snapshot(&self) -> ArrayStats {
        let l = |a: &AtomicU64| a.load(Ordering::Relaxed);
        ArrayStats {
            reads: l(&self.reads),
            writes: l(&self.writes),
            node_decodes: l(&self.node_decodes),
            node_encodes: l(&self.node_encodes),
            g_steps: l(&self.g_steps),
            depth_weight: l(&self.depth_weight),
        }
    }
}

#[derive(Debug, Clone)]
pub enum DigitArray {
    Packed(PackedArray),
    Spill(SpillArray),
}

impl DigitArray {
    /// `len` digits of `q` trits each, all equal to `fill`. The mode picks
    /// the level-table policy of the spill backend and is ignored by the
    /// packed one.
    pub fn new(len: usize, q: usize, backend: Backend, mode: Pow3Mode, fill: &Big) -> Self {
        match backend {
            Backend::Packed => DigitArray::Packed(PackedArray::new(len, q, fill)),
            Backend::Spill => {
                DigitArray::Spill(SpillArray::new(len, q, LevelMode::from(mode), fill))
            }
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            DigitArray::Packed(_) => Backend::Packed,
            DigitArray::Spill(_) => Backend::Spill,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DigitArray::Packed(a) => a.len(),
            DigitArray::Spill(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Digit `j`, 1-based.
    #[inline]
    pub fn read(&self, j: usize) -> Big {
        match self {
            DigitArray::Packed(a) => a.read(j),
            DigitArray::Spill(a) => a.read(j),
        }
    }

    #[inline]
    pub fn write(&mut self, j: usize, v: &Big) {
        match self {
            DigitArray::Packed(a) => a.write(j, v),
            DigitArray::Spill(a) => a.write(j, v),
        }
    }

    pub fn bits_used(&self) -> usize {
        match self {
            DigitArray::Packed(a) => a.bits_used(),
            DigitArray::Spill(a) => a.bits_used(),
        }
    }

    /// Bits holding digit data (without tables and registers).
    pub fn payload_bits(&self) -> usize {
        match self {
            DigitArray::Packed(a) => a.payload_bits(),
            DigitArray::Spill(a) => a.payload_bits(),
        }
    }

    pub fn stats(&self) -> ArrayStats {
        match self {
            DigitArray::Packed(a) => a.counters().snapshot(),
            DigitArray::Spill(a) => a.counters().snapshot(),
        }
    }

    pub fn depth_max(&self) -> usize {
        node_depth(self.len().max(1))
    }

    /// Level-table stride; 1 for the packed backend, which has no levels.
    pub fn level_stride(&self) -> usize {
        match self {
            DigitArray::Packed(_) => 1,
            DigitArray::Spill(a) => a.stride(),
        }
    }
}

/// `⌊log2 j⌋`: the depth of heap node `j`.
#[inline]
pub fn node_depth(j: usize) -> usize {
    debug_assert!(j >= 1);
    (usize::BITS - 1 - j.leading_zeros()) as usize
}

/// Depth and height of heap node `j` in the tree with nodes `1..=n`.
pub fn node_geometry(j: usize, n: usize) -> (usize, usize) {
    assert!(j >= 1 && j <= n, "node {j} out of range 1..={n}");
    let d = node_depth(j);
    let big_d = node_depth(n);
    let span = big_d - d;
    let h = if (j << span) <= n { span } else { span - 1 };
    (d, h)
}

/// Reads `width` bits starting at `offset` as a big integer.
#[inline]
pub(crate) fn read_big(words: &[u64], offset: usize, width: usize) -> Big {
    let mut out = Big::ZERO;
    let limbs = out.limbs_mut();
    let mut done = 0;
    let mut i = 0;
    while done < width {
        let take = 64.min(width - done);
        limbs[i] = crate::kernels::read_bits(words, offset + done, take);
        done += take;
        i += 1;
    }
    out
}

#[inline]
pub(crate) fn write_big(words: &mut [u64], offset: usize, width: usize, v: &Big) {
    let mut done = 0;
    let mut i = 0;
    while done < width {
        let take = 64.min(width - done);
        crate::kernels::write_bits(words, offset + done, take, v.limbs()[i]);
        done += take;
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_examples() {
        assert_eq!(node_geometry(1, 7), (0, 2));
        assert_eq!(node_geometry(5, 7).0, 2);
        assert_eq!(node_geometry(1, 1), (0, 0));
        // Heights by brute force over explicit subtrees.
        for n in 1..200usize {
            for j in 1..=n {
                let mut deepest = 0;
                let mut frontier = vec![j];
                let mut level = 0;
                while !frontier.is_empty() {
                    deepest = level;
                    frontier = frontier
                        .iter()
                        .flat_map(|&x| [2 * x, 2 * x + 1])
                        .filter(|&c| c <= n)
                        .collect();
                    level += 1;
                }
                assert_eq!(node_geometry(j, n).1, deepest, "n={n} j={j}");
            }
        }
    }
}
