//! Powers of three below `3^q`, from a full table, a thinned table, or no
//! table at all.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::bignum::{pow3_naive, Big};

/// Bits charged for the provider's own registers (exponent, mode, counters).
pub const REGISTER_BITS: usize = 128;

/// How the powers are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "stride")]
pub enum Pow3Mode {
    /// Every power `3^0 … 3^{q-1}` is stored.
    Full,
    /// Only the powers with exponent divisible by the stride are stored.
    Strided(usize),
    /// Nothing is stored; powers come from repeated squaring.
    Squaring,
}

impl Pow3Mode {
    /// The stride the mode implies for a table of `q` entries.
    pub fn stride(self, q: usize) -> usize {
        match self {
            Pow3Mode::Full => 1,
            Pow3Mode::Strided(t) => t,
            Pow3Mode::Squaring => q.max(1),
        }
    }
}

#[derive(Debug)]
pub struct Pow3Provider {
    mode: Pow3Mode,
    q: usize,
    field_bits: usize,
    table: Vec<Big>,
    multiplies: AtomicU64,
    calls: AtomicU64,
    max_multiplies: AtomicU64,
}

impl Clone for Pow3Provider {
    fn clone(&self) -> Self {
        Self {
            mode: self.mode,
            q: self.q,
            field_bits: self.field_bits,
            table: self.table.clone(),
            multiplies: AtomicU64::new(self.multiplies()),
            calls: AtomicU64::new(self.calls()),
            max_multiplies: AtomicU64::new(self.max_multiplies()),
        }
    }
}

impl Pow3Provider {
    pub fn new(mode: Pow3Mode, q: usize) -> Self {
        assert!(q >= 1, "q must be positive");
        let field_bits = pow3_naive::<{ crate::bignum::BIG_LIMBS }>(q as u32).bit_len();
        let table = match mode {
            Pow3Mode::Full => powers(q, 1),
            Pow3Mode::Strided(t) => {
                assert!(t >= 1, "stride must be at least 1");
                powers(q, t)
            }
            Pow3Mode::Squaring => Vec::new(),
        };
        Self {
            mode,
            q,
            field_bits,
            table,
            multiplies: AtomicU64::new(0),
            calls: AtomicU64::new(0),
            max_multiplies: AtomicU64::new(0),
        }
    }

    pub fn mode(&self) -> Pow3Mode {
        self.mode
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `⌈q·log2 3⌉`, the width of one stored power.
    pub fn field_bits(&self) -> usize {
        self.field_bits
    }

    pub fn table(&self) -> &[Big] {
        &self.table
    }

    /// `3^j` for `j < q`.
    pub fn pow3(&self, j: usize) -> Big {
        assert!(j < self.q, "exponent {j} out of range (q = {})", self.q);
        bump(&self.calls, 1);
        match self.mode {
            Pow3Mode::Full => self.table[j],
            Pow3Mode::Strided(t) => {
                let mut r = self.table[j / t];
                for _ in 0..j % t {
                    r = r.mul_u64(3);
                }
                self.charge((j % t) as u64);
                r
            }
            Pow3Mode::Squaring => {
                if j == 0 {
                    return Big::from_u64(1);
                }
                // Left to right over the exponent bits; 3r is a shift and an add.
                let top = usize::BITS - 1 - j.leading_zeros();
                let mut r = Big::from_u64(3);
                for b in (0..top).rev() {
                    r = r.mul(&r);
                    if (j >> b) & 1 == 1 {
                        r = r.add(&r.shl(1));
                    }
                }
                self.charge(top as u64);
                r
            }
        }
    }

    /// Table payload plus registers; squaring mode charges two working values.
    pub fn bits_used(&self) -> usize {
        let working = match self.mode {
            Pow3Mode::Squaring => 2 * self.field_bits,
            _ => 0,
        };
        self.table.len() * self.field_bits + working + REGISTER_BITS
    }

    /// Multiplications performed so far by reconstructions.
    pub fn multiplies(&self) -> u64 {
        self.multiplies.load(Ordering::Relaxed)
    }

    /// Most multiplications spent on one reconstruction.
    pub fn max_multiplies(&self) -> u64 {
        self.max_multiplies.load(Ordering::Relaxed)
    }

    fn charge(&self, k: u64) {
        bump(&self.multiplies, k);
        if k > self.max_multiplies() {
            self.max_multiplies.store(k, Ordering::Relaxed);
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

// Load-then-store: exact on one thread and never a locked instruction.
#[inline]
pub(crate) fn bump(c: &AtomicU64, by: u64) {
    c.store(c.load(Ordering::Relaxed) + by, Ordering::Relaxed);
}

fn powers(q: usize, t: usize) -> Vec<Big> {
    let step: Big = pow3_naive(t.min(q) as u32);
    let mut out = Vec::with_capacity(q.div_ceil(t));
    let mut cur = Big::from_u64(1);
    for j in (0..q).step_by(t) {
        out.push(cur);
        if j + t < q {
            cur = cur.mul(&step);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables() {
        let p = Pow3Provider::new(Pow3Mode::Full, 8);
        let want: Vec<u64> = vec![1, 3, 9, 27, 81, 243, 729, 2187];
        assert_eq!(p.table().iter().map(|b| b.low_u64()).collect::<Vec<_>>(), want);
        let p = Pow3Provider::new(Pow3Mode::Strided(4), 8);
        assert_eq!(p.table().iter().map(|b| b.low_u64()).collect::<Vec<_>>(), vec![1, 81]);
        assert_eq!(p.pow3(6).low_u64(), 729);
        assert_eq!(p.multiplies(), 2);
    }

    #[test]
    fn ledger_values() {
        assert_eq!(Pow3Provider::new(Pow3Mode::Full, 200).bits_used(), 63400 + REGISTER_BITS);
        assert_eq!(
            Pow3Provider::new(Pow3Mode::Strided(2), 200).bits_used(),
            31700 + REGISTER_BITS
        );
        let sq = Pow3Provider::new(Pow3Mode::Squaring, 200);
        assert!(sq.table().is_empty());
        assert!(sq.bits_used() <= 2 * 317 + 128);
    }

    #[test]
    fn every_mode_agrees() {
        for q in [1usize, 2, 7, 64, 200, 256] {
            let mut want = Big::from_u64(1);
            let modes = [
                Pow3Provider::new(Pow3Mode::Full, q),
                Pow3Provider::new(Pow3Mode::Strided(3), q),
                Pow3Provider::new(Pow3Mode::Strided(q + 5), q),
                Pow3Provider::new(Pow3Mode::Squaring, q),
            ];
            for j in 0..q {
                for p in &modes {
                    let before = p.multiplies();
                    assert_eq!(p.pow3(j), want, "q={q} j={j} mode={:?}", p.mode());
                    let used = p.multiplies() - before;
                    match p.mode() {
                        Pow3Mode::Strided(t) => assert!(used < t as u64),
                        Pow3Mode::Squaring => {
                            let lg = (usize::BITS - j.leading_zeros()) as u64;
                            assert!(used <= 2 * lg);
                        }
                        Pow3Mode::Full => assert_eq!(used, 0),
                    }
                }
                want = want.mul_u64(3);
            }
        }
    }
}
