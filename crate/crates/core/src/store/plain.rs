use crate::kernels::{first_zero_pair, read_bits, write_bits};

use super::{Color, ColorStorage, PassStats, RoundKind};

/// Two bits per vertex and a linear scan per pass. Used below the smallest
/// size the succinct store supports, and as a reference in tests.
#[derive(Debug, Clone)]
pub struct PlainColors {
    n: usize,
    words: Vec<u64>,
    gray_total: u64,
    cursor: Option<usize>,
    pass: Option<(RoundKind, bool, u64)>,
}

/// Gray total, cursor and pass flags.
const REGISTER_BITS: usize = 3 * 64;

impl PlainColors {
    pub fn new(n: usize) -> Self {
        let mut words = vec![0u64; (2 * n).div_ceil(64)];
        for v in 0..n {
            write_bits(&mut words, 2 * v, 2, Color::White.bits());
        }
        Self {
            n,
            words,
            gray_total: 0,
            cursor: None,
            pass: None,
        }
    }
}

impl ColorStorage for PlainColors {
    fn n(&self) -> usize {
        self.n
    }

    fn get(&self, v: usize) -> Color {
        assert!(v >= 1 && v <= self.n, "vertex {v} out of range");
        Color::from_bits(read_bits(&self.words, 2 * (v - 1), 2))
    }

    fn set(&mut self, v: usize, c: Color) {
        let old = self.get(v);
        if old == c {
            return;
        }
        write_bits(&mut self.words, 2 * (v - 1), 2, c.bits());
        if old == Color::Gray {
            self.gray_total -= 1;
        }
        if c == Color::Gray {
            self.gray_total += 1;
        }
    }

    fn gray_total(&self) -> u64 {
        self.gray_total
    }

    fn pass_begin(&mut self, kind: RoundKind) {
        self.pass = Some((kind, false, 0));
    }

    fn pass_checkout_next(&mut self) -> bool {
        let pass = self.pass.as_mut().expect("no active pass");
        if pass.1 {
            return false;
        }
        pass.1 = true;
        self.cursor = Some(0);
        true
    }

    fn next_gray(&mut self) -> Option<usize> {
        let at = self.cursor.expect("no active scan");
        let i = first_zero_pair(&self.words, self.n, at)?;
        self.cursor = Some(i + 1);
        if let Some(p) = &mut self.pass {
            p.2 += 1;
        }
        Some(i + 1)
    }

    fn release(&mut self) {
        self.cursor = None;
    }

    fn pass_finish(&mut self) -> PassStats {
        let (kind, _, seen) = self.pass.take().expect("no active pass");
        PassStats {
            kind,
            mu_start: 0,
            mu_min: 0,
            mu_max: 0,
            mu_end: 0,
            containers_enumerated: 0,
            gray_free_enumerated: 0,
            vertices_enumerated: seen,
        }
    }

    fn bits_used(&self) -> usize {
        2 * self.n + REGISTER_BITS
    }

    fn succinct(&self) -> bool {
        false
    }

    fn containers(&self) -> usize {
        0
    }
}
