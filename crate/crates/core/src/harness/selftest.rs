//! Kernel-versus-oracle sweeps and a small end-to-end corpus, shared by
//! `bfs selftest` and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bfs::Record;
use crate::bignum::Big;
use crate::digits::Backend;
use crate::graph::{gen, Graph};
use crate::kernels::{
    find_first_zero_field, oracle, rank_packed, shuffle_halves, splice_field, unshuffle_halves,
    ConversionPlan, PackedFields, Splice,
};
use crate::pow3::Pow3Mode;

use super::{reference_bfs, run, verify_run, RunConfig};

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub cases: u64,
    pub mismatches: u64,
}

impl Check {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            mismatches: 0,
        }
    }

    fn see(&mut self, ok: bool) {
        self.cases += 1;
        self.mismatches += !ok as u64;
    }

    pub fn ok(&self) -> bool {
        self.mismatches == 0 && self.cases > 0
    }
}

/// Every digit vector of length `1..=max_s` over `[0, min(c, d))`, for all
/// radix pairs in `{2,3,4}²`.
pub fn convert_exhaustive(max_s: usize) -> Check {
    let mut ck = Check::new("convert_base exhaustive");
    for s in 1..=max_s {
        let plan = ConversionPlan::new(s);
        for c in 2..=4u32 {
            for d in 2..=4u32 {
                let b = c.min(d) as u64;
                let mut digits = vec![0u64; s];
                loop {
                    let x = oracle::from_digits(&digits, c as u64);
                    let want = oracle::from_digits(&digits, d as u64);
                    ck.see(plan.convert(&x, c, d) == want);
                    if !odometer(&mut digits, b) {
                        break;
                    }
                }
            }
        }
    }
    ck
}

/// Random digit vectors up to `max_s` digits, checked against the oracle
/// and for the base 3 → 4 → 3 round trip.
pub fn convert_random(cases: u64, max_s: usize, seed: u64) -> Check {
    let mut ck = Check::new("convert_base random");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let s = rng.gen_range(1..=max_s);
        let plan = ConversionPlan::new(s);
        let digits: Vec<u64> = (0..s).map(|_| rng.gen_range(0..3)).collect();
        let x = oracle::from_digits(&digits, 3);
        let y = plan.convert(&x, 3, 4);
        ck.see(y == oracle::from_digits(&digits, 4) && plan.convert(&y, 4, 3) == x);
    }
    ck
}

fn odometer(digits: &mut [u64], base: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// All field vectors with `m ≤ max_m` and `f ≤ max_f`, every key.
pub fn fields_exhaustive(max_m: usize, max_f: usize) -> (Check, Check) {
    let mut zero = Check::new("find_first_zero_field exhaustive");
    let mut rank = Check::new("rank_packed exhaustive");
    for f in 1..=max_f {
        for m in 0..=max_m {
            let total = 1u64 << (m * f);
            let mut vals = vec![0u64; m];
            for bits in 0..total {
                for (i, v) in vals.iter_mut().enumerate() {
                    *v = (bits >> (i * f)) & ((1 << f) - 1);
                }
                let p = PackedFields::from_words(vec![bits], m, f);
                zero.see(find_first_zero_field(&p) == oracle::find_first_zero(&vals));
                if (m as u64) < (1u64 << f) {
                    for k in 0..(1u64 << f) {
                        rank.see(rank_packed(k, &p) == oracle::rank(k, &vals));
                    }
                }
            }
        }
    }
    (zero, rank)
}

/// Random field vectors of up to 64 fields of up to 64 bits.
pub fn fields_random(cases: u64, seed: u64) -> (Check, Check) {
    let mut zero = Check::new("find_first_zero_field random");
    let mut rank = Check::new("rank_packed random");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let f = rng.gen_range(1..=64usize);
        let max_m = if f >= 7 { 64 } else { (1usize << f) - 1 };
        let m = rng.gen_range(0..=max_m);
        let top = if f == 64 { u64::MAX } else { (1u64 << f) - 1 };
        let zero_p = rng.gen_range(0.0..0.3);
        let vals: Vec<u64> = (0..m)
            .map(|_| if rng.gen_bool(zero_p) { 0 } else { rng.gen_range(0..=top) })
            .collect();
        let p = PackedFields::from_values(&vals, f);
        zero.see(find_first_zero_field(&p) == oracle::find_first_zero(&vals));
        let k = if m > 0 && rng.gen_bool(0.5) {
            vals[rng.gen_range(0..m)]
        } else {
            rng.gen_range(0..=top)
        };
        rank.see(rank_packed(k, &p) == oracle::rank(k, &vals));
    }
    (zero, rank)
}

/// Shuffle against its definition and the unshuffle round trip, on random
/// even lengths up to `max_q`.
pub fn shuffle_random(cases: u64, max_q: usize, seed: u64) -> Check {
    let mut ck = Check::new("shuffle/unshuffle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let q = 2 * rng.gen_range(1..=max_q / 2);
        let bits: Vec<bool> = (0..q).map(|_| rng.gen()).collect();
        let x = oracle::big_of_bits(&bits);
        let y = shuffle_halves(&x, q);
        ck.see(oracle::bits_of(&y, Big::BITS) == pad(oracle::shuffle(&bits)) && unshuffle_halves(&y, q) == x);
    }
    ck
}

fn pad(mut bits: Vec<bool>) -> Vec<bool> {
    bits.resize(Big::BITS, false);
    bits
}

/// Sorted-list inserts and deletes against the oracle.
pub fn splice_random(cases: u64, seed: u64) -> Check {
    let mut ck = Check::new("splice_field");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let f = rng.gen_range(1..=12usize);
        let cap = rng.gen_range(1..=16usize);
        let len = rng.gen_range(0..=cap);
        let mut vals: Vec<u64> = (0..len).map(|_| rng.gen_range(0..1u64 << f)).collect();
        vals.sort();
        let list = PackedFields::from_values(&vals, f);
        if len < cap && rng.gen_bool(0.5) {
            let v = rng.gen_range(0..1u64 << f);
            let slot = vals.partition_point(|&a| a < v);
            let got = splice_field(&list, slot, Splice::Insert(v), cap).map(|p| p.values());
            ck.see(got == Ok(oracle::splice(&vals, slot, Some(v))));
        } else if len > 0 {
            let slot = rng.gen_range(0..len);
            let got = splice_field(&list, slot, Splice::Delete, cap).map(|p| p.values());
            ck.see(got == Ok(oracle::splice(&vals, slot, None)));
        } else {
            let got = splice_field(&list, 0, Splice::Insert(0), 0);
            ck.see(got.is_err());
        }
    }
    ck
}

/// Every backend/mode pair the search can run with.
pub fn configurations() -> Vec<RunConfig> {
    let mut out = Vec::new();
    for backend in [Backend::Packed, Backend::Spill] {
        for pow3 in [Pow3Mode::Full, Pow3Mode::Strided(4), Pow3Mode::Squaring] {
            out.push(RunConfig {
                backend,
                pow3,
                ..RunConfig::default()
            });
        }
    }
    out
}

/// A few graphs of each shape, verified against the reference search.
pub fn corpus_check(seed: u64) -> Check {
    let mut ck = Check::new("search corpus");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for directed in [false, true] {
        for n in [1usize, 2, 17, 300, 1100] {
            let graphs: Vec<Graph> = vec![
                gen::gnm(n, n.min(n * (n - 1) / 2), rng.gen(), directed).unwrap(),
                gen::path(n, directed),
                gen::star(n, directed),
                gen::grid(n, directed),
            ];
            for g in graphs {
                let order = gen::random_order(n, rng.gen());
                let oracle = reference_bfs(&g, &order);
                for cfg in configurations() {
                    let mut out: Vec<Record> = Vec::new();
                    let ok = match run(&g, &order, RunConfig { audit: true, ..cfg }, &mut out) {
                        Ok(m) => verify_run(&g, &out, &oracle).pass && m.violations().is_empty(),
                        Err(_) => false,
                    };
                    ck.see(ok);
                }
            }
        }
    }
    ck
}

/// The checks `bfs selftest` runs; `exhaustive` adds the full small-case
/// sweeps.
pub fn selftest(exhaustive: bool) -> Vec<Check> {
    let mut out = Vec::new();
    let (s, mf, cases) = if exhaustive { (12, 3, 100_000) } else { (6, 2, 10_000) };
    out.push(convert_exhaustive(s));
    out.push(convert_random(cases / 10, 256, 1));
    let (z, r) = fields_exhaustive(if exhaustive { 8 } else { 6 }, mf);
    out.push(z);
    out.push(r);
    let (z, r) = fields_random(cases, 2);
    out.push(z);
    out.push(r);
    out.push(shuffle_random(cases / 10, 256, 3));
    out.push(splice_random(cases / 10, 4));
    out.push(corpus_check(5));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_selftest_passes() {
        for c in selftest(false) {
            assert!(c.ok(), "{c:?}");
        }
    }
}
