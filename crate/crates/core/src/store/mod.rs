//! Vertex colors in `N = ⌊n/q⌋` containers of `q` colors each, held in a
//! big-digit array, plus a short loose block for the leftover vertices.
//!
//! A container is either regular (its digit is `Σ a_i 3^i`) or compact (a
//! black-and-white vector plus a short sorted list of its gray positions).
//! Containers `1..=μ` form the left part, the rest the right part, and `μ`
//! always equals the number of compact containers. That makes the regular
//! containers of the left part (masters) as many as the compact containers
//! of the right part (slaves), and each master parks the top `3Λ` bits of
//! its value in its own slave to make room for three pointers. The left
//! part's masters and non-gray-free compact containers are threaded into a
//! doubly linked iteration list through those pointers.
//!
//! Regular vs slave on the right is decided by following the candidate
//! master pointer back and checking that the master points at us.

mod layout;
mod params;
mod plain;

use serde::{Deserialize, Serialize};

use crate::bignum::Big;
use crate::digits::{ArrayStats, Backend, DigitArray};
use crate::kernels::{first_zero_pair, ConversionPlan};
use crate::pow3::{Pow3Mode, Pow3Provider};

pub use layout::{even_mask, loose_gray_count, Layout};
pub use params::{
    ceil_log2, floor_log2, min_color_bits, n_max, n_min, universe, ParamsError, StoreParams,
    MODEL_WORD_BITS,
};
pub use plain::PlainColors;

/// μ, list head and tail, gray total, both pebbles, the pass kind and the
/// pass-start μ.
pub const CHAIN_REGISTER_BITS: usize = 8 * 64;
/// n, Λ, q, λ, N, F, the gray capacity and the gray-list slot pattern.
pub const PARAM_REGISTER_BITS: usize = 8 * 64;
/// Cursor and target of the checkout, on top of the `2q`-bit scratch.
pub const CHECKOUT_REGISTER_BITS: usize = 2 * 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Color {
    Gray = 0,
    White = 1,
    Black = 2,
}

impl Color {
    pub fn bits(self) -> u64 {
        self as u64
    }

    pub fn from_bits(b: u64) -> Color {
        match b {
            0 => Color::Gray,
            1 => Color::White,
            2 => Color::Black,
            _ => panic!("invalid color field {b:#b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Repr {
    Regular,
    Master,
    Compact,
    Slave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    Exploration,
    Consolidation,
}

/// What a checkout holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Container(usize),
    Leftover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pebble {
    At(usize),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Right,
    Iteration,
    Leftover,
}

#[derive(Debug, Clone)]
struct Checkout {
    target: Target,
    scratch: Big,
    cursor: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreCounters {
    pub conversions_to_regular: u64,
    pub compactions: u64,
    /// Color changes of vertices that live in containers.
    pub color_changes: u64,
    /// Gray vertices handed out by checkouts of containers.
    pub vertex_enumerations: u64,
    pub leftover_enumerations: u64,
    pub container_checkouts: u64,
    pub gray_free_checkouts: u64,
    pub splices: u64,
    /// Rebalances that edited a container other than the converted one.
    pub pointer_surgeries: u64,
    pub max_touched: u64,
    pub list_appends: u64,
    pub list_unlinks: u64,
}

/// One pass of both pebbles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassStats {
    pub kind: RoundKind,
    pub mu_start: usize,
    pub mu_min: usize,
    pub mu_max: usize,
    pub mu_end: usize,
    pub containers_enumerated: u64,
    pub gray_free_enumerated: u64,
    pub vertices_enumerated: u64,
}

impl PassStats {
    /// μ moved only down in exploration and only up in consolidation.
    pub fn monotone(&self) -> bool {
        match self.kind {
            RoundKind::Exploration => self.mu_max == self.mu_start,
            RoundKind::Consolidation => self.mu_min == self.mu_start,
        }
    }
}

#[derive(Debug, Clone)]
struct Pass {
    stats: PassStats,
    right: usize,
    leftover_pending: bool,
    current: Option<(Source, Target)>,
}

/// The succinct color store.
#[derive(Debug, Clone)]
pub struct ColorStore {
    p: StoreParams,
    lay: Layout,
    array: DigitArray,
    pow3: Pow3Provider,
    plan: ConversionPlan,
    leftover: Vec<u64>,
    mu: usize,
    head: usize,
    tail: usize,
    gray_total: u64,
    checkout: Option<Checkout>,
    pebble: Pebble,
    pass: Option<Pass>,
    counters: StoreCounters,
    check: CheckLevel,
    audit: Option<Audit>,
}

/// How much structural checking runs after each mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckLevel {
    #[default]
    Off,
    /// Re-examines only the containers written since the last check,
    /// against shadow counts of compact containers and grays.
    Touched,
    /// Full scan of every container.
    Full,
}

/// Shadow state for [`CheckLevel::Touched`]. Instrumentation only; not
/// part of the working-memory ledger.
#[derive(Debug, Clone)]
struct Audit {
    dirty: Vec<usize>,
    compact: Vec<bool>,
    grays: Vec<u32>,
    compact_count: usize,
    gray_sum: u64,
}

impl ColorStore {
    /// All vertices white, every container compact with an empty gray list,
    /// `μ = N`, empty iteration list.
    pub fn new(n: usize, backend: Backend, mode: Pow3Mode) -> Result<Self, ParamsError> {
        let p = StoreParams::new(n)?;
        let lay = p.layout();
        let mut white = Big::ZERO;
        for i in 0..p.q {
            white.set_bit(lay.bw_pos(i), true);
        }
        let array = DigitArray::new(p.containers, p.q, backend, mode, &white);
        let mut leftover = vec![0u64; (2 * p.leftover).div_ceil(64)];
        for o in 0..p.leftover {
            crate::kernels::write_bits(&mut leftover, 2 * o, 2, Color::White.bits());
        }
        Ok(Self {
            lay,
            array,
            pow3: Pow3Provider::new(mode, p.q),
            plan: ConversionPlan::new(p.q),
            leftover,
            mu: p.containers,
            head: 0,
            tail: 0,
            gray_total: 0,
            checkout: None,
            pebble: Pebble::End,
            pass: None,
            counters: StoreCounters::default(),
            check: CheckLevel::Off,
            audit: None,
            p,
        })
    }

    /// Structural checking after every mutation; a violation panics.
    pub fn set_check_level(&mut self, level: CheckLevel) {
        self.check = level;
        self.audit = (level == CheckLevel::Touched).then(|| {
            let nn = self.p.containers;
            let mut a = Audit {
                dirty: Vec::new(),
                compact: vec![false; nn + 1],
                grays: vec![0; nn + 1],
                compact_count: 0,
                gray_sum: 0,
            };
            for j in 1..=nn {
                let (c, g) = self.container_facts(j);
                a.compact[j] = c;
                a.grays[j] = g;
                a.compact_count += c as usize;
                a.gray_sum += g as u64;
            }
            a
        });
    }

    pub fn params(&self) -> &StoreParams {
        &self.p
    }

    pub fn layout(&self) -> &Layout {
        &self.lay
    }

    pub fn n(&self) -> usize {
        self.p.n
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn gray_total(&self) -> u64 {
        self.gray_total
    }

    pub fn counters(&self) -> StoreCounters {
        self.counters
    }

    pub fn array_stats(&self) -> ArrayStats {
        self.array.stats()
    }

    pub fn array(&self) -> &DigitArray {
        &self.array
    }

    pub fn pow3(&self) -> &Pow3Provider {
        &self.pow3
    }

    pub fn plan(&self) -> &ConversionPlan {
        &self.plan
    }

    /// Container index and offset of `v`, or `None` for a leftover vertex.
    #[inline]
    pub fn locate(&self, v: usize) -> Option<(usize, usize)> {
        assert!(v >= 1 && v <= self.p.n, "vertex {v} out of range 1..={}", self.p.n);
        let z = v - 1;
        let j = z / self.p.q + 1;
        (j <= self.p.containers).then(|| (j, z % self.p.q))
    }

    fn leftover_offset(&self, v: usize) -> usize {
        v - 1 - self.p.containers * self.p.q
    }

    // ---- bits ----

    /// Working bits: digit array, power table, conversion plan, leftover
    /// block, checkout scratch and registers.
    pub fn bits_used(&self) -> usize {
        self.array.bits_used()
            + self.pow3.bits_used()
            + self.plan.bits_used()
            + self.leftover_bits()
            + self.scratch_bits()
            + CHAIN_REGISTER_BITS
            + PARAM_REGISTER_BITS
    }

    pub fn leftover_bits(&self) -> usize {
        2 * self.p.leftover
    }

    pub fn scratch_bits(&self) -> usize {
        2 * self.p.q + CHECKOUT_REGISTER_BITS
    }

    // ---- representation ----

    #[inline]
    fn read(&self, j: usize) -> Big {
        self.array.read(j)
    }

    #[inline]
    fn write(&mut self, j: usize, x: &Big) {
        self.array.write(j, x);
        if let Some(a) = &mut self.audit {
            a.dirty.push(j);
        }
    }

    pub fn representation_of(&self, j: usize) -> Repr {
        assert!(j >= 1 && j <= self.p.containers, "container {j} out of range");
        let x = self.read(j);
        self.classify(j, &x)
    }

    #[inline]
    fn classify(&self, j: usize, x: &Big) -> Repr {
        if j <= self.mu {
            if self.lay.is_master(x) {
                Repr::Master
            } else {
                Repr::Compact
            }
        } else if self.master_if_slave(j, x, self.mu).is_some() {
            Repr::Slave
        } else {
            Repr::Regular
        }
    }

    /// The master of right-part container `j` under boundary `mu`, if `j`
    /// is a slave.
    fn master_if_slave(&self, j: usize, x: &Big, mu: usize) -> Option<usize> {
        let m = self.lay.master_of(x);
        if m == 0 || m > mu {
            return None;
        }
        let y = self.read(m);
        (self.lay.is_master(&y) && self.lay.slave(&y) == j).then_some(m)
    }

    /// The digit value of a regular container, merged with its relocated
    /// bits when it is a master.
    fn regular_value(&self, j: usize, x: &Big, repr: Repr) -> Big {
        match repr {
            Repr::Regular => *x,
            Repr::Master => {
                let s = self.read(self.lay.slave(x));
                self.lay.join(x, &self.lay.relocated(&s))
            }
            _ => unreachable!("container {j} is not regular"),
        }
    }

    /// Stores a new value into a regular container without changing its role.
    fn store_regular(&mut self, j: usize, x: &Big, repr: Repr, value: &Big) {
        match repr {
            Repr::Regular => self.write(j, value),
            Repr::Master => {
                let l = self.lay;
                let img = x.and(&Big::low_mask(l.split).not()).or(&l.low(value));
                self.write(j, &img);
                let s = l.slave(x);
                let mut sx = self.read(s);
                sx.set_field(l.reloc, l.reloc_bits, &l.top(value));
                self.write(s, &sx);
            }
            _ => unreachable!(),
        }
    }

    /// Loose form of container `j` as stored.
    fn container_loose(&self, j: usize) -> Big {
        let x = self.read(j);
        match self.classify(j, &x) {
            Repr::Compact | Repr::Slave => self.lay.compact_to_loose(&x),
            r => self.plan.base3_to_loose(&self.regular_value(j, &x, r)),
        }
    }

    fn digit_of(&self, value: &Big, i: usize) -> u64 {
        value.divrem(&self.pow3.pow3(i)).0.mod3()
    }

    // ---- colors ----

    pub fn get_color(&self, v: usize) -> Color {
        let Some((j, i)) = self.locate(v) else {
            let o = self.leftover_offset(v);
            return Color::from_bits(crate::kernels::read_bits(&self.leftover, 2 * o, 2));
        };
        if let Some(c) = &self.checkout {
            if c.target == Target::Container(j) {
                return Color::from_bits(c.scratch.bits(2 * i, 2));
            }
        }
        let x = self.read(j);
        match self.classify(j, &x) {
            Repr::Compact | Repr::Slave => self.lay.compact_color(&x, i),
            r => Color::from_bits(self.digit_of(&self.regular_value(j, &x, r), i)),
        }
    }

    pub fn set_color(&mut self, v: usize, c: Color) {
        let Some((j, i)) = self.locate(v) else {
            let o = self.leftover_offset(v);
            let old = Color::from_bits(crate::kernels::read_bits(&self.leftover, 2 * o, 2));
            if old != c {
                crate::kernels::write_bits(&mut self.leftover, 2 * o, 2, c.bits());
                self.adjust_total(old, c);
            }
            return;
        };
        if let Some(co) = &mut self.checkout {
            if co.target == Target::Container(j) {
                let old = Color::from_bits(co.scratch.bits(2 * i, 2));
                if old != c {
                    co.scratch.set_bits(2 * i, 2, c.bits());
                    self.counters.color_changes += 1;
                    self.adjust_total(old, c);
                }
                return;
            }
        }
        let x = self.read(j);
        let repr = self.classify(j, &x);
        match repr {
            Repr::Compact | Repr::Slave => self.set_compact(j, i, x, repr, c),
            _ => {
                let value = self.regular_value(j, &x, repr);
                let old = self.digit_of(&value, i);
                if old == c.bits() {
                    return;
                }
                let pw = self.pow3.pow3(i);
                let value = if c.bits() > old {
                    value.add(&pw.mul_u64(c.bits() - old))
                } else {
                    value.sub(&pw.mul_u64(old - c.bits()))
                };
                self.store_regular(j, &x, repr, &value);
                self.counters.color_changes += 1;
                self.adjust_total(Color::from_bits(old), c);
            }
        }
        self.after_mutation();
    }

    fn set_compact(&mut self, j: usize, i: usize, mut x: Big, repr: Repr, c: Color) {
        let l = self.lay;
        let old = l.compact_color(&x, i);
        if old == c {
            return;
        }
        self.counters.color_changes += 1;
        self.adjust_total(old, c);
        let before = l.gray_count(&x);
        if c == Color::Gray {
            if !l.list_insert(&mut x, i) {
                let mut loose = l.compact_to_loose(&x);
                loose.set_bits(2 * i, 2, Color::Gray.bits());
                self.regularize(j, &loose);
                return;
            }
            self.counters.splices += 1;
        } else if old == Color::Gray {
            l.list_remove(&mut x, i);
            self.counters.splices += 1;
        }
        x.set_bit(l.bw_pos(i), c == Color::White);
        self.write(j, &x);
        if repr == Repr::Compact {
            let after = l.gray_count(&x);
            if before == 0 && after > 0 {
                self.append(j);
            } else if before > 0 && after == 0 {
                self.unlink(j);
            }
        }
    }

    fn adjust_total(&mut self, old: Color, new: Color) {
        if old == Color::Gray {
            self.gray_total -= 1;
        }
        if new == Color::Gray {
            self.gray_total += 1;
        }
    }

    // ---- iteration list ----

    fn linked(&self, j: usize) -> bool {
        self.head == j || self.lay.prev(&self.read(j)) != 0
    }

    fn edit<F: FnOnce(&Layout, &mut Big)>(&mut self, j: usize, f: F) {
        let mut x = self.read(j);
        f(&self.lay, &mut x);
        self.write(j, &x);
    }

    fn append(&mut self, j: usize) {
        let t = self.tail;
        self.edit(j, |l, x| {
            l.set_prev(x, t);
            l.set_next(x, 0);
        });
        if t != 0 {
            self.edit(t, |l, x| l.set_next(x, j));
        } else {
            self.head = j;
        }
        self.tail = j;
        if self.pebble == Pebble::End {
            self.pebble = Pebble::At(j);
        }
        self.counters.list_appends += 1;
    }

    fn unlink(&mut self, j: usize) {
        let x = self.read(j);
        let (p, n) = (self.lay.prev(&x), self.lay.next(&x));
        if self.pebble == Pebble::At(j) {
            self.pebble = if n != 0 { Pebble::At(n) } else { Pebble::End };
        }
        if p != 0 {
            self.edit(p, |l, x| l.set_next(x, n));
        } else {
            self.head = n;
        }
        if n != 0 {
            self.edit(n, |l, x| l.set_prev(x, p));
        } else {
            self.tail = p;
        }
        self.edit(j, |l, x| {
            l.set_prev(x, 0);
            l.set_next(x, 0);
        });
        self.counters.list_unlinks += 1;
    }

    /// Containers of the iteration list, head to tail.
    pub fn iteration_list(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut j = self.head;
        while j != 0 {
            out.push(j);
            assert!(out.len() <= self.p.containers, "iteration list has a cycle");
            j = self.lay.next(&self.read(j));
        }
        out
    }

    // ---- boundary moves ----

    fn set_mu(&mut self, mu: usize) {
        self.mu = mu;
        if let Some(pass) = &mut self.pass {
            pass.stats.mu_min = pass.stats.mu_min.min(mu);
            pass.stats.mu_max = pass.stats.mu_max.max(mu);
        }
    }

    fn note_touched(&mut self, touched: &[usize]) {
        let mut t: Vec<usize> = touched.to_vec();
        t.sort_unstable();
        t.dedup();
        assert!(t.len() <= 4, "rebalance touched {} containers: {t:?}", t.len());
        if t.len() > 1 {
            self.counters.pointer_surgeries += 1;
        }
        self.counters.max_touched = self.counters.max_touched.max(t.len() as u64);
    }

    /// Compact container `j` becomes regular with the colors in `loose`;
    /// the boundary moves left by one and the chain is repaired.
    fn regularize(&mut self, j: usize, loose: &Big) {
        let l = self.lay;
        let value = self.plan.loose_to_base3(loose);
        let mu0 = self.mu;
        self.counters.conversions_to_regular += 1;
        if j == mu0 {
            if self.linked(j) {
                self.unlink(j);
            }
            self.set_mu(mu0 - 1);
            self.write(j, &value);
            self.note_touched(&[j]);
        } else if j < mu0 {
            let partner = mu0;
            let px = self.read(partner);
            let mut touched = vec![j, partner];
            let slave = if l.is_master(&px) {
                let s = l.slave(&px);
                touched.push(s);
                let sx = self.read(s);
                let full = l.join(&px, &l.relocated(&sx));
                self.unlink(partner);
                self.write(partner, &full);
                self.write(s, &l.as_slave(&sx, &l.top(&value), j));
                s
            } else {
                if self.linked(partner) {
                    self.unlink(partner);
                }
                let px = self.read(partner);
                self.write(partner, &l.as_slave(&px, &l.top(&value), j));
                partner
            };
            self.set_mu(mu0 - 1);
            let was_linked = self.linked(j);
            let jx = self.read(j);
            let img = l.master_image(&value, l.prev(&jx), l.next(&jx), slave);
            self.write(j, &img);
            if !was_linked {
                self.append(j);
            }
            self.note_touched(&touched);
        } else {
            let jx = self.read(j);
            let m = self
                .master_if_slave(j, &jx, mu0)
                .expect("compact right container has a master");
            let parked = l.relocated(&jx);
            let partner = mu0;
            let mut touched = vec![j, m, partner];
            if partner == m {
                let mx = self.read(m);
                let full = l.join(&mx, &parked);
                self.unlink(m);
                self.write(m, &full);
            } else {
                let px = self.read(partner);
                if l.is_master(&px) {
                    let s2 = l.slave(&px);
                    touched.push(s2);
                    let sx = self.read(s2);
                    let full = l.join(&px, &l.relocated(&sx));
                    self.unlink(partner);
                    self.write(partner, &full);
                    self.write(s2, &l.as_slave(&sx, &parked, m));
                    self.edit(m, |l, x| l.set_slave(x, s2));
                } else {
                    if self.linked(partner) {
                        self.unlink(partner);
                    }
                    let px = self.read(partner);
                    self.write(partner, &l.as_slave(&px, &parked, m));
                    self.edit(m, |l, x| l.set_slave(x, partner));
                }
            }
            self.set_mu(mu0 - 1);
            self.write(j, &value);
            self.note_touched(&touched);
        }
    }

    /// Right-part container `b` (about to join the left part) as seen before
    /// the move: its slave master, if any.
    fn right_master(&self, b: usize, mu0: usize) -> Option<usize> {
        let bx = self.read(b);
        self.master_if_slave(b, &bx, mu0)
    }

    /// Regular container `j` becomes compact with the colors in `loose`
    /// (at most `gray_capacity` grays); the boundary moves right by one.
    fn compactify(&mut self, j: usize, loose: &Big) {
        let l = self.lay;
        let payload = l
            .loose_to_compact(loose)
            .expect("compactify needs a short gray list");
        let grays = l.gray_count(&payload);
        let mu0 = self.mu;
        let b = mu0 + 1;
        self.counters.compactions += 1;
        if j == b {
            self.set_mu(b);
            self.write(j, &payload);
            if grays > 0 {
                self.append(j);
            }
            self.note_touched(&[j]);
            return;
        }
        // Classify the incoming partner before anything moves.
        let b_master = self.right_master(b, mu0);
        if j <= mu0 {
            let jx = self.read(j);
            let s = l.slave(&jx);
            let mut touched = vec![j, s, b];
            self.write(j, &l.as_left(&payload, l.prev(&jx), l.next(&jx)));
            if grays == 0 {
                self.unlink(j);
            }
            self.set_mu(b);
            if b == s {
                let sx = self.read(s);
                self.write(s, &l.as_left(&sx, 0, 0));
                if l.gray_count(&sx) > 0 {
                    self.append(s);
                }
            } else if let Some(m2) = b_master {
                touched.push(m2);
                let bx = self.read(b);
                let parked = l.relocated(&bx);
                self.write(b, &l.as_left(&bx, 0, 0));
                if l.gray_count(&bx) > 0 {
                    self.append(b);
                }
                let sx = self.read(s);
                self.write(s, &l.as_slave(&sx, &parked, m2));
                self.edit(m2, |l, x| l.set_slave(x, s));
            } else {
                let bv = self.read(b);
                let sx = self.read(s);
                self.write(s, &l.as_slave(&sx, &l.top(&bv), b));
                self.write(b, &l.master_image(&bv, 0, 0, s));
                self.append(b);
            }
            self.note_touched(&touched);
        } else {
            let mut touched = vec![j, b];
            self.set_mu(b);
            if let Some(m2) = b_master {
                touched.push(m2);
                let bx = self.read(b);
                let parked = l.relocated(&bx);
                self.write(b, &l.as_left(&bx, 0, 0));
                if l.gray_count(&bx) > 0 {
                    self.append(b);
                }
                self.write(j, &l.as_slave(&payload, &parked, m2));
                self.edit(m2, |l, x| l.set_slave(x, j));
            } else {
                let bv = self.read(b);
                self.write(j, &l.as_slave(&payload, &l.top(&bv), b));
                self.write(b, &l.master_image(&bv, 0, 0, j));
                self.append(b);
            }
            self.note_touched(&touched);
        }
    }

    // ---- checkout ----

    pub fn current(&self) -> Option<Target> {
        self.checkout.as_ref().map(|c| c.target)
    }

    /// Copies the colors of `t` into the loose scratch; until
    /// [`checkout_end`](Self::checkout_end) all access to them goes there.
    pub fn checkout_begin(&mut self, t: Target) {
        assert!(self.checkout.is_none(), "a container is already checked out");
        let scratch = match t {
            Target::Container(j) => {
                assert!(j >= 1 && j <= self.p.containers, "container {j} out of range");
                let s = self.container_loose(j);
                self.counters.container_checkouts += 1;
                let empty = loose_gray_count(&s, self.p.q) == 0;
                if empty {
                    self.counters.gray_free_checkouts += 1;
                }
                if let Some(pass) = &mut self.pass {
                    pass.stats.containers_enumerated += 1;
                    if empty {
                        pass.stats.gray_free_enumerated += 1;
                    }
                }
                s
            }
            // The leftover block is loose already and is edited in place.
            Target::Leftover => Big::ZERO,
        };
        self.checkout = Some(Checkout {
            target: t,
            scratch,
            cursor: 0,
        });
    }

    /// Next gray vertex at or after the cursor.
    pub fn checkout_next_gray(&mut self) -> Option<usize> {
        let base = self.p.containers * self.p.q;
        let co = self.checkout.as_mut().expect("no active checkout");
        let (found, offset) = match co.target {
            Target::Container(j) => (
                first_zero_pair(co.scratch.limbs(), self.p.q, co.cursor),
                (j - 1) * self.p.q,
            ),
            Target::Leftover => (
                first_zero_pair(&self.leftover, self.p.leftover, co.cursor),
                base,
            ),
        };
        let i = found?;
        co.cursor = i + 1;
        match co.target {
            Target::Container(_) => self.counters.vertex_enumerations += 1,
            Target::Leftover => self.counters.leftover_enumerations += 1,
        }
        if let Some(pass) = &mut self.pass {
            pass.stats.vertices_enumerated += 1;
        }
        Some(offset + i + 1)
    }

    /// Writes the scratch back. A short gray list makes the container
    /// compact (converting a regular one only when compaction is allowed in
    /// the current pass); otherwise it is regular.
    pub fn checkout_end(&mut self) {
        let co = self.checkout.take().expect("no active checkout");
        let Target::Container(j) = co.target else {
            self.after_mutation();
            return;
        };
        let loose = co.scratch;
        let allow_compaction = match &self.pass {
            Some(p) => p.stats.kind == RoundKind::Consolidation,
            None => true,
        };
        let x = self.read(j);
        let repr = self.classify(j, &x);
        let l = self.lay;
        match repr {
            Repr::Compact | Repr::Slave => match l.loose_to_compact(&loose) {
                Some(payload) => self.write(j, &l.with_payload(&x, &payload)),
                None => self.regularize(j, &loose),
            },
            Repr::Regular | Repr::Master => {
                let short = loose_gray_count(&loose, self.p.q) <= l.cap;
                if allow_compaction && short {
                    self.compactify(j, &loose);
                } else {
                    let value = self.plan.loose_to_base3(&loose);
                    self.store_regular(j, &x, repr, &value);
                }
            }
        }
        // Membership changes caused by the edits in the scratch were held
        // back until now.
        if j <= self.mu {
            let x = self.read(j);
            let want = l.is_master(&x) || l.gray_count(&x) > 0;
            match (self.linked(j), want) {
                (false, true) => self.append(j),
                (true, false) => self.unlink(j),
                _ => {}
            }
        }
        self.after_mutation();
    }

    // ---- pebbles ----

    /// Starts a pass over the right list (leftover block first) and the
    /// iteration list.
    pub fn pass_begin(&mut self, kind: RoundKind) {
        assert!(self.checkout.is_none(), "pass started during a checkout");
        self.pebble = if self.head != 0 {
            Pebble::At(self.head)
        } else {
            Pebble::End
        };
        self.pass = Some(Pass {
            stats: PassStats {
                kind,
                mu_start: self.mu,
                mu_min: self.mu,
                mu_max: self.mu,
                mu_end: self.mu,
                containers_enumerated: 0,
                gray_free_enumerated: 0,
                vertices_enumerated: 0,
            },
            right: self.p.containers,
            leftover_pending: self.p.leftover > 0,
            current: None,
        });
    }

    /// Moves past the previous target and picks the next pebbled one, or
    /// `None` when both pebbles wait at the ends of their lists.
    pub fn pass_next(&mut self) -> Option<Target> {
        assert!(self.checkout.is_none(), "finish the checkout first");
        let mu = self.mu;
        let pebble = self.pebble;
        let next_of = |s: &Self, j: usize| s.lay.next(&s.read(j));
        let pass = self.pass.as_ref().expect("no active pass");
        let mut right = pass.right;
        let mut leftover_pending = pass.leftover_pending;
        let mut iter = pebble;
        match pass.current {
            Some((Source::Leftover, _)) => leftover_pending = false,
            Some((Source::Right, Target::Container(j))) => right = right.min(j - 1),
            Some((Source::Iteration, Target::Container(j)))
                if iter == Pebble::At(j) => {
                    let n = next_of(self, j);
                    iter = if n != 0 { Pebble::At(n) } else { Pebble::End };
                }
            _ => {}
        }
        let pick = if leftover_pending {
            Some((Source::Leftover, Target::Leftover))
        } else if right > mu {
            Some((Source::Right, Target::Container(right)))
        } else if let Pebble::At(j) = iter {
            Some((Source::Iteration, Target::Container(j)))
        } else {
            None
        };
        self.pebble = iter;
        let pass = self.pass.as_mut().unwrap();
        pass.right = right;
        pass.leftover_pending = leftover_pending;
        pass.current = pick;
        pick.map(|(_, t)| t)
    }

    pub fn pass_finish(&mut self) -> PassStats {
        assert!(self.checkout.is_none(), "pass finished during a checkout");
        let mut pass = self.pass.take().expect("no active pass");
        pass.stats.mu_end = self.mu;
        pass.stats
    }

    // ---- checks ----

    fn after_mutation(&mut self) {
        let result = match self.check {
            CheckLevel::Off => return,
            CheckLevel::Full => self.check_invariants(),
            CheckLevel::Touched => self.check_touched(),
        };
        if let Err(e) = result {
            panic!("store invariant violated: {e}");
        }
    }

    /// Whether `j` is compact, and its gray count (from the scratch when
    /// it is checked out).
    fn container_facts(&self, j: usize) -> (bool, u32) {
        let x = self.read(j);
        let compact = matches!(self.classify(j, &x), Repr::Compact | Repr::Slave);
        let loose = match &self.checkout {
            Some(c) if c.target == Target::Container(j) => c.scratch,
            _ => self.container_loose(j),
        };
        (compact, loose_gray_count(&loose, self.p.q) as u32)
    }

    /// Checks everything a single container can violate.
    fn check_container(&self, j: usize) -> Result<(), String> {
        let l = self.lay;
        let nn = self.p.containers;
        let x = self.read(j);
        let r = self.classify(j, &x);
        let cur = matches!(&self.checkout, Some(c) if c.target == Target::Container(j));
        match r {
            Repr::Master => {
                let s = l.slave(&x);
                if s <= self.mu || s > nn {
                    return Err(format!("master {j} points at {s}, not a right container"));
                }
                let sx = self.read(s);
                if l.master_of(&sx) != j {
                    return Err(format!("slave {s} of {j} points back at {}", l.master_of(&sx)));
                }
            }
            Repr::Compact | Repr::Slave => {
                let c = l.gray_count(&x);
                if c > l.cap {
                    return Err(format!("container {j} lists {c} grays"));
                }
                for k in 0..c {
                    let e = l.gray_entry(&x, k);
                    if e >= self.p.q || (k > 0 && l.gray_entry(&x, k - 1) >= e) {
                        return Err(format!("gray list of {j} is not sorted and in range"));
                    }
                    if x.bit(l.bw_pos(e)) {
                        return Err(format!("vertex {e} of {j} is listed and white"));
                    }
                }
                if r == Repr::Compact && l.slave(&x) != 0 {
                    return Err(format!("compact {j} has a third pointer"));
                }
            }
            Repr::Regular => {}
        }
        if j <= self.mu {
            let linked = self.linked(j);
            let want = r == Repr::Master || l.gray_count(&x) > 0;
            if !cur && linked != want {
                return Err(format!("container {j}: linked {linked} but should be {want}"));
            }
            if linked {
                let (p, n) = (l.prev(&x), l.next(&x));
                if p != 0 && (p > self.mu || l.next(&self.read(p)) != j) {
                    return Err(format!("bad forward link into {j}"));
                }
                if n != 0 && (n > self.mu || l.prev(&self.read(n)) != j) {
                    return Err(format!("bad back link into {j}"));
                }
                if (p == 0) != (self.head == j) || (n == 0) != (self.tail == j) {
                    return Err(format!("list ends disagree at {j}"));
                }
            }
        } else if self.head == j || self.tail == j {
            return Err(format!("right container {j} is a list end"));
        }
        Ok(())
    }

    fn check_touched(&mut self) -> Result<(), String> {
        let mut a = self.audit.take().expect("audit enabled");
        if let Some(Target::Container(j)) = self.current() {
            a.dirty.push(j);
        }
        a.dirty.sort_unstable();
        a.dirty.dedup();
        let mut result = Ok(());
        for &j in &a.dirty {
            if let Err(e) = self.check_container(j) {
                result = Err(e);
                break;
            }
            let (c, g) = self.container_facts(j);
            a.compact_count = a.compact_count - a.compact[j] as usize + c as usize;
            a.gray_sum = a.gray_sum - a.grays[j] as u64 + g as u64;
            a.compact[j] = c;
            a.grays[j] = g;
        }
        a.dirty.clear();
        if result.is_ok() {
            let left = (0..self.p.leftover)
                .filter(|&o| crate::kernels::read_bits(&self.leftover, 2 * o, 2) == 0)
                .count() as u64;
            if a.compact_count != self.mu {
                result = Err(format!("{} compact containers but μ = {}", a.compact_count, self.mu));
            } else if a.gray_sum + left != self.gray_total {
                result = Err(format!(
                    "{} grays counted, total says {}",
                    a.gray_sum + left,
                    self.gray_total
                ));
            } else if (self.head == 0) != (self.tail == 0) {
                result = Err("list head and tail disagree".into());
            }
        }
        self.audit = Some(a);
        result
    }

    /// Full structural scan: representation partition, master-slave
    /// bijection, gray lists, iteration-list membership, value ranges and
    /// the gray total.
    pub fn check_invariants(&self) -> Result<(), String> {
        let l = self.lay;
        let nn = self.p.containers;
        let cur = match self.checkout.as_ref().map(|c| c.target) {
            Some(Target::Container(j)) => j,
            _ => 0,
        };
        let mut compact = 0;
        let mut grays = 0u64;
        let mut masters = 0;
        let mut slaves = 0;
        let mut should_link = vec![false; nn + 1];
        for j in 1..=nn {
            let x = self.read(j);
            let r = self.classify(j, &x);
            match r {
                Repr::Master => {
                    masters += 1;
                    should_link[j] = true;
                    let s = l.slave(&x);
                    if s <= self.mu || s > nn {
                        return Err(format!("master {j} points at {s}, not a right container"));
                    }
                    let sx = self.read(s);
                    if l.master_of(&sx) != j {
                        return Err(format!("slave {s} of {j} points back at {}", l.master_of(&sx)));
                    }
                    if l.slave(&x) == 0 {
                        return Err(format!("master {j} has no slave"));
                    }
                }
                Repr::Slave => slaves += 1,
                _ => {}
            }
            if matches!(r, Repr::Compact | Repr::Slave) {
                compact += 1;
                let c = l.gray_count(&x);
                if c > l.cap {
                    return Err(format!("container {j} lists {c} grays"));
                }
                for k in 0..c {
                    let e = l.gray_entry(&x, k);
                    if e >= self.p.q || (k > 0 && l.gray_entry(&x, k - 1) >= e) {
                        return Err(format!("gray list of {j} is not sorted and in range"));
                    }
                    if x.bit(l.bw_pos(e)) {
                        return Err(format!("vertex {e} of {j} is listed and white"));
                    }
                }
                if r == Repr::Compact {
                    should_link[j] = c > 0;
                    if l.slave(&x) != 0 {
                        return Err(format!("compact {j} has a third pointer"));
                    }
                }
            }
            if j == cur {
                let co = self.checkout.as_ref().unwrap();
                grays += loose_gray_count(&co.scratch, self.p.q) as u64;
            } else {
                grays += loose_gray_count(&self.container_loose(j), self.p.q) as u64;
            }
        }
        if compact != self.mu {
            return Err(format!("{compact} compact containers but μ = {}", self.mu));
        }
        if masters != slaves {
            return Err(format!("{masters} masters but {slaves} slaves"));
        }
        let list = self.iteration_list();
        let mut seen = vec![false; nn + 1];
        let mut prev = 0;
        for &j in &list {
            if j > self.mu {
                return Err(format!("right container {j} is in the iteration list"));
            }
            if self.lay.prev(&self.read(j)) != prev {
                return Err(format!("bad back link at {j}"));
            }
            seen[j] = true;
            prev = j;
        }
        if self.tail != prev {
            return Err(format!("tail {} but list ends at {prev}", self.tail));
        }
        for j in 1..=self.mu {
            if j != cur && seen[j] != should_link[j] {
                return Err(format!(
                    "container {j}: linked {} but should be {}",
                    seen[j], should_link[j]
                ));
            }
        }
        for o in 0..self.p.leftover {
            let b = crate::kernels::read_bits(&self.leftover, 2 * o, 2);
            if b == 3 {
                return Err(format!("leftover field {o} holds 11"));
            }
            grays += (b == 0) as u64;
        }
        if grays != self.gray_total {
            return Err(format!("{grays} grays counted, total says {}", self.gray_total));
        }
        Ok(())
    }
}

/// What the search needs from a color store.
pub trait ColorStorage {
    fn n(&self) -> usize;
    fn get(&self, v: usize) -> Color;
    fn set(&mut self, v: usize, c: Color);
    fn gray_total(&self) -> u64;
    fn pass_begin(&mut self, kind: RoundKind);
    /// Checks out the next pebbled target; false when the pass is over.
    fn pass_checkout_next(&mut self) -> bool;
    fn next_gray(&mut self) -> Option<usize>;
    fn release(&mut self);
    fn pass_finish(&mut self) -> PassStats;
    fn bits_used(&self) -> usize;
    fn succinct(&self) -> bool;
    /// Container count `N`; zero for stores without containers.
    fn containers(&self) -> usize;
}

impl ColorStorage for ColorStore {
    fn n(&self) -> usize {
        self.p.n
    }

    #[inline]
    fn get(&self, v: usize) -> Color {
        self.get_color(v)
    }

    #[inline]
    fn set(&mut self, v: usize, c: Color) {
        self.set_color(v, c)
    }

    fn gray_total(&self) -> u64 {
        self.gray_total
    }

    fn pass_begin(&mut self, kind: RoundKind) {
        ColorStore::pass_begin(self, kind)
    }

    fn pass_checkout_next(&mut self) -> bool {
        match self.pass_next() {
            Some(t) => {
                self.checkout_begin(t);
                true
            }
            None => false,
        }
    }

    fn next_gray(&mut self) -> Option<usize> {
        self.checkout_next_gray()
    }

    fn release(&mut self) {
        self.checkout_end()
    }

    fn pass_finish(&mut self) -> PassStats {
        ColorStore::pass_finish(self)
    }

    fn bits_used(&self) -> usize {
        ColorStore::bits_used(self)
    }

    fn succinct(&self) -> bool {
        true
    }

    fn containers(&self) -> usize {
        self.p.containers
    }
}
