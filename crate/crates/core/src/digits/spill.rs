//! Spill-over encoding on an implicit heap tree.
//!
//! Element `j` lives at heap node `j` (children `2j`, `2j+1`). A node holds
//!
//! ```text
//! V_j = A[j] + C·(spill_left + S_left·spill_right)  in  [0, K_j),  K_j = C·S_left·S_right
//! ```
//!
//! and stores only the low `k_j` bits of `V_j`; the rest, `V_j >> k_j`, is
//! the node's spill, a value below `s_j = ⌈K_j / 2^{k_j}⌉`, which its parent
//! absorbs. `k_j` is chosen so that `s_j ≤ 2^{Λ_s}`. The root's spill sits in
//! a register.
//!
//! Every subtree that is a perfect binary tree of height `h` shares the
//! parameters `(K_h, k_h, s_h)`, generated by `g: (K, k, s) ↦ (C·s², …)`
//! from the leaf parameters `x₀`. Only ancestors of node `N` can be
//! imperfect; their parameters are kept as explicit boundary records.

use std::sync::atomic::Ordering;

use serde::{Deserialize, Serialize};

use crate::bignum::{pow3_naive, Big};
use crate::pow3::{bump, Pow3Mode};

use super::{node_depth, read_big, write_big, ArrayCounters};

/// Policy for the per-height parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "stride")]
pub enum LevelMode {
    Full,
    Strided(usize),
    Recompute,
}

impl From<Pow3Mode> for LevelMode {
    fn from(m: Pow3Mode) -> Self {
        match m {
            Pow3Mode::Full => LevelMode::Full,
            Pow3Mode::Strided(t) => LevelMode::Strided(t),
            Pow3Mode::Squaring => LevelMode::Recompute,
        }
    }
}

/// Parameters shared by all perfect subtrees of height `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelParams {
    pub h: usize,
    /// Node universe `K_h`.
    pub universe: Big,
    /// Stored bits `k_h`.
    pub k: usize,
    /// Spill universe `s_h`.
    pub s: u64,
}

impl LevelParams {
    /// Splits `K` into stored bits and a spill of at most `lambda_s` bits.
    pub fn from_universe(h: usize, universe: Big, lambda_s: usize) -> Self {
        assert!(!universe.is_zero());
        let lg = universe.sub_u64(1).bit_len();
        let k = lg.saturating_sub(lambda_s);
        let s = universe
            .add(&Big::low_mask(k))
            .shr(k)
            .to_u64()
            .expect("spill universe fits a word");
        Self {
            h,
            universe,
            k,
            s,
        }
    }

    /// Leaf parameters: a node with no children has universe `C`.
    pub fn leaf(c: &Big, lambda_s: usize) -> Self {
        Self::from_universe(0, *c, lambda_s)
    }

    /// Splits a node value into (stored bits, spill).
    pub fn split(&self, v: &Big) -> (Big, u64) {
        let stored = v.and(&Big::low_mask(self.k));
        let spill = v.shr(self.k).to_u64().expect("spill fits a word");
        (stored, spill)
    }
}

/// Parameters of the next height: `K' = C·s²`.
pub fn g_step(c: &Big, lambda_s: usize, p: &LevelParams) -> LevelParams {
    let sq = Big::from_u128(p.s as u128 * p.s as u128);
    LevelParams::from_universe(p.h + 1, c.mul(&sq), lambda_s)
}

/// Stored bits and spill universe of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct NodeShape {
    k: usize,
    s: u64,
}

const MAX_HEIGHT: usize = 48;

/// Parameters for a contiguous range of heights, gathered once per access.
struct Chain {
    shapes: [NodeShape; MAX_HEIGHT],
}

/// Bits charged per stored parameter record beyond the universe itself.
const RECORD_BITS: usize = 96;
/// Length, trit count, spill width, depth and mode registers.
const REGISTER_BITS: usize = 320;

#[derive(Debug, Clone)]
pub struct SpillArray {
    len: usize,
    c: Big,
    lambda_s: usize,
    depth_max: usize,
    mode: LevelMode,
    stride: usize,
    /// Parameters for heights `0, t, 2t, …`.
    table: Vec<LevelParams>,
    /// Explicit shape of the depth-`d` ancestor of node `N`, if it is imperfect.
    boundary: Vec<Option<NodeShape>>,
    /// First payload bit of each depth.
    depth_off: Vec<usize>,
    words: Vec<u64>,
    payload_bits: usize,
    root_spill: u64,
    counters: ArrayCounters,
}

impl SpillArray {
    pub fn new(len: usize, q: usize, mode: LevelMode, fill: &Big) -> Self {
        assert!(len >= 1, "array needs at least one element");
        let c: Big = pow3_naive(q as u32);
        assert!(*fill < c, "fill value out of range");
        let lambda_s = (usize::BITS - len.leading_zeros()) as usize + 1;
        let depth_max = node_depth(len);
        assert!(depth_max < MAX_HEIGHT);

        let mut all = vec![LevelParams::leaf(&c, lambda_s)];
        for h in 1..=depth_max {
            let next = g_step(&c, lambda_s, &all[h - 1]);
            all.push(next);
        }
        let stride = match mode {
            LevelMode::Full => 1,
            LevelMode::Strided(t) => {
                assert!(t >= 1, "stride must be at least 1");
                t
            }
            LevelMode::Recompute => depth_max + 1,
        };
        let table: Vec<LevelParams> = all.iter().step_by(stride).copied().collect();

        let mut a = Self {
            len,
            c,
            lambda_s,
            depth_max,
            mode,
            stride,
            table,
            boundary: vec![None; depth_max + 1],
            depth_off: vec![0; depth_max + 2],
            words: Vec::new(),
            payload_bits: 0,
            root_spill: 0,
            counters: ArrayCounters::default(),
        };

        // Node values for perfect subtrees filled with `fill`.
        let mut perfect_val = Vec::with_capacity(depth_max + 1);
        for h in 0..=depth_max {
            let v = if h == 0 {
                *fill
            } else {
                let (_, sp) = all[h - 1].split(&perfect_val[h - 1]);
                let t = sp as u128 + all[h - 1].s as u128 * sp as u128;
                fill.add(&a.c.mul(&Big::from_u128(t)))
            };
            perfect_val.push(v);
        }

        // Boundary nodes bottom-up.
        let mut boundary_val: Vec<Option<Big>> = vec![None; depth_max + 1];
        let full_chain = Chain::from_params(&all);
        for d in (0..=depth_max).rev() {
            let node = a.ancestor(d);
            if a.is_perfect(node) {
                continue;
            }
            let child_state = |ch: usize, bv: &Vec<Option<Big>>, arr: &SpillArray| -> (u64, u64) {
                if ch > arr.len {
                    return (1, 0);
                }
                let cd = node_depth(ch);
                if ch == arr.ancestor(cd) && !arr.is_perfect(ch) {
                    let shape = arr.boundary[cd].unwrap();
                    let v = bv[cd].unwrap();
                    (shape.s, v.shr(shape.k).to_u64().unwrap())
                } else {
                    let h = arr.height(ch);
                    (all[h].s, all[h].split(&perfect_val[h]).1)
                }
            };
            let (sl, spl) = child_state(2 * node, &boundary_val, &a);
            let (sr, spr) = child_state(2 * node + 1, &boundary_val, &a);
            let universe = a.c.mul(&Big::from_u128(sl as u128 * sr as u128));
            let p = LevelParams::from_universe(0, universe, lambda_s);
            a.boundary[d] = Some(NodeShape { k: p.k, s: p.s });
            let t = spl as u128 + sl as u128 * spr as u128;
            boundary_val[d] = Some(fill.add(&a.c.mul(&Big::from_u128(t))));
        }

        // Payload layout per depth.
        let mut off = 0;
        for d in 0..=depth_max {
            a.depth_off[d] = off;
            let first = 1usize << d;
            let last = ((1usize << (d + 1)) - 1).min(len);
            let anc = a.ancestor(d);
            let kl = full_chain.shapes[depth_max - d].k;
            let kr = if d < depth_max {
                full_chain.shapes[depth_max - d - 1].k
            } else {
                0
            };
            off += (anc - first) * kl + a.shape(anc, &full_chain).k + (last - anc) * kr;
        }
        a.depth_off[depth_max + 1] = off;
        a.payload_bits = off;
        a.words = vec![0; off.div_ceil(64).max(1)];

        for j in 1..=len {
            let d = node_depth(j);
            let v = if j == a.ancestor(d) && !a.is_perfect(j) {
                boundary_val[d].unwrap()
            } else {
                perfect_val[a.height(j)]
            };
            let shape = a.shape(j, &full_chain);
            let stored = v.and(&Big::low_mask(shape.k));
            let o = a.offset(j, &full_chain);
            write_big(&mut a.words, o, shape.k, &stored);
            if j == 1 {
                a.root_spill = v.shr(shape.k).to_u64().unwrap();
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

    pub fn mode(&self) -> LevelMode {
        self.mode
    }

    /// Height distance between stored level parameters.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn spill_width(&self) -> usize {
        self.lambda_s
    }

    pub fn universe(&self) -> &Big {
        &self.c
    }

    pub fn depth_max(&self) -> usize {
        self.depth_max
    }

    pub fn counters(&self) -> &ArrayCounters {
        &self.counters
    }

    pub fn payload_bits(&self) -> usize {
        self.payload_bits
    }

    pub fn root_spill(&self) -> u64 {
        self.root_spill
    }

    /// Bits in the parameter table.
    pub fn table_bits(&self) -> usize {
        self.table
            .iter()
            .map(|p| p.universe.bit_len() + RECORD_BITS)
            .sum()
    }

    /// Bits in the boundary records and the per-depth offset table.
    pub fn exception_bits(&self) -> usize {
        let records = self.boundary.iter().filter(|b| b.is_some()).count();
        let offset_width = (usize::BITS - self.payload_bits.leading_zeros()) as usize;
        records * RECORD_BITS + self.depth_off.len() * offset_width
    }

    /// Transient bits used during one write: the stack of node values on the
    /// root path and the parameter chain.
    pub fn transient_bits(&self) -> usize {
        let node_bits = self.c.bit_len() + 2 * self.lambda_s;
        (self.depth_max + 1) * (node_bits + RECORD_BITS)
    }

    pub fn bits_used(&self) -> usize {
        self.payload_bits
            + self.table_bits()
            + self.exception_bits()
            + self.transient_bits()
            + (self.lambda_s + 1)
            + self.c.bit_len()
            + REGISTER_BITS
    }

    /// Parameters of height `h`, counting generator steps.
    pub fn level_params(&self, h: usize) -> LevelParams {
        assert!(h <= self.depth_max, "height {h} out of range");
        let base = h / self.stride;
        let mut p = self.table[base];
        let steps = h - base * self.stride;
        for _ in 0..steps {
            p = g_step(&self.c, self.lambda_s, &p);
        }
        bump(&self.counters.g_steps, steps as u64);
        p
    }

    fn ancestor(&self, d: usize) -> usize {
        self.len >> (self.depth_max - d)
    }

    fn height(&self, j: usize) -> usize {
        let d = node_depth(j);
        let span = self.depth_max - d;
        if (j << span) <= self.len {
            span
        } else {
            span - 1
        }
    }

    fn is_perfect(&self, j: usize) -> bool {
        let d = node_depth(j);
        if j != self.ancestor(d) {
            return true;
        }
        let span = self.depth_max - d;
        ((j + 1) << span) - 1 <= self.len
    }

    /// Parameters for heights `lo..=hi`, from the table where possible.
    fn chain(&self, lo: usize, hi: usize) -> Chain {
        let mut shapes = [NodeShape { k: 0, s: 1 }; MAX_HEIGHT];
        let mut steps = 0u64;
        let mut p = self.table[lo / self.stride];
        let mut h = p.h;
        while h < lo {
            p = g_step(&self.c, self.lambda_s, &p);
            h += 1;
            steps += 1;
        }
        shapes[h] = NodeShape { k: p.k, s: p.s };
        while h < hi {
            h += 1;
            if h.is_multiple_of(self.stride) {
                p = self.table[h / self.stride];
            } else {
                p = g_step(&self.c, self.lambda_s, &p);
                steps += 1;
            }
            shapes[h] = NodeShape { k: p.k, s: p.s };
        }
        bump(&self.counters.g_steps, steps);
        Chain { shapes }
    }

    fn shape(&self, j: usize, chain: &Chain) -> NodeShape {
        let d = node_depth(j);
        if j == self.ancestor(d) {
            if let Some(b) = self.boundary[d] {
                return b;
            }
        }
        chain.shapes[self.height(j)]
    }

    fn spill_universe(&self, j: usize, chain: &Chain) -> u64 {
        if j > self.len {
            1
        } else {
            self.shape(j, chain).s
        }
    }

    fn offset(&self, j: usize, chain: &Chain) -> usize {
        let d = node_depth(j);
        let first = 1usize << d;
        let anc = self.ancestor(d);
        let kl = chain.shapes[self.depth_max - d].k;
        let mut off = self.depth_off[d] + (j.min(anc) - first) * kl;
        if j > anc {
            let kr = chain.shapes[self.depth_max - d - 1].k;
            off += self.shape(anc, chain).k + (j - anc - 1) * kr;
        }
        off
    }

    fn stored(&self, j: usize, chain: &Chain) -> (Big, NodeShape) {
        let shape = self.shape(j, chain);
        let v = read_big(&self.words, self.offset(j, chain), shape.k);
        (v, shape)
    }

    fn chain_for(&self, j: usize) -> Chain {
        let dj = node_depth(j);
        let lo = (self.depth_max - dj).saturating_sub(1);
        self.chain(lo, self.depth_max)
    }

    /// Value of the child of `parent` on the path, given the parent's value.
    fn descend(&self, parent_val: &Big, parent: usize, child: usize, chain: &Chain) -> Big {
        let (t, _) = parent_val.divrem(&self.c);
        let t = t.to_u64().expect("child spills fit a word") as u128;
        let sl = self.spill_universe(2 * parent, chain) as u128;
        let sp = if child == 2 * parent { t % sl } else { t / sl } as u64;
        let (stored, shape) = self.stored(child, chain);
        stored.or(&Big::from_u64(sp).shl(shape.k))
    }

    pub fn read(&self, j: usize) -> Big {
        assert!(j >= 1 && j <= self.len, "index {j} out of range");
        let dj = node_depth(j);
        bump(&self.counters.reads, 1);
        bump(&self.counters.depth_weight, dj as u64 + 1);
        bump(&self.counters.node_decodes, dj as u64 + 1);
        let chain = self.chain_for(j);
        let (stored, shape) = self.stored(1, &chain);
        let mut v = stored.or(&Big::from_u64(self.root_spill).shl(shape.k));
        for d in 0..dj {
            let parent = j >> (dj - d);
            let child = j >> (dj - d - 1);
            v = self.descend(&v, parent, child, &chain);
        }
        v.divrem(&self.c).1
    }

    pub fn write(&mut self, j: usize, value: &Big) {
        assert!(j >= 1 && j <= self.len, "index {j} out of range");
        assert!(*value < self.c, "digit out of range");
        let dj = node_depth(j);
        bump(&self.counters.writes, 1);
        bump(&self.counters.depth_weight, dj as u64 + 1);
        bump(&self.counters.node_decodes, dj as u64 + 1);
        bump(&self.counters.node_encodes, dj as u64 + 1);
        let chain = self.chain_for(j);

        let mut path = [Big::ZERO; MAX_HEIGHT];
        let (stored, shape) = self.stored(1, &chain);
        path[0] = stored.or(&Big::from_u64(self.root_spill).shl(shape.k));
        for d in 0..dj {
            let parent = j >> (dj - d);
            let child = j >> (dj - d - 1);
            path[d + 1] = self.descend(&path[d], parent, child, &chain);
        }

        let (rest, _) = path[dj].divrem(&self.c);
        let mut cur = value.add(&self.c.mul(&rest));
        for d in (0..=dj).rev() {
            let node = j >> (dj - d);
            let shape = self.shape(node, &chain);
            let stored = cur.and(&Big::low_mask(shape.k));
            let spill = cur.shr(shape.k).to_u64().expect("spill fits a word");
            debug_assert!(spill < shape.s);
            let off = self.offset(node, &chain);
            write_big(&mut self.words, off, shape.k, &stored);
            if d == 0 {
                self.root_spill = spill;
            } else {
                let parent = node >> 1;
                let (t, a) = path[d - 1].divrem(&self.c);
                let t = t.to_u64().expect("child spills fit a word") as u128;
                let sl = self.spill_universe(2 * parent, &chain) as u128;
                let (mut l, mut r) = (t % sl, t / sl);
                if node == 2 * parent {
                    l = spill as u128;
                } else {
                    r = spill as u128;
                }
                cur = a.add(&self.c.mul(&Big::from_u128(l + sl * r)));
            }
        }
    }

    /// Every element, decoded in one top-down sweep (used by tests).
    pub fn decode_all(&self) -> Vec<Big> {
        (1..=self.len).map(|j| self.read(j)).collect()
    }

    /// The stored payload bits of node `j` (used by tests to check which
    /// nodes a write touched).
    pub fn raw_node_bits(&self, j: usize) -> Big {
        let chain = self.chain(0, self.depth_max);
        self.stored(j, &chain).0
    }

    pub fn g_steps(&self) -> u64 {
        self.counters.g_steps.load(Ordering::Relaxed)
    }
}

impl Chain {
    fn from_params(all: &[LevelParams]) -> Self {
        let mut shapes = [NodeShape { k: 0, s: 1 }; MAX_HEIGHT];
        for p in all {
            shapes[p.h] = NodeShape { k: p.k, s: p.s };
        }
        Chain { shapes }
    }
}
