//! Three-color breadth-first search over a [`ColorStorage`].
//!
//! Rounds alternate. An exploration round enumerates the gray vertices and
//! lets every *old* gray vertex (the start vertex, or one with a black
//! in-neighbor) color its white out-neighbors gray. A consolidation round
//! blackens every gray vertex without a white out-neighbor. A new tree is
//! started at each vertex of the start order that is still white.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::store::{Color, ColorStorage, PassStats, RoundKind};

/// One output line: `v` was reached from `parent` at distance `dist` from
/// its tree root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub v: u32,
    pub parent: Option<u32>,
    pub dist: u32,
}

/// Write-only destination of the records.
pub trait Sink {
    fn record(&mut self, r: Record);
}

impl Sink for Vec<Record> {
    fn record(&mut self, r: Record) {
        self.push(r);
    }
}

/// Discards records.
pub struct Discard;

impl Sink for Discard {
    fn record(&mut self, _: Record) {}
}

impl<F: FnMut(Record)> Sink for F {
    fn record(&mut self, r: Record) {
        self(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BfsOptions {
    /// Keep per-vertex enumeration counters (instrumentation, `O(n)` bytes
    /// outside the ledger) and check the round discipline with them.
    pub audit: bool,
}

/// Slack per enumeration in the color-read budget.
pub const READ_SLACK: u64 = 2;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub roots: u64,
    pub records: u64,
    pub rounds: u64,
    pub exploration_rounds: u64,
    pub consolidation_rounds: u64,
    pub max_distance: u32,
    /// Gray vertices handed to the search by the store.
    pub enumerations: u64,
    pub color_reads: u64,
    /// `Σ (deg(u) + READ_SLACK)` over enumerations, plus one read per
    /// position of the start order.
    pub color_read_budget: u64,
    pub containers_enumerated: u64,
    pub gray_free_enumerated: u64,
    pub mu_min: usize,
    pub mu_max: usize,
    pub mu_final: usize,
    /// Rounds where μ moved against the round's direction.
    pub mu_direction_changes: u64,
    /// Rounds enumerating more than `2(N − μ_min)` gray-free containers.
    pub gray_free_violations: u64,
    pub audited: bool,
    pub max_round_enumerations: u32,
    pub max_lifetime_enumerations: u32,
    /// Vertex-rounds with more than two enumerations.
    pub round_violations: u64,
    /// Vertices enumerated in more than eight rounds' worth.
    pub lifetime_violations: u64,
    /// Rounds that missed a vertex that was gray when they began.
    pub coverage_violations: u64,
}

impl RunStats {
    /// True when every instrumented bound held.
    pub fn disciplined(&self) -> bool {
        self.color_reads <= self.color_read_budget
            && self.mu_direction_changes == 0
            && self.gray_free_violations == 0
            && self.round_violations == 0
            && self.lifetime_violations == 0
            && self.coverage_violations == 0
    }
}

/// True iff `u` is `s` or has a black in-neighbor.
pub fn is_old_gray<S: ColorStorage + ?Sized>(g: &Graph, colors: &S, u: usize, s: usize) -> bool {
    old_gray(g, colors, u, s).0
}

/// True iff `u` has no white out-neighbor.
pub fn all_successors_nonwhite<S: ColorStorage + ?Sized>(g: &Graph, colors: &S, u: usize) -> bool {
    successors_nonwhite(g, colors, u).0
}

fn old_gray<S: ColorStorage + ?Sized>(g: &Graph, colors: &S, u: usize, s: usize) -> (bool, u64) {
    if u == s {
        return (true, 0);
    }
    let mut reads = 0;
    for &p in g.pred(u) {
        reads += 1;
        if colors.get(p as usize) == Color::Black {
            return (true, reads);
        }
    }
    (false, reads)
}

fn successors_nonwhite<S: ColorStorage + ?Sized>(g: &Graph, colors: &S, u: usize) -> (bool, u64) {
    let mut reads = 0;
    for &w in g.succ(u) {
        reads += 1;
        if colors.get(w as usize) == Color::White {
            return (false, reads);
        }
    }
    (true, reads)
}

/// Shadow counters for [`BfsOptions::audit`].
struct Audit {
    /// Round from which the vertex counts as gray at round start.
    gray_from: Vec<u32>,
    /// Last round (plus one) the vertex was enumerated in.
    last_round: Vec<u32>,
    in_round: Vec<u8>,
    lifetime: Vec<u8>,
}

/// Runs the search from every vertex of `order` that is still white when
/// its turn comes. `order` must be a permutation of `1..=n`; `colors` must
/// be fresh (all white).
pub fn run_bfs<S, K>(g: &Graph, colors: &mut S, order: &[u32], sink: &mut K, opts: BfsOptions) -> RunStats
where
    S: ColorStorage + ?Sized,
    K: Sink + ?Sized,
{
    let n = g.n();
    assert_eq!(colors.n(), n, "store and graph disagree on n");
    assert_eq!(order.len(), n, "start order must list every vertex");
    assert_eq!(colors.gray_total(), 0, "store must start without grays");
    let mut st = RunStats {
        audited: opts.audit,
        mu_min: usize::MAX,
        ..RunStats::default()
    };
    let mut audit = opts.audit.then(|| Audit {
        gray_from: vec![0; n + 1],
        last_round: vec![0; n + 1],
        in_round: vec![0; n + 1],
        lifetime: vec![0; n + 1],
    });
    let mut round: u32 = 0;
    for &s in order {
        let s = s as usize;
        st.color_reads += 1;
        st.color_read_budget += 1;
        if colors.get(s) != Color::White {
            continue;
        }
        colors.set(s, Color::Gray);
        sink.record(Record {
            v: s as u32,
            parent: None,
            dist: 0,
        });
        st.roots += 1;
        st.records += 1;
        if let Some(a) = &mut audit {
            a.gray_from[s] = round;
        }
        let mut layer: u32 = 0;
        while colors.gray_total() > 0 {
            for kind in [RoundKind::Exploration, RoundKind::Consolidation] {
                let at_start = colors.gray_total();
                let mut covered = 0u64;
                colors.pass_begin(kind);
                while colors.pass_checkout_next() {
                    while let Some(u) = colors.next_gray() {
                        st.enumerations += 1;
                        let deg = g.degree(u) as u64;
                        st.color_read_budget += deg + READ_SLACK;
                        if let Some(a) = &mut audit {
                            if a.last_round[u] != round + 1 {
                                a.last_round[u] = round + 1;
                                a.in_round[u] = 0;
                                if a.gray_from[u] <= round {
                                    covered += 1;
                                }
                            }
                            a.in_round[u] = a.in_round[u].saturating_add(1);
                            a.lifetime[u] = a.lifetime[u].saturating_add(1);
                            if a.in_round[u] == 3 {
                                st.round_violations += 1;
                            }
                            if a.lifetime[u] == 9 {
                                st.lifetime_violations += 1;
                            }
                            st.max_round_enumerations = st.max_round_enumerations.max(a.in_round[u] as u32);
                            st.max_lifetime_enumerations =
                                st.max_lifetime_enumerations.max(a.lifetime[u] as u32);
                        }
                        match kind {
                            RoundKind::Exploration => {
                                let (old, reads) = old_gray(g, colors, u, s);
                                st.color_reads += reads;
                                if !old {
                                    continue;
                                }
                                for &w in g.succ(u) {
                                    let w = w as usize;
                                    st.color_reads += 1;
                                    if colors.get(w) == Color::White {
                                        colors.set(w, Color::Gray);
                                        sink.record(Record {
                                            v: w as u32,
                                            parent: Some(u as u32),
                                            dist: layer + 1,
                                        });
                                        st.records += 1;
                                        st.max_distance = st.max_distance.max(layer + 1);
                                        if let Some(a) = &mut audit {
                                            a.gray_from[w] = round + 1;
                                        }
                                    }
                                }
                            }
                            RoundKind::Consolidation => {
                                let (done, reads) = successors_nonwhite(g, colors, u);
                                st.color_reads += reads;
                                if done {
                                    colors.set(u, Color::Black);
                                }
                            }
                        }
                    }
                    colors.release();
                }
                let ps = colors.pass_finish();
                note_pass(&mut st, &ps, colors.containers());
                if audit.is_some() && covered != at_start {
                    st.coverage_violations += 1;
                }
                st.rounds += 1;
                match kind {
                    RoundKind::Exploration => st.exploration_rounds += 1,
                    RoundKind::Consolidation => st.consolidation_rounds += 1,
                }
                round += 1;
            }
            layer += 1;
        }
    }
    if st.mu_min == usize::MAX {
        st.mu_min = 0;
    }
    st
}

fn note_pass(st: &mut RunStats, ps: &PassStats, containers: usize) {
    st.containers_enumerated += ps.containers_enumerated;
    st.gray_free_enumerated += ps.gray_free_enumerated;
    st.mu_min = st.mu_min.min(ps.mu_min);
    st.mu_max = st.mu_max.max(ps.mu_max);
    st.mu_final = ps.mu_end;
    if !ps.monotone() {
        st.mu_direction_changes += 1;
    }
    if ps.gray_free_enumerated > 2 * (containers - ps.mu_min) as u64 {
        st.gray_free_violations += 1;
    }
}
