//! Picks a color store for a graph, runs the search and collects metrics.

use std::time::Instant;

use crate::bfs::{run_bfs, BfsOptions, RunStats, Sink};
use crate::digits::Backend;
use crate::error::Error;
use crate::graph::Graph;
use crate::pow3::Pow3Mode;
use crate::store::{CheckLevel, ColorStore, PlainColors, StoreParams};

use super::metrics::{
    extra, extra_bound, mode_name, Bound, Bounds, Counters, Ledger, Metrics, WORK_BASE,
    WORK_PER_UNIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub backend: Backend,
    pub pow3: Pow3Mode,
    /// Per-vertex enumeration counters in the engine.
    pub audit: bool,
    /// Structural checks inside the store.
    pub check: CheckLevel,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Packed,
            pow3: Pow3Mode::Full,
            audit: false,
            check: CheckLevel::Off,
        }
    }
}

/// Runs the search over `order`, with the succinct store when `n` is in its
/// range and the plain 2-bit store otherwise. Fails only on a bad order or
/// a ledger that does not add up; bound violations are reported in the
/// metrics (see [`Metrics::violations`]).
pub fn run<K: Sink + ?Sized>(g: &Graph, order: &[u32], cfg: RunConfig, sink: &mut K) -> Result<Metrics, Error> {
    let n = g.n();
    check_order(order, n)?;
    if let Pow3Mode::Strided(0) = cfg.pow3 {
        return Err(Error::Input("stride must be at least 1".into()));
    }
    let opts = BfsOptions { audit: cfg.audit };
    let (name, stride) = mode_name(cfg.pow3);
    let mut m = Metrics {
        n,
        m: g.m(),
        directed: g.is_directed(),
        backend: cfg.backend.to_string(),
        pow3: name.to_string(),
        stride,
        succinct: true,
        wall_time_ms: 0.0,
        big_ops: 0,
        peak_bits: 0,
        min_color_bits: 0,
        extra_bits: 0,
        extra_bound: None,
        gray_capacity: 0,
        ledger: Ledger::default(),
        counters: Counters::default(),
        bounds: Bounds::default(),
        run: RunStats::default(),
    };
    let units = (n + g.m()) as u64;
    let work = WORK_PER_UNIT * units + WORK_BASE;
    match StoreParams::new(n) {
        Ok(p) => {
            let mut store = ColorStore::new(n, cfg.backend, cfg.pow3).expect("parameters checked");
            store.set_check_level(cfg.check);
            let start = Instant::now();
            let st = run_bfs(g, &mut store, order, sink, opts);
            m.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            if cfg.check != CheckLevel::Off {
                store.check_invariants().map_err(Error::Internal)?;
            }
            let ledger = Ledger::of_store(&store);
            ledger.cross_check(&store).map_err(Error::Internal)?;
            let c = store.counters();
            let a = store.array_stats();
            let accesses = a.reads + a.writes;
            let t = store.array().level_stride() as u64;
            m.counters = Counters {
                conversions_to_regular: c.conversions_to_regular,
                compactions: c.compactions,
                color_changes: c.color_changes,
                enumerations: c.vertex_enumerations + c.leftover_enumerations,
                pointer_surgeries: c.pointer_surgeries,
                max_touched: c.max_touched,
                splices: c.splices,
                array_reads: a.reads,
                array_writes: a.writes,
                depth_weight: a.depth_weight,
                g_steps: a.g_steps,
                pow3_calls: store.pow3().calls(),
                pow3_multiplies: store.pow3().multiplies(),
                pow3_max_multiplies: store.pow3().max_multiplies(),
            };
            m.big_ops = accesses + m.counters.pow3_calls;
            m.gray_capacity = p.gray_capacity;
            m.bounds = Bounds {
                amortization: Bound {
                    lhs: c.conversions_to_regular,
                    rhs: p.containers as u64
                        + (c.color_changes + c.vertex_enumerations) / p.gray_capacity as u64,
                },
                color_reads: Bound {
                    lhs: st.color_reads,
                    rhs: st.color_read_budget,
                },
                array_accesses: Bound {
                    lhs: accesses,
                    rhs: work,
                },
                big_ops: Bound {
                    lhs: m.big_ops,
                    rhs: work,
                },
                g_steps: Bound {
                    lhs: a.g_steps,
                    rhs: a.depth_weight + t * accesses,
                },
            };
            m.extra_bound = Some(extra_bound(cfg.backend, &p, cfg.pow3.stride(p.q)));
            m.ledger = ledger;
            m.run = st;
        }
        Err(_) => {
            let mut colors = PlainColors::new(n);
            let start = Instant::now();
            let st = run_bfs(g, &mut colors, order, sink, opts);
            m.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            m.succinct = false;
            m.backend = "plain".into();
            m.ledger = Ledger::of_plain(&colors);
            m.bounds.color_reads = Bound {
                lhs: st.color_reads,
                rhs: st.color_read_budget,
            };
            m.run = st;
        }
    }
    m.peak_bits = m.ledger.total as u64;
    let (min, extra_bits) = extra(n, m.ledger.total);
    m.min_color_bits = min;
    m.extra_bits = extra_bits;
    Ok(m)
}

impl Metrics {
    /// Every instrumented bound that failed, by name.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let b = &self.bounds;
        for (name, bound) in [
            ("amortization", b.amortization),
            ("color reads", b.color_reads),
            ("array accesses", b.array_accesses),
            ("big ops", b.big_ops),
            ("generator steps", b.g_steps),
        ] {
            if !bound.holds() {
                v.push(format!("{name}: {} > {}", bound.lhs, bound.rhs));
            }
        }
        if let Some(bound) = self.extra_bound {
            if self.extra_bits < 0 || self.extra_bits as u64 > bound {
                v.push(format!("extra bits {} outside [0, {bound}]", self.extra_bits));
            }
        }
        let r = &self.run;
        for (name, count) in [
            ("μ direction", r.mu_direction_changes),
            ("gray-free containers", r.gray_free_violations),
            ("enumerations per round", r.round_violations),
            ("enumerations per lifetime", r.lifetime_violations),
            ("round coverage", r.coverage_violations),
        ] {
            if count > 0 {
                v.push(format!("{name}: {count} violations"));
            }
        }
        v
    }
}

fn check_order(order: &[u32], n: usize) -> Result<(), Error> {
    if order.len() != n {
        return Err(Error::Input(format!("order has {} entries for {n} vertices", order.len())));
    }
    let mut seen = vec![false; n + 1];
    for &v in order {
        let v = v as usize;
        if v == 0 || v > n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::Input(format!("order is not a permutation (at {v})")));
        }
    }
    Ok(())
}
