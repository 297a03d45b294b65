//! Reference search, output verification, metrics and run driver.

pub mod metrics;
pub mod runner;
pub mod selftest;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bfs::Record;
use crate::graph::Graph;

pub use metrics::{Ledger, Metrics};
pub use runner::{run, RunConfig};

/// Result of the textbook queue-based search, restarted over an order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    /// Distance from the tree root, indexed by vertex (slot 0 unused).
    pub dist: Vec<u32>,
    pub parent: Vec<Option<u32>>,
    /// Roots in the order the trees were started.
    pub roots: Vec<u32>,
}

pub fn reference_bfs(g: &Graph, order: &[u32]) -> Reference {
    let n = g.n();
    let mut seen = vec![false; n + 1];
    let mut dist = vec![0u32; n + 1];
    let mut parent = vec![None; n + 1];
    let mut roots = Vec::new();
    let mut queue = VecDeque::new();
    for &s in order {
        if seen[s as usize] {
            continue;
        }
        seen[s as usize] = true;
        roots.push(s);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in g.succ(u as usize) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    dist[w as usize] = dist[u as usize] + 1;
                    parent[w as usize] = Some(u);
                    queue.push_back(w);
                }
            }
        }
    }
    Reference { dist, parent, roots }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub vertex: u32,
    pub expected: Option<u32>,
    pub got: Option<u32>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub first_discrepancy: Option<Discrepancy>,
    /// Every vertex recorded exactly once, each with the oracle's distance.
    pub distances_match: bool,
    pub roots_match: bool,
    pub parents_valid: bool,
}

/// Checks a record stream against the oracle: each vertex once with the
/// oracle's distance, the same roots in the same order, parents that are
/// (in-)neighbors one layer up in the same tree, and distances that never
/// decrease within a tree.
pub fn verify_run(g: &Graph, records: &[Record], oracle: &Reference) -> VerificationReport {
    let n = g.n();
    let mut first: Option<Discrepancy> = None;
    let note = |first: &mut Option<Discrepancy>, vertex, expected, got, reason: &str| {
        if first.is_none() {
            *first = Some(Discrepancy {
                vertex,
                expected,
                got,
                reason: reason.to_string(),
            });
        }
    };
    let mut distances_match = true;
    let mut parents_valid = true;
    let mut tree_of = vec![u32::MAX; n + 1];
    let mut got_dist = vec![0u32; n + 1];
    let mut roots = Vec::new();
    let mut last_dist = 0;
    for r in records {
        let v = r.v as usize;
        if v == 0 || v > n {
            distances_match = false;
            note(&mut first, r.v, None, Some(r.dist), "vertex out of range");
            continue;
        }
        if tree_of[v] != u32::MAX {
            distances_match = false;
            note(&mut first, r.v, Some(oracle.dist[v]), Some(r.dist), "vertex recorded twice");
            continue;
        }
        match r.parent {
            None => {
                roots.push(r.v);
                last_dist = 0;
                if r.dist != 0 {
                    distances_match = false;
                    note(&mut first, r.v, Some(0), Some(r.dist), "root with nonzero distance");
                }
            }
            Some(p) => {
                let pu = p as usize;
                let ok = pu >= 1
                    && pu <= n
                    && tree_of[pu] as usize + 1 == roots.len()
                    && got_dist[pu] + 1 == r.dist
                    && g.pred(v).contains(&p);
                if !ok {
                    parents_valid = false;
                    note(&mut first, r.v, oracle.parent[v], Some(p), "invalid parent");
                }
                if r.dist < last_dist {
                    parents_valid = false;
                    note(&mut first, r.v, Some(last_dist), Some(r.dist), "distance decreased within a tree");
                }
                last_dist = r.dist;
            }
        }
        tree_of[v] = roots.len().saturating_sub(1) as u32;
        got_dist[v] = r.dist;
        if r.dist != oracle.dist[v] {
            distances_match = false;
            note(&mut first, r.v, Some(oracle.dist[v]), Some(r.dist), "wrong distance");
        }
    }
    if let Some(v) = (1..=n).find(|&v| tree_of[v] == u32::MAX) {
        distances_match = false;
        note(&mut first, v as u32, Some(oracle.dist[v]), None, "vertex never recorded");
    }
    let roots_match = roots == oracle.roots;
    if !roots_match {
        let i = roots.iter().zip(&oracle.roots).position(|(a, b)| a != b);
        let i = i.unwrap_or(roots.len().min(oracle.roots.len()));
        let v = roots.get(i).or(oracle.roots.get(i)).copied().unwrap_or(0);
        note(&mut first, v, oracle.roots.get(i).copied(), roots.get(i).copied(), "root sequence differs");
    }
    VerificationReport {
        pass: distances_match && roots_match && parents_valid,
        first_discrepancy: first,
        distances_match,
        roots_match,
        parents_valid,
    }
}

/// Reads a start order: whitespace-separated vertex ids forming a
/// permutation of `1..=n`.
pub fn parse_order(text: &str, n: usize) -> Result<Vec<u32>, String> {
    let mut seen = vec![false; n + 1];
    let mut out = Vec::with_capacity(n);
    for tok in text.split_whitespace() {
        let v: usize = tok.parse().map_err(|_| format!("bad vertex id {tok:?} in order"))?;
        if v == 0 || v > n {
            return Err(format!("vertex {v} in order out of range 1..={n}"));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(format!("vertex {v} repeated in order"));
        }
        out.push(v as u32);
    }
    if out.len() != n {
        return Err(format!("order lists {} of {n} vertices", out.len()));
    }
    Ok(out)
}
