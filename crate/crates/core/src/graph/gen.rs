//! Deterministic synthetic graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gnm,
    Path,
    Star,
    Grid,
    DRegular,
    DegreeSorted,
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gnm" => Ok(Kind::Gnm),
            "path" => Ok(Kind::Path),
            "star" => Ok(Kind::Star),
            "grid" => Ok(Kind::Grid),
            "d_regular" => Ok(Kind::DRegular),
            "degree_sorted" => Ok(Kind::DegreeSorted),
            other => Err(format!("unknown graph kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("infeasible parameters: {0}")]
pub struct GenError(pub String);

/// Parameters shared by all kinds. `m` is the edge count for `gnm` and
/// `degree_sorted` and the degree for `d_regular`; other kinds ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spec {
    pub kind: Kind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub directed: bool,
}

pub fn generate(spec: &Spec) -> Result<Graph, GenError> {
    let Spec {
        kind,
        n,
        m,
        seed,
        directed,
    } = *spec;
    match kind {
        Kind::Gnm => gnm(n, m, seed, directed),
        Kind::Path => Ok(path(n, directed)),
        Kind::Star => Ok(star(n, directed)),
        Kind::Grid => Ok(grid(n, directed)),
        Kind::DRegular => d_regular(n, m, seed, directed),
        Kind::DegreeSorted => Ok(degree_sorted(&gnm(n, m, seed, directed)?)),
    }
}

/// `m` distinct edges without self-loops, uniformly at random.
pub fn gnm(n: usize, m: usize, seed: u64, directed: bool) -> Result<Graph, GenError> {
    let pairs = n as u128 * (n as u128).saturating_sub(1);
    let max = if directed { pairs } else { pairs / 2 };
    if m as u128 > max {
        return Err(GenError(format!("{m} edges do not fit {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = |u: u64, v: u64| (u << 32) | v;
    let mut keys: Vec<u64> = Vec::with_capacity(m);
    while keys.len() < m {
        let need = m - keys.len();
        for _ in 0..need + need / 8 + 1 {
            let u = rng.gen_range(1..=n as u64);
            let v = rng.gen_range(1..=n as u64);
            if u == v {
                continue;
            }
            let (a, b) = if directed || u < v { (u, v) } else { (v, u) };
            keys.push(key(a, b));
        }
        keys.sort_unstable();
        keys.dedup();
        if keys.len() > m {
            // Drop a random surplus so the sample stays uniform.
            keys.shuffle(&mut rng);
            keys.truncate(m);
            keys.sort_unstable();
        }
    }
    keys.shuffle(&mut rng);
    let edges: Vec<(u32, u32)> = keys.iter().map(|&k| ((k >> 32) as u32, k as u32)).collect();
    Ok(Graph::from_edges(n, &edges, directed))
}

pub fn path(n: usize, directed: bool) -> Graph {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &edges, directed)
}

/// Vertex 1 joined to every other vertex.
pub fn star(n: usize, directed: bool) -> Graph {
    let edges: Vec<(u32, u32)> = (2..=n as u32).map(|i| (1, i)).collect();
    Graph::from_edges(n, &edges, directed)
}

/// Row-major grid with `⌊√n⌋` columns; the last row may be partial.
pub fn grid(n: usize, directed: bool) -> Graph {
    let cols = (n as f64).sqrt().floor().max(1.0) as usize;
    let mut edges = Vec::new();
    for v in 1..=n {
        let (r, c) = ((v - 1) / cols, (v - 1) % cols);
        if c + 1 < cols && v < n {
            edges.push((v as u32, v as u32 + 1));
        }
        let below = (r + 1) * cols + c + 1;
        if below <= n {
            edges.push((v as u32, below as u32));
        }
    }
    Graph::from_edges(n, &edges, directed)
}

/// Every vertex of degree exactly `d` (out-degree when directed): the union
/// of `⌊d/2⌋` random Hamiltonian cycles plus a random perfect matching when
/// `d` is odd. Parallel edges may occur.
pub fn d_regular(n: usize, d: usize, seed: u64, directed: bool) -> Result<Graph, GenError> {
    if n < 3 && d > 0 {
        return Err(GenError("regular graphs need at least 3 vertices".into()));
    }
    if d % 2 == 1 && n % 2 == 1 {
        return Err(GenError(format!("odd degree {d} needs an even vertex count")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * d / 2 + 1);
    let mut perm: Vec<u32> = (1..=n as u32).collect();
    for _ in 0..d / 2 {
        perm.shuffle(&mut rng);
        for i in 0..n {
            edges.push((perm[i], perm[(i + 1) % n]));
            if directed {
                edges.push((perm[(i + 1) % n], perm[i]));
            }
        }
    }
    if d % 2 == 1 {
        perm.shuffle(&mut rng);
        for pair in perm.chunks(2) {
            edges.push((pair[0], pair[1]));
            if directed {
                edges.push((pair[1], pair[0]));
            }
        }
    }
    Ok(Graph::from_edges(n, &edges, directed))
}

/// Relabels `g` so that total degrees are nondecreasing in the vertex id.
pub fn degree_sorted(g: &Graph) -> Graph {
    let n = g.n();
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by_key(|&u| (g.degree(u), u));
    let mut label = vec![0u32; n + 1];
    for (i, &u) in order.iter().enumerate() {
        label[u] = i as u32 + 1;
    }
    let edges: Vec<(u32, u32)> = g
        .edges()
        .into_iter()
        .map(|(u, v)| (label[u as usize], label[v as usize]))
        .collect();
    Graph::from_edges(n, &edges, g.is_directed())
}

/// A uniformly random permutation of `1..=n`.
pub fn random_order(n: usize, seed: u64) -> Vec<u32> {
    let mut p: Vec<u32> = (1..=n as u32).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_edges() {
        assert_eq!(path(3, false).edges(), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn gnm_is_simple_and_exact() {
        let g = gnm(100, 1000, 7, false).unwrap();
        let mut e = g.edges();
        assert_eq!(e.len(), 1000);
        e.sort();
        e.dedup();
        assert_eq!(e.len(), 1000);
        assert!(e.iter().all(|&(u, v)| u != v));
        assert_eq!(gnm(100, 1000, 7, false).unwrap(), g);
        assert!(gnm(4, 7, 1, false).is_err());
        assert_eq!(gnm(4, 6, 1, false).unwrap().m(), 6);
    }

    #[test]
    fn regular_degrees() {
        for (d, directed) in [(3, false), (4, false), (4, true), (5, true)] {
            let g = d_regular(50, d, 1, directed).unwrap();
            for u in 1..=50 {
                assert_eq!(g.succ(u).len(), d);
            }
        }
    }

    #[test]
    fn sorted_degrees() {
        let g = degree_sorted(&gnm(300, 900, 3, false).unwrap());
        assert!((1..300).all(|u| g.degree(u) <= g.degree(u + 1)));
        let g = degree_sorted(&star(10, true));
        assert_eq!(g.degree(10), 9);
    }

    #[test]
    fn grid_shape() {
        let g = grid(9, false);
        assert_eq!(g.m(), 12);
        assert_eq!(g.succ(5).len(), 4);
        assert_eq!(grid(10, false).m(), 13);
    }
}
