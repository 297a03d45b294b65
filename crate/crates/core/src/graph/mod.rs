//! Read-only graphs in compressed sparse row form, with vertices `1..=n`.

pub mod gen;
pub mod io;

/// An input graph. Undirected edges are stored as two half-edges; directed
/// graphs also keep the reverse adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    directed: bool,
    offsets: Vec<u64>,
    targets: Vec<u32>,
    in_offsets: Vec<u64>,
    in_sources: Vec<u32>,
}

/// Which adjacency to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Undirected,
}

impl Graph {
    /// Builds the CSR from an edge list; adjacency keeps the input order.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], directed: bool) -> Self {
        assert!(n < u32::MAX as usize, "too many vertices");
        for &(u, v) in edges {
            assert!(
                u >= 1 && v >= 1 && u as usize <= n && v as usize <= n,
                "edge ({u}, {v}) out of range 1..={n}"
            );
        }
        let (offsets, targets) = if directed {
            csr(n, edges.iter().copied())
        } else {
            csr(n, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]))
        };
        let (in_offsets, in_sources) = if directed {
            csr(n, edges.iter().map(|&(u, v)| (v, u)))
        } else {
            (Vec::new(), Vec::new())
        };
        Self {
            n,
            m: edges.len(),
            directed,
            offsets,
            targets,
            in_offsets,
            in_sources,
        }
    }

    /// Assembles a graph from raw CSR arrays, checking their shape.
    pub fn from_csr(
        n: usize,
        m: usize,
        directed: bool,
        offsets: Vec<u64>,
        targets: Vec<u32>,
        in_offsets: Vec<u64>,
        in_sources: Vec<u32>,
    ) -> Result<Self, String> {
        let half = if directed { m } else { 2 * m };
        check_csr(n, half, &offsets, &targets)?;
        if directed {
            check_csr(n, m, &in_offsets, &in_sources)?;
        } else if !in_offsets.is_empty() || !in_sources.is_empty() {
            return Err("undirected graph with reverse adjacency".into());
        }
        Ok(Self {
            n,
            m,
            directed,
            offsets,
            targets,
            in_offsets,
            in_sources,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn in_offsets(&self) -> &[u64] {
        &self.in_offsets
    }

    pub fn in_sources(&self) -> &[u32] {
        &self.in_sources
    }

    /// Adjacency of `u` in the given direction. `In` and `Out` need a
    /// directed graph and `Undirected` an undirected one.
    pub fn neighbors(&self, u: usize, dir: Direction) -> &[u32] {
        match dir {
            Direction::Out | Direction::Undirected => {
                assert_eq!(dir == Direction::Out, self.directed, "direction misuse");
                self.row(&self.offsets, &self.targets, u)
            }
            Direction::In => {
                assert!(self.directed, "in-neighbors of an undirected graph");
                self.row(&self.in_offsets, &self.in_sources, u)
            }
        }
    }

    /// Out-neighbors, or all neighbors when undirected.
    #[inline]
    pub fn succ(&self, u: usize) -> &[u32] {
        self.row(&self.offsets, &self.targets, u)
    }

    /// In-neighbors, or all neighbors when undirected.
    #[inline]
    pub fn pred(&self, u: usize) -> &[u32] {
        if self.directed {
            self.row(&self.in_offsets, &self.in_sources, u)
        } else {
            self.row(&self.offsets, &self.targets, u)
        }
    }

    /// Total degree `d_u`: in plus out for directed graphs.
    pub fn degree(&self, u: usize) -> usize {
        if self.directed {
            self.succ(u).len() + self.pred(u).len()
        } else {
            self.succ(u).len()
        }
    }

    /// Every edge once, as `(u, v)`; undirected edges with `u <= v`
    /// (a self-loop is reported once per copy).
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 1..=self.n {
            for &v in self.succ(u) {
                if self.directed || u as u32 <= v {
                    out.push((u as u32, v));
                }
            }
        }
        if !self.directed {
            // Each self-loop contributes two half-edges at the same vertex.
            let mut loops_seen = std::collections::HashMap::<u32, usize>::new();
            out.retain(|&(u, v)| {
                if u != v {
                    return true;
                }
                let c = loops_seen.entry(u).or_default();
                *c += 1;
                *c % 2 == 1
            });
        }
        out
    }

    #[inline]
    fn row<'a>(&self, off: &[u64], data: &'a [u32], u: usize) -> &'a [u32] {
        assert!(u >= 1 && u <= self.n, "vertex {u} out of range");
        &data[off[u - 1] as usize..off[u] as usize]
    }
}

fn csr(n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<u64>, Vec<u32>) {
    let mut offsets = vec![0u64; n + 1];
    for (u, _) in edges.clone() {
        offsets[u as usize] += 1;
    }
    for i in 1..=n {
        offsets[i] += offsets[i - 1];
    }
    let mut fill: Vec<u64> = offsets[..n].to_vec();
    let mut targets = vec![0u32; offsets[n] as usize];
    for (u, v) in edges {
        let slot = &mut fill[u as usize - 1];
        targets[*slot as usize] = v;
        *slot += 1;
    }
    (offsets, targets)
}

fn check_csr(n: usize, len: usize, offsets: &[u64], data: &[u32]) -> Result<(), String> {
    if offsets.len() != n + 1 {
        return Err(format!("expected {} offsets, found {}", n + 1, offsets.len()));
    }
    if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err("offsets are not nondecreasing from 0".into());
    }
    if offsets[n] as usize != len || data.len() != len {
        return Err(format!("expected {len} adjacency entries, found {}", data.len()));
    }
    if let Some(&bad) = data.iter().find(|&&v| v == 0 || v as usize > n) {
        return Err(format!("vertex id {bad} out of range 1..={n}"));
    }
    Ok(())
}
