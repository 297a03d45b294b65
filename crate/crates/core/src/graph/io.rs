//! Edge-list and DIMACS text, and a little-endian CSR binary.
//!
//! CSR binary layout: the magic `TBFS`, then 64-bit little-endian fields
//! `version, directed, n, m`, the `n+1` offsets and the adjacency entries
//! (`m` for directed graphs, `2m` half-edges for undirected ones), and for
//! directed graphs the reverse offsets and sources.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;

pub const MAGIC: &[u8; 4] = b"TBFS";
pub const VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Edgelist,
    Dimacs,
    Csr,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edgelist" => Ok(Format::Edgelist),
            "dimacs" => Ok(Format::Dimacs),
            "csr" => Ok(Format::Csr),
            other => Err(format!("unknown graph format {other:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed CSR file: {0}")]
    Csr(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn perr(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn load(path: &Path, format: Format, directed: bool) -> Result<Graph, GraphError> {
    let file = std::fs::File::open(path)?;
    match format {
        Format::Edgelist => parse_edgelist(BufReader::new(file), directed),
        Format::Dimacs => parse_dimacs(BufReader::new(file), directed),
        Format::Csr => read_csr(BufReader::new(file)),
    }
}

pub fn save(g: &Graph, path: &Path, format: Format) -> Result<(), GraphError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    match format {
        Format::Edgelist => write_edgelist(g, &mut w)?,
        Format::Dimacs => write_dimacs(g, &mut w)?,
        Format::Csr => write_csr(g, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn parse_id(tok: Option<&str>, n: usize, line: usize) -> Result<u32, GraphError> {
    let tok = tok.ok_or_else(|| perr(line, "missing vertex id"))?;
    let v: u64 = tok
        .parse()
        .map_err(|_| perr(line, format!("bad vertex id {tok:?}")))?;
    if v == 0 || v > n as u64 {
        return Err(perr(line, format!("vertex id {v} out of range 1..={n}")));
    }
    Ok(v as u32)
}

fn parse_count(tok: Option<&str>, what: &str, line: usize) -> Result<usize, GraphError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("bad {what} {tok:?}")))
}

/// First line `n m`, then `m` lines `u v`. Blank lines and lines starting
/// with `#` or `%` are skipped.
pub fn parse_edgelist<R: BufRead>(r: R, directed: bool) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last = 0;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let no = i + 1;
        last = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        match header {
            None => {
                let n = parse_count(it.next(), "vertex count", no)?;
                let m = parse_count(it.next(), "edge count", no)?;
                if it.next().is_some() {
                    return Err(perr(no, "header must be \"n m\""));
                }
                header = Some((n, m));
                edges.reserve(m);
            }
            Some((n, m)) => {
                if edges.len() == m {
                    return Err(perr(no, format!("more than {m} edges")));
                }
                let u = parse_id(it.next(), n, no)?;
                let v = parse_id(it.next(), n, no)?;
                if it.next().is_some() {
                    return Err(perr(no, "edge line must be \"u v\""));
                }
                edges.push((u, v));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| perr(last.max(1), "missing header"))?;
    if edges.len() != m {
        return Err(perr(last, format!("expected {m} edges, found {}", edges.len())));
    }
    Ok(Graph::from_edges(n, &edges, directed))
}

/// `p edge|sp n m`, then `e u v` or `a u v [w]`; `c` lines are comments.
pub fn parse_dimacs<R: BufRead>(r: R, directed: bool) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last = 0;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let no = i + 1;
        last = no;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut it = t.split_whitespace();
        match it.next() {
            Some("c") => {}
            Some("p") => {
                if header.is_some() {
                    return Err(perr(no, "second problem line"));
                }
                match it.next() {
                    Some("edge") | Some("sp") | Some("col") => {}
                    other => return Err(perr(no, format!("unsupported problem {other:?}"))),
                }
                let n = parse_count(it.next(), "vertex count", no)?;
                let m = parse_count(it.next(), "edge count", no)?;
                header = Some((n, m));
                edges.reserve(m);
            }
            Some("e") | Some("a") => {
                let (n, _) = header.ok_or_else(|| perr(no, "edge before problem line"))?;
                let u = parse_id(it.next(), n, no)?;
                let v = parse_id(it.next(), n, no)?;
                edges.push((u, v));
            }
            Some(other) => return Err(perr(no, format!("unknown line type {other:?}"))),
            None => {}
        }
    }
    let (n, m) = header.ok_or_else(|| perr(last.max(1), "missing problem line"))?;
    if edges.len() != m {
        return Err(perr(last, format!("expected {m} edges, found {}", edges.len())));
    }
    Ok(Graph::from_edges(n, &edges, directed))
}

pub fn write_edgelist<W: Write>(g: &Graph, w: &mut W) -> std::io::Result<()> {
    let edges = g.edges();
    writeln!(w, "{} {}", g.n(), edges.len())?;
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_dimacs<W: Write>(g: &Graph, w: &mut W) -> std::io::Result<()> {
    let edges = g.edges();
    let (kind, tag) = if g.is_directed() { ("sp", "a") } else { ("edge", "e") };
    writeln!(w, "p {kind} {} {}", g.n(), edges.len())?;
    for (u, v) in edges {
        writeln!(w, "{tag} {u} {v}")?;
    }
    Ok(())
}

pub fn write_csr<W: Write>(g: &Graph, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    for x in [VERSION, g.is_directed() as u64, g.n() as u64, g.m() as u64] {
        w.write_all(&x.to_le_bytes())?;
    }
    for &o in g.offsets() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &t in g.targets() {
        w.write_all(&(t as u64).to_le_bytes())?;
    }
    if g.is_directed() {
        for &o in g.in_offsets() {
            w.write_all(&o.to_le_bytes())?;
        }
        for &s in g.in_sources() {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_csr<R: Read>(mut r: R) -> Result<Graph, GraphError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GraphError::Csr("bad magic".into()));
    }
    let mut word = || -> Result<u64, GraphError> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)
            .map_err(|e| GraphError::Csr(format!("truncated: {e}")))?;
        Ok(u64::from_le_bytes(b))
    };
    let version = word()?;
    if version != VERSION {
        return Err(GraphError::Csr(format!("unsupported version {version}")));
    }
    let directed = match word()? {
        0 => false,
        1 => true,
        x => return Err(GraphError::Csr(format!("bad directed flag {x}"))),
    };
    let n = word()? as usize;
    let m = word()? as usize;
    if n >= u32::MAX as usize {
        return Err(GraphError::Csr(format!("n = {n} too large")));
    }
    let half = if directed { m } else { 2 * m };
    let mut read_vec = |len: usize| -> Result<Vec<u64>, GraphError> {
        (0..len).map(|_| word()).collect()
    };
    let ids = |v: Vec<u64>| -> Result<Vec<u32>, GraphError> {
        v.into_iter()
            .map(|x| u32::try_from(x).map_err(|_| GraphError::Csr(format!("vertex id {x} too large"))))
            .collect()
    };
    let offsets = read_vec(n + 1)?;
    let targets = ids(read_vec(half)?)?;
    let (in_offsets, in_sources) = if directed {
        (read_vec(n + 1)?, ids(read_vec(m)?)?)
    } else {
        (Vec::new(), Vec::new())
    };
    Graph::from_csr(n, m, directed, offsets, targets, in_offsets, in_sources).map_err(GraphError::Csr)
}
