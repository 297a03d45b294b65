use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ternbfs::bfs::{Record, Sink};
use ternbfs::digits::Backend;
use ternbfs::error::Error;
use ternbfs::graph::gen::{self, Kind};
use ternbfs::graph::io::{self, Format};
use ternbfs::harness::selftest::selftest;
use ternbfs::harness::{parse_order, reference_bfs, run, verify_run, RunConfig};
use ternbfs::pow3::Pow3Mode;
use ternbfs::store::CheckLevel;

#[derive(Parser)]
#[command(name = "bfs", version, about = "Breadth-first search with vertex colors in about n·log2 3 bits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search a graph from every vertex in turn.
    Run(RunArgs),
    /// Write a synthetic graph.
    Gen(GenArgs),
    /// Check the kernels against their oracles and run a small corpus.
    Selftest {
        #[arg(long)]
        exhaustive_small: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Dimacs,
    Csr,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Edgelist => Format::Edgelist,
            FormatArg::Dimacs => Format::Dimacs,
            FormatArg::Csr => Format::Csr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Packed,
    Spill,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pow3Arg {
    Table,
    Strided,
    Squaring,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gnm,
    Path,
    Star,
    Grid,
    DRegular,
    DegreeSorted,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FormatArg,
    /// Treat edges as arcs (ignored for CSR input, which records it).
    #[arg(long)]
    directed: bool,
    #[arg(long, value_enum, default_value = "packed")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "table")]
    pow3: Pow3Arg,
    /// Table stride for `--pow3 strided`.
    #[arg(long, default_value_t = 2)]
    stride: usize,
    /// `identity`, or `file:PATH` with a permutation of 1..=n.
    #[arg(long, default_value = "identity")]
    order: String,
    /// Records as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metrics as JSON; printed to stdout when absent.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Compare the output with a reference search.
    #[arg(long)]
    verify: bool,
    /// Per-vertex enumeration counters and structural checks after every
    /// mutation (slow).
    #[arg(long)]
    audit: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    /// Edge count (gnm, degree_sorted) or degree (d_regular).
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    directed: bool,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

/// JSON-lines writer that keeps the first error.
struct JsonLines {
    w: BufWriter<File>,
    err: Option<std::io::Error>,
    keep: Option<Vec<Record>>,
}

impl Sink for JsonLines {
    fn record(&mut self, r: Record) {
        if self.err.is_none() {
            let line = serde_json::to_string(&r).expect("records serialize");
            if let Err(e) = writeln!(self.w, "{line}") {
                self.err = Some(e);
            }
        }
        if let Some(k) = &mut self.keep {
            k.push(r);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Selftest { exhaustive_small } => cmd_selftest(exhaustive_small),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("bfs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        // The panic message has been printed already.
        Err(_) => ExitCode::from(3),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Error> {
    let g = io::load(&a.graph, a.format.into(), a.directed)?;
    let n = g.n();
    let order = match a.order.as_str() {
        "identity" => (1..=n as u32).collect(),
        o => match o.strip_prefix("file:") {
            Some(p) => parse_order(&std::fs::read_to_string(p)?, n).map_err(Error::Input)?,
            None => return Err(Error::Input(format!("bad --order {o:?}"))),
        },
    };
    let cfg = RunConfig {
        backend: match a.backend {
            BackendArg::Packed => Backend::Packed,
            BackendArg::Spill => Backend::Spill,
        },
        pow3: match a.pow3 {
            Pow3Arg::Table => Pow3Mode::Full,
            Pow3Arg::Strided => Pow3Mode::Strided(a.stride),
            Pow3Arg::Squaring => Pow3Mode::Squaring,
        },
        audit: a.audit,
        check: if a.audit { CheckLevel::Touched } else { CheckLevel::Off },
    };
    let keep = a.verify.then(Vec::new);
    let (metrics, records) = match &a.out {
        Some(path) => {
            let mut sink = JsonLines {
                w: BufWriter::new(File::create(path)?),
                err: None,
                keep,
            };
            let m = run(&g, &order, cfg, &mut sink)?;
            sink.w.flush()?;
            if let Some(e) = sink.err {
                return Err(e.into());
            }
            (m, sink.keep)
        }
        None => match keep {
            Some(mut v) => {
                let m = run(&g, &order, cfg, &mut v)?;
                (m, Some(v))
            }
            None => (run(&g, &order, cfg, &mut ternbfs::bfs::Discard)?, None),
        },
    };
    write_json(a.metrics.as_deref(), &metrics)?;
    let violations = metrics.violations();
    if !violations.is_empty() {
        return Err(Error::Internal(violations.join("; ")));
    }
    if let Some(records) = records {
        let report = verify_run(&g, &records, &reference_bfs(&g, &order));
        if !report.pass {
            let d = report.first_discrepancy.expect("failed report names a vertex");
            return Err(Error::Verification(format!(
                "vertex {}: {} (expected {:?}, got {:?})",
                d.vertex, d.reason, d.expected, d.got
            )));
        }
        eprintln!("verified {n} vertices");
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("metrics serialize");
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Error> {
    let kind = match a.kind {
        KindArg::Gnm => Kind::Gnm,
        KindArg::Path => Kind::Path,
        KindArg::Star => Kind::Star,
        KindArg::Grid => Kind::Grid,
        KindArg::DRegular => Kind::DRegular,
        KindArg::DegreeSorted => Kind::DegreeSorted,
    };
    let spec = gen::Spec {
        kind,
        n: a.n,
        m: a.m,
        seed: a.seed,
        directed: a.directed,
    };
    let g = gen::generate(&spec).map_err(|e| Error::Input(e.to_string()))?;
    io::save(&g, &a.out, a.format.into())?;
    Ok(())
}

fn cmd_selftest(exhaustive: bool) -> Result<(), Error> {
    let mut failed = Vec::new();
    for c in selftest(exhaustive) {
        let tag = if c.ok() { "ok" } else { "FAIL" };
        println!("{tag:4} {:40} {:>10} cases {:>6} mismatches", c.name, c.cases, c.mismatches);
        if !c.ok() {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Internal(format!("self-test failed: {}", failed.join(", "))))
    }
}
