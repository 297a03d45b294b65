//! The search against a layer-by-layer BFS written independently of the
//! harness reference.

use proptest::prelude::*;

use ternbfs::bfs::{all_successors_nonwhite, is_old_gray, run_bfs, BfsOptions, Record};
use ternbfs::graph::{gen, Graph};
use ternbfs::harness::selftest::configurations;
use ternbfs::harness::{reference_bfs, run, verify_run, RunConfig};
use ternbfs::store::{Color, ColorStorage, PlainColors};

/// Distances and roots by frontier expansion over the edge list.
fn layered(g: &Graph, order: &[u32]) -> (Vec<Option<u32>>, Vec<u32>) {
    let n = g.n();
    let mut dist = vec![None; n + 1];
    let mut roots = Vec::new();
    let edges = g.edges();
    for &s in order {
        if dist[s as usize].is_some() {
            continue;
        }
        roots.push(s);
        dist[s as usize] = Some(0);
        let mut frontier = vec![s];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &(a, b) in &edges {
                let arcs: &[(u32, u32)] = if g.is_directed() { &[(a, b)] } else { &[(a, b), (b, a)] };
                for &(u, v) in arcs {
                    if frontier.contains(&u) && dist[v as usize].is_none() {
                        dist[v as usize] = Some(d);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
    }
    (dist, roots)
}

fn check_against_layers(g: &Graph, order: &[u32], records: &[Record]) -> Result<(), TestCaseError> {
    let (dist, roots) = layered(g, order);
    prop_assert_eq!(records.len(), g.n());
    let mut seen = vec![false; g.n() + 1];
    let mut got_roots = Vec::new();
    let mut emitted = vec![None; g.n() + 1];
    for r in records {
        prop_assert!(!std::mem::replace(&mut seen[r.v as usize], true));
        prop_assert_eq!(Some(r.dist), dist[r.v as usize]);
        match r.parent {
            None => got_roots.push(r.v),
            Some(p) => {
                prop_assert!(g.pred(r.v as usize).contains(&p));
                prop_assert_eq!(emitted[p as usize], Some(r.dist - 1));
            }
        }
        emitted[r.v as usize] = Some(r.dist);
    }
    prop_assert_eq!(got_roots, roots);
    Ok(())
}

fn graphs() -> impl Strategy<Value = (Graph, u64)> {
    (1usize..=700, 0usize..=3, any::<bool>(), any::<u64>(), 0u8..5).prop_map(|(n, ratio, directed, seed, kind)| {
        let pairs = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
        let g = match kind {
            0 => gen::path(n, directed),
            1 => gen::grid(n, directed),
            2 => gen::star(n, directed),
            _ => gen::gnm(n, (ratio * n).min(pairs), seed, directed).unwrap(),
        };
        (g, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_configuration_matches_layers((g, seed) in graphs()) {
        let order = gen::random_order(g.n(), seed);
        let oracle = reference_bfs(&g, &order);
        for cfg in configurations() {
            let mut out: Vec<Record> = Vec::new();
            let m = run(&g, &order, RunConfig { audit: true, ..cfg }, &mut out).unwrap();
            check_against_layers(&g, &order, &out)?;
            prop_assert!(verify_run(&g, &out, &oracle).pass);
            prop_assert!(m.violations().is_empty(), "{:?}", m.violations());
        }
    }

    #[test]
    fn predicates_match_naive_scans(n in 2usize..60, m in 0usize..200, seed in any::<u64>(), directed in any::<bool>(), colors in prop::collection::vec(0u8..3, 60)) {
        let pairs = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
        let g = gen::gnm(n, m.min(pairs), seed, directed).unwrap();
        let mut c = PlainColors::new(n);
        let col = |i: usize| match colors[i] {
            0 => Color::Gray,
            1 => Color::White,
            _ => Color::Black,
        };
        for v in 1..=n {
            c.set(v, col(v - 1));
        }
        let edges = g.edges();
        for u in 1..=n {
            if col(u - 1) != Color::Gray {
                continue;
            }
            let out = |(a, b): (u32, u32)| if a as usize == u { Some(b) } else if !directed && b as usize == u { Some(a) } else { None };
            let inn = |(a, b): (u32, u32)| if b as usize == u { Some(a) } else if !directed && a as usize == u { Some(b) } else { None };
            let no_white = edges.iter().filter_map(|&e| out(e)).all(|w| col(w as usize - 1) != Color::White);
            let black_in = edges.iter().filter_map(|&e| inn(e)).any(|w| col(w as usize - 1) == Color::Black);
            prop_assert_eq!(all_successors_nonwhite(&g, &c, u), no_white);
            prop_assert_eq!(is_old_gray(&g, &c, u, 0), black_in);
            prop_assert!(is_old_gray(&g, &c, u, u));
        }
    }
}

fn plain_run(g: &Graph, order: &[u32]) -> Vec<Record> {
    let mut c = PlainColors::new(g.n());
    let mut out = Vec::new();
    run_bfs(g, &mut c, order, &mut out, BfsOptions::default());
    out
}

fn triples(records: &[Record]) -> Vec<(u32, Option<u32>, u32)> {
    let mut t: Vec<_> = records.iter().map(|r| (r.v, r.parent, r.dist)).collect();
    t.sort();
    t
}

#[test]
fn small_examples() {
    let path = gen::path(3, false);
    assert_eq!(triples(&plain_run(&path, &[1, 2, 3])), vec![(1, None, 0), (2, Some(1), 1), (3, Some(2), 2)]);

    let one = Graph::from_edges(1, &[], false);
    assert_eq!(triples(&plain_run(&one, &[1])), vec![(1, None, 0)]);

    let directed = gen::path(3, true);
    assert_eq!(triples(&plain_run(&directed, &[1, 2, 3]))[2], (3, Some(2), 2));
    let reversed = plain_run(&directed, &[3, 2, 1]);
    assert_eq!(reversed.iter().filter(|r| r.parent.is_none()).count(), 3);

    let star = gen::star(6, false);
    let out = plain_run(&star, &[1, 2, 3, 4, 5, 6]);
    assert!(out.iter().filter(|r| r.v != 1).all(|r| r.parent == Some(1) && r.dist == 1));

    let cycle = Graph::from_edges(3, &[(1, 2), (2, 3), (3, 1)], true);
    assert_eq!(triples(&plain_run(&cycle, &[1, 2, 3])).iter().map(|t| t.2).collect::<Vec<_>>(), vec![0, 1, 2]);

    let two = Graph::from_edges(3, &[(1, 2)], false);
    assert_eq!(reference_bfs(&two, &[1, 2, 3]).roots, vec![1, 3]);
}

#[test]
fn verifier_rejects_tampering() {
    let g = gen::gnm(300, 900, 4, false).unwrap();
    let order: Vec<u32> = (1..=300).collect();
    let oracle = reference_bfs(&g, &order);
    let mut out: Vec<Record> = Vec::new();
    run(&g, &order, RunConfig::default(), &mut out).unwrap();
    assert!(verify_run(&g, &out, &oracle).pass);

    let mut bad = out.clone();
    let i = bad.iter().position(|r| r.parent.is_some()).unwrap();
    let v = bad[i].v;
    let wrong = (1..=300u32).find(|&p| !g.pred(v as usize).contains(&p) && p != v).unwrap();
    bad[i].parent = Some(wrong);
    let report = verify_run(&g, &bad, &oracle);
    assert!(!report.pass);
    assert_eq!(report.first_discrepancy.unwrap().vertex, v);

    let mut short = out.clone();
    short.pop();
    assert!(!verify_run(&g, &short, &oracle).pass);
}

#[test]
fn metrics_are_deterministic() {
    let g = gen::gnm(5000, 20_000, 11, true).unwrap();
    let order = gen::random_order(5000, 2);
    for cfg in configurations() {
        let a = run(&g, &order, cfg, &mut ternbfs::bfs::Discard).unwrap();
        let b = run(&g, &order, cfg, &mut ternbfs::bfs::Discard).unwrap();
        assert_eq!(a.without_time(), b.without_time());
    }
}

#[test]
fn space_at_a_million_vertices() {
    let n = 1 << 20;
    let g = Graph::from_edges(n, &[], false);
    let order: Vec<u32> = (1..=n as u32).collect();
    let m = run(&g, &order, RunConfig::default(), &mut ternbfs::bfs::Discard).unwrap();
    assert_eq!(m.min_color_bits, 1_661_954);
    assert_eq!(m.extra_bound, Some(5242 + 400 + 63_400 + 10_240));
    assert!(m.extra_bits >= 0 && m.extra_bits as u64 <= m.extra_bound.unwrap());
    assert_eq!(m.peak_bits as i64, m.min_color_bits as i64 + m.extra_bits);
}
