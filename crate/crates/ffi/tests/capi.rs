//! The C interface, called directly and from a compiled C program.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ternbfs_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let mut needed = 0;
    assert_eq!(unsafe { tbfs_last_error(buf.as_mut_ptr(), buf.len(), &mut needed) }, TbfsStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn records(r: *const TbfsRun) -> Vec<TbfsRecord> {
    let n = unsafe { tbfs_run_record_count(r) };
    let mut out = Vec::new();
    let mut buf = [TbfsRecord { vertex: 0, parent: 0, distance: 0 }; 7];
    while out.len() < n {
        let mut written = 0;
        let s = unsafe { tbfs_run_records(r, out.len(), buf.as_mut_ptr(), buf.len(), &mut written) };
        assert_eq!(s, TbfsStatus::Ok);
        out.extend_from_slice(&buf[..written]);
    }
    out
}

#[test]
fn path_from_edges() {
    let edges = [1u32, 2, 2, 3];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tbfs_graph_from_edges(3, edges.as_ptr(), 2, false, &mut g) }, TbfsStatus::Ok);
    assert_eq!(unsafe { (tbfs_graph_vertices(g), tbfs_graph_edges(g)) }, (3, 2));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tbfs_run(g, ptr::null(), 0, ptr::null(), &mut r) }, TbfsStatus::Ok);
    let got: Vec<(u32, u32, u32)> = records(r).iter().map(|x| (x.vertex, x.parent, x.distance)).collect();
    assert_eq!(got, vec![(1, 0, 0), (2, 1, 1), (3, 2, 2)]);
    assert_eq!(unsafe { tbfs_run_verify(r, g) }, TbfsStatus::Ok);
    unsafe {
        tbfs_run_free(r);
        tbfs_graph_free(g);
    }
}

#[test]
fn generated_graph_in_every_mode() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tbfs_graph_generate(TbfsKind::Gnm, 4000, 16_000, 5, true, &mut g) }, TbfsStatus::Ok);
    for backend in [TbfsBackend::Packed, TbfsBackend::Spill] {
        for pow3 in [TbfsPow3::Table, TbfsPow3::Strided, TbfsPow3::Squaring] {
            let cfg = TbfsConfig { backend, pow3, stride: 3, audit: true };
            let mut r = ptr::null_mut();
            assert_eq!(unsafe { tbfs_run(g, ptr::null(), 0, &cfg, &mut r) }, TbfsStatus::Ok, "{}", last_error());
            assert_eq!(unsafe { tbfs_run_verify(r, g) }, TbfsStatus::Ok);
            let mut s = TbfsSummary::default();
            assert_eq!(unsafe { tbfs_run_summary(r, &mut s) }, TbfsStatus::Ok);
            assert!(s.succinct);
            assert_eq!(s.n, 4000);
            assert!(s.extra_bits >= 0 && s.extra_bits as u64 <= s.extra_bound);
            assert_eq!(s.peak_bits as i64, s.min_color_bits as i64 + s.extra_bits);

            let mut needed = 0;
            let status = unsafe { tbfs_run_metrics_json(r, ptr::null_mut(), 0, &mut needed) };
            assert_eq!(status, TbfsStatus::BufferTooSmall);
            let mut buf = vec![0 as c_char; needed];
            assert_eq!(unsafe { tbfs_run_metrics_json(r, buf.as_mut_ptr(), needed, &mut needed) }, TbfsStatus::Ok);
            let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
            let m: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(m["extra_bits"].as_i64(), Some(s.extra_bits));
            unsafe { tbfs_run_free(r) };
        }
    }
    unsafe { tbfs_graph_free(g) };
}

#[test]
fn custom_order() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tbfs_graph_generate(TbfsKind::Path, 5, 0, 0, true, &mut g) }, TbfsStatus::Ok);
    let order = [5u32, 4, 3, 2, 1];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { tbfs_run(g, order.as_ptr(), 5, ptr::null(), &mut r) }, TbfsStatus::Ok);
    assert!(records(r).iter().all(|x| x.parent == 0 && x.distance == 0));
    assert_eq!(unsafe { tbfs_run_verify(r, g) }, TbfsStatus::Ok);
    unsafe {
        tbfs_run_free(r);
        tbfs_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    let mut g = ptr::null_mut();
    let bad = [1u32, 4];
    assert_eq!(unsafe { tbfs_graph_from_edges(3, bad.as_ptr(), 1, false, &mut g) }, TbfsStatus::InvalidArgument);
    assert!(last_error().contains("out of range"));
    assert_eq!(unsafe { tbfs_graph_from_edges(3, ptr::null(), 1, false, &mut g) }, TbfsStatus::NullPointer);
    assert_eq!(unsafe { tbfs_graph_generate(TbfsKind::Gnm, 3, 10, 0, false, &mut g) }, TbfsStatus::InvalidArgument);

    let missing = CString::new("/nonexistent/graph.txt").unwrap();
    assert_eq!(unsafe { tbfs_graph_load(missing.as_ptr(), TbfsFormat::Edgelist, false, &mut g) }, TbfsStatus::Io);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "3 1\n1 x\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tbfs_graph_load(c.as_ptr(), TbfsFormat::Edgelist, false, &mut g) }, TbfsStatus::Parse);
    assert!(last_error().contains("line 2"));

    std::fs::write(&path, "3 1\n1 2\n").unwrap();
    assert_eq!(unsafe { tbfs_graph_load(c.as_ptr(), TbfsFormat::Edgelist, false, &mut g) }, TbfsStatus::Ok);
    assert_eq!(last_error(), "");
    let mut r = ptr::null_mut();
    let order = [1u32, 1, 2];
    assert_eq!(unsafe { tbfs_run(g, order.as_ptr(), 3, ptr::null(), &mut r) }, TbfsStatus::InvalidArgument);
    let cfg = TbfsConfig { stride: 0, pow3: TbfsPow3::Strided, ..tbfs_config_default() };
    assert_eq!(unsafe { tbfs_run(g, ptr::null(), 0, &cfg, &mut r) }, TbfsStatus::InvalidArgument);
    assert_eq!(unsafe { tbfs_run(ptr::null(), ptr::null(), 0, ptr::null(), &mut r) }, TbfsStatus::NullPointer);

    let mut other = ptr::null_mut();
    assert_eq!(unsafe { tbfs_graph_generate(TbfsKind::Star, 4, 0, 0, false, &mut other) }, TbfsStatus::Ok);
    assert_eq!(unsafe { tbfs_run(g, ptr::null(), 0, ptr::null(), &mut r) }, TbfsStatus::Ok);
    assert_eq!(unsafe { tbfs_run_verify(r, other) }, TbfsStatus::InvalidArgument);
    unsafe {
        tbfs_run_free(r);
        tbfs_graph_free(g);
        tbfs_graph_free(other);
        tbfs_graph_free(ptr::null_mut());
        tbfs_run_free(ptr::null_mut());
    }
    assert_eq!(unsafe { tbfs_graph_vertices(ptr::null()) }, 0);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tbfs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "tbfs.h"

int main(void) {
    TbfsGraph *g = NULL;
    if (tbfs_graph_generate(TBFS_KIND_GRID, 2500, 0, 1, false, &g) != TBFS_STATUS_OK) return 10;
    TbfsConfig cfg = tbfs_config_default();
    cfg.backend = TBFS_BACKEND_SPILL;
    cfg.pow3 = TBFS_POW3_SQUARING;
    TbfsRun *r = NULL;
    if (tbfs_run(g, NULL, 0, &cfg, &r) != TBFS_STATUS_OK) return 11;
    if (tbfs_run_verify(r, g) != TBFS_STATUS_OK) return 12;
    TbfsSummary s;
    if (tbfs_run_summary(r, &s) != TBFS_STATUS_OK) return 13;
    TbfsRecord rec[4];
    size_t written = 0;
    if (tbfs_run_records(r, 0, rec, 4, &written) != TBFS_STATUS_OK || written != 4) return 14;
    printf("%zu %d %llu %u\n", s.n, (int)s.succinct, (unsigned long long)s.roots, rec[0].vertex);
    tbfs_run_free(r);
    tbfs_graph_free(g);
    if (tbfs_graph_from_edges(2, NULL, 1, false, &g) != TBFS_STATUS_NULL_POINTER) return 15;
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in <profile>/deps; the static library one level up.
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("libternbfs_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("C compiler");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout), "2500 1 1 1\n");
}
