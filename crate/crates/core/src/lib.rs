//! Breadth-first search that keeps vertex colors in about `n·log2 3` bits.

pub mod bfs;
pub mod bignum;
pub mod kernels;
pub mod digits;
pub mod error;
pub mod graph;
pub mod harness;
pub mod pow3;
pub mod store;
