#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use toric::polytope::{self, Point};
use toric::solver::sample_gaussian_seeded;
use toric::{ExpSumSystem, SupportTuple, C64};

fn dedup(mut v: Vec<Point>) -> Vec<Point> {
    v.sort();
    v.dedup();
    v
}

/// Point sets in `[0, max]^n`, at least two distinct points each.
pub fn point_sets(n: usize, max_pts: usize, max: i64) -> impl Strategy<Value = Vec<Vec<Point>>> {
    let set = prop::collection::vec(prop::collection::vec(0..=max, n), 2..=max_pts).prop_map(dedup);
    prop::collection::vec(set, n).prop_filter("two points per support", |s| s.iter().all(|a| a.len() >= 2))
}

/// Supports with a full-rank lattice and a positive root count.
pub fn solvable_supports(n: usize, max_pts: usize, max: i64) -> impl Strategy<Value = Vec<Vec<Point>>> {
    point_sets(n, max_pts, max).prop_filter("generic root count", |s| {
        SupportTuple::unweighted(s.clone()).is_ok() && polytope::bkk_count(s).map_or(false, |k| k > 0)
    })
}

pub fn system(points: Vec<Vec<Point>>, seed: u64) -> ExpSumSystem {
    let st = Arc::new(SupportTuple::unweighted(points).expect("valid supports"));
    sample_gaussian_seeded(&st, seed)
}

pub fn systems(n: usize, max_pts: usize, max: i64) -> impl Strategy<Value = ExpSumSystem> {
    (solvable_supports(n, max_pts, max), any::<u64>()).prop_map(|(p, s)| system(p, s))
}

/// Points with `|Re| ≤ r` and imaginary parts in `[-π, π]`.
pub fn torus_point(n: usize, r: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-r..=r, -PI..=PI).prop_map(|(a, b)| C64::new(a, b)), n)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
