//! Exact convex hull facts for small integer point sets: vertices, facet
//! normals and Minkowski sums.

use std::collections::BTreeSet;

use crate::intmat::{self, dot};

pub type Point = Vec<i64>;

pub fn dedup(points: &[Point]) -> Vec<Point> {
    let s: BTreeSet<Point> = points.iter().cloned().collect();
    s.into_iter().collect()
}

/// Maximum of `a·xi` over the set and the points attaining it.
pub fn support_value(points: &[Point], xi: &[i64]) -> (i64, Vec<Point>) {
    let lambda = points.iter().map(|p| dot(p, xi)).max().expect("nonempty point set");
    let face = points.iter().filter(|p| dot(p, xi) == lambda).cloned().collect();
    (lambda, face)
}

/// Column indices giving an injective coordinate projection of the affine hull.
fn hull_coordinates(points: &[Point]) -> Vec<usize> {
    let m = points[0].len();
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    let h = intmat::hnf_rows(&diffs, m);
    h.iter()
        .map(|r| r.iter().position(|&x| x != 0).unwrap())
        .collect()
}

/// Primitive outer facet normals of a full-dimensional point set in `Z^m`.
pub fn facet_normals_full(points: &[Point]) -> Vec<Vec<i64>> {
    let pts = dedup(points);
    let m = pts[0].len();
    match m {
        0 => vec![],
        1 => vec![vec![1], vec![-1]],
        2 => facet_normals_2d(&pts),
        _ => facet_normals_brute(&pts, m),
    }
}

fn facet_normals_2d(pts: &[Point]) -> Vec<Vec<i64>> {
    let hull = hull_2d(pts);
    let k = hull.len();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let (p, q) = (&hull[i], &hull[(i + 1) % k]);
        // counterclockwise order: outer normal of edge p->q is (dy, -dx)
        out.push(intmat::primitive(&[q[1] - p[1], p[0] - q[0]]));
    }
    out
}

/// Counterclockwise strict hull (monotone chain) of a 2d point set.
fn hull_2d(pts: &[Point]) -> Vec<Point> {
    let mut p = dedup(pts);
    p.sort();
    if p.len() < 3 {
        return p;
    }
    let cr = |o: &Point, a: &Point, b: &Point| {
        (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128 - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128
    };
    let mut lower: Vec<Point> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && cr(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && cr(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn facet_normals_brute(pts: &[Point], m: usize) -> Vec<Vec<i64>> {
    let n = pts.len();
    let mut found: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let p0 = &pts[idx[0]];
        let diffs: Vec<Vec<i64>> = idx[1..]
            .iter()
            .map(|&j| pts[j].iter().zip(p0).map(|(a, b)| a - b).collect())
            .collect();
        let c = intmat::cross(&diffs, m);
        if c.iter().any(|&x| x != 0) {
            let xi = intmat::primitive(&c);
            if !(found.contains(&xi) && found.contains(&neg(&xi))) {
                let h = dot(&xi, p0);
                let (mut above, mut below) = (false, false);
                for p in pts {
                    let v = dot(&xi, p);
                    above |= v > h;
                    below |= v < h;
                    if above && below {
                        break;
                    }
                }
                if !above {
                    found.insert(xi);
                } else if !below {
                    found.insert(neg(&xi));
                }
            }
        }
        // next combination
        let mut k = m;
        loop {
            if k == 0 {
                return found.into_iter().collect();
            }
            k -= 1;
            if idx[k] < n - m + k {
                idx[k] += 1;
                for r in k + 1..m {
                    idx[r] = idx[r - 1] + 1;
                }
                break;
            }
        }
    }
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

/// Primitive outer normals of the facets of `conv(points)` seen as a subset of `Z^m`.
///
/// Full-dimensional sets give their facet normals. A set of codimension one
/// gives `±ν` for its primitive normal `ν`. Anything thinner gives nothing.
pub fn outer_normals(points: &[Point], m: usize) -> Vec<Vec<i64>> {
    let pts = dedup(points);
    if pts.is_empty() || m == 0 {
        return vec![];
    }
    let d = intmat::affine_dim(&pts);
    if d == m {
        facet_normals_full(&pts)
    } else if d + 1 == m {
        let diffs: Vec<Vec<i64>> = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
            .collect();
        let basis = intmat::hnf_rows(&diffs, m);
        let nu = intmat::primitive(&intmat::cross(&basis, m));
        vec![nu.clone(), neg(&nu)]
    } else {
        vec![]
    }
}

/// Extreme points of `conv(points)`.
pub fn hull_vertices(points: &[Point]) -> Vec<Point> {
    let pts = dedup(points);
    if pts.len() <= 1 {
        return pts;
    }
    let d = intmat::affine_dim(&pts);
    if d == 0 {
        return vec![pts[0].clone()];
    }
    let cols = hull_coordinates(&pts);
    let proj: Vec<Point> = pts.iter().map(|p| cols.iter().map(|&c| p[c]).collect()).collect();
    let keep: Vec<bool> = if d == 1 {
        let lo = proj.iter().min().unwrap();
        let hi = proj.iter().max().unwrap();
        proj.iter().map(|p| p == lo || p == hi).collect()
    } else if d == 2 {
        let h = hull_2d(&proj);
        proj.iter().map(|p| h.contains(p)).collect()
    } else {
        let normals = facet_normals_brute(&proj, d);
        let heights: Vec<i64> = normals
            .iter()
            .map(|xi| proj.iter().map(|p| dot(p, xi)).max().unwrap())
            .collect();
        proj.iter()
            .map(|p| {
                let inc: Vec<Vec<i64>> = normals
                    .iter()
                    .zip(&heights)
                    .filter(|(xi, &h)| dot(p, xi) == h)
                    .map(|(xi, _)| xi.clone())
                    .collect();
                intmat::rank(&inc, d) == d
            })
            .collect()
    };
    pts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// Vertices of the Minkowski sum of the hulls of the given sets.
pub fn minkowski_sum(sets: &[&[Point]], m: usize) -> Vec<Point> {
    let mut acc: Vec<Point> = vec![vec![0; m]];
    for s in sets {
        let vs = hull_vertices(s);
        let mut next = Vec::with_capacity(acc.len() * vs.len());
        for a in &acc {
            for v in &vs {
                next.push(a.iter().zip(v).map(|(x, y)| x + y).collect());
            }
        }
        acc = hull_vertices(&next);
    }
    acc
}

/// Integer coordinates of a face inside `xi^⊥` (drops the constant height).
pub fn project_face(face: &[Point], completion: &[Vec<i64>]) -> Vec<Point> {
    face.iter()
        .map(|p| intmat::mat_vec(&completion[1..], p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_endpoints() {
        let a: Vec<Point> = (0..4).map(|k| vec![k]).collect();
        assert_eq!(hull_vertices(&a), vec![vec![0], vec![3]]);
    }

    #[test]
    fn square_and_triangle_with_edge_point() {
        let sq = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        assert_eq!(hull_vertices(&sq).len(), 4);
        let t = vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![1, 1]];
        assert_eq!(hull_vertices(&t), vec![vec![0, 0], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn flat_set_in_space() {
        let a = vec![vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, 1, 1], vec![0, 1, 0]];
        assert_eq!(hull_vertices(&a).len(), 4);
        let n = outer_normals(&a, 3);
        assert_eq!(n, vec![vec![1, 0, 0], vec![-1, 0, 0]]);
    }

    #[test]
    fn cube_facets() {
        let mut c = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    c.push(vec![x, y, z]);
                }
            }
        }
        c.push(vec![1, 1, 0]);
        assert_eq!(facet_normals_full(&c).len(), 6);
        assert_eq!(hull_vertices(&c).len(), 8);
    }

    #[test]
    fn simplex_normals() {
        let s = vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let mut n = facet_normals_full(&s);
        n.sort();
        assert_eq!(n, vec![vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1], vec![1, 1, 1]]);
    }

    #[test]
    fn support_value_square() {
        let a = vec![vec![0, 0], vec![2, 0], vec![0, 2], vec![2, 2]];
        let (l, f) = support_value(&a, &[1, 0]);
        assert_eq!(l, 2);
        assert_eq!(f, vec![vec![2, 0], vec![2, 2]]);
    }
}
