//! Exact normalized mixed volumes by recursive facet expansion, and the mixed
//! area as an exact sum of square roots.

use crate::intmat::{self, dot, Rat};

use super::hull::{self, Point};
use super::sqrtsum::SqrtSum;

/// `m!·V(conv K_1, …, conv K_m)` for point sets in `Z^m`, with `K.len() == m`.
///
/// Uses `m!V(K_1..K_m) = Σ_ξ h_{K_m}(ξ)·(m-1)!V(K_1^ξ..K_{m-1}^ξ)` over the
/// primitive facet normals `ξ` of `K_1+…+K_{m-1}`, with faces taken in lattice
/// coordinates of `ξ^⊥`.
pub fn normalized_mixed_volume(sets: &[Vec<Point>]) -> i128 {
    let m = sets.len();
    if m == 0 {
        return 1;
    }
    let verts: Vec<Vec<Point>> = sets.iter().map(|s| hull::hull_vertices(s)).collect();
    if verts.iter().any(|v| v.len() <= 1) {
        return 0;
    }
    if m == 1 {
        let lo = verts[0].iter().map(|p| p[0]).min().unwrap();
        let hi = verts[0].iter().map(|p| p[0]).max().unwrap();
        return (hi - lo) as i128;
    }
    let head: Vec<&[Point]> = verts[..m - 1].iter().map(|v| v.as_slice()).collect();
    let sum = hull::minkowski_sum(&head, m);
    let normals = hull::outer_normals(&sum, m);
    let mut total = 0i128;
    for xi in normals {
        let (h, _) = hull::support_value(&verts[m - 1], &xi);
        if h == 0 {
            continue;
        }
        let p = intmat::complete_primitive(&xi);
        let faces: Vec<Vec<Point>> = verts[..m - 1]
            .iter()
            .map(|v| hull::project_face(&hull::support_value(v, &xi).1, &p))
            .collect();
        total += h as i128 * normalized_mixed_volume(&faces);
    }
    total
}

/// Normalized lattice mixed volume of the faces `K_j^ξ` of the given sets, in `ξ^⊥`.
pub fn face_mixed_volume(sets: &[&[Point]], xi: &[i64]) -> i128 {
    let p = intmat::complete_primitive(xi);
    let faces: Vec<Vec<Point>> = sets
        .iter()
        .map(|s| hull::project_face(&hull::support_value(s, xi).1, &p))
        .collect();
    normalized_mixed_volume(&faces)
}

/// `V(L_1, …, L_{n-1}, B^n)` summed as `(1/n!)·Σ_ξ ‖ξ‖·MV_{ξ^⊥}(L^ξ)` over the rays.
pub fn mixed_with_ball(sets: &[&[Point]], rays: &[Vec<i64>]) -> SqrtSum {
    let n = sets.len() + 1;
    let nfact: i128 = (1..=n as i128).product();
    let mut out = SqrtSum::zero();
    for xi in rays {
        let mv = face_mixed_volume(sets, xi);
        if mv != 0 {
            out.add_term(Rat::new(mv, nfact), dot(xi, xi));
        }
    }
    out
}

/// Mixed area `V' = Σ_j V(K_1, …, B at slot j, …, K_n)`.
pub fn mixed_area(sets: &[Vec<Point>], rays: &[Vec<i64>]) -> SqrtSum {
    let n = sets.len();
    let mut out = SqrtSum::zero();
    for j in 0..n {
        let others: Vec<&[Point]> = (0..n).filter(|&i| i != j).map(|i| sets[i].as_slice()).collect();
        out.add(&mixed_with_ball(&others, rays));
    }
    out
}

/// Coefficients `v_0..v_n` of `v(t) = Σ_k v_k t^k / k!`, normalized so that
/// `v(t) = (1+tn)^{n-1} V'` for unmixed tuples.
pub fn v_coefficients(sets: &[Vec<Point>], rays: &[Vec<i64>]) -> Vec<SqrtSum> {
    let n = sets.len();
    let refs: Vec<&[Point]> = sets.iter().map(|s| s.as_slice()).collect();
    let total = hull::minkowski_sum(&refs, n);
    let mut v = vec![SqrtSum::zero(); n + 1];
    for j in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        for mask in 0u32..(1u32 << rest.len()) {
            let k = mask.count_ones() as usize;
            let slots: Vec<&[Point]> = rest
                .iter()
                .enumerate()
                .map(|(b, &i)| {
                    if mask & (1 << b) != 0 {
                        total.as_slice()
                    } else {
                        sets[i].as_slice()
                    }
                })
                .collect();
            let kfact: i128 = (1..=k as i128).product();
            v[k].add(&mixed_with_ball(&slots, rays).scale(Rat::from_integer(kfact)));
        }
    }
    v
}
