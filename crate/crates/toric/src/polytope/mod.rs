//! Combinatorial invariants of a support tuple: fan rays, facet gaps, the
//! strongly mixed test, mixed volume and area, `v_k`, `d_r` and `Q`.

pub mod hull;
pub mod mixed;
pub mod sqrtsum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::SupportTuple;
use crate::intmat::{dot, Rat};
use crate::lattice::lattice_from_points;

pub use hull::{hull_vertices, support_value, Point};
pub use sqrtsum::SqrtSum;

/// A primitive integer direction spanning a 1-cone of the fan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ray {
    pub xi: Vec<i64>,
    pub euclid_norm_sq: i64,
}

impl Ray {
    pub fn new(xi: Vec<i64>) -> Self {
        let euclid_norm_sq = dot(&xi, &xi);
        Ray { xi, euclid_norm_sq }
    }

    pub fn norm(&self) -> f64 {
        (self.euclid_norm_sq as f64).sqrt()
    }

    pub fn unit(&self) -> Vec<f64> {
        let r = self.norm();
        self.xi.iter().map(|&x| x as f64 / r).collect()
    }
}

/// A facet gap `gap/‖ξ‖` kept as integers so its square is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub gap: i64,
    pub norm_sq: i64,
}

impl Gap {
    pub fn value(&self) -> f64 {
        self.gap as f64 / (self.norm_sq as f64).sqrt()
    }

    pub fn squared(&self) -> Rat {
        Rat::new((self.gap as i128).pow(2), self.norm_sq as i128)
    }

    fn less_than(&self, other: &Gap) -> bool {
        self.squared() < other.squared()
    }
}

fn dim(sets: &[Vec<Point>]) -> usize {
    sets[0][0].len()
}

/// Facet normals of `conv A_1 + … + conv A_n`, the rays of the tuple's fan.
pub fn fan_rays(sets: &[Vec<Point>]) -> Result<Vec<Ray>> {
    let n = dim(sets);
    let refs: Vec<&[Point]> = sets.iter().map(|s| s.as_slice()).collect();
    let sum = hull::minkowski_sum(&refs, n);
    let d = crate::intmat::affine_dim(&sum);
    if d < n {
        return Err(Error::RankDeficient { rank: d, n });
    }
    let mut rays: Vec<Ray> = hull::facet_normals_full(&sum).into_iter().map(Ray::new).collect();
    rays.sort();
    Ok(rays)
}

/// Gap `λ_i(ξ) − (second distinct value)` or `None` when all points lie on the face.
pub fn ray_gap(points: &[Point], ray: &Ray) -> Option<Gap> {
    let (lambda, _) = support_value(points, &ray.xi);
    let second = points.iter().map(|p| dot(p, &ray.xi)).filter(|&v| v < lambda).max()?;
    Some(Gap { gap: lambda - second, norm_sq: ray.euclid_norm_sq })
}

/// Per-ray gaps for every support, `None` marking degenerate pairs.
pub fn gap_table(sets: &[Vec<Point>], rays: &[Ray]) -> Vec<Vec<Option<Gap>>> {
    rays.iter()
        .map(|r| sets.iter().map(|a| ray_gap(a, r)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetGaps {
    /// `η_i = min_ξ η_i(ξ)`; `None` if every ray is degenerate for support `i`.
    pub eta_i: Vec<Option<Gap>>,
    pub eta: Option<Gap>,
}

fn min_gaps(table: &[Vec<Option<Gap>>], n: usize) -> FacetGaps {
    let mut eta_i: Vec<Option<Gap>> = vec![None; n];
    for row in table {
        for (i, g) in row.iter().enumerate() {
            if let Some(g) = g {
                if eta_i[i].map_or(true, |e| g.less_than(&e)) {
                    eta_i[i] = Some(*g);
                }
            }
        }
    }
    let mut eta: Option<Gap> = None;
    for g in eta_i.iter().flatten() {
        if eta.map_or(true, |e| g.less_than(&e)) {
            eta = Some(*g);
        }
    }
    FacetGaps { eta_i, eta }
}

/// Facet gaps with the strict contract: any support lying wholly on a face is an error.
pub fn facet_gap(sets: &[Vec<Point>]) -> Result<FacetGaps> {
    let rays = fan_rays(sets)?;
    let table = gap_table(sets, &rays);
    for (r, row) in rays.iter().zip(&table) {
        if let Some(i) = row.iter().position(|g| g.is_none()) {
            return Err(Error::DegenerateSupport { i, xi: r.xi.clone() });
        }
    }
    Ok(min_gaps(&table, sets.len()))
}

/// Facet gaps where degenerate (support, ray) pairs count as `+∞`.
pub fn facet_gap_lenient(sets: &[Vec<Point>], rays: &[Ray]) -> FacetGaps {
    min_gaps(&gap_table(sets, rays), sets.len())
}

/// Every ray has a support whose face in that direction is a single point.
pub fn strongly_mixed(sets: &[Vec<Point>], rays: &[Ray]) -> bool {
    rays.iter().all(|r| {
        sets.iter().any(|a| {
            let (_, f) = support_value(&hull::dedup(a), &r.xi);
            f.len() == 1
        })
    })
}

pub fn mixed_volume(sets: &[Vec<Point>]) -> i128 {
    mixed::normalized_mixed_volume(sets)
}

pub fn mixed_area(sets: &[Vec<Point>]) -> Result<SqrtSum> {
    let rays = fan_rays(sets)?;
    let xs: Vec<Vec<i64>> = rays.into_iter().map(|r| r.xi).collect();
    Ok(mixed::mixed_area(sets, &xs))
}

pub fn v_coefficients(sets: &[Vec<Point>]) -> Result<Vec<SqrtSum>> {
    let rays = fan_rays(sets)?;
    let xs: Vec<Vec<i64>> = rays.into_iter().map(|r| r.xi).collect();
    Ok(mixed::v_coefficients(sets, &xs))
}

pub fn bkk_count(sets: &[Vec<Point>]) -> Result<i64> {
    let n = dim(sets);
    let nv = mixed_volume(sets) as i64;
    let det = lattice_from_points(sets, n)?.det();
    if nv % det != 0 {
        return Err(Error::InternalInconsistency { nv, det });
    }
    Ok(nv / det)
}

pub fn diameter(points: &[Point]) -> f64 {
    let mut d = 0i64;
    for p in points {
        for q in points {
            let v: Vec<i64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            d = d.max(dot(&v, &v));
        }
    }
    (d as f64).sqrt()
}

/// Degree bound for the locus of systems with roots at toric infinity.
///
/// Strongly mixed tuples get `min(#rays, S)`. Otherwise the general bound is
/// used with `n!·v_k` in place of `v_k` (the larger of the two conventions).
pub fn dr_bound(sets: &[Vec<Point>]) -> Result<f64> {
    let n = dim(sets);
    let rays = fan_rays(sets)?;
    let s: usize = sets.iter().map(|a| a.len()).sum();
    if strongly_mixed(sets, &rays) {
        return Ok(rays.len().min(s) as f64);
    }
    let det = lattice_from_points(sets, n)?.det() as f64;
    let diam = sets.iter().map(|a| diameter(a)).fold(0.0, f64::max);
    let xs: Vec<Vec<i64>> = rays.iter().map(|r| r.xi.clone()).collect();
    let v = mixed::v_coefficients(sets, &xs);
    let nfact: f64 = (1..=n).map(|k| k as f64).product();
    let vmax = v
        .iter()
        .enumerate()
        .map(|(k, vk)| (k as f64).exp() * nfact * vk.to_f64())
        .fold(0.0, f64::max);
    Ok(diam / (2.0 * det) * vmax * rays.len() as f64)
}

/// `Q = η⁻²(Σδ_i²)·max(n!V, n!V'η)/det Λ`.
pub fn q_value(n: usize, eta: f64, deltas: &[f64], nv: f64, v_prime: f64, det: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::ZeroEta);
    }
    let nfact: f64 = (1..=n).map(|k| k as f64).product();
    let sd: f64 = deltas.iter().map(|d| d * d).sum();
    Ok(sd / (eta * eta) * nv.max(nfact * v_prime * eta) / det)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayEta {
    pub ray: Ray,
    /// One entry per support; `None` when the support lies wholly on the face.
    pub eta: Vec<Option<f64>>,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantReport {
    pub nV: i64,
    pub detLambda: i64,
    pub bkk_count: i64,
    pub mixed_area: f64,
    pub mixed_area_exact: String,
    pub eta_per_ray: Vec<RayEta>,
    pub eta_i: Vec<Option<f64>>,
    pub eta: Option<f64>,
    pub strongly_mixed: bool,
    pub dr_bound: f64,
    pub Q: Option<f64>,
    pub deltas: Vec<f64>,
}

impl InvariantReport {
    pub fn compute(st: &SupportTuple) -> Result<Self> {
        let sets = st.points();
        let n = st.n;
        let det = lattice_from_points(sets, n)?.det();
        let rays = fan_rays(sets)?;
        let xs: Vec<Vec<i64>> = rays.iter().map(|r| r.xi.clone()).collect();
        let nv = mixed_volume(sets) as i64;
        if nv % det != 0 {
            return Err(Error::InternalInconsistency { nv, det });
        }
        let area = mixed::mixed_area(sets, &xs);
        let table = gap_table(sets, &rays);
        let gaps = min_gaps(&table, n);
        let eta = gaps.eta.map(|g| g.value());
        let deltas: Vec<f64> = (0..n).map(|i| st.radius_delta0(i)).collect();
        let q = eta.and_then(|e| q_value(n, e, &deltas, nv as f64, area.to_f64(), det as f64).ok());
        Ok(InvariantReport {
            nV: nv,
            detLambda: det,
            bkk_count: nv / det,
            mixed_area: area.to_f64(),
            mixed_area_exact: area.to_string(),
            eta_per_ray: rays
                .iter()
                .zip(&table)
                .map(|(r, row)| RayEta { ray: r.clone(), eta: row.iter().map(|g| g.map(|g| g.value())).collect() })
                .collect(),
            eta_i: gaps.eta_i.iter().map(|g| g.map(|g| g.value())).collect(),
            eta,
            strongly_mixed: strongly_mixed(sets, &rays),
            dr_bound: dr_bound(sets)?,
            Q: q,
            deltas,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn n1_rays() {
        let r = fan_rays(&[pts(&[&[0], &[1], &[5]])]).unwrap();
        assert_eq!(r.iter().map(|r| r.xi.clone()).collect::<Vec<_>>(), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn simplex_rays() {
        let s = pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let r = fan_rays(&[s.clone(), s.clone(), s]).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().any(|r| r.xi == vec![1, 1, 1]));
    }

    #[test]
    fn consecutive_gaps() {
        let a = pts(&[&[0], &[1], &[2], &[3]]);
        let g = facet_gap(&[a]).unwrap();
        assert_eq!(g.eta.unwrap().squared(), Rat::from_integer(1));
    }

    #[test]
    fn strongly_mixed_pair() {
        let a = pts(&[&[0, 0], &[1, 0]]);
        let b = pts(&[&[0, 0], &[0, 1]]);
        let sets = vec![a, b];
        let rays = fan_rays(&sets).unwrap();
        assert_eq!(rays.len(), 4);
        assert!(strongly_mixed(&sets, &rays));
        assert_eq!(dr_bound(&sets).unwrap(), 4.0);
    }

    #[test]
    fn unmixed_not_strongly_mixed() {
        let s = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        let sets = vec![s.clone(), s];
        assert!(!strongly_mixed(&sets, &fan_rays(&sets).unwrap()));
    }

    #[test]
    fn segment_pair_dr() {
        let sets = vec![pts(&[&[0], &[1]])];
        assert_eq!(dr_bound(&sets).unwrap(), 2.0);
    }

    #[test]
    fn q_example() {
        assert_eq!(q_value(1, 1.0, &[0.5], 1.0, 2.0, 1.0).unwrap(), 0.5);
    }

    pub(crate) fn cube_faces() -> Vec<Vec<Point>> {
        vec![
            pts(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, 1, 1]]),
            pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 1], &[1, 0, 1]]),
            pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]),
        ]
    }

    fn planar_gaps() -> Vec<Vec<Point>> {
        vec![
            pts(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2]]),
            pts(&[&[2, 0], &[0, 2], &[4, 4]]),
        ]
    }

    #[test]
    fn cube_faces_invariants() {
        let s = cube_faces();
        assert_eq!(mixed_volume(&s), 2);
        assert_eq!(bkk_count(&s).unwrap(), 2);
        let a = mixed_area(&s).unwrap();
        assert_eq!(a.as_rational(), Some(Rat::from_integer(3)));
        let rays = fan_rays(&s).unwrap();
        assert_eq!(rays.len(), 6);
        assert!(!strongly_mixed(&s, &rays));
        assert!(matches!(facet_gap(&s), Err(Error::DegenerateSupport { .. })));
        let g = facet_gap_lenient(&s, &rays);
        assert_eq!(g.eta.unwrap().squared(), Rat::from_integer(1));
    }

    #[test]
    fn planar_gaps_rays_and_gaps() {
        let s = planar_gaps();
        let rays = fan_rays(&s).unwrap();
        let xs: Vec<Vec<i64>> = rays.iter().map(|r| r.xi.clone()).collect();
        assert_eq!(rays.len(), 7);
        for x in [[1, 0], [-1, 0], [0, 1], [0, -1], [-1, -1], [-1, 2], [2, -1]] {
            assert!(xs.contains(&x.to_vec()), "missing {x:?}");
        }
        let g = facet_gap(&s).unwrap();
        assert_eq!(g.eta_i[0].unwrap().squared(), Rat::new(4, 5));
        assert_eq!(g.eta_i[1].unwrap().squared(), Rat::from_integer(4));
        assert_eq!(g.eta.unwrap().squared(), Rat::new(4, 5));
    }

    #[test]
    fn dense_cubic_pair() {
        let t = pts(&[&[0, 0], &[3, 0], &[0, 3]]);
        let s = vec![t.clone(), t];
        assert_eq!(mixed_volume(&s), 9);
        let a = mixed_area(&s).unwrap();
        assert_eq!(a.coefficient(1), Rat::from_integer(6));
        assert_eq!(a.coefficient(2), Rat::from_integer(3));
        assert!((a.to_f64() - 3.0 * (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn unmixed_v_polynomial() {
        let t = pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let s = vec![t.clone(), t];
        let v = v_coefficients(&s).unwrap();
        let vp = mixed_area(&s).unwrap().to_f64();
        // v(t) = (1+2t)V' so v_0 = V', v_1 = 1!·2·V'
        assert!((v[0].to_f64() - vp).abs() < 1e-12);
        assert!((v[1].to_f64() - 2.0 * vp).abs() < 1e-12);
        assert_eq!(v[2].to_f64(), 0.0);
    }

    #[test]
    fn one_dimensional_area() {
        let s = vec![pts(&[&[0], &[2], &[5]])];
        assert_eq!(mixed_area(&s).unwrap().as_rational(), Some(Rat::from_integer(2)));
        assert_eq!(v_coefficients(&s).unwrap()[0].to_f64(), 2.0);
    }
}
