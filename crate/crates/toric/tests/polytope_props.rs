mod common;

use proptest::prelude::*;
use toric::polytope::{self, fan_rays, facet_gap_lenient, mixed_area, mixed_volume, Point};
use toric::SupportTuple;

fn minkowski(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = a.iter().flat_map(|p| b.iter().map(move |q| p.iter().zip(q).map(|(x, y)| x + y).collect())).collect();
    out.sort();
    out.dedup();
    out
}

fn shift(a: &[Point], v: &[i64]) -> Vec<Point> {
    a.iter().map(|p| p.iter().zip(v).map(|(x, y)| x + y).collect()).collect()
}

fn planar(max_pts: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(0i64..=4, 2), 1..=max_pts).prop_map(|mut v| {
        v.sort();
        v.dedup();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixed_volume_is_multilinear(s in common::point_sets(2, 4, 3), extra2 in planar(4)) {
        let sum = minkowski(&s[0], &extra2);
        let lhs = mixed_volume(&[sum, s[1].clone()]);
        let rhs = mixed_volume(&s) + mixed_volume(&[extra2, s[1].clone()]);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_volume_is_symmetric(s in common::point_sets(3, 4, 2)) {
        let base = mixed_volume(&s);
        prop_assert_eq!(base, mixed_volume(&[s[1].clone(), s[0].clone(), s[2].clone()]));
        prop_assert_eq!(base, mixed_volume(&[s[2].clone(), s[1].clone(), s[0].clone()]));
    }

    #[test]
    fn mixed_volume_is_monotone(s in common::point_sets(2, 4, 3), p in prop::collection::vec(0i64..=4, 2)) {
        let mut bigger = s.clone();
        bigger[0].push(p);
        prop_assert!(mixed_volume(&s) <= mixed_volume(&bigger));
    }

    #[test]
    fn invariants_are_translation_invariant(s in common::solvable_supports(2, 4, 3), v in prop::collection::vec(-3i64..=3, 2)) {
        let t = vec![shift(&s[0], &v), s[1].clone()];
        prop_assert_eq!(mixed_volume(&s), mixed_volume(&t));
        prop_assert_eq!(mixed_area(&s).unwrap(), mixed_area(&t).unwrap());
        let (ra, rb) = (fan_rays(&s).unwrap(), fan_rays(&t).unwrap());
        let (ga, gb) = (facet_gap_lenient(&s, &ra), facet_gap_lenient(&t, &rb));
        prop_assert_eq!(ga.eta.map(|g| g.squared()), gb.eta.map(|g| g.squared()));
    }

    #[test]
    fn eta_at_most_twice_delta(s in common::solvable_supports(2, 5, 3)) {
        let st = SupportTuple::unweighted(s.clone()).unwrap();
        let rays = fan_rays(&s).unwrap();
        if let Some(eta) = facet_gap_lenient(&s, &rays).eta {
            for i in 0..2 {
                prop_assert!(eta.value() <= 2.0 * st.radius_delta0(i) + 1e-12);
            }
        }
    }

    #[test]
    fn isoperimetric_inequality(a in planar(6)) {
        let s = vec![a.clone(), a];
        let nv = mixed_volume(&s) as f64;
        prop_assume!(nv > 0.0);
        let area = nv / 2.0;
        let perimeter = mixed_area(&s).unwrap().to_f64();
        prop_assert!(perimeter + 1e-12 >= 2.0 * (std::f64::consts::PI * area).sqrt());
    }

    #[test]
    fn bkk_count_divides_exactly(s in common::solvable_supports(2, 4, 4)) {
        let det = toric::lattice::lattice_from_points(&s, 2).unwrap().det() as i128;
        prop_assert_eq!(mixed_volume(&s) % det, 0);
        prop_assert_eq!(polytope::bkk_count(&s).unwrap() as i128 * det, mixed_volume(&s));
    }
}
