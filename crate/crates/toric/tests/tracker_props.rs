mod common;

use proptest::prelude::*;
use toric::condition::{certify, refine, ALPHA_STAR, DELTA_STAR};
use toric::oracle::oracle_roots;
use toric::tracker::{condition_length, track, LinearSegment, PathTrace, TrackerConfig};
use toric::{ExpSumSystem, C64};

fn pair(n: usize) -> impl Strategy<Value = (ExpSumSystem, ExpSumSystem)> {
    (common::solvable_supports(n, 4, 3), any::<u64>()).prop_map(|(p, s)| {
        (common::system(p.clone(), s), common::system(p, s.wrapping_add(1)))
    })
}

fn traces(g: &ExpSumSystem, f: &ExpSumSystem) -> Vec<PathTrace> {
    let starts = match oracle_roots(g) {
        Ok(o) => o.roots,
        Err(_) => return vec![],
    };
    let path = LinearSegment::to_infinity(g.clone(), f.clone());
    let cfg = TrackerConfig { max_steps: 20_000, ..TrackerConfig::default() };
    starts.iter().map(|x| track(&path, x, &cfg)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mesh_points_stay_certified((g, f) in pair(1)) {
        let path = LinearSegment::to_infinity(g.clone(), f.clone());
        for tr in traces(&g, &f).iter().filter(|t| t.succeeded()) {
            for m in &tr.mesh {
                let q = toric::tracker::Homotopy::at(&path, m.t);
                let c = certify(&q, &m.x, ALPHA_STAR);
                prop_assert!(c.alpha_hat <= ALPHA_STAR * (1.0 + 1e-6), "t={} alpha={}", m.t, c.alpha_hat);
            }
        }
    }

    #[test]
    fn step_count_within_condition_length((g, f) in pair(1)) {
        for tr in traces(&g, &f).iter().filter(|t| t.succeeded()) {
            prop_assert!(tr.steps as f64 <= 1.0 + 1.1 * tr.l_hat / DELTA_STAR, "N={} L={}", tr.steps, tr.l_hat);
            prop_assert!(tr.l_hat >= 0.0 && tr.l1_hat >= 0.0 && tr.l2_hat >= 0.0);
        }
    }

    #[test]
    fn interior_steps_have_nontrivial_length((g, f) in pair(1)) {
        let path = LinearSegment::to_infinity(g.clone(), f.clone());
        for tr in traces(&g, &f).iter().filter(|t| t.succeeded()) {
            let k = tr.mesh.len();
            for w in tr.mesh.windows(2).take(k.saturating_sub(2)) {
                let (l, _, _) = condition_length(&path, w, 8);
                prop_assert!(l >= 0.8 * DELTA_STAR, "window length {}", l);
            }
        }
    }

    #[test]
    fn distinct_starts_give_distinct_ends((g, f) in pair(2)) {
        let lat = g.supports.lattice().clone();
        let ends: Vec<Vec<C64>> = traces(&g, &f).into_iter().filter_map(|t| t.end_point).collect();
        for (a, x) in ends.iter().enumerate() {
            for y in &ends[a + 1..] {
                prop_assert!(lat.torus_distance(x, y) > 1e-6);
            }
        }
    }

    #[test]
    fn tracking_is_reversible((g, f) in pair(1)) {
        let lat = g.supports.lattice().clone();
        let starts = oracle_roots(&g).map(|o| o.roots).unwrap_or_default();
        let cfg = TrackerConfig { max_steps: 20_000, ..TrackerConfig::default() };
        let fwd = LinearSegment::to_infinity(g.clone(), f.clone());
        let back = LinearSegment::to_infinity(f.clone(), g.clone());
        for x in starts {
            let t = track(&fwd, &x, &cfg);
            let Some(y) = t.end_point.as_ref().filter(|_| t.succeeded()) else { continue };
            let y = refine(&f, y, 1e-15).unwrap();
            let r = track(&back, &y, &cfg);
            if let Some(z) = r.end_point.as_ref().filter(|_| r.succeeded()) {
                let z = refine(&g, z, 1e-15).unwrap();
                let d = lat.reduce_difference(&z, &x);
                prop_assert!(d.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() < 1e-8, "{:?}", d);
            }
        }
    }

    #[test]
    fn tracked_roots_match_the_oracle((g, f) in pair(1)) {
        let lat = g.supports.lattice().clone();
        let Ok(want) = oracle_roots(&f) else { return Ok(()) };
        for t in traces(&g, &f).iter().filter(|t| t.succeeded()) {
            let y = refine(&f, t.end_point.as_ref().unwrap(), 1e-15).unwrap();
            let best = want.roots.iter().map(|w| lat.torus_distance(w, &y)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "nearest oracle root at {}", best);
        }
    }
}
