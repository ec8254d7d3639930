mod common;

use proptest::prelude::*;
use toric::oracle::oracle_roots;
use toric::solver::{solve, SolveConfig};
use toric::C64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn root_count_is_bkk(f in common::systems(2, 4, 3), seed in any::<u64>()) {
        let out = solve(&f, &SolveConfig { seed, ..SolveConfig::default() }).unwrap();
        prop_assert_eq!(out.solution.roots.len() as i64, out.solution.expected_count);
        prop_assert!(out.solution.roots.iter().all(|r| r.certificate.passed));
        let oracle = oracle_roots(&f).unwrap();
        prop_assert!(oracle.roots.len() as i64 <= out.solution.expected_count);
    }

    #[test]
    fn equation_scaling_does_not_move_roots(f in common::systems(1, 5, 4), lam in (0.01f64..100.0, -3.0f64..3.0)) {
        let g = f.scaled(&[C64::from_polar(lam.0, lam.1)]);
        let cfg = SolveConfig::default();
        let a = solve(&f, &cfg).unwrap().solution.roots;
        let b = solve(&g, &cfg).unwrap().solution.roots;
        prop_assert_eq!(a.len(), b.len());
        let lat = f.supports.lattice();
        for r in &a {
            let best = b.iter().map(|s| lat.torus_distance(&r.point, &s.point)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_answer(f in common::systems(2, 4, 2), seed in any::<u64>()) {
        let cfg = SolveConfig { seed, ..SolveConfig::default() };
        let a = solve(&f, &cfg).unwrap();
        let b = solve(&f, &SolveConfig { threads: 2, ..cfg }).unwrap();
        let pa: Vec<_> = a.solution.roots.iter().map(|r| r.point.clone()).collect();
        let pb: Vec<_> = b.solution.roots.iter().map(|r| r.point.clone()).collect();
        prop_assert_eq!(pa, pb);
        prop_assert_eq!(a.stats.newton_steps, b.stats.newton_steps);
    }
}
