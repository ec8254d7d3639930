mod common;

use proptest::prelude::*;
use toric::expsum::{multiproj_distance, projective_sine};
use toric::{ExpSumSystem, C64};

/// `Σ f_a ρ_a e^{b·z}` for each equation, without any scaling.
fn raw_values(f: &ExpSumSystem, z: &[C64]) -> Vec<C64> {
    let st = &f.supports;
    f.evaluate(z)
        .into_iter()
        .enumerate()
        .map(|(i, v)| v * (st.ell(i, z) + f.log_scale[i]).exp())
        .collect()
}

fn gram_form(f: &ExpSumSystem, u: &[C64]) -> f64 {
    let n = f.n();
    let g = f.supports.gram(&vec![C64::new(0.0, 0.0); n]);
    let mut s = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            s += u[r].conj() * g[(r, c)] * u[c];
        }
    }
    s.re.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalization_is_projective(
        f in common::systems(2, 5, 3),
        z in common::torus_point(2, 1.5),
        lam in prop::collection::vec(0.01f64..100.0, 2),
    ) {
        let scaled = f.scaled(&[C64::new(lam[0], 0.0), C64::new(lam[1], 0.0)]);
        let (a, b) = (f.normalized().unwrap(), scaled.normalized().unwrap());
        for (x, y) in a.coeffs.iter().flatten().zip(b.coeffs.iter().flatten()) {
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
        for (x, y) in a.evaluate(&z).iter().zip(b.evaluate(&z)) {
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
        prop_assert!(multiproj_distance(&f, &scaled).unwrap() < 1e-7);
    }

    #[test]
    fn renormalization_is_covariant(
        f in common::systems(2, 5, 3),
        z in common::torus_point(2, 1.0),
        u in common::torus_point(2, 1.0),
    ) {
        let g = f.renormalize(&u);
        let zu: Vec<C64> = z.iter().zip(&u).map(|(a, b)| a - b).collect();
        for (x, y) in raw_values(&f, &z).iter().zip(raw_values(&g, &zu)) {
            prop_assert!((x - y).norm() <= 1e-11 * x.norm().max(1e-3), "{} vs {}", x, y);
        }
    }

    #[test]
    fn toric_norm_at_zero_is_gram_form(f in common::systems(2, 5, 3), u in common::torus_point(2, 2.0)) {
        let a = f.supports.norm0(&u);
        let b = gram_form(&f, &u);
        prop_assert!(common::rel_close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn imaginary_shift_is_an_isometry(
        f in common::systems(2, 5, 3),
        z in common::torus_point(2, 1.5),
        u in common::torus_point(2, 2.0),
        y in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        let w: Vec<C64> = z.iter().zip(&y).map(|(a, b)| a - C64::new(0.0, *b)).collect();
        let (pa, a) = f.supports.toric_norm(&z, &u);
        let (pb, b) = f.supports.toric_norm(&w, &u);
        prop_assert!(common::rel_close(a, b, 1e-12));
        for (x, y) in pa.iter().zip(&pb) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
        }
    }

    #[test]
    fn renormalization_distance_bound(f in common::systems(2, 5, 3), dir in common::torus_point(2, 1.0), r in 0.0f64..=0.3) {
        let nrm = f.supports.norm0(&dir);
        prop_assume!(nrm > 1e-9);
        let x: Vec<C64> = dir.iter().map(|c| c * (r / nrm)).collect();
        let nu = f.supports.nu0().unwrap();
        let d = multiproj_distance(&f, &f.renormalize(&x)).unwrap();
        prop_assert!(d <= 5f64.sqrt() * r * nu + 1e-12, "{} > {}", d, 5f64.sqrt() * r * nu);
    }

    #[test]
    fn imaginary_renormalization_keeps_coefficient_norms(f in common::systems(2, 5, 3), y in prop::collection::vec(-6.0f64..6.0, 2)) {
        let u: Vec<C64> = y.iter().map(|&v| C64::new(0.0, v)).collect();
        let g = f.renormalize(&u);
        for (a, b) in f.norms().iter().zip(g.norms()) {
            prop_assert!(common::rel_close(*a, b, 1e-12));
        }
        prop_assert!(g.log_scale.iter().all(|s| s.abs() < 1e-15));
    }

    #[test]
    fn projective_sine_is_bounded(a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3), b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
        let a: Vec<C64> = a.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        let b: Vec<C64> = b.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        prop_assume!(a.iter().any(|c| c.norm() > 1e-6) && b.iter().any(|c| c.norm() > 1e-6));
        let s = projective_sine(&a, &b);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&s));
        prop_assert!((s - projective_sine(&b, &a)).abs() < 1e-12);
    }
}
