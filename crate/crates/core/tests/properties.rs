use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use planenorm::convexity::{delta, find_gap, hilbert_modulus, modulus_of_convexity, profile};
use planenorm::ellipsoid::john_ellipse;
use planenorm::operators::{adjoint, attaining_set, check_face_interval, face, operator_norm, Operator2};
use planenorm::quotient::{quotient_norm, NormN};
use planenorm::{Mat2, Norm2, Vec2};

fn random_norm(kind: u8, seed: u64) -> Norm2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind % 4 {
        0 => {
            let half = rng.gen_range(2..9);
            Norm2::random_polygon(&mut rng, half, 0.15)
        }
        1 => Norm2::random_ellipse(&mut rng, 0.3, 3.0),
        2 => Norm2::lp(rng.gen_range(1.0..6.0)).unwrap(),
        _ => Norm2::regular_polygon(2 * rng.gen_range(2..7), rng.gen_range(0.5..2.0), rng.gen_range(0.0..PI))
            .unwrap(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let m = Mat2::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        if m.det().abs() > 0.05 {
            return m;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_curve_is_odd_and_on_the_sphere(kind in 0u8..4, seed in 0u64..10_000) {
        let n = random_norm(kind, seed);
        for k in 0..4096 {
            let th = 2.0 * PI * k as f64 / 4096.0;
            let p = n.sphere_point(th);
            prop_assert!((n.eval(p) - 1.0).abs() <= 1e-9);
            let q = n.sphere_point(th + PI);
            prop_assert!((p + q).euclid() <= 1e-12);
        }
    }

    #[test]
    fn day_bound_holds(kind in 0u8..4, seed in 0u64..10_000, eps in 0.2f64..1.9) {
        let n = random_norm(kind, seed);
        let m = modulus_of_convexity(&n, eps).unwrap();
        prop_assert!(m <= hilbert_modulus(eps) + 1e-9);
        if n.is_ellipse() {
            prop_assert!((m - hilbert_modulus(eps)).abs() <= 1e-7);
        }
        // The modulus is the least value of the profile, up to refinement.
        let prof = profile(&n, eps, 256).unwrap();
        let grid_min = prof.samples.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min);
        prop_assert!(m <= grid_min + 1e-12);
        prop_assert!(grid_min - m <= 1e-2 * eps);
    }

    #[test]
    fn operator_norm_axioms(kind_x in 0u8..4, kind_y in 0u8..4, seed in 0u64..10_000, alpha in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_norm(kind_x, seed), random_norm(kind_y, seed + 1));
        let t = Operator2::new(random_matrix(&mut rng), x.clone(), y.clone()).unwrap();
        let n = operator_norm(&t).0;
        let scaled = Operator2::new(t.matrix.scale(alpha), x.clone(), y.clone()).unwrap();
        prop_assert!((operator_norm(&scaled).0 - alpha.abs() * n).abs() <= 1e-12 * (1.0 + n));
        let p = Operator2::new(random_matrix(&mut rng), y.clone(), y.clone()).unwrap();
        let pt = p.compose(&t);
        prop_assert!(operator_norm(&pt).0 <= operator_norm(&p).0 * n + 1e-9);
        let back = adjoint(&adjoint(&t));
        prop_assert_eq!(back.matrix, t.matrix);
        prop_assert!((operator_norm(&adjoint(&t)).0 - n).abs() <= 1e-8 * n);
    }

    #[test]
    fn attaining_arcs_and_faces(kind_x in 0u8..4, kind_y in 0u8..4, seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_norm(kind_x, seed), random_norm(kind_y, seed + 7));
        let t = Operator2::new(random_matrix(&mut rng), x.clone(), y.clone()).unwrap();
        let t = t.scaled(1.0 / operator_norm(&t).0);
        let tol = 1e-9;
        for arc in attaining_set(&t, tol).unwrap() {
            for k in 0..=16 {
                let th = arc.lo + arc.width() * k as f64 / 16.0;
                prop_assert!(t.sphere_image_norm(th) >= 1.0 - 2.0 * tol);
            }
        }
        let f = y.supporting_functional(y.sphere_point(rng.gen_range(0.0..2.0 * PI))).unwrap();
        let arc = face(&y, f).unwrap();
        prop_assert!(check_face_interval(&y, f, arc.lo, arc.hi).unwrap());
    }

    #[test]
    fn john_ellipse_is_inscribed_and_equivariant(seed in 0u64..10_000, s in prop::sample::select(vec![2.0, 0.5])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = rng.gen_range(2..8);
        let body = Norm2::random_polygon(&mut rng, half, 0.2);
        let j = john_ellipse(&body).unwrap();
        prop_assert!(j.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        for k in 0..720 {
            let p = j.a.apply(Vec2::unit(k as f64 * PI / 360.0));
            prop_assert!(body.eval(p) <= 1.0 + 1e-9);
        }
        let Norm2::Polygon(poly) = &body else { unreachable!() };
        let scaled: Vec<Vec2> = poly.vertices().iter().map(|v| *v * s).collect();
        let js = john_ellipse(&Norm2::polygon(&scaled).unwrap()).unwrap();
        prop_assert!((js.det - s * s * j.det).abs() <= 1e-8 * s * s);
        for k in 0..90 {
            let u = Vec2::unit(k as f64 * PI / 45.0);
            // Compare boundary sets through the ellipse norms.
            let g = |a: &Mat2, v: Vec2| a.inverse().unwrap().apply(v).euclid();
            prop_assert!((g(&js.a, j.a.apply(u) * s) - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn quotient_below_representatives(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ambient = NormN::lp(3, rng.gen_range(1.2..5.0)).unwrap();
        let z: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assume!(z.iter().map(|v| v * v).sum::<f64>() > 0.05);
        let q = quotient_norm(&ambient, &[z]).unwrap();
        prop_assert!(q.error_bound < 1e-3);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = q.q_map(&x);
            prop_assert!(q.exact_eval(v) <= ambient.eval(&x) + 1e-10);
        }
    }
}

#[test]
fn gap_inequalities_rechecked_from_scratch() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let norms = [
        Norm2::l1(),
        Norm2::lp(1.5).unwrap(),
        Norm2::lp(3.0).unwrap(),
        Norm2::linf(),
        Norm2::random_polygon(&mut rng, 8, 0.08),
    ];
    for n in &norms {
        let g = find_gap(n).unwrap();
        let e = g.epsilon;
        let h = 1.0 - e * e / 4.0;
        assert!((n.eval(g.x1) - 1.0).abs() <= 1e-12 && (n.eval(g.x2) - 1.0).abs() <= 1e-12);
        assert!(n.eval(g.x1 - g.x2) < e);
        assert!(n.eval(g.x1 + g.x2) < (4.0 - e * e).sqrt());
        let below = 1.0 - delta(n, e, g.theta_below);
        let above = 1.0 - delta(n, e, g.theta_above);
        assert!(below * below < h, "{}", n.label());
        assert!(above * above > h, "{}", n.label());
    }
}
