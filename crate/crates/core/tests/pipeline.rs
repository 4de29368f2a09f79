use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use planenorm::construct::{
    build_counterexample, default_lambdas, p2_failure_family, Case, Subcase, DEFAULT_TOL,
};
use planenorm::operators::operator_norm;
use planenorm::Norm2;

fn pairs() -> Vec<(Norm2, Norm2)> {
    let hex = Norm2::regular_polygon(6, 1.0, 0.0).unwrap();
    let gon16 = Norm2::random_polygon(&mut ChaCha8Rng::seed_from_u64(16), 8, 0.08);
    vec![
        (Norm2::l2(), Norm2::linf()),
        (Norm2::l2(), hex.clone()),
        (Norm2::linf(), Norm2::linf()),
        (Norm2::l1(), Norm2::linf()),
        (Norm2::lp(1.5).unwrap(), hex),
        (gon16, Norm2::l1()),
    ]
}

#[test]
fn seeds_and_families_satisfy_the_construction_invariants() {
    for (x, y) in pairs() {
        let name = format!("{} -> {}", x.label(), y.label());
        let seed = build_counterexample(&x, &y).unwrap();
        let t = &seed.t;
        // T(B_X) ⊆ B_Y on boundary images.
        for k in 0..4096 {
            let v = t.sphere_image_norm(2.0 * PI * k as f64 / 4096.0);
            assert!(v <= 1.0 + 1e-9, "{name}: {v}");
        }
        assert!((operator_norm(t).0 - 1.0).abs() <= 1e-6, "{name}");
        assert!((y.eval(t.apply(seed.x0)) - 1.0).abs() <= 1e-9, "{name}");
        match seed.trace.case {
            Case::Hilbert => assert!(x.is_ellipse(), "{name}"),
            Case::NonHilbert => {
                seed.trace.validate(&x, &y).unwrap();
                if seed.trace.subcase == Subcase::ALessB {
                    let l = seed.trace.lambda0.unwrap();
                    assert!(l > 0.0 && l < 1.0, "{name}: lambda0 {l}");
                }
            }
        }

        let cert = p2_failure_family(&seed, &default_lambdas(), DEFAULT_TOL).unwrap();
        assert!(cert.verified, "{name}");
        assert!(cert.values.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{name}");
        for (k, rep) in cert.attaining.iter().enumerate() {
            assert!(rep.in_faces, "{name}: lambda index {k}");
            assert!(rep.min_dist > cert.delta, "{name}");
            let op = cert.operator(k);
            for arc in &rep.arcs {
                for j in 0..=8 {
                    let th = arc.lo + arc.width() * j as f64 / 8.0;
                    assert!(op.sphere_image_norm(th) >= 1.0 - 2.0 * cert.tol);
                }
            }
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    for (x, y) in pairs().into_iter().skip(2).take(2) {
        let run = || {
            let seed = build_counterexample(&x, &y).unwrap();
            let cert = p2_failure_family(&seed, &default_lambdas(), DEFAULT_TOL).unwrap();
            serde_json::to_string(&cert).unwrap()
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn euclidean_and_square_domains_take_different_cases() {
    // A Euclidean domain goes through the John ellipse; a square domain
    // through the convexity gap, and both produce seeds into the disk.
    let a = build_counterexample(&Norm2::l2(), &Norm2::l2());
    let b = build_counterexample(&Norm2::linf(), &Norm2::l2());
    assert!(a.is_ok() && b.is_ok());
    assert_eq!(a.unwrap().trace.case, Case::Hilbert);
    assert_eq!(b.unwrap().trace.case, Case::NonHilbert);
}
