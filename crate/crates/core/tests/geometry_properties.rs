use numguard_core::geometry::{
    incremental_hull, orient_base, orient_exact, orient_majority, validate_hull, Base, HullOutcome,
    HullPredicate, OrientationSign, Point3,
};
use numguard_core::oracle::orient_rational;
use proptest::prelude::*;

fn small_int_point() -> impl Strategy<Value = Point3> {
    (-64i32..64, -64i32..64, -64i32..64)
        .prop_map(|(x, y, z)| Point3::new(x as f64, y as f64, z as f64).unwrap())
}

/// Any finite binary64 with a moderate exponent, so that scaled copies stay finite.
fn coordinate() -> impl Strategy<Value = f64> {
    (any::<bool>(), 0u64..(1 << 52), -60i32..60, 0u8..8).prop_map(|(neg, m, e, zero)| {
        if zero == 0 {
            return 0.0;
        }
        let v = (1.0 + m as f64 / (1u64 << 52) as f64) * 2f64.powi(e);
        if neg {
            -v
        } else {
            v
        }
    })
}

fn point() -> impl Strategy<Value = Point3> {
    (coordinate(), coordinate(), coordinate()).prop_map(|(x, y, z)| Point3::new(x, y, z).unwrap())
}

fn scale(p: &Point3, k: f64) -> Point3 {
    Point3::from_coords(p.coords().map(|v| v * k)).unwrap()
}

proptest! {
    #[test]
    fn exact_matches_oracle(a in point(), b in point(), c in point(), d in point()) {
        prop_assert_eq!(orient_exact(&a, &b, &c, &d), orient_rational(&a, &b, &c, &d));
    }

    #[test]
    fn exact_symmetries(a in point(), b in point(), c in point(), d in point()) {
        let s = orient_exact(&a, &b, &c, &d);
        // Even permutations of the four points keep the sign; odd ones flip it.
        prop_assert_eq!(orient_exact(&b, &c, &a, &d), s);
        prop_assert_eq!(orient_exact(&b, &a, &c, &d), s.reversed());
        prop_assert_eq!(orient_exact(&a, &b, &d, &c), s.reversed());
        // Power-of-two scaling is exact.
        prop_assert_eq!(orient_exact(&scale(&a, 0.5), &scale(&b, 0.5), &scale(&c, 0.5), &scale(&d, 0.5)), s);
        prop_assert_eq!(orient_exact(&scale(&a, -4.0), &scale(&b, -4.0), &scale(&c, -4.0), &scale(&d, -4.0)), s.reversed());
    }

    #[test]
    fn float_exact_on_small_integers(a in small_int_point(), b in small_int_point(), c in small_int_point(), d in small_int_point()) {
        let exact = orient_exact(&a, &b, &c, &d);
        for base in Base::ALL {
            prop_assert_eq!(orient_base(&a, &b, &c, &d, base), exact);
        }
        let vote = orient_majority(&a, &b, &c, &d);
        prop_assert!(vote.unanimous());
        prop_assert_eq!(vote.sign, exact);
    }

    #[test]
    fn majority_agrees_with_two_bases(a in point(), b in point(), c in point(), d in point()) {
        let vote = orient_majority(&a, &b, &c, &d);
        let agreeing = vote.per_base.iter().filter(|&&s| s == vote.sign).count();
        if vote.tie {
            prop_assert_eq!(vote.sign, OrientationSign::Coplanar);
        } else {
            prop_assert!(agreeing >= 2);
        }
    }

    #[test]
    fn exact_hull_is_valid(points in prop::collection::vec(small_int_point(), 4..40)) {
        match incremental_hull(&points, HullPredicate::Exact) {
            Ok(HullOutcome::Built(hull)) => {
                let report = validate_hull(&points, &hull);
                prop_assert!(report.valid, "{report:?}");
            }
            Ok(HullOutcome::Failed(f)) => prop_assert!(false, "exact hull failed: {f:?}"),
            // Collinear or coplanar draws.
            Err(_) => {}
        }
    }
}
