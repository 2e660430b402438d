//! Independent exact oracles for differential tests. Deliberately written
//! differently from the library paths they check: rationals instead of scaled
//! integers, and the rule of Sarrus instead of a cofactor expansion.

use num_traits::{Signed, Zero};

use crate::geometry::{OrientationSign, Point3};
use crate::rational::{self, Rational};

fn exact(p: &Point3) -> [Rational; 3] {
    p.coords()
        .map(|v| rational::from_f64(v).expect("points are finite"))
}

/// Sign of `det[b - a, c - a, d - a]` over rationals.
pub fn orient_rational(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> OrientationSign {
    let [a, b, c, d] = [a, b, c, d].map(exact);
    let row =
        |p: &[Rational; 3]| -> [Rational; 3] { [&p[0] - &a[0], &p[1] - &a[1], &p[2] - &a[2]] };
    let (r0, r1, r2) = (row(&b), row(&c), row(&d));
    let plus = &r0[0] * &r1[1] * &r2[2] + &r0[1] * &r1[2] * &r2[0] + &r0[2] * &r1[0] * &r2[1];
    let minus = &r0[2] * &r1[1] * &r2[0] + &r0[0] * &r1[2] * &r2[1] + &r0[1] * &r1[0] * &r2[2];
    let det = plus - minus;
    if det.is_zero() {
        OrientationSign::Coplanar
    } else if det.is_positive() {
        OrientationSign::Above
    } else {
        OrientationSign::Below
    }
}
