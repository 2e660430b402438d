//! Exact orientation. Every finite binary64 value is `m * 2^k` with integer `m`
//! and `k`; after scaling all coordinates by the smallest `2^-k` present, the
//! determinant is an integer polynomial and its sign is evaluated over
//! arbitrary-precision integers.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::point::{OrientationSign, Point3};

/// `(signed mantissa, exponent)` with `x = mantissa * 2^exponent`.
fn decompose(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as i64;
    let (mantissa, exponent) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), biased - 1075)
    };
    if bits >> 63 == 1 {
        (-mantissa, exponent)
    } else {
        (mantissa, exponent)
    }
}

/// All coordinates as integers sharing one power-of-two scale.
fn scaled<const N: usize>(points: [&Point3; N]) -> [[BigInt; 3]; N] {
    let parts = points.map(|p| p.coords().map(decompose));
    let min_exp = parts
        .iter()
        .flatten()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    parts.map(|coords| {
        coords.map(|(m, e)| {
            if m == 0 {
                BigInt::zero()
            } else {
                BigInt::from(m) << (e - min_exp) as usize
            }
        })
    })
}

fn sub(p: &[BigInt; 3], q: &[BigInt; 3]) -> [BigInt; 3] {
    [&p[0] - &q[0], &p[1] - &q[1], &p[2] - &q[2]]
}

fn cross(u: &[BigInt; 3], v: &[BigInt; 3]) -> [BigInt; 3] {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn sign_of(value: &BigInt) -> OrientationSign {
    if value.is_positive() {
        OrientationSign::Above
    } else if value.is_negative() {
        OrientationSign::Below
    } else {
        OrientationSign::Coplanar
    }
}

/// True sign of `det[b - a, c - a, d - a]`, treating each coordinate as the
/// exact rational it denotes.
pub fn orient_exact(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> OrientationSign {
    let [a, b, c, d] = scaled([a, b, c, d]);
    let u = sub(&b, &a);
    let v = sub(&c, &a);
    let w = sub(&d, &a);
    let n = cross(&v, &w);
    let det = &u[0] * &n[0] + &u[1] * &n[1] + &u[2] * &n[2];
    sign_of(&det)
}

/// Whether `a`, `b`, `c` lie on one line (including coincident points),
/// decided exactly.
pub fn collinear_exact(a: &Point3, b: &Point3, c: &Point3) -> bool {
    let [a, b, c] = scaled([a, b, c]);
    cross(&sub(&b, &a), &sub(&c, &a)).iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use OrientationSign::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    #[test]
    fn decompose_is_exact() {
        for x in [
            0.1,
            -3.5,
            f64::MIN_POSITIVE,
            f64::from_bits(1),
            f64::MAX,
            -0.0,
            1.0,
        ] {
            let (m, e) = decompose(x);
            assert_eq!(m as f64 * 2f64.powi(e), x, "{x}");
        }
    }

    #[test]
    fn simple_cases() {
        let (a, b, c) = (p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.));
        assert_eq!(orient_exact(&a, &b, &c, &p(0., 0., 1.)), Above);
        assert_eq!(orient_exact(&a, &b, &c, &p(0., 0., -1e-300)), Below);
        assert_eq!(orient_exact(&a, &b, &c, &a), Coplanar);
        assert_eq!(
            orient_exact(
                &p(3., 1., 4.),
                &p(1., 5., 9.),
                &p(2., 6., 5.),
                &p(3., 1., 4.)
            ),
            Coplanar
        );
    }

    #[test]
    fn sees_below_binary64_resolution() {
        // d sits one ulp above the plane z = 1 spanned far from the origin.
        let (a, b, c) = (p(1e16, 0., 1.), p(1e16 + 2., 0., 1.), p(1e16, 2., 1.));
        let d = p(0.5, 0.25, 1.0f64.next_up());
        assert_eq!(orient_exact(&a, &b, &c, &d), Above);
        let d = p(0.5, 0.25, 1.0f64.next_down());
        assert_eq!(orient_exact(&a, &b, &c, &d), Below);
    }

    #[test]
    fn subnormal_and_huge_mix() {
        let tiny = f64::from_bits(1);
        let (a, b, c) = (p(0., 0., 0.), p(f64::MAX, 0., 0.), p(0., 1., 0.));
        assert_eq!(orient_exact(&a, &b, &c, &p(0., 0., tiny)), Above);
        assert_eq!(orient_exact(&a, &b, &c, &p(5., 7., 0.)), Coplanar);
    }

    #[test]
    fn collinearity() {
        assert!(collinear_exact(
            &p(0., 0., 0.),
            &p(1., 1., 1.),
            &p(-2., -2., -2.)
        ));
        assert!(collinear_exact(
            &p(1., 2., 3.),
            &p(1., 2., 3.),
            &p(4., 5., 6.)
        ));
        assert!(!collinear_exact(
            &p(0., 0., 0.),
            &p(1., 1., 1.),
            &p(1., 1., 1f64.next_up())
        ));
    }
}
