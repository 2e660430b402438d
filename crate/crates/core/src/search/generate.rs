//! Near-coplanar quadruples: a point placed exactly on the plane of three
//! others, then nudged a few ulps along one axis.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;

use super::{OrientSearchConfig, SearchError};
use crate::geometry::{orient_exact, FloatWidth, OrientationSign, Point3};
use crate::rational::{self, Rational};

const MAX_ATTEMPTS: u32 = 1000;
/// Spanning-point mantissas leave this many bits of headroom so that the
/// on-plane combination usually stays representable.
const HEADROOM_BITS: u32 = 12;
/// Affine weights are multiples of 1/16 in [-1, 2].
const WEIGHT_DENOM: i64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct NearCoplanar {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
    pub d: Point3,
    /// `d` before perturbation; exactly on the plane.
    pub on_plane: Point3,
    pub axis: usize,
    pub ulps: i32,
    pub exact_sign: OrientationSign,
}

/// `±m * 2^(e - bits + 1)` with an exactly `bits`-bit mantissa, so the
/// magnitude lies in `[2^e, 2^(e+1))`.
fn random_coordinate<R: Rng + ?Sized>(rng: &mut R, config: &OrientSearchConfig, bits: u32) -> f64 {
    let e = rng.gen_range(config.e_min..=config.e_max);
    let m = rng.gen_range((1u64 << (bits - 1))..(1u64 << bits));
    let value = m as f64 * 2f64.powi(e - bits as i32 + 1);
    if rng.gen::<bool>() {
        -value
    } else {
        value
    }
}

fn random_point<R: Rng + ?Sized>(rng: &mut R, config: &OrientSearchConfig, bits: u32) -> Point3 {
    let coords = [(); 3].map(|_| random_coordinate(rng, config, bits));
    Point3::from_coords(coords).expect("generated coordinates are finite")
}

/// The binary64 value equal to `r`, if there is one and the width holds it.
fn exactly_representable(r: &Rational, width: FloatWidth) -> Option<f64> {
    let x = r.to_f64()?;
    (x.is_finite() && rational::from_f64(x).as_ref() == Some(r) && width.represents(x)).then_some(x)
}

fn try_sample<R: Rng + ?Sized>(config: &OrientSearchConfig, rng: &mut R) -> Option<NearCoplanar> {
    let width = config.float_width;
    let bits = width.precision() - HEADROOM_BITS;
    let [a, b, c] = [(); 3].map(|_| random_point(rng, config, bits));

    let s = Rational::new(
        BigInt::from(rng.gen_range(-WEIGHT_DENOM..=2 * WEIGHT_DENOM)),
        BigInt::from(WEIGHT_DENOM),
    );
    let t = Rational::new(
        BigInt::from(rng.gen_range(-WEIGHT_DENOM..=2 * WEIGHT_DENOM)),
        BigInt::from(WEIGHT_DENOM),
    );
    let exact = |p: &Point3| p.coords().map(|v| rational::from_f64(v).expect("finite"));
    let (ra, rb, rc) = (exact(&a), exact(&b), exact(&c));
    let mut on_plane = [0.0; 3];
    for k in 0..3 {
        let v = &ra[k] + &s * (&rb[k] - &ra[k]) + &t * (&rc[k] - &ra[k]);
        on_plane[k] = exactly_representable(&v, width)?;
    }
    let on_plane = Point3::from_coords(on_plane).ok()?;

    let axis = rng.gen_range(0..3);
    let radius = config.ulp_radius as i32;
    let magnitude = rng.gen_range(1..=radius);
    let ulps = if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    };
    let mut coords = on_plane.coords();
    coords[axis] = width.step_ulps(coords[axis], ulps);
    if !coords.iter().all(|&v| config.in_band(v)) {
        return None;
    }
    assert_eq!(
        orient_exact(&a, &b, &c, &on_plane),
        OrientationSign::Coplanar,
        "affine combination must lie on the plane"
    );
    let d = Point3::from_coords(coords).ok()?;

    let exact_sign = orient_exact(&a, &b, &c, &d);
    (exact_sign != OrientationSign::Coplanar).then_some(NearCoplanar {
        a,
        b,
        c,
        d,
        on_plane,
        axis,
        ulps,
        exact_sign,
    })
}

/// Draws a near-coplanar quadruple. Spanning coordinates come from the
/// configured exponent band; the on-plane point is an affine combination with
/// weights in multiples of 1/16, kept only when exactly representable at the
/// configured width; one coordinate is then moved by `1..=ulp_radius` ulps.
/// Samples whose `d` leaves the exponent band are redrawn, so every
/// quadruple lies inside the space the SMT query ranges over.
/// The returned `exact_sign` is never `Coplanar`.
pub fn gen_near_coplanar<R: Rng + ?Sized>(
    config: &OrientSearchConfig,
    rng: &mut R,
) -> Result<NearCoplanar, SearchError> {
    (0..MAX_ATTEMPTS)
        .find_map(|_| try_sample(config, rng))
        .ok_or(SearchError::NoSample(MAX_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::iteration_rng;

    fn normal_z(s: &NearCoplanar) -> Rational {
        let r = |p: &Point3| p.coords().map(|v| rational::from_f64(v).unwrap());
        let (a, b, c) = (r(&s.a), r(&s.b), r(&s.c));
        let u = [&b[0] - &a[0], &b[1] - &a[1]];
        let v = [&c[0] - &a[0], &c[1] - &a[1]];
        &u[0] * &v[1] - &u[1] * &v[0]
    }

    #[test]
    fn samples_are_near_coplanar_with_verified_sign() {
        for width in [FloatWidth::Binary64, FloatWidth::Binary32] {
            let config = OrientSearchConfig {
                float_width: width,
                ..Default::default()
            };
            let mut rng = iteration_rng(11, 0);
            for _ in 0..500 {
                let s = gen_near_coplanar(&config, &mut rng).unwrap();
                assert_eq!(
                    orient_exact(&s.a, &s.b, &s.c, &s.on_plane),
                    OrientationSign::Coplanar
                );
                assert_eq!(orient_exact(&s.a, &s.b, &s.c, &s.d), s.exact_sign);
                assert_ne!(s.exact_sign, OrientationSign::Coplanar);
                assert!(s.ulps != 0 && s.ulps.unsigned_abs() <= config.ulp_radius);
                for p in [s.a, s.b, s.c, s.d] {
                    assert!(p
                        .coords()
                        .iter()
                        .all(|&v| width.represents(v) && config.in_band(v)));
                }
            }
        }
    }

    #[test]
    fn z_nudge_sign_follows_normal() {
        // det = ulps-shift * n_z when only z moves, so the sign is sign(shift) * sign(n_z).
        let config = OrientSearchConfig {
            ulp_radius: 1,
            ..Default::default()
        };
        let mut rng = iteration_rng(5, 0);
        let mut checked = 0;
        while checked < 200 {
            let s = gen_near_coplanar(&config, &mut rng).unwrap();
            if s.axis != 2 {
                continue;
            }
            let nz = normal_z(&s);
            let up = s.d.z() > s.on_plane.z();
            let expected = match (nz > Rational::from_integer(0.into()), up) {
                (true, true) | (false, false) => OrientationSign::Above,
                _ => OrientationSign::Below,
            };
            assert_eq!(s.exact_sign, expected);
            checked += 1;
        }
    }

    #[test]
    fn both_sides_occur() {
        let config = OrientSearchConfig::default();
        let mut rng = iteration_rng(3, 0);
        let (mut above, mut below) = (0, 0);
        for _ in 0..10_000 {
            match gen_near_coplanar(&config, &mut rng).unwrap().exact_sign {
                OrientationSign::Above => above += 1,
                OrientationSign::Below => below += 1,
                OrientationSign::Coplanar => unreachable!(),
            }
        }
        assert!(above > 1000 && below > 1000, "above {above}, below {below}");
    }
}
