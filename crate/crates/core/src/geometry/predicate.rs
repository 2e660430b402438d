//! Floating-point orientation: `det[p2 - p1, p3 - p1, d - p1]` for a chosen
//! base point `p1`, and the three-way majority vote over the base choices.
//!
//! Evaluation order is fixed because the rounding is what is being studied:
//! with rows `u = p2 - p1`, `v = p3 - p1`, `w = d - p1`,
//!
//! ```text
//! m1 = vy*wz - vz*wy
//! m2 = vx*wz - vz*wx
//! m3 = vx*wy - vy*wx
//! det = ((ux*m1 - uy*m2) + uz*m3)
//! ```
//!
//! Every operation is a single correctly rounded IEEE 754 operation; no fused
//! multiply-add is used.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::point::{OrientationSign, Point3};

/// Which of the three spanning points serves as the base of the plane. The
/// other two follow in cyclic order, so the exact determinant is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    First,
    Second,
    Third,
}

impl Base {
    pub const ALL: [Base; 3] = [Base::First, Base::Second, Base::Third];

    /// `(p1, p2, p3)` for this base.
    pub fn rotate<T: Copy>(self, a: T, b: T, c: T) -> (T, T, T) {
        match self {
            Base::First => (a, b, c),
            Base::Second => (b, c, a),
            Base::Third => (c, a, b),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Base::First => 0,
            Base::Second => 1,
            Base::Third => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Base::First),
            2 => Some(Base::Second),
            3 => Some(Base::Third),
            _ => None,
        }
    }
}

/// IEEE 754 format used for predicate arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum FloatWidth {
    Binary32,
    Binary64,
}

impl FloatWidth {
    pub fn bits(self) -> u8 {
        match self {
            FloatWidth::Binary32 => 32,
            FloatWidth::Binary64 => 64,
        }
    }

    /// Significand precision including the hidden bit.
    pub fn precision(self) -> u32 {
        match self {
            FloatWidth::Binary32 => 24,
            FloatWidth::Binary64 => 53,
        }
    }

    pub fn exponent_bits(self) -> u32 {
        match self {
            FloatWidth::Binary32 => 8,
            FloatWidth::Binary64 => 11,
        }
    }

    /// Whether `x` is exactly representable in this format.
    pub fn represents(self, x: f64) -> bool {
        match self {
            FloatWidth::Binary32 => crate::hexfloat::is_binary32(x),
            FloatWidth::Binary64 => x.is_finite(),
        }
    }

    /// `x` moved by `steps` units in the last place of this format.
    pub fn step_ulps(self, x: f64, steps: i32) -> f64 {
        match self {
            FloatWidth::Binary64 => {
                let mut y = x;
                for _ in 0..steps.unsigned_abs() {
                    y = if steps > 0 {
                        y.next_up()
                    } else {
                        y.next_down()
                    };
                }
                y
            }
            FloatWidth::Binary32 => {
                let mut y = x as f32;
                for _ in 0..steps.unsigned_abs() {
                    y = if steps > 0 {
                        y.next_up()
                    } else {
                        y.next_down()
                    };
                }
                y as f64
            }
        }
    }
}

impl From<FloatWidth> for u8 {
    fn from(w: FloatWidth) -> u8 {
        w.bits()
    }
}

impl TryFrom<u8> for FloatWidth {
    type Error = String;

    fn try_from(bits: u8) -> Result<Self, String> {
        match bits {
            32 => Ok(FloatWidth::Binary32),
            64 => Ok(FloatWidth::Binary64),
            other => Err(format!(
                "unsupported float width {other}, expected 32 or 64"
            )),
        }
    }
}

fn determinant<T>(p1: [T; 3], p2: [T; 3], p3: [T; 3], d: [T; 3]) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let [ux, uy, uz] = [p2[0] - p1[0], p2[1] - p1[1], p2[2] - p1[2]];
    let [vx, vy, vz] = [p3[0] - p1[0], p3[1] - p1[1], p3[2] - p1[2]];
    let [wx, wy, wz] = [d[0] - p1[0], d[1] - p1[1], d[2] - p1[2]];
    let m1 = vy * wz - vz * wy;
    let m2 = vx * wz - vz * wx;
    let m3 = vx * wy - vy * wx;
    ux * m1 - uy * m2 + uz * m3
}

/// The binary64 determinant for the given base, in the documented order.
pub fn base_determinant(a: &Point3, b: &Point3, c: &Point3, d: &Point3, base: Base) -> f64 {
    let (p1, p2, p3) = base.rotate(a, b, c);
    determinant(p1.coords(), p2.coords(), p3.coords(), d.coords())
}

/// Sign of the binary64 determinant with the chosen base point.
pub fn orient_base(a: &Point3, b: &Point3, c: &Point3, d: &Point3, base: Base) -> OrientationSign {
    OrientationSign::of_f64(base_determinant(a, b, c, d, base))
}

/// [`orient_base`] at a chosen width. For binary32 each coordinate is first
/// rounded to the nearest binary32 value.
pub fn orient_base_width(
    a: &Point3,
    b: &Point3,
    c: &Point3,
    d: &Point3,
    base: Base,
    width: FloatWidth,
) -> OrientationSign {
    match width {
        FloatWidth::Binary64 => orient_base(a, b, c, d, base),
        FloatWidth::Binary32 => {
            let narrow = |p: &Point3| p.coords().map(|v| v as f32);
            let (p1, p2, p3) = base.rotate(a, b, c);
            let det = determinant(narrow(p1), narrow(p2), narrow(p3), narrow(d));
            OrientationSign::of_f64(det as f64)
        }
    }
}

/// The three per-base signs and the vote over them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityVote {
    pub sign: OrientationSign,
    pub per_base: [OrientationSign; 3],
    /// All three evaluations differed; `sign` is then `Coplanar`.
    pub tie: bool,
}

impl MajorityVote {
    pub fn from_signs(per_base: [OrientationSign; 3]) -> Self {
        let [s1, s2, s3] = per_base;
        let winner = if s1 == s2 || s1 == s3 {
            Some(s1)
        } else if s2 == s3 {
            Some(s2)
        } else {
            None
        };
        Self {
            sign: winner.unwrap_or(OrientationSign::Coplanar),
            per_base,
            tie: winner.is_none(),
        }
    }

    pub fn unanimous(&self) -> bool {
        self.per_base.iter().all(|&s| s == self.per_base[0])
    }
}

pub fn orient_majority_width(
    a: &Point3,
    b: &Point3,
    c: &Point3,
    d: &Point3,
    width: FloatWidth,
) -> MajorityVote {
    MajorityVote::from_signs(Base::ALL.map(|base| orient_base_width(a, b, c, d, base, width)))
}

/// Majority over the three binary64 base evaluations.
pub fn orient_majority(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> MajorityVote {
    orient_majority_width(a, b, c, d, FloatWidth::Binary64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use OrientationSign::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    #[test]
    fn unit_simplex() {
        let (a, b, c) = (p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.));
        for base in Base::ALL {
            assert_eq!(orient_base(&a, &b, &c, &p(0., 0., 1.), base), Above);
            assert_eq!(orient_base(&a, &b, &c, &p(0., 0., -1.), base), Below);
            assert_eq!(orient_base(&a, &b, &c, &p(0.5, 0.5, 0.), base), Coplanar);
            assert_eq!(
                orient_base_width(&a, &b, &c, &p(0., 0., 1.), base, FloatWidth::Binary32),
                Above
            );
        }
        let vote = orient_majority(&a, &b, &c, &p(0., 0., 1.));
        assert_eq!(vote.sign, Above);
        assert!(vote.unanimous() && !vote.tie);
    }

    #[test]
    fn determinant_matches_hand_expansion() {
        // rows (1,2,3), (4,5,7), (2,8,1): 1*(5-56) - 2*(4-14) + 3*(32-10) = -51 + 20 + 66 = 35
        let o = p(0., 0., 0.);
        let det = base_determinant(
            &o,
            &p(1., 2., 3.),
            &p(4., 5., 7.),
            &p(2., 8., 1.),
            Base::First,
        );
        assert_eq!(det, 35.0);
    }

    #[test]
    fn majority_rule() {
        let vote = |s| MajorityVote::from_signs(s);
        assert_eq!(vote([Above, Below, Above]).sign, Above);
        assert_eq!(vote([Below, Above, Above]).sign, Above);
        assert_eq!(vote([Coplanar, Below, Below]).sign, Below);
        let tie = vote([Above, Coplanar, Below]);
        assert!(tie.tie);
        assert_eq!(tie.sign, Coplanar);
        assert!(!vote([Below, Below, Below]).tie);
    }

    #[test]
    fn width_helpers() {
        assert_eq!(FloatWidth::Binary64.step_ulps(1.0, 1), 1.0 + f64::EPSILON);
        assert_eq!(
            FloatWidth::Binary32.step_ulps(1.0, -1),
            1.0 - f32::EPSILON as f64 / 2.0
        );
        assert_eq!(
            FloatWidth::Binary64.step_ulps(2.0, -2),
            2.0 - 2.0 * f64::EPSILON
        );
        assert_eq!(serde_json::to_string(&FloatWidth::Binary32).unwrap(), "32");
        assert!(serde_json::from_str::<FloatWidth>("16").is_err());
        assert_eq!(Base::from_number(2), Some(Base::Second));
        assert_eq!(Base::Third.rotate('a', 'b', 'c'), ('c', 'a', 'b'));
    }
}
