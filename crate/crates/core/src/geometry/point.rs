use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::hexfloat::{self, FloatLiteralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error("coordinate {0} is not finite")]
    NonFinite(f64),
    #[error("line {line}: expected 3 comma-separated coordinates, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    Literal {
        line: usize,
        #[source]
        source: FloatLiteralError,
    },
}

/// A point with finite binary64 coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    x: f64,
    y: f64,
    z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, PointError> {
        for v in [x, y, z] {
            if !v.is_finite() {
                return Err(PointError::NonFinite(v));
            }
        }
        Ok(Self { x, y, z })
    }

    pub fn from_coords(coords: [f64; 3]) -> Result<Self, PointError> {
        Self::new(coords[0], coords[1], coords[2])
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Coordinates as hex-float literals.
    pub fn to_hex(&self) -> [String; 3] {
        self.coords().map(hexfloat::format_f64)
    }

    /// Parses `x, y, z` where each field is a decimal or hex-float literal.
    pub fn parse(line: &str) -> Result<Self, PointError> {
        parse_line(line, 1)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.to_hex();
        write!(f, "{x}, {y}, {z}")
    }
}

fn parse_line(line: &str, number: usize) -> Result<Point3, PointError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 3 {
        return Err(PointError::FieldCount {
            line: number,
            found: fields.len(),
        });
    }
    let mut coords = [0.0; 3];
    for (slot, field) in coords.iter_mut().zip(&fields) {
        *slot = hexfloat::parse_f64(field).map_err(|source| PointError::Literal {
            line: number,
            source,
        })?;
    }
    Point3::from_coords(coords)
}

/// Parses a point file: one point per line, blank lines and `#` comments
/// ignored.
pub fn parse_points(text: &str) -> Result<Vec<Point3>, PointError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

impl Serialize for Point3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_hex().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let fields = <[String; 3]>::deserialize(deserializer)?;
        let mut coords = [0.0; 3];
        for (slot, field) in coords.iter_mut().zip(&fields) {
            *slot = hexfloat::parse_f64(field).map_err(D::Error::custom)?;
        }
        Point3::from_coords(coords).map_err(D::Error::custom)
    }
}

/// Side of the plane through `a, b, c` on which `d` lies. `Above` is the side
/// from which `a, b, c` appear counterclockwise, i.e. `det[b-a, c-a, d-a] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationSign {
    Above,
    Coplanar,
    Below,
}

impl OrientationSign {
    /// Sign of a floating-point determinant. NaN maps to `Coplanar`, the same
    /// as IEEE 754 comparisons with zero.
    pub fn of_f64(det: f64) -> Self {
        if det > 0.0 {
            Self::Above
        } else if det < 0.0 {
            Self::Below
        } else {
            Self::Coplanar
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Self::Above => Self::Below,
            Self::Below => Self::Above,
            Self::Coplanar => Self::Coplanar,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Self::Above => 1,
            Self::Coplanar => 0,
            Self::Below => -1,
        }
    }
}

impl fmt::Display for OrientationSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Above => "above",
            Self::Coplanar => "coplanar",
            Self::Below => "below",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Point3::new(f64::NAN, 0.0, 0.0).unwrap_err().to_string(),
            "coordinate NaN is not finite"
        );
        assert!(Point3::new(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn parses_mixed_literals() {
        let p = Point3::parse("0x1.999999999999ap-4, 0.5 ,-2").unwrap();
        assert_eq!(p.coords(), [0.1, 0.5, -2.0]);
        assert_eq!(p.to_string(), "0x1.999999999999ap-4, 0x1p-1, -0x1p+1");
    }

    #[test]
    fn point_file_errors_name_the_line() {
        let text = "# header\n0,0,0\n\n1,2\n";
        assert_eq!(
            parse_points(text).unwrap_err(),
            PointError::FieldCount { line: 4, found: 2 }
        );
        let err = parse_points("0,0,0\n1,x,0\n").unwrap_err();
        assert!(matches!(err, PointError::Literal { line: 2, .. }));
        assert!(parse_points("0,0,inf").is_err());
        assert_eq!(parse_points("1,2,3\n4,5,6").unwrap().len(), 2);
    }

    #[test]
    fn json_uses_hex_strings() {
        let p = Point3::new(0.1, -0.0, 3.0).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"["0x1.999999999999ap-4","-0x0p+0","0x1.8p+1"]"#);
        let back: Point3 = serde_json::from_str(&json).unwrap();
        assert_eq!(
            back.coords().map(f64::to_bits),
            p.coords().map(f64::to_bits)
        );
        assert!(serde_json::from_str::<Point3>(r#"["nan","0","0"]"#).is_err());
    }

    #[test]
    fn sign_of_determinant() {
        assert_eq!(OrientationSign::of_f64(1e-300), OrientationSign::Above);
        assert_eq!(OrientationSign::of_f64(-0.0), OrientationSign::Coplanar);
        assert_eq!(OrientationSign::of_f64(f64::NAN), OrientationSign::Coplanar);
        assert_eq!(OrientationSign::Below.reversed(), OrientationSign::Above);
        assert_eq!(
            serde_json::to_string(&OrientationSign::Coplanar).unwrap(),
            "\"coplanar\""
        );
    }
}
