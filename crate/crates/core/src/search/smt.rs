//! SMT-LIB2 query: twelve floating-point constants (four points) such that the
//! floating-point orientation disagrees with the real-valued one.
//!
//! Each base variant is encoded with `fp.sub`/`fp.mul`/`fp.add` under
//! `RNE` in the same order as the library's floating-point predicate; the
//! ground truth converts every constant with `fp.to_real` and evaluates the
//! determinant over the reals.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{OrientSearchConfig, SearchError, SearchMode};
use crate::geometry::FloatWidth;
use crate::hexfloat;

/// One of the twelve coordinate constants, `ax` .. `dz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoordinateName {
    pub point: usize,
    pub axis: usize,
}

impl CoordinateName {
    pub fn all() -> impl Iterator<Item = CoordinateName> {
        (0..4).flat_map(|point| (0..3).map(move |axis| CoordinateName { point, axis }))
    }

    pub fn symbol(self) -> String {
        format!(
            "{}{}",
            ['a', 'b', 'c', 'd'][self.point],
            ['x', 'y', 'z'][self.axis]
        )
    }
}

impl FromStr for CoordinateName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let compact: String = s.chars().filter(|&c| c != '.').collect();
        CoordinateName::all()
            .find(|n| n.symbol() == compact)
            .ok_or_else(|| format!("unknown coordinate `{s}`, expected one of ax..dz"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedCoordinate {
    pub name: CoordinateName,
    pub value: f64,
}

impl FromStr for FixedCoordinate {
    type Err = String;

    /// `ax=0x1p+0` or `a.x=1.5`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
        Ok(FixedCoordinate {
            name: name.trim().parse()?,
            value: hexfloat::parse_f64(value).map_err(|e| e.to_string())?,
        })
    }
}

/// Extra constraints beyond the configured exponent band.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SmtOptions {
    pub fixed: Vec<FixedCoordinate>,
}

impl SmtOptions {
    /// Fixed values must be exact at the query width; they are never rounded.
    /// Values outside the exponent band are allowed and make the query unsat.
    pub fn validate(&self, width: FloatWidth) -> Result<(), SearchError> {
        match self.fixed.iter().find(|f| !width.represents(f.value)) {
            Some(f) => Err(SearchError::FixedValue {
                name: f.name.symbol(),
                value: f.value,
            }),
            None => Ok(()),
        }
    }
}

fn sort(width: FloatWidth) -> String {
    format!(
        "(_ FloatingPoint {} {})",
        width.exponent_bits(),
        width.precision()
    )
}

/// `(fp #b<sign> #b<exponent> #b<significand>)` for `value` rounded to `width`.
pub(crate) fn fp_literal(value: f64, width: FloatWidth) -> String {
    let (bits, eb, sb) = match width {
        FloatWidth::Binary64 => (value.to_bits(), 11, 52),
        FloatWidth::Binary32 => ((value as f32).to_bits() as u64, 8, 23),
    };
    let sign = bits >> (eb + sb);
    let exponent = (bits >> sb) & ((1 << eb) - 1);
    let significand = bits & ((1 << sb) - 1);
    format!(
        "(fp #b{sign} #b{exponent:0eb$b} #b{significand:0sb$b})",
        eb = eb as usize,
        sb = sb as usize
    )
}

const POINTS: [&str; 4] = ["a", "b", "c", "d"];

fn coords(point: &str) -> String {
    format!("{point}x {point}y {point}z")
}

/// The SMT-LIB2 script for `config` as a string.
pub fn smt_script(config: &OrientSearchConfig, options: &SmtOptions) -> String {
    let w = config.float_width;
    let fp = sort(w);
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };

    line("; orientation disagreement query".into());
    line("; intended theories: QF_FPA with real arithmetic (fp.to_real); declared as ALL for solver compatibility".into());
    line(format!("; float width: binary{} {fp}", w.bits()));
    line(format!(
        "; mode: {}",
        match config.mode {
            SearchMode::Majority => "majority vote differs from the real sign",
            SearchMode::SingleBase => "some base evaluation differs from the real sign",
        }
    ));
    line(format!(
        "; search-space narrowing: |coordinate| = 0 or in [2^{}, 2^{}); this band is a reconstructed narrowing, not a canonical constant",
        config.e_min,
        config.e_max + 1
    ));
    line("(set-logic ALL)".into());
    line("(set-option :produce-models true)".into());
    line(format!("(define-sort FP () {fp})"));
    for name in CoordinateName::all() {
        line(format!("(declare-const {} FP)", name.symbol()));
    }

    line(format!(
        "(define-fun zero () FP (_ +zero {} {}))",
        w.exponent_bits(),
        w.precision()
    ));
    line(format!(
        "(define-fun band-lo () FP {})",
        fp_literal(2f64.powi(config.e_min), w)
    ));
    line(format!(
        "(define-fun band-hi () FP {})",
        fp_literal(2f64.powi(config.e_max + 1), w)
    ));
    line("(define-fun in-band ((v FP)) Bool (or (fp.isZero v) (and (fp.leq band-lo (fp.abs v)) (fp.lt (fp.abs v) band-hi))))".into());
    for name in CoordinateName::all() {
        line(format!("(assert (in-band {}))", name.symbol()));
    }
    for fixed in &options.fixed {
        line(format!(
            "(assert (= {} {}))",
            fixed.name.symbol(),
            fp_literal(fixed.value, w)
        ));
    }

    let params = |ty: &str| {
        ["p1", "p2", "p3", "q"]
            .iter()
            .flat_map(|p| ["x", "y", "z"].map(|a| format!("({p}{a} {ty})")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    line(format!("(define-fun fdet ({}) FP", params("FP")));
    line(
        "  (let ((ux (fp.sub RNE p2x p1x)) (uy (fp.sub RNE p2y p1y)) (uz (fp.sub RNE p2z p1z))"
            .into(),
    );
    line(
        "        (vx (fp.sub RNE p3x p1x)) (vy (fp.sub RNE p3y p1y)) (vz (fp.sub RNE p3z p1z))"
            .into(),
    );
    line(
        "        (wx (fp.sub RNE qx p1x)) (wy (fp.sub RNE qy p1y)) (wz (fp.sub RNE qz p1z)))"
            .into(),
    );
    line("  (let ((m1 (fp.sub RNE (fp.mul RNE vy wz) (fp.mul RNE vz wy)))".into());
    line("        (m2 (fp.sub RNE (fp.mul RNE vx wz) (fp.mul RNE vz wx)))".into());
    line("        (m3 (fp.sub RNE (fp.mul RNE vx wy) (fp.mul RNE vy wx))))".into());
    line(
        "    (fp.add RNE (fp.sub RNE (fp.mul RNE ux m1) (fp.mul RNE uy m2)) (fp.mul RNE uz m3)))))"
            .into(),
    );
    line(format!("(define-fun rdet ({}) Real", params("Real")));
    line("  (let ((ux (- p2x p1x)) (uy (- p2y p1y)) (uz (- p2z p1z))".into());
    line("        (vx (- p3x p1x)) (vy (- p3y p1y)) (vz (- p3z p1z))".into());
    line("        (wx (- qx p1x)) (wy (- qy p1y)) (wz (- qz p1z)))".into());
    line("    (+ (- (* ux (- (* vy wz) (* vz wy))) (* uy (- (* vx wz) (* vz wx)))) (* uz (- (* vx wy) (* vy wx))))))".into());
    line(
        "(define-fun fsign ((v FP)) Int (ite (fp.gt v zero) 1 (ite (fp.lt v zero) (- 1) 0)))"
            .into(),
    );
    line("(define-fun rsign ((v Real)) Int (ite (> v 0.0) 1 (ite (< v 0.0) (- 1) 0)))".into());

    // Base rotations (a,b,c), (b,c,a), (c,a,b).
    for (k, rot) in [[0, 1, 2], [1, 2, 0], [2, 0, 1]].iter().enumerate() {
        let args = rot
            .iter()
            .map(|&i| coords(POINTS[i]))
            .collect::<Vec<_>>()
            .join(" ");
        line(format!(
            "(define-fun s{} () Int (fsign (fdet {args} {})))",
            k + 1,
            coords("d")
        ));
    }
    let mut real_args = String::new();
    for name in CoordinateName::all() {
        let _ = write!(real_args, " (fp.to_real {})", name.symbol());
    }
    line(format!(
        "(define-fun exact () Int (rsign (rdet{real_args})))"
    ));
    line(
        "(define-fun majority () Int (ite (= s1 s2) s1 (ite (= s1 s3) s1 (ite (= s2 s3) s2 0))))"
            .into(),
    );
    match config.mode {
        SearchMode::Majority => {
            line("; three distinct signs would be a tie; excluded".into());
            line("(assert (or (= s1 s2) (= s1 s3) (= s2 s3)))".into());
            line("(assert (distinct majority exact))".into());
        }
        SearchMode::SingleBase => {
            line(
                "(assert (or (distinct s1 exact) (distinct s2 exact) (distinct s3 exact)))".into(),
            );
        }
    }
    line("(check-sat)".into());
    line("(get-model)".into());
    s
}

/// Writes [`smt_script`] to `out`.
pub fn emit_smt<W: io::Write>(
    config: &OrientSearchConfig,
    options: &SmtOptions,
    out: &mut W,
) -> io::Result<()> {
    out.write_all(smt_script(config, options).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::sexp::parse_sexps;

    #[test]
    fn fixed_values_must_be_exact() {
        let fix = |v: &str| SmtOptions {
            fixed: vec![format!("dz={v}").parse().unwrap()],
        };
        assert!(fix("0x1.000002p+0").validate(FloatWidth::Binary32).is_ok());
        assert!(matches!(
            fix("0x1.0000001p+0").validate(FloatWidth::Binary32),
            Err(SearchError::FixedValue { .. })
        ));
        assert!(fix("0x1.0000001p+0").validate(FloatWidth::Binary64).is_ok());
    }

    #[test]
    fn sorts_by_width() {
        let c64 = OrientSearchConfig::default();
        assert!(smt_script(&c64, &SmtOptions::default()).contains("(_ FloatingPoint 11 53)"));
        let c32 = OrientSearchConfig {
            float_width: FloatWidth::Binary32,
            ..c64
        };
        let script = smt_script(&c32, &SmtOptions::default());
        assert!(script.contains("(_ FloatingPoint 8 24)"));
        assert!(!script.contains("11 53"));
    }

    #[test]
    fn literals() {
        assert_eq!(
            fp_literal(1.0, FloatWidth::Binary32),
            "(fp #b0 #b01111111 #b00000000000000000000000)"
        );
        assert_eq!(
            fp_literal(-2.0, FloatWidth::Binary64),
            format!("(fp #b1 #b10000000000 #b{})", "0".repeat(52))
        );
    }

    #[test]
    fn well_formed_script() {
        let options = SmtOptions {
            fixed: vec!["a.x=0.5".parse().unwrap(), "dz=-0x1p-3".parse().unwrap()],
        };
        for mode in [SearchMode::Majority, SearchMode::SingleBase] {
            let config = OrientSearchConfig {
                mode,
                ..Default::default()
            };
            let script = smt_script(&config, &options);
            let forms = parse_sexps(&script).unwrap();
            let heads: Vec<_> = forms.iter().map(|f| f.head().unwrap()).collect();
            assert_eq!(heads[0], "set-logic");
            assert_eq!(heads.iter().filter(|&&h| h == "declare-const").count(), 12);
            assert_eq!(heads[heads.len() - 2..], ["check-sat", "get-model"]);
            assert!(script.contains("(assert (= ax (fp #b0 #b01111111110 #b"));
        }
    }

    #[test]
    fn coordinate_names() {
        assert_eq!("b.y".parse::<CoordinateName>().unwrap().symbol(), "by");
        assert!("e.x".parse::<CoordinateName>().is_err());
        assert!("ax:1".parse::<FixedCoordinate>().is_err());
        assert!("ax=nope".parse::<FixedCoordinate>().is_err());
        assert_eq!(CoordinateName::all().count(), 12);
    }
}
