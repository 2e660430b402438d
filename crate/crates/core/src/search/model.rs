//! Reading a solver's `(get-model)` answer back into four points.

use std::collections::BTreeMap;

use thiserror::Error;

use super::sexp::{parse_sexps, Sexp, SexpError};
use super::smt::CoordinateName;
use super::OrientCounterexample;
use crate::geometry::{FloatWidth, Point3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model is not an S-expression: {0}")]
    Syntax(#[from] SexpError),
    #[error("solver answered `{0}`, not sat")]
    NotSat(String),
    #[error("model has no value for `{0}`")]
    Missing(String),
    #[error("cannot read value of `{name}`: {value}")]
    BadValue { name: String, value: String },
    #[error("value of `{0}` is not finite")]
    NonFinite(String),
    #[error("value of `{name}` has sort ({eb}, {sb}), expected ({want_eb}, {want_sb})")]
    WrongSort {
        name: String,
        eb: u32,
        sb: u32,
        want_eb: u32,
        want_sb: u32,
    },
}

/// `#b0101` or `#x1f` as (value, bit count).
fn bit_literal(atom: &str) -> Option<(u64, u32)> {
    if let Some(b) = atom.strip_prefix("#b") {
        if b.is_empty() || b.len() > 64 {
            return None;
        }
        Some((u64::from_str_radix(b, 2).ok()?, b.len() as u32))
    } else if let Some(h) = atom.strip_prefix("#x") {
        if h.is_empty() || h.len() > 16 {
            return None;
        }
        Some((u64::from_str_radix(h, 16).ok()?, 4 * h.len() as u32))
    } else {
        None
    }
}

enum FpValue {
    Bits { bits: u64, eb: u32, sb: u32 },
    Zero { negative: bool, eb: u32, sb: u32 },
    NonFinite,
}

fn read_value(value: &Sexp) -> Option<FpValue> {
    let items = value.as_list()?;
    let atoms: Vec<&str> = items.iter().filter_map(Sexp::as_atom).collect();
    match items.first()? {
        Sexp::Atom(h) if h == "fp" && items.len() == 4 && atoms.len() == 4 => {
            let (s, sn) = bit_literal(atoms[1])?;
            let (e, en) = bit_literal(atoms[2])?;
            let (m, mn) = bit_literal(atoms[3])?;
            (sn == 1 && en + mn < 64).then(|| FpValue::Bits {
                bits: (s << (en + mn)) | (e << mn) | m,
                eb: en,
                sb: mn + 1,
            })
        }
        Sexp::Atom(h) if h == "_" && items.len() == 4 && atoms.len() == 4 => {
            let eb = atoms[2].parse().ok()?;
            let sb = atoms[3].parse().ok()?;
            match atoms[1] {
                "+zero" => Some(FpValue::Zero {
                    negative: false,
                    eb,
                    sb,
                }),
                "-zero" => Some(FpValue::Zero {
                    negative: true,
                    eb,
                    sb,
                }),
                "+oo" | "-oo" | "NaN" => Some(FpValue::NonFinite),
                _ => None,
            }
        }
        // ((_ to_fp eb sb) #x...)
        Sexp::List(op) if items.len() == 2 => {
            let op: Vec<&str> = op.iter().filter_map(Sexp::as_atom).collect();
            if op.len() != 4 || op[0] != "_" || op[1] != "to_fp" {
                return None;
            }
            let eb: u32 = op[2].parse().ok()?;
            let sb: u32 = op[3].parse().ok()?;
            let (bits, n) = bit_literal(items[1].as_atom()?)?;
            (n == eb + sb).then_some(FpValue::Bits { bits, eb, sb })
        }
        _ => None,
    }
}

fn to_f64(name: &str, value: FpValue, width: FloatWidth) -> Result<f64, ModelError> {
    let (want_eb, want_sb) = (width.exponent_bits(), width.precision());
    let check = |eb, sb| {
        if (eb, sb) == (want_eb, want_sb) {
            Ok(())
        } else {
            Err(ModelError::WrongSort {
                name: name.to_string(),
                eb,
                sb,
                want_eb,
                want_sb,
            })
        }
    };
    let x = match value {
        FpValue::NonFinite => return Err(ModelError::NonFinite(name.to_string())),
        FpValue::Zero { negative, eb, sb } => {
            check(eb, sb)?;
            if negative {
                -0.0
            } else {
                0.0
            }
        }
        FpValue::Bits { bits, eb, sb } => {
            check(eb, sb)?;
            match width {
                FloatWidth::Binary64 => f64::from_bits(bits),
                FloatWidth::Binary32 => f32::from_bits(bits as u32) as f64,
            }
        }
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ModelError::NonFinite(name.to_string()))
    }
}

fn collect_definitions<'a>(sexp: &'a Sexp, out: &mut BTreeMap<&'a str, &'a Sexp>) {
    let Some(items) = sexp.as_list() else { return };
    if sexp.head() == Some("define-fun") && items.len() == 5 {
        if let (Some(name), Some(params)) = (items[1].as_atom(), items[2].as_list()) {
            if params.is_empty() {
                out.insert(name, &items[4]);
            }
        }
        return;
    }
    for item in items {
        collect_definitions(item, out);
    }
}

/// Extracts the twelve coordinates from solver output (optionally preceded by
/// the `sat` line).
pub fn parse_model(text: &str, width: FloatWidth) -> Result<[Point3; 4], ModelError> {
    let forms = parse_sexps(text)?;
    if let Some(answer) = forms.first().and_then(Sexp::as_atom) {
        if answer != "sat" {
            return Err(ModelError::NotSat(answer.to_string()));
        }
    }
    let mut defs = BTreeMap::new();
    for form in &forms {
        collect_definitions(form, &mut defs);
    }
    let mut coords = [[0.0; 3]; 4];
    for name in CoordinateName::all() {
        let symbol = name.symbol();
        let value = defs
            .get(symbol.as_str())
            .ok_or_else(|| ModelError::Missing(symbol.clone()))?;
        let parsed = read_value(value).ok_or_else(|| ModelError::BadValue {
            name: symbol.clone(),
            value: value.to_string(),
        })?;
        coords[name.point][name.axis] = to_f64(&symbol, parsed, width)?;
    }
    Ok(coords.map(|c| Point3::from_coords(c).expect("finite by construction")))
}

/// Parses a model and evaluates every predicate on it.
pub fn replay_model(text: &str, width: FloatWidth) -> Result<OrientCounterexample, ModelError> {
    Ok(OrientCounterexample::evaluate(
        parse_model(text, width)?,
        width,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::smt::fp_literal;

    fn model_for(points: [[f64; 3]; 4], width: FloatWidth) -> String {
        let mut text = String::from("sat\n(\n");
        for name in CoordinateName::all() {
            let v = points[name.point][name.axis];
            text.push_str(&format!(
                "  (define-fun {} () (_ FloatingPoint {} {})\n    {})\n",
                name.symbol(),
                width.exponent_bits(),
                width.precision(),
                fp_literal(v, width)
            ));
        }
        text.push_str(")\n");
        text
    }

    #[test]
    fn reads_back_literals() {
        let pts = [
            [0.0, 0.1, -3.5],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.25, 0.25, 1e-300],
        ];
        let parsed =
            parse_model(&model_for(pts, FloatWidth::Binary64), FloatWidth::Binary64).unwrap();
        assert_eq!(parsed.map(|p| p.coords()), pts);
        let cx = replay_model(&model_for(pts, FloatWidth::Binary32), FloatWidth::Binary32).unwrap();
        assert_eq!(cx.a.y(), 0.1f32 as f64);
    }

    #[test]
    fn alternative_spellings() {
        let text = model_for([[1.0; 3]; 4], FloatWidth::Binary64)
            .replace(
                &fp_literal(1.0, FloatWidth::Binary64),
                "((_ to_fp 11 53) #x3ff0000000000000)",
            )
            .replacen("((_ to_fp 11 53) #x3ff0000000000000)", "(_ -zero 11 53)", 1)
            .replacen(
                "((_ to_fp 11 53) #x3ff0000000000000)",
                "(fp #b0 #b01111111111 #x0000000000000)",
                1,
            );
        let pts = parse_model(&text, FloatWidth::Binary64).unwrap();
        assert_eq!(pts[0].x().to_bits(), (-0.0f64).to_bits());
        assert_eq!(pts[0].y(), 1.0);
        assert_eq!(pts[3].z(), 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_model("unsat", FloatWidth::Binary64),
            Err(ModelError::NotSat("unsat".into()))
        );
        let full = model_for([[1.0; 3]; 4], FloatWidth::Binary64);
        assert!(matches!(
            parse_model(&full, FloatWidth::Binary32),
            Err(ModelError::WrongSort { .. })
        ));
        let nan = full.replacen(&fp_literal(1.0, FloatWidth::Binary64), "(_ NaN 11 53)", 1);
        assert_eq!(
            parse_model(&nan, FloatWidth::Binary64),
            Err(ModelError::NonFinite("ax".into()))
        );
        let missing = "sat ((define-fun ax () (_ FloatingPoint 11 53) (_ +zero 11 53)))";
        assert_eq!(
            parse_model(missing, FloatWidth::Binary64),
            Err(ModelError::Missing("ay".into()))
        );
        let oversized = full.replacen(
            &fp_literal(1.0, FloatWidth::Binary64),
            "(fp #b0 #x3ff #x0000000000000)",
            1,
        );
        assert!(matches!(
            parse_model(&oversized, FloatWidth::Binary64),
            Err(ModelError::BadValue { .. })
        ));
    }
}
