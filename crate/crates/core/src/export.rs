//! CSV and JSON output of exponent curves.
//!
//! CSV numbers carry 12 significant digits; JSON carries full precision. A
//! JSON value printed through [`fmt_sig`] reproduces the CSV field exactly.

use std::f64::consts::LN_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::curves::ExponentCurve;

pub const CSV_HEADER: &str = "R,value,rho_star,s_star,phase";
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Information unit of rates and exponents at the output boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Multiplier taking a quantity in these units to nats.
    pub fn to_nats(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => LN_2,
        }
    }
}

/// `v` rounded to 12 significant digits, in the shortest form that reads back
/// to the rounded value. Infinities print as `inf` / `-inf`.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    // `-0` would print with its sign.
    if rounded == 0.0 {
        return "0.0".into();
    }
    format!("{rounded:?}")
}

/// Copy of `curve` with rates and exponents expressed in `units`.
pub fn in_units(curve: &ExponentCurve, units: Units) -> ExponentCurve {
    let f = 1.0 / units.to_nats();
    let mut c = curve.clone();
    c.r1 *= f;
    c.value_at_r1 *= f;
    c.zero_rate_value *= f;
    for p in &mut c.points {
        p.rate *= f;
        p.value *= f;
        p.unclamped *= f;
    }
    c
}

/// One curve as CSV. `generated_at` adds a leading comment line; a metadata
/// comment with the curve kind and critical rate always precedes the header.
pub fn curve_csv(curve: &ExponentCurve, generated_at: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(t) = generated_at {
        let _ = writeln!(out, "# generated_at={t}");
    }
    let _ = writeln!(
        out,
        "# kind={} R1={} value_at_R1={} zero_rate_value={}",
        curve.kind.name(),
        fmt_sig(curve.r1),
        fmt_sig(curve.value_at_r1),
        fmt_sig(curve.zero_rate_value)
    );
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(p.rate),
            fmt_sig(p.value),
            fmt_sig(p.rho_star),
            fmt_sig(p.s_star),
            p.phase.name()
        );
    }
    out
}

#[derive(Serialize)]
struct CurveDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    units: Units,
    curves: &'a [ExponentCurve],
}

/// Curves as a JSON document with metadata.
pub fn curves_json(curves: &[ExponentCurve], units: Units, generated_at: Option<u64>) -> String {
    serde_json::to_string_pretty(&CurveDocument {
        generated_at,
        units,
        curves,
    })
    .expect("curves serialize")
}

/// Parses the numeric fields of a CSV data row back into
/// `(R, value, rho_star, s_star)` and the phase label.
pub fn parse_csv_row(line: &str) -> Option<([f64; 4], String)> {
    let mut it = line.split(',');
    let mut nums = [0.0; 4];
    for slot in nums.iter_mut() {
        *slot = match it.next()? {
            "inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            s => s.parse().ok()?,
        };
    }
    let phase = it.next()?.to_string();
    it.next().is_none().then_some((nums, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{CurveKind, CurvePoint, Phase};

    fn sample() -> ExponentCurve {
        ExponentCurve {
            kind: CurveKind::CkmBhatt,
            r1: 0.012345678901234,
            value_at_r1: 0.045,
            zero_rate_value: f64::INFINITY,
            points: vec![CurvePoint {
                rate: 0.0,
                value: 1.0 / 3.0,
                unclamped: 1.0 / 3.0,
                rho_star: 1e4,
                s_star: 0.5,
                phase: Phase::Glassy,
                diverged: true,
            }],
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0574), "0.0574");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(1e-20 / 3.0), "3.33333333333e-21");
        assert_eq!(fmt_sig(-0.0), "0.0");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(2.0), "2.0");
    }

    #[test]
    fn csv_layout() {
        let csv = curve_csv(&sample(), None);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# kind=ckm_bhatt R1=0.0123456789012 "));
        assert!(lines[0].ends_with("zero_rate_value=inf"));
        assert_eq!(lines[1], CSV_HEADER);
        assert_eq!(lines[2], "0.0,0.333333333333,10000.0,0.5,glassy");
        let stamped = curve_csv(&sample(), Some(17));
        assert_eq!(stamped.lines().next().unwrap(), "# generated_at=17");
        assert_eq!(&stamped[stamped.find('\n').unwrap() + 1..], csv);
    }

    #[test]
    fn json_matches_csv_at_csv_precision() {
        let c = sample();
        let json: serde_json::Value = serde_json::from_str(&curves_json(std::slice::from_ref(&c), Units::Nats, None)).unwrap();
        let p = &json["curves"][0]["points"][0];
        let (nums, phase) = parse_csv_row(curve_csv(&c, None).lines().nth(2).unwrap()).unwrap();
        assert_eq!(phase, p["phase"].as_str().unwrap());
        for (i, key) in ["rate", "value", "rho_star", "s_star"].iter().enumerate() {
            assert_eq!(fmt_sig(p[key].as_f64().unwrap()), fmt_sig(nums[i]));
        }
        assert_eq!(json["curves"][0]["zero_rate_value"], "inf");
        assert!(json.get("generated_at").is_none());
    }

    #[test]
    fn bits_conversion() {
        let c = in_units(&sample(), Units::Bits);
        assert!((c.points[0].value - 1.0 / (3.0 * LN_2)).abs() < 1e-15);
        assert_eq!(c.points[0].rho_star, 1e4);
        assert_eq!(c.zero_rate_value, f64::INFINITY);
    }
}
