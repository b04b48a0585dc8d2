//! CSV and JSON output of scan records.
//!
//! Floats are written with 12 significant digits in the style of C's `%.12g`.
//! A CSV file parsed back and rewritten is byte-identical.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::inequalities::Family;

pub const CSV_COLUMNS: [&str; 21] = [
    "theta",
    "phi",
    "tau",
    "eta",
    "x",
    "axis_alpha",
    "axis_beta",
    "family",
    "spec_index",
    "value",
    "bound",
    "violated",
    "nsit_12",
    "nsit_13",
    "nsit_23",
    "nsit_123",
    "nsit_1_2_3",
    "jm_12",
    "jm_23",
    "jm_13",
    "jm_triple",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
    pub eta: f64,
    pub x: f64,
    pub axis_alpha: f64,
    pub axis_beta: f64,
    pub family: Family,
    pub spec_index: usize,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub nsit_12: bool,
    pub nsit_13: bool,
    pub nsit_23: bool,
    pub nsit_123: bool,
    pub nsit_1_2_3: bool,
    pub jm_12: bool,
    pub jm_23: bool,
    pub jm_13: bool,
    /// Absent for biased measurements.
    pub jm_triple: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// below `1e-4` and from `1e12` on.
pub fn format_float(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

impl ScanRecord {
    fn csv_fields(&self) -> [String; 21] {
        let f = |v: f64| format_float(v);
        let b = |v: bool| v.to_string();
        [
            f(self.theta),
            f(self.phi),
            f(self.tau),
            f(self.eta),
            f(self.x),
            f(self.axis_alpha),
            f(self.axis_beta),
            self.family.to_string(),
            self.spec_index.to_string(),
            f(self.value),
            f(self.bound),
            b(self.violated),
            b(self.nsit_12),
            b(self.nsit_13),
            b(self.nsit_23),
            b(self.nsit_123),
            b(self.nsit_1_2_3),
            b(self.jm_12),
            b(self.jm_23),
            b(self.jm_13),
            self.jm_triple.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }

    pub fn to_json(&self) -> Value {
        let num = |v: f64| {
            if v.is_finite() {
                // Same rounding as the CSV output.
                Value::from(format_float(v).parse::<f64>().expect("formatted float parses"))
            } else {
                Value::Null
            }
        };
        let mut m = Map::new();
        for (k, v) in [
            ("theta", self.theta),
            ("phi", self.phi),
            ("tau", self.tau),
            ("eta", self.eta),
            ("x", self.x),
            ("axis_alpha", self.axis_alpha),
            ("axis_beta", self.axis_beta),
        ] {
            m.insert(k.into(), num(v));
        }
        m.insert("family".into(), Value::from(self.family.as_str()));
        m.insert("spec_index".into(), Value::from(self.spec_index));
        m.insert("value".into(), num(self.value));
        m.insert("bound".into(), num(self.bound));
        for (k, v) in [
            ("violated", self.violated),
            ("nsit_12", self.nsit_12),
            ("nsit_13", self.nsit_13),
            ("nsit_23", self.nsit_23),
            ("nsit_123", self.nsit_123),
            ("nsit_1_2_3", self.nsit_1_2_3),
            ("jm_12", self.jm_12),
            ("jm_23", self.jm_23),
            ("jm_13", self.jm_13),
        ] {
            m.insert(k.into(), Value::from(v));
        }
        m.insert("jm_triple".into(), self.jm_triple.map_or(Value::Null, Value::from));
        Value::Object(m)
    }
}

pub fn write_csv<W: Write>(records: &[ScanRecord], mut w: W) -> Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        writeln!(w, "{}", r.csv_fields().join(","))?;
    }
    Ok(())
}

pub fn to_csv(records: &[ScanRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn write_json<W: Write>(records: &[ScanRecord], mut w: W) -> Result<()> {
    let arr = Value::Array(records.iter().map(ScanRecord::to_json).collect());
    serde_json::to_writer_pretty(&mut w, &arr).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[ScanRecord], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, w),
        Format::Json => write_json(records, w),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, message: String| Error::Parse { line: line + 1, message };
    match lines.next() {
        Some((_, header)) if header == CSV_COLUMNS.join(",") => {}
        Some((i, _)) => return Err(bad(i, "unexpected header".into())),
        None => return Err(bad(0, "empty input".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != CSV_COLUMNS.len() {
            return Err(bad(i, format!("expected {} fields, found {}", CSV_COLUMNS.len(), cells.len())));
        }
        let float = |k: usize| parse_float(cells[k]).ok_or_else(|| bad(i, format!("bad number in {}", CSV_COLUMNS[k])));
        let flag = |k: usize| parse_bool(cells[k]).ok_or_else(|| bad(i, format!("bad boolean in {}", CSV_COLUMNS[k])));
        out.push(ScanRecord {
            theta: float(0)?,
            phi: float(1)?,
            tau: float(2)?,
            eta: float(3)?,
            x: float(4)?,
            axis_alpha: float(5)?,
            axis_beta: float(6)?,
            family: cells[7].parse().map_err(|m| bad(i, m))?,
            spec_index: cells[8].parse().map_err(|_| bad(i, "bad spec_index".into()))?,
            value: float(9)?,
            bound: float(10)?,
            violated: flag(11)?,
            nsit_12: flag(12)?,
            nsit_13: flag(13)?,
            nsit_23: flag(14)?,
            nsit_123: flag(15)?,
            nsit_1_2_3: flag(16)?,
            jm_12: flag(17)?,
            jm_23: flag(18)?,
            jm_13: flag(19)?,
            jm_triple: if cells[20].is_empty() { None } else { Some(flag(20)?) },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ScanRecord {
        ScanRecord {
            theta: f64::NAN,
            phi: f64::NAN,
            tau: std::f64::consts::FRAC_PI_3,
            eta: 0.69,
            x: -0.31,
            axis_alpha: 0.0,
            axis_beta: std::f64::consts::FRAC_PI_2,
            family: Family::Wlgi,
            spec_index: 18,
            value: -1.234e-7,
            bound: 0.0,
            violated: false,
            nsit_12: true,
            nsit_13: false,
            nsit_23: true,
            nsit_123: false,
            nsit_1_2_3: false,
            jm_12: true,
            jm_23: true,
            jm_13: false,
            jm_triple: None,
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_float(-1.234e-7), "-1.234e-07");
        assert_eq!(format_float(0.0001), "0.0001");
        assert_eq!(format_float(123456789012.0), "123456789012");
        assert_eq!(format_float(1e12), "1e+12");
        assert_eq!(format_float(2.5e-300), "2.5e-300");
        assert_eq!(format_float(0.999999999999951), "1");
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn empty_stream_is_header_only() {
        assert_eq!(to_csv(&[]), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let mut with_triple = record();
        with_triple.jm_triple = Some(true);
        with_triple.theta = 1.7;
        with_triple.phi = 0.5;
        let text = to_csv(&[record(), with_triple]);
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].jm_triple, Some(true));
        assert_eq!(to_csv(&parsed), text);
    }

    #[test]
    fn json_mirrors_columns() {
        let v = record().to_json();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, CSV_COLUMNS);
        assert!(v["theta"].is_null());
        assert!(v["jm_triple"].is_null());
        assert_eq!(v["family"], "wlgi");
        assert_eq!(v["tau"].as_f64().unwrap(), "1.0471975512".parse::<f64>().unwrap());
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("a,b\n").is_err());
        let mut text = to_csv(&[record()]);
        text = text.replace("wlgi", "chsh");
        assert!(matches!(parse_csv(&text), Err(Error::Parse { line: 2, .. })));
    }
}
