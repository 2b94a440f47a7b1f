//! Versioned CSV and JSON writers and parsers for curves and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{CurvePoint, Stage};
use crate::witnesses::{Party, Regime};

pub const FORMAT_VERSION: u32 = 1;
const VERSION_LINE: &str = "# format_version=1";

pub const CURVE_COLUMNS: [&str; 14] = [
    "l_total",
    "stage",
    "kappa_re",
    "kappa_im",
    "ew",
    "s1_abc",
    "s2_abc",
    "s1_bac",
    "s2_bac",
    "s1_cab",
    "s2_cab",
    "regime_abc",
    "regime_bac",
    "regime_cab",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rendering with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    // Adding zero folds −0 into +0.
    format!("{:.11e}", x + 0.0)
}

/// Rounds to the value printed by [`fmt_num`].
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// One serialized curve row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRow {
    pub l_total: f64,
    pub stage: String,
    pub kappa_re: f64,
    pub kappa_im: f64,
    pub ew: f64,
    pub s1_abc: f64,
    pub s2_abc: f64,
    pub s1_bac: f64,
    pub s2_bac: f64,
    pub s1_cab: f64,
    pub s2_cab: f64,
    pub regime_abc: String,
    pub regime_bac: String,
    pub regime_cab: String,
}

impl CurveRow {
    pub fn from_point(p: &CurvePoint) -> Self {
        let r = &p.report;
        let (a, b, c) = (r.part(Party::A), r.part(Party::B), r.part(Party::C));
        Self {
            l_total: round12(p.l_total),
            stage: p.stage.label().to_string(),
            kappa_re: round12(p.kappa.re),
            kappa_im: round12(p.kappa.im),
            ew: round12(r.ew),
            s1_abc: round12(a.s1sdi),
            s2_abc: round12(a.s2sdi),
            s1_bac: round12(b.s1sdi),
            s2_bac: round12(b.s2sdi),
            s1_cab: round12(c.s1sdi),
            s2_cab: round12(c.s2sdi),
            regime_abc: a.regime.label().to_string(),
            regime_bac: b.regime.label().to_string(),
            regime_cab: c.regime.label().to_string(),
        }
    }

    /// Numeric column by name.
    pub fn value(&self, column: &str) -> Option<f64> {
        Some(match column {
            "l_total" => self.l_total,
            "kappa_re" => self.kappa_re,
            "kappa_im" => self.kappa_im,
            "ew" => self.ew,
            "s1_abc" => self.s1_abc,
            "s2_abc" => self.s2_abc,
            "s1_bac" => self.s1_bac,
            "s2_bac" => self.s2_bac,
            "s1_cab" => self.s1_cab,
            "s2_cab" => self.s2_cab,
            _ => return None,
        })
    }

    pub fn stage(&self) -> Option<Stage> {
        Stage::parse(&self.stage)
    }

    fn validate(&self) -> Result<(), String> {
        if self.stage().is_none() {
            return Err(format!("unknown stage {:?}", self.stage));
        }
        for r in [&self.regime_abc, &self.regime_bac, &self.regime_cab] {
            r.parse::<Regime>().map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDocument {
    format_version: u32,
    rows: Vec<CurveRow>,
}

pub fn write_curve(rows: &[CurveRow], format: Format) -> String {
    match format {
        Format::Json => {
            let doc = CurveDocument {
                format_version: FORMAT_VERSION,
                rows: rows.to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("curve serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "{VERSION_LINE}").unwrap();
            writeln!(s, "{}", CURVE_COLUMNS.join(",")).unwrap();
            for r in rows {
                let nums = [
                    r.kappa_re, r.kappa_im, r.ew, r.s1_abc, r.s2_abc, r.s1_bac, r.s2_bac, r.s1_cab, r.s2_cab,
                ]
                .map(fmt_num);
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    fmt_num(r.l_total),
                    r.stage,
                    nums.join(","),
                    r.regime_abc,
                    r.regime_bac,
                    r.regime_cab
                )
                .unwrap();
            }
            s
        }
    }
}

fn parse_f(field: &str, line: usize) -> Result<f64, String> {
    field
        .trim()
        .parse()
        .map_err(|_| format!("line {line}: bad number {field:?}"))
}

/// Reads a curve in either format; the format is detected from the content.
pub fn parse_curve(text: &str) -> Result<Vec<CurveRow>, String> {
    let trimmed = text.trim_start();
    let rows = if trimmed.starts_with('{') {
        let doc: CurveDocument = serde_json::from_str(trimmed).map_err(|e| format!("invalid curve JSON: {e}"))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(format!("unsupported format_version {}", doc.format_version));
        }
        doc.rows
    } else {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == VERSION_LINE => {}
            _ => return Err(format!("missing {VERSION_LINE:?} line")),
        }
        match lines.next() {
            Some((_, l)) if l.trim() == CURVE_COLUMNS.join(",") => {}
            _ => return Err("missing or unexpected curve header".into()),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let n = i + 1;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != CURVE_COLUMNS.len() {
                return Err(format!(
                    "line {n}: expected {} fields, got {}",
                    CURVE_COLUMNS.len(),
                    f.len()
                ));
            }
            rows.push(CurveRow {
                l_total: parse_f(f[0], n)?,
                stage: f[1].to_string(),
                kappa_re: parse_f(f[2], n)?,
                kappa_im: parse_f(f[3], n)?,
                ew: parse_f(f[4], n)?,
                s1_abc: parse_f(f[5], n)?,
                s2_abc: parse_f(f[6], n)?,
                s1_bac: parse_f(f[7], n)?,
                s2_bac: parse_f(f[8], n)?,
                s1_cab: parse_f(f[9], n)?,
                s2_cab: parse_f(f[10], n)?,
                regime_abc: f[11].to_string(),
                regime_bac: f[12].to_string(),
                regime_cab: f[13].to_string(),
            });
        }
        rows
    };
    for r in &rows {
        r.validate()?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportValue {
    Num(f64),
    Text(String),
}

/// Flat key/value report emitted by `fit`, `nonmark` and `tomo`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, ReportValue)>,
}

impl Report {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.entries.push((key.to_string(), ReportValue::Num(round12(v))));
        self
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), ReportValue::Text(v.into())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_num(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(ReportValue::Num(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "{VERSION_LINE}").unwrap();
                writeln!(s, "key,value").unwrap();
                for (k, v) in &self.entries {
                    match v {
                        ReportValue::Num(x) => writeln!(s, "{k},{}", fmt_num(*x)).unwrap(),
                        ReportValue::Text(t) => writeln!(s, "{k},{t}").unwrap(),
                    }
                }
                s
            }
            Format::Json => {
                let mut map = serde_json::Map::new();
                map.insert("format_version".into(), FORMAT_VERSION.into());
                for (k, v) in &self.entries {
                    map.insert(k.clone(), serde_json::to_value(v).expect("report value serializes"));
                }
                let mut s = serde_json::to_string_pretty(&map).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    /// Inverse of [`Report::render`]. JSON key order is not preserved.
    pub fn parse(text: &str) -> Result<Self, String> {
        let trimmed = text.trim_start();
        let mut entries = Vec::new();
        if trimmed.starts_with('{') {
            let map: BTreeMap<String, ReportValue> =
                serde_json::from_str(trimmed).map_err(|e| format!("invalid report JSON: {e}"))?;
            for (k, v) in map {
                if k == "format_version" {
                    if v != ReportValue::Num(FORMAT_VERSION as f64) {
                        return Err(format!("unsupported format_version {v:?}"));
                    }
                    continue;
                }
                entries.push((k, v));
            }
        } else {
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            if lines.next().map(str::trim) != Some(VERSION_LINE) {
                return Err(format!("missing {VERSION_LINE:?} line"));
            }
            if lines.next().map(str::trim) != Some("key,value") {
                return Err("missing report header".into());
            }
            for line in lines {
                let (k, v) = line.split_once(',').ok_or_else(|| format!("bad report row {line:?}"))?;
                let value = match v.parse::<f64>() {
                    Ok(x) => ReportValue::Num(x),
                    Err(_) => ReportValue::Text(v.to_string()),
                };
                entries.push((k.to_string(), value));
            }
        }
        Ok(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(l: f64) -> CurveRow {
        CurveRow {
            l_total: l,
            stage: "u1".into(),
            kappa_re: 0.5,
            kappa_im: -1e-20,
            ew: -0.25,
            s1_abc: -0.8453,
            s2_abc: -0.5821,
            s1_bac: 0.1,
            s2_bac: 0.2,
            s1_cab: 0.1,
            s2_cab: 0.2,
            regime_abc: "both".into(),
            regime_bac: "unsteerable".into(),
            regime_cab: "unsteerable".into(),
        }
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn curve_round_trips() {
        let rows = vec![row(0.0), row(7.5)];
        for f in [Format::Csv, Format::Json] {
            assert_eq!(parse_curve(&write_curve(&rows, f)).unwrap(), rows);
        }
    }

    #[test]
    fn malformed_curves_rejected() {
        let csv = write_curve(&[row(0.0)], Format::Csv);
        assert!(parse_curve(&csv.replace("# format_version=1", "# format_version=2")).is_err());
        assert!(parse_curve(&csv.replace(",both,", ",maybe,")).is_err());
        assert!(parse_curve(&csv.replace("u1", "u3")).is_err());
        assert!(parse_curve("{\"format_version\": 1}").is_err());
    }

    #[test]
    fn report_round_trips() {
        let mut r = Report::default();
        r.num("alpha", 0.125).text("mode", "exact").num("beta", -3.0e-7);
        let csv = r.render(Format::Csv);
        assert_eq!(Report::parse(&csv).unwrap(), r);
        let json = Report::parse(&r.render(Format::Json)).unwrap();
        assert_eq!(json.get_num("beta"), Some(-3.0e-7));
        assert_eq!(json.get("mode"), Some(&ReportValue::Text("exact".into())));
    }
}
