//! Deterministic output: canonical JSON, RFC 4180 CSV, minimal SVG line plots
//! and a hashed manifest.
//!
//! Canonical JSON has lexicographically sorted keys, two-space indentation,
//! shortest round-trip float formatting and a trailing newline. Non-finite
//! floats are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid file name {0:?}")]
    FileName(String),
}

/// Serde adapter writing non-finite floats as strings.
pub mod ext_f64 {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(super::format_f64(*v).as_str())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Shortest round-trip decimal, or `inf` / `-inf` / `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String, ReportError> {
    // `serde_json::Map` is a BTreeMap without the preserve_order feature, so
    // routing through `Value` sorts every object.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(#[serde(with = "ext_f64")] f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_f64(*v),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].clone()).collect())
    }

    /// Numeric view of a column; non-numeric cells become `None`.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        Some(self.column(name)?.iter().map(Cell::as_f64).collect())
    }

    /// RFC 4180 with CRLF line endings.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))?;
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Io {
            path: PathBuf::from("<csv buffer>"),
            source: std::io::Error::other(e.to_string()),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line.
    pub asymptote: Option<(String, f64)>,
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Plot {
    /// SVG 1.1 line plot with fixed 640x400 geometry. Non-finite points are
    /// skipped.
    pub fn to_svg(&self) -> String {
        let (w, h, left, right, top, bottom) = (640.0, 400.0, 70.0, 20.0, 40.0, 50.0);
        let pts = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter())
                .filter(|(x, y)| x.is_finite() && y.is_finite())
        };
        let mut xs: Vec<f64> = pts().map(|p| p.0).collect();
        let mut ys: Vec<f64> = pts().map(|p| p.1).collect();
        if let Some((_, a)) = &self.asymptote {
            if a.is_finite() {
                ys.push(*a);
            }
        }
        if xs.is_empty() {
            xs.push(0.0);
        }
        if ys.is_empty() {
            ys.push(0.0);
        }
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
        let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{left:.2},{top:.2} L{left:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
            h - bottom,
            w - right,
            h - bottom
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(xv),
                h - bottom + 16.0,
                format_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 6.0,
                sy(yv) + 4.0,
                format_tick(yv)
            );
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(&self.y_label)
        );
        if let Some((label, a)) = &self.asymptote {
            if a.is_finite() {
                let _ = writeln!(
                    s,
                    r##"<path d="M{left:.2},{:.2} L{:.2},{:.2}" stroke="#777777" stroke-dasharray="6,4"/>"##,
                    sy(*a),
                    w - right,
                    sy(*a)
                );
                let _ = writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#777777">{}</text>"##,
                    w - right - 4.0,
                    sy(*a) - 4.0,
                    escape(label)
                );
            }
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let finite: Vec<_> = series.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
            if !finite.is_empty() {
                let d: Vec<String> = finite
                    .iter()
                    .enumerate()
                    .map(|(i, (x, y))| format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y)))
                    .collect();
                let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
                for (x, y) in &finite {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(*x), sy(*y));
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                left + 10.0,
                top + 14.0 * (k as f64 + 1.0),
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Everything one run writes besides the manifest.
#[derive(Clone, Debug, Default)]
pub struct Bundle {
    /// Written as `result.json`; `None` for an empty result.
    pub result: Option<serde_json::Value>,
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<(String, Plot)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    /// Sorted by name.
    pub files: Vec<ManifestEntry>,
    /// Number of CSV tables.
    pub data_files: usize,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn check_name(name: &str) -> Result<(), ReportError> {
    let ok = !name.is_empty()
        && name != MANIFEST_NAME
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(ReportError::FileName(name.to_string()))
    }
}

impl Bundle {
    /// File name to contents, without writing anything.
    pub fn render(&self) -> Result<Vec<(String, Vec<u8>)>, ReportError> {
        let mut files = Vec::new();
        if let Some(v) = &self.result {
            files.push(("result.json".to_string(), canonical_json(v)?.into_bytes()));
        }
        for (name, t) in &self.tables {
            let name = format!("{name}.csv");
            check_name(&name)?;
            files.push((name, t.to_csv()?.into_bytes()));
        }
        for (name, p) in &self.plots {
            let name = format!("{name}.svg");
            check_name(&name)?;
            files.push((name, p.to_svg().into_bytes()));
        }
        files.sort_by(|a, b| a.0.cmp(&b.0));
        if files.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ReportError::FileName("duplicate output name".into()));
        }
        Ok(files)
    }

    pub fn manifest(&self) -> Result<Manifest, ReportError> {
        Ok(manifest_of(&self.render()?))
    }
}

fn manifest_of(files: &[(String, Vec<u8>)]) -> Manifest {
    Manifest {
        files: files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                name: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
            .collect(),
        data_files: files.iter().filter(|(n, _)| n.ends_with(".csv")).count(),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the bundle and `manifest.json` into `dir`, creating it if needed.
pub fn persist(bundle: &Bundle, dir: &Path) -> Result<Manifest, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = bundle.render()?;
    for (name, bytes) in &files {
        write(&dir.join(name), bytes)?;
    }
    let manifest = manifest_of(&files);
    write(&dir.join(MANIFEST_NAME), canonical_json(&manifest)?.as_bytes())?;
    Ok(manifest)
}

/// Re-hashes the files listed in `dir/manifest.json`; returns the names whose
/// contents no longer match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, ReportError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|source| ReportError::Io { path, source })?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    for e in manifest.files {
        let p = dir.join(&e.name);
        match fs::read(&p) {
            Ok(bytes) if sha256_hex(&bytes) == e.sha256 && bytes.len() as u64 == e.bytes => {}
            _ => bad.push(e.name),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, serde::Deserialize)]
    struct Wrapped {
        #[serde(with = "ext_f64")]
        v: f64,
    }

    #[test]
    fn non_finite_round_trip() {
        for v in [f64::INFINITY, f64::NEG_INFINITY, 0.25, -3.0] {
            let s = serde_json::to_string(&Wrapped { v }).unwrap();
            let back: Wrapped = serde_json::from_str(&s).unwrap();
            assert_eq!(back.v, v);
        }
        assert_eq!(serde_json::to_string(&Wrapped { v: f64::INFINITY }).unwrap(), r#"{"v":"inf"}"#);
        assert!(serde_json::from_str::<Wrapped>(r#"{"v":"infinity"}"#).is_err());
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2.5, "c": [3]}});
        assert_eq!(
            canonical_json(&v).unwrap(),
            "{\n  \"a\": {\n    \"c\": [\n      3\n    ],\n    \"d\": 2.5\n  },\n  \"b\": 1\n}\n"
        );
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec![Cell::from("a,b"), Cell::Num(f64::INFINITY)]);
        t.push(vec![Cell::from("say \"hi\""), Cell::Empty]);
        t.push(vec![Cell::from(3usize), Cell::Num(0.1)]);
        assert_eq!(
            t.to_csv().unwrap(),
            "name,value\r\n\"a,b\",inf\r\n\"say \"\"hi\"\"\",\r\n3,0.1\r\n"
        );
    }

    #[test]
    fn empty_bundle_has_no_data_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = persist(&Bundle::default(), dir.path()).unwrap();
        assert_eq!(m.data_files, 0);
        assert!(m.files.is_empty());
        assert!(dir.path().join(MANIFEST_NAME).exists());
    }

    #[test]
    fn persist_is_deterministic_and_verifiable() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec![Cell::from(2usize), Cell::Num(0.5)]);
        let plot = Plot {
            title: "t <1>".into(),
            x_label: "N".into(),
            y_label: "F".into(),
            series: vec![Series { label: "F".into(), points: vec![(2.0, 0.5), (3.0, f64::INFINITY)] }],
            asymptote: Some(("limit".into(), 0.7)),
        };
        let b = Bundle {
            result: Some(serde_json::json!({"z": 1, "a": 2})),
            tables: vec![("table".into(), t)],
            plots: vec![("plot".into(), plot)],
        };
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let m1 = persist(&b, d1.path()).unwrap();
        let m2 = persist(&b, d2.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.data_files, 1);
        let names: Vec<_> = m1.files.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["plot.svg", "result.json", "table.csv"]);
        let a = fs::read(d1.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(a, fs::read(d2.path().join(MANIFEST_NAME)).unwrap());
        assert!(verify_manifest(d1.path()).unwrap().is_empty());
        fs::write(d1.path().join("table.csv"), "tampered").unwrap();
        assert_eq!(verify_manifest(d1.path()).unwrap(), ["table.csv"]);
        let svg = String::from_utf8(fs::read(d1.path().join("plot.svg")).unwrap()).unwrap();
        assert!(svg.contains("t &lt;1&gt;") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn bad_names_are_rejected() {
        let b = Bundle {
            tables: vec![("../x".into(), Table::new(&["a"]))],
            ..Bundle::default()
        };
        assert!(matches!(b.render(), Err(ReportError::FileName(_))));
    }
}
