//! File formats.
//!
//! All binary formats are little-endian with no padding and store 8-byte
//! IEEE-754 doubles.
//!
//! Feature file (`FPF1`):
//! ```text
//! magic "FPF1" | version u32 | n u32 | d u32 | dtype u8 (0 = f64) | n*d f64, row-major
//! ```
//! Label file (`FPL1`):
//! ```text
//! magic "FPL1" | version u32 | n u32 | n u32 labels
//! ```
//! Model file (`FPPM`):
//! ```text
//! magic "FPPM" | version u32 | D u32 | T u32 | N u32 | mean D f64 | eigenvalues T f64 | directions T*D f64
//! ```
//! Reports are written either as `key = value` lines or as JSON.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::{EvalReport, SweepRow};
use crate::isotropy::IsotropyReport;
use crate::linalg::Matrix;
use crate::postprocess::{PostprocessModel, SpectrumSummary};

pub const FEATURE_MAGIC: &[u8; 4] = b"FPF1";
pub const LABEL_MAGIC: &[u8; 4] = b"FPL1";
pub const MODEL_MAGIC: &[u8; 4] = b"FPPM";
pub const FORMAT_VERSION: u32 = 1;
const DTYPE_F64: u8 = 0;
const FEATURE_HEADER_LEN: usize = 17;
const MODEL_HEADER_LEN: usize = 20;
/// Orthonormality tolerance applied when a model is read back.
pub const MODEL_READ_TOL: f64 = 1e-6;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::InvalidArgument(format!("{what} {x} does not fit in u32")))
}

/// Cursor over a byte slice that reports truncation against a precomputed
/// expected length.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn u32(&mut self) -> u32 {
        let v = u32::from_le_bytes(
            self.bytes[self.pos..self.pos + 4]
                .try_into()
                .expect("4 bytes"),
        );
        self.pos += 4;
        v
    }

    fn u8(&mut self) -> u8 {
        let v = self.bytes[self.pos];
        self.pos += 1;
        v
    }

    fn f64(&mut self) -> f64 {
        let v = f64::from_le_bytes(
            self.bytes[self.pos..self.pos + 8]
                .try_into()
                .expect("8 bytes"),
        );
        self.pos += 8;
        v
    }

    fn f64s(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn check_magic(bytes: &[u8], magic: &[u8; 4], header_len: usize) -> Result<()> {
    if bytes.len() >= 4 && &bytes[..4] != magic {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found: String::from_utf8_lossy(&bytes[..4]).into_owned(),
        });
    }
    if bytes.len() < header_len {
        return Err(Error::Truncated {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    Ok(())
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: v,
            supported: FORMAT_VERSION,
        });
    }
    Ok(())
}

fn check_length(actual: usize, expected: usize) -> Result<()> {
    if actual < expected {
        Err(Error::Truncated { expected, actual })
    } else if actual > expected {
        Err(Error::TrailingBytes { expected, actual })
    } else {
        Ok(())
    }
}

pub fn encode_features(f: &Matrix<f64>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(FEATURE_HEADER_LEN + f.data().len() * 8);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(f.rows(), "row count")?.to_le_bytes());
    out.extend_from_slice(&to_u32(f.cols(), "column count")?.to_le_bytes());
    out.push(DTYPE_F64);
    for x in f.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_features(bytes: &[u8]) -> Result<Matrix<f64>> {
    check_magic(bytes, FEATURE_MAGIC, FEATURE_HEADER_LEN)?;
    let mut r = Reader::new(bytes);
    r.pos = 4;
    check_version(r.u32())?;
    let n = r.u32() as usize;
    let d = r.u32() as usize;
    let dtype = r.u8();
    if dtype != DTYPE_F64 {
        return Err(Error::UnsupportedDtype(dtype));
    }
    check_length(bytes.len() - FEATURE_HEADER_LEN, n * d * 8)?;
    let data = r.f64s(n * d);
    if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / d,
            col: pos % d,
        });
    }
    Matrix::new(n, d, data)
}

pub fn write_features(path: impl AsRef<Path>, f: &Matrix<f64>) -> Result<()> {
    write_file(path.as_ref(), &encode_features(f)?)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Matrix<f64>> {
    decode_features(&read_file(path.as_ref())?)
}

pub fn encode_labels(labels: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(12 + labels.len() * 4);
    out.extend_from_slice(LABEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(labels.len(), "label count")?.to_le_bytes());
    for &l in labels {
        out.extend_from_slice(&to_u32(l, "label")?.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    check_magic(bytes, LABEL_MAGIC, 12)?;
    let mut r = Reader::new(bytes);
    r.pos = 4;
    check_version(r.u32())?;
    let n = r.u32() as usize;
    check_length(bytes.len() - 12, n * 4)?;
    Ok((0..n).map(|_| r.u32() as usize).collect())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    write_file(path.as_ref(), &encode_labels(labels)?)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    decode_labels(&read_file(path.as_ref())?)
}

pub fn encode_model(m: &PostprocessModel<f64>) -> Result<Vec<u8>> {
    let (d, t) = (m.dim(), m.t());
    let mut out = Vec::with_capacity(MODEL_HEADER_LEN + (d + t + t * d) * 8);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(d, "dimension")?.to_le_bytes());
    out.extend_from_slice(&to_u32(t, "t")?.to_le_bytes());
    out.extend_from_slice(&to_u32(m.source_count(), "source count")?.to_le_bytes());
    let floats = m
        .mean()
        .iter()
        .chain(m.eigenvalues())
        .chain(m.directions().iter().flatten());
    for x in floats {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

/// Decodes a model and re-validates its invariants (orthonormality within
/// [`MODEL_READ_TOL`], descending non-negative eigenvalues).
pub fn decode_model(bytes: &[u8]) -> Result<PostprocessModel<f64>> {
    check_magic(bytes, MODEL_MAGIC, MODEL_HEADER_LEN)?;
    let mut r = Reader::new(bytes);
    r.pos = 4;
    check_version(r.u32())?;
    let d = r.u32() as usize;
    let t = r.u32() as usize;
    let n = r.u32() as usize;
    check_length(bytes.len() - MODEL_HEADER_LEN, (d + t + t * d) * 8)?;
    let mean = r.f64s(d);
    let eigenvalues = r.f64s(t);
    let directions = (0..t).map(|_| r.f64s(d)).collect();
    PostprocessModel::new(mean, eigenvalues, directions, n, MODEL_READ_TOL)
}

pub fn write_model(path: impl AsRef<Path>, m: &PostprocessModel<f64>) -> Result<()> {
    write_file(path.as_ref(), &encode_model(m)?)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<PostprocessModel<f64>> {
    decode_model(&read_file(path.as_ref())?)
}

/// A CSV file split into numeric features and an optional label column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub features: Matrix<f64>,
    pub header: Option<Vec<String>>,
    /// Dense ids in first-appearance order.
    pub labels: Option<Vec<usize>>,
    /// Original label strings, indexed by id.
    pub label_names: Vec<String>,
}

/// Parses comma-separated numeric text. `label_column` names a header field
/// or, failing that, a zero-based column index.
pub fn parse_csv(text: &str, has_header: bool, label_column: Option<&str>) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header: Option<Vec<String>> = if has_header {
        match records.next() {
            Some(rec) => Some(
                rec.map_err(|e| Error::Csv(e.to_string()))?
                    .iter()
                    .map(|s| s.trim().to_string())
                    .collect(),
            ),
            None => return Err(Error::EmptyInput),
        }
    } else {
        None
    };

    let label_idx = match label_column {
        None => None,
        Some(name) => {
            let by_name = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name));
            match by_name.or_else(|| name.parse::<usize>().ok()) {
                Some(i) => Some(i),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown label column {name:?}"
                    )))
                }
            }
        }
    };

    let mut width: Option<usize> = header.as_ref().map(|h| h.len());
    let mut data = Vec::new();
    let mut rows = 0;
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut label_names = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: rec.len(),
            });
        }
        if label_idx.is_some_and(|i| i >= expected) {
            return Err(Error::InvalidArgument(format!(
                "label column index {} out of range for {expected} fields",
                label_idx.unwrap_or_default()
            )));
        }
        for (col, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if Some(col) == label_idx {
                let next = label_names.len();
                let id = *ids.entry(cell.to_string()).or_insert_with(|| {
                    label_names.push(cell.to_string());
                    next
                });
                labels.push(id);
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                line,
                column: col + 1,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite { row: rows, col });
            }
            data.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let cols = width.unwrap_or(0) - usize::from(label_idx.is_some());
    Ok(CsvData {
        features: Matrix::new(rows, cols, data)?,
        header,
        labels: label_idx.map(|_| labels),
        label_names,
    })
}

pub fn read_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<&str>,
) -> Result<CsvData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header, label_column)
}

/// Report serialization flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `key = value` lines.
    Text,
    /// JSON.
    Machine,
}

/// Reports with a flat `key = value` rendering.
pub trait TextReport: Sized + serde::Serialize + serde::de::DeserializeOwned {
    fn to_pairs(&self) -> Vec<(&'static str, String)>;
    fn from_pairs(map: &KeyValues) -> Result<Self>;

    fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn from_text(text: &str) -> Result<Self> {
        Self::from_pairs(&KeyValues::parse(text)?)
    }

    fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Machine => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn parse(text: &str, format: ReportFormat) -> Result<Self> {
        match format {
            ReportFormat::Text => Self::from_text(text),
            ReportFormat::Machine => serde_json::from_str(text).map_err(|e| Error::ReportParse {
                line: e.line(),
                message: e.to_string(),
            }),
        }
    }
}

/// Parsed `key = value` document.
#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| Error::ReportParse {
                line: line_no,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            if entries
                .insert(k.trim().to_string(), (line_no, v.to_string()))
                .is_some()
            {
                return Err(Error::ReportParse {
                    line: line_no,
                    message: format!("duplicate key {k:?}"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn optional<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse().map(Some).map_err(|_| Error::ReportParse {
                line: *line,
                message: format!("cannot parse {key} value {raw:?}"),
            }),
        }
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<V> {
        self.optional(key)?.ok_or_else(|| Error::ReportParse {
            line: 0,
            message: format!("missing key {key:?}"),
        })
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((_, raw)) if raw.is_empty() => Ok(Some(Vec::new())),
            Some((line, raw)) => raw
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| Error::ReportParse {
                    line: *line,
                    message: format!("cannot parse {key} list {raw:?}"),
                }),
        }
    }
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl TextReport for IsotropyReport {
    fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("dim", self.dim.to_string()),
            ("h_min", self.h_min.to_string()),
            ("h_max", self.h_max.to_string()),
            ("log_h_min", self.log_h_min.to_string()),
            ("log_h_max", self.log_h_max.to_string()),
            ("m_empirical", self.m_empirical.to_string()),
            ("m_first_order", self.m_first_order.to_string()),
            ("m_second_order", self.m_second_order.to_string()),
            ("sigma_min", self.sigma_min.to_string()),
            ("sigma_max", self.sigma_max.to_string()),
            ("ones_proj_norm", self.ones_proj_norm.to_string()),
        ]
    }

    fn from_pairs(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            n: kv.get("n")?,
            dim: kv.get("dim")?,
            h_min: kv.get("h_min")?,
            h_max: kv.get("h_max")?,
            log_h_min: kv.get("log_h_min")?,
            log_h_max: kv.get("log_h_max")?,
            m_empirical: kv.get("m_empirical")?,
            m_first_order: kv.get("m_first_order")?,
            m_second_order: kv.get("m_second_order")?,
            sigma_min: kv.get("sigma_min")?,
            sigma_max: kv.get("sigma_max")?,
            ones_proj_norm: kv.get("ones_proj_norm")?,
        })
    }
}

impl TextReport for EvalReport {
    fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("evaluator", self.evaluator.to_string()),
            ("k", self.k.to_string()),
            ("metric", self.metric.to_string()),
            ("fit_on", self.fit_on.to_string()),
            ("l2_normalize", self.l2_normalize.to_string()),
            ("seed", self.seed.to_string()),
            ("test_fraction", self.test_fraction.to_string()),
            ("n_train", self.n_train.to_string()),
            ("n_test", self.n_test.to_string()),
            ("t_used", self.t_used.to_string()),
            ("pca_dim", self.pca_dim.to_string()),
            ("accuracy_before", self.accuracy_before.to_string()),
            ("accuracy_after", self.accuracy_after.to_string()),
        ];
        if let Some(x) = self.threshold_before {
            out.push(("threshold_before", x.to_string()));
        }
        if let Some(x) = self.threshold_after {
            out.push(("threshold_after", x.to_string()));
        }
        if let Some(xs) = &self.per_class_before {
            out.push(("per_class_before", join(xs)));
        }
        if let Some(xs) = &self.per_class_after {
            out.push(("per_class_after", join(xs)));
        }
        out
    }

    fn from_pairs(kv: &KeyValues) -> Result<Self> {
        let parse_enum = |key: &str| -> Result<String> { kv.get::<String>(key) };
        Ok(Self {
            evaluator: parse_enum("evaluator")?.parse()?,
            k: kv.get("k")?,
            metric: parse_enum("metric")?.parse()?,
            fit_on: parse_enum("fit_on")?.parse()?,
            l2_normalize: parse_enum("l2_normalize")?.parse()?,
            seed: kv.get("seed")?,
            test_fraction: kv.get("test_fraction")?,
            n_train: kv.get("n_train")?,
            n_test: kv.get("n_test")?,
            t_used: kv.get("t_used")?,
            pca_dim: kv.get("pca_dim")?,
            accuracy_before: kv.get("accuracy_before")?,
            accuracy_after: kv.get("accuracy_after")?,
            threshold_before: kv.optional("threshold_before")?,
            threshold_after: kv.optional("threshold_after")?,
            per_class_before: kv.list("per_class_before")?,
            per_class_after: kv.list("per_class_after")?,
        })
    }
}

impl TextReport for SpectrumSummary {
    fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("dim", self.dim.to_string()),
            ("mean_norm", self.mean_norm.to_string()),
            ("mean_row_norm", self.mean_row_norm.to_string()),
            ("norm_ratio", self.norm_ratio.to_string()),
            ("total_energy", self.total_energy.to_string()),
            ("eigenvalues", join(&self.eigenvalues)),
            ("energy_fractions", join(&self.energy_fractions)),
        ]
    }

    fn from_pairs(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            n: kv.get("n")?,
            dim: kv.get("dim")?,
            mean_norm: kv.get("mean_norm")?,
            mean_row_norm: kv.get("mean_row_norm")?,
            norm_ratio: kv.get("norm_ratio")?,
            total_energy: kv.get("total_energy")?,
            eigenvalues: kv.list("eigenvalues")?.unwrap_or_default(),
            energy_fractions: kv.list("energy_fractions")?.unwrap_or_default(),
        })
    }
}

pub const SWEEP_HEADER: &str =
    "t,pca_dim,accuracy_before,accuracy_after,m_empirical_before,m_empirical_after";

/// Comma-delimited sweep table with a header row.
pub fn render_sweep(rows: &[SweepRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Machine => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut out = String::from(SWEEP_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.t,
                    r.pca_dim,
                    r.accuracy_before,
                    r.accuracy_after,
                    r.m_empirical_before,
                    r.m_empirical_after
                ));
            }
            out
        }
    }
}

pub fn parse_sweep(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SWEEP_HEADER => {}
        _ => {
            return Err(Error::ReportParse {
                line: 1,
                message: "missing sweep header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || Error::ReportParse {
                line: i + 1,
                message: format!("malformed sweep row {l:?}"),
            };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(SweepRow {
                t: f[0].parse().map_err(|_| bad())?,
                pca_dim: f[1].parse().map_err(|_| bad())?,
                accuracy_before: num(f[2])?,
                accuracy_after: num(f[3])?,
                m_empirical_before: num(f[4])?,
                m_empirical_after: num(f[5])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_header_layout() {
        let f = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = encode_features(&f).unwrap();
        assert_eq!(&b[..4], b"FPF1");
        assert_eq!(&b[4..8], &1u32.to_le_bytes());
        assert_eq!(&b[8..12], &1u32.to_le_bytes());
        assert_eq!(&b[12..16], &2u32.to_le_bytes());
        assert_eq!(b[16], 0);
        assert_eq!(&b[17..25], &1.0f64.to_le_bytes());
        assert_eq!(b.len(), 17 + 16);
    }

    #[test]
    fn feature_errors() {
        let f = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let good = encode_features(&f).unwrap();

        let mut bad = good.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_features(&bad), Err(Error::BadMagic { .. })));

        match decode_features(&good[..good.len() - 3]) {
            Err(Error::Truncated {
                expected: 32,
                actual: 29,
            }) => {}
            other => panic!("{other:?}"),
        }
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(
            decode_features(&long),
            Err(Error::TrailingBytes { .. })
        ));

        let mut v2 = good.clone();
        v2[4] = 2;
        assert!(matches!(
            decode_features(&v2),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));

        let mut dt = good.clone();
        dt[16] = 1;
        assert!(matches!(
            decode_features(&dt),
            Err(Error::UnsupportedDtype(1))
        ));

        let mut nan = good.clone();
        nan[17 + 3 * 8..17 + 4 * 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(
            decode_features(&nan),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));

        assert!(matches!(
            decode_features(b"FPF"),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn model_header_layout_and_errors() {
        let m = PostprocessModel::new(vec![1.0, 2.0], vec![3.0], vec![vec![0.0, 1.0]], 7, 1e-9)
            .unwrap();
        let b = encode_model(&m).unwrap();
        assert_eq!(&b[..4], b"FPPM");
        assert_eq!(&b[8..12], &2u32.to_le_bytes());
        assert_eq!(&b[12..16], &1u32.to_le_bytes());
        assert_eq!(&b[16..20], &7u32.to_le_bytes());
        assert_eq!(b.len(), 20 + (2 + 1 + 2) * 8);
        assert_eq!(decode_model(&b).unwrap(), m);

        let mut v = b.clone();
        v[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode_model(&v),
            Err(Error::UnsupportedVersion { .. })
        ));
    }

    #[test]
    fn tampered_eigenvalue_order_rejected() {
        let m = PostprocessModel::new(
            vec![0.0, 0.0],
            vec![3.0, 1.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            5,
            1e-9,
        )
        .unwrap();
        let mut b = encode_model(&m).unwrap();
        // swap the two eigenvalues
        let off = 20 + 2 * 8;
        let (a, c) = (b[off..off + 8].to_vec(), b[off + 8..off + 16].to_vec());
        b[off..off + 8].copy_from_slice(&c);
        b[off + 8..off + 16].copy_from_slice(&a);
        assert!(matches!(decode_model(&b), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn labels_round_trip_and_magic() {
        let l = vec![0, 3, 1, 1];
        assert_eq!(decode_labels(&encode_labels(&l).unwrap()).unwrap(), l);
        assert!(matches!(
            decode_labels(b"FPF1\x01\0\0\0\0\0\0\0"),
            Err(Error::BadMagic { .. })
        ));
    }

    #[test]
    fn csv_examples() {
        let c = parse_csv("1,2\n3,4", false, None).unwrap();
        assert_eq!(
            c.features,
            Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
        );
        assert!(c.labels.is_none());

        let c = parse_csv("a,b,y\n1,2,cat\n3,4,dog", true, Some("y")).unwrap();
        assert_eq!(
            c.features,
            Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
        );
        assert_eq!(c.labels, Some(vec![0, 1]));
        assert_eq!(c.label_names, vec!["cat", "dog"]);

        let c = parse_csv("dog,1\ncat,2\ndog,3\n", false, Some("0")).unwrap();
        assert_eq!(c.labels, Some(vec![0, 1, 0]));
        assert_eq!(c.features.cols(), 1);
    }

    #[test]
    fn csv_errors() {
        match parse_csv("1,2\n3", false, None) {
            Err(Error::RaggedRow {
                line: 2,
                expected: 2,
                found: 1,
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_csv("1,2\n3,x", false, None) {
            Err(Error::NonNumeric {
                line: 2, column: 2, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("", false, None), Err(Error::EmptyInput)));
        assert!(parse_csv("a,b\n1,2", true, Some("z")).is_err());
    }

    #[test]
    fn key_values_reject_garbage() {
        assert!(KeyValues::parse("no equals here").is_err());
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        assert!(IsotropyReport::from_text("n = 1\n").is_err());
    }
}
