//! On-disk formats: matrix inputs, circle sample CSVs and JSON reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;
use serde_json::Value;
use subdiag_core::algebra::{BlockStructure, SubdiagonalContext};
use subdiag_core::circle::CircleFunction;
use subdiag_core::matrix::{ComplexMatrix, C64};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// `{"n": 2, "blocks": [1, 1], "data": [[[re, im], ...], ...]}`, row major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub blocks: Vec<usize>,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(a: &ComplexMatrix, blocks: &[usize]) -> Self {
        Self {
            n: a.rows(),
            blocks: blocks.to_vec(),
            data: matrix_rows(a),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(|e| FileError::Parse(e.to_string()))
    }

    /// Checks the file and builds the context and matrix it describes.
    pub fn validate(&self) -> Result<(SubdiagonalContext, ComplexMatrix), FileError> {
        let n = self.n;
        if n == 0 {
            return Err(FileError::DimensionMismatch("n must be positive".into()));
        }
        let total: usize = self.blocks.iter().sum();
        if total != n {
            return Err(FileError::DimensionMismatch(format!(
                "blocks sum to {total}, expected n = {n}"
            )));
        }
        let blocks = BlockStructure::new(self.blocks.clone())
            .map_err(|e| FileError::DimensionMismatch(e.to_string()))?;
        if self.data.len() != n || self.data.iter().any(|r| r.len() != n) {
            return Err(FileError::DimensionMismatch(format!("data is not {n} x {n}")));
        }
        let mut a = ComplexMatrix::zeros(n, n);
        for (i, row) in self.data.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(FileError::Parse(format!("entry ({i}, {j}) is not finite")));
                }
                a[(i, j)] = C64::new(re, im);
            }
        }
        Ok((SubdiagonalContext::new(blocks), a))
    }
}

pub fn matrix_rows(a: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_matrix(path: &Path) -> Result<(SubdiagonalContext, ComplexMatrix), FileError> {
    MatrixFile::parse(&read(path)?)?.validate()
}

/// One `re,im` pair per line, no header.
pub fn parse_circle_csv(text: &str) -> Result<CircleFunction, FileError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (line, record) in reader.deserialize::<(f64, f64)>().enumerate() {
        let (re, im) = record.map_err(|e| FileError::Parse(format!("line {}: {e}", line + 1)))?;
        samples.push(C64::new(re, im));
    }
    CircleFunction::new(samples).map_err(|e| FileError::Parse(e.to_string()))
}

pub fn load_circle(path: &Path) -> Result<CircleFunction, FileError> {
    parse_circle_csv(&read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    /// Non-finite margins are written as `null` and read back as `-inf`.
    #[serde(serialize_with = "write_margins", deserialize_with = "read_margins")]
    pub margins: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ReportFile {
    pub fn new(command: &str, inputs: Value, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            inputs,
            results: Value::Object(Default::default()),
            margins: BTreeMap::new(),
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
        self.serialize(&mut ser).expect("report serializes");
        out.push(b'\n');
        String::from_utf8(out).expect("utf-8")
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(|e| FileError::Parse(e.to_string()))
    }

    /// Writes to `path`, or to stdout when `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<(), FileError> {
        let text = self.to_json();
        match path {
            Some(p) => fs::write(p, text).map_err(|source| FileError::Write {
                path: p.to_path_buf(),
                source,
            }),
            None => io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| FileError::Write {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }
}

fn write_margins<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    let v: BTreeMap<&String, Option<f64>> = m
        .iter()
        .map(|(k, &x)| (k, x.is_finite().then_some(x)))
        .collect();
    v.serialize(s)
}

fn read_margins<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    let v = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(v.into_iter()
        .map(|(k, x)| (k, x.unwrap_or(f64::NEG_INFINITY)))
        .collect())
}

/// Pretty JSON with every float printed to 17 significant digits.
#[derive(Default)]
pub struct FullPrecision {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
