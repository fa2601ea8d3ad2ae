//! Record exchange through files in a run-scoped temporary directory.
//!
//! One record per line, UTF-8, `key=value` pairs in schema order separated by
//! single spaces, reals with 9 significant digits. Next to each pipe file a
//! `<pipe>.seq` sidecar holds the decimal count of committed records; a reader
//! only consumes lines the sidecar has announced.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::ExchangeError;
use crate::format::format_real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Int,
    Real,
    Text,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl FieldValue {
    fn kind(&self) -> FieldKind {
        match self {
            FieldValue::Int(_) => FieldKind::Int,
            FieldValue::Real(_) => FieldKind::Real,
            FieldValue::Text(_) => FieldKind::Text,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipeSchema {
    pub id: String,
    pub fields: Vec<(String, FieldKind)>,
}

impl PipeSchema {
    pub fn new(id: impl Into<String>, fields: &[(&str, FieldKind)]) -> Self {
        Self {
            id: id.into(),
            fields: fields.iter().map(|(n, k)| ((*n).to_owned(), *k)).collect(),
        }
    }

    fn violation(&self, reason: impl Into<String>) -> ExchangeError {
        ExchangeError::SchemaViolation {
            schema: self.id.clone(),
            reason: reason.into(),
        }
    }

    pub fn encode(&self, record: &PipeRecord) -> Result<String, ExchangeError> {
        if record.fields.len() != self.fields.len() {
            return Err(self.violation(format!(
                "expected {} fields, got {}",
                self.fields.len(),
                record.fields.len()
            )));
        }
        let mut line = String::new();
        for ((name, kind), (key, value)) in self.fields.iter().zip(&record.fields) {
            if name != key {
                return Err(self.violation(format!("expected field `{name}`, got `{key}`")));
            }
            if *kind != value.kind() {
                return Err(self.violation(format!("field `{name}` has the wrong type")));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(key);
            line.push('=');
            match value {
                FieldValue::Int(n) => line.push_str(&n.to_string()),
                FieldValue::Real(x) => line.push_str(&format_real(*x)),
                FieldValue::Text(s) => {
                    if s.is_empty() || s.contains([' ', '=', '\n', '\r']) {
                        return Err(self.violation(format!("text in `{name}` is not a bare token")));
                    }
                    line.push_str(s);
                }
            }
        }
        line.push('\n');
        Ok(line)
    }

    pub fn decode(&self, line: &str) -> Result<PipeRecord, ExchangeError> {
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.len() != self.fields.len() {
            return Err(self.violation(format!("line has {} fields", tokens.len())));
        }
        let mut fields = Vec::with_capacity(tokens.len());
        for ((name, kind), tok) in self.fields.iter().zip(tokens) {
            let (key, raw) = tok
                .split_once('=')
                .ok_or_else(|| self.violation(format!("malformed token `{tok}`")))?;
            if key != name {
                return Err(self.violation(format!("expected field `{name}`, got `{key}`")));
            }
            let bad = |reason: String| {
                self.violation(format!("cannot parse `{raw}` for `{name}`: {reason}"))
            };
            let value = match kind {
                FieldKind::Int => FieldValue::Int(raw.parse().map_err(|e| bad(format!("{e}")))?),
                FieldKind::Real => {
                    FieldValue::Real(raw.parse().map_err(|e| bad(format!("{e}")))?)
                }
                FieldKind::Text => FieldValue::Text(raw.to_owned()),
            };
            fields.push((key.to_owned(), value));
        }
        Ok(PipeRecord { fields })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipeRecord {
    pub fields: Vec<(String, FieldValue)>,
}

impl PipeRecord {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn int(mut self, key: &str, v: i64) -> Self {
        self.fields.push((key.to_owned(), FieldValue::Int(v)));
        self
    }

    pub fn real(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.to_owned(), FieldValue::Real(v)));
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.to_owned(), FieldValue::Text(v.to_owned())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&FieldValue> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Default for PipeRecord {
    fn default() -> Self {
        Self::new()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ExchangeError {
    ExchangeError::IoFailure {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// `<out_dir>/pipes/<run_id>/`, wiped and recreated when opened so no stale
/// file from an earlier run can be mistaken for fresh data.
#[derive(Clone, Debug)]
pub struct PipeDir {
    root: PathBuf,
}

impl PipeDir {
    pub fn create(out_dir: &Path, run_id: &str) -> Result<Self, ExchangeError> {
        let root = out_dir.join("pipes").join(run_id);
        if root.exists() {
            fs::remove_dir_all(&root).map_err(|e| io_err(&root, e))?;
        }
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn pipe(&self, name: &str, schema: PipeSchema) -> Result<FilePipe, ExchangeError> {
        let path = self.root.join(format!("{name}.pipe"));
        let pipe = FilePipe { path, schema };
        File::create(&pipe.path).map_err(|e| io_err(&pipe.path, e))?;
        write_seq(&pipe.seq_path(), 0)?;
        Ok(pipe)
    }
}

#[derive(Clone, Debug)]
pub struct FilePipe {
    path: PathBuf,
    schema: PipeSchema,
}

impl FilePipe {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn schema(&self) -> &PipeSchema {
        &self.schema
    }

    pub fn seq_path(&self) -> PathBuf {
        let mut name = self.path.as_os_str().to_owned();
        name.push(".seq");
        PathBuf::from(name)
    }

    pub fn writer(&self) -> PipeWriter {
        PipeWriter {
            pipe: self.clone(),
            committed: read_seq(&self.seq_path()).unwrap_or(0),
        }
    }

    pub fn reader(&self) -> PipeReader {
        PipeReader {
            pipe: self.clone(),
            offset: 0,
            consumed: 0,
        }
    }
}

fn write_seq(path: &Path, count: u64) -> Result<(), ExchangeError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, count.to_string()).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn read_seq(path: &Path) -> Result<u64, ExchangeError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.trim().parse().map_err(|_| ExchangeError::IoFailure {
        path: path.display().to_string(),
        reason: format!("sequence file holds `{}`", text.trim()),
    })
}

pub struct PipeWriter {
    pipe: FilePipe,
    committed: u64,
}

impl PipeWriter {
    /// Appends one full line, then publishes the new count in the sidecar.
    pub fn write(&mut self, record: &PipeRecord) -> Result<u64, ExchangeError> {
        let line = self.pipe.schema.encode(record)?;
        let path = &self.pipe.path;
        let mut file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| io_err(path, e))?;
        file.write_all(line.as_bytes())
            .map_err(|e| io_err(path, e))?;
        self.committed += 1;
        write_seq(&self.pipe.seq_path(), self.committed)?;
        Ok(self.committed)
    }
}

pub struct PipeReader {
    pipe: FilePipe,
    offset: u64,
    consumed: u64,
}

impl PipeReader {
    /// Records committed since the previous poll, in write order.
    pub fn poll(&mut self) -> Result<Vec<PipeRecord>, ExchangeError> {
        let announced = read_seq(&self.pipe.seq_path())?;
        if announced <= self.consumed {
            return Ok(Vec::new());
        }
        let path = &self.pipe.path;
        let mut file = File::open(path).map_err(|e| io_err(path, e))?;
        file.seek(SeekFrom::Start(self.offset))
            .map_err(|e| io_err(path, e))?;
        let mut text = String::new();
        file.read_to_string(&mut text)
            .map_err(|e| io_err(path, e))?;
        let wanted = (announced - self.consumed) as usize;
        let mut out = Vec::with_capacity(wanted);
        for line in text.split_inclusive('\n').take(wanted) {
            let Some(body) = line.strip_suffix('\n') else {
                break;
            };
            out.push(self.pipe.schema.decode(body)?);
            self.offset += line.len() as u64;
            self.consumed += 1;
        }
        Ok(out)
    }
}

/// Parses a whole pipe file without any reader state.
pub fn read_all(path: &Path, schema: &PipeSchema) -> Result<Vec<PipeRecord>, ExchangeError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    text.lines().map(|l| schema.decode(l)).collect()
}
