//! Run directory writer: every artifact goes through [`RunWriter`], which
//! records its SHA-256 for the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const SCHEMA_NAME: &str = "schema.json";

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub kind: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, Serialize)]
struct CsvSchema {
    file: String,
    columns: Vec<ColumnDoc>,
}

#[derive(Clone, Debug, Serialize)]
struct ColumnDoc {
    name: String,
    description: String,
}

pub struct RunWriter {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
    schemas: Vec<CsvSchema>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            schemas: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, kind: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.push(ManifestEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            kind: kind.to_string(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, kind: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, kind, &bytes)
    }

    /// One CSV file with documented columns; an empty series is an error
    /// and writes nothing.
    pub fn emit_csv(&mut self, name: &str, columns: &[(&str, &str)], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        if rows.is_empty() {
            return Err(CliError::EmptySeries(name.to_string()));
        }
        let mut text = columns.iter().map(|c| c.0).collect::<Vec<_>>().join(",");
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(text, "{}", line.join(","));
        }
        self.schemas.push(CsvSchema {
            file: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, d)| ColumnDoc { name: n.to_string(), description: d.to_string() })
                .collect(),
        });
        self.write(name, "csv", text.as_bytes())
    }

    /// Writes the schema sidecar (if any CSV was emitted) and the manifest,
    /// sorted by path.
    pub fn finish(mut self) -> Result<Manifest, CliError> {
        if !self.schemas.is_empty() {
            let schemas = std::mem::take(&mut self.schemas);
            self.write_json(SCHEMA_NAME, "schema", &schemas)?;
        }
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest { files: self.files.clone() };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.dir.join(MANIFEST_NAME);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

pub const ENERGY_COLUMNS: &[(&str, &str)] = &[
    ("t", "time"),
    ("V", "1/2 |u|_H^2 + nu int |u|_V^2 - int (u, f), trapezoid in time"),
];

pub const DIST_COLUMNS: &[(&str, &str)] = &[
    ("N", "taper threshold"),
    ("dist_w", "Hausdorff semidistance to the reference cloud in the H_{-1/2} metric"),
];

pub const DIAGNOSTIC_COLUMNS: &[(&str, &str)] = &[
    ("t", "time"),
    ("norm_H", "L2 norm"),
    ("norm_V", "H_{1/2} norm"),
    ("norm_L4", "L4 norm by collocation quadrature"),
    ("norm_H38", "H_{3/8} norm"),
    ("FN", "modification factor F_N(u)"),
];
