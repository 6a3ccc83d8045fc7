//! Run directories, CSV/JSON writers and the hashed manifest.
//!
//! Data files carry no timestamps and are written in a fixed order, so an
//! identical configuration reproduces identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::GridField;

pub const MANIFEST: &str = "manifest.json";

/// `x,u` (1D) or `x,y,u` (2D) rows in grid order, 17 significant digits.
pub fn solution_csv(field: &GridField) -> String {
    let grid = field.grid();
    let header: &[&str] = if grid.dim() == 1 {
        &["x", "u"]
    } else {
        &["x", "y", "u"]
    };
    table_csv(
        header,
        field.values().iter().enumerate().map(|(i, &u)| {
            let mut row = grid.coords(i);
            row.push(u);
            row
        }),
    )
}

/// Header line plus one line per row, values as `{:.16e}`, LF endings.
pub fn table_csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn write_solution_csv(field: &GridField, path: &Path) -> Result<()> {
    fs::write(path, solution_csv(field))?;
    Ok(())
}

pub fn write_report_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    fs::write(path, json_bytes(report)?)?;
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?)
    }

    /// Paths whose current contents no longer match their recorded hash.
    pub fn mismatches(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.files {
            let bytes = fs::read(dir.join(&e.path))?;
            if sha256_hex(&bytes) != e.sha256 || bytes.len() as u64 != e.bytes {
                bad.push(e.path.clone());
            }
        }
        Ok(bad)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A fresh output directory that records everything written into it.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: BTreeMap<String, ManifestEntry>,
}

impl RunDir {
    /// Creates `root`; refuses a directory that already has contents.
    pub fn create(root: &Path) -> Result<Self> {
        if root.exists() && fs::read_dir(root)?.next().is_some() {
            return Err(Error::Config(format!(
                "output directory {} is not empty; runs never overwrite",
                root.display()
            )));
        }
        fs::create_dir_all(root)?;
        Ok(RunDir {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to the relative path `rel` (slash separated).
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.insert(
            rel.to_string(),
            ManifestEntry {
                path: rel.to_string(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(path)
    }

    pub fn write_csv(&mut self, rel: &str, field: &GridField) -> Result<PathBuf> {
        self.write(rel, solution_csv(field).as_bytes())
    }

    pub fn write_table<I>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        self.write(rel, table_csv(header, rows).as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        self.write(rel, &json_bytes(value)?)
    }

    /// Writes the manifest of every file so far, sorted by path.
    pub fn finish(self) -> Result<Manifest> {
        let manifest = Manifest {
            files: self.files.into_values().collect(),
        };
        fs::write(self.root.join(MANIFEST), json_bytes(&manifest)?)?;
        Ok(manifest)
    }
}
