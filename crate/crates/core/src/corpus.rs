//! Corpus ingestion.
//!
//! A corpus is an ordered set of source units loaded either from a
//! directory tree of `.java` files or from a line-delimited record file
//! where each line carries `{"id": ..., "code": ...}`. Units are kept in
//! sorted-by-id order so every downstream sampling step is reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    FunctionSnippet,
    FullFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub id: String,
    pub code: String,
    pub kind: UnitKind,
}

/// Where a corpus came from; mirrored on output so a poisoned corpus can
/// be written in the same shape it was read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CorpusOrigin {
    Directory { path: PathBuf },
    RecordStream { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub units: Vec<SourceUnit>,
    pub origin: CorpusOrigin,
    /// Records dropped during loading because they were malformed.
    pub skipped_records: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, id: &str) -> Option<&SourceUnit> {
        self.units.iter().find(|u| u.id == id)
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    code: String,
}

/// Load a corpus from a directory of `.java` files or a record stream.
///
/// Directory units get `full-file` kind and are keyed by their path
/// relative to the root; record-stream units get `function-snippet` kind.
/// Units are sorted by id; duplicate ids and empty code are skipped and
/// counted.
pub fn load_corpus(origin: &Path) -> Result<Corpus> {
    if origin.is_dir() {
        load_directory(origin)
    } else if origin.is_file() {
        load_records(origin)
    } else {
        Err(Error::io(
            origin,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

fn load_directory(root: &Path) -> Result<Corpus> {
    let mut units = Vec::new();
    let mut skipped = 0usize;
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            Error::io(
                root,
                e.into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("walk error")),
            )
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("java") {
            continue;
        }
        let code = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if code.trim().is_empty() {
            skipped += 1;
            continue;
        }
        let id = path
            .strip_prefix(root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        units.push(SourceUnit {
            id,
            code,
            kind: UnitKind::FullFile,
        });
    }
    finish(units, CorpusOrigin::Directory { path: root.to_path_buf() }, skipped)
}

fn load_records(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut units = Vec::new();
    let mut skipped = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RecordLine>(line) {
            Ok(rec) if !rec.code.trim().is_empty() && !rec.id.is_empty() => {
                units.push(SourceUnit {
                    id: rec.id,
                    code: rec.code,
                    kind: UnitKind::FunctionSnippet,
                });
            }
            _ => skipped += 1,
        }
    }
    finish(
        units,
        CorpusOrigin::RecordStream { path: path.to_path_buf() },
        skipped,
    )
}

fn finish(mut units: Vec<SourceUnit>, origin: CorpusOrigin, mut skipped: usize) -> Result<Corpus> {
    units.sort_by(|a, b| a.id.cmp(&b.id));
    let before = units.len();
    units.dedup_by(|a, b| a.id == b.id);
    skipped += before - units.len();
    Ok(Corpus {
        units,
        origin,
        skipped_records: skipped,
    })
}

/// Write a corpus back out in the shape of `origin`.
pub fn save_corpus(corpus: &Corpus, dest: &Path) -> Result<()> {
    match &corpus.origin {
        CorpusOrigin::Directory { .. } => {
            for unit in &corpus.units {
                let path = dest.join(&unit.id);
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                fs::write(&path, &unit.code).map_err(|e| Error::io(&path, e))?;
            }
            Ok(())
        }
        CorpusOrigin::RecordStream { .. } => {
            let mut out = String::new();
            for unit in &corpus.units {
                let rec = RecordLine {
                    id: unit.id.clone(),
                    code: unit.code.clone(),
                };
                out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
                out.push('\n');
            }
            if let Some(parent) = dest.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
            }
            fs::write(dest, out).map_err(|e| Error::io(dest, e))
        }
    }
}
