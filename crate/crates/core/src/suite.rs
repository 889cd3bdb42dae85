//! Board suites on disk: `manifest.json` plus one `board-NNN.txt` minefield
//! file per board. Output is byte-deterministic for a given spec.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boardgen::{build_suite, first_reveal_count, GenError, SuiteSpec};
use crate::engine::MineField;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest {path}: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
    #[error("malformed board file {path}: {message}")]
    Board { path: PathBuf, message: String },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub file: String,
    pub first_reveal: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub spec: SuiteSpec,
    pub boards: Vec<SuiteEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Suite {
    pub manifest: SuiteManifest,
    pub boards: Vec<(String, MineField)>,
}

pub fn board_id(index: usize) -> String {
    format!("board-{index:03}")
}

/// Generates the suite and writes it under `dir` (created if missing).
pub fn write_suite(dir: &Path, spec: &SuiteSpec) -> Result<Suite, SuiteError> {
    let fields = build_suite(spec)?;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut entries = Vec::with_capacity(fields.len());
    let mut boards = Vec::with_capacity(fields.len());
    for (i, field) in fields.into_iter().enumerate() {
        let id = board_id(i);
        let file = format!("{id}.txt");
        let path = dir.join(&file);
        fs::write(&path, field.to_text()).map_err(io(&path))?;
        let first_reveal = first_reveal_count(&field, spec.first_click)?;
        entries.push(SuiteEntry { id: id.clone(), file, first_reveal });
        boards.push((id, field));
    }
    let manifest = SuiteManifest { spec: spec.clone(), boards: entries };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(Suite { manifest, boards })
}

pub fn load_suite(dir: &Path) -> Result<Suite, SuiteError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    let manifest: SuiteManifest =
        serde_json::from_str(&text).map_err(|source| SuiteError::Manifest { path: path.clone(), source })?;
    let mut boards = Vec::with_capacity(manifest.boards.len());
    for e in &manifest.boards {
        let p = dir.join(&e.file);
        let text = fs::read_to_string(&p).map_err(io(&p))?;
        let field = MineField::from_text(&text)
            .map_err(|err| SuiteError::Board { path: p.clone(), message: err.to_string() })?;
        boards.push((e.id.clone(), field));
    }
    Ok(Suite { manifest, boards })
}
