//! Read-only listings of board suites and stored session logs.

use std::fs;
use std::path::{Path, PathBuf};

use minebench::session::SessionLog;
use minebench::suite::{load_suite, Suite, SuiteError, MANIFEST};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub mines: usize,
    pub boards: usize,
}

/// Suites are `dir` itself when it holds a manifest, plus every direct
/// subdirectory that does. Names are directory names.
pub fn suite_dirs(dir: &Path) -> Vec<(String, PathBuf)> {
    let mut out = vec![];
    if dir.join(MANIFEST).is_file() {
        let name = dir.file_name().map_or("suite".into(), |n| n.to_string_lossy().into_owned());
        out.push((name, dir.to_path_buf()));
    }
    if let Ok(entries) = fs::read_dir(dir) {
        let mut subs: Vec<(String, PathBuf)> = entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.join(MANIFEST).is_file())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), p))
            .collect();
        subs.sort();
        out.extend(subs);
    }
    out
}

pub fn find_suite(dir: &Path, name: &str) -> Option<Result<Suite, SuiteError>> {
    suite_dirs(dir).into_iter().find(|(n, _)| n == name).map(|(_, p)| load_suite(&p))
}

pub fn list_suites(dir: &Path) -> Vec<SuiteSummary> {
    suite_dirs(dir)
        .into_iter()
        .filter_map(|(name, p)| match load_suite(&p) {
            Ok(s) => Some(SuiteSummary {
                name,
                rows: s.manifest.spec.gen.rows,
                cols: s.manifest.spec.gen.cols,
                mines: s.manifest.spec.gen.n_mines,
                boards: s.boards.len(),
            }),
            Err(e) => {
                log::warn!("skipping suite {}: {e}", p.display());
                None
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionSummary {
    /// Path relative to the sessions directory, without `.json`.
    pub id: String,
    pub board_id: String,
    pub agent: String,
    pub outcome: minebench::session::Outcome,
    pub turns: usize,
}

/// Session log files under `dir`, one directory level deep, sorted.
pub fn session_files(dir: &Path) -> Vec<(String, PathBuf)> {
    let mut out = vec![];
    let json_in = |d: &Path, prefix: &str, out: &mut Vec<(String, PathBuf)>| {
        if let Ok(entries) = fs::read_dir(d) {
            for e in entries.filter_map(|e| e.ok()) {
                let p = e.path();
                if p.is_file() && p.extension().is_some_and(|x| x == "json") {
                    let stem = p.file_stem().unwrap().to_string_lossy();
                    out.push((format!("{prefix}{stem}"), p));
                }
            }
        }
    };
    json_in(dir, "", &mut out);
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.filter_map(|e| e.ok()) {
            let p = e.path();
            if p.is_dir() {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                json_in(&p, &format!("{name}/"), &mut out);
            }
        }
    }
    out.sort();
    out
}

pub fn list_sessions(dir: &Path) -> Vec<SessionSummary> {
    session_files(dir)
        .into_iter()
        .filter_map(|(id, p)| {
            // Run manifests and reports share the tree; only logs parse.
            let log = SessionLog::load(&p).ok()?;
            Some(SessionSummary {
                id,
                board_id: log.board_id.clone(),
                agent: log.agent.clone(),
                outcome: log.outcome,
                turns: log.turns.len(),
            })
        })
        .collect()
}

pub fn find_session(dir: &Path, id: &str) -> Option<PathBuf> {
    session_files(dir).into_iter().find(|(i, _)| i == id).map(|(_, p)| p)
}
