//! Game handles and their append-only journals.
//!
//! Each game lives in `<data>/games/<id>.jsonl`: a `created` record followed
//! by one record per accepted request. On startup every journal is replayed
//! through the engine to rebuild the handle.

use std::collections::hash_map::RandomState;
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::hash::BuildHasher;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use minebench::boardgen::splitmix64;
use minebench::engine::{Action, EngineError, Feedback, GameState, GameStatus, MineField};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FINALIZE_REASON: &str = "finalized by annotator";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("journal {path} line {line}: {message}")]
    Journal { path: PathBuf, line: usize, message: String },
}

/// Where a game's minefield came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CreatedFrom {
    Suite { suite: String, index: usize, board_id: String },
    Spec { rows: usize, cols: usize, mines: usize, seed: u64 },
    Field,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Created {
        id: String,
        field: MineField,
        first_action: Action,
        created_from: CreatedFrom,
        annotator: Option<String>,
    },
    Action { action: Action },
    Finalized,
}

pub struct GameHandle {
    pub id: String,
    pub state: GameState,
    pub created_from: CreatedFrom,
    pub annotator: Option<String>,
    pub finalized: bool,
    journal: Option<Journal>,
}

impl GameHandle {
    pub fn apply(&mut self, action: Action) -> Result<Feedback, EngineError> {
        let fb = self.state.apply(action)?;
        self.append(&Record::Action { action });
        Ok(fb)
    }

    /// Ends annotation. An in-progress game becomes aborted.
    pub fn finalize(&mut self) {
        if self.finalized {
            return;
        }
        self.state.abort(FINALIZE_REASON);
        self.finalized = true;
        self.append(&Record::Finalized);
    }

    pub fn exportable(&self) -> bool {
        self.finalized || self.state.status().is_terminal()
    }

    /// Solved or failed, as opposed to abandoned.
    pub fn complete(&self) -> bool {
        matches!(self.state.status(), GameStatus::Solved | GameStatus::Failed { .. })
    }

    pub fn actions(&self) -> Vec<Action> {
        self.state.applied().iter().map(|a| a.action).collect()
    }

    fn append(&mut self, record: &Record) {
        if let Some(j) = &mut self.journal {
            if let Err(e) = j.append(record) {
                log::error!("journal write failed for {}: {e}", self.id);
            }
        }
    }
}

struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    fn create(path: PathBuf) -> Result<Self, StoreError> {
        let file = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(&path)
            .map_err(|source| StoreError::Io { path: path.clone(), source })?;
        Ok(Self { path, file })
    }

    fn reopen(path: PathBuf) -> Result<Self, StoreError> {
        let file = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|source| StoreError::Io { path: path.clone(), source })?;
        Ok(Self { path, file })
    }

    fn append(&mut self, record: &Record) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| StoreError::Io { path: self.path.clone(), source })
    }
}

pub type Shared = Arc<Mutex<GameHandle>>;

pub struct Store {
    games_dir: Option<PathBuf>,
    games: RwLock<BTreeMap<String, Shared>>,
    counter: AtomicU64,
    salt: u64,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::with_games(None, BTreeMap::new())
    }

    /// Opens (or creates) `<data_dir>/games` and replays every journal in it.
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let dir = data_dir.join("games");
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io { path: dir.clone(), source })?;
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|source| StoreError::Io { path: dir.clone(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut games = BTreeMap::new();
        for p in paths {
            let handle = replay_journal(&p)?;
            log::info!("restored game {} ({} actions)", handle.id, handle.state.applied().len());
            games.insert(handle.id.clone(), Arc::new(Mutex::new(handle)));
        }
        Ok(Self::with_games(Some(dir), games))
    }

    fn with_games(games_dir: Option<PathBuf>, games: BTreeMap<String, Shared>) -> Self {
        let salt = RandomState::new().hash_one(std::process::id());
        let counter = AtomicU64::new(games.len() as u64 + 1);
        Self { games_dir, games: RwLock::new(games), counter, salt }
    }

    pub fn create(
        &self,
        field: MineField,
        first_action: Action,
        created_from: CreatedFrom,
        annotator: Option<String>,
    ) -> Result<Shared, StoreError> {
        let mut games = self.games.write().expect("game table lock");
        let id = loop {
            let n = self.counter.fetch_add(1, Ordering::Relaxed);
            let id = format!("g{n:04}-{:08x}", splitmix64(self.salt ^ n) as u32);
            if !games.contains_key(&id) {
                break id;
            }
        };
        let journal = match &self.games_dir {
            Some(dir) => {
                let mut j = Journal::create(dir.join(format!("{id}.jsonl")))?;
                j.append(&Record::Created {
                    id: id.clone(),
                    field: field.clone(),
                    first_action,
                    created_from: created_from.clone(),
                    annotator: annotator.clone(),
                })?;
                Some(j)
            }
            None => None,
        };
        let handle = GameHandle {
            id: id.clone(),
            state: GameState::with_first_action(field, first_action),
            created_from,
            annotator,
            finalized: false,
            journal,
        };
        let shared = Arc::new(Mutex::new(handle));
        games.insert(id, shared.clone());
        Ok(shared)
    }

    pub fn get(&self, id: &str) -> Option<Shared> {
        self.games.read().expect("game table lock").get(id).cloned()
    }

    pub fn all(&self) -> Vec<Shared> {
        self.games.read().expect("game table lock").values().cloned().collect()
    }
}

fn replay_journal(path: &Path) -> Result<GameHandle, StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io { path: path.to_path_buf(), source })?;
    let err = |line: usize, message: String| StoreError::Journal { path: path.to_path_buf(), line, message };
    let lines: Vec<&str> = text.lines().collect();
    let mut handle: Option<GameHandle> = None;
    for (i, l) in lines.iter().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(l) {
            Ok(r) => r,
            // A torn final line is what a crash mid-write leaves behind.
            Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                log::warn!("{}: ignoring torn last line: {e}", path.display());
                break;
            }
            Err(e) => return Err(err(i + 1, e.to_string())),
        };
        match (record, &mut handle) {
            (Record::Created { id, field, first_action, created_from, annotator }, None) => {
                handle = Some(GameHandle {
                    id,
                    state: GameState::with_first_action(field, first_action),
                    created_from,
                    annotator,
                    finalized: false,
                    journal: None,
                });
            }
            (Record::Action { action }, Some(h)) => {
                h.state.apply(action).map_err(|e| err(i + 1, e.to_string()))?;
            }
            (Record::Finalized, Some(h)) => {
                h.state.abort(FINALIZE_REASON);
                h.finalized = true;
            }
            (r, _) => return Err(err(i + 1, format!("unexpected record {r:?}"))),
        }
    }
    let mut handle = handle.ok_or_else(|| err(1, "missing created record".into()))?;
    if !text.is_empty() && !text.ends_with('\n') {
        // Drop the torn tail so later appends start on a fresh line.
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        fs::write(path, &text[..keep]).map_err(|source| StoreError::Io { path: path.to_path_buf(), source })?;
    }
    handle.journal = Some(Journal::reopen(path.to_path_buf())?);
    Ok(handle)
}
