//! Seeded minefield generation and first-click filtering.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64`. Candidate `i` of a suite draws from its own
//! stream seeded with `splitmix64(seed ^ splitmix64(i))`, so rejecting one
//! candidate never shifts the layout of later ones. Mines are placed by a
//! partial Fisher-Yates shuffle over the row-major list of non-safe cells,
//! with bounded integers drawn by rejection sampling on `next_u64`.

use std::collections::BTreeSet;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{all_coords, center, Action, Coord, Feedback, GameState, MineField};

/// Seed used by the stock benchmark suites.
pub const DEFAULT_SEED: u64 = 7;
/// Minimum cells the opening click must reveal for a board to qualify.
pub const DEFAULT_MIN_REVEAL: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("cannot place {mines} mines on a {rows}x{cols} board with {safe} safe cells")]
    TooManyMines { rows: usize, cols: usize, mines: usize, safe: usize },
    #[error("safe cell {0} is outside the board")]
    SafeCellOutOfBounds(Coord),
    #[error("first click {0} is on a mine")]
    FirstClickOnMine(Coord),
    #[error("first click {0} is outside the board")]
    FirstClickOutOfBounds(Coord),
    #[error("only {qualified} of {pool} candidate boards qualified, {keep} requested")]
    NotEnoughBoards { qualified: usize, pool: usize, keep: usize },
    #[error("invalid suite spec: {0}")]
    InvalidSuite(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub rows: usize,
    pub cols: usize,
    pub n_mines: usize,
    pub safe_cells: BTreeSet<Coord>,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(rows: usize, cols: usize, n_mines: usize, seed: u64) -> Self {
        Self { rows, cols, n_mines, safe_cells: BTreeSet::new(), seed }
    }

    pub fn with_safe(mut self, cells: impl IntoIterator<Item = Coord>) -> Self {
        self.safe_cells.extend(cells);
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if let Some(&c) = self.safe_cells.iter().find(|c| !c.in_bounds(self.rows, self.cols)) {
            return Err(GenError::SafeCellOutOfBounds(c));
        }
        let total = self.rows * self.cols;
        let free = total.saturating_sub(self.safe_cells.len());
        // MineField additionally requires at least one safe cell overall.
        if self.rows == 0 || self.cols == 0 || self.n_mines > free || self.n_mines >= total {
            return Err(GenError::TooManyMines {
                rows: self.rows,
                cols: self.cols,
                mines: self.n_mines,
                safe: self.safe_cells.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub gen: GenSpec,
    pub pool_size: usize,
    pub keep: usize,
    pub min_first_reveal: usize,
    pub first_click: Coord,
}

impl SuiteSpec {
    /// The standard suite shape: first click at the center, which is
    /// also kept mine-free.
    pub fn centered(rows: usize, cols: usize, n_mines: usize, pool_size: usize, keep: usize, seed: u64) -> Self {
        let first_click = center(rows, cols);
        Self {
            gen: GenSpec::new(rows, cols, n_mines, seed).with_safe([first_click]),
            pool_size,
            keep,
            min_first_reveal: DEFAULT_MIN_REVEAL,
            first_click,
        }
    }

    /// 100 boards of 5x5 with 4 mines, filtered from 1000.
    pub fn gameplay_default() -> Self {
        Self::centered(5, 5, 4, 1000, 100, DEFAULT_SEED)
    }

    /// 100 boards of 9x9 with 10 mines, filtered from 1000.
    pub fn understanding_default() -> Self {
        Self::centered(9, 9, 10, 1000, 100, DEFAULT_SEED)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        self.gen.validate()?;
        if self.keep > self.pool_size {
            return Err(GenError::InvalidSuite(format!(
                "keep ({}) exceeds pool size ({})",
                self.keep, self.pool_size
            )));
        }
        if self.min_first_reveal > self.gen.rows * self.gen.cols {
            return Err(GenError::InvalidSuite(format!(
                "min_first_reveal ({}) exceeds the board size",
                self.min_first_reveal
            )));
        }
        if !self.first_click.in_bounds(self.gen.rows, self.gen.cols) {
            return Err(GenError::FirstClickOutOfBounds(self.first_click));
        }
        Ok(())
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the independent stream for sub-item `index` under `seed`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// The harness RNG for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` (bound > 0) by rejection sampling.
pub fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0, "empty range");
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

pub fn generate_minefield(spec: &GenSpec) -> Result<MineField, GenError> {
    spec.validate()?;
    let mut pool: Vec<Coord> = all_coords(spec.rows, spec.cols)
        .filter(|c| !spec.safe_cells.contains(c))
        .collect();
    let mut rng = rng(spec.seed);
    for i in 0..spec.n_mines {
        let j = i + uniform_below(&mut rng, (pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(spec.n_mines);
    Ok(MineField::new(spec.rows, spec.cols, pool).expect("validated spec yields a valid field"))
}

/// Number of cells revealed by opening `first_click` on a fresh game.
pub fn first_reveal_count(field: &MineField, first_click: Coord) -> Result<usize, GenError> {
    if !first_click.in_bounds(field.rows(), field.cols()) {
        return Err(GenError::FirstClickOutOfBounds(first_click));
    }
    if field.is_mine(first_click) {
        return Err(GenError::FirstClickOnMine(first_click));
    }
    let opening = Action::left(first_click.row, first_click.col);
    let mut game = GameState::with_first_action(field.clone(), opening);
    match game.apply(opening).expect("fresh game accepts an action") {
        Feedback::BoardUpdated { revealed, .. } => Ok(revealed.len()),
        Feedback::GameSolved => Ok(field.rows() * field.cols() - field.mine_count()),
        other => unreachable!("safe opening produced {other:?}"),
    }
}

pub fn qualify(field: &MineField, first_click: Coord, min_reveal: usize) -> Result<bool, GenError> {
    Ok(first_reveal_count(field, first_click)? >= min_reveal)
}

/// Generates `pool_size` candidates and keeps the first `keep` that qualify.
pub fn build_suite(spec: &SuiteSpec) -> Result<Vec<MineField>, GenError> {
    spec.validate()?;
    let mut kept = Vec::with_capacity(spec.keep);
    let mut qualified = 0;
    for i in 0..spec.pool_size {
        if kept.len() == spec.keep {
            break;
        }
        let gen = GenSpec { seed: substream_seed(spec.gen.seed, i as u64), ..spec.gen.clone() };
        let field = generate_minefield(&gen)?;
        // A mined first click cannot qualify; only reachable without a safe set.
        if field.is_mine(spec.first_click) {
            continue;
        }
        if qualify(&field, spec.first_click, spec.min_first_reveal)? {
            qualified += 1;
            kept.push(field);
        }
    }
    if kept.len() < spec.keep {
        return Err(GenError::NotEnoughBoards { qualified, pool: spec.pool_size, keep: spec.keep });
    }
    Ok(kept)
}
