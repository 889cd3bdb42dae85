use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// A 1-indexed board position. Out-of-range values are representable so
/// that the bounds feedback can be produced for them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub row: i32,
    pub col: i32,
}

impl Coord {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn in_bounds(self, rows: usize, cols: usize) -> bool {
        self.row >= 1 && self.col >= 1 && self.row as usize <= rows && self.col as usize <= cols
    }

    /// Row-major index into a `rows x cols` grid. Caller guarantees bounds.
    pub(crate) fn index(self, cols: usize) -> usize {
        (self.row as usize - 1) * cols + (self.col as usize - 1)
    }

    pub(crate) fn from_index(index: usize, cols: usize) -> Self {
        Self::new((index / cols) as i32 + 1, (index % cols) as i32 + 1)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// All in-bounds cells at Chebyshev distance 1 from `at`, row-major.
pub fn neighbors(at: Coord, rows: usize, cols: usize) -> Vec<Coord> {
    let mut out = Vec::with_capacity(8);
    for dr in -1..=1 {
        for dc in -1..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let c = Coord::new(at.row + dr, at.col + dc);
            if c.in_bounds(rows, cols) {
                out.push(c);
            }
        }
    }
    out
}

/// Every cell of a `rows x cols` board in row-major order.
pub fn all_coords(rows: usize, cols: usize) -> impl Iterator<Item = Coord> {
    (0..rows * cols).map(move |i| Coord::from_index(i, cols))
}

/// The board center; ceil(n/2) on each axis.
pub fn center(rows: usize, cols: usize) -> Coord {
    Coord::new(rows.div_ceil(2) as i32, cols.div_ceil(2) as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClickKind {
    L,
    R,
    M,
}

impl ClickKind {
    pub const ALL: [ClickKind; 3] = [ClickKind::L, ClickKind::R, ClickKind::M];

    pub fn letter(self) -> char {
        match self {
            ClickKind::L => 'L',
            ClickKind::R => 'R',
            ClickKind::M => 'M',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(ClickKind::L),
            'R' => Some(ClickKind::R),
            'M' => Some(ClickKind::M),
            _ => None,
        }
    }
}

/// One click: `L`, `R` or `M` at a coordinate. Serialized as `"K(r,c)"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Action {
    pub kind: ClickKind,
    pub at: Coord,
}

impl Action {
    pub const fn new(kind: ClickKind, row: i32, col: i32) -> Self {
        Self { kind, at: Coord::new(row, col) }
    }

    pub const fn left(row: i32, col: i32) -> Self {
        Self::new(ClickKind::L, row, col)
    }

    pub const fn right(row: i32, col: i32) -> Self {
        Self::new(ClickKind::R, row, col)
    }

    pub const fn middle(row: i32, col: i32) -> Self {
        Self::new(ClickKind::M, row, col)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind.letter(), self.at.row, self.at.col)
    }
}

impl FromStr for Action {
    type Err = EngineError;

    /// Strict form `K(r,c)`; surrounding whitespace and spaces inside the
    /// parentheses are tolerated.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EngineError::BadAction(s.to_string());
        let s = s.trim();
        let mut chars = s.chars();
        let kind = chars.next().and_then(ClickKind::from_letter).ok_or_else(bad)?;
        let rest = chars.as_str().trim_start();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (r, c) = inner.split_once(',').ok_or_else(bad)?;
        let row = r.trim().parse().map_err(|_| bad())?;
        let col = c.trim().parse().map_err(|_| bad())?;
        Ok(Action::new(kind, row, col))
    }
}

impl From<Action> for String {
    fn from(a: Action) -> Self {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = EngineError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// The full syntactic action space, `3 * rows * cols` actions: row-major
/// over cells, `L, R, M` within a cell.
pub fn enumerate_actions(rows: usize, cols: usize) -> Vec<Action> {
    all_coords(rows, cols)
        .flat_map(|at| ClickKind::ALL.into_iter().map(move |kind| Action { kind, at }))
        .collect()
}

/// Ground-truth mine layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMineField")]
pub struct MineField {
    rows: usize,
    cols: usize,
    mines: BTreeSet<Coord>,
}

#[derive(Deserialize)]
struct RawMineField {
    rows: usize,
    cols: usize,
    mines: Vec<Coord>,
}

impl TryFrom<RawMineField> for MineField {
    type Error = EngineError;

    fn try_from(raw: RawMineField) -> Result<Self, Self::Error> {
        MineField::new(raw.rows, raw.cols, raw.mines)
    }
}

impl MineField {
    pub fn new(
        rows: usize,
        cols: usize,
        mines: impl IntoIterator<Item = Coord>,
    ) -> Result<Self, EngineError> {
        if rows == 0 || cols == 0 {
            return Err(EngineError::InvalidField(format!(
                "board dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let mut set = BTreeSet::new();
        for m in mines {
            if !m.in_bounds(rows, cols) {
                return Err(EngineError::InvalidField(format!(
                    "mine {m} outside {rows}x{cols} board"
                )));
            }
            if !set.insert(m) {
                return Err(EngineError::InvalidField(format!("duplicate mine {m}")));
            }
        }
        if set.len() >= rows * cols {
            return Err(EngineError::InvalidField(format!(
                "{} mines leave no safe cell on a {rows}x{cols} board",
                set.len()
            )));
        }
        Ok(Self { rows, cols, mines: set })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mines(&self) -> &BTreeSet<Coord> {
        &self.mines
    }

    pub fn mine_count(&self) -> usize {
        self.mines.len()
    }

    pub fn is_mine(&self, at: Coord) -> bool {
        self.mines.contains(&at)
    }

    pub fn adjacent_mines(&self, at: Coord) -> u8 {
        neighbors(at, self.rows, self.cols)
            .into_iter()
            .filter(|c| self.is_mine(*c))
            .count() as u8
    }

    /// Line-oriented interchange text: `rows cols`, then one `row col` line
    /// per mine in row-major order. Ends with a newline.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for m in &self.mines {
            s.push_str(&format!("{} {}\n", m.row, m.col));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EngineError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let pair = |line: usize, l: &str| -> Result<(i64, i64), EngineError> {
            let mut it = l.split_whitespace();
            let parse = |t: Option<&str>| t.and_then(|t| t.parse::<i64>().ok());
            match (parse(it.next()), parse(it.next()), it.next()) {
                (Some(a), Some(b), None) => Ok((a, b)),
                _ => Err(EngineError::InvalidField(format!(
                    "line {line}: expected two integers, got {l:?}"
                ))),
            }
        };
        let (line, header) = lines
            .next()
            .ok_or_else(|| EngineError::InvalidField("empty minefield text".into()))?;
        let (rows, cols) = pair(line, header)?;
        if rows <= 0 || cols <= 0 {
            return Err(EngineError::InvalidField(format!(
                "line {line}: board dimensions must be positive"
            )));
        }
        let mut mines = Vec::new();
        for (line, l) in lines {
            let (r, c) = pair(line, l)?;
            let coord = i32::try_from(r)
                .ok()
                .zip(i32::try_from(c).ok())
                .map(|(r, c)| Coord::new(r, c))
                .ok_or_else(|| {
                    EngineError::InvalidField(format!("line {line}: coordinate out of range"))
                })?;
            mines.push(coord);
        }
        MineField::new(rows as usize, cols as usize, mines)
    }
}

/// What the player sees in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellView {
    Unopened,
    Flagged,
    Blank,
    /// Count of adjacent mines, 1..=8.
    Numbered(u8),
}

impl CellView {
    pub fn is_revealed(self) -> bool {
        matches!(self, CellView::Blank | CellView::Numbered(_))
    }
}

/// The player-visible grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoardView {
    rows: usize,
    cols: usize,
    cells: Vec<CellView>,
}

impl BoardView {
    pub fn unopened(rows: usize, cols: usize) -> Self {
        Self { rows, cols, cells: vec![CellView::Unopened; rows * cols] }
    }

    /// Builds a view from row-major cells. Panics if the length is wrong.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<CellView>) -> Self {
        assert_eq!(cells.len(), rows * cols, "cell count does not match {rows}x{cols}");
        Self { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[CellView] {
        &self.cells
    }

    pub fn get(&self, at: Coord) -> Option<CellView> {
        at.in_bounds(self.rows, self.cols).then(|| self.cells[at.index(self.cols)])
    }

    pub(crate) fn set(&mut self, at: Coord, cell: CellView) {
        let i = at.index(self.cols);
        self.cells[i] = cell;
    }

    pub fn neighbors(&self, at: Coord) -> Vec<Coord> {
        neighbors(at, self.rows, self.cols)
    }

    /// Iterates `(coord, cell)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Coord, CellView)> + '_ {
        self.cells.iter().enumerate().map(|(i, c)| (Coord::from_index(i, self.cols), *c))
    }

    pub fn count(&self, pred: impl Fn(CellView) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(**c)).count()
    }
}
