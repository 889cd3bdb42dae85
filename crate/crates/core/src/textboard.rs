//! Plain-text board formats.
//!
//! Table format (`with_indices = true`, LaTeX quotes):
//!
//! ```text
//! table   = header NL row { NL row }
//! header  = index { ", " index }              ; column indices 1..cols
//! row     = index ", " cell { ", " cell }     ; row index, then cells
//! cell    = "`" token "'"                      ; bare token without quotes
//! ```
//!
//! Without indices the header line and the leading row index are dropped.
//!
//! Coordinate format, one line per cell in row-major order:
//!
//! ```text
//! line    = "(" row "," col "): " token
//! ```
//!
//! Action history: one line per action, `N. K(r,c)` with `N` counting
//! from 1.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, BoardView, CellView, Coord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unknown token {token:?}")]
    UnknownToken { line: usize, token: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid symbol map: {0}")]
pub struct SymbolMapError(String);

/// Tokens used for each cell state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSymbolMap", into = "RawSymbolMap")]
pub struct SymbolMap {
    unopened: String,
    blank: String,
    flagged: String,
    numbered: [String; 8],
}

#[derive(Clone, Serialize, Deserialize)]
struct RawSymbolMap {
    unopened: String,
    blank: String,
    flagged: String,
    numbered: [String; 8],
}

impl TryFrom<RawSymbolMap> for SymbolMap {
    type Error = SymbolMapError;

    fn try_from(r: RawSymbolMap) -> Result<Self, Self::Error> {
        SymbolMap::new(r.unopened, r.blank, r.flagged, r.numbered)
    }
}

impl From<SymbolMap> for RawSymbolMap {
    fn from(m: SymbolMap) -> Self {
        RawSymbolMap { unopened: m.unopened, blank: m.blank, flagged: m.flagged, numbered: m.numbered }
    }
}

const FORBIDDEN: &[char] = &[',', '\n', '\r', ':', '(', ')', '`', '\'', '"'];

impl SymbolMap {
    pub fn new(
        unopened: impl Into<String>,
        blank: impl Into<String>,
        flagged: impl Into<String>,
        numbered: [String; 8],
    ) -> Result<Self, SymbolMapError> {
        let map = Self { unopened: unopened.into(), blank: blank.into(), flagged: flagged.into(), numbered };
        let tokens = map.tokens();
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(|c| c.is_whitespace() || FORBIDDEN.contains(&c)) {
                return Err(SymbolMapError(format!("token {t:?} is empty or contains a separator")));
            }
            if tokens[..i].contains(t) {
                return Err(SymbolMapError(format!("token {t:?} is used twice")));
            }
        }
        Ok(map)
    }

    /// `?`, `.`, `F` and the digits 1-8.
    pub fn standard() -> Self {
        Self::new("?", ".", "F", std::array::from_fn(|i| (i + 1).to_string())).unwrap()
    }

    /// The standard map with numbers written as Roman numerals I-VIII.
    pub fn roman() -> Self {
        const ROMAN: [&str; 8] = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII"];
        Self::new("?", ".", "F", ROMAN.map(String::from)).unwrap()
    }

    /// Looks up a named variant (`default` or `roman`).
    pub fn by_name(name: &str) -> Option<Self> {
        variant_symbol_maps().into_iter().find(|(n, _)| *n == name).map(|(_, m)| m)
    }

    pub fn token(&self, cell: CellView) -> &str {
        match cell {
            CellView::Unopened => &self.unopened,
            CellView::Blank => &self.blank,
            CellView::Flagged => &self.flagged,
            CellView::Numbered(n) => &self.numbered[(n as usize).clamp(1, 8) - 1],
        }
    }

    pub fn cell_for(&self, token: &str) -> Option<CellView> {
        if token == self.unopened {
            Some(CellView::Unopened)
        } else if token == self.blank {
            Some(CellView::Blank)
        } else if token == self.flagged {
            Some(CellView::Flagged)
        } else {
            self.numbered.iter().position(|t| t == token).map(|i| CellView::Numbered(i as u8 + 1))
        }
    }

    /// Unopened, blank, flagged, then 1..8.
    pub fn tokens(&self) -> Vec<&str> {
        let mut v = vec![self.unopened.as_str(), self.blank.as_str(), self.flagged.as_str()];
        v.extend(self.numbered.iter().map(String::as_str));
        v
    }
}

impl Default for SymbolMap {
    fn default() -> Self {
        Self::standard()
    }
}

/// The named symbol maps shipped with the harness.
pub fn variant_symbol_maps() -> Vec<(&'static str, SymbolMap)> {
    vec![("default", SymbolMap::standard()), ("roman", SymbolMap::roman())]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Table,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuoteStyle {
    /// `` `x' ``
    LatexQuotes,
    None,
}

impl QuoteStyle {
    pub fn quote(self, token: &str) -> String {
        match self {
            QuoteStyle::LatexQuotes => format!("`{token}'"),
            QuoteStyle::None => token.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub format: Format,
    /// Table only.
    pub with_indices: bool,
    /// Table only; coordinate cells are never quoted.
    pub quote_style: QuoteStyle,
    pub symbols: SymbolMap,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self::table()
    }
}

impl RenderOptions {
    pub fn table() -> Self {
        Self {
            format: Format::Table,
            with_indices: true,
            quote_style: QuoteStyle::LatexQuotes,
            symbols: SymbolMap::standard(),
        }
    }

    pub fn coordinate() -> Self {
        Self {
            format: Format::Coordinate,
            with_indices: true,
            quote_style: QuoteStyle::None,
            symbols: SymbolMap::standard(),
        }
    }

    pub fn for_format(format: Format) -> Self {
        match format {
            Format::Table => Self::table(),
            Format::Coordinate => Self::coordinate(),
        }
    }

    pub fn with_symbols(mut self, symbols: SymbolMap) -> Self {
        self.symbols = symbols;
        self
    }

    pub fn without_indices(mut self) -> Self {
        self.with_indices = false;
        self
    }

    /// How a single cell token appears inside prose for this representation:
    /// LaTeX quotes for tables, plain double quotes otherwise.
    pub fn prose_token(&self, cell: CellView) -> String {
        let t = self.symbols.token(cell);
        match self.format {
            Format::Table => QuoteStyle::LatexQuotes.quote(t),
            Format::Coordinate => format!("\"{t}\""),
        }
    }
}

pub fn render(view: &BoardView, opts: &RenderOptions) -> String {
    match opts.format {
        Format::Table => render_table(view, opts),
        Format::Coordinate => render_coordinate(view, opts),
    }
}

pub fn render_table(view: &BoardView, opts: &RenderOptions) -> String {
    let mut lines = Vec::with_capacity(view.rows() + 1);
    if opts.with_indices {
        lines.push((1..=view.cols()).map(|c| c.to_string()).collect::<Vec<_>>().join(", "));
    }
    for r in 1..=view.rows() {
        let mut parts = Vec::with_capacity(view.cols() + 1);
        if opts.with_indices {
            parts.push(r.to_string());
        }
        for c in 1..=view.cols() {
            let cell = view.get(Coord::new(r as i32, c as i32)).expect("in bounds");
            parts.push(opts.quote_style.quote(opts.symbols.token(cell)));
        }
        lines.push(parts.join(", "));
    }
    lines.join("\n")
}

pub fn render_coordinate(view: &BoardView, opts: &RenderOptions) -> String {
    let mut out = String::new();
    for (i, (c, cell)) in view.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "({},{}): {}", c.row, c.col, opts.symbols.token(cell));
    }
    out
}

pub fn parse_board(text: &str, opts: &RenderOptions) -> Result<BoardView, ParseError> {
    match opts.format {
        Format::Table => parse_table(text, opts),
        Format::Coordinate => parse_coordinate(text, opts),
    }
}

/// Like [`parse_board`] but also checks the board has the given size.
pub fn parse_board_sized(
    text: &str,
    opts: &RenderOptions,
    rows: usize,
    cols: usize,
) -> Result<BoardView, ParseError> {
    let view = parse_board(text, opts)?;
    if (view.rows(), view.cols()) != (rows, cols) {
        return Err(ParseError::Dimension(format!(
            "expected {rows}x{cols}, found {}x{}",
            view.rows(),
            view.cols()
        )));
    }
    Ok(view)
}

fn content_lines(text: &str) -> Vec<(usize, &str)> {
    let mut lines: Vec<(usize, &str)> =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).collect();
    while lines.last().is_some_and(|(_, l)| l.is_empty()) {
        lines.pop();
    }
    lines
}

fn parse_token(raw: &str, line: usize, opts: &RenderOptions) -> Result<CellView, ParseError> {
    let raw = raw.trim();
    let token = match opts.quote_style {
        QuoteStyle::LatexQuotes => raw
            .strip_prefix('`')
            .and_then(|t| t.strip_suffix('\''))
            .ok_or_else(|| ParseError::Malformed {
                line,
                message: format!("cell {raw:?} is not enclosed in `...' quotes"),
            })?,
        QuoteStyle::None => raw,
    };
    opts.symbols
        .cell_for(token)
        .ok_or_else(|| ParseError::UnknownToken { line, token: token.to_string() })
}

fn parse_index(raw: &str, expected: usize, line: usize, what: &str) -> Result<(), ParseError> {
    match raw.trim().parse::<usize>() {
        Ok(n) if n == expected => Ok(()),
        _ => Err(ParseError::Malformed {
            line,
            message: format!("expected {what} index {expected}, found {raw:?}"),
        }),
    }
}

fn parse_table(text: &str, opts: &RenderOptions) -> Result<BoardView, ParseError> {
    let mut lines = content_lines(text).into_iter();
    let mut cols = None;
    if opts.with_indices {
        let (line, header) = lines
            .next()
            .ok_or_else(|| ParseError::Dimension("empty board text".into()))?;
        let idx: Vec<&str> = header.split(',').collect();
        for (i, raw) in idx.iter().enumerate() {
            parse_index(raw, i + 1, line, "column")?;
        }
        cols = Some(idx.len());
    }
    let mut cells = Vec::new();
    let mut rows = 0;
    for (line, l) in lines {
        let mut parts: Vec<&str> = l.split(',').collect();
        if opts.with_indices {
            parse_index(parts[0], rows + 1, line, "row")?;
            parts.remove(0);
        }
        let expected = *cols.get_or_insert(parts.len());
        if parts.len() != expected {
            return Err(ParseError::Dimension(format!(
                "line {line}: expected {expected} cells, found {}",
                parts.len()
            )));
        }
        for p in parts {
            cells.push(parse_token(p, line, opts)?);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(ParseError::Dimension("board has no cells".into()));
    }
    Ok(BoardView::from_cells(rows, cols, cells))
}

fn parse_coordinate(text: &str, opts: &RenderOptions) -> Result<BoardView, ParseError> {
    let mut found: HashMap<Coord, CellView> = HashMap::new();
    let (mut rows, mut cols) = (0usize, 0usize);
    for (line, l) in content_lines(text) {
        let malformed = |message: String| ParseError::Malformed { line, message };
        let (coord, token) = l
            .split_once(':')
            .ok_or_else(|| malformed(format!("expected \"(row,col): token\", found {l:?}")))?;
        let inner = coord
            .trim()
            .strip_prefix('(')
            .and_then(|c| c.strip_suffix(')'))
            .ok_or_else(|| malformed(format!("bad coordinate {coord:?}")))?;
        let (r, c) = inner
            .split_once(',')
            .ok_or_else(|| malformed(format!("bad coordinate {coord:?}")))?;
        let (r, c) = match (r.trim().parse::<i32>(), c.trim().parse::<i32>()) {
            (Ok(r), Ok(c)) if r >= 1 && c >= 1 => (r, c),
            _ => return Err(malformed(format!("bad coordinate {coord:?}"))),
        };
        let quoted = RenderOptions { quote_style: QuoteStyle::None, ..opts.clone() };
        let cell = parse_token(token, line, &quoted)?;
        if found.insert(Coord::new(r, c), cell).is_some() {
            return Err(malformed(format!("cell ({r},{c}) listed twice")));
        }
        rows = rows.max(r as usize);
        cols = cols.max(c as usize);
    }
    if found.len() != rows * cols || rows == 0 {
        return Err(ParseError::Dimension(format!(
            "{} cells listed for an inferred {rows}x{cols} board",
            found.len()
        )));
    }
    let cells = (0..rows * cols)
        .map(|i| found[&Coord::new((i / cols) as i32 + 1, (i % cols) as i32 + 1)])
        .collect();
    Ok(BoardView::from_cells(rows, cols, cells))
}

pub fn render_action_history(actions: &[Action]) -> String {
    actions
        .iter()
        .enumerate()
        .map(|(i, a)| format!("{}. {a}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_action_history(text: &str) -> Result<Vec<Action>, ParseError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        let (n, action) = l.split_once(". ").ok_or_else(|| ParseError::Malformed {
            line,
            message: format!("expected \"N. K(r,c)\", found {l:?}"),
        })?;
        parse_index(n, out.len() + 1, line, "action")?;
        let action = action.parse().map_err(|_| ParseError::Malformed {
            line,
            message: format!("bad action {action:?}"),
        })?;
        out.push(action);
    }
    Ok(out)
}
