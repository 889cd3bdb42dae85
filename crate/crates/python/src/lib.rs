//! Python bindings: games, board text, suites, sessions and metrics.
//!
//! Structured results (feedback, status, logs, reports) come back as plain
//! dicts with the same shape as the JSON the Rust side writes.

use std::path::PathBuf;

use minebench::boardgen::{generate_minefield, GenSpec, SuiteSpec};
use minebench::engine::{Action, CellView, Coord, GameState, MineField};
use minebench::metrics::{aggregate, score_session, verify_log as verify};
use minebench::session::{
    extract_action as extract, run_session, AgentPort, PromptMode, RandomAgent, ScriptedAgent, SessionConfig, SessionLog,
    SinglePointAgent,
};
use minebench::suite::write_suite;
use minebench::textboard::{self, RenderOptions, SymbolMap};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_action(s: &str) -> PyResult<Action> {
    s.trim().parse::<Action>().map_err(value_err)
}

fn options(format: &str, symbols: &str, indices: bool) -> PyResult<RenderOptions> {
    let mut o = match format {
        "table" => RenderOptions::table(),
        "coordinate" => RenderOptions::coordinate(),
        other => return Err(value_err(format!("unknown format {other:?} (expected table or coordinate)"))),
    };
    if !indices {
        o = o.without_indices();
    }
    let map = SymbolMap::by_name(symbols)
        .ok_or_else(|| value_err(format!("unknown symbol map {symbols:?} (expected default or roman)")))?;
    Ok(o.with_symbols(map))
}

fn token_grid(cells: &[CellView], cols: usize) -> Vec<Vec<String>> {
    let map = SymbolMap::standard();
    cells.chunks(cols).map(|row| row.iter().map(|&c| map.token(c).to_string()).collect()).collect()
}

/// One game of Minesweeper on a fixed minefield.
#[pyclass(module = "minebench_py")]
pub struct Game {
    state: GameState,
}

#[pymethods]
impl Game {
    /// Builds a game from minefield text: `rows cols`, then one `row col` line per mine.
    #[new]
    #[pyo3(signature = (field, first_action=None))]
    fn new(field: &str, first_action: Option<&str>) -> PyResult<Self> {
        let field = MineField::from_text(field).map_err(value_err)?;
        let state = match first_action {
            Some(a) => GameState::with_first_action(field, parse_action(a)?),
            None => GameState::new(field),
        };
        Ok(Self { state })
    }

    /// A random minefield; `safe` cells never hold a mine.
    #[staticmethod]
    #[pyo3(signature = (rows, cols, mines, seed=7, safe=None))]
    fn generate(rows: usize, cols: usize, mines: usize, seed: u64, safe: Option<Vec<(i32, i32)>>) -> PyResult<Self> {
        let mut spec = GenSpec::new(rows, cols, mines, seed);
        if let Some(safe) = safe {
            spec = spec.with_safe(safe.into_iter().map(|(r, c)| Coord::new(r, c)));
        }
        let field = generate_minefield(&spec).map_err(value_err)?;
        Ok(Self { state: GameState::new(field) })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.state.field().rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.state.field().cols()
    }

    #[getter]
    fn mine_count(&self) -> usize {
        self.state.field().mine_count()
    }

    #[getter]
    fn first_action(&self) -> String {
        self.state.first_action().to_string()
    }

    #[getter]
    fn status<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.state.status())
    }

    #[getter]
    fn is_over(&self) -> bool {
        self.state.status().is_terminal()
    }

    /// Every applied action, invalid ones included.
    #[getter]
    fn actions(&self) -> Vec<String> {
        self.state.applied().iter().map(|a| a.action.to_string()).collect()
    }

    /// Applies an action such as `"L(3,3)"` and returns the feedback.
    fn apply<'py>(&mut self, py: Python<'py>, action: &str) -> PyResult<Bound<'py, PyAny>> {
        let a = parse_action(action)?;
        let feedback = self.state.apply(a).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        to_py(py, &feedback)
    }

    /// The visible board as rows of standard tokens.
    fn cells(&self) -> Vec<Vec<String>> {
        let v = self.state.view();
        token_grid(v.cells(), v.cols())
    }

    #[pyo3(signature = (format="table", symbols="default", indices=true))]
    fn render(&self, format: &str, symbols: &str, indices: bool) -> PyResult<String> {
        Ok(textboard::render(self.state.view(), &options(format, symbols, indices)?))
    }

    /// Numbered action history, one line per action.
    fn history(&self) -> String {
        let actions: Vec<Action> = self.state.applied().iter().map(|a| a.action).collect();
        textboard::render_action_history(&actions)
    }

    /// The minefield text. Reveals every mine.
    fn field_text(&self) -> String {
        self.state.field().to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Game({}x{}, {} mines, {} actions, {})",
            self.rows(),
            self.cols(),
            self.mine_count(),
            self.state.applied().len(),
            self.state.status()
        )
    }
}

/// Parses a rendered board back into rows of standard tokens.
#[pyfunction]
#[pyo3(signature = (text, format="table", symbols="default", indices=true))]
fn parse_board(text: &str, format: &str, symbols: &str, indices: bool) -> PyResult<Vec<Vec<String>>> {
    let view = textboard::parse_board(text, &options(format, symbols, indices)?).map_err(value_err)?;
    Ok(token_grid(view.cells(), view.cols()))
}

/// The action named in an agent reply, or None.
#[pyfunction]
fn extract_action(text: &str) -> Option<String> {
    extract(text).map(|a| a.to_string())
}

/// Writes a board suite to `out` and returns the board ids.
#[pyfunction]
#[pyo3(signature = (out, rows=5, cols=5, mines=4, pool=1000, keep=100, seed=7, min_reveal=None))]
#[allow(clippy::too_many_arguments)]
fn generate_suite(
    out: PathBuf,
    rows: usize,
    cols: usize,
    mines: usize,
    pool: usize,
    keep: usize,
    seed: u64,
    min_reveal: Option<usize>,
) -> PyResult<Vec<String>> {
    let mut spec = SuiteSpec::centered(rows, cols, mines, pool, keep, seed);
    if let Some(m) = min_reveal {
        spec.min_first_reveal = m;
    }
    let suite = write_suite(&out, &spec).map_err(value_err)?;
    Ok(suite.boards.into_iter().map(|(id, _)| id).collect())
}

/// Plays one board with a builtin agent, or with `responses` replayed in order.
#[pyfunction]
#[pyo3(signature = (field, agent="builtin:single-point", responses=None, mode="NC", format="table", symbols="default", indices=true, max_actions=10, seed=7, board_id="board"))]
#[allow(clippy::too_many_arguments)]
fn play<'py>(
    py: Python<'py>,
    field: &str,
    agent: &str,
    responses: Option<Vec<String>>,
    mode: &str,
    format: &str,
    symbols: &str,
    indices: bool,
    max_actions: usize,
    seed: u64,
    board_id: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let field = MineField::from_text(field).map_err(value_err)?;
    let mut agent: Box<dyn AgentPort> = match (responses, agent) {
        (Some(r), _) => Box::new(ScriptedAgent::new("python:script", r)),
        (None, "builtin:single-point") => Box::new(SinglePointAgent::new()),
        (None, "builtin:single-point-guess") => Box::new(SinglePointAgent::guessing(seed)),
        (None, "builtin:random") => Box::new(RandomAgent::new(seed)),
        (None, other) => return Err(value_err(format!("unknown agent {other:?}"))),
    };
    let config = SessionConfig {
        max_actions,
        representation: options(format, symbols, indices)?,
        mode: mode.parse::<PromptMode>().map_err(value_err)?,
        ..SessionConfig::default()
    };
    let log = run_session(board_id, &field, agent.as_mut(), &config).map_err(value_err)?;
    to_py(py, &log)
}

/// Checks a session log file by replaying it; raises ValueError on a mismatch.
#[pyfunction]
fn verify_log(path: PathBuf) -> PyResult<()> {
    let log = SessionLog::load(&path).map_err(value_err)?;
    verify(&log).map_err(value_err)
}

/// Scores a directory of session logs. The markdown table is under "markdown".
#[pyfunction]
#[pyo3(signature = (logs_dir, label="agent"))]
fn evaluate<'py>(py: Python<'py>, logs_dir: PathBuf, label: &str) -> PyResult<Bound<'py, PyAny>> {
    let logs = SessionLog::load_dir(&logs_dir).map_err(value_err)?;
    let stats = logs.iter().map(score_session).collect::<Result<Vec<_>, _>>().map_err(value_err)?;
    let report = aggregate(&stats).map_err(value_err)?;
    let out = to_py(py, &report)?;
    out.set_item("markdown", report.to_markdown(label))?;
    Ok(out)
}

#[pymodule]
pub fn minebench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(parse_board, m)?)?;
    m.add_function(wrap_pyfunction!(extract_action, m)?)?;
    m.add_function(wrap_pyfunction!(generate_suite, m)?)?;
    m.add_function(wrap_pyfunction!(play, m)?)?;
    m.add_function(wrap_pyfunction!(verify_log, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
