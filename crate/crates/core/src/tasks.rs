//! Board-understanding tasks: board navigation (report the state at a
//! coordinate) and neighbor counting (count a state among a cell's
//! neighbors).

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boardgen::{rng, substream_seed, uniform_below};
use crate::engine::{all_coords, center, neighbors, Action, BoardView, CellView, Coord, GameState, MineField};
use crate::session::single_point_rule;
use crate::textboard::{self, Format, RenderOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("target {0} is outside the board")]
    OutOfBounds(Coord),
    #[error("query state {0:?} is not one of unopened, blank, 1 or 2")]
    BadQuery(CellView),
}

/// States a counting question may ask about.
pub const QUERY_STATES: [CellView; 4] =
    [CellView::Unopened, CellView::Blank, CellView::Numbered(1), CellView::Numbered(2)];

/// A played game: ground truth plus the full action history, opening move
/// included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedGame {
    pub id: String,
    pub field: MineField,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub view: BoardView,
    pub source_game: String,
    /// 1-based position in the source history of the last applied action.
    pub action_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavInstance {
    pub id: String,
    pub snapshot: Snapshot,
    pub target: Coord,
    pub gold: CellView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountInstance {
    pub id: String,
    pub snapshot: Snapshot,
    pub target: Coord,
    pub query: CellView,
    pub gold: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskInstance {
    Navigation(NavInstance),
    Counting(CountInstance),
}

impl TaskInstance {
    pub fn id(&self) -> &str {
        match self {
            TaskInstance::Navigation(n) => &n.id,
            TaskInstance::Counting(c) => &c.id,
        }
    }

    pub fn snapshot(&self) -> &Snapshot {
        match self {
            TaskInstance::Navigation(n) => &n.snapshot,
            TaskInstance::Counting(c) => &c.snapshot,
        }
    }

    pub fn target(&self) -> Coord {
        match self {
            TaskInstance::Navigation(n) => n.target,
            TaskInstance::Counting(c) => c.target,
        }
    }

    /// The expected answer as text under `opts`' symbols.
    pub fn gold_text(&self, opts: &RenderOptions) -> String {
        match self {
            TaskInstance::Navigation(n) => opts.symbols.token(n.gold).to_string(),
            TaskInstance::Counting(c) => c.gold.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleWarning {
    pub game: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledInstances {
    pub navigation: Vec<NavInstance>,
    pub counting: Vec<CountInstance>,
    pub warnings: Vec<SampleWarning>,
}

/// How many neighbors of `at` show `query`.
pub fn count_neighbors(view: &BoardView, at: Coord, query: CellView) -> Result<u8, TaskError> {
    if !QUERY_STATES.contains(&query) {
        return Err(TaskError::BadQuery(query));
    }
    if view.get(at).is_none() {
        return Err(TaskError::OutOfBounds(at));
    }
    Ok(neighbors(at, view.rows(), view.cols())
        .into_iter()
        .filter(|c| view.get(*c) == Some(query))
        .count() as u8)
}

/// Picks one interior snapshot per game (never the first or last action)
/// and `n_coords` targets on it, each used for one navigation and one
/// counting instance. Games with fewer than three actions, or whose history
/// does not replay, are skipped with a warning.
pub fn sample_instances(games: &[AnnotatedGame], n_coords: usize, seed: u64) -> SampledInstances {
    let mut out = SampledInstances::default();
    for (gi, game) in games.iter().enumerate() {
        if n_coords == 0 {
            break;
        }
        let warn = |reason: String| SampleWarning { game: game.id.clone(), reason };
        let len = game.actions.len();
        if len < 3 {
            out.warnings.push(warn(format!("history has {len} actions, need at least 3")));
            continue;
        }
        let mut rng = rng(substream_seed(seed, gi as u64));
        // 0-based index in 1..=len-2.
        let pick = 1 + uniform_below(&mut rng, (len - 2) as u64) as usize;
        let view = match GameState::replay(game.field.clone(), game.actions[0], game.actions[..=pick].iter().copied()) {
            Ok(g) => g.view().clone(),
            Err(e) => {
                out.warnings.push(warn(format!("history does not replay: {e}")));
                continue;
            }
        };
        let snapshot = Snapshot { view, source_game: game.id.clone(), action_index: pick + 1 };
        let cells: Vec<Coord> = all_coords(snapshot.view.rows(), snapshot.view.cols()).collect();
        for k in 0..n_coords {
            let target = cells[uniform_below(&mut rng, cells.len() as u64) as usize];
            let query = QUERY_STATES[uniform_below(&mut rng, 4) as usize];
            let gold_cell = snapshot.view.get(target).expect("sampled in bounds");
            let gold_count = count_neighbors(&snapshot.view, target, query).expect("valid query");
            out.navigation.push(NavInstance {
                id: format!("{}-nav-{k}", game.id),
                snapshot: snapshot.clone(),
                target,
                gold: gold_cell,
            });
            out.counting.push(CountInstance {
                id: format!("{}-count-{k}", game.id),
                snapshot: snapshot.clone(),
                target,
                query,
                gold: gold_count,
            });
        }
    }
    out
}

/// Synthesizes a winning history for `field` when no human annotation is
/// available: opens the center, then applies the single-point rules and,
/// when none fires, opens a random safe cell (the player is allowed to
/// peek at the field). Stops when solved or after `max_actions` moves.
pub fn self_play_annotation(id: &str, field: &MineField, seed: u64, max_actions: usize) -> AnnotatedGame {
    let c = center(field.rows(), field.cols());
    let first = Action::left(c.row, c.col);
    let mut game = GameState::with_first_action(field.clone(), first);
    let mut rng = rng(seed);
    let mut actions = vec![first];
    game.apply(first).expect("fresh game");
    while !game.status().is_terminal() && actions.len() < max_actions {
        let a = single_point_rule(game.view()).unwrap_or_else(|| {
            let safe: Vec<Coord> = game
                .view()
                .iter()
                .filter(|(at, cell)| *cell == CellView::Unopened && !field.is_mine(*at))
                .map(|(at, _)| at)
                .collect();
            let at = safe[uniform_below(&mut rng, safe.len() as u64) as usize];
            Action::left(at.row, at.col)
        });
        game.apply(a).expect("game in progress");
        actions.push(a);
    }
    AnnotatedGame { id: id.to_string(), field: field.clone(), actions }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskPromptOptions {
    pub representation: RenderOptions,
    pub with_example: bool,
    pub with_cot: bool,
}

impl TaskPromptOptions {
    /// Navigation default: no example, no step-by-step instruction.
    pub fn navigation(representation: RenderOptions) -> Self {
        Self { representation, with_example: false, with_cot: false }
    }

    /// Counting default: worked example and step-by-step instruction.
    pub fn counting(representation: RenderOptions) -> Self {
        Self { representation, with_example: true, with_cot: true }
    }

    pub fn for_instance(instance: &TaskInstance, representation: RenderOptions) -> Self {
        match instance {
            TaskInstance::Navigation(_) => Self::navigation(representation),
            TaskInstance::Counting(_) => Self::counting(representation),
        }
    }
}

/// Fixed board used by the worked examples.
fn example_view() -> BoardView {
    use CellView::{Blank as B, Flagged as F, Numbered as N, Unopened as U};
    BoardView::from_cells(
        5,
        5,
        vec![
            U, U, N(1), B, B, //
            U, N(2), N(1), B, B, //
            F, N(2), B, B, B, //
            U, N(2), N(1), N(1), B, //
            U, U, U, N(1), B,
        ],
    )
}

fn describe_states(o: &RenderOptions) -> String {
    let t = |c| o.prose_token(c);
    format!(
        "Each cell is in one of the following states:\n\
         - {u}: an unopened cell whose content is unknown.\n\
         - {b}: a blank cell; it is opened and has no adjacent mines.\n\
         - {f}: a flagged cell, marked by the player as suspected to contain a mine.\n\
         - {n1} to {n8}: a numbered cell; it is opened and the number gives how many of its \
         neighboring cells, including diagonal ones, contain mines.",
        u = t(CellView::Unopened),
        b = t(CellView::Blank),
        f = t(CellView::Flagged),
        n1 = t(CellView::Numbered(1)),
        n8 = t(CellView::Numbered(8)),
    )
}

/// How the rendered board is laid out, in prose.
pub(crate) fn describe_layout(o: &RenderOptions) -> &'static str {
    match (o.format, o.with_indices) {
        (Format::Table, true) => {
            "The board is shown as a table. Rows are separated by line breaks and columns by commas. \
             The first line lists the column indices and every following line starts with its row \
             index; cell states are enclosed in `' quotation marks."
        }
        (Format::Table, false) => {
            "The board is shown as a table without indices. Rows are separated by line breaks and \
             columns by commas; the first line is row 1 and the first entry of each line is column 1. \
             Cell states are enclosed in `' quotation marks."
        }
        (Format::Coordinate, _) => {
            "The board is shown as a list of cells, one per line, each written as \
             (row,column): state."
        }
    }
}

fn question(instance: &TaskInstance, o: &RenderOptions) -> String {
    let t = instance.target();
    match instance {
        TaskInstance::Navigation(_) => {
            format!("Question: What is the state of the cell at ({},{})?", t.row, t.col)
        }
        TaskInstance::Counting(c) => format!(
            "Question: Among the neighboring cells of ({},{}), including diagonal neighbors, how many are in the state {}?",
            t.row,
            t.col,
            o.prose_token(c.query)
        ),
    }
}

const NAV_FORMAT: &str = "Reply with the state only, on a final line of the form \"ANSWER: <state>\".";
const COUNT_FORMAT: &str = "End your reply with a final line of the form \"ANSWER: <number>\".";
const COT: &str = "Let's think step by step. First list the coordinates of every neighbor of the \
                   target cell, then write down the state of each neighbor, and finally count how \
                   many of them are in the requested state.";

fn worked_example(instance: &TaskInstance, o: &RenderOptions, with_cot: bool) -> String {
    let view = example_view();
    let board = textboard::render(&view, o);
    match instance {
        TaskInstance::Navigation(_) => {
            let target = Coord::new(2, 2);
            let probe = TaskInstance::Navigation(NavInstance {
                id: String::new(),
                snapshot: Snapshot { view: view.clone(), source_game: String::new(), action_index: 0 },
                target,
                gold: view.get(target).unwrap(),
            });
            format!(
                "Example:\nBoard:\n{board}\n{}\nANSWER: {}",
                question(&probe, o),
                probe.gold_text(o)
            )
        }
        TaskInstance::Counting(_) => {
            let target = Coord::new(4, 2);
            let query = CellView::Unopened;
            let gold = count_neighbors(&view, target, query).unwrap();
            let probe = TaskInstance::Counting(CountInstance {
                id: String::new(),
                snapshot: Snapshot { view: view.clone(), source_game: String::new(), action_index: 0 },
                target,
                query,
                gold,
            });
            let mut s = format!("Example:\nBoard:\n{board}\n{}\n", question(&probe, o));
            if with_cot {
                let cells = neighbors(target, view.rows(), view.cols());
                let list: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
                s.push_str(&format!("The neighbors of {target} are {}.\n", list.join(", ")));
                let states: Vec<String> = cells
                    .iter()
                    .map(|c| format!("{c} is {}", o.prose_token(view.get(*c).unwrap())))
                    .collect();
                s.push_str(&format!("Their states: {}.\n", states.join(", ")));
                s.push_str(&format!(
                    "{gold} of them are in the state {}.\n",
                    o.prose_token(query)
                ));
            }
            s.push_str(&format!("ANSWER: {gold}"));
            s
        }
    }
}

/// Full prompt text for one instance. Byte-stable for a given
/// `(instance, opts)`. Counting prompts always carry the worked example.
pub fn build_task_prompt(instance: &TaskInstance, opts: &TaskPromptOptions) -> String {
    let o = &opts.representation;
    let view = &instance.snapshot().view;
    let mut parts = vec![
        format!(
            "You are looking at a Minesweeper board with {} rows and {} columns. Coordinates are \
             written as (row,column) and both start from 1 at the top-left corner.",
            view.rows(),
            view.cols()
        ),
        describe_states(o),
        describe_layout(o).to_string(),
    ];
    let counting = matches!(instance, TaskInstance::Counting(_));
    if opts.with_example || counting {
        parts.push(worked_example(instance, o, opts.with_cot));
    }
    parts.push(format!("Board:\n{}", textboard::render(view, o)));
    parts.push(question(instance, o));
    if opts.with_cot {
        parts.push(COT.to_string());
    }
    parts.push(if counting { COUNT_FORMAT } else { NAV_FORMAT }.to_string());
    parts.join("\n\n")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grade {
    pub correct: bool,
    pub unparseable: bool,
    pub extracted: Option<String>,
}

static ANSWER_MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)answer\s*:?").unwrap());
static QUOTED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"`([^`'\s]+)'|"([^"\s]+)"|'([^'\s]+)'"#).unwrap());
static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").unwrap());

/// Text after the last answer marker, or else the last non-empty line.
fn answer_segment(response: &str) -> &str {
    if let Some(m) = ANSWER_MARKER.find_iter(response).last() {
        return &response[m.end()..];
    }
    response.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("")
}

/// Last state token in `response` under `opts`' symbols: quoted tokens are
/// preferred, then bare words (trailing punctuation stripped).
pub fn extract_state(response: &str, opts: &RenderOptions) -> Option<String> {
    let seg = answer_segment(response);
    let is_token = |t: &str| opts.symbols.cell_for(t).is_some();
    let quoted = QUOTED
        .captures_iter(seg)
        .filter_map(|c| c.iter().skip(1).flatten().next().map(|m| m.as_str()))
        .filter(|t| is_token(t))
        .last();
    if let Some(t) = quoted {
        return Some(t.to_string());
    }
    seg.split_whitespace()
        .rev()
        .find_map(|w| {
            if is_token(w) {
                return Some(w);
            }
            let trimmed = w.trim_matches(|c: char| matches!(c, '.' | ',' | ';' | '!' | '*' | '`' | '\'' | '"'));
            is_token(trimmed).then_some(trimmed)
        })
        .map(str::to_string)
}

pub fn extract_count(response: &str) -> Option<u8> {
    INTEGER.find_iter(answer_segment(response)).last().and_then(|m| m.as_str().parse().ok())
}

/// Exact-match grading. Responses with no recognizable answer are wrong
/// and tagged unparseable.
pub fn grade(response: &str, instance: &TaskInstance, opts: &RenderOptions) -> Grade {
    let (extracted, correct) = match instance {
        TaskInstance::Navigation(n) => {
            let got = extract_state(response, opts);
            let ok = got.as_deref() == Some(opts.symbols.token(n.gold));
            (got, ok)
        }
        TaskInstance::Counting(c) => {
            let got = extract_count(response);
            (got.map(|n| n.to_string()), got == Some(c.gold))
        }
    };
    Grade { correct, unparseable: extracted.is_none(), extracted }
}
