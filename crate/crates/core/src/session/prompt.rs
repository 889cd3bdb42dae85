//! Gameplay prompt templates for both prompting modes.

use std::sync::OnceLock;

use regex::{Captures, Regex};

use super::agent::{Context, Message};
use super::{PromptMode, SessionConfig, Turn};
use crate::engine::{Action, BoardView, CellView, FailCause, Feedback, MineField};
use crate::tasks::describe_layout;
use crate::textboard::{render, RenderOptions};

/// Rewrites game vocabulary into the neutral puzzle wording: "mine" becomes
/// "thorn" and click names become the abstract action letters.
pub fn obfuscate(text: &str) -> String {
    const PHRASES: &[(&str, &str)] = &[
        ("Minesweeper", "a grid logic puzzle"),
        ("Cannot left-click", "Cannot apply action L to"),
        ("Cannot right-click", "Cannot apply action R to"),
        ("Cannot middle-click", "Cannot apply action M to"),
        ("left-clicking", "applying action L"),
        ("right-clicking", "applying action R"),
        ("middle-clicking", "applying action M"),
        ("Left-click", "Action L"),
        ("Right-click", "Action R"),
        ("Middle-click", "Action M"),
        ("left-click", "action L"),
        ("right-click", "action R"),
        ("middle-click", "action M"),
    ];
    let mut out = text.to_string();
    for (from, to) in PHRASES {
        out = out.replace(from, to);
    }
    static MINE: OnceLock<Regex> = OnceLock::new();
    let re = MINE.get_or_init(|| Regex::new("(?i)mine").unwrap());
    re.replace_all(&out, |c: &Captures| {
        let m = &c[0];
        if m == "MINE" {
            "THORN".to_string()
        } else if m.starts_with('M') {
            "Thorn".to_string()
        } else {
            "thorn".to_string()
        }
    })
    .into_owned()
}

fn prose(config: &SessionConfig, text: String) -> String {
    if config.obfuscate_prose {
        obfuscate(&text)
    } else {
        text
    }
}

fn intro(rows: usize, cols: usize, mines: usize) -> String {
    format!(
        "You are playing Minesweeper on a board with {rows} rows and {cols} columns that hides \
         {mines} mines. Coordinates are written as (row,column) and both start from 1 at the \
         top-left corner.\n\n\
         Rules:\n\
         - Opening a cell that contains a mine loses the game.\n\
         - A number on an opened cell tells how many of its neighboring cells, including \
         diagonal ones, contain mines.\n\
         - Opening a blank cell automatically opens all of its neighbors, spreading through \
         connected blank cells.\n\
         - You win once every safe cell is opened, or once every mine is flagged and no other \
         cell is flagged."
    )
}

fn legend(o: &RenderOptions) -> String {
    let t = |c| o.prose_token(c);
    format!(
        "Cell states:\n\
         - {u}: an unopened cell.\n\
         - {b}: a blank cell; it is opened and has no neighboring mines.\n\
         - {f}: a flagged cell, marked as containing a mine.\n\
         - {n1} to {n8}: a numbered cell; it is opened and the number counts its neighboring mines.",
        u = t(CellView::Unopened),
        b = t(CellView::Blank),
        f = t(CellView::Flagged),
        n1 = t(CellView::Numbered(1)),
        n8 = t(CellView::Numbered(8)),
    )
}

const ACTIONS: &str = "Actions:\n\
- L(r,c): left-click. Opens the unopened cell at row r, column c.\n\
- R(r,c): right-click. Places a flag on an unopened cell, or removes the flag from a flagged cell.\n\
- M(r,c): middle-click. Works on a numbered cell whose number equals its count of flagged neighbors: \
all of its other unopened neighbors are opened at once. If one of those flags is wrong, the game is lost.";

const FORMAT: &str = "In every reply, first explain your reasoning, then end with exactly one action on a \
final line of the form \"ACTION: K(r,c)\", where K is L, R or M and r and c are the row and column of \
the target cell.";

const NO_REPEAT: &str = "Do not repeat an action you have already taken. A repeated action wastes one of \
your moves.";

/// The shared board for the in-context examples.
#[cfg(test)]
fn example_field() -> MineField {
    use crate::engine::Coord;
    MineField::new(3, 3, [Coord::new(1, 1), Coord::new(1, 2)]).unwrap()
}

fn example_view(flags: &[(i32, i32)]) -> BoardView {
    use CellView::{Blank as B, Numbered as N, Unopened as U};
    let mut cells = vec![U, U, U, N(2), N(2), N(1), B, B, B];
    for &(r, c) in flags {
        cells[((r - 1) * 3 + (c - 1)) as usize] = CellView::Flagged;
    }
    BoardView::from_cells(3, 3, cells)
}

fn examples(config: &SessionConfig) -> Option<String> {
    let o = &config.representation;
    let t = |c| o.prose_token(c);
    let mut parts = Vec::new();
    if config.examples.left_click {
        parts.push(format!(
            "Example 1:\nBoard:\n{}\nReasoning: The cell (2,3) shows {} and already has one flagged \
             neighbor, (1,2). Its other unopened neighbor, (1,3), cannot contain a mine, so it is \
             safe to open.\nACTION: L(1,3)",
            render(&example_view(&[(1, 2)]), o),
            t(CellView::Numbered(1)),
        ));
    }
    if config.examples.right_click {
        parts.push(format!(
            "Example 2:\nBoard:\n{}\nReasoning: The cell (2,1) shows {} and has exactly two unopened \
             neighbors, (1,1) and (1,2). Both must contain mines, so (1,1) should be flagged.\n\
             ACTION: R(1,1)",
            render(&example_view(&[]), o),
            t(CellView::Numbered(2)),
        ));
    }
    if config.examples.middle_click {
        parts.push(format!(
            "Example 3:\nBoard:\n{}\nReasoning: The cell (2,3) shows {} and its only neighboring mine \
             is already flagged at (1,2). Every other unopened neighbor is safe, so middle-clicking on \
             (2,3) opens them all.\nACTION: M(2,3)",
            render(&example_view(&[(1, 2)]), o),
            t(CellView::Numbered(1)),
        ));
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("\n\n"))
    }
}

fn first_move(first: Action, max_actions: usize) -> String {
    format!(
        "The game always begins by left-clicking on the center cell, {first}. This first action has \
         already been made for you and the board below shows its result. From here you may take \
         at most {max_actions} actions, and invalid actions count toward that limit."
    )
}

/// Everything before the board: rules, legend, layout, actions, examples
/// and instructions. Shared by both modes.
fn preamble(field: &MineField, config: &SessionConfig, first: Action) -> String {
    let o = &config.representation;
    let mut parts = vec![
        intro(field.rows(), field.cols(), field.mine_count()),
        legend(o),
        describe_layout(o).to_string(),
        ACTIONS.to_string(),
        FORMAT.to_string(),
    ];
    if let Some(ex) = examples(config) {
        parts.push(ex);
    }
    parts.push(NO_REPEAT.to_string());
    parts.push(first_move(first, config.max_actions));
    let text = parts.join("\n\n");
    // Boards inside the examples never contain the word being replaced.
    prose(config, text)
}

const ASK: &str = "What is your next action?";

fn board_block(view: &BoardView, config: &SessionConfig) -> String {
    format!("Current board:\n{}", render(view, &config.representation))
}

/// Text relayed to the agent after `action` produced `feedback`.
/// `view` is the board after the action.
pub fn feedback_text(action: Action, feedback: &Feedback, view: &BoardView) -> String {
    match feedback {
        Feedback::BoardUpdated { revealed, flag_changes } => {
            if let Some(&at) = flag_changes.first() {
                if view.get(at) == Some(CellView::Flagged) {
                    format!("Action {action} placed a flag at {at}.")
                } else {
                    format!("Action {action} removed the flag at {at}.")
                }
            } else if revealed.is_empty() {
                format!("Action {action} was applied but opened no new cells.")
            } else {
                format!("Action {action} opened {}.", plural_cells(revealed.len()))
            }
        }
        Feedback::Invalid { message, .. } => {
            format!("Action {action} was not applied. {message} The board is unchanged.")
        }
        Feedback::GameSolved => format!("Action {action} solved the board. You win!"),
        Feedback::GameFailed { cause: FailCause::MineTriggered(at) } => {
            format!("Action {action} opened a mine at {at}. Game over.")
        }
        Feedback::GameFailed { cause: FailCause::WrongFlagChord(at) } => {
            format!("Action {action} relied on a wrong flag at {at}. Game over.")
        }
    }
}

/// One-phrase summary used in the compact history.
pub fn feedback_summary(feedback: &Feedback, view: &BoardView) -> String {
    match feedback {
        Feedback::BoardUpdated { revealed, flag_changes } => {
            if let Some(&at) = flag_changes.first() {
                if view.get(at) == Some(CellView::Flagged) {
                    format!("flagged {at}")
                } else {
                    format!("unflagged {at}")
                }
            } else if revealed.is_empty() {
                "no change".to_string()
            } else {
                format!("opened {}", plural_cells(revealed.len()))
            }
        }
        Feedback::Invalid { message, .. } => message.clone(),
        Feedback::GameSolved => "solved".to_string(),
        Feedback::GameFailed { cause: FailCause::MineTriggered(at) } => format!("mine at {at}, game over"),
        Feedback::GameFailed { cause: FailCause::WrongFlagChord(at) } => {
            format!("wrong flag at {at}, game over")
        }
    }
}

fn plural_cells(n: usize) -> String {
    if n == 1 {
        "1 cell".to_string()
    } else {
        format!("{n} cells")
    }
}

/// `N. K(r,c) → summary`, one line per parsed turn (the opening move is
/// not listed).
pub fn history_lines(turns: &[Turn]) -> Vec<String> {
    turns
        .iter()
        .filter_map(|t| {
            let a = t.parsed?;
            let summary = t.feedback.as_ref().map(|f| feedback_summary(f, &t.view_after))?;
            Some((a, summary))
        })
        .enumerate()
        .map(|(i, (a, s))| format!("{}. {a} \u{2192} {s}", i + 1))
        .collect()
}

fn compact_prompt(
    field: &MineField,
    config: &SessionConfig,
    first: Action,
    turns: &[Turn],
    view: &BoardView,
) -> String {
    let lines = history_lines(turns);
    let history = if lines.is_empty() {
        "Action history: no actions yet.".to_string()
    } else {
        prose(config, format!("Action history:\n{}", lines.join("\n")))
    };
    format!(
        "{}\n\n{}\n\n{}\n\n{ASK}",
        preamble(field, config, first),
        history,
        board_block(view, config)
    )
}

/// Context for the first agent call, with the opening move already applied.
pub fn build_initial_prompt(field: &MineField, config: &SessionConfig, first: Action, view: &BoardView) -> Context {
    match config.mode {
        PromptMode::NC => Context::Conversation(vec![Message::user(format!(
            "{}\n\n{}\n\n{ASK}",
            preamble(field, config, first),
            board_block(view, config)
        ))]),
        PromptMode::CH => Context::Prompt(compact_prompt(field, config, first, &[], view)),
    }
}

/// Context for the next call after `turns` (the last of which just ran).
/// NC appends the agent's reply and one user message; CH recompiles.
pub fn next_context(
    previous: Context,
    field: &MineField,
    config: &SessionConfig,
    first: Action,
    turns: &[Turn],
    view: &BoardView,
) -> Context {
    match (config.mode, previous) {
        (PromptMode::NC, Context::Conversation(mut msgs)) => {
            let last = turns.last().expect("next_context follows a turn");
            msgs.push(Message::assistant(last.raw_response.clone()));
            let relay = match (last.parsed, &last.feedback) {
                (Some(a), Some(f)) => prose(config, feedback_text(a, f, view)),
                _ => String::new(),
            };
            msgs.push(Message::user(format!("{relay}\n\n{}\n\n{ASK}", board_block(view, config))));
            Context::Conversation(msgs)
        }
        _ => Context::Prompt(compact_prompt(field, config, first, turns, view)),
    }
}
