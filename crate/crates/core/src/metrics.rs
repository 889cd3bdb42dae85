//! Objective gameplay metrics over session logs.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, CellView, Feedback, GameState, GameStatus};
use crate::session::{feedback_text, Outcome, SessionLog};
use crate::textboard::render;

/// Where a log stops agreeing with an engine replay of its own actions.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("log {board_id} is not replay-consistent at {location}: expected {expected}, logged {logged}")]
pub struct ReplayDiff {
    pub board_id: String,
    pub location: String,
    pub expected: String,
    pub logged: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty list of boards")]
    Empty,
    #[error(transparent)]
    Inconsistent(#[from] ReplayDiff),
}

/// Replays the opening and every parsed action on a fresh game and checks
/// the logged feedback, snapshots and outcome.
pub fn verify_log(log: &SessionLog) -> Result<(), ReplayDiff> {
    let diff = |location: String, expected: String, logged: String| ReplayDiff {
        board_id: log.board_id.clone(),
        location,
        expected,
        logged,
    };
    let mut game = GameState::with_first_action(log.field.clone(), log.opening.action);
    let fb = game
        .apply(log.opening.action)
        .map_err(|e| diff("opening".into(), "an accepted action".into(), e.to_string()))?;
    if fb != log.opening.feedback {
        return Err(diff("opening".into(), format!("{fb:?}"), format!("{:?}", log.opening.feedback)));
    }
    if game.view() != &log.opening.view_after {
        return Err(diff("opening".into(), "engine view".into(), "different snapshot".into()));
    }
    for (i, turn) in log.turns.iter().enumerate() {
        let at = format!("turn {}", turn.index);
        if turn.index != i + 1 {
            return Err(diff(at, format!("index {}", i + 1), turn.index.to_string()));
        }
        match turn.parsed {
            None => {
                if turn.feedback.is_some() {
                    return Err(diff(at, "no feedback".into(), "feedback".into()));
                }
                if i + 1 != log.turns.len() {
                    return Err(diff(at, "session end".into(), "later turns".into()));
                }
            }
            Some(a) => {
                let fb = game.apply(a).map_err(|e| diff(at.clone(), "an accepted action".into(), e.to_string()))?;
                if Some(&fb) != turn.feedback.as_ref() {
                    return Err(diff(at, format!("{fb:?}"), format!("{:?}", turn.feedback)));
                }
            }
        }
        if game.view() != &turn.view_after {
            return Err(diff(at, "engine view".into(), "different snapshot".into()));
        }
    }
    let counted = log.counted_actions();
    if counted > log.config.max_actions {
        return Err(diff("log".into(), format!("at most {} counted actions", log.config.max_actions), counted.to_string()));
    }
    let consistent = match (log.outcome, game.status()) {
        (Outcome::Solved, GameStatus::Solved) | (Outcome::Failed, GameStatus::Failed { .. }) => true,
        (Outcome::AbortedUnrecognizable, GameStatus::InProgress) => {
            log.turns.last().is_some_and(|t| t.parsed.is_none())
        }
        (Outcome::Exhausted | Outcome::TransportFailed, GameStatus::InProgress) => true,
        _ => false,
    };
    if !consistent {
        return Err(diff("outcome".into(), game.status().to_string(), format!("{:?}", log.outcome)));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardStats {
    pub board_id: String,
    pub outcome: Outcome,
    pub solved: bool,
    pub failed: bool,
    pub mines_total: usize,
    pub mines_correctly_flagged: usize,
    /// Every agent reply, including invalid and unrecognized ones.
    pub actions_total: usize,
    pub actions_valid: usize,
    pub actions_invalid: usize,
    pub actions_unrecognized: usize,
    /// The move that lost the game (0 or 1).
    pub actions_failing: usize,
    pub actions_repeated: usize,
    /// Valid actions that opened a cell, placed a flag or won.
    pub actions_effective: usize,
}

/// Scores one log. Refuses logs that do not replay.
pub fn score_session(log: &SessionLog) -> Result<BoardStats, ReplayDiff> {
    verify_log(log)?;
    let mut s = BoardStats {
        board_id: log.board_id.clone(),
        outcome: log.outcome,
        solved: log.outcome == Outcome::Solved,
        failed: log.outcome == Outcome::Failed,
        mines_total: log.field.mine_count(),
        mines_correctly_flagged: 0,
        actions_total: log.turns.len(),
        actions_valid: 0,
        actions_invalid: 0,
        actions_unrecognized: 0,
        actions_failing: 0,
        actions_repeated: 0,
        actions_effective: 0,
    };
    let mut seen: HashSet<Action> = HashSet::new();
    for turn in &log.turns {
        let Some(a) = turn.parsed else {
            s.actions_unrecognized += 1;
            continue;
        };
        if !seen.insert(a) {
            s.actions_repeated += 1;
        }
        match turn.feedback.as_ref().expect("verified parsed turn has feedback") {
            Feedback::Invalid { .. } => s.actions_invalid += 1,
            Feedback::GameFailed { .. } => s.actions_failing += 1,
            Feedback::GameSolved => {
                s.actions_valid += 1;
                s.actions_effective += 1;
            }
            Feedback::BoardUpdated { revealed, flag_changes } => {
                s.actions_valid += 1;
                let placed = flag_changes.iter().any(|c| turn.view_after.get(*c) == Some(CellView::Flagged));
                if !revealed.is_empty() || placed {
                    s.actions_effective += 1;
                }
            }
        }
    }
    let end = log.final_view();
    s.mines_correctly_flagged =
        log.field.mines().iter().filter(|m| end.get(**m) == Some(CellView::Flagged)).count();
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n_games: usize,
    pub n_solved: usize,
    pub n_failed: usize,
    pub pct_solved: f64,
    pub pct_failed: f64,
    pub mines_total: usize,
    pub mines_flagged: usize,
    pub pct_flagged: f64,
    pub total_actions: usize,
    pub valid_actions: usize,
    pub repeated_actions: usize,
    pub effective_actions: usize,
    pub unrecognized_actions: usize,
    pub pct_valid: f64,
    pub pct_repeated: f64,
    /// `% valid` with unrecognized replies left out of the denominator.
    pub pct_valid_excluding_unrecognized: f64,
    pub per_board: Vec<BoardStats>,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn aggregate(stats: &[BoardStats]) -> Result<Report, MetricsError> {
    if stats.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sum = |f: fn(&BoardStats) -> usize| stats.iter().map(f).sum::<usize>();
    let n = stats.len();
    let n_solved = stats.iter().filter(|s| s.solved).count();
    let n_failed = stats.iter().filter(|s| s.failed).count();
    let mines_total = sum(|s| s.mines_total);
    let mines_flagged = sum(|s| s.mines_correctly_flagged);
    let total_actions = sum(|s| s.actions_total);
    let valid_actions = sum(|s| s.actions_valid);
    let repeated_actions = sum(|s| s.actions_repeated);
    let unrecognized_actions = sum(|s| s.actions_unrecognized);
    Ok(Report {
        n_games: n,
        n_solved,
        n_failed,
        pct_solved: pct(n_solved, n),
        pct_failed: pct(n_failed, n),
        mines_total,
        mines_flagged,
        pct_flagged: pct(mines_flagged, mines_total),
        total_actions,
        valid_actions,
        repeated_actions,
        effective_actions: sum(|s| s.actions_effective),
        unrecognized_actions,
        pct_valid: pct(valid_actions, total_actions),
        pct_repeated: pct(repeated_actions, total_actions),
        pct_valid_excluding_unrecognized: pct(valid_actions, total_actions - unrecognized_actions),
        per_board: stats.to_vec(),
    })
}

impl Report {
    /// Two-column summary table in markdown.
    pub fn to_markdown(&self, label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| Metric | {label} |");
        s.push_str("|---|---|\n");
        let rows = [
            ("# Games", self.n_games.to_string()),
            ("% Solved", format!("{:.1}", self.pct_solved)),
            ("% Failed", format!("{:.1}", self.pct_failed)),
            ("# Total Mines", self.mines_total.to_string()),
            ("% Mines Flagged", format!("{:.1}", self.pct_flagged)),
            ("# Total Actions", self.total_actions.to_string()),
            ("% Valid Actions", format!("{:.1}", self.pct_valid)),
            ("% Repeated Actions", format!("{:.1}", self.pct_repeated)),
            ("# Effective Actions", self.effective_actions.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "| {k} | {v} |");
        }
        let _ = writeln!(
            s,
            "\nUnrecognized replies count toward total actions ({} of {}). Excluding them, % valid is {:.1}.",
            self.unrecognized_actions, self.total_actions, self.pct_valid_excluding_unrecognized
        );
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewTurn {
    pub index: usize,
    pub board_before: String,
    pub raw_response: String,
    pub parsed: Option<Action>,
    pub feedback: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewBoard {
    pub board_id: String,
    pub valid_actions: usize,
    pub turns: Vec<ReviewTurn>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewBundle {
    pub notice: Option<String>,
    pub boards: Vec<ReviewBoard>,
}

/// The `k` boards with the most valid actions, ties going to the smaller
/// board id, with each turn's reasoning next to the board it saw.
pub fn select_reasoning_chains(logs: &[SessionLog], k: usize) -> Result<ReviewBundle, ReplayDiff> {
    let mut ranked = Vec::with_capacity(logs.len());
    for log in logs {
        ranked.push((score_session(log)?.actions_valid, log));
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.board_id.cmp(&b.1.board_id)));
    let notice = (logs.len() < k)
        .then(|| format!("only {} logs available, {k} requested; returning all", logs.len()));
    let boards = ranked
        .into_iter()
        .take(k)
        .map(|(valid, log)| {
            let opts = &log.config.representation;
            let mut before = &log.opening.view_after;
            let turns = log
                .turns
                .iter()
                .map(|t| {
                    let rt = ReviewTurn {
                        index: t.index,
                        board_before: render(before, opts),
                        raw_response: t.raw_response.clone(),
                        parsed: t.parsed,
                        feedback: t.parsed.zip(t.feedback.as_ref()).map(|(a, f)| feedback_text(a, f, &t.view_after)),
                    };
                    before = &t.view_after;
                    rt
                })
                .collect();
            ReviewBoard { board_id: log.board_id.clone(), valid_actions: valid, turns }
        })
        .collect();
    Ok(ReviewBundle { notice, boards })
}

impl ReviewBundle {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Reasoning chains for review\n");
        if let Some(n) = &self.notice {
            let _ = writeln!(s, "\n> {n}");
        }
        for b in &self.boards {
            let _ = writeln!(s, "\n## Board {} ({} valid actions)", b.board_id, b.valid_actions);
            for t in &b.turns {
                let _ = writeln!(s, "\n### Turn {}\n\nBoard:\n\n```\n{}\n```\n", t.index, t.board_before);
                let _ = writeln!(s, "Response:\n\n```\n{}\n```\n", t.raw_response);
                match t.parsed {
                    Some(a) => {
                        let _ = writeln!(s, "Parsed action: {a}");
                    }
                    None => s.push_str("Parsed action: unrecognized\n"),
                }
                if let Some(f) = &t.feedback {
                    let _ = writeln!(s, "\nFeedback: {f}");
                }
            }
        }
        s
    }
}
