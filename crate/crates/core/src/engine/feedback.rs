//! Engine responses, including the fixed invalid-action catalog.
//!
//! The `Invalid` messages are a public contract: tools and prompts compare
//! them byte for byte. Only the board bounds are substituted.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::Coord;

/// Why an action was rejected. One variant per catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidKind {
    OutOfBounds,
    StartWithRightClick,
    StartWithMiddleClick,
    LeftClickBlank,
    LeftClickFlagged,
    LeftClickNumbered,
    MiddleClickBlank,
    MiddleClickFlagged,
    MiddleClickUnopened,
    MiddleClickNoFlags,
    MiddleClickFlagMismatch,
    RightClickBlank,
    RightClickNumbered,
}

impl InvalidKind {
    pub const ALL: [InvalidKind; 13] = [
        InvalidKind::OutOfBounds,
        InvalidKind::StartWithRightClick,
        InvalidKind::StartWithMiddleClick,
        InvalidKind::LeftClickBlank,
        InvalidKind::LeftClickFlagged,
        InvalidKind::LeftClickNumbered,
        InvalidKind::MiddleClickBlank,
        InvalidKind::MiddleClickFlagged,
        InvalidKind::MiddleClickUnopened,
        InvalidKind::MiddleClickNoFlags,
        InvalidKind::MiddleClickFlagMismatch,
        InvalidKind::RightClickBlank,
        InvalidKind::RightClickNumbered,
    ];

    /// The exact feedback text for a `rows x cols` board.
    pub fn message(self, rows: usize, cols: usize) -> String {
        const LEFT_ONLY: &str = "Left-click is only for unopened cells (`?').";
        const MIDDLE_ONLY: &str = "Middle-click is only for numbered cells (`1' to `8').";
        // The flagged-cell token is `?' here too; the text is kept verbatim.
        const RIGHT_ONLY: &str =
            "Right-click is only for unopened cells (`?') or flagged cells (`?').";
        match self {
            InvalidKind::OutOfBounds => format!(
                "Invalid Coordinates! Please make sure your coordinate are within [1, {rows}] for rows and [1, {cols}] for columns."
            ),
            InvalidKind::StartWithRightClick | InvalidKind::StartWithMiddleClick => {
                "Please begin by left-clicking on the center cell.".to_string()
            }
            InvalidKind::LeftClickBlank => {
                format!("Invalid action: Cannot left-click a blank cell. {LEFT_ONLY}")
            }
            InvalidKind::LeftClickFlagged => {
                format!("Invalid action: Cannot left-click a flagged cell. {LEFT_ONLY}")
            }
            InvalidKind::LeftClickNumbered => {
                format!("Invalid action: Cannot left-click a numbered cell. {LEFT_ONLY}")
            }
            InvalidKind::MiddleClickBlank => {
                format!("Invalid action: Cannot middle-click a blank cell. {MIDDLE_ONLY}")
            }
            InvalidKind::MiddleClickFlagged => {
                format!("Invalid action: Cannot middle-click a flagged cell. {MIDDLE_ONLY}")
            }
            InvalidKind::MiddleClickUnopened => {
                format!("Invalid action: Cannot middle-click an unopened cell. {MIDDLE_ONLY}")
            }
            InvalidKind::MiddleClickNoFlags => {
                "Error: No flagged cells detected nearby. Flag adjacent mines before middle-clicking."
                    .to_string()
            }
            InvalidKind::MiddleClickFlagMismatch => {
                "Error: Flag count mismatch. Ensure all adjacent mines are flagged before middle-clicking."
                    .to_string()
            }
            InvalidKind::RightClickBlank => {
                format!("Invalid action: Cannot right-click a blank cell. {RIGHT_ONLY}")
            }
            InvalidKind::RightClickNumbered => {
                format!("Invalid action: Cannot right-click a numbered cell. {RIGHT_ONLY}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "cause", content = "at", rename_all = "snake_case")]
pub enum FailCause {
    MineTriggered(Coord),
    /// A chord was attempted over a flag that sits on a safe cell; carries
    /// that flag's coordinate.
    WrongFlagChord(Coord),
}

impl fmt::Display for FailCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailCause::MineTriggered(c) => write!(f, "mine triggered at {c}"),
            FailCause::WrongFlagChord(c) => write!(f, "middle-click over a wrong flag at {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Feedback {
    BoardUpdated { revealed: Vec<Coord>, flag_changes: Vec<Coord> },
    GameSolved,
    GameFailed { cause: FailCause },
    Invalid { kind: InvalidKind, message: String },
}

impl Feedback {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Feedback::Invalid { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Feedback::BoardUpdated { .. } => "board_updated",
            Feedback::GameSolved => "game_solved",
            Feedback::GameFailed { .. } => "game_failed",
            Feedback::Invalid { .. } => "invalid",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum GameStatus {
    InProgress,
    Solved,
    Failed { cause: FailCause },
    Aborted { reason: String },
}

impl GameStatus {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, GameStatus::InProgress)
    }
}

impl fmt::Display for GameStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameStatus::InProgress => f.write_str("in progress"),
            GameStatus::Solved => f.write_str("solved"),
            GameStatus::Failed { cause } => write!(f, "failed ({cause})"),
            GameStatus::Aborted { reason } => write!(f, "aborted ({reason})"),
        }
    }
}
