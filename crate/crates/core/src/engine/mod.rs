//! Minesweeper rules: validation, state transitions, flood fill, chording
//! and win/loss detection.

mod feedback;
mod types;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use feedback::{FailCause, Feedback, GameStatus, InvalidKind};
pub use types::{
    all_coords, center, enumerate_actions, neighbors, Action, BoardView, CellView, ClickKind,
    Coord, MineField,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid minefield: {0}")]
    InvalidField(String),
    #[error("game is over ({0}); no further actions are accepted")]
    GameOver(GameStatus),
    #[error("malformed action {0:?}")]
    BadAction(String),
}

/// Outcome of [`GameState::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validation {
    Ok,
    Invalid { kind: InvalidKind, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedAction {
    pub action: Action,
    pub feedback: Feedback,
}

/// A game in progress (or finished). Mutated by one caller at a time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    field: MineField,
    view: BoardView,
    status: GameStatus,
    applied: Vec<AppliedAction>,
    first_action: Action,
    first_action_done: bool,
}

impl GameState {
    /// Fresh game whose expected opening move is `L` at the board center.
    pub fn new(field: MineField) -> Self {
        let first = center(field.rows(), field.cols());
        Self::with_first_action(field, Action::left(first.row, first.col))
    }

    /// Fresh game with a custom expected opening move. Only `R`/`M` before
    /// the first accepted `L` are rejected; the coordinate is informational.
    pub fn with_first_action(field: MineField, first_action: Action) -> Self {
        let view = BoardView::unopened(field.rows(), field.cols());
        Self {
            field,
            view,
            status: GameStatus::InProgress,
            applied: Vec::new(),
            first_action,
            first_action_done: false,
        }
    }

    /// Rebuilds a game by applying `actions` in order to a fresh state.
    pub fn replay(
        field: MineField,
        first_action: Action,
        actions: impl IntoIterator<Item = Action>,
    ) -> Result<Self, EngineError> {
        let mut game = Self::with_first_action(field, first_action);
        for a in actions {
            game.apply(a)?;
        }
        Ok(game)
    }

    pub fn field(&self) -> &MineField {
        &self.field
    }

    pub fn view(&self) -> &BoardView {
        &self.view
    }

    pub fn status(&self) -> &GameStatus {
        &self.status
    }

    pub fn applied(&self) -> &[AppliedAction] {
        &self.applied
    }

    pub fn first_action(&self) -> Action {
        self.first_action
    }

    pub fn first_action_done(&self) -> bool {
        self.first_action_done
    }

    /// Marks an in-progress game as aborted (e.g. a session gave up).
    pub fn abort(&mut self, reason: impl Into<String>) {
        if !self.status.is_terminal() {
            self.status = GameStatus::Aborted { reason: reason.into() };
        }
    }

    /// Checks `a` against the invalid-action catalog without mutating.
    pub fn validate(&self, a: Action) -> Validation {
        let (rows, cols) = (self.field.rows(), self.field.cols());
        let invalid = |kind: InvalidKind| Validation::Invalid { kind, message: kind.message(rows, cols) };
        let Some(cell) = self.view.get(a.at) else {
            return invalid(InvalidKind::OutOfBounds);
        };
        if !self.first_action_done {
            match a.kind {
                ClickKind::R => return invalid(InvalidKind::StartWithRightClick),
                ClickKind::M => return invalid(InvalidKind::StartWithMiddleClick),
                ClickKind::L => {}
            }
        }
        match (a.kind, cell) {
            (ClickKind::L, CellView::Unopened) => Validation::Ok,
            (ClickKind::L, CellView::Blank) => invalid(InvalidKind::LeftClickBlank),
            (ClickKind::L, CellView::Flagged) => invalid(InvalidKind::LeftClickFlagged),
            (ClickKind::L, CellView::Numbered(_)) => invalid(InvalidKind::LeftClickNumbered),
            (ClickKind::R, CellView::Unopened | CellView::Flagged) => Validation::Ok,
            (ClickKind::R, CellView::Blank) => invalid(InvalidKind::RightClickBlank),
            (ClickKind::R, CellView::Numbered(_)) => invalid(InvalidKind::RightClickNumbered),
            (ClickKind::M, CellView::Blank) => invalid(InvalidKind::MiddleClickBlank),
            (ClickKind::M, CellView::Flagged) => invalid(InvalidKind::MiddleClickFlagged),
            (ClickKind::M, CellView::Unopened) => invalid(InvalidKind::MiddleClickUnopened),
            (ClickKind::M, CellView::Numbered(n)) => {
                let flags = self.flagged_neighbors(a.at);
                if flags == 0 {
                    invalid(InvalidKind::MiddleClickNoFlags)
                } else if flags != n as usize {
                    invalid(InvalidKind::MiddleClickFlagMismatch)
                } else {
                    Validation::Ok
                }
            }
        }
    }

    /// Applies one action. Invalid actions leave the board untouched but are
    /// still recorded in the history. Fails only on a finished game.
    pub fn apply(&mut self, a: Action) -> Result<Feedback, EngineError> {
        if self.status.is_terminal() {
            return Err(EngineError::GameOver(self.status.clone()));
        }
        let feedback = match self.validate(a) {
            Validation::Invalid { kind, message } => Feedback::Invalid { kind, message },
            Validation::Ok => {
                if a.kind == ClickKind::L {
                    self.first_action_done = true;
                }
                self.transition(a)
            }
        };
        self.applied.push(AppliedAction { action: a, feedback: feedback.clone() });
        Ok(feedback)
    }

    fn transition(&mut self, a: Action) -> Feedback {
        let feedback = match a.kind {
            ClickKind::L => {
                if self.field.is_mine(a.at) {
                    let cause = FailCause::MineTriggered(a.at);
                    self.status = GameStatus::Failed { cause };
                    return Feedback::GameFailed { cause };
                }
                let revealed = self.reveal_from(&[a.at]);
                Feedback::BoardUpdated { revealed, flag_changes: Vec::new() }
            }
            ClickKind::R => {
                let next = match self.view.get(a.at) {
                    Some(CellView::Flagged) => CellView::Unopened,
                    _ => CellView::Flagged,
                };
                self.view.set(a.at, next);
                Feedback::BoardUpdated { revealed: Vec::new(), flag_changes: vec![a.at] }
            }
            ClickKind::M => {
                let around = self.view.neighbors(a.at);
                let wrong = around
                    .iter()
                    .find(|c| self.view.get(**c) == Some(CellView::Flagged) && !self.field.is_mine(**c));
                if let Some(&c) = wrong {
                    let cause = FailCause::WrongFlagChord(c);
                    self.status = GameStatus::Failed { cause };
                    return Feedback::GameFailed { cause };
                }
                let starts: Vec<Coord> = around
                    .into_iter()
                    .filter(|c| self.view.get(*c) == Some(CellView::Unopened))
                    .collect();
                let revealed = self.reveal_from(&starts);
                Feedback::BoardUpdated { revealed, flag_changes: Vec::new() }
            }
        };
        if is_solved(&self.view, &self.field) {
            self.status = GameStatus::Solved;
            return Feedback::GameSolved;
        }
        feedback
    }

    /// Breadth-first reveal from safe `starts`. Blank cells expand to their
    /// unopened, unflagged neighbors in row-major order; numbered cells do
    /// not expand. Returns newly revealed cells in visit order.
    fn reveal_from(&mut self, starts: &[Coord]) -> Vec<Coord> {
        let mut revealed = Vec::new();
        let mut queue: VecDeque<Coord> = VecDeque::new();
        for &s in starts {
            if self.view.get(s) == Some(CellView::Unopened) {
                self.open(s, &mut revealed, &mut queue);
            }
        }
        while let Some(c) = queue.pop_front() {
            for n in self.view.neighbors(c) {
                if self.view.get(n) == Some(CellView::Unopened) {
                    self.open(n, &mut revealed, &mut queue);
                }
            }
        }
        revealed
    }

    fn open(&mut self, c: Coord, revealed: &mut Vec<Coord>, queue: &mut VecDeque<Coord>) {
        debug_assert!(!self.field.is_mine(c));
        let n = self.field.adjacent_mines(c);
        if n == 0 {
            self.view.set(c, CellView::Blank);
            queue.push_back(c);
        } else {
            self.view.set(c, CellView::Numbered(n));
        }
        revealed.push(c);
    }

    fn flagged_neighbors(&self, at: Coord) -> usize {
        self.view
            .neighbors(at)
            .into_iter()
            .filter(|c| self.view.get(*c) == Some(CellView::Flagged))
            .count()
    }
}

/// Solved when every mine is flagged with no extra flags, or when every
/// safe cell is revealed.
pub fn is_solved(view: &BoardView, field: &MineField) -> bool {
    let mut flags_exact = true;
    let mut all_safe_open = true;
    for (c, cell) in view.iter() {
        let mine = field.is_mine(c);
        if (cell == CellView::Flagged) != mine {
            flags_exact = false;
        }
        if !mine && !cell.is_revealed() {
            all_safe_open = false;
        }
    }
    flags_exact || all_safe_open
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(rows: usize, cols: usize, mines: &[(i32, i32)]) -> MineField {
        MineField::new(rows, cols, mines.iter().map(|&(r, c)| Coord::new(r, c))).unwrap()
    }

    fn msg(state: &mut GameState, a: Action) -> String {
        match state.apply(a).unwrap() {
            Feedback::Invalid { message, .. } => message,
            other => panic!("expected invalid feedback for {a}, got {other:?}"),
        }
    }

    #[test]
    fn neighbor_counts_for_corner_edge_interior() {
        assert_eq!(
            neighbors(Coord::new(1, 1), 9, 9),
            vec![Coord::new(1, 2), Coord::new(2, 1), Coord::new(2, 2)]
        );
        assert_eq!(neighbors(Coord::new(5, 5), 9, 9).len(), 8);
        // 3x3 window around (1,5): row 0 drops out, leaving (1,4),(1,6),(2,4),(2,5),(2,6).
        assert_eq!(
            neighbors(Coord::new(1, 5), 9, 9),
            vec![
                Coord::new(1, 4),
                Coord::new(1, 6),
                Coord::new(2, 4),
                Coord::new(2, 5),
                Coord::new(2, 6)
            ]
        );
        assert_eq!(neighbors(Coord::new(0, 0), 9, 9), vec![Coord::new(1, 1)]);
        assert!(neighbors(Coord::new(-3, 20), 9, 9).is_empty());
    }

    #[test]
    fn new_game_is_all_unopened() {
        let g = GameState::new(field(5, 5, &[(1, 1), (1, 5), (5, 1), (5, 5)]));
        assert_eq!(g.view().count(|c| c == CellView::Unopened), 25);
        assert_eq!(g.status(), &GameStatus::InProgress);
        assert!(g.applied().is_empty());
        assert!(!g.first_action_done());
        assert_eq!(g.first_action(), Action::left(3, 3));

        let g = GameState::new(field(1, 2, &[(1, 2)]));
        assert_eq!(g.view().count(|c| c == CellView::Unopened), 2);
        assert_eq!(g.first_action(), Action::left(1, 1));
    }

    #[test]
    fn field_rejects_bad_layouts() {
        assert!(MineField::new(0, 3, []).is_err());
        assert!(MineField::new(2, 2, [Coord::new(3, 1)]).is_err());
        assert!(MineField::new(2, 2, [Coord::new(1, 1), Coord::new(1, 1)]).is_err());
        assert!(MineField::new(1, 2, [Coord::new(1, 1), Coord::new(1, 2)]).is_err());
    }

    #[test]
    fn field_text_round_trip() {
        let f = field(5, 5, &[(5, 5), (1, 2)]);
        assert_eq!(f.to_text(), "5 5\n1 2\n5 5\n");
        assert_eq!(MineField::from_text(&f.to_text()).unwrap(), f);
        assert!(MineField::from_text("5 5\n1 x\n").is_err());
        assert!(MineField::from_text("").is_err());
    }

    #[test]
    fn flood_fill_from_corner_with_mines_in_last_column() {
        // Mines fill column 5 except row 3. Columns 1-3 have no adjacent mine,
        // column 4 is numbered, so the fill covers columns 1-4 and stops.
        let f = field(5, 5, &[(1, 5), (2, 5), (4, 5), (5, 5)]);
        let mut g = GameState::new(f);
        let fb = g.apply(Action::left(1, 1)).unwrap();
        let Feedback::BoardUpdated { revealed, .. } = fb else { panic!("{fb:?}") };
        // Hand-run BFS from (1,1) with row-major neighbor order.
        let expected: Vec<Coord> = [
            (1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (2, 3), (3, 1), (3, 2), (3, 3),
            (1, 4), (2, 4), (3, 4), (4, 1), (4, 2), (4, 3), (4, 4), (5, 1), (5, 2),
            (5, 3), (5, 4),
        ]
        .iter()
        .map(|&(r, c)| Coord::new(r, c))
        .collect();
        assert_eq!(revealed, expected);
        assert_eq!(g.view().get(Coord::new(1, 4)), Some(CellView::Numbered(2)));
        assert_eq!(g.view().get(Coord::new(3, 4)), Some(CellView::Numbered(2)));
        assert_eq!(g.view().get(Coord::new(3, 5)), Some(CellView::Unopened));
        // (3,5) is the last safe cell.
        assert_eq!(g.apply(Action::left(3, 5)).unwrap(), Feedback::GameSolved);
        assert_eq!(g.status(), &GameStatus::Solved);
    }

    #[test]
    fn right_click_toggles() {
        // (1,1) is safe but walled in by mines, so the opening leaves it closed.
        let mut g = GameState::new(field(5, 5, &[(1, 2), (2, 1), (2, 2)]));
        g.apply(Action::left(5, 5)).unwrap();
        assert_eq!(g.status(), &GameStatus::InProgress);
        let before = g.view().clone();
        g.apply(Action::right(1, 1)).unwrap();
        assert_eq!(g.view().get(Coord::new(1, 1)), Some(CellView::Flagged));
        g.apply(Action::right(1, 1)).unwrap();
        assert_eq!(g.view(), &before);
    }

    #[test]
    fn chord_over_wrong_flag_fails() {
        // (1,1) is numbered 1 because of the mine at (2,2); flag (1,2) instead.
        let f = field(3, 3, &[(2, 2)]);
        let mut g = GameState::new(f);
        g.apply(Action::left(1, 1)).unwrap();
        assert_eq!(g.view().get(Coord::new(1, 1)), Some(CellView::Numbered(1)));
        g.apply(Action::right(1, 2)).unwrap();
        let fb = g.apply(Action::middle(1, 1)).unwrap();
        let cause = FailCause::WrongFlagChord(Coord::new(1, 2));
        assert_eq!(fb, Feedback::GameFailed { cause });
        assert_eq!(g.status(), &GameStatus::Failed { cause });
        assert!(matches!(g.apply(Action::left(3, 3)), Err(EngineError::GameOver(_))));
    }

    #[test]
    fn chord_with_correct_flags_reveals_and_can_solve() {
        let f = field(3, 3, &[(1, 1), (3, 3)]);
        let mut g = GameState::new(f);
        g.apply(Action::left(1, 3)).unwrap();
        g.apply(Action::right(1, 1)).unwrap();
        let fb = g.apply(Action::middle(1, 2)).unwrap();
        assert_eq!(fb, Feedback::BoardUpdated { revealed: vec![Coord::new(2, 1)], flag_changes: vec![] });
        // Chording the 1 at (2,1) opens the last safe cells: single terminal feedback.
        assert_eq!(g.apply(Action::middle(2, 1)).unwrap(), Feedback::GameSolved);
        assert_eq!(g.view().get(Coord::new(3, 2)), Some(CellView::Numbered(1)));
    }

    #[test]
    fn flagging_every_mine_solves() {
        let f = field(3, 3, &[(1, 1), (3, 3)]);
        let mut g = GameState::new(f);
        g.apply(Action::left(2, 2)).unwrap();
        g.apply(Action::right(1, 1)).unwrap();
        assert_eq!(g.apply(Action::right(3, 3)).unwrap(), Feedback::GameSolved);
    }

    #[test]
    fn extra_flag_blocks_flag_victory() {
        let f = field(3, 3, &[(1, 1), (3, 3)]);
        let mut view = BoardView::unopened(3, 3);
        view.set(Coord::new(1, 1), CellView::Flagged);
        view.set(Coord::new(3, 3), CellView::Flagged);
        assert!(is_solved(&view, &f));
        view.set(Coord::new(1, 3), CellView::Flagged);
        assert!(!is_solved(&view, &f));
        assert!(!is_solved(&BoardView::unopened(3, 3), &f));
    }

    #[test]
    fn mine_click_fails_and_freezes_view() {
        let f = field(3, 3, &[(1, 1), (2, 2)]);
        let mut g = GameState::new(f);
        g.apply(Action::left(3, 3)).unwrap_err_or_update();
        let view = g.view().clone();
        let fb = g.apply(Action::left(1, 1)).unwrap();
        assert_eq!(fb, Feedback::GameFailed { cause: FailCause::MineTriggered(Coord::new(1, 1)) });
        assert_eq!(g.view(), &view);
    }

    trait UpdateExt {
        fn unwrap_err_or_update(self);
    }

    impl UpdateExt for Result<Feedback, EngineError> {
        fn unwrap_err_or_update(self) {
            assert!(matches!(self, Ok(Feedback::BoardUpdated { .. })), "{self:?}");
        }
    }

    #[test]
    fn invalid_actions_are_recorded_but_change_nothing() {
        let mut g = GameState::new(field(9, 9, &[(1, 1)]));
        let before = g.view().clone();
        assert_eq!(
            msg(&mut g, Action::left(0, 10)),
            "Invalid Coordinates! Please make sure your coordinate are within [1, 9] for rows and [1, 9] for columns."
        );
        assert_eq!(msg(&mut g, Action::middle(5, 5)), "Please begin by left-clicking on the center cell.");
        assert_eq!(g.view(), &before);
        assert_eq!(g.applied().len(), 2);
        assert!(!g.first_action_done());
    }

    #[test]
    fn left_click_off_center_is_accepted_first() {
        let mut g = GameState::new(field(5, 5, &[(1, 3), (2, 3), (3, 3), (4, 3), (5, 3)]));
        assert!(matches!(g.apply(Action::left(1, 1)).unwrap(), Feedback::BoardUpdated { .. }));
        assert!(g.first_action_done());
    }

    #[test]
    fn middle_click_on_numbered_without_flags() {
        // (5,5) sees mines at (4,4) and (6,6): Numbered(2).
        let mut g = GameState::new(field(9, 9, &[(4, 4), (6, 6)]));
        g.apply(Action::left(5, 5)).unwrap();
        assert_eq!(g.view().get(Coord::new(5, 5)), Some(CellView::Numbered(2)));
        assert_eq!(g.validate(Action::left(1, 1)), Validation::Ok);
        assert_eq!(
            msg(&mut g, Action::middle(5, 5)),
            "Error: No flagged cells detected nearby. Flag adjacent mines before middle-clicking."
        );
    }

    #[test]
    fn action_text_round_trip() {
        let a: Action = " M( 3 , 12 )".parse().unwrap();
        assert_eq!(a, Action::middle(3, 12));
        assert_eq!(a.to_string(), "M(3,12)");
        assert!("F(3,1)".parse::<Action>().is_err());
        assert!("L(3)".parse::<Action>().is_err());
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"M(3,12)\"");
    }

    #[test]
    fn action_space_sizes() {
        assert_eq!(enumerate_actions(9, 9).len(), 243);
        assert_eq!(enumerate_actions(5, 5).len(), 75);
        assert_eq!(enumerate_actions(1, 1).len(), 3);
        assert_eq!(enumerate_actions(1, 1)[0], Action::left(1, 1));
    }

    #[test]
    fn center_rounds_up() {
        assert_eq!(center(5, 5), Coord::new(3, 3));
        assert_eq!(center(9, 9), Coord::new(5, 5));
        assert_eq!(center(4, 6), Coord::new(2, 3));
        assert_eq!(center(1, 2), Coord::new(1, 1));
    }
}
