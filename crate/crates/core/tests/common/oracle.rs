//! Exhaustive comparison of the engine against the reference rules.

use minebench::engine::{
    all_coords, enumerate_actions, CellView, Coord, EngineError, Feedback, GameState, GameStatus,
    InvalidKind, MineField,
};

use super::reference::{RCell, ROutcome, RefGame};

pub fn engine_label(result: &Result<Feedback, EngineError>) -> String {
    match result {
        Err(EngineError::GameOver(_)) => "rejected".into(),
        Err(e) => panic!("unexpected engine error {e}"),
        Ok(Feedback::BoardUpdated { .. }) => "updated".into(),
        Ok(Feedback::GameSolved) => "won".into(),
        Ok(Feedback::GameFailed { .. }) => "lost".into(),
        Ok(Feedback::Invalid { kind, .. }) => format!(
            "invalid:{}",
            match kind {
                InvalidKind::OutOfBounds => "bounds",
                InvalidKind::StartWithRightClick | InvalidKind::StartWithMiddleClick => "start",
                InvalidKind::LeftClickBlank => "L-blank",
                InvalidKind::LeftClickFlagged => "L-flag",
                InvalidKind::LeftClickNumbered => "L-number",
                InvalidKind::MiddleClickBlank => "M-blank",
                InvalidKind::MiddleClickFlagged => "M-flag",
                InvalidKind::MiddleClickUnopened => "M-hidden",
                InvalidKind::MiddleClickNoFlags => "M-noflags",
                InvalidKind::MiddleClickFlagMismatch => "M-mismatch",
                InvalidKind::RightClickBlank => "R-blank",
                InvalidKind::RightClickNumbered => "R-number",
            }
        ),
    }
}

fn same_state(engine: &GameState, reference: &RefGame) -> bool {
    let status_ok = matches!(
        (engine.status(), reference.outcome),
        (GameStatus::InProgress, ROutcome::Playing)
            | (GameStatus::Solved, ROutcome::Won)
            | (GameStatus::Failed { .. }, ROutcome::Lost)
    );
    status_ok
        && engine.view().iter().all(|(c, cell)| {
            let r = reference.shown[(c.row - 1) as usize][(c.col - 1) as usize];
            match (cell, r) {
                (CellView::Unopened, RCell::Hidden) | (CellView::Flagged, RCell::Flag) => true,
                (CellView::Blank, RCell::Open(0)) => true,
                (CellView::Numbered(a), RCell::Open(b)) => a == b && b > 0,
                _ => false,
            }
        })
}

/// Every mine layout with at most `max_mines` mines on every board up to
/// `max_rows x max_cols` (leaving at least one safe cell).
pub fn small_fields(max_rows: usize, max_cols: usize, max_mines: usize) -> Vec<MineField> {
    let mut out = vec![];
    for rows in 1..=max_rows {
        for cols in 1..=max_cols {
            let cells: Vec<Coord> = all_coords(rows, cols).collect();
            let mut layouts: Vec<Vec<Coord>> = vec![vec![]];
            for k in 1..=max_mines.min(rows * cols - 1) {
                layouts.extend(combinations(&cells, k));
            }
            out.extend(layouts.into_iter().map(|m| MineField::new(rows, cols, m).unwrap()));
        }
    }
    out
}

fn combinations(items: &[Coord], k: usize) -> Vec<Vec<Coord>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for i in 0..items.len() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, items[i]);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct OracleReport {
    pub fields: usize,
    pub steps: u64,
    pub disagreements: Vec<String>,
}

/// Walks every action sequence up to `depth` on `field`, comparing label,
/// view and status after each step. Finished games are probed with one more
/// action (both must refuse it) and not expanded further.
pub fn check_field(field: &MineField, depth: usize, report: &mut OracleReport) {
    let mines: Vec<(i32, i32)> = field.mines().iter().map(|c| (c.row, c.col)).collect();
    let engine = GameState::new(field.clone());
    let reference = RefGame::new(field.rows() as i32, field.cols() as i32, &mines);
    let actions = enumerate_actions(field.rows(), field.cols());
    report.fields += 1;
    walk(&engine, &reference, &actions, depth, &mut Vec::new(), report);
}

fn walk(
    engine: &GameState,
    reference: &RefGame,
    actions: &[minebench::engine::Action],
    depth: usize,
    path: &mut Vec<String>,
    report: &mut OracleReport,
) {
    if depth == 0 || report.disagreements.len() > 20 {
        return;
    }
    let terminal = engine.status().is_terminal();
    for a in actions {
        let mut e = engine.clone();
        let mut r = reference.clone();
        let got = engine_label(&e.apply(*a));
        let want = r.step(a.kind.letter(), a.at.row, a.at.col);
        report.steps += 1;
        path.push(a.to_string());
        if got != want || !same_state(&e, &r) {
            report.disagreements.push(format!(
                "{}x{} mines {:?} after [{}]: engine {got}, reference {want}",
                engine.field().rows(),
                engine.field().cols(),
                engine.field().mines(),
                path.join(" ")
            ));
        } else if !terminal {
            walk(&e, &r, actions, depth - 1, path, report);
        }
        path.pop();
        if terminal {
            break;
        }
    }
}
