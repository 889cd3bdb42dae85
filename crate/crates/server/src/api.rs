use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use minebench::boardgen::{generate_minefield, GenSpec};
use minebench::engine::{center, Action, ClickKind, Coord, EngineError, Feedback, GameState, GameStatus, MineField};
use minebench::session::{feedback_text, SessionLog};
use minebench::textboard::{
    render, render_action_history, Format, RenderOptions, SymbolMap,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog;
use crate::store::{CreatedFrom, GameHandle, Shared};
use crate::AppState;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/api/games", get(list_games).post(create_game))
        .route("/api/games/{id}", get(get_game))
        .route("/api/games/{id}/actions", post(post_action))
        .route("/api/games/{id}/finalize", post(finalize_game))
        .route("/api/games/{id}/export", get(export_game))
        .route("/api/suites", get(list_suites))
        .route("/api/sessions", get(list_sessions))
        .route("/api/sessions/{*id}", get(get_session))
        .route("/api/replay/{*id}", get(replay_session))
        .with_state(state)
}

struct ApiError(StatusCode, Value);

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self(status, json!({ "error": message.into() }))
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} {id:?}"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone, Debug, Default, Deserialize)]
pub struct ViewQuery {
    /// `table`, `coordinate` or `both`.
    pub format: Option<String>,
    /// A named symbol map, e.g. `default` or `roman`.
    pub symbols: Option<String>,
    pub indices: Option<bool>,
}

struct ViewSpec {
    symbols: SymbolMap,
    renders: Vec<(&'static str, RenderOptions)>,
}

impl ViewQuery {
    fn spec(&self) -> ApiResult<ViewSpec> {
        let symbols = match self.symbols.as_deref() {
            None => SymbolMap::standard(),
            Some(name) => SymbolMap::by_name(name)
                .ok_or_else(|| ApiError::bad_request(format!("unknown symbol map {name:?}")))?,
        };
        let formats: &[(&'static str, Format)] = match self.format.as_deref().unwrap_or("table") {
            "table" => &[("table", Format::Table)],
            "coordinate" => &[("coordinate", Format::Coordinate)],
            "both" => &[("table", Format::Table), ("coordinate", Format::Coordinate)],
            other => return Err(ApiError::bad_request(format!("unknown format {other:?}"))),
        };
        let renders = formats
            .iter()
            .map(|&(name, f)| {
                let mut o = RenderOptions::for_format(f).with_symbols(symbols.clone());
                if self.indices == Some(false) {
                    o = o.without_indices();
                }
                (name, o)
            })
            .collect();
        Ok(ViewSpec { symbols, renders })
    }
}

#[derive(Serialize)]
struct ViewBody {
    /// Row-major cell tokens under the requested symbol map.
    cells: Vec<Vec<String>>,
    renders: BTreeMap<&'static str, String>,
}

fn view_body(state: &GameState, spec: &ViewSpec) -> ViewBody {
    let view = state.view();
    let cells = view
        .cells()
        .chunks(view.cols())
        .map(|row| row.iter().map(|c| spec.symbols.token(*c).to_string()).collect())
        .collect();
    let renders = spec.renders.iter().map(|(name, o)| (*name, render(view, o))).collect();
    ViewBody { cells, renders }
}

/// Everything a client may know about a game.
#[derive(Serialize)]
struct GameBody {
    id: String,
    rows: usize,
    cols: usize,
    mine_count: usize,
    status: GameStatus,
    actions: usize,
    first_action: Action,
    first_action_done: bool,
    annotator: Option<String>,
    finalized: bool,
    view: ViewBody,
}

fn game_body(h: &GameHandle, spec: &ViewSpec) -> GameBody {
    let s = &h.state;
    GameBody {
        id: h.id.clone(),
        rows: s.field().rows(),
        cols: s.field().cols(),
        mine_count: s.field().mine_count(),
        status: s.status().clone(),
        actions: s.applied().len(),
        first_action: s.first_action(),
        first_action_done: s.first_action_done(),
        annotator: h.annotator.clone(),
        finalized: h.finalized,
        view: view_body(s, spec),
    }
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Shared> {
    state.store().get(id).ok_or_else(|| ApiError::not_found("game", id))
}

#[derive(Serialize)]
struct GameSummary {
    id: String,
    rows: usize,
    cols: usize,
    status: GameStatus,
    actions: usize,
    annotator: Option<String>,
    finalized: bool,
}

async fn list_games(State(state): State<AppState>) -> Json<Value> {
    let games: Vec<GameSummary> = state
        .store()
        .all()
        .iter()
        .map(|g| {
            let h = g.lock().expect("game lock");
            GameSummary {
                id: h.id.clone(),
                rows: h.state.field().rows(),
                cols: h.state.field().cols(),
                status: h.state.status().clone(),
                actions: h.state.applied().len(),
                annotator: h.annotator.clone(),
                finalized: h.finalized,
            }
        })
        .collect();
    Json(json!({ "games": games }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    suite: Option<String>,
    index: Option<usize>,
    spec: Option<SpecBody>,
    /// Minefield interchange text.
    field: Option<String>,
    first_action: Option<Action>,
    annotator: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecBody {
    rows: usize,
    cols: usize,
    mines: usize,
    #[serde(default)]
    seed: u64,
    /// Cells kept mine-free. Defaults to the opening cell.
    safe: Option<Vec<Coord>>,
}

async fn create_game(
    State(state): State<AppState>,
    Query(q): Query<ViewQuery>,
    Json(body): Json<CreateBody>,
) -> ApiResult<(StatusCode, Json<GameBody>)> {
    let spec = q.spec()?;
    if let Some(a) = body.first_action {
        if a.kind != ClickKind::L {
            return Err(ApiError::bad_request(format!("opening action {a} must be a left click")));
        }
    }
    let sources = [body.suite.is_some(), body.spec.is_some(), body.field.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(ApiError::bad_request("give exactly one of \"suite\", \"spec\" or \"field\""));
    }
    let (field, created_from) = if let Some(name) = body.suite {
        let dir = state
            .config()
            .suites_dir
            .as_deref()
            .ok_or_else(|| ApiError::not_found("suite", &name))?;
        let suite = catalog::find_suite(dir, &name)
            .ok_or_else(|| ApiError::not_found("suite", &name))?
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let index = body.index.unwrap_or(0);
        let (board_id, field) = suite.boards.get(index).cloned().ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                format!("suite {name:?} has {} boards; index {index} is out of range", suite.boards.len()),
            )
        })?;
        (field, CreatedFrom::Suite { suite: name, index, board_id })
    } else if let Some(s) = body.spec {
        let opening = body.first_action.map_or_else(|| center(s.rows, s.cols), |a| a.at);
        let gen = GenSpec::new(s.rows, s.cols, s.mines, s.seed).with_safe(s.safe.unwrap_or_else(|| vec![opening]));
        let field = generate_minefield(&gen).map_err(|e| ApiError::unprocessable(e.to_string()))?;
        (field, CreatedFrom::Spec { rows: s.rows, cols: s.cols, mines: s.mines, seed: s.seed })
    } else {
        let text = body.field.unwrap_or_default();
        let field = MineField::from_text(&text).map_err(|e| ApiError::unprocessable(e.to_string()))?;
        (field, CreatedFrom::Field)
    };
    let first = body.first_action.unwrap_or_else(|| {
        let c = center(field.rows(), field.cols());
        Action::left(c.row, c.col)
    });
    let shared = state
        .store()
        .create(field, first, created_from, body.annotator)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let h = shared.lock().expect("game lock");
    log::info!("created game {}", h.id);
    Ok((StatusCode::CREATED, Json(game_body(&h, &spec))))
}

async fn get_game(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ViewQuery>,
) -> ApiResult<Json<GameBody>> {
    let spec = q.spec()?;
    let shared = lookup(&state, &id)?;
    let h = shared.lock().expect("game lock");
    Ok(Json(game_body(&h, &spec)))
}

#[derive(Deserialize)]
struct ActionRequest {
    action: String,
}

#[derive(Serialize)]
struct ActionBody {
    action: Action,
    feedback: Feedback,
    /// The catalog text for invalid actions, otherwise a one-line summary.
    message: String,
    game: GameBody,
}

async fn post_action(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ViewQuery>,
    Json(req): Json<ActionRequest>,
) -> ApiResult<Response> {
    let spec = q.spec()?;
    let action = Action::from_str(req.action.trim()).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let shared = lookup(&state, &id)?;
    let mut h = shared.lock().expect("game lock");
    let feedback = match h.apply(action) {
        Ok(fb) => fb,
        Err(e @ EngineError::GameOver(_)) => {
            let body = json!({
                "error": e.to_string(),
                "status": h.state.status(),
                "game": game_body(&h, &spec),
            });
            return Err(ApiError(StatusCode::CONFLICT, body));
        }
        Err(e) => return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    };
    let message = match &feedback {
        Feedback::Invalid { message, .. } => message.clone(),
        fb => feedback_text(action, fb, h.state.view()),
    };
    let body = ActionBody { action, feedback, message, game: game_body(&h, &spec) };
    if body.feedback.is_invalid() {
        let mut v = serde_json::to_value(&body).expect("body serializes");
        v["error"] = Value::String(body.message.clone());
        return Ok((StatusCode::UNPROCESSABLE_ENTITY, Json(v)).into_response());
    }
    Ok(Json(body).into_response())
}

async fn finalize_game(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ViewQuery>,
) -> ApiResult<Json<GameBody>> {
    let spec = q.spec()?;
    let shared = lookup(&state, &id)?;
    let mut h = shared.lock().expect("game lock");
    h.finalize();
    Ok(Json(game_body(&h, &spec)))
}

#[derive(Serialize)]
struct ExportBody {
    id: String,
    status: GameStatus,
    /// False for abandoned games.
    complete: bool,
    created_from: CreatedFrom,
    annotator: Option<String>,
    /// Numbered `K(r,c)` lines, opening move included.
    history: String,
    /// Minefield interchange text.
    board: String,
}

async fn export_game(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<ExportBody>> {
    let shared = lookup(&state, &id)?;
    let h = shared.lock().expect("game lock");
    if !h.exportable() {
        let body = json!({
            "error": "game is still in progress; finalize it before exporting",
            "status": h.state.status(),
        });
        return Err(ApiError(StatusCode::CONFLICT, body));
    }
    let mut history = render_action_history(&h.actions());
    history.push('\n');
    Ok(Json(ExportBody {
        id: h.id.clone(),
        status: h.state.status().clone(),
        complete: h.complete(),
        created_from: h.created_from.clone(),
        annotator: h.annotator.clone(),
        history,
        board: h.state.field().to_text(),
    }))
}

async fn list_suites(State(state): State<AppState>) -> Json<Value> {
    let suites = state.config().suites_dir.as_deref().map(catalog::list_suites).unwrap_or_default();
    Json(json!({ "suites": suites }))
}

async fn list_sessions(State(state): State<AppState>) -> Json<Value> {
    let sessions = state.config().sessions_dir.as_deref().map(catalog::list_sessions).unwrap_or_default();
    Json(json!({ "sessions": sessions }))
}

fn load_session(state: &AppState, id: &str) -> ApiResult<SessionLog> {
    let dir: &Path = state.config().sessions_dir.as_deref().ok_or_else(|| ApiError::not_found("session", id))?;
    let path = catalog::find_session(dir, id).ok_or_else(|| ApiError::not_found("session", id))?;
    SessionLog::load(&path).map_err(|e| ApiError::unprocessable(e.to_string()))
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionLog>> {
    Ok(Json(load_session(&state, &id)?))
}

#[derive(Deserialize)]
struct ReplayQuery {
    #[serde(default)]
    turn: usize,
    format: Option<String>,
    symbols: Option<String>,
    indices: Option<bool>,
}

#[derive(Serialize)]
struct ReplayBody {
    id: String,
    board_id: String,
    agent: String,
    /// 0 is the state after the opening move.
    turn: usize,
    turns: usize,
    raw_response: Option<String>,
    action: Option<Action>,
    message: Option<String>,
    status: GameStatus,
    view: ViewBody,
}

/// The board after `turn` agent turns, rebuilt by engine replay.
async fn replay_session(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ReplayQuery>,
) -> ApiResult<Json<ReplayBody>> {
    let spec = ViewQuery { format: q.format, symbols: q.symbols, indices: q.indices }.spec()?;
    let log = load_session(&state, &id)?;
    if q.turn > log.turns.len() {
        return Err(ApiError::bad_request(format!("turn {} is past the last turn ({})", q.turn, log.turns.len())));
    }
    let opening = log.opening.action;
    let actions = std::iter::once(opening).chain(log.turns[..q.turn].iter().filter_map(|t| t.parsed));
    let game = GameState::replay(log.field.clone(), opening, actions)
        .map_err(|e| ApiError::unprocessable(format!("log does not replay: {e}")))?;
    let last = q.turn.checked_sub(1).map(|i| &log.turns[i]);
    let message = last.and_then(|t| {
        let fb = t.feedback.as_ref()?;
        Some(match fb {
            Feedback::Invalid { message, .. } => message.clone(),
            fb => feedback_text(t.parsed?, fb, &t.view_after),
        })
    });
    Ok(Json(ReplayBody {
        id,
        board_id: log.board_id.clone(),
        agent: log.agent.clone(),
        turn: q.turn,
        turns: log.turns.len(),
        raw_response: last.map(|t| t.raw_response.clone()),
        action: last.and_then(|t| t.parsed),
        message,
        status: game.status().clone(),
        view: view_body(&game, &spec),
    }))
}
