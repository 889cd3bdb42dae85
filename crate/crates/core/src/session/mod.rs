//! Turn-based gameplay sessions between an agent and the engine.

mod agent;
mod prompt;
pub mod remote;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agent::{
    single_point_action, single_point_rule, AgentError, AgentPort, AgentReply, AgentRequest,
    Context, Message, RandomAgent, Role, ScriptedAgent, SinglePointAgent, Stall, TokenUsage,
};
pub use prompt::{
    build_initial_prompt, feedback_summary, feedback_text, history_lines, next_context, obfuscate,
};

use crate::engine::{center, Action, BoardView, ClickKind, Feedback, GameState, GameStatus, MineField};
use crate::textboard::RenderOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptMode {
    /// Natural conversation: the full message history is resent each turn.
    NC,
    /// Compact history: one self-contained prompt per turn.
    CH,
}

impl std::str::FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NC" => Ok(PromptMode::NC),
            "CH" => Ok(PromptMode::CH),
            _ => Err(format!("unknown prompt mode {s:?} (expected NC or CH)")),
        }
    }
}

/// Which in-context examples the initial prompt carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleToggles {
    pub left_click: bool,
    pub right_click: bool,
    pub middle_click: bool,
}

impl Default for ExampleToggles {
    fn default() -> Self {
        Self { left_click: true, right_click: true, middle_click: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub max_actions: usize,
    /// `None` means `L` at the board center.
    pub first_action: Option<Action>,
    pub representation: RenderOptions,
    pub mode: PromptMode,
    pub obfuscate_prose: bool,
    pub examples: ExampleToggles,
    /// Invalid actions do not use up an action slot. Off by default.
    pub free_invalid_retries: bool,
    pub transport_attempts: u32,
    pub retry_base_delay_ms: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            max_actions: 10,
            first_action: None,
            representation: RenderOptions::table(),
            mode: PromptMode::NC,
            obfuscate_prose: false,
            examples: ExampleToggles::default(),
            free_invalid_retries: false,
            transport_attempts: 3,
            retry_base_delay_ms: 500,
        }
    }
}

impl SessionConfig {
    pub fn first_action_for(&self, field: &MineField) -> Action {
        self.first_action.unwrap_or_else(|| {
            let c = center(field.rows(), field.cols());
            Action::left(c.row, c.col)
        })
    }

    /// Hard ceiling on agent calls; only binds with free invalid retries.
    pub fn turn_limit(&self) -> usize {
        if self.free_invalid_retries {
            self.max_actions * 4
        } else {
            self.max_actions
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub action: Action,
    pub feedback: Feedback,
    pub view_after: BoardView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    /// 1-based.
    pub index: usize,
    /// NC: the newest user message. CH: the whole prompt.
    pub prompt: String,
    pub raw_response: String,
    /// `None` when the reply held no recognizable action.
    pub parsed: Option<Action>,
    pub feedback: Option<Feedback>,
    /// Whether this turn used up one of the `max_actions` slots.
    pub counted: bool,
    pub view_after: BoardView,
    pub latency_ms: u64,
    pub attempts: u32,
    pub usage: Option<TokenUsage>,
    pub exchange: Option<serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Solved,
    Failed,
    Exhausted,
    AbortedUnrecognizable,
    TransportFailed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLog {
    pub board_id: String,
    pub agent: String,
    pub field: MineField,
    pub config: SessionConfig,
    pub opening: Opening,
    pub turns: Vec<Turn>,
    pub outcome: Outcome,
    pub final_status: GameStatus,
    pub transport_error: Option<String>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid session config: {0}")]
    Config(String),
    #[error("opening action {action} does not start the game: {reason}")]
    Opening { action: Action, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed session log {path}: {source}")]
    Format { path: PathBuf, source: serde_json::Error },
}

impl SessionLog {
    /// Actions that used up a slot.
    pub fn counted_actions(&self) -> usize {
        self.turns.iter().filter(|t| t.counted).count()
    }

    /// The board after the last turn (or after the opening).
    pub fn final_view(&self) -> &BoardView {
        self.turns.last().map(|t| &t.view_after).unwrap_or(&self.opening.view_after)
    }

    pub fn file_name(board_id: &str) -> String {
        let safe: String = board_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        format!("{safe}.json")
    }

    /// Writes `<dir>/<board_id>.json`, creating `dir` if needed.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, SessionError> {
        fs::create_dir_all(dir).map_err(|source| SessionError::Io { path: dir.to_path_buf(), source })?;
        let path = dir.join(Self::file_name(&self.board_id));
        let json = serde_json::to_string_pretty(self)
            .map_err(|source| SessionError::Format { path: path.clone(), source })?;
        fs::write(&path, json + "\n").map_err(|source| SessionError::Io { path: path.clone(), source })?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text =
            fs::read_to_string(path).map_err(|source| SessionError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|source| SessionError::Format { path: path.to_path_buf(), source })
    }

    /// All `*.json` logs in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, SessionError> {
        let entries = fs::read_dir(dir).map_err(|source| SessionError::Io { path: dir.to_path_buf(), source })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| Self::load(p)).collect()
    }
}

/// Pulls the action out of a free-text reply. Only uppercase `L`, `R`, `M`
/// count; any other letter in that position makes the reply unrecognized.
/// With an `ACTION` marker, the first match after the last marker is used;
/// otherwise the last match in the text.
pub fn extract_action(raw: &str) -> Option<Action> {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let re = PATTERN.get_or_init(|| Regex::new(r"\b([A-Za-z])\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)").unwrap());
    let m = match raw.rfind("ACTION") {
        Some(i) => re.captures(&raw[i + "ACTION".len()..]),
        None => re.captures_iter(raw).last(),
    }?;
    let letter = m[1].chars().next()?;
    if !letter.is_ascii_uppercase() {
        return None;
    }
    let kind = ClickKind::from_letter(letter)?;
    let row = m[2].parse().ok()?;
    let col = m[3].parse().ok()?;
    Some(Action { kind, at: crate::engine::Coord::new(row, col) })
}

/// Calls `agent`, retrying transport errors with exponential backoff.
/// Returns the reply (or last error) and the number of attempts made.
pub(crate) fn call_agent(
    agent: &mut dyn AgentPort,
    context: &Context,
    view: &BoardView,
    transport_attempts: u32,
    retry_base_delay_ms: u64,
) -> (Result<AgentReply, AgentError>, u32) {
    let attempts = transport_attempts.max(1);
    let mut last = AgentError::Transport("no attempt made".into());
    for attempt in 1..=attempts {
        match agent.respond(&AgentRequest { context, view }) {
            Ok(reply) => return (Ok(reply), attempt),
            Err(e @ AgentError::Fatal(_)) => return (Err(e), attempt),
            Err(e) => {
                log::warn!("agent call failed (attempt {attempt}/{attempts}): {e}");
                last = e;
                if attempt < attempts && retry_base_delay_ms > 0 {
                    std::thread::sleep(Duration::from_millis(retry_base_delay_ms << (attempt - 1)));
                }
            }
        }
    }
    (Err(last), attempts)
}

/// Plays one board: applies the opening move, then alternates agent calls
/// and engine updates until the game ends, the reply is unrecognizable,
/// the action budget runs out, or the transport gives up.
pub fn run_session(
    board_id: &str,
    field: &MineField,
    agent: &mut dyn AgentPort,
    config: &SessionConfig,
) -> Result<SessionLog, SessionError> {
    if config.max_actions == 0 {
        return Err(SessionError::Config("max_actions must be at least 1".into()));
    }
    let first = config.first_action_for(field);
    if first.kind != ClickKind::L {
        return Err(SessionError::Opening { action: first, reason: "the opening move must be L".into() });
    }
    let mut game = GameState::with_first_action(field.clone(), first);
    let opening_feedback = game.apply(first).expect("fresh game accepts an action");
    match &opening_feedback {
        Feedback::Invalid { message, .. } => {
            return Err(SessionError::Opening { action: first, reason: message.clone() })
        }
        Feedback::GameFailed { .. } => {
            return Err(SessionError::Opening { action: first, reason: "it opens a mine".into() })
        }
        _ => {}
    }
    let mut log = SessionLog {
        board_id: board_id.to_string(),
        agent: agent.name(),
        field: field.clone(),
        config: config.clone(),
        opening: Opening { action: first, feedback: opening_feedback, view_after: game.view().clone() },
        turns: Vec::new(),
        outcome: Outcome::Exhausted,
        final_status: GameStatus::InProgress,
        transport_error: None,
    };

    let mut context = build_initial_prompt(field, config, first, game.view());
    let mut counted = 0;
    let outcome = loop {
        match game.status() {
            GameStatus::Solved => break Outcome::Solved,
            GameStatus::Failed { .. } => break Outcome::Failed,
            _ => {}
        }
        if counted >= config.max_actions || log.turns.len() >= config.turn_limit() {
            break Outcome::Exhausted;
        }
        let started = Instant::now();
        let (reply, attempts) = call_agent(agent, &context, game.view(), config.transport_attempts, config.retry_base_delay_ms);
        let latency_ms = started.elapsed().as_millis() as u64;
        let reply = match reply {
            Ok(r) => r,
            Err(e) => {
                log.transport_error = Some(e.to_string());
                break Outcome::TransportFailed;
            }
        };
        let parsed = extract_action(&reply.text);
        let feedback = parsed.map(|a| game.apply(a).expect("game is in progress"));
        let is_counted = match &feedback {
            Some(f) if f.is_invalid() => !config.free_invalid_retries,
            _ => true,
        };
        if is_counted {
            counted += 1;
        }
        log.turns.push(Turn {
            index: log.turns.len() + 1,
            prompt: context.latest().to_string(),
            raw_response: reply.text,
            parsed,
            feedback,
            counted: is_counted,
            view_after: game.view().clone(),
            latency_ms,
            attempts,
            usage: reply.usage,
            exchange: reply.exchange,
        });
        if parsed.is_none() {
            break Outcome::AbortedUnrecognizable;
        }
        if !game.status().is_terminal() {
            context = next_context(context, field, config, first, &log.turns, game.view());
        }
    };
    match outcome {
        Outcome::Exhausted => game.abort("action limit reached"),
        Outcome::AbortedUnrecognizable => game.abort("unrecognizable response"),
        Outcome::TransportFailed => game.abort("agent transport failed"),
        Outcome::Solved | Outcome::Failed => {}
    }
    log.outcome = outcome;
    log.final_status = game.status().clone();
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Coord;

    fn field() -> MineField {
        // 5x5 with mines down column 5 except row 3; L(3,3) opens columns 1-4.
        MineField::new(5, 5, [(1, 5), (2, 5), (4, 5), (5, 5)].map(|(r, c)| Coord::new(r, c))).unwrap()
    }

    #[test]
    fn extraction_rules() {
        assert_eq!(extract_action("so... ACTION: R(1,2)"), Some(Action::right(1, 2)));
        assert_eq!(extract_action("F(3,1)"), None);
        assert_eq!(
            extract_action("I will click L(2,3) then maybe L(4,4). ACTION: L(4,4)"),
            Some(Action::left(4, 4))
        );
        assert_eq!(extract_action("first L(1,1), no wait, M( 2 , 3 )"), Some(Action::middle(2, 3)));
        assert_eq!(extract_action("ACTION: F(1,1) but L(2,2) earlier"), None);
        assert_eq!(extract_action("L(2,2) then ACTION: none"), None);
        assert_eq!(extract_action("hello"), None);
        assert_eq!(extract_action("ACTION: l(2,2)"), None);
        assert_eq!(extract_action("cell(2,2)"), None);
        assert_eq!(extract_action("ACTION: L(0,-1)"), Some(Action::left(0, -1)));
        assert_eq!(extract_action("ACTION: L(99999999999,1)"), None);
    }

    #[test]
    fn solved_by_script() {
        let mut agent = ScriptedAgent::from_actions([Action::left(3, 5)]);
        let log = run_session("b", &field(), &mut agent, &SessionConfig::default()).unwrap();
        assert_eq!(log.outcome, Outcome::Solved);
        assert_eq!(log.turns.len(), 1);
        assert_eq!(log.final_status, GameStatus::Solved);
        assert_eq!(log.opening.action, Action::left(3, 3));
    }

    #[test]
    fn hello_aborts_after_one_turn() {
        let mut agent = ScriptedAgent::constant("hello");
        let log = run_session("b", &field(), &mut agent, &SessionConfig::default()).unwrap();
        assert_eq!(log.outcome, Outcome::AbortedUnrecognizable);
        assert_eq!(log.turns.len(), 1);
        assert!(log.turns[0].feedback.is_none());
        assert!(matches!(log.final_status, GameStatus::Aborted { .. }));
    }

    #[test]
    fn repeating_agent_exhausts() {
        let mut agent = ScriptedAgent::constant("ACTION: L(3,3)");
        let log = run_session("b", &field(), &mut agent, &SessionConfig::default()).unwrap();
        assert_eq!(log.outcome, Outcome::Exhausted);
        assert_eq!(log.turns.len(), 10);
        assert!(log.turns.iter().all(|t| t.feedback.as_ref().unwrap().is_invalid()));

        let cfg = SessionConfig { free_invalid_retries: true, max_actions: 2, ..Default::default() };
        let log = run_session("b", &field(), &mut ScriptedAgent::constant("ACTION: L(3,3)"), &cfg).unwrap();
        assert_eq!(log.outcome, Outcome::Exhausted);
        assert_eq!(log.counted_actions(), 0);
        assert_eq!(log.turns.len(), cfg.turn_limit());
    }

    struct Flaky {
        failures: u32,
        fatal: bool,
    }

    impl AgentPort for Flaky {
        fn name(&self) -> String {
            "flaky".into()
        }

        fn respond(&mut self, _: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
            if self.fatal {
                return Err(AgentError::Fatal("401".into()));
            }
            if self.failures > 0 {
                self.failures -= 1;
                return Err(AgentError::Transport("timeout".into()));
            }
            Ok(AgentReply::text("ACTION: L(3,5)"))
        }
    }

    #[test]
    fn transport_retries_then_fails() {
        let cfg = SessionConfig { retry_base_delay_ms: 0, ..Default::default() };
        let log = run_session("b", &field(), &mut Flaky { failures: 2, fatal: false }, &cfg).unwrap();
        assert_eq!(log.outcome, Outcome::Solved);
        assert_eq!(log.turns[0].attempts, 3);

        let log = run_session("b", &field(), &mut Flaky { failures: 3, fatal: false }, &cfg).unwrap();
        assert_eq!(log.outcome, Outcome::TransportFailed);
        assert!(log.turns.is_empty());
        assert!(log.transport_error.unwrap().contains("timeout"));

        let log = run_session("b", &field(), &mut Flaky { failures: 0, fatal: true }, &cfg).unwrap();
        assert_eq!(log.outcome, Outcome::TransportFailed);
    }

    #[test]
    fn bad_openings_are_rejected() {
        let cfg = SessionConfig { first_action: Some(Action::left(1, 5)), ..Default::default() };
        assert!(matches!(
            run_session("b", &field(), &mut ScriptedAgent::constant("x"), &cfg),
            Err(SessionError::Opening { .. })
        ));
        let cfg = SessionConfig { max_actions: 0, ..Default::default() };
        assert!(matches!(
            run_session("b", &field(), &mut ScriptedAgent::constant("x"), &cfg),
            Err(SessionError::Config(_))
        ));
    }

    #[test]
    fn nc_grows_by_two_and_ch_lists_history() {
        let script = [Action::right(1, 5), Action::right(1, 5), Action::left(1, 1)];
        for mode in [PromptMode::NC, PromptMode::CH] {
            let cfg = SessionConfig { mode, ..Default::default() };
            let f = field();
            let first = cfg.first_action_for(&f);
            let mut game = GameState::new(f.clone());
            game.apply(first).unwrap();
            let mut ctx = build_initial_prompt(&f, &cfg, first, game.view());
            let mut turns = Vec::new();
            for (i, a) in script.iter().enumerate() {
                let fb = game.apply(*a).unwrap();
                turns.push(Turn {
                    index: i + 1,
                    prompt: ctx.latest().to_string(),
                    raw_response: format!("ACTION: {a}"),
                    parsed: Some(*a),
                    feedback: Some(fb),
                    counted: true,
                    view_after: game.view().clone(),
                    latency_ms: 0,
                    attempts: 1,
                    usage: None,
                    exchange: None,
                });
                let before = match &ctx {
                    Context::Conversation(m) => m.len(),
                    Context::Prompt(_) => 0,
                };
                ctx = next_context(ctx, &f, &cfg, first, &turns, game.view());
                if let Context::Conversation(m) = &ctx {
                    assert_eq!(m.len(), before + 2);
                }
            }
            match (mode, &ctx) {
                (PromptMode::NC, Context::Conversation(m)) => {
                    assert_eq!(m.len(), 7);
                    assert!(m[6].content.starts_with("Action L(1,1) was not applied."));
                }
                (PromptMode::CH, Context::Prompt(p)) => {
                    let lines: Vec<&str> = p.lines().filter(|l| l.contains(" \u{2192} ")).collect();
                    assert_eq!(
                        lines,
                        [
                            "1. R(1,5) \u{2192} flagged (1,5)",
                            "2. R(1,5) \u{2192} unflagged (1,5)",
                            "3. L(1,1) \u{2192} Invalid action: Cannot left-click a blank cell. Left-click is only for unopened cells (`?').",
                        ]
                    );
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
