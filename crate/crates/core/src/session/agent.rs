use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boardgen::{rng, uniform_below};
use crate::engine::{enumerate_actions, Action, BoardView, CellView, Coord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// What the agent is shown: the whole conversation (NC) or one compiled
/// prompt (CH).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Context {
    Conversation(Vec<Message>),
    Prompt(String),
}

impl Context {
    /// The newest text the harness added: the last user message or the
    /// whole prompt.
    pub fn latest(&self) -> &str {
        match self {
            Context::Conversation(msgs) => msgs
                .iter()
                .rev()
                .find(|m| m.role == Role::User)
                .map(|m| m.content.as_str())
                .unwrap_or(""),
            Context::Prompt(p) => p,
        }
    }
}

/// A single agent call. `view` is the public board (no mine positions);
/// text-only agents ignore it.
pub struct AgentRequest<'a> {
    pub context: &'a Context,
    pub view: &'a BoardView,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentReply {
    pub text: String,
    pub usage: Option<TokenUsage>,
    /// Verbatim request/response bodies for remote agents.
    pub exchange: Option<serde_json::Value>,
}

impl AgentReply {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), ..Default::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    /// Network failure, timeout, rate limiting or a server error. Retried.
    #[error("transport error: {0}")]
    Transport(String),
    /// A request the endpoint will never accept (bad auth, bad model...).
    #[error("agent rejected the request: {0}")]
    Fatal(String),
}

pub trait AgentPort: Send {
    fn name(&self) -> String;

    fn respond(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError>;
}

/// Replays fixed responses in order, then repeats the last one.
pub struct ScriptedAgent {
    name: String,
    responses: VecDeque<String>,
    last: String,
}

impl ScriptedAgent {
    pub fn new(name: impl Into<String>, responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { name: name.into(), responses: responses.into_iter().map(Into::into).collect(), last: String::new() }
    }

    /// Answers with `ACTION: <a>` for each action in turn.
    pub fn from_actions(actions: impl IntoIterator<Item = Action>) -> Self {
        Self::new("scripted", actions.into_iter().map(|a| format!("ACTION: {a}")))
    }

    /// Always sends the same text.
    pub fn constant(text: impl Into<String>) -> Self {
        let text = text.into();
        Self { name: "constant".into(), responses: VecDeque::new(), last: text }
    }
}

impl AgentPort for ScriptedAgent {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn respond(&mut self, _request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        if let Some(next) = self.responses.pop_front() {
            self.last = next;
        }
        Ok(AgentReply::text(self.last.clone()))
    }
}

/// Deterministic single-point deduction. Scans numbered cells row-major;
/// the first that applies wins:
///
/// 1. flagged neighbors == n and some neighbor unopened: chord (`M`) it;
/// 2. unopened + flagged neighbors == n (with some unopened): flag (`R`)
///    its first unopened neighbor.
///
/// Otherwise stalls by flagging the first unopened cell (or unflagging the
/// first flag when nothing is unopened).
pub fn single_point_action(view: &BoardView) -> Action {
    single_point_rule(view).unwrap_or_else(|| stall_action(view))
}

/// The rule-fired move, if any.
pub fn single_point_rule(view: &BoardView) -> Option<Action> {
    for (at, cell) in view.iter() {
        let CellView::Numbered(n) = cell else { continue };
        let around = view.neighbors(at);
        let unopened: Vec<Coord> =
            around.iter().copied().filter(|c| view.get(*c) == Some(CellView::Unopened)).collect();
        let flagged = around.iter().filter(|c| view.get(**c) == Some(CellView::Flagged)).count();
        if unopened.is_empty() {
            continue;
        }
        if flagged == n as usize {
            return Some(Action::middle(at.row, at.col));
        }
        if unopened.len() + flagged == n as usize {
            return Some(Action::right(unopened[0].row, unopened[0].col));
        }
    }
    None
}

fn stall_action(view: &BoardView) -> Action {
    let pick = view
        .iter()
        .find(|(_, c)| *c == CellView::Unopened)
        .or_else(|| view.iter().find(|(_, c)| *c == CellView::Flagged))
        .map(|(at, _)| at)
        .unwrap_or(Coord::new(1, 1));
    Action::right(pick.row, pick.col)
}

/// What the single-point agent does when no rule fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stall {
    /// Flag the first unopened cell.
    FlagFirst,
    /// Open a uniformly random unopened cell (a guess).
    Guess { seed: u64 },
}

pub struct SinglePointAgent {
    stall: Stall,
    draws: u64,
}

impl SinglePointAgent {
    pub fn new() -> Self {
        Self { stall: Stall::FlagFirst, draws: 0 }
    }

    pub fn guessing(seed: u64) -> Self {
        Self { stall: Stall::Guess { seed }, draws: 0 }
    }

    pub fn decide(&mut self, view: &BoardView) -> Action {
        if let Some(a) = single_point_rule(view) {
            return a;
        }
        match self.stall {
            Stall::FlagFirst => stall_action(view),
            Stall::Guess { seed } => {
                let closed: Vec<Coord> =
                    view.iter().filter(|(_, c)| *c == CellView::Unopened).map(|(at, _)| at).collect();
                if closed.is_empty() {
                    return stall_action(view);
                }
                self.draws += 1;
                let mut r = rng(crate::boardgen::substream_seed(seed, self.draws));
                let at = closed[uniform_below(&mut r, closed.len() as u64) as usize];
                Action::left(at.row, at.col)
            }
        }
    }
}

impl Default for SinglePointAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl AgentPort for SinglePointAgent {
    fn name(&self) -> String {
        match self.stall {
            Stall::FlagFirst => "builtin:single-point".into(),
            Stall::Guess { .. } => "builtin:single-point-guess".into(),
        }
    }

    fn respond(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        let a = self.decide(request.view);
        Ok(AgentReply::text(format!("Applying the single-point rules.\nACTION: {a}")))
    }
}

/// Uniformly random syntactic action each turn.
pub struct RandomAgent {
    seed: u64,
    calls: u64,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self { seed, calls: 0 }
    }
}

impl AgentPort for RandomAgent {
    fn name(&self) -> String {
        "builtin:random".into()
    }

    fn respond(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        let actions = enumerate_actions(request.view.rows(), request.view.cols());
        self.calls += 1;
        let mut r = rng(crate::boardgen::substream_seed(self.seed, self.calls));
        let a = actions[uniform_below(&mut r, actions.len() as u64) as usize];
        Ok(AgentReply::text(format!("ACTION: {a}")))
    }
}
