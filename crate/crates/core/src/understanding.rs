//! End-to-end board-understanding runs: build each task prompt, ask an
//! agent, grade the reply, and summarize accuracy per task.

use std::sync::LazyLock;
use std::time::Instant;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::boardgen::substream_seed;
use crate::engine::{Coord, MineField};
use crate::session::{call_agent, AgentError, AgentPort, AgentReply, AgentRequest, Context, Message};
use crate::tasks::{
    build_task_prompt, count_neighbors, grade, sample_instances, self_play_annotation, AnnotatedGame,
    Grade, SampledInstances, TaskInstance, TaskPromptOptions,
};
use crate::textboard::{parse_board, Format, RenderOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Navigation,
    Counting,
}

impl TaskKind {
    pub fn of(instance: &TaskInstance) -> Self {
        match instance {
            TaskInstance::Navigation(_) => TaskKind::Navigation,
            TaskInstance::Counting(_) => TaskKind::Counting,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub task: TaskKind,
    pub target: Coord,
    pub gold: String,
    pub prompt: String,
    pub response: String,
    pub grade: Grade,
    pub latency_ms: u64,
    pub attempts: u32,
    pub exchange: Option<serde_json::Value>,
}

/// Annotates every board by self-play and samples the task corpus from the
/// resulting histories.
pub fn build_corpus(boards: &[(String, MineField)], n_coords: usize, seed: u64) -> (Vec<AnnotatedGame>, SampledInstances) {
    let games: Vec<AnnotatedGame> = boards
        .iter()
        .enumerate()
        .map(|(i, (id, f))| self_play_annotation(id, f, substream_seed(seed, i as u64), f.rows() * f.cols() * 2))
        .collect();
    let sampled = sample_instances(&games, n_coords, seed);
    (games, sampled)
}

/// Navigation instances first, then counting, in sampling order.
pub fn instances(sampled: &SampledInstances) -> Vec<TaskInstance> {
    sampled
        .navigation
        .iter()
        .cloned()
        .map(TaskInstance::Navigation)
        .chain(sampled.counting.iter().cloned().map(TaskInstance::Counting))
        .collect()
}

/// Asks `agent` every instance once. Stops at the first transport failure
/// that survives all retries.
pub fn run_tasks(
    instances: &[TaskInstance],
    representation: &RenderOptions,
    agent: &mut dyn AgentPort,
    transport_attempts: u32,
    retry_base_delay_ms: u64,
) -> Result<Vec<TaskRecord>, AgentError> {
    let mut out = Vec::with_capacity(instances.len());
    for inst in instances {
        let opts = TaskPromptOptions::for_instance(inst, representation.clone());
        let prompt = build_task_prompt(inst, &opts);
        let context = Context::Conversation(vec![Message::user(prompt.clone())]);
        let started = Instant::now();
        let (reply, attempts) =
            call_agent(agent, &context, &inst.snapshot().view, transport_attempts, retry_base_delay_ms);
        let reply = reply?;
        let grade = grade(&reply.text, inst, representation);
        out.push(TaskRecord {
            id: inst.id().to_string(),
            task: TaskKind::of(inst),
            target: inst.target(),
            gold: inst.gold_text(representation),
            prompt,
            response: reply.text,
            grade,
            latency_ms: started.elapsed().as_millis() as u64,
            attempts,
            exchange: reply.exchange,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskAccuracy {
    pub n: usize,
    pub correct: usize,
    pub unparseable: usize,
    pub accuracy_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnderstandingReport {
    pub label: String,
    pub navigation: TaskAccuracy,
    pub counting: TaskAccuracy,
}

pub fn summarize(label: &str, records: &[TaskRecord]) -> UnderstandingReport {
    let acc = |kind: TaskKind| {
        let rs: Vec<&TaskRecord> = records.iter().filter(|r| r.task == kind).collect();
        let correct = rs.iter().filter(|r| r.grade.correct).count();
        TaskAccuracy {
            n: rs.len(),
            correct,
            unparseable: rs.iter().filter(|r| r.grade.unparseable).count(),
            accuracy_pct: if rs.is_empty() { 0.0 } else { 100.0 * correct as f64 / rs.len() as f64 },
        }
    };
    UnderstandingReport { label: label.to_string(), navigation: acc(TaskKind::Navigation), counting: acc(TaskKind::Counting) }
}

impl UnderstandingReport {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| Representation | Navigation | Counting |\n|---|---|---|\n");
        s.push_str(&format!(
            "| {} | {:.1} | {:.1} |\n",
            self.label, self.navigation.accuracy_pct, self.counting.accuracy_pct
        ));
        s.push_str(&format!(
            "\nInstances: {} navigation, {} counting. Unparseable replies: {} and {}, graded incorrect.\n",
            self.navigation.n, self.counting.n, self.navigation.unparseable, self.counting.unparseable
        ));
        s
    }
}

/// A short label such as `table`, `table -ids` or `coordinate (roman)`.
pub fn representation_label(o: &RenderOptions, symbols_name: &str) -> String {
    let mut s = match o.format {
        Format::Table => "table".to_string(),
        Format::Coordinate => "coordinate".to_string(),
    };
    if o.format == Format::Table && !o.with_indices {
        s.push_str(" -ids");
    }
    if symbols_name != "default" {
        s.push_str(&format!(" ({symbols_name})"));
    }
    s
}

static TARGET: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\((\d+),(\d+)\)").unwrap());

/// Builtin answerer that reads the task prompt like a careful person would:
/// it parses the board text back and looks the answer up. A pipeline check
/// rather than a baseline; it should score 100%.
pub struct PromptReaderAgent {
    representation: RenderOptions,
}

impl PromptReaderAgent {
    pub fn new(representation: RenderOptions) -> Self {
        Self { representation }
    }

    pub fn answer(&self, prompt: &str) -> Option<String> {
        let o = &self.representation;
        let start = prompt.rfind("Board:\n")? + "Board:\n".len();
        let end = start + prompt[start..].find("\n\nQuestion:")?;
        let view = parse_board(&prompt[start..end], o).ok()?;
        let question = prompt[end..].lines().find(|l| l.starts_with("Question:"))?;
        let m = TARGET.captures(question)?;
        let at = Coord::new(m[1].parse().ok()?, m[2].parse().ok()?);
        if question.contains("how many") {
            let query = o
                .symbols
                .tokens()
                .into_iter()
                .filter_map(|t| o.symbols.cell_for(t))
                .find(|c| question.ends_with(&format!("in the state {}?", o.prose_token(*c))))?;
            Some(count_neighbors(&view, at, query).ok()?.to_string())
        } else {
            Some(o.symbols.token(view.get(at)?).to_string())
        }
    }
}

impl AgentPort for PromptReaderAgent {
    fn name(&self) -> String {
        "builtin:reader".into()
    }

    fn respond(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        let text = match self.answer(request.context.latest()) {
            Some(a) => format!("Reading the board.\nANSWER: {a}"),
            None => "I could not read the board.".to_string(),
        };
        Ok(AgentReply::text(text))
    }
}
