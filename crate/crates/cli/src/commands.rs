use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use minebench::boardgen::{substream_seed, GenError, SuiteSpec};
use minebench::engine::MineField;
use minebench::metrics::{aggregate, score_session, select_reasoning_chains, verify_log};
use minebench::session::remote::ChatCompletionAgent;
use minebench::session::{
    feedback_text, run_session, AgentPort, Outcome, RandomAgent, SessionConfig, SessionError, SessionLog,
    SinglePointAgent,
};
use minebench::suite::{load_suite, write_suite, Suite, SuiteError};
use minebench::textboard::{render, render_action_history, RenderOptions};
use minebench::understanding::{build_corpus, instances, representation_label, run_tasks, summarize, PromptReaderAgent};
use minebench_server::ServerConfig;
use serde::Serialize;
use serde_json::json;

use crate::config::{AgentSpec, RunConfig};
use crate::error::{io_err, CliError};

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    fs::write(path, text).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn gen_error(e: GenError) -> CliError {
    CliError::Generation(e.to_string())
}

pub fn gen_boards(spec: &SuiteSpec, out: &Path) -> Result<Suite, CliError> {
    let suite = write_suite(out, spec).map_err(|e| match e {
        SuiteError::Gen(g) => gen_error(g),
        other => CliError::Io(other.to_string()),
    })?;
    println!("wrote {} boards and {} to {}", suite.boards.len(), minebench::suite::MANIFEST, out.display());
    Ok(suite)
}

fn open_suite(cfg: &RunConfig) -> Result<Vec<(String, MineField)>, CliError> {
    let suite = load_suite(&cfg.suite)
        .map_err(|e| CliError::Config(format!("cannot load board suite {}: {e}", cfg.suite.display())))?;
    let mut boards = suite.boards;
    if let Some(n) = cfg.limit {
        boards.truncate(n);
    }
    if boards.is_empty() {
        return Err(CliError::Config(format!("board suite {} is empty", cfg.suite.display())));
    }
    Ok(boards)
}

/// Checks the agent can be built at all. For remote agents this is where a
/// missing credential is reported, before any board is read.
fn preflight(cfg: &RunConfig, allowed: &[AgentSpec]) -> Result<Option<String>, CliError> {
    if !allowed.contains(&cfg.agent) {
        let names: Vec<String> = allowed.iter().map(|a| a.to_string()).collect();
        return Err(CliError::Config(format!(
            "agent {} is not usable here (expected one of {})",
            cfg.agent,
            names.join(", ")
        )));
    }
    match &cfg.remote {
        Some(r) => r.api_key().map(Some),
        None => Ok(None),
    }
}

fn make_agent(cfg: &RunConfig, key: &Option<String>, index: usize) -> Result<Box<dyn AgentPort>, CliError> {
    let seed = substream_seed(cfg.seed, index as u64);
    Ok(match cfg.agent {
        AgentSpec::SinglePoint => Box::new(SinglePointAgent::new()),
        AgentSpec::SinglePointGuess => Box::new(SinglePointAgent::guessing(seed)),
        AgentSpec::Random => Box::new(RandomAgent::new(seed)),
        AgentSpec::Reader => Box::new(PromptReaderAgent::new(cfg.representation.clone())),
        AgentSpec::Remote => {
            let r = cfg.remote.as_ref().expect("remote settings resolved");
            Box::new(ChatCompletionAgent::new(r.remote_config(), key.clone()).map_err(|e| CliError::Config(e.to_string()))?)
        }
    })
}

fn manifest(command: &str, cfg: &RunConfig) -> serde_json::Value {
    json!({
        "command": command,
        "minebench_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    })
}

fn session_error(e: SessionError) -> CliError {
    match e {
        SessionError::Config(_) | SessionError::Opening { .. } => CliError::Config(e.to_string()),
        SessionError::Io { .. } => CliError::Io(e.to_string()),
        SessionError::Format { .. } => CliError::Consistency(e.to_string()),
    }
}

pub fn run_gameplay(cfg: &RunConfig) -> Result<(), CliError> {
    let key = preflight(cfg, &[AgentSpec::SinglePoint, AgentSpec::SinglePointGuess, AgentSpec::Random, AgentSpec::Remote])?;
    let boards = open_suite(cfg)?;
    let logs_dir = cfg.out.join("logs");
    create_dir(&logs_dir)?;
    write_json(&cfg.out.join("manifest.json"), &manifest("run-gameplay", cfg))?;
    let session = SessionConfig {
        max_actions: cfg.max_actions,
        representation: cfg.representation.clone(),
        mode: cfg.mode,
        obfuscate_prose: cfg.obfuscate,
        ..Default::default()
    };

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SessionLog, CliError>>>> = Mutex::new((0..boards.len()).map(|_| None).collect());
    let workers = cfg.parallel.min(boards.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((id, field)) = boards.get(i) else { break };
                let result = make_agent(cfg, &key, i).and_then(|mut agent| {
                    let log = run_session(id, field, agent.as_mut(), &session).map_err(session_error)?;
                    log.save(&logs_dir).map_err(session_error)?;
                    log::info!("{id}: {:?} after {} turns", log.outcome, log.turns.len());
                    Ok(log)
                });
                results.lock().expect("results lock")[i] = Some(result);
            });
        }
    });

    let mut logs = vec![];
    for r in results.into_inner().expect("results lock") {
        logs.push(r.expect("every board ran")?);
    }
    let label = format!("{} {:?} {}", cfg.agent, cfg.mode, representation_label(&cfg.representation, &cfg.symbols));
    report(&logs, &label, &cfg.out)?;
    let failed: Vec<&str> =
        logs.iter().filter(|l| l.outcome == Outcome::TransportFailed).map(|l| l.board_id.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::Transport(format!(
            "{} session(s) ended on transport errors: {}",
            failed.len(),
            failed.join(", ")
        )));
    }
    Ok(())
}

/// Scores `logs`, writes `report.md` and `report.json` under `out` and
/// prints the markdown table.
fn report(logs: &[SessionLog], label: &str, out: &Path) -> Result<(), CliError> {
    let stats = logs
        .iter()
        .map(score_session)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Consistency(e.to_string()))?;
    let r = aggregate(&stats).map_err(|e| CliError::Config(e.to_string()))?;
    let md = r.to_markdown(label);
    write_text(&out.join("report.md"), &md)?;
    write_json(&out.join("report.json"), &r)?;
    print!("{md}");
    Ok(())
}

pub fn run_understanding(cfg: &RunConfig) -> Result<(), CliError> {
    let key = preflight(cfg, &[AgentSpec::Reader, AgentSpec::Remote])?;
    let boards = open_suite(cfg)?;
    create_dir(&cfg.out)?;
    write_json(&cfg.out.join("manifest.json"), &manifest("run-understanding", cfg))?;

    let (games, sampled) = build_corpus(&boards, cfg.coords, cfg.seed);
    for w in &sampled.warnings {
        log::warn!("skipped {}: {}", w.game, w.reason);
    }
    let ann_dir = cfg.out.join("annotations");
    create_dir(&ann_dir)?;
    for g in &games {
        write_text(&ann_dir.join(format!("{}.board.txt", g.id)), &g.field.to_text())?;
        write_text(&ann_dir.join(format!("{}.history.txt", g.id)), &(render_action_history(&g.actions) + "\n"))?;
    }
    let all = instances(&sampled);
    write_json(&cfg.out.join("instances.json"), &all)?;

    let mut agent = make_agent(cfg, &key, 0)?;
    let session = SessionConfig::default();
    let records = run_tasks(&all, &cfg.representation, agent.as_mut(), session.transport_attempts, session.retry_base_delay_ms)
        .map_err(|e| CliError::Transport(e.to_string()))?;
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r).expect("record serializes"));
        lines.push('\n');
    }
    write_text(&cfg.out.join("records.jsonl"), &lines)?;
    let report = summarize(&representation_label(&cfg.representation, &cfg.symbols), &records);
    write_text(&cfg.out.join("report.md"), &report.to_markdown())?;
    write_json(&cfg.out.join("report.json"), &report)?;
    print!("{}", report.to_markdown());
    Ok(())
}

/// A run directory's `logs/` if present, else the directory itself.
fn logs_dir(path: &Path) -> PathBuf {
    let nested = path.join("logs");
    if nested.is_dir() {
        nested
    } else {
        path.to_path_buf()
    }
}

pub struct EvaluateArgs {
    pub path: PathBuf,
    pub label: String,
    pub json: bool,
    pub review: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let dir = logs_dir(&args.path);
    if !dir.is_dir() {
        return Err(CliError::Config(format!("{} is not a directory of session logs", dir.display())));
    }
    let logs = SessionLog::load_dir(&dir).map_err(|e| CliError::Consistency(e.to_string()))?;
    if logs.is_empty() {
        return Err(CliError::Config(format!("no session logs in {}", dir.display())));
    }
    let stats = logs
        .iter()
        .map(score_session)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Consistency(e.to_string()))?;
    let r = aggregate(&stats).map_err(|e| CliError::Config(e.to_string()))?;
    let mut text = if args.json {
        serde_json::to_string_pretty(&r).expect("report serializes") + "\n"
    } else {
        r.to_markdown(&args.label)
    };
    if let Some(k) = args.review {
        let bundle = select_reasoning_chains(&logs, k).map_err(|e| CliError::Consistency(e.to_string()))?;
        text.push('\n');
        text.push_str(&bundle.to_markdown());
    }
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    print!("{text}");
    Ok(())
}

pub fn transcript(log: &SessionLog, opts: &RenderOptions) -> String {
    let mut s = String::new();
    let f = &log.field;
    let _ = writeln!(
        s,
        "Board {} ({}x{}, {} mines), agent {}, mode {:?}",
        log.board_id,
        f.rows(),
        f.cols(),
        f.mine_count(),
        log.agent,
        log.config.mode
    );
    let o = &log.opening;
    let _ = writeln!(s, "\nOpening: {}", feedback_text(o.action, &o.feedback, &o.view_after));
    let _ = writeln!(s, "{}", render(&o.view_after, opts));
    for t in &log.turns {
        let _ = writeln!(s, "\nTurn {}{}", t.index, if t.counted { "" } else { " (not counted)" });
        let _ = writeln!(s, "Response:");
        for l in t.raw_response.lines() {
            let _ = writeln!(s, "  | {l}");
        }
        match (t.parsed, &t.feedback) {
            (Some(a), Some(fb)) => {
                let _ = writeln!(s, "{}", feedback_text(a, fb, &t.view_after));
            }
            _ => {
                let _ = writeln!(s, "No recognizable action.");
            }
        }
        let _ = writeln!(s, "{}", render(&t.view_after, opts));
    }
    let _ = writeln!(s, "\nOutcome: {:?} ({})", log.outcome, log.final_status);
    if let Some(e) = &log.transport_error {
        let _ = writeln!(s, "Transport error: {e}");
    }
    s
}

pub fn replay(path: &Path, repr: Option<RenderOptions>) -> Result<(), CliError> {
    let log = SessionLog::load(path).map_err(|e| match e {
        SessionError::Io { .. } => CliError::Config(e.to_string()),
        other => CliError::Consistency(other.to_string()),
    })?;
    verify_log(&log).map_err(|e| CliError::Consistency(e.to_string()))?;
    let opts = repr.unwrap_or_else(|| log.config.representation.clone());
    print!("{}", transcript(&log, &opts));
    Ok(())
}

pub fn serve(config: ServerConfig) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(minebench_server::serve(config)).map_err(|e| match e {
        minebench_server::ServerError::Bind { .. } | minebench_server::ServerError::Store(_) => CliError::Config(e.to_string()),
        other => CliError::Io(other.to_string()),
    })
}
