mod commands;
mod config;
mod error;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minebench::boardgen::SuiteSpec;
use minebench::textboard::RenderOptions;
use minebench_server::ServerConfig;

use crate::commands::EvaluateArgs;
use crate::config::{layer, AgentSpec, FileConfig, RunConfig, RunFlags};
use crate::error::CliError;

/// Minesweeper environment and evaluation harness for language-model agents.
#[derive(Parser)]
#[command(name = "minebench", version)]
struct Cli {
    /// TOML config file. Flags override it; it overrides MINEBENCH_* variables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a board suite: board files plus a manifest.
    GenBoards(GenArgs),
    /// Run the navigation and counting tasks and report accuracy.
    RunUnderstanding(RunArgs),
    /// Play every board of a suite with an agent and write session logs.
    RunGameplay(RunArgs),
    /// Score a directory of session logs.
    Evaluate(EvalArgs),
    /// Print a turn-by-turn transcript of a stored session log.
    Replay(ReplayArgs),
    /// Start the HTTP server.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 5x5, 4 mines.
    Gameplay,
    /// 9x9, 10 mines.
    Understanding,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gameplay")]
    preset: Preset,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    mines: Option<usize>,
    /// Candidate boards to generate.
    #[arg(long)]
    pool: Option<usize>,
    /// Qualifying boards to keep.
    #[arg(long)]
    keep: Option<usize>,
    /// Cells the opening click must reveal for a board to qualify.
    #[arg(long)]
    min_reveal: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Board suite directory (holding manifest.json).
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Run directory for the manifest, logs and report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// table or coordinate.
    #[arg(long)]
    repr: Option<String>,
    /// Omit row and column indices from tables.
    #[arg(long)]
    no_indices: bool,
    /// Symbol map: default or roman.
    #[arg(long)]
    symbols: Option<String>,
    /// NC or CH.
    #[arg(long)]
    mode: Option<String>,
    /// builtin:single-point, builtin:single-point-guess, builtin:random,
    /// builtin:reader or remote.
    #[arg(long)]
    agent: Option<String>,
    #[arg(long)]
    max_actions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replace game vocabulary in the prompt prose.
    #[arg(long)]
    obfuscate: bool,
    /// Concurrent sessions.
    #[arg(long)]
    parallel: Option<usize>,
    /// Target cells sampled per annotated game (understanding tasks).
    #[arg(long)]
    coords: Option<usize>,
    /// Use only the first N boards of the suite.
    #[arg(long)]
    limit: Option<usize>,
    /// Remote chat-completion endpoint URL.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// chat or completion.
    #[arg(long)]
    api_style: Option<String>,
    /// File whose first line is the API key.
    #[arg(long)]
    secret_file: Option<PathBuf>,
}

impl RunArgs {
    fn flags(self) -> RunFlags {
        RunFlags {
            suite: self.suite,
            out: self.out,
            repr: self.repr,
            indices: self.no_indices.then_some(false),
            symbols: self.symbols,
            mode: self.mode,
            agent: self.agent,
            max_actions: self.max_actions,
            seed: self.seed,
            obfuscate: self.obfuscate.then_some(true),
            parallel: self.parallel,
            coords: self.coords,
            limit: self.limit,
            endpoint: self.endpoint,
            model: self.model,
            api_style: self.api_style,
            secret_file: self.secret_file,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of session logs, or a run directory containing logs/.
    path: PathBuf,
    /// Column heading for the report.
    #[arg(long, default_value = "agent")]
    label: String,
    /// Print the full report as JSON instead of a markdown table.
    #[arg(long)]
    json: bool,
    /// Append the K sessions with the most valid actions for review.
    #[arg(long, value_name = "K")]
    review: Option<usize>,
    /// Also write the output to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    log: PathBuf,
    /// Render boards as table or coordinate instead of the logged format.
    #[arg(long)]
    repr: Option<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    bind: Option<SocketAddr>,
    /// Directory for game journals; games are kept in memory without it.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Directory of board suites.
    #[arg(long)]
    suites: Option<PathBuf>,
    /// Directory of stored session logs.
    #[arg(long)]
    sessions: Option<PathBuf>,
}

fn gen_spec(a: &GenArgs) -> SuiteSpec {
    let base = match a.preset {
        Preset::Gameplay => SuiteSpec::gameplay_default(),
        Preset::Understanding => SuiteSpec::understanding_default(),
    };
    let g = &base.gen;
    let mut spec = SuiteSpec::centered(
        a.rows.unwrap_or(g.rows),
        a.cols.unwrap_or(g.cols),
        a.mines.unwrap_or(g.n_mines),
        a.pool.unwrap_or(base.pool_size),
        a.keep.unwrap_or(base.keep),
        a.seed.unwrap_or(g.seed),
    );
    if let Some(m) = a.min_reveal {
        spec.min_first_reveal = m;
    }
    spec
}

fn server_config(a: ServeArgs, file: &FileConfig) -> Result<ServerConfig, CliError> {
    let s = &file.server;
    let bind = match a.bind {
        Some(b) => Some(b),
        None => {
            let raw: Option<String> = layer(None, s.bind.clone(), "BIND")?;
            raw.map(|b| b.parse::<SocketAddr>().map_err(|e| CliError::Config(format!("bind address {b:?}: {e}"))))
                .transpose()?
        }
    };
    Ok(ServerConfig {
        bind: bind.unwrap_or(ServerConfig::default().bind),
        data_dir: layer(a.data_dir, s.data_dir.clone(), "DATA_DIR")?,
        suites_dir: layer(a.suites, s.suites.clone(), "SUITES")?,
        sessions_dir: layer(a.sessions, s.sessions.clone(), "SESSIONS")?,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenBoards(a) => commands::gen_boards(&gen_spec(&a), &a.out).map(|_| ()),
        Command::RunUnderstanding(a) => {
            let cfg = RunConfig::resolve(a.flags(), &file, AgentSpec::Reader, "runs/understanding")?;
            commands::run_understanding(&cfg)
        }
        Command::RunGameplay(a) => {
            let cfg = RunConfig::resolve(a.flags(), &file, AgentSpec::SinglePoint, "runs/gameplay")?;
            commands::run_gameplay(&cfg)
        }
        Command::Evaluate(a) => commands::evaluate(&EvaluateArgs {
            path: a.path,
            label: a.label,
            json: a.json,
            review: a.review,
            out: a.out,
        }),
        Command::Replay(a) => {
            let repr = match a.repr.as_deref() {
                None => None,
                Some("table") => Some(RenderOptions::table()),
                Some("coordinate") => Some(RenderOptions::coordinate()),
                Some(other) => return Err(CliError::Config(format!("unknown representation {other:?}"))),
            };
            commands::replay(&a.log, repr)
        }
        Command::Serve(a) => commands::serve(server_config(a, &file)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
