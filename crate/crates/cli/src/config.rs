//! Run configuration. Each setting is taken from the command-line flag if
//! given, else from the TOML config file, else from a `MINEBENCH_*`
//! environment variable, else a default. The API key is never a flag or a
//! file setting: it comes from `MINEBENCH_API_KEY` or a secret file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use minebench::session::remote::{api_key_from_env, ApiStyle, RemoteConfig, API_KEY_ENV};
use minebench::session::PromptMode;
use minebench::textboard::{RenderOptions, SymbolMap};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub repr: Option<String>,
    pub indices: Option<bool>,
    pub symbols: Option<String>,
    pub mode: Option<String>,
    pub agent: Option<String>,
    pub max_actions: Option<usize>,
    pub seed: Option<u64>,
    pub obfuscate: Option<bool>,
    pub parallel: Option<usize>,
    pub coords: Option<usize>,
    pub limit: Option<usize>,
    #[serde(default)]
    pub remote: RemoteFile,
    #[serde(default)]
    pub server: ServerFile,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteFile {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub style: Option<String>,
    pub secret_file: Option<PathBuf>,
    pub timeout_secs: Option<u64>,
    pub max_tokens: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerFile {
    pub bind: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub suites: Option<PathBuf>,
    pub sessions: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// Flag value, else file value, else `MINEBENCH_<key>`.
pub fn layer<T>(flag: Option<T>, file: Option<T>, key: &str) -> Result<Option<T>, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    if file.is_some() {
        return Ok(file);
    }
    let name = format!("MINEBENCH_{key}");
    match std::env::var(&name) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|e| CliError::Config(format!("{name}={v:?}: {e}")))
        }
        _ => Ok(None),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentSpec {
    SinglePoint,
    SinglePointGuess,
    Random,
    Reader,
    Remote,
}

impl AgentSpec {
    pub const NAMES: [&'static str; 5] =
        ["builtin:single-point", "builtin:single-point-guess", "builtin:random", "builtin:reader", "remote"];
}

impl FromStr for AgentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin:single-point" => Ok(AgentSpec::SinglePoint),
            "builtin:single-point-guess" => Ok(AgentSpec::SinglePointGuess),
            "builtin:random" => Ok(AgentSpec::Random),
            "builtin:reader" => Ok(AgentSpec::Reader),
            "remote" => Ok(AgentSpec::Remote),
            other => Err(format!("unknown agent {other:?} (expected one of {})", Self::NAMES.join(", "))),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self {
            AgentSpec::SinglePoint => 0,
            AgentSpec::SinglePointGuess => 1,
            AgentSpec::Random => 2,
            AgentSpec::Reader => 3,
            AgentSpec::Remote => 4,
        };
        f.write_str(Self::NAMES[i])
    }
}

impl Serialize for AgentSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The setting names accepted by `--repr` and `repr`.
fn parse_repr(s: &str) -> Result<RenderOptions, CliError> {
    match s {
        "table" => Ok(RenderOptions::table()),
        "coordinate" => Ok(RenderOptions::coordinate()),
        other => Err(CliError::Config(format!("unknown representation {other:?} (expected table or coordinate)"))),
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub suite: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub repr: Option<String>,
    pub indices: Option<bool>,
    pub symbols: Option<String>,
    pub mode: Option<String>,
    pub agent: Option<String>,
    pub max_actions: Option<usize>,
    pub seed: Option<u64>,
    pub obfuscate: Option<bool>,
    pub parallel: Option<usize>,
    pub coords: Option<usize>,
    pub limit: Option<usize>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub api_style: Option<String>,
    pub secret_file: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemoteSettings {
    pub endpoint: String,
    pub model: String,
    pub style: ApiStyle,
    pub secret_file: Option<PathBuf>,
    pub timeout_secs: u64,
    pub max_tokens: Option<u32>,
}

impl RemoteSettings {
    pub fn remote_config(&self) -> RemoteConfig {
        RemoteConfig {
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            style: self.style,
            timeout_secs: self.timeout_secs,
            max_tokens: self.max_tokens,
        }
    }

    /// The API key, or a configuration error naming where to put it.
    pub fn api_key(&self) -> Result<String, CliError> {
        api_key_from_env(self.secret_file.as_deref()).ok_or_else(|| {
            CliError::Config(format!(
                "the remote agent needs an API key: set {API_KEY_ENV} or point remote.secret_file / --secret-file at a file holding it"
            ))
        })
    }
}

/// Fully resolved settings for a run; written to the run manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub suite: PathBuf,
    pub out: PathBuf,
    pub representation: RenderOptions,
    pub symbols: String,
    pub mode: PromptMode,
    pub agent: AgentSpec,
    pub max_actions: usize,
    pub seed: u64,
    pub obfuscate: bool,
    pub parallel: usize,
    pub coords: usize,
    pub limit: Option<usize>,
    pub remote: Option<RemoteSettings>,
}

impl RunConfig {
    pub fn resolve(flags: RunFlags, file: &FileConfig, default_agent: AgentSpec, default_out: &str) -> Result<Self, CliError> {
        let suite = layer(flags.suite, file.suite.clone(), "SUITE")?.ok_or_else(|| {
            CliError::Config("no board suite given (use --suite, `suite` in the config file, or MINEBENCH_SUITE)".into())
        })?;
        let out = layer(flags.out, file.out.clone(), "OUT")?.unwrap_or_else(|| PathBuf::from(default_out));
        let repr: Option<String> = layer(flags.repr, file.repr.clone(), "REPR")?;
        let mut representation = parse_repr(repr.as_deref().unwrap_or("table"))?;
        if !layer(flags.indices, file.indices, "INDICES")?.unwrap_or(true) {
            representation = representation.without_indices();
        }
        let symbols: String = layer(flags.symbols, file.symbols.clone(), "SYMBOLS")?.unwrap_or_else(|| "default".into());
        let map = SymbolMap::by_name(&symbols)
            .ok_or_else(|| CliError::Config(format!("unknown symbol map {symbols:?} (expected default or roman)")))?;
        representation = representation.with_symbols(map);
        let mode: String = layer(flags.mode, file.mode.clone(), "MODE")?.unwrap_or_else(|| "NC".into());
        let mode = mode.parse::<PromptMode>().map_err(CliError::Config)?;
        let agent = match layer(flags.agent, file.agent.clone(), "AGENT")? {
            Some(a) => a.parse::<AgentSpec>().map_err(CliError::Config)?,
            None => default_agent,
        };
        let max_actions = layer(flags.max_actions, file.max_actions, "MAX_ACTIONS")?.unwrap_or(10);
        if max_actions == 0 {
            return Err(CliError::Config("max_actions must be at least 1".into()));
        }
        let parallel = layer(flags.parallel, file.parallel, "PARALLEL")?.unwrap_or(1).max(1);
        let remote = if agent == AgentSpec::Remote {
            let r = &file.remote;
            let endpoint = layer(flags.endpoint, r.endpoint.clone(), "ENDPOINT")?
                .ok_or_else(|| CliError::Config("the remote agent needs an endpoint (--endpoint, remote.endpoint or MINEBENCH_ENDPOINT)".into()))?;
            let model = layer(flags.model, r.model.clone(), "MODEL")?
                .ok_or_else(|| CliError::Config("the remote agent needs a model name (--model, remote.model or MINEBENCH_MODEL)".into()))?;
            let style = match layer(flags.api_style, r.style.clone(), "API_STYLE")?.as_deref() {
                None | Some("chat") => ApiStyle::Chat,
                Some("completion") => ApiStyle::Completion,
                Some(other) => return Err(CliError::Config(format!("unknown API style {other:?} (expected chat or completion)"))),
            };
            Some(RemoteSettings {
                endpoint,
                model,
                style,
                secret_file: layer(flags.secret_file, r.secret_file.clone(), "SECRET_FILE")?,
                timeout_secs: layer(None, r.timeout_secs, "TIMEOUT_SECS")?.unwrap_or(120),
                max_tokens: layer(None, r.max_tokens, "MAX_TOKENS")?,
            })
        } else {
            None
        };
        Ok(Self {
            suite,
            out,
            representation,
            symbols,
            mode,
            agent,
            max_actions,
            seed: layer(flags.seed, file.seed, "SEED")?.unwrap_or(minebench::boardgen::DEFAULT_SEED),
            obfuscate: layer(flags.obfuscate, file.obfuscate, "OBFUSCATE")?.unwrap_or(false),
            parallel,
            coords: layer(flags.coords, file.coords, "COORDS")?.unwrap_or(3),
            limit: layer(flags.limit, file.limit, "LIMIT")?,
            remote,
        })
    }
}
