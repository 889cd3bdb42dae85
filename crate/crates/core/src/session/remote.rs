//! Chat-completion HTTP agent.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::agent::{AgentError, AgentPort, AgentReply, AgentRequest, Context, Message, Role, TokenUsage};

/// Environment variable holding the API token.
pub const API_KEY_ENV: &str = "MINEBENCH_API_KEY";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiStyle {
    /// `{"messages": [...]}` in, `choices[0].message.content` out.
    Chat,
    /// `{"prompt": "..."}` in, `choices[0].text` out.
    Completion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub style: ApiStyle,
    pub timeout_secs: u64,
    pub max_tokens: Option<u32>,
}

impl RemoteConfig {
    pub fn chat(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), model: model.into(), style: ApiStyle::Chat, timeout_secs: 120, max_tokens: None }
    }
}

/// Reads the token from `MINEBENCH_API_KEY`, falling back to the first line
/// of `secret_file`.
pub fn api_key_from_env(secret_file: Option<&Path>) -> Option<String> {
    if let Ok(k) = std::env::var(API_KEY_ENV) {
        if !k.trim().is_empty() {
            return Some(k.trim().to_string());
        }
    }
    let text = std::fs::read_to_string(secret_file?).ok()?;
    text.lines().next().map(str::trim).filter(|k| !k.is_empty()).map(str::to_string)
}

pub struct ChatCompletionAgent {
    config: RemoteConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl ChatCompletionAgent {
    pub fn new(config: RemoteConfig, api_key: Option<String>) -> Result<Self, AgentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| AgentError::Fatal(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { config, api_key, client })
    }

    pub fn request_body(&self, context: &Context) -> Value {
        let mut body = json!({ "model": self.config.model, "temperature": 0 });
        match self.config.style {
            ApiStyle::Chat => {
                let messages: Vec<Message> = match context {
                    Context::Conversation(m) => m.clone(),
                    Context::Prompt(p) => vec![Message::user(p.clone())],
                };
                body["messages"] = json!(messages);
            }
            ApiStyle::Completion => {
                let prompt = match context {
                    Context::Prompt(p) => p.clone(),
                    Context::Conversation(m) => flatten(m),
                };
                body["prompt"] = json!(prompt);
            }
        }
        if let Some(n) = self.config.max_tokens {
            body["max_tokens"] = json!(n);
        }
        body
    }

    fn extract(&self, response: &Value) -> Option<String> {
        let choice = response.get("choices")?.get(0)?;
        let text = match self.config.style {
            ApiStyle::Chat => choice.get("message")?.get("content")?,
            ApiStyle::Completion => choice.get("text")?,
        };
        text.as_str().map(str::to_string)
    }
}

fn flatten(messages: &[Message]) -> String {
    messages
        .iter()
        .map(|m| {
            let who = match m.role {
                Role::System => "System",
                Role::User => "User",
                Role::Assistant => "Assistant",
            };
            format!("{who}: {}", m.content)
        })
        .collect::<Vec<_>>()
        .join("\n\n")
        + "\n\nAssistant:"
}

impl AgentPort for ChatCompletionAgent {
    fn name(&self) -> String {
        format!("remote:{}", self.config.model)
    }

    fn respond(&mut self, request: &AgentRequest<'_>) -> Result<AgentReply, AgentError> {
        let body = self.request_body(request.context);
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| AgentError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| AgentError::Transport(e.to_string()))?;
        if !status.is_success() {
            let msg = format!("HTTP {}: {}", status.as_u16(), text);
            return Err(if status.as_u16() == 429 || status.is_server_error() {
                AgentError::Transport(msg)
            } else {
                AgentError::Fatal(msg)
            });
        }
        let parsed: Value = serde_json::from_str(&text)
            .map_err(|e| AgentError::Transport(format!("response is not JSON: {e}")))?;
        let content = self
            .extract(&parsed)
            .ok_or_else(|| AgentError::Transport("response has no completion text".into()))?;
        let usage = parsed.get("usage").map(|u| TokenUsage {
            prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
            completion_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
        });
        Ok(AgentReply {
            text: content,
            usage,
            exchange: Some(json!({ "request": body, "status": status.as_u16(), "response": parsed })),
        })
    }
}
