//! Live provider speaking a generic chat-completion wire shape.
//!
//! Any endpoint with the common `POST {base_url}/chat/completions`
//! surface works — hosted models, compatible proxies, or local servers.
//! The model name, base URL, and temperature come from configuration;
//! the API key is read from an environment variable and never stored.

use serde::Deserialize;
use serde_json::json;

use super::{Provider, ProviderError, Reply, RequestContext, Usage};

/// Endpoint settings. `api_key_env` names the environment variable that
/// holds the bearer token; an empty value means no auth header (local
/// servers).
#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: Option<f64>,
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: "http://127.0.0.1:8080/v1".to_string(),
            model: "default".to_string(),
            temperature: None,
            api_key_env: "GRASP_API_KEY".to_string(),
            timeout_secs: 120,
        }
    }
}

/// Chat-completion client over blocking HTTP.
pub struct HttpProvider {
    config: HttpConfig,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build();
        HttpProvider { config, agent }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn api_key(&self) -> Result<Option<String>, ProviderError> {
        if self.config.api_key_env.is_empty() {
            return Ok(None);
        }
        match std::env::var(&self.config.api_key_env) {
            Ok(key) if !key.is_empty() => Ok(Some(key)),
            _ => Err(ProviderError::Config(format!(
                "environment variable {} is not set",
                self.config.api_key_env
            ))),
        }
    }
}

impl Provider for HttpProvider {
    fn complete(&self, _ctx: &RequestContext, prompt: &str) -> Result<Reply, ProviderError> {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }

        let mut request = self.agent.post(&self.endpoint());
        if let Some(key) = self.api_key()? {
            request = request.set("authorization", &format!("Bearer {key}"));
        }

        let response = match request.send_json(body) {
            Ok(resp) => resp,
            // 429 and 5xx are transient; other statuses are protocol errors.
            Err(ureq::Error::Status(code, resp)) if code == 429 || code >= 500 => {
                return Err(ProviderError::Transport(format!(
                    "http {code}: {}",
                    resp.into_string().unwrap_or_default()
                )))
            }
            Err(ureq::Error::Status(code, resp)) => {
                return Err(ProviderError::Protocol(format!(
                    "http {code}: {}",
                    resp.into_string().unwrap_or_default()
                )))
            }
            Err(ureq::Error::Transport(t)) => return Err(ProviderError::Transport(t.to_string())),
        };

        let parsed: ChatResponse = response
            .into_json()
            .map_err(|e| ProviderError::Protocol(format!("malformed chat response: {e}")))?;
        let text =
            parsed.choices.into_iter().next().and_then(|c| c.message.content).unwrap_or_default();
        let usage = parsed.usage.unwrap_or_default();
        Ok(Reply { text, usage: Usage::one_call(usage.prompt_tokens, usage.completion_tokens) })
    }
}
