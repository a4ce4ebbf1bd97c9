//! Language-model client abstraction.
//!
//! The engine only needs "prompt in, text out". Production deployments plug
//! in an HTTP chat-completion client; tests use [`MockClient`], which answers
//! from a table of recorded completions.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// A rendered prompt. `template` names the versioned template it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub template: String,
    pub system: String,
    pub user: String,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("language model request timed out")]
    Timeout,
    #[error("language model transport error: {0}")]
    Transport(String),
    #[error("language model returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("no completion available for this prompt")]
    NoCompletion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint: String::new(),
            model: String::new(),
            timeout: Duration::from_secs(30),
            max_retries: 2,
        }
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

/// Implementations must be safe to call concurrently.
pub trait LanguageModelClient: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError>;
}

impl<T: LanguageModelClient + ?Sized> LanguageModelClient for std::sync::Arc<T> {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

impl<T: LanguageModelClient + ?Sized> LanguageModelClient for &T {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }
}

/// Adapts a closure into a client.
pub struct FnClient<F>(pub F);

impl<F> LanguageModelClient for FnClient<F>
where
    F: Fn(&Prompt) -> Result<String, LlmError> + Send + Sync,
{
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        (self.0)(prompt)
    }
}

struct Script {
    needle: String,
    completions: Vec<String>,
    served: usize,
}

/// Deterministic client that answers from recorded completions.
///
/// Each entry is keyed by a needle; the first entry whose needle occurs in
/// the prompt's user message answers. An entry with several completions
/// returns them in order, repeating the last one once exhausted.
#[derive(Default)]
pub struct MockClient {
    scripts: Mutex<Vec<Script>>,
    log: Mutex<Vec<Prompt>>,
}

impl MockClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(self, needle: impl Into<String>, completion: impl Into<String>) -> Self {
        self.with_sequence(needle, vec![completion.into()])
    }

    pub fn with_sequence(self, needle: impl Into<String>, completions: Vec<String>) -> Self {
        self.scripts.lock().expect("mock lock").push(Script {
            needle: needle.into(),
            completions,
            served: 0,
        });
        self
    }

    /// Prompts received so far.
    pub fn prompts(&self) -> Vec<Prompt> {
        self.log.lock().expect("mock lock").clone()
    }
}

impl LanguageModelClient for MockClient {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        self.log.lock().expect("mock lock").push(prompt.clone());
        let mut scripts = self.scripts.lock().expect("mock lock");
        let script = scripts
            .iter_mut()
            .find(|s| prompt.user.contains(&s.needle))
            .ok_or(LlmError::NoCompletion)?;
        let i = script.served.min(script.completions.len().saturating_sub(1));
        script.served += 1;
        script.completions.get(i).cloned().ok_or(LlmError::NoCompletion)
    }
}

/// Returns the first balanced `{...}` object in `text`, ignoring code fences
/// and prose around it.
pub fn extract_json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, ch) in text[start..].char_indices() {
        if in_string {
            match ch {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match ch {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}
