//! HTTP-backed model clients and the transcript that makes sessions
//! replayable.
//!
//! Every model exchange of a session goes through a [`Recorder`]. While a
//! session is live the recorder forwards to the real client and logs the
//! answer; during replay it answers only from the logged transcript, so a
//! restored session reproduces its layout without network access.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use contextkg_core::clustering::{EmbedError, EmbeddingProvider, HashedTfEmbedder};
use contextkg_core::preference::{LanguageModelClient, LlmError, Prompt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::LlmConfig;

fn http_client(timeout: Duration) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .expect("HTTP client builds")
}

fn join(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path)
}

fn transport(e: reqwest::Error) -> LlmError {
    if e.is_timeout() {
        LlmError::Timeout
    } else {
        LlmError::Transport(e.to_string())
    }
}

/// Chat-completion client for OpenAI-compatible endpoints. Blocking; call it
/// from a blocking task.
pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    max_retries: u32,
}

impl HttpChatClient {
    pub fn new(config: &LlmConfig) -> Self {
        HttpChatClient {
            http: http_client(Duration::from_secs_f64(config.timeout_secs.max(0.1))),
            url: join(&config.endpoint, "chat/completions"),
            model: config.model.clone(),
            api_key: config.api_key.clone(),
            max_retries: config.max_retries,
        }
    }

    fn post(&self, body: &Value) -> Result<Value, LlmError> {
        let mut req = self.http.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(transport)?;
        let status = resp.status();
        let text = resp.text().map_err(transport)?;
        if !status.is_success() {
            return Err(LlmError::Status {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        serde_json::from_str(&text).map_err(|e| LlmError::Transport(format!("bad response JSON: {e}")))
    }
}

impl LanguageModelClient for HttpChatClient {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
        });
        let mut attempt = 0;
        loop {
            let result = self.post(&body).and_then(|v| {
                v.pointer("/choices/0/message/content")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or(LlmError::NoCompletion)
            });
            match result {
                Err(LlmError::Timeout | LlmError::Transport(_)) if attempt < self.max_retries => attempt += 1,
                Err(LlmError::Status { status, .. }) if (status == 429 || status >= 500) && attempt < self.max_retries => {
                    attempt += 1
                }
                other => return other,
            }
            std::thread::sleep(Duration::from_millis(200 << attempt.min(4)));
        }
    }
}

/// Embedding client for OpenAI-compatible `/embeddings` endpoints.
pub struct HttpEmbedder {
    http: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    dimension: usize,
}

impl HttpEmbedder {
    pub fn new(config: &LlmConfig, dimension: usize) -> Self {
        HttpEmbedder {
            http: http_client(Duration::from_secs_f64(config.timeout_secs.max(0.1))),
            url: join(&config.endpoint, "embeddings"),
            model: config.embedding_model.clone(),
            api_key: config.api_key.clone(),
            dimension,
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let mut req = self.http.post(&self.url).json(&json!({"model": self.model, "input": texts}));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let provider = |e: String| EmbedError::Provider(e);
        let resp = req.send().map_err(|e| provider(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(provider(format!("status {}", resp.status())));
        }
        let v: Value = resp.json().map_err(|e| provider(e.to_string()))?;
        let data = v
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| provider("response has no data array".into()))?;
        if data.len() != texts.len() {
            return Err(EmbedError::CountMismatch {
                expected: texts.len(),
                got: data.len(),
            });
        }
        data.iter()
            .map(|d| {
                let vec: Vec<f64> = d
                    .get("embedding")
                    .and_then(Value::as_array)
                    .ok_or_else(|| provider("entry has no embedding".into()))?
                    .iter()
                    .map(|x| x.as_f64().unwrap_or(0.0))
                    .collect();
                if vec.len() != self.dimension {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dimension,
                        got: vec.len(),
                    });
                }
                Ok(vec)
            })
            .collect()
    }
}

/// Everything a session received from models, in a replayable form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    /// `template \n user` → completion.
    #[serde(default)]
    pub completions: BTreeMap<String, String>,
    /// text → vector.
    #[serde(default)]
    pub embeddings: BTreeMap<String, Vec<f64>>,
}

fn prompt_key(p: &Prompt) -> String {
    format!("{}\n{}", p.template, p.user)
}

/// Models a session talks to. `None` members fall back to the offline paths.
#[derive(Clone, Default)]
pub struct Models {
    pub chat: Option<Arc<dyn LanguageModelClient>>,
    pub embedder: Option<Arc<dyn EmbeddingProvider>>,
}

impl Models {
    pub fn offline() -> Self {
        Models::default()
    }

    /// Chat model from `llm`; embeddings over HTTP unless `embedding_provider`
    /// is `"offline"` (a URL there overrides the endpoint).
    pub fn http(llm: &LlmConfig, embedding_provider: &str) -> Self {
        let embedder: Option<Arc<dyn EmbeddingProvider>> = match embedding_provider.trim() {
            "" | "offline" => None,
            p if p.starts_with("http") => Some(Arc::new(HttpEmbedder::new(
                &LlmConfig {
                    endpoint: p.to_string(),
                    ..llm.clone()
                },
                llm.embedding_dimension,
            ))),
            _ => Some(Arc::new(HttpEmbedder::new(llm, llm.embedding_dimension))),
        };
        Models {
            chat: Some(Arc::new(HttpChatClient::new(llm))),
            embedder,
        }
    }
}

/// Records live exchanges, or answers from a transcript when replaying.
pub struct Recorder {
    models: Models,
    replaying: bool,
    transcript: Mutex<Transcript>,
    offline_embedder: HashedTfEmbedder,
}

impl Recorder {
    pub fn live(models: Models, transcript: Transcript) -> Self {
        Recorder {
            models,
            replaying: false,
            transcript: Mutex::new(transcript),
            offline_embedder: HashedTfEmbedder::default(),
        }
    }

    pub fn replay(transcript: Transcript) -> Self {
        Recorder {
            models: Models::offline(),
            replaying: true,
            transcript: Mutex::new(transcript),
            offline_embedder: HashedTfEmbedder::default(),
        }
    }

    /// Whether a chat model takes part (live or recorded).
    pub fn has_chat(&self) -> bool {
        self.models.chat.is_some() || (self.replaying && !self.transcript.lock().expect("transcript").completions.is_empty())
    }

    fn has_embedder(&self) -> bool {
        self.models.embedder.is_some() || (self.replaying && !self.transcript.lock().expect("transcript").embeddings.is_empty())
    }

    pub fn chat(&self) -> Option<&dyn LanguageModelClient> {
        self.has_chat().then_some(self as &dyn LanguageModelClient)
    }

    pub fn embedder(&self) -> &dyn EmbeddingProvider {
        if self.has_embedder() {
            self
        } else {
            &self.offline_embedder
        }
    }

    pub fn transcript(&self) -> Transcript {
        self.transcript.lock().expect("transcript").clone()
    }
}

impl LanguageModelClient for Recorder {
    fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let key = prompt_key(prompt);
        if let Some(done) = self.transcript.lock().expect("transcript").completions.get(&key) {
            return Ok(done.clone());
        }
        let chat = match (&self.models.chat, self.replaying) {
            (Some(c), false) => c,
            _ => return Err(LlmError::NoCompletion),
        };
        let answer = chat.complete(prompt)?;
        self.transcript
            .lock()
            .expect("transcript")
            .completions
            .insert(key, answer.clone());
        Ok(answer)
    }
}

impl EmbeddingProvider for Recorder {
    fn dimension(&self) -> usize {
        match &self.models.embedder {
            Some(e) => e.dimension(),
            None => self
                .transcript
                .lock()
                .expect("transcript")
                .embeddings
                .values()
                .next()
                .map_or(HashedTfEmbedder::DEFAULT_DIMENSION, Vec::len),
        }
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let missing: Vec<String> = {
            let t = self.transcript.lock().expect("transcript");
            let mut m: Vec<String> = texts.iter().filter(|x| !t.embeddings.contains_key(*x)).cloned().collect();
            m.sort();
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let embedder = match (&self.models.embedder, self.replaying) {
                (Some(e), false) => e,
                _ => return Err(EmbedError::Provider(format!("no recorded embedding for {:?}", missing[0]))),
            };
            let vectors = embedder.embed(&missing)?;
            let mut t = self.transcript.lock().expect("transcript");
            for (text, v) in missing.into_iter().zip(vectors) {
                t.embeddings.insert(text, v);
            }
        }
        let t = self.transcript.lock().expect("transcript");
        Ok(texts.iter().map(|x| t.embeddings[x].clone()).collect())
    }
}
