//! Annotation client for OpenAI-compatible chat-completions endpoints.
//!
//! One label turn per item with logprobs enabled, plus optional
//! follow-up turns asking the model to self-report its confidence.
//! Requests can be recorded to an append-only cache keyed by a content
//! fingerprint and replayed later without touching the network.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use uq_core::model::{validate_annotation, ModelAnnotation, SelfQual, TokenLogProbs};
use uq_core::{AnnotationItem, LabelSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Record,
    Replay,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            other => Err(format!("unknown mode {other:?} (expected live, record, or replay)")),
        }
    }
}

/// Endpoint and retry settings. The API key itself is never stored; only
/// the name of the environment variable holding it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Top-k logprob alternatives to request; should be >= the number of
    /// schema classes, the floor rule covers the rest.
    #[serde(default = "default_top_k")]
    pub top_k: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

fn default_top_k() -> u32 {
    5
}
fn default_timeout_secs() -> u64 {
    30
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    250
}
fn default_concurrency() -> usize {
    4
}
fn default_mode() -> Mode {
    Mode::Live
}

impl EndpointConfig {
    pub fn offline(cache_path: PathBuf) -> Self {
        EndpointConfig {
            base_url: "http://unused.invalid/v1".into(),
            api_key_env: None,
            top_k: 5,
            temperature: 0.0,
            timeout_secs: 30,
            max_retries: 3,
            backoff_base_ms: 250,
            concurrency: 4,
            mode: Mode::Replay,
            cache_path: Some(cache_path),
        }
    }
}

// ---- wire format ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

/// Chat-completions request body. Serialized field order is part of the
/// request fingerprint, so fields must not be reordered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_logprobs: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChatResponse {
    pub choices: Vec<ChatChoice>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChatChoice {
    pub message: ChatMessage,
    #[serde(default)]
    pub logprobs: Option<ChoiceLogProbs>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChoiceLogProbs {
    #[serde(default)]
    pub content: Vec<PositionLogProbs>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PositionLogProbs {
    pub token: String,
    pub logprob: f64,
    #[serde(default)]
    pub top_logprobs: Vec<TokenLogProb>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenLogProb {
    pub token: String,
    pub logprob: f64,
}

/// Content hash identifying a request: stable across runs for identical
/// (model, prompt, parameters).
pub fn request_fingerprint(request: &ChatRequest) -> String {
    let body = serde_json::to_string(request).expect("request serializes");
    let mut hasher = Sha256::new();
    hasher.update(body.as_bytes());
    hex::encode(hasher.finalize())
}

// ---- cache ----------------------------------------------------------------

/// One recorded exchange, stored as a line of JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub fingerprint: String,
    pub response: String,
    pub timestamp: u64,
}

#[derive(Debug)]
struct ReplayCache {
    path: PathBuf,
    entries: HashMap<String, String>,
}

impl ReplayCache {
    fn load(path: &Path) -> Result<Self, std::io::Error> {
        let mut entries = HashMap::new();
        match std::fs::File::open(path) {
            Ok(file) => {
                for line in BufReader::new(file).lines() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    if let Ok(entry) = serde_json::from_str::<CacheEntry>(&line) {
                        entries.insert(entry.fingerprint, entry.response);
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(ReplayCache { path: path.to_path_buf(), entries })
    }

    fn get(&self, fingerprint: &str) -> Option<&String> {
        self.entries.get(fingerprint)
    }

    fn put(&mut self, fingerprint: String, response: String) -> Result<(), std::io::Error> {
        let entry = CacheEntry {
            fingerprint: fingerprint.clone(),
            response: response.clone(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(file, "{}", serde_json::to_string(&entry).expect("entry serializes"))?;
        self.entries.insert(fingerprint, response);
        Ok(())
    }
}

/// Writes a cache file directly; used to build replay fixtures.
pub fn append_cache_entry(
    path: &Path,
    fingerprint: &str,
    response: &str,
) -> Result<(), std::io::Error> {
    let entry = CacheEntry {
        fingerprint: fingerprint.to_string(),
        response: response.to_string(),
        timestamp: 0,
    };
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{}", serde_json::to_string(&entry).expect("entry serializes"))
}

// ---- transport ------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TransportReply {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<TransportReply, String>;
}

/// HTTP transport backed by `ureq`.
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<TransportReply, String> {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        let mut request = agent.post(url).set("Content-Type", "application/json");
        if let Some(key) = api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        match request.send_string(body) {
            Ok(response) => {
                let status = response.status();
                let body = response.into_string().map_err(|e| e.to_string())?;
                Ok(TransportReply { status, body })
            }
            Err(ureq::Error::Status(status, response)) => {
                let body = response.into_string().unwrap_or_default();
                Ok(TransportReply { status, body })
            }
            Err(ureq::Error::Transport(t)) => Err(t.to_string()),
        }
    }
}

// ---- errors ---------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport failed after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("malformed response: {detail}")]
    MalformedResponse { detail: String },
    #[error("replay cache has no entry for fingerprint {fingerprint}")]
    CacheMiss { fingerprint: String },
    #[error("API key environment variable {env:?} is not set")]
    MissingApiKey { env: String },
    #[error("self-report parse failed: {detail}")]
    SelfReportParse { detail: String },
    #[error("self-report value {value} outside [0, 100]")]
    SelfReportRange { value: u64 },
    #[error("cache file {path}: {source}")]
    CacheIo { path: String, source: std::io::Error },
}

// ---- prompt templates -----------------------------------------------------

/// Prompt templates with `{text}`, `{options}`, and `{answer}`
/// placeholders. Shipped as editable files; these are the defaults.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub label: String,
    pub quant: String,
    pub qual: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            label: include_str!("../templates/label.txt").to_string(),
            quant: include_str!("../templates/quant.txt").to_string(),
            qual: include_str!("../templates/qual.txt").to_string(),
        }
    }
}

/// Renders the schema's classes as answer options, one per line.
pub fn render_options(schema: &LabelSchema) -> String {
    schema
        .classes
        .iter()
        .map(|c| format!("{}) {}", c.answer_token, c.name))
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_label_prompt(template: &str, item: &AnnotationItem, schema: &LabelSchema) -> String {
    template
        .replace("{text}", &item.text)
        .replace("{options}", &render_options(schema))
}

fn render_followup_prompt(template: &str, item: &AnnotationItem, answer: &str) -> String {
    template.replace("{text}", &item.text).replace("{answer}", answer)
}

// ---- client ---------------------------------------------------------------

/// An annotation plus quality flags the caller should surface.
#[derive(Debug, Clone)]
pub struct Annotated {
    pub annotation: ModelAnnotation,
    /// No schema token appeared in the top-k list; every logprob is the
    /// floor value and the prediction carries no signal.
    pub degenerate: bool,
    /// Non-fatal oddities (ambiguous self-reports, failed follow-ups).
    pub warnings: Vec<String>,
}

pub struct LlmClient {
    config: EndpointConfig,
    transport: Box<dyn Transport>,
    cache: Option<Mutex<ReplayCache>>,
    floor_logprob: f64,
    seed: u64,
}

impl LlmClient {
    pub fn new(
        config: EndpointConfig,
        transport: Box<dyn Transport>,
        floor_logprob: f64,
        seed: u64,
    ) -> Result<Self, ClientError> {
        let cache = match (&config.mode, &config.cache_path) {
            (Mode::Live, _) | (_, None) => None,
            (_, Some(path)) => Some(Mutex::new(ReplayCache::load(path).map_err(|e| {
                ClientError::CacheIo { path: path.display().to_string(), source: e }
            })?)),
        };
        if matches!(config.mode, Mode::Record | Mode::Replay) && cache.is_none() {
            return Err(ClientError::CacheIo {
                path: "<missing>".into(),
                source: std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "record/replay mode needs a cache_path",
                ),
            });
        }
        Ok(LlmClient { config, transport, cache, floor_logprob, seed })
    }

    pub fn with_http(
        config: EndpointConfig,
        floor_logprob: f64,
        seed: u64,
    ) -> Result<Self, ClientError> {
        Self::new(config, Box::new(HttpTransport), floor_logprob, seed)
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    /// Fails fast when live traffic would need a key that is not set.
    pub fn check_credentials(&self) -> Result<(), ClientError> {
        if matches!(self.config.mode, Mode::Live | Mode::Record) {
            if let Some(env) = &self.config.api_key_env {
                if std::env::var(env).is_err() {
                    return Err(ClientError::MissingApiKey { env: env.clone() });
                }
            }
        }
        Ok(())
    }

    fn api_key(&self) -> Result<Option<String>, ClientError> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(env) => match std::env::var(env) {
                Ok(key) => Ok(Some(key)),
                Err(_) => Err(ClientError::MissingApiKey { env: env.clone() }),
            },
        }
    }

    /// Sends a request honoring the mode: replay never touches the
    /// network, record consults the cache first and appends on miss.
    pub fn send(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let fingerprint = request_fingerprint(request);
        match self.config.mode {
            Mode::Replay => {
                let cache = self.cache.as_ref().expect("replay has a cache").lock().unwrap();
                cache
                    .get(&fingerprint)
                    .cloned()
                    .ok_or(ClientError::CacheMiss { fingerprint })
            }
            Mode::Record => {
                {
                    let cache = self.cache.as_ref().expect("record has a cache").lock().unwrap();
                    if let Some(hit) = cache.get(&fingerprint) {
                        return Ok(hit.clone());
                    }
                }
                let response = self.call_with_retries(request, &fingerprint)?;
                let mut cache = self.cache.as_ref().unwrap().lock().unwrap();
                let path = cache.path.display().to_string();
                cache
                    .put(fingerprint, response.clone())
                    .map_err(|e| ClientError::CacheIo { path, source: e })?;
                Ok(response)
            }
            Mode::Live => self.call_with_retries(request, &fingerprint),
        }
    }

    fn call_with_retries(
        &self,
        request: &ChatRequest,
        fingerprint: &str,
    ) -> Result<String, ClientError> {
        let body = serde_json::to_string(request).expect("request serializes");
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let api_key = self.api_key()?;
        let timeout = Duration::from_secs(self.config.timeout_secs);
        // deterministic jitter: seeded from config seed and the request
        let mut fp_seed = [0u8; 8];
        fp_seed.copy_from_slice(&Sha256::digest(fingerprint.as_bytes())[..8]);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ u64::from_le_bytes(fp_seed));
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = self.config.backoff_base_ms.saturating_mul(1 << (attempt - 1));
                let jitter = rng.gen_range(0..=self.config.backoff_base_ms.max(1));
                std::thread::sleep(Duration::from_millis(backoff + jitter));
            }
            match self.transport.post_json(&url, api_key.as_deref(), &body, timeout) {
                Ok(reply) if reply.status < 300 => return Ok(reply.body),
                Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                    last = format!("status {}: {}", reply.status, reply.body);
                }
                Ok(reply) => {
                    // non-retryable client error
                    return Err(ClientError::Transport {
                        attempts: attempt + 1,
                        last: format!("status {}: {}", reply.status, reply.body),
                    });
                }
                Err(e) => last = e,
            }
        }
        Err(ClientError::Transport { attempts, last })
    }

    pub fn build_label_request(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
    ) -> ChatRequest {
        label_request(model, item, schema, templates, self.config.temperature, self.config.top_k)
    }

    pub fn build_followup_request(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
        followup_template: &str,
        prior_answer: &str,
    ) -> ChatRequest {
        followup_request(
            model,
            item,
            schema,
            templates,
            followup_template,
            prior_answer,
            self.config.temperature,
        )
    }

    /// Labels one item: extracts label-token logprobs from the first
    /// generated position's top-k list, floors the missing ones, and
    /// returns a validated annotation.
    pub fn annotate_item(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
    ) -> Result<Annotated, ClientError> {
        let request = self.build_label_request(model, item, schema, templates);
        let body = self.send(&request)?;
        let response: ChatResponse =
            serde_json::from_str(&body).map_err(|e| ClientError::MalformedResponse {
                detail: format!("invalid response body: {e}"),
            })?;
        let choice = response.choices.first().ok_or_else(|| ClientError::MalformedResponse {
            detail: "response has no choices".into(),
        })?;
        let position = choice
            .logprobs
            .as_ref()
            .and_then(|lp| lp.content.first())
            .ok_or_else(|| ClientError::MalformedResponse {
                detail: "no logprobs present".into(),
            })?;

        let mut entries = std::collections::BTreeMap::new();
        let mut consider = |token: &str, logprob: f64| {
            let trimmed = token.trim();
            if let Some(class) = schema.class_for_token(trimmed) {
                let slot = entries
                    .entry(class.answer_token.clone())
                    .or_insert(f64::NEG_INFINITY);
                // probabilities never exceed 1; clamp API float fuzz
                *slot = slot.max(logprob.min(0.0));
            }
        };
        consider(&position.token, position.logprob);
        for alt in &position.top_logprobs {
            consider(&alt.token, alt.logprob);
        }

        let degenerate = entries.is_empty();
        let mut logprobs = TokenLogProbs::new(entries);
        logprobs.floor_complete(schema, self.floor_logprob);
        let chosen = logprobs.argmax(schema).expect("schema tokens present").to_string();
        let annotation = ModelAnnotation {
            model_id: model.to_string(),
            item_id: item.item_id.clone(),
            chosen_token: chosen,
            label_logprobs: logprobs,
            self_quant: None,
            self_qual: None,
            raw_response: choice.message.content.clone(),
        };
        let annotation = validate_annotation(annotation, schema, self.floor_logprob)
            .expect("constructed annotation is consistent");
        Ok(Annotated { annotation, degenerate, warnings: Vec::new() })
    }

    /// Asks for a 0-100 confidence in a prior answer and parses the first
    /// integer in the reply.
    pub fn self_report_quant(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
        prior_answer: &str,
    ) -> Result<u32, ClientError> {
        let request = self.build_followup_request(
            model,
            item,
            schema,
            templates,
            &templates.quant,
            prior_answer,
        );
        let body = self.send(&request)?;
        let content = first_choice_content(&body)?;
        let value = first_integer(&content).ok_or_else(|| ClientError::SelfReportParse {
            detail: format!("no integer in {content:?}"),
        })?;
        if value > 100 {
            return Err(ClientError::SelfReportRange { value });
        }
        Ok(value as u32)
    }

    /// Asks for one of the five confidence words. When several appear the
    /// first match wins and the reply is flagged ambiguous.
    pub fn self_report_qual(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
        prior_answer: &str,
    ) -> Result<(SelfQual, bool), ClientError> {
        let request = self.build_followup_request(
            model,
            item,
            schema,
            templates,
            &templates.qual,
            prior_answer,
        );
        let body = self.send(&request)?;
        let content = first_choice_content(&body)?;
        parse_qual_words(&content).ok_or_else(|| ClientError::SelfReportParse {
            detail: format!("none of the five confidence words in {content:?}"),
        })
    }

    /// Annotates a batch with bounded concurrency; results come back in
    /// input order. With `self_report`, each item gets the two follow-up
    /// turns and failures there degrade to warnings instead of dropping
    /// the annotation.
    pub fn annotate_batch(
        &self,
        model: &str,
        items: &[AnnotationItem],
        schema: &LabelSchema,
        templates: &PromptTemplates,
        self_report: bool,
    ) -> Vec<Result<Annotated, ClientError>> {
        let results: Vec<Mutex<Option<Result<Annotated, ClientError>>>> =
            items.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.concurrency.max(1).min(items.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::SeqCst);
                    if idx >= items.len() {
                        break;
                    }
                    let outcome = self.annotate_one(model, &items[idx], schema, templates, self_report);
                    *results[idx].lock().unwrap() = Some(outcome);
                });
            }
        });
        results
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
            .collect()
    }

    fn annotate_one(
        &self,
        model: &str,
        item: &AnnotationItem,
        schema: &LabelSchema,
        templates: &PromptTemplates,
        self_report: bool,
    ) -> Result<Annotated, ClientError> {
        let mut annotated = self.annotate_item(model, item, schema, templates)?;
        if self_report {
            let prior = annotated.annotation.chosen_token.clone();
            match self.self_report_quant(model, item, schema, templates, &prior) {
                Ok(v) => annotated.annotation.self_quant = Some(v),
                Err(e) => annotated.warnings.push(format!("quant self-report: {e}")),
            }
            match self.self_report_qual(model, item, schema, templates, &prior) {
                Ok((level, ambiguous)) => {
                    annotated.annotation.self_qual = Some(level);
                    if ambiguous {
                        annotated.warnings.push("ambiguous qualitative self-report".into());
                    }
                }
                Err(e) => annotated.warnings.push(format!("qual self-report: {e}")),
            }
        }
        Ok(annotated)
    }
}

/// Builds the label turn for an item. Also used by fixture builders to
/// precompute cache fingerprints.
pub fn label_request(
    model: &str,
    item: &AnnotationItem,
    schema: &LabelSchema,
    templates: &PromptTemplates,
    temperature: f64,
    top_k: u32,
) -> ChatRequest {
    ChatRequest {
        model: model.to_string(),
        messages: vec![ChatMessage::user(render_label_prompt(&templates.label, item, schema))],
        temperature,
        max_tokens: 4,
        logprobs: Some(true),
        top_logprobs: Some(top_k),
    }
}

/// Builds a self-report follow-up turn carrying the item and the model's
/// prior answer.
pub fn followup_request(
    model: &str,
    item: &AnnotationItem,
    schema: &LabelSchema,
    templates: &PromptTemplates,
    followup_template: &str,
    prior_answer: &str,
    temperature: f64,
) -> ChatRequest {
    ChatRequest {
        model: model.to_string(),
        messages: vec![
            ChatMessage::user(render_label_prompt(&templates.label, item, schema)),
            ChatMessage::assistant(prior_answer),
            ChatMessage::user(render_followup_prompt(followup_template, item, prior_answer)),
        ],
        temperature,
        max_tokens: 16,
        logprobs: None,
        top_logprobs: None,
    }
}

fn first_choice_content(body: &str) -> Result<String, ClientError> {
    let response: ChatResponse =
        serde_json::from_str(body).map_err(|e| ClientError::MalformedResponse {
            detail: format!("invalid response body: {e}"),
        })?;
    response
        .choices
        .first()
        .map(|c| c.message.content.clone())
        .ok_or_else(|| ClientError::MalformedResponse { detail: "response has no choices".into() })
}

/// First run of digits in the text, as a number.
fn first_integer(text: &str) -> Option<u64> {
    let mut digits = String::new();
    for ch in text.chars() {
        if ch.is_ascii_digit() {
            digits.push(ch);
        } else if !digits.is_empty() {
            break;
        }
    }
    digits.parse().ok()
}

/// Finds the first of the five level words in the text (word-boundary
/// match, case-insensitive). The bool is true when a second, different
/// level word also appears.
fn parse_qual_words(text: &str) -> Option<(SelfQual, bool)> {
    let mut found: Vec<SelfQual> = Vec::new();
    for word in text.split(|c: char| !c.is_ascii_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        if let Ok(level) = word.parse::<SelfQual>() {
            found.push(level);
        }
    }
    let first = *found.first()?;
    let ambiguous = found.iter().any(|&l| l != first);
    Some((first, ambiguous))
}
