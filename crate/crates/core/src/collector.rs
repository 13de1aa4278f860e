//! Sample collection from a chat-completions style HTTP endpoint.
//!
//! Each question is split into requests of at most `batch_size` choices.
//! Every request is content-addressed by the SHA-256 of its body, question id
//! and batch index; with a cache directory the response is stored under that
//! key and later runs replay it without touching the network.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::data_io::{atomic_write, SampleRecord};
use crate::error::{Error, Result};

/// Answer recorded when extraction fails or a request gives up.
pub const EXTRACT_FAIL: &str = "EXTRACT_FAIL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_base_ms: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CacheMode {
    /// No cache.
    Off,
    /// Replay hits, request and store misses.
    #[default]
    Record,
    /// Replay hits; a miss is an error.
    ReplayOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectSpec {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub n_samples: u32,
    /// Choices requested per call; `n_samples` is split into batches of this size.
    pub batch_size: u32,
    /// Prompt text with `{question}` replaced by the question.
    pub prompt_template: String,
    pub system_prompt: Option<String>,
    /// Regular expression with exactly one capture group.
    pub pattern: String,
    pub max_concurrent: usize,
    pub retry: RetryPolicy,
    /// Environment variable holding the bearer token.
    pub api_key_env: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub cache_mode: CacheMode,
    pub timeout_secs: u64,
}

impl Default for CollectSpec {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            temperature: 0.7,
            n_samples: 100,
            batch_size: 20,
            prompt_template: "{question}\n\nEnd your reply with `Answer: <answer>`.".into(),
            system_prompt: None,
            pattern: r"Answer:\s*(\S+)".into(),
            max_concurrent: 4,
            retry: RetryPolicy::default(),
            api_key_env: None,
            cache_dir: None,
            cache_mode: CacheMode::Record,
            timeout_secs: 120,
        }
    }
}

impl CollectSpec {
    pub fn validate(&self) -> Result<Regex> {
        if self.n_samples == 0 || self.batch_size == 0 {
            return Err(Error::Config("n_samples and batch_size must be >= 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.max_concurrent == 0 {
            return Err(Error::Config("max_concurrent must be >= 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::Config("retry.max_attempts must be >= 1".into()));
        }
        if self.cache_mode != CacheMode::Off && self.cache_dir.is_none() {
            return Err(Error::Config("cache_mode needs cache_dir".into()));
        }
        compile_pattern(&self.pattern)
    }
}

pub fn compile_pattern(pattern: &str) -> Result<Regex> {
    let re = Regex::new(pattern).map_err(|e| Error::Config(format!("invalid pattern: {e}")))?;
    if re.captures_len() != 2 {
        return Err(Error::Config(format!(
            "pattern must have exactly one capture group, found {}",
            re.captures_len() - 1
        )));
    }
    Ok(re)
}

/// Capture group of the last match, trimmed; [`EXTRACT_FAIL`] without a match.
pub fn extract_answer(text: &str, pattern: &Regex) -> String {
    pattern
        .captures_iter(text)
        .last()
        .and_then(|c| c.get(1))
        .map(|m| m.as_str().trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| EXTRACT_FAIL.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub question_id: String,
    pub text: String,
    #[serde(default)]
    pub gold: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectReport {
    pub records: Vec<SampleRecord>,
    pub network_calls: usize,
    pub cache_hits: usize,
    pub failed_requests: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    request: Value,
    status: u16,
    response: Option<Value>,
}

struct Job {
    question: usize,
    batch: u32,
    n: u32,
}

fn request_body(spec: &CollectSpec, prompt: &Prompt, n: u32) -> Value {
    let mut messages = Vec::new();
    if let Some(s) = &spec.system_prompt {
        messages.push(json!({"role": "system", "content": s}));
    }
    messages.push(json!({"role": "user", "content": spec.prompt_template.replace("{question}", &prompt.text)}));
    json!({
        "model": spec.model,
        "messages": messages,
        "temperature": spec.temperature,
        "n": n,
    })
}

fn cache_key(body: &[u8], question_id: &str, batch: u32) -> String {
    let mut h = Sha256::new();
    h.update(body);
    h.update([0]);
    h.update(question_id.as_bytes());
    h.update([0]);
    h.update(batch.to_le_bytes());
    hex::encode(h.finalize())
}

fn answers_from(response: Option<&Value>, n: u32, pattern: &Regex) -> Vec<String> {
    let mut choices: Vec<&Value> = response
        .and_then(|r| r.get("choices"))
        .and_then(Value::as_array)
        .map(|a| a.iter().collect())
        .unwrap_or_default();
    choices.sort_by_key(|c| c.get("index").and_then(Value::as_u64).unwrap_or(u64::MAX));
    let mut out: Vec<String> = choices
        .iter()
        .take(n as usize)
        .map(|c| match c.pointer("/message/content").and_then(Value::as_str) {
            Some(text) => extract_answer(text, pattern),
            None => EXTRACT_FAIL.to_string(),
        })
        .collect();
    out.resize(n as usize, EXTRACT_FAIL.to_string());
    out
}

enum Outcome {
    Response(u16, Option<Value>),
    Unreachable(String),
}

fn post(agent: &ureq::Agent, spec: &CollectSpec, token: Option<&str>, body: &[u8]) -> Outcome {
    let mut last = String::new();
    let mut status = 0;
    for attempt in 0..spec.retry.max_attempts {
        if attempt > 0 {
            let wait = spec.retry.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(16));
            std::thread::sleep(Duration::from_millis(wait));
        }
        let mut req = agent.post(&spec.endpoint).header("Content-Type", "application/json");
        if let Some(t) = token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        match req.send(body) {
            Ok(mut resp) => {
                status = resp.status().as_u16();
                let text = resp.body_mut().read_to_string();
                if status == 200 {
                    match text.ok().and_then(|t| serde_json::from_str::<Value>(&t).ok()) {
                        Some(v) => return Outcome::Response(status, Some(v)),
                        None => {
                            last = "malformed response body".into();
                            continue;
                        }
                    }
                }
                if status != 429 && status < 500 {
                    return Outcome::Response(status, None);
                }
                last = format!("HTTP {status}");
            }
            Err(e) => {
                status = 0;
                last = e.to_string();
            }
        }
    }
    if status == 0 {
        Outcome::Unreachable(last)
    } else {
        log::warn!("request gave up after {} attempts: {last}", spec.retry.max_attempts);
        Outcome::Response(status, None)
    }
}

fn read_cache(path: &Path) -> Result<Option<CacheEntry>> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Collect `n_samples` answers for every prompt.
///
/// Stored sample order follows batch order, not completion order.
pub fn collect(spec: &CollectSpec, prompts: &[Prompt]) -> Result<CollectReport> {
    let pattern = spec.validate()?;
    let token = match &spec.api_key_env {
        Some(var) => Some(std::env::var(var).map_err(|_| Error::Config(format!("environment variable {var} is not set")))?),
        None => None,
    };
    if let (Some(dir), true) = (&spec.cache_dir, spec.cache_mode == CacheMode::Record) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let jobs: Vec<Job> = prompts
        .iter()
        .enumerate()
        .flat_map(|(q, _)| {
            let full = spec.n_samples / spec.batch_size;
            let rest = spec.n_samples % spec.batch_size;
            (0..full)
                .map(move |b| Job { question: q, batch: b, n: spec.batch_size })
                .chain((rest > 0).then_some(Job { question: q, batch: full, n: rest }))
        })
        .collect();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(spec.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let next = AtomicUsize::new(0);
    let network = AtomicUsize::new(0);
    let hits = AtomicUsize::new(0);
    let failed = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<String>>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());

    let run_job = |job: &Job| -> Result<Vec<String>> {
        let prompt = &prompts[job.question];
        let body = request_body(spec, prompt, job.n);
        let bytes = serde_json::to_vec(&body)?;
        let path = spec
            .cache_dir
            .as_ref()
            .filter(|_| spec.cache_mode != CacheMode::Off)
            .map(|d| d.join(format!("{}.json", cache_key(&bytes, &prompt.question_id, job.batch))));
        if let Some(p) = &path {
            if let Some(entry) = read_cache(p)? {
                hits.fetch_add(1, Ordering::Relaxed);
                return Ok(answers_from(entry.response.as_ref(), job.n, &pattern));
            }
            if spec.cache_mode == CacheMode::ReplayOnly {
                return Err(Error::Collect {
                    question: prompt.question_id.clone(),
                    message: format!("replay cache miss for batch {}", job.batch),
                });
            }
        }
        network.fetch_add(1, Ordering::Relaxed);
        match post(&agent, spec, token.as_deref(), &bytes) {
            Outcome::Unreachable(message) => Err(Error::Collect {
                question: prompt.question_id.clone(),
                message,
            }),
            Outcome::Response(status, response) => {
                if response.is_none() {
                    failed.fetch_add(1, Ordering::Relaxed);
                }
                let answers = answers_from(response.as_ref(), job.n, &pattern);
                if let Some(p) = &path {
                    let entry = CacheEntry { request: body, status, response };
                    atomic_write(p, &serde_json::to_vec(&entry)?)?;
                }
                Ok(answers)
            }
        }
    };

    std::thread::scope(|s| {
        for _ in 0..spec.max_concurrent.min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= jobs.len() {
                    break;
                }
                let r = run_job(&jobs[k]);
                results.lock().expect("results lock")[k] = Some(r);
            });
        }
    });

    let mut records: Vec<SampleRecord> = prompts
        .iter()
        .map(|p| SampleRecord {
            question_id: p.question_id.clone(),
            gold: p.gold.clone(),
            samples: Vec::with_capacity(spec.n_samples as usize),
        })
        .collect();
    let results = results.into_inner().expect("results lock");
    for (job, r) in jobs.iter().zip(results) {
        let answers = r.expect("every job ran")?;
        records[job.question].samples.extend(answers);
    }
    Ok(CollectReport {
        records,
        network_calls: network.into_inner(),
        cache_hits: hits.into_inner(),
        failed_requests: failed.into_inner(),
    })
}

/// Read prompts: one `{question_id, text, gold}` object per line.
pub fn read_prompts(path: &Path) -> Result<Vec<Prompt>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Schema { line: i + 1, message: e.to_string() }))
        .collect()
}

pub mod mock {
    //! Local chat-completions endpoint for tests and offline runs.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::{SocketAddr, TcpListener, TcpStream};
    use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
    use std::sync::Arc;
    use std::thread::JoinHandle;
    use std::time::Duration;

    use rand::Rng;
    use serde_json::{json, Value};
    use sha2::{Digest, Sha256};

    use crate::rng::substream;

    #[derive(Debug, Clone)]
    pub struct MockConfig {
        /// Answers and their weights; an empty label produces text without an answer line.
        pub answers: Vec<(String, f64)>,
        pub delay: Duration,
        /// Requests answered with HTTP 500 before normal service.
        pub fail_first: usize,
    }

    impl Default for MockConfig {
        fn default() -> Self {
            Self {
                answers: vec![("42".into(), 0.6), ("41".into(), 0.3), ("".into(), 0.1)],
                delay: Duration::ZERO,
                fail_first: 0,
            }
        }
    }

    #[derive(Default)]
    struct Counters {
        requests: AtomicUsize,
        in_flight: AtomicUsize,
        max_in_flight: AtomicUsize,
    }

    pub struct MockServer {
        addr: SocketAddr,
        counters: Arc<Counters>,
        stop: Arc<AtomicBool>,
        handle: Option<JoinHandle<()>>,
    }

    impl MockServer {
        pub fn start(cfg: MockConfig) -> std::io::Result<Self> {
            Self::bind("127.0.0.1:0", cfg)
        }

        pub fn bind(addr: &str, cfg: MockConfig) -> std::io::Result<Self> {
            let listener = TcpListener::bind(addr)?;
            let addr = listener.local_addr()?;
            let counters = Arc::new(Counters::default());
            let stop = Arc::new(AtomicBool::new(false));
            let handle = {
                let counters = Arc::clone(&counters);
                let stop = Arc::clone(&stop);
                let cfg = Arc::new(cfg);
                std::thread::spawn(move || {
                    for stream in listener.incoming() {
                        if stop.load(Ordering::SeqCst) {
                            break;
                        }
                        let Ok(stream) = stream else { continue };
                        let counters = Arc::clone(&counters);
                        let cfg = Arc::clone(&cfg);
                        std::thread::spawn(move || {
                            let _ = serve(stream, &cfg, &counters);
                        });
                    }
                })
            };
            Ok(Self {
                addr,
                counters,
                stop,
                handle: Some(handle),
            })
        }

        pub fn url(&self) -> String {
            format!("http://{}/v1/chat/completions", self.addr)
        }

        pub fn addr(&self) -> SocketAddr {
            self.addr
        }

        pub fn request_count(&self) -> usize {
            self.counters.requests.load(Ordering::SeqCst)
        }

        pub fn max_in_flight(&self) -> usize {
            self.counters.max_in_flight.load(Ordering::SeqCst)
        }

        /// Block the calling thread serving requests until the process exits.
        pub fn wait(mut self) {
            if let Some(h) = self.handle.take() {
                let _ = h.join();
            }
        }
    }

    impl Drop for MockServer {
        fn drop(&mut self) {
            self.stop.store(true, Ordering::SeqCst);
            let _ = TcpStream::connect(self.addr);
            if let Some(h) = self.handle.take() {
                let _ = h.join();
            }
        }
    }

    fn serve(stream: TcpStream, cfg: &MockConfig, counters: &Counters) -> std::io::Result<()> {
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        if line.is_empty() {
            return Ok(());
        }
        let mut length = 0usize;
        loop {
            let mut h = String::new();
            reader.read_line(&mut h)?;
            let h = h.trim_end();
            if h.is_empty() {
                break;
            }
            if let Some((k, v)) = h.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    length = v.trim().parse().unwrap_or(0);
                }
            }
        }
        let mut body = vec![0u8; length];
        reader.read_exact(&mut body)?;

        let seen = counters.requests.fetch_add(1, Ordering::SeqCst);
        let now = counters.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        counters.max_in_flight.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(cfg.delay);
        let (status, payload) = if seen < cfg.fail_first {
            ("500 Internal Server Error", json!({"error": "mock failure"}))
        } else {
            match serde_json::from_slice::<Value>(&body) {
                Ok(req) => ("200 OK", completion(&req, &body, cfg)),
                Err(_) => ("400 Bad Request", json!({"error": "invalid JSON"})),
            }
        };
        counters.in_flight.fetch_sub(1, Ordering::SeqCst);
        let text = payload.to_string();
        let mut out = stream;
        write!(
            out,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
            text.len()
        )?;
        out.flush()
    }

    fn completion(req: &Value, body: &[u8], cfg: &MockConfig) -> Value {
        let n = req.get("n").and_then(Value::as_u64).unwrap_or(1);
        let digest = Sha256::digest(body);
        let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut rng = substream(seed, 0);
        let total: f64 = cfg.answers.iter().map(|a| a.1).sum();
        let choices: Vec<Value> = (0..n)
            .map(|i| {
                let mut u = rng.random::<f64>() * total;
                let mut pick = cfg.answers.len() - 1;
                for (k, a) in cfg.answers.iter().enumerate() {
                    if u < a.1 {
                        pick = k;
                        break;
                    }
                    u -= a.1;
                }
                let label = &cfg.answers[pick].0;
                let content = if label.is_empty() {
                    "I am not sure.".to_string()
                } else {
                    format!("Working through it step by step.\nAnswer: {label}")
                };
                json!({
                    "index": i,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": "stop",
                })
            })
            .collect();
        json!({"id": "mock", "object": "chat.completion", "choices": choices})
    }
}

#[cfg(test)]
mod tests {
    use super::mock::{MockConfig, MockServer};
    use super::*;

    fn spec(url: String, dir: &Path) -> CollectSpec {
        CollectSpec {
            endpoint: url,
            n_samples: 10,
            batch_size: 4,
            cache_dir: Some(dir.to_path_buf()),
            retry: RetryPolicy { max_attempts: 3, backoff_base_ms: 1 },
            ..Default::default()
        }
    }

    fn prompts(k: usize) -> Vec<Prompt> {
        (0..k)
            .map(|i| Prompt { question_id: format!("q{i}"), text: format!("What is {i} + 40?"), gold: Some("42".into()) })
            .collect()
    }

    #[test]
    fn extraction_rules() {
        let re = compile_pattern(r"Answer:\s*(\S+)").unwrap();
        assert_eq!(extract_answer("Answer: 42", &re), "42");
        assert_eq!(extract_answer("The answer is 7. Answer: 7", &re), "7");
        assert_eq!(extract_answer("Answer: 1\nAnswer: 2", &re), "2");
        assert_eq!(extract_answer("nothing here", &re), EXTRACT_FAIL);
        assert!(compile_pattern(r"Answer:\s*\S+").is_err());
        assert!(compile_pattern(r"(a)(b)").is_err());
        assert!(compile_pattern(r"(").is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CollectSpec { n_samples: 0, ..Default::default() }.validate().is_err());
        assert!(CollectSpec { temperature: -0.1, ..Default::default() }.validate().is_err());
        assert!(CollectSpec { cache_mode: CacheMode::Record, cache_dir: None, ..Default::default() }.validate().is_err());
        assert!(CollectSpec { cache_mode: CacheMode::Off, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn record_then_replay() {
        let server = MockServer::start(MockConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let s = spec(server.url(), dir.path());
        let first = collect(&s, &prompts(3)).unwrap();
        assert_eq!(first.network_calls, 9);
        assert_eq!(server.request_count(), 9);
        for r in &first.records {
            assert_eq!(r.samples.len(), 10);
            assert!(r.samples.iter().all(|a| a == "42" || a == "41" || a == EXTRACT_FAIL));
        }
        let replay = CollectSpec { cache_mode: CacheMode::ReplayOnly, ..s.clone() };
        let second = collect(&replay, &prompts(3)).unwrap();
        assert_eq!(second.network_calls, 0);
        assert_eq!(second.cache_hits, 9);
        assert_eq!(server.request_count(), 9);
        assert_eq!(first.records, second.records);
    }

    #[test]
    fn replay_miss_names_question() {
        let dir = tempfile::tempdir().unwrap();
        let s = CollectSpec { cache_mode: CacheMode::ReplayOnly, ..spec("http://127.0.0.1:9/x".into(), dir.path()) };
        match collect(&s, &prompts(1)) {
            Err(Error::Collect { question, .. }) => assert_eq!(question, "q0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_endpoint_is_collect_error() {
        let addr = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
        let s = CollectSpec {
            cache_mode: CacheMode::Off,
            cache_dir: None,
            ..spec(format!("http://{addr}/v1/chat/completions"), Path::new("."))
        };
        assert!(matches!(collect(&s, &prompts(1)), Err(Error::Collect { .. })));
    }

    #[test]
    fn server_errors_retry_then_succeed() {
        let server = MockServer::start(MockConfig { fail_first: 2, ..Default::default() }).unwrap();
        let s = CollectSpec { cache_mode: CacheMode::Off, cache_dir: None, max_concurrent: 1, n_samples: 4, ..spec(server.url(), Path::new(".")) };
        let r = collect(&s, &prompts(1)).unwrap();
        assert_eq!(server.request_count(), 3);
        assert_eq!(r.failed_requests, 0);
        assert_eq!(r.records[0].samples.len(), 4);
    }

    #[test]
    fn exhausted_retries_become_sentinels() {
        let server = MockServer::start(MockConfig { fail_first: 100, ..Default::default() }).unwrap();
        let s = CollectSpec { cache_mode: CacheMode::Off, cache_dir: None, ..spec(server.url(), Path::new(".")) };
        let r = collect(&s, &prompts(1)).unwrap();
        assert_eq!(r.records[0].samples, vec![EXTRACT_FAIL.to_string(); 10]);
        assert_eq!(r.failed_requests, 3);
    }

    #[test]
    fn concurrency_is_bounded() {
        let server = MockServer::start(MockConfig { delay: Duration::from_millis(30), ..Default::default() }).unwrap();
        let s = CollectSpec {
            cache_mode: CacheMode::Off,
            cache_dir: None,
            max_concurrent: 3,
            batch_size: 1,
            n_samples: 6,
            ..spec(server.url(), Path::new("."))
        };
        let r = collect(&s, &prompts(4)).unwrap();
        assert_eq!(r.network_calls, 24);
        assert!(server.max_in_flight() <= 3);
        assert!(server.max_in_flight() >= 2);
    }

    #[test]
    fn bearer_token_from_env() {
        let s = CollectSpec { api_key_env: Some("SC_SCALING_TEST_TOKEN_UNSET".into()), cache_mode: CacheMode::Off, ..Default::default() };
        assert!(matches!(collect(&s, &prompts(1)), Err(Error::Config(_))));
    }
}
