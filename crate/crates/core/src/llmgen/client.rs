//! Chat-completion client with retries and client-side rate limiting.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{GenError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmEndpointConfig {
    pub base_url: String,
    /// Name of the environment variable holding the bearer token. Empty
    /// means no authorization header is sent.
    pub api_key_env: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub requests_per_minute: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub max_in_flight: usize,
    /// Seeds the backoff jitter.
    pub seed: u64,
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        LlmEndpointConfig {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 0.7,
            max_tokens: 1024,
            timeout_secs: 60.0,
            max_retries: 5,
            requests_per_minute: 60,
            backoff_base_ms: 1000,
            backoff_max_ms: 60_000,
            max_in_flight: 4,
            seed: 0,
        }
    }
}

impl LlmEndpointConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GenError::Config(m));
        if self.base_url.trim().is_empty() {
            return bad("base_url is empty".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if self.requests_per_minute == 0 {
            return bad("requests_per_minute must be positive".into());
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout_secs must be positive".into());
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be positive".into());
        }
        if self.backoff_base_ms == 0 || self.backoff_max_ms < self.backoff_base_ms {
            return bad("backoff_base_ms must be positive and at most backoff_max_ms".into());
        }
        Ok(())
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    /// Reads the API key from the configured environment variable.
    pub fn api_key(&self) -> Result<Option<String>> {
        if self.api_key_env.is_empty() {
            return Ok(None);
        }
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.is_empty() => Ok(Some(k)),
            _ => Err(GenError::MissingApiKey(self.api_key_env.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. `Err` means no HTTP response was received.
pub trait ChatTransport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &str, timeout: Duration) -> std::result::Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new() -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        UreqTransport { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl ChatTransport for UreqTransport {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &str, timeout: Duration) -> std::result::Result<HttpResponse, String> {
        let mut req = self
            .agent
            .post(url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .header("Content-Type", "application/json");
        if let Some(key) = bearer {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

/// Time source, so that waits can be simulated in tests.
pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Duration {
        (**self).now()
    }

    fn sleep(&self, d: Duration) {
        (**self).sleep(d)
    }
}

pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Virtual clock: `sleep` advances time instantly and is recorded.
#[derive(Default)]
pub struct ManualClock {
    state: Mutex<(Duration, Vec<Duration>)>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        self.state.lock().unwrap().0 += d;
    }

    /// Every sleep requested so far, in order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().unwrap().1.clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().0
    }

    fn sleep(&self, d: Duration) {
        let mut s = self.state.lock().unwrap();
        s.0 += d;
        s.1.push(d);
    }
}

/// At most `limit` request starts in any window of length `window`.
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    starts: VecDeque<Duration>,
}

impl RateLimiter {
    pub fn per_minute(limit: u32) -> Self {
        RateLimiter {
            limit: limit.max(1) as usize,
            window: Duration::from_secs(60),
            starts: VecDeque::new(),
        }
    }

    /// Waits on `clock` until a request may start, then records it.
    pub fn acquire(&mut self, clock: &dyn Clock) {
        loop {
            let now = clock.now();
            while self.starts.front().is_some_and(|&t| now >= t + self.window) {
                self.starts.pop_front();
            }
            if self.starts.len() < self.limit {
                self.starts.push_back(now);
                return;
            }
            let wait = self.starts[0] + self.window - now;
            clock.sleep(wait);
        }
    }
}

/// Delay before retry number `attempt` (0-based): `base · 2^attempt`
/// capped at `max`, plus up to half of that again as jitter.
pub fn backoff_delay(cfg: &LlmEndpointConfig, attempt: u32, rng: &mut ChaCha8Rng) -> Duration {
    let base = cfg.backoff_base_ms as f64;
    let raw = (base * 2f64.powi(attempt.min(30) as i32)).min(cfg.backoff_max_ms as f64);
    let jitter = rng.random_range(0.0..0.5) * raw;
    Duration::from_secs_f64((raw + jitter) / 1000.0)
}

fn retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

pub struct LlmClient<T: ChatTransport, C: Clock> {
    cfg: LlmEndpointConfig,
    api_key: Option<String>,
    transport: T,
    clock: C,
    limiter: Mutex<RateLimiter>,
    rng: Mutex<ChaCha8Rng>,
}

impl<T: ChatTransport, C: Clock> LlmClient<T, C> {
    /// Builds a client; the API key is read from the environment now.
    pub fn new(cfg: LlmEndpointConfig, transport: T, clock: C) -> Result<Self> {
        cfg.validate()?;
        let api_key = cfg.api_key()?;
        Ok(Self::with_key(cfg, api_key, transport, clock))
    }

    pub fn with_key(cfg: LlmEndpointConfig, api_key: Option<String>, transport: T, clock: C) -> Self {
        LlmClient {
            limiter: Mutex::new(RateLimiter::per_minute(cfg.requests_per_minute)),
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(cfg.seed)),
            cfg,
            api_key,
            transport,
            clock,
        }
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.cfg
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn request_body(&self, user: &str) -> String {
        json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": user}],
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        })
        .to_string()
    }

    /// One chat completion; returns the first choice's message content.
    pub fn complete(&self, user: &str) -> Result<String> {
        let body = self.request_body(user);
        let url = self.cfg.endpoint();
        let timeout = Duration::from_secs_f64(self.cfg.timeout_secs);
        let mut log = Vec::new();
        let attempts = self.cfg.max_retries + 1;
        for attempt in 0..attempts {
            self.limiter.lock().unwrap().acquire(&self.clock);
            let outcome = self.transport.post_json(&url, self.api_key.as_deref(), &body, timeout);
            match outcome {
                Ok(r) if (200..300).contains(&r.status) => return parse_content(&r.body),
                Ok(r) if r.status == 401 || r.status == 403 => {
                    return Err(GenError::Auth { status: r.status, body: truncate(&r.body) });
                }
                Ok(r) if !retryable(r.status) => {
                    return Err(GenError::Http { status: r.status, body: truncate(&r.body) });
                }
                Ok(r) => log.push(format!("attempt {}: HTTP {}", attempt + 1, r.status)),
                Err(e) => log.push(format!("attempt {}: {e}", attempt + 1)),
            }
            if attempt + 1 < attempts {
                let d = backoff_delay(&self.cfg, attempt, &mut self.rng.lock().unwrap());
                log::debug!("retrying in {d:?} after {}", log.last().unwrap());
                self.clock.sleep(d);
            }
        }
        Err(GenError::RetriesExhausted { attempts, log })
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(300).collect()
}

fn parse_content(body: &str) -> Result<String> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| GenError::BadResponse(format!("invalid JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| GenError::BadResponse("missing choices[0].message.content".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limiter_spaces_requests() {
        let clock = ManualClock::new();
        let mut l = RateLimiter::per_minute(2);
        for _ in 0..5 {
            l.acquire(&clock);
        }
        // starts at 0, 0, 60, 60, 120
        assert_eq!(clock.now(), Duration::from_secs(120));
    }

    #[test]
    fn backoff_grows_and_caps() {
        let cfg = LlmEndpointConfig { backoff_base_ms: 100, backoff_max_ms: 1000, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for attempt in 0..8 {
            let d = backoff_delay(&cfg, attempt, &mut rng).as_secs_f64() * 1000.0;
            let raw = (100.0 * 2f64.powi(attempt as i32)).min(1000.0);
            assert!(d >= raw && d < 1.5 * raw + 1e-9, "{attempt}: {d}");
        }
    }

    #[test]
    fn content_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"Hi"}}]}"#;
        assert_eq!(parse_content(ok).unwrap(), "Hi");
        assert!(parse_content("{}").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(LlmEndpointConfig::default().validate().is_ok());
        assert!(LlmEndpointConfig { temperature: 2.5, ..Default::default() }.validate().is_err());
        assert!(LlmEndpointConfig { requests_per_minute: 0, ..Default::default() }.validate().is_err());
    }
}
