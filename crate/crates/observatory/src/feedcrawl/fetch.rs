//! Fetching and time as injected capabilities, so crawl logic runs against
//! fixture pages and a simulated clock in tests.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration as StdDuration;

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("fetch of {url} failed: {detail}")]
    Network { url: String, detail: String },
}

#[derive(Debug, Clone)]
pub struct FetchResponse {
    pub url: String,
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl FetchResponse {
    pub fn html(url: &str, body: &str) -> FetchResponse {
        FetchResponse {
            url: url.to_string(),
            status: 200,
            content_type: "text/html".into(),
            body: body.as_bytes().to_vec(),
        }
    }

    pub fn xml(url: &str, body: &str) -> FetchResponse {
        FetchResponse {
            url: url.to_string(),
            status: 200,
            content_type: "application/xml".into(),
            body: body.as_bytes().to_vec(),
        }
    }

    pub fn not_found(url: &str) -> FetchResponse {
        FetchResponse {
            url: url.to_string(),
            status: 404,
            content_type: "text/plain".into(),
            body: Vec::new(),
        }
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

pub trait Fetcher {
    fn fetch(&self, url: &str) -> Result<FetchResponse, FetchError>;
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
    fn sleep(&self, d: Duration) {
        if let Ok(std) = d.to_std() {
            std::thread::sleep(std);
        }
    }
}

/// Simulated clock: `sleep` advances time instantly.
pub struct SimClock {
    now: Mutex<DateTime<Utc>>,
}

impl SimClock {
    pub fn new(start: DateTime<Utc>) -> SimClock {
        SimClock { now: Mutex::new(start) }
    }

    pub fn advance(&self, d: Duration) {
        let mut now = self.now.lock().unwrap();
        *now += d;
    }
}

impl Clock for SimClock {
    fn now(&self) -> DateTime<Utc> {
        *self.now.lock().unwrap()
    }
    fn sleep(&self, d: Duration) {
        if d > Duration::zero() {
            self.advance(d);
        }
    }
}

/// Real fetcher over HTTP(S). Non-2xx statuses come back as responses, not
/// errors, so the crawler can record them.
pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new() -> HttpFetcher {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(StdDuration::from_secs(30)))
            .user_agent("observatory-crawler/0.1")
            .build();
        HttpFetcher { agent: config.into() }
    }
}

impl Default for HttpFetcher {
    fn default() -> Self {
        Self::new()
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &str) -> Result<FetchResponse, FetchError> {
        let mut response = self.agent.get(url).call().map_err(|e| FetchError::Network {
            url: url.to_string(),
            detail: e.to_string(),
        })?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_string();
        let body = response
            .body_mut()
            .read_to_vec()
            .map_err(|e| FetchError::Network {
                url: url.to_string(),
                detail: e.to_string(),
            })?;
        Ok(FetchResponse { url: url.to_string(), status, content_type, body })
    }
}

/// In-memory fetcher over a fixed URL → response map. Records every fetch
/// (with the injected clock's timestamp when one is given) and can charge a
/// fixed time cost per fetch against a simulated clock.
pub struct MapFetcher<'a> {
    pages: HashMap<String, FetchResponse>,
    log: Mutex<Vec<(String, DateTime<Utc>)>>,
    clock: Option<&'a dyn Clock>,
    cost_per_fetch: Duration,
}

impl<'a> MapFetcher<'a> {
    pub fn new() -> MapFetcher<'a> {
        MapFetcher {
            pages: HashMap::new(),
            log: Mutex::new(Vec::new()),
            clock: None,
            cost_per_fetch: Duration::zero(),
        }
    }

    pub fn with_clock(clock: &'a dyn Clock) -> MapFetcher<'a> {
        MapFetcher { clock: Some(clock), ..MapFetcher::new() }
    }

    /// Charge this much simulated time for every fetch.
    pub fn cost_per_fetch(mut self, cost: Duration) -> MapFetcher<'a> {
        self.cost_per_fetch = cost;
        self
    }

    pub fn insert(&mut self, response: FetchResponse) -> &mut Self {
        self.pages.insert(response.url.clone(), response);
        self
    }

    /// URLs fetched so far, in order.
    pub fn fetched_urls(&self) -> Vec<String> {
        self.log.lock().unwrap().iter().map(|(u, _)| u.clone()).collect()
    }

    /// (url, clock time) pairs for every fetch.
    pub fn fetch_log(&self) -> Vec<(String, DateTime<Utc>)> {
        self.log.lock().unwrap().clone()
    }
}

impl Default for MapFetcher<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl Fetcher for MapFetcher<'_> {
    fn fetch(&self, url: &str) -> Result<FetchResponse, FetchError> {
        let now = self.clock.map(|c| c.now()).unwrap_or_else(Utc::now);
        self.log.lock().unwrap().push((url.to_string(), now));
        if let Some(clock) = self.clock {
            if self.cost_per_fetch > Duration::zero() {
                clock.sleep(self.cost_per_fetch);
            }
        }
        match self.pages.get(url) {
            Some(r) => Ok(r.clone()),
            None => Ok(FetchResponse::not_found(url)),
        }
    }
}
