//! Read-only HTTP JSON API over the store and metrics.
//!
//! One endpoint per analysis artifact: `/sites`, `/stats`, `/timeseries`,
//! `/ccf`, `/ccdf`, `/powerlaw`, `/breakdown`, `/urls/search`. All responses
//! are JSON; errors are `{error, detail}` with 400 for bad parameters and
//! 404 for unknown paths. No endpoint mutates the store.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::json;
use thiserror::Error;
use tiny_http::{Header, Method, Request, Response, Server};

use super::{
    breakdown_analysis, ccdf_analysis, ccf_analysis, powerlaw_analysis, stats, url_search,
    volume, AnalysisError, ApiConfig, PopularityMetric, DEFAULT_MIN_OVERLAP,
};
use crate::metrics::{Bucket, Population};
use crate::store::{Category, Store};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("failed to bind {addr}: {detail}")]
    BindFailure { addr: String, detail: String },
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

struct HttpFailure {
    status: u16,
    error: &'static str,
    detail: String,
}

impl HttpFailure {
    fn bad_request(detail: impl Into<String>) -> HttpFailure {
        HttpFailure { status: 400, error: "bad_request", detail: detail.into() }
    }

    fn not_found(detail: impl Into<String>) -> HttpFailure {
        HttpFailure { status: 404, error: "not_found", detail: detail.into() }
    }
}

impl From<AnalysisError> for HttpFailure {
    fn from(e: AnalysisError) -> HttpFailure {
        HttpFailure::bad_request(e.to_string())
    }
}

type Params = HashMap<String, String>;

fn parse_query(url: &str) -> (String, Params) {
    match url.split_once('?') {
        None => (url.to_string(), Params::new()),
        Some((path, query)) => {
            let params = url::form_urlencoded::parse(query.as_bytes())
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect();
            (path.to_string(), params)
        }
    }
}

fn required<T: std::str::FromStr>(params: &Params, key: &str) -> Result<T, HttpFailure>
where
    T::Err: std::fmt::Display,
{
    let raw = params
        .get(key)
        .ok_or_else(|| HttpFailure::bad_request(format!("missing parameter {key:?}")))?;
    raw.parse()
        .map_err(|e| HttpFailure::bad_request(format!("bad parameter {key:?}: {e}")))
}

fn optional<T: std::str::FromStr>(
    params: &Params,
    key: &str,
    default: T,
) -> Result<T, HttpFailure>
where
    T::Err: std::fmt::Display,
{
    match params.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|e| HttpFailure::bad_request(format!("bad parameter {key:?}: {e}"))),
    }
}

fn handle(
    store: &RwLock<Store>,
    config: &ApiConfig,
    path: &str,
    params: &Params,
) -> Result<serde_json::Value, HttpFailure> {
    let store = store.read().expect("store lock poisoned");
    match path {
        "/sites" => Ok(json!(store.sites().collect::<Vec<_>>())),
        "/stats" => {
            let category: Category = required(params, "category")?;
            Ok(json!(stats(&store, category)))
        }
        "/timeseries" => {
            let category: Category = required(params, "category")?;
            let bucket = match params.get("bucket").map(String::as_str) {
                None | Some("hour") => Bucket::Hour,
                Some("day") => Bucket::Day,
                Some(other) => {
                    return Err(HttpFailure::bad_request(format!(
                        "bad parameter \"bucket\": expected hour or day, got {other:?}"
                    )))
                }
            };
            let series = volume(&store, category, bucket);
            Ok(json!(series))
        }
        "/ccf" => {
            let max_lag: i64 = optional(params, "max_lag", config.default_max_lag)?;
            let min_overlap: usize = optional(params, "min_overlap", DEFAULT_MIN_OVERLAP)?;
            if max_lag < 1 {
                return Err(HttpFailure::bad_request("max_lag must be at least 1"));
            }
            if min_overlap < 3 {
                return Err(HttpFailure::bad_request("min_overlap must be at least 3"));
            }
            let result = ccf_analysis(&store, max_lag, min_overlap, config.default_window)?;
            Ok(json!(result))
        }
        "/ccdf" => {
            let metric: PopularityMetric = required(params, "metric")?;
            let category: Category = required(params, "category")?;
            let x_min: u64 = optional(params, "x_min", 1)?;
            let points = ccdf_analysis(&store, metric, category, x_min)?;
            Ok(json!(points
                .iter()
                .map(|(x, p)| json!({"x": x, "ccdf": p}))
                .collect::<Vec<_>>()))
        }
        "/powerlaw" => {
            let metric: PopularityMetric = required(params, "metric")?;
            let category: Category = required(params, "category")?;
            let x_min: f64 = optional(params, "x_min", 1.0)?;
            if !x_min.is_finite() || x_min < 1.0 {
                return Err(HttpFailure::bad_request("x_min must be at least 1"));
            }
            let fit = powerlaw_analysis(&store, metric, category, x_min)?;
            Ok(json!(fit))
        }
        "/breakdown" => {
            let population = match params.get("population").map(String::as_str) {
                None | Some("all") => Population::AllUsers,
                Some("top") => Population::TopActive,
                Some(other) => {
                    return Err(HttpFailure::bad_request(format!(
                        "bad parameter \"population\": expected all or top, got {other:?}"
                    )))
                }
            };
            let fraction: f64 = optional(params, "fraction", 0.01)?;
            let category: Option<Category> = match params.get("category") {
                None => None,
                Some(raw) => Some(raw.parse().map_err(|e: String| HttpFailure::bad_request(e))?),
            };
            let breakdown = breakdown_analysis(&store, category, population, fraction)?;
            Ok(json!(breakdown))
        }
        "/urls/search" => {
            let query = params
                .get("q")
                .ok_or_else(|| HttpFailure::bad_request("missing parameter \"q\""))?;
            let limit: usize = optional(params, "limit", 100)?;
            let offset: usize = optional(params, "offset", 0)?;
            let hits = url_search(&store, query, limit, offset);
            Ok(json!(hits
                .iter()
                .map(|(url, count)| json!({"url": url, "tweets": count}))
                .collect::<Vec<_>>()))
        }
        other => Err(HttpFailure::not_found(format!("no such endpoint {other:?}"))),
    }
}

fn respond(request: Request, status: u16, body: String) {
    let header = Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).unwrap();
    let response = Response::from_string(body)
        .with_status_code(status)
        .with_header(header);
    let _ = request.respond(response);
}

fn serve_request(store: &RwLock<Store>, config: &ApiConfig, request: Request) {
    if *request.method() != Method::Get {
        respond(
            request,
            405,
            json!({"error": "method_not_allowed", "detail": "the API is read-only"}).to_string(),
        );
        return;
    }
    let (path, params) = parse_query(request.url());
    match handle(store, config, &path, &params) {
        Ok(value) => respond(request, 200, value.to_string()),
        Err(f) => respond(
            request,
            f.status,
            json!({"error": f.error, "detail": f.detail}).to_string(),
        ),
    }
}

/// A running API server. Drop or call [`ApiServer::stop`] to shut down.
pub struct ApiServer {
    stop: Arc<AtomicBool>,
    workers: Vec<JoinHandle<()>>,
    addr: SocketAddr,
}

impl ApiServer {
    /// Bind and start serving on `config.listen_address` (port 0 picks a
    /// free port; see [`ApiServer::local_addr`]).
    pub fn start(store: Arc<RwLock<Store>>, config: ApiConfig) -> Result<ApiServer, ApiError> {
        let server = Server::http(&config.listen_address).map_err(|e| ApiError::BindFailure {
            addr: config.listen_address.clone(),
            detail: e.to_string(),
        })?;
        let addr = server
            .server_addr()
            .to_ip()
            .expect("tcp listener has an ip address");
        let server = Arc::new(server);
        let stop = Arc::new(AtomicBool::new(false));

        let workers = (0..2)
            .map(|_| {
                let server = Arc::clone(&server);
                let stop = Arc::clone(&stop);
                let store = Arc::clone(&store);
                let config = config.clone();
                std::thread::spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        match server.recv_timeout(Duration::from_millis(100)) {
                            Ok(Some(request)) => serve_request(&store, &config, request),
                            Ok(None) => {}
                            Err(_) => break,
                        }
                    }
                })
            })
            .collect();

        Ok(ApiServer { stop, workers, addr })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop(mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ApiServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
    }
}

/// Open the store under `config.data_dir` and serve until interrupted.
pub fn serve(config: ApiConfig) -> Result<(), ApiError> {
    let store = Store::open(config.data_dir.join("store"))?;
    let server = ApiServer::start(Arc::new(RwLock::new(store)), config)?;
    eprintln!("listening on http://{}", server.local_addr());
    loop {
        std::thread::sleep(Duration::from_secs(3600));
    }
}
