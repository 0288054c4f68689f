//! Operational surface: analysis glue shared by the CLI and the read-only
//! HTTP JSON API. Every number served comes straight from the store and
//! metrics operations, with no recomputation drift.

pub mod cli;
pub mod server;

use std::collections::HashSet;
use std::path::PathBuf;

use chrono::Duration;
use thiserror::Error;

use crate::metrics::{
    self, CcfResult, PowerLawFit, Population, ShareBreakdown, VolumeSeries,
};
use crate::store::{Category, Store, StoreError, SummaryStats, TweetRecord};
use crate::urlnorm;

pub const DEFAULT_MIN_OVERLAP: usize = 72;

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub listen_address: String,
    pub data_dir: PathBuf,
    pub default_max_lag: i64,
    pub default_window: usize,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            listen_address: "127.0.0.1:8040".into(),
            data_dir: PathBuf::from("observatory-data"),
            default_max_lag: 48,
            default_window: 24,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("store has no tweets for {0}")]
    NoData(Category),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Which popularity quantity a CCDF or tail fit is over: tweets per user,
/// tweets per URL, or distinct users per URL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopularityMetric {
    UserActivity,
    UrlTweets,
    UrlUsers,
}

impl std::str::FromStr for PopularityMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(PopularityMetric::UserActivity),
            "n" => Ok(PopularityMetric::UrlTweets),
            "p" => Ok(PopularityMetric::UrlUsers),
            other => Err(format!("unknown metric {other:?}, expected a, n, or p")),
        }
    }
}

pub fn category_tweets(store: &Store, category: Category) -> Vec<&TweetRecord> {
    store
        .query_tweets(category, None, None)
        .expect("no window given")
}

/// Hourly (or daily) volume for one category. The collection window spans
/// all stored tweets, so series from different categories share alignment.
pub fn volume(store: &Store, category: Category, bucket: metrics::Bucket) -> VolumeSeries {
    let windows = full_span(store);
    metrics::volume_series(
        category_tweets(store, category).iter().map(|t| t.created_at),
        bucket,
        &windows,
    )
}

fn full_span(store: &Store) -> Vec<(chrono::DateTime<chrono::Utc>, chrono::DateTime<chrono::Utc>)> {
    let min = store.tweets().map(|t| t.created_at).min();
    let max = store.tweets().map(|t| t.created_at).max();
    match (min, max) {
        (Some(lo), Some(hi)) => vec![(lo, hi + Duration::seconds(1))],
        _ => Vec::new(),
    }
}

/// The full temporal pipeline: hourly volumes for both categories, centered
/// moving-average smoothing, then lagged cross-correlation. A negative peak
/// lag means fake-news sharing precedes fact-checking.
pub fn ccf_analysis(
    store: &Store,
    max_lag: i64,
    min_overlap: usize,
    smoothing_window: usize,
) -> Result<CcfResult, AnalysisError> {
    let fake = volume(store, Category::FakeNews, metrics::Bucket::Hour);
    let fact = volume(store, Category::FactChecking, metrics::Bucket::Hour);
    if fake.is_empty() {
        return Err(AnalysisError::NoData(Category::FakeNews));
    }
    let fake = metrics::moving_average(&fake, smoothing_window)?;
    let fact = metrics::moving_average(&fact, smoothing_window)?;
    Ok(metrics::cross_correlation(&fake, &fact, max_lag, min_overlap)?)
}

/// The values a CCDF or power-law fit runs over, per category.
pub fn metric_values(
    store: &Store,
    metric: PopularityMetric,
    category: Category,
) -> Vec<u64> {
    let counts = metrics::popularity_counts(category_tweets(store, category));
    let map = match metric {
        PopularityMetric::UserActivity => counts.a,
        PopularityMetric::UrlTweets => counts.n,
        PopularityMetric::UrlUsers => counts.p,
    };
    let mut values: Vec<u64> = map.into_values().collect();
    values.sort_unstable();
    values
}

pub fn ccdf_analysis(
    store: &Store,
    metric: PopularityMetric,
    category: Category,
    x_min: u64,
) -> Result<Vec<(u64, f64)>, AnalysisError> {
    let values: Vec<u64> = metric_values(store, metric, category)
        .into_iter()
        .filter(|&v| v >= x_min)
        .collect();
    Ok(metrics::ccdf(&values)?)
}

/// Discrete Hill fit of the tail exponent for one popularity metric.
pub fn powerlaw_analysis(
    store: &Store,
    metric: PopularityMetric,
    category: Category,
    x_min: f64,
) -> Result<PowerLawFit, AnalysisError> {
    let values: Vec<f64> = metric_values(store, metric, category)
        .into_iter()
        .map(|v| v as f64)
        .collect();
    Ok(metrics::fit_power_law_discrete(&values, x_min)?)
}

/// Tweet-type breakdown over all users or the most active `fraction` of
/// them, optionally restricted to one category.
pub fn breakdown_analysis(
    store: &Store,
    category: Option<Category>,
    population: Population,
    fraction: f64,
) -> Result<ShareBreakdown, AnalysisError> {
    let tweets: Vec<&TweetRecord> = match category {
        Some(c) => category_tweets(store, c),
        None => store.tweets().collect(),
    };
    let subset: Option<HashSet<String>> = match population {
        Population::AllUsers => None,
        Population::TopActive => {
            let counts = metrics::popularity_counts(tweets.iter().copied());
            Some(metrics::top_active_users(&counts.a, fraction)?)
        }
    };
    Ok(metrics::type_breakdown(
        tweets.iter().copied(),
        population,
        subset.as_ref(),
    ))
}

pub fn stats(store: &Store, category: Category) -> SummaryStats {
    store.summary_stats(category)
}

/// Canonical URLs whose form contains every whitespace-separated keyword in
/// `query`, with their share counts, most shared first.
pub fn url_search(store: &Store, query: &str, limit: usize, offset: usize) -> Vec<(String, u64)> {
    let keywords: Vec<String> = query
        .split_whitespace()
        .map(|k| k.to_lowercase())
        .collect();
    if keywords.is_empty() {
        return Vec::new();
    }
    let counts = metrics::popularity_counts(store.tweets());
    let mut hits: Vec<(String, u64)> = counts
        .n
        .into_iter()
        .filter(|(url, _)| {
            urlnorm::canonicalize(url)
                .ok()
                .and_then(|c| urlnorm::keyword_match(&c, &keywords).ok())
                .unwrap_or(false)
        })
        .collect();
    hits.sort_by(|(ua, ca), (ub, cb)| cb.cmp(ca).then(ua.cmp(ub)));
    hits.into_iter().skip(offset).take(limit).collect()
}
