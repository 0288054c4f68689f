//! Tweet stream ingestion.
//!
//! Events arrive as NDJSON lines from a replayable source, standing in for
//! the live streaming filter endpoint with the same semantics: only tweets
//! linking to a monitored domain are kept. Each accepted tweet is
//! classified and persisted exactly once.

use std::io::BufRead;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{NewTweet, Site, Store, StoreError, TweetMatch};
use crate::urlnorm::{self, CanonicalUrl};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("malformed event: {0}")]
    MalformedEvent(String),
    #[error("source unavailable: {0}")]
    SourceUnavailable(std::io::Error),
    #[error("store error after partial ingest ({report:?}): {source}")]
    StoreAborted {
        report: IngestReport,
        source: StoreError,
    },
}

/// The four tweet content types, in classification precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetType {
    Retweet,
    Quote,
    Reply,
    Original,
}

impl TweetType {
    pub const ALL: [TweetType; 4] = [
        TweetType::Original,
        TweetType::Retweet,
        TweetType::Quote,
        TweetType::Reply,
    ];
}

impl std::fmt::Display for TweetType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TweetType::Original => "original",
            TweetType::Retweet => "retweet",
            TweetType::Quote => "quote",
            TweetType::Reply => "reply",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub user_id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replied_id: Option<String>,
}

/// Outcome counters for one ingestion run.
///
/// `read == accepted + dropped_no_match + rejected_malformed` always holds;
/// `newly_stored` additionally says how many accepted tweets were not
/// already in the store (re-ingesting a source is idempotent on tweet id).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub read: u64,
    pub accepted: u64,
    pub dropped_no_match: u64,
    pub rejected_malformed: u64,
    pub newly_stored: u64,
}

/// Parse one NDJSON event line.
pub fn parse_tweet_line(line: &str) -> Result<RawTweet, StreamError> {
    let tweet: RawTweet = serde_json::from_str(line)
        .map_err(|e| StreamError::MalformedEvent(e.to_string()))?;
    if tweet.id.is_empty() {
        return Err(StreamError::MalformedEvent("empty id".into()));
    }
    if tweet.user_id.is_empty() {
        return Err(StreamError::MalformedEvent("empty user_id".into()));
    }
    Ok(tweet)
}

/// Classify a tweet with precedence retweet > quote > reply > original.
pub fn classify(t: &RawTweet) -> TweetType {
    if t.retweeted_id.is_some() {
        TweetType::Retweet
    } else if t.quoted_id.is_some() {
        TweetType::Quote
    } else if t.replied_id.is_some() {
        TweetType::Reply
    } else {
        TweetType::Original
    }
}

/// Canonicalize the tweet's URLs and return every (url, site) pair where the
/// URL belongs to a monitored domain. Duplicate canonical URLs collapse;
/// uncanonicalizable URLs are skipped. An empty result drops the tweet.
pub fn filter_tweet(t: &RawTweet, sites: &[Site]) -> Vec<(CanonicalUrl, String)> {
    let mut seen: Vec<(CanonicalUrl, String)> = Vec::new();
    for raw in &t.urls {
        let Ok(canon) = urlnorm::canonicalize(raw) else {
            continue;
        };
        for site in sites {
            if urlnorm::matches_site(&canon, &site.domain)
                && !seen.iter().any(|(u, d)| u == &canon && d == &site.domain)
            {
                seen.push((canon.clone(), site.domain.clone()));
            }
        }
    }
    seen
}

/// Ingest an NDJSON source into the store. Blank lines are skipped. Store
/// failures abort the run, carrying the partial report in the error.
pub fn ingest<R: BufRead>(source: R, store: &mut Store) -> Result<IngestReport, StreamError> {
    let sites: Vec<Site> = store.sites().cloned().collect();
    let mut report = IngestReport::default();

    for line in source.lines() {
        let line = line.map_err(StreamError::SourceUnavailable)?;
        if line.trim().is_empty() {
            continue;
        }
        report.read += 1;

        let tweet = match parse_tweet_line(&line) {
            Ok(t) => t,
            Err(_) => {
                report.rejected_malformed += 1;
                continue;
            }
        };
        let matches = filter_tweet(&tweet, &sites);
        if matches.is_empty() {
            report.dropped_no_match += 1;
            continue;
        }
        report.accepted += 1;

        let tweet_type = classify(&tweet);
        let new = NewTweet {
            id: tweet.id,
            created_at: tweet.created_at,
            user_id: tweet.user_id,
            tweet_type,
            matches: matches
                .into_iter()
                .map(|(url, site_domain)| TweetMatch { url, site_domain })
                .collect(),
        };
        match store.put_tweet(new) {
            Ok((_, true)) => report.newly_stored += 1,
            Ok((_, false)) => {}
            Err(e) => return Err(StreamError::StoreAborted { report, source: e }),
        }
    }
    Ok(report)
}
