//! Observatory tracks how low-credibility news and fact-checking content
//! spread on social media. It crawls monitored news sites (a one-time deep
//! crawl plus periodic RSS checks), ingests a replayable tweet stream
//! filtered by site domain, stores canonicalized shares in an append-only
//! journal, and computes temporal and popularity analyses: lagged
//! cross-correlation of sharing volume, CCDFs with power-law tail fits, and
//! spreader-concentration breakdowns.
//!
//! The library is the primary surface; each major capability has a runnable
//! example:
//!
//! ```text
//! cargo run -p observatory --example canonicalize_urls
//! cargo run -p observatory --example crawl_fixture_site
//! cargo run -p observatory --example ingest_tweets
//! cargo run -p observatory --example lagged_correlation
//! cargo run -p observatory --example powerlaw_ccdf
//! cargo run -p observatory --example synth_corpus
//! cargo run -p observatory --example serve_api
//! ```
//!
//! A thin `observatory` binary wraps the same operations for shell use
//! (`sites`, `crawl`, `ingest`, `analyze`, `serve`).

pub mod api;
pub mod feedcrawl;
pub mod metrics;
pub mod store;
pub mod stream;
pub mod synth;
pub mod urlnorm;

pub use store::{Category, Site, Store};
pub use urlnorm::{canonicalize, CanonicalUrl};
