//! Filter a small NDJSON tweet stream against two monitored sites and show
//! the ingestion counters, including idempotence on a second pass.
//!
//! Run with: cargo run --example ingest_tweets

use chrono::{TimeZone, Utc};
use observatory::store::{Category, Site, Store};
use observatory::stream::ingest;

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut store = Store::open(tmp.path()).unwrap();
    let registered_at = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
    for (domain, category) in [
        ("fakenews.example", Category::FakeNews),
        ("factcheck.example", Category::FactChecking),
    ] {
        store
            .put_site(Site {
                domain: domain.into(),
                category,
                rss_url: None,
                registered_at,
                deep_crawled_at: None,
            })
            .unwrap();
    }

    // Five events: two match, one is off-domain, one is a retweet of a
    // matching URL, one is malformed (no id).
    let ndjson = concat!(
        r#"{"id":"1","created_at":"2016-01-14T10:00:00Z","user_id":"alice","text":"","urls":["http://www.fakenews.example/story?utm=1"]}"#, "\n",
        r#"{"id":"2","created_at":"2016-01-14T11:00:00Z","user_id":"bob","text":"","urls":["http://factcheck.example/debunk/"]}"#, "\n",
        r#"{"id":"3","created_at":"2016-01-14T12:00:00Z","user_id":"carol","text":"","urls":["http://unrelated.example/x"]}"#, "\n",
        r#"{"id":"4","created_at":"2016-01-14T13:00:00Z","user_id":"dan","text":"","urls":["http://m.fakenews.example/story"],"retweeted_id":"1"}"#, "\n",
        r#"{"id":"","created_at":"2016-01-14T14:00:00Z","user_id":"eve","text":"","urls":[]}"#, "\n",
    );

    let report = ingest(ndjson.as_bytes(), &mut store).unwrap();
    println!("first pass:  {report:?}");

    let report = ingest(ndjson.as_bytes(), &mut store).unwrap();
    println!("second pass: {report:?}");

    // Tweets 1 and 4 collapse onto the same canonical URL.
    println!();
    for tweet in store.tweets() {
        let urls: Vec<&str> = tweet.matches.iter().map(|m| m.url.full.as_str()).collect();
        println!("{} {} {:?} {:?}", tweet.id, tweet.user_id, tweet.tweet_type, urls);
    }

    let stats = store.summary_stats(Category::FakeNews);
    println!("\nfake-news stats: {stats:?}");
}
