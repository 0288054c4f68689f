//! Crawl an in-memory fixture site: a one-time deep crawl of its link
//! structure, then two scheduled feed checks against a simulated clock.
//!
//! Run with: cargo run --example crawl_fixture_site

use chrono::{Duration, TimeZone, Utc};
use observatory::feedcrawl::{
    deep_crawl, schedule_light_crawls, Clock, CrawlConfig, FetchResponse, MapFetcher, SimClock,
};
use observatory::store::{Category, Site, Store};

fn page(title: &str, links: &[&str]) -> String {
    let anchors: String = links
        .iter()
        .map(|l| format!("<a href=\"{l}\">link</a>"))
        .collect();
    format!("<html><head><title>{title}</title></head><body>{anchors}</body></html>")
}

fn main() {
    let start = Utc.with_ymd_and_hms(2016, 1, 14, 0, 0, 0).unwrap();
    let clock = SimClock::new(start);

    let mut fetcher = MapFetcher::with_clock(&clock);
    fetcher
        .insert(FetchResponse::html(
            "http://news.example/",
            &page("Home", &["/politics", "/science", "http://other.example/x"]),
        ))
        .insert(FetchResponse::html(
            "http://news.example/politics",
            &page("Politics", &["/politics/one", "/politics"]),
        ))
        .insert(FetchResponse::html(
            "http://news.example/politics/one",
            &page("Story One", &[]),
        ))
        .insert(FetchResponse::html(
            "http://news.example/science",
            &page("Science", &[]),
        ))
        .insert(FetchResponse::xml(
            "http://news.example/feed.xml",
            r#"<?xml version="1.0"?><rss version="2.0"><channel>
<item><title>Fresh story</title><link>http://news.example/fresh</link>
<pubDate>Thu, 14 Jan 2016 08:00:00 GMT</pubDate></item>
</channel></rss>"#,
        ))
        .insert(FetchResponse::html(
            "http://news.example/fresh",
            &page("Fresh story", &[]),
        ));

    let site = Site {
        domain: "news.example".into(),
        category: Category::FakeNews,
        rss_url: Some("http://news.example/feed.xml".into()),
        registered_at: start,
        deep_crawled_at: None,
    };

    let config = CrawlConfig::default();
    let result = deep_crawl(&site, &fetcher, &clock, &config).unwrap();
    println!("deep crawl visited {} pages, depth-first:", result.articles.len());
    for article in &result.articles {
        println!("  {:<30} {}", article.canonical_url.full, article.title);
    }

    // Feed checks run on a 2-hour grid; the second pass finds nothing new.
    let tmp = tempfile::tempdir().unwrap();
    let mut store = Store::open(tmp.path()).unwrap();
    store.put_site(site.clone()).unwrap();

    let deadline = clock.now() + Duration::hours(4);
    let report = schedule_light_crawls(
        &[site],
        &fetcher,
        &mut store,
        &clock,
        &config,
        Some(deadline),
    );
    println!("\nfeed checks over 4 simulated hours:");
    for (domain, at) in &report.run_log {
        println!("  {domain} checked at {at}");
    }
    println!("articles stored: {}", store.articles().count());
}
