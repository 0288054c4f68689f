//! Story acquisition from monitored sites.
//!
//! Each site gets a one-time deep depth-first crawl of its internal link
//! structure at registration, then a scheduled light crawl of its RSS/Atom
//! feed every two hours. Fetching and time are injected capabilities
//! ([`Fetcher`], [`Clock`]) so everything here runs against fixtures.

mod feed;
mod fetch;
mod html;
mod robots;

pub use feed::{parse_feed, FeedItem, FeedParseError};
pub use fetch::{Clock, FetchError, FetchResponse, Fetcher, HttpFetcher, MapFetcher, SimClock, SystemClock};
pub use html::{discover_feed, extract_links, extract_title};
pub use robots::RobotsPolicy;

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::store::{ArticleRecord, Revision, Site, Store, StoreError};
use crate::urlnorm::{self, CanonicalUrl};

pub const USER_AGENT: &str = "observatory-crawler";

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("site root unreachable at {url}: {detail}")]
    RootUnreachable { url: String, detail: String },
    #[error("feed unavailable: {0}")]
    FeedUnavailable(String),
    #[error(transparent)]
    FeedParse(#[from] FeedParseError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub max_depth: u32,
    pub max_pages: usize,
    pub per_host_delay: Duration,
    pub parallel_fetches: usize,
    pub light_interval: Duration,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            max_depth: 10,
            max_pages: 10_000,
            per_host_delay: Duration::seconds(1),
            parallel_fetches: 4,
            light_interval: Duration::hours(2),
        }
    }
}

/// Outcome of a deep crawl: articles in traversal order plus per-page
/// fetch failures, which are never fatal.
#[derive(Debug, Default)]
pub struct DeepCrawlResult {
    pub articles: Vec<ArticleRecord>,
    pub failures: Vec<(String, String)>,
}

/// Enforces `per_host_delay` between consecutive fetches to one host.
struct HostThrottle {
    last: HashMap<String, DateTime<Utc>>,
    delay: Duration,
}

impl HostThrottle {
    fn new(delay: Duration) -> HostThrottle {
        HostThrottle { last: HashMap::new(), delay }
    }

    fn wait(&mut self, host: &str, clock: &dyn Clock) {
        if let Some(&last) = self.last.get(host) {
            let earliest = last + self.delay;
            let now = clock.now();
            if now < earliest {
                clock.sleep(earliest - now);
            }
        }
        self.last.insert(host.to_string(), clock.now());
    }
}

fn host_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(|h| h.to_string()))
        .unwrap_or_else(|| url.to_string())
}

/// One-time depth-first crawl of a site's internal link structure.
///
/// Only links whose canonical form belongs to the site domain are followed;
/// a visited set on canonical URLs prevents revisits; robots.txt rules are
/// honored; traversal stops at `max_depth` / `max_pages`.
pub fn deep_crawl(
    site: &Site,
    fetcher: &dyn Fetcher,
    clock: &dyn Clock,
    config: &CrawlConfig,
) -> Result<DeepCrawlResult, CrawlError> {
    let root_url = format!("http://{}/", site.domain);
    let mut throttle = HostThrottle::new(config.per_host_delay);
    let mut result = DeepCrawlResult::default();

    let robots_url = format!("http://{}/robots.txt", site.domain);
    throttle.wait(&host_of(&robots_url), clock);
    let robots = match fetcher.fetch(&robots_url) {
        Ok(r) if r.is_success() => {
            RobotsPolicy::parse(&String::from_utf8_lossy(&r.body), USER_AGENT)
        }
        _ => RobotsPolicy::allow_all(),
    };

    let root_canon = urlnorm::canonicalize(&root_url).map_err(|e| CrawlError::RootUnreachable {
        url: root_url.clone(),
        detail: e.to_string(),
    })?;

    let mut visited: HashSet<String> = HashSet::new();
    visited.insert(root_canon.full);
    let mut article_keys: HashSet<String> = HashSet::new();
    let mut stack: Vec<(String, u32)> = vec![(root_url.clone(), 0)];
    let mut pages_fetched = 0usize;

    while let Some((url, depth)) = stack.pop() {
        if pages_fetched >= config.max_pages {
            break;
        }
        throttle.wait(&host_of(&url), clock);
        let response = match fetcher.fetch(&url) {
            Ok(r) if r.is_success() => r,
            Ok(r) => {
                if url == root_url {
                    return Err(CrawlError::RootUnreachable {
                        url,
                        detail: format!("status {}", r.status),
                    });
                }
                result.failures.push((url, format!("status {}", r.status)));
                continue;
            }
            Err(e) => {
                if url == root_url {
                    return Err(CrawlError::RootUnreachable { url, detail: e.to_string() });
                }
                result.failures.push((url, e.to_string()));
                continue;
            }
        };
        pages_fetched += 1;

        let is_html =
            response.content_type.is_empty() || response.content_type.contains("html");
        if !is_html {
            continue;
        }

        let (links, canonical_hint) = extract_links(&response.body, &url);

        // Prefer the page's own canonical URL as the article key.
        let key_source = canonical_hint.as_deref().unwrap_or(&url);
        if let Ok(canon) = urlnorm::canonicalize(key_source) {
            if urlnorm::matches_site(&canon, &site.domain) {
                if let Some(title) = extract_title(&response.body) {
                    if article_keys.insert(canon.full.clone()) {
                        result.articles.push(ArticleRecord {
                            canonical_url: canon,
                            site_domain: site.domain.clone(),
                            title,
                            published_at: None,
                            revisions: Vec::new(),
                        });
                    }
                }
            }
        }

        if depth >= config.max_depth {
            continue;
        }
        let mut children = Vec::new();
        for link in links {
            let Ok(canon) = urlnorm::canonicalize(&link) else {
                continue;
            };
            if !urlnorm::matches_site(&canon, &site.domain) {
                continue;
            }
            if !robots.allows(&canon.path) {
                continue;
            }
            if visited.insert(canon.full) {
                children.push((link, depth + 1));
            }
        }
        // Reverse push so the first link in document order is explored first.
        for child in children.into_iter().rev() {
            stack.push(child);
        }
    }

    Ok(result)
}

/// Periodic feed check: all feed items are examined before any page fetch
/// (breadth-first); items already stored with the same `updated_at` are
/// skipped; new or updated items yield article records, updates appended as
/// revisions.
pub fn light_crawl(
    site: &Site,
    fetcher: &dyn Fetcher,
    store: &mut Store,
    clock: &dyn Clock,
    config: &CrawlConfig,
) -> Result<Vec<ArticleRecord>, CrawlError> {
    let rss_url = site
        .rss_url
        .as_deref()
        .ok_or_else(|| CrawlError::FeedUnavailable(format!("site {} has no feed url", site.domain)))?;

    let mut throttle = HostThrottle::new(config.per_host_delay);
    throttle.wait(&host_of(rss_url), clock);
    let response = match fetcher.fetch(rss_url) {
        Ok(r) if r.is_success() => r,
        Ok(r) => {
            return Err(CrawlError::FeedUnavailable(format!(
                "{rss_url} returned status {}",
                r.status
            )))
        }
        Err(e) => return Err(CrawlError::FeedUnavailable(e.to_string())),
    };
    let items = parse_feed(&response.body)?;

    // Breadth-first: decide what to fetch from the feed alone, then fetch.
    let mut queue: Vec<(CanonicalUrl, FeedItem)> = Vec::new();
    for item in items {
        let Ok(canon) = urlnorm::canonicalize(&item.link) else {
            continue;
        };
        let unchanged = match (store.get_article(&canon.full), item.updated_at) {
            (Some(existing), Some(updated)) => {
                existing.revisions.iter().any(|r| r.updated_at == updated)
            }
            (Some(_), None) => true,
            (None, _) => false,
        };
        if !unchanged {
            queue.push((canon, item));
        }
    }

    let mut records = Vec::new();
    for (canon, item) in queue {
        throttle.wait(&host_of(&item.link), clock);
        let page_title = fetcher
            .fetch(&item.link)
            .ok()
            .filter(|r| r.is_success())
            .and_then(|r| extract_title(&r.body));
        let title = page_title.unwrap_or_else(|| item.title.clone());
        let revisions = item
            .updated_at
            .map(|updated_at| vec![Revision { updated_at, title: title.clone() }])
            .unwrap_or_default();
        let record = ArticleRecord {
            canonical_url: canon,
            site_domain: site.domain.clone(),
            title,
            published_at: item.published_at,
            revisions,
        };
        records.push(store.put_article(record)?.clone());
    }
    Ok(records)
}

/// What happened during a scheduler run.
#[derive(Debug, Default)]
pub struct ScheduleReport {
    pub runs: BTreeMap<String, u64>,
    pub run_log: Vec<(String, DateTime<Utc>)>,
    pub errors: Vec<(String, String)>,
}

/// Light-crawl every site on its interval until `deadline`.
///
/// Site starts are staggered by one second each so no two sites begin in the
/// same second. A crawl that overruns its interval skips the missed slots
/// and resumes on the next grid point; it never overlaps itself. Per-site
/// errors are recorded and the site is retried on its next tick.
pub fn schedule_light_crawls(
    sites: &[Site],
    fetcher: &dyn Fetcher,
    store: &mut Store,
    clock: &dyn Clock,
    config: &CrawlConfig,
    deadline: Option<DateTime<Utc>>,
) -> ScheduleReport {
    let mut report = ScheduleReport::default();
    if sites.is_empty() {
        if let Some(deadline) = deadline {
            let now = clock.now();
            if deadline > now {
                clock.sleep(deadline - now);
            }
        }
        return report;
    }

    let start = clock.now();
    let mut dues: Vec<DateTime<Utc>> = (0..sites.len())
        .map(|i| start + Duration::seconds(i as i64))
        .collect();

    loop {
        let (idx, &due) = dues
            .iter()
            .enumerate()
            .min_by_key(|(i, &d)| (d, *i))
            .expect("non-empty dues");
        if let Some(deadline) = deadline {
            if due >= deadline {
                break;
            }
        }
        let now = clock.now();
        if due > now {
            clock.sleep(due - now);
        }

        let site = &sites[idx];
        report.run_log.push((site.domain.clone(), clock.now()));
        *report.runs.entry(site.domain.clone()).or_insert(0) += 1;
        if let Err(e) = light_crawl(site, fetcher, store, clock, config) {
            report.errors.push((site.domain.clone(), e.to_string()));
        }

        let finished = clock.now();
        let mut next = due + config.light_interval;
        while next <= finished {
            next = next + config.light_interval;
        }
        dues[idx] = next;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Category;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 1, 14, 0, 0, 0).unwrap()
    }

    fn site(domain: &str, rss: Option<&str>) -> Site {
        Site {
            domain: domain.into(),
            category: Category::FakeNews,
            rss_url: rss.map(String::from),
            registered_at: t0(),
            deep_crawled_at: None,
        }
    }

    fn page(url: &str, title: &str, links: &[&str]) -> FetchResponse {
        let anchors: String = links
            .iter()
            .map(|l| format!("<a href=\"{l}\">x</a>"))
            .collect();
        FetchResponse::html(url, &format!("<html><title>{title}</title>{anchors}</html>"))
    }

    #[test]
    fn deep_crawl_follows_dfs_and_skips_off_domain() {
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher
            .insert(page("http://s.com/", "Root", &["/a", "/b", "http://other.com/x"]))
            .insert(page("http://s.com/a", "A", &["/a1"]))
            .insert(page("http://s.com/a1", "A1", &[]))
            .insert(page("http://s.com/b", "B", &["/b"])); // self loop

        let result =
            deep_crawl(&site("s.com", None), &fetcher, &clock, &CrawlConfig::default()).unwrap();
        let titles: Vec<&str> = result.articles.iter().map(|a| a.title.as_str()).collect();
        // Depth-first: a branch fully explored before b.
        assert_eq!(titles, vec!["Root", "A", "A1", "B"]);

        let fetched = fetcher.fetched_urls();
        assert!(!fetched.iter().any(|u| u.contains("other.com")));
        // Self-loop visited once.
        assert_eq!(fetched.iter().filter(|u| *u == "http://s.com/b").count(), 1);
    }

    #[test]
    fn deep_crawl_fails_on_unreachable_root() {
        let clock = SimClock::new(t0());
        let fetcher = MapFetcher::with_clock(&clock); // nothing mapped: everything 404s
        let err = deep_crawl(&site("s.com", None), &fetcher, &clock, &CrawlConfig::default())
            .unwrap_err();
        assert!(matches!(err, CrawlError::RootUnreachable { .. }));
    }

    #[test]
    fn deep_crawl_respects_robots() {
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher.insert(FetchResponse {
            url: "http://s.com/robots.txt".into(),
            status: 200,
            content_type: "text/plain".into(),
            body: b"User-agent: *\nDisallow: /hidden/".to_vec(),
        });
        fetcher
            .insert(page("http://s.com/", "Root", &["/hidden/x", "/open"]))
            .insert(page("http://s.com/hidden/x", "Hidden", &[]))
            .insert(page("http://s.com/open", "Open", &[]));

        let result =
            deep_crawl(&site("s.com", None), &fetcher, &clock, &CrawlConfig::default()).unwrap();
        let titles: Vec<&str> = result.articles.iter().map(|a| a.title.as_str()).collect();
        assert_eq!(titles, vec!["Root", "Open"]);
    }

    #[test]
    fn deep_crawl_is_polite_per_host() {
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher
            .insert(page("http://s.com/", "Root", &["/a", "/b"]))
            .insert(page("http://s.com/a", "A", &[]))
            .insert(page("http://s.com/b", "B", &[]));
        let config = CrawlConfig { per_host_delay: Duration::seconds(2), ..Default::default() };
        deep_crawl(&site("s.com", None), &fetcher, &clock, &config).unwrap();

        let log = fetcher.fetch_log();
        for pair in log.windows(2) {
            assert!(pair[1].1 - pair[0].1 >= Duration::seconds(2));
        }
    }

    #[test]
    fn deep_crawl_honors_page_budget() {
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher
            .insert(page("http://s.com/", "Root", &["/a", "/b", "/c"]))
            .insert(page("http://s.com/a", "A", &[]))
            .insert(page("http://s.com/b", "B", &[]))
            .insert(page("http://s.com/c", "C", &[]));
        let config = CrawlConfig { max_pages: 2, ..Default::default() };
        let result = deep_crawl(&site("s.com", None), &fetcher, &clock, &config).unwrap();
        assert_eq!(result.articles.len(), 2);
    }

    fn rss_feed(urls: &[(&str, Option<&str>)]) -> String {
        let items: String = urls
            .iter()
            .map(|(u, updated)| {
                // The subset parser reads RSS pubDate; reuse Atom-style feeds
                // for update tracking instead. Here: plain RSS, no updates.
                let _ = updated;
                format!("<item><title>T {u}</title><link>{u}</link></item>")
            })
            .collect();
        format!("<rss version=\"2.0\"><channel>{items}</channel></rss>")
    }

    #[test]
    fn light_crawl_dedups_and_is_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        let feed = rss_feed(&[
            ("http://s.com/1", None),
            ("http://s.com/2", None),
            ("http://s.com/3", None),
        ]);
        fetcher.insert(FetchResponse::xml("http://s.com/feed.xml", &feed));
        for i in 1..=3 {
            fetcher.insert(page(&format!("http://s.com/{i}"), &format!("Story {i}"), &[]));
        }
        let s = site("s.com", Some("http://s.com/feed.xml"));

        // Pre-store item 1 so only 2 new records appear.
        store
            .put_article(ArticleRecord {
                canonical_url: urlnorm::canonicalize("http://s.com/1").unwrap(),
                site_domain: "s.com".into(),
                title: "Story 1".into(),
                published_at: None,
                revisions: Vec::new(),
            })
            .unwrap();

        let config = CrawlConfig::default();
        let new = light_crawl(&s, &fetcher, &mut store, &clock, &config).unwrap();
        assert_eq!(new.len(), 2);

        let again = light_crawl(&s, &fetcher, &mut store, &clock, &config).unwrap();
        assert!(again.is_empty());
    }

    #[test]
    fn light_crawl_records_update_as_revision() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        let config = CrawlConfig::default();
        let s = site("s.com", Some("http://s.com/feed.xml"));

        let atom = |updated: &str| {
            format!(
                "<feed xmlns=\"http://www.w3.org/2005/Atom\"><entry><title>A</title>\
                 <link href=\"http://s.com/a\"/><updated>{updated}</updated><id>a</id></entry></feed>"
            )
        };

        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher.insert(FetchResponse::xml("http://s.com/feed.xml", &atom("2016-01-14T00:00:00Z")));
        fetcher.insert(page("http://s.com/a", "A", &[]));
        let first = light_crawl(&s, &fetcher, &mut store, &clock, &config).unwrap();
        assert_eq!(first.len(), 1);

        // Same updated_at: skipped.
        let none = light_crawl(&s, &fetcher, &mut store, &clock, &config).unwrap();
        assert!(none.is_empty());

        // Later updated_at: one revision appended, same canonical key.
        let mut fetcher = MapFetcher::with_clock(&clock);
        fetcher.insert(FetchResponse::xml("http://s.com/feed.xml", &atom("2016-01-15T00:00:00Z")));
        fetcher.insert(page("http://s.com/a", "A v2", &[]));
        let updated = light_crawl(&s, &fetcher, &mut store, &clock, &config).unwrap();
        assert_eq!(updated.len(), 1);
        assert_eq!(updated[0].revisions.len(), 2);
        assert_eq!(store.articles().count(), 1);
    }

    #[test]
    fn light_crawl_feed_404_is_unavailable() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        let fetcher = MapFetcher::with_clock(&clock);
        let s = site("s.com", Some("http://s.com/feed.xml"));
        let err = light_crawl(&s, &fetcher, &mut store, &clock, &CrawlConfig::default())
            .unwrap_err();
        assert!(matches!(err, CrawlError::FeedUnavailable(_)));
    }

    #[test]
    fn scheduler_fires_each_site_every_interval() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        let mut fetcher = MapFetcher::with_clock(&clock);
        let feed = rss_feed(&[("http://a.com/1", None)]);
        fetcher.insert(FetchResponse::xml("http://a.com/feed.xml", &feed));
        let feed_b = rss_feed(&[("http://b.com/1", None)]);
        fetcher.insert(FetchResponse::xml("http://b.com/feed.xml", &feed_b));
        fetcher.insert(page("http://a.com/1", "A1", &[]));
        fetcher.insert(page("http://b.com/1", "B1", &[]));

        let sites = vec![
            site("a.com", Some("http://a.com/feed.xml")),
            site("b.com", Some("http://b.com/feed.xml")),
        ];
        let report = schedule_light_crawls(
            &sites,
            &fetcher,
            &mut store,
            &clock,
            &CrawlConfig::default(),
            Some(t0() + Duration::hours(6)),
        );
        assert_eq!(report.runs["a.com"], 3);
        assert_eq!(report.runs["b.com"], 3);
        // Staggered starts: never the same second.
        let mut starts: Vec<_> = report.run_log.iter().map(|(_, t)| *t).collect();
        starts.sort();
        starts.dedup();
        assert_eq!(starts.len(), report.run_log.len());
    }

    #[test]
    fn scheduler_skips_overrun_slots() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        // Every fetch burns 90 minutes: a crawl (feed + 1 page) takes 3 h.
        let mut fetcher = MapFetcher::with_clock(&clock).cost_per_fetch(Duration::minutes(90));
        let feed = rss_feed(&[("http://a.com/1", None)]);
        fetcher.insert(FetchResponse::xml("http://a.com/feed.xml", &feed));
        fetcher.insert(page("http://a.com/1", "A1", &[]));

        let sites = vec![site("a.com", Some("http://a.com/feed.xml"))];
        let report = schedule_light_crawls(
            &sites,
            &fetcher,
            &mut store,
            &clock,
            &CrawlConfig::default(),
            Some(t0() + Duration::hours(6)),
        );
        let hours: Vec<i64> = report
            .run_log
            .iter()
            .map(|(_, t)| (*t - t0()).num_hours())
            .collect();
        // First run at 0 h takes until 3 h; the 2 h slot is skipped; next is 4 h.
        assert_eq!(hours, vec![0, 4]);
    }

    #[test]
    fn scheduler_idles_on_empty_site_list() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let clock = SimClock::new(t0());
        let fetcher = MapFetcher::with_clock(&clock);
        let report = schedule_light_crawls(
            &[],
            &fetcher,
            &mut store,
            &clock,
            &CrawlConfig::default(),
            Some(t0() + Duration::hours(6)),
        );
        assert!(report.runs.is_empty());
        assert_eq!(clock.now(), t0() + Duration::hours(6));
    }
}
