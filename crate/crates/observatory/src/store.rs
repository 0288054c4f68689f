//! Durable, queryable repository for sites, articles, and tweets.
//!
//! Persistence is an append-only NDJSON journal per record kind
//! (`sites.ndjson`, `articles.ndjson`, `tweets.ndjson`) with in-memory
//! indexes rebuilt on startup. A partial trailing line left by a crash is
//! discarded on open; `compact` rewrites the journals from live state and
//! emits a snapshot manifest.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::TweetType;
use crate::urlnorm::{self, CanonicalUrl};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("storage failure: {0}")]
    StorageFailure(#[from] std::io::Error),
    #[error("journal {file} corrupt at line {line}: {detail}")]
    JournalCorrupt {
        file: String,
        line: usize,
        detail: String,
    },
    #[error("bad query window: t0 must be strictly before t1")]
    BadWindow,
}

/// Category of a monitored site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    FakeNews,
    FactChecking,
}

impl std::str::FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fake_news" => Ok(Category::FakeNews),
            "fact_checking" => Ok(Category::FactChecking),
            other => Err(format!("unknown category {other:?}")),
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Category::FakeNews => "fake_news",
            Category::FactChecking => "fact_checking",
        })
    }
}

/// A monitored news domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub domain: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rss_url: Option<String>,
    pub registered_at: DateTime<Utc>,
    /// Set when the one-time deep crawl has run; re-registration clears it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deep_crawled_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub updated_at: DateTime<Utc>,
    pub title: String,
}

/// A crawled story, keyed by canonical URL. Updates append revisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub canonical_url: CanonicalUrl,
    pub site_domain: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub revisions: Vec<Revision>,
}

/// One matched (canonical URL, monitored site) pair inside a tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetMatch {
    pub url: CanonicalUrl,
    pub site_domain: String,
}

/// One ingested share, with its ingestion sequence number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub user_id: String,
    #[serde(rename = "type")]
    pub tweet_type: TweetType,
    pub matches: Vec<TweetMatch>,
    pub seq: u64,
}

/// Tweet ready for insertion; the store assigns `seq`.
#[derive(Debug, Clone)]
pub struct NewTweet {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub user_id: String,
    pub tweet_type: TweetType,
    pub matches: Vec<TweetMatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n_sites: u64,
    pub n_tweets: u64,
    pub n_users: u64,
    pub n_urls: u64,
}

/// Snapshot manifest: record counts and the last assigned sequence number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub n_sites: u64,
    pub n_articles: u64,
    pub n_tweets: u64,
    pub last_seq: u64,
}

const SITES_JOURNAL: &str = "sites.ndjson";
const ARTICLES_JOURNAL: &str = "articles.ndjson";
const TWEETS_JOURNAL: &str = "tweets.ndjson";
const MANIFEST_FILE: &str = "manifest.json";

pub struct Store {
    dir: PathBuf,
    sites: BTreeMap<String, Site>,
    articles: HashMap<String, ArticleRecord>,
    tweet_index: HashMap<String, usize>,
    tweets: Vec<TweetRecord>,
    next_seq: u64,
    site_log: BufWriter<File>,
    article_log: BufWriter<File>,
    tweet_log: BufWriter<File>,
}

impl Store {
    /// Open (or create) a store rooted at `dir`, replaying the journals.
    pub fn open(dir: impl AsRef<Path>) -> Result<Store, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;

        let sites_recs: Vec<Site> = replay_journal(&dir.join(SITES_JOURNAL))?;
        let article_recs: Vec<ArticleRecord> = replay_journal(&dir.join(ARTICLES_JOURNAL))?;
        let tweet_recs: Vec<TweetRecord> = replay_journal(&dir.join(TWEETS_JOURNAL))?;

        let mut sites = BTreeMap::new();
        for s in sites_recs {
            sites.insert(s.domain.clone(), s);
        }
        let mut articles = HashMap::new();
        for a in article_recs {
            // Journal entries carry the full merged record; last write wins.
            articles.insert(a.canonical_url.full.clone(), a);
        }
        let mut tweets: Vec<TweetRecord> = Vec::with_capacity(tweet_recs.len());
        let mut tweet_index = HashMap::new();
        let mut next_seq = 0u64;
        for t in tweet_recs {
            if tweet_index.contains_key(&t.id) {
                continue;
            }
            next_seq = next_seq.max(t.seq + 1);
            tweet_index.insert(t.id.clone(), tweets.len());
            tweets.push(t);
        }

        let open_append = |name: &str| -> Result<BufWriter<File>, std::io::Error> {
            Ok(BufWriter::new(
                OpenOptions::new().create(true).append(true).open(dir.join(name))?,
            ))
        };

        Ok(Store {
            site_log: open_append(SITES_JOURNAL)?,
            article_log: open_append(ARTICLES_JOURNAL)?,
            tweet_log: open_append(TWEETS_JOURNAL)?,
            dir,
            sites,
            articles,
            tweet_index,
            tweets,
            next_seq,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Register or update a site. The category is immutable after creation;
    /// re-registration refreshes `rss_url` and clears the deep-crawl mark.
    pub fn put_site(&mut self, site: Site) -> Result<&Site, StoreError> {
        if let Some(existing) = self.sites.get(&site.domain) {
            if existing.category != site.category {
                return Err(StoreError::InvariantViolation(format!(
                    "site {} already registered with category {}",
                    site.domain, existing.category
                )));
            }
        }
        append_line(&mut self.site_log, &site)?;
        Ok(self.sites.entry(site.domain.clone()).and_modify(|s| *s = site.clone()).or_insert(site))
    }

    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.sites.values()
    }

    pub fn get_site(&self, domain: &str) -> Option<&Site> {
        self.sites.get(domain)
    }

    /// Insert or merge an article. Merging appends revisions the stored
    /// record does not yet carry, keyed by `updated_at`, keeping them sorted.
    pub fn put_article(&mut self, article: ArticleRecord) -> Result<&ArticleRecord, StoreError> {
        if !urlnorm::matches_site(&article.canonical_url, &article.site_domain) {
            return Err(StoreError::InvariantViolation(format!(
                "article host {} does not belong to site {}",
                article.canonical_url.host, article.site_domain
            )));
        }
        let key = article.canonical_url.full.clone();
        let merged = match self.articles.get(&key) {
            None => article,
            Some(existing) => {
                let mut merged = existing.clone();
                if !article.title.is_empty() {
                    merged.title = article.title;
                }
                if merged.published_at.is_none() {
                    merged.published_at = article.published_at;
                }
                let known: HashSet<DateTime<Utc>> =
                    merged.revisions.iter().map(|r| r.updated_at).collect();
                for rev in article.revisions {
                    if !known.contains(&rev.updated_at) {
                        merged.revisions.push(rev);
                    }
                }
                merged.revisions.sort_by_key(|r| r.updated_at);
                merged
            }
        };
        append_line(&mut self.article_log, &merged)?;
        Ok(self.articles.entry(key).and_modify(|a| *a = merged.clone()).or_insert(merged))
    }

    pub fn get_article(&self, canonical_full: &str) -> Option<&ArticleRecord> {
        self.articles.get(canonical_full)
    }

    pub fn articles(&self) -> impl Iterator<Item = &ArticleRecord> {
        self.articles.values()
    }

    /// Persist a tweet. Duplicate ids are a no-op returning the existing
    /// record; the boolean says whether the record is new.
    pub fn put_tweet(&mut self, tweet: NewTweet) -> Result<(&TweetRecord, bool), StoreError> {
        if tweet.matches.is_empty() {
            return Err(StoreError::InvariantViolation(
                "tweet record must reference at least one matched site".into(),
            ));
        }
        if let Some(&idx) = self.tweet_index.get(&tweet.id) {
            return Ok((&self.tweets[idx], false));
        }
        let record = TweetRecord {
            id: tweet.id,
            created_at: tweet.created_at,
            user_id: tweet.user_id,
            tweet_type: tweet.tweet_type,
            matches: tweet.matches,
            seq: self.next_seq,
        };
        append_line(&mut self.tweet_log, &record)?;
        self.next_seq += 1;
        self.tweet_index.insert(record.id.clone(), self.tweets.len());
        self.tweets.push(record);
        Ok((self.tweets.last().unwrap(), true))
    }

    pub fn tweets(&self) -> impl Iterator<Item = &TweetRecord> {
        self.tweets.iter()
    }

    pub fn tweet_count(&self) -> usize {
        self.tweets.len()
    }

    fn site_category(&self, domain: &str) -> Option<Category> {
        self.sites.get(domain).map(|s| s.category)
    }

    /// Tweets with at least one match in `category`, optionally restricted to
    /// a half-open time window and to URLs containing every given keyword.
    pub fn query_tweets(
        &self,
        category: Category,
        window: Option<(DateTime<Utc>, DateTime<Utc>)>,
        url_keywords: Option<&[String]>,
    ) -> Result<Vec<&TweetRecord>, StoreError> {
        if let Some((t0, t1)) = window {
            if t0 >= t1 {
                return Err(StoreError::BadWindow);
            }
        }
        let mut out: Vec<&TweetRecord> = self
            .tweets
            .iter()
            .filter(|t| {
                if let Some((t0, t1)) = window {
                    if t.created_at < t0 || t.created_at >= t1 {
                        return false;
                    }
                }
                t.matches.iter().any(|m| {
                    if self.site_category(&m.site_domain) != Some(category) {
                        return false;
                    }
                    match url_keywords {
                        None => true,
                        Some(kw) => {
                            !kw.is_empty()
                                && urlnorm::keyword_match(&m.url, kw).unwrap_or(false)
                        }
                    }
                })
            })
            .collect();
        out.sort_by(|a, b| (a.created_at, a.seq).cmp(&(b.created_at, b.seq)));
        Ok(out)
    }

    /// Distinct sites, tweets, users, and canonical URLs for one category.
    pub fn summary_stats(&self, category: Category) -> SummaryStats {
        let n_sites = self.sites.values().filter(|s| s.category == category).count() as u64;
        let mut n_tweets = 0u64;
        let mut users = HashSet::new();
        let mut urls = HashSet::new();
        for t in &self.tweets {
            let mut in_category = false;
            for m in &t.matches {
                if self.site_category(&m.site_domain) == Some(category) {
                    in_category = true;
                    urls.insert(m.url.full.as_str());
                }
            }
            if in_category {
                n_tweets += 1;
                users.insert(t.user_id.as_str());
            }
        }
        SummaryStats {
            n_sites,
            n_tweets,
            n_users: users.len() as u64,
            n_urls: urls.len() as u64,
        }
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            n_sites: self.sites.len() as u64,
            n_articles: self.articles.len() as u64,
            n_tweets: self.tweets.len() as u64,
            last_seq: self.next_seq.saturating_sub(1),
        }
    }

    /// Rewrite every journal from live state and write the snapshot manifest.
    pub fn compact(&mut self) -> Result<Manifest, StoreError> {
        rewrite_journal(&self.dir.join(SITES_JOURNAL), self.sites.values())?;
        rewrite_journal(&self.dir.join(ARTICLES_JOURNAL), self.articles.values())?;
        rewrite_journal(&self.dir.join(TWEETS_JOURNAL), self.tweets.iter())?;

        let open_append = |name: &str| -> Result<BufWriter<File>, std::io::Error> {
            Ok(BufWriter::new(
                OpenOptions::new().append(true).open(self.dir.join(name))?,
            ))
        };
        self.site_log = open_append(SITES_JOURNAL)?;
        self.article_log = open_append(ARTICLES_JOURNAL)?;
        self.tweet_log = open_append(TWEETS_JOURNAL)?;

        let manifest = self.manifest();
        let mut f = File::create(self.dir.join(MANIFEST_FILE))?;
        f.write_all(serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
        f.write_all(b"\n")?;
        Ok(manifest)
    }
}

fn append_line<T: Serialize>(log: &mut BufWriter<File>, record: &T) -> Result<(), StoreError> {
    let line = serde_json::to_string(record)
        .map_err(|e| StoreError::InvariantViolation(format!("unserializable record: {e}")))?;
    log.write_all(line.as_bytes())?;
    log.write_all(b"\n")?;
    log.flush()?;
    Ok(())
}

fn rewrite_journal<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl Iterator<Item = &'a T>,
) -> Result<(), StoreError> {
    let tmp = path.with_extension("ndjson.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for r in records {
            let line = serde_json::to_string(r)
                .map_err(|e| StoreError::InvariantViolation(format!("unserializable: {e}")))?;
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a journal, parsing every complete line. A trailing fragment without
/// a newline (a torn write) is discarded and physically truncated away so
/// later appends start on a clean boundary.
fn replay_journal<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StoreError> {
    let mut file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    drop(file);

    let complete_len = match buf.iter().rposition(|&b| b == b'\n') {
        Some(pos) => pos + 1,
        None => 0,
    };
    if complete_len < buf.len() {
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(complete_len as u64)?;
    }

    let text = String::from_utf8_lossy(&buf[..complete_len]);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| StoreError::JournalCorrupt {
            file: path.display().to_string(),
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
