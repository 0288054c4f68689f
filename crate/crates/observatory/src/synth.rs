//! Deterministic synthetic-data generators used as oracles: Pareto samples
//! with a known exponent, volume-series pairs with a planted lag, and tweet
//! corpora with known type composition and activity distribution.
//!
//! One seeded generator (ChaCha8, recorded in the manifest) fully determines
//! every output byte.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{Bucket, VolumeSeries};
use crate::stream::RawTweet;

pub const GENERATOR_VERSION: &str = "synth-1";
pub const RNG_ALGORITHM: &str = "chacha8";

/// Domains the corpus generator writes URLs on, by category.
pub const FAKE_DOMAIN: &str = "fakenews.example";
pub const FACT_DOMAIN: &str = "factcheck.example";

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("|lag| = {lag} too large for series of length {length}")]
    BadLag { lag: i64, length: usize },
    #[error("bad corpus spec: {0}")]
    BadSpec(String),
}

/// Invert the tail law P(X >= x) = (x / x_min)^-(gamma - 1).
pub fn pareto_inverse(u: f64, gamma: f64, x_min: f64) -> f64 {
    x_min * (1.0 - u).powf(-1.0 / (gamma - 1.0))
}

/// Inverse-CDF sample of a Pareto law with tail exponent `gamma`.
pub fn gen_pareto(
    gamma: f64,
    x_min: f64,
    size: usize,
    seed: u64,
) -> Result<Vec<f64>, SynthError> {
    if gamma <= 1.0 {
        return Err(SynthError::BadExponent(gamma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..size)
        .map(|_| pareto_inverse(rng.gen::<f64>(), gamma, x_min))
        .collect())
}

/// A pair of hourly series where the second equals the first shifted by
/// `lag_hours`, plus independent noise, plus a shared (unshifted) period-24
/// circadian component. Positive lag means the first series leads.
pub fn gen_lagged_pair(
    lag_hours: i64,
    length: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<(VolumeSeries, VolumeSeries), SynthError> {
    if lag_hours.unsigned_abs() as usize >= length / 4 {
        return Err(SynthError::BadLag { lag: lag_hours, length });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = lag_hours.unsigned_abs() as usize;

    // Core signal: positive smoothed random walk plus white noise. The white
    // component survives 24 h smoothing only as a shared copy, which is what
    // pins the cross-correlation peak to the planted shift.
    let total = length + margin;
    let mut walk = vec![0.0f64; total];
    let mut level = 200.0f64;
    for w in walk.iter_mut() {
        level += rng.gen_range(-3.0..3.0);
        level = level.max(50.0);
        *w = level;
    }
    let core: Vec<f64> = walk
        .iter()
        .map(|w| w + rng.gen_range(-30.0..30.0))
        .collect();

    let circadian = |t: usize| 25.0 * (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin();

    // Index `margin + t` is hour t of the first series; the second reads
    // `margin + t - lag`, which stays in range for |lag| <= margin.
    let fake: Vec<Option<f64>> = (0..length)
        .map(|t| Some((core[margin + t] + circadian(t)).max(0.0)))
        .collect();
    let fact: Vec<Option<f64>> = (0..length)
        .map(|t| {
            let src = (margin + t) as i64 - lag_hours;
            let noise = if noise_sd > 0.0 {
                rng.gen_range(-noise_sd..noise_sd)
            } else {
                0.0
            };
            Some((core[src as usize] + circadian(t) + noise).max(0.0))
        })
        .collect();

    let start = Utc.with_ymd_and_hms(2015, 10, 14, 0, 0, 0).unwrap();
    Ok((
        VolumeSeries { bucket: Bucket::Hour, start, values: fake },
        VolumeSeries { bucket: Bucket::Hour, start, values: fact },
    ))
}

/// Recipe for a synthetic tweet corpus. Per-user activity is drawn from a
/// Pareto law with exponent `activity_gamma`, so the total tweet count is
/// roughly `n_users * (gamma - 1) / (gamma - 2)` for gamma > 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_users: usize,
    pub n_urls: usize,
    /// Fractions of original / retweet / quote / reply tweets; must sum to 1.
    pub type_shares: [f64; 4],
    pub activity_gamma: f64,
    /// Hours by which fact-checking shares trail fake-news shares.
    pub lag_hours: i64,
    pub duration_hours: u64,
    pub seed: u64,
}

impl CorpusSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.n_users == 0 || self.n_urls == 0 {
            return Err(SynthError::BadSpec("n_users and n_urls must be positive".into()));
        }
        let sum: f64 = self.type_shares.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::BadSpec(format!("type shares sum to {sum}, not 1")));
        }
        if self.type_shares.iter().any(|&s| s < 0.0) {
            return Err(SynthError::BadSpec("negative type share".into()));
        }
        if self.activity_gamma <= 1.0 {
            return Err(SynthError::BadSpec(format!(
                "activity_gamma must exceed 1, got {}",
                self.activity_gamma
            )));
        }
        if self.duration_hours == 0 {
            return Err(SynthError::BadSpec("duration must be positive".into()));
        }
        if self.lag_hours.unsigned_abs() >= self.duration_hours {
            return Err(SynthError::BadSpec("lag exceeds corpus duration".into()));
        }
        Ok(())
    }
}

/// Realized counts for exact-match testing, plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub generator_version: String,
    pub rng_algorithm: String,
    pub seed: u64,
    pub n_tweets: u64,
    pub type_counts: BTreeMap<String, u64>,
    pub activity: BTreeMap<String, u64>,
    pub url_tweets: BTreeMap<String, u64>,
    pub url_users: BTreeMap<String, u64>,
    pub fake_domain: String,
    pub fact_domain: String,
    pub start: DateTime<Utc>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub lines: Vec<String>,
    pub manifest: CorpusManifest,
}

impl Corpus {
    pub fn ndjson(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Generate a parseable NDJSON tweet corpus with known composition.
///
/// URLs split evenly between the fake-news and fact-checking domains;
/// tweets on fact-checking URLs are shifted `lag_hours` later. Output order
/// and every byte are determined by the seed.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<Corpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = Utc.with_ymd_and_hms(2015, 10, 14, 0, 0, 0).unwrap();

    // Per-user activity: rounded Pareto draws, at least one tweet each.
    let activities: Vec<u64> = (0..spec.n_users)
        .map(|_| pareto_inverse(rng.gen::<f64>(), spec.activity_gamma, 1.0).round().max(1.0) as u64)
        .collect();

    let urls: Vec<String> = (0..spec.n_urls)
        .map(|j| {
            if j % 2 == 0 {
                format!("http://{FAKE_DOMAIN}/story-{j:05}")
            } else {
                format!("http://{FACT_DOMAIN}/check-{j:05}")
            }
        })
        .collect();

    let fake_window = spec.duration_hours - spec.lag_hours.unsigned_abs();

    let mut lines = Vec::new();
    let mut type_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut activity: BTreeMap<String, u64> = BTreeMap::new();
    let mut url_tweets: BTreeMap<String, u64> = BTreeMap::new();
    let mut url_users: BTreeMap<String, std::collections::BTreeSet<String>> = BTreeMap::new();
    let mut seq = 0u64;

    for (uidx, &count) in activities.iter().enumerate() {
        let user = format!("u{uidx:06}");
        for _ in 0..count {
            let url_idx = rng.gen_range(0..urls.len());
            let url = &urls[url_idx];
            let is_fact = url_idx % 2 == 1;

            let offset_secs = rng.gen_range(0..fake_window * 3600);
            let shift = if is_fact {
                spec.lag_hours.max(0)
            } else {
                (-spec.lag_hours).max(0)
            };
            let created_at =
                start + Duration::seconds(offset_secs as i64) + Duration::hours(shift);

            let roll: f64 = rng.gen();
            let (kind, retweeted, quoted, replied) = if roll < spec.type_shares[0] {
                ("original", None, None, None)
            } else if roll < spec.type_shares[0] + spec.type_shares[1] {
                ("retweet", Some(format!("x{seq}")), None, None)
            } else if roll < spec.type_shares[0] + spec.type_shares[1] + spec.type_shares[2] {
                ("quote", None, Some(format!("x{seq}")), None)
            } else {
                ("reply", None, None, Some(format!("x{seq}")))
            };

            let tweet = RawTweet {
                id: format!("t{seq:08}"),
                created_at,
                user_id: user.clone(),
                text: String::new(),
                urls: vec![url.clone()],
                retweeted_id: retweeted,
                quoted_id: quoted,
                replied_id: replied,
            };
            lines.push(serde_json::to_string(&tweet).expect("serializable tweet"));
            seq += 1;

            *type_counts.entry(kind.to_string()).or_insert(0) += 1;
            *activity.entry(user.clone()).or_insert(0) += 1;
            let canonical = crate::urlnorm::canonicalize(url).expect("generated url").full;
            *url_tweets.entry(canonical.clone()).or_insert(0) += 1;
            url_users.entry(canonical).or_default().insert(user.clone());
        }
    }
    for kind in ["original", "retweet", "quote", "reply"] {
        type_counts.entry(kind.to_string()).or_insert(0);
    }

    Ok(Corpus {
        lines,
        manifest: CorpusManifest {
            generator_version: GENERATOR_VERSION.to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            seed: spec.seed,
            n_tweets: seq,
            type_counts,
            activity,
            url_tweets,
            url_users: url_users.into_iter().map(|(k, v)| (k, v.len() as u64)).collect(),
            fake_domain: FAKE_DOMAIN.to_string(),
            fact_domain: FACT_DOMAIN.to_string(),
            start,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use crate::stream;

    #[test]
    fn pareto_inverse_boundaries() {
        assert_eq!(pareto_inverse(0.0, 2.5, 3.0), 3.0);
        assert!((pareto_inverse(0.75, 2.0, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_rejects_flat_exponent() {
        assert_eq!(gen_pareto(1.0, 1.0, 10, 0).unwrap_err(), SynthError::BadExponent(1.0));
    }

    #[test]
    fn pareto_is_deterministic() {
        let a = gen_pareto(2.5, 1.0, 100, 9).unwrap();
        let b = gen_pareto(2.5, 1.0, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lag_zero_no_noise_gives_identical_series() {
        let (a, b) = gen_lagged_pair(0, 200, 0.0, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn excessive_lag_is_rejected() {
        assert!(matches!(
            gen_lagged_pair(100, 200, 0.0, 5),
            Err(SynthError::BadLag { .. })
        ));
    }

    #[test]
    fn planted_lag_is_recovered_by_ccf() {
        let (fake, fact) = gen_lagged_pair(13, 1000, 10.0, 17).unwrap();
        let fake_s = metrics::moving_average(&fake, 24).unwrap();
        let fact_s = metrics::moving_average(&fact, 24).unwrap();
        let r = metrics::cross_correlation(&fake_s, &fact_s, 48, 72).unwrap();
        assert_eq!(r.peak_lag, -13);
    }

    fn spec() -> CorpusSpec {
        CorpusSpec {
            n_users: 100,
            n_urls: 20,
            type_shares: [0.45, 0.40, 0.08, 0.07],
            activity_gamma: 2.3,
            lag_hours: 13,
            duration_hours: 24 * 30,
            seed: 4242,
        }
    }

    #[test]
    fn corpus_is_byte_deterministic() {
        let a = gen_corpus(&spec()).unwrap();
        let b = gen_corpus(&spec()).unwrap();
        assert_eq!(a.ndjson(), b.ndjson());
    }

    #[test]
    fn all_original_shares_classify_original() {
        let mut s = spec();
        s.type_shares = [1.0, 0.0, 0.0, 0.0];
        let corpus = gen_corpus(&s).unwrap();
        for line in &corpus.lines {
            let t = stream::parse_tweet_line(line).unwrap();
            assert_eq!(stream::classify(&t), stream::TweetType::Original);
        }
    }

    #[test]
    fn bad_shares_are_rejected() {
        let mut s = spec();
        s.type_shares = [0.5, 0.5, 0.5, 0.0];
        assert!(matches!(gen_corpus(&s), Err(SynthError::BadSpec(_))));
    }

    // Manifest fidelity: every manifest count equals an exact recount of the
    // emitted lines.
    #[test]
    fn manifest_matches_recount() {
        let corpus = gen_corpus(&spec()).unwrap();
        let mut type_counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut activity: BTreeMap<String, u64> = BTreeMap::new();
        let mut url_tweets: BTreeMap<String, u64> = BTreeMap::new();
        for line in &corpus.lines {
            let t = stream::parse_tweet_line(line).unwrap();
            *type_counts.entry(stream::classify(&t).to_string()).or_insert(0) += 1;
            *activity.entry(t.user_id.clone()).or_insert(0) += 1;
            let canon = crate::urlnorm::canonicalize(&t.urls[0]).unwrap().full;
            *url_tweets.entry(canon).or_insert(0) += 1;
        }
        assert_eq!(corpus.manifest.n_tweets as usize, corpus.lines.len());
        for kind in ["original", "retweet", "quote", "reply"] {
            assert_eq!(
                corpus.manifest.type_counts[kind],
                type_counts.get(kind).copied().unwrap_or(0),
                "{kind}"
            );
        }
        assert_eq!(corpus.manifest.activity, activity);
        assert_eq!(corpus.manifest.url_tweets, url_tweets);
    }
}
