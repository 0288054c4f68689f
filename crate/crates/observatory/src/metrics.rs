//! Quantitative analyses of sharing activity: bucketed volume series with
//! explicit missing-data marking, centered moving-average smoothing, lagged
//! Pearson cross-correlation, CCDFs, power-law tail fits, per-user activity
//! and per-URL popularity counts, and tweet-type breakdowns.
//!
//! All operations are pure functions of their inputs. Every result type
//! serializes to CSV for external plotting.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::TweetRecord;
use crate::stream::TweetType;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("series too short: need {need} contiguous collected buckets, have {have}")]
    SeriesTooShort { need: usize, have: usize },
    #[error("no lag reaches the minimum overlap of {0} pairs")]
    InsufficientOverlap(usize),
    #[error("zero variance: a series is constant on every admissible overlap")]
    ZeroVariance,
    #[error("input is empty")]
    EmptyInput,
    #[error("tail too small: {n_tail} values at or above x_min, need {need}")]
    TailTooSmall { n_tail: usize, need: usize },
    #[error("degenerate tail: all tail values equal x_min, exponent undefined")]
    DegenerateTail,
    #[error("activity map is empty")]
    EmptyActivity,
    #[error("fraction must be in (0, 1], got {0}")]
    BadFraction(f64),
    #[error("series must share hourly bucketing and alignment")]
    BucketMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Hour,
    Day,
}

impl Bucket {
    pub fn seconds(self) -> i64 {
        match self {
            Bucket::Hour => 3600,
            Bucket::Day => 86_400,
        }
    }
}

/// Bucketed volume over time. `None` marks a bucket during which no
/// collection occurred — distinct from a collected bucket that saw nothing
/// (`Some(0.0)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSeries {
    pub bucket: Bucket,
    /// Bucket-aligned UTC start of the first bucket.
    pub start: DateTime<Utc>,
    pub values: Vec<Option<f64>>,
}

impl VolumeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the bucket containing `t`, if inside the series range.
    fn bucket_index(&self, t: DateTime<Utc>) -> Option<usize> {
        let secs = (t - self.start).num_seconds();
        if secs < 0 {
            return None;
        }
        let idx = (secs / self.bucket.seconds()) as usize;
        (idx < self.values.len()).then_some(idx)
    }

    /// `bucket_start,count` lines; missing buckets leave the count empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket_start,count\n");
        for (i, v) in self.values.iter().enumerate() {
            let t = self.start + Duration::seconds(self.bucket.seconds() * i as i64);
            match v {
                Some(c) => out.push_str(&format!("{},{}\n", t.to_rfc3339(), c)),
                None => out.push_str(&format!("{},\n", t.to_rfc3339())),
            }
        }
        out
    }
}

fn align_floor(t: DateTime<Utc>, bucket: Bucket) -> DateTime<Utc> {
    let secs = t.timestamp().div_euclid(bucket.seconds()) * bucket.seconds();
    Utc.timestamp_opt(secs, 0).unwrap()
}

/// Count tweets per UTC bucket. Buckets that intersect no collection window
/// are marked missing; an empty `collection_windows` slice derives a single
/// window spanning the data.
pub fn volume_series<I>(
    times: I,
    bucket: Bucket,
    collection_windows: &[(DateTime<Utc>, DateTime<Utc>)],
) -> VolumeSeries
where
    I: IntoIterator<Item = DateTime<Utc>>,
{
    let times: Vec<DateTime<Utc>> = times.into_iter().collect();
    let derived;
    let windows: &[(DateTime<Utc>, DateTime<Utc>)] = if collection_windows.is_empty() {
        match (times.iter().min(), times.iter().max()) {
            (Some(&lo), Some(&hi)) => {
                derived = [(lo, hi + Duration::seconds(1))];
                &derived
            }
            _ => {
                return VolumeSeries {
                    bucket,
                    start: Utc.timestamp_opt(0, 0).unwrap(),
                    values: Vec::new(),
                }
            }
        }
    } else {
        collection_windows
    };

    let start = align_floor(windows[0].0, bucket);
    let end = windows.last().unwrap().1;
    let step = bucket.seconds();
    let n = ((end - start).num_seconds() as f64 / step as f64).ceil() as usize;

    let mut values: Vec<Option<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let b0 = start + Duration::seconds(step * i as i64);
        let b1 = b0 + Duration::seconds(step);
        let collected = windows.iter().any(|&(w0, w1)| b0 < w1 && b1 > w0);
        values.push(if collected { Some(0.0) } else { None });
    }

    let mut series = VolumeSeries { bucket, start, values };
    for t in times {
        if !windows.iter().any(|&(w0, w1)| t >= w0 && t < w1) {
            continue;
        }
        if let Some(idx) = series.bucket_index(t) {
            if let Some(v) = series.values[idx].as_mut() {
                *v += 1.0;
            }
        }
    }
    series
}

/// Centered moving average: the output at `t` is the mean of samples
/// `t - w/2 ..= t + w/2 - 1`. Positions whose window includes a missing
/// value or falls off either end are missing.
pub fn moving_average(s: &VolumeSeries, window: usize) -> Result<VolumeSeries, MetricsError> {
    assert!(window > 0, "window must be positive");
    let longest_run = s
        .values
        .split(|v| v.is_none())
        .map(|run| run.len())
        .max()
        .unwrap_or(0);
    if longest_run < window {
        return Err(MetricsError::SeriesTooShort { need: window, have: longest_run });
    }

    let half = window / 2;
    let n = s.values.len();
    let mut out = vec![None; n];
    for t in 0..n {
        if t < half || t + (window - half) > n {
            continue;
        }
        let slice = &s.values[t - half..t + (window - half)];
        if slice.iter().all(|v| v.is_some()) {
            let sum: f64 = slice.iter().map(|v| v.unwrap()).sum();
            out[t] = Some(sum / window as f64);
        }
    }
    Ok(VolumeSeries { bucket: s.bucket, start: s.start, values: out })
}

/// Lagged Pearson cross-correlation of two hourly series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcfResult {
    pub lags: Vec<i64>,
    /// Correlation per lag; lags with too little overlap carry no value.
    pub r: Vec<Option<f64>>,
    pub n_overlap: Vec<usize>,
    /// Lag of maximal r; ties break toward smallest |lag|, then negative.
    pub peak_lag: i64,
    pub peak_r: f64,
}

impl CcfResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,r,n_overlap\n");
        for i in 0..self.lags.len() {
            match self.r[i] {
                Some(r) => out.push_str(&format!("{},{},{}\n", self.lags[i], r, self.n_overlap[i])),
                None => out.push_str(&format!("{},,{}\n", self.lags[i], self.n_overlap[i])),
            }
        }
        out
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation per lag: `r(l)` pairs `fake[t + l]` with `fact[t]`
/// over every hour where both are collected, so a negative peak lag means
/// the first series leads the second. Lags with fewer than `min_overlap`
/// pairs carry no value.
pub fn cross_correlation(
    fake: &VolumeSeries,
    fact: &VolumeSeries,
    max_lag: i64,
    min_overlap: usize,
) -> Result<CcfResult, MetricsError> {
    if fake.bucket != Bucket::Hour || fact.bucket != Bucket::Hour {
        return Err(MetricsError::BucketMismatch);
    }
    let offset_secs = (fake.start - fact.start).num_seconds();
    if offset_secs % 3600 != 0 {
        return Err(MetricsError::BucketMismatch);
    }
    // fact index t corresponds to fake index t + align_offset.
    let align_offset = -offset_secs / 3600;

    let mut lags = Vec::new();
    let mut rs = Vec::new();
    let mut overlaps = Vec::new();
    let mut any_overlap = false;

    for lag in -max_lag..=max_lag {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in 0..fact.values.len() as i64 {
            let fi = t + align_offset + lag;
            if fi < 0 || fi >= fake.values.len() as i64 {
                continue;
            }
            if let (Some(x), Some(y)) = (fake.values[fi as usize], fact.values[t as usize]) {
                xs.push(x);
                ys.push(y);
            }
        }
        lags.push(lag);
        overlaps.push(xs.len());
        if xs.len() < min_overlap {
            rs.push(None);
        } else {
            any_overlap = true;
            rs.push(pearson(&xs, &ys));
        }
    }

    let mut peak: Option<(f64, i64)> = None;
    for (i, r) in rs.iter().enumerate() {
        let Some(r) = *r else { continue };
        let lag = lags[i];
        peak = Some(match peak {
            None => (r, lag),
            Some((br, bl)) => {
                if r > br
                    || (r == br && (lag.abs() < bl.abs() || (lag.abs() == bl.abs() && lag < bl)))
                {
                    (r, lag)
                } else {
                    (br, bl)
                }
            }
        });
    }

    match peak {
        Some((peak_r, peak_lag)) => Ok(CcfResult { lags, r: rs, n_overlap: overlaps, peak_lag, peak_r }),
        None if any_overlap => Err(MetricsError::ZeroVariance),
        None => Err(MetricsError::InsufficientOverlap(min_overlap)),
    }
}

/// Per-user activity `a`, per-URL tweet counts `n`, per-URL distinct-user
/// counts `p`. A tweet with k matched URLs contributes 1 to its user's
/// activity and 1 to each URL's counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopularityCounts {
    pub a: HashMap<String, u64>,
    pub n: HashMap<String, u64>,
    pub p: HashMap<String, u64>,
}

pub fn popularity_counts<'a, I>(tweets: I) -> PopularityCounts
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut a: HashMap<String, u64> = HashMap::new();
    let mut n: HashMap<String, u64> = HashMap::new();
    let mut users_per_url: HashMap<String, HashSet<String>> = HashMap::new();
    for t in tweets {
        *a.entry(t.user_id.clone()).or_insert(0) += 1;
        let mut urls_in_tweet: HashSet<&str> = HashSet::new();
        for m in &t.matches {
            if urls_in_tweet.insert(&m.url.full) {
                *n.entry(m.url.full.clone()).or_insert(0) += 1;
                users_per_url
                    .entry(m.url.full.clone())
                    .or_default()
                    .insert(t.user_id.clone());
            }
        }
    }
    let p = users_per_url.into_iter().map(|(k, v)| (k, v.len() as u64)).collect();
    PopularityCounts { a, n, p }
}

/// Complementary cumulative distribution: for each distinct x ascending,
/// the fraction of values >= x. P at the smallest x is 1.
pub fn ccdf(values: &[u64]) -> Result<Vec<(u64, f64)>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let total = values.len() as f64;
    let mut freq: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *freq.entry(v).or_insert(0) += 1;
    }
    let mut remaining = values.len() as u64;
    let mut out = Vec::with_capacity(freq.len());
    for (&x, &count) in &freq {
        out.push((x, remaining as f64 / total));
        remaining -= count;
    }
    Ok(out)
}

pub fn ccdf_to_csv(points: &[(u64, f64)]) -> String {
    let mut out = String::from("x,ccdf\n");
    for (x, p) in points {
        out.push_str(&format!("{x},{p}\n"));
    }
    out
}

/// Fitted tail exponent of P(x) ~ x^-gamma above x_min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub x_min: f64,
    pub n_tail: usize,
    pub std_err: f64,
}

const MIN_TAIL: usize = 10;

fn fit_tail(values: &[f64], x_min: f64, denom_ref: f64) -> Result<PowerLawFit, MetricsError> {
    let tail: Vec<f64> = values.iter().copied().filter(|&v| v >= x_min).collect();
    if tail.len() < MIN_TAIL {
        return Err(MetricsError::TailTooSmall { n_tail: tail.len(), need: MIN_TAIL });
    }
    let log_sum: f64 = tail.iter().map(|&v| (v / denom_ref).ln()).sum();
    if log_sum <= 0.0 {
        return Err(MetricsError::DegenerateTail);
    }
    let n = tail.len() as f64;
    let gamma = 1.0 + n / log_sum;
    Ok(PowerLawFit {
        gamma,
        x_min,
        n_tail: tail.len(),
        std_err: (gamma - 1.0) / n.sqrt(),
    })
}

/// Continuous maximum-likelihood (Hill) estimate of the tail exponent:
/// gamma = 1 + n / sum(ln(x_i / x_min)) over values >= x_min.
pub fn fit_power_law(values: &[f64], x_min: f64) -> Result<PowerLawFit, MetricsError> {
    fit_tail(values, x_min, x_min)
}

/// Hill estimate for integer-valued data, with the standard half-step
/// discreteness correction: the denominator reference is x_min - 0.5.
pub fn fit_power_law_discrete(values: &[f64], x_min: f64) -> Result<PowerLawFit, MetricsError> {
    fit_tail(values, x_min, x_min - 0.5)
}

/// The ceil(fraction * |users|) most active users; ties at the boundary
/// break toward the lexicographically smaller user id.
pub fn top_active_users(
    a: &HashMap<String, u64>,
    fraction: f64,
) -> Result<HashSet<String>, MetricsError> {
    if a.is_empty() {
        return Err(MetricsError::EmptyActivity);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(MetricsError::BadFraction(fraction));
    }
    let k = (fraction * a.len() as f64).ceil() as usize;
    let mut ranked: Vec<(&String, &u64)> = a.iter().collect();
    ranked.sort_by(|(ua, ca), (ub, cb)| cb.cmp(ca).then(ua.cmp(ub)));
    Ok(ranked.into_iter().take(k).map(|(u, _)| u.clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    AllUsers,
    TopActive,
}

/// Tweet counts per type within a user population, and the ratio of
/// original tweets to retweets (undefined when there are no retweets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareBreakdown {
    pub counts: BTreeMap<String, u64>,
    pub rho: Option<f64>,
    pub population: Population,
}

impl ShareBreakdown {
    pub fn count(&self, kind: TweetType) -> u64 {
        *self.counts.get(&kind.to_string()).unwrap_or(&0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,count\n");
        for (k, v) in &self.counts {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

pub fn type_breakdown<'a, I>(
    tweets: I,
    population: Population,
    user_subset: Option<&HashSet<String>>,
) -> ShareBreakdown
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut counts: BTreeMap<String, u64> = TweetType::ALL
        .iter()
        .map(|t| (t.to_string(), 0))
        .collect();
    for t in tweets {
        if let Some(subset) = user_subset {
            if !subset.contains(&t.user_id) {
                continue;
            }
        }
        *counts.get_mut(&t.tweet_type.to_string()).unwrap() += 1;
    }
    let originals = counts[&TweetType::Original.to_string()];
    let retweets = counts[&TweetType::Retweet.to_string()];
    let rho = (retweets > 0).then(|| originals as f64 / retweets as f64);
    ShareBreakdown { counts, rho, population }
}
