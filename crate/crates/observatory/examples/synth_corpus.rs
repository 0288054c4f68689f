//! Generate a synthetic tweet corpus with known composition, ingest it, and
//! check the store against the generator's manifest.
//!
//! Run with: cargo run --example synth_corpus

use chrono::{TimeZone, Utc};
use observatory::store::{Category, Site, Store};
use observatory::stream::ingest;
use observatory::synth::{gen_corpus, CorpusSpec, FACT_DOMAIN, FAKE_DOMAIN};

fn main() {
    let spec = CorpusSpec {
        n_users: 500,
        n_urls: 40,
        type_shares: [0.25, 0.55, 0.05, 0.15],
        activity_gamma: 2.3,
        lag_hours: 13,
        duration_hours: 24 * 30,
        seed: 99,
    };
    let corpus = gen_corpus(&spec).unwrap();
    println!(
        "generated {} tweets from {} users ({} seeded)",
        corpus.manifest.n_tweets, corpus.manifest.activity.len(), spec.seed
    );
    println!("type counts: {:?}", corpus.manifest.type_counts);

    let tmp = tempfile::tempdir().unwrap();
    let mut store = Store::open(tmp.path()).unwrap();
    let registered_at = Utc.with_ymd_and_hms(2015, 10, 1, 0, 0, 0).unwrap();
    for (domain, category) in [
        (FAKE_DOMAIN, Category::FakeNews),
        (FACT_DOMAIN, Category::FactChecking),
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

    let report = ingest(corpus.ndjson().as_bytes(), &mut store).unwrap();
    println!("ingest: {report:?}");

    // Every generated tweet hits a monitored domain, so the store totals
    // must agree with the manifest exactly.
    let fake = store.summary_stats(Category::FakeNews);
    let fact = store.summary_stats(Category::FactChecking);
    println!("fake-news stats:     {fake:?}");
    println!("fact-checking stats: {fact:?}");
    assert_eq!(fake.n_tweets + fact.n_tweets, corpus.manifest.n_tweets);
    println!("store totals match the manifest");
}
