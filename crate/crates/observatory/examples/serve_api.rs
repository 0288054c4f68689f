//! Stand up the read-only JSON API over a small synthetic store and query a
//! few endpoints over real HTTP.
//!
//! Run with: cargo run --example serve_api

use std::sync::{Arc, RwLock};

use chrono::{TimeZone, Utc};
use observatory::api::server::ApiServer;
use observatory::api::ApiConfig;
use observatory::store::{Category, Site, Store};
use observatory::stream::ingest;
use observatory::synth::{gen_corpus, CorpusSpec, FACT_DOMAIN, FAKE_DOMAIN};

fn main() {
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
    let corpus = gen_corpus(&CorpusSpec {
        n_users: 300,
        n_urls: 20,
        type_shares: [0.3, 0.5, 0.1, 0.1],
        activity_gamma: 2.5,
        lag_hours: 13,
        duration_hours: 24 * 21,
        seed: 5,
    })
    .unwrap();
    ingest(corpus.ndjson().as_bytes(), &mut store).unwrap();

    let config = ApiConfig {
        listen_address: "127.0.0.1:0".into(),
        ..Default::default()
    };
    let server = ApiServer::start(Arc::new(RwLock::new(store)), config).unwrap();
    let base = format!("http://{}", server.local_addr());
    println!("serving on {base}\n");

    for path in [
        "/stats?category=fake_news",
        "/breakdown?population=top&fraction=0.01",
        "/ccdf?metric=a&category=fake_news",
        "/ccf?max_lag=0", // rejected: validation error
    ] {
        let url = format!("{base}{path}");
        match ureq::get(&url).call() {
            Ok(mut response) => {
                let body = response.body_mut().read_to_string().unwrap();
                let shown: String = body.chars().take(120).collect();
                println!("GET {path}\n  200 {shown}\n");
            }
            Err(ureq::Error::StatusCode(code)) => {
                println!("GET {path}\n  {code}\n");
            }
            Err(e) => println!("GET {path}\n  transport error: {e}\n"),
        }
    }

    server.stop();
}
