//! Command-line surface: site registration, crawling, ingestion, analysis
//! runs, and the API server. Mutations are CLI-only; the HTTP surface stays
//! read-only.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::{server, ApiConfig, PopularityMetric, DEFAULT_MIN_OVERLAP};
use crate::feedcrawl::{
    self, CrawlConfig, Fetcher, HttpFetcher, SystemClock,
};
use crate::metrics::{ccdf_to_csv, Population};
use crate::store::{Category, Site, Store};
use crate::stream;
use crate::urlnorm;

#[derive(Parser)]
#[command(name = "observatory", version, about = "Track news sharing and fact checking on social media")]
struct Cli {
    /// Directory holding the store journals.
    #[arg(long, global = true, default_value = "observatory-data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manage monitored sites.
    Sites {
        #[command(subcommand)]
        command: SitesCommand,
    },
    /// Crawl a monitored site.
    Crawl {
        #[command(subcommand)]
        command: CrawlCommand,
    },
    /// Ingest an NDJSON tweet stream.
    Ingest {
        /// Tweet source: a file path, or `-` for standard input.
        #[arg(long)]
        tweets: String,
        /// Optional site registration file (one JSON object per line).
        #[arg(long)]
        sites: Option<PathBuf>,
    },
    /// Run an analysis and write its result to a file.
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
    /// Serve the read-only JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8040")]
        listen: String,
    },
}

#[derive(Subcommand)]
enum SitesCommand {
    /// Register a site, or a whole file of sites.
    Add(SitesAdd),
    /// Print every registered site as JSON lines.
    List,
}

#[derive(Args)]
struct SitesAdd {
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    domain: Option<String>,
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    category: Option<Category>,
    #[arg(long)]
    rss_url: Option<String>,
    /// Registration file: one {"domain", "category", "rss_url"?} per line.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CrawlCommand {
    /// One-time depth-first crawl of the site's link structure.
    Deep {
        #[arg(long)]
        domain: String,
        /// Re-crawl even if a deep crawl already ran.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = 10)]
        max_depth: u32,
        #[arg(long, default_value_t = 10_000)]
        max_pages: usize,
    },
    /// Single feed check of the site's RSS/Atom feed.
    Light {
        #[arg(long)]
        domain: String,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Lagged cross-correlation between fake-news and fact-checking volume.
    Ccf {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 48)]
        max_lag: i64,
        #[arg(long, default_value_t = DEFAULT_MIN_OVERLAP)]
        min_overlap: usize,
    },
    /// Complementary cumulative distribution of a popularity metric.
    Ccdf {
        /// a = tweets per user, n = tweets per URL, p = users per URL.
        #[arg(long)]
        metric: PopularityMetric,
        #[arg(long)]
        category: Category,
        #[arg(long, default_value_t = 1)]
        x_min: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tweet-type counts and original/retweet ratio.
    Breakdown {
        #[arg(long, default_value = "all")]
        population: String,
        #[arg(long, default_value_t = 0.01)]
        fraction: f64,
        #[arg(long)]
        category: Option<Category>,
        #[arg(long)]
        out: PathBuf,
    },
}

impl clap::builder::ValueParserFactory for PopularityMetric {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<PopularityMetric>())
    }
}

impl clap::builder::ValueParserFactory for Category {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Category>())
    }
}

#[derive(Deserialize)]
struct SiteLine {
    domain: String,
    category: Category,
    #[serde(default)]
    rss_url: Option<String>,
}

fn open_store(data_dir: &Path) -> Result<Store, String> {
    Store::open(data_dir.join("store")).map_err(|e| e.to_string())
}

fn register_site(store: &mut Store, line: SiteLine) -> Result<(), String> {
    let canon = urlnorm::canonicalize(&line.domain).map_err(|e| e.to_string())?;
    store
        .put_site(Site {
            domain: canon.host,
            category: line.category,
            rss_url: line.rss_url,
            registered_at: Utc::now(),
            deep_crawled_at: None,
        })
        .map_err(|e| e.to_string())?;
    Ok(())
}

fn register_sites_file(store: &mut Store, path: &Path) -> Result<usize, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut n = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SiteLine = serde_json::from_str(&line).map_err(|e| e.to_string())?;
        register_site(store, parsed)?;
        n += 1;
    }
    Ok(n)
}

fn run_command(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Sites { command: SitesCommand::Add(add) } => {
            let mut store = open_store(&cli.data_dir)?;
            match add.file {
                Some(path) => {
                    let n = register_sites_file(&mut store, &path)?;
                    println!("registered {n} sites");
                }
                None => {
                    register_site(
                        &mut store,
                        SiteLine {
                            domain: add.domain.expect("enforced by clap"),
                            category: add.category.expect("enforced by clap"),
                            rss_url: add.rss_url,
                        },
                    )?;
                    println!("registered 1 site");
                }
            }
            Ok(())
        }
        Command::Sites { command: SitesCommand::List } => {
            let store = open_store(&cli.data_dir)?;
            for site in store.sites() {
                println!("{}", serde_json::to_string(site).map_err(|e| e.to_string())?);
            }
            Ok(())
        }
        Command::Crawl { command: CrawlCommand::Deep { domain, force, max_depth, max_pages } } => {
            let mut store = open_store(&cli.data_dir)?;
            let mut site = store
                .get_site(&domain)
                .cloned()
                .ok_or_else(|| format!("site {domain} is not registered"))?;
            if site.deep_crawled_at.is_some() && !force {
                return Err(format!("site {domain} already deep-crawled; use --force"));
            }
            let fetcher = HttpFetcher::new();
            let clock = SystemClock;
            let config = CrawlConfig { max_depth, max_pages, ..Default::default() };

            // Feed autodiscovery happens at registration time, from the root page.
            if site.rss_url.is_none() {
                if let Ok(root) = fetcher.fetch(&format!("http://{domain}/")) {
                    site.rss_url = feedcrawl::discover_feed(&root.body, &root.url);
                }
            }

            let result = feedcrawl::deep_crawl(&site, &fetcher, &clock, &config)
                .map_err(|e| e.to_string())?;
            for article in &result.articles {
                store.put_article(article.clone()).map_err(|e| e.to_string())?;
            }
            site.deep_crawled_at = Some(Utc::now());
            store.put_site(site).map_err(|e| e.to_string())?;
            println!(
                "crawled {} articles ({} fetch failures)",
                result.articles.len(),
                result.failures.len()
            );
            Ok(())
        }
        Command::Crawl { command: CrawlCommand::Light { domain } } => {
            let mut store = open_store(&cli.data_dir)?;
            let site = store
                .get_site(&domain)
                .cloned()
                .ok_or_else(|| format!("site {domain} is not registered"))?;
            let new = feedcrawl::light_crawl(
                &site,
                &HttpFetcher::new(),
                &mut store,
                &SystemClock,
                &CrawlConfig::default(),
            )
            .map_err(|e| e.to_string())?;
            println!("{} new or updated articles", new.len());
            Ok(())
        }
        Command::Ingest { tweets, sites } => {
            let mut store = open_store(&cli.data_dir)?;
            if let Some(path) = sites {
                register_sites_file(&mut store, &path)?;
            }
            let report = if tweets == "-" {
                let stdin = std::io::stdin();
                stream::ingest(stdin.lock(), &mut store).map_err(|e| e.to_string())?
            } else {
                let file =
                    File::open(&tweets).map_err(|e| format!("{tweets}: {e}"))?;
                stream::ingest(BufReader::new(file), &mut store).map_err(|e| e.to_string())?
            };
            println!(
                "read {} accepted {} dropped {} malformed {} new {}",
                report.read,
                report.accepted,
                report.dropped_no_match,
                report.rejected_malformed,
                report.newly_stored
            );
            Ok(())
        }
        Command::Analyze { command } => {
            let store = open_store(&cli.data_dir)?;
            match command {
                AnalyzeCommand::Ccf { out, max_lag, min_overlap } => {
                    let result = super::ccf_analysis(&store, max_lag, min_overlap, 24)
                        .map_err(|e| e.to_string())?;
                    write_out(&out, &result.to_csv())?;
                    println!("peak lag {} h (r = {:.4})", result.peak_lag, result.peak_r);
                }
                AnalyzeCommand::Ccdf { metric, category, x_min, out } => {
                    let points = super::ccdf_analysis(&store, metric, category, x_min)
                        .map_err(|e| e.to_string())?;
                    write_out(&out, &ccdf_to_csv(&points))?;
                    println!("{} distinct values", points.len());
                }
                AnalyzeCommand::Breakdown { population, fraction, category, out } => {
                    let population = match population.as_str() {
                        "all" => Population::AllUsers,
                        "top" => Population::TopActive,
                        other => return Err(format!("population must be all or top, got {other:?}")),
                    };
                    let b = super::breakdown_analysis(&store, category, population, fraction)
                        .map_err(|e| e.to_string())?;
                    write_out(&out, &format!("{}\n", serde_json::to_string_pretty(&b).unwrap()))?;
                    match b.rho {
                        Some(rho) => println!("rho = {rho:.4}"),
                        None => println!("rho undefined (no retweets)"),
                    }
                }
            }
            Ok(())
        }
        Command::Serve { listen } => {
            let config = ApiConfig {
                listen_address: listen,
                data_dir: cli.data_dir,
                ..Default::default()
            };
            server::serve(config).map_err(|e| e.to_string())
        }
    }
}

fn write_out(path: &Path, content: &str) -> Result<(), String> {
    let mut f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(content.as_bytes()).map_err(|e| e.to_string())
}

/// Entry point for the binary. Exit codes: 0 success, 1 usage error,
/// 2 runtime failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            }
        }
    };
    match run_command(cli) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
