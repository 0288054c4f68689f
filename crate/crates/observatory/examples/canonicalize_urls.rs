//! Reduce a batch of messy URLs to canonical form and show how domain and
//! keyword matching behave on the results.
//!
//! Run with: cargo run --example canonicalize_urls

use observatory::urlnorm::{canonicalize, keyword_match, matches_site};

fn main() {
    let urls = [
        "http://WWW.Snopes.com/2016/01/14/Alan-Rickman-Dies-At-69/?utm=x",
        "https://m.example.com/story#section-2",
        "www.m.www.example.com/a/b/",
        "en.mediamass.net/people/alan-rickman/deathhoax.html",
        "https://snopes.com/alan-rickman-potter-meme/",
    ];

    println!("{:<70} {}", "input", "canonical");
    for url in urls {
        match canonicalize(url) {
            Ok(c) => println!("{url:<70} {c}"),
            Err(e) => println!("{url:<70} rejected: {e}"),
        }
    }

    // The first and last URL resolve to the same site; subdomains count too.
    let rickman = canonicalize(urls[3]).unwrap();
    println!();
    println!(
        "{:?} belongs to mediamass.net: {}",
        rickman.full,
        matches_site(&rickman, "mediamass.net")
    );
    println!(
        "{:?} belongs to ediamass.net: {}",
        rickman.full,
        matches_site(&rickman, "ediamass.net")
    );

    // Keyword search uses AND semantics over the canonical form.
    let keywords = ["alan", "rickman"];
    for url in urls {
        if let Ok(c) = canonicalize(url) {
            if keyword_match(&c, &keywords).unwrap() {
                println!("matches {keywords:?}: {c}");
            }
        }
    }
}
