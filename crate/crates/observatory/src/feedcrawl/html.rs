//! Tolerant HTML scraping: anchor targets, the rel="canonical" hint, the
//! page title, and feed autodiscovery links. Regex-based tag soup handling;
//! never fails, returns empty results on garbage.

use regex::Regex;
use std::sync::OnceLock;
use url::Url;

fn anchor_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?is)<a\b[^>]*?\bhref\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#).unwrap()
    })
}

fn link_tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<link\b[^>]*>").unwrap())
}

fn attr_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?is)\b([a-z-]+)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#).unwrap()
    })
}

fn title_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<title[^>]*>(.*?)</title>").unwrap())
}

fn resolve(base: &str, href: &str) -> Option<String> {
    let href = href.trim();
    if href.is_empty()
        || href.starts_with("javascript:")
        || href.starts_with("mailto:")
        || href.starts_with('#')
    {
        return None;
    }
    let base = Url::parse(base).ok()?;
    base.join(href).ok().map(|u| u.to_string())
}

fn link_attrs(tag: &str) -> std::collections::HashMap<String, String> {
    attr_re()
        .captures_iter(tag)
        .map(|c| {
            let key = c.get(1).map(|m| m.as_str().to_lowercase()).unwrap_or_default();
            let value = c
                .get(2)
                .or_else(|| c.get(3))
                .or_else(|| c.get(4))
                .map(|m| m.as_str().to_string())
                .unwrap_or_default();
            (key, value)
        })
        .collect()
}

/// All anchor targets resolved against `base_url`, duplicates removed
/// preserving first occurrence, plus the rel="canonical" target if present.
pub fn extract_links(body: &[u8], base_url: &str) -> (Vec<String>, Option<String>) {
    let text = String::from_utf8_lossy(body);

    let mut links = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for caps in anchor_re().captures_iter(&text) {
        let href = caps
            .get(1)
            .or_else(|| caps.get(2))
            .or_else(|| caps.get(3))
            .map(|m| m.as_str())
            .unwrap_or("");
        if let Some(resolved) = resolve(base_url, href) {
            if seen.insert(resolved.clone()) {
                links.push(resolved);
            }
        }
    }

    let mut canonical_hint = None;
    for tag in link_tag_re().find_iter(&text) {
        let attrs = link_attrs(tag.as_str());
        if attrs.get("rel").map(|r| r.eq_ignore_ascii_case("canonical")) == Some(true) {
            if let Some(href) = attrs.get("href") {
                canonical_hint = resolve(base_url, href);
                if canonical_hint.is_some() {
                    break;
                }
            }
        }
    }

    (links, canonical_hint)
}

/// First advertised RSS/Atom feed URL, resolved against `base_url`.
pub fn discover_feed(body: &[u8], base_url: &str) -> Option<String> {
    let text = String::from_utf8_lossy(body);
    for tag in link_tag_re().find_iter(&text) {
        let attrs = link_attrs(tag.as_str());
        let is_feed = attrs
            .get("type")
            .map(|t| {
                let t = t.to_lowercase();
                t == "application/rss+xml" || t == "application/atom+xml"
            })
            .unwrap_or(false);
        if is_feed {
            if let Some(href) = attrs.get("href") {
                if let Some(resolved) = resolve(base_url, href) {
                    return Some(resolved);
                }
            }
        }
    }
    None
}

/// The page title with whitespace collapsed and common entities decoded.
pub fn extract_title(body: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(body);
    let raw = title_re().captures(&text)?.get(1)?.as_str();
    let decoded = raw
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'");
    let collapsed = decoded.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        None
    } else {
        Some(collapsed)
    }
}
