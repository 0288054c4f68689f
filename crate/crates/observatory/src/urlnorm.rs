//! URL canonicalization and domain/keyword matching.
//!
//! Every URL entering the system is reduced to a canonical form so that
//! scheme, `www.`/`m.` prefixes, query parameters, fragments, and trailing
//! slashes never split the share counts of a single page.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UrlNormError {
    #[error("malformed url {0:?}: no host component")]
    MalformedUrl(String),
    #[error("keyword list is empty")]
    EmptyKeywordList,
}

/// Canonical identity of a web page.
///
/// `full` carries no scheme, query, or fragment and is entirely lowercase;
/// `host` never starts with `www.` or `m.`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalUrl {
    pub full: String,
    pub host: String,
    pub path: String,
}

impl std::fmt::Display for CanonicalUrl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.full)
    }
}

/// Reduce a URL to canonical form.
///
/// Steps, in order: lowercase; strip the scheme through `://`; iteratively
/// strip leading `www.` and `m.` from the host; drop the fragment and the
/// query string; drop trailing `/` on the path.
pub fn canonicalize(url: &str) -> Result<CanonicalUrl, UrlNormError> {
    let lower = url.trim().to_lowercase();

    let rest = match lower.find("://") {
        Some(idx) => &lower[idx + 3..],
        None => lower.as_str(),
    };

    // Fragment first: everything after '#' is gone, including any '?' in it.
    let rest = rest.split('#').next().unwrap_or("");
    let rest = rest.split('?').next().unwrap_or("");

    let (host, path) = match rest.find('/') {
        Some(idx) => (&rest[..idx], &rest[idx..]),
        None => (rest, ""),
    };

    let mut host = host;
    loop {
        if let Some(stripped) = host.strip_prefix("www.") {
            host = stripped;
        } else if let Some(stripped) = host.strip_prefix("m.") {
            host = stripped;
        } else {
            break;
        }
    }

    if host.is_empty() {
        return Err(UrlNormError::MalformedUrl(url.to_string()));
    }

    let path = path.trim_end_matches('/');

    Ok(CanonicalUrl {
        full: format!("{host}{path}"),
        host: host.to_string(),
        path: path.to_string(),
    })
}

/// True iff the URL's host is the site domain or one of its subdomains.
///
/// `site_domain` must itself be canonical (lowercase, no scheme). A port,
/// when present, is part of the host and must match verbatim.
pub fn matches_site(u: &CanonicalUrl, site_domain: &str) -> bool {
    u.host == site_domain || u.host.ends_with(&format!(".{site_domain}"))
}

/// True iff every keyword occurs as a substring of the canonical form.
pub fn keyword_match<S: AsRef<str>>(
    u: &CanonicalUrl,
    keywords: &[S],
) -> Result<bool, UrlNormError> {
    if keywords.is_empty() {
        return Err(UrlNormError::EmptyKeywordList);
    }
    Ok(keywords.iter().all(|k| u.full.contains(k.as_ref())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_prefix_query_and_trailing_slash() {
        let u = canonicalize("http://WWW.Snopes.com/2016/01/14/Alan-Rickman-Dies-At-69/?utm=x")
            .unwrap();
        assert_eq!(u.full, "snopes.com/2016/01/14/alan-rickman-dies-at-69");
        assert_eq!(u.host, "snopes.com");
    }

    #[test]
    fn bare_domain_is_a_noop() {
        let u = canonicalize("example.com").unwrap();
        assert_eq!(u.full, "example.com");
        assert_eq!(u.path, "");
    }

    #[test]
    fn iterative_prefix_strip_and_fragment_drop() {
        let u = canonicalize("https://m.www.Example.com/a#sec?x").unwrap();
        assert_eq!(u.full, "example.com/a");
    }

    #[test]
    fn empty_host_is_malformed() {
        assert!(matches!(
            canonicalize("http://?q=1"),
            Err(UrlNormError::MalformedUrl(_))
        ));
    }

    #[test]
    fn root_slash_drops() {
        assert_eq!(canonicalize("http://example.com/").unwrap().full, "example.com");
    }

    #[test]
    fn subdomain_matches_site() {
        let u = canonicalize("age-69.beforeitsnews.com/x").unwrap();
        assert!(matches_site(&u, "beforeitsnews.com"));
    }

    #[test]
    fn exact_host_matches_site() {
        let u = canonicalize("snopes.com").unwrap();
        assert!(matches_site(&u, "snopes.com"));
    }

    #[test]
    fn suffix_without_dot_boundary_does_not_match() {
        let u = canonicalize("notsnopes.com").unwrap();
        assert!(!matches_site(&u, "snopes.com"));
    }

    #[test]
    fn keyword_and_semantics() {
        let u = canonicalize("snopes.com/2016/01/14/alan-rickman-dies-at-69").unwrap();
        assert!(keyword_match(&u, &["alan", "rickman"]).unwrap());
        let single = canonicalize("snopes.com/alan-rickman-potter-meme").unwrap();
        assert!(keyword_match(&single, &["rickman"]).unwrap());
        let other = canonicalize("infowars.com/white-house").unwrap();
        assert!(!keyword_match(&other, &["alan", "rickman"]).unwrap());
    }

    #[test]
    fn empty_keywords_rejected() {
        let u = canonicalize("snopes.com").unwrap();
        assert_eq!(
            keyword_match(&u, &[] as &[&str]),
            Err(UrlNormError::EmptyKeywordList)
        );
    }

    fn url_shaped() -> impl Strategy<Value = String> {
        // Scheme, host labels, path segments, optional query/fragment noise.
        (
            prop::option::of(prop_oneof!["http", "https", "HTTP", "ftp"].prop_map(String::from)),
            prop::collection::vec("[a-zA-Z0-9-]{1,8}", 1..4),
            prop::collection::vec("[a-zA-Z0-9._~-]{0,10}", 0..4),
            prop::option::of("[a-zA-Z0-9=&%]{0,12}"),
            prop::option::of("[a-zA-Z0-9=&%]{0,12}"),
        )
            .prop_map(|(scheme, labels, segs, query, frag)| {
                let mut s = String::new();
                if let Some(sch) = scheme {
                    s.push_str(&sch);
                    s.push_str("://");
                }
                s.push_str(&labels.join("."));
                for seg in &segs {
                    s.push('/');
                    s.push_str(seg);
                }
                if let Some(q) = query {
                    s.push('?');
                    s.push_str(&q);
                }
                if let Some(f) = frag {
                    s.push('#');
                    s.push_str(&f);
                }
                s
            })
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(url in url_shaped()) {
            if let Ok(c) = canonicalize(&url) {
                let again = canonicalize(&c.full).unwrap();
                prop_assert_eq!(&again, &c);
            }
        }

        #[test]
        fn canonicalize_is_case_insensitive(url in url_shaped()) {
            let upper = url.to_uppercase();
            match (canonicalize(&url), canonicalize(&upper)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "case changed outcome: {:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn query_and_fragment_are_erased(url in url_shaped(), suffix in "[a-zA-Z0-9=&]{0,10}", is_frag in any::<bool>()) {
            if let Ok(base) = canonicalize(&url) {
                let sep = if is_frag { '#' } else { '?' };
                let noisy = format!("{url}{sep}{suffix}");
                prop_assert_eq!(canonicalize(&noisy).unwrap(), base);
            }
        }

        #[test]
        fn site_matching_respects_dot_boundaries(
            sub in "[a-z0-9-]{1,8}",
            domain in "[a-z0-9-]{1,8}\\.[a-z]{2,4}",
        ) {
            // Site domains are stored canonical, so reduce the raw draw first.
            let domain = canonicalize(&domain).unwrap().host;
            let exact = canonicalize(&domain).unwrap();
            prop_assert!(matches_site(&exact, &domain));

            let subbed = canonicalize(&format!("{sub}.{domain}")).unwrap();
            prop_assert!(matches_site(&subbed, &domain));

            // Gluing without a dot must never match.
            let glued = canonicalize(&format!("{sub}{domain}")).unwrap();
            if glued.host != domain {
                prop_assert!(!matches_site(&glued, &domain));
            }
        }
    }
}
