//! RSS 2.0 / Atom 1.0 subset parser.
//!
//! Recognized structure: `rss > channel > item {title, link, pubDate, guid}`
//! and `feed > entry {title, link[@href], updated, id}`. Missing optional
//! fields stay absent.

use chrono::{DateTime, Utc};
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeedParseError {
    #[error("malformed feed xml: {0}")]
    Malformed(String),
    #[error("unrecognized feed root element {0:?}")]
    UnrecognizedRoot(String),
    #[error("feed body is not xml")]
    NotXml,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedItem {
    pub title: String,
    pub link: String,
    pub published_at: Option<DateTime<Utc>>,
    pub updated_at: Option<DateTime<Utc>>,
    pub guid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FeedKind {
    Rss,
    Atom,
}

pub fn parse_feed(body: &[u8]) -> Result<Vec<FeedItem>, FeedParseError> {
    let mut reader = Reader::from_reader(body);
    reader.config_mut().trim_text(true);

    let mut kind: Option<FeedKind> = None;
    let mut items = Vec::new();
    let mut in_item = false;
    let mut current_field: Option<String> = None;
    let mut text_buf = String::new();

    let mut title = String::new();
    let mut link = String::new();
    let mut published_at = None;
    let mut updated_at = None;
    let mut guid = None;

    let mut buf = Vec::new();
    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| match kind {
                None => FeedParseError::NotXml,
                Some(_) => FeedParseError::Malformed(e.to_string()),
            })?;
        match event {
            Event::Start(e) | Event::Empty(e) => {
                let name = e.local_name().as_ref().to_string();
                if kind.is_none() {
                    kind = Some(match name.as_str() {
                        "rss" => FeedKind::Rss,
                        "feed" => FeedKind::Atom,
                        other => return Err(FeedParseError::UnrecognizedRoot(other.to_string())),
                    });
                    buf.clear();
                    continue;
                }
                let item_tag = match kind {
                    Some(FeedKind::Rss) => "item",
                    Some(FeedKind::Atom) => "entry",
                    None => unreachable!(),
                };
                if name == item_tag {
                    in_item = true;
                    title.clear();
                    link.clear();
                    published_at = None;
                    updated_at = None;
                    guid = None;
                } else if in_item {
                    if kind == Some(FeedKind::Atom) && name == "link" {
                        // Prefer rel="alternate" (or no rel); first hit wins.
                        let mut href = None;
                        let mut rel_ok = true;
                        for attr in e.attributes().flatten() {
                            let key = attr.key.local_name().as_ref().to_string();
                            let value = attr.value.to_string();
                            match key.as_str() {
                                "href" => href = Some(value),
                                "rel" => rel_ok = value == "alternate",
                                _ => {}
                            }
                        }
                        if rel_ok && link.is_empty() {
                            if let Some(h) = href {
                                link = h;
                            }
                        }
                    }
                    current_field = Some(name);
                    text_buf.clear();
                }
            }
            Event::Text(t) => {
                if current_field.is_some() {
                    text_buf.push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if current_field.is_some() {
                    text_buf.push_str(t.as_ref());
                }
            }
            Event::End(e) => {
                let name = e.local_name().as_ref().to_string();
                let item_tag = match kind {
                    Some(FeedKind::Rss) => "item",
                    Some(FeedKind::Atom) => "entry",
                    None => "",
                };
                if name == item_tag && in_item {
                    in_item = false;
                    if !link.is_empty() {
                        items.push(FeedItem {
                            title: title.clone(),
                            link: link.clone(),
                            published_at,
                            updated_at,
                            guid: guid.clone(),
                        });
                    }
                } else if in_item {
                    let text = text_buf.trim().to_string();
                    match (kind, name.as_str()) {
                        (_, "title") => title = text,
                        (Some(FeedKind::Rss), "link") => link = text,
                        (Some(FeedKind::Rss), "pubDate") => {
                            published_at = DateTime::parse_from_rfc2822(&text)
                                .ok()
                                .map(|d| d.with_timezone(&Utc));
                        }
                        (Some(FeedKind::Rss), "guid") => guid = Some(text),
                        (Some(FeedKind::Atom), "updated") => {
                            updated_at = DateTime::parse_from_rfc3339(&text)
                                .ok()
                                .map(|d| d.with_timezone(&Utc));
                        }
                        (Some(FeedKind::Atom), "id") => guid = Some(text),
                        _ => {}
                    }
                    current_field = None;
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if kind.is_none() {
        return Err(FeedParseError::NotXml);
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RSS: &str = r#"<?xml version="1.0"?>
<rss version="2.0"><channel>
<title>Feed</title>
<item><title>First</title><link>http://s.com/1</link><pubDate>Wed, 14 Oct 2015 10:00:00 GMT</pubDate><guid>g1</guid></item>
<item><title>Second</title><link>http://s.com/2</link></item>
<item><title>Third</title><link>http://s.com/3</link></item>
</channel></rss>"#;

    #[test]
    fn rss_items_in_document_order() {
        let items = parse_feed(RSS.as_bytes()).unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0].title, "First");
        assert_eq!(items[2].link, "http://s.com/3");
        assert!(items[0].published_at.is_some());
        assert_eq!(items[0].guid.as_deref(), Some("g1"));
        assert!(items[1].published_at.is_none());
    }

    #[test]
    fn atom_entry_with_updated_only() {
        let atom = r#"<?xml version="1.0"?>
<feed xmlns="http://www.w3.org/2005/Atom">
<entry><title>A</title><link href="http://s.com/a"/><updated>2015-10-14T10:00:00Z</updated><id>urn:a</id></entry>
</feed>"#;
        let items = parse_feed(atom.as_bytes()).unwrap();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].link, "http://s.com/a");
        assert!(items[0].published_at.is_none());
        assert!(items[0].updated_at.is_some());
    }

    #[test]
    fn non_xml_is_rejected() {
        assert!(parse_feed(b"not xml").is_err());
    }

    #[test]
    fn unknown_root_is_rejected() {
        let err = parse_feed(b"<html><body/></html>").unwrap_err();
        assert!(matches!(err, FeedParseError::UnrecognizedRoot(_)));
    }
}
