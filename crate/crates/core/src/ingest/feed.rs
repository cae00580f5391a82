use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::normalize::strip_markup;

#[derive(Debug, thiserror::Error)]
pub enum FeedParseError {
    #[error("malformed XML at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error("document root <{0}> is not an RSS, RDF or Atom feed")]
    NotAFeed(String),
    #[error("document is empty")]
    Empty,
    #[error("document ends before </{0}>")]
    Truncated(String),
}

/// One item or entry as it appears in the feed document. Text is
/// XML-unescaped but otherwise verbatim, including any embedded HTML.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeedEntry {
    pub title: String,
    pub description: String,
    pub link: String,
    pub published: String,
}

/// A fetched feed entry attributed to its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFeedItem {
    pub source_id: String,
    pub title: String,
    pub description: String,
    pub link: String,
    pub published_raw: String,
    pub fetched_at: DateTime<Utc>,
}

impl RawFeedItem {
    /// Returns `None` when both title and description are empty once markup
    /// is removed; such entries carry no text for the corpus.
    pub fn new(source_id: &str, entry: FeedEntry, fetched_at: DateTime<Utc>) -> Option<Self> {
        if strip_markup(&entry.title).is_empty() && strip_markup(&entry.description).is_empty() {
            return None;
        }
        Some(Self {
            source_id: source_id.to_string(),
            title: entry.title,
            description: entry.description,
            link: entry.link,
            published_raw: entry.published,
            fetched_at,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Description,
    Link,
    PubDate,
    DcDate,
    Published,
    Updated,
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).into_owned()
}

fn child_field(name: &str, atom: bool) -> Option<Field> {
    match name {
        "title" => Some(Field::Title),
        "description" if !atom => Some(Field::Description),
        "summary" if atom => Some(Field::Description),
        "link" => Some(Field::Link),
        "pubDate" => Some(Field::PubDate),
        "date" => Some(Field::DcDate),
        "published" | "issued" => Some(Field::Published),
        "updated" | "modified" => Some(Field::Updated),
        _ => None,
    }
}

fn atom_link_href(e: &BytesStart<'_>) -> Option<String> {
    let mut href = None;
    let mut alternate = true;
    for attr in e.attributes().flatten() {
        match attr.key.local_name().as_ref() {
            b"href" => href = attr.unescape_value().ok().map(|v| v.into_owned()),
            b"rel" => alternate = attr.value.as_ref() == b"alternate",
            _ => {}
        }
    }
    if alternate {
        href
    } else {
        None
    }
}

#[derive(Default)]
struct EntryBuilder {
    title: String,
    description: String,
    link: String,
    pub_date: String,
    dc_date: String,
    published: String,
    updated: String,
}

impl EntryBuilder {
    fn slot(&mut self, field: Field) -> &mut String {
        match field {
            Field::Title => &mut self.title,
            Field::Description => &mut self.description,
            Field::Link => &mut self.link,
            Field::PubDate => &mut self.pub_date,
            Field::DcDate => &mut self.dc_date,
            Field::Published => &mut self.published,
            Field::Updated => &mut self.updated,
        }
    }

    fn finish(self) -> FeedEntry {
        let published = [self.pub_date, self.dc_date, self.published, self.updated]
            .into_iter()
            .map(|s| s.trim().to_string())
            .find(|s| !s.is_empty())
            .unwrap_or_default();
        FeedEntry {
            title: self.title,
            description: self.description,
            link: self.link.trim().to_string(),
            published,
        }
    }
}

fn xml_error(reader: &Reader<&[u8]>, message: impl ToString) -> FeedParseError {
    FeedParseError::Xml {
        position: reader.error_position(),
        message: message.to_string(),
    }
}

/// Parses an RSS 2.0, RSS 1.0 (RDF) or Atom document into its entries, in
/// document order.
pub fn parse_feed(xml: &str) -> Result<Vec<FeedEntry>, FeedParseError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().check_end_names = true;

    let mut entries = Vec::new();
    let mut root: Option<String> = None;
    let mut atom = false;
    let mut depth = 0usize;
    // Depth at which the current <item>/<entry> was opened.
    let mut item_depth: Option<usize> = None;
    let mut current = EntryBuilder::default();
    // Field currently being captured and the depth of its element.
    let mut capture: Option<(Field, usize)> = None;

    loop {
        let event = reader.read_event().map_err(|e| xml_error(&reader, e))?;
        match event {
            Event::Start(e) => {
                depth += 1;
                let name = local_name(&e);
                if root.is_none() {
                    match name.as_str() {
                        "rss" | "RDF" => {}
                        "feed" => atom = true,
                        _ => return Err(FeedParseError::NotAFeed(name)),
                    }
                    root = Some(name);
                    continue;
                }
                if capture.is_some() {
                    continue;
                }
                match item_depth {
                    None if name == "item" || name == "entry" => {
                        item_depth = Some(depth);
                        current = EntryBuilder::default();
                    }
                    Some(d) if depth == d + 1 => {
                        if let Some(field) = child_field(&name, atom) {
                            if field == Field::Link && atom {
                                if current.link.is_empty() {
                                    if let Some(href) = atom_link_href(&e) {
                                        current.link = href;
                                    }
                                }
                            } else {
                                capture = Some((field, depth));
                            }
                        }
                    }
                    _ => {}
                }
            }
            Event::Empty(e) => {
                if root.is_none() {
                    return Err(FeedParseError::NotAFeed(local_name(&e)));
                }
                if let (Some(d), None) = (item_depth, capture) {
                    if depth == d && atom && local_name(&e) == "link" && current.link.is_empty() {
                        if let Some(href) = atom_link_href(&e) {
                            current.link = href;
                        }
                    }
                }
            }
            Event::End(_) => {
                if let Some((_, d)) = capture {
                    if d == depth {
                        capture = None;
                    }
                }
                if item_depth == Some(depth) {
                    entries.push(std::mem::take(&mut current).finish());
                    item_depth = None;
                }
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    // Anything after the root element is ignored.
                    break;
                }
            }
            Event::Text(t) => {
                if let Some((field, _)) = capture {
                    let text = t.decode().map_err(|e| xml_error(&reader, e))?;
                    current.slot(field).push_str(&text);
                }
            }
            Event::CData(t) => {
                if let Some((field, _)) = capture {
                    let text = t.decode().map_err(|e| xml_error(&reader, e))?;
                    current.slot(field).push_str(&text);
                }
            }
            Event::GeneralRef(r) => {
                if let Some((field, _)) = capture {
                    let resolved = resolve_reference(&r).map_err(|e| xml_error(&reader, e))?;
                    current.slot(field).push_str(&resolved);
                }
            }
            Event::Eof => {
                return match root {
                    None => Err(FeedParseError::Empty),
                    Some(r) => Err(FeedParseError::Truncated(r)),
                };
            }
            _ => {}
        }
    }
    Ok(entries)
}

// Predefined XML entities and character references are resolved here.
// Anything else (HTML entities such as `&nbsp;`, which feeds use even though
// XML does not define them) is passed through as `&name;` so that the
// markup stripper can decode it later.
fn resolve_reference(r: &quick_xml::events::BytesRef<'_>) -> Result<String, quick_xml::Error> {
    if let Some(c) = r.resolve_char_ref()? {
        return Ok(c.to_string());
    }
    let name = r.decode().map_err(quick_xml::Error::Encoding)?;
    Ok(match name.as_ref() {
        "amp" => "&".to_string(),
        "lt" => "<".to_string(),
        "gt" => ">".to_string(),
        "quot" => "\"".to_string(),
        "apos" => "'".to_string(),
        other => format!("&{other};"),
    })
}
