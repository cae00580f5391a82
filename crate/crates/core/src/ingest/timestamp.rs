use chrono::{DateTime, FixedOffset, LocalResult, NaiveDate, NaiveDateTime, TimeZone, Utc};
use chrono_tz::Tz;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized timestamp {0:?}")]
pub struct TimestampParseError(pub String);

// Zone abbreviations seen in German-language feeds that RFC 2822 parsing
// does not know about.
const ZONE_ABBREVIATIONS: [(&str, &str); 5] = [
    ("MESZ", "+0200"),
    ("CEST", "+0200"),
    ("MEZ", "+0100"),
    ("CET", "+0100"),
    ("UTC", "+0000"),
];

const OFFSET_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f%z",
    "%Y-%m-%dT%H:%M:%S%.f%:z",
    "%Y-%m-%d %H:%M:%S%.f%z",
    "%Y-%m-%d %H:%M:%S%.f%:z",
];

const NAIVE_FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"];

fn parse_rfc2822(raw: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(dt) = DateTime::parse_from_rfc2822(raw) {
        return Some(dt);
    }
    let (head, zone) = raw.rsplit_once(' ')?;
    let offset = ZONE_ABBREVIATIONS
        .iter()
        .find(|(abbr, _)| zone.eq_ignore_ascii_case(abbr))
        .map(|(_, off)| *off)?;
    DateTime::parse_from_rfc2822(&format!("{head} {offset}")).ok()
}

fn parse_with_offset(raw: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt);
    }
    OFFSET_FORMATS
        .iter()
        .find_map(|fmt| DateTime::parse_from_str(raw, fmt).ok())
        .or_else(|| parse_rfc2822(raw))
}

/// Calendar day of a feed timestamp after conversion to `zone`.
///
/// Accepts RFC 2822 (`Wed, 15 Apr 2020 23:30:00 +0200`) and ISO 8601 /
/// RFC 3339 forms. Timestamps without an offset are read as local time in
/// `zone`; a bare date is returned as is.
pub fn normalize_timestamp(raw: &str, zone: Tz) -> Result<NaiveDate, TimestampParseError> {
    let raw = raw.trim();
    if let Some(dt) = parse_with_offset(raw) {
        return Ok(dt.with_timezone(&zone).date_naive());
    }
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return match zone.from_local_datetime(&naive) {
                LocalResult::Single(dt) | LocalResult::Ambiguous(dt, _) => Ok(dt.date_naive()),
                // Inside a spring-forward gap; the wall-clock date is still right.
                LocalResult::None => Ok(naive.date()),
            };
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| TimestampParseError(raw.to_string()))
}

/// Day bucket for an item. Falls back to the fetch instant's day (in
/// `zone`) when the published timestamp cannot be parsed, and logs it.
pub fn day_of_item(published_raw: &str, zone: Tz, fetched_at: DateTime<Utc>) -> NaiveDate {
    match normalize_timestamp(published_raw, zone) {
        Ok(day) => day,
        Err(e) => {
            let day = fetched_at.with_timezone(&zone).date_naive();
            tracing::warn!(%e, fallback = %day, "using fetch date for item");
            day
        }
    }
}
