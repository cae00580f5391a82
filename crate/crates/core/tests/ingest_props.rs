use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, FixedOffset, TimeZone, Utc};
use chrono_tz::Europe::Berlin;
use chrono_tz::Tz;
use feedgram_core::ingest::{dedupe, normalize_timestamp, FeedSource, Harvester, KeyStore, RawFeedItem};
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap()
}

fn item_strategy() -> impl Strategy<Value = RawFeedItem> {
    ("[ab]", "[xyz ]{0,4}", "[xyz<>]{0,4}", "[12]").prop_map(|(source, title, description, link)| RawFeedItem {
        source_id: source,
        title,
        description,
        link: format!("https://example.org/{link}"),
        published_raw: String::new(),
        fetched_at: Utc.with_ymd_and_hms(2020, 4, 1, 0, 0, 0).unwrap(),
    })
}

fn source(id: &str, file: &str) -> FeedSource {
    FeedSource {
        id: id.to_string(),
        name: id.to_string(),
        url: url::Url::from_file_path(fixtures().join("feeds").join(file)).unwrap(),
        country: String::new(),
        notes: String::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingesting_n_times_equals_once(items in proptest::collection::vec(item_strategy(), 0..30), n in 1usize..5) {
        let mut once = KeyStore::new();
        let accepted = dedupe(items.clone(), &mut once);
        let mut many = KeyStore::new();
        let mut total = Vec::new();
        for _ in 0..n {
            total.extend(dedupe(items.clone(), &mut many));
        }
        prop_assert_eq!(total, accepted);
        prop_assert_eq!(many.len(), once.len());
    }

    #[test]
    fn day_bucketing_is_pure(secs in 1_500_000_000i64..1_700_000_000, offset_min in -720i32..=840) {
        let offset = FixedOffset::east_opt(offset_min * 60).unwrap();
        let at: DateTime<FixedOffset> = offset.timestamp_opt(secs, 0).unwrap();
        for raw in [at.to_rfc2822(), at.to_rfc3339()] {
            for zone in [Berlin, Tz::UTC, Tz::America__New_York] {
                let first = normalize_timestamp(&raw, zone).unwrap();
                prop_assert_eq!(normalize_timestamp(&raw, zone).unwrap(), first);
                prop_assert_eq!(first, at.with_timezone(&zone).date_naive());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn failing_sources_are_counted(fails in proptest::collection::vec(any::<bool>(), 1..6)) {
        let good = ["tagesblatt.xml", "rundschau.atom", "kurier.rdf", "nachtrag.xml"];
        let sources: Vec<FeedSource> = fails
            .iter()
            .enumerate()
            .map(|(i, fail)| {
                let id = format!("s{i}");
                match (fail, i % 2) {
                    (true, 0) => source(&id, "kaputt.xml"),
                    (true, _) => source(&id, "missing.xml"),
                    (false, _) => source(&id, good[i % good.len()]),
                }
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let mut h = Harvester::new(dir.path(), sources, Berlin, Duration::from_secs(5)).unwrap();
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        let report = runtime
            .block_on(h.run_cycle(Utc.with_ymd_and_hms(2020, 4, 10, 0, 0, 0).unwrap()))
            .unwrap();
        let j = fails.iter().filter(|f| **f).count();
        prop_assert_eq!(report.failures(), j);
        let ok = report.outcomes.iter().filter(|o| o.error.is_none()).count();
        prop_assert_eq!(ok, fails.len() - j);
        for (o, fail) in report.outcomes.iter().zip(&fails) {
            prop_assert_eq!(o.error.is_some(), *fail);
        }
        prop_assert_eq!(report.all_failed(), j == fails.len());
    }
}
