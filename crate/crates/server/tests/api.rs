use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{NaiveDate, TimeZone, Utc};
use feedgram_core::metrics::{generate_report, ReportOptions};
use feedgram_core::normalize::{normalize_text, ExclusionList, TextUnit};
use feedgram_core::store::{Corpus, CorpusItem, SnapshotError, SnapshotStore};
use feedgram_server::{router, AppState, Cors, Limits, SnapshotHandle, GENERATION_HEADER};
use serde_json::Value;
use tower::ServiceExt;

fn d(n: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 4, n).unwrap()
}

const ITEMS: &[(u32, &str, &str)] = &[
    (1, "Corona: FC Bayern verzichtet", "Das Coronavirus trifft den FC hart"),
    (1, "Maskenpflicht und Masken", "Wegen Corona gilt die Maskenpflicht"),
    (2, "Neue Normalität im Alltag", "Corona und die neue Normalität"),
    (2, "Schutzmasken werden knapp", "Die Maske fehlt"),
    (3, "Corona und Schulen", "Das Coronavirus verändert den Alltag"),
];

fn corpus(extra_day: bool) -> Corpus {
    let ex = ExclusionList::default();
    let mut c = Corpus::new();
    let mut items: Vec<(u32, &str, &str)> = ITEMS.to_vec();
    if extra_day {
        items.push((4, "Corona im Herbst", "Neue Normalität bleibt"));
    }
    for (day, title, desc) in items {
        c.add_item(&CorpusItem {
            source_id: "fixture".into(),
            date: d(day),
            title: normalize_text(title, TextUnit::Title, &ex),
            description: normalize_text(desc, TextUnit::Description, &ex),
        });
    }
    c
}

fn publish(data: &Path, c: &Corpus, at: chrono::DateTime<Utc>) -> Result<u64, SnapshotError> {
    let report = generate_report(c, c.last_date().unwrap(), ReportOptions::default()).unwrap();
    SnapshotStore::new(data)
        .publish(c, &report, at, &mut |_| Ok(()))
        .map(|m| m.generation)
}

struct Fixture {
    _dir: tempfile::TempDir,
    handle: Arc<SnapshotHandle>,
    app: Router,
}

fn fixture(published: bool) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    if published {
        publish(dir.path(), &corpus(false), Utc.with_ymd_and_hms(2020, 4, 4, 3, 0, 0).unwrap()).unwrap();
    }
    let handle = Arc::new(SnapshotHandle::new(dir.path()));
    handle.refresh().unwrap();
    let app = router(
        AppState {
            snapshots: handle.clone(),
            limits: Limits::default(),
        },
        Cors::Any,
    );
    Fixture {
        _dir: dir,
        handle,
        app,
    }
}

async fn get(app: &Router, uri: &str) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let res = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let body = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, headers, body.to_vec())
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, _, body) = get(app, uri).await;
    (status, serde_json::from_slice(&body).unwrap())
}

#[tokio::test]
async fn meta_before_and_after_publish() {
    let f = fixture(false);
    let (status, body) = get_json(&f.app, "/api/v1/meta").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["error"], "not_ready");
    let (status, _) = get_json(&f.app, "/api/v1/query?patterns=corona").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    let data = f.handle.store().root().parent().unwrap().to_path_buf();
    publish(&data, &corpus(false), Utc.with_ymd_and_hms(2020, 4, 4, 3, 0, 0).unwrap()).unwrap();
    assert_eq!(f.handle.refresh().unwrap(), Some(1));
    let (status, meta) = get_json(&f.app, "/api/v1/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["first_date"], "2020-04-01");
    assert_eq!(meta["last_date"], "2020-04-03");
    assert_eq!(meta["source_count"], 1);
    let first_instant = meta["last_update_instant"].as_str().unwrap().to_string();

    publish(&data, &corpus(true), Utc.with_ymd_and_hms(2020, 4, 11, 3, 0, 0).unwrap()).unwrap();
    f.handle.refresh().unwrap();
    let (_, meta) = get_json(&f.app, "/api/v1/meta").await;
    assert_eq!(meta["generation"], 2);
    assert_eq!(meta["last_date"], "2020-04-04");
    assert!(meta["last_update_instant"].as_str().unwrap() > first_instant.as_str());
}

#[tokio::test]
async fn exact_query_returns_one_series_per_pattern() {
    let f = fixture(true);
    let (status, body) = get_json(&f.app, "/api/v1/query?patterns=fc,corona&mode=exact").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["schema_version"], 1);
    assert_eq!(body["generation"], 1);
    let series = body["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series[0]["pattern"], "fc");
    assert_eq!(series[1]["pattern"], "corona");
    let abs: Vec<u64> = series[1]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["abs"].as_u64().unwrap())
        .collect();
    assert_eq!(abs, [2, 1, 1]);
    assert!(body.get("hits").is_none());
    assert!(body["denominators"]["bigram"].as_str().unwrap().contains("bigram_total"));
}

#[tokio::test]
async fn within_query_has_hit_table() {
    let f = fixture(true);
    let (status, body) = get_json(&f.app, "/api/v1/query?patterns=maske&mode=within").await;
    assert_eq!(status, StatusCode::OK);
    let hits: Vec<(String, u64)> = body["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| (h["form"].as_str().unwrap().to_string(), h["count"].as_u64().unwrap()))
        .collect();
    assert_eq!(
        hits,
        [
            ("maskenpflicht".to_string(), 2),
            ("maske".to_string(), 1),
            ("masken".to_string(), 1),
            ("schutzmasken".to_string(), 1)
        ]
    );
}

#[tokio::test]
async fn bad_queries_are_rejected() {
    let f = fixture(true);
    for uri in [
        "/api/v1/query?patterns=corona&window=0",
        "/api/v1/query?patterns=corona&window=15",
        "/api/v1/query?patterns=corona&window=x",
        "/api/v1/query?patterns=.*,%5E%24",
        "/api/v1/query",
        "/api/v1/query?patterns=a%20b%20c",
        "/api/v1/query?patterns=corona&mode=regex",
        "/api/v1/query?patterns=corona&from=2020-04-03&to=2020-04-01",
        "/api/v1/query?patterns=corona&from=04/01/2020",
        "/api/v1/query?patterns=corona&from=2021-01-01",
    ] {
        let (status, body) = get_json(&f.app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(body["error"], "invalid_query");
    }
    let many: Vec<String> = (0..11).map(|i| format!("w{i}")).collect();
    let (status, body) = get_json(&f.app, &format!("/api/v1/query?patterns={}", many.join(","))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(body["error"], "too_many_patterns");
}

#[tokio::test]
async fn bigram_finder() {
    let f = fixture(true);
    let (status, body) = get_json(&f.app, "/api/v1/bigrams?pattern=corona&bmode=anywhere").await;
    assert_eq!(status, StatusCode::OK);
    let texts = |b: &Value| -> Vec<String> {
        b["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["bigram"].as_str().unwrap().to_string())
            .collect()
    };
    let anywhere = texts(&body);
    assert!(anywhere.contains(&"das coronavirus".to_string()));
    assert_eq!(body["results"][0]["count"], 2);

    let (_, first) = get_json(&f.app, "/api/v1/bigrams?pattern=corona&bmode=first").await;
    let (_, second) = get_json(&f.app, "/api/v1/bigrams?pattern=corona&bmode=second").await;
    let (first, second) = (texts(&first), texts(&second));
    assert!(first.contains(&"corona und".to_string()));
    assert!(second.contains(&"wegen corona".to_string()));
    assert!(first.iter().all(|b| !second.contains(b)));
    assert!(first.iter().chain(&second).all(|b| anywhere.contains(b)));

    for uri in [
        "/api/v1/bigrams?pattern=corona&bmode=middle",
        "/api/v1/bigrams?pattern=neue%20normalit%C3%A4t",
        "/api/v1/bigrams?pattern=corona&limit=-1",
        "/api/v1/bigrams",
    ] {
        let (status, _) = get_json(&f.app, uri).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
    }
    let (_, limited) = get_json(&f.app, "/api/v1/bigrams?pattern=corona&limit=1").await;
    assert_eq!(limited["results"].as_array().unwrap().len(), 1);
}

fn close(a: f64, b: f64) {
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
}

#[tokio::test]
async fn export_matches_query() {
    let f = fixture(true);
    let params = "patterns=corona,neue%20normalit%C3%A4t&mode=within&window=2";
    let (status, headers, csv) = get(&f.app, &format!("/api/v1/export.csv?{params}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "text/csv; charset=utf-8");
    assert_eq!(headers[GENERATION_HEADER], "1");
    let (_, _, again) = get(&f.app, &format!("/api/v1/export.csv?{params}")).await;
    assert_eq!(csv, again);

    let text = String::from_utf8(csv).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("date,pattern,abs,rel,smoothed"));
    assert_eq!(lines.count(), 6);

    let (_, json) = get_json(&f.app, &format!("/api/v1/query?{params}")).await;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let series = json["series"].as_array().unwrap();
    for (i, row) in reader.records().enumerate() {
        let row = row.unwrap();
        let p = &series[i % 2]["points"][i / 2];
        assert_eq!(&row[0], p["date"].as_str().unwrap());
        assert_eq!(&row[1], series[i % 2]["pattern"].as_str().unwrap());
        assert_eq!(row[2].parse::<u64>().unwrap(), p["abs"].as_u64().unwrap());
        close(row[3].parse::<f64>().unwrap(), p["rel"].as_f64().unwrap());
        match (row[4].parse::<f64>().ok(), p["smoothed"].as_f64()) {
            (Some(a), Some(b)) => close(a, b),
            (a, b) => assert_eq!(a, b),
        }
    }

    let (status, _, _) = get(&f.app, "/api/v1/export.csv?patterns=corona&window=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn downloads() {
    let f = fixture(true);
    let (status, headers, body) = get(&f.app, "/downloads/daily-unigrams-2020-04-02.tsv").await;
    assert_eq!(status, StatusCode::OK);
    assert!(headers["content-type"].to_str().unwrap().starts_with("text/tab-separated-values"));
    assert!(String::from_utf8(body).unwrap().starts_with("form\tcount\n"));
    let (status, _, body) = get(&f.app, "/downloads/metrics.csv").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.starts_with(b"date,redundancy,msttr,top100_share\n"));
    let (status, _, _) = get(&f.app, "/downloads/weekly-unigrams-2020-04-01.tsv").await;
    assert_eq!(status, StatusCode::OK);
    for missing in [
        "/downloads/daily-unigrams-2020-05-01.tsv",
        "/downloads/weekly-unigrams-2020-04-02.tsv",
        "/downloads/meta.json",
        "/downloads/..%2FCURRENT",
        "/downloads/daily-unigrams-x.tsv",
    ] {
        let (status, _, _) = get(&f.app, missing).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{missing}");
    }
}

#[tokio::test]
async fn cors_headers() {
    let f = fixture(true);
    let res = f
        .app
        .clone()
        .oneshot(
            Request::get("/api/v1/meta")
                .header("origin", "http://localhost:5173")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(res.headers()["access-control-allow-origin"], "*");
}

#[tokio::test]
async fn failed_rebuild_keeps_serving_previous_generation() {
    let f = fixture(true);
    let data = f.handle.store().root().parent().unwrap().to_path_buf();
    let c = corpus(true);
    let report = generate_report(&c, d(4), ReportOptions::default()).unwrap();
    let mut written = 0;
    let err = SnapshotStore::new(&data).publish(&c, &report, Utc::now(), &mut |_| {
        written += 1;
        if written > 5 {
            Err(SnapshotError::Aborted("simulated crash".into()))
        } else {
            Ok(())
        }
    });
    assert!(err.is_err());
    assert_eq!(f.handle.refresh().unwrap(), Some(1));
    let (status, meta) = get_json(&f.app, "/api/v1/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(meta["generation"], 1);
    assert_eq!(meta["last_date"], "2020-04-03");
}

#[tokio::test]
async fn serves_over_tcp() {
    let f = fixture(true);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = f.app.clone();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let text = reqwest::get(format!("http://{addr}/api/v1/query?patterns=corona"))
        .await
        .unwrap()
        .text()
        .await
        .unwrap();
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["series"][0]["points"].as_array().unwrap().len(), 3);
}
