use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;

use super::diversity::{diversity_record, DiversityRecord, MetricError, DEFAULT_MSTTR_SEGMENT};
use super::trend::{fit_linear_trend, weekly_mean, TrendError, TrendFit};
use crate::store::{
    export_frequency_lists, monthly_summary, Corpus, CorpusSummary, FrequencyList, Granularity,
    NgramKind,
};

pub const METRICS_CSV_HEADER: &str = "date,redundancy,msttr,top100_share";
pub const METRICS_FILE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "report.html";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("corpus has no tokens up to {0}")]
    EmptyCorpus(NaiveDate),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub msttr_segment: usize,
    /// Day 1 of week 1; defaults to the first corpus day.
    pub corpus_start: Option<NaiveDate>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            msttr_segment: DEFAULT_MSTTR_SEGMENT,
            corpus_start: None,
        }
    }
}

/// Everything the weekly analysis publishes.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub as_of: NaiveDate,
    pub msttr_segment: usize,
    pub records: Vec<DiversityRecord>,
    /// Days inside the corpus span without any tokens.
    pub empty_days: Vec<NaiveDate>,
    pub trend: Result<TrendFit, TrendError>,
    pub weekly_sizes: Vec<(i64, f64)>,
    pub summary: CorpusSummary,
    pub daily_lists: Vec<FrequencyList>,
    pub weekly_lists: Vec<FrequencyList>,
    pub metrics_csv: String,
    pub html: String,
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

pub fn metrics_csv(records: &[DiversityRecord]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for r in records {
        let msttr = r.msttr.map(fmt6).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.date,
            fmt6(r.redundancy),
            msttr,
            fmt6(r.top100_share)
        );
    }
    out
}

/// Builds the report over all corpus days up to and including `as_of`.
pub fn generate_report(
    corpus: &Corpus,
    as_of: NaiveDate,
    options: ReportOptions,
) -> Result<ReportBundle, ReportError> {
    let corpus = corpus.until(as_of);
    let (Some(first), Some(last)) = (corpus.first_date(), corpus.last_date()) else {
        return Err(ReportError::EmptyCorpus(as_of));
    };
    if corpus.is_empty() {
        return Err(ReportError::EmptyCorpus(as_of));
    }
    let start = options.corpus_start.unwrap_or(first);

    let mut records = Vec::new();
    let mut empty_days = Vec::new();
    for t in corpus.tables() {
        if t.is_empty() {
            empty_days.push(t.date());
        } else {
            records.push(diversity_record(t, options.msttr_segment)?);
        }
    }
    let sizes: Vec<(NaiveDate, f64)> = corpus
        .tables()
        .filter(|t| !t.is_empty())
        .map(|t| (t.date(), t.token_total() as f64))
        .collect();
    let trend = fit_linear_trend(&sizes);
    let weekly_sizes = weekly_mean(&sizes, start);
    let summary = monthly_summary(&corpus).map_err(|_| ReportError::EmptyCorpus(as_of))?;
    let lists = |g| {
        export_frequency_lists(&corpus, first, last, g, NgramKind::Unigram, start)
            .expect("non-empty corpus has days")
    };
    let daily_lists = lists(Granularity::Daily);
    let weekly_lists = lists(Granularity::Weekly);
    let metrics_csv = metrics_csv(&records);

    let mut bundle = ReportBundle {
        as_of,
        msttr_segment: options.msttr_segment,
        records,
        empty_days,
        trend,
        weekly_sizes,
        summary,
        daily_lists,
        weekly_lists,
        metrics_csv,
        html: String::new(),
    };
    bundle.html = render_html(&bundle, &sizes, start);
    Ok(bundle)
}

impl ReportBundle {
    /// Writes `metrics.csv`, `report.html`, and every daily and weekly
    /// unigram list into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(METRICS_FILE), &self.metrics_csv)?;
        std::fs::write(dir.join(REPORT_FILE), &self.html)?;
        for list in self.daily_lists.iter().chain(&self.weekly_lists) {
            std::fs::write(dir.join(&list.file_name), &list.body)?;
        }
        Ok(())
    }
}

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 220.0;
const PAD: f64 = 40.0;

struct Chart<'a> {
    title: &'a str,
    points: Vec<(NaiveDate, f64)>,
    // Straight segments drawn over the series: (x0, y0, x1, y1).
    overlays: Vec<(NaiveDate, f64, NaiveDate, f64)>,
}

fn render_chart(chart: &Chart<'_>, from: NaiveDate, to: NaiveDate) -> String {
    let span = (to - from).num_days().max(1) as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in chart
        .points
        .iter()
        .map(|p| p.1)
        .chain(chart.overlays.iter().flat_map(|o| [o.1, o.3]))
    {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return String::new();
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let x = |d: NaiveDate| PAD + (d - from).num_days() as f64 / span * (CHART_W - 2.0 * PAD);
    let y = |v: f64| CHART_H - PAD - (v - lo) / (hi - lo) * (CHART_H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<figure><figcaption>{}</figcaption><svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" viewBox=\"0 0 {CHART_W} {CHART_H}\">",
        html_escape::encode_text(chart.title)
    );
    let _ = write!(
        svg,
        "<line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#888\"/><line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"#888\"/>",
        b = CHART_H - PAD,
        r = CHART_W - PAD
    );
    let _ = write!(
        svg,
        "<text x=\"4\" y=\"{:.1}\" font-size=\"10\">{}</text><text x=\"4\" y=\"{:.1}\" font-size=\"10\">{}</text>",
        y(hi) + 4.0,
        fmt_axis(hi),
        y(lo) + 4.0,
        fmt_axis(lo)
    );
    let _ = write!(
        svg,
        "<text x=\"{PAD}\" y=\"{:.1}\" font-size=\"10\">{from}</text><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{to}</text>",
        CHART_H - PAD + 14.0,
        CHART_W - PAD,
        CHART_H - PAD + 14.0
    );
    let path: Vec<String> = chart
        .points
        .iter()
        .map(|(d, v)| format!("{:.1},{:.1}", x(*d), y(*v)))
        .collect();
    let _ = write!(
        svg,
        "<polyline fill=\"none\" stroke=\"#1f5f99\" stroke-width=\"1.5\" points=\"{}\"/>",
        path.join(" ")
    );
    for (d, v) in &chart.points {
        let _ = write!(svg, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2\" fill=\"#1f5f99\"/>", x(*d), y(*v));
    }
    for (d0, v0, d1, v1) in &chart.overlays {
        let _ = write!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999\" stroke-width=\"1.5\"/>",
            x(*d0),
            y(*v0),
            x(*d1),
            y(*v1)
        );
    }
    svg.push_str("</svg></figure>\n");
    svg
}

fn fmt_axis(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn render_html(bundle: &ReportBundle, sizes: &[(NaiveDate, f64)], start: NaiveDate) -> String {
    let from = bundle
        .records
        .first()
        .map(|r| r.date)
        .unwrap_or(bundle.as_of);
    let to = bundle.records.last().map(|r| r.date).unwrap_or(bundle.as_of);

    let mut html = String::new();
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>Vocabulary diversity up to {as_of}</title>\
<style>body{{font-family:sans-serif;max-width:760px;margin:2em auto}}table{{border-collapse:collapse}}td,th{{padding:2px 8px;text-align:right}}</style>\
</head><body>\n<h1>Vocabulary diversity</h1>\n<p>Data up to {as_of}. Week 1 starts on {start}. MSTTR segment length: {seg} tokens.</p>\n",
        as_of = bundle.as_of,
        seg = bundle.msttr_segment
    );

    html.push_str("<h2>Corpus size</h2>\n<table><tr><th>Month</th><th>Tokens</th><th>Share</th><th>Types</th></tr>\n");
    for row in &bundle.summary.rows {
        let _ = writeln!(
            html,
            "<tr><td>{}</td><td>{}</td><td>{:.1} %</td><td>{}</td></tr>",
            row.period,
            row.tokens,
            row.share * 100.0,
            row.types
        );
    }
    html.push_str("</table>\n");

    let mut overlays = Vec::new();
    if let Ok(fit) = &bundle.trend {
        let at = |d: NaiveDate| fit.intercept + fit.slope * (d - from).num_days() as f64;
        overlays.push((from, at(from), to, at(to)));
    }
    for (week, mean) in &bundle.weekly_sizes {
        let w0 = crate::store::export::week_start(*week, start).max(from);
        let w1 = (crate::store::export::week_start(*week + 1, start) - chrono::Duration::days(1)).min(to);
        overlays.push((w0, *mean, w1, *mean));
    }
    html.push_str(&render_chart(
        &Chart {
            title: "Tokens per day, linear trend and weekly means",
            points: sizes.to_vec(),
            overlays,
        },
        from,
        to,
    ));
    match &bundle.trend {
        Ok(fit) => {
            let opt = |v: Option<f64>, prec: usize| v.map_or("n/a".to_string(), |v| format!("{v:.prec$}"));
            let _ = writeln!(
                html,
                "<p>Linear trend of daily size: slope = {:.2} tokens/day, SE = {:.2}, t = {}, p = {}, n = {}.</p>",
                fit.slope,
                fit.slope_se,
                opt(fit.t_stat, 3),
                opt(fit.p_value, 3),
                fit.n
            );
        }
        Err(e) => {
            let _ = writeln!(html, "<p>Linear trend not available: {e}.</p>");
        }
    }

    html.push_str("<h2>Daily measures</h2>\n");
    let series = |f: &dyn Fn(&DiversityRecord) -> Option<f64>| -> Vec<(NaiveDate, f64)> {
        bundle
            .records
            .iter()
            .filter_map(|r| f(r).map(|v| (r.date, v)))
            .collect()
    };
    for (title, points) in [
        ("Redundancy", series(&|r| Some(r.redundancy))),
        ("MSTTR", series(&|r| r.msttr)),
        ("Top-100 token share", series(&|r| Some(r.top100_share))),
    ] {
        html.push_str(&render_chart(
            &Chart {
                title,
                points,
                overlays: Vec::new(),
            },
            from,
            to,
        ));
    }
    let short: Vec<String> = bundle
        .records
        .iter()
        .filter(|r| r.msttr.is_none())
        .map(|r| r.date.to_string())
        .collect();
    if !short.is_empty() {
        let _ = writeln!(
            html,
            "<p>Days shorter than one MSTTR segment (no MSTTR value): {}.</p>",
            short.join(", ")
        );
    }
    if !bundle.empty_days.is_empty() {
        let days: Vec<String> = bundle.empty_days.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(html, "<p>Days without data (not in {METRICS_FILE}): {}.</p>", days.join(", "));
    }

    html.push_str("<h2>Downloads</h2>\n<ul>\n");
    let _ = writeln!(html, "<li><a href=\"{METRICS_FILE}\">{METRICS_FILE}</a> (daily measures)</li>");
    for list in &bundle.weekly_lists {
        let _ = writeln!(html, "<li><a href=\"{0}\">{0}</a></li>", list.file_name);
    }
    html.push_str("</ul>\n</body></html>\n");
    html
}
