//! Daily vocabulary-diversity measures, the corpus-size trend, and the
//! weekly analysis report built from them.

mod diversity;
mod report;
mod trend;

pub use diversity::{
    diversity_record, entropy, msttr, redundancy, redundancy_of, top_k_share, top_k_share_of,
    DiversityRecord, MetricError, DEFAULT_MSTTR_SEGMENT, DEFAULT_TOP_K,
};
pub use report::{
    generate_report, metrics_csv, ReportBundle, ReportError, ReportOptions, METRICS_CSV_HEADER,
    METRICS_FILE, REPORT_FILE,
};
pub use trend::{fit_linear_trend, fit_ols, weekly_mean, TrendError, TrendFit};
