use std::collections::BTreeMap;

use chrono::NaiveDate;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::store::export::week_index;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrendError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("all x values are equal")]
    DegenerateFit,
}

/// Ordinary least squares fit of a daily size on the day offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit {
    /// Change per day.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// `None` for a perfect non-flat fit, where `slope / 0` has no meaning.
    pub t_stat: Option<f64>,
    /// Two-sided, from the t distribution with `n - 2` degrees of freedom.
    pub p_value: Option<f64>,
    pub n: usize,
}

impl TrendFit {
    /// Residuals are all zero.
    pub fn is_perfect(&self) -> bool {
        self.slope_se == 0.0
    }
}

/// Fits `y = intercept + slope * x` by least squares.
///
/// When every residual is zero the standard error is 0. A flat perfect fit
/// (constant series) reports `t = 0, p = 1`; a sloped perfect fit reports
/// neither.
pub fn fit_ols(points: &[(f64, f64)]) -> Result<TrendFit, TrendError> {
    let n = points.len();
    if n < 3 {
        return Err(TrendError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TrendError::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let df = nf - 2.0;
    let slope_se = (sse / df / sxx).sqrt();

    let (t_stat, p_value) = if slope_se > 0.0 {
        let t = slope / slope_se;
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
        (Some(t), Some(p))
    } else if slope == 0.0 {
        (Some(0.0), Some(1.0))
    } else {
        (None, None)
    };
    Ok(TrendFit {
        slope,
        intercept,
        slope_se,
        t_stat,
        p_value,
        n,
    })
}

/// Daily size against days elapsed since the first date in the series.
pub fn fit_linear_trend(series: &[(NaiveDate, f64)]) -> Result<TrendFit, TrendError> {
    let Some(first) = series.iter().map(|p| p.0).min() else {
        return Err(TrendError::TooFewPoints(0));
    };
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|(d, y)| ((*d - first).num_days() as f64, *y))
        .collect();
    fit_ols(&points)
}

/// Mean value per week, weeks numbered from 1 starting at `corpus_start`.
/// Partial weeks average over the days present.
pub fn weekly_mean(series: &[(NaiveDate, f64)], corpus_start: NaiveDate) -> Vec<(i64, f64)> {
    let mut weeks: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for (day, value) in series {
        let entry = weeks.entry(week_index(*day, corpus_start)).or_default();
        entry.0 += value;
        entry.1 += 1;
    }
    weeks
        .into_iter()
        .map(|(w, (sum, n))| (w, sum / n as f64))
        .collect()
}
