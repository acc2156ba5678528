//! Reconciliation of reported contract values against model values.
//!
//! Pairs of (reported, model) per trade and date feed four diagnostics:
//! a robust regression slope of reported on model (Huber M-estimation,
//! fit by iteratively reweighted least squares), per-date percentiles of
//! the absolute error, the same statistics on week-over-week value
//! changes, and the aggregate portfolio level and change series. Errors in
//! fitting value changes are the sharper diagnostic: a constant per-trade
//! reporting bias shifts the level series apart but leaves the change
//! series identical.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::SwapTrade;
use crate::pricer::TradeValuation;

/// Default absolute-error threshold flagging an outlier pair, EUR.
pub const DEFAULT_OUTLIER_THRESHOLD_EUR: f64 = 25_000_000.0;

/// Huber tuning constant: 95% efficiency under normal errors.
pub const HUBER_TUNING: f64 = 1.345;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("need at least {needed} pairs for a robust slope, got {got}")]
    InsufficientPairs { needed: usize, got: usize },
    #[error("regressor is degenerate (zero variance in model values)")]
    DegenerateRegressor,
}

/// One reconciled trade-date observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconciliationPair {
    pub trade_id: String,
    pub date: NaiveDate,
    pub reported: f64,
    pub model: f64,
    pub abs_error: f64,
    pub outlier: bool,
}

/// Week-over-week value changes of one trade.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePair {
    pub trade_id: String,
    /// Later of the two consecutive dates.
    pub date: NaiveDate,
    pub delta_reported: f64,
    pub delta_model: f64,
}

/// Pairs plus counters for observations that could not be paired.
#[derive(Debug, Default)]
pub struct PairBuildOutcome {
    pub pairs: Vec<ReconciliationPair>,
    pub excluded_missing_reported: usize,
    pub excluded_matured: usize,
}

/// Inner-join valuations with reported values, index-aligned with their
/// trades. Trades without a reported value are excluded and counted, as
/// are matured trades.
pub fn build_pairs(
    trades: &[SwapTrade],
    valuations: &[TradeValuation],
    outlier_threshold: f64,
) -> PairBuildOutcome {
    assert_eq!(trades.len(), valuations.len(), "index-aligned inputs");
    let mut outcome = PairBuildOutcome::default();
    for (trade, valuation) in trades.iter().zip(valuations) {
        if valuation.matured {
            outcome.excluded_matured += 1;
            continue;
        }
        let Some(reported) = trade.reported_value else {
            outcome.excluded_missing_reported += 1;
            continue;
        };
        let abs_error = (reported - valuation.model_value).abs();
        outcome.pairs.push(ReconciliationPair {
            trade_id: trade.trade_id.clone(),
            date: trade.valuation_date,
            reported,
            model: valuation.model_value,
            abs_error,
            outlier: abs_error >= outlier_threshold,
        });
    }
    outcome.pairs.sort_by(|a, b| {
        (a.date, a.trade_id.as_str()).cmp(&(b.date, b.trade_id.as_str()))
    });
    outcome
}

/// Huber M-estimation slope of `y` on `x` with intercept, fit by
/// iteratively reweighted least squares. The residual scale is the median
/// absolute deviation rescaled for normal consistency; iteration stops
/// when the slope moves less than 1e-10 or after 100 rounds.
pub fn huber_slope(x: &[f64], y: &[f64]) -> Result<f64, QualityError> {
    const MIN_PAIRS: usize = 10;
    const MAX_ITER: usize = 100;
    const TOL: f64 = 1e-10;

    if x.len() < MIN_PAIRS || x.len() != y.len() {
        return Err(QualityError::InsufficientPairs {
            needed: MIN_PAIRS,
            got: x.len().min(y.len()),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    if x.iter().all(|v| (v - mean_x).abs() < f64::EPSILON * mean_x.abs().max(1.0)) {
        return Err(QualityError::DegenerateRegressor);
    }

    let weighted_fit = |weights: &[f64]| -> Option<(f64, f64)> {
        let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((xi, yi), wi) in x.iter().zip(y).zip(weights) {
            sw += wi;
            swx += wi * xi;
            swy += wi * yi;
            swxx += wi * xi * xi;
            swxy += wi * xi * yi;
        }
        let denom = sw * swxx - swx * swx;
        if denom.abs() <= 0.0 {
            return None;
        }
        let slope = (sw * swxy - swx * swy) / denom;
        let intercept = (swy - slope * swx) / sw;
        Some((intercept, slope))
    };

    let mut weights = vec![1.0; x.len()];
    let (mut intercept, mut slope) =
        weighted_fit(&weights).ok_or(QualityError::DegenerateRegressor)?;

    for _ in 0..MAX_ITER {
        let residuals: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| yi - intercept - slope * xi)
            .collect();
        let center = median(&residuals);
        let deviations: Vec<f64> = residuals.iter().map(|r| (r - center).abs()).collect();
        let scale = median(&deviations) / 0.6745;
        if scale <= 0.0 {
            // Residuals are (numerically) all equal: perfect linear fit.
            break;
        }
        for (w, r) in weights.iter_mut().zip(&residuals) {
            let u = (r / scale).abs();
            *w = if u <= HUBER_TUNING {
                1.0
            } else {
                HUBER_TUNING / u
            };
        }
        let (new_intercept, new_slope) =
            weighted_fit(&weights).ok_or(QualityError::DegenerateRegressor)?;
        let converged = (new_slope - slope).abs() < TOL;
        intercept = new_intercept;
        slope = new_slope;
        if converged {
            break;
        }
    }
    Ok(slope)
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Robust slope of reported on model values.
pub fn robust_slope(pairs: &[ReconciliationPair]) -> Result<f64, QualityError> {
    let x: Vec<f64> = pairs.iter().map(|p| p.model).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.reported).collect();
    huber_slope(&x, &y)
}

/// Robust slope of reported changes on model changes.
pub fn robust_slope_changes(changes: &[ChangePair]) -> Result<f64, QualityError> {
    let x: Vec<f64> = changes.iter().map(|p| p.delta_model).collect();
    let y: Vec<f64> = changes.iter().map(|p| p.delta_reported).collect();
    huber_slope(&x, &y)
}

/// (p25, p50, p75) under the linear-interpolation (type-7) definition.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let at = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if lo + 1 < sorted.len() {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[lo]
        }
    };
    Some((at(0.25), at(0.50), at(0.75)))
}

/// Per-date quartiles of the absolute level error.
pub fn error_percentiles(
    pairs: &[ReconciliationPair],
) -> BTreeMap<NaiveDate, (f64, f64, f64)> {
    let mut by_date: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for p in pairs {
        by_date.entry(p.date).or_default().push(p.abs_error);
    }
    by_date
        .into_iter()
        .map(|(date, errs)| (date, quartiles(&errs).expect("non-empty group")))
        .collect()
}

/// Per-date quartiles of the absolute change error.
pub fn change_error_percentiles(
    changes: &[ChangePair],
) -> BTreeMap<NaiveDate, (f64, f64, f64)> {
    let mut by_date: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for c in changes {
        by_date
            .entry(c.date)
            .or_default()
            .push((c.delta_reported - c.delta_model).abs());
    }
    by_date
        .into_iter()
        .map(|(date, errs)| (date, quartiles(&errs).expect("non-empty group")))
        .collect()
}

/// Week-over-week changes per trade across consecutive sampling dates.
///
/// The weekly grid is the ordered set of distinct dates present in the
/// pair set; a change pair forms only when a trade has observations on two
/// adjacent grid dates, so gaps produce no pair.
pub fn weekly_change_pairs(pairs: &[ReconciliationPair]) -> Vec<ChangePair> {
    let grid: BTreeMap<NaiveDate, usize> = {
        let mut dates: Vec<NaiveDate> = pairs.iter().map(|p| p.date).collect();
        dates.sort_unstable();
        dates.dedup();
        dates.into_iter().enumerate().map(|(i, d)| (d, i)).collect()
    };

    let mut by_trade: BTreeMap<&str, Vec<&ReconciliationPair>> = BTreeMap::new();
    for p in pairs {
        by_trade.entry(p.trade_id.as_str()).or_default().push(p);
    }

    let mut changes = Vec::new();
    for (_, mut series) in by_trade {
        series.sort_by_key(|p| p.date);
        for w in series.windows(2) {
            let (prev, next) = (w[0], w[1]);
            if grid[&next.date] == grid[&prev.date] + 1 {
                changes.push(ChangePair {
                    trade_id: next.trade_id.clone(),
                    date: next.date,
                    delta_reported: next.reported - prev.reported,
                    delta_model: next.model - prev.model,
                });
            }
        }
    }
    changes.sort_by(|a, b| (a.date, a.trade_id.as_str()).cmp(&(b.date, b.trade_id.as_str())));
    changes
}

/// Aggregate portfolio series: per-date sums of reported and model values
/// plus their first differences across consecutive dates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PortfolioFitSeries {
    /// (date, reported sum, model sum), ascending by date.
    pub levels: Vec<(NaiveDate, f64, f64)>,
    /// (date, change in reported sum, change in model sum).
    pub changes: Vec<(NaiveDate, f64, f64)>,
}

pub fn portfolio_fit_series(pairs: &[ReconciliationPair]) -> PortfolioFitSeries {
    let mut grouped: BTreeMap<NaiveDate, Vec<&ReconciliationPair>> = BTreeMap::new();
    for p in pairs {
        grouped.entry(p.date).or_default().push(p);
    }
    let mut levels = Vec::with_capacity(grouped.len());
    for (date, mut group) in grouped {
        group.sort_by(|a, b| a.trade_id.cmp(&b.trade_id));
        let reported: f64 = group.iter().map(|p| p.reported).sum();
        let model: f64 = group.iter().map(|p| p.model).sum();
        levels.push((date, reported, model));
    }
    let changes = levels
        .windows(2)
        .map(|w| (w[1].0, w[1].1 - w[0].1, w[1].2 - w[0].2))
        .collect();
    PortfolioFitSeries { levels, changes }
}

/// Serializable per-date quartile row.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DateQuartiles {
    pub date: String,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
}

/// Serializable per-date portfolio point.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PortfolioPoint {
    pub date: String,
    pub reported: f64,
    pub model: f64,
}

/// Full reconciliation report, serialized as `quality_report.json`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct QualityReport {
    pub n_pairs: usize,
    pub n_excluded_missing_reported: usize,
    pub n_excluded_matured: usize,
    pub n_outliers: usize,
    pub outlier_threshold_eur: f64,
    pub slope_levels: Option<f64>,
    pub slope_changes: Option<f64>,
    pub level_error_percentiles: Vec<DateQuartiles>,
    pub change_error_percentiles: Vec<DateQuartiles>,
    pub portfolio_levels: Vec<PortfolioPoint>,
    pub portfolio_changes: Vec<PortfolioPoint>,
}

fn quartile_rows(map: BTreeMap<NaiveDate, (f64, f64, f64)>) -> Vec<DateQuartiles> {
    map.into_iter()
        .map(|(date, (p25, p50, p75))| DateQuartiles {
            date: date.to_string(),
            p25,
            p50,
            p75,
        })
        .collect()
}

/// Assemble the full quality report from aligned trades and valuations.
/// Slopes are reported as `null` when too few pairs exist or the
/// regressor is degenerate.
pub fn quality_report(
    trades: &[SwapTrade],
    valuations: &[TradeValuation],
    outlier_threshold: f64,
) -> QualityReport {
    let outcome = build_pairs(trades, valuations, outlier_threshold);
    let pairs = &outcome.pairs;
    let changes = weekly_change_pairs(pairs);
    let fit = portfolio_fit_series(pairs);

    QualityReport {
        n_pairs: pairs.len(),
        n_excluded_missing_reported: outcome.excluded_missing_reported,
        n_excluded_matured: outcome.excluded_matured,
        n_outliers: pairs.iter().filter(|p| p.outlier).count(),
        outlier_threshold_eur: outlier_threshold,
        slope_levels: robust_slope(pairs).ok(),
        slope_changes: robust_slope_changes(&changes).ok(),
        level_error_percentiles: quartile_rows(error_percentiles(pairs)),
        change_error_percentiles: quartile_rows(change_error_percentiles(&changes)),
        portfolio_levels: fit
            .levels
            .iter()
            .map(|(d, r, m)| PortfolioPoint {
                date: d.to_string(),
                reported: *r,
                model: *m,
            })
            .collect(),
        portfolio_changes: fit
            .changes
            .iter()
            .map(|(d, r, m)| PortfolioPoint {
                date: d.to_string(),
                reported: *r,
                model: *m,
            })
            .collect(),
    }
}
