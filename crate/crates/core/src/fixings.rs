//! Historical rate fixings: past EURIBOR settings for the first floating
//! coupon of seasoned swaps, and daily €STR rates compounded into the
//! realized part of an overnight-index coupon.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixingError {
    #[error("fixings file row {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("fixings file missing column `{0}`")]
    MissingColumn(String),
    #[error("failed to read fixings: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse fixings: {0}")]
    Csv(#[from] csv::Error),
}

/// Rates already determined by the market that a valuation needs as input.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixingContext {
    /// Annualized rate (decimal) fixed at the start of the running first
    /// floating period, when that start lies in the past.
    pub first_coupon_known_rate: Option<f64>,
    /// Compounded overnight growth factor from the previous payment date
    /// to the valuation date, for overnight-index legs mid-period.
    pub realized_compounding_factor: Option<f64>,
}

impl FixingContext {
    pub fn with_known_rate(rate: f64) -> Self {
        Self {
            first_coupon_known_rate: Some(rate),
            ..Self::default()
        }
    }

    pub fn with_realized_factor(factor: f64) -> Self {
        Self {
            realized_compounding_factor: Some(factor),
            ..Self::default()
        }
    }
}

/// In-memory fixing history keyed by index and tenor.
///
/// Lookups take the latest fixing on or before the requested date, so
/// weekend and holiday gaps fall back to the previous setting.
#[derive(Debug, Clone, Default)]
pub struct FixingSeries {
    /// EURIBOR settings: tenor months -> date -> annualized decimal rate.
    euribor: BTreeMap<u32, BTreeMap<NaiveDate, f64>>,
    /// Daily €STR rates: date -> annualized decimal rate.
    estr: BTreeMap<NaiveDate, f64>,
}

impl FixingSeries {
    pub fn add_euribor(&mut self, tenor_months: u32, date: NaiveDate, rate: f64) {
        self.euribor
            .entry(tenor_months)
            .or_default()
            .insert(date, rate);
    }

    pub fn add_estr(&mut self, date: NaiveDate, rate: f64) {
        self.estr.insert(date, rate);
    }

    pub fn is_empty(&self) -> bool {
        self.euribor.is_empty() && self.estr.is_empty()
    }

    /// Latest EURIBOR setting of the given tenor on or before `date`.
    pub fn euribor_on_or_before(&self, tenor_months: u32, date: NaiveDate) -> Option<f64> {
        self.euribor
            .get(&tenor_months)?
            .range(..=date)
            .next_back()
            .map(|(_, r)| *r)
    }

    /// Daily-compounded €STR growth factor over `[from, to)` using
    /// calendar-day accrual, each day at its latest available rate.
    pub fn compound_estr(&self, from: NaiveDate, to: NaiveDate) -> Option<f64> {
        if to < from {
            return None;
        }
        if to == from {
            return Some(1.0);
        }
        // A rate must exist at or before the accrual start.
        self.estr.range(..=from).next_back()?;
        let mut factor = 1.0;
        let mut day = from;
        while day < to {
            let rate = self
                .estr
                .range(..=day)
                .next_back()
                .map(|(_, r)| *r)
                .expect("checked above: a rate exists at or before `from`");
            factor *= 1.0 + rate / 365.0;
            day = day.succ_opt().expect("date range");
        }
        Some(factor)
    }
}

/// Read `fixings.csv` (`date,index,tenor_months,rate_pct`): EURIBOR rows
/// carry their tenor, ESTR rows are daily overnight rates (tenor 0).
pub fn read_fixings(path: &Path) -> Result<FixingSeries, FixingError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize, FixingError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FixingError::MissingColumn(name.to_string()))
    };
    let (c_date, c_index, c_tenor, c_rate) = (
        col("date")?,
        col("index")?,
        col("tenor_months")?,
        col("rate_pct")?,
    );

    let mut series = FixingSeries::default();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let row_err = |reason: String| FixingError::Row { line, reason };

        let date = NaiveDate::parse_from_str(field(c_date), "%Y-%m-%d")
            .map_err(|e| row_err(format!("bad date `{}`: {e}", field(c_date))))?;
        let rate_pct: f64 = field(c_rate)
            .parse()
            .map_err(|e| row_err(format!("bad rate_pct `{}`: {e}", field(c_rate))))?;
        if !rate_pct.is_finite() {
            return Err(row_err("non-finite rate".into()));
        }
        match field(c_index) {
            "EURIBOR" => {
                let tenor: u32 = field(c_tenor)
                    .parse()
                    .map_err(|e| row_err(format!("bad tenor_months `{}`: {e}", field(c_tenor))))?;
                series.add_euribor(tenor, date, rate_pct / 100.0);
            }
            "ESTR" => series.add_estr(date, rate_pct / 100.0),
            other => return Err(row_err(format!("unknown index `{other}`"))),
        }
    }
    Ok(series)
}
