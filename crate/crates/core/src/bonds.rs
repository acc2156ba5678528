//! Delta-gamma profit-and-loss for fixed-rate bond holdings.
//!
//! Bond sensitivities follow a partial-revaluation approach: the PnL of a
//! holding under a parallel yield shift `s` is
//!
//! ```text
//! PnL = FV · (-D·s + 0.5·C·s²)
//! ```
//!
//! with modified duration `D` and convexity `C` taken from market data.
//! Holdings missing either measure borrow the fair-value-weighted average
//! of observed holdings in the same (date, maturity bucket, security type)
//! cell, falling back to the same-bucket average across security types;
//! holdings that still lack a measure are excluded from PnL with a flag,
//! never silently zeroed.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BondError {
    #[error("negative residual maturity {0}")]
    NegativeMaturity(i64),
    #[error("holding {isin} on {date}: duration/convexity unavailable even after filling")]
    Unfilled { isin: String, date: NaiveDate },
    #[error("holdings file row {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("holdings file missing column `{0}`")]
    MissingColumn(String),
    #[error("failed to read holdings: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse holdings: {0}")]
    Csv(#[from] csv::Error),
}

/// Security type used for bucket-average cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SecurityType {
    Ordinary,
    Securitization,
    Covered,
}

impl SecurityType {
    pub fn as_str(self) -> &'static str {
        match self {
            SecurityType::Ordinary => "ORDINARY",
            SecurityType::Securitization => "SECURITIZATION",
            SecurityType::Covered => "COVERED",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "ORDINARY" => Some(SecurityType::Ordinary),
            "SECURITIZATION" => Some(SecurityType::Securitization),
            "COVERED" => Some(SecurityType::Covered),
            _ => None,
        }
    }
}

/// Accounting classification of a holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Accounting {
    /// Amortised cost.
    Ac,
    /// Fair value.
    Fv,
}

impl Accounting {
    pub fn as_str(self) -> &'static str {
        match self {
            Accounting::Ac => "AC",
            Accounting::Fv => "FV",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "AC" => Some(Accounting::Ac),
            "FV" => Some(Accounting::Fv),
            _ => None,
        }
    }
}

/// Residual-maturity bucket of a bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MaturityBucket {
    Below1Y,
    From1To3Y,
    From3To5Y,
    From5To7Y,
    From7To10Y,
    From10To20Y,
    Above20Y,
}

impl MaturityBucket {
    pub const ALL: [MaturityBucket; 7] = [
        MaturityBucket::Below1Y,
        MaturityBucket::From1To3Y,
        MaturityBucket::From3To5Y,
        MaturityBucket::From5To7Y,
        MaturityBucket::From7To10Y,
        MaturityBucket::From10To20Y,
        MaturityBucket::Above20Y,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaturityBucket::Below1Y => "below 1Y",
            MaturityBucket::From1To3Y => "1Y-3Y",
            MaturityBucket::From3To5Y => "3Y-5Y",
            MaturityBucket::From5To7Y => "5Y-7Y",
            MaturityBucket::From7To10Y => "7Y-10Y",
            MaturityBucket::From10To20Y => "10Y-20Y",
            MaturityBucket::Above20Y => "above 20Y",
        }
    }
}

/// Bucket for a residual maturity in months. Half-open intervals: a
/// boundary month belongs to the longer bucket.
pub fn assign_bucket(residual_maturity_months: i64) -> Result<MaturityBucket, BondError> {
    if residual_maturity_months < 0 {
        return Err(BondError::NegativeMaturity(residual_maturity_months));
    }
    Ok(match residual_maturity_months {
        0..=11 => MaturityBucket::Below1Y,
        12..=35 => MaturityBucket::From1To3Y,
        36..=59 => MaturityBucket::From3To5Y,
        60..=83 => MaturityBucket::From5To7Y,
        84..=119 => MaturityBucket::From7To10Y,
        120..=239 => MaturityBucket::From10To20Y,
        _ => MaturityBucket::Above20Y,
    })
}

/// One ISIN-level bond position of one bank on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct BondHolding {
    pub isin: String,
    pub bank: String,
    pub date: NaiveDate,
    /// Fair value in EUR, strictly positive.
    pub fair_value: f64,
    pub modified_duration: Option<f64>,
    pub convexity: Option<f64>,
    pub residual_maturity_months: u32,
    pub security_type: SecurityType,
    pub accounting: Accounting,
}

impl BondHolding {
    pub fn bucket(&self) -> MaturityBucket {
        assign_bucket(self.residual_maturity_months as i64).expect("non-negative maturity")
    }
}

/// Fair-value-weighted average duration and convexity of the observed
/// holdings in one (date, bucket, security type) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketAverage {
    pub date: NaiveDate,
    pub bucket: MaturityBucket,
    pub security_type: SecurityType,
    pub avg_duration: Option<f64>,
    pub avg_convexity: Option<f64>,
    /// Summed fair value behind the duration average.
    pub weight_base: f64,
}

#[derive(Default)]
struct WeightedCell {
    duration_weighted: f64,
    duration_weight: f64,
    convexity_weighted: f64,
    convexity_weight: f64,
}

impl WeightedCell {
    fn add(&mut self, holding: &BondHolding) {
        if let Some(d) = holding.modified_duration {
            self.duration_weighted += d * holding.fair_value;
            self.duration_weight += holding.fair_value;
        }
        if let Some(c) = holding.convexity {
            self.convexity_weighted += c * holding.fair_value;
            self.convexity_weight += holding.fair_value;
        }
    }

    fn avg_duration(&self) -> Option<f64> {
        (self.duration_weight > 0.0).then(|| self.duration_weighted / self.duration_weight)
    }

    fn avg_convexity(&self) -> Option<f64> {
        (self.convexity_weight > 0.0).then(|| self.convexity_weighted / self.convexity_weight)
    }
}

/// Cell averages across all banks for one trading date.
pub fn bucket_averages(holdings: &[BondHolding]) -> Vec<BucketAverage> {
    let mut cells: BTreeMap<(NaiveDate, MaturityBucket, SecurityType), WeightedCell> =
        BTreeMap::new();
    for h in holdings {
        cells
            .entry((h.date, h.bucket(), h.security_type))
            .or_default()
            .add(h);
    }
    cells
        .into_iter()
        .map(|((date, bucket, security_type), cell)| BucketAverage {
            date,
            bucket,
            security_type,
            avg_duration: cell.avg_duration(),
            avg_convexity: cell.avg_convexity(),
            weight_base: cell.duration_weight,
        })
        .collect()
}

/// Fill missing duration/convexity from cell averages; observed values are
/// untouched. Returns the filled holdings and the keys of holdings still
/// missing a measure after both fallbacks.
pub fn fill_missing_risk_measures(
    holdings: Vec<BondHolding>,
) -> (Vec<BondHolding>, Vec<(String, NaiveDate)>) {
    let mut typed: BTreeMap<(NaiveDate, MaturityBucket, SecurityType), WeightedCell> =
        BTreeMap::new();
    let mut untyped: BTreeMap<(NaiveDate, MaturityBucket), WeightedCell> = BTreeMap::new();
    for h in &holdings {
        typed
            .entry((h.date, h.bucket(), h.security_type))
            .or_default()
            .add(h);
        untyped.entry((h.date, h.bucket())).or_default().add(h);
    }

    let mut unfilled = Vec::new();
    let filled: Vec<BondHolding> = holdings
        .into_iter()
        .map(|mut h| {
            let cell = typed.get(&(h.date, h.bucket(), h.security_type));
            let fallback = untyped.get(&(h.date, h.bucket()));
            if h.modified_duration.is_none() {
                h.modified_duration = cell
                    .and_then(WeightedCell::avg_duration)
                    .or_else(|| fallback.and_then(WeightedCell::avg_duration));
            }
            if h.convexity.is_none() {
                h.convexity = cell
                    .and_then(WeightedCell::avg_convexity)
                    .or_else(|| fallback.and_then(WeightedCell::avg_convexity));
            }
            if h.modified_duration.is_none() || h.convexity.is_none() {
                unfilled.push((h.isin.clone(), h.date));
            }
            h
        })
        .collect();
    (filled, unfilled)
}

/// Delta-gamma PnL of one holding under a parallel yield shift (decimal).
pub fn bond_pnl(holding: &BondHolding, shift: f64) -> Result<f64, BondError> {
    let (Some(duration), Some(convexity)) = (holding.modified_duration, holding.convexity) else {
        return Err(BondError::Unfilled {
            isin: holding.isin.clone(),
            date: holding.date,
        });
    };
    Ok(holding.fair_value * (-duration * shift + 0.5 * convexity * shift * shift))
}

/// Read `holdings.csv`. Strict: malformed rows abort with their line.
pub fn read_holdings(path: &Path) -> Result<Vec<BondHolding>, BondError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize, BondError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| BondError::MissingColumn(name.to_string()))
    };
    let c_date = col("date")?;
    let c_bank = col("bank")?;
    let c_isin = col("isin")?;
    let c_fv = col("fair_value")?;
    let c_dur = col("modified_duration")?;
    let c_cx = col("convexity")?;
    let c_mat = col("residual_maturity_months")?;
    let c_type = col("security_type")?;
    let c_acc = col("accounting")?;

    let mut holdings = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let row_err = |reason: String| BondError::Row { line, reason };

        let date = NaiveDate::parse_from_str(field(c_date), "%Y-%m-%d")
            .map_err(|e| row_err(format!("bad date `{}`: {e}", field(c_date))))?;
        let fair_value: f64 = field(c_fv)
            .parse()
            .map_err(|e| row_err(format!("bad fair_value `{}`: {e}", field(c_fv))))?;
        if !(fair_value.is_finite() && fair_value > 0.0) {
            return Err(row_err(format!("fair_value must be positive, got {fair_value}")));
        }
        let opt_measure = |i: usize, name: &str| -> Result<Option<f64>, BondError> {
            let v = field(i);
            if v.is_empty() {
                return Ok(None);
            }
            v.parse::<f64>()
                .map(Some)
                .map_err(|e| row_err(format!("bad {name} `{v}`: {e}")))
        };
        let modified_duration = opt_measure(c_dur, "modified_duration")?;
        if modified_duration.is_some_and(|d| d < 0.0) {
            return Err(row_err("negative modified_duration".into()));
        }
        let convexity = opt_measure(c_cx, "convexity")?;
        let residual: u32 = field(c_mat)
            .parse()
            .map_err(|e| row_err(format!("bad residual_maturity_months `{}`: {e}", field(c_mat))))?;
        let security_type = SecurityType::parse(field(c_type))
            .ok_or_else(|| row_err(format!("unknown security_type `{}`", field(c_type))))?;
        let accounting = Accounting::parse(field(c_acc))
            .ok_or_else(|| row_err(format!("unknown accounting `{}`", field(c_acc))))?;

        holdings.push(BondHolding {
            isin: field(c_isin).to_string(),
            bank: field(c_bank).to_string(),
            date,
            fair_value,
            modified_duration,
            convexity,
            residual_maturity_months: residual,
            security_type,
            accounting,
        });
    }
    Ok(holdings)
}
