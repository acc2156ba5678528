//! Trade-state ingestion: parsing, candidate selection, deduplication.
//!
//! Input files carry one row per pending trade per reporting date, in the
//! dual-sided style of regulatory trade-state reports: both counterparties
//! may report the same trade id. Rows that cannot be parsed are never
//! dropped silently; they are collected in a rejects report with their line
//! number and the offending field.
//!
//! Candidate selection keeps euro single-currency fixed-for-floating
//! contracts: asset class `IR`, contract type `SW` or `FR`, exactly one
//! populated floating-rate leg naming a euro money-market index, a
//! populated fixed-rate leg, and consistent notional currencies.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("trades file missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("failed to read trades: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse trades: {0}")]
    Csv(#[from] csv::Error),
}

/// One rejected input row: file line, offending field, reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: u64,
    pub field: String,
    pub reason: String,
}

/// Raw trade-state record, one per row of `trades.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTradeRecord {
    pub trade_id: String,
    pub reporting_entity: String,
    pub counterparty: String,
    pub reference_date: NaiveDate,
    pub asset_class: String,
    pub contract_type: String,
    pub counterparty_side: char,
    pub notional_1: Option<f64>,
    pub notional_1_currency: Option<String>,
    pub notional_2: Option<f64>,
    pub notional_2_currency: Option<String>,
    pub floating_rate_leg1: Option<String>,
    pub floating_rate_leg2: Option<String>,
    pub fixed_rate_leg1: Option<f64>,
    pub fixed_rate_leg2: Option<f64>,
    pub price_rate: Option<f64>,
    pub effective_date: NaiveDate,
    pub maturity_date: NaiveDate,
    pub fixed_pay_freq_months: Option<u32>,
    pub float_pay_freq_months: Option<u32>,
    pub float_reset_freq_months: Option<u32>,
    pub contract_value: Option<f64>,
    pub valuation_timestamp: NaiveDateTime,
}

impl RawTradeRecord {
    /// The populated floating-rate leg text, if exactly one is populated.
    pub fn single_floating_leg(&self) -> Option<&str> {
        match (
            non_blank(self.floating_rate_leg1.as_deref()),
            non_blank(self.floating_rate_leg2.as_deref()),
        ) {
            (Some(leg), None) => Some(leg),
            (None, Some(leg)) => Some(leg),
            _ => None,
        }
    }

    /// Whether payment exchange starts after the reporting date.
    pub fn is_forward_starting(&self) -> bool {
        self.effective_date > self.reference_date
    }
}

fn non_blank(text: Option<&str>) -> Option<&str> {
    text.map(str::trim).filter(|t| !t.is_empty())
}

/// Contract classification derived from the raw fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Product {
    Irs,
    Ois,
    Fra,
}

impl Product {
    pub fn as_str(self) -> &'static str {
        match self {
            Product::Irs => "IRS",
            Product::Ois => "OIS",
            Product::Fra => "FRA",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "IRS" => Some(Product::Irs),
            "OIS" => Some(Product::Ois),
            "FRA" => Some(Product::Fra),
            _ => None,
        }
    }
}

/// Position direction: the fixed-rate payer is long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    PayFixed,
    ReceiveFixed,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::PayFixed => Side::ReceiveFixed,
            Side::ReceiveFixed => Side::PayFixed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::PayFixed => "PAY_FIXED",
            Side::ReceiveFixed => "RECEIVE_FIXED",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "PAY_FIXED" => Some(Side::PayFixed),
            "RECEIVE_FIXED" => Some(Side::ReceiveFixed),
            _ => None,
        }
    }
}

/// Floating-rate index of the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FloatIndex {
    Euribor,
    Estr,
}

impl FloatIndex {
    pub fn as_str(self) -> &'static str {
        match self {
            FloatIndex::Euribor => "EURIBOR",
            FloatIndex::Estr => "ESTR",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "EURIBOR" => Some(FloatIndex::Euribor),
            "ESTR" => Some(FloatIndex::Estr),
            _ => None,
        }
    }
}

/// Cleaned, priceable contract record.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapTrade {
    pub trade_id: String,
    pub bank: String,
    pub product: Product,
    pub side: Side,
    /// Notional in EUR, strictly positive.
    pub notional: f64,
    /// Contractual fixed rate in percent, after cleaning.
    pub fixed_rate_pct: f64,
    pub float_index: FloatIndex,
    /// Floating tenor in months; 0 for overnight legs.
    pub float_tenor_months: u32,
    pub effective_date: NaiveDate,
    pub maturity_date: NaiveDate,
    pub q_fix_per_year: f64,
    pub q_fl_per_year: f64,
    pub forward_starting: bool,
    pub reported_value: Option<f64>,
    pub valuation_date: NaiveDate,
}

impl SwapTrade {
    /// Build a priceable trade from a deduplicated candidate record, a
    /// resolved side and a cleaned fixed rate. The position is attributed
    /// to the reporting entity. A missing fixed payment frequency defaults
    /// to annual; the floating frequency is the EURIBOR tenor for IRS and
    /// annual for overnight legs.
    pub fn from_record(
        record: &RawTradeRecord,
        side: Side,
        fixed_rate_pct: f64,
    ) -> Result<SwapTrade, String> {
        let leg = record
            .single_floating_leg()
            .ok_or("no single floating leg")?;
        let float_index = float_index_of_leg(leg).ok_or("floating leg names no euro index")?;
        let product = match (record.contract_type.as_str(), float_index) {
            ("FR", _) => Product::Fra,
            ("SW", FloatIndex::Euribor) => Product::Irs,
            ("SW", FloatIndex::Estr) => Product::Ois,
            (other, _) => return Err(format!("unsupported contract type `{other}`")),
        };
        let float_tenor_months = match float_index {
            FloatIndex::Euribor => {
                float_tenor_of_leg(leg).ok_or("EURIBOR leg without a parseable tenor")?
            }
            FloatIndex::Estr => 0,
        };

        let notional = record
            .notional_1
            .or(record.notional_2)
            .ok_or("no notional reported")?;
        if !(notional.is_finite() && notional > 0.0) {
            return Err(format!("notional must be positive, got {notional}"));
        }

        let q_fix_per_year = 12.0 / record.fixed_pay_freq_months.unwrap_or(12).max(1) as f64;
        let q_fl_per_year = match product {
            Product::Ois => 1.0,
            _ => {
                let months = record
                    .float_pay_freq_months
                    .or(match float_index {
                        FloatIndex::Euribor => Some(float_tenor_months),
                        FloatIndex::Estr => Some(12),
                    })
                    .unwrap_or(12)
                    .max(1);
                12.0 / months as f64
            }
        };

        Ok(SwapTrade {
            trade_id: record.trade_id.clone(),
            bank: record.reporting_entity.clone(),
            product,
            side,
            notional,
            fixed_rate_pct,
            float_index,
            float_tenor_months,
            effective_date: record.effective_date,
            maturity_date: record.maturity_date,
            q_fix_per_year,
            q_fl_per_year,
            forward_starting: record.is_forward_starting(),
            reported_value: record.contract_value,
            valuation_date: record.reference_date,
        })
    }
}

const COLUMNS: [&str; 23] = [
    "trade_id",
    "reporting_entity",
    "counterparty",
    "reference_date",
    "asset_class",
    "contract_type",
    "counterparty_side",
    "notional_1",
    "notional_1_currency",
    "notional_2",
    "notional_2_currency",
    "floating_rate_leg1",
    "floating_rate_leg2",
    "fixed_rate_leg1",
    "fixed_rate_leg2",
    "price_rate",
    "effective_date",
    "maturity_date",
    "fixed_pay_freq_months",
    "float_pay_freq_months",
    "float_reset_freq_months",
    "contract_value",
    "valuation_timestamp",
];

/// Result of parsing a trade file: good records plus per-row rejects.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<RawTradeRecord>,
    pub rejects: Vec<Reject>,
}

/// Parse `trades.csv`. Malformed rows go to the rejects list with their
/// line number; a missing mandatory column is fatal.
pub fn parse_records(path: &Path) -> Result<ParseOutcome, IngestError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut cols = BTreeMap::new();
    for name in COLUMNS {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
        cols.insert(name, idx);
    }

    let mut outcome = ParseOutcome::default();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(line, &record, &cols) {
            Ok(raw) => outcome.records.push(raw),
            Err(reject) => outcome.rejects.push(reject),
        }
    }
    Ok(outcome)
}

fn parse_row(
    line: u64,
    record: &csv::StringRecord,
    cols: &BTreeMap<&str, usize>,
) -> Result<RawTradeRecord, Reject> {
    let field = |name: &str| record.get(cols[name]).unwrap_or("").trim();
    let reject = |field: &str, reason: String| Reject {
        line,
        field: field.to_string(),
        reason,
    };

    let req_text = |name: &str| -> Result<String, Reject> {
        let v = field(name);
        if v.is_empty() {
            Err(reject(name, "mandatory field is blank".into()))
        } else {
            Ok(v.to_string())
        }
    };
    let req_date = |name: &str| -> Result<NaiveDate, Reject> {
        let v = field(name);
        NaiveDate::parse_from_str(v, "%Y-%m-%d")
            .map_err(|e| reject(name, format!("unparseable date `{v}`: {e}")))
    };
    let opt_f64 = |name: &str| -> Result<Option<f64>, Reject> {
        let v = field(name);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse::<f64>()
            .map_err(|e| reject(name, format!("unparseable number `{v}`: {e}")))
            .and_then(|x| {
                if x.is_finite() {
                    Ok(Some(x))
                } else {
                    Err(reject(name, format!("non-finite number `{v}`")))
                }
            })
    };
    let opt_u32 = |name: &str| -> Result<Option<u32>, Reject> {
        let v = field(name);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse::<u32>()
            .map(Some)
            .map_err(|e| reject(name, format!("unparseable integer `{v}`: {e}")))
    };
    let opt_text = |name: &str| -> Option<String> {
        let v = field(name);
        if v.is_empty() {
            None
        } else {
            Some(v.to_string())
        }
    };

    let side_text = req_text("counterparty_side")?;
    let counterparty_side = match side_text.as_str() {
        "B" => 'B',
        "S" => 'S',
        other => {
            return Err(reject(
                "counterparty_side",
                format!("expected B or S, got `{other}`"),
            ))
        }
    };

    let timestamp_text = req_text("valuation_timestamp")?;
    let valuation_timestamp = NaiveDateTime::parse_from_str(&timestamp_text, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(&timestamp_text, "%Y-%m-%d %H:%M:%S"))
        .or_else(|_| {
            NaiveDate::parse_from_str(&timestamp_text, "%Y-%m-%d")
                .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight"))
        })
        .map_err(|e| {
            reject(
                "valuation_timestamp",
                format!("unparseable timestamp `{timestamp_text}`: {e}"),
            )
        })?;

    let effective_date = req_date("effective_date")?;
    let maturity_date = req_date("maturity_date")?;
    if maturity_date <= effective_date {
        return Err(reject(
            "maturity_date",
            format!("maturity {maturity_date} not after effective {effective_date}"),
        ));
    }

    Ok(RawTradeRecord {
        trade_id: req_text("trade_id")?,
        reporting_entity: req_text("reporting_entity")?,
        counterparty: field("counterparty").to_string(),
        reference_date: req_date("reference_date")?,
        asset_class: field("asset_class").to_string(),
        contract_type: field("contract_type").to_string(),
        counterparty_side,
        notional_1: opt_f64("notional_1")?,
        notional_1_currency: opt_text("notional_1_currency"),
        notional_2: opt_f64("notional_2")?,
        notional_2_currency: opt_text("notional_2_currency"),
        floating_rate_leg1: opt_text("floating_rate_leg1"),
        floating_rate_leg2: opt_text("floating_rate_leg2"),
        fixed_rate_leg1: opt_f64("fixed_rate_leg1")?,
        fixed_rate_leg2: opt_f64("fixed_rate_leg2")?,
        price_rate: opt_f64("price_rate")?,
        effective_date,
        maturity_date,
        fixed_pay_freq_months: opt_u32("fixed_pay_freq_months")?,
        float_pay_freq_months: opt_u32("float_pay_freq_months")?,
        float_reset_freq_months: opt_u32("float_reset_freq_months")?,
        contract_value: opt_f64("contract_value")?,
        valuation_timestamp,
    })
}

/// Whether the floating-leg text names a euro money-market index.
fn leg_names_euro_index(leg: &str) -> bool {
    let lower = leg.to_lowercase();
    ["euri", "str", "eona", "eonia"]
        .iter()
        .any(|term| lower.contains(term))
}

/// Floating index implied by the leg text.
pub fn float_index_of_leg(leg: &str) -> Option<FloatIndex> {
    let lower = leg.to_lowercase();
    if lower.contains("euri") {
        Some(FloatIndex::Euribor)
    } else if lower.contains("str") || lower.contains("eona") || lower.contains("eonia") {
        Some(FloatIndex::Estr)
    } else {
        None
    }
}

/// Tenor in months parsed from floating-leg text such as `EURIBOR6M`,
/// `euribor 12m` or `EURI1Y`: first digit run, a trailing `y` means years.
pub fn float_tenor_of_leg(leg: &str) -> Option<u32> {
    let bytes = leg.as_bytes();
    let start = bytes.iter().position(|b| b.is_ascii_digit())?;
    let mut end = start;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    let value: u32 = leg[start..end].parse().ok()?;
    let unit = leg[end..].trim_start().chars().next();
    match unit {
        Some('y') | Some('Y') => Some(value * 12),
        _ => Some(value),
    }
}

/// Candidate-selection filter over parsed records.
pub fn filter_candidates(records: Vec<RawTradeRecord>) -> Vec<RawTradeRecord> {
    records
        .into_iter()
        .filter(|r| {
            if r.asset_class != "IR" {
                return false;
            }
            if r.contract_type != "SW" && r.contract_type != "FR" {
                return false;
            }
            let Some(leg) = r.single_floating_leg() else {
                return false;
            };
            if !leg_names_euro_index(leg) {
                return false;
            }
            if r.fixed_rate_leg1.is_none() && r.fixed_rate_leg2.is_none() {
                return false;
            }
            match (
                non_blank(r.notional_1_currency.as_deref()),
                non_blank(r.notional_2_currency.as_deref()),
            ) {
                (Some(_), None) | (None, Some(_)) => true,
                (Some(a), Some(b)) => a == b,
                (None, None) => false,
            }
        })
        .collect()
}

/// EURIBOR tenor and staleness filter.
///
/// EURIBOR trades survive only when the leg tenor is 1, 3, 6 or 12 months
/// and equals both the reset and the payment interval. Records whose
/// valuation is dated more than one week before their reporting date are
/// dropped as stale.
pub fn filter_tenor_and_staleness(records: Vec<RawTradeRecord>) -> Vec<RawTradeRecord> {
    records
        .into_iter()
        .filter(|r| {
            let age_days = (r.reference_date - r.valuation_timestamp.date()).num_days();
            if age_days > 7 {
                return false;
            }
            let Some(leg) = r.single_floating_leg() else {
                return false;
            };
            match float_index_of_leg(leg) {
                Some(FloatIndex::Euribor) => {
                    let Some(tenor) = float_tenor_of_leg(leg) else {
                        return false;
                    };
                    matches!(tenor, 1 | 3 | 6 | 12)
                        && r.float_reset_freq_months == Some(tenor)
                        && r.float_pay_freq_months == Some(tenor)
                }
                Some(FloatIndex::Estr) => true,
                None => false,
            }
        })
        .collect()
}

/// Keep one report per trade id and reporting date.
///
/// In-scope reporters beat out-of-scope ones; remaining ties resolve to the
/// lexicographically smallest reporting entity. More than two reports for
/// one trade-date is a data-integrity anomaly and is reported as a warning,
/// but the same rule applies. Output is sorted by trade id and date.
pub fn deduplicate(
    records: Vec<RawTradeRecord>,
    in_scope_entities: &BTreeSet<String>,
) -> (Vec<RawTradeRecord>, Vec<String>) {
    let mut groups: BTreeMap<(String, NaiveDate), Vec<RawTradeRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.trade_id.clone(), record.reference_date))
            .or_default()
            .push(record);
    }

    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for ((trade_id, date), mut group) in groups {
        if group.len() > 2 {
            warnings.push(format!(
                "trade {trade_id} on {date}: {} reports found, expected at most 2",
                group.len()
            ));
        }
        group.sort_by(|a, b| {
            let a_scope = in_scope_entities.contains(&a.reporting_entity);
            let b_scope = in_scope_entities.contains(&b.reporting_entity);
            b_scope
                .cmp(&a_scope)
                .then_with(|| a.reporting_entity.cmp(&b.reporting_entity))
                .then_with(|| a.counterparty.cmp(&b.counterparty))
        });
        out.push(group.into_iter().next().expect("non-empty group"));
    }
    (out, warnings)
}

/// Write the rejects report (`row,field,reason`).
pub fn write_rejects(path: &Path, rejects: &[Reject]) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["row", "field", "reason"])?;
    for r in rejects {
        writer.write_record([r.line.to_string(), r.field.clone(), r.reason.clone()])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    pub(crate) fn base_record() -> RawTradeRecord {
        RawTradeRecord {
            trade_id: "T1".into(),
            reporting_entity: "BANK_A".into(),
            counterparty: "DEALER_X".into(),
            reference_date: d(2021, 1, 6),
            asset_class: "IR".into(),
            contract_type: "SW".into(),
            counterparty_side: 'B',
            notional_1: Some(1_000_000.0),
            notional_1_currency: Some("EUR".into()),
            notional_2: None,
            notional_2_currency: None,
            floating_rate_leg1: None,
            floating_rate_leg2: Some("EURIBOR6M".into()),
            fixed_rate_leg1: Some(2.1),
            fixed_rate_leg2: None,
            price_rate: None,
            effective_date: d(2020, 1, 6),
            maturity_date: d(2025, 1, 6),
            fixed_pay_freq_months: Some(12),
            float_pay_freq_months: Some(6),
            float_reset_freq_months: Some(6),
            contract_value: Some(10_000.0),
            valuation_timestamp: d(2021, 1, 5).and_hms_opt(18, 0, 0).unwrap(),
        }
    }

    fn write_csv(rows: &[String]) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "{}", COLUMNS.join(",")).unwrap();
        for row in rows {
            writeln!(file, "{row}").unwrap();
        }
        file.flush().unwrap();
        file
    }

    fn good_row(trade_id: &str) -> String {
        format!(
            "{trade_id},BANK_A,DEALER_X,2021-01-06,IR,SW,B,1000000,EUR,,,,EURIBOR6M,2.1,,,2020-01-06,2025-01-06,12,6,6,10000,2021-01-05T18:00:00"
        )
    }

    #[test]
    fn parses_well_formed_rows() {
        let file = write_csv(&[good_row("T1"), good_row("T2"), good_row("T3")]);
        let outcome = parse_records(file.path()).unwrap();
        assert_eq!(outcome.records.len(), 3);
        assert!(outcome.rejects.is_empty());
        assert_eq!(outcome.records[0].trade_id, "T1");
        assert_eq!(outcome.records[0].fixed_rate_leg1, Some(2.1));
    }

    #[test]
    fn bad_maturity_date_is_rejected_with_field() {
        let bad = good_row("T2").replace("2025-01-06", "not-a-date");
        let file = write_csv(&[good_row("T1"), bad]);
        let outcome = parse_records(file.path()).unwrap();
        assert_eq!(outcome.records.len(), 1);
        assert_eq!(outcome.rejects.len(), 1);
        assert_eq!(outcome.rejects[0].field, "maturity_date");
        assert_eq!(outcome.rejects[0].line, 3);
    }

    #[test]
    fn empty_file_with_header_is_fine() {
        let file = write_csv(&[]);
        let outcome = parse_records(file.path()).unwrap();
        assert!(outcome.records.is_empty());
        assert!(outcome.rejects.is_empty());
    }

    #[test]
    fn missing_column_is_fatal() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "trade_id,reporting_entity").unwrap();
        writeln!(file, "T1,BANK_A").unwrap();
        file.flush().unwrap();
        assert!(matches!(
            parse_records(file.path()),
            Err(IngestError::MissingColumn(_))
        ));
    }

    #[test]
    fn inverted_dates_are_rejected() {
        let bad = good_row("T1")
            .replace("2020-01-06", "2026-01-06")
            .replace("2025-01-06", "2024-01-06");
        let file = write_csv(&[bad]);
        let outcome = parse_records(file.path()).unwrap();
        assert!(outcome.records.is_empty());
        assert_eq!(outcome.rejects[0].field, "maturity_date");
    }

    #[test]
    fn candidate_filter_applies_all_criteria() {
        let good = base_record();
        assert_eq!(filter_candidates(vec![good.clone()]).len(), 1);

        let mut credit = good.clone();
        credit.asset_class = "CR".into();
        assert!(filter_candidates(vec![credit]).is_empty());

        let mut cross_ccy = good.clone();
        cross_ccy.notional_2 = Some(1_200_000.0);
        cross_ccy.notional_2_currency = Some("USD".into());
        assert!(filter_candidates(vec![cross_ccy]).is_empty());

        let mut both_float = good.clone();
        both_float.floating_rate_leg1 = Some("EURIBOR3M".into());
        assert!(filter_candidates(vec![both_float]).is_empty());

        let mut no_fixed = good.clone();
        no_fixed.fixed_rate_leg1 = None;
        assert!(filter_candidates(vec![no_fixed]).is_empty());

        let mut alien_index = good.clone();
        alien_index.floating_rate_leg2 = Some("SOFR3M".into());
        assert!(filter_candidates(vec![alien_index]).is_empty());

        let mut same_ccy = good.clone();
        same_ccy.notional_2 = Some(1_000_000.0);
        same_ccy.notional_2_currency = Some("EUR".into());
        assert_eq!(filter_candidates(vec![same_ccy]).len(), 1);
    }

    #[test]
    fn candidate_filter_is_idempotent() {
        let mut records = vec![base_record()];
        let mut credit = base_record();
        credit.asset_class = "CR".into();
        records.push(credit);
        let once = filter_candidates(records);
        let twice = filter_candidates(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn tenor_filter_requires_matching_intervals() {
        let good = base_record();
        assert_eq!(filter_tenor_and_staleness(vec![good.clone()]).len(), 1);

        let mut mismatch = good.clone();
        mismatch.floating_rate_leg2 = Some("EURIBOR3M".into());
        mismatch.float_reset_freq_months = Some(3);
        // payment interval still 6 months: dropped
        assert!(filter_tenor_and_staleness(vec![mismatch]).is_empty());

        let mut odd_tenor = good.clone();
        odd_tenor.floating_rate_leg2 = Some("EURIBOR2M".into());
        odd_tenor.float_reset_freq_months = Some(2);
        odd_tenor.float_pay_freq_months = Some(2);
        assert!(filter_tenor_and_staleness(vec![odd_tenor]).is_empty());
    }

    #[test]
    fn stale_valuations_are_dropped() {
        let mut stale = base_record();
        stale.valuation_timestamp = d(2020, 12, 28).and_hms_opt(18, 0, 0).unwrap();
        assert!(filter_tenor_and_staleness(vec![stale]).is_empty());

        let mut week_old = base_record();
        week_old.valuation_timestamp = d(2020, 12, 30).and_hms_opt(9, 0, 0).unwrap();
        assert_eq!(filter_tenor_and_staleness(vec![week_old]).len(), 1);
    }

    #[test]
    fn overnight_trades_skip_the_tenor_rule() {
        let mut ois = base_record();
        ois.floating_rate_leg2 = Some("ESTR".into());
        ois.float_reset_freq_months = None;
        ois.float_pay_freq_months = Some(12);
        assert_eq!(filter_tenor_and_staleness(vec![ois]).len(), 1);
    }

    #[test]
    fn leg_text_parsing() {
        assert_eq!(float_index_of_leg("EURIBOR6M"), Some(FloatIndex::Euribor));
        assert_eq!(float_index_of_leg("EuroSTR"), Some(FloatIndex::Estr));
        assert_eq!(float_index_of_leg("EONIA"), Some(FloatIndex::Estr));
        assert_eq!(float_index_of_leg("SOFR"), None);
        assert_eq!(float_tenor_of_leg("EURIBOR6M"), Some(6));
        assert_eq!(float_tenor_of_leg("euribor 12m"), Some(12));
        assert_eq!(float_tenor_of_leg("EURI1Y"), Some(12));
        assert_eq!(float_tenor_of_leg("ESTR"), None);
    }

    fn scoped(entities: &[&str]) -> BTreeSet<String> {
        entities.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn dedup_prefers_in_scope_reporter() {
        let bank = base_record();
        let mut dealer = base_record();
        dealer.reporting_entity = "DEALER_X".into();
        dealer.counterparty = "BANK_A".into();
        dealer.counterparty_side = 'S';
        let (kept, warnings) = deduplicate(vec![dealer, bank], &scoped(&["BANK_A"]));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].reporting_entity, "BANK_A");
        assert!(warnings.is_empty());
    }

    #[test]
    fn dedup_breaks_ties_lexicographically() {
        let a = base_record();
        let mut b = base_record();
        b.reporting_entity = "BANK_B".into();
        let (kept, _) = deduplicate(vec![b, a], &scoped(&["BANK_A", "BANK_B"]));
        assert_eq!(kept[0].reporting_entity, "BANK_A");
    }

    #[test]
    fn dedup_keeps_singletons_and_warns_on_triples() {
        let single = base_record();
        let (kept, warnings) = deduplicate(vec![single.clone()], &scoped(&["BANK_A"]));
        assert_eq!(kept.len(), 1);
        assert!(warnings.is_empty());

        let mut second = single.clone();
        second.reporting_entity = "BANK_B".into();
        let mut third = single.clone();
        third.reporting_entity = "BANK_C".into();
        let (kept, warnings) = deduplicate(vec![single, second, third], &scoped(&["BANK_B"]));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].reporting_entity, "BANK_B");
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn dedup_is_idempotent_with_unique_ids() {
        let mut records = Vec::new();
        for id in ["T3", "T1", "T2"] {
            let mut r = base_record();
            r.trade_id = id.into();
            records.push(r.clone());
            r.reporting_entity = "BANK_Z".into();
            records.push(r);
        }
        let scope = scoped(&["BANK_A"]);
        let (once, _) = deduplicate(records, &scope);
        let ids: Vec<&str> = once.iter().map(|r| r.trade_id.as_str()).collect();
        assert_eq!(ids, vec!["T1", "T2", "T3"]);
        let (twice, _) = deduplicate(once.clone(), &scope);
        assert_eq!(once, twice);
    }
}
