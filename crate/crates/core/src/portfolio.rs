//! Bank-level and system-level exposure aggregation.
//!
//! Per bank and date: gross and net-long swap notional (overall and by
//! four time-to-maturity buckets), swap market value and shift impact,
//! bond market values and shift impacts split by accounting class, and
//! the impact ratios to CET1 equity. Summation runs in a fixed order
//! (trade id, then ISIN) so results are bit-reproducible; the system row
//! is the field-wise sum of the bank rows with ratios recomputed on
//! summed equity.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use crate::bonds::{Accounting, BondHolding};
use crate::dates::month_frame;
use crate::ingest::{Side, SwapTrade};
use crate::pricer::TradeValuation;

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("equity file row {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("equity file missing column `{0}`")]
    MissingColumn(String),
    #[error("failed to read equity: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse equity: {0}")]
    Csv(#[from] csv::Error),
}

/// CET1 equity of one bank on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityRecord {
    pub bank: String,
    pub date: NaiveDate,
    pub cet1: f64,
}

/// Swap maturity buckets, half-open with the boundary month upward.
pub const SWAP_BUCKET_LABELS: [&str; 4] = ["<1Y", "1Y-5Y", "5Y-10Y", ">10Y"];

/// Bucket index (0..4) for a residual maturity in months.
pub fn swap_bucket(residual_months: i64) -> usize {
    match residual_months {
        i64::MIN..=11 => 0,
        12..=59 => 1,
        60..=119 => 2,
        _ => 3,
    }
}

fn residual_months(trade: &SwapTrade, date: NaiveDate) -> i64 {
    month_frame(date, trade.maturity_date)
}

/// Gross and signed-net notional of a trade list, overall and by bucket.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NotionalAggregates {
    pub gross: f64,
    pub net_long: f64,
    pub net_by_bucket: [f64; 4],
}

/// Aggregate notionals for trades sharing a bank and date. Pay-fixed is
/// the long side and counts positive.
pub fn notional_aggregates(trades: &[&SwapTrade], date: NaiveDate) -> NotionalAggregates {
    let mut out = NotionalAggregates::default();
    for trade in trades {
        let signed = match trade.side {
            Side::PayFixed => trade.notional,
            Side::ReceiveFixed => -trade.notional,
        };
        out.gross += trade.notional;
        out.net_long += signed;
        out.net_by_bucket[swap_bucket(residual_months(trade, date))] += signed;
    }
    out
}

/// One bond holding with its shift PnL, when computable.
#[derive(Debug, Clone)]
pub struct BondPnlRow {
    pub holding: BondHolding,
    pub pnl: Option<f64>,
}

/// Exposure figures of one bank (or the whole system) on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct BankExposure {
    pub bank: String,
    pub date: NaiveDate,
    pub swap_gross_notional: f64,
    pub swap_net_long_notional: f64,
    pub swap_mv: f64,
    pub swap_dv01: f64,
    pub ac_bond_mv: f64,
    pub fv_bond_mv: f64,
    pub ac_bond_dv01: f64,
    pub fv_bond_dv01: f64,
    pub cet1: Option<f64>,
    pub ratio_swap_dv01_to_equity_pct: Option<f64>,
    pub ratio_swap_plus_fv_to_equity_pct: Option<f64>,
    pub ratio_total_to_equity_pct: Option<f64>,
    pub net_notional_by_bucket: [f64; 4],
    pub dv01_by_bucket: [f64; 4],
}

impl BankExposure {
    fn zero(bank: String, date: NaiveDate) -> Self {
        Self {
            bank,
            date,
            swap_gross_notional: 0.0,
            swap_net_long_notional: 0.0,
            swap_mv: 0.0,
            swap_dv01: 0.0,
            ac_bond_mv: 0.0,
            fv_bond_mv: 0.0,
            ac_bond_dv01: 0.0,
            fv_bond_dv01: 0.0,
            cet1: None,
            ratio_swap_dv01_to_equity_pct: None,
            ratio_swap_plus_fv_to_equity_pct: None,
            ratio_total_to_equity_pct: None,
            net_notional_by_bucket: [0.0; 4],
            dv01_by_bucket: [0.0; 4],
        }
    }

    fn fill_ratios(&mut self) {
        let Some(cet1) = self.cet1.filter(|c| *c > 0.0) else {
            return;
        };
        self.ratio_swap_dv01_to_equity_pct = Some(100.0 * self.swap_dv01 / cet1);
        self.ratio_swap_plus_fv_to_equity_pct =
            Some(100.0 * (self.swap_dv01 + self.fv_bond_dv01) / cet1);
        self.ratio_total_to_equity_pct =
            Some(100.0 * (self.swap_dv01 + self.fv_bond_dv01 + self.ac_bond_dv01) / cet1);
    }
}

/// Exposure of one bank on one date from priced trades and bond PnL rows.
/// Trades and valuations must be index-aligned.
pub fn bank_exposure(
    bank: &str,
    date: NaiveDate,
    trades: &[(&SwapTrade, &TradeValuation)],
    bonds: &[BondPnlRow],
    cet1: Option<f64>,
) -> BankExposure {
    let mut sorted_trades: Vec<&(&SwapTrade, &TradeValuation)> = trades.iter().collect();
    sorted_trades.sort_by(|a, b| a.0.trade_id.cmp(&b.0.trade_id));
    let mut sorted_bonds: Vec<&BondPnlRow> = bonds.iter().collect();
    sorted_bonds.sort_by(|a, b| a.holding.isin.cmp(&b.holding.isin));

    let mut exposure = BankExposure::zero(bank.to_string(), date);
    for (trade, valuation) in sorted_trades.iter() {
        let signed_notional = match trade.side {
            Side::PayFixed => trade.notional,
            Side::ReceiveFixed => -trade.notional,
        };
        exposure.swap_gross_notional += trade.notional;
        exposure.swap_net_long_notional += signed_notional;
        exposure.swap_mv += valuation.model_value;
        exposure.swap_dv01 += valuation.dv01;
        let bucket = swap_bucket(residual_months(trade, date));
        exposure.net_notional_by_bucket[bucket] += signed_notional;
        exposure.dv01_by_bucket[bucket] += valuation.dv01;
    }
    for row in sorted_bonds {
        let (mv, dv01) = match row.holding.accounting {
            Accounting::Ac => (&mut exposure.ac_bond_mv, &mut exposure.ac_bond_dv01),
            Accounting::Fv => (&mut exposure.fv_bond_mv, &mut exposure.fv_bond_dv01),
        };
        *mv += row.holding.fair_value;
        if let Some(pnl) = row.pnl {
            *dv01 += pnl;
        }
    }
    exposure.cet1 = cet1;
    exposure.fill_ratios();
    exposure
}

/// Name used for the system-wide aggregate row.
pub const SYSTEM_BANK: &str = "SYSTEM";

/// Field-wise sum of bank exposures of one date; ratios use summed CET1
/// (present only when every bank contributed equity).
pub fn system_aggregate(exposures: &[BankExposure], date: NaiveDate) -> BankExposure {
    let mut system = BankExposure::zero(SYSTEM_BANK.to_string(), date);
    let mut cet1_sum = 0.0;
    let mut cet1_complete = !exposures.is_empty();
    for e in exposures {
        system.swap_gross_notional += e.swap_gross_notional;
        system.swap_net_long_notional += e.swap_net_long_notional;
        system.swap_mv += e.swap_mv;
        system.swap_dv01 += e.swap_dv01;
        system.ac_bond_mv += e.ac_bond_mv;
        system.fv_bond_mv += e.fv_bond_mv;
        system.ac_bond_dv01 += e.ac_bond_dv01;
        system.fv_bond_dv01 += e.fv_bond_dv01;
        for i in 0..4 {
            system.net_notional_by_bucket[i] += e.net_notional_by_bucket[i];
            system.dv01_by_bucket[i] += e.dv01_by_bucket[i];
        }
        match e.cet1 {
            Some(c) => cet1_sum += c,
            None => cet1_complete = false,
        }
    }
    if cet1_complete {
        system.cet1 = Some(cet1_sum);
    }
    system.fill_ratios();
    system
}

/// Read `equity.csv` (`date,bank,cet1_eur`), strict.
pub fn read_equity(path: &Path) -> Result<Vec<EquityRecord>, PortfolioError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize, PortfolioError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PortfolioError::MissingColumn(name.to_string()))
    };
    let (c_date, c_bank, c_cet1) = (col("date")?, col("bank")?, col("cet1_eur")?);

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let row_err = |reason: String| PortfolioError::Row { line, reason };

        let date = NaiveDate::parse_from_str(field(c_date), "%Y-%m-%d")
            .map_err(|e| row_err(format!("bad date `{}`: {e}", field(c_date))))?;
        let cet1: f64 = field(c_cet1)
            .parse()
            .map_err(|e| row_err(format!("bad cet1_eur `{}`: {e}", field(c_cet1))))?;
        if !(cet1.is_finite() && cet1 > 0.0) {
            return Err(row_err(format!("cet1_eur must be positive, got {cet1}")));
        }
        records.push(EquityRecord {
            bank: field(c_bank).to_string(),
            date,
            cet1,
        });
    }
    Ok(records)
}

/// Equity lookup: latest record on or before the requested date per bank.
#[derive(Debug, Default)]
pub struct EquityBook {
    by_bank: BTreeMap<String, BTreeMap<NaiveDate, f64>>,
}

impl EquityBook {
    pub fn from_records(records: Vec<EquityRecord>) -> Self {
        let mut by_bank: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
        for r in records {
            by_bank.entry(r.bank).or_default().insert(r.date, r.cet1);
        }
        Self { by_bank }
    }

    pub fn cet1(&self, bank: &str, date: NaiveDate) -> Option<f64> {
        self.by_bank
            .get(bank)?
            .range(..=date)
            .next_back()
            .map(|(_, c)| *c)
    }

    pub fn banks(&self) -> impl Iterator<Item = &String> {
        self.by_bank.keys()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bonds::SecurityType;
    use crate::ingest::{FloatIndex, Product};
    use approx::assert_relative_eq;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn trade(id: &str, side: Side, notional: f64, maturity: NaiveDate) -> SwapTrade {
        SwapTrade {
            trade_id: id.into(),
            bank: "BANK_A".into(),
            product: Product::Irs,
            side,
            notional,
            fixed_rate_pct: 2.0,
            float_index: FloatIndex::Euribor,
            float_tenor_months: 6,
            effective_date: d(2020, 1, 6),
            maturity_date: maturity,
            q_fix_per_year: 1.0,
            q_fl_per_year: 2.0,
            forward_starting: false,
            reported_value: None,
            valuation_date: d(2021, 1, 6),
        }
    }

    fn valuation(id: &str, value: f64, dv01: f64) -> TradeValuation {
        TradeValuation {
            trade_id: id.into(),
            model_value: value,
            dv01,
            matured: false,
        }
    }

    #[test]
    fn notional_aggregates_basic_cases() {
        let date = d(2021, 1, 6);
        let pay = trade("A", Side::PayFixed, 100.0, d(2024, 1, 6));
        let recv = trade("B", Side::ReceiveFixed, 60.0, d(2024, 1, 6));
        let agg = notional_aggregates(&[&pay, &recv], date);
        assert_eq!(agg.gross, 160.0);
        assert_eq!(agg.net_long, 40.0);

        let mirror = trade("C", Side::ReceiveFixed, 100.0, d(2024, 1, 6));
        let agg = notional_aggregates(&[&pay, &mirror], date);
        assert_eq!(agg.gross, 200.0);
        assert_eq!(agg.net_long, 0.0);

        let seven_year = trade("D", Side::PayFixed, 50.0, d(2028, 1, 6));
        let agg = notional_aggregates(&[&seven_year], date);
        assert_eq!(agg.net_by_bucket, [0.0, 0.0, 50.0, 0.0]);
    }

    #[test]
    fn swap_bucket_boundaries() {
        assert_eq!(swap_bucket(11), 0);
        assert_eq!(swap_bucket(12), 1);
        assert_eq!(swap_bucket(59), 1);
        assert_eq!(swap_bucket(60), 2);
        assert_eq!(swap_bucket(119), 2);
        assert_eq!(swap_bucket(120), 3);
    }

    fn bond(isin: &str, accounting: Accounting, fv: f64, pnl: Option<f64>) -> BondPnlRow {
        BondPnlRow {
            holding: BondHolding {
                isin: isin.into(),
                bank: "BANK_A".into(),
                date: d(2021, 1, 6),
                fair_value: fv,
                modified_duration: Some(4.0),
                convexity: Some(20.0),
                residual_maturity_months: 48,
                security_type: SecurityType::Ordinary,
                accounting,
            },
            pnl,
        }
    }

    #[test]
    fn empty_bank_is_all_zero() {
        let e = bank_exposure("BANK_A", d(2021, 1, 6), &[], &[], None);
        assert_eq!(e.swap_gross_notional, 0.0);
        assert_eq!(e.swap_dv01, 0.0);
        assert_eq!(e.ac_bond_mv, 0.0);
        assert!(e.ratio_swap_dv01_to_equity_pct.is_none());
    }

    #[test]
    fn dv01_sums_match_brute_force_resummation() {
        let date = d(2021, 1, 6);
        let trades = [
            trade("A", Side::PayFixed, 100.0, d(2024, 1, 6)),
            trade("B", Side::ReceiveFixed, 60.0, d(2024, 1, 6)),
            trade("C", Side::PayFixed, 40.0, d(2035, 1, 6)),
        ];
        let valuations = [
            valuation("A", 1.0, 3.0),
            valuation("B", -2.0, -1.0),
            valuation("C", 0.5, 0.5),
        ];
        let zipped: Vec<(&SwapTrade, &TradeValuation)> =
            trades.iter().zip(valuations.iter()).collect();
        let e = bank_exposure("BANK_A", date, &zipped, &[], Some(100.0));
        let expected: f64 = [3.0, -1.0, 0.5].iter().sum();
        assert_eq!(e.swap_dv01, expected);
        assert_eq!(e.dv01_by_bucket.iter().sum::<f64>(), e.swap_dv01);
        assert_eq!(e.swap_mv, -0.5);
    }

    #[test]
    fn ratios_match_hand_arithmetic() {
        let date = d(2021, 1, 6);
        let trades = [trade("A", Side::PayFixed, 100.0, d(2024, 1, 6))];
        let valuations = [valuation("A", 0.0, 10.0)];
        let zipped: Vec<(&SwapTrade, &TradeValuation)> =
            trades.iter().zip(valuations.iter()).collect();
        let bonds = vec![
            bond("X", Accounting::Fv, 500.0, Some(-4.0)),
            bond("Y", Accounting::Ac, 800.0, Some(-12.0)),
        ];
        let e = bank_exposure("BANK_A", date, &zipped, &bonds, Some(200.0));
        assert_relative_eq!(e.ratio_swap_dv01_to_equity_pct.unwrap(), 5.0);
        assert_relative_eq!(e.ratio_swap_plus_fv_to_equity_pct.unwrap(), 3.0);
        assert_relative_eq!(e.ratio_total_to_equity_pct.unwrap(), -3.0);
        assert_eq!(e.fv_bond_mv, 500.0);
        assert_eq!(e.ac_bond_mv, 800.0);
    }

    #[test]
    fn unpriced_bonds_count_in_mv_but_not_dv01() {
        let bonds = vec![
            bond("X", Accounting::Fv, 500.0, Some(-4.0)),
            bond("Z", Accounting::Fv, 300.0, None),
        ];
        let e = bank_exposure("BANK_A", d(2021, 1, 6), &[], &bonds, None);
        assert_eq!(e.fv_bond_mv, 800.0);
        assert_eq!(e.fv_bond_dv01, -4.0);
    }

    #[test]
    fn system_aggregate_is_field_wise_sum() {
        let date = d(2021, 1, 6);
        let mut a = BankExposure::zero("A".into(), date);
        a.swap_dv01 = 6.0;
        a.cet1 = Some(100.0);
        a.fill_ratios();
        let mut b = BankExposure::zero("B".into(), date);
        b.swap_dv01 = 0.6;
        b.cet1 = Some(50.0);
        b.fill_ratios();

        let system = system_aggregate(&[a.clone(), b], date);
        assert_relative_eq!(system.swap_dv01, 6.6);
        assert_relative_eq!(
            system.ratio_swap_dv01_to_equity_pct.unwrap(),
            100.0 * 6.6 / 150.0
        );

        let single = system_aggregate(&[a.clone()], date);
        assert_eq!(single.swap_dv01, a.swap_dv01);
        assert_eq!(single.cet1, a.cet1);
    }

    #[test]
    fn mirror_books_cancel_at_system_level() {
        let date = d(2021, 1, 6);
        let mut a = BankExposure::zero("A".into(), date);
        a.swap_dv01 = 4.2;
        a.swap_net_long_notional = 100.0;
        let mut b = BankExposure::zero("B".into(), date);
        b.swap_dv01 = -4.2;
        b.swap_net_long_notional = -100.0;
        let system = system_aggregate(&[a, b], date);
        assert_eq!(system.swap_dv01, 0.0);
        assert_eq!(system.swap_net_long_notional, 0.0);
        assert!(system.cet1.is_none());
    }

    #[test]
    fn equity_book_takes_latest_on_or_before() {
        let book = EquityBook::from_records(vec![
            EquityRecord {
                bank: "A".into(),
                date: d(2021, 1, 1),
                cet1: 100.0,
            },
            EquityRecord {
                bank: "A".into(),
                date: d(2021, 4, 1),
                cet1: 120.0,
            },
        ]);
        assert_eq!(book.cet1("A", d(2021, 1, 6)), Some(100.0));
        assert_eq!(book.cet1("A", d(2021, 4, 1)), Some(120.0));
        assert_eq!(book.cet1("A", d(2020, 12, 31)), None);
        assert_eq!(book.cet1("B", d(2021, 1, 6)), None);
    }
}
