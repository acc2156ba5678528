//! End-to-end orchestration: ingest, clean, price, aggregate, reconcile,
//! and write every output file. All iteration orders are fixed (sorted
//! maps and explicit sorts), all floating-point output goes through fixed
//! formatters, and batch pricing joins in input order, so identical inputs
//! and configuration produce byte-identical outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use thiserror::Error;

use crate::bonds::{
    bond_pnl, fill_missing_risk_measures, read_holdings, BondError, BondHolding,
};
use crate::cleaning::{clean_fixed_rate, resolve_side, side_under, CleaningError, SideConvention};
use crate::curve::{
    build_spot_curve, read_par_quotes, CurveError, CurveSet, ParQuote, RateIndex, ShockScenario,
    SpotCurve, DEFAULT_CROSSOVER_MONTHS,
};
use crate::dates::month_frame;
use crate::fixings::{read_fixings, FixingError, FixingSeries};
use crate::ingest::{
    deduplicate, filter_candidates, filter_tenor_and_staleness, parse_records, write_rejects,
    IngestError, Product, RawTradeRecord, Reject, SwapTrade,
};
use crate::portfolio::{
    bank_exposure, read_equity, system_aggregate, BankExposure, BondPnlRow, EquityBook,
    PortfolioError, SYSTEM_BANK,
};
use crate::pricer::{fixing_context_for, price_trade, revalue_batch, TradeValuation};
use crate::quality::{quality_report, QualityReport, DEFAULT_OUTLIER_THRESHOLD_EUR};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("quotes: {0}")]
    Curve(#[from] CurveError),
    #[error("curve build for {date}: {source}")]
    CurveAt {
        date: NaiveDate,
        source: CurveError,
    },
    #[error("trades: {0}")]
    Ingest(#[from] IngestError),
    #[error("holdings: {0}")]
    Bond(#[from] BondError),
    #[error("equity: {0}")]
    Portfolio(#[from] PortfolioError),
    #[error("fixings: {0}")]
    Fixing(#[from] FixingError),
    #[error("{0}")]
    MissingData(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    /// Whether the failure is numerical (bootstrap or scenario) rather
    /// than a data problem.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PipelineError::Curve(CurveError::BootstrapFailure { .. })
                | PipelineError::Curve(CurveError::ScenarioInfeasible { .. })
                | PipelineError::CurveAt {
                    source: CurveError::BootstrapFailure { .. },
                    ..
                }
                | PipelineError::CurveAt {
                    source: CurveError::ScenarioInfeasible { .. },
                    ..
                }
        )
    }
}

/// File paths and knobs of one engine run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub quotes: PathBuf,
    pub trades: Option<PathBuf>,
    pub holdings: Option<PathBuf>,
    pub equity: Option<PathBuf>,
    pub fixings: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub shock_bp: i64,
    pub crossover_months: u32,
    pub outlier_threshold_eur: f64,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl RunConfig {
    pub fn new(quotes: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            quotes: quotes.into(),
            trades: None,
            holdings: None,
            equity: None,
            fixings: None,
            out_dir: out_dir.into(),
            shock_bp: 100,
            crossover_months: DEFAULT_CROSSOVER_MONTHS,
            outlier_threshold_eur: DEFAULT_OUTLIER_THRESHOLD_EUR,
            from: None,
            to: None,
        }
    }

    pub fn scenario(&self) -> ShockScenario {
        ShockScenario::from_bp(self.shock_bp)
    }
}

/// Par quotes grouped by index and as-of date.
#[derive(Debug, Default)]
pub struct QuoteBook {
    by_index_date: BTreeMap<(RateIndex, NaiveDate), Vec<ParQuote>>,
}

impl QuoteBook {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let quotes = read_par_quotes(path)?;
        let mut by_index_date: BTreeMap<(RateIndex, NaiveDate), Vec<ParQuote>> = BTreeMap::new();
        for q in quotes {
            by_index_date
                .entry((q.index, q.as_of_date))
                .or_default()
                .push(q);
        }
        Ok(Self { by_index_date })
    }

    pub fn dates(&self, index: RateIndex) -> BTreeSet<NaiveDate> {
        self.by_index_date
            .keys()
            .filter(|(i, _)| *i == index)
            .map(|(_, d)| *d)
            .collect()
    }

    pub fn quotes(&self, index: RateIndex, date: NaiveDate) -> Option<&[ParQuote]> {
        self.by_index_date
            .get(&(index, date))
            .map(Vec::as_slice)
    }

    /// Spot curve for one index and date.
    pub fn curve(&self, index: RateIndex, date: NaiveDate) -> Result<SpotCurve, PipelineError> {
        let quotes = self.quotes(index, date).ok_or_else(|| {
            PipelineError::MissingData(format!("no {index} quotes for {date}"))
        })?;
        build_spot_curve(quotes, index).map_err(|source| PipelineError::CurveAt { date, source })
    }

    /// Full curve set for one date.
    pub fn curve_set(
        &self,
        date: NaiveDate,
        crossover_months: u32,
    ) -> Result<CurveSet, PipelineError> {
        let ois = self.curve(RateIndex::OisEstr, date)?;
        let euribor = self.curve(RateIndex::Euribor6m, date)?;
        let crossover = crossover_months.min(ois.max_months());
        CurveSet::new(ois, euribor, crossover)
            .map_err(|source| PipelineError::CurveAt { date, source })
    }

    /// Par swap rate prevailing at `date` for `tenor_months`, read from
    /// the latest quote date at or before `date` (or the earliest
    /// available date when all quotes are later).
    pub fn par_rate_at(
        &self,
        index: RateIndex,
        date: NaiveDate,
        tenor_months: u32,
    ) -> Option<f64> {
        let dates = self.dates(index);
        let quote_date = dates.range(..=date).next_back().or_else(|| dates.iter().next())?;
        crate::curve::par_rate_from_quotes(self.quotes(index, *quote_date)?, tenor_months)
    }
}

/// Cleaned trades plus everything that fell out along the way.
#[derive(Debug, Default)]
pub struct CleanedTrades {
    /// Sorted by (valuation date, trade id).
    pub trades: Vec<SwapTrade>,
    pub rejects: Vec<Reject>,
    pub warnings: Vec<String>,
    /// Trades resolved to the older side convention.
    pub older_convention_ids: BTreeSet<String>,
}

fn par_lookup_index(product: Product) -> RateIndex {
    match product {
        Product::Ois => RateIndex::OisEstr,
        Product::Irs | Product::Fra => RateIndex::Euribor6m,
    }
}

fn classify_for_par(record: &RawTradeRecord) -> Product {
    if record.contract_type == "FR" {
        Product::Fra
    } else {
        match record
            .single_floating_leg()
            .and_then(crate::ingest::float_index_of_leg)
        {
            Some(crate::ingest::FloatIndex::Estr) => Product::Ois,
            _ => Product::Irs,
        }
    }
}

/// Candidate selection over parsed records: criteria filters, tenor and
/// staleness rules, optional date range, one report per trade and date.
pub fn select_candidates(
    records: Vec<RawTradeRecord>,
    in_scope: &BTreeSet<String>,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> (Vec<RawTradeRecord>, Vec<String>) {
    let mut records = filter_candidates(records);
    records = filter_tenor_and_staleness(records);
    records.retain(|r| {
        from.is_none_or(|f| r.reference_date >= f) && to.is_none_or(|t| r.reference_date <= t)
    });
    deduplicate(records, in_scope)
}

/// Clean and side-resolve deduplicated candidate records.
///
/// `curve_sets` must cover every reference date present; they price the
/// side-resolution candidates.
pub fn clean_and_resolve(
    records: Vec<RawTradeRecord>,
    parse_rejects: Vec<Reject>,
    warnings: Vec<String>,
    quotes: &QuoteBook,
    curve_sets: &BTreeMap<NaiveDate, CurveSet>,
    fixings: &FixingSeries,
) -> CleanedTrades {
    let mut cleaned = CleanedTrades {
        warnings,
        rejects: parse_rejects,
        ..CleanedTrades::default()
    };

    // Per-record cleaning: par lookup, rate repair, draft conversion.
    struct Draft {
        record: RawTradeRecord,
        rate_pct: f64,
    }
    let mut by_trade: BTreeMap<String, Vec<Draft>> = BTreeMap::new();
    for record in records {
        let product = classify_for_par(&record);
        let tenor = month_frame(record.effective_date, record.maturity_date).max(1) as u32;
        let Some(par) =
            quotes.par_rate_at(par_lookup_index(product), record.effective_date, tenor)
        else {
            cleaned.rejects.push(Reject {
                line: 0,
                field: "fixed_rate".into(),
                reason: format!(
                    "trade {} on {}: no par quotes available for rate cleaning",
                    record.trade_id, record.reference_date
                ),
            });
            continue;
        };
        let rate_pct = match clean_fixed_rate(&record, par) {
            Ok((rate, _)) => rate,
            Err(CleaningError::NoFixedRate { trade_id }) => {
                cleaned.rejects.push(Reject {
                    line: 0,
                    field: "fixed_rate".into(),
                    reason: format!(
                        "trade {trade_id} on {}: no fixed-rate field populated",
                        record.reference_date
                    ),
                });
                continue;
            }
        };
        // Validate convertibility up front so side resolution only sees
        // records that can become trades.
        if let Err(reason) =
            SwapTrade::from_record(&record, side_under(&record, SideConvention::Newer), rate_pct)
        {
            cleaned.rejects.push(Reject {
                line: 0,
                field: "conversion".into(),
                reason: format!(
                    "trade {} on {}: {reason}",
                    record.trade_id, record.reference_date
                ),
            });
            continue;
        }
        by_trade
            .entry(record.trade_id.clone())
            .or_default()
            .push(Draft { record, rate_pct });
    }

    for (trade_id, drafts) in by_trade {
        let history: Vec<RawTradeRecord> = drafts.iter().map(|d| d.record.clone()).collect();
        let rates: BTreeMap<NaiveDate, f64> = drafts
            .iter()
            .map(|d| (d.record.reference_date, d.rate_pct))
            .collect();
        let resolution = resolve_side(&history, |record, side| {
            let rate = *rates.get(&record.reference_date)?;
            let trade = SwapTrade::from_record(record, side, rate).ok()?;
            let curves = curve_sets.get(&record.reference_date)?;
            let fixing = fixing_context_for(&trade, curves, fixings).ok()?;
            price_trade(&trade, curves, &fixing).ok()
        });
        if resolution.defaulted {
            cleaned.warnings.push(format!(
                "trade {trade_id}: side convention defaulted (no reported value to verify)"
            ));
        }
        if resolution.convention == SideConvention::Older {
            cleaned.older_convention_ids.insert(trade_id.clone());
        }
        for draft in drafts {
            let side = side_under(&draft.record, resolution.convention);
            let trade = SwapTrade::from_record(&draft.record, side, draft.rate_pct)
                .expect("validated during cleaning");
            cleaned.trades.push(trade);
        }
    }

    cleaned
        .trades
        .sort_by(|a, b| (a.valuation_date, a.trade_id.as_str()).cmp(&(b.valuation_date, b.trade_id.as_str())));
    cleaned
}

/// Ingest, filter, deduplicate, clean and side-resolve a trade file.
pub fn ingest_and_clean(
    trades_path: &Path,
    quotes: &QuoteBook,
    curve_sets: &BTreeMap<NaiveDate, CurveSet>,
    fixings: &FixingSeries,
    in_scope: &BTreeSet<String>,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<CleanedTrades, PipelineError> {
    let outcome = parse_records(trades_path)?;
    let (records, warnings) = select_candidates(outcome.records, in_scope, from, to);
    Ok(clean_and_resolve(
        records,
        outcome.rejects,
        warnings,
        quotes,
        curve_sets,
        fixings,
    ))
}

/// Priced book: cleaned trades with aligned valuations.
#[derive(Debug, Default)]
pub struct PricedBook {
    pub trades: Vec<SwapTrade>,
    pub valuations: Vec<TradeValuation>,
    pub rejects: Vec<Reject>,
    pub warnings: Vec<String>,
}

/// Price all trades date by date under base and shocked curves. Trades
/// that fail to price are moved to the rejects list; the returned trades
/// and valuations stay index-aligned.
pub fn price_book(
    mut cleaned: CleanedTrades,
    curve_sets: &BTreeMap<NaiveDate, CurveSet>,
    fixings: &FixingSeries,
    scenario: &ShockScenario,
) -> Result<PricedBook, PipelineError> {
    let mut shocked_sets = BTreeMap::new();
    for (date, set) in curve_sets {
        shocked_sets.insert(
            *date,
            set.apply_shock(scenario)
                .map_err(|source| PipelineError::CurveAt { date: *date, source })?,
        );
    }

    let mut book = PricedBook {
        rejects: std::mem::take(&mut cleaned.rejects),
        warnings: std::mem::take(&mut cleaned.warnings),
        ..PricedBook::default()
    };

    let mut by_date: BTreeMap<NaiveDate, Vec<SwapTrade>> = BTreeMap::new();
    for trade in cleaned.trades {
        by_date.entry(trade.valuation_date).or_default().push(trade);
    }

    for (date, trades) in by_date {
        let base = curve_sets.get(&date).ok_or_else(|| {
            PipelineError::MissingData(format!("no curve set for trade date {date}"))
        })?;
        let shocked = &shocked_sets[&date];
        let results = revalue_batch(&trades, base, shocked, fixings);
        for (trade, result) in trades.into_iter().zip(results) {
            match result {
                Ok(valuation) => {
                    book.trades.push(trade);
                    book.valuations.push(valuation);
                }
                Err(err) => book.rejects.push(Reject {
                    line: 0,
                    field: "pricing".into(),
                    reason: format!("trade {} on {date}: {err}", trade.trade_id),
                }),
            }
        }
    }
    Ok(book)
}

/// Bond PnL rows grouped per bank, from the holdings snapshot applicable
/// to `date` (each bank's latest holding date at or before `date`).
fn bond_rows_for_date(
    holdings: &[BondHolding],
    date: NaiveDate,
    shift: f64,
    warnings: &mut Vec<String>,
) -> BTreeMap<String, Vec<BondPnlRow>> {
    let mut latest: BTreeMap<&str, NaiveDate> = BTreeMap::new();
    for h in holdings {
        if h.date <= date {
            let entry = latest.entry(h.bank.as_str()).or_insert(h.date);
            if h.date > *entry {
                *entry = h.date;
            }
        }
    }
    let mut rows: BTreeMap<String, Vec<BondPnlRow>> = BTreeMap::new();
    for h in holdings {
        if latest.get(h.bank.as_str()) != Some(&h.date) {
            continue;
        }
        let pnl = match bond_pnl(h, shift) {
            Ok(p) => Some(p),
            Err(BondError::Unfilled { isin, date }) => {
                warnings.push(format!(
                    "holding {isin} ({}) on {date}: excluded from PnL, measures unavailable",
                    h.bank
                ));
                None
            }
            Err(_) => None,
        };
        rows.entry(h.bank.clone()).or_default().push(BondPnlRow {
            holding: h.clone(),
            pnl,
        });
    }
    rows
}

/// Exposure rows for every (date, bank) plus one SYSTEM row per date.
pub fn build_exposures(
    book: &PricedBook,
    holdings: &[BondHolding],
    equity: &EquityBook,
    shift: f64,
    report_dates: &BTreeSet<NaiveDate>,
    warnings: &mut Vec<String>,
) -> Vec<BankExposure> {
    let mut by_date_bank: BTreeMap<(NaiveDate, String), Vec<(&SwapTrade, &TradeValuation)>> =
        BTreeMap::new();
    for (trade, valuation) in book.trades.iter().zip(&book.valuations) {
        by_date_bank
            .entry((trade.valuation_date, trade.bank.clone()))
            .or_default()
            .push((trade, valuation));
    }

    let mut exposures = Vec::new();
    for date in report_dates {
        let bond_rows = bond_rows_for_date(holdings, *date, shift, warnings);
        let mut banks: BTreeSet<String> = bond_rows.keys().cloned().collect();
        banks.extend(
            by_date_bank
                .range((*date, String::new())..=(*date, "\u{10FFFF}".to_string()))
                .map(|((_, bank), _)| bank.clone()),
        );

        let empty_trades = Vec::new();
        let empty_bonds = Vec::new();
        let mut date_rows = Vec::new();
        for bank in banks {
            let trades = by_date_bank
                .get(&(*date, bank.clone()))
                .unwrap_or(&empty_trades);
            let bonds = bond_rows.get(&bank).unwrap_or(&empty_bonds);
            let cet1 = equity.cet1(&bank, *date);
            date_rows.push(bank_exposure(&bank, *date, trades, bonds, cet1));
        }
        let system = system_aggregate(&date_rows, *date);
        exposures.extend(date_rows);
        exposures.push(system);
    }
    exposures
}

fn fmt_eur(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_pct(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt_pct(v: Option<f64>) -> String {
    v.map(fmt_pct).unwrap_or_default()
}

fn fmt_opt_eur(v: Option<f64>) -> String {
    v.map(fmt_eur).unwrap_or_default()
}

/// Write `exposures.csv` with its documented fixed column order.
pub fn write_exposures(path: &Path, exposures: &[BankExposure]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "date",
        "bank",
        "swap_gross_notional_eur",
        "swap_net_long_notional_eur",
        "swap_mv_eur",
        "swap_dv01_eur",
        "ac_bond_mv_eur",
        "fv_bond_mv_eur",
        "ac_bond_dv01_eur",
        "fv_bond_dv01_eur",
        "cet1_eur",
        "ratio_swap_dv01_to_equity_pct",
        "ratio_swap_plus_fv_to_equity_pct",
        "ratio_total_to_equity_pct",
        "net_notional_lt_1y_eur",
        "net_notional_1y_5y_eur",
        "net_notional_5y_10y_eur",
        "net_notional_gt_10y_eur",
        "dv01_lt_1y_eur",
        "dv01_1y_5y_eur",
        "dv01_5y_10y_eur",
        "dv01_gt_10y_eur",
    ])?;
    for e in exposures {
        w.write_record([
            e.date.to_string(),
            e.bank.clone(),
            fmt_eur(e.swap_gross_notional),
            fmt_eur(e.swap_net_long_notional),
            fmt_eur(e.swap_mv),
            fmt_eur(e.swap_dv01),
            fmt_eur(e.ac_bond_mv),
            fmt_eur(e.fv_bond_mv),
            fmt_eur(e.ac_bond_dv01),
            fmt_eur(e.fv_bond_dv01),
            fmt_opt_eur(e.cet1),
            fmt_opt_pct(e.ratio_swap_dv01_to_equity_pct),
            fmt_opt_pct(e.ratio_swap_plus_fv_to_equity_pct),
            fmt_opt_pct(e.ratio_total_to_equity_pct),
            fmt_eur(e.net_notional_by_bucket[0]),
            fmt_eur(e.net_notional_by_bucket[1]),
            fmt_eur(e.net_notional_by_bucket[2]),
            fmt_eur(e.net_notional_by_bucket[3]),
            fmt_eur(e.dv01_by_bucket[0]),
            fmt_eur(e.dv01_by_bucket[1]),
            fmt_eur(e.dv01_by_bucket[2]),
            fmt_eur(e.dv01_by_bucket[3]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_cleaned_trades(path: &Path, trades: &[SwapTrade]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "valuation_date",
        "trade_id",
        "bank",
        "product",
        "side",
        "notional_eur",
        "fixed_rate_pct",
        "float_index",
        "float_tenor_months",
        "effective_date",
        "maturity_date",
        "q_fix_per_year",
        "q_fl_per_year",
        "forward_starting",
        "reported_value_eur",
    ])?;
    for t in trades {
        w.write_record([
            t.valuation_date.to_string(),
            t.trade_id.clone(),
            t.bank.clone(),
            t.product.as_str().to_string(),
            t.side.as_str().to_string(),
            fmt_eur(t.notional),
            fmt_pct(t.fixed_rate_pct),
            t.float_index.as_str().to_string(),
            t.float_tenor_months.to_string(),
            t.effective_date.to_string(),
            t.maturity_date.to_string(),
            fmt_pct(t.q_fix_per_year),
            fmt_pct(t.q_fl_per_year),
            t.forward_starting.to_string(),
            fmt_opt_eur(t.reported_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_valuations(path: &Path, book: &PricedBook) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "trade_id", "model_value_eur", "dv01_eur", "matured"])?;
    for (trade, valuation) in book.trades.iter().zip(&book.valuations) {
        w.write_record([
            trade.valuation_date.to_string(),
            trade.trade_id.clone(),
            fmt_eur(valuation.model_value),
            fmt_eur(valuation.dv01),
            valuation.matured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_plotdata(
    dir: &Path,
    book: &PricedBook,
    exposures: &[BankExposure],
    report: &QualityReport,
) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)?;

    // Gross notional outstanding by product (system-wide).
    let mut gross: BTreeMap<(NaiveDate, Product), f64> = BTreeMap::new();
    for trade in &book.trades {
        *gross.entry((trade.valuation_date, trade.product)).or_default() += trade.notional;
    }
    let mut w = csv::Writer::from_path(dir.join("gross_notional.csv"))?;
    w.write_record(["date", "product", "gross_notional_eur"])?;
    for ((date, product), notional) in gross {
        w.write_record([date.to_string(), product.as_str().to_string(), fmt_eur(notional)])?;
    }
    w.flush()?;

    let system_rows: Vec<&BankExposure> =
        exposures.iter().filter(|e| e.bank == SYSTEM_BANK).collect();

    let mut w = csv::Writer::from_path(dir.join("net_notional_by_bucket.csv"))?;
    w.write_record([
        "date",
        "net_total_eur",
        "net_lt_1y_eur",
        "net_1y_5y_eur",
        "net_5y_10y_eur",
        "net_gt_10y_eur",
    ])?;
    for e in &system_rows {
        w.write_record([
            e.date.to_string(),
            fmt_eur(e.swap_net_long_notional),
            fmt_eur(e.net_notional_by_bucket[0]),
            fmt_eur(e.net_notional_by_bucket[1]),
            fmt_eur(e.net_notional_by_bucket[2]),
            fmt_eur(e.net_notional_by_bucket[3]),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("sensitivity.csv"))?;
    w.write_record([
        "date",
        "swap_dv01_eur",
        "ac_bond_dv01_eur",
        "fv_bond_dv01_eur",
        "fv_plus_swap_dv01_eur",
        "total_dv01_eur",
    ])?;
    for e in &system_rows {
        w.write_record([
            e.date.to_string(),
            fmt_eur(e.swap_dv01),
            fmt_eur(e.ac_bond_dv01),
            fmt_eur(e.fv_bond_dv01),
            fmt_eur(e.swap_dv01 + e.fv_bond_dv01),
            fmt_eur(e.swap_dv01 + e.fv_bond_dv01 + e.ac_bond_dv01),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("ratios.csv"))?;
    w.write_record([
        "date",
        "ratio_swap_dv01_to_equity_pct",
        "ratio_swap_plus_fv_to_equity_pct",
        "ratio_total_to_equity_pct",
    ])?;
    for e in &system_rows {
        w.write_record([
            e.date.to_string(),
            fmt_opt_pct(e.ratio_swap_dv01_to_equity_pct),
            fmt_opt_pct(e.ratio_swap_plus_fv_to_equity_pct),
            fmt_opt_pct(e.ratio_total_to_equity_pct),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("swap_dv01_by_bucket.csv"))?;
    w.write_record([
        "date",
        "total_eur",
        "dv01_lt_1y_eur",
        "dv01_1y_5y_eur",
        "dv01_5y_10y_eur",
        "dv01_gt_10y_eur",
    ])?;
    for e in &system_rows {
        w.write_record([
            e.date.to_string(),
            fmt_eur(e.swap_dv01),
            fmt_eur(e.dv01_by_bucket[0]),
            fmt_eur(e.dv01_by_bucket[1]),
            fmt_eur(e.dv01_by_bucket[2]),
            fmt_eur(e.dv01_by_bucket[3]),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("level_error_percentiles.csv"))?;
    w.write_record(["date", "p25_eur", "p50_eur", "p75_eur"])?;
    for row in &report.level_error_percentiles {
        w.write_record([
            row.date.clone(),
            fmt_eur(row.p25),
            fmt_eur(row.p50),
            fmt_eur(row.p75),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("change_error_percentiles.csv"))?;
    w.write_record(["date", "p25_eur", "p50_eur", "p75_eur"])?;
    for row in &report.change_error_percentiles {
        w.write_record([
            row.date.clone(),
            fmt_eur(row.p25),
            fmt_eur(row.p50),
            fmt_eur(row.p75),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("portfolio_fit.csv"))?;
    w.write_record(["date", "reported_sum_eur", "model_sum_eur"])?;
    for row in &report.portfolio_levels {
        w.write_record([row.date.clone(), fmt_eur(row.reported), fmt_eur(row.model)])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("portfolio_fit_changes.csv"))?;
    w.write_record(["date", "delta_reported_eur", "delta_model_eur"])?;
    for row in &report.portfolio_changes {
        w.write_record([row.date.clone(), fmt_eur(row.reported), fmt_eur(row.model)])?;
    }
    w.flush()?;

    Ok(())
}

/// Summary of a run, for CLI reporting.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub curves_written: usize,
    pub trades_priced: usize,
    pub trades_rejected: usize,
    pub exposures_written: usize,
    pub n_pairs: usize,
    pub warnings: Vec<String>,
}

/// Bootstrap curves for every (index, date) in the quote file and write
/// one CSV per curve (`tenor_months,zero_rate_decimal`).
pub fn run_bootstrap(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let quotes = QuoteBook::load(&config.quotes)?;
    fs::create_dir_all(&config.out_dir)?;
    let mut summary = RunSummary::default();

    let ois_dates = quotes.dates(RateIndex::OisEstr);
    let euribor_dates = quotes.dates(RateIndex::Euribor6m);
    for date in ois_dates.union(&euribor_dates) {
        for index in [RateIndex::OisEstr, RateIndex::Euribor6m] {
            if quotes.quotes(index, *date).is_none() {
                summary
                    .warnings
                    .push(format!("no {index} quotes for {date}; curve skipped"));
                continue;
            }
            let curve = quotes.curve(index, *date)?;
            let path = config
                .out_dir
                .join(format!("curve_{}_{}.csv", index.as_str(), date));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["tenor_months", "zero_rate_decimal"])?;
            for months in 1..=curve.max_months() {
                w.write_record([
                    months.to_string(),
                    format!("{:.12}", curve.spot_rate(months).expect("dense grid")),
                ])?;
            }
            w.flush()?;
            summary.curves_written += 1;
        }
    }
    Ok(summary)
}

fn load_optional_fixings(config: &RunConfig) -> Result<FixingSeries, PipelineError> {
    match &config.fixings {
        Some(path) => Ok(read_fixings(path)?),
        None => Ok(FixingSeries::default()),
    }
}

fn load_equity_book(config: &RunConfig) -> Result<EquityBook, PipelineError> {
    match &config.equity {
        Some(path) => Ok(EquityBook::from_records(read_equity(path)?)),
        None => Ok(EquityBook::default()),
    }
}

fn curve_sets_for_dates(
    quotes: &QuoteBook,
    dates: &BTreeSet<NaiveDate>,
    crossover: u32,
) -> Result<BTreeMap<NaiveDate, CurveSet>, PipelineError> {
    dates
        .iter()
        .map(|d| Ok((*d, quotes.curve_set(*d, crossover)?)))
        .collect()
}

/// Shared front half of the price/report/quality commands.
fn prepare_book(config: &RunConfig) -> Result<(PricedBook, EquityBook), PipelineError> {
    let quotes = QuoteBook::load(&config.quotes)?;
    let fixings = load_optional_fixings(config)?;
    let equity = load_equity_book(config)?;
    let in_scope: BTreeSet<String> = equity.banks().cloned().collect();

    let book = match &config.trades {
        Some(trades_path) => {
            let parsed = parse_records(trades_path)?;
            let (records, warnings) =
                select_candidates(parsed.records, &in_scope, config.from, config.to);
            let trade_dates: BTreeSet<NaiveDate> =
                records.iter().map(|r| r.reference_date).collect();
            let curve_sets = curve_sets_for_dates(&quotes, &trade_dates, config.crossover_months)?;
            let cleaned = clean_and_resolve(
                records,
                parsed.rejects,
                warnings,
                &quotes,
                &curve_sets,
                &fixings,
            );
            price_book(cleaned, &curve_sets, &fixings, &config.scenario())?
        }
        None => PricedBook::default(),
    };
    Ok((book, equity))
}

/// `ingest` command: cleaned trades plus rejects.
pub fn run_ingest(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let (book, _) = prepare_book(config)?;
    fs::create_dir_all(&config.out_dir)?;
    write_cleaned_trades(&config.out_dir.join("cleaned_trades.csv"), &book.trades)?;
    write_rejects(&config.out_dir.join("rejects.csv"), &book.rejects)?;
    Ok(RunSummary {
        trades_priced: book.trades.len(),
        trades_rejected: book.rejects.len(),
        warnings: book.warnings,
        ..RunSummary::default()
    })
}

/// `price` command: per-trade valuations plus rejects.
pub fn run_price(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let (book, _) = prepare_book(config)?;
    fs::create_dir_all(&config.out_dir)?;
    write_valuations(&config.out_dir.join("valuations.csv"), &book)?;
    write_rejects(&config.out_dir.join("rejects.csv"), &book.rejects)?;
    Ok(RunSummary {
        trades_priced: book.trades.len(),
        trades_rejected: book.rejects.len(),
        warnings: book.warnings,
        ..RunSummary::default()
    })
}

/// `quality` command: reconciliation report only.
pub fn run_quality(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let (book, _) = prepare_book(config)?;
    fs::create_dir_all(&config.out_dir)?;
    let report = quality_report(&book.trades, &book.valuations, config.outlier_threshold_eur);
    let json = serde_json::to_string_pretty(&report)?;
    fs::File::create(config.out_dir.join("quality_report.json"))?
        .write_all(json.as_bytes())?;
    write_rejects(&config.out_dir.join("rejects.csv"), &book.rejects)?;
    Ok(RunSummary {
        trades_priced: book.trades.len(),
        trades_rejected: book.rejects.len(),
        n_pairs: report.n_pairs,
        warnings: book.warnings,
        ..RunSummary::default()
    })
}

/// `report` command: the full pipeline with every output file.
pub fn run_report(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    let (mut book, equity) = prepare_book(config)?;

    let holdings = match &config.holdings {
        Some(path) => {
            let raw = read_holdings(path)?;
            let (filled, unfilled) = fill_missing_risk_measures(raw);
            for (isin, date) in unfilled {
                book.warnings.push(format!(
                    "holding {isin} on {date}: measures unavailable after filling"
                ));
            }
            filled
        }
        None => Vec::new(),
    };

    // The weekly grid comes from the trade file; a bond-only run falls
    // back to the holding dates.
    let mut report_dates: BTreeSet<NaiveDate> =
        book.trades.iter().map(|t| t.valuation_date).collect();
    if report_dates.is_empty() {
        report_dates = holdings
            .iter()
            .map(|h| h.date)
            .filter(|d| {
                config.from.is_none_or(|f| *d >= f) && config.to.is_none_or(|t| *d <= t)
            })
            .collect();
    }

    let shift = config.scenario().parallel_shift;
    let mut warnings = std::mem::take(&mut book.warnings);
    let exposures = build_exposures(
        &book,
        &holdings,
        &equity,
        shift,
        &report_dates,
        &mut warnings,
    );
    book.warnings = warnings;

    fs::create_dir_all(&config.out_dir)?;
    write_exposures(&config.out_dir.join("exposures.csv"), &exposures)?;
    write_cleaned_trades(&config.out_dir.join("cleaned_trades.csv"), &book.trades)?;
    write_valuations(&config.out_dir.join("valuations.csv"), &book)?;
    write_rejects(&config.out_dir.join("rejects.csv"), &book.rejects)?;

    let report = quality_report(&book.trades, &book.valuations, config.outlier_threshold_eur);
    let json = serde_json::to_string_pretty(&report)?;
    fs::File::create(config.out_dir.join("quality_report.json"))?
        .write_all(json.as_bytes())?;

    write_plotdata(&config.out_dir.join("plotdata"), &book, &exposures, &report)?;

    Ok(RunSummary {
        trades_priced: book.trades.len(),
        trades_rejected: book.rejects.len(),
        exposures_written: exposures.len(),
        n_pairs: report.n_pairs,
        warnings: book.warnings,
        ..RunSummary::default()
    })
}
