//! Spot-curve construction from par swap quotes.
//!
//! Curves are bootstrapped from at-market (par) swap rates: OIS quotes on
//! €STR for the short-to-30y segment and 6-month EURIBOR swap quotes out to
//! 50 years. Par rates are first linearly interpolated onto a quarterly
//! grid (the par bonds are assumed to settle quarterly), then the spot rate
//! for each tenor is solved sequentially from the par-bond pricing identity
//!
//! ```text
//! 100 = sum_{n in {3,6,..,T-3}} C / (1 + z(n)·n/12) + (C + 100) / (1 + z(T)·T/12)
//! ```
//!
//! with quarterly coupon `C = s(T)·100/4`. OIS instruments of up to one
//! year have a single payment, so their par rates are used directly as spot
//! rates. The bootstrapped nodes are densified to a 1-month grid by linear
//! interpolation of the spot rates.
//!
//! All rates are simple (linear) compounded: the discount factor over `m`
//! months is `1/(1 + z·m/12)` and over `d` days `1/(1 + z·d/365)`.
//!
//! Shock scenarios shift every spot node in parallel. Forward rates under a
//! shocked curve are defined as the base forward plus the shift (the shock
//! passes through to forwards in full, it is not re-derived from the
//! shifted spot nodes, which under simple compounding would move forwards
//! by a different amount).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

/// Months of quarterly spacing assumed for par-bond settlement.
const QUARTER_MONTHS: u32 = 3;
/// Par bond notional used throughout the bootstrap.
const PAR: f64 = 100.0;

/// Errors raised while building or querying curves.
#[derive(Debug, Error)]
pub enum CurveError {
    #[error("need at least {needed} quotes, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("duplicate tenor {tenor_months}m in quote set")]
    DuplicateTenor { tenor_months: u32 },
    #[error("invalid curve input: {0}")]
    Validation(String),
    #[error("bootstrap failed at tenor {tenor_months}m: coupon value exceeds par")]
    BootstrapFailure { tenor_months: u32 },
    #[error("tenor {months}m outside curve range [1, {max}]")]
    OutOfRange { months: u32, max: u32 },
    #[error("shock scenario infeasible: discount factor non-positive at tenor {tenor_months}m")]
    ScenarioInfeasible { tenor_months: u32 },
    #[error("quote file row {line}: {reason}")]
    QuoteRow { line: u64, reason: String },
    #[error("failed to read quotes: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse quotes: {0}")]
    Csv(#[from] csv::Error),
}

/// Rate index a curve or quote belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateIndex {
    /// €STR overnight index swaps; quotes out to 30 years.
    OisEstr,
    /// 6-month EURIBOR swaps; quotes out to 50 years.
    Euribor6m,
}

impl RateIndex {
    /// Longest quote tenor admitted for this index, in months.
    pub fn max_quote_months(self) -> u32 {
        match self {
            RateIndex::OisEstr => 360,
            RateIndex::Euribor6m => 600,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateIndex::OisEstr => "OIS_ESTR",
            RateIndex::Euribor6m => "EURIBOR_6M",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "OIS_ESTR" => Some(RateIndex::OisEstr),
            "EURIBOR_6M" => Some(RateIndex::Euribor6m),
            _ => None,
        }
    }
}

impl fmt::Display for RateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One at-market swap quote: the fixed rate making a new swap worth zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParQuote {
    pub as_of_date: NaiveDate,
    pub index: RateIndex,
    pub tenor_months: u32,
    /// Annualized par rate in percent, as carried by quote files.
    pub rate_pct: f64,
}

impl ParQuote {
    pub fn new(
        as_of_date: NaiveDate,
        index: RateIndex,
        tenor_months: u32,
        rate_pct: f64,
    ) -> Result<Self, CurveError> {
        if tenor_months < 1 {
            return Err(CurveError::Validation("tenor must be >= 1 month".into()));
        }
        if tenor_months > index.max_quote_months() {
            return Err(CurveError::Validation(format!(
                "{index} quote tenor {tenor_months}m exceeds {}m",
                index.max_quote_months()
            )));
        }
        if !rate_pct.is_finite() {
            return Err(CurveError::Validation(format!(
                "non-finite rate for tenor {tenor_months}m"
            )));
        }
        Ok(Self {
            as_of_date,
            index,
            tenor_months,
            rate_pct,
        })
    }
}

/// Read `quotes.csv` (`as_of_date,index,tenor_months,rate_pct`). Strict: any
/// malformed row aborts with its line number.
pub fn read_par_quotes(path: &Path) -> Result<Vec<ParQuote>, CurveError> {
    let mut reader = csv::Reader::from_path(path)?;
    {
        let headers = reader.headers()?;
        let expected = ["as_of_date", "index", "tenor_months", "rate_pct"];
        for col in expected {
            if !headers.iter().any(|h| h == col) {
                return Err(CurveError::Validation(format!(
                    "quotes file missing column `{col}`"
                )));
            }
        }
    }
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (c_date, c_index, c_tenor, c_rate) = (
        col("as_of_date"),
        col("index"),
        col("tenor_months"),
        col("rate_pct"),
    );

    let mut quotes = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let row_err = |reason: String| CurveError::QuoteRow { line, reason };

        let as_of = NaiveDate::parse_from_str(field(c_date), "%Y-%m-%d")
            .map_err(|e| row_err(format!("bad as_of_date `{}`: {e}", field(c_date))))?;
        let index = RateIndex::parse(field(c_index))
            .ok_or_else(|| row_err(format!("unknown index `{}`", field(c_index))))?;
        let tenor: u32 = field(c_tenor)
            .parse()
            .map_err(|e| row_err(format!("bad tenor_months `{}`: {e}", field(c_tenor))))?;
        let rate: f64 = field(c_rate)
            .parse()
            .map_err(|e| row_err(format!("bad rate_pct `{}`: {e}", field(c_rate))))?;
        quotes.push(
            ParQuote::new(as_of, index, tenor, rate).map_err(|e| row_err(e.to_string()))?,
        );
    }
    Ok(quotes)
}

fn validate_quote_set(quotes: &[ParQuote]) -> Result<(), CurveError> {
    let first = &quotes[0];
    let mut seen = std::collections::BTreeSet::new();
    for q in quotes {
        if q.index != first.index || q.as_of_date != first.as_of_date {
            return Err(CurveError::Validation(
                "quote set mixes indices or as-of dates".into(),
            ));
        }
        if !seen.insert(q.tenor_months) {
            return Err(CurveError::DuplicateTenor {
                tenor_months: q.tenor_months,
            });
        }
    }
    Ok(())
}

/// Linear interpolation of par rates onto every multiple of `step_months`
/// between the shortest and longest input tenor. Input tenors are kept and
/// reproduced exactly.
pub fn interpolate_par_quotes(
    quotes: &[ParQuote],
    step_months: u32,
) -> Result<Vec<ParQuote>, CurveError> {
    if quotes.len() < 2 {
        return Err(CurveError::InsufficientData {
            needed: 2,
            got: quotes.len(),
        });
    }
    if step_months == 0 {
        return Err(CurveError::Validation("step_months must be >= 1".into()));
    }
    validate_quote_set(quotes)?;

    let mut sorted: Vec<ParQuote> = quotes.to_vec();
    sorted.sort_by_key(|q| q.tenor_months);
    let min = sorted.first().unwrap().tenor_months;
    let max = sorted.last().unwrap().tenor_months;

    let mut tenors: Vec<u32> = sorted.iter().map(|q| q.tenor_months).collect();
    let mut grid = step_months * min.div_ceil(step_months);
    while grid <= max {
        tenors.push(grid);
        grid += step_months;
    }
    tenors.sort_unstable();
    tenors.dedup();

    let mut out = Vec::with_capacity(tenors.len());
    let mut hi = 0usize;
    for tenor in tenors {
        while sorted[hi].tenor_months < tenor {
            hi += 1;
        }
        let rate = if sorted[hi].tenor_months == tenor {
            sorted[hi].rate_pct
        } else {
            let a = &sorted[hi - 1];
            let b = &sorted[hi];
            let w = (tenor - a.tenor_months) as f64 / (b.tenor_months - a.tenor_months) as f64;
            a.rate_pct + w * (b.rate_pct - a.rate_pct)
        };
        out.push(ParQuote {
            as_of_date: sorted[0].as_of_date,
            index: sorted[0].index,
            tenor_months: tenor,
            rate_pct: rate,
        });
    }
    Ok(out)
}

/// Spot curve with annual simple-compounded zero rates on a dense 1-month
/// grid from month 1 to the longest quote tenor.
///
/// A parallel shift, when applied, is stored separately from the base
/// nodes so that forward rates can be reported as base forward plus shift.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotCurve {
    as_of_date: NaiveDate,
    index: RateIndex,
    /// Base zero rate (decimal) for month `i + 1`.
    rates: Vec<f64>,
    /// Parallel shift applied on top of the base nodes, decimal.
    shift: f64,
}

impl SpotCurve {
    /// Build a dense curve from sparse `(tenor_months, zero_rate_decimal)`
    /// nodes: linear interpolation between nodes, flat below the first one.
    pub fn from_nodes(
        as_of_date: NaiveDate,
        index: RateIndex,
        nodes: &[(u32, f64)],
    ) -> Result<Self, CurveError> {
        if nodes.is_empty() {
            return Err(CurveError::InsufficientData { needed: 1, got: 0 });
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(CurveError::Validation(
                    "node tenors must be strictly increasing".into(),
                ));
            }
        }
        if nodes[0].0 < 1 {
            return Err(CurveError::Validation("node tenor below 1 month".into()));
        }

        let max = nodes.last().unwrap().0;
        let mut rates = Vec::with_capacity(max as usize);
        let mut seg = 0usize;
        for month in 1..=max {
            while seg + 1 < nodes.len() && nodes[seg + 1].0 < month {
                seg += 1;
            }
            let rate = if month <= nodes[0].0 {
                nodes[0].1
            } else {
                let (t0, z0) = nodes[seg];
                let (t1, z1) = nodes[seg + 1];
                if month == t1 {
                    z1
                } else {
                    z0 + (z1 - z0) * (month - t0) as f64 / (t1 - t0) as f64
                }
            };
            rates.push(rate);
        }

        let curve = Self {
            as_of_date,
            index,
            rates,
            shift: 0.0,
        };
        curve.check_positive_discounts()?;
        Ok(curve)
    }

    fn check_positive_discounts(&self) -> Result<(), CurveError> {
        for (i, base) in self.rates.iter().enumerate() {
            let months = (i + 1) as u32;
            if 1.0 + (base + self.shift) * months as f64 / 12.0 <= 0.0 {
                return Err(CurveError::ScenarioInfeasible {
                    tenor_months: months,
                });
            }
        }
        Ok(())
    }

    pub fn as_of_date(&self) -> NaiveDate {
        self.as_of_date
    }

    pub fn index(&self) -> RateIndex {
        self.index
    }

    /// Longest tenor on the dense grid, in months.
    pub fn max_months(&self) -> u32 {
        self.rates.len() as u32
    }

    /// Applied parallel shift, decimal.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Zero rate at an exact grid month, shift included.
    pub fn spot_rate(&self, months: u32) -> Result<f64, CurveError> {
        if months < 1 || months > self.max_months() {
            return Err(CurveError::OutOfRange {
                months,
                max: self.max_months(),
            });
        }
        Ok(self.rates[(months - 1) as usize] + self.shift)
    }

    /// Zero rate with flat extrapolation beyond the grid. Used for
    /// schedule frames that were capped at 50 years.
    pub fn spot_rate_clamped(&self, months: u32) -> f64 {
        let m = months.clamp(1, self.max_months());
        self.rates[(m - 1) as usize] + self.shift
    }

    /// Annualized simple forward rate between `t1` and `t2` months implied
    /// by no-arbitrage. `t1 = 0` denotes a period starting now. Under a
    /// shifted curve this is the base forward plus the shift.
    pub fn forward_rate(&self, t1_months: u32, t2_months: u32) -> Result<f64, CurveError> {
        if t1_months >= t2_months {
            return Err(CurveError::Validation(format!(
                "forward needs t1 < t2, got {t1_months} >= {t2_months}"
            )));
        }
        if t2_months > self.max_months() {
            return Err(CurveError::OutOfRange {
                months: t2_months,
                max: self.max_months(),
            });
        }
        Ok(self.base_forward(t1_months, t2_months) + self.shift)
    }

    /// Forward rate with both ends clamped to the grid. A period squeezed
    /// into a single grid month (or lying entirely beyond the grid)
    /// degrades to the zero rate at its end.
    pub fn forward_rate_clamped(&self, t1_months: u32, t2_months: u32) -> f64 {
        let max = self.max_months();
        let t2 = t2_months.min(max);
        let t1 = t1_months.min(t2);
        if t1 >= t2 {
            return self.spot_rate_clamped(t2.max(1));
        }
        self.base_forward(t1, t2) + self.shift
    }

    fn base_forward(&self, t1: u32, t2: u32) -> f64 {
        if t1 == 0 {
            // f(0, T) = z(T), exactly.
            return self.rates[(t2 - 1) as usize];
        }
        let grow =
            |months: u32| -> f64 { 1.0 + self.rates[(months - 1) as usize] * months as f64 / 12.0 };
        12.0 / (t2 - t1) as f64 * (grow(t2) / grow(t1) - 1.0)
    }

    /// Curve with an additional parallel shift on every node.
    pub fn shifted(&self, shift: f64) -> Result<Self, CurveError> {
        let out = Self {
            shift: self.shift + shift,
            ..self.clone()
        };
        out.check_positive_discounts()?;
        Ok(out)
    }
}

/// Bootstrap a spot curve from a dense quarterly par-quote set.
///
/// Expects quotes at every 3-month tenor from 3 months to the longest
/// tenor. OIS quotes of up to 12 months (and quotes of up to 3 months on
/// any index) are single-payment instruments whose par rates are the spot
/// rates themselves; longer tenors are solved sequentially from the
/// par-bond identity. The node set is densified to 1-month spacing.
pub fn bootstrap_spot_curve(
    quotes: &[ParQuote],
    index: RateIndex,
) -> Result<SpotCurve, CurveError> {
    if quotes.is_empty() {
        return Err(CurveError::InsufficientData { needed: 1, got: 0 });
    }
    validate_quote_set(quotes)?;
    if quotes[0].index != index {
        return Err(CurveError::Validation(format!(
            "quotes are for {}, expected {index}",
            quotes[0].index
        )));
    }

    let mut sorted: Vec<ParQuote> = quotes.to_vec();
    sorted.sort_by_key(|q| q.tenor_months);

    let quarterly: Vec<u32> = sorted
        .iter()
        .map(|q| q.tenor_months)
        .filter(|t| t % QUARTER_MONTHS == 0)
        .collect();
    for (i, tenor) in quarterly.iter().enumerate() {
        if *tenor != (i as u32 + 1) * QUARTER_MONTHS {
            return Err(CurveError::Validation(format!(
                "quarterly quote grid must be contiguous from 3m, missing {}m",
                (i as u32 + 1) * QUARTER_MONTHS
            )));
        }
    }

    let mut nodes: BTreeMap<u32, f64> = BTreeMap::new();
    // Running sum of 1/(1 + z(n)·n/12) over the quarterly grid below the
    // tenor being solved.
    let mut annuity = 0.0;

    for quote in &sorted {
        let tenor = quote.tenor_months;
        let rate = quote.rate_pct / 100.0;
        let direct = tenor <= QUARTER_MONTHS || (index == RateIndex::OisEstr && tenor <= 12);

        let spot = if direct {
            rate
        } else if tenor % QUARTER_MONTHS == 0 {
            let coupon = rate * PAR / 4.0;
            let denom = PAR - coupon * annuity;
            if denom <= 0.0 {
                return Err(CurveError::BootstrapFailure {
                    tenor_months: tenor,
                });
            }
            12.0 / tenor as f64 * ((coupon + PAR) / denom - 1.0)
        } else {
            return Err(CurveError::Validation(format!(
                "cannot bootstrap off-grid tenor {tenor}m (not quarterly, not single-payment)"
            )));
        };

        nodes.insert(tenor, spot);
        if tenor % QUARTER_MONTHS == 0 {
            annuity += 1.0 / (1.0 + spot * tenor as f64 / 12.0);
        }
    }

    let node_vec: Vec<(u32, f64)> = nodes.into_iter().collect();
    SpotCurve::from_nodes(sorted[0].as_of_date, index, &node_vec)
}

/// Full curve build from raw quotes of one index and date: quarterly
/// interpolation, flat extension below the shortest quote, bootstrap,
/// monthly densification. A single quote skips the interpolation step.
pub fn build_spot_curve(quotes: &[ParQuote], index: RateIndex) -> Result<SpotCurve, CurveError> {
    if quotes.is_empty() {
        return Err(CurveError::InsufficientData { needed: 1, got: 0 });
    }
    let mut dense = if quotes.len() == 1 {
        quotes.to_vec()
    } else {
        interpolate_par_quotes(quotes, QUARTER_MONTHS)?
    };
    dense.sort_by_key(|q| q.tenor_months);

    // Flat extension below the shortest quote so the quarterly grid starts
    // at 3 months, as the sequential solve requires.
    let min = dense[0].tenor_months;
    let head = dense[0];
    let mut grid = QUARTER_MONTHS;
    let mut prefix = Vec::new();
    while grid < min {
        prefix.push(ParQuote {
            tenor_months: grid,
            ..head
        });
        grid += QUARTER_MONTHS;
    }
    if !prefix.is_empty() {
        prefix.extend(dense);
        dense = prefix;
    }

    bootstrap_spot_curve(&dense, index)
}

/// Parallel shock applied to a curve set, decimal (0.01 = 100bp).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockScenario {
    pub parallel_shift: f64,
}

impl ShockScenario {
    pub fn from_bp(bp: i64) -> Self {
        Self {
            parallel_shift: bp as f64 / 10_000.0,
        }
    }
}

/// The OIS and EURIBOR curves of one date plus the crossover tenor that
/// decides which curve discounts a cash flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    ois: SpotCurve,
    euribor: SpotCurve,
    crossover_months: u32,
}

/// Default discounting crossover: OIS out to 30 years, EURIBOR beyond.
pub const DEFAULT_CROSSOVER_MONTHS: u32 = 360;

impl CurveSet {
    pub fn new(
        ois: SpotCurve,
        euribor: SpotCurve,
        crossover_months: u32,
    ) -> Result<Self, CurveError> {
        if ois.index() != RateIndex::OisEstr || euribor.index() != RateIndex::Euribor6m {
            return Err(CurveError::Validation(
                "curve set needs one OIS_ESTR and one EURIBOR_6M curve".into(),
            ));
        }
        if ois.as_of_date() != euribor.as_of_date() {
            return Err(CurveError::Validation(
                "curves in a set must share the as-of date".into(),
            ));
        }
        if crossover_months > ois.max_months() {
            return Err(CurveError::Validation(format!(
                "crossover {crossover_months}m beyond OIS curve end {}m",
                ois.max_months()
            )));
        }
        Ok(Self {
            ois,
            euribor,
            crossover_months,
        })
    }

    pub fn as_of_date(&self) -> NaiveDate {
        self.ois.as_of_date()
    }

    pub fn crossover_months(&self) -> u32 {
        self.crossover_months
    }

    pub fn curve(&self, index: RateIndex) -> &SpotCurve {
        match index {
            RateIndex::OisEstr => &self.ois,
            RateIndex::Euribor6m => &self.euribor,
        }
    }

    /// Discount factor `1/(1 + z·days/365)` where `z` is read at the
    /// month frame from the OIS curve up to the crossover tenor and from
    /// the EURIBOR curve beyond it.
    pub fn discount_factor(&self, months: u32, days: i64) -> Result<f64, CurveError> {
        if months < 1 || months > self.euribor.max_months().max(self.crossover_months) {
            return Err(CurveError::OutOfRange {
                months,
                max: self.euribor.max_months().max(self.crossover_months),
            });
        }
        if days <= 0 {
            return Err(CurveError::Validation(format!(
                "discounting needs days > 0, got {days}"
            )));
        }
        let z = if months <= self.crossover_months {
            self.ois.spot_rate_clamped(months)
        } else {
            self.euribor.spot_rate_clamped(months)
        };
        let denom = 1.0 + z * days as f64 / 365.0;
        if denom <= 0.0 {
            return Err(CurveError::ScenarioInfeasible {
                tenor_months: months,
            });
        }
        Ok(1.0 / denom)
    }

    /// New set with every spot node shifted by the scenario's parallel
    /// shift; forwards under the result equal base forward plus shift.
    pub fn apply_shock(&self, scenario: &ShockScenario) -> Result<Self, CurveError> {
        Ok(Self {
            ois: self.ois.shifted(scenario.parallel_shift)?,
            euribor: self.euribor.shifted(scenario.parallel_shift)?,
            crossover_months: self.crossover_months,
        })
    }
}

/// Par swap rate for `tenor_months` implied by a quote set via the same
/// linear interpolation the curve build uses. Quotes must share index and
/// date; tenors outside the quoted range are clamped to the nearest quote.
pub fn par_rate_from_quotes(quotes: &[ParQuote], tenor_months: u32) -> Option<f64> {
    if quotes.is_empty() {
        return None;
    }
    let mut sorted: Vec<&ParQuote> = quotes.iter().collect();
    sorted.sort_by_key(|q| q.tenor_months);
    if tenor_months <= sorted[0].tenor_months {
        return Some(sorted[0].rate_pct);
    }
    if tenor_months >= sorted.last().unwrap().tenor_months {
        return Some(sorted.last().unwrap().rate_pct);
    }
    let hi = sorted
        .iter()
        .position(|q| q.tenor_months >= tenor_months)
        .unwrap();
    let (a, b) = (sorted[hi - 1], sorted[hi]);
    if b.tenor_months == tenor_months {
        return Some(b.rate_pct);
    }
    let w = (tenor_months - a.tenor_months) as f64 / (b.tenor_months - a.tenor_months) as f64;
    Some(a.rate_pct + w * (b.rate_pct - a.rate_pct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 1, 6).unwrap()
    }

    fn quote(index: RateIndex, tenor: u32, rate_pct: f64) -> ParQuote {
        ParQuote::new(date(), index, tenor, rate_pct).unwrap()
    }

    #[test]
    fn interpolation_matches_hand_values() {
        let quotes = vec![
            quote(RateIndex::Euribor6m, 12, 1.0),
            quote(RateIndex::Euribor6m, 24, 2.0),
        ];
        let dense = interpolate_par_quotes(&quotes, 3).unwrap();
        let tenors: Vec<u32> = dense.iter().map(|q| q.tenor_months).collect();
        assert_eq!(tenors, vec![12, 15, 18, 21, 24]);
        let at = |t: u32| dense.iter().find(|q| q.tenor_months == t).unwrap().rate_pct;
        assert_relative_eq!(at(15), 1.25, max_relative = 1e-12);
        assert_relative_eq!(at(12), 1.0, max_relative = 1e-15);
        assert_relative_eq!(at(24), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn interpolation_of_constant_quotes_is_constant() {
        let quotes = vec![
            quote(RateIndex::Euribor6m, 12, 1.0),
            quote(RateIndex::Euribor6m, 24, 1.0),
        ];
        let dense = interpolate_par_quotes(&quotes, 3).unwrap();
        assert!(dense.iter().all(|q| (q.rate_pct - 1.0).abs() < 1e-15));
    }

    #[test]
    fn interpolation_rejects_thin_or_duplicated_input() {
        let single = vec![quote(RateIndex::OisEstr, 3, 2.0)];
        assert!(matches!(
            interpolate_par_quotes(&single, 3),
            Err(CurveError::InsufficientData { .. })
        ));
        let dup = vec![
            quote(RateIndex::OisEstr, 6, 2.0),
            quote(RateIndex::OisEstr, 6, 2.1),
        ];
        assert!(matches!(
            interpolate_par_quotes(&dup, 3),
            Err(CurveError::DuplicateTenor { tenor_months: 6 })
        ));
    }

    #[test]
    fn interpolation_is_idempotent_on_dense_sets() {
        let quotes = vec![
            quote(RateIndex::Euribor6m, 12, 1.0),
            quote(RateIndex::Euribor6m, 24, 2.0),
        ];
        let dense = interpolate_par_quotes(&quotes, 3).unwrap();
        let again = interpolate_par_quotes(&dense, 3).unwrap();
        assert_eq!(dense, again);
    }

    #[test]
    fn bootstrap_six_month_step_matches_hand_evaluation() {
        // z(3m) = 1.00% direct, s(6m) = 1.20%: the 6m spot solves the
        // two-payment par bond with C = 0.3.
        let quotes = vec![
            quote(RateIndex::Euribor6m, 3, 1.0),
            quote(RateIndex::Euribor6m, 6, 1.2),
        ];
        let curve = bootstrap_spot_curve(&quotes, RateIndex::Euribor6m).unwrap();
        let expected = 2.0 * (100.3 / (100.0 - 0.3 / 1.0025) - 1.0);
        assert_relative_eq!(curve.spot_rate(6).unwrap(), expected, epsilon = 1e-12);
        assert!((curve.spot_rate(6).unwrap() - 0.0120210).abs() < 1e-7);
        assert_relative_eq!(curve.spot_rate(3).unwrap(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn single_short_ois_quote_is_the_spot_rate() {
        let quotes = vec![quote(RateIndex::OisEstr, 3, 2.0)];
        let curve = build_spot_curve(&quotes, RateIndex::OisEstr).unwrap();
        assert_relative_eq!(curve.spot_rate(3).unwrap(), 0.02, epsilon = 1e-15);
        assert_eq!(curve.max_months(), 3);
    }

    /// Brute-force repricing of each quarterly par bond against the
    /// bootstrapped curve; a flat par structure must reprice to 100.
    #[test]
    fn bootstrap_round_trip_on_flat_quotes() {
        let quotes: Vec<ParQuote> = (1..=40)
            .map(|i| quote(RateIndex::Euribor6m, i * 3, 1.0))
            .collect();
        let curve = build_spot_curve(&quotes, RateIndex::Euribor6m).unwrap();
        for q in &quotes {
            let price = reprice_par_bond(&curve, q.tenor_months, q.rate_pct / 100.0);
            assert_relative_eq!(price, 100.0, max_relative = 1e-9);
        }
    }

    /// Test-side par-bond pricer, independent of the bootstrap internals.
    fn reprice_par_bond(curve: &SpotCurve, tenor: u32, par_rate: f64) -> f64 {
        let coupon = par_rate * 100.0 / 4.0;
        let mut price = 0.0;
        let mut m = 3;
        while m <= tenor {
            let z = curve.spot_rate(m).unwrap();
            let df = 1.0 / (1.0 + z * m as f64 / 12.0);
            price += coupon * df;
            if m == tenor {
                price += 100.0 * df;
            }
            m += 3;
        }
        price
    }

    #[test]
    fn bootstrap_failure_names_the_tenor() {
        // A 450% par rate at 6m makes the 3m coupon value alone exceed par.
        let quotes = vec![
            quote(RateIndex::Euribor6m, 3, 1.0),
            quote(RateIndex::Euribor6m, 6, 450.0),
        ];
        match bootstrap_spot_curve(&quotes, RateIndex::Euribor6m) {
            Err(CurveError::BootstrapFailure { tenor_months: 6 }) => {}
            other => panic!("expected bootstrap failure at 6m, got {other:?}"),
        }
    }

    #[test]
    fn spot_rate_lookup_and_bounds() {
        let curve =
            SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(12, 0.02)]).unwrap();
        assert_eq!(curve.spot_rate(12).unwrap(), 0.02);
        assert!(matches!(
            curve.spot_rate(0),
            Err(CurveError::OutOfRange { .. })
        ));
        assert!(matches!(
            curve.spot_rate(13),
            Err(CurveError::OutOfRange { .. })
        ));
        assert_eq!(curve.spot_rate(curve.max_months()).unwrap(), 0.02);
    }

    #[test]
    fn forward_rate_matches_hand_evaluation() {
        let curve =
            SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(6, 0.01), (12, 0.02)])
                .unwrap();
        let f = curve.forward_rate(6, 12).unwrap();
        assert_relative_eq!(f, 2.0 * (1.02 / 1.005 - 1.0), epsilon = 1e-15);
        assert!((f - 0.0298507).abs() < 1e-7);
    }

    #[test]
    fn forward_from_zero_equals_spot() {
        let curve = SpotCurve::from_nodes(
            date(),
            RateIndex::Euribor6m,
            &[(6, 0.013), (12, 0.02), (24, 0.024)],
        )
        .unwrap();
        for t in [1, 6, 12, 18, 24] {
            assert_eq!(
                curve.forward_rate(0, t).unwrap(),
                curve.spot_rate(t).unwrap()
            );
        }
    }

    #[test]
    fn flat_curve_is_not_a_forward_fixed_point() {
        let curve =
            SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(24, 0.02)]).unwrap();
        let f = curve.forward_rate(12, 24).unwrap();
        assert_relative_eq!(f, 1.04 / 1.02 - 1.0, epsilon = 1e-15);
        assert!((f - 0.0196078).abs() < 1e-7);
    }

    #[test]
    fn forward_rejects_inverted_interval() {
        let curve =
            SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(24, 0.02)]).unwrap();
        assert!(curve.forward_rate(12, 12).is_err());
        assert!(curve.forward_rate(13, 12).is_err());
    }

    fn flat_set(ois: f64, euribor: f64) -> CurveSet {
        let o = SpotCurve::from_nodes(date(), RateIndex::OisEstr, &[(360, ois)]).unwrap();
        let e = SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(600, euribor)]).unwrap();
        CurveSet::new(o, e, DEFAULT_CROSSOVER_MONTHS).unwrap()
    }

    #[test]
    fn discount_factor_actual_365() {
        let set = flat_set(0.02, 0.02);
        assert_relative_eq!(
            set.discount_factor(12, 365).unwrap(),
            1.0 / 1.02,
            epsilon = 1e-15
        );
        let zero = flat_set(0.0, 0.0);
        assert_eq!(zero.discount_factor(12, 365).unwrap(), 1.0);
    }

    #[test]
    fn discount_crossover_selects_euribor_beyond_360() {
        let set = flat_set(0.01, 0.03);
        let at_360 = set.discount_factor(360, 360 * 30).unwrap();
        let at_361 = set.discount_factor(361, 361 * 30).unwrap();
        assert_relative_eq!(
            at_360,
            1.0 / (1.0 + 0.01 * (360.0 * 30.0) / 365.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            at_361,
            1.0 / (1.0 + 0.03 * (361.0 * 30.0) / 365.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn shock_shifts_spots_and_passes_through_to_forwards() {
        let set = {
            let o = SpotCurve::from_nodes(date(), RateIndex::OisEstr, &[(360, 0.02)]).unwrap();
            let e = SpotCurve::from_nodes(date(), RateIndex::Euribor6m, &[(6, 0.01), (12, 0.02)])
                .unwrap();
            CurveSet::new(o, e, 360).unwrap()
        };
        let shocked = set.apply_shock(&ShockScenario::from_bp(100)).unwrap();
        assert_relative_eq!(
            shocked.curve(RateIndex::Euribor6m).spot_rate(12).unwrap(),
            0.03,
            epsilon = 1e-15
        );
        let base_f = set.curve(RateIndex::Euribor6m).forward_rate(6, 12).unwrap();
        let shocked_f = shocked
            .curve(RateIndex::Euribor6m)
            .forward_rate(6, 12)
            .unwrap();
        assert_relative_eq!(shocked_f, base_f + 0.01, epsilon = 1e-15);
        assert!((shocked_f - 0.0398507).abs() < 1e-7);
    }

    #[test]
    fn zero_shock_is_identity() {
        let set = flat_set(0.02, 0.025);
        let shocked = set.apply_shock(&ShockScenario::from_bp(0)).unwrap();
        assert_eq!(set, shocked);
    }

    #[test]
    fn positive_shock_decreases_every_discount_factor() {
        let set = flat_set(0.02, 0.025);
        let shocked = set.apply_shock(&ShockScenario::from_bp(100)).unwrap();
        for months in [1u32, 12, 60, 360, 480, 600] {
            let days = months as i64 * 30;
            assert!(
                shocked.discount_factor(months, days).unwrap()
                    < set.discount_factor(months, days).unwrap()
            );
        }
    }

    #[test]
    fn infeasible_shock_is_rejected() {
        let set = flat_set(0.001, 0.001);
        // -110% shift drives the long-end month-metric denominator negative.
        let scenario = ShockScenario {
            parallel_shift: -1.1,
        };
        assert!(matches!(
            set.apply_shock(&scenario),
            Err(CurveError::ScenarioInfeasible { .. })
        ));
    }

    #[test]
    fn par_rate_lookup_interpolates_and_clamps() {
        let quotes = vec![
            quote(RateIndex::Euribor6m, 12, 1.0),
            quote(RateIndex::Euribor6m, 24, 2.0),
        ];
        assert_relative_eq!(par_rate_from_quotes(&quotes, 18).unwrap(), 1.5);
        assert_relative_eq!(par_rate_from_quotes(&quotes, 6).unwrap(), 1.0);
        assert_relative_eq!(par_rate_from_quotes(&quotes, 48).unwrap(), 2.0);
        assert!(par_rate_from_quotes(&[], 12).is_none());
    }
}
