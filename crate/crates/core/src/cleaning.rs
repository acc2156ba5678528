//! Field repair for candidate trades: fixed-rate scale and outlier
//! cleaning, and resolution of the reported side convention.
//!
//! The side field of a trade report has carried two meanings over time:
//! under the current rules the buyer is the fixed-rate payer, while under
//! the older rules the buyer was the payer of leg 1, which flips the
//! direction whenever leg 1 is the floating leg. The resolver defaults to
//! the current reading and switches to the older one only when the current
//! reading, and not the older, produces model values of opposite sign from
//! the reported ones across the trade's history.

use thiserror::Error;

use crate::ingest::{RawTradeRecord, Side};

/// Fixed rates outside this band (in percent) are treated as outliers.
pub const FIXED_RATE_MIN_PCT: f64 = -2.5;
pub const FIXED_RATE_MAX_PCT: f64 = 25.0;

#[derive(Debug, Error)]
pub enum CleaningError {
    #[error("trade {trade_id}: no fixed-rate field populated")]
    NoFixedRate { trade_id: String },
}

/// Outcome of a fixed-rate repair, for audit trails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRepair {
    Unchanged,
    Rescaled,
    ReplacedByPar,
}

/// Clean the contractual fixed rate of one record.
///
/// The value comes from the price/rate field when populated, else from the
/// populated fixed-rate leg. A value reported in decimals rather than
/// percent is detected by comparing both readings against the par swap
/// rate that prevailed at the contract's effective date for its original
/// maturity: whichever of `r` and `100·r` is closer to par wins. Values
/// still outside the plausible band are replaced by that par rate.
pub fn clean_fixed_rate(
    record: &RawTradeRecord,
    par_rate_at_effective_pct: f64,
) -> Result<(f64, RateRepair), CleaningError> {
    let raw = record
        .price_rate
        .filter(|r| r.is_finite())
        .or(record.fixed_rate_leg1)
        .or(record.fixed_rate_leg2)
        .filter(|r| r.is_finite())
        .ok_or_else(|| CleaningError::NoFixedRate {
            trade_id: record.trade_id.clone(),
        })?;

    let par = par_rate_at_effective_pct;
    let (scaled, repair) = if (100.0 * raw - par).abs() < (raw - par).abs() {
        (100.0 * raw, RateRepair::Rescaled)
    } else {
        (raw, RateRepair::Unchanged)
    };

    if !(FIXED_RATE_MIN_PCT..=FIXED_RATE_MAX_PCT).contains(&scaled) {
        Ok((par, RateRepair::ReplacedByPar))
    } else {
        Ok((scaled, repair))
    }
}

/// Reading of the counterparty-side field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideConvention {
    /// Buyer pays the fixed rate.
    Newer,
    /// Buyer pays leg 1.
    Older,
}

/// Side of the reporting counterparty under a given convention.
///
/// Under the older convention the buyer pays leg 1, so the direction flips
/// relative to the newer one exactly when leg 1 is the floating leg. A
/// record whose leg-1 fields are both blank reads the same under both.
pub fn side_under(record: &RawTradeRecord, convention: SideConvention) -> Side {
    let buys = record.counterparty_side == 'B';
    let buyer_pays_fixed = match convention {
        SideConvention::Newer => true,
        SideConvention::Older => {
            if record.floating_rate_leg1.as_deref().map(str::trim).is_some_and(|l| !l.is_empty()) {
                false
            } else {
                true
            }
        }
    };
    match (buys, buyer_pays_fixed) {
        (true, true) | (false, false) => Side::PayFixed,
        _ => Side::ReceiveFixed,
    }
}

/// Result of resolving the side convention for one trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideResolution {
    pub convention: SideConvention,
    /// Set when no reported value (or no priceable observation) was
    /// available and the default convention was kept unverified.
    pub defaulted: bool,
}

/// Resolve the side convention of one trade from its reporting history.
///
/// `price_under` values a single observation under the given side and may
/// return `None` when the observation cannot be priced. The model series
/// under each convention is rescaled to the reported series' mean absolute
/// value before comparing signs, so the decision is invariant to uniform
/// positive rescaling of either series.
pub fn resolve_side<F>(history: &[RawTradeRecord], mut price_under: F) -> SideResolution
where
    F: FnMut(&RawTradeRecord, Side) -> Option<f64>,
{
    if !history.iter().any(|r| r.contract_value.is_some()) {
        return SideResolution {
            convention: SideConvention::Newer,
            defaulted: true,
        };
    }
    // When both readings agree on every observation the choice is
    // immaterial and no pricing is needed.
    if history
        .iter()
        .all(|r| side_under(r, SideConvention::Newer) == side_under(r, SideConvention::Older))
    {
        return SideResolution {
            convention: SideConvention::Newer,
            defaulted: false,
        };
    }

    let mut reported = Vec::new();
    let mut model_newer = Vec::new();
    let mut model_older = Vec::new();

    for record in history {
        let Some(cv) = record.contract_value else {
            continue;
        };
        let newer_side = side_under(record, SideConvention::Newer);
        let older_side = side_under(record, SideConvention::Older);
        let Some(v_newer) = price_under(record, newer_side) else {
            continue;
        };
        let v_older = if older_side == newer_side {
            v_newer
        } else {
            match price_under(record, older_side) {
                Some(v) => v,
                None => continue,
            }
        };
        reported.push(cv);
        model_newer.push(v_newer);
        model_older.push(v_older);
    }

    if reported.is_empty() {
        return SideResolution {
            convention: SideConvention::Newer,
            defaulted: true,
        };
    }

    let newer_opposite = opposite_sign(&reported, &model_newer);
    let older_opposite = opposite_sign(&reported, &model_older);
    let convention = if newer_opposite && !older_opposite {
        SideConvention::Older
    } else {
        SideConvention::Newer
    };
    SideResolution {
        convention,
        defaulted: false,
    }
}

/// Majority sign disagreement between the reported series and the model
/// series rescaled to the same mean absolute value.
fn opposite_sign(reported: &[f64], model: &[f64]) -> bool {
    let mean_abs = |xs: &[f64]| xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
    let target = mean_abs(reported);
    let current = mean_abs(model);
    let scale = if current > 0.0 { target / current } else { 1.0 };

    let mut disagree = 0usize;
    let mut agree = 0usize;
    for (r, m) in reported.iter().zip(model) {
        let product = r * (m * scale);
        if product < 0.0 {
            disagree += 1;
        } else if product > 0.0 {
            agree += 1;
        }
    }
    disagree > agree
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn record() -> RawTradeRecord {
        RawTradeRecord {
            trade_id: "T1".into(),
            reporting_entity: "BANK_A".into(),
            counterparty: "DEALER_X".into(),
            reference_date: NaiveDate::from_ymd_opt(2021, 1, 6).unwrap(),
            asset_class: "IR".into(),
            contract_type: "SW".into(),
            counterparty_side: 'B',
            notional_1: Some(1_000_000.0),
            notional_1_currency: Some("EUR".into()),
            notional_2: None,
            notional_2_currency: None,
            floating_rate_leg1: None,
            floating_rate_leg2: Some("EURIBOR6M".into()),
            fixed_rate_leg1: Some(2.3),
            fixed_rate_leg2: None,
            price_rate: None,
            effective_date: NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(),
            maturity_date: NaiveDate::from_ymd_opt(2025, 1, 6).unwrap(),
            fixed_pay_freq_months: Some(12),
            float_pay_freq_months: Some(6),
            float_reset_freq_months: Some(6),
            contract_value: Some(10_000.0),
            valuation_timestamp: NaiveDate::from_ymd_opt(2021, 1, 5)
                .unwrap()
                .and_hms_opt(18, 0, 0)
                .unwrap(),
        }
    }

    #[test]
    fn decimal_scale_is_repaired() {
        let mut r = record();
        r.fixed_rate_leg1 = Some(0.025);
        let (rate, repair) = clean_fixed_rate(&r, 2.4).unwrap();
        assert_eq!(rate, 2.5);
        assert_eq!(repair, RateRepair::Rescaled);
    }

    #[test]
    fn percent_scale_is_kept() {
        let (rate, repair) = clean_fixed_rate(&record(), 2.4).unwrap();
        assert_eq!(rate, 2.3);
        assert_eq!(repair, RateRepair::Unchanged);
    }

    #[test]
    fn outlier_is_replaced_by_par() {
        let mut r = record();
        r.fixed_rate_leg1 = Some(30.0);
        let (rate, repair) = clean_fixed_rate(&r, 2.4).unwrap();
        assert_eq!(rate, 2.4);
        assert_eq!(repair, RateRepair::ReplacedByPar);

        let mut low = record();
        low.fixed_rate_leg1 = Some(-8.0);
        let (rate, _) = clean_fixed_rate(&low, 2.4).unwrap();
        assert_eq!(rate, 2.4);
    }

    #[test]
    fn price_rate_takes_precedence() {
        let mut r = record();
        r.price_rate = Some(1.9);
        let (rate, _) = clean_fixed_rate(&r, 2.4).unwrap();
        assert_eq!(rate, 1.9);
    }

    #[test]
    fn missing_rate_is_unrecoverable() {
        let mut r = record();
        r.fixed_rate_leg1 = None;
        assert!(matches!(
            clean_fixed_rate(&r, 2.4),
            Err(CleaningError::NoFixedRate { .. })
        ));
    }

    #[test]
    fn cleaned_rate_stays_in_band_or_equals_par() {
        for raw in [-50.0, -0.02, 0.0, 0.031, 2.2, 24.9, 26.0, 400.0] {
            let mut r = record();
            r.fixed_rate_leg1 = Some(raw);
            let (rate, _) = clean_fixed_rate(&r, 2.4).unwrap();
            assert!(
                (FIXED_RATE_MIN_PCT..=FIXED_RATE_MAX_PCT).contains(&rate) || rate == 2.4,
                "raw {raw} cleaned to {rate}"
            );
        }
    }

    #[test]
    fn side_conventions_agree_when_leg1_is_fixed() {
        let r = record();
        assert_eq!(side_under(&r, SideConvention::Newer), Side::PayFixed);
        assert_eq!(side_under(&r, SideConvention::Older), Side::PayFixed);
    }

    #[test]
    fn side_conventions_flip_when_leg1_is_floating() {
        let mut r = record();
        r.floating_rate_leg1 = Some("EURIBOR6M".into());
        r.floating_rate_leg2 = None;
        r.fixed_rate_leg1 = None;
        r.fixed_rate_leg2 = Some(2.3);
        assert_eq!(side_under(&r, SideConvention::Newer), Side::PayFixed);
        assert_eq!(side_under(&r, SideConvention::Older), Side::ReceiveFixed);
        r.counterparty_side = 'S';
        assert_eq!(side_under(&r, SideConvention::Newer), Side::ReceiveFixed);
        assert_eq!(side_under(&r, SideConvention::Older), Side::PayFixed);
    }

    /// Model values under the newer reading with a sign chosen per side;
    /// the magnitude is irrelevant to the resolution.
    fn signed_pricer(magnitude: f64) -> impl FnMut(&RawTradeRecord, Side) -> Option<f64> {
        move |_, side| {
            Some(match side {
                Side::PayFixed => magnitude,
                Side::ReceiveFixed => -magnitude,
            })
        }
    }

    fn flipped_history(reported: f64) -> Vec<RawTradeRecord> {
        let mut r = record();
        r.floating_rate_leg1 = Some("EURIBOR6M".into());
        r.floating_rate_leg2 = None;
        r.fixed_rate_leg1 = None;
        r.fixed_rate_leg2 = Some(2.3);
        r.contract_value = Some(reported);
        vec![r.clone(), r]
    }

    #[test]
    fn agreeing_signs_keep_newer_convention() {
        // Reporting side B, leg1 fixed: both conventions say pay-fixed.
        let history = vec![record(), record()];
        let res = resolve_side(&history, signed_pricer(5_000.0));
        assert_eq!(res.convention, SideConvention::Newer);
        assert!(!res.defaulted);
    }

    #[test]
    fn opposite_signs_switch_to_older_convention() {
        // Leg1 floating, reported value negative: newer reading prices
        // pay-fixed (positive), older prices receive-fixed (negative).
        let history = flipped_history(-8_000.0);
        let res = resolve_side(&history, signed_pricer(5_000.0));
        assert_eq!(res.convention, SideConvention::Older);
    }

    #[test]
    fn missing_reported_values_default_with_flag() {
        let mut r = record();
        r.contract_value = None;
        let res = resolve_side(&[r], signed_pricer(5_000.0));
        assert_eq!(res.convention, SideConvention::Newer);
        assert!(res.defaulted);
    }

    #[test]
    fn resolution_invariant_to_positive_rescaling_of_reported() {
        for scale in [0.001, 1.0, 1.0e6] {
            let history = flipped_history(-8_000.0 * scale);
            let res = resolve_side(&history, signed_pricer(5_000.0));
            assert_eq!(res.convention, SideConvention::Older, "scale {scale}");
        }
    }
}
