//! Full revaluation of IRS, OIS and FRA contracts.
//!
//! A receive-fixed swap is valued as the price of a fixed-rate bond minus
//! the price of a floating-rate bond over the remaining payment schedule:
//!
//! ```text
//! V = B_fix - B_fl
//! B_fix = sum_i C_fix   / (1 + z(n_i)·d_i/365) + N / (1 + z(n_I)·d_I/365)
//! B_fl  = sum_j C_fl_j  / (1 + z(n_j)·d_j/365) + N / (1 + z(n_J)·d_J/365)
//! ```
//!
//! with `C_fix = s·N/q_fix` and floating coupons read off the forward
//! curve of the contract's index, except the first one, which is already
//! fixed when its period started in the past. The pay-fixed value is the
//! exact negation, so mirror positions cancel to zero by construction.
//!
//! FRA are single-period contracts settling the difference between the
//! agreed rate and the forward rate over the accrual period. Overnight
//! index legs pay annually; a coupon period already underway combines the
//! realized compounding factor with the remaining simple accrual, and
//! spot-starting contracts of up to a year scale their single payment by
//! the month fraction of the year.
//!
//! Sensitivities are computed by full revaluation: price under the base
//! and the shocked curve set and take the difference. Known fixings and
//! realized compounding factors are already determined and are not
//! shocked.

use rayon::prelude::*;
use thiserror::Error;

use crate::curve::{CurveError, CurveSet, RateIndex, ShockScenario, SpotCurve};
use crate::dates::month_frame;
use crate::fixings::{FixingContext, FixingSeries};
use crate::ingest::{FloatIndex, Product, Side, SwapTrade};
use crate::schedule::{
    build_schedule_from, PaymentSchedule, ScheduleError, MAX_FRAME_DAYS, MAX_FRAME_MONTHS,
};

#[derive(Debug, Error)]
pub enum PricingError {
    #[error("trade {trade_id} already matured at valuation date")]
    Matured { trade_id: String },
    #[error("trade {trade_id}: missing fixing ({detail})")]
    MissingFixing { trade_id: String, detail: String },
    #[error("trade {trade_id}: unsupported ({reason})")]
    Unsupported { trade_id: String, reason: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

impl PricingError {
    fn from_schedule(err: ScheduleError, trade_id: &str) -> Self {
        match err {
            ScheduleError::Matured { .. } => PricingError::Matured {
                trade_id: trade_id.to_string(),
            },
            ScheduleError::BadFrequency => PricingError::Unsupported {
                trade_id: trade_id.to_string(),
                reason: "payment frequency below one month".into(),
            },
        }
    }
}

/// Valuation result of one trade: model value and 100bp-shift impact.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeValuation {
    pub trade_id: String,
    pub model_value: f64,
    pub dv01: f64,
    /// Trade matured on or before the valuation date; both figures are
    /// zero and the trade is excluded from pricing-quality pairs.
    pub matured: bool,
}

fn forward_curve<'a>(curves: &'a CurveSet, index: FloatIndex) -> &'a SpotCurve {
    match index {
        FloatIndex::Euribor => curves.curve(RateIndex::Euribor6m),
        FloatIndex::Estr => curves.curve(RateIndex::OisEstr),
    }
}

fn signed(side: Side, receive_fixed_value: f64) -> f64 {
    match side {
        Side::ReceiveFixed => receive_fixed_value,
        Side::PayFixed => -receive_fixed_value,
    }
}

impl SwapTrade {
    /// Fixed-leg payment interval in months.
    pub fn fixed_freq_months(&self) -> u32 {
        (12.0 / self.q_fix_per_year).round().max(1.0) as u32
    }

    /// Floating-leg payment interval in months.
    pub fn float_freq_months(&self) -> u32 {
        (12.0 / self.q_fl_per_year).round().max(1.0) as u32
    }
}

/// Price of the fixed leg as a coupon bond.
pub fn price_fixed_leg(
    schedule: &PaymentSchedule,
    notional: f64,
    fixed_rate_pct: f64,
    q_fix: f64,
    curves: &CurveSet,
) -> Result<f64, CurveError> {
    let coupon = fixed_rate_pct / 100.0 * notional / q_fix;
    let mut value = 0.0;
    let count = schedule.count();
    for (i, (months, days)) in schedule
        .frames_months()
        .iter()
        .zip(schedule.frames_days())
        .enumerate()
    {
        let df = curves.discount_factor(*months, *days)?;
        value += coupon * df;
        if i + 1 == count {
            value += notional * df;
        }
    }
    Ok(value)
}

/// Price of the floating leg as a floating-rate bond.
///
/// The first coupon uses the known fixing when its period already started,
/// or the forward rate from the period start otherwise; later coupons use
/// forwards between consecutive payment frames, all read off the curve of
/// `float_index`.
pub fn price_float_leg(
    schedule: &PaymentSchedule,
    notional: f64,
    q_fl: f64,
    float_index: FloatIndex,
    fixing: &FixingContext,
    curves: &CurveSet,
    trade_id: &str,
) -> Result<f64, PricingError> {
    let fwd = forward_curve(curves, float_index);
    let months = schedule.frames_months();
    let days = schedule.frames_days();
    let count = schedule.count();

    let first_rate = match schedule.first_period_start_frame() {
        Some(start) => fwd.forward_rate_clamped(start, months[0]),
        None => fixing
            .first_coupon_known_rate
            .ok_or_else(|| PricingError::MissingFixing {
                trade_id: trade_id.to_string(),
                detail: format!(
                    "first floating period started {} before valuation",
                    schedule.first_period_start()
                ),
            })?,
    };

    let mut value = 0.0;
    for j in 0..count {
        let rate = if j == 0 {
            first_rate
        } else {
            fwd.forward_rate_clamped(months[j - 1], months[j])
        };
        let df = curves.discount_factor(months[j], days[j])?;
        value += rate * notional / q_fl * df;
        if j + 1 == count {
            value += notional * df;
        }
    }
    Ok(value)
}

/// Value of an interest rate swap for the trade's side.
///
/// Forward-starting trades schedule only payments after the effective
/// date; their first floating coupon is a forward rate and needs no
/// fixing.
pub fn price_irs(
    trade: &SwapTrade,
    curves: &CurveSet,
    fixing: &FixingContext,
) -> Result<f64, PricingError> {
    debug_assert_eq!(trade.product, Product::Irs);
    let t0 = curves.as_of_date();
    let barrier = if trade.forward_starting {
        trade.effective_date
    } else {
        t0
    };
    let fixed_schedule =
        build_schedule_from(t0, barrier, trade.maturity_date, trade.fixed_freq_months())
            .map_err(|e| PricingError::from_schedule(e, &trade.trade_id))?;
    let float_schedule =
        build_schedule_from(t0, barrier, trade.maturity_date, trade.float_freq_months())
            .map_err(|e| PricingError::from_schedule(e, &trade.trade_id))?;

    let fixed = price_fixed_leg(
        &fixed_schedule,
        trade.notional,
        trade.fixed_rate_pct,
        trade.q_fix_per_year,
        curves,
    )?;
    let float = price_float_leg(
        &float_schedule,
        trade.notional,
        trade.q_fl_per_year,
        trade.float_index,
        fixing,
        curves,
        &trade.trade_id,
    )?;
    Ok(signed(trade.side, fixed - float))
}

/// Value of a forward rate agreement.
///
/// The receive-fixed value is the agreed rate minus the forward rate over
/// the accrual period, scaled by notional and the period length in years
/// (whole months over twelve) and discounted from maturity.
pub fn price_fra(trade: &SwapTrade, curves: &CurveSet) -> Result<f64, PricingError> {
    debug_assert_eq!(trade.product, Product::Fra);
    let t0 = curves.as_of_date();
    if trade.maturity_date <= t0 {
        return Err(PricingError::Matured {
            trade_id: trade.trade_id.clone(),
        });
    }
    if trade.effective_date < t0 {
        return Err(PricingError::Unsupported {
            trade_id: trade.trade_id.clone(),
            reason: "valuation date inside the accrual period".into(),
        });
    }

    let start_frame = (month_frame(t0, trade.effective_date).max(0) as u32).min(MAX_FRAME_MONTHS);
    let end_frame = (month_frame(t0, trade.maturity_date).max(1) as u32).min(MAX_FRAME_MONTHS);
    let end_days = (trade.maturity_date - t0).num_days().min(MAX_FRAME_DAYS);

    let forward = forward_curve(curves, trade.float_index).forward_rate_clamped(start_frame, end_frame);
    let accrual_months = month_frame(trade.effective_date, trade.maturity_date).max(1) as f64;
    let tau = accrual_months / 12.0;
    let df = curves.discount_factor(end_frame, end_days)?;

    let fixed = trade.fixed_rate_pct / 100.0;
    Ok(signed(trade.side, (fixed - forward) * trade.notional * tau * df))
}

/// Value of an overnight index swap.
///
/// Payments are annual. When the valuation date falls inside a coupon
/// period the first floating rate combines the realized compounding
/// factor with the remaining simple accrual:
/// `factor·(1 + z(rem)·rem/12) - 1`. Spot-starting contracts with at most
/// twelve months between effective date and maturity make one payment
/// scaled by `months/12`; forward-starting contracts always apply full
/// rates to each annual payment.
pub fn price_ois(
    trade: &SwapTrade,
    curves: &CurveSet,
    fixing: &FixingContext,
) -> Result<f64, PricingError> {
    debug_assert_eq!(trade.product, Product::Ois);
    let t0 = curves.as_of_date();
    let ois_curve = curves.curve(RateIndex::OisEstr);
    let fixed = trade.fixed_rate_pct / 100.0;
    let term_months = month_frame(trade.effective_date, trade.maturity_date);

    if !trade.forward_starting && term_months <= 12 {
        // Single payment at maturity, both legs scaled by months/12.
        if trade.maturity_date <= t0 {
            return Err(PricingError::Matured {
                trade_id: trade.trade_id.clone(),
            });
        }
        let frame = (month_frame(t0, trade.maturity_date).max(1) as u32).min(MAX_FRAME_MONTHS);
        let days = (trade.maturity_date - t0).num_days().min(MAX_FRAME_DAYS);
        let fraction = term_months.max(1) as f64 / 12.0;

        let factor = if trade.effective_date < t0 {
            fixing
                .realized_compounding_factor
                .ok_or_else(|| PricingError::MissingFixing {
                    trade_id: trade.trade_id.clone(),
                    detail: format!(
                        "realized compounding from {} to {t0}",
                        trade.effective_date
                    ),
                })?
        } else {
            1.0
        };
        let remaining = 1.0 + ois_curve.spot_rate_clamped(frame) * frame as f64 / 12.0;
        let float_payment = trade.notional * (factor * remaining - 1.0);
        let fixed_payment = trade.notional * fixed * fraction;

        let df = curves.discount_factor(frame, days)?;
        return Ok(signed(trade.side, (fixed_payment - float_payment) * df));
    }

    let barrier = if trade.forward_starting {
        trade.effective_date
    } else {
        t0
    };
    let schedule = build_schedule_from(t0, barrier, trade.maturity_date, 12)
        .map_err(|e| PricingError::from_schedule(e, &trade.trade_id))?;
    let months = schedule.frames_months();
    let days = schedule.frames_days();

    let first_rate = match schedule.first_period_start_frame() {
        Some(start) => ois_curve.forward_rate_clamped(start, months[0]),
        None => {
            let factor = fixing.realized_compounding_factor.ok_or_else(|| {
                PricingError::MissingFixing {
                    trade_id: trade.trade_id.clone(),
                    detail: format!(
                        "realized compounding from {} to {t0}",
                        schedule.first_period_start()
                    ),
                }
            })?;
            let remaining = 1.0 + ois_curve.spot_rate_clamped(months[0]) * months[0] as f64 / 12.0;
            factor * remaining - 1.0
        }
    };

    let mut fixed_value = 0.0;
    let mut float_value = 0.0;
    let count = schedule.count();
    for j in 0..count {
        let df = curves.discount_factor(months[j], days[j])?;
        fixed_value += trade.notional * fixed * df;
        let rate = if j == 0 {
            first_rate
        } else {
            ois_curve.forward_rate_clamped(months[j - 1], months[j])
        };
        float_value += trade.notional * rate * df;
        if j + 1 == count {
            fixed_value += trade.notional * df;
            float_value += trade.notional * df;
        }
    }
    Ok(signed(trade.side, fixed_value - float_value))
}

/// Value a trade of any supported product.
pub fn price_trade(
    trade: &SwapTrade,
    curves: &CurveSet,
    fixing: &FixingContext,
) -> Result<f64, PricingError> {
    match trade.product {
        Product::Irs => price_irs(trade, curves, fixing),
        Product::Fra => price_fra(trade, curves),
        Product::Ois => price_ois(trade, curves, fixing),
    }
}

/// Revalue one trade under base and shocked curves.
pub fn revalue_under_shock(
    trade: &SwapTrade,
    curves: &CurveSet,
    scenario: &ShockScenario,
    fixing: &FixingContext,
) -> Result<TradeValuation, PricingError> {
    let shocked = curves.apply_shock(scenario)?;
    revalue_with_sets(trade, curves, &shocked, fixing)
}

/// Revalue one trade given pre-built base and shocked curve sets.
pub fn revalue_with_sets(
    trade: &SwapTrade,
    base: &CurveSet,
    shocked: &CurveSet,
    fixing: &FixingContext,
) -> Result<TradeValuation, PricingError> {
    let model_value = price_trade(trade, base, fixing)?;
    let dv01 = if base == shocked {
        0.0
    } else {
        price_trade(trade, shocked, fixing)? - model_value
    };
    Ok(TradeValuation {
        trade_id: trade.trade_id.clone(),
        model_value,
        dv01,
        matured: false,
    })
}

/// Fixing inputs one trade needs for valuation at `t0`, filled from the
/// historical series. Trades whose first floating period starts at or
/// after `t0` need none.
pub fn fixing_context_for(
    trade: &SwapTrade,
    curves: &CurveSet,
    series: &FixingSeries,
) -> Result<FixingContext, PricingError> {
    let t0 = curves.as_of_date();
    if trade.forward_starting || trade.maturity_date <= t0 {
        return Ok(FixingContext::default());
    }
    match trade.product {
        Product::Fra => Ok(FixingContext::default()),
        Product::Irs => {
            let schedule =
                build_schedule_from(t0, t0, trade.maturity_date, trade.float_freq_months())
                    .map_err(|e| PricingError::from_schedule(e, &trade.trade_id))?;
            if schedule.first_period_start_frame().is_some() {
                return Ok(FixingContext::default());
            }
            let start = schedule.first_period_start();
            series
                .euribor_on_or_before(trade.float_tenor_months, start)
                .map(FixingContext::with_known_rate)
                .ok_or_else(|| PricingError::MissingFixing {
                    trade_id: trade.trade_id.clone(),
                    detail: format!(
                        "no EURIBOR {}m fixing on or before {start}",
                        trade.float_tenor_months
                    ),
                })
        }
        Product::Ois => {
            let term = month_frame(trade.effective_date, trade.maturity_date);
            let period_start = if term <= 12 {
                trade.effective_date
            } else {
                build_schedule_from(t0, t0, trade.maturity_date, 12)
                    .map_err(|e| PricingError::from_schedule(e, &trade.trade_id))?
                    .first_period_start()
            };
            if period_start >= t0 {
                return Ok(FixingContext::default());
            }
            series
                .compound_estr(period_start, t0)
                .map(FixingContext::with_realized_factor)
                .ok_or_else(|| PricingError::MissingFixing {
                    trade_id: trade.trade_id.clone(),
                    detail: format!("no daily rates to compound from {period_start} to {t0}"),
                })
        }
    }
}

/// Batch revaluation: parallel over trades, results in input order.
/// Matured trades value to zero with a flag instead of failing the batch.
pub fn revalue_batch(
    trades: &[SwapTrade],
    base: &CurveSet,
    shocked: &CurveSet,
    series: &FixingSeries,
) -> Vec<Result<TradeValuation, PricingError>> {
    trades
        .par_iter()
        .map(|trade| {
            if trade.maturity_date <= base.as_of_date() {
                return Ok(TradeValuation {
                    trade_id: trade.trade_id.clone(),
                    model_value: 0.0,
                    dv01: 0.0,
                    matured: true,
                });
            }
            let fixing = fixing_context_for(trade, base, series)?;
            match revalue_with_sets(trade, base, shocked, &fixing) {
                Err(PricingError::Matured { trade_id }) => Ok(TradeValuation {
                    trade_id,
                    model_value: 0.0,
                    dv01: 0.0,
                    matured: true,
                }),
                other => other,
            }
        })
        .collect()
}

/// At-market fixed rate (percent) of a fresh spot-starting swap on the
/// given curves: the rate equating the two leg prices.
pub fn at_market_rate_pct(
    valuation: chrono::NaiveDate,
    maturity: chrono::NaiveDate,
    fixed_freq_months: u32,
    float_freq_months: u32,
    float_index: FloatIndex,
    curves: &CurveSet,
) -> Result<f64, PricingError> {
    let fixed_schedule = build_schedule_from(valuation, valuation, maturity, fixed_freq_months)
        .map_err(|e| PricingError::from_schedule(e, "par-solve"))?;
    let float_schedule = build_schedule_from(valuation, valuation, maturity, float_freq_months)
        .map_err(|e| PricingError::from_schedule(e, "par-solve"))?;

    let q_fl = 12.0 / float_freq_months as f64;
    let float_value = price_float_leg(
        &float_schedule,
        1.0,
        q_fl,
        float_index,
        &FixingContext::default(),
        curves,
        "par-solve",
    )?;

    let mut annuity = 0.0;
    let mut final_df = 0.0;
    let count = fixed_schedule.count();
    for (i, (months, days)) in fixed_schedule
        .frames_months()
        .iter()
        .zip(fixed_schedule.frames_days())
        .enumerate()
    {
        let df = curves.discount_factor(*months, *days)?;
        annuity += df;
        if i + 1 == count {
            final_df = df;
        }
    }
    let q_fix = 12.0 / fixed_freq_months as f64;
    let rate = q_fix * (float_value - final_df) / annuity;
    Ok(rate * 100.0)
}
