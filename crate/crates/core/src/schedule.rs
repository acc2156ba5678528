//! Payment schedules for swap legs.
//!
//! Schedules are generated backwards from the maturity date in steps of the
//! payment frequency, keeping the dates that fall after the valuation date
//! (or after the effective date for forward-starting trades). For each
//! payment date the time frame from valuation is computed twice: in days
//! (actual count, drives the actual/365 discounting) and in whole months
//! (month-end-shifted count, selects the spot-rate tenor on the monthly
//! curve grid). A payment within the current month gets a 1-month frame;
//! all frames are capped at 50 years, the longest bootstrapped tenor.

use chrono::NaiveDate;
use thiserror::Error;

use crate::dates::{minus_months, month_frame};

/// Cap on month frames: 50 years.
pub const MAX_FRAME_MONTHS: u32 = 600;
/// Cap on day frames, consistent with the 50-year month cap.
pub const MAX_FRAME_DAYS: i64 = 365 * 50;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("maturity {maturity} not after valuation {valuation}")]
    Matured {
        valuation: NaiveDate,
        maturity: NaiveDate,
    },
    #[error("payment frequency must be >= 1 month")]
    BadFrequency,
}

/// Future payment dates of one leg with their day and month frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentSchedule {
    valuation_date: NaiveDate,
    payment_dates: Vec<NaiveDate>,
    frames_months: Vec<u32>,
    frames_days: Vec<i64>,
    /// Start of the first accrual period (one frequency step before the
    /// first payment, or the effective date when that step overshoots it).
    first_period_start: NaiveDate,
}

impl PaymentSchedule {
    /// Number of future payments (`I` or `J`).
    pub fn count(&self) -> usize {
        self.payment_dates.len()
    }

    pub fn payment_dates(&self) -> &[NaiveDate] {
        &self.payment_dates
    }

    pub fn frames_months(&self) -> &[u32] {
        &self.frames_months
    }

    pub fn frames_days(&self) -> &[i64] {
        &self.frames_days
    }

    pub fn valuation_date(&self) -> NaiveDate {
        self.valuation_date
    }

    /// Date the first accrual period starts.
    pub fn first_period_start(&self) -> NaiveDate {
        self.first_period_start
    }

    /// Month frame of the first period start when it lies in the future
    /// (period not yet begun, its rate is a forward); `None` when the
    /// period already started and the rate must come from a fixing.
    pub fn first_period_start_frame(&self) -> Option<u32> {
        if self.first_period_start >= self.valuation_date {
            let frame = month_frame(self.valuation_date, self.first_period_start).max(0) as u32;
            Some(frame.min(MAX_FRAME_MONTHS))
        } else {
            None
        }
    }
}

/// Schedule for a spot-starting leg: payments after the valuation date.
pub fn build_schedule(
    valuation_date: NaiveDate,
    maturity_date: NaiveDate,
    freq_months: u32,
) -> Result<PaymentSchedule, ScheduleError> {
    build_schedule_from(valuation_date, valuation_date, maturity_date, freq_months)
}

/// Schedule whose payments start after `period_barrier` (the effective
/// date for forward-starting trades). The barrier must not precede the
/// valuation date for the frames to stay meaningful.
pub fn build_schedule_from(
    valuation_date: NaiveDate,
    period_barrier: NaiveDate,
    maturity_date: NaiveDate,
    freq_months: u32,
) -> Result<PaymentSchedule, ScheduleError> {
    if freq_months < 1 {
        return Err(ScheduleError::BadFrequency);
    }
    let barrier = period_barrier.max(valuation_date);
    if maturity_date <= barrier {
        return Err(ScheduleError::Matured {
            valuation: barrier,
            maturity: maturity_date,
        });
    }

    let mut dates = Vec::new();
    let mut step = 0u32;
    loop {
        let date = minus_months(maturity_date, step * freq_months);
        if date <= barrier {
            break;
        }
        dates.push(date);
        step += 1;
    }
    let anchor = minus_months(maturity_date, step * freq_months);
    dates.reverse();

    let frames_months: Vec<u32> = dates
        .iter()
        .map(|d| {
            (month_frame(valuation_date, *d).max(1) as u32).min(MAX_FRAME_MONTHS)
        })
        .collect();
    let frames_days: Vec<i64> = dates
        .iter()
        .map(|d| (*d - valuation_date).num_days().min(MAX_FRAME_DAYS))
        .collect();

    // A backwards step that overshoots the barrier of a forward-starting
    // leg leaves a short first stub running from the barrier itself.
    let first_period_start = if period_barrier > valuation_date {
        anchor.max(period_barrier)
    } else {
        anchor
    };

    Ok(PaymentSchedule {
        valuation_date,
        payment_dates: dates,
        frames_months,
        frames_days,
        first_period_start,
    })
}
