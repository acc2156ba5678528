//! Calendar helpers shared by schedules, buckets and curve lookups.

use chrono::{Datelike, Days, Months, NaiveDate};

/// Last calendar day of the month containing `date`.
pub fn month_end(date: NaiveDate) -> NaiveDate {
    let first_of_next = if date.month() == 12 {
        NaiveDate::from_ymd_opt(date.year() + 1, 1, 1).expect("valid date")
    } else {
        NaiveDate::from_ymd_opt(date.year(), date.month() + 1, 1).expect("valid date")
    };
    first_of_next - Days::new(1)
}

/// Whole months between the month-end dates of `from` and `to`.
///
/// Both dates are shifted forward to their month ends before counting, so
/// the result is an integer month count independent of the day-of-month.
/// Negative when `to` is in an earlier month than `from`.
pub fn month_frame(from: NaiveDate, to: NaiveDate) -> i64 {
    let a = month_end(from);
    let b = month_end(to);
    (b.year() as i64 * 12 + b.month0() as i64) - (a.year() as i64 * 12 + a.month0() as i64)
}

/// `date` minus `months` calendar months, day-of-month clamped to month length.
pub fn minus_months(date: NaiveDate, months: u32) -> NaiveDate {
    date.checked_sub_months(Months::new(months))
        .expect("date arithmetic within supported range")
}

/// `date` plus `months` calendar months, day-of-month clamped to month length.
pub fn plus_months(date: NaiveDate, months: u32) -> NaiveDate {
    date.checked_add_months(Months::new(months))
        .expect("date arithmetic within supported range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn month_end_handles_february_and_december() {
        assert_eq!(month_end(d(2021, 2, 3)), d(2021, 2, 28));
        assert_eq!(month_end(d(2024, 2, 29)), d(2024, 2, 29));
        assert_eq!(month_end(d(2021, 12, 15)), d(2021, 12, 31));
    }

    #[test]
    fn month_frame_counts_shifted_whole_months() {
        assert_eq!(month_frame(d(2021, 1, 6), d(2021, 7, 6)), 6);
        assert_eq!(month_frame(d(2021, 1, 6), d(2022, 1, 6)), 12);
        assert_eq!(month_frame(d(2021, 1, 6), d(2021, 1, 16)), 0);
        assert_eq!(month_frame(d(2021, 1, 28), d(2021, 2, 2)), 1);
        assert_eq!(month_frame(d(2021, 3, 1), d(2021, 1, 1)), -2);
    }

    #[test]
    fn minus_months_clamps_day() {
        assert_eq!(minus_months(d(2021, 3, 31), 1), d(2021, 2, 28));
        assert_eq!(minus_months(d(2021, 3, 31), 2), d(2021, 1, 31));
    }
}
