//! Fixed-income risk engine for euro interest-rate portfolios.
//!
//! The crate covers the full chain from raw market and trade data to
//! bank-level risk figures:
//!
//! - [`curve`]: bootstraps simple-compounded spot curves from OIS and
//!   EURIBOR par swap quotes, interpolates them to a monthly grid, derives
//!   forward rates and applies parallel shock scenarios.
//! - [`ingest`] / [`cleaning`]: parses trade-state records, selects euro
//!   fixed-for-floating candidates, deduplicates dual-sided reports and
//!   repairs fixed-rate and side fields.
//! - [`schedule`] / [`pricer`]: payment-schedule construction and full
//!   revaluation of IRS, OIS and FRA contracts, base and shocked.
//! - [`bonds`]: delta-gamma profit-and-loss for fixed-rate bond holdings
//!   with bucket-average fallback for missing risk measures.
//! - [`portfolio`]: notional and sensitivity aggregation per bank and
//!   system-wide, with ratios to CET1 equity.
//! - [`quality`]: reconciliation of reported against model values
//!   (robust slope, error percentiles, weekly-change diagnostics).
//! - [`pipeline`]: deterministic end-to-end orchestration used by the CLI.

pub mod bonds;
pub mod cleaning;
pub mod curve;
pub mod dates;
pub mod fixings;
pub mod ingest;
pub mod pipeline;
pub mod portfolio;
pub mod pricer;
pub mod quality;
pub mod schedule;
