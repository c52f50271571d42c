//! Customer purchase/return histories and the repetition-probability estimate.
//!
//! A customer's interaction with the platform counts as "repeated" when two
//! consecutive purchases inside the look-back window are at most `gap_days`
//! apart. The estimate is the fraction of consecutive in-window gaps that
//! qualify.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::csvio::{self, Row, Table};
use crate::error::{Error, Result};

/// Look-back window: nine months counted as 270 days.
pub const DEFAULT_WINDOW_DAYS: u32 = 270;
/// Largest purchase gap that still counts as a repetition.
pub const DEFAULT_GAP_DAYS: u32 = 90;

pub const PURCHASES_HEADER: [&str; 2] = ["customer_id", "purchase_date"];
pub const RETURNS_HEADER: [&str; 3] = ["customer_id", "return_date", "complied"];

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurchaseHistory {
    pub customer_id: String,
    pub purchase_dates: Vec<NaiveDate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReturnEvent {
    pub date: NaiveDate,
    pub complied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnHistory {
    pub customer_id: String,
    pub events: Vec<ReturnEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub reference_date: NaiveDate,
    pub window_days: u32,
    pub gap_days: u32,
}

impl EstimatorConfig {
    pub fn new(reference_date: NaiveDate, window_days: u32, gap_days: u32) -> Result<Self> {
        if window_days == 0 || gap_days == 0 {
            return Err(Error::invalid("window_days and gap_days must be positive"));
        }
        if gap_days > window_days {
            return Err(Error::invalid(format!(
                "gap_days ({gap_days}) must not exceed window_days ({window_days})"
            )));
        }
        if reference_date
            .checked_sub_days(Days::new(window_days.into()))
            .is_none()
        {
            return Err(Error::invalid(
                "window starts before the representable date range",
            ));
        }
        Ok(EstimatorConfig {
            reference_date,
            window_days,
            gap_days,
        })
    }

    /// 270-day window and 90-day gap ending at `reference_date`.
    pub fn with_defaults(reference_date: NaiveDate) -> Result<Self> {
        EstimatorConfig::new(reference_date, DEFAULT_WINDOW_DAYS, DEFAULT_GAP_DAYS)
    }

    pub fn window_start(&self) -> NaiveDate {
        self.reference_date - Days::new(self.window_days.into())
    }

    /// Both window ends are inclusive.
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.window_start() <= date && date <= self.reference_date
    }
}

/// Fraction of consecutive in-window purchase gaps of at most `gap_days`.
/// Zero when fewer than two purchases fall inside the window.
pub fn estimate_delta(history: &PurchaseHistory, config: &EstimatorConfig) -> f64 {
    let mut dates: Vec<NaiveDate> = history
        .purchase_dates
        .iter()
        .copied()
        .filter(|d| config.contains(*d))
        .collect();
    if dates.len() < 2 {
        return 0.0;
    }
    dates.sort_unstable();
    let gaps = dates.len() - 1;
    let repeats = dates
        .windows(2)
        .filter(|w| (w[1] - w[0]).num_days() <= i64::from(config.gap_days))
        .count();
    repeats as f64 / gaps as f64
}

pub fn in_window_returns<'a>(
    history: &'a ReturnHistory,
    config: &'a EstimatorConfig,
) -> impl Iterator<Item = &'a ReturnEvent> + 'a {
    history.events.iter().filter(|e| config.contains(e.date))
}

/// True iff every in-window return complied; vacuously true with none.
pub fn compliance_all(history: &ReturnHistory, config: &EstimatorConfig) -> bool {
    in_window_returns(history, config).all(|e| e.complied)
}

fn parse_date(table: &Table, row: &Row, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, DATE_FORMAT)
        .map_err(|e| table.error(row.line, format!("invalid date `{field}`: {e}")))
}

/// Parses `purchases.csv` content. Histories come back sorted by customer id
/// with dates ascending.
pub fn parse_purchases(source: &str, input: impl Read) -> Result<Vec<PurchaseHistory>> {
    let table = csvio::read_table(source, input, &PURCHASES_HEADER)?;
    let mut grouped: BTreeMap<String, Vec<NaiveDate>> = BTreeMap::new();
    for row in &table.rows {
        let id = csvio::customer_id(&table, row, &row.record[0])?;
        let date = parse_date(&table, row, &row.record[1])?;
        grouped.entry(id).or_default().push(date);
    }
    Ok(grouped
        .into_iter()
        .map(|(customer_id, mut purchase_dates)| {
            purchase_dates.sort_unstable();
            PurchaseHistory {
                customer_id,
                purchase_dates,
            }
        })
        .collect())
}

/// Parses `returns.csv` content. Events are stably sorted by date, so
/// same-day events keep file order.
pub fn parse_returns(source: &str, input: impl Read) -> Result<Vec<ReturnHistory>> {
    let table = csvio::read_table(source, input, &RETURNS_HEADER)?;
    let mut grouped: BTreeMap<String, Vec<ReturnEvent>> = BTreeMap::new();
    for row in &table.rows {
        let id = csvio::customer_id(&table, row, &row.record[0])?;
        let date = parse_date(&table, row, &row.record[1])?;
        let complied = csvio::flag(&table, row, &row.record[2], "complied")?;
        grouped
            .entry(id)
            .or_default()
            .push(ReturnEvent { date, complied });
    }
    Ok(grouped
        .into_iter()
        .map(|(customer_id, mut events)| {
            events.sort_by_key(|e| e.date);
            ReturnHistory {
                customer_id,
                events,
            }
        })
        .collect())
}

pub fn load_purchases(path: &Path) -> Result<Vec<PurchaseHistory>> {
    parse_purchases(&path.display().to_string(), csvio::open(path)?)
}

pub fn load_returns(path: &Path) -> Result<Vec<ReturnHistory>> {
    parse_returns(&path.display().to_string(), csvio::open(path)?)
}

pub fn write_purchases(histories: &[PurchaseHistory]) -> String {
    let mut out = PURCHASES_HEADER.join(",") + "\n";
    for h in histories {
        for d in &h.purchase_dates {
            let _ = writeln!(out, "{},{}", h.customer_id, d.format(DATE_FORMAT));
        }
    }
    out
}

pub fn write_returns(histories: &[ReturnHistory]) -> String {
    let mut out = RETURNS_HEADER.join(",") + "\n";
    for h in histories {
        for e in &h.events {
            let _ = writeln!(
                out,
                "{},{},{}",
                h.customer_id,
                e.date.format(DATE_FORMAT),
                u8::from(e.complied)
            );
        }
    }
    out
}
