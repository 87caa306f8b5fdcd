//! Tick-file parsing, trading-calendar filtering, and panel alignment.
//!
//! Raw per-asset trade files are merged onto a common intraday bar grid:
//! weekends and listed dates are excluded, each day keeps only in-session
//! observations, and bar prices use previous-tick interpolation (the last
//! trade at or before each bar boundary, seeded from the day's first
//! in-session trade). Days missing for any asset are dropped for all assets
//! so the resulting panel is balanced.

use crate::error::{Error, Result};
use crate::scalar::Real;
use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use ndarray::Array3;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Session window, bar length, and excluded dates.
#[derive(Debug, Clone)]
pub struct TradingCalendar {
    pub excluded_dates: BTreeSet<NaiveDate>,
    pub session_start: NaiveTime,
    pub session_end: NaiveTime,
    pub bar_minutes: i64,
}

impl TradingCalendar {
    /// Builds a calendar, validating that the bar length divides the session.
    pub fn new(
        excluded_dates: BTreeSet<NaiveDate>,
        session_start: NaiveTime,
        session_end: NaiveTime,
        bar_minutes: i64,
    ) -> Result<Self> {
        if session_start >= session_end {
            return Err(Error::InvalidParam {
                name: "session_start",
                reason: format!("session start {session_start} must precede end {session_end}"),
            });
        }
        if bar_minutes < 1 {
            return Err(Error::InvalidParam {
                name: "bar_minutes",
                reason: "bar length must be at least one minute".into(),
            });
        }
        let session = session_end.signed_duration_since(session_start);
        if session.num_seconds() % 60 != 0 || session.num_minutes() % bar_minutes != 0 {
            return Err(Error::InvalidParam {
                name: "bar_minutes",
                reason: format!(
                    "bar length {bar_minutes} min must divide the session length {} min exactly",
                    session.num_minutes()
                ),
            });
        }
        Ok(Self {
            excluded_dates,
            session_start,
            session_end,
            bar_minutes,
        })
    }

    /// Parses a calendar file: `key=value` lines for `session_start`,
    /// `session_end`, and `bar_minutes`, one excluded date (`YYYY-MM-DD`) per
    /// remaining line. Blank lines and `#` comments are ignored.
    ///
    /// # Errors
    /// Missing keys, malformed lines, or an invalid session/bar combination.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut start = None;
        let mut end = None;
        let mut bar = None;
        let mut excluded = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx as u64 + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: path.to_owned(),
                line: lineno,
                reason,
            };
            if let Some((key, value)) = line.split_once('=') {
                match key.trim() {
                    "session_start" => {
                        start = Some(parse_time(value.trim()).map_err(parse_err)?);
                    }
                    "session_end" => {
                        end = Some(parse_time(value.trim()).map_err(parse_err)?);
                    }
                    "bar_minutes" => {
                        bar = Some(value.trim().parse::<i64>().map_err(|e| {
                            parse_err(format!("bad bar_minutes value: {e}"))
                        })?);
                    }
                    other => {
                        return Err(parse_err(format!("unknown calendar key `{other}`")));
                    }
                }
            } else {
                let date = NaiveDate::parse_from_str(line, "%Y-%m-%d")
                    .map_err(|e| parse_err(format!("bad excluded date: {e}")))?;
                excluded.insert(date);
            }
        }

        let missing = |name: &'static str| Error::InvalidParam {
            name,
            reason: format!("calendar file {} does not set it", path.display()),
        };
        Self::new(
            excluded,
            start.ok_or_else(|| missing("session_start"))?,
            end.ok_or_else(|| missing("session_end"))?,
            bar.ok_or_else(|| missing("bar_minutes"))?,
        )
    }

    /// Number of bars per trading day.
    pub fn bars_per_day(&self) -> usize {
        let session = self
            .session_end
            .signed_duration_since(self.session_start)
            .num_minutes();
        (session / self.bar_minutes) as usize
    }

    /// Bar boundary times, `bars_per_day() + 1` of them, session start to end.
    pub fn bar_boundaries(&self) -> Vec<NaiveTime> {
        (0..=self.bars_per_day() as i64)
            .map(|k| self.session_start + Duration::minutes(k * self.bar_minutes))
            .collect()
    }

    /// Whether a date survives the weekend and exclusion-list filters.
    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        let wd = date.weekday();
        wd != Weekday::Sat && wd != Weekday::Sun && !self.excluded_dates.contains(&date)
    }
}

fn parse_time(s: &str) -> std::result::Result<NaiveTime, String> {
    NaiveTime::parse_from_str(s, "%H:%M").map_err(|e| format!("bad time `{s}`: {e}"))
}

/// One asset's trade records, sorted by timestamp with duplicates resolved.
#[derive(Debug, Clone)]
pub struct RawTickFile {
    pub asset_id: String,
    pub rows: Vec<(NaiveDateTime, f64)>,
}

/// Loads a `timestamp,price` file.
///
/// Rows are sorted by timestamp; duplicate timestamps keep the last
/// observation in file order.
///
/// # Errors
/// Malformed rows fail with the offending line number; non-positive or
/// non-finite prices are rejected the same way.
pub fn load_ticks(path: &Path, asset_id: &str) -> Result<RawTickFile> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;

    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "price" {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            reason: format!(
                "expected header `timestamp,price`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |reason: String| Error::Parse {
            path: path.to_owned(),
            line,
            reason,
        };
        let ts = NaiveDateTime::parse_from_str(&record[0], "%Y-%m-%d %H:%M:%S")
            .map_err(|e| parse_err(format!("bad timestamp `{}`: {e}", &record[0])))?;
        let price: f64 = record[1]
            .parse()
            .map_err(|e| parse_err(format!("bad price `{}`: {e}", &record[1])))?;
        if !price.is_finite() || price <= 0.0 {
            return Err(parse_err(format!("price must be strictly positive, got {price}")));
        }
        rows.push((ts, price));
    }

    // Stable sort, then keep the last row of each equal-timestamp run.
    rows.sort_by_key(|&(ts, _)| ts);
    let mut deduped: Vec<(NaiveDateTime, f64)> = Vec::with_capacity(rows.len());
    for row in rows {
        match deduped.last_mut() {
            Some(last) if last.0 == row.0 => *last = row,
            _ => deduped.push(row),
        }
    }

    Ok(RawTickFile {
        asset_id: asset_id.to_owned(),
        rows: deduped,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_owned(),
            source,
        },
        kind => Error::Parse {
            path: path.to_owned(),
            line,
            reason: format!("{kind:?}"),
        },
    }
}

/// Balanced intraday log-price panel on a common bar grid.
///
/// `log_prices[[d, a, b]]` is the log-price of asset `a` at bar boundary `b`
/// of day `d`; each day has `bars_per_day + 1` boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct IntradayPanel<T> {
    pub assets: Vec<String>,
    pub days: Vec<NaiveDate>,
    pub log_prices: Array3<T>,
}

impl<T: Real> IntradayPanel<T> {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn bars_per_day(&self) -> usize {
        self.log_prices.dim().2 - 1
    }
}

/// A trading day present for some assets but not others, dropped globally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedDay {
    pub date: NaiveDate,
    pub missing_assets: Vec<String>,
}

/// Result of panel alignment: the balanced panel plus drop diagnostics.
#[derive(Debug, Clone)]
pub struct PanelBuild {
    pub panel: IntradayPanel<f64>,
    pub dropped_days: Vec<DroppedDay>,
}

/// Aligns parsed tick files onto the calendar's bar grid.
///
/// Only dates that are trading days and have at least one in-session
/// observation for every asset are retained. Bar prices are the last
/// observation at or before each boundary; boundaries before the first
/// in-session trade take that first trade's price.
///
/// # Errors
/// Fewer than two files, duplicate asset ids, or an empty intersection of
/// usable dates.
pub fn build_panel(files: &[RawTickFile], cal: &TradingCalendar) -> Result<PanelBuild> {
    if files.len() < 2 {
        return Err(Error::InvalidParam {
            name: "files",
            reason: format!("need at least two assets, got {}", files.len()),
        });
    }
    let mut seen = BTreeSet::new();
    for f in files {
        if !seen.insert(f.asset_id.as_str()) {
            return Err(Error::InvalidParam {
                name: "files",
                reason: format!("duplicate asset id `{}`", f.asset_id),
            });
        }
    }

    let boundaries = cal.bar_boundaries();

    // Per asset: trading day -> in-session (time, log-price) rows.
    let mut by_asset: Vec<BTreeMap<NaiveDate, Vec<(NaiveTime, f64)>>> = Vec::new();
    for file in files {
        let mut days: BTreeMap<NaiveDate, Vec<(NaiveTime, f64)>> = BTreeMap::new();
        for &(ts, price) in &file.rows {
            let (date, time) = (ts.date(), ts.time());
            if !cal.is_trading_day(date) {
                continue;
            }
            if time < cal.session_start || time > cal.session_end {
                continue;
            }
            days.entry(date).or_default().push((time, price.ln()));
        }
        by_asset.push(days);
    }

    let union: BTreeSet<NaiveDate> = by_asset.iter().flat_map(|m| m.keys().copied()).collect();
    let mut kept = Vec::new();
    let mut dropped_days = Vec::new();
    for date in union {
        let missing: Vec<String> = files
            .iter()
            .zip(&by_asset)
            .filter(|(_, days)| !days.contains_key(&date))
            .map(|(f, _)| f.asset_id.clone())
            .collect();
        if missing.is_empty() {
            kept.push(date);
        } else {
            dropped_days.push(DroppedDay {
                date,
                missing_assets: missing,
            });
        }
    }
    if kept.is_empty() {
        return Err(Error::MisalignedPanels {
            reason: "no trading day is covered by every asset".into(),
        });
    }

    let (n_days, n_assets, n_bounds) = (kept.len(), files.len(), boundaries.len());
    let mut log_prices = Array3::zeros((n_days, n_assets, n_bounds));
    for (d, date) in kept.iter().enumerate() {
        for (a, days) in by_asset.iter().enumerate() {
            let ticks = &days[date];
            let mut last = ticks[0].1;
            let mut next = 0;
            for (b, &boundary) in boundaries.iter().enumerate() {
                while next < ticks.len() && ticks[next].0 <= boundary {
                    last = ticks[next].1;
                    next += 1;
                }
                log_prices[[d, a, b]] = last;
            }
        }
    }

    Ok(PanelBuild {
        panel: IntradayPanel {
            assets: files.iter().map(|f| f.asset_id.clone()).collect(),
            days: kept,
            log_prices,
        },
        dropped_days,
    })
}
