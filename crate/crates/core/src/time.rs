//! Absolute time ranges and subject-local calendar arithmetic.
//!
//! Timestamps are integer milliseconds since the Unix epoch. Day and hour
//! boundaries are evaluated in the subject's local zone, which may be an IANA
//! name (DST-aware, resolved through the system tz database) or a fixed
//! offset such as `+02:00`.

use std::fmt;
use std::str::FromStr;

use jiff::civil::Date;
use jiff::tz::{Offset, TimeZone};
use jiff::Timestamp;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECOND_MS: i64 = 1_000;
pub const MINUTE_MS: i64 = 60 * SECOND_MS;
pub const HOUR_MS: i64 = 60 * MINUTE_MS;
pub const DAY_MS: i64 = 24 * HOUR_MS;

/// Half-open interval `[start, end)` in epoch milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: i64,
    pub end: i64,
}

impl TimeRange {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn len_ms(&self) -> i64 {
        (self.end - self.start).max(0)
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn contains_f64(&self, t: f64) -> bool {
        t >= self.start as f64 && t < self.end as f64
    }

    pub fn overlap_ms(&self, other: &TimeRange) -> i64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0)
    }

    pub fn intersects(&self, other: &TimeRange) -> bool {
        self.overlap_ms(other) > 0
    }
}

/// A subject's local time zone.
#[derive(Clone, Debug)]
pub struct LocalZone {
    name: String,
    tz: TimeZone,
}

impl LocalZone {
    pub fn utc() -> Self {
        Self {
            name: "UTC".to_string(),
            tz: TimeZone::UTC,
        }
    }

    /// Accepts `UTC`/`Z`, fixed offsets (`+02:00`, `-0530`) or IANA zone names.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("utc") || spec == "Z" {
            return Ok(Self::utc());
        }
        if spec.starts_with('+') || spec.starts_with('-') {
            let seconds = parse_offset_seconds(spec)
                .ok_or_else(|| Error::Config(format!("bad UTC offset `{spec}`")))?;
            let offset = Offset::from_seconds(seconds)
                .map_err(|e| Error::Config(format!("bad UTC offset `{spec}`: {e}")))?;
            return Ok(Self {
                name: spec.to_string(),
                tz: TimeZone::fixed(offset),
            });
        }
        let tz = TimeZone::get(spec)
            .map_err(|e| Error::Config(format!("unknown time zone `{spec}`: {e}")))?;
        Ok(Self {
            name: spec.to_string(),
            tz,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn offset_ms(&self, t_ms: i64) -> i64 {
        let ts = timestamp(t_ms);
        i64::from(self.tz.to_offset(ts).seconds()) * SECOND_MS
    }

    /// First local-time full hour boundary at or after `t_ms`.
    pub fn ceil_hour(&self, t_ms: i64) -> i64 {
        let local = t_ms + self.offset_ms(t_ms);
        let rem = local.rem_euclid(HOUR_MS);
        if rem == 0 {
            t_ms
        } else {
            t_ms - rem + HOUR_MS
        }
    }

    /// Local-time hour slot containing `t_ms`, identified by its start instant.
    pub fn floor_hour(&self, t_ms: i64) -> i64 {
        let local = t_ms + self.offset_ms(t_ms);
        t_ms - local.rem_euclid(HOUR_MS)
    }

    pub fn local_date(&self, t_ms: i64) -> Date {
        timestamp(t_ms).to_zoned(self.tz.clone()).date()
    }

    /// Instant of local midnight starting `date`.
    pub fn day_start(&self, date: Date) -> Result<i64> {
        let zoned = date
            .to_zoned(self.tz.clone())
            .map_err(|e| Error::invalid(format!("cannot place {date} in {}: {e}", self.name)))?;
        Ok(zoned.timestamp().as_millisecond())
    }

    /// The local calendar day `date` as an absolute range (23-25 h under DST).
    pub fn day_range(&self, date: Date) -> Result<TimeRange> {
        let next = date
            .tomorrow()
            .map_err(|e| Error::invalid(format!("date overflow: {e}")))?;
        Ok(TimeRange::new(self.day_start(date)?, self.day_start(next)?))
    }

    /// Inclusive local date range as an absolute half-open range.
    pub fn date_range(&self, range: &DateRange) -> Result<TimeRange> {
        let start = self.day_start(range.start)?;
        let end = self.day_range(range.end)?.end;
        Ok(TimeRange::new(start, end))
    }
}

fn timestamp(t_ms: i64) -> Timestamp {
    Timestamp::from_millisecond(t_ms).unwrap_or(if t_ms < 0 {
        Timestamp::MIN
    } else {
        Timestamp::MAX
    })
}

fn parse_offset_seconds(spec: &str) -> Option<i32> {
    let sign = if spec.starts_with('-') { -1 } else { 1 };
    let body: String = spec[1..].chars().filter(|c| *c != ':').collect();
    if !body.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let (h, m) = match body.len() {
        1 | 2 => (body.parse::<i32>().ok()?, 0),
        4 => (
            body[..2].parse::<i32>().ok()?,
            body[2..].parse::<i32>().ok()?,
        ),
        _ => return None,
    };
    if h > 18 || m >= 60 {
        return None;
    }
    Some(sign * (h * 3600 + m * 60))
}

/// Inclusive range of local calendar dates, written `YYYY-MM-DD..YYYY-MM-DD`
/// or as `{"start": ..., "end": ...}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DateRange {
    pub start: Date,
    pub end: Date,
}

impl DateRange {
    pub fn new(start: Date, end: Date) -> Result<Self> {
        if end < start {
            return Err(Error::Config(format!(
                "date range ends before it starts: {start}..{end}"
            )));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

fn parse_date(s: &str) -> Result<Date> {
    s.trim()
        .parse::<Date>()
        .map_err(|e| Error::Config(format!("bad date `{s}`: {e}")))
}

impl FromStr for DateRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("date range `{s}` must be START..END")))?;
        DateRange::new(parse_date(a)?, parse_date(b)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DateRangeRepr {
    Text(String),
    Fields { start: String, end: String },
}

impl Serialize for DateRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DateRangeRepr::Fields {
            start: self.start.to_string(),
            end: self.end.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DateRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parsed = match DateRangeRepr::deserialize(d)? {
            DateRangeRepr::Text(s) => s.parse(),
            DateRangeRepr::Fields { start, end } => {
                parse_date(&start).and_then(|a| DateRange::new(a, parse_date(&end)?))
            }
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_offset_hour_alignment() {
        let zone = LocalZone::parse("+05:30").unwrap();
        // 2020-01-01T00:00:00Z is 05:30 local; next local hour is 06:00 local = 00:30Z.
        let t = 1_577_836_800_000;
        assert_eq!(zone.ceil_hour(t), t + 30 * MINUTE_MS);
        assert_eq!(zone.floor_hour(t), t - 30 * MINUTE_MS);
        assert_eq!(zone.ceil_hour(t + 30 * MINUTE_MS), t + 30 * MINUTE_MS);
    }

    #[test]
    fn iana_zone_dst_day_length() {
        let zone = LocalZone::parse("Europe/Athens").unwrap();
        // Spring-forward day in 2020.
        let day = zone.day_range(Date::constant(2020, 3, 29)).unwrap();
        assert_eq!(day.len_ms(), 23 * HOUR_MS);
        let normal = zone.day_range(Date::constant(2020, 3, 30)).unwrap();
        assert_eq!(normal.len_ms(), 24 * HOUR_MS);
    }

    #[test]
    fn date_range_parsing() {
        let r: DateRange = "2020-03-15..2020-05-10".parse().unwrap();
        assert_eq!(r.start, Date::constant(2020, 3, 15));
        assert!("2020-05-10..2020-03-15".parse::<DateRange>().is_err());
        assert!("2020-13-01..2020-03-15".parse::<DateRange>().is_err());
        assert!("2020-03-15".parse::<DateRange>().is_err());
        let json = serde_json::to_string(&r).unwrap();
        let back: DateRange = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let text: DateRange = serde_json::from_str("\"2020-03-15..2020-05-10\"").unwrap();
        assert_eq!(text, r);
    }

    #[test]
    fn bad_zones_rejected() {
        assert!(LocalZone::parse("+25:00").is_err());
        assert!(LocalZone::parse("Mars/Olympus").is_err());
    }

    #[test]
    fn inclusive_local_date_range() {
        let zone = LocalZone::parse("+02:00").unwrap();
        let r: DateRange = "2020-03-15..2020-03-16".parse().unwrap();
        let abs = zone.date_range(&r).unwrap();
        assert_eq!(abs.len_ms(), 2 * DAY_MS);
        // local midnight at +02:00 is 22:00Z the day before
        assert_eq!(abs.start.rem_euclid(DAY_MS), 22 * HOUR_MS);
    }
}
