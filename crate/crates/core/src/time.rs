//! Day-resolution timestamps and time spans.

use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TimeError;

/// A calendar day, stored as signed days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

const EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1970, 1, 1) {
    Some(d) => d,
    None => panic!("epoch"),
};

impl Timestamp {
    pub const fn from_days(days: i64) -> Self {
        Timestamp(days)
    }

    pub const fn days(self) -> i64 {
        self.0
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self, TimeError> {
        NaiveDate::from_ymd_opt(year, month, day)
            .map(Self::from_date)
            .ok_or_else(|| TimeError::InvalidDate(format!("{year:04}-{month:02}-{day:02}")))
    }

    pub fn from_date(date: NaiveDate) -> Self {
        Timestamp((date - EPOCH).num_days())
    }

    pub fn to_date(self) -> NaiveDate {
        EPOCH + Duration::days(self.0)
    }

    /// Parses an ISO-8601 calendar date, optionally prefixed with `@`.
    pub fn parse(text: &str) -> Result<Self, TimeError> {
        let body = text.strip_prefix('@').unwrap_or(text);
        NaiveDate::parse_from_str(body, "%Y-%m-%d")
            .map(Self::from_date)
            .map_err(|_| TimeError::InvalidDate(text.to_string()))
    }

    pub fn iso(self) -> String {
        self.to_date().format("%Y-%m-%d").to_string()
    }

    /// Long English form, e.g. "April 11, 2012".
    pub fn long_form(self) -> String {
        self.to_date().format("%B %-d, %Y").to_string()
    }

    pub fn offset(self, days: i64) -> Self {
        Timestamp(self.0 + days)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.iso())
    }
}

impl FromStr for Timestamp {
    type Err = TimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.iso())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Closed interval of days `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeSpan {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self, TimeError> {
        if start > end {
            return Err(TimeError::InvertedSpan { start, end });
        }
        Ok(TimeSpan { start, end })
    }

    pub fn length_days(&self) -> i64 {
        self.end.days() - self.start.days()
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }
}
