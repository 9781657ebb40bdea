//! Path-type filters over the corpus of candidate events.
//!
//! Both filters decide per time path and drop the path for every subject.
//! Threshold comparisons are exact: the configured fraction is converted to
//! the rational value of its binary representation.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::events::{CandidateSet, Event, PredicatePath};
use crate::kb::{EntityId, Existence};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub theta1: u64,
    pub theta2: f64,
    pub theta3: f64,
    /// Also drop individual events that precede their subject's existence
    /// on paths that survive the existence vote.
    pub drop_pre_existence_instances: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            theta1: 50,
            theta2: 0.5,
            theta3: 0.5,
            drop_pre_existence_instances: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("theta2", self.theta2), ("theta3", self.theta3)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// `count / total > threshold`, evaluated exactly. `None` when `total == 0`.
fn exceeds(count: u64, total: u64, threshold: f64) -> Option<bool> {
    if total == 0 {
        return None;
    }
    let ratio = BigRational::new(BigInt::from(count), BigInt::from(total));
    let threshold = BigRational::from_float(threshold).expect("finite threshold");
    Some(ratio > threshold)
}

/// Counts for one time path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathStat {
    /// Number of distinct subjects reaching each (related entity, timestamp).
    pub n_subjects: BTreeMap<(EntityId, Timestamp), u64>,
    /// Number of (related entity, timestamp) pairs shared by more than theta1 subjects.
    pub c_heavy: u64,
}

impl PathStat {
    /// Distinct (related entity, timestamp) pairs reached through this path.
    pub fn n_pairs(&self) -> u64 {
        self.n_subjects.len() as u64
    }
}

pub type PathStats = BTreeMap<PredicatePath, PathStat>;

pub fn compute_path_stats<'a, I>(all_candidates: I, theta1: u64) -> PathStats
where
    I: IntoIterator<Item = &'a CandidateSet>,
{
    let mut stats: PathStats = BTreeMap::new();
    for cs in all_candidates {
        let distinct: BTreeSet<(&PredicatePath, &EntityId, Timestamp)> = cs
            .events()
            .iter()
            .map(|e| (&e.path_to_ts, &e.related_entity, e.timestamp))
            .collect();
        for (path, re, t) in distinct {
            *stats
                .entry(path.clone())
                .or_default()
                .n_subjects
                .entry((re.clone(), t))
                .or_default() += 1;
        }
    }
    for stat in stats.values_mut() {
        stat.c_heavy = stat.n_subjects.values().filter(|&&n| n > theta1).count() as u64;
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Frequency,
    Existence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Keep,
    Drop,
}

/// One line of the filter report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReportEntry {
    pub path: String,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "C")]
    pub c: u64,
    pub ratio: f64,
    pub decision: Decision,
    pub filter: FilterKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub dropped: BTreeSet<PredicatePath>,
    pub report: Vec<FilterReportEntry>,
}

impl FilterOutcome {
    fn record(&mut self, path: &PredicatePath, n: u64, c: u64, drop: bool, filter: FilterKind) {
        if drop {
            self.dropped.insert(path.clone());
        }
        self.report.push(FilterReportEntry {
            path: path.dotted(),
            n,
            c,
            ratio: c as f64 / n as f64,
            decision: if drop { Decision::Drop } else { Decision::Keep },
            filter,
        });
    }
}

/// Drops every path where more than a `theta2` fraction of its
/// (related entity, timestamp) pairs is shared by more than `theta1` subjects.
pub fn frequency_filter(stats: &PathStats, cfg: &FilterConfig) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for (path, stat) in stats {
        if let Some(drop) = exceeds(stat.c_heavy, stat.n_pairs(), cfg.theta2) {
            out.record(path, stat.n_pairs(), stat.c_heavy, drop, FilterKind::Frequency);
        }
    }
    out
}

pub fn is_pre_existence(e: &Event, existence: Option<Existence>) -> bool {
    existence.is_some_and(|x| e.timestamp < x.start)
}

/// Drops every path where more than a `theta3` fraction of its instances
/// (among subjects with a known existence period) precede the subject's
/// existence.
pub fn existence_filter<'a, I, F>(all_candidates: I, existence: F, cfg: &FilterConfig) -> FilterOutcome
where
    I: IntoIterator<Item = &'a CandidateSet>,
    F: Fn(&EntityId) -> Option<Existence>,
{
    // path -> (counted instances, pre-existence instances)
    let mut counts: BTreeMap<&PredicatePath, (u64, u64)> = BTreeMap::new();
    for cs in all_candidates {
        let Some(x) = existence(&cs.subject) else { continue };
        for e in cs.events() {
            let slot = counts.entry(&e.path_to_ts).or_default();
            slot.0 += 1;
            if is_pre_existence(e, Some(x)) {
                slot.1 += 1;
            }
        }
    }
    let mut out = FilterOutcome::default();
    for (path, (n, c)) in counts {
        if let Some(drop) = exceeds(c, n, cfg.theta3) {
            out.record(path, n, c, drop, FilterKind::Existence);
        }
    }
    out
}

/// Removes events whose time path was dropped. Order is preserved.
pub fn apply_filters(cs: &CandidateSet, dropped: &BTreeSet<PredicatePath>) -> CandidateSet {
    if dropped.is_empty() {
        return cs.clone();
    }
    cs.retain(|e| !dropped.contains(&e.path_to_ts))
}

pub fn drop_pre_existence_events(cs: &CandidateSet, existence: Option<Existence>) -> CandidateSet {
    cs.retain(|e| !is_pre_existence(e, existence))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRow {
    #[serde(rename = "X")]
    pub x: usize,
    pub count_simple: usize,
    pub count_all: usize,
}

pub const DEFAULT_COVERAGE_THRESHOLDS: &[usize] = &[1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

/// Number of entities with at least X candidate events, counting simple
/// events only and simple plus compound events.
pub fn coverage_report<'a, I>(all_candidates: I, thresholds: &[usize]) -> Vec<CoverageRow>
where
    I: IntoIterator<Item = &'a CandidateSet>,
{
    let sizes: Vec<(usize, usize)> = all_candidates
        .into_iter()
        .map(|cs| (cs.simple_count(), cs.len()))
        .collect();
    let mut xs = thresholds.to_vec();
    xs.sort_unstable();
    xs.dedup();
    xs.into_iter()
        .map(|x| CoverageRow {
            x,
            count_simple: sizes.iter().filter(|(s, _)| *s >= x).count(),
            count_all: sizes.iter().filter(|(_, a)| *a >= x).count(),
        })
        .collect()
}

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from("X,count_simple,count_all\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.x, r.count_simple, r.count_all));
    }
    out
}
