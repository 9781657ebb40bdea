//! Screen-layout independence family.
//!
//! Events are drawn as boxes of width `w` on a timeline of width `W`; boxes
//! that overlap in time are stacked, at most `n = ⌊H/h⌋` high. A set of
//! events fits iff every half-open window `[t, t + t_w)` holds at most `n`
//! timestamps, where `t_w` is the time covered by one box width.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::time::{TimeSpan, Timestamp};

/// Largest ground set the exhaustive subset-form check accepts.
pub const INTERVAL_FORM_LIMIT: usize = 20;
/// Largest ground set [`enumerate_bases`] accepts.
pub const BASE_ENUMERATION_LIMIT: usize = 16;

/// Screen and box geometry in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutSpec {
    #[serde(rename = "W")]
    pub screen_width: u32,
    #[serde(rename = "H")]
    pub screen_height: u32,
    #[serde(rename = "w")]
    pub box_width: u32,
    #[serde(rename = "h")]
    pub box_height: u32,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec { screen_width: 1000, screen_height: 80, box_width: 100, box_height: 40 }
    }
}

impl LayoutSpec {
    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.box_width == 0 || self.box_height == 0 {
            return Err(LayoutError::InvalidGeometry("box dimensions must be positive".into()));
        }
        if self.screen_width < self.box_width {
            return Err(LayoutError::InvalidGeometry("screen narrower than one box".into()));
        }
        if self.screen_height < self.box_height {
            return Err(LayoutError::InvalidGeometry("screen lower than one box".into()));
        }
        Ok(())
    }

    /// Boxes that fit in one vertical stack.
    pub fn stack_limit(&self) -> usize {
        (self.screen_height / self.box_height.max(1)) as usize
    }
}

/// Window length in days, kept as an exact fraction.
pub type TimeWindow = Ratio<i64>;

/// `t_w = w · (end − start) / W`.
pub fn compute_tw(spec: &LayoutSpec, span: &TimeSpan) -> Result<TimeWindow, LayoutError> {
    spec.validate()?;
    let len = span.length_days();
    if len <= 0 {
        return Err(LayoutError::EmptySpan);
    }
    Ok(Ratio::new(spec.box_width as i64 * len, spec.screen_width as i64))
}

/// The independence test for fixed `t_w` and stack limit `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutConstraint {
    pub t_w: TimeWindow,
    pub n: usize,
}

fn gap_at_least(later: Timestamp, earlier: Timestamp, t_w: TimeWindow) -> bool {
    Ratio::from_integer(later.days() - earlier.days()) >= t_w
}

impl LayoutConstraint {
    pub fn new(t_w: TimeWindow, n: usize) -> Self {
        LayoutConstraint { t_w, n }
    }

    pub fn for_span(spec: &LayoutSpec, span: &TimeSpan) -> Result<Self, LayoutError> {
        Ok(LayoutConstraint { t_w: compute_tw(spec, span)?, n: spec.stack_limit() })
    }

    /// Sweep over sorted timestamps: every run of `n + 1` consecutive
    /// timestamps must span at least `t_w`.
    pub fn is_independent(&self, timestamps: &[Timestamp]) -> bool {
        let mut sorted = timestamps.to_vec();
        sorted.sort_unstable();
        self.is_independent_sorted(&sorted)
    }

    pub fn is_independent_sorted(&self, sorted: &[Timestamp]) -> bool {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        sorted
            .windows(self.n + 1)
            .all(|w| gap_at_least(w[self.n], w[0], self.t_w))
    }

    /// Whether `t` can join the independent, sorted set `selected`. Only the
    /// runs containing the new timestamp need checking.
    pub fn can_add(&self, selected: &[Timestamp], t: Timestamp) -> bool {
        debug_assert!(self.is_independent_sorted(selected));
        let pos = selected.partition_point(|x| *x <= t);
        let lo = pos.saturating_sub(self.n);
        let hi = (pos + self.n).min(selected.len());
        let mut local: Vec<Timestamp> = Vec::with_capacity(hi - lo + 1);
        local.extend_from_slice(&selected[lo..pos]);
        local.push(t);
        local.extend_from_slice(&selected[pos..hi]);
        self.is_independent_sorted(&local)
    }

    /// Exhaustive form: every subset of at least `n + 1` timestamps spans at
    /// least `t_w`. Only meant as a test oracle.
    pub fn is_independent_interval_form(&self, timestamps: &[Timestamp]) -> Result<bool, LayoutError> {
        let size = timestamps.len();
        if size > INTERVAL_FORM_LIMIT {
            return Err(LayoutError::TooLarge { size, limit: INTERVAL_FORM_LIMIT });
        }
        for mask in 0u32..(1u32 << size) {
            if (mask.count_ones() as usize) < self.n + 1 {
                continue;
            }
            let members = (0..size).filter(|i| mask & (1 << i) != 0).map(|i| timestamps[i]);
            let (lo, hi) = members.fold((None, None), |(lo, hi): (Option<Timestamp>, Option<Timestamp>), t| {
                (Some(lo.map_or(t, |l| l.min(t))), Some(hi.map_or(t, |h| h.max(t))))
            });
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if !gap_at_least(hi, lo, self.t_w) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// All maximal independent subsets of `0..size` under an arbitrary
/// downward-closed family, as sorted index lists in mask order.
pub fn enumerate_bases_by<F>(size: usize, mut is_independent: F) -> Result<Vec<Vec<usize>>, LayoutError>
where
    F: FnMut(&[usize]) -> bool,
{
    if size > BASE_ENUMERATION_LIMIT {
        return Err(LayoutError::TooLarge { size, limit: BASE_ENUMERATION_LIMIT });
    }
    let full = 1u32 << size;
    let members = |mask: u32| -> Vec<usize> { (0..size).filter(|i| mask & (1 << i) != 0).collect() };
    let independent: Vec<bool> = (0..full).map(|mask| is_independent(&members(mask))).collect();
    let mut bases = Vec::new();
    for mask in 0..full {
        if !independent[mask as usize] {
            continue;
        }
        let maximal = (0..size)
            .filter(|i| mask & (1 << i) == 0)
            .all(|i| !independent[(mask | (1 << i)) as usize]);
        if maximal {
            bases.push(members(mask));
        }
    }
    Ok(bases)
}

/// Bases of the ground set `timestamps` under the layout family.
pub fn enumerate_bases(timestamps: &[Timestamp], constraint: &LayoutConstraint) -> Result<Vec<Vec<usize>>, LayoutError> {
    enumerate_bases_by(timestamps.len(), |idx| {
        let ts: Vec<Timestamp> = idx.iter().map(|&i| timestamps[i]).collect();
        constraint.is_independent(&ts)
    })
}

/// Largest over smallest base size; `None` when the only base is empty.
pub fn base_size_ratio(bases: &[Vec<usize>]) -> Option<Ratio<usize>> {
    let max = bases.iter().map(Vec::len).max()?;
    let min = bases.iter().map(Vec::len).min()?;
    (min > 0).then(|| Ratio::new(max, min))
}
