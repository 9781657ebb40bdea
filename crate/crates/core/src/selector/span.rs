//! Default time span and zoom helpers.

use crate::events::Event;
use crate::kb::Existence;
use crate::time::{TimeSpan, Timestamp};

/// Share of timestamps the default span must cover, as a fraction.
const COVER_NUM: usize = 9;
const COVER_DEN: usize = 10;

/// Shortest window holding `ceil(0.9 m)` of the `m` candidate timestamps.
///
/// Timestamps outside the subject's lifetime are ignored unless that leaves
/// nothing. Ties go to the earliest window; a single-day window is widened by
/// one day on each side. `None` when there are no events.
pub fn default_timespan(events: &[Event], existence: Option<Existence>) -> Option<TimeSpan> {
    let mut ts: Vec<Timestamp> = match existence {
        Some(ex) => events.iter().map(|e| e.timestamp).filter(|t| ex.contains(*t)).collect(),
        None => Vec::new(),
    };
    if ts.is_empty() {
        ts = events.iter().map(|e| e.timestamp).collect();
    }
    if ts.is_empty() {
        return None;
    }
    ts.sort_unstable();
    let m = ts.len();
    let k = (COVER_NUM * m).div_ceil(COVER_DEN).max(1);
    let mut best = (ts[k - 1].days() - ts[0].days(), 0);
    for i in 1..=m - k {
        let len = ts[i + k - 1].days() - ts[i].days();
        if len < best.0 {
            best = (len, i);
        }
    }
    let (len, i) = best;
    let (start, end) = (ts[i], ts[i + k - 1]);
    let span = if len == 0 {
        TimeSpan { start: start.offset(-1), end: end.offset(1) }
    } else {
        TimeSpan { start, end }
    };
    Some(span)
}
