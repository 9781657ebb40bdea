//! Greedy maximization of the coverage objective over an independence family.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::SelectError;
use crate::events::Event;
use crate::layout::LayoutConstraint;
use crate::relevance::{CoverageObjective, CoverageState};
use crate::time::Timestamp;

/// Largest candidate list the exhaustive solver accepts.
pub const BRUTE_FORCE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// The screen-layout family.
    Layout(LayoutConstraint),
    /// At most this many events, regardless of time.
    Cardinality(usize),
}

/// One selection instance: candidates (sorted), objective and constraints.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub events: &'a [Event],
    pub objective: &'a CoverageObjective,
    pub feasibility: Feasibility,
    /// Never select two events with the same related entity.
    pub dedup_entities: bool,
    /// Stop once the best remaining gain is zero.
    pub prune_zero_gain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick {
    pub index: usize,
    pub gain: f64,
}

/// Picks in selection order, plus the number of marginal-gain evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub picks: Vec<Pick>,
    pub evaluations: usize,
}

impl Selection {
    pub fn indices(&self) -> Vec<usize> {
        self.picks.iter().map(|p| p.index).collect()
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx = self.indices();
        idx.sort_unstable();
        idx
    }

    pub fn objective(&self) -> f64 {
        self.picks.iter().map(|p| p.gain).sum()
    }
}

#[derive(Debug, Clone)]
struct FeasibleSet {
    timestamps: Vec<Timestamp>,
    used_related: Vec<bool>,
    selected: Vec<bool>,
    count: usize,
}

impl<'a> Problem<'a> {
    fn start(&self) -> FeasibleSet {
        FeasibleSet {
            timestamps: Vec::new(),
            used_related: vec![false; self.objective.key_count()],
            selected: vec![false; self.events.len()],
            count: 0,
        }
    }

    fn can_add(&self, set: &FeasibleSet, i: usize) -> bool {
        if set.selected[i] {
            return false;
        }
        if self.dedup_entities && set.used_related[self.objective.related_key(i)] {
            return false;
        }
        match &self.feasibility {
            Feasibility::Layout(c) => c.can_add(&set.timestamps, self.events[i].timestamp),
            Feasibility::Cardinality(k) => set.count < *k,
        }
    }

    fn add(&self, set: &mut FeasibleSet, state: &mut CoverageState, i: usize) {
        let t = self.events[i].timestamp;
        let pos = set.timestamps.partition_point(|x| *x <= t);
        set.timestamps.insert(pos, t);
        set.used_related[self.objective.related_key(i)] = true;
        set.selected[i] = true;
        set.count += 1;
        self.objective.add(i, state);
    }

    /// Whether the index set belongs to the independence family.
    pub fn is_feasible(&self, indices: &[usize]) -> bool {
        let mut set = self.start();
        let mut state = self.objective.empty_state();
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return false;
        }
        // membership is order independent, so checking incrementally is enough
        for &i in &sorted {
            if !self.can_add(&set, i) {
                return false;
            }
            self.add(&mut set, &mut state, i);
        }
        true
    }

    /// Textbook greedy: each round evaluates every feasible candidate and
    /// takes the largest gain, ties going to the earlier candidate.
    pub fn naive_greedy(&self) -> Selection {
        let mut set = self.start();
        let mut state = self.objective.empty_state();
        let mut picks = Vec::new();
        let mut evaluations = 0;
        loop {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.events.len() {
                if !self.can_add(&set, i) {
                    continue;
                }
                let g = self.objective.gain(i, &state);
                evaluations += 1;
                if best.is_none_or(|(bg, _)| g > bg) {
                    best = Some((g, i));
                }
            }
            let Some((gain, index)) = best else { break };
            if self.prune_zero_gain && gain <= 0.0 {
                break;
            }
            self.add(&mut set, &mut state, index);
            picks.push(Pick { index, gain });
        }
        Selection { picks, evaluations }
    }

    /// Lazy greedy. Gains only shrink as the selection grows, so a stale
    /// gain is an upper bound; only the top of the queue is re-evaluated.
    /// Produces the same picks as [`Problem::naive_greedy`].
    pub fn lazy_greedy(&self) -> Selection {
        let mut set = self.start();
        let mut state = self.objective.empty_state();
        let mut heap = BinaryHeap::with_capacity(self.events.len());
        let mut evaluations = 0;
        for i in 0..self.events.len() {
            if self.can_add(&set, i) {
                heap.push(Bound { gain: self.objective.singleton(i), index: i, round: 0 });
                evaluations += 1;
            }
        }
        let mut picks = Vec::new();
        while let Some(top) = heap.pop() {
            // infeasible now means infeasible for every superset
            if !self.can_add(&set, top.index) {
                continue;
            }
            if top.round == picks.len() {
                if self.prune_zero_gain && top.gain <= 0.0 {
                    break;
                }
                self.add(&mut set, &mut state, top.index);
                picks.push(Pick { index: top.index, gain: top.gain });
            } else {
                let gain = self.objective.gain(top.index, &state);
                evaluations += 1;
                heap.push(Bound { gain, index: top.index, round: picks.len() });
            }
        }
        Selection { picks, evaluations }
    }

    /// Exhaustive search over every feasible subset. The first maximizer in
    /// depth-first order (include before exclude, ascending index) wins.
    pub fn brute_force(&self) -> Result<Selection, SelectError> {
        let size = self.events.len();
        if size > BRUTE_FORCE_LIMIT {
            return Err(crate::error::LayoutError::TooLarge { size, limit: BRUTE_FORCE_LIMIT }.into());
        }
        let mut best = (0.0, Vec::new());
        let mut current = Vec::new();
        self.search(0, &self.start(), &mut current, &mut best);
        let (_, indices) = best;
        // report gains in index order so they sum to the objective
        let mut state = self.objective.empty_state();
        let picks = indices
            .iter()
            .map(|&i| {
                let gain = self.objective.gain(i, &state);
                self.objective.add(i, &mut state);
                Pick { index: i, gain }
            })
            .collect();
        Ok(Selection { picks, evaluations: 0 })
    }

    fn search(&self, from: usize, set: &FeasibleSet, current: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        let value = self.objective.value(current);
        if value > best.0 {
            *best = (value, current.clone());
        }
        for i in from..self.events.len() {
            if !self.can_add(set, i) {
                continue;
            }
            let mut next = set.clone();
            let mut scratch = self.objective.empty_state();
            self.add(&mut next, &mut scratch, i);
            current.push(i);
            self.search(i + 1, &next, current, best);
            current.pop();
        }
    }
}

/// Queue entry: a gain computed when `round` events had been selected.
#[derive(Debug, Clone, Copy)]
struct Bound {
    gain: f64,
    index: usize,
    round: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl Ord for Bound {
    /// Larger gain first, then the earlier candidate.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
