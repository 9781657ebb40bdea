//! Timeline selection: model variants and the per-request pipeline that
//! turns a candidate set into a laid-out timeline.

mod greedy;
mod span;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use greedy::{Feasibility, Pick, Problem, Selection, BRUTE_FORCE_LIMIT};
pub use span::default_timespan;

use crate::error::SelectError;
use crate::events::Event;
use crate::kb::EntityId;
use crate::layout::{LayoutConstraint, LayoutSpec, TimeWindow};
use crate::relevance::{CoverageObjective, RelevanceContext, RelevanceModel, Weights};
use crate::time::{TimeSpan, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVariant {
    Full,
    Base,
    #[serde(rename = "Full-E2D")]
    FullE2D,
    #[serde(rename = "Full-E2E")]
    FullE2E,
    #[serde(rename = "Full-TD")]
    FullTD,
    #[serde(rename = "Full-CD")]
    FullCD,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::Full,
        ModelVariant::Base,
        ModelVariant::FullE2D,
        ModelVariant::FullE2E,
        ModelVariant::FullTD,
        ModelVariant::FullCD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Full => "Full",
            ModelVariant::Base => "Base",
            ModelVariant::FullE2D => "Full-E2D",
            ModelVariant::FullE2E => "Full-E2E",
            ModelVariant::FullTD => "Full-TD",
            ModelVariant::FullCD => "Full-CD",
        }
    }

    pub fn config(self) -> VariantConfig {
        let full = Weights::FULL;
        let weights = match self {
            ModelVariant::Base => Weights { e2e: 0.0, e2e_path: 0.0, g2e: 1.0, e2d: 0.0, e2d_path: 0.0 },
            ModelVariant::FullE2D => Weights { e2d: 0.0, e2d_path: 0.0, ..full },
            ModelVariant::FullE2E => Weights { e2e: 0.0, e2e_path: 0.0, ..full },
            _ => full,
        };
        VariantConfig {
            model: RelevanceModel {
                weights,
                content_diversity: self != ModelVariant::FullCD,
                ..RelevanceModel::default()
            },
            temporal_diversity: self != ModelVariant::FullTD,
            dedup_entities: self != ModelVariant::FullCD,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = SelectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SelectError::UnknownVariant(s.to_string()))
    }
}

/// Everything that distinguishes one ablation from another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub model: RelevanceModel,
    /// Enforce the layout family during selection. When off, the same
    /// number of events is chosen by cardinality and overlaps are removed
    /// afterwards.
    pub temporal_diversity: bool,
    /// Reject a candidate whose related entity is already on the timeline.
    pub dedup_entities: bool,
}

pub fn ablation_preset(name: &str) -> Result<VariantConfig, SelectError> {
    Ok(name.parse::<ModelVariant>()?.config())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    Naive,
    #[default]
    Lazy,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectOptions {
    pub algorithm: Algorithm,
    /// Stop before picking an event that adds nothing.
    pub prune_zero_gain: bool,
}

impl From<Algorithm> for SelectOptions {
    fn from(algorithm: Algorithm) -> Self {
        SelectOptions { algorithm, prune_zero_gain: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedEvent {
    pub event: Event,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    pub subject: EntityId,
    pub span: TimeSpan,
    pub spec: LayoutSpec,
    pub t_w: TimeWindow,
    pub n: usize,
    /// Sorted by timestamp.
    pub events: Vec<SelectedEvent>,
    pub objective: f64,
    pub evaluations: usize,
}

impl Timeline {
    pub fn timestamps(&self) -> Vec<Timestamp> {
        self.events.iter().map(|e| e.event.timestamp).collect()
    }
}

fn run(problem: &Problem, algorithm: Algorithm) -> Result<Selection, SelectError> {
    match algorithm {
        Algorithm::Naive => Ok(problem.naive_greedy()),
        Algorithm::Lazy => Ok(problem.lazy_greedy()),
        Algorithm::BruteForce => problem.brute_force(),
    }
}

/// Candidates inside `span`, in candidate order.
pub fn events_in_span(candidates: &[Event], span: &TimeSpan) -> Vec<Event> {
    candidates.iter().filter(|e| span.contains(e.timestamp)).cloned().collect()
}

/// Selects a timeline for `subject` from sorted `candidates` within `span`.
/// Zooming is the same call with a different span.
pub fn build_timeline(
    subject: &EntityId,
    candidates: &[Event],
    variant: &VariantConfig,
    ctx: &RelevanceContext,
    spec: &LayoutSpec,
    span: &TimeSpan,
    opts: SelectOptions,
) -> Result<Timeline, SelectError> {
    let algorithm = opts.algorithm;
    let constraint = LayoutConstraint::for_span(spec, span)?;
    let pool = events_in_span(candidates, span);
    let objective = CoverageObjective::new(subject, &pool, &variant.model, ctx);
    let layout = Problem {
        events: &pool,
        objective: &objective,
        feasibility: Feasibility::Layout(constraint),
        dedup_entities: variant.dedup_entities,
        prune_zero_gain: opts.prune_zero_gain,
    };
    let selection = if variant.temporal_diversity {
        run(&layout, algorithm)?
    } else {
        let budget = run(&layout, algorithm)?.picks.len();
        let unconstrained = Problem { feasibility: Feasibility::Cardinality(budget), ..layout.clone() };
        let chosen = run(&unconstrained, algorithm)?;
        overlap_filter(&pool, &objective, &constraint, &chosen)
    };
    let mut events: Vec<SelectedEvent> = selection
        .picks
        .iter()
        .map(|p| SelectedEvent { event: pool[p.index].clone(), gain: p.gain })
        .collect();
    events.sort_by(|a, b| a.event.cmp(&b.event));
    Ok(Timeline {
        subject: subject.clone(),
        span: *span,
        spec: *spec,
        t_w: constraint.t_w,
        n: constraint.n,
        objective: selection.objective(),
        evaluations: selection.evaluations,
        events,
    })
}

pub fn greedy_timeline(
    subject: &EntityId,
    candidates: &[Event],
    variant: &VariantConfig,
    ctx: &RelevanceContext,
    spec: &LayoutSpec,
    span: &TimeSpan,
) -> Result<Timeline, SelectError> {
    build_timeline(subject, candidates, variant, ctx, spec, span, Algorithm::Naive.into())
}

pub fn lazy_greedy_timeline(
    subject: &EntityId,
    candidates: &[Event],
    variant: &VariantConfig,
    ctx: &RelevanceContext,
    spec: &LayoutSpec,
    span: &TimeSpan,
) -> Result<Timeline, SelectError> {
    build_timeline(subject, candidates, variant, ctx, spec, span, Algorithm::Lazy.into())
}

/// Exact maximizer; at most [`BRUTE_FORCE_LIMIT`] candidates inside `span`.
pub fn brute_force_timeline(
    subject: &EntityId,
    candidates: &[Event],
    variant: &VariantConfig,
    ctx: &RelevanceContext,
    spec: &LayoutSpec,
    span: &TimeSpan,
) -> Result<Timeline, SelectError> {
    build_timeline(subject, candidates, variant, ctx, spec, span, Algorithm::BruteForce.into())
}

/// Re-selection for a new span; nothing carries over from earlier timelines.
pub fn zoom(
    subject: &EntityId,
    candidates: &[Event],
    variant: &VariantConfig,
    ctx: &RelevanceContext,
    spec: &LayoutSpec,
    new_span: &TimeSpan,
) -> Result<Timeline, SelectError> {
    lazy_greedy_timeline(subject, candidates, variant, ctx, spec, new_span)
}

/// Walks `chosen` in selection order, keeping each pick that still fits the
/// layout, and recomputes gains over the kept picks.
fn overlap_filter(
    pool: &[Event],
    objective: &CoverageObjective,
    constraint: &LayoutConstraint,
    chosen: &Selection,
) -> Selection {
    let mut kept_ts: Vec<Timestamp> = Vec::new();
    let mut state = objective.empty_state();
    let mut picks = Vec::new();
    for p in &chosen.picks {
        let t = pool[p.index].timestamp;
        if !constraint.can_add(&kept_ts, t) {
            continue;
        }
        let pos = kept_ts.partition_point(|x| *x <= t);
        kept_ts.insert(pos, t);
        let gain = objective.gain(p.index, &state);
        objective.add(p.index, &mut state);
        picks.push(Pick { index: p.index, gain });
    }
    Selection { picks, evaluations: chosen.evaluations }
}
