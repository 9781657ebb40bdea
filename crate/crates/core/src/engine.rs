//! Request-level API shared by the command line and the HTTP service.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SelectError;
use crate::events::{describe_event, Event, Names, Templates};
use crate::kb::{EntityId, Existence};
use crate::layout::LayoutSpec;
use crate::relevance::{CooccurrenceStore, ImportanceStore, PathAverages, RelevanceContext};
use crate::selector::{build_timeline, default_timespan, ModelVariant, SelectOptions, Timeline};
use crate::store::CandidateStore;
use crate::time::{TimeSpan, Timestamp};

/// Largest number of hits returned by [`Engine::search`].
pub const SEARCH_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("entity not found: {0}")]
    NotFound(String),
    #[error("invalid {field}: {message}")]
    InvalidParam { field: &'static str, message: String },
    #[error(transparent)]
    Select(#[from] SelectError),
}

impl EngineError {
    fn param(field: &'static str, message: impl Into<String>) -> Self {
        EngineError::InvalidParam { field, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineRequest {
    pub entity: String,
    pub start: Option<Timestamp>,
    pub end: Option<Timestamp>,
    /// Screen width `W` in pixels.
    pub width: Option<u32>,
    /// Screen height `H` in pixels.
    pub height: Option<u32>,
    pub variant: ModelVariant,
}

impl TimelineRequest {
    pub fn new(entity: impl Into<String>) -> Self {
        TimelineRequest {
            entity: entity.into(),
            start: None,
            end: None,
            width: None,
            height: None,
            variant: ModelVariant::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanDoc {
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDoc {
    #[serde(rename = "W")]
    pub screen_width: u32,
    #[serde(rename = "H")]
    pub screen_height: u32,
    #[serde(rename = "w")]
    pub box_width: u32,
    #[serde(rename = "h")]
    pub box_height: u32,
    pub n: usize,
    /// Window length in days.
    pub t_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDoc {
    pub re: EntityId,
    pub timestamp: Timestamp,
    pub path_to_re: String,
    pub path_to_ts: String,
    pub description: String,
    pub gain: f64,
}

/// Wire form of a timeline. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineDoc {
    pub subject: EntityId,
    pub span: SpanDoc,
    pub spec: SpecDoc,
    pub objective: f64,
    pub events: Vec<EventDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityInfo {
    pub id: EntityId,
    pub name: String,
    pub existence: Option<Existence>,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: EntityId,
    pub name: String,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineStats {
    pub events: usize,
    pub distinct_entities: usize,
    pub distinct_paths: usize,
    /// Days between the first and the last event.
    pub spread_days: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationDiff {
    pub shared_events: usize,
    pub only_control: usize,
    pub only_experiment: usize,
    pub control: TimelineStats,
    pub experiment: TimelineStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub entity: EntityId,
    pub control_variant: ModelVariant,
    pub experiment_variant: ModelVariant,
    pub control: TimelineDoc,
    pub experiment: TimelineDoc,
    pub diff: AblationDiff,
}

/// Immutable serving state.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub store: CandidateStore,
    pub cooc: CooccurrenceStore,
    pub importance: ImportanceStore,
    pub averages: PathAverages,
    pub templates: Templates,
    pub names: Names,
    /// Geometry used when a request leaves `W` or `H` out.
    pub layout: LayoutSpec,
    pub options: SelectOptions,
    /// Replaces the preset trade-off between entity and time relevance.
    pub lambda: Option<f64>,
}

impl Engine {
    pub fn context(&self) -> RelevanceContext<'_> {
        RelevanceContext { cooc: &self.cooc, importance: &self.importance, averages: &self.averages }
    }

    fn known(&self, id: &EntityId) -> bool {
        self.store.get(id).is_some() || self.names.get(id.as_str()).is_some()
    }

    fn candidates(&self, id: &EntityId) -> &[Event] {
        self.store.get(id).map_or(&[], |cs| cs.events())
    }

    /// Resolves the span of a request. Missing ends come from the default span;
    /// a subject without events gets the day around the epoch.
    pub fn resolve_span(&self, req: &TimelineRequest) -> Result<TimeSpan, EngineError> {
        let id = EntityId::new(&req.entity);
        let existence = self.store.entry(&id).and_then(|e| e.existence);
        let fallback = || {
            let epoch = Timestamp::from_days(0);
            TimeSpan { start: epoch.offset(-1), end: epoch.offset(1) }
        };
        let default = match (req.start, req.end) {
            (Some(start), Some(end)) => TimeSpan { start, end },
            _ => default_timespan(self.candidates(&id), existence).unwrap_or_else(fallback),
        };
        let start = req.start.unwrap_or(default.start);
        let end = req.end.unwrap_or(default.end);
        if start >= end {
            return Err(EngineError::param("start", format!("{start} is not before end {end}")));
        }
        Ok(TimeSpan { start, end })
    }

    pub fn resolve_spec(&self, req: &TimelineRequest) -> Result<LayoutSpec, EngineError> {
        let spec = LayoutSpec {
            screen_width: req.width.unwrap_or(self.layout.screen_width),
            screen_height: req.height.unwrap_or(self.layout.screen_height),
            ..self.layout
        };
        if spec.screen_width < spec.box_width {
            return Err(EngineError::param("width", format!("must be at least the box width {}", spec.box_width)));
        }
        if spec.screen_height < spec.box_height {
            return Err(EngineError::param("height", format!("must be at least the box height {}", spec.box_height)));
        }
        Ok(spec)
    }

    pub fn timeline(&self, req: &TimelineRequest) -> Result<Timeline, EngineError> {
        let id = EntityId::new(&req.entity);
        if !self.known(&id) {
            return Err(EngineError::NotFound(req.entity.clone()));
        }
        let count = self.candidates(&id).len();
        if count < self.store.min_events() {
            log::warn!("{id} has {count} candidate events, below the minimum of {}", self.store.min_events());
        }
        let span = self.resolve_span(req)?;
        let spec = self.resolve_spec(req)?;
        let mut variant = req.variant.config();
        if let Some(lambda) = self.lambda {
            variant.model.lambda = lambda;
        }
        Ok(build_timeline(&id, self.candidates(&id), &variant, &self.context(), &spec, &span, self.options)?)
    }

    pub fn timeline_doc(&self, req: &TimelineRequest) -> Result<TimelineDoc, EngineError> {
        Ok(self.render(&self.timeline(req)?))
    }

    pub fn render(&self, t: &Timeline) -> TimelineDoc {
        let t_w = *t.t_w.numer() as f64 / *t.t_w.denom() as f64;
        TimelineDoc {
            subject: t.subject.clone(),
            span: SpanDoc { start: t.span.start, end: t.span.end },
            spec: SpecDoc {
                screen_width: t.spec.screen_width,
                screen_height: t.spec.screen_height,
                box_width: t.spec.box_width,
                box_height: t.spec.box_height,
                n: t.n,
                t_w,
            },
            objective: t.objective,
            events: t
                .events
                .iter()
                .map(|s| EventDoc {
                    re: s.event.related_entity.clone(),
                    timestamp: s.event.timestamp,
                    path_to_re: s.event.path_to_re.dotted(),
                    path_to_ts: s.event.path_to_ts.dotted(),
                    description: describe_event(&s.event, &self.templates, &self.names),
                    gain: s.gain,
                })
                .collect(),
        }
    }

    pub fn entity(&self, id: &str) -> Result<EntityInfo, EngineError> {
        let eid = EntityId::new(id);
        if !self.known(&eid) {
            return Err(EngineError::NotFound(id.to_string()));
        }
        Ok(EntityInfo {
            name: self.names.display(id).to_string(),
            existence: self.store.entry(&eid).and_then(|e| e.existence),
            candidate_count: self.candidates(&eid).len(),
            id: eid,
        })
    }

    /// Case-insensitive prefix matches on display names, then on ids.
    pub fn search(&self, q: &str) -> Vec<SearchHit> {
        let q = q.trim().to_lowercase();
        if q.is_empty() {
            return Vec::new();
        }
        let mut ids: BTreeSet<&str> = self.store.entries().map(|(id, _)| id.as_str()).collect();
        ids.extend(self.names.iter().map(|(id, _)| id));
        let mut hits: Vec<SearchHit> = ids
            .into_iter()
            .filter(|id| {
                self.names.display(id).to_lowercase().starts_with(&q) || id.to_lowercase().starts_with(&q)
            })
            .map(|id| SearchHit {
                id: EntityId::new(id),
                name: self.names.display(id).to_string(),
                candidate_count: self.candidates(&EntityId::new(id)).len(),
            })
            .collect();
        hits.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.id.cmp(&b.id)));
        hits.truncate(SEARCH_LIMIT);
        hits
    }

    /// Control and experiment timelines for one entity with the same span
    /// and geometry.
    pub fn ablate(&self, req: &TimelineRequest, experiment: ModelVariant) -> Result<AblationEntry, EngineError> {
        let control = self.timeline_doc(req)?;
        let experiment_doc = self.timeline_doc(&TimelineRequest { variant: experiment, ..req.clone() })?;
        let key = |e: &EventDoc| (e.re.clone(), e.timestamp, e.path_to_re.clone(), e.path_to_ts.clone());
        let a: BTreeSet<_> = control.events.iter().map(key).collect();
        let b: BTreeSet<_> = experiment_doc.events.iter().map(key).collect();
        let shared = a.intersection(&b).count();
        let diff = AblationDiff {
            shared_events: shared,
            only_control: a.len() - shared,
            only_experiment: b.len() - shared,
            control: stats(&control),
            experiment: stats(&experiment_doc),
        };
        Ok(AblationEntry {
            entity: control.subject.clone(),
            control_variant: req.variant,
            experiment_variant: experiment,
            control,
            experiment: experiment_doc,
            diff,
        })
    }
}

pub fn stats(doc: &TimelineDoc) -> TimelineStats {
    let entities: BTreeSet<&EntityId> = doc.events.iter().map(|e| &e.re).collect();
    let paths: BTreeSet<&str> = doc.events.iter().map(|e| e.path_to_re.as_str()).collect();
    let spread_days = match (doc.events.first(), doc.events.last()) {
        (Some(f), Some(l)) => l.timestamp.days() - f.timestamp.days(),
        _ => 0,
    };
    TimelineStats {
        events: doc.events.len(),
        distinct_entities: entities.len(),
        distinct_paths: paths.len(),
        spread_days,
    }
}
