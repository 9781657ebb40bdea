//! Entity timelines from a knowledge base.
//!
//! Candidate events are generated from the graph around a subject, filtered
//! corpus-wide, scored with co-occurrence statistics and importance, and a
//! subset is chosen greedily under a screen-layout constraint.

pub mod engine;
pub mod error;
pub mod events;
pub mod filter;
pub mod kb;
pub mod layout;
pub mod relevance;
pub mod selector;
pub mod store;
pub mod time;

pub use error::{KbError, LayoutError, LineError, NpmiError, SelectError, StoreError, TimeError};
pub use events::{CandidateSet, Event, EventKind, PredicatePath};
pub use kb::{EntityId, KnowledgeGraph, PredicateId};
pub use layout::{LayoutConstraint, LayoutSpec};
pub use relevance::{CooccurrenceStore, ImportanceStore, PathAverages, RelevanceContext, RelevanceModel};
pub use selector::{build_timeline, Algorithm, ModelVariant, SelectOptions, Timeline, VariantConfig};
pub use time::{TimeSpan, Timestamp};
