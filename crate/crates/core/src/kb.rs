//! In-memory knowledge graph loaded from tab-separated triples.
//!
//! Reified n-ary relations (CVT nodes) are flagged at load time from a
//! configured predicate set and later collapsed into dotted-predicate edges.
//! Collapsing also records, per CVT timestamp, the entity the CVT stands
//! for (its identity), so that compound events can join across subjects
//! whose CVT ids differ.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{KbError, LineError};
use crate::time::Timestamp;

macro_rules! interned_id {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: impl AsRef<str>) -> Self {
                $name(Arc::from(id.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                if s.is_empty() {
                    return Err(serde::de::Error::custom(concat!(stringify!($name), " is empty")));
                }
                Ok($name::new(s))
            }
        }
    };
}

interned_id!(EntityId);
interned_id!(PredicateId);

impl PredicateId {
    /// The dotted form `p1.p2` used for collapsed edges and paths.
    pub fn join(first: &PredicateId, second: &PredicateId) -> PredicateId {
        PredicateId::new(format!("{}.{}", first, second))
    }
}

/// Object position of a triple: an entity reference or a date literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Entity(EntityId),
    Time(Timestamp),
}

impl Object {
    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            Object::Entity(e) => Some(e),
            Object::Time(_) => None,
        }
    }

    pub fn as_time(&self) -> Option<Timestamp> {
        match self {
            Object::Time(t) => Some(*t),
            Object::Entity(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: Object,
}

impl Triple {
    /// Parses one `subject<TAB>predicate<TAB>object` record.
    pub fn parse(line: &str) -> Result<Triple, String> {
        let mut fields = line.split('\t');
        let (Some(s), Some(p), Some(o), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err("expected three tab-separated fields".into());
        };
        let (s, p, o) = (s.trim(), p.trim(), o.trim());
        if s.is_empty() || p.is_empty() || o.is_empty() {
            return Err("empty field".into());
        }
        let object = if o.starts_with('@') {
            Object::Time(Timestamp::parse(o).map_err(|e| e.to_string())?)
        } else {
            Object::Entity(EntityId::new(o))
        };
        Ok(Triple {
            subject: EntityId::new(s),
            predicate: PredicateId::new(p),
            object,
        })
    }
}

/// Period during which an entity exists. `end == None` means it still exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Existence {
    pub start: Timestamp,
    pub end: Option<Timestamp>,
}

impl Existence {
    pub fn contains(&self, t: Timestamp) -> bool {
        t >= self.start && self.end.is_none_or(|end| t <= end)
    }
}

/// Predicates whose timestamp objects mark the start or end of an entity's existence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExistencePredicates {
    #[serde(default)]
    pub start: Vec<PredicateId>,
    #[serde(default)]
    pub end: Vec<PredicateId>,
}

/// A timestamped CVT seen through its identity entity:
/// `subject --first_hop--> CVT --time_predicate--> time`, with the CVT
/// standing for `anchor`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CvtJoin {
    pub subject: EntityId,
    pub first_hop: PredicateId,
    pub anchor: EntityId,
    pub time_predicate: PredicateId,
    pub time: Timestamp,
}

impl CvtJoin {
    /// The collapsed predicate leading from the subject to the timestamp.
    pub fn collapsed_time_predicate(&self) -> PredicateId {
        PredicateId::join(&self.first_hop, &self.time_predicate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    adjacency: BTreeMap<EntityId, Vec<(PredicateId, Object)>>,
    cvt_nodes: BTreeSet<EntityId>,
    existence: BTreeMap<EntityId, Existence>,
    cvt_joins: Vec<CvtJoin>,
}

#[derive(Default)]
struct Interner {
    entities: HashMap<String, EntityId>,
    predicates: HashMap<String, PredicateId>,
}

impl Interner {
    fn entity(&mut self, e: EntityId) -> EntityId {
        self.entities.entry(e.as_str().to_string()).or_insert(e).clone()
    }

    fn predicate(&mut self, p: PredicateId) -> PredicateId {
        self.predicates.entry(p.as_str().to_string()).or_insert(p).clone()
    }
}

/// Loads triples line by line. Malformed lines are reported and skipped.
pub fn load_triples<R: BufRead>(
    source: R,
    cvt_predicates: &BTreeSet<PredicateId>,
    existence_predicates: &ExistencePredicates,
) -> (KnowledgeGraph, Vec<LineError>) {
    let mut errors = Vec::new();
    let mut interner = Interner::default();
    let mut adjacency: BTreeMap<EntityId, Vec<(PredicateId, Object)>> = BTreeMap::new();
    let mut cvt_nodes = BTreeSet::new();
    let mut starts: BTreeMap<EntityId, Timestamp> = BTreeMap::new();
    let mut ends: BTreeMap<EntityId, Timestamp> = BTreeMap::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                errors.push(LineError { line: line_no, message: e.to_string() });
                continue;
            }
        };
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let triple = match Triple::parse(trimmed) {
            Ok(t) => t,
            Err(message) => {
                errors.push(LineError { line: line_no, message });
                continue;
            }
        };
        let subject = interner.entity(triple.subject);
        let predicate = interner.predicate(triple.predicate);
        let object = match triple.object {
            Object::Entity(e) => Object::Entity(interner.entity(e)),
            t @ Object::Time(_) => t,
        };
        if cvt_predicates.contains(&predicate) {
            if let Object::Entity(e) = &object {
                cvt_nodes.insert(e.clone());
            }
        }
        if let Object::Time(t) = object {
            if existence_predicates.start.contains(&predicate) {
                let slot = starts.entry(subject.clone()).or_insert(t);
                *slot = (*slot).min(t);
            }
            if existence_predicates.end.contains(&predicate) {
                let slot = ends.entry(subject.clone()).or_insert(t);
                *slot = (*slot).max(t);
            }
        }
        adjacency.entry(subject).or_default().push((predicate, object));
    }

    for edges in adjacency.values_mut() {
        edges.sort();
    }

    let mut existence = BTreeMap::new();
    for (entity, start) in starts {
        let mut end = ends.get(&entity).copied();
        if let Some(e) = end {
            if e < start {
                log::warn!("{entity}: existence end {e} precedes start {start}, ignoring end");
                end = None;
            }
        }
        existence.insert(entity, Existence { start, end });
    }

    (
        KnowledgeGraph {
            adjacency,
            cvt_nodes,
            existence,
            cvt_joins: Vec::new(),
        },
        errors,
    )
}

const NO_EDGES: &[(PredicateId, Object)] = &[];

impl KnowledgeGraph {
    pub fn from_triples<I: IntoIterator<Item = Triple>>(
        triples: I,
        cvt_predicates: &BTreeSet<PredicateId>,
        existence_predicates: &ExistencePredicates,
    ) -> KnowledgeGraph {
        let text: String = triples
            .into_iter()
            .map(|t| {
                let object = match &t.object {
                    Object::Entity(e) => e.to_string(),
                    Object::Time(ts) => format!("@{ts}"),
                };
                format!("{}\t{}\t{}\n", t.subject, t.predicate, object)
            })
            .collect();
        let (g, errors) = load_triples(text.as_bytes(), cvt_predicates, existence_predicates);
        debug_assert!(errors.is_empty(), "{errors:?}");
        g
    }

    /// Outgoing edges sorted by predicate then object; empty for unknown ids.
    pub fn neighbors(&self, e: &EntityId) -> &[(PredicateId, Object)] {
        self.adjacency.get(e).map_or(NO_EDGES, Vec::as_slice)
    }

    /// Entities with at least one outgoing edge, in id order.
    pub fn subjects(&self) -> impl Iterator<Item = &EntityId> {
        self.adjacency.keys()
    }

    pub fn contains(&self, e: &EntityId) -> bool {
        self.adjacency.contains_key(e)
    }

    pub fn is_cvt(&self, e: &EntityId) -> bool {
        self.cvt_nodes.contains(e)
    }

    pub fn cvt_nodes(&self) -> &BTreeSet<EntityId> {
        &self.cvt_nodes
    }

    pub fn existence(&self, e: &EntityId) -> Option<Existence> {
        self.existence.get(e).copied()
    }

    pub fn existence_map(&self) -> &BTreeMap<EntityId, Existence> {
        &self.existence
    }

    pub fn cvt_joins(&self) -> &[CvtJoin] {
        &self.cvt_joins
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum()
    }

    /// Edges `(subject, predicate, object)` in deterministic order.
    pub fn edges(&self) -> impl Iterator<Item = (&EntityId, &PredicateId, &Object)> {
        self.adjacency
            .iter()
            .flat_map(|(s, edges)| edges.iter().map(move |(p, o)| (s, p, o)))
    }

    fn cvt_instances(&self) -> impl Iterator<Item = (&EntityId, &PredicateId, &EntityId)> {
        self.edges().filter_map(|(a, p, o)| match o {
            Object::Entity(c) if self.cvt_nodes.contains(c) && !self.cvt_nodes.contains(a) => {
                Some((a, p, c))
            }
            _ => None,
        })
    }

    /// Picks the outgoing CVT predicate whose objects are most diverse for
    /// CVTs entered through `incoming`: the one minimizing the largest number
    /// of instances sharing a single object. Ties go to the smaller id.
    pub fn resolve_cvt_identity(&self, incoming: &PredicateId) -> Result<PredicateId, KbError> {
        // predicate -> object -> instance count
        let mut multiplicity: BTreeMap<&PredicateId, BTreeMap<&EntityId, usize>> = BTreeMap::new();
        let mut seen_incoming = false;
        for (_, p1, cvt) in self.cvt_instances() {
            if p1 != incoming {
                continue;
            }
            seen_incoming = true;
            for (p2, o) in self.neighbors(cvt) {
                if let Object::Entity(b) = o {
                    *multiplicity.entry(p2).or_default().entry(b).or_default() += 1;
                }
            }
        }
        if !seen_incoming {
            return Err(KbError::UnknownPredicate(incoming.to_string()));
        }
        let mut best: Option<(usize, &PredicateId)> = None;
        for (p2, counts) in &multiplicity {
            let worst = counts.values().copied().max().unwrap_or(0);
            if best.is_none_or(|(b, _)| worst < b) {
                best = Some((worst, p2));
            }
        }
        best.map(|(_, p)| p.clone())
            .ok_or_else(|| KbError::NoIdentityPredicate(incoming.to_string()))
    }

    /// Replaces every `a --p1--> CVT --p2--> b` by `a --p1.p2--> b` and
    /// removes the CVT nodes. Timestamps hanging off a CVT are recorded as
    /// [`CvtJoin`]s keyed by the CVT's identity entity.
    pub fn collapse_cvt_nodes(&self) -> KnowledgeGraph {
        if self.cvt_nodes.is_empty() {
            return self.clone();
        }

        let incoming: BTreeSet<&PredicateId> = self.cvt_instances().map(|(_, p, _)| p).collect();
        let identity: BTreeMap<&PredicateId, PredicateId> = incoming
            .into_iter()
            .filter_map(|p1| self.resolve_cvt_identity(p1).ok().map(|p2| (p1, p2)))
            .collect();

        for cvt in &self.cvt_nodes {
            if self.neighbors(cvt).is_empty() {
                log::warn!("CVT node {cvt} has no outgoing edges, dropped");
            }
        }

        let mut adjacency: BTreeMap<EntityId, Vec<(PredicateId, Object)>> = BTreeMap::new();
        let mut joins = self.cvt_joins.clone();
        for (a, edges) in &self.adjacency {
            if self.cvt_nodes.contains(a) {
                continue;
            }
            let mut out = Vec::with_capacity(edges.len());
            for (p1, o) in edges {
                let cvt = match o {
                    Object::Entity(c) if self.cvt_nodes.contains(c) => c,
                    _ => {
                        out.push((p1.clone(), o.clone()));
                        continue;
                    }
                };
                let cvt_edges = self.neighbors(cvt);
                for (p2, b) in cvt_edges {
                    if matches!(b, Object::Entity(x) if self.cvt_nodes.contains(x)) {
                        log::warn!("nested CVT {b:?} under {cvt} is not collapsed");
                        continue;
                    }
                    out.push((PredicateId::join(p1, p2), b.clone()));
                }
                let anchor = identity.get(p1).and_then(|p2| {
                    cvt_edges
                        .iter()
                        .find_map(|(p, b)| (p == p2).then(|| b.as_entity()).flatten())
                });
                if let Some(anchor) = anchor {
                    for (pt, b) in cvt_edges {
                        if let Object::Time(t) = b {
                            joins.push(CvtJoin {
                                subject: a.clone(),
                                first_hop: p1.clone(),
                                anchor: anchor.clone(),
                                time_predicate: pt.clone(),
                                time: *t,
                            });
                        }
                    }
                }
            }
            if !out.is_empty() {
                out.sort();
                adjacency.insert(a.clone(), out);
            }
        }
        joins.sort();
        joins.dedup();

        let existence = self
            .existence
            .iter()
            .filter(|(e, _)| !self.cvt_nodes.contains(*e))
            .map(|(e, x)| (e.clone(), *x))
            .collect();

        KnowledgeGraph {
            adjacency,
            cvt_nodes: BTreeSet::new(),
            existence,
            cvt_joins: joins,
        }
    }
}
