//! Candidate event mining and event descriptions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::LineError;
use crate::kb::{EntityId, KnowledgeGraph, Object, PredicateId};
use crate::time::Timestamp;

/// Pseudo-predicate of the self-loop used to represent 1-hop events.
pub const SELF_PREDICATE: &str = "self";

/// A sequence of predicates, displayed in dotted form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredicatePath(Vec<PredicateId>);

impl PredicatePath {
    pub fn new(segments: Vec<PredicateId>) -> Self {
        PredicatePath(segments)
    }

    pub fn of(segments: &[&str]) -> Self {
        PredicatePath(segments.iter().map(PredicateId::new).collect())
    }

    pub fn segments(&self) -> &[PredicateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dotted(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PredicatePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(p.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "simple_1hop")]
    Simple1Hop,
    #[serde(rename = "simple_2hop")]
    Simple2Hop,
    #[serde(rename = "compound")]
    Compound,
}

impl EventKind {
    pub fn is_simple(self) -> bool {
        !matches!(self, EventKind::Compound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub subject: EntityId,
    pub related_entity: EntityId,
    pub timestamp: Timestamp,
    pub path_to_re: PredicatePath,
    pub path_to_ts: PredicatePath,
    pub kind: EventKind,
}

impl Event {
    fn sort_key(&self) -> (Timestamp, &EntityId, &PredicatePath, &PredicatePath, EventKind, &EntityId) {
        (
            self.timestamp,
            &self.related_entity,
            &self.path_to_re,
            &self.path_to_ts,
            self.kind,
            &self.subject,
        )
    }
}

/// Events order by timestamp, then related entity, then paths. This is the
/// candidate order and the final tie-breaker during selection.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All candidate events of one subject, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub subject: EntityId,
    events: Vec<Event>,
}

impl CandidateSet {
    /// Sorts `events` and removes duplicates sharing
    /// (subject, related entity, entity path, timestamp); the copy with the
    /// smallest time path survives.
    pub fn new(subject: EntityId, mut events: Vec<Event>) -> Self {
        debug_assert!(events.iter().all(|e| e.subject == subject));
        events.sort();
        let mut seen = std::collections::HashSet::new();
        events.retain(|e| seen.insert((e.related_entity.clone(), e.path_to_re.clone(), e.timestamp)));
        CandidateSet { subject, events }
    }

    pub fn empty(subject: EntityId) -> Self {
        CandidateSet { subject, events: Vec::new() }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn union(&self, other: &CandidateSet) -> CandidateSet {
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        CandidateSet::new(self.subject.clone(), events)
    }

    pub fn retain<F: FnMut(&Event) -> bool>(&self, f: F) -> CandidateSet {
        let mut events = self.events.clone();
        events.retain(f);
        CandidateSet { subject: self.subject.clone(), events }
    }

    pub fn simple_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind.is_simple()).count()
    }
}

/// 1-hop (`s -> t`) and 2-hop (`s -> re -> t`) events of `s`.
pub fn generate_simple_events(g: &KnowledgeGraph, s: &EntityId) -> CandidateSet {
    let self_pred = PredicateId::new(SELF_PREDICATE);
    let mut events = Vec::new();
    for (p1, o) in g.neighbors(s) {
        match o {
            Object::Time(t) => events.push(Event {
                subject: s.clone(),
                related_entity: s.clone(),
                timestamp: *t,
                path_to_re: PredicatePath(vec![self_pred.clone()]),
                path_to_ts: PredicatePath(vec![self_pred.clone(), p1.clone()]),
                kind: EventKind::Simple1Hop,
            }),
            Object::Entity(re) => {
                for (p2, o2) in g.neighbors(re) {
                    if let Object::Time(t) = o2 {
                        events.push(Event {
                            subject: s.clone(),
                            related_entity: re.clone(),
                            timestamp: *t,
                            path_to_re: PredicatePath(vec![p1.clone()]),
                            path_to_ts: PredicatePath(vec![p1.clone(), p2.clone()]),
                            kind: EventKind::Simple2Hop,
                        });
                    }
                }
            }
        }
    }
    CandidateSet::new(s.clone(), events)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct JoinPartner {
    subject: EntityId,
    first_hop: PredicateId,
}

/// One subject's view of a shared (related entity, predicate, timestamp) node.
#[derive(Debug, Clone)]
struct JoinEntry {
    first_hop: PredicateId,
    anchor: EntityId,
    second_hop: PredicateId,
    time: Timestamp,
    /// Time path of the subject's own event for this entry.
    time_path: PredicatePath,
}

/// Corpus-wide index of 2-hop paths keyed by (related entity, second
/// predicate, timestamp), used to join compound events. CVT timestamps take
/// part through their identity entity.
#[derive(Debug, Default)]
pub struct CompoundIndex {
    partners: HashMap<(EntityId, PredicateId, Timestamp), Vec<JoinPartner>>,
    own: BTreeMap<EntityId, Vec<JoinEntry>>,
}

impl CompoundIndex {
    pub fn build(g: &KnowledgeGraph) -> Self {
        let mut index = CompoundIndex::default();
        for x in g.subjects() {
            for (p3, o) in g.neighbors(x) {
                let Object::Entity(re1) = o else { continue };
                for (p2, o2) in g.neighbors(re1) {
                    if let Object::Time(t) = o2 {
                        index.insert(
                            x,
                            JoinEntry {
                                first_hop: p3.clone(),
                                anchor: re1.clone(),
                                second_hop: p2.clone(),
                                time: *t,
                                time_path: PredicatePath(vec![p3.clone(), p2.clone()]),
                            },
                        );
                    }
                }
            }
        }
        for j in g.cvt_joins() {
            index.insert(
                &j.subject,
                JoinEntry {
                    first_hop: j.first_hop.clone(),
                    anchor: j.anchor.clone(),
                    second_hop: j.time_predicate.clone(),
                    time: j.time,
                    time_path: PredicatePath(vec![j.collapsed_time_predicate()]),
                },
            );
        }
        for list in index.partners.values_mut() {
            list.sort();
            list.dedup();
        }
        index
    }

    fn insert(&mut self, subject: &EntityId, entry: JoinEntry) {
        self.partners
            .entry((entry.anchor.clone(), entry.second_hop.clone(), entry.time))
            .or_default()
            .push(JoinPartner {
                subject: subject.clone(),
                first_hop: entry.first_hop.clone(),
            });
        self.own.entry(subject.clone()).or_default().push(entry);
    }

    /// Compound events of `s`: every other subject sharing one of `s`'s
    /// (related entity, predicate, timestamp) nodes becomes a related entity.
    pub fn compound_events(&self, s: &EntityId) -> CandidateSet {
        let mut events = Vec::new();
        for entry in self.own.get(s).map(Vec::as_slice).unwrap_or_default() {
            let key = (entry.anchor.clone(), entry.second_hop.clone(), entry.time);
            for partner in self.partners.get(&key).map(Vec::as_slice).unwrap_or_default() {
                if &partner.subject == s {
                    continue;
                }
                events.push(Event {
                    subject: s.clone(),
                    related_entity: partner.subject.clone(),
                    timestamp: entry.time,
                    path_to_re: PredicatePath(vec![entry.first_hop.clone(), partner.first_hop.clone()]),
                    path_to_ts: entry.time_path.clone(),
                    kind: EventKind::Compound,
                });
            }
        }
        CandidateSet::new(s.clone(), events)
    }
}

/// Compound events for `s`. `simple` must be the simple events of `s`; the
/// join itself runs over `index`.
pub fn generate_compound_events(index: &CompoundIndex, s: &EntityId, simple: &CandidateSet) -> CandidateSet {
    debug_assert_eq!(&simple.subject, s);
    index.compound_events(s)
}

/// Simple and compound events of `s`.
pub fn generate_all_events(g: &KnowledgeGraph, index: &CompoundIndex, s: &EntityId) -> CandidateSet {
    let simple = generate_simple_events(g, s);
    let compound = generate_compound_events(index, s, &simple);
    simple.union(&compound)
}

/// Display names for entity and predicate ids.
#[derive(Debug, Clone, Default)]
pub struct Names(HashMap<String, String>);

impl Names {
    pub fn insert(&mut self, id: impl Into<String>, name: impl Into<String>) {
        self.0.insert(id.into(), name.into());
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.0.get(id).map(String::as_str)
    }

    /// Display name, or the raw id when none is known.
    pub fn display<'a>(&'a self, id: &'a str) -> &'a str {
        self.get(id).unwrap_or(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reads `id<TAB>name` lines.
    pub fn load<R: BufRead>(reader: R) -> (Names, Vec<LineError>) {
        let mut names = Names::default();
        let mut errors = Vec::new();
        for_each_record(reader, &mut errors, |line_no, line, errors| match line.split_once('\t') {
            Some((id, name)) if !id.is_empty() && !name.is_empty() => names.insert(id, name),
            _ => errors.push(LineError { line: line_no, message: "expected id<TAB>name".into() }),
        });
        (names, errors)
    }
}

/// Description patterns keyed by (entity path, time path), with
/// placeholders `{sub}`, `{re}` and `{date}`.
#[derive(Debug, Clone, Default)]
pub struct Templates(HashMap<(String, String), String>);

impl Templates {
    pub fn insert(&mut self, path_to_re: impl Into<String>, path_to_ts: impl Into<String>, pattern: impl Into<String>) {
        self.0.insert((path_to_re.into(), path_to_ts.into()), pattern.into());
    }

    pub fn get(&self, path_to_re: &str, path_to_ts: &str) -> Option<&str> {
        self.0
            .get(&(path_to_re.to_string(), path_to_ts.to_string()))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reads `path_to_re<TAB>path_to_ts<TAB>pattern` lines.
    pub fn load<R: BufRead>(reader: R) -> (Templates, Vec<LineError>) {
        let mut templates = Templates::default();
        let mut errors = Vec::new();
        for_each_record(reader, &mut errors, |line_no, line, errors| {
            let fields: Vec<&str> = line.splitn(3, '\t').collect();
            match fields.as_slice() {
                [re, ts, pattern] if !re.is_empty() && !ts.is_empty() && !pattern.is_empty() => {
                    templates.insert(*re, *ts, *pattern)
                }
                _ => errors.push(LineError {
                    line: line_no,
                    message: "expected path_to_re<TAB>path_to_ts<TAB>pattern".into(),
                }),
            }
        });
        (templates, errors)
    }
}

fn for_each_record<R: BufRead>(
    reader: R,
    errors: &mut Vec<LineError>,
    mut f: impl FnMut(usize, &str, &mut Vec<LineError>),
) {
    for (idx, line) in reader.lines().enumerate() {
        match line {
            Ok(line) => {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                f(idx + 1, line, errors);
            }
            Err(e) => errors.push(LineError { line: idx + 1, message: e.to_string() }),
        }
    }
}

fn predicate_display(names: &Names, p: &PredicateId) -> String {
    if let Some(name) = names.get(p.as_str()) {
        return name.to_string();
    }
    // collapsed predicates may only have names for their parts
    let parts: Vec<&str> = p.as_str().split('.').collect();
    if parts.len() > 1 && parts.iter().all(|s| names.get(s).is_some()) {
        return parts.iter().map(|s| names.display(s)).collect::<Vec<_>>().join(".");
    }
    p.to_string()
}

/// Human-readable text for an event: the matching template, or the
/// concatenated names of subject, time-path predicates, related entity and date.
pub fn describe_event(e: &Event, templates: &Templates, names: &Names) -> String {
    let sub = names.display(e.subject.as_str());
    let re = names.display(e.related_entity.as_str());
    if let Some(pattern) = templates.get(&e.path_to_re.dotted(), &e.path_to_ts.dotted()) {
        return pattern
            .replace("{sub}", sub)
            .replace("{re}", re)
            .replace("{date}", &e.timestamp.long_form());
    }
    let preds: Vec<String> = e
        .path_to_ts
        .segments()
        .iter()
        .filter(|p| p.as_str() != SELF_PREDICATE)
        .map(|p| predicate_display(names, p))
        .collect();
    let mut parts = vec![sub.to_string(), preds.join(".")];
    if e.related_entity != e.subject {
        parts.push(re.to_string());
    }
    parts.push(e.timestamp.iso());
    parts.join(" — ")
}
