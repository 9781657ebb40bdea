//! The relevance objective.
//!
//! `rel(s, T) = λ·erel(s, T) + (1 − λ)·drel(s, T)` where every term is a
//! weighted coverage function over the distinct related entities, entity
//! paths, timestamps and time paths of `T`. With content diversity off the
//! sums run over multisets instead and the objective becomes modular.

mod cooc;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

pub use cooc::{
    build_cooc_store, npmi, read_documents, AnnotatedDocument, CoocParams, CooccurrenceStore, Mention,
    MentionKind, PairCount, PairTotals,
};

use crate::error::LineError;
use crate::events::{CandidateSet, Event, PredicatePath};
use crate::kb::EntityId;
use crate::time::Timestamp;

/// Global importance per entity; missing entities score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImportanceStore(HashMap<EntityId, f64>);

impl ImportanceStore {
    pub fn insert(&mut self, e: EntityId, score: f64) {
        assert!(score >= 0.0 && score.is_finite(), "importance must be non-negative");
        self.0.insert(e, score);
    }

    pub fn get(&self, e: &EntityId) -> f64 {
        self.0.get(e).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reads `entity<TAB>score` lines; negative or non-numeric scores are rejected.
    pub fn load<R: BufRead>(reader: R) -> (ImportanceStore, Vec<LineError>) {
        let mut store = ImportanceStore::default();
        let mut errors = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    errors.push(LineError { line: line_no, message: e.to_string() });
                    continue;
                }
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed = line
                .split_once('\t')
                .and_then(|(id, score)| Some((id, score.trim().parse::<f64>().ok()?)));
            match parsed {
                Some((id, score)) if !id.is_empty() && score >= 0.0 && score.is_finite() => {
                    store.insert(EntityId::new(id), score)
                }
                _ => errors.push(LineError {
                    line: line_no,
                    message: "expected entity<TAB>non-negative score".into(),
                }),
            }
        }
        (store, errors)
    }
}

/// Non-negative term weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub e2e: f64,
    pub e2e_path: f64,
    pub g2e: f64,
    pub e2d: f64,
    pub e2d_path: f64,
}

impl Weights {
    pub const FULL: Weights = Weights { e2e: 1.0, e2e_path: 1e-2, g2e: 1e-4, e2d: 1.0, e2d_path: 1e-2 };

    pub fn all_non_negative(&self) -> bool {
        [self.e2e, self.e2e_path, self.g2e, self.e2d, self.e2d_path]
            .iter()
            .all(|w| *w >= 0.0 && w.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    pub lambda: f64,
    pub weights: Weights,
    /// Coverage (set) semantics when on, multiset sums when off.
    pub content_diversity: bool,
}

impl Default for RelevanceModel {
    fn default() -> Self {
        RelevanceModel { lambda: 0.75, weights: Weights::FULL, content_diversity: true }
    }
}

impl RelevanceModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(format!("lambda must be in [0, 1], got {}", self.lambda));
        }
        if !self.weights.all_non_negative() {
            return Err("weights must be non-negative".into());
        }
        Ok(())
    }
}

/// Mean co-occurrence score per entity path and per time path, taken over
/// every generated event corpus-wide. Events without a stored score count as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathAverages {
    #[serde(with = "path_entries")]
    pub e2e: BTreeMap<PredicatePath, f64>,
    #[serde(with = "path_entries")]
    pub e2d: BTreeMap<PredicatePath, f64>,
}

/// Paths are sequences, so the maps are written as `[{path, mean}]` lists.
mod path_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::events::PredicatePath;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        path: PredicatePath,
        mean: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<PredicatePath, f64>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map.iter().map(|(path, mean)| Entry { path: path.clone(), mean: *mean }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<PredicatePath, f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (e.path, e.mean)).collect())
    }
}

impl PathAverages {
    pub fn compute<'a, I>(all_candidates: I, cooc: &CooccurrenceStore) -> Self
    where
        I: IntoIterator<Item = &'a CandidateSet>,
    {
        let mut e2e: BTreeMap<PredicatePath, (f64, u64)> = BTreeMap::new();
        let mut e2d: BTreeMap<PredicatePath, (f64, u64)> = BTreeMap::new();
        for cs in all_candidates {
            for e in cs.events() {
                let slot = e2e.entry(e.path_to_re.clone()).or_default();
                slot.0 += cooc.e2e(&e.subject, &e.related_entity);
                slot.1 += 1;
                let slot = e2d.entry(e.path_to_ts.clone()).or_default();
                slot.0 += cooc.e2d(&e.subject, e.timestamp);
                slot.1 += 1;
            }
        }
        let mean = |m: BTreeMap<PredicatePath, (f64, u64)>| {
            m.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
        };
        PathAverages { e2e: mean(e2e), e2d: mean(e2d) }
    }

    pub fn entity_path(&self, p: &PredicatePath) -> f64 {
        self.e2e.get(p).copied().unwrap_or(0.0)
    }

    pub fn time_path(&self, p: &PredicatePath) -> f64 {
        self.e2d.get(p).copied().unwrap_or(0.0)
    }
}

/// Read-only scoring inputs shared by all requests.
#[derive(Debug, Clone, Copy)]
pub struct RelevanceContext<'a> {
    pub cooc: &'a CooccurrenceStore,
    pub importance: &'a ImportanceStore,
    pub averages: &'a PathAverages,
}

fn sum_over<K: Ord, F: Fn(&K) -> f64>(keys: impl Iterator<Item = K>, diverse: bool, score: F) -> f64 {
    if diverse {
        keys.collect::<BTreeSet<K>>().iter().map(score).sum()
    } else {
        keys.map(|k| score(&k)).sum()
    }
}

/// Entity relevance: `w1·E2E + w2·E2EPath + w3·G2E`.
pub fn erel(s: &EntityId, t: &[Event], m: &RelevanceModel, ctx: &RelevanceContext) -> f64 {
    let cd = m.content_diversity;
    let e2e = sum_over(t.iter().map(|e| &e.related_entity), cd, |re| ctx.cooc.e2e(s, re));
    let e2e_path = sum_over(t.iter().map(|e| &e.path_to_re), cd, |p| ctx.averages.entity_path(p));
    let g2e = sum_over(t.iter().map(|e| &e.related_entity), cd, |re| ctx.importance.get(re));
    m.weights.e2e * e2e + m.weights.e2e_path * e2e_path + m.weights.g2e * g2e
}

/// Date relevance: `w1·E2D + w2·E2DPath`.
pub fn drel(s: &EntityId, t: &[Event], m: &RelevanceModel, ctx: &RelevanceContext) -> f64 {
    let cd = m.content_diversity;
    let e2d = sum_over(t.iter().map(|e| e.timestamp), cd, |ts| ctx.cooc.e2d(s, *ts));
    let e2d_path = sum_over(t.iter().map(|e| &e.path_to_ts), cd, |p| ctx.averages.time_path(p));
    m.weights.e2d * e2d + m.weights.e2d_path * e2d_path
}

pub fn rel(s: &EntityId, t: &[Event], m: &RelevanceModel, ctx: &RelevanceContext) -> f64 {
    m.lambda * erel(s, t, m, ctx) + (1.0 - m.lambda) * drel(s, t, m, ctx)
}

/// `rel(T ∪ {e}) − rel(T)`, computed from which keys `T` already covers.
pub fn marginal_gain(s: &EntityId, t: &[Event], e: &Event, m: &RelevanceModel, ctx: &RelevanceContext) -> f64 {
    let terms = CoverageTerms::of(s, e, m, ctx);
    if !m.content_diversity {
        return terms.total();
    }
    let covered = [
        t.iter().any(|x| x.related_entity == e.related_entity),
        t.iter().any(|x| x.path_to_re == e.path_to_re),
        t.iter().any(|x| x.timestamp == e.timestamp),
        t.iter().any(|x| x.path_to_ts == e.path_to_ts),
    ];
    terms.uncovered_sum(covered)
}

/// Weighted values of an event's four coverage keys, in the order
/// related entity, entity path, timestamp, time path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageTerms([f64; 4]);

impl CoverageTerms {
    pub fn of(s: &EntityId, e: &Event, m: &RelevanceModel, ctx: &RelevanceContext) -> Self {
        let w = &m.weights;
        let lam = m.lambda;
        CoverageTerms([
            lam * (w.e2e * ctx.cooc.e2e(s, &e.related_entity) + w.g2e * ctx.importance.get(&e.related_entity)),
            lam * w.e2e_path * ctx.averages.entity_path(&e.path_to_re),
            (1.0 - lam) * w.e2d * ctx.cooc.e2d(s, e.timestamp),
            (1.0 - lam) * w.e2d_path * ctx.averages.time_path(&e.path_to_ts),
        ])
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    /// Sum in fixed order. Zeroing terms can only lower a sum evaluated this
    /// way, so gains computed here never increase as coverage grows.
    pub fn uncovered_sum(&self, covered: [bool; 4]) -> f64 {
        let mut acc = 0.0;
        for (v, c) in self.0.iter().zip(covered) {
            acc += if c { 0.0 } else { *v };
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.uncovered_sum([false; 4])
    }
}

/// The objective restricted to a fixed candidate list, with coverage keys
/// interned so gains cost four lookups.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    keys: Vec<[usize; 4]>,
    terms: Vec<CoverageTerms>,
    related: Vec<usize>,
    n_keys: usize,
    content_diversity: bool,
}

/// Keys covered by the current selection.
#[derive(Debug, Clone)]
pub struct CoverageState {
    covered: Vec<bool>,
}

impl CoverageObjective {
    pub fn new(s: &EntityId, events: &[Event], m: &RelevanceModel, ctx: &RelevanceContext) -> Self {
        #[derive(PartialEq, Eq, Hash)]
        enum Key<'a> {
            Entity(&'a EntityId),
            EntityPath(&'a PredicatePath),
            Date(Timestamp),
            TimePath(&'a PredicatePath),
        }
        let mut ids: HashMap<Key, usize> = HashMap::new();
        let mut intern = |k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        };
        let keys: Vec<[usize; 4]> = events
            .iter()
            .map(|e| {
                [
                    intern(Key::Entity(&e.related_entity)),
                    intern(Key::EntityPath(&e.path_to_re)),
                    intern(Key::Date(e.timestamp)),
                    intern(Key::TimePath(&e.path_to_ts)),
                ]
            })
            .collect();
        let related = keys.iter().map(|k| k[0]).collect();
        let n_keys = ids.len();
        CoverageObjective {
            keys,
            terms: events.iter().map(|e| CoverageTerms::of(s, e, m, ctx)).collect(),
            related,
            n_keys,
            content_diversity: m.content_diversity,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn empty_state(&self) -> CoverageState {
        CoverageState { covered: vec![false; self.n_keys] }
    }

    /// Number of distinct coverage keys; key ids are below this.
    pub fn key_count(&self) -> usize {
        self.n_keys
    }

    /// Interned id of the related entity of candidate `i`.
    pub fn related_key(&self, i: usize) -> usize {
        self.related[i]
    }

    pub fn singleton(&self, i: usize) -> f64 {
        self.terms[i].total()
    }

    pub fn gain(&self, i: usize, state: &CoverageState) -> f64 {
        if !self.content_diversity {
            return self.terms[i].total();
        }
        let k = &self.keys[i];
        self.terms[i].uncovered_sum([
            state.covered[k[0]],
            state.covered[k[1]],
            state.covered[k[2]],
            state.covered[k[3]],
        ])
    }

    pub fn add(&self, i: usize, state: &mut CoverageState) {
        for k in self.keys[i] {
            state.covered[k] = true;
        }
    }

    /// Objective value of a set of candidate indices.
    pub fn value(&self, selected: &[usize]) -> f64 {
        if !self.content_diversity {
            return selected.iter().map(|&i| self.terms[i].total()).sum();
        }
        let mut state = self.empty_state();
        let mut total = 0.0;
        for &i in selected {
            total += self.gain(i, &state);
            self.add(i, &mut state);
        }
        total
    }
}
