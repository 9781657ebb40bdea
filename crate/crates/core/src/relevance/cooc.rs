//! Windowed co-occurrence counting and NPMI scores.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LineError, NpmiError};
use crate::kb::EntityId;
use crate::time::Timestamp;

/// Normalized pointwise mutual information, `PMI(a;b) / -log p(a,b)`.
pub fn npmi(p_joint: f64, p_a: f64, p_b: f64) -> Result<f64, NpmiError> {
    if p_joint == 1.0 {
        return Err(NpmiError::DegenerateJoint);
    }
    let valid = p_joint > 0.0
        && p_joint <= p_a.min(p_b)
        && p_a > 0.0
        && p_a < 1.0
        && p_b > 0.0
        && p_b < 1.0;
    if !valid {
        return Err(NpmiError::InvalidProbabilities { joint: p_joint, a: p_a, b: p_b });
    }
    let log_joint = p_joint.ln();
    let pmi = log_joint - (p_a.ln() + p_b.ln());
    Ok((pmi / -log_joint).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Entity,
    Date,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub pos: u64,
    pub kind: MentionKind,
    pub id: String,
}

/// A document with pre-resolved entity and date mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub domain: String,
    pub mentions: Vec<Mention>,
}

/// Reads one JSON document per line.
pub fn read_documents<R: BufRead>(reader: R) -> (Vec<AnnotatedDocument>, Vec<LineError>) {
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                errors.push(LineError { line: idx + 1, message: e.to_string() });
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(doc) => docs.push(doc),
            Err(e) => errors.push(LineError { line: idx + 1, message: e.to_string() }),
        }
    }
    (docs, errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoocParams {
    /// Maximum distance in characters between two co-occurring mentions.
    pub window: u64,
    /// Minimum number of distinct source domains for a retained pair.
    pub min_domains: usize,
}

impl Default for CoocParams {
    fn default() -> Self {
        CoocParams { window: 100, min_domains: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub count: u64,
    pub domains: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTotals {
    pub ee: u64,
    pub ed: u64,
}

/// Entity-entity and entity-date co-occurrence statistics.
///
/// Only pairs seen in enough domains and with positive NPMI are kept;
/// marginal counts cover every counted pair so that probabilities stay
/// correct after a reload.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CooccurrenceStore {
    params: CoocParams,
    totals: PairTotals,
    marginal_ee: BTreeMap<EntityId, u64>,
    marginal_ed_entity: BTreeMap<EntityId, u64>,
    marginal_ed_date: BTreeMap<Timestamp, u64>,
    ee: BTreeMap<(EntityId, EntityId), (PairCount, f64)>,
    ed: BTreeMap<(EntityId, Timestamp), (PairCount, f64)>,
}

fn ordered(a: EntityId, b: EntityId) -> (EntityId, EntityId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Default)]
struct RawCounts {
    ee: HashMap<(EntityId, EntityId), (u64, BTreeSet<usize>)>,
    ed: HashMap<(EntityId, Timestamp), (u64, BTreeSet<usize>)>,
}

enum Item {
    Entity(EntityId),
    Date(Timestamp),
}

/// Counts every entity-entity and entity-date mention pair whose positions
/// differ by at most `params.window` characters, once per pair of mentions.
pub fn build_cooc_store<I>(documents: I, params: CoocParams) -> CooccurrenceStore
where
    I: IntoIterator<Item = AnnotatedDocument>,
{
    let mut raw = RawCounts::default();
    let mut domains: HashMap<String, usize> = HashMap::new();
    for doc in documents {
        let next_id = domains.len();
        let domain = *domains.entry(doc.domain).or_insert(next_id);
        let mut items: Vec<(u64, Item)> = doc
            .mentions
            .into_iter()
            .filter_map(|m| match m.kind {
                MentionKind::Entity if !m.id.is_empty() => Some((m.pos, Item::Entity(EntityId::new(&m.id)))),
                MentionKind::Date => Timestamp::parse(&m.id).ok().map(|t| (m.pos, Item::Date(t))),
                _ => None,
            })
            .collect();
        items.sort_by_key(|(pos, _)| *pos);
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[j].0 - items[i].0 > params.window {
                    break;
                }
                match (&items[i].1, &items[j].1) {
                    (Item::Entity(a), Item::Entity(b)) if a != b => {
                        let slot = raw.ee.entry(ordered(a.clone(), b.clone())).or_default();
                        slot.0 += 1;
                        slot.1.insert(domain);
                    }
                    (Item::Entity(a), Item::Date(t)) | (Item::Date(t), Item::Entity(a)) => {
                        let slot = raw.ed.entry((a.clone(), *t)).or_default();
                        slot.0 += 1;
                        slot.1.insert(domain);
                    }
                    _ => {}
                }
            }
        }
    }
    CooccurrenceStore::from_counts(
        params,
        raw.ee.into_iter().map(|(k, (c, d))| (k, PairCount { count: c, domains: d.len() })),
        raw.ed.into_iter().map(|(k, (c, d))| (k, PairCount { count: c, domains: d.len() })),
    )
}

impl CooccurrenceStore {
    /// Builds a store from complete pair counts, computing marginals and
    /// keeping the pairs that pass the domain and positivity thresholds.
    pub fn from_counts<EE, ED>(params: CoocParams, ee: EE, ed: ED) -> Self
    where
        EE: IntoIterator<Item = ((EntityId, EntityId), PairCount)>,
        ED: IntoIterator<Item = ((EntityId, Timestamp), PairCount)>,
    {
        let mut store = CooccurrenceStore { params, ..Default::default() };
        let ee: Vec<_> = ee.into_iter().map(|((a, b), c)| (ordered(a, b), c)).collect();
        let ed: Vec<_> = ed.into_iter().collect();
        for ((a, b), c) in &ee {
            store.totals.ee += c.count;
            *store.marginal_ee.entry(a.clone()).or_default() += c.count;
            *store.marginal_ee.entry(b.clone()).or_default() += c.count;
        }
        for ((a, t), c) in &ed {
            store.totals.ed += c.count;
            *store.marginal_ed_entity.entry(a.clone()).or_default() += c.count;
            *store.marginal_ed_date.entry(*t).or_default() += c.count;
        }
        for (key, c) in ee {
            if c.domains < params.min_domains {
                continue;
            }
            if let Some(score) = store.score_ee(&key.0, &key.1, c.count) {
                store.ee.insert(key, (c, score));
            }
        }
        for (key, c) in ed {
            if c.domains < params.min_domains {
                continue;
            }
            if let Some(score) = store.score_ed(&key.0, key.1, c.count) {
                store.ed.insert(key, (c, score));
            }
        }
        store
    }

    fn positive(score: Result<f64, NpmiError>) -> Option<f64> {
        score.ok().filter(|s| *s > 0.0)
    }

    fn score_ee(&self, a: &EntityId, b: &EntityId, count: u64) -> Option<f64> {
        let total = self.totals.ee as f64;
        let pa = *self.marginal_ee.get(a)? as f64 / total;
        let pb = *self.marginal_ee.get(b)? as f64 / total;
        Self::positive(npmi(count as f64 / total, pa, pb))
    }

    fn score_ed(&self, a: &EntityId, t: Timestamp, count: u64) -> Option<f64> {
        let total = self.totals.ed as f64;
        let pa = *self.marginal_ed_entity.get(a)? as f64 / total;
        let pt = *self.marginal_ed_date.get(&t)? as f64 / total;
        Self::positive(npmi(count as f64 / total, pa, pt))
    }

    pub fn params(&self) -> CoocParams {
        self.params
    }

    pub fn totals(&self) -> PairTotals {
        self.totals
    }

    /// NPMI of two entities; 0 for pairs not in the store.
    pub fn e2e(&self, a: &EntityId, b: &EntityId) -> f64 {
        self.ee
            .get(&ordered(a.clone(), b.clone()))
            .map_or(0.0, |(_, s)| *s)
    }

    /// NPMI of an entity and a date; 0 for pairs not in the store.
    pub fn e2d(&self, a: &EntityId, t: Timestamp) -> f64 {
        self.ed.get(&(a.clone(), t)).map_or(0.0, |(_, s)| *s)
    }

    pub fn p_entity_ee(&self, a: &EntityId) -> f64 {
        self.marginal_ee.get(a).map_or(0.0, |&c| c as f64 / self.totals.ee as f64)
    }

    pub fn p_ee(&self, a: &EntityId, b: &EntityId) -> f64 {
        self.ee
            .get(&ordered(a.clone(), b.clone()))
            .map_or(0.0, |(c, _)| c.count as f64 / self.totals.ee as f64)
    }

    pub fn ee_pairs(&self) -> impl Iterator<Item = (&(EntityId, EntityId), &PairCount, f64)> {
        self.ee.iter().map(|(k, (c, s))| (k, c, *s))
    }

    pub fn ed_pairs(&self) -> impl Iterator<Item = (&(EntityId, Timestamp), &PairCount, f64)> {
        self.ed.iter().map(|(k, (c, s))| (k, c, *s))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = StoreRecord::Header { totals: self.totals, params: self.params };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        for (a, count) in &self.marginal_ee {
            let r = StoreRecord::MarginalEe { a: a.clone(), count: *count };
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        for (a, count) in &self.marginal_ed_entity {
            let r = StoreRecord::MarginalEdEntity { a: a.clone(), count: *count };
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        for (t, count) in &self.marginal_ed_date {
            let r = StoreRecord::MarginalEdDate { a: *t, count: *count };
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        for ((a, b), (c, _)) in &self.ee {
            let r = StoreRecord::Ee { a: a.clone(), b: b.clone(), count: c.count, domains: c.domains };
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        for ((a, t), (c, _)) in &self.ed {
            let r = StoreRecord::Ed { a: a.clone(), b: *t, count: c.count, domains: c.domains };
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, LineError> {
        let mut store = CooccurrenceStore::default();
        let mut pairs_ee = Vec::new();
        let mut pairs_ed = Vec::new();
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let err = |message: String| LineError { line: idx + 1, message };
            let line = line.map_err(|e| err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: StoreRecord = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
            match record {
                StoreRecord::Header { totals, params } => {
                    store.totals = totals;
                    store.params = params;
                    saw_header = true;
                }
                StoreRecord::MarginalEe { a, count } => {
                    store.marginal_ee.insert(a, count);
                }
                StoreRecord::MarginalEdEntity { a, count } => {
                    store.marginal_ed_entity.insert(a, count);
                }
                StoreRecord::MarginalEdDate { a, count } => {
                    store.marginal_ed_date.insert(a, count);
                }
                StoreRecord::Ee { a, b, count, domains } => {
                    pairs_ee.push((idx + 1, ordered(a, b), PairCount { count, domains }))
                }
                StoreRecord::Ed { a, b, count, domains } => {
                    pairs_ed.push((idx + 1, (a, b), PairCount { count, domains }))
                }
            }
        }
        if !saw_header && (!pairs_ee.is_empty() || !pairs_ed.is_empty()) {
            return Err(LineError { line: 1, message: "missing totals header".into() });
        }
        for (line, key, c) in pairs_ee {
            let score = store
                .score_ee(&key.0, &key.1, c.count)
                .ok_or_else(|| LineError { line, message: "pair has no positive NPMI".into() })?;
            store.ee.insert(key, (c, score));
        }
        for (line, key, c) in pairs_ed {
            let score = store
                .score_ed(&key.0, key.1, c.count)
                .ok_or_else(|| LineError { line, message: "pair has no positive NPMI".into() })?;
            store.ed.insert(key, (c, score));
        }
        Ok(store)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StoreRecord {
    Header { totals: PairTotals, params: CoocParams },
    #[serde(rename = "marginal_ee")]
    MarginalEe { a: EntityId, count: u64 },
    #[serde(rename = "marginal_ed_entity")]
    MarginalEdEntity { a: EntityId, count: u64 },
    #[serde(rename = "marginal_ed_date")]
    MarginalEdDate { a: Timestamp, count: u64 },
    Ee { a: EntityId, b: EntityId, count: u64, domains: usize },
    Ed { a: EntityId, b: Timestamp, count: u64, domains: usize },
}
