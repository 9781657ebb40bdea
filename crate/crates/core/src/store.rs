//! Persisted candidate events: one JSON-lines file per vertical plus an
//! index of subjects.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::StoreError;
use crate::events::{CandidateSet, Event};
use crate::kb::{EntityId, Existence};

pub const INDEX_FILE: &str = "index.json";
pub const CANDIDATE_DIR: &str = "candidates";
pub const DEFAULT_VERTICAL: &str = "other";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub vertical: String,
    pub events: usize,
    pub simple_events: usize,
    pub existence: Option<Existence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Index {
    min_events: usize,
    subjects: BTreeMap<EntityId, SubjectEntry>,
}

/// Filtered candidate sets keyed by subject.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateStore {
    min_events: usize,
    entries: BTreeMap<EntityId, SubjectEntry>,
    sets: BTreeMap<EntityId, CandidateSet>,
}

/// Vertical names end up in file names.
fn file_stem(vertical: &str) -> String {
    let stem: String = vertical
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if stem.is_empty() {
        DEFAULT_VERTICAL.to_string()
    } else {
        stem
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

impl CandidateStore {
    pub fn new(min_events: usize) -> Self {
        CandidateStore { min_events, ..Default::default() }
    }

    /// Adds or replaces a subject. Empty sets are skipped.
    pub fn insert(&mut self, vertical: &str, existence: Option<Existence>, set: CandidateSet) {
        if set.is_empty() {
            return;
        }
        let entry = SubjectEntry {
            vertical: vertical.to_string(),
            events: set.len(),
            simple_events: set.simple_count(),
            existence,
        };
        self.entries.insert(set.subject.clone(), entry);
        self.sets.insert(set.subject.clone(), set);
    }

    pub fn min_events(&self) -> usize {
        self.min_events
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, s: &EntityId) -> Option<&CandidateSet> {
        self.sets.get(s)
    }

    pub fn entry(&self, s: &EntityId) -> Option<&SubjectEntry> {
        self.entries.get(s)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&EntityId, &SubjectEntry)> {
        self.entries.iter()
    }

    pub fn sets(&self) -> impl Iterator<Item = &CandidateSet> {
        self.sets.values()
    }

    /// Subjects with at least the minimum number of events.
    pub fn rich_subjects(&self) -> impl Iterator<Item = &EntityId> {
        self.entries.iter().filter(|(_, e)| e.events >= self.min_events).map(|(id, _)| id)
    }

    pub fn write(&self, dir: &Path) -> Result<(), StoreError> {
        let cand_dir = dir.join(CANDIDATE_DIR);
        fs::create_dir_all(&cand_dir).map_err(io_err(&cand_dir))?;
        // files of verticals that no longer exist would be stale
        for entry in fs::read_dir(&cand_dir).map_err(io_err(&cand_dir))? {
            let path = entry.map_err(io_err(&cand_dir))?.path();
            if path.extension().is_some_and(|x| x == "jsonl") {
                fs::remove_file(&path).map_err(io_err(&path))?;
            }
        }
        let mut by_vertical: BTreeMap<String, Vec<&CandidateSet>> = BTreeMap::new();
        for (id, entry) in &self.entries {
            by_vertical.entry(file_stem(&entry.vertical)).or_default().push(&self.sets[id]);
        }
        for (stem, sets) in by_vertical {
            let path = cand_dir.join(format!("{stem}.jsonl"));
            let file = File::create(&path).map_err(io_err(&path))?;
            let mut out = BufWriter::new(file);
            for set in sets {
                let line = serde_json::to_string(set).map_err(|e| StoreError::Format {
                    path: path.clone(),
                    line: 0,
                    message: e.to_string(),
                })?;
                writeln!(out, "{line}").map_err(io_err(&path))?;
            }
            out.flush().map_err(io_err(&path))?;
        }
        let index = Index { min_events: self.min_events, subjects: self.entries.clone() };
        write_json(&dir.join(INDEX_FILE), &index)
    }

    pub fn read(dir: &Path) -> Result<Self, StoreError> {
        let index_path = dir.join(INDEX_FILE);
        let index: Index = read_json(&index_path)?;
        let mut stems: Vec<String> = index.subjects.values().map(|e| file_stem(&e.vertical)).collect();
        stems.sort();
        stems.dedup();
        let mut sets = BTreeMap::new();
        for stem in stems {
            let path = dir.join(CANDIDATE_DIR).join(format!("{stem}.jsonl"));
            let reader = BufReader::new(File::open(&path).map_err(io_err(&path))?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line.map_err(io_err(&path))?;
                if line.trim().is_empty() {
                    continue;
                }
                let format = |message: String| StoreError::Format { path: path.clone(), line: idx + 1, message };
                let raw: CandidateSet = serde_json::from_str(&line).map_err(|e| format(e.to_string()))?;
                if !index.subjects.contains_key(&raw.subject) {
                    return Err(format(format!("subject `{}` missing from index", raw.subject)));
                }
                let subject = raw.subject.clone();
                let events: Vec<Event> = raw.into_events();
                sets.insert(subject.clone(), CandidateSet::new(subject, events));
            }
        }
        if let Some(missing) = index.subjects.keys().find(|s| !sets.contains_key(*s)) {
            return Err(StoreError::Format {
                path: index_path,
                line: 0,
                message: format!("no candidates stored for `{missing}`"),
            });
        }
        Ok(CandidateStore { min_events: index.min_events, entries: index.subjects, sets })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| StoreError::Format {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Format {
        path: PathBuf::from(path),
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{EventKind, PredicatePath};
    use crate::time::Timestamp;

    fn set(subject: &str, n: i64) -> CandidateSet {
        let events = (0..n)
            .map(|d| Event {
                subject: subject.into(),
                related_entity: format!("x{d}").as_str().into(),
                timestamp: Timestamp::from_days(d),
                path_to_re: PredicatePath::of(&["p"]),
                path_to_ts: PredicatePath::of(&["p", "d"]),
                kind: EventKind::Simple2Hop,
            })
            .collect();
        CandidateSet::new(subject.into(), events)
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CandidateStore::new(3);
        store.insert("film/actor", None, set("a", 4));
        store.insert("music", Some(Existence { start: Timestamp::from_days(0), end: None }), set("b", 2));
        store.insert("music", None, set("c", 0));
        store.write(dir.path()).unwrap();
        assert!(dir.path().join("candidates/film_actor.jsonl").exists());
        let back = CandidateStore::read(dir.path()).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.len(), 2);
        assert_eq!(back.rich_subjects().map(|s| s.as_str()).collect::<Vec<_>>(), vec!["a"]);
    }

    #[test]
    fn missing_index_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = CandidateStore::read(dir.path()).unwrap_err();
        assert!(err.to_string().contains("index.json"));
    }
}
