//! Offline stages: load, collapse, generate, filter, score, persist.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use chronoline::engine::Engine;
use chronoline::events::{generate_all_events, CandidateSet, CompoundIndex, Names, Templates};
use chronoline::filter::{
    apply_filters, compute_path_stats, coverage_csv, coverage_report, drop_pre_existence_events, existence_filter,
    frequency_filter, FilterReportEntry, DEFAULT_COVERAGE_THRESHOLDS,
};
use chronoline::kb::{load_triples, KnowledgeGraph, Object};
use chronoline::relevance::{build_cooc_store, read_documents, CooccurrenceStore, ImportanceStore, PathAverages};
use chronoline::selector::SelectOptions;
use chronoline::store::{read_json, write_json, CandidateStore, DEFAULT_VERTICAL};
use chronoline::LineError;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

pub const PATH_AVERAGES_FILE: &str = "path_averages.json";
pub const FILTER_REPORT_FILE: &str = "filter_report.json";
pub const COVERAGE_FILE: &str = "coverage.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Check,
    Load,
    Cooc,
    Persist,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Check => "check",
            Stage::Load => "load",
            Stage::Cooc => "cooc",
            Stage::Persist => "persist",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: anyhow::Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:#}", self.stage, self.source)
    }
}

impl std::error::Error for PipelineError {}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError { stage, source: e.into() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub triples_skipped: usize,
    pub cvt_nodes: usize,
    pub subjects: usize,
    pub dropped_paths: Vec<String>,
    pub stored_subjects: usize,
    pub stored_events: usize,
    pub rich_subjects: usize,
}

fn warn_lines(what: &Path, errors: &[LineError]) {
    for e in errors {
        log::warn!("{}: {e}", what.display());
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

pub fn load_graph(cfg: &PipelineConfig) -> anyhow::Result<(KnowledgeGraph, usize)> {
    let (g, errors) = load_triples(open(&cfg.triples)?, &cfg.cvt_predicates, &cfg.existence);
    warn_lines(&cfg.triples, &errors);
    Ok((g, errors.len()))
}

fn vertical_of(g: &KnowledgeGraph, cfg: &PipelineConfig, s: &chronoline::EntityId) -> String {
    let Some(p) = &cfg.vertical_predicate else { return DEFAULT_VERTICAL.to_string() };
    g.neighbors(s)
        .iter()
        .find_map(|(q, o)| match o {
            Object::Entity(v) if q == p => Some(v.to_string()),
            _ => None,
        })
        .unwrap_or_else(|| DEFAULT_VERTICAL.to_string())
}

pub fn load_cooc(path: &Path) -> anyhow::Result<CooccurrenceStore> {
    CooccurrenceStore::read_jsonl(open(path)?).with_context(|| format!("reading {}", path.display()))
}

/// Builds the co-occurrence store from the configured documents and writes it.
pub fn build_cooc(cfg: &PipelineConfig) -> anyhow::Result<CooccurrenceStore> {
    let docs_path = cfg.documents.as_ref().ok_or_else(|| anyhow!("no `documents` configured"))?;
    let (docs, errors) = read_documents(open(docs_path)?);
    warn_lines(docs_path, &errors);
    let store = build_cooc_store(docs, cfg.relevance.cooc);
    if let Some(parent) = cfg.cooc.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(&cfg.cooc).with_context(|| format!("creating {}", cfg.cooc.display()))?;
    let mut out = BufWriter::new(file);
    store.write_jsonl(&mut out)?;
    out.flush()?;
    Ok(store)
}

/// Candidate sets for every subject after both filters.
pub fn generate_filtered(
    g: &KnowledgeGraph,
    cfg: &PipelineConfig,
) -> (Vec<CandidateSet>, Vec<FilterReportEntry>, BTreeSet<String>) {
    let index = CompoundIndex::build(g);
    let all: Vec<CandidateSet> = g
        .subjects()
        .filter(|s| !g.is_cvt(s))
        .map(|s| generate_all_events(g, &index, s))
        .filter(|cs| !cs.is_empty())
        .collect();
    log::info!("generated {} events for {} subjects", all.iter().map(CandidateSet::len).sum::<usize>(), all.len());

    let stats = compute_path_stats(&all, cfg.filter.theta1);
    let freq = frequency_filter(&stats, &cfg.filter);
    let exist = existence_filter(&all, |s| g.existence(s), &cfg.filter);
    let mut dropped = freq.dropped.clone();
    dropped.extend(exist.dropped.iter().cloned());
    let mut report = freq.report;
    report.extend(exist.report);
    let filtered = all
        .iter()
        .map(|cs| {
            let kept = apply_filters(cs, &dropped);
            if cfg.filter.drop_pre_existence_instances {
                drop_pre_existence_events(&kept, g.existence(&cs.subject))
            } else {
                kept
            }
        })
        .collect();
    (filtered, report, dropped.iter().map(|p| p.dotted()).collect())
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary, PipelineError> {
    for path in cfg.pipeline_inputs() {
        if !path.is_file() {
            return Err(anyhow!("missing input file {}", path.display())).stage(Stage::Check);
        }
    }
    let (g, skipped) = load_graph(cfg).stage(Stage::Load)?;
    let cvt_nodes = g.cvt_nodes().len();
    let g = g.collapse_cvt_nodes();
    let subjects = g.subjects().filter(|s| !g.is_cvt(s)).count();
    let (filtered, report, dropped) = generate_filtered(&g, cfg);

    let cooc = if cfg.cooc.is_file() {
        load_cooc(&cfg.cooc).stage(Stage::Cooc)?
    } else if cfg.documents.is_some() {
        build_cooc(cfg).stage(Stage::Cooc)?
    } else {
        log::warn!("no co-occurrence store at {}; scores fall back to importance only", cfg.cooc.display());
        CooccurrenceStore::default()
    };
    let averages = PathAverages::compute(&filtered, &cooc);

    let mut store = CandidateStore::new(cfg.min_events);
    for cs in filtered.iter().cloned() {
        let vertical = vertical_of(&g, cfg, &cs.subject);
        store.insert(&vertical, g.existence(&cs.subject), cs);
    }
    let dir = &cfg.store;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).stage(Stage::Persist)?;
    store.write(dir).stage(Stage::Persist)?;
    write_json(&dir.join(PATH_AVERAGES_FILE), &averages).stage(Stage::Persist)?;
    write_json(&dir.join(FILTER_REPORT_FILE), &report).stage(Stage::Persist)?;
    let rows = coverage_report(&filtered, DEFAULT_COVERAGE_THRESHOLDS);
    let coverage_path = dir.join(COVERAGE_FILE);
    fs::write(&coverage_path, coverage_csv(&rows))
        .with_context(|| format!("writing {}", coverage_path.display()))
        .stage(Stage::Persist)?;

    Ok(PipelineSummary {
        triples_skipped: skipped,
        cvt_nodes,
        subjects,
        dropped_paths: dropped.into_iter().collect(),
        stored_subjects: store.len(),
        stored_events: store.sets().map(CandidateSet::len).sum(),
        rich_subjects: store.rich_subjects().count(),
    })
}

fn read_tsv<T>(path: &Path, load: impl FnOnce(BufReader<File>) -> (T, Vec<LineError>)) -> anyhow::Result<T> {
    let (value, errors) = load(open(path)?);
    warn_lines(path, &errors);
    Ok(value)
}

/// Everything the online commands need, read from the pipeline outputs.
pub fn load_engine(cfg: &PipelineConfig) -> anyhow::Result<Engine> {
    let store = CandidateStore::read(&cfg.store).context("reading candidate store; run `pipeline` first")?;
    let averages_path: PathBuf = cfg.store.join(PATH_AVERAGES_FILE);
    let averages: PathAverages = read_json(&averages_path)?;
    let cooc = if cfg.cooc.is_file() { load_cooc(&cfg.cooc)? } else { CooccurrenceStore::default() };
    let importance = read_tsv(&cfg.importance, ImportanceStore::load)?;
    let templates = read_tsv(&cfg.templates, Templates::load)?;
    let names = match &cfg.names {
        Some(p) => read_tsv(p, Names::load)?,
        None => Names::default(),
    };
    Ok(Engine {
        store,
        cooc,
        importance,
        averages,
        templates,
        names,
        layout: cfg.layout,
        options: SelectOptions { prune_zero_gain: cfg.relevance.prune_zero_gain, ..Default::default() },
        lambda: Some(cfg.relevance.lambda),
    })
}

/// Coverage of a persisted store, per vertical and overall.
pub fn store_coverage(store: &CandidateStore) -> BTreeMap<String, Vec<chronoline::filter::CoverageRow>> {
    let mut by_vertical: BTreeMap<String, Vec<&CandidateSet>> = BTreeMap::new();
    for (id, entry) in store.entries() {
        if let Some(cs) = store.get(id) {
            by_vertical.entry(entry.vertical.clone()).or_default().push(cs);
            by_vertical.entry("all".into()).or_default().push(cs);
        }
    }
    by_vertical
        .into_iter()
        .map(|(v, sets)| (v, coverage_report(sets, DEFAULT_COVERAGE_THRESHOLDS)))
        .collect()
}
