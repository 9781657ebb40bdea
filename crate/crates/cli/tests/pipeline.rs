mod support;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chronoline::engine::{EngineError, TimelineRequest};
use chronoline::selector::ModelVariant;
use chronoline::store::CandidateStore;
use chronoline_cli::pipeline::store_coverage;
use serde::Deserialize;
use support::{golden_path, prepared, GOLDEN_ENTITIES};

fn chronoline(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronoline"))
        .arg("--config")
        .arg(config)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

#[derive(Debug, PartialEq, Deserialize)]
struct Counts {
    events: usize,
    simple_events: usize,
}

#[test]
fn counts_match_golden() {
    let p = prepared();
    let golden: BTreeMap<String, Counts> =
        serde_json::from_str(&fs::read_to_string(golden_path("counts.json")).unwrap()).unwrap();
    let actual: BTreeMap<String, Counts> = p
        .engine
        .store
        .entries()
        .map(|(id, e)| (id.to_string(), Counts { events: e.events, simple_events: e.simple_events }))
        .collect();
    assert_eq!(actual, golden);
    assert_eq!(p.summary.stored_subjects, golden.len());
}

#[test]
fn synthetic_noise_paths_are_dropped() {
    let dropped = &prepared().summary.dropped_paths;
    assert!(dropped.contains(&"nationality.date_founded".to_string()), "{dropped:?}");
    assert!(dropped.contains(&"parent.date_of_birth".to_string()), "{dropped:?}");
    assert!(!dropped.contains(&"date_of_birth".to_string()));
}

#[test]
fn store_round_trips_from_disk() {
    let p = prepared();
    let back = CandidateStore::read(&p.config.store).unwrap();
    assert_eq!(back, p.engine.store);
}

#[test]
fn coverage_is_monotone_and_compound_dominates() {
    let coverage = store_coverage(&prepared().engine.store);
    assert!(coverage.contains_key("all"));
    for (vertical, rows) in coverage {
        for w in rows.windows(2) {
            assert!(w[0].x < w[1].x);
            assert!(w[1].count_all <= w[0].count_all, "{vertical}");
            assert!(w[1].count_simple <= w[0].count_simple, "{vertical}");
        }
        assert!(rows.iter().all(|r| r.count_all >= r.count_simple), "{vertical}");
    }
}

#[test]
fn timeline_command_matches_golden() {
    let p = prepared();
    for entity in GOLDEN_ENTITIES {
        let out = chronoline(&p.config_path, &["timeline", "--entity", entity]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let golden = fs::read_to_string(golden_path(&format!("timeline_{entity}.json"))).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), golden, "{entity}");
    }
}

#[test]
fn golden_timelines_respect_layout() {
    let p = prepared();
    for entity in GOLDEN_ENTITIES {
        let t = p.engine.timeline(&TimelineRequest::new(entity)).unwrap();
        let c = chronoline::LayoutConstraint::new(t.t_w, t.n);
        assert!(c.is_independent(&t.timestamps()));
        assert!(t.events.iter().all(|e| t.span.contains(e.event.timestamp)));
        let related: std::collections::BTreeSet<_> = t.events.iter().map(|e| &e.event.related_entity).collect();
        assert_eq!(related.len(), t.events.len(), "Full never repeats a related entity");
    }
}

#[test]
fn unknown_entity_is_an_error() {
    let p = prepared();
    assert!(matches!(p.engine.timeline(&TimelineRequest::new("nobody")), Err(EngineError::NotFound(_))));
    let out = chronoline(&p.config_path, &["timeline", "--entity", "nobody"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nobody"));
}

#[test]
fn base_and_full_differ() {
    let p = prepared();
    let mut differing = 0;
    for entity in support::FIXTURE_ENTITIES {
        let req = TimelineRequest::new(entity);
        let entry = p.engine.ablate(&req, ModelVariant::Base).unwrap();
        if entry.diff.only_control + entry.diff.only_experiment > 0 {
            differing += 1;
        }
    }
    assert!(differing > 0);
}

#[test]
fn identical_variants_have_zero_diff() {
    let p = prepared();
    let out = chronoline(&p.config_path, &["ablate", "--entity", "p.001,p.070", "--variant", "Full", "--against", "Full"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["diff"]["only_control"], 0);
        assert_eq!(e["diff"]["only_experiment"], 0);
        assert_eq!(e["control"], e["experiment"]);
    }
}

#[test]
fn coverage_command_prints_csv() {
    let p = prepared();
    let out = chronoline(&p.config_path, &["coverage"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("vertical,X,count_simple,count_all"));
    assert!(lines.any(|l| l.starts_with("all,1,")));
}

fn write_minimal(dir: &Path, templates: bool) -> std::path::PathBuf {
    fs::write(dir.join("kb.tsv"), "").unwrap();
    fs::write(dir.join("importance.tsv"), "").unwrap();
    if templates {
        fs::write(dir.join("templates.tsv"), "").unwrap();
    }
    let config = dir.join("config.toml");
    fs::write(
        &config,
        "triples = \"kb.tsv\"\ntemplates = \"templates.tsv\"\nimportance = \"importance.tsv\"\ncooc = \"cooc.jsonl\"\nstore = \"store\"\n",
    )
    .unwrap();
    config
}

#[test]
fn empty_kb_gives_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_minimal(dir.path(), true);
    let out = chronoline(&config, &["pipeline"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["stored_subjects"], 0);
    let store = CandidateStore::read(&dir.path().join("store")).unwrap();
    assert!(store.is_empty());
}

#[test]
fn missing_templates_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_minimal(dir.path(), false);
    let out = chronoline(&config, &["pipeline"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("templates.tsv"), "{stderr}");
    assert!(stderr.contains("[check]"), "{stderr}");
}

#[test]
fn invalid_variant_is_rejected() {
    let p = prepared();
    let out = chronoline(&p.config_path, &["timeline", "--entity", "p.001", "--variant", "Full-XY"]);
    assert!(!out.status.success());
}
