#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chronoline::engine::Engine;
use chronoline_cli::{load_engine, run_pipeline, PipelineConfig, PipelineSummary};
use tempfile::TempDir;

/// Ten rich subjects across the film, sports and business verticals.
pub const FIXTURE_ENTITIES: [&str; 10] =
    ["p.001", "p.003", "p.008", "p.010", "p.067", "p.070", "p.071", "p.093", "p.095", "p.103"];

/// Entities with a stored golden timeline.
pub const GOLDEN_ENTITIES: [&str; 3] = ["p.001", "p.070", "p.093"];

pub fn synthetic_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic").canonicalize().unwrap()
}

pub fn golden_path(name: &str) -> PathBuf {
    synthetic_dir().join("golden").join(name)
}

/// Writes a config reading the bundled synthetic inputs and persisting into
/// `dir/store`.
pub fn write_config(dir: &Path) -> PathBuf {
    let data = synthetic_dir();
    let base = fs::read_to_string(data.join("config.toml")).unwrap();
    let mut text = String::new();
    for line in base.lines() {
        let key = line.split('=').next().unwrap_or("").trim();
        let value = match key {
            "triples" | "templates" | "importance" | "names" | "documents" | "cooc" => {
                let file = line.split('"').nth(1).unwrap();
                format!("{key} = {:?}", data.join(file))
            }
            "store" => format!("store = {:?}", dir.join("store")),
            _ => line.to_string(),
        };
        text.push_str(&value);
        text.push('\n');
    }
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

/// The synthetic pipeline run once per test binary.
pub struct Prepared {
    pub dir: TempDir,
    pub config_path: PathBuf,
    pub config: PipelineConfig,
    pub summary: PipelineSummary,
    pub engine: Engine,
}

pub fn prepared() -> &'static Prepared {
    static CELL: OnceLock<Prepared> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let config_path = write_config(dir.path());
        let config = PipelineConfig::load(&config_path).unwrap();
        let summary = run_pipeline(&config).unwrap();
        let engine = load_engine(&config).unwrap();
        Prepared { dir, config_path, config, summary, engine }
    })
}
