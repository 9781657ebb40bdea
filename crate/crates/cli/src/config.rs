use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chronoline::filter::FilterConfig;
use chronoline::kb::{ExistencePredicates, PredicateId};
use chronoline::layout::LayoutSpec;
use chronoline::relevance::CoocParams;
use serde::Deserialize;

fn default_min_events() -> usize {
    20
}

fn default_lambda() -> f64 {
    0.75
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceSection {
    /// Entity/time trade-off applied to every variant.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub cooc: CoocParams,
    /// Skip picks that add nothing to the objective.
    #[serde(default)]
    pub prune_zero_gain: bool,
}

impl Default for RelevanceSection {
    fn default() -> Self {
        RelevanceSection { lambda: default_lambda(), cooc: CoocParams::default(), prune_zero_gain: false }
    }
}

/// Pipeline and service settings. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub triples: PathBuf,
    pub templates: PathBuf,
    pub importance: PathBuf,
    pub cooc: PathBuf,
    pub store: PathBuf,
    pub names: Option<PathBuf>,
    /// Annotated documents for `cooc-build`.
    pub documents: Option<PathBuf>,
    #[serde(default)]
    pub cvt_predicates: BTreeSet<PredicateId>,
    #[serde(default)]
    pub existence: ExistencePredicates,
    /// Entity-valued predicate naming a subject's vertical.
    pub vertical_predicate: Option<PredicateId>,
    #[serde(default = "default_min_events")]
    pub min_events: usize,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub layout: LayoutSpec,
    #[serde(default)]
    pub relevance: RelevanceSection,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.triples);
        join(&mut self.templates);
        join(&mut self.importance);
        join(&mut self.cooc);
        join(&mut self.store);
        if let Some(p) = self.names.as_mut() {
            join(p);
        }
        if let Some(p) = self.documents.as_mut() {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate().map_err(anyhow::Error::msg).context("[filter]")?;
        self.layout.validate().context("[layout]")?;
        if !(0.0..=1.0).contains(&self.relevance.lambda) {
            bail!("[relevance] lambda must be in [0, 1], got {}", self.relevance.lambda);
        }
        if self.relevance.cooc.window == 0 {
            bail!("[relevance.cooc] window must be positive");
        }
        Ok(())
    }

    /// Inputs the pipeline reads, in the order they are checked.
    pub fn pipeline_inputs(&self) -> Vec<&Path> {
        let mut paths = vec![self.triples.as_path(), self.templates.as_path(), self.importance.as_path()];
        if let Some(p) = &self.names {
            paths.push(p);
        }
        paths
    }
}
