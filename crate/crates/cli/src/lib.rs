//! Artifact plumbing around the `chronoline` engine: configuration, the
//! offline pipeline, and the HTTP service.

pub mod config;
pub mod pipeline;
pub mod server;

pub use config::PipelineConfig;
pub use pipeline::{load_engine, run_pipeline, PipelineError, PipelineSummary, Stage};
