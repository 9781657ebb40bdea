use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chronoline::engine::{AblationEntry, Engine, TimelineRequest};
use chronoline::selector::ModelVariant;
use chronoline::store::CandidateStore;
use chronoline::Timestamp;
use chronoline_cli::pipeline::{build_cooc, load_engine, run_pipeline, store_coverage};
use chronoline_cli::server;
use chronoline_cli::PipelineConfig;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "chronoline", version, about = "Entity timelines from a knowledge base")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, env = "CHRONO_CONFIG", default_value = "chronoline.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate, filter and persist candidate events.
    Pipeline,
    /// Build the co-occurrence store from annotated documents.
    CoocBuild,
    /// Print one timeline as JSON.
    Timeline(TimelineArgs),
    /// Compare two variants on a list of entities.
    Ablate(AblateArgs),
    /// Print the coverage table of the candidate store as CSV.
    Coverage,
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "CHRONO_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Debug, Args)]
struct ViewArgs {
    #[arg(long, env = "CHRONO_START", value_parser = parse_day)]
    start: Option<Timestamp>,
    #[arg(long, env = "CHRONO_END", value_parser = parse_day)]
    end: Option<Timestamp>,
    /// Screen width W in pixels.
    #[arg(long, env = "CHRONO_WIDTH")]
    width: Option<u32>,
    /// Screen height H in pixels.
    #[arg(long, env = "CHRONO_HEIGHT")]
    height: Option<u32>,
}

#[derive(Debug, Args)]
struct TimelineArgs {
    #[arg(long, env = "CHRONO_ENTITY")]
    entity: String,
    #[arg(long, env = "CHRONO_VARIANT", default_value = "Full", value_parser = parse_variant)]
    variant: ModelVariant,
    #[command(flatten)]
    view: ViewArgs,
}

#[derive(Debug, Args)]
struct AblateArgs {
    /// Entities to compare; every subject above the minimum event count when omitted.
    #[arg(long, env = "CHRONO_ENTITY", value_delimiter = ',')]
    entity: Vec<String>,
    /// Control variant.
    #[arg(long, env = "CHRONO_VARIANT", default_value = "Full", value_parser = parse_variant)]
    variant: ModelVariant,
    /// Experiment variant.
    #[arg(long, value_parser = parse_variant)]
    against: ModelVariant,
    #[command(flatten)]
    view: ViewArgs,
}

fn parse_day(s: &str) -> Result<Timestamp, String> {
    Timestamp::parse(s).map_err(|e| e.to_string())
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    s.parse().map_err(|e: chronoline::SelectError| e.to_string())
}

impl ViewArgs {
    fn request(&self, entity: &str, variant: ModelVariant) -> TimelineRequest {
        TimelineRequest {
            entity: entity.to_string(),
            start: self.start,
            end: self.end,
            width: self.width,
            height: self.height,
            variant,
        }
    }
}

#[derive(Serialize)]
struct AblationReport {
    control: ModelVariant,
    experiment: ModelVariant,
    entries: Vec<AblationEntry>,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn ablate(engine: &Engine, args: &AblateArgs) -> Result<()> {
    let entities: Vec<String> = if args.entity.is_empty() {
        engine.store.rich_subjects().map(|s| s.to_string()).collect()
    } else {
        args.entity.clone()
    };
    let entries = entities
        .iter()
        .map(|e| engine.ablate(&args.view.request(e, args.variant), args.against))
        .collect::<Result<Vec<_>, _>>()?;
    print_json(&AblationReport { control: args.variant, experiment: args.against, entries })
}

fn run(cli: Cli) -> Result<()> {
    let cfg = PipelineConfig::load(&cli.config)?;
    match cli.command {
        Command::Pipeline => {
            let summary = run_pipeline(&cfg)?;
            print_json(&summary)
        }
        Command::CoocBuild => {
            let store = build_cooc(&cfg)?;
            eprintln!(
                "wrote {}: {} entity pairs, {} entity-date pairs",
                cfg.cooc.display(),
                store.ee_pairs().count(),
                store.ed_pairs().count()
            );
            Ok(())
        }
        Command::Timeline(args) => {
            let engine = load_engine(&cfg)?;
            let doc = engine.timeline_doc(&args.view.request(&args.entity, args.variant))?;
            print_json(&doc)
        }
        Command::Ablate(args) => {
            let engine = load_engine(&cfg)?;
            ablate(&engine, &args)
        }
        Command::Coverage => {
            let store = CandidateStore::read(&cfg.store).context("reading candidate store; run `pipeline` first")?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "vertical,X,count_simple,count_all")?;
            for (vertical, rows) in store_coverage(&store) {
                for r in rows {
                    writeln!(out, "{vertical},{},{},{}", r.x, r.count_simple, r.count_all)?;
                }
            }
            Ok(())
        }
        Command::Serve { bind } => {
            let engine = load_engine(&cfg)?;
            if engine.store.is_empty() {
                bail!("candidate store at {} is empty", cfg.store.display());
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(engine, bind))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
