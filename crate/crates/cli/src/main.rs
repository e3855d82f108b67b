//! `multilayout`: compute layouts, export scenes, benchmark the pipeline,
//! generate synthetic graphs and run the frame server.

mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multilayout_core::synth::{planted_partition, Preset};
use multilayout_core::Error;
use multilayout_server::protocol::FrameFormat;
use multilayout_server::session::Condition;
use multilayout_server::ServerConfig;

use commands::Mode;

#[derive(Parser)]
#[command(
    name = "multilayout",
    version,
    about = "Multi-layout exploration of community-structured networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// JSON engine configuration; any key may be omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set force.kRepulsion=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Seed for community detection and force layouts.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the scene of one layout mode as canonical JSON.
    Layout {
        /// Graph file (edge list, GraphML, GML, JSON) or preset name.
        graph: String,
        /// overview, spherical, floating:<community>, projected:<community>
        #[arg(long, default_value = "spherical")]
        mode: Mode,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Time every pipeline stage and print a JSON report.
    Bench {
        graph: String,
        #[arg(long, default_value_t = 3)]
        iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Serve sessions over WebSocket at ws://host:port/ws.
    Serve {
        #[arg(long, env = "MULTILAYOUT_PORT", default_value_t = 8080)]
        port: u16,
        /// Directory of graph files offered by name.
        #[arg(long, env = "MULTILAYOUT_GRAPH_DIR")]
        graph_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        frame_rate: f64,
        /// binary or json
        #[arg(long, default_value = "binary", value_parser = parse_format)]
        frame_format: FrameFormat,
        /// MULTI, or BASE for the spherical-only condition.
        #[arg(long, default_value = "MULTI")]
        condition: Condition,
        /// Write each session's telemetry CSV here on disconnect.
        #[arg(long)]
        telemetry_dir: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Print the effective engine configuration as JSON.
    Config {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Write a synthetic planted-partition graph as JSON.
    Generate {
        /// easy, medium, hard or stress
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<FrameFormat, String> {
    match s {
        "binary" => Ok(FrameFormat::Binary),
        "json" => Ok(FrameFormat::Json),
        _ => Err(format!("unknown frame format {s:?} (binary or json)")),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Layout { graph, mode, out, cfg } => {
            let config = input::config(cfg.config.as_deref(), &cfg.sets, cfg.seed)?;
            let frame = commands::layout(input::graph(&graph)?, config, mode)?;
            emit(out.as_ref(), &frame.to_canonical_json())
        }
        Cmd::Bench {
            graph,
            iterations,
            out,
            cfg,
        } => {
            let config = input::config(cfg.config.as_deref(), &cfg.sets, cfg.seed)?;
            let report = commands::bench(&graph, input::graph(&graph)?, config, iterations)?;
            emit(out.as_ref(), &serde_json::to_string_pretty(&report)?)
        }
        Cmd::Serve {
            port,
            graph_dir,
            frame_rate,
            frame_format,
            condition,
            telemetry_dir,
            cfg,
        } => {
            if !(frame_rate > 0.0 && frame_rate.is_finite()) {
                anyhow::bail!("--frame-rate must be positive");
            }
            let engine = input::config(cfg.config.as_deref(), &cfg.sets, cfg.seed)?;
            let config = ServerConfig {
                port,
                graph_dir,
                frame_rate,
                frame_format,
                condition,
                telemetry_dir,
                engine,
            };
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .init();
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(multilayout_server::serve(config))?;
            Ok(())
        }
        Cmd::Config { cfg } => {
            let config = input::config(cfg.config.as_deref(), &cfg.sets, cfg.seed)?;
            emit(None, &serde_json::to_string_pretty(&config)?)
        }
        Cmd::Generate { preset, seed, out } => {
            let planted = planted_partition(&preset.spec(seed))?;
            emit(out.as_ref(), &planted.graph.to_canonical_json())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let unknown = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(Error::UnknownId(_) | Error::UnknownEdge(..))
                )
            });
            ExitCode::from(if unknown { 3 } else { 1 })
        }
    }
}
