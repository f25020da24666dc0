//! `articraft`: generate, evaluate, inspect and convert articulated-object
//! datasets.
//!
//! Exit codes: 0 ok, 1 validation failures, 2 system error.

mod commands;
mod config;
mod gen;

use clap::{Parser, Subcommand};
use config::{AgentMode, AugmentMode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "articraft", version, about = "Articulated object dataset toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset of articulated objects.
    Gen {
        /// TOML file with any of the flag names as keys (plus a [mix] table).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Category name, or "any" to draw one per sample.
        #[arg(long)]
        category: Option<String>,
        /// simple | mid | complex | mixed.
        #[arg(long)]
        complexity: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        agents: Option<AgentMode>,
        #[arg(long, value_enum)]
        augment: Option<AugmentMode>,
        /// Surface samples per part in the PLY files.
        #[arg(long)]
        points_per_part: Option<usize>,
    },
    /// Compare predicted objects with ground truth and write a CSV report.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        as_ratio: f64,
        #[arg(long, default_value_t = 2048)]
        points_per_part: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Object count and average part count of a dataset.
    Stats {
        #[arg(long)]
        data: PathBuf,
    },
    /// Structural and plausibility checks over every object of a dataset.
    Validate {
        #[arg(long)]
        data: PathBuf,
    },
    /// Convert between object JSON and URDF.
    Urdf {
        #[command(subcommand)]
        dir: UrdfCmd,
    },
    /// Infer the articulation graph of a closed/open image pair.
    Graph {
        #[arg(long, num_args = 2, value_names = ["CLOSED", "OPEN"])]
        images: Vec<PathBuf>,
        /// Parse a stored agent reply instead of calling the remote agent.
        #[arg(long)]
        reply: Option<PathBuf>,
        /// Few-shot exemplar: closed image, open image, expected JSON tree file.
        #[arg(long, num_args = 3, value_names = ["CLOSED", "OPEN", "TREE"], action = clap::ArgAction::Append)]
        example: Vec<PathBuf>,
        /// Enables the tray rule for this category.
        #[arg(long)]
        category: Option<String>,
    },
}

#[derive(Subcommand)]
enum UrdfCmd {
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    Import {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Failure classes mapped to exit codes.
pub enum Failure {
    Validation(String),
    System(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::System(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Gen {
            config,
            category,
            complexity,
            count,
            seed,
            out,
            agents,
            augment,
            points_per_part,
        } => {
            let file = config.as_deref().map(config::GenFile::load).transpose()?.unwrap_or_default();
            let flags = config::GenFlags {
                category,
                complexity,
                count,
                seed,
                out,
                agents,
                augment,
                points_per_part,
            };
            let cfg = config::GenConfig::resolve(flags, file)?;
            let s = gen::run(&cfg)?;
            println!(
                "wrote {} objects to {} ({} rejected attempts)",
                s.written,
                cfg.out.display(),
                s.rejected
            );
            Ok(())
        }
        Cmd::Eval {
            pred,
            gt,
            as_ratio,
            points_per_part,
            seed,
            out,
        } => commands::eval(&pred, &gt, as_ratio, points_per_part, seed, out.as_deref()),
        Cmd::Stats { data } => commands::stats(&data),
        Cmd::Validate { data } => commands::validate(&data),
        Cmd::Urdf { dir } => match dir {
            UrdfCmd::Export { input, output } => commands::urdf_export(&input, &output),
            UrdfCmd::Import { input, output } => commands::urdf_import(&input, &output),
        },
        Cmd::Graph {
            images,
            reply,
            example,
            category,
        } => commands::graph(&images, reply.as_deref(), &example, category.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::System(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
