use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ptlab_cli::commands::{density_report, generate, load_property, member_report, read_graph, write_generated, GenArgs, GenKind};
use ptlab_cli::experiments::{run_experiment, write_report, ExperimentConfig};

/// Dense-graph property-testing laboratory.
#[derive(Parser)]
#[command(name = "ptlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Four-vertex census, densities and membership of a graph file.
    Density { file: PathBuf },
    /// Membership in a weighted density property.
    Member {
        file: PathBuf,
        /// `thm1.4`, inline JSON, or a property file.
        #[arg(long, default_value = "thm1.4")]
        property: String,
    },
    /// Write a generated graph as an edge list.
    Gen {
        /// random, blowup or named
        kind: GenKind,
        /// Graph name for `named`.
        name: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long = "name", id = "name_flag")]
        name_flag: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment and write its JSON report.
    Experiment {
        name: String,
        /// Inline JSON or a path to a config file.
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PTLAB_THREADS") {
        let threads: usize = v.parse().with_context(|| format!("PTLAB_THREADS={v:?} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Density { file } => print_json(&density_report(&read_graph(&file)?)?)?,
        Command::Member { file, property } => {
            print_json(&member_report(&read_graph(&file)?, &load_property(&property)?)?)?
        }
        Command::Gen { kind, name, n, k, seed, base, name_flag, out } => {
            let args = GenArgs { n, k, seed, base, name: name_flag.or(name) };
            if let Some(text) = write_generated(&generate(kind, &args)?, out.as_deref())? {
                print!("{text}");
            }
        }
        Command::Experiment { name, config, seed, out } => {
            let mut cfg = match config {
                Some(spec) => ExperimentConfig::load(&spec)?,
                None => ExperimentConfig {
                    experiment: name.clone(),
                    params: serde_json::json!({}),
                    seed: 0,
                    output: None,
                },
            };
            anyhow::ensure!(
                cfg.experiment == name,
                "config names experiment {:?} but {name:?} was requested",
                cfg.experiment
            );
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.output = out;
            }
            let report = run_experiment(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    write_report(&report, path)?;
                    eprintln!("{}: {} -> {}", report.experiment, report.verdict, path.display());
                }
                None => println!("{}", report.to_json_pretty()),
            }
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| run(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
