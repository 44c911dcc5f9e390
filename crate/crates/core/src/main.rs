use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pge_core::experiment::{self, ExperimentSpec};
use pge_core::problems::{pagie_dataset, PagieGrid};

#[derive(Parser)]
#[command(
    name = "pge",
    version,
    about = "GE / PGE symbolic regression experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV artifacts.
    Run(Box<RunArgs>),
    /// Mean and standard deviation of final best-ever fitness in fitness.csv files.
    Summarize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Mean final-generation probabilities of one nonterminal from probs.csv files.
    Probs {
        #[arg(long, default_value = "var")]
        nonterminal: String,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write the Pagie grid as CSV (x, y, target).
    ExportPagie {
        #[arg(long, default_value = "paper")]
        grid: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ge | pge
    #[arg(long)]
    algorithm: Option<String>,
    /// pagie | boston
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    grammar: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    pop: Option<String>,
    #[arg(long)]
    gens: Option<String>,
    #[arg(long)]
    elitism: Option<String>,
    #[arg(long = "mut-prob")]
    mut_prob: Option<String>,
    #[arg(long = "xo-prob")]
    xo_prob: Option<String>,
    #[arg(long)]
    tournament: Option<String>,
    #[arg(long = "genotype-size")]
    genotype_size: Option<String>,
    #[arg(long)]
    wraps: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// paper ([-5, 5.4]) | conventional ([-5, 5])
    #[arg(long = "pagie-grid")]
    pagie_grid: Option<String>,
    #[arg(long = "boston-csv")]
    boston_csv: Option<String>,
    #[arg(long = "split-seed")]
    split_seed: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("algorithm", &self.algorithm),
            ("problem", &self.problem),
            ("grammar", &self.grammar),
            ("runs", &self.runs),
            ("seed", &self.seed),
            ("pop", &self.pop),
            ("gens", &self.gens),
            ("elitism", &self.elitism),
            ("mut-prob", &self.mut_prob),
            ("xo-prob", &self.xo_prob),
            ("tournament", &self.tournament),
            ("genotype-size", &self.genotype_size),
            ("wraps", &self.wraps),
            ("lambda", &self.lambda),
            ("out", &self.out),
            ("pagie-grid", &self.pagie_grid),
            ("boston-csv", &self.boston_csv),
            ("split-seed", &self.split_seed),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }

    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::default();
        if let Some(path) = &self.config {
            spec.apply_config_file(path)?;
        }
        for (key, value) in self.overrides() {
            spec.set(key, value).with_context(|| format!("--{key}"))?;
        }
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let spec = args.spec()?;
            let result = experiment::run_experiment(&spec)?;
            println!("{}", result.summary.display_line());
            println!("artifacts written to {}", spec.output_dir.display());
        }
        Command::Summarize { files } => {
            let s = experiment::summarize(&files)?;
            println!(
                "{} runs: best-ever fitness {:.2} ± {:.2} (mean {}, std {})",
                s.runs, s.train_mean, s.train_std, s.train_mean, s.train_std
            );
        }
        Command::Probs { nonterminal, files } => {
            let table = experiment::dump_final_probs(&files, &nonterminal)?;
            let mut out = io::stdout().lock();
            writeln!(out, "production,probability")?;
            for row in table {
                writeln!(out, "{},{}", row.production_text, row.probability)?;
            }
        }
        Command::ExportPagie { grid, out } => {
            let grid = match grid.as_str() {
                "paper" => PagieGrid::Paper,
                "conventional" => PagieGrid::Conventional,
                other => anyhow::bail!("unknown grid `{other}`"),
            };
            let data = pagie_dataset(grid);
            match out {
                Some(path) => {
                    let file = File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    data.write_csv(file, "target")?;
                }
                None => data.write_csv(io::stdout().lock(), "target")?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
