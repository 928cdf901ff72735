use std::error::Error as StdError;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wleak_cli::config::ExperimentConfig;
use wleak_cli::pipeline::Pipeline;
use wleak_cli::Result;

#[derive(Parser)]
#[command(
    name = "wleak",
    version,
    about = "Harness for the weight-leakage experiments: synthesizes a speaker corpus, \
             personalizes surrogate models, and runs the gender-clustering and \
             speaker-verification attacks."
)]
struct Cli {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's output directory.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic speaker corpus file.
    Synth,
    /// Train the generic base model on the generic split.
    Pretrain,
    /// Fine-tune one model per attack-split speaker and session.
    Personalize,
    /// Ward-cluster per-layer weight vectors and score gender purity.
    AttackGender,
    /// Train the per-layer multi-stream embedding extractors.
    TrainExtractor,
    /// Extract eval-split speaker embeddings with the trained extractors.
    Embed,
    /// Write the verification trial/key files.
    Trials,
    /// Score all trials and compute per-layer EERs.
    Score,
    /// Write the CSV/JSON report.
    Report,
    /// Run every stage in order.
    RunAll,
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(dir) = cli.output_dir {
        config.output_dir = dir;
    }
    let pipeline = Pipeline::new(config)?;

    match cli.command {
        Command::Synth => {
            pipeline.corpus()?;
            println!("{}", pipeline.corpus_path().display());
        }
        Command::Pretrain => {
            let corpus = pipeline.corpus()?;
            pipeline.base(&corpus)?;
            println!("{}", pipeline.generic_path().display());
        }
        Command::Personalize => {
            let corpus = pipeline.corpus()?;
            let base = pipeline.base(&corpus)?;
            let records = pipeline.models(&corpus, &base)?;
            println!("{} models", records.len());
        }
        Command::AttackGender => {
            let corpus = pipeline.corpus()?;
            let base = pipeline.base(&corpus)?;
            let records = pipeline.models(&corpus, &base)?;
            pipeline.gender_purity(&base, &records)?;
            println!("{}", pipeline.purity_path().display());
        }
        Command::TrainExtractor => {
            let corpus = pipeline.corpus()?;
            let base = pipeline.base(&corpus)?;
            let records = pipeline.models(&corpus, &base)?;
            let extractors = pipeline.extractors(&corpus, &base, &records)?;
            println!("{} extractors", extractors.len());
        }
        Command::Embed => {
            let corpus = pipeline.corpus()?;
            let base = pipeline.base(&corpus)?;
            let records = pipeline.models(&corpus, &base)?;
            let extractors = pipeline.extractors(&corpus, &base, &records)?;
            let embeddings = pipeline.embeddings(&base, &records, &extractors)?;
            println!("{} embedding sets", embeddings.len());
        }
        Command::Trials => {
            let corpus = pipeline.corpus()?;
            pipeline.trials(&corpus)?;
        }
        Command::Score => {
            let corpus = pipeline.corpus()?;
            let base = pipeline.base(&corpus)?;
            let records = pipeline.models(&corpus, &base)?;
            let extractors = pipeline.extractors(&corpus, &base, &records)?;
            let embeddings = pipeline.embeddings(&base, &records, &extractors)?;
            pipeline.verification(&base, &records, &embeddings)?;
            println!("{}", pipeline.verification_path().display());
        }
        Command::Report | Command::RunAll => {
            let (csv, _) = pipeline.run_all()?;
            println!("{csv}", csv = csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            let mut cause = e.source();
            while let Some(c) = cause {
                eprint!(": {c}");
                cause = c.source();
            }
            eprintln!();
            ExitCode::FAILURE
        }
    }
}
