//! `pertext`: build phonetic indexes and query, normalize, perturb and
//! chart text from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "pertext",
    version,
    about = "Discover, index, apply and normalize human-written text perturbations"
)]
pub struct Cli {
    /// Output format for results on stdout.
    #[arg(long, value_enum, global = true, default_value = "tsv")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Exactly one source of text.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TextInput {
    /// Text given inline.
    #[arg(long)]
    pub text: Option<String>,
    /// File with one text per line; `-` reads stdin.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    /// Phonetic level.
    #[arg(long, default_value_t = 1)]
    pub k: u8,
    /// Maximum edit distance.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest corpora into an index directory.
    BuildIndex {
        /// Corpus files or folders (plain text or JSON lines).
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        levels: Vec<u8>,
        #[arg(long)]
        out: PathBuf,
        /// Encoder rules file; defaults to the built-in rules.
        #[arg(long)]
        encoder_config: Option<PathBuf>,
        /// Merge into the existing index, skipping files already ingested.
        #[arg(long)]
        update: bool,
    },
    /// Print the phonetic key of a token.
    Encode {
        token: String,
        #[arg(long, default_value_t = 1)]
        k: u8,
        #[arg(long)]
        encoder_config: Option<PathBuf>,
    },
    /// List the perturbations of a token.
    Lookup {
        token: String,
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        case_sensitive: bool,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        /// Leave the query token itself out of the result.
        #[arg(long)]
        exclude_query: bool,
    },
    /// Replace perturbed tokens with dictionary words.
    Normalize {
        #[command(flatten)]
        input: TextInput,
        /// Wordlist, one word per line.
        #[arg(long)]
        dict: PathBuf,
        /// N-gram model written by `train-lm`.
        #[arg(long, conflicts_with = "scorer_cmd")]
        model: Option<PathBuf>,
        /// External scorer program and its arguments.
        #[arg(long, num_args = 1.., value_name = "CMD")]
        scorer_cmd: Vec<String>,
        #[arg(long)]
        encoder_config: Option<PathBuf>,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long, default_value_t = 5)]
        top_n: usize,
    },
    /// Swap a share of the words for observed perturbations.
    Perturb {
        #[command(flatten)]
        input: TextInput,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        ratio: f64,
        /// Required with `--format json`; drawn at random otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        case_sensitive: bool,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Perturb every document of a corpus file.
    PerturbCorpus {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path; defaults to `<out>.manifest.jsonl`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        case_sensitive: bool,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Count a word and its variants over time.
    Timeline {
        #[arg(long)]
        word: String,
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        index: PathBuf,
        /// Inclusive start: RFC 3339 or YYYY-MM-DD.
        #[arg(long)]
        from: Option<String>,
        /// Exclusive end: RFC 3339 or YYYY-MM-DD.
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value = "day", value_parser = ["day", "week", "month"])]
        granularity: String,
        /// Sentiment lexicon, `word<TAB>valence` per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Report one combined series instead of one per variant.
        #[arg(long)]
        combine: bool,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Train an n-gram coherency model.
    TrainLm {
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        encoder_config: Option<PathBuf>,
    },
    /// Expand keywords with their perturbations.
    Enrich {
        #[arg(long, required = true, value_delimiter = ',')]
        words: Vec<String>,
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Ingest new files from a folder into an index, repeatedly.
    Watch {
        #[arg(long)]
        folder: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        levels: Vec<u8>,
        #[arg(long, default_value_t = 60)]
        interval_secs: u64,
        /// Run a single pass and exit.
        #[arg(long)]
        once: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(commands::Failure::Op(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
