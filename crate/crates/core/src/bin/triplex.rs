use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use triplex::config::Config;
use triplex::pipeline::{self, Stage};
use triplex::repr::ReprMode;
use triplex::{synth, Error, ErrorKind};

/// Triple-augmented document clustering and classification.
///
/// Every stage reads its inputs from and writes its outputs to the working
/// directory (`--out`), so stages can be re-run one at a time.
#[derive(Debug, Parser)]
#[command(name = "triplex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Overrides,
}

/// Flags override the matching config keys.
#[derive(Debug, Args)]
struct Overrides {
    /// TOML config file; relative paths inside resolve against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Global seed [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Restrict to one representation mode.
    #[arg(long, global = true)]
    mode: Option<ReprMode>,

    /// Embedding provider (`hash` or a served model name); repeatable.
    #[arg(long, global = true)]
    provider: Vec<String>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Smallest k of the KMeans/GMM sweeps.
    #[arg(long, global = true)]
    k_min: Option<usize>,

    /// Largest k of the KMeans/GMM sweeps.
    #[arg(long, global = true)]
    k_max: Option<usize>,

    /// Random-search trials per classifier.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Raw corpus JSONL.
    #[arg(long, global = true, value_name = "PATH")]
    corpus: Option<PathBuf>,

    /// CoNLL-U file or directory of .conllu files.
    #[arg(long, global = true, value_name = "PATH")]
    parses: Option<PathBuf>,

    /// Working directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the corpus and draw the clustering and classification sets.
    Ingest,
    /// Extract triples from the dependency parses.
    Triples,
    /// Build the four text representations.
    Repr,
    /// Embed every representation with each provider.
    Embed,
    /// Sweep KMeans, GMM and HDBSCAN and keep the best clustering.
    Cluster,
    /// Carry cluster labels to the classification set.
    Propagate,
    /// Random-search a softmax head per representation.
    Train,
    /// Score trained heads on their validation split.
    Evaluate,
    /// Write the result tables and the run manifest.
    Report,
    /// Run every stage in order.
    Pipeline,
    /// Write the synthetic demo corpus, its parses and a config.
    Demo {
        /// Target directory.
        dir: PathBuf,
        /// Number of documents.
        #[arg(long, default_value_t = 200)]
        docs: usize,
    },
}

fn resolve(opts: &Overrides) -> triplex::Result<Config> {
    let mut c = match &opts.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(v) = opts.seed {
        c.seed = v;
    }
    if let Some(v) = opts.mode {
        c.mode = Some(v);
    }
    if !opts.provider.is_empty() {
        c.providers = opts.provider.clone();
    }
    if let Some(v) = opts.threads {
        c.threads = v;
    }
    if let Some(v) = opts.k_min {
        c.cluster.k_min = v;
    }
    if let Some(v) = opts.k_max {
        c.cluster.k_max = v;
    }
    if let Some(v) = opts.trials {
        c.classify.trials = v;
    }
    if let Some(v) = &opts.corpus {
        c.paths.corpus = v.clone();
    }
    if let Some(v) = &opts.parses {
        c.paths.parses = v.clone();
    }
    if let Some(v) = &opts.out {
        c.paths.out = v.clone();
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> triplex::Result<()> {
    if let Command::Demo { dir, docs } = &cli.command {
        return synth::write_demo(dir, *docs);
    }
    let config = resolve(&cli.opts)?;
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let stage: Stage = match cli.command {
        Command::Ingest => pipeline::ingest,
        Command::Triples => pipeline::triples,
        Command::Repr => pipeline::repr,
        Command::Embed => pipeline::embed,
        Command::Cluster => pipeline::cluster,
        Command::Propagate => pipeline::propagate,
        Command::Train => pipeline::train,
        Command::Evaluate => pipeline::evaluate,
        Command::Report => pipeline::report,
        Command::Pipeline => pipeline::run_all,
        Command::Demo { .. } => unreachable!("handled above"),
    };
    stage(&config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.opts.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
