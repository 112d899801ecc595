use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use textmine::cluster::{Linkage, Metric};
use textmine::corpus::InputFormat;
use textmine::metrics::Aggregation;
use textmine_cli::{run_pipeline, run_step, CliError, PipelineConfig, Step};

/// Text mining for social-media posts: filtering, engagement ranking,
/// term statistics, sentiment, clustering and topic models.
#[derive(Debug, Parser)]
#[command(name = "textmine", version)]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Shared {
    /// Pipeline configuration file (flat TOML).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage and write a manifest.
    Run(InputArgs),
    /// Load posts and apply the date range.
    Ingest(InputArgs),
    /// Keep posts matching the keyword themes.
    Filter {
        #[arg(long)]
        keywords: Option<PathBuf>,
    },
    /// Rank authors by engagement per follower.
    Rank {
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        aggregation: Option<Aggregation>,
    },
    /// Tokenize, build the term-document matrix and count terms.
    Freq {
        #[arg(long)]
        top: Option<usize>,
    },
    /// Correlated terms for each anchor.
    Assoc {
        /// Anchor term; repeat for several.
        #[arg(long = "anchor")]
        anchors: Vec<String>,
        #[arg(long)]
        min_corr: Option<f64>,
    },
    /// Lexicon polarity per post.
    Sentiment,
    /// Hierarchical clustering of terms.
    Cluster {
        #[arg(long)]
        metric: Option<Metric>,
        #[arg(long)]
        linkage: Option<Linkage>,
        #[arg(long = "k")]
        clusters: Option<usize>,
        #[arg(long)]
        max_sparsity: Option<f64>,
    },
    /// Fit an LDA model and overlay polarity per topic.
    Topics {
        #[arg(long)]
        topics: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long)]
    start_date: Option<String>,
    #[arg(long)]
    end_date: Option<String>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl InputArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        if self.input.is_some() {
            cfg.input = self.input;
        }
        set(&mut cfg.input_format, self.format);
        if self.start_date.is_some() {
            cfg.start_date = self.start_date;
        }
        if self.end_date.is_some() {
            cfg.end_date = self.end_date;
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.shared.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    set(&mut cfg.seed, cli.shared.seed);
    set(&mut cfg.output_dir, cli.shared.output_dir);

    let step = match cli.command {
        Command::Run(args) => {
            args.apply(&mut cfg);
            let manifest = run_pipeline(&cfg)?;
            println!(
                "{} of {} posts retained ({}); outputs in {}",
                manifest.retained.filtered,
                manifest.retained.loaded,
                manifest.retained.ratio,
                cfg.output_dir.display()
            );
            return Ok(());
        }
        Command::Ingest(args) => {
            args.apply(&mut cfg);
            Step::Ingest
        }
        Command::Filter { keywords } => {
            if keywords.is_some() {
                cfg.keywords = keywords;
            }
            Step::Filter
        }
        Command::Rank { top, aggregation } => {
            set(&mut cfg.top_authors, top);
            set(&mut cfg.aggregation, aggregation);
            Step::Rank
        }
        Command::Freq { top } => {
            set(&mut cfg.top_terms, top);
            Step::Freq
        }
        Command::Assoc { anchors, min_corr } => {
            if !anchors.is_empty() {
                cfg.anchors = anchors;
            }
            set(&mut cfg.min_corr, min_corr);
            Step::Assoc
        }
        Command::Sentiment => Step::Sentiment,
        Command::Cluster { metric, linkage, clusters, max_sparsity } => {
            set(&mut cfg.metric, metric);
            set(&mut cfg.linkage, linkage);
            set(&mut cfg.clusters, clusters);
            set(&mut cfg.max_sparsity, max_sparsity);
            Step::Cluster
        }
        Command::Topics { topics, iterations, burn_in } => {
            set(&mut cfg.topics, topics);
            set(&mut cfg.iterations, iterations);
            set(&mut cfg.burn_in, burn_in);
            Step::Topics
        }
    };
    for name in run_step(step, &cfg)? {
        println!("{}", cfg.output_dir.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.shared.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
