//! Stage implementations shared by `run` and the single-stage subcommands.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use serde::Serialize;
use textmine::cluster::{agglomerate, distance_matrix};
use textmine::corpus::{
    bundled_keyword_sets, filter_by_date, filter_by_keywords, load_corpus, load_keyword_sets, read_corpus,
    Corpus, InputFormat, LineageEntry,
};
use textmine::metrics::{format_fixed, rank_influencers, write_ranking};
use textmine::nlp::{preprocess_corpus, Preprocessor, StopwordLists, TokenStream};
use textmine::sentiment::{
    corpus_polarity, load_lexicon, read_polarity, write_polarity, LabelCounts, PolarityResult, SentimentLexicon,
};
use textmine::tdm::{associations, build_tdm, remove_sparse_terms, term_frequencies, write_associations, write_frequencies, TermDocumentMatrix};
use textmine::topics::{
    fit_lda, topic_polarity, write_assignments, write_phi, write_theta, write_topic_polarity, write_topic_terms,
    TopicModel,
};

use crate::config::PipelineConfig;
use crate::CliError;

pub const CORPUS: &str = "corpus.jsonl";
pub const CORPUS_LINEAGE: &str = "corpus_lineage.json";
pub const FILTERED: &str = "filtered.jsonl";
pub const FILTERED_LINEAGE: &str = "filtered_lineage.json";
pub const RANKING: &str = "ranking.csv";
pub const SKIPPED: &str = "skipped_posts.csv";
pub const TOKENS: &str = "tokens.jsonl";
pub const TDM: &str = "tdm.csv";
pub const FREQUENCIES: &str = "frequencies.csv";
pub const ASSOCIATIONS: &str = "associations.csv";
pub const POLARITY: &str = "polarity.csv";
pub const DENDROGRAM: &str = "dendrogram.nwk";
pub const MERGES: &str = "merges.csv";
pub const CLUSTERS: &str = "clusters.csv";
pub const PHI: &str = "phi.csv";
pub const THETA: &str = "theta.csv";
pub const TOPICS: &str = "topics.csv";
pub const TOPIC_POLARITY: &str = "topic_polarity.csv";
pub const ASSIGNMENTS: &str = "assignments.csv";
pub const MANIFEST: &str = "manifest.json";

/// Stage names in execution order.
pub const STAGES: [&str; 11] = [
    "load",
    "date_filter",
    "keyword_filter",
    "rank",
    "preprocess",
    "tdm",
    "freq_assoc",
    "sentiment",
    "cluster",
    "lda",
    "topic_polarity",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Retained {
    pub loaded: usize,
    pub filtered: usize,
    /// `filtered / loaded`, computed exactly and rounded to 4 decimals.
    pub ratio: String,
}

impl Retained {
    pub fn new(loaded: usize, filtered: usize) -> Self {
        let ratio = if loaded == 0 {
            format_fixed(&BigRational::from_integer(0.into()), 4)
        } else {
            format_fixed(&BigRational::new(filtered.into(), loaded.into()), 4)
        };
        Retained { loaded, filtered, ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub lda_seed: u64,
    pub config: PipelineConfig,
    pub lineage: Vec<LineageEntry>,
    pub retained: Retained,
    pub skipped_posts: Vec<String>,
    pub polarity: LabelCounts,
    pub stages: Vec<StageRecord>,
    /// Wall-clock time per stage. Always measured; written to the manifest
    /// file only through `StageRecord::seconds` when timings are requested.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

/// Files written into the output directory, removed again if the run fails.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    /// Creates the directory and checks that it accepts files.
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        let fail = |e: std::io::Error| CliError::Config(format!("output directory {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(fail)?;
        let probe = dir.join(".textmine-write-probe");
        File::create(&probe).map_err(fail)?;
        std::fs::remove_file(&probe).map_err(fail)?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write<F>(&mut self, name: &str, f: F) -> textmine::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> textmine::Result<()>,
    {
        let path = self.dir.join(name);
        let io = |e| textmine::Error::Io { path: path.clone(), source: e };
        let file = File::create(&path).map_err(io)?;
        self.written.push(path.clone());
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> textmine::Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| textmine::Error::Validation(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| textmine::Error::Io { path: name.into(), source: e })
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Deletes everything written so far.
    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Reads an artifact from an earlier stage, or reports which one is missing.
fn require(dir: &Path, name: &str, producer: &'static str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::Dependency { artifact: name.to_owned(), dir: dir.to_path_buf(), producer })
    }
}

fn stage_err(stage: &str) -> impl FnOnce(textmine::Error) -> CliError + '_ {
    move |source| CliError::Stage { stage: stage.to_owned(), source }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> textmine::Error + '_ {
    move |e| textmine::Error::Io { path: path.to_path_buf(), source: e }
}

fn write_corpus(out: &mut Outputs, name: &str, lineage_name: &str, c: &Corpus) -> textmine::Result<()> {
    out.write(name, |w| c.write_jsonl(w).map_err(io_err(Path::new(name))))?;
    out.write_json(lineage_name, &c.lineage())
}

fn read_stored_corpus(path: &Path, lineage_path: &Path) -> textmine::Result<Corpus> {
    let file = File::open(path).map_err(io_err(path))?;
    let loaded = read_corpus(file, InputFormat::RecordPerLine, &path.display().to_string());
    let posts = match loaded {
        Ok(c) => c.posts().to_vec(),
        // an empty stage output is a legitimate, empty corpus
        Err(textmine::Error::Validation(m)) if m.contains("no records") => Vec::new(),
        Err(e) => return Err(e),
    };
    let text = std::fs::read_to_string(lineage_path).map_err(io_err(lineage_path))?;
    let lineage: Vec<LineageEntry> =
        serde_json::from_str(&text).map_err(|e| textmine::Error::Parse { line: e.line() as u64, message: e.to_string() })?;
    Corpus::from_parts(path.display().to_string(), posts, lineage)
}

fn write_tokens(out: &mut Outputs, streams: &[TokenStream]) -> textmine::Result<()> {
    out.write(TOKENS, |w| {
        for s in streams {
            serde_json::to_writer(&mut *w, s).map_err(|e| textmine::Error::Validation(e.to_string()))?;
            w.write_all(b"\n").map_err(io_err(Path::new(TOKENS)))?;
        }
        Ok(())
    })
}

fn read_tokens(path: &Path) -> textmine::Result<Vec<TokenStream>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| textmine::Error::Parse { line: i as u64 + 1, message: e.to_string() })?,
        );
    }
    Ok(out)
}

fn lexicon(cfg: &PipelineConfig) -> textmine::Result<SentimentLexicon> {
    match (&cfg.positive_lexicon, &cfg.negative_lexicon) {
        (Some(p), Some(n)) => load_lexicon(p, n),
        _ => Ok(SentimentLexicon::bundled()),
    }
}

fn preprocessor(cfg: &PipelineConfig) -> textmine::Result<Preprocessor> {
    Preprocessor::new(&StopwordLists::bundled(), &cfg.stopword_languages)
}

// Individual stage bodies. Each writes its own artifacts.

fn stage_load(cfg: &PipelineConfig) -> textmine::Result<Corpus> {
    let input = cfg.input.as_ref().expect("validated");
    load_corpus(input, cfg.input_format)
}

fn stage_date(cfg: &PipelineConfig, c: &Corpus, out: &mut Outputs) -> textmine::Result<Corpus> {
    let (start, end) = cfg.date_range().map_err(|e| textmine::Error::InvalidArgument(e.to_string()))?;
    let dated = filter_by_date(c, start, end)?;
    write_corpus(out, CORPUS, CORPUS_LINEAGE, &dated)?;
    Ok(dated)
}

fn stage_keywords(cfg: &PipelineConfig, c: &Corpus, out: &mut Outputs) -> textmine::Result<Corpus> {
    let sets = match &cfg.keywords {
        Some(p) => load_keyword_sets(p)?,
        None => bundled_keyword_sets(),
    };
    let filtered = filter_by_keywords(c, &sets)?;
    write_corpus(out, FILTERED, FILTERED_LINEAGE, &filtered)?;
    Ok(filtered)
}

fn stage_rank(cfg: &PipelineConfig, c: &Corpus, out: &mut Outputs) -> textmine::Result<Vec<String>> {
    let ranking = rank_influencers(c, cfg.top_authors, cfg.aggregation)?;
    out.write(RANKING, |w| write_ranking(&ranking, w))?;
    out.write(SKIPPED, |w| {
        writeln!(w, "post_id").map_err(io_err(Path::new(SKIPPED)))?;
        for id in &ranking.skipped {
            writeln!(w, "{id}").map_err(io_err(Path::new(SKIPPED)))?;
        }
        Ok(())
    })?;
    Ok(ranking.skipped)
}

fn stage_preprocess(cfg: &PipelineConfig, c: &Corpus, out: &mut Outputs) -> textmine::Result<Vec<TokenStream>> {
    let streams = preprocess_corpus(c, &preprocessor(cfg)?);
    write_tokens(out, &streams)?;
    Ok(streams)
}

fn stage_tdm(streams: &[TokenStream], out: &mut Outputs) -> textmine::Result<TermDocumentMatrix> {
    let m = build_tdm(streams)?;
    out.write(TDM, |w| m.write_coordinates(w))?;
    Ok(m)
}

fn stage_freq(cfg: &PipelineConfig, m: &TermDocumentMatrix, out: &mut Outputs) -> textmine::Result<()> {
    let freqs = term_frequencies(m, cfg.top_terms);
    out.write(FREQUENCIES, |w| write_frequencies(&freqs, w))
}

fn stage_assoc(cfg: &PipelineConfig, m: &TermDocumentMatrix, out: &mut Outputs) -> textmine::Result<()> {
    let lists = cfg
        .anchors
        .iter()
        .map(|a| associations(m, &textmine::nlp::fold(a), cfg.min_corr))
        .collect::<textmine::Result<Vec<_>>>()?;
    out.write(ASSOCIATIONS, |w| write_associations(&lists, w))
}

fn stage_sentiment(
    cfg: &PipelineConfig,
    streams: &[TokenStream],
    out: &mut Outputs,
) -> textmine::Result<(Vec<PolarityResult>, LabelCounts)> {
    let cp = corpus_polarity(streams, &lexicon(cfg)?);
    out.write(POLARITY, |w| write_polarity(&cp.results, w))?;
    Ok((cp.results, cp.distribution))
}

fn stage_cluster(cfg: &PipelineConfig, m: &TermDocumentMatrix, out: &mut Outputs) -> textmine::Result<()> {
    let reduced = remove_sparse_terms(m, cfg.max_sparsity)?;
    let d = distance_matrix(&reduced, cfg.metric)?;
    let tree = agglomerate(&d, cfg.linkage)?;
    let k = cfg.clusters;
    let groups = tree.cut(k)?;
    debug_assert_eq!(groups.len(), tree.n_leaves());
    out.write(DENDROGRAM, |w| {
        writeln!(w, "{}", tree.to_newick()).map_err(io_err(Path::new(DENDROGRAM)))
    })?;
    out.write(MERGES, |w| tree.write_merge_table(w))?;
    out.write(CLUSTERS, |w| tree.write_cut(k, w))
}

fn stage_lda(cfg: &PipelineConfig, streams: &[TokenStream], out: &mut Outputs) -> textmine::Result<TopicModel> {
    let model = fit_lda(streams, &cfg.lda_config())?;
    out.write(PHI, |w| write_phi(&model, w))?;
    out.write(THETA, |w| write_theta(&model, w))?;
    out.write(TOPICS, |w| write_topic_terms(&model, cfg.topic_terms, w))?;
    out.write(ASSIGNMENTS, |w| write_assignments(&model, streams, w))?;
    Ok(model)
}

fn stage_topic_polarity(model: &TopicModel, polarity: &[PolarityResult], out: &mut Outputs) -> textmine::Result<()> {
    let tp = topic_polarity(model, polarity)?;
    out.write(TOPIC_POLARITY, |w| write_topic_polarity(&tp, w))
}

struct Recorder {
    record_timings: bool,
    stages: Vec<StageRecord>,
    timings: Vec<(String, Duration)>,
}

impl Recorder {
    fn run<T>(
        &mut self,
        name: &'static str,
        out: &mut Outputs,
        f: impl FnOnce(&mut Outputs) -> textmine::Result<T>,
    ) -> Result<T, CliError> {
        let before = out.written().len();
        let started = Instant::now();
        log::info!("stage {name}: start");
        let value = f(out).map_err(stage_err(name))?;
        let elapsed = started.elapsed();
        log::info!("stage {name}: done in {:.3}s", elapsed.as_secs_f64());
        let outputs = out.written()[before..]
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        self.stages.push(StageRecord {
            name: name.to_owned(),
            outputs,
            seconds: self.record_timings.then_some(elapsed.as_secs_f64()),
        });
        self.timings.push((name.to_owned(), elapsed));
        Ok(value)
    }
}

/// Runs every stage in order and writes all artifacts plus `manifest.json`.
/// On failure every file written by this run is removed.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest, CliError> {
    cfg.validate(true)?;
    let mut out = Outputs::open(&cfg.output_dir)?;
    let result = run_stages(cfg, &mut out);
    if result.is_err() {
        out.discard();
    }
    result
}

fn run_stages(cfg: &PipelineConfig, out: &mut Outputs) -> Result<RunManifest, CliError> {
    let mut rec = Recorder { record_timings: cfg.record_timings, stages: Vec::new(), timings: Vec::new() };

    let loaded = rec.run("load", out, |_| stage_load(cfg))?;
    let dated = rec.run("date_filter", out, |o| stage_date(cfg, &loaded, o))?;
    let filtered = rec.run("keyword_filter", out, |o| stage_keywords(cfg, &dated, o))?;
    let skipped = rec.run("rank", out, |o| stage_rank(cfg, &filtered, o))?;
    let streams = rec.run("preprocess", out, |o| stage_preprocess(cfg, &filtered, o))?;
    let m = rec.run("tdm", out, |o| stage_tdm(&streams, o))?;
    rec.run("freq_assoc", out, |o| {
        stage_freq(cfg, &m, o)?;
        stage_assoc(cfg, &m, o)
    })?;
    let (polarity, distribution) = rec.run("sentiment", out, |o| stage_sentiment(cfg, &streams, o))?;
    rec.run("cluster", out, |o| stage_cluster(cfg, &m, o))?;
    let model = rec.run("lda", out, |o| stage_lda(cfg, &streams, o))?;
    rec.run("topic_polarity", out, |o| stage_topic_polarity(&model, &polarity, o))?;
    debug_assert!(rec.stages.iter().map(|s| s.name.as_str()).eq(STAGES));

    let mut stages = rec.stages;
    stages.push(StageRecord { name: "manifest".into(), outputs: vec![MANIFEST.into()], seconds: None });
    let manifest = RunManifest {
        tool: "textmine".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        lda_seed: cfg.lda_config().seed,
        config: cfg.clone(),
        lineage: filtered.lineage().to_vec(),
        retained: Retained::new(loaded.len(), filtered.len()),
        skipped_posts: skipped,
        polarity: distribution,
        stages,
        timings: rec.timings,
    };
    out.write_json(MANIFEST, &manifest).map_err(stage_err("manifest"))?;
    Ok(manifest)
}

/// The single-stage subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Ingest,
    Filter,
    Rank,
    Freq,
    Assoc,
    Sentiment,
    Cluster,
    Topics,
}

impl Step {
    pub fn name(self) -> &'static str {
        match self {
            Step::Ingest => "ingest",
            Step::Filter => "filter",
            Step::Rank => "rank",
            Step::Freq => "freq",
            Step::Assoc => "assoc",
            Step::Sentiment => "sentiment",
            Step::Cluster => "cluster",
            Step::Topics => "topics",
        }
    }
}

/// Runs one subcommand against artifacts left in the output directory by
/// earlier ones. Returns the names of the files written.
pub fn run_step(step: Step, cfg: &PipelineConfig) -> Result<Vec<String>, CliError> {
    cfg.validate(step == Step::Ingest)?;
    let dir = cfg.output_dir.clone();
    // dependencies are checked before anything is created or written
    let corpus = || -> Result<(PathBuf, PathBuf), CliError> {
        Ok((require(&dir, CORPUS, "ingest")?, require(&dir, CORPUS_LINEAGE, "ingest")?))
    };
    let filtered = || -> Result<(PathBuf, PathBuf), CliError> {
        Ok((require(&dir, FILTERED, "filter")?, require(&dir, FILTERED_LINEAGE, "filter")?))
    };
    let tokens = || require(&dir, TOKENS, "freq");
    let inputs: Vec<PathBuf> = match step {
        Step::Ingest => vec![],
        Step::Filter => {
            let (a, b) = corpus()?;
            vec![a, b]
        }
        Step::Rank | Step::Freq => {
            let (a, b) = filtered()?;
            vec![a, b]
        }
        Step::Assoc | Step::Sentiment | Step::Cluster => vec![tokens()?],
        Step::Topics => vec![tokens()?, require(&dir, POLARITY, "sentiment")?],
    };

    let mut out = Outputs::open(&dir)?;
    let name = step.name();
    let result = (|| -> textmine::Result<()> {
        match step {
            Step::Ingest => {
                let c = stage_load(cfg)?;
                stage_date(cfg, &c, &mut out)?;
            }
            Step::Filter => {
                let c = read_stored_corpus(&inputs[0], &inputs[1])?;
                stage_keywords(cfg, &c, &mut out)?;
            }
            Step::Rank => {
                let c = read_stored_corpus(&inputs[0], &inputs[1])?;
                stage_rank(cfg, &c, &mut out)?;
            }
            Step::Freq => {
                let c = read_stored_corpus(&inputs[0], &inputs[1])?;
                let streams = stage_preprocess(cfg, &c, &mut out)?;
                let m = stage_tdm(&streams, &mut out)?;
                stage_freq(cfg, &m, &mut out)?;
            }
            Step::Assoc => {
                let m = build_tdm(&read_tokens(&inputs[0])?)?;
                stage_assoc(cfg, &m, &mut out)?;
            }
            Step::Sentiment => {
                stage_sentiment(cfg, &read_tokens(&inputs[0])?, &mut out)?;
            }
            Step::Cluster => {
                let m = build_tdm(&read_tokens(&inputs[0])?)?;
                stage_cluster(cfg, &m, &mut out)?;
            }
            Step::Topics => {
                let streams = read_tokens(&inputs[0])?;
                let file = File::open(&inputs[1]).map_err(io_err(&inputs[1]))?;
                let polarity = read_polarity(file)?;
                let model = stage_lda(cfg, &streams, &mut out)?;
                stage_topic_polarity(&model, &polarity, &mut out)?;
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(out
            .written()
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()),
        Err(e) => {
            out.discard();
            Err(stage_err(name)(e))
        }
    }
}
