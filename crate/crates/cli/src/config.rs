//! Pipeline configuration: a flat TOML file whose keys mirror [`PipelineConfig`].

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveTime, Utc};
use serde::{Deserialize, Serialize};
use textmine::cluster::{Linkage, Metric};
use textmine::corpus::{load_keyword_sets, InputFormat};
use textmine::metrics::Aggregation;
use textmine::nlp::StopwordLists;
use textmine::topics::LdaConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Posts to analyze. Required by `run` and `ingest`.
    pub input: Option<PathBuf>,
    pub input_format: InputFormat,
    /// Inclusive bounds, either `YYYY-MM-DD` or RFC 3339. A bare end date
    /// covers the whole day.
    pub start_date: Option<String>,
    pub end_date: Option<String>,
    /// Keyword theme file; the bundled themes when absent.
    pub keywords: Option<PathBuf>,
    pub stopword_languages: Vec<String>,
    /// Opinion lexicon files; the bundled lexicon when both are absent.
    pub positive_lexicon: Option<PathBuf>,
    pub negative_lexicon: Option<PathBuf>,
    pub top_authors: usize,
    pub aggregation: Aggregation,
    pub top_terms: usize,
    pub anchors: Vec<String>,
    pub min_corr: f64,
    pub max_sparsity: f64,
    pub metric: Metric,
    pub linkage: Linkage,
    pub clusters: usize,
    pub topics: usize,
    /// Defaults to 50 / topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub average_samples: bool,
    pub topic_terms: usize,
    pub seed: u64,
    /// Not part of the manifest snapshot, so runs into different
    /// directories still produce identical trees.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    /// Write per-stage wall-clock seconds into the manifest.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let lda = LdaConfig::new(2);
        PipelineConfig {
            input: None,
            input_format: InputFormat::Delimited,
            start_date: None,
            end_date: None,
            keywords: None,
            stopword_languages: vec!["en".into(), "es".into(), "it".into()],
            positive_lexicon: None,
            negative_lexicon: None,
            top_authors: 10,
            aggregation: Aggregation::Mean,
            top_terms: 20,
            anchors: Vec::new(),
            min_corr: textmine::tdm::DEFAULT_MIN_CORR,
            max_sparsity: 0.95,
            metric: Metric::Euclidean,
            linkage: Linkage::Complete,
            clusters: 2,
            topics: lda.topics,
            alpha: None,
            beta: lda.beta,
            iterations: lda.iterations,
            burn_in: lda.burn_in,
            average_samples: false,
            topic_terms: 10,
            seed: 42,
            output_dir: PathBuf::from("out"),
            record_timings: false,
        }
    }
}

impl PipelineConfig {
    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut cfg.input, &mut cfg.keywords, &mut cfg.positive_lexicon, &mut cfg.negative_lexicon]
            .into_iter()
            .flatten()
        {
            rebase(p);
        }
        rebase(&mut cfg.output_dir);
        Ok(cfg)
    }

    pub fn lda_config(&self) -> LdaConfig {
        let base = LdaConfig::new(self.topics);
        LdaConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta,
            iterations: self.iterations,
            burn_in: self.burn_in,
            average_samples: self.average_samples,
            seed: textmine::rng::stage_seed(self.seed, "lda"),
            ..base
        }
    }

    /// Inclusive date bounds; open ends become the extremes of the time line.
    pub fn date_range(&self) -> Result<(DateTime<Utc>, DateTime<Utc>), CliError> {
        let start = match &self.start_date {
            Some(s) => parse_bound(s, NaiveTime::MIN)?,
            None => DateTime::<Utc>::MIN_UTC,
        };
        let end_of_day = NaiveTime::from_hms_nano_opt(23, 59, 59, 999_999_999).expect("valid time");
        let end = match &self.end_date {
            Some(s) => parse_bound(s, end_of_day)?,
            None => DateTime::<Utc>::MAX_UTC,
        };
        if start > end {
            return Err(CliError::Config(format!("start_date {start} is after end_date {end}")));
        }
        Ok((start, end))
    }

    /// Checks every setting and referenced file before anything runs.
    pub fn validate(&self, needs_input: bool) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match &self.input {
            None if needs_input => return bad("no input file configured".into()),
            Some(p) if !p.is_file() => return bad(format!("input file {} does not exist", p.display())),
            _ => {}
        }
        if let Some(p) = &self.keywords {
            load_keyword_sets(p).map_err(|e| CliError::Config(format!("keywords: {e}")))?;
        }
        match (&self.positive_lexicon, &self.negative_lexicon) {
            (None, None) => {}
            (Some(p), Some(n)) => {
                for path in [p, n] {
                    if !path.is_file() {
                        return bad(format!("lexicon file {} does not exist", path.display()));
                    }
                }
            }
            _ => return bad("positive_lexicon and negative_lexicon must be set together".into()),
        }
        if self.stopword_languages.is_empty() {
            return bad("stopword_languages must name at least one language".into());
        }
        StopwordLists::bundled()
            .union(&self.stopword_languages)
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.date_range()?;
        if self.top_authors == 0 || self.top_terms == 0 || self.topic_terms == 0 {
            return bad("top_authors, top_terms and topic_terms must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.min_corr) {
            return bad(format!("min_corr must lie in [0, 1], got {}", self.min_corr));
        }
        if !(self.max_sparsity > 0.0 && self.max_sparsity <= 1.0) {
            return bad(format!("max_sparsity must lie in (0, 1], got {}", self.max_sparsity));
        }
        if self.clusters == 0 {
            return bad("clusters must be at least 1".into());
        }
        if self.linkage == Linkage::Ward && self.metric != Metric::Euclidean {
            return bad(format!("ward linkage requires the euclidean metric, not {}", self.metric));
        }
        self.lda_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}

fn parse_bound(s: &str, time: NaiveTime) -> Result<DateTime<Utc>, CliError> {
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_time(time).and_utc());
    }
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| CliError::Config(format!("date '{s}': {e}")))
}
