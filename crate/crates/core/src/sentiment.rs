//! Lexicon-based polarity of token streams.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::nlp::{fold, parse_word_list, TokenStream};
use crate::tdm::csv_err;

const BUNDLED_POSITIVE: &str = include_str!("../data/lexicon/positive-words.txt");
const BUNDLED_NEGATIVE: &str = include_str!("../data/lexicon/negative-words.txt");

/// Disjoint sets of positive and negative opinion words, folded like corpus tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl SentimentLexicon {
    /// Builds a lexicon, folding and de-duplicating entries. A word present
    /// in both lists is a validation error naming every offender.
    pub fn from_words<P, N, S, T>(positive: P, negative: N) -> Result<Self>
    where
        P: IntoIterator<Item = S>,
        N: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let fold_all = |words: Vec<String>| -> HashSet<String> {
            words.into_iter().map(|w| fold(w.trim())).filter(|w| !w.is_empty()).collect()
        };
        let positive = fold_all(positive.into_iter().map(|w| w.as_ref().to_owned()).collect());
        let negative = fold_all(negative.into_iter().map(|w| w.as_ref().to_owned()).collect());
        let overlap: BTreeSet<&String> = positive.intersection(&negative).collect();
        if !overlap.is_empty() {
            let list: Vec<&str> = overlap.iter().map(|s| s.as_str()).collect();
            return Err(Error::Validation(format!(
                "lexicon lists overlap in {} word(s): {}",
                list.len(),
                list.join(", ")
            )));
        }
        Ok(SentimentLexicon { positive, negative })
    }

    /// The opinion lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_POSITIVE, BUNDLED_NEGATIVE).expect("bundled lexicon is disjoint")
    }

    /// Parses lexicon file contents: one word per line, `;` lines are comments.
    pub fn parse(positive: &str, negative: &str) -> Result<Self> {
        Self::from_words(parse_word_list(positive, ';'), parse_word_list(negative, ';'))
    }

    pub fn positive(&self) -> &HashSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &HashSet<String> {
        &self.negative
    }

    /// `(positive, negative)` entry counts.
    pub fn counts(&self) -> (usize, usize) {
        (self.positive.len(), self.negative.len())
    }

    /// The same lexicon with the two lists exchanged.
    pub fn swapped(&self) -> Self {
        SentimentLexicon {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

pub fn load_lexicon(pos_path: impl AsRef<Path>, neg_path: impl AsRef<Path>) -> Result<SentimentLexicon> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let pos = read(pos_path.as_ref())?;
    let neg = read(neg_path.as_ref())?;
    SentimentLexicon::parse(&pos, &neg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    Neutral,
}

impl Label {
    pub fn from_score(score: i64) -> Self {
        match score.signum() {
            1 => Label::Positive,
            -1 => Label::Negative,
            _ => Label::Neutral,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            "neutral" => Ok(Label::Neutral),
            other => Err(Error::InvalidArgument(format!("unknown polarity label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityResult {
    pub post_id: String,
    pub positive_hits: u64,
    pub negative_hits: u64,
    pub score: i64,
    pub label: Label,
}

/// Counts lexicon hits with multiplicity. Tokens are expected to be normalized.
pub fn polarity(tokens: &TokenStream, lex: &SentimentLexicon) -> PolarityResult {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for t in &tokens.tokens {
        if lex.positive.contains(t) {
            pos += 1;
        } else if lex.negative.contains(t) {
            neg += 1;
        }
    }
    let score = pos as i64 - neg as i64;
    PolarityResult {
        post_id: tokens.post_id.clone(),
        positive_hits: pos,
        negative_hits: neg,
        score,
        label: Label::from_score(score),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl LabelCounts {
    pub fn add(&mut self, label: Label) {
        match label {
            Label::Positive => self.positive += 1,
            Label::Negative => self.negative += 1,
            Label::Neutral => self.neutral += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPolarity {
    pub results: Vec<PolarityResult>,
    pub distribution: LabelCounts,
}

pub fn corpus_polarity(streams: &[TokenStream], lex: &SentimentLexicon) -> CorpusPolarity {
    corpus_polarity_with(streams, lex, Exec::default())
}

pub fn corpus_polarity_with(streams: &[TokenStream], lex: &SentimentLexicon, exec: Exec) -> CorpusPolarity {
    let results = exec.map(streams, |s| polarity(s, lex));
    let mut distribution = LabelCounts::default();
    for r in &results {
        distribution.add(r.label);
    }
    CorpusPolarity { results, distribution }
}

const HEADER: [&str; 5] = ["post_id", "pos_hits", "neg_hits", "score", "label"];

pub fn write_polarity<W: Write>(results: &[PolarityResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER).map_err(csv_err)?;
    for r in results {
        out.write_record([
            r.post_id.clone(),
            r.positive_hits.to_string(),
            r.negative_hits.to_string(),
            r.score.to_string(),
            r.label.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(())
}

/// Reads a report produced by [`write_polarity`], checking each row's consistency.
pub fn read_polarity<R: Read>(r: R) -> Result<Vec<PolarityResult>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if header.iter().ne(HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let bad = |message: String| Error::Parse { line, message };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", HEADER.len(), rec.len())));
        }
        let num = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("{}: {e}", HEADER[i])));
        let positive_hits = num(1)?;
        let negative_hits = num(2)?;
        let score: i64 = rec[3].parse().map_err(|e| bad(format!("score: {e}")))?;
        let label: Label = rec[4].parse().map_err(|e: Error| bad(e.to_string()))?;
        if score != positive_hits as i64 - negative_hits as i64 || label != Label::from_score(score) {
            return Err(bad("score or label inconsistent with hit counts".into()));
        }
        out.push(PolarityResult {
            post_id: rec[0].to_owned(),
            positive_hits,
            negative_hits,
            score,
            label,
        });
    }
    Ok(out)
}
