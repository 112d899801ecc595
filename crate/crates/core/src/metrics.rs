//! Engagement weighting, the per-post influence indicator, and author rankings.
//!
//! All arithmetic is exact. Decimal rendering happens only in [`format_fixed`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Post};
use crate::error::{Error, Result};

/// Digits after the decimal point in score tables.
pub const SCORE_DECIMALS: u32 = 8;

/// `favorites + 2 * retweets`.
pub fn weighting(p: &Post) -> u128 {
    u128::from(p.favorites) + 2 * u128::from(p.retweets)
}

/// `weighting / followers`; undefined when the author has no followers.
pub fn indicator(p: &Post) -> Result<BigRational> {
    if p.followers == 0 {
        return Err(Error::UndefinedIndicator {
            post_id: p.id.clone(),
        });
    }
    Ok(BigRational::new(
        BigInt::from(weighting(p)),
        BigInt::from(p.followers),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceRecord {
    pub post_id: String,
    pub author: String,
    pub weighting: u128,
    pub indicator: BigRational,
}

impl InfluenceRecord {
    pub fn from_post(p: &Post) -> Result<Self> {
        Ok(InfluenceRecord {
            post_id: p.id.clone(),
            author: p.author.clone(),
            weighting: weighting(p),
            indicator: indicator(p)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
    Sum,
}

impl Aggregation {
    /// Aggregates a non-empty list of indicators.
    pub fn apply(self, values: &[BigRational]) -> BigRational {
        match self {
            Aggregation::Sum => values.iter().fold(BigRational::zero(), |a, b| a + b),
            Aggregation::Mean => {
                let sum = values.iter().fold(BigRational::zero(), |a, b| a + b);
                sum / BigInt::from(values.len())
            }
            Aggregation::Max => values.iter().max().cloned().unwrap_or_else(BigRational::zero),
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            "sum" => Ok(Aggregation::Sum),
            other => Err(Error::InvalidArgument(format!("unknown aggregation '{other}'"))),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
            Aggregation::Sum => "sum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorScore {
    pub author: String,
    pub score: BigRational,
    pub post_count: usize,
    pub aggregation: Aggregation,
}

/// Ranked authors plus the posts that were left out because `followers == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub authors: Vec<AuthorScore>,
    pub skipped: Vec<String>,
}

/// Top `n` authors by aggregated indicator: score descending, then handle ascending.
pub fn rank_influencers(c: &Corpus, n: usize, aggregation: Aggregation) -> Result<Ranking> {
    if n == 0 {
        return Err(Error::InvalidArgument("ranking size must be positive".into()));
    }
    if c.is_empty() {
        return Err(Error::InsufficientData("cannot rank an empty corpus".into()));
    }
    let mut per_author: BTreeMap<&str, Vec<BigRational>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for p in c.posts() {
        match indicator(p) {
            Ok(v) => per_author.entry(p.author.as_str()).or_default().push(v),
            Err(_) => skipped.push(p.id.clone()),
        }
    }
    let mut authors: Vec<AuthorScore> = per_author
        .into_iter()
        .map(|(author, values)| AuthorScore {
            author: author.to_owned(),
            score: aggregation.apply(&values),
            post_count: values.len(),
            aggregation,
        })
        .collect();
    authors.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.author.cmp(&b.author)));
    authors.truncate(n);
    Ok(Ranking { authors, skipped })
}

/// Renders a rational with `decimals` places, rounding half away from zero.
pub fn format_fixed(value: &BigRational, decimals: u32) -> String {
    let scale = BigInt::from(10u32).pow(decimals);
    let scaled = value * BigRational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = r.abs() * 2u32;
    let mut q = q;
    if twice >= *scaled.denom() {
        if scaled.is_negative() {
            q -= 1;
        } else {
            q += 1;
        }
    }
    let negative = q.is_negative();
    let mag: BigUint = q.abs().to_biguint().unwrap_or_default();
    let digits = mag.to_string();
    let decimals = decimals as usize;
    let padded = format!("{digits:0>width$}", width = decimals + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - decimals);
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Writes `rank,author,score,post_count,aggregation`.
pub fn write_ranking<W: Write>(ranking: &Ranking, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Validation(format!("writing ranking: {e}"));
    out.write_record(["rank", "author", "score", "post_count", "aggregation"])
        .map_err(io)?;
    for (i, a) in ranking.authors.iter().enumerate() {
        out.write_record([
            (i + 1).to_string(),
            a.author.clone(),
            format_fixed(&a.score, SCORE_DECIMALS),
            a.post_count.to_string(),
            a.aggregation.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(|e| Error::Validation(format!("writing ranking: {e}")))?;
    Ok(())
}
