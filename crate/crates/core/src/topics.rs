//! LDA topic models fitted by collapsed Gibbs sampling, and the per-topic
//! polarity overlay.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::nlp::TokenStream;
use crate::rng::generator;
use crate::sentiment::{LabelCounts, PolarityResult};
use crate::tdm::csv_err;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Average estimates over post-burn-in sweeps instead of using the final state.
    pub average_samples: bool,
}

impl LdaConfig {
    /// Conventional defaults for `topics` topics: alpha = 50/K, beta = 0.01,
    /// 1000 sweeps with 200 of burn-in.
    pub fn new(topics: usize) -> Self {
        LdaConfig {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed: 0,
            average_samples: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.topics == 0 {
            return bad("number of topics must be at least 1".into());
        }
        if self.topics > u32::MAX as usize {
            return bad(format!("too many topics: {}", self.topics));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if self.burn_in >= self.iterations {
            return bad(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            ));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler state over documents of word ids `0..v`.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    ndk: Vec<u32>,
    nkw: Vec<u32>,
    nk: Vec<u32>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Draws every token's initial topic uniformly from the seeded generator.
    pub fn new(docs: Vec<Vec<u32>>, v: usize, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if let Some(&w) = docs.iter().flatten().find(|&&w| w as usize >= v) {
            return Err(Error::InvalidArgument(format!("word id {w} outside vocabulary of {v}")));
        }
        let k = cfg.topics;
        let mut rng = generator(cfg.seed);
        let mut s = GibbsSampler {
            k,
            v,
            alpha: cfg.alpha,
            beta: cfg.beta,
            ndk: vec![0; docs.len() * k],
            nkw: vec![0; k * v],
            nk: vec![0; k],
            z: Vec::with_capacity(docs.len()),
            docs: Vec::new(),
            rng: generator(0),
            weights: vec![0.0; k],
        };
        for (d, words) in docs.iter().enumerate() {
            let zd: Vec<u32> = words
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..k as u32);
                    s.add(d, w, t);
                    t
                })
                .collect();
            s.z.push(zd);
        }
        s.docs = docs;
        s.rng = rng;
        Ok(s)
    }

    fn add(&mut self, d: usize, w: u32, t: u32) {
        let t = t as usize;
        self.ndk[d * self.k + t] += 1;
        self.nkw[t * self.v + w as usize] += 1;
        self.nk[t] += 1;
    }

    fn remove(&mut self, d: usize, w: u32, t: u32) {
        let t = t as usize;
        self.ndk[d * self.k + t] -= 1;
        self.nkw[t * self.v + w as usize] -= 1;
        self.nk[t] -= 1;
    }

    /// Resamples every token once, in document then position order.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                self.remove(d, w, self.z[d][i]);
                let mut total = 0.0;
                for t in 0..k {
                    let p = (f64::from(self.ndk[d * k + t]) + self.alpha)
                        * (f64::from(self.nkw[t * v + w as usize]) + self.beta)
                        / (f64::from(self.nk[t]) + vbeta);
                    total += p;
                    self.weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let t = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1) as u32;
                self.z[d][i] = t;
                self.add(d, w, t);
            }
        }
        debug_assert_eq!(self.check_counts(), Ok(()));
    }

    /// Recounts from the assignments and compares with the running counts.
    pub fn check_counts(&self) -> std::result::Result<(), String> {
        let (k, v) = (self.k, self.v);
        let mut ndk = vec![0u32; self.docs.len() * k];
        let mut nkw = vec![0u32; k * v];
        let mut nk = vec![0u32; k];
        for (d, (words, zs)) in self.docs.iter().zip(&self.z).enumerate() {
            for (&w, &t) in words.iter().zip(zs) {
                ndk[d * k + t as usize] += 1;
                nkw[t as usize * v + w as usize] += 1;
                nk[t as usize] += 1;
            }
            let row: u32 = self.ndk[d * k..(d + 1) * k].iter().sum();
            if row as usize != words.len() {
                return Err(format!("doc {d}: topic counts sum to {row}, length {}", words.len()));
            }
        }
        for t in 0..k {
            let row: u32 = self.nkw[t * v..(t + 1) * v].iter().sum();
            if row != self.nk[t] {
                return Err(format!("topic {t}: word counts sum to {row}, total {}", self.nk[t]));
            }
        }
        if ndk != self.ndk || nkw != self.nkw || nk != self.nk {
            return Err("running counts differ from a recount of the assignments".into());
        }
        Ok(())
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn doc_topic_count(&self, d: usize, t: usize) -> u32 {
        self.ndk[d * self.k + t]
    }

    /// Topic-term estimates `(n_kw + beta) / (n_k + V beta)` from the current state.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.v as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let denom = f64::from(self.nk[t]) + vbeta;
                (0..self.v)
                    .map(|w| (f64::from(self.nkw[t * self.v + w]) + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// Document-topic estimates `(n_dk + alpha) / (n_d + K alpha)` from the current state.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        let kalpha = self.k as f64 * self.alpha;
        (0..self.docs.len())
            .map(|d| {
                let denom = self.docs[d].len() as f64 + kalpha;
                (0..self.k)
                    .map(|t| (f64::from(self.ndk[d * self.k + t]) + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    /// K × V topic-term probabilities.
    pub phi: Vec<Vec<f64>>,
    /// D × K document-topic probabilities.
    pub theta: Vec<Vec<f64>>,
    /// Topic of each token after the final sweep.
    pub assignments: Vec<Vec<usize>>,
    pub config: LdaConfig,
    pub vocabulary: Vec<String>,
    pub doc_ids: Vec<String>,
}

impl TopicModel {
    pub fn n_topics(&self) -> usize {
        self.phi.len()
    }

    /// Argmax of a document's theta row; ties go to the lowest topic.
    pub fn dominant_topic(&self, doc: usize) -> usize {
        let row = &self.theta[doc];
        let mut best = 0;
        for t in 1..row.len() {
            if row[t] > row[best] {
                best = t;
            }
        }
        best
    }
}

pub fn fit_lda(streams: &[TokenStream], cfg: &LdaConfig) -> Result<TopicModel> {
    cfg.validate()?;
    let total: usize = streams.iter().map(TokenStream::len).sum();
    if total == 0 {
        return Err(Error::InsufficientData("all documents are empty".into()));
    }
    if cfg.topics > total {
        return Err(Error::InvalidArgument(format!(
            "{} topics exceed the {total} tokens in the corpus",
            cfg.topics
        )));
    }
    let vocab: BTreeSet<&str> = streams.iter().flat_map(|s| s.tokens.iter().map(String::as_str)).collect();
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, &w)| (w, i as u32)).collect();
    let docs: Vec<Vec<u32>> = streams
        .iter()
        .map(|s| s.tokens.iter().map(|t| index[t.as_str()]).collect())
        .collect();

    let mut sampler = GibbsSampler::new(docs, vocab.len(), cfg)?;
    type Matrices = (Vec<Vec<f64>>, Vec<Vec<f64>>);
    let mut sums: Option<Matrices> = None;
    let mut kept = 0usize;
    for it in 0..cfg.iterations {
        sampler.sweep();
        if cfg.average_samples && it >= cfg.burn_in {
            let (phi, theta) = (sampler.phi(), sampler.theta());
            match &mut sums {
                None => sums = Some((phi, theta)),
                Some((sp, st)) => {
                    add_into(sp, &phi);
                    add_into(st, &theta);
                }
            }
            kept += 1;
        }
    }
    let (phi, theta) = match sums {
        Some((mut sp, mut st)) => {
            scale(&mut sp, kept);
            scale(&mut st, kept);
            (sp, st)
        }
        None => (sampler.phi(), sampler.theta()),
    };
    Ok(TopicModel {
        phi,
        theta,
        assignments: sampler
            .assignments()
            .iter()
            .map(|zs| zs.iter().map(|&t| t as usize).collect())
            .collect(),
        config: cfg.clone(),
        vocabulary: vocab.into_iter().map(str::to_owned).collect(),
        doc_ids: streams.iter().map(|s| s.post_id.clone()).collect(),
    })
}

fn add_into(acc: &mut [Vec<f64>], x: &[Vec<f64>]) {
    for (a, b) in acc.iter_mut().zip(x) {
        for (p, q) in a.iter_mut().zip(b) {
            *p += q;
        }
    }
}

fn scale(acc: &mut [Vec<f64>], n: usize) {
    for row in acc {
        for p in row {
            *p /= n as f64;
        }
    }
}

/// Fits one independent chain per seed. Chains share nothing, so they run in
/// parallel when `exec` allows; results come back in seed order.
pub fn fit_lda_chains(streams: &[TokenStream], cfg: &LdaConfig, seeds: &[u64], exec: Exec) -> Result<Vec<TopicModel>> {
    exec.map(seeds, |&s| fit_lda(streams, &cfg.clone().with_seed(s)))
        .into_iter()
        .collect()
}

/// Top `n` terms of a topic by probability, ties in lexicographic order.
pub fn top_terms(m: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    if topic >= m.n_topics() {
        return Err(Error::InvalidArgument(format!(
            "topic {topic} out of range for {} topics",
            m.n_topics()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut terms: Vec<(String, f64)> = m
        .vocabulary
        .iter()
        .cloned()
        .zip(m.phi[topic].iter().copied())
        .collect();
    terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(n);
    Ok(terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicPolaritySummary {
    pub topic: usize,
    pub doc_count: usize,
    pub mean_score: f64,
    pub labels: LabelCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicPolarity {
    pub topics: Vec<TopicPolaritySummary>,
}

/// Assigns each document to its dominant topic and aggregates polarity per
/// topic. Topics without documents report a mean of 0.
pub fn topic_polarity(m: &TopicModel, polarities: &[PolarityResult]) -> Result<TopicPolarity> {
    let by_id: HashMap<&str, &PolarityResult> = polarities.iter().map(|p| (p.post_id.as_str(), p)).collect();
    let k = m.n_topics();
    let mut sums = vec![0i64; k];
    let mut topics: Vec<TopicPolaritySummary> = (0..k)
        .map(|topic| TopicPolaritySummary {
            topic,
            doc_count: 0,
            mean_score: 0.0,
            labels: LabelCounts::default(),
        })
        .collect();
    for (d, id) in m.doc_ids.iter().enumerate() {
        let p = by_id
            .get(id.as_str())
            .ok_or_else(|| Error::Validation(format!("no polarity result for document '{id}'")))?;
        let t = m.dominant_topic(d);
        sums[t] += p.score;
        topics[t].doc_count += 1;
        topics[t].labels.add(p.label);
    }
    for (s, sum) in topics.iter_mut().zip(sums) {
        if s.doc_count > 0 {
            s.mean_score = sum as f64 / s.doc_count as f64;
        }
    }
    Ok(TopicPolarity { topics })
}

fn finish<W: Write>(mut out: csv::Writer<W>) -> Result<()> {
    out.flush().map_err(|e| Error::Validation(e.to_string()))
}

/// Topic-term matrix with a `topic,<term>...` header row.
pub fn write_phi<W: Write>(m: &TopicModel, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(std::iter::once("topic").chain(m.vocabulary.iter().map(String::as_str)))
        .map_err(csv_err)?;
    for (t, row) in m.phi.iter().enumerate() {
        out.write_record(std::iter::once(t.to_string()).chain(row.iter().map(f64::to_string)))
            .map_err(csv_err)?;
    }
    finish(out)
}

/// Document-topic matrix with a `doc_id,topic_0,...` header row.
pub fn write_theta<W: Write>(m: &TopicModel, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = std::iter::once("doc_id".to_string())
        .chain((0..m.n_topics()).map(|t| format!("topic_{t}")))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    for (id, row) in m.doc_ids.iter().zip(&m.theta) {
        out.write_record(std::iter::once(id.clone()).chain(row.iter().map(f64::to_string)))
            .map_err(csv_err)?;
    }
    finish(out)
}

/// `topic,term,probability` rows for the top `n` terms of every topic.
pub fn write_topic_terms<W: Write>(m: &TopicModel, n: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["topic", "term", "probability"]).map_err(csv_err)?;
    for t in 0..m.n_topics() {
        for (term, p) in top_terms(m, t, n)? {
            out.write_record([t.to_string(), term, format!("{p:.6}")]).map_err(csv_err)?;
        }
    }
    finish(out)
}

pub fn write_topic_polarity<W: Write>(tp: &TopicPolarity, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["topic", "doc_count", "mean_score", "pos", "neg", "neutral"])
        .map_err(csv_err)?;
    for s in &tp.topics {
        out.write_record([
            s.topic.to_string(),
            s.doc_count.to_string(),
            format!("{:.6}", s.mean_score),
            s.labels.positive.to_string(),
            s.labels.negative.to_string(),
            s.labels.neutral.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(out)
}

/// Final-sweep token assignments as `doc_id,position,term,topic`.
pub fn write_assignments<W: Write>(m: &TopicModel, streams: &[TokenStream], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["doc_id", "position", "term", "topic"]).map_err(csv_err)?;
    for (s, zs) in streams.iter().zip(&m.assignments) {
        for (i, (term, t)) in s.tokens.iter().zip(zs).enumerate() {
            out.write_record([s.post_id.as_str(), &i.to_string(), term, &t.to_string()])
                .map_err(csv_err)?;
        }
    }
    finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::Label;
    use proptest::prelude::*;

    fn doc(id: &str, toks: &[&str]) -> TokenStream {
        TokenStream::new(id, toks.iter().map(|s| s.to_string()).collect())
    }

    fn quick(k: usize, iterations: usize) -> LdaConfig {
        LdaConfig {
            iterations,
            burn_in: 0,
            ..LdaConfig::new(k)
        }
    }

    fn pol(id: &str, score: i64) -> PolarityResult {
        PolarityResult {
            post_id: id.into(),
            positive_hits: score.max(0) as u64,
            negative_hits: (-score).max(0) as u64,
            score,
            label: Label::from_score(score),
        }
    }

    #[test]
    fn config_validation() {
        assert!(LdaConfig::new(3).validate().is_ok());
        assert_eq!(LdaConfig::new(4).alpha, 12.5);
        assert!(LdaConfig::new(0).validate().is_err());
        assert!(LdaConfig { alpha: 0.0, ..LdaConfig::new(2) }.validate().is_err());
        assert!(LdaConfig { beta: f64::NAN, ..LdaConfig::new(2) }.validate().is_err());
        assert!(LdaConfig { burn_in: 1000, ..LdaConfig::new(2) }.validate().is_err());
        assert!(LdaConfig { iterations: 0, burn_in: 0, ..LdaConfig::new(2) }.validate().is_err());
    }

    #[test]
    fn input_errors() {
        let empty = [doc("a", &[]), doc("b", &[])];
        assert!(matches!(fit_lda(&empty, &quick(1, 5)), Err(Error::InsufficientData(_))));
        let tiny = [doc("a", &["x", "y"])];
        assert!(matches!(fit_lda(&tiny, &quick(3, 5)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_topic_is_degenerate() {
        let streams = [doc("a", &["a", "a", "b"]), doc("b", &[]), doc("c", &["c"])];
        let m = fit_lda(&streams, &LdaConfig { alpha: 0.5, ..quick(1, 10) }).unwrap();
        for row in &m.theta {
            assert!((row[0] - 1.0).abs() <= 1e-15);
        }
        let beta = 0.01;
        let denom = 4.0 + 3.0 * beta;
        let expected = [(2.0 + beta) / denom, (1.0 + beta) / denom, (1.0 + beta) / denom];
        for (p, e) in m.phi[0].iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(top_terms(&m, 0, 1).unwrap()[0].0, "a");
        let all = top_terms(&m, 0, 10).unwrap();
        assert_eq!(
            all.iter().map(|t| t.0.as_str()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
        assert!(top_terms(&m, 1, 1).is_err());
        assert!(top_terms(&m, 0, 0).is_err());
    }

    #[test]
    fn seed_determinism() {
        let streams = [doc("a", &["x", "y", "x", "z"]), doc("b", &["z", "w", "w"])];
        let cfg = quick(2, 50).with_seed(9);
        let a = fit_lda(&streams, &cfg).unwrap();
        let b = fit_lda(&streams, &cfg).unwrap();
        assert_eq!(a, b);
        let render = |m: &TopicModel| {
            let mut buf = Vec::new();
            write_phi(m, &mut buf).unwrap();
            write_theta(m, &mut buf).unwrap();
            write_assignments(m, &streams, &mut buf).unwrap();
            buf
        };
        assert_eq!(render(&a), render(&b));
        let chains = fit_lda_chains(&streams, &cfg, &[9, 10], Exec::Parallel).unwrap();
        assert_eq!(chains[0], a);
        assert_eq!(fit_lda_chains(&streams, &cfg, &[9, 10], Exec::Sequential).unwrap(), chains);
    }

    #[test]
    fn averaged_estimates_are_normalized() {
        let streams = [doc("a", &["x", "y", "x", "z"]), doc("b", &["z", "w", "w"])];
        let cfg = LdaConfig { average_samples: true, burn_in: 10, ..quick(3, 40) };
        let m = fit_lda(&streams, &cfg).unwrap();
        for row in m.phi.iter().chain(&m.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    // lgamma for positive arguments via the Lanczos approximation (g = 7, n = 9)
    fn ln_gamma(x: f64) -> f64 {
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if x < 0.5 {
            return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
        }
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + 7.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }

    /// Exact posterior probability, by enumerating every assignment, that
    /// every document has all of its tokens in one topic.
    fn enumerated_purity(docs: &[Vec<u32>], v: usize, k: usize, alpha: f64, beta: f64) -> f64 {
        let tokens: Vec<(usize, u32)> = docs
            .iter()
            .enumerate()
            .flat_map(|(d, ws)| ws.iter().map(move |&w| (d, w)))
            .collect();
        let n = tokens.len();
        let states = k.pow(n as u32);
        let mut weights = Vec::with_capacity(states);
        let mut pure = Vec::with_capacity(states);
        for code in 0..states {
            let mut c = code;
            let mut ndk = vec![0usize; docs.len() * k];
            let mut nkw = vec![0usize; k * v];
            let mut nk = vec![0usize; k];
            for &(d, w) in &tokens {
                let t = c % k;
                c /= k;
                ndk[d * k + t] += 1;
                nkw[t * v + w as usize] += 1;
                nk[t] += 1;
            }
            let mut lp = 0.0;
            for d in 0..docs.len() {
                for t in 0..k {
                    lp += ln_gamma(ndk[d * k + t] as f64 + alpha);
                }
            }
            for t in 0..k {
                for w in 0..v {
                    lp += ln_gamma(nkw[t * v + w] as f64 + beta);
                }
                lp -= ln_gamma(nk[t] as f64 + v as f64 * beta);
            }
            weights.push(lp);
            pure.push((0..docs.len()).all(|d| (0..k).any(|t| ndk[d * k + t] == docs[d].len())));
        }
        let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = weights.iter().map(|lp| (lp - max).exp()).sum();
        weights
            .iter()
            .zip(&pure)
            .filter(|(_, &p)| p)
            .map(|(lp, _)| (lp - max).exp())
            .sum::<f64>()
            / total
    }

    #[test]
    fn sampler_matches_enumerated_posterior() {
        let docs = vec![vec![0, 1, 0, 1], vec![2, 3, 2, 3]];
        let cfg = LdaConfig { alpha: 0.1, beta: 0.1, ..quick(2, 1) }.with_seed(3);
        let exact = enumerated_purity(&docs, 4, 2, 0.1, 0.1);
        assert!(exact > 0.9, "exact purity {exact}");

        let mut s = GibbsSampler::new(docs.clone(), 4, &cfg).unwrap();
        let (burn, sweeps) = (200, 40_000);
        let mut hits = 0usize;
        for i in 0..burn + sweeps {
            s.sweep();
            if i >= burn && (0..2).all(|d| (0..2).any(|t| s.doc_topic_count(d, t) == 4)) {
                hits += 1;
            }
        }
        let estimate = hits as f64 / sweeps as f64;
        assert!((estimate - exact).abs() < 0.02, "sampler {estimate} vs exact {exact}");
    }

    #[test]
    fn disjoint_documents_separate() {
        let streams = [doc("a", &["a", "b", "a", "b"]), doc("b", &["c", "d", "c", "d"])];
        let cfg = LdaConfig { alpha: 0.1, beta: 0.1, ..quick(2, 500) }.with_seed(1);
        let m = fit_lda(&streams, &cfg).unwrap();
        for row in &m.theta {
            assert!(row.iter().copied().fold(0.0, f64::max) > 0.9, "{row:?}");
        }
        assert_ne!(m.dominant_topic(0), m.dominant_topic(1));
    }

    #[test]
    fn polarity_overlay() {
        let m = TopicModel {
            phi: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            theta: vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.3, 0.7], vec![0.5, 0.5]],
            assignments: vec![vec![]; 4],
            config: quick(2, 1),
            vocabulary: vec!["x".into(), "y".into()],
            doc_ids: vec!["a".into(), "b".into(), "c".into(), "d".into()],
        };
        let tp = topic_polarity(&m, &[pol("a", 1), pol("b", 1), pol("c", -1), pol("d", -1)]).unwrap();
        assert_eq!(tp.topics[0].doc_count, 3);
        assert!((tp.topics[0].mean_score - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tp.topics[1].mean_score, -1.0);
        let mut buf = Vec::new();
        write_topic_polarity(&tp, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "topic,doc_count,mean_score,pos,neg,neutral\n0,3,0.333333,2,1,0\n1,1,-1.000000,0,1,0\n"
        );
        let clean = topic_polarity(&m, &[pol("a", 1), pol("b", 1), pol("c", -1), pol("d", 0)]).unwrap();
        assert_eq!(clean.topics[1].mean_score, -1.0);
        assert!(matches!(
            topic_polarity(&m, &[pol("a", 1)]),
            Err(Error::Validation(_))
        ));
        let neutral = topic_polarity(&m, &["a", "b", "c", "d"].map(|i| pol(i, 0))).unwrap();
        assert!(neutral.topics.iter().all(|t| t.mean_score == 0.0));
    }

    #[test]
    fn single_topic_overlay_is_corpus_mean() {
        let streams = [doc("a", &["x"]), doc("b", &["y", "x"]), doc("c", &["z"])];
        let m = fit_lda(&streams, &quick(1, 3)).unwrap();
        let tp = topic_polarity(&m, &[pol("a", 2), pol("b", -1), pol("c", 5)]).unwrap();
        assert_eq!(tp.topics.len(), 1);
        assert_eq!(tp.topics[0].doc_count, 3);
        assert_eq!(tp.topics[0].mean_score, 2.0);
    }

    #[test]
    fn report_headers() {
        let streams = [doc("a", &["x", "y"])];
        let m = fit_lda(&streams, &quick(2, 2)).unwrap();
        let mut buf = Vec::new();
        write_phi(&m, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("topic,x,y\n0,"));
        let mut buf = Vec::new();
        write_theta(&m, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("doc_id,topic_0,topic_1\na,"));
        let mut buf = Vec::new();
        write_topic_terms(&m, 1, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn estimates_normalized_and_counts_conserved(
            docs in prop::collection::vec(prop::collection::vec(0u32..6, 0..12), 1..8),
            k in 1usize..5,
            seed in any::<u64>(),
        ) {
            let total: usize = docs.iter().map(Vec::len).sum();
            prop_assume!(total >= k);
            let cfg = quick(k, 5).with_seed(seed);
            let mut s = GibbsSampler::new(docs.clone(), 6, &cfg).unwrap();
            prop_assert_eq!(s.check_counts(), Ok(()));
            for _ in 0..5 {
                s.sweep();
                prop_assert_eq!(s.check_counts(), Ok(()));
            }
            for row in s.phi().iter().chain(&s.theta()) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&p| p > 0.0));
            }
        }
    }
}
