//! Sparse term-document matrix with raw term-frequency counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::nlp::TokenStream;

/// Default correlation threshold for association reports.
pub const DEFAULT_MIN_CORR: f64 = 0.25;

/// Terms × documents, stored row-wise. Each row lists `(doc index, count)`
/// pairs in increasing doc order; zero counts are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDocumentMatrix {
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    rows: Vec<Vec<(u32, u32)>>,
}

impl TermDocumentMatrix {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
    }

    /// Stored `(doc index, count)` entries of one term.
    pub fn row(&self, term: usize) -> &[(u32, u32)] {
        &self.rows[term]
    }

    pub fn dense_row(&self, term: usize) -> Vec<u32> {
        let mut out = vec![0; self.n_docs()];
        for &(d, c) in &self.rows[term] {
            out[d as usize] = c;
        }
        out
    }

    pub fn get(&self, term: usize, doc: usize) -> u32 {
        let row = &self.rows[term];
        row.binary_search_by_key(&(doc as u32), |e| e.0)
            .map_or(0, |i| row[i].1)
    }

    pub fn term_total(&self, term: usize) -> u64 {
        self.rows[term].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn doc_frequency(&self, term: usize) -> usize {
        self.rows[term].len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Sum of all stored counts.
    pub fn total_count(&self) -> u64 {
        (0..self.n_terms()).map(|t| self.term_total(t)).sum()
    }

    /// Coordinate export: `term,doc_id,count` sorted by term then doc id.
    pub fn write_coordinates<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["term", "doc_id", "count"]).map_err(csv_err)?;
        for (t, term) in self.vocabulary.iter().enumerate() {
            let mut entries: Vec<(&str, u32)> = self.rows[t]
                .iter()
                .map(|&(d, c)| (self.doc_ids[d as usize].as_str(), c))
                .collect();
            entries.sort_unstable();
            for (doc, c) in entries {
                out.write_record([term.as_str(), doc, &c.to_string()])
                    .map_err(csv_err)?;
            }
        }
        out.flush().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv output: {e}"))
}

pub fn build_tdm(streams: &[TokenStream]) -> Result<TermDocumentMatrix> {
    build_tdm_with(streams, Exec::default())
}

/// Counts terms per document (in parallel when allowed) and merges in
/// document order, so the result does not depend on `exec`.
pub fn build_tdm_with(streams: &[TokenStream], exec: Exec) -> Result<TermDocumentMatrix> {
    let mut seen = HashSet::with_capacity(streams.len());
    for s in streams {
        if !seen.insert(s.post_id.as_str()) {
            return Err(Error::Validation(format!(
                "duplicate document id '{}'",
                s.post_id
            )));
        }
    }

    let per_doc: Vec<BTreeMap<&str, u32>> = exec.map(streams, |s| {
        let mut counts = BTreeMap::new();
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        counts
    });

    let vocab: BTreeSet<&str> = per_doc.iter().flat_map(|m| m.keys().copied()).collect();
    let vocabulary: Vec<String> = vocab.iter().map(|s| (*s).to_owned()).collect();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (*t, i)).collect();

    let mut rows = vec![Vec::new(); vocabulary.len()];
    for (d, counts) in per_doc.iter().enumerate() {
        for (term, &c) in counts {
            rows[index[term]].push((d as u32, c));
        }
    }

    let m = TermDocumentMatrix {
        vocabulary,
        doc_ids: streams.iter().map(|s| s.post_id.clone()).collect(),
        rows,
    };
    debug_assert_eq!(
        m.total_count(),
        streams.iter().map(|s| s.tokens.len() as u64).sum::<u64>()
    );
    Ok(m)
}

/// Top `n` terms by corpus-wide count; ties go to the lexicographically smaller term.
pub fn term_frequencies(m: &TermDocumentMatrix, n: usize) -> Vec<(String, u64)> {
    let mut all: Vec<(String, u64)> = (0..m.n_terms())
        .map(|t| (m.vocabulary[t].clone(), m.term_total(t)))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(n);
    all
}

pub fn write_frequencies<W: Write>(freqs: &[(String, u64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "term", "count"]).map_err(csv_err)?;
    for (i, (term, c)) in freqs.iter().enumerate() {
        out.write_record([(i + 1).to_string(), term.clone(), c.to_string()])
            .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(())
}

/// Pearson correlation of two terms' count vectors over all documents,
/// or `None` when either vector is constant.
///
/// Sums are accumulated exactly in integers; only the final ratio is rounded.
pub fn pearson(m: &TermDocumentMatrix, a: usize, b: usize) -> Option<f64> {
    let n = m.n_docs() as i128;
    let (ra, rb) = (m.row(a), m.row(b));
    let moments = |row: &[(u32, u32)]| {
        row.iter().fold((0i128, 0i128), |(s, ss), &(_, c)| {
            let c = i128::from(c);
            (s + c, ss + c * c)
        })
    };
    let (sa, saa) = moments(ra);
    let (sb, sbb) = moments(rb);

    let mut sab = 0i128;
    let (mut i, mut j) = (0, 0);
    while i < ra.len() && j < rb.len() {
        match ra[i].0.cmp(&rb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sab += i128::from(ra[i].1) * i128::from(rb[j].1);
                i += 1;
                j += 1;
            }
        }
    }

    let va = n * saa - sa * sa;
    let vb = n * sbb - sb * sb;
    if va <= 0 || vb <= 0 {
        return None;
    }
    let cov = n * sab - sa * sb;
    let r = cov as f64 / ((va * vb) as f64).sqrt();
    Some(r.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationList {
    pub anchor: String,
    /// `(term, correlation)`, descending by correlation then ascending by term.
    pub entries: Vec<(String, f64)>,
}

pub fn associations(
    m: &TermDocumentMatrix,
    anchor: &str,
    min_corr: f64,
) -> Result<AssociationList> {
    associations_with(m, anchor, min_corr, Exec::default())
}

pub fn associations_with(
    m: &TermDocumentMatrix,
    anchor: &str,
    min_corr: f64,
    exec: Exec,
) -> Result<AssociationList> {
    if !(0.0..=1.0).contains(&min_corr) {
        return Err(Error::InvalidArgument(format!(
            "min_corr must lie in [0, 1], got {min_corr}"
        )));
    }
    let a = m
        .term_index(anchor)
        .ok_or_else(|| Error::NotFound(format!("term '{anchor}' is not in the vocabulary")))?;
    if m.n_docs() < 2 {
        return Err(Error::InsufficientData(format!(
            "associations need at least 2 documents, matrix has {}",
            m.n_docs()
        )));
    }
    let corr = exec.map_range(m.n_terms(), |t| if t == a { None } else { pearson(m, a, t) });
    let mut entries: Vec<(String, f64)> = corr
        .into_iter()
        .enumerate()
        .filter_map(|(t, r)| r.filter(|&r| r >= min_corr).map(|r| (m.vocabulary[t].clone(), r)))
        .collect();
    entries.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    Ok(AssociationList {
        anchor: anchor.to_owned(),
        entries,
    })
}

/// Writes `anchor,term,correlation` rows (6 decimals) for each list in turn.
pub fn write_associations<W: Write>(lists: &[AssociationList], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["anchor", "term", "correlation"]).map_err(csv_err)?;
    for list in lists {
        for (term, r) in &list.entries {
            out.write_record([list.anchor.as_str(), term, &format!("{r:.6}")])
                .map_err(csv_err)?;
        }
    }
    out.flush().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(())
}

/// Keeps terms present in at least `1 - max_sparsity` of the documents.
/// Document columns are left untouched.
pub fn remove_sparse_terms(m: &TermDocumentMatrix, max_sparsity: f64) -> Result<TermDocumentMatrix> {
    if !(max_sparsity > 0.0 && max_sparsity <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "max_sparsity must lie in (0, 1], got {max_sparsity}"
        )));
    }
    let n = m.n_docs() as f64;
    let min_fraction = 1.0 - max_sparsity;
    let keep: Vec<usize> = (0..m.n_terms())
        .filter(|&t| n == 0.0 || m.doc_frequency(t) as f64 / n >= min_fraction)
        .collect();
    Ok(TermDocumentMatrix {
        vocabulary: keep.iter().map(|&t| m.vocabulary[t].clone()).collect(),
        doc_ids: m.doc_ids.clone(),
        rows: keep.iter().map(|&t| m.rows[t].clone()).collect(),
    })
}
