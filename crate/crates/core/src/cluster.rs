//! Hierarchical agglomerative clustering of terms.
//!
//! Node ids follow the usual convention: leaves are `0..n`, and the cluster
//! created by merge step `s` (0-based) is node `n + s`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::tdm::{csv_err, TermDocumentMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Cosine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    #[default]
    Complete,
    Average,
    Ward,
}

macro_rules! named_enum {
    ($ty:ident, $what:literal, $($var:ident => $name:literal),+) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$var),)+
                    other => Err(Error::InvalidArgument(format!(concat!("unknown ", $what, " '{}'"), other))),
                }
            }
        }
    };
}

named_enum!(Metric, "metric", Euclidean => "euclidean", Manhattan => "manhattan", Cosine => "cosine");
named_enum!(Linkage, "linkage", Single => "single", Complete => "complete", Average => "average", Ward => "ward");

/// Symmetric, non-negative, zero-diagonal distances between labeled items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
    metric: Option<Metric>,
}

impl DistanceMatrix {
    /// Validates a full square matrix given row by row. Asymmetries up to
    /// 1e-12 (relative) are tolerated and resolved toward the upper triangle.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("distance matrix must be {n} x {n}")));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::Validation(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Validation(format!("invalid distance {a} at ({i}, {j})")));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::Validation(format!("asymmetric distances at ({i}, {j})")));
                }
                data[i * n + j] = a;
                data[j * n + i] = a;
            }
        }
        Ok(DistanceMatrix { labels, data, metric: None })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.len() + j]
    }

    /// Metric the distances were computed with, if known.
    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }
}

pub fn distance_matrix(m: &TermDocumentMatrix, metric: Metric) -> Result<DistanceMatrix> {
    distance_matrix_with(m, metric, Exec::default())
}

/// Pairwise distances between term count vectors. Each unordered pair is
/// computed once and mirrored, so the result is exactly symmetric.
pub fn distance_matrix_with(m: &TermDocumentMatrix, metric: Metric, exec: Exec) -> Result<DistanceMatrix> {
    let n = m.n_terms();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "clustering needs at least 2 terms, matrix has {n}"
        )));
    }
    let dense: Vec<Vec<u32>> = exec.map_range(n, |t| m.dense_row(t));
    let upper: Vec<Vec<f64>> = exec.map_range(n, |i| {
        (i + 1..n).map(|j| pair_distance(&dense[i], &dense[j], metric)).collect()
    });
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix {
        labels: m.vocabulary().to_vec(),
        data,
        metric: Some(metric),
    })
}

// Integer accumulation keeps identical vectors at exactly zero distance.
fn pair_distance(a: &[u32], b: &[u32], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => {
            let s: u128 = a.iter().zip(b).map(|(&x, &y)| u128::from(x.abs_diff(y)).pow(2)).sum();
            (s as f64).sqrt()
        }
        Metric::Manhattan => a.iter().zip(b).map(|(&x, &y)| u64::from(x.abs_diff(y))).sum::<u64>() as f64,
        Metric::Cosine => {
            let (mut dot, mut na, mut nb) = (0u128, 0u128, 0u128);
            for (&x, &y) in a.iter().zip(b) {
                let (x, y) = (u128::from(x), u128::from(y));
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
            match (na, nb) {
                (0, 0) => 0.0,
                (0, _) | (_, 0) => 1.0,
                _ => (1.0 - dot as f64 / ((na as f64) * (nb as f64)).sqrt()).max(0.0),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    labels: Vec<String>,
    linkage: Linkage,
    merges: Vec<Merge>,
}

/// Lance–Williams agglomeration. At each step the pair with the smallest
/// current distance merges; ties go to the smallest `(i, j)` in the current
/// cluster order, where a merged cluster takes the place of its first member.
///
/// Ward uses squared distances internally (Ward.D2) and reports heights on
/// the original scale. It requires Euclidean input.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    if linkage == Linkage::Ward {
        if let Some(m) = d.metric.filter(|&m| m != Metric::Euclidean) {
            return Err(Error::InvalidArgument(format!(
                "ward linkage requires euclidean distances, got {m}"
            )));
        }
    }
    let n = d.len();
    let ward = linkage == Linkage::Ward;
    let mut dist: Vec<f64> = if ward {
        d.data.iter().map(|v| v * v).collect()
    } else {
        d.data.clone()
    };
    let mut size = vec![1usize; n];
    let mut node: Vec<usize> = (0..n).collect();
    let mut active = vec![true; n];

    const NONE: usize = usize::MAX;
    let scan = |dist: &[f64], active: &[bool], i: usize| {
        let mut best = (f64::INFINITY, NONE);
        for j in i + 1..n {
            if active[j] && (best.1 == NONE || dist[i * n + j] < best.0) {
                best = (dist[i * n + j], j);
            }
        }
        best
    };
    let mut nn: Vec<(f64, usize)> = (0..n).map(|i| scan(&dist, &active, i)).collect();

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut i = NONE;
        for k in 0..n {
            if active[k] && nn[k].1 != NONE && (i == NONE || nn[k].0 < nn[i].0) {
                i = k;
            }
        }
        let (h, j) = nn[i];
        merges.push(Merge {
            left: node[i],
            right: node[j],
            height: if ward { h.max(0.0).sqrt() } else { h },
            size: size[i] + size[j],
        });

        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let (dik, djk) = (dist[i * n + k], dist[j * n + k]);
            let nk = size[k] as f64;
            let v = match linkage {
                Linkage::Single => dik.min(djk),
                Linkage::Complete => dik.max(djk),
                Linkage::Average => (ni * dik + nj * djk) / (ni + nj),
                Linkage::Ward => ((ni + nk) * dik + (nj + nk) * djk - nk * h) / (ni + nj + nk),
            };
            dist[i * n + k] = v;
            dist[k * n + i] = v;
        }
        active[j] = false;
        size[i] += size[j];
        node[i] = n + step;

        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == i || nn[k].1 == i || nn[k].1 == j {
                nn[k] = scan(&dist, &active, k);
            } else if k < i {
                let v = dist[k * n + i];
                if v < nn[k].0 || (v == nn[k].0 && i < nn[k].1) {
                    nn[k] = (v, i);
                }
            }
        }
    }

    Ok(Dendrogram {
        labels: d.labels.clone(),
        linkage,
        merges,
    })
}

impl Dendrogram {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn linkage(&self) -> Linkage {
        self.linkage
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Flat clustering into `k` groups by undoing the last `k - 1` merges.
    /// Groups are labeled `1..=k` in order of their first leaf.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k < 1 || k > n {
            return Err(Error::InvalidArgument(format!(
                "cut needs 1 <= k <= {n}, got {k}"
            )));
        }
        // parent pointers over node ids, following only the kept merges
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        for (s, m) in self.merges.iter().take(n - k).enumerate() {
            parent[m.left] = n + s;
            parent[m.right] = n + s;
        }
        let root = |mut x: usize| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        };
        let mut label_of = std::collections::HashMap::new();
        Ok((0..n)
            .map(|leaf| {
                let next = label_of.len() + 1;
                *label_of.entry(root(leaf)).or_insert(next)
            })
            .collect())
    }

    /// Newick serialization with branch lengths (parent height minus child height).
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        if n == 0 {
            return ";".into();
        }
        let mut text: Vec<String> = self.labels.iter().map(|l| newick_label(l)).collect();
        let mut height = vec![0.0; n];
        for m in &self.merges {
            let l = std::mem::take(&mut text[m.left]);
            let r = std::mem::take(&mut text[m.right]);
            text.push(format!(
                "({l}:{:.6},{r}:{:.6})",
                m.height - height[m.left],
                m.height - height[m.right]
            ));
            height.push(m.height);
        }
        let mut out = text.pop().unwrap_or_default();
        out.push(';');
        out
    }

    /// Merge table `step,left,right,height` with 1-based steps and node ids.
    pub fn write_merge_table<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "left", "right", "height"]).map_err(csv_err)?;
        for (s, m) in self.merges.iter().enumerate() {
            out.write_record([
                (s + 1).to_string(),
                m.left.to_string(),
                m.right.to_string(),
                format!("{:.6}", m.height),
            ])
            .map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(())
    }

    /// Writes `term,cluster` rows for a flat cut.
    pub fn write_cut<W: Write>(&self, k: usize, w: W) -> Result<()> {
        let groups = self.cut(k)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["term", "cluster"]).map_err(csv_err)?;
        for (label, g) in self.labels.iter().zip(groups) {
            out.write_record([label.as_str(), &g.to_string()]).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(())
    }
}

fn newick_label(s: &str) -> String {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || "()[]':;,".contains(c)) {
        format!("'{}'", s.replace('\'', "''"))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::TokenStream;
    use crate::tdm::build_tdm;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn matrix(rows: Vec<Vec<f64>>) -> DistanceMatrix {
        DistanceMatrix::new(labels(rows.len()), rows).unwrap()
    }

    fn from_points(pts: &[[f64; 3]]) -> DistanceMatrix {
        let rows = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt())
                    .collect()
            })
            .collect();
        let mut d = matrix(rows);
        d.metric = Some(Metric::Euclidean);
        d
    }

    fn three_point() -> DistanceMatrix {
        matrix(vec![vec![0.0, 1.0, 10.0], vec![1.0, 0.0, 10.0], vec![10.0, 10.0, 0.0]])
    }

    fn tdm_from_rows(rows: &[Vec<u32>]) -> TermDocumentMatrix {
        let docs = rows[0].len();
        let streams: Vec<TokenStream> = (0..docs)
            .map(|d| {
                let toks = rows
                    .iter()
                    .enumerate()
                    .flat_map(|(t, r)| std::iter::repeat_n(format!("t{t}"), r[d] as usize))
                    .collect();
                TokenStream::new(format!("d{d}"), toks)
            })
            .collect();
        build_tdm(&streams).unwrap()
    }

    #[test]
    fn distance_examples() {
        let m = tdm_from_rows(&[vec![3, 0], vec![0, 4], vec![3, 0]]);
        let d = distance_matrix(&m, Metric::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(distance_matrix(&m, Metric::Manhattan).unwrap().get(0, 1), 7.0);
        let c = distance_matrix(&m, Metric::Cosine).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(0, 2), 0.0);
        let one = tdm_from_rows(&[vec![1, 2]]);
        assert!(matches!(
            distance_matrix(&one, Metric::Euclidean),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::new(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(labels(2), vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(labels(2), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(labels(2), vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn two_points_any_linkage() {
        let d = matrix(vec![vec![0.0, 7.0], vec![7.0, 0.0]]);
        for l in [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward] {
            let t = agglomerate(&d, l).unwrap();
            assert_eq!(t.merges().len(), 1);
            assert_eq!(t.merges()[0].height, 7.0);
        }
    }

    #[test]
    fn three_point_example() {
        for l in [Linkage::Single, Linkage::Complete] {
            let t = agglomerate(&three_point(), l).unwrap();
            let m = t.merges();
            assert_eq!((m[0].left, m[0].right, m[0].height), (0, 1, 1.0));
            assert_eq!((m[1].left, m[1].right, m[1].height), (3, 2, 10.0));
            assert_eq!(t.cut(2).unwrap(), vec![1, 1, 2]);
            assert_eq!(t.cut(1).unwrap(), vec![1, 1, 1]);
            assert_eq!(t.cut(3).unwrap(), vec![1, 2, 3]);
            assert!(t.cut(0).is_err());
            assert!(t.cut(4).is_err());
        }
    }

    #[test]
    fn ties_take_smallest_pair() {
        let d = matrix(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        let t = agglomerate(&d, Linkage::Average).unwrap();
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 1));
        assert_eq!((t.merges()[1].left, t.merges()[1].right), (3, 2));
    }

    #[test]
    fn ward_rejects_other_metrics() {
        let m = tdm_from_rows(&[vec![1, 0], vec![0, 1]]);
        let d = distance_matrix(&m, Metric::Manhattan).unwrap();
        assert!(matches!(agglomerate(&d, Linkage::Ward), Err(Error::InvalidArgument(_))));
        assert!(agglomerate(&d, Linkage::Average).is_ok());
    }

    #[test]
    fn degenerate_sizes() {
        let t = agglomerate(&matrix(vec![]), Linkage::Single).unwrap();
        assert_eq!(t.to_newick(), ";");
        let t = agglomerate(&matrix(vec![vec![0.0]]), Linkage::Single).unwrap();
        assert!(t.merges().is_empty());
        assert_eq!(t.to_newick(), "x0;");
        assert_eq!(t.cut(1).unwrap(), vec![1]);
    }

    #[test]
    fn exports() {
        let t = agglomerate(&three_point(), Linkage::Complete).unwrap();
        assert_eq!(t.to_newick(), "((x0:1.000000,x1:1.000000):9.000000,x2:10.000000);");
        let mut buf = Vec::new();
        t.write_merge_table(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,left,right,height\n1,0,1,1.000000\n2,3,2,10.000000\n"
        );
        let mut buf = Vec::new();
        t.write_cut(2, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "term,cluster\nx0,1\nx1,1\nx2,2\n");
        assert_eq!(newick_label("a b"), "'a b'");
        assert_eq!(newick_label("o'k"), "'o''k'");
    }

    #[test]
    fn names_parse() {
        assert_eq!("Ward".parse::<Linkage>().unwrap(), Linkage::Ward);
        assert_eq!("cosine".parse::<Metric>().unwrap(), Metric::Cosine);
        assert!("median".parse::<Linkage>().is_err());
        assert_eq!(Linkage::default(), Linkage::Complete);
        assert_eq!(Metric::default(), Metric::Euclidean);
    }

    /// Naive agglomeration: linkage distances recomputed from leaf pairs at
    /// every step; clusters ordered by their smallest leaf.
    pub(crate) fn naive(d: &DistanceMatrix, linkage: Linkage) -> Vec<(usize, usize, f64)> {
        let n = d.len();
        let mut clusters: Vec<(Vec<usize>, usize)> = (0..n).map(|i| (vec![i], i)).collect();
        let link = |a: &[usize], b: &[usize]| -> f64 {
            let pairs = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y)));
            match linkage {
                Linkage::Single => pairs.map(|(x, y)| d.get(x, y)).fold(f64::INFINITY, f64::min),
                Linkage::Complete => pairs.map(|(x, y)| d.get(x, y)).fold(0.0, f64::max),
                Linkage::Average => {
                    pairs.map(|(x, y)| d.get(x, y)).sum::<f64>() / (a.len() * b.len()) as f64
                }
                Linkage::Ward => {
                    let (na, nb) = (a.len() as f64, b.len() as f64);
                    let sq = |x: usize, y: usize| d.get(x, y).powi(2);
                    let within = |s: &[usize]| {
                        s.iter().flat_map(|&x| s.iter().map(move |&y| sq(x, y))).sum::<f64>()
                    };
                    let between: f64 = pairs.map(|(x, y)| sq(x, y)).sum();
                    let centroid_sq = between / (na * nb)
                        - within(a) / (2.0 * na * na)
                        - within(b) / (2.0 * nb * nb);
                    (2.0 * na * nb / (na + nb) * centroid_sq).max(0.0).sqrt()
                }
            }
        };
        let mut out = Vec::new();
        for step in 0..n.saturating_sub(1) {
            let mut best = (f64::INFINITY, 0, 0);
            for i in 0..clusters.len() {
                for j in i + 1..clusters.len() {
                    let v = link(&clusters[i].0, &clusters[j].0);
                    if v < best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let (h, i, j) = best;
            out.push((clusters[i].1, clusters[j].1, h));
            let (leaves, _) = clusters.remove(j);
            clusters[i].0.extend(leaves);
            clusters[i].1 = n + step;
        }
        out
    }

    pub(crate) fn mst_weights(d: &DistanceMatrix) -> Vec<f64> {
        let n = d.len();
        if n == 0 {
            return vec![];
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut out = Vec::new();
        for _ in 0..n {
            let u = (0..n)
                .filter(|&v| !in_tree[v])
                .min_by(|&a, &b| best[a].total_cmp(&best[b]))
                .unwrap();
            in_tree[u] = true;
            out.push(best[u]);
            for v in 0..n {
                if !in_tree[v] {
                    best[v] = best[v].min(d.get(u, v));
                }
            }
        }
        // the root's entry is not an edge
        out.remove(0);
        out.sort_by(f64::total_cmp);
        out
    }

    fn points() -> impl Strategy<Value = Vec<[f64; 3]>> {
        prop::collection::vec(prop::array::uniform3(-10.0f64..10.0), 1..=8)
    }

    proptest! {
        #[test]
        fn matches_naive_oracle(pts in points()) {
            let d = from_points(&pts);
            for l in [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward] {
                let fast = agglomerate(&d, l).unwrap();
                let slow = naive(&d, l);
                prop_assert_eq!(fast.merges().len(), pts.len() - 1);
                for (m, o) in fast.merges().iter().zip(&slow) {
                    prop_assert_eq!((m.left, m.right), (o.0, o.1), "{:?}", l);
                    prop_assert!((m.height - o.2).abs() <= 1e-9, "{:?} {} vs {}", l, m.height, o.2);
                }
                prop_assert!(fast.heights().collect::<Vec<_>>().windows(2).all(|w| w[1] >= w[0] - 1e-12));
            }
        }

        #[test]
        fn single_linkage_is_mst(pts in points()) {
            let d = from_points(&pts);
            let mut h: Vec<f64> = agglomerate(&d, Linkage::Single).unwrap().heights().collect();
            h.sort_by(f64::total_cmp);
            let mst = mst_weights(&d);
            prop_assert_eq!(h.len(), mst.len());
            for (a, b) in h.iter().zip(&mst) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn cut_yields_k_groups(pts in points(), k in 1usize..=8) {
            let d = from_points(&pts);
            let t = agglomerate(&d, Linkage::Average).unwrap();
            let k = k.min(pts.len());
            let groups = t.cut(k).unwrap();
            let distinct: std::collections::BTreeSet<_> = groups.iter().collect();
            prop_assert_eq!(distinct.len(), k);
            // labels appear in first-occurrence order
            let mut next = 1;
            for g in groups {
                prop_assert!(g <= next);
                if g == next { next += 1; }
            }
            // every node is a child exactly once
            let mut children: Vec<usize> = t.merges().iter().flat_map(|m| [m.left, m.right]).collect();
            children.sort();
            prop_assert_eq!(children, (0..2 * pts.len() - 2).collect::<Vec<_>>());
        }

        #[test]
        fn relabeling_preserves_partitions(pts in points(), seed in any::<u64>(), k in 1usize..=8) {
            let n = pts.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = crate::rng::splitmix64(s);
                perm.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let shuffled: Vec<[f64; 3]> = perm.iter().map(|&p| pts[p]).collect();
            let k = k.min(n);
            for l in [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward] {
                let a = agglomerate(&from_points(&pts), l).unwrap().cut(k).unwrap();
                let b = agglomerate(&from_points(&shuffled), l).unwrap().cut(k).unwrap();
                for x in 0..n {
                    for y in 0..n {
                        prop_assert_eq!(b[x] == b[y], a[perm[x]] == a[perm[y]]);
                    }
                }
            }
        }

        #[test]
        fn distance_axioms(rows in prop::collection::vec(prop::collection::vec(0u32..5, 6), 2..10)) {
            let m = tdm_from_rows(&rows);
            prop_assume!(m.n_terms() >= 2);
            for metric in [Metric::Euclidean, Metric::Manhattan, Metric::Cosine] {
                let d = distance_matrix(&m, metric).unwrap();
                let s = distance_matrix_with(&m, metric, Exec::Sequential).unwrap();
                prop_assert_eq!(&d, &s);
                for i in 0..d.len() {
                    prop_assert_eq!(d.get(i, i), 0.0);
                    for j in 0..d.len() {
                        prop_assert!((d.get(i, j) - d.get(j, i)).abs() <= 1e-12);
                        prop_assert!(d.get(i, j) >= 0.0);
                    }
                }
            }
        }
    }
}
