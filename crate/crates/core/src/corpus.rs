//! Post corpora: loading, validation, and date/keyword filtering with lineage.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::nlp::fold;

const BUNDLED_KEYWORDS: &str = include_str!("../data/keywords.txt");

/// One social-media message with its engagement counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author: String,
    pub followers: u64,
    pub retweets: u64,
    pub favorites: u64,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
}

impl Post {
    /// A post stamped at the Unix epoch; see [`Post::at`].
    pub fn new(
        id: impl Into<String>,
        author: impl Into<String>,
        followers: u64,
        retweets: u64,
        favorites: u64,
        text: impl Into<String>,
    ) -> Self {
        Post {
            id: id.into(),
            author: author.into(),
            followers,
            retweets,
            favorites,
            timestamp: DateTime::UNIX_EPOCH,
            text: text.into(),
            language_hint: None,
        }
    }

    pub fn at(mut self, timestamp: DateTime<Utc>) -> Self {
        self.timestamp = timestamp;
        self
    }
}

/// One step in a corpus' filter history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineageEntry {
    pub stage: String,
    pub before: usize,
    pub after: usize,
}

/// An ordered, immutable collection of posts with distinct ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    posts: Vec<Post>,
    source_label: String,
    lineage: Vec<LineageEntry>,
}

impl Corpus {
    /// Validates `posts` and starts the lineage with a `load` entry.
    pub fn new(source_label: impl Into<String>, posts: Vec<Post>) -> Result<Self> {
        let n = posts.len();
        Corpus::from_parts(
            source_label,
            posts,
            vec![LineageEntry {
                stage: "load".into(),
                before: n,
                after: n,
            }],
        )
    }

    /// Rebuilds a corpus from stored parts, re-checking every invariant.
    pub fn from_parts(
        source_label: impl Into<String>,
        posts: Vec<Post>,
        lineage: Vec<LineageEntry>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(posts.len());
        for p in &posts {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::Validation(format!("duplicate post id '{}'", p.id)));
            }
            if p.text.trim().is_empty() {
                return Err(Error::Validation(format!("post '{}' has empty text", p.id)));
            }
        }
        for w in lineage.windows(2) {
            if w[1].after > w[0].after {
                return Err(Error::Validation(format!(
                    "lineage count increases from '{}' ({}) to '{}' ({})",
                    w[0].stage, w[0].after, w[1].stage, w[1].after
                )));
            }
        }
        if let Some(last) = lineage.last() {
            if last.after != posts.len() {
                return Err(Error::Validation(format!(
                    "lineage ends at {} posts but corpus holds {}",
                    last.after,
                    posts.len()
                )));
            }
        }
        Ok(Corpus {
            posts,
            source_label: source_label.into(),
            lineage,
        })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn lineage(&self) -> &[LineageEntry] {
        &self.lineage
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.posts.iter().map(|p| p.id.as_str())
    }

    fn retain(&self, stage: String, keep: &[bool]) -> Corpus {
        let posts: Vec<Post> = self
            .posts
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p.clone())
            .collect();
        let mut lineage = self.lineage.clone();
        lineage.push(LineageEntry {
            stage,
            before: self.posts.len(),
            after: posts.len(),
        });
        Corpus {
            posts,
            source_label: self.source_label.clone(),
            lineage,
        }
    }

    /// Writes one JSON object per line, the record-per-line input format.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.posts {
            serde_json::to_writer(&mut w, p)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// RFC 4180 CSV with a header row.
    Delimited,
    /// One JSON object per line.
    RecordPerLine,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delimited" | "csv" => Ok(InputFormat::Delimited),
            "record-per-line" | "jsonl" => Ok(InputFormat::RecordPerLine),
            other => Err(Error::InvalidArgument(format!("unknown input format '{other}'"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Delimited => "delimited",
            InputFormat::RecordPerLine => "record-per-line",
        })
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    author: String,
    followers: i64,
    retweets: i64,
    favorites: i64,
    timestamp: String,
    text: String,
    #[serde(default)]
    language_hint: Option<String>,
}

impl RawRecord {
    fn into_post(self, line: u64) -> Result<Post> {
        let count = |name: &str, v: i64| -> Result<u64> {
            u64::try_from(v).map_err(|_| {
                Error::Validation(format!(
                    "line {line}: record '{}' has negative {name} ({v})",
                    self.id
                ))
            })
        };
        let followers = count("followers", self.followers)?;
        let retweets = count("retweets", self.retweets)?;
        let favorites = count("favorites", self.favorites)?;
        let timestamp = DateTime::parse_from_rfc3339(self.timestamp.trim())
            .map_err(|e| Error::Parse {
                line,
                message: format!("timestamp '{}': {e}", self.timestamp),
            })?
            .with_timezone(&Utc);
        if self.text.trim().is_empty() {
            return Err(Error::Validation(format!(
                "line {line}: record '{}' has empty text",
                self.id
            )));
        }
        Ok(Post {
            id: self.id,
            author: self.author,
            followers,
            retweets,
            favorites,
            timestamp,
            text: self.text,
            language_hint: self.language_hint.filter(|s| !s.trim().is_empty()),
        })
    }
}

const REQUIRED_COLUMNS: [&str; 7] = [
    "id",
    "author",
    "followers",
    "retweets",
    "favorites",
    "timestamp",
    "text",
];

fn read_delimited<R: Read>(input: R) -> Result<Vec<(u64, Post)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    for col in REQUIRED_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing column '{col}' in header"),
            });
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw: RawRecord = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        out.push((line, raw.into_post(line)?));
    }
    Ok(out)
}

fn read_record_per_line<R: Read>(input: R) -> Result<Vec<(u64, Post)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, raw.into_post(line_no)?));
    }
    Ok(out)
}

/// Parses a corpus from any reader. `label` names the source in lineage and reports.
pub fn read_corpus<R: Read>(input: R, format: InputFormat, label: &str) -> Result<Corpus> {
    let records = match format {
        InputFormat::Delimited => read_delimited(input)?,
        InputFormat::RecordPerLine => read_record_per_line(input)?,
    };
    if records.is_empty() {
        return Err(Error::Validation("no records".into()));
    }
    let mut seen = HashSet::with_capacity(records.len());
    for (line, post) in &records {
        if !seen.insert(post.id.as_str()) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate id '{}'",
                post.id
            )));
        }
    }
    Corpus::new(label, records.into_iter().map(|(_, p)| p).collect())
}

pub fn load_corpus(path: impl AsRef<Path>, format: InputFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file, format, &path.display().to_string())
}

/// Keeps posts with `start <= timestamp <= end`.
pub fn filter_by_date(c: &Corpus, start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Corpus> {
    if start > end {
        return Err(Error::InvalidArgument(format!(
            "date range start {start} is after end {end}"
        )));
    }
    let keep: Vec<bool> = c
        .posts
        .iter()
        .map(|p| start <= p.timestamp && p.timestamp <= end)
        .collect();
    Ok(c.retain(
        format!("date {} .. {}", start.to_rfc3339(), end.to_rfc3339()),
        &keep,
    ))
}

/// A named group of lowercase match keys. Keys may span several words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    theme: String,
    keywords: BTreeSet<String>,
}

impl KeywordSet {
    /// Trims and lowercases each keyword; rejects empty sets and blank keys.
    pub fn new<I, S>(theme: impl Into<String>, keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let theme = theme.into();
        let mut set = BTreeSet::new();
        for k in keywords {
            let k = k.as_ref().trim().to_lowercase();
            if k.is_empty() {
                return Err(Error::Validation(format!("blank keyword in theme '{theme}'")));
            }
            set.insert(k);
        }
        if set.is_empty() {
            return Err(Error::Validation(format!("theme '{theme}' has no keywords")));
        }
        Ok(KeywordSet {
            theme,
            keywords: set,
        })
    }

    pub fn theme(&self) -> &str {
        &self.theme
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(String::as_str)
    }
}

/// Parses the sectioned keyword format: `[Theme]` headers followed by one
/// keyword per line, `#` comments.
pub fn parse_keyword_sets(text: &str) -> Result<Vec<KeywordSet>> {
    let mut sets = Vec::new();
    let mut current: Option<(String, Vec<String>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if let Some((theme, words)) = current.take() {
                sets.push(KeywordSet::new(theme, words)?);
            }
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: "empty theme name".into(),
                });
            }
            current = Some((name.to_owned(), Vec::new()));
        } else if let Some((_, words)) = current.as_mut() {
            words.push(line.to_owned());
        } else {
            return Err(Error::Parse {
                line: i as u64 + 1,
                message: format!("keyword '{line}' appears before any [theme] header"),
            });
        }
    }
    if let Some((theme, words)) = current {
        sets.push(KeywordSet::new(theme, words)?);
    }
    Ok(sets)
}

pub fn load_keyword_sets(path: impl AsRef<Path>) -> Result<Vec<KeywordSet>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keyword_sets(&text)
}

/// The innovation / entrepreneurship / technology keyword sets shipped with the crate.
pub fn bundled_keyword_sets() -> Vec<KeywordSet> {
    parse_keyword_sets(BUNDLED_KEYWORDS).expect("bundled keyword file parses")
}

pub fn bundled_keyword_text() -> &'static str {
    BUNDLED_KEYWORDS
}

/// Folded alphanumeric runs; the unit keywords are matched against.
fn match_tokens(s: &str) -> Vec<String> {
    fold(s)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Compiled keyword sets. Single-word keys match whole tokens; multi-word keys
/// match contiguous token runs.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    single: HashSet<String>,
    multi: Vec<Vec<String>>,
}

impl KeywordMatcher {
    pub fn new(sets: &[KeywordSet]) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidArgument("no keyword sets given".into()));
        }
        let mut single = HashSet::new();
        let mut multi = BTreeSet::new();
        for set in sets {
            for k in set.keywords() {
                let toks = match_tokens(k);
                match toks.len() {
                    0 => {
                        return Err(Error::InvalidArgument(format!(
                            "keyword '{k}' has no letters or digits"
                        )))
                    }
                    1 => {
                        single.insert(toks.into_iter().next().unwrap_or_default());
                    }
                    _ => {
                        multi.insert(toks);
                    }
                }
            }
        }
        if single.is_empty() && multi.is_empty() {
            return Err(Error::InvalidArgument("keyword sets are empty".into()));
        }
        Ok(KeywordMatcher {
            single,
            multi: multi.into_iter().collect(),
        })
    }

    pub fn matches(&self, text: &str) -> bool {
        let toks = match_tokens(text);
        toks.iter().any(|t| self.single.contains(t))
            || self.multi.iter().any(|key| {
                toks.windows(key.len())
                    .any(|w| w.iter().zip(key).all(|(a, b)| a == b))
            })
    }
}

pub fn filter_by_keywords(c: &Corpus, sets: &[KeywordSet]) -> Result<Corpus> {
    filter_by_keywords_with(c, sets, Exec::default())
}

pub fn filter_by_keywords_with(c: &Corpus, sets: &[KeywordSet], exec: Exec) -> Result<Corpus> {
    let matcher = KeywordMatcher::new(sets)?;
    let keep = exec.map(&c.posts, |p| matcher.matches(&p.text));
    let themes: Vec<&str> = sets.iter().map(KeywordSet::theme).collect();
    Ok(c.retain(format!("keywords {}", themes.join(", ")), &keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn ts(day: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 3, 1, 0, 0, 0).unwrap() + chrono::Duration::days(day as i64)
    }

    fn corpus(texts: &[&str]) -> Corpus {
        let posts = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Post::new(format!("p{i}"), "a", 10, 1, 1, *t).at(ts(i as u32)))
            .collect();
        Corpus::new("test", posts).unwrap()
    }

    const HEADER: &str = "id,author,followers,retweets,favorites,timestamp,text\n";

    #[test]
    fn loads_table2_record() {
        let csv = format!(
            "{HEADER}1,ESIC,11257,12,53,2016-06-01T10:00:00Z,\"Blockchain Technology How banks are building a realtime global payment network AccentureSpain\"\n"
        );
        let c = read_corpus(csv.as_bytes(), InputFormat::Delimited, "t").unwrap();
        assert_eq!(c.len(), 1);
        let p = &c.posts()[0];
        assert_eq!((p.followers, p.retweets, p.favorites), (11257, 12, 53));
        assert_eq!(p.author, "ESIC");
        assert_eq!(
            c.lineage(),
            &[LineageEntry {
                stage: "load".into(),
                before: 1,
                after: 1
            }]
        );
    }

    #[test]
    fn empty_input_has_no_records() {
        for fmt in [InputFormat::Delimited, InputFormat::RecordPerLine] {
            let err = read_corpus(&b""[..], fmt, "t").unwrap_err();
            assert!(err.to_string().contains("no records"), "{err}");
        }
        let err = read_corpus(HEADER.as_bytes(), InputFormat::Delimited, "t").unwrap_err();
        assert!(err.to_string().contains("no records"));
    }

    #[test]
    fn negative_count_is_reported_at_its_record() {
        let mut csv = HEADER.to_string();
        for i in 0..10 {
            let rt = if i == 6 { -1 } else { i };
            csv += &format!("id{i},user{i},100,{rt},3,2016-05-0{}T00:00:00Z,post number {i}\n", i % 9 + 1);
        }
        let err = read_corpus(csv.as_bytes(), InputFormat::Delimited, "t").unwrap_err();
        match err {
            Error::Validation(msg) => {
                assert!(msg.contains("line 8"), "{msg}");
                assert!(msg.contains("id6") && msg.contains("retweets"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_records() {
        let bad = format!("{HEADER}1,a,x,1,1,2016-06-01T00:00:00Z,hi\n");
        match read_corpus(bad.as_bytes(), InputFormat::Delimited, "t").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let bad_ts = format!("{HEADER}1,a,1,1,1,yesterday,hi\n");
        assert!(matches!(
            read_corpus(bad_ts.as_bytes(), InputFormat::Delimited, "t"),
            Err(Error::Parse { line: 2, .. })
        ));
        let dup = format!(
            "{HEADER}1,a,1,1,1,2016-06-01T00:00:00Z,hi\n1,b,1,1,1,2016-06-01T00:00:00Z,yo\n"
        );
        assert!(matches!(
            read_corpus(dup.as_bytes(), InputFormat::Delimited, "t"),
            Err(Error::Validation(_))
        ));
        let jsonl = "{\"id\":\"1\",\"author\":\"a\",\"followers\":1,\"retweets\":0,\"favorites\":0,\"timestamp\":\"2016-06-01T00:00:00Z\",\"text\":\"hi\"}\n{oops}\n";
        assert!(matches!(
            read_corpus(jsonl.as_bytes(), InputFormat::RecordPerLine, "t"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let c = corpus(&["one", "two words"]);
        let mut buf = Vec::new();
        c.write_jsonl(&mut buf).unwrap();
        let back = read_corpus(&buf[..], InputFormat::RecordPerLine, "test").unwrap();
        assert_eq!(back.posts(), c.posts());
    }

    #[test]
    fn date_filter_is_inclusive() {
        let c = corpus(&["a", "b", "c", "d"]);
        let same = filter_by_date(&c, ts(0), ts(3)).unwrap();
        assert_eq!(same.posts(), c.posts());
        let one = filter_by_date(&c, ts(2), ts(2)).unwrap();
        assert_eq!(one.ids().collect::<Vec<_>>(), vec!["p2"]);
        assert_eq!(one.lineage().last().unwrap().before, 4);
        assert_eq!(one.lineage().last().unwrap().after, 1);
        assert!(matches!(
            filter_by_date(&c, ts(3), ts(2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn date_filter_matches_linear_scan() {
        let posts: Vec<Post> = (0..50)
            .map(|i| Post::new(format!("p{i}"), "a", 1, 0, 0, "x").at(ts(i * 7)))
            .collect();
        let c = Corpus::new("t", posts).unwrap();
        let (start, end) = (ts(70), ts(7 * 29));
        let filtered = filter_by_date(&c, start, end).unwrap();
        let got: Vec<&str> = filtered.ids().collect();
        let mut expected = Vec::new();
        for p in c.posts() {
            if p.timestamp >= start && p.timestamp <= end {
                expected.push(p.id.as_str());
            }
        }
        assert_eq!(expected.len(), 20);
        assert_eq!(got, expected);
    }

    #[test]
    fn bundled_keywords_mirror_three_themes() {
        let sets = bundled_keyword_sets();
        let themes: Vec<&str> = sets.iter().map(KeywordSet::theme).collect();
        assert_eq!(themes, vec!["Innovation", "Entrepreneurship", "Others"]);
        assert!(sets[1].keywords().any(|k| k == "startup"));
        assert!(sets[2].keywords().any(|k| k == "internet of things"));
    }

    #[test]
    fn keyword_examples() {
        let sets = bundled_keyword_sets();
        let c = corpus(&["we back this startup today", "lunch was great"]);
        let out = filter_by_keywords(&c, &sets).unwrap();
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["p0"]);
        let last = out.lineage().last().unwrap();
        assert_eq!((last.before, last.after), (2, 1));
    }

    #[test]
    fn keyword_tokens_respect_boundaries() {
        let sets = vec![KeywordSet::new("t", ["innovate", "digital transformation"]).unwrap()];
        let c = corpus(&[
            "the house was renovated",
            "we INNOVATE daily",
            "digital and transformation",
            "Digital-Transformation now",
        ]);
        let out = filter_by_keywords(&c, &sets).unwrap();
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["p1", "p3"]);
    }

    #[test]
    fn ten_post_fixture_retains_four() {
        let mut sets = bundled_keyword_sets();
        sets.push(KeywordSet::new("Innovación", ["innovacion"]).unwrap());
        let c = corpus(&[
            "Apostamos por la Innovación abierta",
            "lunch was great",
            "#IoT sensors everywhere",
            "meeting at noon",
            "Our new Startup is live",
            "coffee and croissants",
            "Talking digital   transformation today",
            "renovated offices",
            "good morning Madrid",
            "the weather is fine",
        ]);
        let out = filter_by_keywords(&c, &sets).unwrap();
        assert_eq!(out.ids().collect::<Vec<_>>(), vec!["p0", "p2", "p4", "p6"]);
    }

    #[test]
    fn keyword_argument_errors() {
        let c = corpus(&["x"]);
        assert!(matches!(filter_by_keywords(&c, &[]), Err(Error::InvalidArgument(_))));
        assert!(KeywordSet::new("t", Vec::<String>::new()).is_err());
        assert!(parse_keyword_sets("orphan\n[T]\nx\n").is_err());
        assert!(parse_keyword_sets("[Empty]\n[T]\nx\n").is_err());
    }

    fn naive_keep(text: &str, sets: &[KeywordSet]) -> bool {
        let padded = |s: &str| {
            let mapped: String = fold(s)
                .chars()
                .map(|c| if c.is_alphanumeric() { c } else { ' ' })
                .collect();
            format!(" {} ", mapped.split_whitespace().collect::<Vec<_>>().join(" "))
        };
        let hay = padded(text);
        sets.iter()
            .flat_map(|s| s.keywords())
            .any(|k| hay.contains(&padded(k)))
    }

    fn post_strategy() -> impl Strategy<Value = Vec<(String, u32)>> {
        let word = prop_oneof![
            Just("innovation"), Just("Innovative"), Just("renovated"), Just("startups"),
            Just("Startup"), Just("IoT"), Just("digital"), Just("transformation"),
            Just("big"), Just("data"), Just("lunch"), Just("tecnología"), Just("#BigData"),
        ];
        prop::collection::vec(
            (prop::collection::vec(word, 1..6).prop_map(|w| w.join(" ")), 0u32..60),
            1..30,
        )
    }

    fn build(items: &[(String, u32)]) -> Corpus {
        let posts = items
            .iter()
            .enumerate()
            .map(|(i, (t, d))| Post::new(format!("p{i}"), "a", 1, 0, 0, t.clone()).at(ts(*d)))
            .collect();
        Corpus::new("prop", posts).unwrap()
    }

    proptest! {
        #[test]
        fn keyword_filter_matches_naive_scan(items in post_strategy()) {
            let sets = bundled_keyword_sets();
            let c = build(&items);
            let got: Vec<String> = filter_by_keywords(&c, &sets).unwrap().ids().map(String::from).collect();
            let expected: Vec<String> = c.posts().iter()
                .filter(|p| naive_keep(&p.text, &sets)).map(|p| p.id.clone()).collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn filters_are_idempotent_and_commute(items in post_strategy(), a in 0u32..60, b in 0u32..60) {
            let (start, end) = (ts(a.min(b)), ts(a.max(b)));
            let sets = bundled_keyword_sets();
            let c = build(&items);
            let d = filter_by_date(&c, start, end).unwrap();
            let dd = filter_by_date(&d, start, end).unwrap();
            prop_assert_eq!(dd.posts(), d.posts());
            let k = filter_by_keywords(&c, &sets).unwrap();
            let kk = filter_by_keywords(&k, &sets).unwrap();
            prop_assert_eq!(kk.posts(), k.posts());

            let dk: BTreeSet<String> = filter_by_keywords(&d, &sets).unwrap().ids().map(String::from).collect();
            let kd: BTreeSet<String> = filter_by_date(&k, start, end).unwrap().ids().map(String::from).collect();
            prop_assert_eq!(dk, kd);
        }

        #[test]
        fn filter_output_is_subsequence(items in post_strategy()) {
            let c = build(&items);
            let out = filter_by_keywords(&c, &bundled_keyword_sets()).unwrap();
            let mut it = c.ids();
            for id in out.ids() {
                prop_assert!(it.any(|x| x == id));
            }
            let counts: Vec<usize> = out.lineage().iter().map(|l| l.after).collect();
            prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]));
        }

        #[test]
        fn sequential_and_parallel_filters_agree(items in post_strategy()) {
            let c = build(&items);
            let sets = bundled_keyword_sets();
            prop_assert_eq!(
                filter_by_keywords_with(&c, &sets, Exec::Sequential).unwrap(),
                filter_by_keywords_with(&c, &sets, Exec::Parallel).unwrap()
            );
        }
    }
}
