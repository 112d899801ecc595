//! Text cleaning, tokenization and normalization into unigram streams.
//!
//! The pipeline for one post is
//! `remove_stopwords(normalize(tokenize(clean_text(text))))`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory as Gc};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Corpus, Post};
use crate::error::{Error, Result};
use crate::exec::Exec;

const EMOTICONS: [&str; 5] = [":)", ":(", ";)", ":D", ":P"];

const BUNDLED_EN: &str = include_str!("../data/stopwords/en.txt");
const BUNDLED_ES: &str = include_str!("../data/stopwords/es.txt");
const BUNDLED_IT: &str = include_str!("../data/stopwords/it.txt");

/// Normalized unigrams of one post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub post_id: String,
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(post_id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenStream {
            post_id: post_id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| {
        Regex::new(r"(?i)(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").expect("valid url pattern")
    })
}

/// Lowercases and strips diacritics: `"Innovación"` becomes `"innovacion"`.
pub fn fold(s: &str) -> String {
    s.to_lowercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .nfc()
        .collect()
}

/// Removes URLs, hashtag/mention markers, digits, emoticons and symbols.
///
/// `#` and `@` are dropped but the word after them is kept. Other punctuation
/// becomes a space. Whitespace runs collapse to one space and the result is
/// trimmed. Letter case is left untouched.
pub fn clean_text(raw: &str) -> String {
    let without_urls = url_pattern().replace_all(raw, " ");
    let mut out = String::with_capacity(without_urls.len());

    for chunk in without_urls.split_whitespace() {
        if EMOTICONS.contains(&chunk) {
            continue;
        }
        out.push(' ');
        let mut prev_kept_letter = false;
        for c in chunk.chars() {
            match get_general_category(c) {
                Gc::UppercaseLetter
                | Gc::LowercaseLetter
                | Gc::TitlecaseLetter
                | Gc::ModifierLetter
                | Gc::OtherLetter => {
                    out.push(c);
                    prev_kept_letter = true;
                }
                // marks survive only when attached to a kept letter
                Gc::NonspacingMark | Gc::SpacingMark | Gc::EnclosingMark => {
                    if prev_kept_letter {
                        out.push(c);
                    }
                }
                Gc::ConnectorPunctuation
                | Gc::DashPunctuation
                | Gc::OpenPunctuation
                | Gc::ClosePunctuation
                | Gc::InitialPunctuation
                | Gc::FinalPunctuation
                | Gc::OtherPunctuation => {
                    if c != '#' && c != '@' {
                        out.push(' ');
                        prev_kept_letter = false;
                    }
                }
                Gc::SpaceSeparator
                | Gc::LineSeparator
                | Gc::ParagraphSeparator
                | Gc::Control => {
                    out.push(' ');
                    prev_kept_letter = false;
                }
                // digits, symbols, pictographs, format and private-use codepoints
                _ => {}
            }
        }
    }

    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokenize(cleaned: &str) -> Vec<String> {
    cleaned.split_whitespace().map(str::to_owned).collect()
}

/// Canonical composition, lowercasing and diacritic folding. Tokens that
/// fold to nothing are dropped.
pub fn normalize(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| fold(&t))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Per-language stopword sets, keyed by ISO 639-1 code.
#[derive(Debug, Clone, Default)]
pub struct StopwordLists {
    lists: BTreeMap<String, HashSet<String>>,
}

impl StopwordLists {
    /// English, Spanish and Italian lists shipped with the crate.
    pub fn bundled() -> Self {
        let mut lists = StopwordLists::default();
        lists.insert("en", parse_word_list(BUNDLED_EN, '#'));
        lists.insert("es", parse_word_list(BUNDLED_ES, '#'));
        lists.insert("it", parse_word_list(BUNDLED_IT, '#'));
        lists
    }

    /// Adds or replaces a language. Entries are folded like corpus tokens.
    pub fn insert<I, S>(&mut self, language: &str, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set = words
            .into_iter()
            .map(|w| fold(w.as_ref().trim()))
            .filter(|w| !w.is_empty())
            .collect();
        self.lists.insert(language.to_lowercase(), set);
    }

    /// Loads one language from a file with one word per line; `#` lines are comments.
    pub fn load_file(&mut self, language: &str, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.insert(language, parse_word_list(&text, '#'));
        Ok(())
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    pub fn get(&self, language: &str) -> Option<&HashSet<String>> {
        self.lists.get(language)
    }

    /// Union of the selected languages' lists.
    pub fn union<S: AsRef<str>>(&self, languages: &[S]) -> Result<HashSet<String>> {
        let mut out = HashSet::new();
        for lang in languages {
            let lang = lang.as_ref();
            let list = self.lists.get(lang).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown stopword language '{lang}'"))
            })?;
            out.extend(list.iter().cloned());
        }
        Ok(out)
    }
}

pub(crate) fn parse_word_list(text: &str, comment: char) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(comment))
        .map(str::to_owned)
        .collect()
}

pub fn remove_stopwords<S: AsRef<str>>(
    tokens: Vec<String>,
    lists: &StopwordLists,
    languages: &[S],
) -> Result<Vec<String>> {
    let stop = lists.union(languages)?;
    Ok(strip(tokens, &stop))
}

fn strip(tokens: Vec<String>, stop: &HashSet<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !stop.contains(t)).collect()
}

/// Resolved preprocessing configuration: the active stopword union.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    languages: BTreeSet<String>,
    stopwords: HashSet<String>,
}

impl Preprocessor {
    pub fn new<S: AsRef<str>>(lists: &StopwordLists, languages: &[S]) -> Result<Self> {
        Ok(Preprocessor {
            languages: languages.iter().map(|l| l.as_ref().to_owned()).collect(),
            stopwords: lists.union(languages)?,
        })
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.languages.iter().map(String::as_str)
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        strip(normalize(tokenize(&clean_text(text))), &self.stopwords)
    }
}

impl Default for Preprocessor {
    /// Bundled lists with English, Spanish and Italian all active.
    fn default() -> Self {
        Preprocessor::new(&StopwordLists::bundled(), &["en", "es", "it"])
            .expect("bundled languages exist")
    }
}

pub fn preprocess(post: &Post, config: &Preprocessor) -> TokenStream {
    TokenStream::new(post.id.clone(), config.tokens(&post.text))
}

pub fn preprocess_corpus(corpus: &Corpus, config: &Preprocessor) -> Vec<TokenStream> {
    preprocess_corpus_with(corpus, config, Exec::default())
}

pub fn preprocess_corpus_with(
    corpus: &Corpus,
    config: &Preprocessor,
    exec: Exec,
) -> Vec<TokenStream> {
    exec.map(corpus.posts(), |p| preprocess(p, config))
}
