//! Tokenization, sentence splitting, n-grams and tf-idf weighting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Document;
use crate::{Error, Result};

pub const URL_TOKEN: &str = "<url>";
pub const UNIGRAMS_FILE: &str = "UnigramsList.txt";
pub const BIGRAMS_FILE: &str = "BigramsList.txt";
pub const UNIGRAM_IDF_FILE: &str = "UnigramsIdf.txt";
pub const BIGRAM_IDF_FILE: &str = "BigramsIdf.txt";
pub const DEFAULT_MIN_DF: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '’'
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.trim_start_matches(|c: char| !c.is_alphanumeric());
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

fn push_word(out: &mut Vec<String>, word: &str) {
    let trimmed = word.trim_matches(|c| c == '\'' || c == '’');
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

fn chunk_surfaces(chunk: &str, out: &mut Vec<String>) {
    if chunk == URL_TOKEN || is_url(chunk) {
        out.push(URL_TOKEN.to_string());
        return;
    }
    let mut word = String::new();
    let mut last_punct: Option<char> = None;
    for c in chunk.chars() {
        if is_word_char(c) {
            word.push(c);
            last_punct = None;
            continue;
        }
        push_word(out, &word);
        word.clear();
        if c == '!' || c == '?' {
            if last_punct != Some(c) {
                out.push(c.to_string());
            }
            last_punct = Some(c);
        } else {
            last_punct = None;
        }
    }
    push_word(out, &word);
}

/// Lowercased word tokens; URLs become `<url>`, runs of `!` or `?` become a
/// single token, other punctuation is dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_from(text, 0)
}

fn tokenize_from(text: &str, first_position: usize) -> Vec<Token> {
    let mut surfaces = Vec::new();
    for chunk in text.split_whitespace() {
        chunk_surfaces(&chunk.to_lowercase(), &mut surfaces);
    }
    surfaces.into_iter().enumerate().map(|(i, surface)| Token { surface, position: first_position + i }).collect()
}

/// Words whose trailing period does not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "mr.", "mrs.", "ms.", "dr.", "prof.", "approx.", "no.", "fig.", "eq.", "al.",
    "inc.", "ltd.", "jr.", "sr.", "st.", "u.s.",
];

fn is_abbreviation(chunk: &str) -> bool {
    let word = chunk.trim_start_matches(['(', '[', '"', '\'']);
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Rule-based sentence splitter: a sentence ends at `.`, `!` or `?` followed
/// by whitespace or end of text, unless the word is a known abbreviation.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start: Option<usize> = None;
    let mut chunk_start = 0;
    let mut in_chunk = false;

    let mut close = |chunk_begin: usize, end: usize, start: &mut Option<usize>| {
        let chunk = &text[chunk_begin..end];
        let ends = chunk.ends_with(['.', '!', '?']);
        if ends && !is_abbreviation(chunk) {
            if let Some(s) = start.take() {
                sentences.push(text[s..end].to_string());
            }
        }
    };

    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if in_chunk {
                close(chunk_start, i, &mut start);
                in_chunk = false;
            }
        } else if !in_chunk {
            in_chunk = true;
            chunk_start = i;
            if start.is_none() {
                start = Some(i);
            }
        }
    }
    if in_chunk {
        close(chunk_start, text.len(), &mut start);
    }
    if let Some(s) = start {
        let rest = text[s..].trim_end();
        if !rest.is_empty() {
            sentences.push(rest.to_string());
        }
    }
    sentences
}

/// A document split into sentences, each tokenized. Token positions run
/// across the whole document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedDoc {
    pub sentences: Vec<Vec<Token>>,
}

impl TokenizedDoc {
    pub fn new(text: &str) -> Self {
        let mut next = 0;
        let sentences = split_sentences(text)
            .iter()
            .map(|s| {
                let tokens = tokenize_from(s, next);
                next += tokens.len();
                tokens
            })
            .filter(|t| !t.is_empty())
            .collect();
        TokenizedDoc { sentences }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens().map(|t| t.surface.as_str()).collect()
    }

    /// Document n-grams; bigrams never span two sentences.
    pub fn ngrams(&self, n: usize) -> Vec<String> {
        self.sentences.iter().flat_map(|s| extract_ngrams(s, n)).collect()
    }
}

/// Contiguous n-token sequences joined by a single space.
///
/// # Panics
/// If `n` is not 1 or 2.
pub fn extract_ngrams(tokens: &[Token], n: usize) -> Vec<String> {
    assert!(n == 1 || n == 2, "only unigrams and bigrams are supported, got n = {n}");
    tokens.windows(n).map(|w| w.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")).collect()
}

/// Sparse feature vector keyed by namespaced feature names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    entries: BTreeMap<String, f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `value`, or removes the entry when it is zero.
    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        let name = name.into();
        if value == 0.0 {
            self.entries.remove(&name);
        } else {
            self.entries.insert(name, value);
        }
    }

    pub fn add(&mut self, name: &str, delta: f64) {
        let v = self.get(name) + delta;
        self.set(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Moves every entry of `other` in; returns false on a name collision.
    pub fn merge(&mut self, other: FeatureVector) -> bool {
        let mut disjoint = true;
        for (k, v) in other.entries {
            disjoint &= self.entries.insert(k, v).is_none();
        }
        disjoint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn scale(&mut self, factor: f64) {
        self.entries.values_mut().for_each(|v| *v *= factor);
        self.entries.retain(|_, v| *v != 0.0);
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut fv = FeatureVector::new();
        for (k, v) in iter {
            fv.add(&k, v);
        }
        fv
    }
}

pub fn unigram_feature(t: &str) -> String {
    format!("uni:{t}")
}

pub fn bigram_feature(t: &str) -> String {
    format!("bi:{t}")
}

/// Trained n-gram vocabulary with idf weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NgramModel {
    pub unigrams: Vec<String>,
    pub bigrams: Vec<String>,
    pub idf: BTreeMap<String, f64>,
    /// Number of documents the model was built from.
    pub documents: usize,
}

/// Ln of the document ratio.
pub fn idf(total_docs: usize, df: usize) -> f64 {
    (total_docs as f64 / df as f64).ln()
}

impl NgramModel {
    /// Keeps n-grams with document frequency `>= min_df`; idf = ln(N / df).
    pub fn build(docs: &[TokenizedDoc], min_df: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::InvalidInput("cannot build an n-gram model from an empty corpus".into()));
        }
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let distinct: BTreeSet<String> = doc.ngrams(1).into_iter().chain(doc.ngrams(2)).collect();
            for g in distinct {
                *df.entry(g).or_default() += 1;
            }
        }
        let n = docs.len();
        let idf: BTreeMap<String, f64> =
            df.into_iter().filter(|&(_, c)| c >= min_df.max(1)).map(|(g, c)| (g, idf(n, c))).collect();
        let (bigrams, unigrams): (Vec<String>, Vec<String>) = idf.keys().cloned().partition(|g| g.contains(' '));
        Ok(NgramModel { unigrams, bigrams, idf, documents: n })
    }

    /// Raw-count tf times idf over in-vocabulary n-grams.
    pub fn tfidf(&self, doc: &TokenizedDoc) -> FeatureVector {
        self.tfidf_restricted(doc, None, None)
    }

    /// As [`NgramModel::tfidf`], keeping only allow-listed n-grams when a list is given.
    pub fn tfidf_restricted(
        &self,
        doc: &TokenizedDoc,
        unigram_allow: Option<&BTreeSet<String>>,
        bigram_allow: Option<&BTreeSet<String>>,
    ) -> FeatureVector {
        let mut fv = FeatureVector::new();
        for (n, allow, name) in [
            (1, unigram_allow, unigram_feature as fn(&str) -> String),
            (2, bigram_allow, bigram_feature as fn(&str) -> String),
        ] {
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for g in doc.ngrams(n) {
                *tf.entry(g).or_default() += 1;
            }
            for (g, count) in tf {
                if allow.is_some_and(|a| !a.contains(&g)) {
                    continue;
                }
                if let Some(&w) = self.idf.get(&g) {
                    fv.set(name(&g), count as f64 * w);
                }
            }
        }
        fv
    }

    /// Writes `UnigramsList.txt` and `BigramsList.txt` into `ngram_dir` and the
    /// idf dictionaries into `idf_dir`.
    pub fn save(&self, ngram_dir: &Path, idf_dir: &Path) -> Result<()> {
        for dir in [ngram_dir, idf_dir] {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_file(&ngram_dir.join(UNIGRAMS_FILE), list_text(&self.unigrams))?;
        write_file(&ngram_dir.join(BIGRAMS_FILE), list_text(&self.bigrams))?;
        write_file(&idf_dir.join(UNIGRAM_IDF_FILE), self.idf_text(&self.unigrams))?;
        write_file(&idf_dir.join(BIGRAM_IDF_FILE), self.idf_text(&self.bigrams))?;
        Ok(())
    }

    pub fn load(ngram_dir: &Path, idf_dir: &Path) -> Result<Self> {
        let unigrams = read_list(&ngram_dir.join(UNIGRAMS_FILE))?;
        let bigrams = read_list(&ngram_dir.join(BIGRAMS_FILE))?;
        let mut idf = read_idf_table(&idf_dir.join(UNIGRAM_IDF_FILE))?;
        idf.extend(read_idf_table(&idf_dir.join(BIGRAM_IDF_FILE))?);
        for g in unigrams.iter().chain(&bigrams) {
            if !idf.contains_key(g) {
                return Err(Error::format_nl(format!("n-gram `{g}` has no idf entry")));
            }
        }
        if idf.len() != unigrams.len() + bigrams.len() {
            return Err(Error::format_nl("idf tables list n-grams missing from the n-gram lists"));
        }
        Ok(NgramModel { unigrams, bigrams, idf, documents: 0 })
    }

    fn idf_text(&self, grams: &[String]) -> String {
        let mut out = String::new();
        for g in grams {
            let _ = writeln!(out, "{g}\t{}", self.idf[g]);
        }
        out
    }
}

/// Writes `contents`, creating missing parent directories.
pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn list_text(items: &[String]) -> String {
    items.iter().map(|s| format!("{s}\n")).collect()
}

/// One entry per non-blank line, trimmed, sorted and deduplicated.
pub fn parse_list(text: &str) -> Vec<String> {
    let set: BTreeSet<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect();
    set.into_iter().collect()
}

pub fn read_list(path: &Path) -> Result<Vec<String>> {
    Ok(parse_list(&read_text(path)?))
}

/// Parses `term<TAB>idf` lines.
pub fn parse_idf_table(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut table = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (term, value) = line.rsplit_once('\t').ok_or_else(|| Error::format(i + 1, "expected `term<TAB>idf`"))?;
        let value: f64 = value.trim().parse().map_err(|_| Error::format(i + 1, format!("bad idf value `{value}`")))?;
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::format(i + 1, "idf values must be finite and non-negative"));
        }
        table.insert(term.to_string(), value);
    }
    Ok(table)
}

pub fn read_idf_table(path: &Path) -> Result<BTreeMap<String, f64>> {
    parse_idf_table(&read_text(path)?).map_err(|e| match e {
        Error::Format { line, message } => Error::Format { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

/// Builds an n-gram model straight from documents.
pub fn build_ngram_model(corpus: &[Document], min_df: usize) -> Result<NgramModel> {
    let docs: Vec<_> = corpus.iter().map(|d| TokenizedDoc::new(&d.text)).collect();
    NgramModel::build(&docs, min_df)
}

/// tf-idf fragment of a single document.
pub fn tfidf_vector(doc: &Document, model: &NgramModel) -> FeatureVector {
    model.tfidf(&TokenizedDoc::new(&doc.text))
}
