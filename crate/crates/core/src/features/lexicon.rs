use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::EmotionLabel;
use crate::textproc::{idf, FeatureVector, TokenizedDoc};
use crate::{Error, Result};

/// Emotion word lists, one per basic emotion, with optional idf weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmotionLexicon {
    sets: [BTreeSet<String>; 6],
    idf: Option<BTreeMap<String, f64>>,
}

/// Parses `emotion<TAB>word` lines. Blank lines and `#` comments are skipped.
pub fn load_emotion_lexicon(bytes: &[u8]) -> Result<EmotionLexicon> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::format_nl("lexicon is not valid UTF-8"))?;
    let mut lexicon = EmotionLexicon::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (emotion, word) =
            line.split_once('\t').ok_or_else(|| Error::format(i + 1, "expected `emotion<TAB>word`"))?;
        let emotion: EmotionLabel = emotion.parse().map_err(|e: Error| Error::format(i + 1, e.to_string()))?;
        let word = word.trim();
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::format(i + 1, format!("invalid lexicon word `{word}`")));
        }
        lexicon.insert(emotion, word);
    }
    Ok(lexicon)
}

impl EmotionLexicon {
    pub fn insert(&mut self, emotion: EmotionLabel, word: &str) {
        self.sets[emotion as usize].insert(word.to_lowercase());
    }

    pub fn words(&self, emotion: EmotionLabel) -> &BTreeSet<String> {
        &self.sets[emotion as usize]
    }

    /// Every word of every list, deduplicated.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.sets.iter().flatten().map(String::as_str).collect()
    }

    pub fn idf(&self) -> Option<&BTreeMap<String, f64>> {
        self.idf.as_ref()
    }

    pub fn with_idf(mut self, idf: BTreeMap<String, f64>) -> Self {
        self.idf = Some(idf);
        self
    }

    /// ln(N / df) for each lexicon word over `docs`. Words absent from the
    /// corpus are treated as seen once.
    pub fn compute_idf(&self, docs: &[TokenizedDoc]) -> BTreeMap<String, f64> {
        let n = docs.len().max(1);
        let present: Vec<BTreeSet<&str>> = docs.iter().map(|d| d.surfaces().into_iter().collect()).collect();
        self.vocabulary()
            .into_iter()
            .map(|w| {
                let df = present.iter().filter(|p| p.contains(w)).count().max(1);
                (w.to_string(), idf(n, df))
            })
            .collect()
    }

    fn weight(&self, word: &str) -> f64 {
        match &self.idf {
            Some(table) => table.get(word).copied().unwrap_or(0.0),
            None => 1.0,
        }
    }

    /// Serializes the lists back to `emotion<TAB>word` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in EmotionLabel::ALL {
            for w in self.words(e) {
                let _ = writeln!(out, "{e}\t{w}");
            }
        }
        out
    }
}

pub fn emotion_feature(e: EmotionLabel) -> String {
    format!("lex:emo:{e}")
}

/// Per emotion, the summed weight of token occurrences found in that
/// emotion's word list.
pub fn emotion_lexicon_features(tokens: &[&str], lexicon: &EmotionLexicon) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for e in EmotionLabel::ALL {
        let words = lexicon.words(e);
        let total: f64 = tokens.iter().filter(|t| words.contains(**t)).map(|t| lexicon.weight(t)).sum();
        fv.set(emotion_feature(e), total);
    }
    fv
}

/// Positive, negative and negation word lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
    negation: BTreeSet<String>,
}

/// Tokens before a sentiment word that are searched for a negation.
pub const NEGATION_WINDOW: usize = 2;

pub const SENT_POS: &str = "lex:sent:pos";
pub const SENT_NEG: &str = "lex:sent:neg";
pub const SENT_NET: &str = "lex:sent:net";
pub const SENT_NEGATIONS: &str = "lex:sent:negations";

impl SentimentLexicon {
    pub fn new(
        positive: impl IntoIterator<Item = String>,
        negative: impl IntoIterator<Item = String>,
        negation: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let positive = lowered(positive);
        let negative = lowered(negative);
        let negation = lowered(negation);
        if let Some(w) = positive.intersection(&negative).next() {
            return Err(Error::InvalidInput(format!("`{w}` is listed as both positive and negative")));
        }
        Ok(SentimentLexicon { positive, negative, negation })
    }
}

fn lowered(words: impl IntoIterator<Item = String>) -> BTreeSet<String> {
    words.into_iter().map(|w| w.to_lowercase()).collect()
}

/// Positive/negative word counts, their difference and the number of
/// negations. A sentiment word preceded by a negation within
/// [`NEGATION_WINDOW`] tokens counts toward the opposite polarity.
pub fn sentiment_lexicon_features(tokens: &[&str], lexicon: &SentimentLexicon) -> FeatureVector {
    let (mut pos, mut neg, mut negations) = (0.0, 0.0, 0.0);
    for (i, t) in tokens.iter().enumerate() {
        if lexicon.negation.contains(*t) {
            negations += 1.0;
            continue;
        }
        let polarity = if lexicon.positive.contains(*t) {
            1
        } else if lexicon.negative.contains(*t) {
            -1
        } else {
            continue;
        };
        let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i].iter().any(|p| lexicon.negation.contains(*p));
        match (polarity, negated) {
            (1, false) | (-1, true) => pos += 1.0,
            _ => neg += 1.0,
        }
    }
    let mut fv = FeatureVector::new();
    fv.set(SENT_POS, pos);
    fv.set(SENT_NEG, neg);
    fv.set(SENT_NET, pos - neg);
    fv.set(SENT_NEGATIONS, negations);
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resources;

    #[test]
    fn parse_small_lexicon() {
        let lex = load_emotion_lexicon(b"joy\thappy\nfear\tdread").unwrap();
        assert!(lex.words(EmotionLabel::Joy).contains("happy"));
        assert!(lex.words(EmotionLabel::Fear).contains("dread"));
        assert!(lex.words(EmotionLabel::Love).is_empty());
    }

    #[test]
    fn empty_lexicon_has_six_empty_sets() {
        let lex = load_emotion_lexicon(b"").unwrap();
        assert!(EmotionLabel::ALL.iter().all(|&e| lex.words(e).is_empty()));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        match load_emotion_lexicon(b"joy\thappy\nhate\tgrr\n") {
            Err(Error::Format { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        match load_emotion_lexicon(b"joy happy\n") {
            Err(Error::Format { line: Some(1), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn starter_lexicon_sizes_match_line_counts() {
        let lex = resources::emotion_lexicon();
        for e in EmotionLabel::ALL {
            let lines = resources::EMOTION_LEXICON.lines().filter(|l| l.split('\t').next() == Some(e.as_str())).count();
            assert_eq!(lex.words(e).len(), lines, "{e}");
        }
        assert_eq!(lex.vocabulary().len(), 60);
    }

    #[test]
    fn emotion_counts() {
        let lex = load_emotion_lexicon(b"joy\thappy").unwrap();
        assert!(emotion_lexicon_features(&["nothing", "here"], &lex).is_empty());
        let fv = emotion_lexicon_features(&["happy", "happy"], &lex);
        assert_eq!(fv.len(), 1);
        assert_eq!(fv.get("lex:emo:joy"), 2.0);
    }

    #[test]
    fn emotion_counts_match_brute_force() {
        let lex = resources::emotion_lexicon();
        let tokens = ["i", "love", "this", "but", "sad", "and", "sorry", "wow", "love", "panic", "!"];
        let fv = emotion_lexicon_features(&tokens, &lex);
        for e in EmotionLabel::ALL {
            let mut count = 0.0;
            for t in tokens {
                for w in lex.words(e) {
                    if w == t {
                        count += 1.0;
                    }
                }
            }
            assert_eq!(fv.get(&emotion_feature(e)), count, "{e}");
        }
    }

    #[test]
    fn idf_weighting() {
        let lex = load_emotion_lexicon(b"joy\thappy\nfear\tdread").unwrap();
        let docs: Vec<_> =
            ["happy day", "happy happy", "nothing", "neutral"].iter().map(|t| TokenizedDoc::new(t)).collect();
        let table = lex.compute_idf(&docs);
        assert!((table["happy"] - 2f64.ln()).abs() < 1e-12);
        assert!((table["dread"] - 4f64.ln()).abs() < 1e-12);
        let lex = lex.with_idf(table);
        let fv = emotion_lexicon_features(&["happy", "happy"], &lex);
        assert!((fv.get("lex:emo:joy") - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    fn sentiment() -> SentimentLexicon {
        let s = |w: &[&str]| w.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        SentimentLexicon::new(s(&["great"]), s(&["bad"]), s(&["not", "never"])).unwrap()
    }

    #[test]
    fn sentiment_examples() {
        let lex = sentiment();
        let fv = sentiment_lexicon_features(&["great"], &lex);
        assert_eq!((fv.get(SENT_POS), fv.get(SENT_NET), fv.len()), (1.0, 1.0, 2));

        let fv = sentiment_lexicon_features(&["not", "great"], &lex);
        assert_eq!(fv.get(SENT_NEG), 1.0);
        assert_eq!(fv.get(SENT_NEGATIONS), 1.0);
        assert_eq!(fv.get(SENT_NET), -1.0);
        assert!(!fv.contains(SENT_POS));

        assert!(sentiment_lexicon_features(&[], &lex).is_empty());
    }

    #[test]
    fn negation_window_is_two_tokens() {
        let lex = sentiment();
        let fv = sentiment_lexicon_features(&["never", "that", "bad"], &lex);
        assert_eq!((fv.get(SENT_POS), fv.get(SENT_NEG)), (1.0, 0.0));
        let fv = sentiment_lexicon_features(&["never", "was", "that", "bad"], &lex);
        assert_eq!((fv.get(SENT_POS), fv.get(SENT_NEG)), (0.0, 1.0));
    }

    #[test]
    fn overlapping_sentiment_lists_rejected() {
        let w = vec!["x".to_string()];
        assert!(SentimentLexicon::new(w.clone(), w, vec![]).is_err());
    }
}
