//! Data files bundled with the library.
//!
//! The lexicons are small starter lists, and the gold corpus is a packaged
//! sample used to train the default models. Neither replaces the full
//! resources a production deployment would supply.

use crate::corpus::{parse_emotion_gold, Delimiter, EmotionGoldCorpus};
use crate::features::{load_emotion_lexicon, DiscourseCues, EmotionLexicon, SentimentLexicon};
use crate::textproc::parse_list;

pub const EMOTION_LEXICON: &str = include_str!("../data/emotion_lexicon.tsv");
pub const SENTIMENT_POSITIVE: &str = include_str!("../data/sentiment_positive.txt");
pub const SENTIMENT_NEGATIVE: &str = include_str!("../data/sentiment_negative.txt");
pub const NEGATIONS: &str = include_str!("../data/negations.txt");
pub const POLITENESS_MARKERS: &str = include_str!("../data/politeness_markers.txt");
pub const IMPERATIVE_VERBS: &str = include_str!("../data/imperative_verbs.txt");
pub const CONDITIONAL_MARKERS: &str = include_str!("../data/conditional_markers.txt");
pub const GOLD_EMOTIONS: &str = include_str!("../data/gold_emotions.csv");

/// Label shown wherever a default model is reported.
pub const DEFAULT_MODEL_NOTE: &str =
    "default models are trained at startup on the packaged sample gold corpus (124 documents), not on a full gold standard";

pub fn emotion_lexicon() -> EmotionLexicon {
    load_emotion_lexicon(EMOTION_LEXICON.as_bytes()).expect("bundled emotion lexicon is well formed")
}

pub fn sentiment_lexicon() -> SentimentLexicon {
    SentimentLexicon::new(parse_list(SENTIMENT_POSITIVE), parse_list(SENTIMENT_NEGATIVE), parse_list(NEGATIONS))
        .expect("bundled sentiment lists are disjoint")
}

pub fn discourse_cues() -> DiscourseCues {
    DiscourseCues::new(parse_list(POLITENESS_MARKERS), parse_list(IMPERATIVE_VERBS), parse_list(CONDITIONAL_MARKERS))
}

pub fn gold_corpus() -> EmotionGoldCorpus {
    parse_emotion_gold(GOLD_EMOTIONS.as_bytes(), Delimiter::Semicolon).expect("bundled gold corpus is well formed")
}
