//! Politeness and mood cues.
//!
//! Both are lightweight heuristics over token sequences. Politeness is the
//! share of sentences carrying a marker phrase; mood is decided per sentence
//! (leading base-form verb for imperatives, modal or hypothetical markers
//! for conditionals) and reported one-hot for the majority mood.

use std::collections::BTreeSet;

use crate::textproc::{FeatureVector, Token};

pub const POLITENESS_FEATURE: &str = "pol:score";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mood {
    Indicative,
    Imperative,
    Conditional,
}

impl Mood {
    pub const ALL: [Mood; 3] = [Mood::Indicative, Mood::Imperative, Mood::Conditional];

    pub fn feature(self) -> &'static str {
        match self {
            Mood::Indicative => "mood:indicative",
            Mood::Imperative => "mood:imperative",
            Mood::Conditional => "mood:conditional",
        }
    }
}

/// Word lists behind the politeness and mood heuristics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscourseCues {
    markers: Vec<Vec<String>>,
    imperative_verbs: BTreeSet<String>,
    conditional_markers: BTreeSet<String>,
}

/// Openers skipped before looking for an imperative verb.
const SOFTENERS: &[&str] = &["please", "kindly", "just", "so", "then", "now"];

impl DiscourseCues {
    pub fn new(
        markers: impl IntoIterator<Item = String>,
        imperative_verbs: impl IntoIterator<Item = String>,
        conditional_markers: impl IntoIterator<Item = String>,
    ) -> Self {
        DiscourseCues {
            markers: markers
                .into_iter()
                .map(|m| m.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
                .filter(|m| !m.is_empty())
                .collect(),
            imperative_verbs: imperative_verbs.into_iter().map(|w| w.to_lowercase()).collect(),
            conditional_markers: conditional_markers.into_iter().map(|w| w.to_lowercase()).collect(),
        }
    }

    fn is_polite(&self, sentence: &[Token]) -> bool {
        self.markers
            .iter()
            .any(|m| sentence.windows(m.len()).any(|w| w.iter().zip(m).all(|(t, word)| t.surface == *word)))
    }

    pub fn mood(&self, sentence: &[Token]) -> Mood {
        let question = sentence.last().is_some_and(|t| t.surface == "?");
        let lead = sentence.iter().find(|t| !SOFTENERS.contains(&t.surface.as_str()));
        if !question && lead.is_some_and(|t| self.imperative_verbs.contains(&t.surface)) {
            return Mood::Imperative;
        }
        if sentence.iter().any(|t| self.conditional_markers.contains(&t.surface)) {
            return Mood::Conditional;
        }
        Mood::Indicative
    }
}

/// Fraction of sentences containing a politeness marker; 0 with no sentences.
pub fn politeness_score(sentences: &[Vec<Token>], cues: &DiscourseCues) -> f64 {
    if sentences.is_empty() {
        return 0.0;
    }
    let polite = sentences.iter().filter(|s| cues.is_polite(s)).count();
    polite as f64 / sentences.len() as f64
}

/// One-hot majority mood; ties resolve in the order indicative, imperative,
/// conditional. Empty input gives an empty fragment.
pub fn mood_features(sentences: &[Vec<Token>], cues: &DiscourseCues) -> FeatureVector {
    let mut fv = FeatureVector::new();
    if sentences.is_empty() {
        return fv;
    }
    let mut counts = [0usize; 3];
    for s in sentences {
        counts[cues.mood(s) as usize] += 1;
    }
    let best =
        Mood::ALL
            .into_iter()
            .fold(Mood::Indicative, |best, m| if counts[m as usize] > counts[best as usize] { m } else { best });
    fv.set(best.feature(), 1.0);
    fv
}

/// Politeness score plus mood one-hot.
pub fn discourse_features(sentences: &[Vec<Token>], cues: &DiscourseCues) -> FeatureVector {
    let mut fv = mood_features(sentences, cues);
    fv.set(POLITENESS_FEATURE, politeness_score(sentences, cues));
    fv
}
