//! Feature extractors and per-document feature assembly.
//!
//! Every fragment owns a name prefix (`uni:`, `bi:`, `lex:`, `sem:`, `pol:`,
//! `mood:`), so the union of fragments never collides.

mod discourse;
mod lexicon;
mod wordspace;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use discourse::{discourse_features, mood_features, politeness_score, DiscourseCues, Mood, POLITENESS_FEATURE};
pub use lexicon::{
    emotion_feature, emotion_lexicon_features, load_emotion_lexicon, sentiment_lexicon_features, EmotionLexicon,
    SentimentLexicon, NEGATION_WINDOW, SENT_NEG, SENT_NEGATIONS, SENT_NET, SENT_POS,
};
pub use wordspace::{
    build_wordspace, document_vector, index_vector, load_wordspace, save_wordspace, semantic_feature,
    semantic_features, WordSpace, DSM_MAGIC,
};

use crate::corpus::{Document, EmotionLabel};
use crate::resources;
use crate::textproc::{bigram_feature, unigram_feature, FeatureVector, NgramModel, TokenizedDoc};
use crate::{Error, Result};

/// Feature family selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    All,
    Semantic,
    Lexicon,
    Keyword,
}

impl FeatureMode {
    pub fn letter(self) -> char {
        match self {
            FeatureMode::All => 'A',
            FeatureMode::Semantic => 'S',
            FeatureMode::Lexicon => 'L',
            FeatureMode::Keyword => 'K',
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(FeatureMode::All),
            "S" | "s" => Ok(FeatureMode::Semantic),
            "L" | "l" => Ok(FeatureMode::Lexicon),
            "K" | "k" => Ok(FeatureMode::Keyword),
            _ => Err(Error::Config(format!("unknown feature mode `{s}` (expected A, S, L or K)"))),
        }
    }
}

/// Which fragments make up a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fragments {
    pub keywords: bool,
    pub emotion_lexicon: bool,
    pub sentiment_lexicon: bool,
    pub semantic: bool,
}

impl From<FeatureMode> for Fragments {
    fn from(mode: FeatureMode) -> Self {
        let (k, l, s) = match mode {
            FeatureMode::All => (true, true, true),
            FeatureMode::Semantic => (false, false, true),
            FeatureMode::Lexicon => (false, true, false),
            FeatureMode::Keyword => (true, false, false),
        };
        Fragments { keywords: k, emotion_lexicon: l, sentiment_lexicon: l, semantic: s }
    }
}

impl Fragments {
    /// Keyword and emotion-lexicon features used by the emotion classifier.
    pub const EMOTION: Fragments =
        Fragments { keywords: true, emotion_lexicon: true, sentiment_lexicon: false, semantic: false };

    fn names(self) -> Vec<&'static str> {
        let mut names = Vec::new();
        for (on, name) in [
            (self.keywords, "keywords"),
            (self.emotion_lexicon, "emotion-lexicon"),
            (self.sentiment_lexicon, "sentiment-lexicon"),
            (self.semantic, "semantic"),
        ] {
            if on {
                names.push(name);
            }
        }
        names
    }
}

impl fmt::Display for Fragments {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

impl FromStr for Fragments {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fr = Fragments { keywords: false, emotion_lexicon: false, sentiment_lexicon: false, semantic: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "keywords" => fr.keywords = true,
                "emotion-lexicon" => fr.emotion_lexicon = true,
                "sentiment-lexicon" => fr.sentiment_lexicon = true,
                "semantic" => fr.semantic = true,
                other => return Err(Error::Config(format!("unknown feature fragment `{other}`"))),
            }
        }
        Ok(fr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub fragments: Fragments,
    pub politeness_mood: bool,
    /// Word-space dimension expected by the semantic fragment.
    pub vector_dim: usize,
    pub unigram_allow: Option<BTreeSet<String>>,
    pub bigram_allow: Option<BTreeSet<String>>,
}

impl FeatureConfig {
    pub fn polarity(mode: FeatureMode, vector_dim: usize) -> Self {
        FeatureConfig {
            fragments: mode.into(),
            politeness_mood: false,
            vector_dim,
            unigram_allow: None,
            bigram_allow: None,
        }
    }

    pub fn emotion(politeness_mood: bool) -> Self {
        FeatureConfig {
            fragments: Fragments::EMOTION,
            politeness_mood,
            vector_dim: 0,
            unigram_allow: None,
            bigram_allow: None,
        }
    }

    pub fn with_allow_lists(mut self, unigrams: Option<BTreeSet<String>>, bigrams: Option<BTreeSet<String>>) -> Self {
        self.unigram_allow = unigrams;
        self.bigram_allow = bigrams;
        self
    }
}

/// Immutable resources shared by every extraction.
#[derive(Debug, Clone)]
pub struct FeatureResources {
    pub ngrams: NgramModel,
    pub emotion_lexicon: EmotionLexicon,
    pub sentiment_lexicon: SentimentLexicon,
    pub cues: DiscourseCues,
    pub wordspace: Option<WordSpace>,
}

impl FeatureResources {
    /// Bundled lexicons and cue lists around a trained n-gram model.
    pub fn with_bundled_lexicons(ngrams: NgramModel) -> Self {
        FeatureResources {
            ngrams,
            emotion_lexicon: resources::emotion_lexicon(),
            sentiment_lexicon: resources::sentiment_lexicon(),
            cues: resources::discourse_cues(),
            wordspace: None,
        }
    }
}

/// A validated (config, resources) pair.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    resources: FeatureResources,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig, resources: FeatureResources) -> Result<Self> {
        if config.fragments.semantic {
            let ws = resources
                .wordspace
                .as_ref()
                .ok_or_else(|| Error::Config("semantic features need a word space".into()))?;
            if ws.dim() != config.vector_dim {
                return Err(Error::Config(format!(
                    "word space has dimension {}, but vector size {} was requested",
                    ws.dim(),
                    config.vector_dim
                )));
            }
        }
        Ok(FeatureExtractor { config, resources })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn resources(&self) -> &FeatureResources {
        &self.resources
    }

    pub fn extract(&self, text: &str) -> FeatureVector {
        self.extract_tokenized(&TokenizedDoc::new(text))
    }

    pub fn extract_tokenized(&self, doc: &TokenizedDoc) -> FeatureVector {
        let cfg = &self.config;
        let res = &self.resources;
        let surfaces = doc.surfaces();
        let mut fv = FeatureVector::new();
        if cfg.fragments.keywords {
            fv.merge(res.ngrams.tfidf_restricted(doc, cfg.unigram_allow.as_ref(), cfg.bigram_allow.as_ref()));
        }
        if cfg.fragments.emotion_lexicon {
            fv.merge(emotion_lexicon_features(&surfaces, &res.emotion_lexicon));
        }
        if cfg.fragments.sentiment_lexicon {
            fv.merge(sentiment_lexicon_features(&surfaces, &res.sentiment_lexicon));
        }
        if cfg.fragments.semantic {
            if let Some(ws) = &res.wordspace {
                fv.merge(semantic_features(&document_vector(&surfaces, ws)));
            }
        }
        if cfg.politeness_mood {
            fv.merge(discourse_features(&doc.sentences, &res.cues));
        }
        fv
    }

    /// Every feature name this extractor can emit, in sorted order.
    pub fn feature_space(&self) -> Vec<String> {
        let cfg = &self.config;
        let res = &self.resources;
        let mut names = BTreeSet::new();
        if cfg.fragments.keywords {
            for u in &res.ngrams.unigrams {
                if cfg.unigram_allow.as_ref().is_none_or(|a| a.contains(u)) {
                    names.insert(unigram_feature(u));
                }
            }
            for b in &res.ngrams.bigrams {
                if cfg.bigram_allow.as_ref().is_none_or(|a| a.contains(b)) {
                    names.insert(bigram_feature(b));
                }
            }
        }
        if cfg.fragments.emotion_lexicon {
            names.extend(EmotionLabel::ALL.into_iter().map(emotion_feature));
        }
        if cfg.fragments.sentiment_lexicon {
            names.extend([SENT_POS, SENT_NEG, SENT_NET, SENT_NEGATIONS].map(String::from));
        }
        if cfg.fragments.semantic {
            names.extend((0..cfg.vector_dim).map(semantic_feature));
        }
        if cfg.politeness_mood {
            names.insert(POLITENESS_FEATURE.to_string());
            names.extend(Mood::ALL.into_iter().map(|m| m.feature().to_string()));
        }
        names.into_iter().collect()
    }
}

/// Builds the feature vector of one document for `config`.
pub fn assemble_features(
    doc: &Document,
    config: &FeatureConfig,
    resources: &FeatureResources,
) -> Result<FeatureVector> {
    let extractor = FeatureExtractor::new(config.clone(), resources.clone())?;
    Ok(extractor.extract(&doc.text))
}
