use std::path::Path;

use super::emotion::{IDF_DIR, NGRAM_DIR};
use super::metrics::{evaluate, PerformanceReport};
use super::model::{train_linear, LinearModel};
use super::solver::SolverConfig;
use super::split::{stratified_split, DEFAULT_SEED, DEFAULT_TEST_FRACTION};
use super::tuning::{tune_cost, Scoring, DEFAULT_FOLDS, DEFAULT_GRID};
use super::DEFAULT_SOLVER;
use crate::corpus::{Document, PolarityLabel};
use crate::features::{
    build_wordspace, load_wordspace, save_wordspace, FeatureConfig, FeatureExtractor, FeatureResources, Fragments,
    WordSpace,
};
use crate::pipeline::{run_pipeline, PipelineConfig};
use crate::resources;
use crate::textproc::{read_text, write_file, FeatureVector, NgramModel, TokenizedDoc, DEFAULT_MIN_DF};
use crate::{Error, Result};

/// Class order of polarity models; also the tie-break order.
pub const POLARITY_CLASSES: [&str; 3] = ["neutral", "positive", "negative"];

pub const POLARITY_MODEL_FILE: &str = "model_polarity.model";
pub const FEATURES_FILE: &str = "features.cfg";
pub const WORDSPACE_FILE: &str = "wordspace.dsm";
/// Context window used when a word space is built from the training data.
pub const DEFAULT_WINDOW: usize = 2;

#[derive(Debug, Clone)]
pub struct PolarityOptions {
    pub seed: u64,
    pub test_fraction: f64,
    pub grid: Vec<f64>,
    pub folds: usize,
    pub min_df: usize,
    pub solver: SolverConfig,
    /// Word space for the semantic fragment; built from the training split
    /// when absent and needed.
    pub wordspace: Option<WordSpace>,
}

impl Default for PolarityOptions {
    fn default() -> Self {
        PolarityOptions {
            seed: DEFAULT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            grid: DEFAULT_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
            min_df: DEFAULT_MIN_DF,
            solver: DEFAULT_SOLVER,
            wordspace: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolarityClassifier {
    extractor: FeatureExtractor,
    model: LinearModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarityPrediction {
    pub label: PolarityLabel,
    pub score: f64,
    pub unseen: usize,
}

fn polarity_labels(docs: &[Document]) -> Result<Vec<&'static str>> {
    docs.iter()
        .map(|d| {
            d.polarity()
                .map(PolarityLabel::as_str)
                .map_err(|e| Error::InvalidInput(format!("document `{}`: {e}", d.id)))
        })
        .collect()
}

fn fit_classifier(
    docs: &[Document],
    labels: &[&str],
    config: &FeatureConfig,
    options: &PolarityOptions,
) -> Result<(PolarityClassifier, Vec<FeatureVector>)> {
    let tokenized: Vec<TokenizedDoc> = docs.iter().map(|d| TokenizedDoc::new(&d.text)).collect();
    let mut res = FeatureResources::with_bundled_lexicons(NgramModel::build(&tokenized, options.min_df)?);
    if config.fragments.semantic {
        res.wordspace = Some(match &options.wordspace {
            Some(ws) => ws.clone(),
            None => build_wordspace(&tokenized, config.vector_dim, DEFAULT_WINDOW, options.seed)?,
        });
    }
    let extractor = FeatureExtractor::new(config.clone(), res)?;
    let vectors: Vec<FeatureVector> = tokenized.iter().map(|t| extractor.extract_tokenized(t)).collect();
    let tuning = tune_cost(
        &vectors,
        labels,
        &POLARITY_CLASSES,
        options.solver,
        &options.grid,
        options.folds,
        Scoring::MacroF,
        options.seed,
    )?;
    let model = train_linear(&vectors, labels, &POLARITY_CLASSES, options.solver, tuning.best_cost, options.seed)?;
    Ok((PolarityClassifier { extractor, model }, vectors))
}

/// Trains a one-vs-rest polarity model on a stratified training split and
/// reports on the held-out part.
pub fn train_polarity(
    docs: &[Document],
    config: &FeatureConfig,
    options: &PolarityOptions,
) -> Result<(PolarityClassifier, PerformanceReport)> {
    let labels = polarity_labels(docs)?;
    if let Some(missing) = POLARITY_CLASSES.iter().find(|c| !labels.contains(c)) {
        return Err(Error::InvalidInput(format!("no `{missing}` documents in the polarity corpus")));
    }
    let (train, test) = stratified_split(&labels, options.test_fraction, options.seed)?;
    let train_docs: Vec<Document> = train.iter().map(|&i| docs[i].clone()).collect();
    let train_labels: Vec<&str> = train.iter().map(|&i| labels[i]).collect();
    let (classifier, _) = fit_classifier(&train_docs, &train_labels, config, options)?;

    let predicted: Vec<(String, String)> = test
        .iter()
        .map(|&i| (docs[i].id.clone(), classifier.classify(&docs[i].text).label.as_str().to_string()))
        .collect();
    let gold: Vec<(String, String)> = test.iter().map(|&i| (docs[i].id.clone(), labels[i].to_string())).collect();
    let mut report = evaluate(&predicted, &gold, &POLARITY_CLASSES)?;
    report.best_cost = Some(classifier.model.cost);
    Ok((classifier, report))
}

impl PolarityClassifier {
    /// Trains on every document, without a held-out split.
    pub fn train_all(docs: &[Document], config: &FeatureConfig, options: &PolarityOptions) -> Result<Self> {
        let labels = polarity_labels(docs)?;
        Ok(fit_classifier(docs, &labels, config, options)?.0)
    }

    /// Default model trained on the bundled gold sample mapped to polarity.
    /// Without a supplied word space, one is built from the same sample.
    pub fn bundled(config: &FeatureConfig, wordspace: Option<WordSpace>, seed: u64) -> Result<Self> {
        let options = PolarityOptions { seed, wordspace, ..PolarityOptions::default() };
        Self::train_all(&resources::gold_corpus().to_polarity(), config, &options)
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn extractor(&self) -> &FeatureExtractor {
        &self.extractor
    }

    pub fn classify(&self, text: &str) -> PolarityPrediction {
        let fv = self.extractor.extract(text);
        let p = self.model.predict(&fv);
        let label = p.label.parse().expect("polarity models only carry polarity classes");
        PolarityPrediction { label, score: p.score, unseen: self.model.unseen(&fv) }
    }

    /// Writes the model, its n-gram and idf lists, the feature settings and
    /// (for the semantic fragment) the word space into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let cfg = self.extractor.config();
        let res = self.extractor.resources();
        res.ngrams.save(&dir.join(NGRAM_DIR), &dir.join(IDF_DIR))?;
        write_file(&dir.join(POLARITY_MODEL_FILE), self.model.to_text().as_bytes())?;
        let settings = format!(
            "fragments\t{}\npoliteness_mood\t{}\nvector_dim\t{}\n",
            cfg.fragments, cfg.politeness_mood, cfg.vector_dim
        );
        write_file(&dir.join(FEATURES_FILE), settings.as_bytes())?;
        if let Some(ws) = &res.wordspace {
            write_file(&dir.join(WORDSPACE_FILE), save_wordspace(ws))?;
        }
        Ok(())
    }

    /// Loads a directory written by [`PolarityClassifier::save`]. Allow-lists
    /// from `config` are kept; its fragments must match the saved ones.
    pub fn load(dir: &Path, config: &FeatureConfig) -> Result<Self> {
        let mut fragments = None;
        let mut politeness = None;
        let mut dim = None;
        let settings_path = dir.join(FEATURES_FILE);
        for (i, line) in read_text(&settings_path)?.lines().enumerate() {
            let bad = || Error::format(i + 1, format!("malformed setting in {}", settings_path.display()));
            let (key, value) = line.split_once('\t').ok_or_else(bad)?;
            match key {
                "fragments" => fragments = Some(value.parse::<Fragments>()?),
                "politeness_mood" => politeness = Some(value.parse::<bool>().map_err(|_| bad())?),
                "vector_dim" => dim = Some(value.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (fragments, politeness_mood, vector_dim) = match (fragments, politeness, dim) {
            (Some(f), Some(p), Some(d)) => (f, p, d),
            _ => return Err(Error::format_nl(format!("incomplete settings in {}", settings_path.display()))),
        };
        if fragments != config.fragments {
            return Err(Error::Config(format!(
                "model was trained with features [{fragments}], but [{}] were requested",
                config.fragments
            )));
        }
        let mut res =
            FeatureResources::with_bundled_lexicons(NgramModel::load(&dir.join(NGRAM_DIR), &dir.join(IDF_DIR))?);
        if fragments.semantic {
            let path = dir.join(WORDSPACE_FILE);
            res.wordspace = Some(load_wordspace(read_text(&path)?.as_bytes())?);
        }
        let config = FeatureConfig { fragments, politeness_mood, vector_dim, ..config.clone() };
        let extractor = FeatureExtractor::new(config, res)?;
        let model = LinearModel::from_text(&read_text(&dir.join(POLARITY_MODEL_FILE))?)?;
        if model.classes != POLARITY_CLASSES {
            return Err(Error::Config(format!("not a polarity model: classes {:?}", model.classes)));
        }
        Ok(PolarityClassifier { extractor, model })
    }
}

/// Classifies `docs` on the pipeline, returning predictions in input order.
pub fn classify_polarity(
    classifier: &PolarityClassifier,
    docs: &[Document],
    config: &PipelineConfig,
) -> Result<Vec<PolarityPrediction>> {
    let mut out = Vec::with_capacity(docs.len());
    let mut failed = None;
    run_pipeline(
        docs.iter().map(Ok),
        |d: &Document| Ok(classifier.classify(&d.text)),
        |seq, o| {
            match o {
                Ok(p) => out.push(p),
                Err(e) => {
                    failed.get_or_insert((seq, e));
                }
            }
            Ok(())
        },
        config,
    )?;
    if let Some((seq, e)) = failed {
        return Err(Error::InvalidInput(format!("document `{}`: {e}", docs[seq as usize].id)));
    }
    Ok(out)
}

/// Scores polarity predictions against the labels of `docs`.
pub fn evaluate_polarity(docs: &[Document], predictions: &[PolarityPrediction]) -> Result<PerformanceReport> {
    let labels = polarity_labels(docs)?;
    let gold: Vec<(String, String)> = docs.iter().zip(&labels).map(|(d, l)| (d.id.clone(), l.to_string())).collect();
    let predicted: Vec<(String, String)> =
        docs.iter().zip(predictions).map(|(d, p)| (d.id.clone(), p.label.as_str().to_string())).collect();
    evaluate(&predicted, &gold, &POLARITY_CLASSES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMode;

    fn corpus() -> Vec<Document> {
        let words = [("positive", "great"), ("negative", "awful"), ("neutral", "config")];
        let mut docs = Vec::new();
        for i in 0..45 {
            let (label, w) = words[i % 3];
            docs.push(Document::labeled(i.to_string(), label, format!("{w} {w} item{} value", i % 5)));
        }
        docs
    }

    #[test]
    fn keyword_model_separates_classes() {
        let (c, report) =
            train_polarity(&corpus(), &FeatureConfig::polarity(FeatureMode::Keyword, 0), &PolarityOptions::default())
                .unwrap();
        assert_eq!(report.macro_f1, 1.0);
        assert_eq!(c.classify("awful awful").label, PolarityLabel::Negative);
    }

    #[test]
    fn missing_class_is_an_error() {
        let docs: Vec<Document> = corpus().into_iter().filter(|d| d.label.as_deref() != Some("neutral")).collect();
        assert!(train_polarity(&docs, &FeatureConfig::polarity(FeatureMode::Keyword, 0), &PolarityOptions::default())
            .is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = FeatureConfig::polarity(FeatureMode::All, 12);
        let c = PolarityClassifier::train_all(&corpus(), &cfg, &PolarityOptions::default()).unwrap();
        c.save(tmp.path()).unwrap();
        let back = PolarityClassifier::load(tmp.path(), &cfg).unwrap();
        assert_eq!(back.model(), c.model());
        for d in corpus() {
            assert_eq!(back.classify(&d.text), c.classify(&d.text));
        }
        assert!(PolarityClassifier::load(tmp.path(), &FeatureConfig::polarity(FeatureMode::Keyword, 12)).is_err());
    }
}
