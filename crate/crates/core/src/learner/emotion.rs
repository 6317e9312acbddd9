use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::{evaluate, PerformanceReport};
use super::model::{train_linear, LinearModel};
use super::solver::SolverConfig;
use super::split::{downsample_indices, stratified_split, DEFAULT_SEED, DEFAULT_TEST_FRACTION};
use super::tuning::{tune_cost, Scoring, DEFAULT_FOLDS, DEFAULT_GRID};
use super::DEFAULT_SOLVER;
use crate::corpus::{format_row, presence_str, serialize_corpus, Delimiter, Document, EmotionLabel};
use crate::features::{load_emotion_lexicon, FeatureConfig, FeatureExtractor, FeatureResources};
use crate::pipeline::{run_pipeline, PipelineConfig};
use crate::resources;
use crate::textproc::{
    parse_idf_table, read_text, write_file, FeatureVector, NgramModel, TokenizedDoc, DEFAULT_MIN_DF,
};
use crate::{Error, Result};

pub const NGRAM_DIR: &str = "n-grams";
pub const IDF_DIR: &str = "idfs";
pub const EMOTION_IDF_FILE: &str = "EmotionWordsIdf.txt";
pub const EMOTION_LEXICON_FILE: &str = "EmotionLexicon.txt";
pub const LIBLINEAR_DIR: &str = "liblinear";
pub const TRAINING_SET: &str = "trainingSet.csv";
pub const TEST_SET: &str = "testSet.csv";

const YES: &str = "YES";
const NO: &str = "NO";
const BINARY: [&str; 2] = [YES, NO];

/// Sampling regime of the training split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    DownSampling,
    NoDownSampling,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::DownSampling, Regime::NoDownSampling];

    pub fn dir_name(self) -> &'static str {
        match self {
            Regime::DownSampling => "DownSampling",
            Regime::NoDownSampling => "NoDownSampling",
        }
    }
}

pub fn training_dir_name(corpus_name: &str, emotion: EmotionLabel) -> String {
    format!("training_{corpus_name}_{emotion}")
}

pub fn classification_dir_name(corpus_name: &str, emotion: EmotionLabel) -> String {
    format!("classification_{corpus_name}_{emotion}")
}

pub fn model_file(emotion: EmotionLabel, id: u8) -> String {
    format!("model_{emotion}_{id}.model")
}

pub fn performance_file(emotion: EmotionLabel, id: u8) -> String {
    format!("performance_{emotion}_{id}.txt")
}

pub fn predictions_file(emotion: EmotionLabel, id: u8) -> String {
    format!("predictions_{emotion}_{id}.csv")
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub emotion: EmotionLabel,
    pub politeness_mood: bool,
    /// File name of the input corpus, used in the output directory name.
    pub corpus_name: String,
    pub output_root: PathBuf,
    pub delimiter: Delimiter,
    pub seed: u64,
    pub test_fraction: f64,
    pub grid: Vec<f64>,
    pub folds: usize,
    pub min_df: usize,
    pub workers: usize,
}

impl SuiteOptions {
    pub fn new(emotion: EmotionLabel, corpus_name: impl Into<String>, output_root: impl Into<PathBuf>) -> Self {
        SuiteOptions {
            emotion,
            politeness_mood: false,
            corpus_name: corpus_name.into(),
            output_root: output_root.into(),
            delimiter: Delimiter::Semicolon,
            seed: DEFAULT_SEED,
            test_fraction: DEFAULT_TEST_FRACTION,
            grid: DEFAULT_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
            min_df: DEFAULT_MIN_DF,
            workers: crate::pipeline::available_cores(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegimeArtifacts {
    pub regime: Regime,
    pub dir: PathBuf,
    pub training_set: PathBuf,
    pub test_set: PathBuf,
    pub models: Vec<PathBuf>,
    pub performance: Vec<PathBuf>,
    pub predictions: Vec<PathBuf>,
    /// One report per solver id, in id order.
    pub reports: Vec<PerformanceReport>,
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub root: PathBuf,
    pub ngram_dir: PathBuf,
    pub idf_dir: PathBuf,
    pub feature_csv: PathBuf,
    pub regimes: Vec<RegimeArtifacts>,
}

fn presence_labels(docs: &[Document]) -> Result<Vec<&'static str>> {
    docs.iter()
        .map(|d| d.presence().map(presence_str).map_err(|e| Error::InvalidInput(format!("document `{}`: {e}", d.id))))
        .collect()
}

/// Feature resources for an emotion model trained on `docs`: n-grams plus the
/// bundled lexicon weighted by idf over the same documents.
fn emotion_resources(docs: &[TokenizedDoc], min_df: usize) -> Result<FeatureResources> {
    let ngrams = NgramModel::build(docs, min_df)?;
    let lexicon = resources::emotion_lexicon();
    let idf = lexicon.compute_idf(docs);
    let mut res = FeatureResources::with_bundled_lexicons(ngrams);
    res.emotion_lexicon = lexicon.with_idf(idf);
    Ok(res)
}

fn idf_text(table: &BTreeMap<String, f64>) -> String {
    table.iter().map(|(t, v)| format!("{t}\t{v}\n")).collect()
}

fn feature_csv(
    docs: &[Document],
    labels: &[&str],
    vectors: &[FeatureVector],
    names: &[String],
    d: Delimiter,
) -> String {
    let mut out = String::new();
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(names.iter().cloned());
    out.push_str(&format_row(&header, d));
    for ((doc, label), fv) in docs.iter().zip(labels).zip(vectors) {
        let mut row = vec![doc.id.clone(), label.to_string()];
        row.extend(names.iter().map(|n| fv.get(n).to_string()));
        out.push_str(&format_row(&row, d));
    }
    out
}

fn predictions_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str)>, d: Delimiter) -> String {
    let mut out = format_row(&["id", "predicted"], d);
    for (id, p) in rows {
        out.push_str(&format_row(&[id, p], d));
    }
    out
}

struct JobOutput {
    model: String,
    performance: String,
    predictions: String,
    report: PerformanceReport,
}

/// Trains and evaluates all eight solvers under both sampling regimes and
/// writes the `training_<corpus>_<emotion>/` tree under `output_root`.
///
/// The tree is assembled in a scratch directory next to its destination and
/// moved into place only when every job succeeded; an existing tree of the
/// same name is replaced.
pub fn train_emotion_suite(docs: &[Document], options: &SuiteOptions) -> Result<TrainArtifacts> {
    let labels = presence_labels(docs)?;
    let name = training_dir_name(&options.corpus_name, options.emotion);
    let root = options.output_root.join(&name);
    let scratch = options.output_root.join(format!(".{name}.partial"));
    if scratch.exists() {
        fs::remove_dir_all(&scratch).map_err(|e| Error::io(&scratch, e))?;
    }
    match build_suite(docs, &labels, options, &scratch) {
        Ok(artifacts) => {
            if root.exists() {
                fs::remove_dir_all(&root).map_err(|e| Error::io(&root, e))?;
            }
            fs::rename(&scratch, &root).map_err(|e| Error::io(&root, e))?;
            Ok(relocate(artifacts, &scratch, &root))
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&scratch);
            Err(e)
        }
    }
}

fn relocate(a: TrainArtifacts, from: &Path, to: &Path) -> TrainArtifacts {
    let mv = |p: &Path| to.join(p.strip_prefix(from).unwrap_or(p));
    TrainArtifacts {
        root: to.to_path_buf(),
        ngram_dir: mv(&a.ngram_dir),
        idf_dir: mv(&a.idf_dir),
        feature_csv: mv(&a.feature_csv),
        regimes: a
            .regimes
            .into_iter()
            .map(|r| RegimeArtifacts {
                regime: r.regime,
                dir: mv(&r.dir),
                training_set: mv(&r.training_set),
                test_set: mv(&r.test_set),
                models: r.models.iter().map(|p| mv(p)).collect(),
                performance: r.performance.iter().map(|p| mv(p)).collect(),
                predictions: r.predictions.iter().map(|p| mv(p)).collect(),
                reports: r.reports,
            })
            .collect(),
    }
}

fn build_suite(docs: &[Document], labels: &[&str], options: &SuiteOptions, root: &Path) -> Result<TrainArtifacts> {
    let emotion = options.emotion;
    let d = options.delimiter;
    let tokenized: Vec<TokenizedDoc> = docs.iter().map(|doc| TokenizedDoc::new(&doc.text)).collect();
    let extractor = FeatureExtractor::new(
        FeatureConfig::emotion(options.politeness_mood),
        emotion_resources(&tokenized, options.min_df)?,
    )?;
    let vectors: Vec<FeatureVector> = tokenized.iter().map(|t| extractor.extract_tokenized(t)).collect();

    let ngram_dir = root.join(NGRAM_DIR);
    let idf_dir = root.join(IDF_DIR);
    extractor.resources().ngrams.save(&ngram_dir, &idf_dir)?;
    let lexicon = &extractor.resources().emotion_lexicon;
    write_file(&idf_dir.join(EMOTION_IDF_FILE), idf_text(lexicon.idf().expect("idf computed above")).as_bytes())?;
    write_file(&idf_dir.join(EMOTION_LEXICON_FILE), lexicon.to_tsv().as_bytes())?;
    let feature_csv_path = root.join(format!("feature-{emotion}.csv"));
    let names = extractor.feature_space();
    write_file(&feature_csv_path, feature_csv(docs, labels, &vectors, &names, d).as_bytes())?;

    let (train, test) = stratified_split(labels, options.test_fraction, options.seed)?;
    let train_labels: Vec<&str> = train.iter().map(|&i| labels[i]).collect();
    let downsampled: Vec<usize> =
        downsample_indices(&train_labels, options.seed)?.into_iter().map(|k| train[k]).collect();
    let regime_rows = |r: Regime| match r {
        Regime::DownSampling => &downsampled,
        Regime::NoDownSampling => &train,
    };

    let mut regimes = Vec::new();
    for regime in Regime::ALL {
        let dir = root.join(LIBLINEAR_DIR).join(regime.dir_name());
        let pick = |idx: &[usize]| idx.iter().map(|&i| with_presence(&docs[i], labels[i])).collect::<Vec<_>>();
        let training_set = dir.join(TRAINING_SET);
        let test_set = dir.join(TEST_SET);
        write_file(&training_set, serialize_corpus(&pick(regime_rows(regime)), d, true).as_bytes())?;
        write_file(&test_set, serialize_corpus(&pick(&test), d, true).as_bytes())?;
        regimes.push(RegimeArtifacts {
            regime,
            dir,
            training_set,
            test_set,
            models: Vec::new(),
            performance: Vec::new(),
            predictions: Vec::new(),
            reports: Vec::new(),
        });
    }

    let jobs: Vec<(usize, SolverConfig)> =
        (0..Regime::ALL.len()).flat_map(|r| SolverConfig::ALL.into_iter().map(move |s| (r, s))).collect();
    let work = |(r, solver): (usize, SolverConfig)| -> Result<JobOutput> {
        let regime = Regime::ALL[r];
        let rows = regime_rows(regime);
        let x: Vec<FeatureVector> = rows.iter().map(|&i| vectors[i].clone()).collect();
        let y: Vec<&str> = rows.iter().map(|&i| labels[i]).collect();
        let tuning =
            tune_cost(&x, &y, &BINARY, solver, &options.grid, options.folds, Scoring::PositiveF, options.seed)?;
        let model = train_linear(&x, &y, &BINARY, solver, tuning.best_cost, options.seed)?;
        let predicted: Vec<(String, String)> =
            test.iter().map(|&i| (docs[i].id.clone(), model.predict(&vectors[i]).label)).collect();
        let gold: Vec<(String, String)> = test.iter().map(|&i| (docs[i].id.clone(), labels[i].to_string())).collect();
        let mut report = evaluate(&predicted, &gold, &BINARY)?;
        tuning.annotate(&mut report);
        let mut title = String::new();
        let _ = writeln!(title, "emotion: {emotion}");
        let _ = writeln!(title, "solver: {solver}");
        let _ = writeln!(title, "sampling: {}", regime.dir_name());
        let _ = write!(title, "training documents: {}, test documents: {}", rows.len(), test.len());
        Ok(JobOutput {
            model: model.to_text(),
            performance: report.render(&title),
            predictions: predictions_csv(predicted.iter().map(|(i, p)| (i.as_str(), p.as_str())), d),
            report,
        })
    };

    let mut failure = None;
    let config = PipelineConfig::with_workers(options.workers.max(1)).batch_size(1);
    run_pipeline(
        jobs.iter().copied().map(Ok),
        work,
        |seq, outcome| {
            let (r, solver) = jobs[seq as usize];
            let out = match outcome {
                Ok(o) => o,
                Err(msg) => {
                    failure.get_or_insert_with(|| format!("{} solver {}: {msg}", Regime::ALL[r].dir_name(), solver.id));
                    return Ok(());
                }
            };
            let reg = &mut regimes[r];
            let model = reg.dir.join(model_file(emotion, solver.id));
            let perf = reg.dir.join(performance_file(emotion, solver.id));
            let preds = reg.dir.join(predictions_file(emotion, solver.id));
            write_file(&model, out.model.as_bytes())?;
            write_file(&perf, out.performance.as_bytes())?;
            write_file(&preds, out.predictions.as_bytes())?;
            reg.models.push(model);
            reg.performance.push(perf);
            reg.predictions.push(preds);
            reg.reports.push(out.report);
            Ok(())
        },
        &config,
    )?;
    if let Some(msg) = failure {
        return Err(Error::InvalidInput(format!("training failed: {msg}")));
    }

    Ok(TrainArtifacts { root: root.to_path_buf(), ngram_dir, idf_dir, feature_csv: feature_csv_path, regimes })
}

fn with_presence(doc: &Document, label: &str) -> Document {
    Document::labeled(doc.id.clone(), label, doc.text.clone())
}

/// Binary classifier for one emotion.
#[derive(Debug, Clone)]
pub struct EmotionClassifier {
    pub emotion: EmotionLabel,
    extractor: FeatureExtractor,
    model: LinearModel,
}

/// Outcome of classifying one text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionPrediction {
    pub present: bool,
    pub score: f64,
    /// Features the model never saw in training.
    pub unseen: usize,
}

impl EmotionClassifier {
    pub fn new(emotion: EmotionLabel, extractor: FeatureExtractor, model: LinearModel) -> Result<Self> {
        if model.classes != BINARY {
            return Err(Error::Config(format!("expected a YES/NO model, found classes {:?}", model.classes)));
        }
        Ok(EmotionClassifier { emotion, extractor, model })
    }

    /// Loads a model file plus the idf and n-gram directories of a training run.
    /// The emotion lexicon and its idf table are read from the idf directory
    /// when present there, otherwise the bundled lexicon is used unweighted.
    pub fn load(
        emotion: EmotionLabel,
        model_path: &Path,
        idf_dir: &Path,
        ngram_dir: &Path,
        politeness_mood: bool,
    ) -> Result<Self> {
        let model = LinearModel::from_text(&read_text(model_path)?)?;
        let ngrams = NgramModel::load(ngram_dir, idf_dir)?;
        let mut res = FeatureResources::with_bundled_lexicons(ngrams);
        let lexicon_path = idf_dir.join(EMOTION_LEXICON_FILE);
        if lexicon_path.exists() {
            res.emotion_lexicon = load_emotion_lexicon(read_text(&lexicon_path)?.as_bytes())?;
        }
        let idf_path = idf_dir.join(EMOTION_IDF_FILE);
        if idf_path.exists() {
            res.emotion_lexicon = res.emotion_lexicon.with_idf(parse_idf_table(&read_text(&idf_path)?)?);
        }
        let extractor = FeatureExtractor::new(FeatureConfig::emotion(politeness_mood), res)?;
        Self::new(emotion, extractor, model)
    }

    /// Trains on all of `docs` (labels YES/NO) with the default solver and a
    /// tuned cost.
    pub fn train(emotion: EmotionLabel, docs: &[Document], politeness_mood: bool, seed: u64) -> Result<Self> {
        let labels = presence_labels(docs)?;
        let tokenized: Vec<TokenizedDoc> = docs.iter().map(|d| TokenizedDoc::new(&d.text)).collect();
        let extractor = FeatureExtractor::new(
            FeatureConfig::emotion(politeness_mood),
            emotion_resources(&tokenized, DEFAULT_MIN_DF)?,
        )?;
        let vectors: Vec<FeatureVector> = tokenized.iter().map(|t| extractor.extract_tokenized(t)).collect();
        let tuning = tune_cost(
            &vectors,
            &labels,
            &BINARY,
            DEFAULT_SOLVER,
            &DEFAULT_GRID,
            DEFAULT_FOLDS,
            Scoring::PositiveF,
            seed,
        )?;
        let model = train_linear(&vectors, &labels, &BINARY, DEFAULT_SOLVER, tuning.best_cost, seed)?;
        Self::new(emotion, extractor, model)
    }

    /// Default model trained on the bundled gold sample.
    pub fn bundled(emotion: EmotionLabel, politeness_mood: bool, seed: u64) -> Result<Self> {
        Self::train(emotion, &resources::gold_corpus().for_emotion(emotion)?, politeness_mood, seed)
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn extractor(&self) -> &FeatureExtractor {
        &self.extractor
    }

    pub fn classify(&self, text: &str) -> EmotionPrediction {
        let fv = self.extractor.extract(text);
        let p = self.model.predict(&fv);
        EmotionPrediction { present: p.label == YES, score: p.score, unseen: self.model.unseen(&fv) }
    }
}

/// Predictions for a corpus, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionRun {
    pub ids: Vec<String>,
    pub predictions: Vec<EmotionPrediction>,
}

impl EmotionRun {
    pub fn unseen_features(&self) -> usize {
        self.predictions.iter().map(|p| p.unseen).sum()
    }

    pub fn predictions_csv(&self, d: Delimiter) -> String {
        predictions_csv(self.ids.iter().zip(&self.predictions).map(|(i, p)| (i.as_str(), presence_str(p.present))), d)
    }

    /// Scores the run against the gold labels of `docs`.
    pub fn evaluate(&self, docs: &[Document]) -> Result<PerformanceReport> {
        let gold_labels = presence_labels(docs)?;
        let gold: Vec<(String, String)> =
            docs.iter().zip(gold_labels).map(|(d, l)| (d.id.clone(), l.to_string())).collect();
        let predicted: Vec<(String, String)> = self
            .ids
            .iter()
            .zip(&self.predictions)
            .map(|(i, p)| (i.clone(), presence_str(p.present).to_string()))
            .collect();
        evaluate(&predicted, &gold, &BINARY)
    }
}

/// Classifies `docs` on the pipeline.
pub fn classify_emotions(
    classifier: &EmotionClassifier,
    docs: &[Document],
    config: &PipelineConfig,
) -> Result<EmotionRun> {
    let mut predictions = Vec::with_capacity(docs.len());
    let mut failed = None;
    run_pipeline(
        docs.iter().map(Ok),
        |d: &Document| Ok(classifier.classify(&d.text)),
        |seq, o| {
            match o {
                Ok(p) => predictions.push(p),
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
    Ok(EmotionRun { ids: docs.iter().map(|d| d.id.clone()).collect(), predictions })
}

/// Writes `classification_<corpus>_<emotion>/` with the predictions and,
/// when gold labels are supplied, the performance report.
pub fn write_classification(
    output_root: &Path,
    corpus_name: &str,
    emotion: EmotionLabel,
    run: &EmotionRun,
    gold: Option<&[Document]>,
    d: Delimiter,
) -> Result<PathBuf> {
    let dir = output_root.join(classification_dir_name(corpus_name, emotion));
    write_file(&dir.join(format!("predictions_{emotion}.csv")), run.predictions_csv(d).as_bytes())?;
    let perf = dir.join(format!("performance_{emotion}.txt"));
    match gold {
        Some(docs) => {
            let report = run.evaluate(docs)?;
            write_file(&perf, report.render(&format!("emotion: {emotion}")).as_bytes())?;
        }
        None if perf.exists() => fs::remove_file(&perf).map_err(|e| Error::io(&perf, e))?,
        None => {}
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_corpus() -> Vec<Document> {
        let mut docs = Vec::new();
        for i in 0..24 {
            let (label, text) = if i % 3 == 0 {
                ("YES", format!("I love this library, love it {i}"))
            } else {
                ("NO", format!("the build output {i} shows a warning"))
            };
            docs.push(Document::labeled(i.to_string(), label, text));
        }
        docs
    }

    #[test]
    fn suite_writes_full_tree() {
        let tmp = tempfile::tempdir().unwrap();
        let mut opts = SuiteOptions::new(EmotionLabel::Love, "small.csv", tmp.path());
        opts.workers = 2;
        let a = train_emotion_suite(&small_corpus(), &opts).unwrap();
        assert_eq!(a.root, tmp.path().join("training_small.csv_love"));
        assert!(a.feature_csv.ends_with("feature-love.csv"));
        for r in &a.regimes {
            assert_eq!(r.models.len(), 8);
            assert!(r.models.iter().chain(&r.performance).chain(&r.predictions).all(|p| p.is_file()));
            assert!(r.training_set.is_file() && r.test_set.is_file());
        }
        let entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(entries.len(), 1, "scratch directory left behind: {entries:?}");
    }

    #[test]
    fn failed_suite_leaves_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let mut docs = small_corpus();
        docs.iter_mut().for_each(|d| d.label = Some("NO".into()));
        docs[0].label = Some("YES".into());
        let opts = SuiteOptions::new(EmotionLabel::Love, "bad.csv", tmp.path());
        assert!(train_emotion_suite(&docs, &opts).is_err());
        assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
    }

    #[test]
    fn classifier_round_trips_through_files() {
        let tmp = tempfile::tempdir().unwrap();
        let docs = small_corpus();
        let opts = SuiteOptions::new(EmotionLabel::Love, "small.csv", tmp.path());
        let a = train_emotion_suite(&docs, &opts).unwrap();
        let regime = &a.regimes[1];
        let c =
            EmotionClassifier::load(EmotionLabel::Love, &regime.models[3], &a.idf_dir, &a.ngram_dir, false).unwrap();
        let test =
            crate::corpus::parse_corpus(&fs::read(&regime.test_set).unwrap(), Delimiter::Semicolon, true).unwrap();
        let run = classify_emotions(&c, &test, &PipelineConfig::with_workers(2)).unwrap();
        assert_eq!(run.predictions_csv(Delimiter::Semicolon), fs::read_to_string(&regime.predictions[3]).unwrap());
    }

    #[test]
    fn bundled_default_model_trains() {
        let c = EmotionClassifier::bundled(EmotionLabel::Joy, false, 42).unwrap();
        assert_eq!(c.model().classes, vec!["YES", "NO"]);
        let p = c.classify("Thanks, this is awesome, I am so happy it works");
        assert!(p.score.is_finite());
    }
}
