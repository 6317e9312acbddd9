//! Linear classifiers: solvers, cost tuning, evaluation and persistence,
//! plus the emotion training suite and the polarity model.

mod emotion;
mod metrics;
mod model;
mod polarity;
mod solver;
mod split;
mod tuning;

pub use emotion::{
    classification_dir_name, classify_emotions, model_file, performance_file, predictions_file, train_emotion_suite,
    training_dir_name, write_classification, EmotionClassifier, EmotionPrediction, EmotionRun, Regime, RegimeArtifacts,
    SuiteOptions, TrainArtifacts, EMOTION_IDF_FILE, EMOTION_LEXICON_FILE, IDF_DIR, LIBLINEAR_DIR, NGRAM_DIR, TEST_SET,
    TRAINING_SET,
};
pub use metrics::{evaluate, f_measure, ClassScores, ConfusionMatrix, CostScore, PerformanceReport};
pub use model::{fingerprint, train_linear, FeatureIndex, LinearModel, Prediction};
pub use polarity::{
    classify_polarity, evaluate_polarity, train_polarity, PolarityClassifier, PolarityOptions, PolarityPrediction,
    POLARITY_CLASSES, POLARITY_MODEL_FILE,
};
pub use solver::{
    l2_gradient, objective, solve, Formulation, Loss, Problem, Regularization, SolverConfig, MAX_ITERATIONS, TOLERANCE,
};
pub use split::{
    downsample, downsample_indices, split_train_test, stratified_folds, stratified_split, DEFAULT_SEED,
    DEFAULT_TEST_FRACTION,
};
pub use tuning::{tune_cost, Scoring, TuningResult, DEFAULT_FOLDS, DEFAULT_GRID};

/// Solver used by the default emotion and polarity models.
pub const DEFAULT_SOLVER: SolverConfig = SolverConfig::ALL[3];
