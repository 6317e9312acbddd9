use super::metrics::{ConfusionMatrix, CostScore, PerformanceReport};
use super::model::{check_classes, fit, FeatureIndex};
use super::solver::{Problem, SolverConfig};
use super::split::stratified_folds;
use crate::textproc::FeatureVector;
use crate::{Error, Result};

pub const DEFAULT_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
pub const DEFAULT_FOLDS: usize = 5;

/// What cross-validation maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scoring {
    /// F-measure of `classes[0]`.
    PositiveF,
    MacroF,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best_cost: f64,
    pub scores: Vec<CostScore>,
    pub skipped_folds: usize,
}

impl TuningResult {
    pub fn annotate(&self, report: &mut PerformanceReport) {
        report.best_cost = Some(self.best_cost);
        report.tuning = self.scores.clone();
        report.skipped_folds = self.skipped_folds;
    }
}

fn predict_rows(problem: &Problem, heads: &[Vec<f64>], idx: &[usize], classes: &[&str]) -> Vec<usize> {
    idx.iter()
        .map(|&i| {
            let row = &problem.rows[i];
            let scores: Vec<f64> = heads.iter().map(|w| row.iter().map(|&(j, x)| w[j] * x).sum()).collect();
            if classes.len() == 2 {
                usize::from(scores[0] < 0.0)
            } else {
                let mut best = 0;
                for (k, s) in scores.iter().enumerate() {
                    if *s > scores[best] {
                        best = k;
                    }
                }
                best
            }
        })
        .collect()
}

/// k-fold cross-validated grid search over the cost. Predictions are pooled
/// across folds before scoring; the best cost is the highest score, ties
/// going to the smaller cost. Folds whose training part lacks a class are
/// skipped and counted.
#[allow(clippy::too_many_arguments)]
pub fn tune_cost(
    vectors: &[FeatureVector],
    labels: &[&str],
    classes: &[&str],
    solver: SolverConfig,
    grid: &[f64],
    folds: usize,
    scoring: Scoring,
    seed: u64,
) -> Result<TuningResult> {
    if grid.is_empty() {
        return Err(Error::Config("cost grid is empty".into()));
    }
    check_classes(labels, classes)?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let index = FeatureIndex::from_vectors(vectors);
    let problem = index.problem(vectors);
    let assignment = stratified_folds(labels, folds, seed)?;
    let mut skipped = 0;
    let mut scores = Vec::with_capacity(grid.len());

    for &cost in &grid {
        let mut matrix = ConfusionMatrix::new(classes);
        let mut any = false;
        let mut failed = false;
        for held_out in &assignment {
            if held_out.is_empty() {
                continue;
            }
            let train: Vec<usize> = (0..labels.len()).filter(|i| held_out.binary_search(i).is_err()).collect();
            let train_labels: Vec<&str> = train.iter().map(|&i| labels[i]).collect();
            if classes.iter().any(|c| !train_labels.contains(c)) {
                skipped += 1;
                continue;
            }
            let heads = match fit(&problem.subset(&train), &train_labels, classes, solver, cost, seed) {
                Ok(h) => h,
                Err(Error::NonConvergence { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            for (&i, p) in held_out.iter().zip(predict_rows(&problem, &heads, held_out, classes)) {
                matrix.record(labels[i], classes[p])?;
            }
            any = true;
        }
        let score = (any && !failed).then(|| {
            let report = PerformanceReport::from_matrix(matrix);
            match scoring {
                Scoring::PositiveF => report.per_class[0].f1,
                Scoring::MacroF => report.macro_f1,
            }
        });
        scores.push(CostScore { cost, score });
    }

    let mut best: Option<(f64, f64)> = None;
    for s in &scores {
        if let Some(v) = s.score {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((s.cost, v));
            }
        }
    }
    let best_cost = match best {
        Some((c, _)) => c,
        None => {
            return Err(Error::InvalidInput(
                "cost tuning failed: every fold was skipped or the solver did not converge".into(),
            ))
        }
    };
    Ok(TuningResult { best_cost, scores, skipped_folds: skipped })
}
