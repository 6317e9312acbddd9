use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Gold-by-predicted counts over a fixed label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// `counts[gold][predicted]`
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: &[&str]) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels: labels.iter().map(|l| l.to_string()).collect(), counts: vec![vec![0; n]; n] }
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidInput(format!("label `{label}` is not one of {:?}", self.labels)))
    }

    pub fn record(&mut self, gold: &str, predicted: &str) -> Result<()> {
        let (g, p) = (self.position(gold)?, self.position(predicted)?);
        self.counts[g][p] += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn gold_count(&self, k: usize) -> usize {
        self.counts[k].iter().sum()
    }

    pub fn predicted_count(&self, k: usize) -> usize {
        self.counts.iter().map(|row| row[k]).sum()
    }

    pub fn scores(&self, k: usize) -> ClassScores {
        let tp = self.counts[k][k];
        ClassScores::from_counts(tp, self.predicted_count(k) - tp, self.gold_count(k) - tp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl ClassScores {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ClassScores { precision, recall, f1: f_measure(precision, recall) }
    }
}

/// Cross-validated score for one candidate cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostScore {
    pub cost: f64,
    /// `None` when every fold was skipped or the solver failed.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub matrix: ConfusionMatrix,
    pub per_class: Vec<ClassScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub best_cost: Option<f64>,
    pub tuning: Vec<CostScore>,
    pub skipped_folds: usize,
}

impl PerformanceReport {
    pub fn from_matrix(matrix: ConfusionMatrix) -> Self {
        let k = matrix.labels.len();
        let per_class: Vec<ClassScores> = (0..k).map(|i| matrix.scores(i)).collect();
        let mean =
            |f: fn(&ClassScores) -> f64| if k == 0 { 0.0 } else { per_class.iter().map(f).sum::<f64>() / k as f64 };
        let correct: usize = (0..k).map(|i| matrix.counts[i][i]).sum();
        PerformanceReport {
            macro_precision: mean(|s| s.precision),
            macro_recall: mean(|s| s.recall),
            macro_f1: mean(|s| s.f1),
            accuracy: ratio(correct, matrix.total()),
            per_class,
            matrix,
            best_cost: None,
            tuning: Vec::new(),
            skipped_folds: 0,
        }
    }

    pub fn class(&self, label: &str) -> Option<&ClassScores> {
        self.matrix.labels.iter().position(|l| l == label).map(|i| &self.per_class[i])
    }

    /// Plain-text rendering; numbers use four decimals so reruns compare equal.
    pub fn render(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        if !self.tuning.is_empty() {
            let _ = writeln!(out, "\ncost tuning (cross-validated F-measure):");
            for c in &self.tuning {
                match c.score {
                    Some(s) => {
                        let _ = writeln!(out, "  C = {:<6} F = {s:.4}", c.cost);
                    }
                    None => {
                        let _ = writeln!(out, "  C = {:<6} F = n/a", c.cost);
                    }
                }
            }
            if self.skipped_folds > 0 {
                let _ = writeln!(out, "  skipped folds (single class): {}", self.skipped_folds);
            }
        }
        if let Some(c) = self.best_cost {
            let _ = writeln!(out, "best cost: {c}");
        }

        let width = self.matrix.labels.iter().map(String::len).max().unwrap_or(0).max(8);
        let _ = writeln!(out, "\nconfusion matrix (rows: gold, columns: predicted)");
        let _ = write!(out, "{:width$}", "");
        for l in &self.matrix.labels {
            let _ = write!(out, " {l:>width$}");
        }
        out.push('\n');
        for (l, row) in self.matrix.labels.iter().zip(&self.matrix.counts) {
            let _ = write!(out, "{l:width$}");
            for c in row {
                let _ = write!(out, " {c:>width$}");
            }
            out.push('\n');
        }

        let _ = writeln!(out, "\n{:width$} {:>9} {:>9} {:>9} {:>7}", "class", "precision", "recall", "f1", "support");
        for (i, (l, s)) in self.matrix.labels.iter().zip(&self.per_class).enumerate() {
            let _ = writeln!(
                out,
                "{l:width$} {:>9.4} {:>9.4} {:>9.4} {:>7}",
                s.precision,
                s.recall,
                s.f1,
                self.matrix.gold_count(i)
            );
        }
        let _ = writeln!(
            out,
            "{:width$} {:>9.4} {:>9.4} {:>9.4} {:>7}",
            "macro",
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
            self.matrix.total()
        );
        let _ = writeln!(out, "accuracy: {:.4}", self.accuracy);
        out
    }
}

/// Scores `(id, predicted)` pairs against `(id, gold)` pairs over `labels`.
/// Both sides must cover the same ids.
pub fn evaluate(
    predictions: &[(String, String)],
    gold: &[(String, String)],
    labels: &[&str],
) -> Result<PerformanceReport> {
    let gold_map: HashMap<&str, &str> = gold.iter().map(|(i, l)| (i.as_str(), l.as_str())).collect();
    let predicted_ids: BTreeSet<&str> = predictions.iter().map(|(i, _)| i.as_str()).collect();
    let mut missing: Vec<String> =
        gold_map.keys().filter(|i| !predicted_ids.contains(*i)).map(|i| i.to_string()).collect();
    missing.extend(predicted_ids.iter().filter(|i| !gold_map.contains_key(*i)).map(|i| i.to_string()));
    if !missing.is_empty() || predicted_ids.len() != predictions.len() {
        missing.sort();
        missing.dedup();
        return Err(Error::IdMismatch { missing });
    }
    let mut matrix = ConfusionMatrix::new(labels);
    for (id, p) in predictions {
        matrix.record(gold_map[id.as_str()], p)?;
    }
    Ok(PerformanceReport::from_matrix(matrix))
}
