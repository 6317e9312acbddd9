use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::solver::{self, Problem, SolverConfig};
use crate::textproc::FeatureVector;
use crate::{Error, Result};

const MAGIC: &str = "emtk-linear-model v1";

/// A trained linear classifier.
///
/// Binary models hold one weight vector scoring `classes[0]` against
/// `classes[1]`. Models over three or more classes are one-vs-rest with one
/// weight vector per class; the class order doubles as the tie-break order.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub solver: SolverConfig,
    pub cost: f64,
    pub seed: u64,
    pub fingerprint: String,
    pub classes: Vec<String>,
    features: Vec<String>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    index: HashMap<String, usize>,
}

impl PartialEq for LinearModel {
    fn eq(&self, other: &Self) -> bool {
        self.solver == other.solver
            && self.cost == other.cost
            && self.seed == other.seed
            && self.fingerprint == other.fingerprint
            && self.classes == other.classes
            && self.features == other.features
            && self.weights == other.weights
            && self.biases == other.biases
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub score: f64,
}

/// Sorted union of feature names, mapped to column indices.
#[derive(Debug, Clone, Default)]
pub struct FeatureIndex {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureIndex {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        let names: BTreeSet<&str> = vectors.iter().flat_map(|v| v.names()).collect();
        let names: Vec<String> = names.into_iter().map(str::to_string).collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        FeatureIndex { names, index }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn row(&self, fv: &FeatureVector) -> Vec<(usize, f64)> {
        fv.iter().filter_map(|(n, v)| self.index.get(n).map(|&i| (i, v))).collect()
    }

    pub fn problem(&self, vectors: &[FeatureVector]) -> Problem {
        Problem::new(vectors.iter().map(|v| self.row(v)).collect(), self.len())
    }
}

/// Hash over the training vectors and labels.
pub fn fingerprint(vectors: &[FeatureVector], labels: &[&str]) -> String {
    let mut h = Sha256::new();
    for (v, l) in vectors.iter().zip(labels) {
        h.update(l.as_bytes());
        for (n, x) in v.iter() {
            h.update([0x1f]);
            h.update(n.as_bytes());
            h.update(x.to_bits().to_le_bytes());
        }
        h.update([0x1e]);
    }
    hex::encode(&h.finalize()[..8])
}

/// Targets for the binary subproblem of `class`: +1 for members, -1 otherwise.
pub(crate) fn targets(labels: &[&str], class: &str) -> Vec<f64> {
    labels.iter().map(|l| if *l == class { 1.0 } else { -1.0 }).collect()
}

pub(crate) fn check_classes(labels: &[&str], classes: &[&str]) -> Result<()> {
    if classes.len() < 2 {
        return Err(Error::Config("at least two classes are required".into()));
    }
    if let Some(l) = labels.iter().find(|l| !classes.contains(l)) {
        return Err(Error::InvalidInput(format!("label `{l}` is not one of {classes:?}")));
    }
    if let Some(c) = classes.iter().find(|c| !labels.contains(c)) {
        return Err(Error::InvalidInput(format!("no training examples for class `{c}`")));
    }
    Ok(())
}

/// Fits the weight vectors for `classes` on an indexed problem.
pub(crate) fn fit(
    problem: &Problem,
    labels: &[&str],
    classes: &[&str],
    solver: SolverConfig,
    cost: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_classes(labels, classes)?;
    let heads = if classes.len() == 2 { &classes[..1] } else { classes };
    heads.iter().map(|c| solver::solve(problem, &targets(labels, c), solver, cost, seed)).collect()
}

/// Trains a model over `classes`: binary for two classes (the first is the
/// positive one), one-vs-rest otherwise.
pub fn train_linear(
    vectors: &[FeatureVector],
    labels: &[&str],
    classes: &[&str],
    solver: SolverConfig,
    cost: f64,
    seed: u64,
) -> Result<LinearModel> {
    if vectors.len() != labels.len() {
        return Err(Error::InvalidInput(format!("{} vectors but {} labels", vectors.len(), labels.len())));
    }
    let index = FeatureIndex::from_vectors(vectors);
    let problem = index.problem(vectors);
    let solutions = fit(&problem, labels, classes, solver, cost, seed)?;
    let n = index.len();
    let (weights, biases) = solutions
        .into_iter()
        .map(|mut w| {
            let b = w.pop().unwrap_or(0.0);
            debug_assert_eq!(w.len(), n);
            (w, b)
        })
        .unzip();
    Ok(LinearModel {
        solver,
        cost,
        seed,
        fingerprint: fingerprint(vectors, labels),
        classes: classes.iter().map(|c| c.to_string()).collect(),
        features: index.names.clone(),
        weights,
        biases,
        index: index.index,
    })
}

impl LinearModel {
    pub fn is_binary(&self) -> bool {
        self.classes.len() == 2
    }

    /// Feature names seen during training.
    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Weight of `feature` in the vector for head `k`; 0 when unseen.
    pub fn weight(&self, k: usize, feature: &str) -> f64 {
        self.index.get(feature).map_or(0.0, |&i| self.weights[k][i])
    }

    /// Raw scores, one per weight vector.
    pub fn scores(&self, fv: &FeatureVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + fv.iter().filter_map(|(n, x)| self.index.get(n).map(|&i| w[i] * x)).sum::<f64>())
            .collect()
    }

    /// Number of features in `fv` the model never saw.
    pub fn unseen(&self, fv: &FeatureVector) -> usize {
        fv.names().filter(|n| !self.index.contains_key(*n)).count()
    }

    pub fn predict(&self, fv: &FeatureVector) -> Prediction {
        let scores = self.scores(fv);
        if self.is_binary() {
            let score = scores[0];
            let label = if score >= 0.0 { &self.classes[0] } else { &self.classes[1] };
            return Prediction { label: label.clone(), score };
        }
        let mut best = 0;
        for (k, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = k;
            }
        }
        Prediction { label: self.classes[best].clone(), score: scores[best] }
    }

    /// Serializes to the text `.model` format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "solver\t{}\t{}", self.solver.id, self.solver.describe());
        let _ = writeln!(out, "cost\t{}", self.cost);
        let _ = writeln!(out, "seed\t{}", self.seed);
        let _ = writeln!(out, "fingerprint\t{}", self.fingerprint);
        let _ = writeln!(out, "classes\t{}", self.classes.join("\t"));
        let _ = writeln!(out, "vectors\t{}", self.weights.len());
        let biases: Vec<String> = self.biases.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "bias\t{}", biases.join("\t"));
        let _ = writeln!(out, "features\t{}", self.features.len());
        for (i, name) in self.features.iter().enumerate() {
            out.push_str(name);
            for w in &self.weights {
                let _ = write!(out, "\t{}", w[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            let (n, line) = lines.next().ok_or_else(|| Error::format_nl(format!("model truncated before `{key}`")))?;
            let mut parts = line.split('\t');
            if parts.next() != Some(key) {
                return Err(Error::format(n, format!("expected `{key}`")));
            }
            Ok((n, parts.map(str::to_string).collect()))
        };
        let num = |n: usize, s: Option<&String>| -> Result<f64> {
            s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::format(n, "expected a number"))
        };

        let (_, magic) = next(MAGIC)?;
        if !magic.is_empty() {
            return Err(Error::format(1, "unexpected data after header"));
        }
        let (n, f) = next("solver")?;
        let solver = SolverConfig::from_id(num(n, f.first())? as u8).map_err(|e| Error::format(n, e.to_string()))?;
        let (n, f) = next("cost")?;
        let cost = num(n, f.first())?;
        let (n, f) = next("seed")?;
        let seed = f.first().and_then(|s| s.parse().ok()).ok_or_else(|| Error::format(n, "expected a seed"))?;
        let (_, f) = next("fingerprint")?;
        let fingerprint = f.into_iter().next().unwrap_or_default();
        let (n, classes) = next("classes")?;
        if classes.len() < 2 {
            return Err(Error::format(n, "need at least two classes"));
        }
        let (n, f) = next("vectors")?;
        let k = num(n, f.first())? as usize;
        let expected = if classes.len() == 2 { 1 } else { classes.len() };
        if k != expected {
            return Err(Error::format(n, format!("expected {expected} weight vectors, found {k}")));
        }
        let (n, f) = next("bias")?;
        let biases = f.iter().map(|s| num(n, Some(s))).collect::<Result<Vec<_>>>()?;
        if biases.len() != k {
            return Err(Error::format(n, "bias count does not match vectors"));
        }
        let (n, f) = next("features")?;
        let count = num(n, f.first())? as usize;

        let mut features = Vec::with_capacity(count);
        let mut weights = vec![Vec::with_capacity(count); k];
        for _ in 0..count {
            let (n, line) = lines.next().ok_or_else(|| Error::format_nl("model truncated in weights"))?;
            let mut parts = line.split('\t');
            let name = parts.next().unwrap_or_default().to_string();
            let ws = parts.map(|s| num(n, Some(&s.to_string()))).collect::<Result<Vec<_>>>()?;
            if name.is_empty() || ws.len() != k {
                return Err(Error::format(n, "malformed weight line"));
            }
            for (col, w) in weights.iter_mut().zip(ws) {
                col.push(w);
            }
            features.push(name);
        }
        if let Some((n, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::format(n, format!("unexpected trailing line `{l}`")));
        }
        let index: HashMap<String, usize> = features.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        if index.len() != features.len() {
            return Err(Error::format_nl("duplicate feature names in model"));
        }
        Ok(LinearModel { solver, cost, seed, fingerprint, classes, features, weights, biases, index })
    }
}
