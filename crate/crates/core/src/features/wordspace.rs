//! Word spaces: loading, saving, random-indexing construction and document
//! vectors.
//!
//! File layout (text, UTF-8):
//!
//! ```text
//! EMTK-DSM1 <count> <dim>
//! word<TAB>v1<TAB>v2 ... <TAB>vdim
//! ```
//!
//! Records are written in lexicographic word order. Values use the shortest
//! decimal form that round-trips to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::textproc::{FeatureVector, TokenizedDoc};
use crate::{Error, Result};

pub const DSM_MAGIC: &str = "EMTK-DSM1";

#[derive(Debug, Clone, PartialEq)]
pub struct WordSpace {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl WordSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("word space dimension must be positive".into()));
        }
        Ok(WordSpace { dim, vectors: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vector for `{word}` has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("invalid word-space entry `{word}`")));
        }
        self.vectors.insert(word, vector);
        Ok(())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }
}

pub fn save_wordspace(ws: &WordSpace) -> Vec<u8> {
    let mut out = format!("{DSM_MAGIC} {} {}\n", ws.vectors.len(), ws.dim);
    for (word, v) in &ws.vectors {
        out.push_str(word);
        for x in v {
            let _ = write!(out, "\t{x}");
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn load_wordspace(bytes: &[u8]) -> Result<WordSpace> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::format_nl("word space is not valid UTF-8"))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::format(1, "empty word-space file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match parts.as_slice() {
        [magic, count, dim] if *magic == DSM_MAGIC => (
            count.parse::<usize>().map_err(|_| Error::format(1, "bad word count"))?,
            dim.parse::<usize>().map_err(|_| Error::format(1, "bad dimension"))?,
        ),
        _ => return Err(Error::format(1, format!("expected header `{DSM_MAGIC} <count> <dim>`"))),
    };
    let mut ws = WordSpace::new(dim).map_err(|_| Error::format(1, "dimension must be positive"))?;
    let mut records = 0;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default();
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| Error::format(line_no, format!("bad value `{f}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(Error::format(line_no, format!("`{word}` has {} values, header declares {dim}", values.len())));
        }
        if ws.vectors.contains_key(word) {
            return Err(Error::format(line_no, format!("duplicate word `{word}`")));
        }
        ws.insert(word, values).map_err(|e| Error::format(line_no, e.to_string()))?;
        records += 1;
    }
    if records != count {
        return Err(Error::format_nl(format!("header declares {count} words, file holds {records} (truncated?)")));
    }
    Ok(ws)
}

fn fnv1a(word: &str) -> u64 {
    word.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Non-zero entries of an index vector of dimension `dim`.
pub fn index_nonzeros(dim: usize) -> usize {
    (dim / 50).max(2).min(dim)
}

/// Seeded sparse ternary index vector of a word; depends only on
/// (word, dim, seed).
pub fn index_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(word));
    let mut v = vec![0.0; dim];
    for pos in sample(&mut rng, dim, index_nonzeros(dim)) {
        v[pos] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    v
}

/// Random-indexing word space: each word's vector is the sum of the index
/// vectors of every token within `window` positions of its occurrences.
pub fn build_wordspace(corpus: &[TokenizedDoc], dim: usize, window: usize, seed: u64) -> Result<WordSpace> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot build a word space from an empty corpus".into()));
    }
    let mut ws = WordSpace::new(dim)?;
    let mut index: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for doc in corpus {
        for t in doc.tokens() {
            index.entry(t.surface.as_str()).or_insert_with(|| index_vector(&t.surface, dim, seed));
        }
    }
    let mut sums: BTreeMap<&str, Vec<f64>> = index.keys().map(|w| (*w, vec![0.0; dim])).collect();
    for doc in corpus {
        let tokens = doc.surfaces();
        for (i, w) in tokens.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window + 1).min(tokens.len());
            let acc = sums.get_mut(w).expect("every token was indexed");
            for (j, neighbour) in tokens.iter().enumerate().take(hi).skip(lo) {
                if j == i {
                    continue;
                }
                for (a, x) in acc.iter_mut().zip(&index[neighbour]) {
                    *a += x;
                }
            }
        }
    }
    for (w, v) in sums {
        ws.insert(w, v)?;
    }
    Ok(ws)
}

/// Mean of the vectors of in-vocabulary tokens; the zero vector when none
/// are known. Tokens are summed in sorted order so the result does not
/// depend on token order.
pub fn document_vector(tokens: &[&str], ws: &WordSpace) -> Vec<f64> {
    let mut known: Vec<&[f64]> = Vec::new();
    let mut sorted: Vec<&str> = tokens.to_vec();
    sorted.sort_unstable();
    for t in sorted {
        if let Some(v) = ws.get(t) {
            known.push(v);
        }
    }
    let mut mean = vec![0.0; ws.dim];
    if known.is_empty() {
        return mean;
    }
    for v in &known {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    let n = known.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

pub fn semantic_feature(i: usize) -> String {
    format!("sem:{i}")
}

pub fn semantic_features(vector: &[f64]) -> FeatureVector {
    let mut fv = FeatureVector::new();
    for (i, &x) in vector.iter().enumerate() {
        fv.set(semantic_feature(i), x);
    }
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use sha2::{Digest, Sha256};

    fn docs(texts: &[&str]) -> Vec<TokenizedDoc> {
        texts.iter().map(|t| TokenizedDoc::new(t)).collect()
    }

    #[test]
    fn small_round_trip() {
        let mut ws = WordSpace::new(4).unwrap();
        ws.insert("a", vec![1.0, -0.5, 0.0, 3.25]).unwrap();
        ws.insert("b", vec![0.1, 0.2, 0.3, 1e-7]).unwrap();
        ws.insert("c", vec![-1.0; 4]).unwrap();
        assert_eq!(load_wordspace(&save_wordspace(&ws)).unwrap(), ws);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut text = format!("{DSM_MAGIC} 1 600\nword");
        for i in 0..599 {
            let _ = write!(text, "\t{i}");
        }
        match load_wordspace(text.as_bytes()) {
            Err(Error::Format { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_file_rejected() {
        let text = format!("{DSM_MAGIC} 3 2\na\t1\t2\nb\t3\t4\n");
        assert!(load_wordspace(text.as_bytes()).is_err());
        assert!(load_wordspace(b"").is_err());
        assert!(load_wordspace(b"EMTK-DSM1 0 0\n").is_err());
        let dup = format!("{DSM_MAGIC} 2 1\na\t1\na\t2\n");
        assert!(load_wordspace(dup.as_bytes()).is_err());
    }

    #[test]
    fn large_space_round_trip_hash_equal() {
        let words: Vec<String> = (0..10_000).map(|i| format!("w{i}")).collect();
        let corpus: Vec<TokenizedDoc> = words.chunks(20).map(|c| TokenizedDoc::new(&c.join(" "))).collect();
        let ws = build_wordspace(&corpus, 16, 2, 7).unwrap();
        assert_eq!(ws.len(), 10_000);
        let bytes = save_wordspace(&ws);
        let again = save_wordspace(&load_wordspace(&bytes).unwrap());
        assert_eq!(Sha256::digest(&bytes), Sha256::digest(&again));
    }

    #[test]
    fn build_is_deterministic() {
        let corpus = docs(&["the build is green", "the build is red. tests fail"]);
        let a = build_wordspace(&corpus, 32, 2, 99).unwrap();
        let b = build_wordspace(&corpus, 32, 2, 99).unwrap();
        assert_eq!(save_wordspace(&a), save_wordspace(&b));
        let c = build_wordspace(&corpus, 32, 2, 100).unwrap();
        assert_ne!(a, c);
        assert!(build_wordspace(&[], 8, 1, 0).is_err());
    }

    #[test]
    fn two_word_document_unrolled() {
        let ws = build_wordspace(&docs(&["a b"]), 8, 1, 3).unwrap();
        assert_eq!(ws.get("a").unwrap(), index_vector("b", 8, 3).as_slice());
        assert_eq!(ws.get("b").unwrap(), index_vector("a", 8, 3).as_slice());
    }

    #[test]
    fn identical_contexts_give_parallel_vectors() {
        let ws = build_wordspace(&docs(&["x alpha y", "x beta y", "z gamma q"]), 64, 1, 11).unwrap();
        let (a, b) = (ws.get("alpha").unwrap(), ws.get("beta").unwrap());
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((dot / (norm(a) * norm(b)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn index_vectors_are_sparse_ternary() {
        let v = index_vector("word", 600, 1);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 12);
        assert!(v.iter().all(|x| [-1.0, 0.0, 1.0].contains(x)));
        assert_eq!(index_vector("w", 1, 1).iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn document_vector_cases() {
        let mut ws = WordSpace::new(3).unwrap();
        ws.insert("a", vec![1.0, 2.0, 3.0]).unwrap();
        ws.insert("b", vec![3.0, 0.0, -1.0]).unwrap();
        assert_eq!(document_vector(&["a", "unknown"], &ws), [1.0, 2.0, 3.0]);
        assert_eq!(document_vector(&["zzz"], &ws), [0.0; 3]);
        assert_eq!(document_vector(&[], &ws), [0.0; 3]);
        let oracle: Vec<f64> = (0..3).map(|i| (ws.get("a").unwrap()[i] + ws.get("b").unwrap()[i]) / 2.0).collect();
        assert_eq!(document_vector(&["a", "b"], &ws), oracle);
        let fv = semantic_features(&document_vector(&["a", "b"], &ws));
        assert_eq!(fv.get("sem:0"), 2.0);
        assert!(!fv.contains("sem:1") || fv.get("sem:1") != 0.0);
    }

    proptest! {
        #[test]
        fn document_vector_ignores_order(
            vals in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..8),
            picks in prop::collection::vec(0usize..10, 0..12),
            shuffle_seed in any::<u64>(),
        ) {
            let mut ws = WordSpace::new(4).unwrap();
            for (i, v) in vals.iter().enumerate() {
                ws.insert(format!("w{i}"), v.clone()).unwrap();
            }
            let words: Vec<String> = picks.iter().map(|p| format!("w{p}")).collect();
            let tokens: Vec<&str> = words.iter().map(String::as_str).collect();
            let mut shuffled = tokens.clone();
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
            prop_assert_eq!(document_vector(&tokens, &ws), document_vector(&shuffled, &ws));
        }
    }
}
