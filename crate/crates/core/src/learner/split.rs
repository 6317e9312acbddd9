use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::{Error, Result};

pub const DEFAULT_TEST_FRACTION: f64 = 0.3;
pub const DEFAULT_SEED: u64 = 42;

fn by_class<'a>(labels: &[&'a str]) -> BTreeMap<&'a str, Vec<usize>> {
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    classes
}

/// Stratified split of item indices into (train, test), each in input order.
pub fn stratified_split(labels: &[&str], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; labels.len()];
    for (label, mut members) in by_class(labels) {
        if members.len() < 2 {
            return Err(Error::InvalidInput(format!("class `{label}` has fewer than 2 members")));
        }
        let n = members.len();
        let k = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        members.shuffle(&mut rng);
        for &i in &members[..k] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| in_test[i]);
    Ok((train, test))
}

/// Reduces every class to the minority-class size, then shuffles the result.
pub fn downsample_indices(labels: &[&str], seed: u64) -> Result<Vec<usize>> {
    let classes = by_class(labels);
    if classes.len() < 2 {
        return Err(Error::InvalidInput("down-sampling needs at least two classes".into()));
    }
    let minority = classes.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for (_, mut members) in classes {
        members.shuffle(&mut rng);
        keep.extend_from_slice(&members[..minority]);
    }
    keep.sort_unstable();
    keep.shuffle(&mut rng);
    Ok(keep)
}

/// Assigns items to `k` folds, dealing each shuffled class round-robin.
pub fn stratified_folds(labels: &[&str], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for (_, mut members) in by_class(labels) {
        members.shuffle(&mut rng);
        for i in members {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

fn labels_of(docs: &[Document]) -> Result<Vec<&str>> {
    docs.iter()
        .map(|d| d.label.as_deref().ok_or_else(|| Error::InvalidInput(format!("document `{}` has no label", d.id))))
        .collect()
}

fn pick(docs: &[Document], idx: &[usize]) -> Vec<Document> {
    idx.iter().map(|&i| docs[i].clone()).collect()
}

/// Stratified train/test split of labeled documents.
pub fn split_train_test(docs: &[Document], test_fraction: f64, seed: u64) -> Result<(Vec<Document>, Vec<Document>)> {
    let (train, test) = stratified_split(&labels_of(docs)?, test_fraction, seed)?;
    Ok((pick(docs, &train), pick(docs, &test)))
}

/// Balances labeled documents by down-sampling to the minority class.
pub fn downsample(docs: &[Document], seed: u64) -> Result<Vec<Document>> {
    Ok(pick(docs, &downsample_indices(&labels_of(docs)?, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn labels(counts: &[(&'static str, usize)]) -> Vec<&'static str> {
        counts.iter().flat_map(|(l, n)| std::iter::repeat_n(*l, *n)).collect()
    }

    #[test]
    fn balanced_seventy_thirty() {
        let l = labels(&[("YES", 50), ("NO", 50)]);
        let (train, test) = stratified_split(&l, 0.3, 42).unwrap();
        assert_eq!((train.len(), test.len()), (70, 30));
        assert_eq!(test.iter().filter(|&&i| l[i] == "YES").count(), 15);
        assert_eq!(train.iter().filter(|&&i| l[i] == "YES").count(), 35);
        assert!(train.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(stratified_split(&l, 0.3, 42).unwrap(), (train, test));
    }

    #[test]
    fn large_corpus_keeps_proportions() {
        let l = labels(&[("love", 1220), ("joy", 491), ("surprise", 45), ("none", 3044)]);
        let (_, test) = stratified_split(&l, 0.3, 7).unwrap();
        for (class, n) in [("love", 1220), ("joy", 491), ("surprise", 45), ("none", 3044)] {
            let got = test.iter().filter(|&&i| l[i] == class).count() as f64;
            assert!((got - n as f64 * 0.3).abs() <= 1.0, "{class}: {got}");
        }
    }

    #[test]
    fn tiny_class_is_rejected() {
        assert!(stratified_split(&labels(&[("YES", 1), ("NO", 5)]), 0.3, 0).is_err());
        assert!(stratified_split(&labels(&[("YES", 3)]), 1.0, 0).is_err());
    }

    #[test]
    fn downsample_to_minority() {
        let l = labels(&[("NO", 90), ("YES", 10)]);
        let keep = downsample_indices(&l, 1).unwrap();
        assert_eq!(keep.iter().filter(|&&i| l[i] == "YES").count(), 10);
        assert_eq!(keep.iter().filter(|&&i| l[i] == "NO").count(), 10);
        assert_eq!(keep, downsample_indices(&l, 1).unwrap());

        let balanced = labels(&[("NO", 5), ("YES", 5)]);
        let keep: BTreeSet<usize> = downsample_indices(&balanced, 3).unwrap().into_iter().collect();
        assert_eq!(keep, (0..10).collect());
        assert!(downsample_indices(&labels(&[("NO", 4)]), 0).is_err());
    }

    proptest! {
        #[test]
        fn split_is_disjoint_and_covering(yes in 2usize..40, no in 2usize..40, seed in any::<u64>()) {
            let l = labels(&[("YES", yes), ("NO", no)]);
            let (train, test) = stratified_split(&l, 0.3, seed).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
        }

        #[test]
        fn folds_partition_items(n in 2usize..60, k in 2usize..6, seed in any::<u64>()) {
            let l: Vec<&str> = (0..n).map(|i| if i % 3 == 0 { "a" } else { "b" }).collect();
            let folds = stratified_folds(&l, k, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn downsampled_classes_are_equal(a in 1usize..30, b in 1usize..30, seed in any::<u64>()) {
            let l = labels(&[("YES", a), ("NO", b)]);
            let keep = downsample_indices(&l, seed).unwrap();
            let yes = keep.iter().filter(|&&i| l[i] == "YES").count();
            prop_assert_eq!(yes, a.min(b));
            prop_assert_eq!(keep.len() - yes, a.min(b));
        }
    }
}
