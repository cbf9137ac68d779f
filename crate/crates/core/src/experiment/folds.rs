use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Seeded unstratified assignment of `0..n` to `k` folds; fold sizes differ
/// by at most one. Each returned fold is sorted.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check(n, k)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from(seed));
    Ok(deal(idx.into_iter(), n, k))
}

/// Like [`kfold`], but each class is shuffled and dealt round-robin so class
/// proportions are preserved per fold. Fold sizes still differ by at most
/// one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    check(n, k)?;
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let mut rng = rng_from(seed);
    let mut order = Vec::with_capacity(n);
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        order.extend_from_slice(members);
    }
    Ok(deal(order.into_iter(), n, k))
}

fn check(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::invalid(format!("{n} records cannot fill {k} folds")));
    }
    Ok(())
}

fn deal(order: impl Iterator<Item = usize>, n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut folds: Vec<Vec<usize>> = (0..k).map(|_| Vec::with_capacity(n / k + 1)).collect();
    for (pos, i) in order.enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Every index not in `folds[held_out]`, sorted.
pub fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != held_out)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect();
    train.sort_unstable();
    train
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(folds: &[Vec<usize>]) -> Vec<usize> {
        folds.iter().map(Vec::len).collect()
    }

    #[test]
    fn small_and_large() {
        assert_eq!(sizes(&kfold(10, 5, 1).unwrap()), vec![2; 5]);
        assert_eq!(sizes(&kfold(23309, 5, 1).unwrap()), vec![4662, 4662, 4662, 4662, 4661]);
        assert_eq!(kfold(50, 5, 9).unwrap(), kfold(50, 5, 9).unwrap());
        assert_ne!(kfold(50, 5, 9).unwrap(), kfold(50, 5, 10).unwrap());
        assert!(kfold(4, 5, 0).is_err());
        assert!(kfold(4, 1, 0).is_err());
    }

    #[test]
    fn stratified_keeps_classes_spread() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i < 20)).collect();
        let folds = stratified_kfold(&labels, 5, 3).unwrap();
        assert_eq!(sizes(&folds), vec![20; 5]);
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| labels[i] == 1).count(), 4);
        }
    }

    #[test]
    fn training_excludes_held_out() {
        let folds = kfold(23, 5, 4).unwrap();
        for h in 0..5 {
            let train = training_indices(&folds, h);
            assert_eq!(train.len() + folds[h].len(), 23);
            assert!(folds[h].iter().all(|i| train.binary_search(i).is_err()));
        }
    }
}
