use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CategoricalDataset, DatasetError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits row indices into `k` stratified folds.
///
/// Fold sizes are `⌊n/k⌋` or `⌈n/k⌉`. The number of class-`c` rows in fold
/// `f` is the floor or ceiling of `|f| · n_c / n`, chosen so that row and
/// column totals still add up (a bipartite flow over the fractional cells).
/// Members of each class are shuffled before being dealt out.
pub fn stratified_kfold(
    dataset: &CategoricalDataset,
    k: usize,
    seed: u64,
) -> Result<Vec<Fold>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFoldCount(k));
    }
    let counts = dataset.label_counts();
    for (label, &count) in counts.iter().enumerate() {
        if count < k {
            return Err(DatasetError::ClassTooSmall {
                label: dataset.label_names()[label].clone(),
                count,
                k,
            });
        }
    }
    let n = dataset.n_rows();
    let sizes: Vec<usize> = (0..k).map(|f| n / k + usize::from(f < n % k)).collect();
    let cells = round_cells(&sizes, &counts, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    for (label, _) in counts.iter().enumerate() {
        let mut members: Vec<usize> = dataset
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &y)| y as usize == label)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        let mut it = members.into_iter();
        for (f, row) in cells.iter().enumerate() {
            for i in it.by_ref().take(row[label]) {
                assignment[i] = f;
            }
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// Integer `k × ℓ` matrix with row sums `sizes`, column sums `counts`, and
/// every cell the floor or ceiling of `sizes[f] * counts[c] / n`.
fn round_cells(sizes: &[usize], counts: &[usize], n: usize) -> Vec<Vec<usize>> {
    let k = sizes.len();
    let l = counts.len();
    let mut cells: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&s| counts.iter().map(|&c| s * c / n).collect())
        .collect();
    let fractional = |f: usize, c: usize| !(sizes[f] * counts[c]).is_multiple_of(n);
    let mut row_need: Vec<usize> = (0..k)
        .map(|f| sizes[f] - cells[f].iter().sum::<usize>())
        .collect();
    let mut col_need: Vec<usize> = (0..l)
        .map(|c| counts[c] - cells.iter().map(|r| r[c]).sum::<usize>())
        .collect();
    // Unit-capacity augmenting paths from rows with spare demand to columns
    // with spare demand; `up[f][c]` marks a cell already rounded up.
    let mut up = vec![vec![false; l]; k];
    while let Some(start) = (0..k).find(|&f| row_need[f] > 0) {
        // BFS alternating row -> column over cells not yet rounded up, and
        // column -> row over cells that are (un-rounding them).
        let mut col_parent: Vec<Option<usize>> = vec![None; l];
        let mut row_parent: Vec<Option<usize>> = vec![None; k];
        let mut visited_rows = vec![false; k];
        visited_rows[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut target = None;
        'search: while let Some(f) = queue.pop_front() {
            for c in 0..l {
                if col_parent[c].is_some() || !fractional(f, c) || up[f][c] {
                    continue;
                }
                col_parent[c] = Some(f);
                if col_need[c] > 0 {
                    target = Some(c);
                    break 'search;
                }
                for g in 0..k {
                    if !visited_rows[g] && up[g][c] {
                        visited_rows[g] = true;
                        row_parent[g] = Some(c);
                        queue.push_back(g);
                    }
                }
            }
        }
        let mut c = target.expect("rounding with fixed margins always exists");
        col_need[c] -= 1;
        loop {
            let f = col_parent[c].expect("path");
            up[f][c] = true;
            if f == start {
                break;
            }
            let back = row_parent[f].expect("path");
            up[f][back] = false;
            c = back;
        }
        row_need[start] -= 1;
    }
    for f in 0..k {
        for c in 0..l {
            if up[f][c] {
                cells[f][c] += 1;
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::schema;
    use proptest::prelude::*;

    fn labelled(counts: &[usize]) -> CategoricalDataset {
        let y: Vec<u32> = counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k as u32, c))
            .collect();
        let x = (0..y.len()).map(|i| (i % 2) as u32).collect();
        CategoricalDataset::new(
            vec![schema("a", &["u", "v"])],
            "y",
            (0..counts.len()).map(|k| k.to_string()).collect(),
            x,
            y,
        )
        .unwrap()
    }

    #[test]
    fn perfectly_divisible() {
        let ds = labelled(&[5, 5]);
        let folds = stratified_kfold(&ds, 5, 7).unwrap();
        for fold in &folds {
            assert_eq!(fold.test.len(), 2);
            let classes: Vec<u32> = fold.test.iter().map(|&i| ds.labels()[i]).collect();
            assert!(classes.contains(&0) && classes.contains(&1));
        }
    }

    #[test]
    fn k_one_is_rejected() {
        let ds = labelled(&[5, 5]);
        assert!(matches!(
            stratified_kfold(&ds, 1, 0),
            Err(DatasetError::InvalidFoldCount(1))
        ));
    }

    #[test]
    fn small_class_is_rejected() {
        let ds = labelled(&[5, 3]);
        assert!(matches!(
            stratified_kfold(&ds, 5, 0),
            Err(DatasetError::ClassTooSmall { count: 3, .. })
        ));
    }

    #[test]
    fn four_class_counts_by_enumeration() {
        let counts = [130, 50, 49, 43];
        let ds = labelled(&counts);
        let folds = stratified_kfold(&ds, 5, 11).unwrap();
        for fold in &folds {
            for (c, &total) in counts.iter().enumerate() {
                let in_fold = fold
                    .test
                    .iter()
                    .filter(|&&i| ds.labels()[i] as usize == c)
                    .count();
                let expected = total as f64 / 5.0;
                assert!(
                    (in_fold as f64 - expected).abs() <= 1.0,
                    "class {c}: {in_fold} vs {expected}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(
            counts in prop::collection::vec(5usize..40, 2..5),
            k in 2usize..6,
            seed in any::<u64>(),
        ) {
            let ds = labelled(&counts);
            let n = ds.n_rows();
            let folds = stratified_kfold(&ds, k, seed).unwrap();
            let mut seen = vec![0; n];
            for fold in &folds {
                prop_assert_eq!(fold.train.len() + fold.test.len(), n);
                for &i in &fold.test {
                    seen[i] += 1;
                }
                let size = fold.test.len() as f64;
                for (c, &total) in counts.iter().enumerate() {
                    let in_fold = fold.test.iter().filter(|&&i| ds.labels()[i] as usize == c).count();
                    let gap = (in_fold as f64 / size - total as f64 / n as f64).abs();
                    prop_assert!(gap <= 1.0 / size + 1e-12, "gap {} > 1/{}", gap, size);
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
            prop_assert_eq!(stratified_kfold(&ds, k, seed).unwrap(), folds);
        }
    }
}
