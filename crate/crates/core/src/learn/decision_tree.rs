//! Binary decision tree grown by maximizing weighted node purity (sum of
//! squared class fractions). Split scores are compared in exact integer
//! arithmetic so the chosen split is a deterministic argmax, independent of
//! floating-point summation order.

use super::ModelParams;
use crate::corpus::LabeledDataset;
use crate::error::Result;
use crate::featurize::FeatureVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Class distribution over the model's alphabet.
        distribution: Vec<f64>,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn distribution_for(&self, x: &FeatureVector) -> &[f64] {
        match self {
            TreeNode::Leaf { distribution } => distribution,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let v = x.value_at(*feature);
                if v <= *threshold {
                    left.distribution_for(x)
                } else {
                    right.distribution_for(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: u32,
    pub threshold: f64,
}

/// Weighted purity of a (left, right) partition as an exact fraction:
/// sum_side (sum_i count_i^2) / n_side, common denominator nL * nR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SplitScore {
    numerator: u128,
    denominator: u128,
}

impl SplitScore {
    fn from_counts(left: &[u64], right: &[u64]) -> Option<SplitScore> {
        let n_left: u64 = left.iter().sum();
        let n_right: u64 = right.iter().sum();
        if n_left == 0 || n_right == 0 {
            return None;
        }
        let p_left: u128 = left.iter().map(|c| (*c as u128) * (*c as u128)).sum();
        let p_right: u128 = right.iter().map(|c| (*c as u128) * (*c as u128)).sum();
        Some(SplitScore {
            numerator: p_left * n_right as u128 + p_right * n_left as u128,
            denominator: n_left as u128 * n_right as u128,
        })
    }

    fn beats(&self, other: &SplitScore) -> bool {
        self.numerator * other.denominator > other.numerator * self.denominator
    }

    /// Strictly better than leaving the node whole: weighted child purity
    /// (num/den)/n against parent purity p_all/n^2, i.e. num*n > p_all*den.
    fn improves_on(&self, p_all: u128, n_all: u128) -> bool {
        self.numerator * n_all > p_all * self.denominator
    }
}

/// Exhaustive best split over every (feature, midpoint-threshold) candidate.
///
/// Candidates per feature are midpoints of consecutive distinct sorted
/// values; both children must hold at least `min_samples_leaf` samples.
/// Features are scanned in ascending index order and thresholds in ascending
/// value order, with strictly-greater comparison, so ties resolve to the
/// first candidate. Returns `None` when no candidate is valid.
pub fn best_split(
    samples: &[(Vec<f64>, usize)],
    n_classes: usize,
    min_samples_leaf: usize,
) -> Option<Split> {
    let indices: Vec<usize> = (0..samples.len()).collect();
    let dim = samples.first().map_or(0, |(x, _)| x.len());
    best_split_indexed(
        &|i, f| samples[i].0[f],
        &|i| samples[i].1,
        &indices,
        dim,
        n_classes,
        min_samples_leaf,
    )
    .map(|(split, _)| split)
}

/// Core split search over an index subset; returns the split and its score.
fn best_split_indexed(
    value: &dyn Fn(usize, usize) -> f64,
    class_of: &dyn Fn(usize) -> usize,
    indices: &[usize],
    dim: usize,
    n_classes: usize,
    min_samples_leaf: usize,
) -> Option<(Split, SplitScore)> {
    let n = indices.len();
    if n < 2 * min_samples_leaf.max(1) {
        return None;
    }
    let mut total = vec![0u64; n_classes];
    for &i in indices {
        total[class_of(i)] += 1;
    }

    let mut best: Option<(Split, SplitScore)> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    for f in 0..dim {
        column.clear();
        column.extend(indices.iter().map(|&i| (value(i, f), class_of(i))));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        if column[0].0 == column[n - 1].0 {
            continue; // constant feature
        }
        let mut left = vec![0u64; n_classes];
        let mut right = total.clone();
        for pos in 0..n - 1 {
            let (v, c) = column[pos];
            left[c] += 1;
            right[c] -= 1;
            let next_v = column[pos + 1].0;
            if v == next_v {
                continue;
            }
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let score = SplitScore::from_counts(&left, &right).expect("both sides nonempty");
            let threshold = v + (next_v - v) / 2.0;
            let candidate = Split {
                feature: f as u32,
                threshold,
            };
            match &best {
                Some((_, best_score)) if !score.beats(best_score) => {}
                _ => best = Some((candidate, score)),
            }
        }
    }
    best
}

struct Grower<'a> {
    matrix: &'a [Vec<f64>],
    classes: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    min_samples_leaf: usize,
}

impl Grower<'_> {
    fn leaf(&self, indices: &[usize]) -> TreeNode {
        let mut counts = vec![0u64; self.n_classes];
        for &i in indices {
            counts[self.classes[i]] += 1;
        }
        let n = indices.len() as f64;
        TreeNode::Leaf {
            distribution: counts.iter().map(|c| *c as f64 / n).collect(),
        }
    }

    fn grow(&self, indices: &[usize], depth: usize) -> TreeNode {
        let mut counts = vec![0u64; self.n_classes];
        for &i in indices {
            counts[self.classes[i]] += 1;
        }
        let pure = counts.iter().filter(|c| **c > 0).count() <= 1;
        if pure || depth >= self.max_depth {
            return self.leaf(indices);
        }
        let dim = self.matrix.first().map_or(0, Vec::len);
        let found = best_split_indexed(
            &|i, f| self.matrix[i][f],
            &|i| self.classes[i],
            indices,
            dim,
            self.n_classes,
            self.min_samples_leaf,
        );
        let Some((split, score)) = found else {
            return self.leaf(indices);
        };
        let p_all: u128 = counts.iter().map(|c| (*c as u128) * (*c as u128)).sum();
        // A split that cannot beat the parent's purity adds nothing.
        if !score.improves_on(p_all, indices.len() as u128) {
            return self.leaf(indices);
        }
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.matrix[i][split.feature as usize] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(&left_idx, depth + 1)),
            right: Box::new(self.grow(&right_idx, depth + 1)),
        }
    }
}

pub(super) fn train(
    ds: &LabeledDataset<FeatureVector>,
    dim: usize,
    max_depth: usize,
    min_samples_leaf: usize,
) -> Result<ModelParams> {
    let matrix: Vec<Vec<f64>> = ds
        .records
        .iter()
        .map(|(x, _)| {
            let mut row = vec![0.0; dim];
            for (j, v) in x.nonzero() {
                row[j as usize] = v;
            }
            row
        })
        .collect();
    let classes: Vec<usize> = ds
        .records
        .iter()
        .map(|(_, l)| {
            ds.class_alphabet
                .iter()
                .position(|c| c == l)
                .expect("label validated by train()")
        })
        .collect();
    let grower = Grower {
        matrix: &matrix,
        classes: &classes,
        n_classes: ds.class_alphabet.len(),
        max_depth,
        min_samples_leaf,
    };
    let indices: Vec<usize> = (0..ds.len()).collect();
    Ok(ModelParams::DecisionTree {
        root: grower.grow(&indices, 0),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::fv;
    use super::super::{predict, train as train_model, Classifier, Hyperparams, ModelParams};
    use super::*;
    use crate::corpus::LabeledDataset;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 12 points perfectly separated by feature 6 (number_dot), with other
    /// features carrying partial noise.
    fn planted_number_dot() -> LabeledDataset<FeatureVector> {
        let mut records = Vec::new();
        for i in 0..6 {
            let noise = (i % 2) as f64;
            let mut v = vec![0.0; 7];
            v[0] = noise;
            v[6] = 1.0;
            records.push((fv(&v), 1));
            let mut w = vec![0.0; 7];
            w[0] = 1.0 - noise;
            w[6] = 0.0;
            records.push((fv(&w), 0));
        }
        LabeledDataset::new(records)
    }

    #[test]
    fn root_split_lands_on_separating_feature() {
        let ds = planted_number_dot();
        let m = train_model(Classifier::DecisionTree, &ds, &Hyperparams::default(), 0).unwrap();
        let ModelParams::DecisionTree { root } = &m.params else {
            panic!("expected tree");
        };
        match root {
            TreeNode::Split { feature, .. } => assert_eq!(*feature, 6),
            TreeNode::Leaf { .. } => panic!("expected a split at the root"),
        }
        // Training accuracy 1.0 on the separable data.
        for (x, label) in &ds.records {
            assert_eq!(predict(&m, x).unwrap().label, *label);
        }
    }

    #[test]
    fn memorizes_training_points_when_separable() {
        let records: Vec<(FeatureVector, u32)> = (0..10)
            .map(|i| (fv(&[i as f64]), u32::from(i >= 5)))
            .collect();
        let ds = LabeledDataset::new(records);
        let hp = Hyperparams {
            dt_min_samples_leaf: 1,
            ..Hyperparams::default()
        };
        let m = train_model(Classifier::DecisionTree, &ds, &hp, 0).unwrap();
        for (x, label) in &ds.records {
            assert_eq!(predict(&m, x).unwrap().label, *label);
        }
    }

    /// Independent brute-force oracle: recount both sides for every
    /// candidate with naive loops and exact integer comparison.
    fn oracle_best_split(
        samples: &[(Vec<f64>, usize)],
        n_classes: usize,
        min_leaf: usize,
    ) -> Option<Split> {
        let dim = samples.first().map_or(0, |(x, _)| x.len());
        let mut best: Option<(Split, u128, u128)> = None;
        for f in 0..dim {
            let mut values: Vec<f64> = samples.iter().map(|(x, _)| x[f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for pair in values.windows(2) {
                let threshold = pair[0] + (pair[1] - pair[0]) / 2.0;
                let mut left = vec![0u64; n_classes];
                let mut right = vec![0u64; n_classes];
                for (x, c) in samples {
                    if x[f] <= threshold {
                        left[*c] += 1;
                    } else {
                        right[*c] += 1;
                    }
                }
                let nl: u64 = left.iter().sum();
                let nr: u64 = right.iter().sum();
                if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
                    continue;
                }
                let pl: u128 = left.iter().map(|c| (*c as u128).pow(2)).sum();
                let pr: u128 = right.iter().map(|c| (*c as u128).pow(2)).sum();
                let num = pl * nr as u128 + pr * nl as u128;
                let den = nl as u128 * nr as u128;
                let better = match &best {
                    Some((_, bn, bd)) => num * bd > bn * den,
                    None => true,
                };
                if better {
                    best = Some((
                        Split {
                            feature: f as u32,
                            threshold,
                        },
                        num,
                        den,
                    ));
                }
            }
        }
        best.map(|(s, _, _)| s)
    }

    #[test]
    fn best_split_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..10 {
            let n = rng.random_range(10..120);
            let dim = rng.random_range(2..6);
            let n_classes = rng.random_range(2..4);
            let samples: Vec<(Vec<f64>, usize)> = (0..n)
                .map(|_| {
                    let x: Vec<f64> = (0..dim)
                        .map(|_| (rng.random_range(0..8) as f64) / 2.0)
                        .collect();
                    (x, rng.random_range(0..n_classes))
                })
                .collect();
            let got = best_split(&samples, n_classes, 1);
            let want = oracle_best_split(&samples, n_classes, 1);
            assert_eq!(got, want, "trial {trial}");
        }
    }
}
