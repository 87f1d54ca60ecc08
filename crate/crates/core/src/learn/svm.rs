//! One-vs-rest linear SVM: hinge loss with L2 regularization, trained by
//! seeded subgradient descent with learning rate 1/(lambda * t) and a fixed
//! epoch count. The weight vector is kept as scale * direction so sparse
//! updates stay O(nonzeros).

use super::ModelParams;
use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(super) fn train(
    ds: &LabeledDataset<FeatureVector>,
    dim: usize,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<ModelParams> {
    if c <= 0.0 {
        return Err(Error::Contract(format!("svm C must be positive, got {c}")));
    }
    if epochs == 0 {
        return Err(Error::Contract("svm epoch count must be positive".into()));
    }
    let n = ds.len();
    let lambda = 1.0 / (c * n as f64);

    let samples: Vec<Vec<(u32, f64)>> = ds
        .records
        .iter()
        .map(|(x, _)| x.nonzero().collect())
        .collect();

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(ds.class_alphabet.len());
    let mut biases = Vec::with_capacity(ds.class_alphabet.len());
    for class in &ds.class_alphabet {
        let class_seed = master.next_u64();
        let targets: Vec<f64> = ds
            .records
            .iter()
            .map(|(_, l)| if l == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = train_binary(&samples, &targets, dim, lambda, epochs, class_seed);
        weights.push(w);
        biases.push(b);
    }
    Ok(ModelParams::LinearSvm { weights, biases })
}

fn train_binary(
    samples: &[Vec<(u32, f64)>],
    targets: &[f64],
    dim: usize,
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut direction = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            // eta * lambda = 1/(t+1) keeps the decay factor strictly positive.
            let eta = 1.0 / (lambda * (t + 1) as f64);
            let dot: f64 = samples[i].iter().map(|(j, v)| direction[*j as usize] * v).sum();
            let margin = targets[i] * (scale * dot + bias);
            scale *= 1.0 - eta * lambda;
            if margin < 1.0 {
                let step = eta * targets[i] / scale;
                for (j, v) in &samples[i] {
                    direction[*j as usize] += step * v;
                }
                bias += eta * targets[i];
            }
        }
    }
    (direction.iter().map(|d| scale * d).collect(), bias)
}

/// Per-class decision margins w.x + b in alphabet order.
pub(super) fn margins(x: &FeatureVector, weights: &[Vec<f64>], biases: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(biases)
        .map(|(w, b)| x.nonzero().map(|(j, v)| w[j as usize] * v).sum::<f64>() + b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::fv;
    use super::super::{evaluate, predict, train as train_model, Classifier, Hyperparams, ModelParams};
    use crate::corpus::LabeledDataset;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable_2d() -> LabeledDataset<crate::featurize::FeatureVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut records = Vec::new();
        for _ in 0..60 {
            let x: f64 = rng.random_range(0.0..1.0);
            let y: f64 = rng.random_range(0.0..1.0);
            // Separated by x + y = 1 with a margin band removed.
            if (x + y - 1.0).abs() < 0.15 {
                continue;
            }
            records.push((fv(&[x, y]), u32::from(x + y > 1.0)));
        }
        LabeledDataset::new(records)
    }

    #[test]
    fn separable_data_reaches_perfect_training_f1() {
        let ds = separable_2d();
        let m = train_model(Classifier::LinearSvm, &ds, &Hyperparams::default(), 3).unwrap();
        let report = evaluate(&m, &ds).unwrap();
        assert_eq!(report.macro_f1, 1.0, "{}", report.to_text_table());
    }

    #[test]
    fn argmax_invariant_to_positive_rescaling() {
        let ds = separable_2d();
        let mut m = train_model(Classifier::LinearSvm, &ds, &Hyperparams::default(), 3).unwrap();
        let before: Vec<u32> = ds
            .records
            .iter()
            .map(|(x, _)| predict(&m, x).unwrap().label)
            .collect();
        if let ModelParams::LinearSvm { weights, biases } = &mut m.params {
            for w in weights.iter_mut() {
                for v in w.iter_mut() {
                    *v *= 7.5;
                }
            }
            for b in biases.iter_mut() {
                *b *= 7.5;
            }
        }
        let after: Vec<u32> = ds
            .records
            .iter()
            .map(|(x, _)| predict(&m, x).unwrap().label)
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn multiclass_one_vs_rest_trains_per_class_weights() {
        let mut records = Vec::new();
        for i in 0..30 {
            let off = (i % 10) as f64 * 0.01;
            records.push((fv(&[1.0 + off, 0.0, 0.0]), 0));
            records.push((fv(&[0.0, 1.0 + off, 0.0]), 1));
            records.push((fv(&[0.0, 0.0, 1.0 + off]), 2));
        }
        let ds = LabeledDataset::new(records);
        let m = train_model(Classifier::LinearSvm, &ds, &Hyperparams::default(), 1).unwrap();
        if let ModelParams::LinearSvm { weights, biases } = &m.params {
            assert_eq!(weights.len(), 3);
            assert_eq!(biases.len(), 3);
        } else {
            panic!("expected svm params");
        }
        let report = evaluate(&m, &ds).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }
}
