//! Multinomial Naive Bayes with additive smoothing. Feature values act as
//! (possibly fractional) event counts and must be non-negative.

use super::ModelParams;
use crate::corpus::LabeledDataset;
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;

pub(super) fn train(
    ds: &LabeledDataset<FeatureVector>,
    dim: usize,
    alpha: f64,
) -> Result<ModelParams> {
    if alpha <= 0.0 {
        return Err(Error::Contract(format!(
            "naive bayes smoothing alpha must be positive, got {alpha}"
        )));
    }
    let k = ds.class_alphabet.len();
    let mut counts = vec![vec![0.0f64; dim]; k];
    let mut class_sizes = vec![0usize; k];
    for (i, (x, label)) in ds.records.iter().enumerate() {
        let c = ds
            .class_alphabet
            .iter()
            .position(|l| l == label)
            .expect("label validated by train()");
        class_sizes[c] += 1;
        for (j, v) in x.nonzero() {
            if v < 0.0 {
                return Err(Error::Data(format!(
                    "record {i}: naive bayes requires non-negative features, found {v} at index {j}"
                )));
            }
            counts[c][j as usize] += v;
        }
    }

    let n = ds.len() as f64;
    let log_priors = class_sizes
        .iter()
        .map(|&s| (s as f64 / n).ln())
        .collect();
    let log_likelihoods = counts
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            let denom = total + alpha * dim as f64;
            row.into_iter()
                .map(|c| ((c + alpha) / denom).ln())
                .collect()
        })
        .collect();
    Ok(ModelParams::NaiveBayes {
        alpha,
        log_priors,
        log_likelihoods,
    })
}

/// Unnormalized log-posterior per class: log prior plus the weighted sum of
/// log likelihoods over the nonzero features.
pub(super) fn scores(
    x: &FeatureVector,
    log_priors: &[f64],
    log_likelihoods: &[Vec<f64>],
) -> Vec<f64> {
    log_priors
        .iter()
        .zip(log_likelihoods)
        .map(|(prior, row)| {
            prior
                + x.nonzero()
                    .map(|(j, v)| v * row[j as usize])
                    .sum::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::text_fv;
    use super::super::{predict, train as train_model, Classifier, Hyperparams, ModelParams};
    use crate::corpus::LabeledDataset;
    use crate::featurize::FeatureVector;

    /// Vocabulary for the 4-document hand corpus, lexicographic:
    /// a=0, cat=1, introduction=2, results=3, sat=4, the=5.
    fn hand_corpus() -> LabeledDataset<FeatureVector> {
        const H: u32 = 1;
        const R: u32 = 0;
        LabeledDataset::new(vec![
            (text_fv(6, &[(2, 1.0)]), H),            // "introduction"
            (text_fv(6, &[(2, 1.0), (3, 1.0)]), H),  // "introduction results"
            (text_fv(6, &[(1, 1.0), (5, 1.0)]), R),  // "the cat"
            (text_fv(6, &[(0, 1.0), (1, 1.0), (4, 1.0)]), R), // "a cat sat"
        ])
    }

    #[test]
    fn hand_corpus_posteriors_match_bayes_arithmetic() {
        let m = train_model(
            Classifier::NaiveBayes,
            &hand_corpus(),
            &Hyperparams::default(),
            0,
        )
        .unwrap();

        // Hand arithmetic with alpha = 1, six features:
        //   class H: token totals {introduction: 2, results: 1}, total 3
        //     theta_H(introduction) = (2+1)/(3+6) = 3/9
        //   class R: token totals {a:1, cat:2, sat:1, the:1}, total 5
        //     theta_R(introduction) = (0+1)/(5+6) = 1/11
        //   priors are 1/2 each, so for the text "introduction":
        //     P(H | x) = (1/3) / (1/3 + 1/11) = 11/14
        let pred = predict(&m, &text_fv(6, &[(2, 1.0)])).unwrap();
        assert_eq!(pred.label, 1);
        let max = pred.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = pred.scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        let posterior_h = exp[1] / z;
        assert!(
            (posterior_h - 11.0 / 14.0).abs() < 1e-9,
            "posterior {posterior_h}"
        );

        // Raw per-class scores are the log joints.
        let expect_h = 0.5f64.ln() + (3.0f64 / 9.0).ln();
        let expect_r = 0.5f64.ln() + (1.0f64 / 11.0).ln();
        assert!((pred.scores[1] - expect_h).abs() < 1e-9);
        assert!((pred.scores[0] - expect_r).abs() < 1e-9);
    }

    #[test]
    fn likelihoods_sum_to_one_per_class() {
        let m = train_model(
            Classifier::NaiveBayes,
            &hand_corpus(),
            &Hyperparams::default(),
            0,
        )
        .unwrap();
        let ModelParams::NaiveBayes {
            log_likelihoods, ..
        } = &m.params
        else {
            panic!("expected NB params");
        };
        for row in log_likelihoods {
            let sum: f64 = row.iter().map(|l| l.exp()).sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        }
    }

    #[test]
    fn decision_invariant_to_duplicating_training_set() {
        let base = hand_corpus();
        let mut doubled = base.records.clone();
        doubled.extend(base.records.clone());
        let doubled = LabeledDataset::new(doubled);

        let m1 = train_model(Classifier::NaiveBayes, &base, &Hyperparams::default(), 0).unwrap();
        let m2 = train_model(Classifier::NaiveBayes, &doubled, &Hyperparams::default(), 0).unwrap();
        for (x, _) in &base.records {
            assert_eq!(
                predict(&m1, x).unwrap().label,
                predict(&m2, x).unwrap().label
            );
        }
    }

    #[test]
    fn symmetric_classes_tie_to_class_zero() {
        // Identical statistics for both classes: scores tie exactly.
        let ds = LabeledDataset::new(vec![
            (text_fv(2, &[(0, 1.0)]), 0),
            (text_fv(2, &[(1, 1.0)]), 0),
            (text_fv(2, &[(0, 1.0)]), 1),
            (text_fv(2, &[(1, 1.0)]), 1),
        ]);
        let m = train_model(Classifier::NaiveBayes, &ds, &Hyperparams::default(), 0).unwrap();
        let pred = predict(&m, &text_fv(2, &[(0, 1.0), (1, 1.0)])).unwrap();
        assert_eq!(pred.scores[0], pred.scores[1]);
        assert_eq!(pred.label, 0);
    }
}
