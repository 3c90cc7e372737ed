//! Mini-batch gradient descent with early stopping on dev micro-F1.
//!
//! Every tagged instance flows through the unified loss. Partial-mode
//! instances do not carry a fixed target: each optimizer step the
//! negative sampler draws a fresh label from the instance's negative set,
//! so the set-negative pressure moves around C− over the course of
//! training.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::FeatureVector;
use crate::error::{CoreError, Result};
use crate::eval::micro_f1_from_pairs;
use crate::model::{gradient, LabelVector, LinearModel};
use crate::selftrain::tagging::{TagMode, TaggedInstance};
use crate::util::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many consecutive epochs without a new best dev score.
    pub patience: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            batch_size: 32,
            max_epochs: 20,
            patience: 5,
            l2: 1e-4,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CoreError::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(CoreError::Config("batch_size must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(CoreError::Config("patience must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(CoreError::Config("l2 must be nonnegative".into()));
        }
        Ok(())
    }

    /// Copy with the randomness rebased on a derived stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        TrainConfig { seed, ..self.clone() }
    }
}

/// Labeled dev examples plus the relation excluded from micro-F1, if any.
#[derive(Clone, Debug, Default)]
pub struct DevSet {
    pub examples: Vec<(FeatureVector, usize)>,
    pub excluded: Option<usize>,
}

impl DevSet {
    /// Dev micro-F1 of argmax predictions; None when there are no examples.
    pub fn score(&self, model: &LinearModel) -> Result<Option<f64>> {
        if self.examples.is_empty() {
            return Ok(None);
        }
        let pairs = self
            .examples
            .iter()
            .map(|(h, gold)| Ok((*gold, model.predict(h)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(micro_f1_from_pairs(&pairs, self.excluded)))
    }
}

/// Learned parameters plus the epoch they come from. `best_epoch` = 0
/// means the initial parameters were never beaten on dev; `best_dev_f1`
/// is None when no dev set was given (the final epoch's parameters are
/// returned in that case).
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub best_epoch: usize,
    pub best_dev_f1: Option<f64>,
}

/// Draws a per-step label for a partial-mode instance.
pub type NegativeSampler<'a> =
    &'a mut dyn FnMut(&TaggedInstance, &mut ChaCha8Rng) -> Result<LabelVector>;

pub fn train(
    init: &LinearModel,
    data: &[TaggedInstance],
    dev: &DevSet,
    cfg: &TrainConfig,
    negative_sampler: NegativeSampler,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(CoreError::Empty("training data"));
    }
    let d = init.feature_dim();
    let m = init.num_relations();
    for inst in data {
        if inst.features.len() != d || inst.label.y.len() != m {
            return Err(CoreError::DimensionMismatch(format!(
                "instance with {} features / {} labels against model {m}×{d}",
                inst.features.len(),
                inst.label.y.len()
            )));
        }
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "trainer:shuffle"));
    let mut negative_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "trainer:negatives"));

    let mut model = init.clone();
    let mut best_f1 = dev.score(&model)?;
    let mut best_model = model.clone();
    let mut best_epoch = 0usize;
    let mut epochs_without_improvement = 0usize;
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = chunk
                .iter()
                .map(|&i| {
                    let inst = &data[i];
                    let label = if inst.mode == TagMode::Partial {
                        negative_sampler(inst, &mut negative_rng)?
                    } else {
                        inst.label.clone()
                    };
                    Ok((inst.features.clone(), label))
                })
                .collect::<Result<Vec<_>>>()?;
            let (dw, db) = gradient(&model, &batch, cfg.l2)?;
            model.w.scaled_add(-cfg.learning_rate, &dw);
            model.b.scaled_add(-cfg.learning_rate, &db);
        }

        match dev.score(&model)? {
            Some(f1) => {
                if best_f1.map_or(true, |b| f1 > b) {
                    best_f1 = Some(f1);
                    best_model = model.clone();
                    best_epoch = epoch;
                    epochs_without_improvement = 0;
                } else {
                    epochs_without_improvement += 1;
                    if epochs_without_improvement >= cfg.patience {
                        break;
                    }
                }
            }
            None => {
                // No dev set: keep the latest parameters, never stop early.
                best_model = model.clone();
                best_epoch = epoch;
            }
        }
    }

    if std::env::var_os("STAD_TRACE").is_some() {
        eprintln!("trace train: n {} best_epoch {} dev {:?}", data.len(), best_epoch, best_f1);
    }
    Ok(TrainOutcome {
        model: best_model,
        best_epoch,
        best_dev_f1: best_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selftrain::tagging::{sample_negative_label, tag_human};
    use ndarray::Array1;

    /// Two well-separated clusters in a 3-dimensional feature space.
    fn separable(n_per_class: usize) -> Vec<TaggedInstance> {
        let mut out = Vec::new();
        for i in 0..n_per_class {
            let wiggle = 0.1 * (i % 3) as f64;
            out.push(tag_human(Array1::from(vec![1.0, wiggle, 0.0]), 0, 2));
            out.push(tag_human(Array1::from(vec![0.0, wiggle, 1.0]), 1, 2));
        }
        out
    }

    fn dev_from(data: &[TaggedInstance]) -> DevSet {
        DevSet {
            examples: data
                .iter()
                .map(|t| (t.features.clone(), t.label.one_hot_index().unwrap()))
                .collect(),
            excluded: None,
        }
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            learning_rate: 1.0,
            batch_size: 4,
            max_epochs: 30,
            patience: 3,
            l2: 0.0,
            seed: 11,
        }
    }

    #[test]
    fn reaches_perfect_dev_f1_on_separable_data() {
        let data = separable(8);
        let dev = dev_from(&data);
        let outcome = train(
            &LinearModel::zeros(2, 3),
            &data,
            &dev,
            &cfg(),
            &mut |i, r| sample_negative_label(i, r),
        )
        .unwrap();
        assert_eq!(outcome.best_dev_f1, Some(1.0));
        assert!(outcome.best_epoch >= 1);
    }

    #[test]
    fn zero_epochs_returns_init() {
        let data = separable(2);
        let init = LinearModel::zeros(2, 3);
        let outcome = train(
            &init,
            &data,
            &dev_from(&data),
            &TrainConfig {
                max_epochs: 0,
                ..cfg()
            },
            &mut |i, r| sample_negative_label(i, r),
        )
        .unwrap();
        assert_eq!(outcome.model, init);
        assert_eq!(outcome.best_epoch, 0);
    }

    #[test]
    fn identical_seeds_give_identical_parameters() {
        let data = separable(6);
        let dev = dev_from(&data);
        let run = || {
            train(&LinearModel::zeros(2, 3), &data, &dev, &cfg(), &mut |i, r| {
                sample_negative_label(i, r)
            })
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.model, b.model);
        assert_eq!(a.best_epoch, b.best_epoch);
    }

    #[test]
    fn sampler_called_fresh_every_step() {
        let mut data = separable(1); // 2 instances, batch covers all
        data.push(TaggedInstance {
            features: Array1::from(vec![0.5, 0.5, 0.5]),
            label: crate::model::LabelVector::multi_hot(2, &[0]),
            mode: TagMode::Partial,
            negative_set: Some(vec![1]),
        });
        let epochs = 5;
        let mut calls = 0usize;
        train(
            &LinearModel::zeros(2, 3),
            &data,
            &DevSet::default(),
            &TrainConfig {
                max_epochs: epochs,
                batch_size: 8,
                ..cfg()
            },
            &mut |i, r| {
                calls += 1;
                sample_negative_label(i, r)
            },
        )
        .unwrap();
        // One partial instance, one step per epoch.
        assert_eq!(calls, epochs);
    }

    #[test]
    fn early_stopping_halts_before_max_epochs() {
        let mut data = separable(6);
        // A partial instance lets us count optimizer steps via the sampler.
        data.push(TaggedInstance {
            features: Array1::from(vec![0.2, 1.0, 0.2]),
            label: crate::model::LabelVector::multi_hot(2, &[0]),
            mode: TagMode::Partial,
            negative_set: Some(vec![1]),
        });
        let dev = dev_from(&separable(6));
        let mut calls = 0usize;
        let outcome = train(
            &LinearModel::zeros(2, 3),
            &data,
            &dev,
            &TrainConfig {
                max_epochs: 500,
                patience: 2,
                ..cfg()
            },
            &mut |i, r| {
                calls += 1;
                sample_negative_label(i, r)
            },
        )
        .unwrap();
        assert_eq!(outcome.best_dev_f1, Some(1.0));
        // Dev F1 saturates at 1.0 quickly; patience must cut the run far
        // short of 500 epochs (one sampler call per epoch here).
        assert!(calls < 50, "ran {calls} epochs");
    }

    #[test]
    fn empty_training_data_rejected() {
        let outcome = train(
            &LinearModel::zeros(2, 3),
            &[],
            &DevSet::default(),
            &cfg(),
            &mut |i, r| sample_negative_label(i, r),
        );
        assert!(matches!(outcome, Err(CoreError::Empty(_))));
    }
}
