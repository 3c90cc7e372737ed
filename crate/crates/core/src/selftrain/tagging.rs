//! Tagging modes: how partition members become training targets.
//!
//! Hard mode takes the argmax as a one-hot label; soft mode keeps the
//! teacher distribution as a fractional label; partial mode marks every
//! candidate in C+ with a multi-hot label and flags the instance for
//! set-negative training (z = 1), where each optimizer step draws a fresh
//! negative label uniformly from C−.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::FeatureVector;
use crate::error::{CoreError, Result};
use crate::model::{argmax, LabelVector};
use crate::selftrain::partition::{AmbiguousInstance, ConfidentInstance, HardInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagMode {
    Human,
    Hard,
    Soft,
    Partial,
}

/// A featurized training instance with its tagging mode.
///
/// `negative_set` is present exactly for partial-mode instances; the
/// trainer samples from it every step.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedInstance {
    pub features: FeatureVector,
    pub label: LabelVector,
    pub mode: TagMode,
    pub negative_set: Option<Vec<usize>>,
}

/// A borrowed member of any of the three partition sets.
#[derive(Clone, Copy, Debug)]
pub enum PartitionMember<'a> {
    Confident(&'a ConfidentInstance),
    Ambiguous(&'a AmbiguousInstance),
    Hard(&'a HardInstance),
}

impl<'a> PartitionMember<'a> {
    fn p(&self) -> &crate::model::ProbabilityDistribution {
        match self {
            PartitionMember::Confident(c) => &c.p,
            PartitionMember::Ambiguous(a) => &a.p,
            PartitionMember::Hard(h) => &h.p,
        }
    }

    fn gold(&self) -> Option<usize> {
        match self {
            PartitionMember::Confident(c) => c.instance.gold_relation,
            PartitionMember::Ambiguous(a) => a.instance.gold_relation,
            PartitionMember::Hard(h) => h.instance.gold_relation,
        }
    }
}

/// One-hot gold tag for a human-labeled instance (z = 0).
pub fn tag_human(features: FeatureVector, gold: usize, num_relations: usize) -> TaggedInstance {
    TaggedInstance {
        features,
        label: LabelVector::one_hot(num_relations, gold, 0),
        mode: TagMode::Human,
        negative_set: None,
    }
}

/// Tags a partition member under the requested mode.
///
/// Partial mode is only defined for ambiguous members; human mode reads
/// the instance's gold label and fails when there is none.
pub fn tag(features: FeatureVector, member: PartitionMember, mode: TagMode) -> Result<TaggedInstance> {
    let p = member.p();
    let m = p.len();
    let label = match mode {
        TagMode::Human => {
            let gold = member.gold().ok_or_else(|| {
                CoreError::Invalid("human tagging requires a gold label".into())
            })?;
            LabelVector::one_hot(m, gold, 0)
        }
        TagMode::Hard => LabelVector::one_hot(m, argmax(p), 0),
        TagMode::Soft => LabelVector::soft(p),
        TagMode::Partial => match member {
            PartitionMember::Ambiguous(a) => {
                return Ok(TaggedInstance {
                    features,
                    label: LabelVector::multi_hot(m, &a.candidates),
                    mode: TagMode::Partial,
                    negative_set: Some(a.negatives.clone()),
                });
            }
            _ => {
                return Err(CoreError::Invalid(
                    "partial tagging is only defined for ambiguous instances".into(),
                ))
            }
        },
    };
    Ok(TaggedInstance {
        features,
        label,
        mode,
        negative_set: None,
    })
}

/// Ablation tag: drop the partial label but keep set-negative training.
/// The candidate set collapses to the argmax, so negatives are drawn from
/// the complement of the argmax alone.
pub fn tag_ambiguous_argmax_negative(
    features: FeatureVector,
    ambiguous: &AmbiguousInstance,
) -> TaggedInstance {
    let m = ambiguous.p.len();
    let top = argmax(&ambiguous.p);
    let negatives: Vec<usize> = (0..m).filter(|&i| i != top).collect();
    TaggedInstance {
        features,
        label: LabelVector::one_hot(m, top, 1),
        mode: TagMode::Partial,
        negative_set: Some(negatives),
    }
}

/// Ablation tag: keep the partial label but train it positively, with the
/// cross-entropy averaged over the candidate labels (uniform fractional
/// mass on C+, z = 0).
pub fn tag_ambiguous_positive_average(
    features: FeatureVector,
    ambiguous: &AmbiguousInstance,
) -> TaggedInstance {
    let m = ambiguous.p.len();
    TaggedInstance {
        features,
        label: LabelVector::fractional_uniform(m, &ambiguous.candidates),
        mode: TagMode::Soft,
        negative_set: None,
    }
}

/// Uniform draw from the instance's negative set, as a one-hot z = 1
/// label for the unified loss.
pub fn sample_negative_label(
    item: &TaggedInstance,
    rng: &mut ChaCha8Rng,
) -> Result<LabelVector> {
    let negatives = item
        .negative_set
        .as_deref()
        .filter(|n| !n.is_empty())
        .ok_or(CoreError::Empty("negative-label set"))?;
    let k = negatives[rng.gen_range(0..negatives.len())];
    Ok(LabelVector::one_hot(item.label.y.len(), k, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{RelationInstance, Span};
    use crate::selftrain::partition::{partition, AutoAnnotatedInstance, PartitionConfig};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};
    use rand::SeedableRng;

    fn instance(gold: Option<usize>) -> RelationInstance {
        RelationInstance::new(
            "t",
            vec!["a".into(), "b".into()],
            Span::new(0, 1).unwrap(),
            Span::new(1, 2).unwrap(),
            gold,
        )
        .unwrap()
    }

    fn worked_partition() -> crate::selftrain::partition::Partition {
        let items = vec![
            AutoAnnotatedInstance {
                instance: instance(Some(2)),
                p: array![0.56, 0.42, 0.02],
            },
            AutoAnnotatedInstance {
                instance: instance(None),
                p: array![0.97, 0.02, 0.01],
            },
        ];
        partition(&items, &PartitionConfig::default(), 3).unwrap()
    }

    fn feats() -> FeatureVector {
        Array1::zeros(4)
    }

    #[test]
    fn tagging_mode_golden() {
        let part = worked_partition();
        let amb = &part.ambiguous[0];

        let hard = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Hard).unwrap();
        assert_eq!(hard.label.y, array![1.0, 0.0, 0.0]);
        assert_eq!(hard.label.z, 0);

        let soft = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Soft).unwrap();
        assert_eq!(soft.label.y, array![0.56, 0.42, 0.02]);
        assert_eq!(soft.label.z, 0);

        let partial = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Partial).unwrap();
        assert_eq!(partial.label.y, array![1.0, 1.0, 0.0]);
        assert_eq!(partial.label.z, 1);
        assert_eq!(partial.negative_set.as_deref(), Some(&[2][..]));
    }

    #[test]
    fn confident_hard_tag_uses_argmax() {
        let part = worked_partition();
        let conf = &part.confident[0];
        let tagged = tag(feats(), PartitionMember::Confident(conf), TagMode::Hard).unwrap();
        assert_eq!(tagged.label.one_hot_index(), Some(0));
        assert_eq!(tagged.label.z, 0);
    }

    #[test]
    fn partial_mode_rejected_for_confident() {
        let part = worked_partition();
        let conf = &part.confident[0];
        assert!(tag(feats(), PartitionMember::Confident(conf), TagMode::Partial).is_err());
    }

    #[test]
    fn human_mode_reads_gold() {
        let part = worked_partition();
        let amb = &part.ambiguous[0]; // carries gold = 2
        let tagged = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Human).unwrap();
        assert_eq!(tagged.label.one_hot_index(), Some(2));

        let conf = &part.confident[0]; // no gold label
        assert!(tag(feats(), PartitionMember::Confident(conf), TagMode::Human).is_err());
    }

    #[test]
    fn partial_label_counts_candidates() {
        let items = vec![AutoAnnotatedInstance {
            instance: instance(None),
            p: array![0.02, 0.56, 0.01, 0.01, 0.40],
        }];
        let part = partition(&items, &PartitionConfig::default(), 5).unwrap();
        let amb = &part.ambiguous[0];
        assert_eq!(amb.candidates, vec![1, 4]);
        let tagged = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Partial).unwrap();
        assert_eq!(tagged.label.y.sum(), 2.0);
        assert_eq!(tagged.label.y[1], 1.0);
        assert_eq!(tagged.label.y[4], 1.0);
        assert_eq!(tagged.label.z, 1);
    }

    #[test]
    fn negative_sampling_uniform_and_in_support() {
        let items = vec![AutoAnnotatedInstance {
            instance: instance(None),
            p: array![0.02, 0.50, 0.46, 0.01, 0.01],
        }];
        let part = partition(&items, &PartitionConfig::default(), 5).unwrap();
        let amb = &part.ambiguous[0];
        assert_eq!(amb.candidates, vec![1, 2]);
        let tagged = tag(feats(), PartitionMember::Ambiguous(amb), TagMode::Partial).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            let label = sample_negative_label(&tagged, &mut rng).unwrap();
            let k = label.one_hot_index().unwrap();
            assert_eq!(label.z, 1);
            assert!(!amb.candidates.contains(&k));
            counts[k] += 1;
        }
        assert_eq!(counts[1] + counts[2], 0);
        for &k in &[0usize, 3, 4] {
            let freq = counts[k] as f64 / 10_000.0;
            assert_abs_diff_eq!(freq, 1.0 / 3.0, epsilon = 0.02);
        }
    }

    #[test]
    fn singleton_negative_set_always_drawn() {
        let part = worked_partition();
        let tagged = tag(
            feats(),
            PartitionMember::Ambiguous(&part.ambiguous[0]),
            TagMode::Partial,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let label = sample_negative_label(&tagged, &mut rng).unwrap();
            assert_eq!(label.one_hot_index(), Some(2));
        }
    }

    #[test]
    fn sampling_requires_negative_set() {
        let item = tag_human(feats(), 0, 3);
        assert!(matches!(
            sample_negative_label(&item, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(CoreError::Empty(_))
        ));
    }

    #[test]
    fn argmax_negative_ablation_tag() {
        let part = worked_partition();
        let tagged = tag_ambiguous_argmax_negative(feats(), &part.ambiguous[0]);
        assert_eq!(tagged.label.one_hot_index(), Some(0));
        assert_eq!(tagged.label.z, 1);
        assert_eq!(tagged.mode, TagMode::Partial);
        assert_eq!(tagged.negative_set.as_deref(), Some(&[1, 2][..]));
    }

    #[test]
    fn positive_average_ablation_tag() {
        let part = worked_partition();
        let tagged = tag_ambiguous_positive_average(feats(), &part.ambiguous[0]);
        assert_eq!(tagged.label.z, 0);
        assert_eq!(tagged.mode, TagMode::Soft);
        assert_abs_diff_eq!(tagged.label.y[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tagged.label.y[1], 0.5, epsilon = 1e-15);
        assert_eq!(tagged.label.y[2], 0.0);
        assert!(tagged.negative_set.is_none());
    }
}
