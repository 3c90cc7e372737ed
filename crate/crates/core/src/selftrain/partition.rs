//! Probability-accumulation partitioning of auto-annotated data.
//!
//! For each instance the teacher's class probabilities are sorted
//! descending and accumulated until the running sum exceeds the threshold
//! T. The accumulated labels form the candidate set C+; its size decides
//! the instance's fate: 1 → confident (the top label alone clears T),
//! 2..M−1 → ambiguous (kept with a partial label), M → hard (even the top
//! M−1 labels cannot clear T; excluded from training).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::RelationInstance;
use crate::corpus::RelationSchema;
use crate::encoder::{featurize_instance, FeatureConfig};
use crate::error::{CoreError, Result};
use crate::model::{LinearModel, ProbabilityDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Dynamic,
    FixedN,
}

/// What to do, in fixed-N mode, with instances whose dynamic candidate
/// set is larger than N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedNOverflow {
    /// Force every non-confident instance to the top-N candidates.
    Truncate,
    /// Send over-budget instances to the hard set instead.
    Exclude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionConfig {
    pub threshold: f64,
    pub mode: PartitionMode,
    pub fixed_n: Option<usize>,
    pub fixed_n_overflow: FixedNOverflow,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            threshold: 0.95,
            mode: PartitionMode::Dynamic,
            fixed_n: None,
            fixed_n_overflow: FixedNOverflow::Truncate,
        }
    }
}

impl PartitionConfig {
    /// Checks everything that does not depend on the relation count.
    pub fn validate_static(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CoreError::Config(format!(
                "partition threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        match (self.mode, self.fixed_n) {
            (PartitionMode::Dynamic, None) => Ok(()),
            (PartitionMode::Dynamic, Some(_)) => Err(CoreError::Config(
                "fixed_n is only meaningful in fixed_n mode".into(),
            )),
            (PartitionMode::FixedN, None) => Err(CoreError::Config(
                "fixed_n mode requires a candidate-set size".into(),
            )),
            (PartitionMode::FixedN, Some(n)) if n < 2 => Err(CoreError::Config(format!(
                "fixed_n must be at least 2, got {n}"
            ))),
            (PartitionMode::FixedN, Some(_)) => Ok(()),
        }
    }

    pub fn validate(&self, num_relations: usize) -> Result<()> {
        self.validate_static()?;
        if let (PartitionMode::FixedN, Some(n)) = (self.mode, self.fixed_n) {
            if n > num_relations.saturating_sub(1) {
                return Err(CoreError::Config(format!(
                    "fixed_n must satisfy 2 <= N <= M-1 = {}, got {n}",
                    num_relations.saturating_sub(1)
                )));
            }
        }
        Ok(())
    }
}

/// An unlabeled instance paired with the teacher's full distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoAnnotatedInstance {
    pub instance: RelationInstance,
    pub p: ProbabilityDistribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfidentInstance {
    pub instance: RelationInstance,
    /// The single candidate label (the argmax).
    pub label: usize,
    pub p: ProbabilityDistribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguousInstance {
    pub instance: RelationInstance,
    /// Candidate set C+, in descending teacher-probability order.
    pub candidates: Vec<usize>,
    /// Negative set C− = complement of C+, ascending index.
    pub negatives: Vec<usize>,
    pub p: ProbabilityDistribution,
}

impl AmbiguousInstance {
    fn new(
        instance: RelationInstance,
        candidates: Vec<usize>,
        p: ProbabilityDistribution,
    ) -> Result<Self> {
        let m = p.len();
        if candidates.len() < 2 || candidates.len() > m - 1 {
            return Err(CoreError::Invalid(format!(
                "ambiguous instance {:?} needs 2 <= |C+| <= {}, got {}",
                instance.id,
                m - 1,
                candidates.len()
            )));
        }
        let mut member = vec![false; m];
        for &c in &candidates {
            member[c] = true;
        }
        let negatives: Vec<usize> = (0..m).filter(|&i| !member[i]).collect();
        Ok(AmbiguousInstance {
            instance,
            candidates,
            negatives,
            p,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardInstance {
    pub instance: RelationInstance,
    pub p: ProbabilityDistribution,
}

/// The three disjoint sets; together they exhaust the annotated input.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Partition {
    pub confident: Vec<ConfidentInstance>,
    pub ambiguous: Vec<AmbiguousInstance>,
    pub hard: Vec<HardInstance>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.confident.len() + self.ambiguous.len() + self.hard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Label indices sorted by probability descending, ties by ascending index.
pub fn rank_desc(p: &ProbabilityDistribution) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).expect("finite probabilities").then(a.cmp(&b)));
    order
}

/// The shortest descending-probability prefix whose sum strictly exceeds
/// the threshold; all M labels when even the full sum does not.
pub fn candidate_prefix(p: &ProbabilityDistribution, threshold: f64) -> Vec<usize> {
    let mut prefix = Vec::new();
    let mut score = 0.0;
    for i in rank_desc(p) {
        score += p[i];
        prefix.push(i);
        if score > threshold {
            break;
        }
    }
    prefix
}

/// Runs the teacher over the unlabeled pool, preserving order.
pub fn annotate(
    teacher: &LinearModel,
    unlabeled: &[RelationInstance],
    features: &FeatureConfig,
) -> Result<Vec<AutoAnnotatedInstance>> {
    unlabeled
        .iter()
        .map(|inst| {
            let p = teacher.predict_proba(&featurize_instance(inst, features))?;
            Ok(AutoAnnotatedInstance {
                instance: inst.clone(),
                p,
            })
        })
        .collect()
}

/// Partitions annotated instances according to the configured mode.
pub fn partition(
    auto: &[AutoAnnotatedInstance],
    cfg: &PartitionConfig,
    num_relations: usize,
) -> Result<Partition> {
    cfg.validate(num_relations)?;
    let mut out = Partition::default();
    for item in auto {
        if item.p.len() != num_relations {
            return Err(CoreError::DimensionMismatch(format!(
                "instance {:?} has {} probabilities for {num_relations} relations",
                item.instance.id,
                item.p.len()
            )));
        }
        let prefix = candidate_prefix(&item.p, cfg.threshold);
        match cfg.mode {
            PartitionMode::Dynamic => place_dynamic(&mut out, item, prefix)?,
            PartitionMode::FixedN => {
                place_fixed_n(&mut out, item, prefix, cfg.fixed_n.unwrap(), cfg.fixed_n_overflow)?
            }
        }
    }
    Ok(out)
}

fn place_dynamic(
    out: &mut Partition,
    item: &AutoAnnotatedInstance,
    prefix: Vec<usize>,
) -> Result<()> {
    let m = item.p.len();
    if prefix.len() == 1 {
        out.confident.push(ConfidentInstance {
            instance: item.instance.clone(),
            label: prefix[0],
            p: item.p.clone(),
        });
    } else if prefix.len() == m {
        out.hard.push(HardInstance {
            instance: item.instance.clone(),
            p: item.p.clone(),
        });
    } else {
        out.ambiguous.push(AmbiguousInstance::new(
            item.instance.clone(),
            prefix,
            item.p.clone(),
        )?);
    }
    Ok(())
}

fn place_fixed_n(
    out: &mut Partition,
    item: &AutoAnnotatedInstance,
    prefix: Vec<usize>,
    n: usize,
    overflow: FixedNOverflow,
) -> Result<()> {
    // The confident rule is unchanged; only uncertain instances are
    // reshaped to a fixed candidate-set size.
    if prefix.len() == 1 {
        out.confident.push(ConfidentInstance {
            instance: item.instance.clone(),
            label: prefix[0],
            p: item.p.clone(),
        });
        return Ok(());
    }
    if overflow == FixedNOverflow::Exclude && prefix.len() > n {
        out.hard.push(HardInstance {
            instance: item.instance.clone(),
            p: item.p.clone(),
        });
        return Ok(());
    }
    let top_n: Vec<usize> = rank_desc(&item.p).into_iter().take(n).collect();
    out.ambiguous
        .push(AmbiguousInstance::new(item.instance.clone(), top_n, item.p.clone())?);
    Ok(())
}

/// Which of the three sets an instance landed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Confident,
    Ambiguous,
    Hard,
}

/// One line of the partition dump file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub id: String,
    pub set: SetKind,
    /// (relation name, probability), descending probability.
    pub probs: Vec<(String, f64)>,
    /// Candidate names: the single label for confident instances, C+ for
    /// ambiguous ones, and all M relations for hard ones.
    pub candidates: Vec<String>,
}

pub fn write_dump(path: &Path, partition: &Partition, schema: &RelationSchema) -> Result<()> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let sorted_probs = |p: &ProbabilityDistribution| -> Vec<(String, f64)> {
        rank_desc(p)
            .into_iter()
            .map(|i| (schema.name(i).to_string(), p[i]))
            .collect()
    };
    let mut emit = |record: &DumpRecord| -> Result<()> {
        serde_json::to_writer(&mut w, record).map_err(|e| CoreError::Invalid(e.to_string()))?;
        writeln!(w).map_err(|e| CoreError::io(path, e))
    };
    for c in &partition.confident {
        emit(&DumpRecord {
            id: c.instance.id.clone(),
            set: SetKind::Confident,
            probs: sorted_probs(&c.p),
            candidates: vec![schema.name(c.label).to_string()],
        })?;
    }
    for a in &partition.ambiguous {
        emit(&DumpRecord {
            id: a.instance.id.clone(),
            set: SetKind::Ambiguous,
            probs: sorted_probs(&a.p),
            candidates: a.candidates.iter().map(|&i| schema.name(i).to_string()).collect(),
        })?;
    }
    for h in &partition.hard {
        emit(&DumpRecord {
            id: h.instance.id.clone(),
            set: SetKind::Hard,
            probs: sorted_probs(&h.p),
            candidates: rank_desc(&h.p)
                .into_iter()
                .map(|i| schema.name(i).to_string())
                .collect(),
        })?;
    }
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<Vec<DumpRecord>> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, line)| !matches!(line, Ok(l) if l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| CoreError::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| CoreError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;
    use ndarray::array;

    fn auto(id: &str, p: ProbabilityDistribution) -> AutoAnnotatedInstance {
        AutoAnnotatedInstance {
            instance: RelationInstance::new(
                id,
                vec!["a".into(), "b".into()],
                Span::new(0, 1).unwrap(),
                Span::new(1, 2).unwrap(),
                None,
            )
            .unwrap(),
            p,
        }
    }

    fn dynamic(threshold: f64) -> PartitionConfig {
        PartitionConfig {
            threshold,
            ..PartitionConfig::default()
        }
    }

    fn fixed(threshold: f64, n: usize, overflow: FixedNOverflow) -> PartitionConfig {
        PartitionConfig {
            threshold,
            mode: PartitionMode::FixedN,
            fixed_n: Some(n),
            fixed_n_overflow: overflow,
        }
    }

    #[test]
    fn ambiguous_two_candidates() {
        let got = partition(&[auto("x", array![0.56, 0.42, 0.02])], &dynamic(0.95), 3).unwrap();
        assert_eq!(got.ambiguous.len(), 1);
        let a = &got.ambiguous[0];
        assert_eq!(a.candidates, vec![0, 1]);
        assert_eq!(a.negatives, vec![2]);
    }

    #[test]
    fn confident_single_candidate() {
        let got = partition(&[auto("x", array![0.97, 0.02, 0.01])], &dynamic(0.95), 3).unwrap();
        assert_eq!(got.confident.len(), 1);
        assert_eq!(got.confident[0].label, 0);
    }

    #[test]
    fn hard_when_top_m_minus_1_insufficient() {
        let got = partition(&[auto("x", array![0.34, 0.33, 0.33])], &dynamic(0.95), 3).unwrap();
        assert_eq!(got.hard.len(), 1);
    }

    #[test]
    fn tie_break_prefers_lower_index() {
        // Equal probabilities: the sort must be stable on index.
        let prefix = candidate_prefix(&array![0.4, 0.4, 0.2], 0.7);
        assert_eq!(prefix, vec![0, 1]);
        let order = rank_desc(&array![0.25, 0.25, 0.25, 0.25]);
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn exact_threshold_boundary_is_not_enough() {
        // score must strictly exceed T; 0.95 == 0.95 keeps accumulating.
        let prefix = candidate_prefix(&array![0.95, 0.04, 0.01], 0.95);
        assert_eq!(prefix, vec![0, 1]);
    }

    #[test]
    fn fixed_n_reshapes_uncertain_instances() {
        let got = partition(
            &[auto("x", array![0.56, 0.42, 0.02])],
            &fixed(0.95, 2, FixedNOverflow::Truncate),
            3,
        )
        .unwrap();
        assert_eq!(got.ambiguous[0].candidates, vec![0, 1]);
        assert!(got.hard.is_empty());
    }

    #[test]
    fn fixed_n_keeps_confident_rule() {
        let got = partition(
            &[auto("x", array![0.97, 0.02, 0.01])],
            &fixed(0.95, 2, FixedNOverflow::Truncate),
            3,
        )
        .unwrap();
        assert_eq!(got.confident.len(), 1);
    }

    #[test]
    fn fixed_n_at_m_minus_1_leaves_single_negative() {
        let got = partition(
            &[auto("x", array![0.3, 0.3, 0.2, 0.2])],
            &fixed(0.95, 3, FixedNOverflow::Truncate),
            4,
        )
        .unwrap();
        assert_eq!(got.ambiguous[0].negatives.len(), 1);
    }

    #[test]
    fn fixed_n_truncate_pads_and_truncates_to_n() {
        let flat = auto("flat", array![0.3, 0.28, 0.22, 0.2]); // dynamic C+ = 4 (hard)
        let narrow = auto("narrow", array![0.5, 0.48, 0.01, 0.01]); // dynamic C+ = 2
        let got = partition(&[flat, narrow], &fixed(0.95, 3, FixedNOverflow::Truncate), 4).unwrap();
        assert_eq!(got.ambiguous.len(), 2);
        assert!(got.ambiguous.iter().all(|a| a.candidates.len() == 3));
        assert!(got.hard.is_empty());
    }

    #[test]
    fn fixed_n_exclude_sends_overflow_to_hard() {
        let flat = auto("flat", array![0.3, 0.28, 0.22, 0.2]); // dynamic C+ = 4 > N
        let narrow = auto("narrow", array![0.5, 0.48, 0.01, 0.01]); // dynamic C+ = 2 <= N
        let got = partition(&[flat, narrow], &fixed(0.95, 3, FixedNOverflow::Exclude), 4).unwrap();
        assert_eq!(got.hard.len(), 1);
        assert_eq!(got.hard[0].instance.id, "flat");
        assert_eq!(got.ambiguous.len(), 1);
        assert_eq!(got.ambiguous[0].candidates.len(), 3);
    }

    #[test]
    fn partition_exhausts_input() {
        let items = vec![
            auto("a", array![0.97, 0.02, 0.01]),
            auto("b", array![0.56, 0.42, 0.02]),
            auto("c", array![0.34, 0.33, 0.33]),
        ];
        let got = partition(&items, &dynamic(0.95), 3).unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(
            (got.confident.len(), got.ambiguous.len(), got.hard.len()),
            (1, 1, 1)
        );
    }

    #[test]
    fn config_validation() {
        assert!(dynamic(0.95).validate(3).is_ok());
        assert!(dynamic(0.0).validate(3).is_err());
        assert!(dynamic(1.0).validate(3).is_err());
        assert!(fixed(0.95, 2, FixedNOverflow::Truncate).validate(3).is_ok());
        assert!(fixed(0.95, 1, FixedNOverflow::Truncate).validate(3).is_err());
        assert!(fixed(0.95, 3, FixedNOverflow::Truncate).validate(3).is_err()); // N > M-1
        let missing = PartitionConfig {
            mode: PartitionMode::FixedN,
            ..PartitionConfig::default()
        };
        assert!(missing.validate(3).is_err());
        let spurious = PartitionConfig {
            fixed_n: Some(2),
            ..PartitionConfig::default()
        };
        assert!(spurious.validate(3).is_err());
    }

    #[test]
    fn annotate_empty_and_uniform() {
        let feat = FeatureConfig {
            dim_per_entity: 8,
            ..FeatureConfig::default()
        };
        let teacher = LinearModel::zeros(4, feat.dim());
        assert!(annotate(&teacher, &[], &feat).unwrap().is_empty());

        let inst = RelationInstance::new(
            "u",
            vec!["x".into(), "y".into(), "z".into()],
            Span::new(0, 1).unwrap(),
            Span::new(2, 3).unwrap(),
            None,
        )
        .unwrap();
        let got = annotate(&teacher, &[inst], &feat).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0].p.sum() - 1.0).abs() < 1e-9);
        for &pi in &got[0].p {
            assert!((pi - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn dump_roundtrip() {
        let schema = RelationSchema::new(
            vec!["r0".into(), "r1".into(), "r2".into()],
            None,
        )
        .unwrap();
        let items = vec![
            auto("a", array![0.97, 0.02, 0.01]),
            auto("b", array![0.56, 0.42, 0.02]),
            auto("c", array![0.34, 0.33, 0.33]),
        ];
        let part = partition(&items, &dynamic(0.95), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("partition.jsonl");
        write_dump(&path, &part, &schema).unwrap();
        let records = read_dump(&path).unwrap();
        assert_eq!(records.len(), 3);
        let amb = records.iter().find(|r| r.id == "b").unwrap();
        assert_eq!(amb.set, SetKind::Ambiguous);
        assert_eq!(amb.candidates, vec!["r0", "r1"]);
        assert_eq!(amb.probs[0], ("r0".to_string(), 0.56));
        let hard = records.iter().find(|r| r.id == "c").unwrap();
        assert_eq!(hard.candidates.len(), 3);
    }
}
