//! Metrics and analyses: micro/macro F1 with optional negative-class
//! exclusion, top-N evaluation, candidate-size distribution, weighted
//! ambiguous counts, multi-seed aggregation, and the ablation matrix.
//!
//! When the schema designates a negative relation, F1 scores exclude it
//! from the evaluated relation set but still count predictions into or
//! out of it as false positives/negatives (the usual relation-extraction
//! convention). Without a negative relation, micro-F1 equals accuracy.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::RelationSchema;
use crate::error::{CoreError, Result};
use crate::model::ProbabilityDistribution;
use crate::selftrain::partition::{rank_desc, AmbiguousInstance, Partition};
use crate::selftrain::pipeline::{AmbiguousHandling, EvalSplit, PipelineContext};

/// Gold label plus the model's full distribution for one test instance.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    pub gold: usize,
    pub p: ProbabilityDistribution,
}

/// Pooled-count micro-F1 over (gold, predicted) index pairs.
///
/// Pairs where both sides are the excluded class are ignored; a wrong
/// prediction counts as FP only when the predicted class is evaluated and
/// as FN only when the gold class is.
pub(crate) fn micro_f1_from_pairs(pairs: &[(usize, usize)], excluded: Option<usize>) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for &(gold, pred) in pairs {
        if gold == pred {
            if Some(gold) != excluded {
                tp += 1;
            }
        } else {
            if Some(pred) != excluded {
                fp += 1;
            }
            if Some(gold) != excluded {
                fn_ += 1;
            }
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn argmax_pairs(records: &[PredictionRecord]) -> Vec<(usize, usize)> {
    records
        .iter()
        .map(|r| (r.gold, crate::model::argmax(&r.p)))
        .collect()
}

fn check_records(records: &[PredictionRecord], schema: &RelationSchema) -> Result<()> {
    if records.is_empty() {
        return Err(CoreError::Empty("prediction records"));
    }
    for r in records {
        if r.gold >= schema.len() || r.p.len() != schema.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "record with gold {} / {} probabilities against {} relations",
                r.gold,
                r.p.len(),
                schema.len()
            )));
        }
    }
    Ok(())
}

/// Micro-averaged F1 of argmax predictions (ties → lowest index).
pub fn micro_f1(records: &[PredictionRecord], schema: &RelationSchema) -> Result<f64> {
    check_records(records, schema)?;
    Ok(micro_f1_from_pairs(&argmax_pairs(records), schema.negative_index()))
}

/// Per-relation precision/recall/F1 with gold support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationMetrics {
    pub relation: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

fn per_relation_metrics(
    pairs: &[(usize, usize)],
    schema: &RelationSchema,
) -> Vec<RelationMetrics> {
    let m = schema.len();
    let excluded = schema.negative_index();
    let mut tp = vec![0usize; m];
    let mut fp = vec![0usize; m];
    let mut fn_ = vec![0usize; m];
    let mut support = vec![0usize; m];
    for &(gold, pred) in pairs {
        support[gold] += 1;
        if gold == pred {
            tp[gold] += 1;
        } else {
            fp[pred] += 1;
            fn_[gold] += 1;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    (0..m)
        .filter(|&r| Some(r) != excluded)
        .map(|r| {
            let precision = ratio(tp[r], tp[r] + fp[r]);
            let recall = ratio(tp[r], tp[r] + fn_[r]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            RelationMetrics {
                relation: schema.name(r).to_string(),
                precision,
                recall,
                f1,
                support: support[r],
            }
        })
        .collect()
}

/// Unweighted mean of per-relation F1 over the evaluated relation set;
/// relations absent from both gold and predictions contribute F1 = 0.
pub fn macro_f1(records: &[PredictionRecord], schema: &RelationSchema) -> Result<f64> {
    check_records(records, schema)?;
    let per = per_relation_metrics(&argmax_pairs(records), schema);
    Ok(per.iter().map(|r| r.f1).sum::<f64>() / per.len() as f64)
}

/// Micro-F1 where a record counts as correct when its gold label ranks
/// among the n most probable labels.
pub fn top_n_f1(records: &[PredictionRecord], schema: &RelationSchema, n: usize) -> Result<f64> {
    check_records(records, schema)?;
    assert!(
        n >= 1 && n <= schema.len(),
        "top-n rank {n} outside 1..={}",
        schema.len()
    );
    let pairs: Vec<(usize, usize)> = records
        .iter()
        .map(|r| {
            let ranked = rank_desc(&r.p);
            let effective = if ranked[..n].contains(&r.gold) {
                r.gold
            } else {
                ranked[0]
            };
            (r.gold, effective)
        })
        .collect();
    Ok(micro_f1_from_pairs(&pairs, schema.negative_index()))
}

/// Counts instances by candidate-set size: confident at 1, hard at M.
pub fn candidate_size_histogram(partition: &Partition, num_relations: usize) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for _ in &partition.confident {
        *hist.entry(1).or_insert(0) += 1;
    }
    for a in &partition.ambiguous {
        *hist.entry(a.candidates.len()).or_insert(0) += 1;
    }
    for _ in &partition.hard {
        *hist.entry(num_relations).or_insert(0) += 1;
    }
    hist
}

/// Each ambiguous instance spreads one unit of mass uniformly over its
/// candidates: 1/|C+| per candidate relation. Returns weights in schema
/// order; their sum equals the number of ambiguous instances.
pub fn weighted_ambiguous_counts(
    ambiguous: &[AmbiguousInstance],
    schema: &RelationSchema,
) -> Vec<f64> {
    let mut weights = vec![0.0; schema.len()];
    for a in ambiguous {
        let share = 1.0 / a.candidates.len() as f64;
        for &c in &a.candidates {
            weights[c] += share;
        }
    }
    weights
}

/// Top-N micro-F1 at one rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopNEntry {
    pub n: usize,
    pub f1: f64,
}

/// All metrics for one evaluation of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_relation: Vec<RelationMetrics>,
    pub top_n: Vec<TopNEntry>,
}

impl MetricReport {
    pub fn compute(records: &[PredictionRecord], schema: &RelationSchema) -> Result<Self> {
        check_records(records, schema)?;
        let top_n = (1..=schema.len())
            .map(|n| {
                Ok(TopNEntry {
                    n,
                    f1: top_n_f1(records, schema, n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricReport {
            micro_f1: micro_f1(records, schema)?,
            macro_f1: macro_f1(records, schema)?,
            per_relation: per_relation_metrics(&argmax_pairs(records), schema),
            top_n,
        })
    }
}

/// Mean and sample standard deviation (n−1) of micro-F1 across seeds.
/// The deviation is unavailable for a single report.
pub fn aggregate_seeds(reports: &[MetricReport]) -> Result<(f64, Option<f64>)> {
    if reports.is_empty() {
        return Err(CoreError::Empty("metric reports"));
    }
    let n = reports.len() as f64;
    let mean = reports.iter().map(|r| r.micro_f1).sum::<f64>() / n;
    let std = if reports.len() < 2 {
        None
    } else {
        let var = reports
            .iter()
            .map(|r| (r.micro_f1 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        Some(var.sqrt())
    };
    Ok((mean, std))
}

/// Partition statistics recorded alongside each seed's run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub seed: u64,
    pub confident: usize,
    pub ambiguous: usize,
    pub hard: usize,
    /// (candidate-set size, instance count), ascending size.
    pub candidate_sizes: Vec<(usize, usize)>,
    /// Per-relation 1/|C+| mass from ambiguous instances, schema order.
    pub ambiguous_weight: Vec<f64>,
}

impl PartitionSummary {
    pub fn from_partition(seed: u64, partition: &Partition, schema: &RelationSchema) -> Self {
        PartitionSummary {
            seed,
            confident: partition.confident.len(),
            ambiguous: partition.ambiguous.len(),
            hard: partition.hard.len(),
            candidate_sizes: candidate_size_histogram(partition, schema.len())
                .into_iter()
                .collect(),
            ambiguous_weight: weighted_ambiguous_counts(&partition.ambiguous, schema),
        }
    }
}

/// One seed's evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub report: MetricReport,
}

/// A system's multi-seed outcome: per-seed reports, their aggregate, and
/// the partition statistics behind the student training sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub system: String,
    pub seeds: Vec<u64>,
    pub mean_micro_f1: f64,
    pub std_micro_f1: Option<f64>,
    pub mean_macro_f1: f64,
    pub per_seed: Vec<SeedReport>,
    pub partitions: Vec<PartitionSummary>,
}

impl ExperimentResult {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| CoreError::Invalid(e.to_string()))?;
        writeln!(w).map_err(|e| CoreError::io(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CoreError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

/// One row of the ablation comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub mean_micro_f1: f64,
    pub std_micro_f1: Option<f64>,
    /// Mean micro-F1 minus the full system's mean.
    pub delta_vs_full: f64,
}

/// Runs STAD and its three ablations over the given seeds, sharing the
/// teacher and partition per seed.
///
/// Variants: full; without partial labeling (candidates collapse to the
/// argmax, set-negative kept); without set-negative training (partial
/// tags trained positively, cross-entropy averaged over candidates);
/// without both (hard tags — the Hard-Label system).
pub fn ablation_matrix(ctx: &PipelineContext, seeds: &[u64]) -> Result<Vec<AblationRow>> {
    let variants: [(&str, AmbiguousHandling); 4] = [
        ("STAD", AmbiguousHandling::Partial),
        ("STAD w/o partial labeling", AmbiguousHandling::ArgmaxNegative),
        ("STAD w/o set-negative training", AmbiguousHandling::PartialPositive),
        ("STAD w/o both", AmbiguousHandling::Hard),
    ];
    let mut per_variant: Vec<Vec<MetricReport>> = vec![Vec::new(); variants.len()];
    for &seed in seeds {
        let artifacts = ctx.build_artifacts(seed, true)?;
        for (slot, (_, handling)) in per_variant.iter_mut().zip(variants) {
            let report =
                ctx.run_student_variant(&artifacts, true, handling, EvalSplit::Test)?;
            slot.push(report);
        }
    }
    let (full_mean, _) = aggregate_seeds(&per_variant[0])?;
    variants
        .iter()
        .zip(per_variant)
        .map(|((name, _), reports)| {
            let (mean, std) = aggregate_seeds(&reports)?;
            Ok(AblationRow {
                variant: name.to_string(),
                mean_micro_f1: mean,
                std_micro_f1: std,
                delta_vs_full: mean - full_mean,
            })
        })
        .collect()
}
