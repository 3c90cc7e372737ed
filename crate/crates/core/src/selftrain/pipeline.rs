//! The teacher→student pipeline and the five comparison systems.
//!
//! Every system shares the same skeleton: train a teacher on the human
//! split, auto-annotate the unlabeled pool, partition it, and train a
//! student on the human data plus whatever the system salvages from the
//! partition. Supervised stops after the teacher (its student set would
//! be exactly the human set); Self-Training adds confident instances;
//! Hard-Label and Soft-Label add ambiguous instances with forced one-hot
//! or teacher-distribution tags; STAD adds them as partial labels trained
//! with set-negative sampling under the unified loss.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::corpus::{RelationInstance, RelationSchema, SplitBundle};
use crate::encoder::{featurize_instance, FeatureConfig, FeatureVector};
use crate::error::{CoreError, Result};
use crate::eval::{
    aggregate_seeds, ExperimentResult, MetricReport, PartitionSummary, PredictionRecord,
    SeedReport,
};
use crate::model::{train, DevSet, LinearModel, TrainConfig, TrainOutcome};
use crate::selftrain::partition::{annotate, partition, Partition, PartitionConfig};
use crate::selftrain::tagging::{
    sample_negative_label, tag, tag_ambiguous_argmax_negative, tag_ambiguous_positive_average,
    tag_human, PartitionMember, TagMode, TaggedInstance,
};
use crate::util::derive_seed;

/// The five comparison systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Supervised,
    SelfTraining,
    HardLabel,
    SoftLabel,
    Stad,
}

pub const ALL_SYSTEMS: [System; 5] = [
    System::Supervised,
    System::SelfTraining,
    System::HardLabel,
    System::SoftLabel,
    System::Stad,
];

impl System {
    /// Stable lowercase name for flags, config files, and directories.
    pub fn slug(self) -> &'static str {
        match self {
            System::Supervised => "supervised",
            System::SelfTraining => "self-training",
            System::HardLabel => "hard-label",
            System::SoftLabel => "soft-label",
            System::Stad => "stad",
        }
    }

    fn ambiguous_handling(self) -> AmbiguousHandling {
        match self {
            System::Supervised | System::SelfTraining => AmbiguousHandling::Discard,
            System::HardLabel => AmbiguousHandling::Hard,
            System::SoftLabel => AmbiguousHandling::Soft,
            System::Stad => AmbiguousHandling::Partial,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            System::Supervised => "Supervised",
            System::SelfTraining => "Self-Training",
            System::HardLabel => "Hard-Label",
            System::SoftLabel => "Soft-Label",
            System::Stad => "STAD",
        };
        f.write_str(name)
    }
}

impl FromStr for System {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_SYSTEMS
            .into_iter()
            .find(|sys| sys.slug() == s)
            .ok_or_else(|| {
                CoreError::Config(format!(
                    "unknown system {s:?}; valid systems: supervised, self-training, \
                     hard-label, soft-label, stad"
                ))
            })
    }
}

/// How a student consumes the ambiguous set. The last two variants are
/// the ablation recipes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmbiguousHandling {
    Discard,
    Hard,
    Soft,
    Partial,
    /// Partial tags trained positively (uniform mass over candidates).
    PartialPositive,
    /// Candidates collapsed to the argmax; set-negative training kept.
    ArgmaxNegative,
}

/// Which split a report is computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalSplit {
    Dev,
    Test,
}

/// Per-seed intermediates shared by every system evaluated at that seed.
pub struct SeedArtifacts {
    pub seed: u64,
    pub teacher: TrainOutcome,
    /// Absent when only the Supervised system was requested.
    pub partition: Option<Partition>,
}

/// Validated, featurized experiment state shared across seeds and systems.
pub struct PipelineContext<'a> {
    schema: &'a RelationSchema,
    bundle: &'a SplitBundle,
    features: &'a FeatureConfig,
    train_cfg: &'a TrainConfig,
    partition_cfg: &'a PartitionConfig,
    human: Vec<TaggedInstance>,
    dev: DevSet,
    test: Vec<(FeatureVector, usize)>,
}

fn featurized_labeled(
    split: &[RelationInstance],
    split_name: &str,
    schema: &RelationSchema,
    features: &FeatureConfig,
) -> Result<Vec<(FeatureVector, usize)>> {
    split
        .iter()
        .map(|inst| {
            let gold = inst.gold_relation.ok_or_else(|| {
                CoreError::Invalid(format!(
                    "{split_name} instance {:?} has no gold relation",
                    inst.id
                ))
            })?;
            if gold >= schema.len() {
                return Err(CoreError::Invalid(format!(
                    "{split_name} instance {:?} has relation index {gold} out of range",
                    inst.id
                )));
            }
            Ok((featurize_instance(inst, features), gold))
        })
        .collect()
}

impl<'a> PipelineContext<'a> {
    pub fn new(
        schema: &'a RelationSchema,
        bundle: &'a SplitBundle,
        features: &'a FeatureConfig,
        train_cfg: &'a TrainConfig,
        partition_cfg: &'a PartitionConfig,
    ) -> Result<Self> {
        features.validate()?;
        train_cfg.validate()?;
        partition_cfg.validate(schema.len())?;
        let m = schema.len();
        let human = featurized_labeled(&bundle.train, "train", schema, features)?
            .into_iter()
            .map(|(h, gold)| tag_human(h, gold, m))
            .collect();
        let dev = DevSet {
            examples: featurized_labeled(&bundle.dev, "dev", schema, features)?,
            excluded: schema.negative_index(),
        };
        let test = featurized_labeled(&bundle.test, "test", schema, features)?;
        Ok(PipelineContext {
            schema,
            bundle,
            features,
            train_cfg,
            partition_cfg,
            human,
            dev,
            test,
        })
    }

    pub fn schema(&self) -> &RelationSchema {
        self.schema
    }

    /// Teacher: positive training on the human split alone.
    pub fn train_teacher(&self, master_seed: u64) -> Result<TrainOutcome> {
        let cfg = self.train_cfg.with_seed(derive_seed(master_seed, "teacher"));
        train(
            &LinearModel::zeros(self.schema.len(), self.features.dim()),
            &self.human,
            &self.dev,
            &cfg,
            &mut |i, r| sample_negative_label(i, r),
        )
    }

    /// Teacher training plus (optionally) annotation and partitioning of
    /// the unlabeled pool.
    pub fn build_artifacts(&self, seed: u64, with_partition: bool) -> Result<SeedArtifacts> {
        let teacher = self.train_teacher(seed)?;
        let partition = if with_partition {
            let auto = annotate(&teacher.model, &self.bundle.unlabeled, self.features)?;
            Some(partition(&auto, self.partition_cfg, self.schema.len())?)
        } else {
            None
        };
        Ok(SeedArtifacts {
            seed,
            teacher,
            partition,
        })
    }

    /// Student training set: human data, plus confident instances with
    /// hard tags, plus the ambiguous set under the given handling.
    pub fn student_data(
        &self,
        use_confident: bool,
        handling: AmbiguousHandling,
        part: &Partition,
    ) -> Result<Vec<TaggedInstance>> {
        let mut data = self.human.clone();
        if use_confident {
            for c in &part.confident {
                let h = featurize_instance(&c.instance, self.features);
                data.push(tag(h, PartitionMember::Confident(c), TagMode::Hard)?);
            }
        }
        for a in &part.ambiguous {
            let h = featurize_instance(&a.instance, self.features);
            let tagged = match handling {
                AmbiguousHandling::Discard => continue,
                AmbiguousHandling::Hard => tag(h, PartitionMember::Ambiguous(a), TagMode::Hard)?,
                AmbiguousHandling::Soft => tag(h, PartitionMember::Ambiguous(a), TagMode::Soft)?,
                AmbiguousHandling::Partial => {
                    tag(h, PartitionMember::Ambiguous(a), TagMode::Partial)?
                }
                AmbiguousHandling::PartialPositive => tag_ambiguous_positive_average(h, a),
                AmbiguousHandling::ArgmaxNegative => tag_ambiguous_argmax_negative(h, a),
            };
            data.push(tagged);
        }
        Ok(data)
    }

    pub fn evaluate(&self, model: &LinearModel, split: EvalSplit) -> Result<MetricReport> {
        let examples = match split {
            EvalSplit::Dev => &self.dev.examples,
            EvalSplit::Test => &self.test,
        };
        let records = examples
            .iter()
            .map(|(h, gold)| {
                Ok(PredictionRecord {
                    gold: *gold,
                    p: model.predict_proba(h)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MetricReport::compute(&records, self.schema)
    }

    /// Trains one student on top of prebuilt artifacts and returns its
    /// model.
    pub fn train_student(
        &self,
        artifacts: &SeedArtifacts,
        use_confident: bool,
        handling: AmbiguousHandling,
    ) -> Result<LinearModel> {
        let part = artifacts.partition.as_ref().ok_or_else(|| {
            CoreError::Invalid("student training requires a partition in the artifacts".into())
        })?;
        let data = self.student_data(use_confident, handling, part)?;
        let cfg = self
            .train_cfg
            .with_seed(derive_seed(artifacts.seed, "student"));
        let outcome = train(
            &LinearModel::zeros(self.schema.len(), self.features.dim()),
            &data,
            &self.dev,
            &cfg,
            &mut |i, r| sample_negative_label(i, r),
        )?;
        Ok(outcome.model)
    }

    /// Trains and evaluates one student on top of prebuilt artifacts.
    pub fn run_student_variant(
        &self,
        artifacts: &SeedArtifacts,
        use_confident: bool,
        handling: AmbiguousHandling,
        split: EvalSplit,
    ) -> Result<MetricReport> {
        let model = self.train_student(artifacts, use_confident, handling)?;
        self.evaluate(&model, split)
    }

    /// One system at one seed. Supervised evaluates the teacher itself:
    /// its student set would be exactly the human set the teacher was
    /// trained on.
    pub fn run_system_seed(
        &self,
        system: System,
        artifacts: &SeedArtifacts,
        split: EvalSplit,
    ) -> Result<MetricReport> {
        if system == System::Supervised {
            return self.evaluate(&artifacts.teacher.model, split);
        }
        self.run_student_variant(artifacts, true, system.ambiguous_handling(), split)
    }

    /// Runs several systems over the same seeds, building the teacher and
    /// partition once per seed.
    pub fn run_systems(
        &self,
        systems: &[System],
        seeds: &[u64],
        split: EvalSplit,
    ) -> Result<SystemsRun> {
        if systems.is_empty() {
            return Err(CoreError::Empty("systems"));
        }
        if seeds.is_empty() {
            return Err(CoreError::Empty("seeds"));
        }
        let needs_partition = systems.iter().any(|&s| s != System::Supervised);
        let mut per_system: Vec<Vec<SeedReport>> = vec![Vec::new(); systems.len()];
        let mut partitions = Vec::new();
        let mut summaries = Vec::new();
        for &seed in seeds {
            let artifacts = self.build_artifacts(seed, needs_partition)?;
            for (slot, &system) in per_system.iter_mut().zip(systems) {
                let report = self.run_system_seed(system, &artifacts, split)?;
                slot.push(SeedReport { seed, report });
            }
            if let Some(part) = artifacts.partition {
                summaries.push(PartitionSummary::from_partition(seed, &part, self.schema));
                partitions.push((seed, part));
            }
        }
        let results = systems
            .iter()
            .zip(per_system)
            .map(|(&system, per_seed)| {
                self.assemble_result(system, seeds, per_seed, &summaries)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SystemsRun {
            results,
            partitions,
        })
    }

    /// Single-system convenience over [`run_systems`].
    pub fn run_experiment(
        &self,
        system: System,
        seeds: &[u64],
        split: EvalSplit,
    ) -> Result<ExperimentResult> {
        let mut run = self.run_systems(&[system], seeds, split)?;
        Ok(run.results.pop().expect("one system in, one result out"))
    }

    fn assemble_result(
        &self,
        system: System,
        seeds: &[u64],
        per_seed: Vec<SeedReport>,
        summaries: &[PartitionSummary],
    ) -> Result<ExperimentResult> {
        let reports: Vec<MetricReport> = per_seed.iter().map(|s| s.report.clone()).collect();
        let (mean_micro_f1, std_micro_f1) = aggregate_seeds(&reports)?;
        let mean_macro_f1 =
            reports.iter().map(|r| r.macro_f1).sum::<f64>() / reports.len() as f64;
        let partitions = if system == System::Supervised {
            Vec::new()
        } else {
            summaries.to_vec()
        };
        Ok(ExperimentResult {
            system: system.to_string(),
            seeds: seeds.to_vec(),
            mean_micro_f1,
            std_micro_f1,
            mean_macro_f1,
            per_seed,
            partitions,
        })
    }
}

/// Results of [`PipelineContext::run_systems`]: one [`ExperimentResult`]
/// per requested system, plus the per-seed partitions for dumping.
pub struct SystemsRun {
    pub results: Vec<ExperimentResult>,
    pub partitions: Vec<(u64, Partition)>,
}

/// Loads the schema and prepared splits named by the config (paths
/// resolved against `base`), then runs one system over the config's seeds
/// and evaluates on the test split.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    base: &Path,
    system: System,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let paths = cfg.paths.resolve(base);
    let schema = RelationSchema::from_path(&paths.schema)?;
    let bundle = SplitBundle::load_from_dir(&paths.splits, &schema)?;
    let ctx = PipelineContext::new(
        &schema,
        &bundle,
        &cfg.features,
        &cfg.train,
        &cfg.partition,
    )?;
    ctx.run_experiment(system, &cfg.experiment.seeds, EvalSplit::Test)
}
