//! Synthetic relation corpus with controllable ambiguity.
//!
//! Relations come in confusable pairs followed by standalone relations.
//! Each instance is `head-entity connector… tail-entity`. Head entities
//! come from one small global pool and carry no relation signal. Tail
//! entities are relation-specific (a pool per relation, like city names
//! for a born-in relation) but each name occurs only a couple of times
//! in a small human-labeled sample, so tail evidence starts out weak.
//!
//! The connector slot decides how hard an instance is. Most instances
//! use a frequent core cue that a small sample pins down well. Paired
//! relations often draw instead from a template pool shared with their
//! partner, which says nothing about which member produced it — there
//! only the tail distinguishes them. A small slice uses a rare cue
//! variant, mostly unseen in a small sample; rare cues do co-occur with
//! core cues on a fraction of easy instances, so confidently
//! self-labeled data can teach them even when human data never saw
//! them. Another small slice (the noise rate) replaces the cue with an
//! uninformative generic connector.
//!
//! Trap tokens give negative evidence a surface to act on: each
//! relation has one trap that accompanies its own instances often and
//! other relations' instances occasionally. A model trained only on
//! positive labels learns the trap as a strong cue and is misled when
//! it shows up without its relation; training that pushes non-candidate
//! relations away on ambiguous instances sees the trap on other
//! relations' confident-cue instances and learns to discount it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{RelationInstance, RelationSchema, Span};
use crate::error::{CoreError, Result};
use crate::util::derive_seed;

/// Each relation has one frequent core cue; a k_train of 20 sees it
/// often enough that core instances classify confidently.
const CORE_VARIANTS: usize = 1;
/// Rare cue variants per relation; most stay unseen in a small sample.
const RARE_VARIANTS: usize = 10;
/// Fraction of instances whose only cue is a rare variant.
const RARE_ALONE_RATE: f64 = 0.20;
/// Fraction of instances in the shared-template slot: paired relations
/// draw a template common to the pair, standalone relations draw junk,
/// keeping band sizes equal across relations.
const SHARED_TEMPLATE_RATE: f64 = 0.25;
/// Global head entity pool, shared by all relations. Small enough that
/// every head is seen by every relation, so heads stay uninformative.
const HEAD_POOL: usize = 8;
/// Tail entity pool per relation; at k_train = 20 roughly half the
/// names stay unseen, so tail coverage is where self-labeled data can
/// add real evidence.
const TAILS_PER_RELATION: usize = 28;
/// Probability that an instance carries its domain token. Confusability
/// groups alternate between two broad domains; the token narrows weak
/// instances to plausible same-domain candidates without deciding among
/// them.
const DOMAIN_RATE: f64 = 0.75;
/// Probability that an instance carries its own relation's trap token.
const TRAP_OWN_RATE: f64 = 0.12;
/// Probability that an instance carries some other relation's trap.
const TRAP_FOREIGN_RATE: f64 = 0.05;
const GENERIC_VOCAB: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub relations: usize,
    pub templates_per_relation: usize,
    /// Leading relation pairs (0,1), (2,3), … that share templates and
    /// entity pools.
    pub confusable_pairs: usize,
    pub instances_per_relation: usize,
    /// Fraction of instances perturbed by connector noise.
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            relations: 10,
            templates_per_relation: 3,
            confusable_pairs: 3,
            instances_per_relation: 300,
            noise_rate: 0.12,
            seed: 13,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.relations < 2 {
            return Err(CoreError::Config("need at least 2 relations".into()));
        }
        if 2 * self.confusable_pairs > self.relations {
            return Err(CoreError::Config(format!(
                "{} confusable pairs need {} relations, only {} configured",
                self.confusable_pairs,
                2 * self.confusable_pairs,
                self.relations
            )));
        }
        if self.templates_per_relation == 0 {
            return Err(CoreError::Config("templates_per_relation must be at least 1".into()));
        }
        if self.instances_per_relation == 0 {
            return Err(CoreError::Config("instances_per_relation must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(CoreError::Config(format!(
                "noise_rate must lie in [0, 1), got {}",
                self.noise_rate
            )));
        }
        Ok(())
    }

    pub fn schema(&self) -> RelationSchema {
        let names = (0..self.relations).map(|r| format!("rel-{r:02}")).collect();
        RelationSchema::new(names, None).expect("at least 2 distinct names")
    }

    /// Confusability group: paired relations share one, standalone
    /// relations get their own.
    fn group(&self, relation: usize) -> usize {
        if relation < 2 * self.confusable_pairs {
            relation / 2
        } else {
            self.confusable_pairs + (relation - 2 * self.confusable_pairs)
        }
    }
}

/// Generates the schema and the full labeled corpus, deterministically in
/// the parameters.
pub fn generate(params: &SynthParams) -> Result<(RelationSchema, Vec<RelationInstance>)> {
    params.validate()?;
    let schema = params.schema();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, "synth"));
    let mut data = Vec::with_capacity(params.relations * params.instances_per_relation);

    for relation in 0..params.relations {
        let group = params.group(relation);
        let paired = relation < 2 * params.confusable_pairs;
        for i in 0..params.instances_per_relation {
            let mut tokens: Vec<String> = Vec::new();
            let head_pos = tokens.len();
            tokens.push(format!("eh{}", rng.gen_range(0..HEAD_POOL)));

            if rng.gen_bool(DOMAIN_RATE) {
                tokens.push(format!("dom{}", group % 2));
            }

            // Cue slot: rare-alone, generic (noise), shared template
            // (paired relations), or core cue.
            let slot = rng.gen::<f64>();
            if slot < RARE_ALONE_RATE {
                tokens.push(format!("cue{relation}-r{}", rng.gen_range(0..RARE_VARIANTS)));
            } else if slot < RARE_ALONE_RATE + params.noise_rate {
                tokens.push(format!("g{}", rng.gen_range(0..GENERIC_VOCAB)));
            } else if slot < RARE_ALONE_RATE + params.noise_rate + SHARED_TEMPLATE_RATE {
                if paired {
                    tokens.push(format!(
                        "link{group}-{}",
                        rng.gen_range(0..params.templates_per_relation)
                    ));
                } else {
                    tokens.push(format!("g{}", rng.gen_range(0..GENERIC_VOCAB)));
                }
            } else {
                tokens.push(format!("cue{relation}-c{}", rng.gen_range(0..CORE_VARIANTS)));
            }

            if rng.gen_bool(TRAP_OWN_RATE) {
                tokens.push(format!("trap{relation}"));
            }
            if rng.gen_bool(TRAP_FOREIGN_RATE) {
                let d = (relation + rng.gen_range(1..params.relations)) % params.relations;
                tokens.push(format!("trap{d}"));
            }

            let tail_pos = tokens.len();
            tokens.push(format!("et{relation}-{}", rng.gen_range(0..TAILS_PER_RELATION)));

            data.push(RelationInstance::new(
                format!("synth-{relation:02}-{i:04}"),
                tokens,
                Span::new(head_pos, head_pos + 1)?,
                Span::new(tail_pos, tail_pos + 1)?,
                Some(relation),
            )?);
        }
    }
    Ok((schema, data))
}
