//! Feature encoder: marked sentence → fixed-width vector.
//!
//! Stands in for a contextual encoder behind the same boundary
//! (`MarkedSentence` in, fixed-length vector out), so a learned encoder can
//! be substituted without touching training code. Each entity gets its own
//! block of `dim_per_entity` signed-hashed n-gram counts, built from three
//! sources: tokens within `window` positions of the entity's opening
//! marker, the entity tokens themselves, and the token sequence lying
//! between the two entities (relation cues such as "hailed from" live
//! there, so both blocks see it). Nonzero blocks are L2-normalized, then
//! concatenated head-block first.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::corpus::{MarkedSentence, RelationInstance, insert_entity_markers, E1_CLOSE, E2_CLOSE};
use crate::error::{CoreError, Result};
use crate::util::fnv1a;

pub type FeatureVector = Array1<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Width of each entity block; the full vector is twice this.
    pub dim_per_entity: usize,
    pub ngram_orders: Vec<usize>,
    /// Tokens at distance ≤ window from an opening marker count as context.
    pub window: usize,
    pub hash_seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            dim_per_entity: 512,
            ngram_orders: vec![1, 2],
            window: 3,
            hash_seed: 101,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim_per_entity == 0 {
            return Err(CoreError::Config("dim_per_entity must be at least 1".into()));
        }
        if self.ngram_orders.is_empty() {
            return Err(CoreError::Config("ngram_orders must be non-empty".into()));
        }
        if self.ngram_orders.iter().any(|&n| n == 0) {
            return Err(CoreError::Config("n-gram order 0 is meaningless".into()));
        }
        let mut sorted = self.ngram_orders.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.ngram_orders.len() {
            return Err(CoreError::Config("ngram_orders must be distinct".into()));
        }
        Ok(())
    }

    /// Full output dimension D.
    pub fn dim(&self) -> usize {
        2 * self.dim_per_entity
    }
}

fn hash_gram(seed: u64, namespace: &str, gram: &[String]) -> u64 {
    // Framed byte stream; 0xFE/0xFF never occur inside UTF-8 tokens, so
    // distinct gram boundaries cannot collide by concatenation.
    let mut bytes =
        Vec::with_capacity(9 + namespace.len() + gram.iter().map(|t| t.len() + 1).sum::<usize>());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(namespace.as_bytes());
    bytes.push(0xFE);
    for token in gram {
        bytes.extend_from_slice(token.as_bytes());
        bytes.push(0xFF);
    }
    fnv1a(&bytes)
}

fn add_ngrams(block: &mut [f64], tokens: &[String], orders: &[usize], namespace: &str, seed: u64) {
    for &n in orders {
        for gram in tokens.windows(n) {
            let h = hash_gram(seed, namespace, gram);
            let idx = ((h >> 1) % block.len() as u64) as usize;
            block[idx] += if h & 1 == 0 { 1.0 } else { -1.0 };
        }
    }
}

fn l2_normalize(block: &mut [f64]) {
    let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in block {
            *v /= norm;
        }
    }
}

/// Deterministic encoding of a marked sentence. The config must be valid
/// (see [`FeatureConfig::validate`]); entry points that accept external
/// configuration validate before reaching here.
pub fn featurize(sentence: &MarkedSentence, config: &FeatureConfig) -> FeatureVector {
    config.validate().expect("feature config must be validated before use");

    let toks = &sentence.tokens;
    let e1_open = sentence.e1_start_pos;
    let e2_open = sentence.e2_start_pos;
    let e1_close = sentence.find(E1_CLOSE);
    let e2_close = sentence.find(E2_CLOSE);

    let window_of = |open: usize| {
        let lo = open.saturating_sub(config.window);
        let hi = (open + config.window + 1).min(toks.len());
        &toks[lo..hi]
    };
    let between = {
        let (close_first, open_second) = if e1_open < e2_open {
            (e1_close, e2_open)
        } else {
            (e2_close, e1_open)
        };
        &toks[close_first + 1..open_second]
    };

    let mut head = vec![0.0; config.dim_per_entity];
    let mut tail = vec![0.0; config.dim_per_entity];
    for (block, open, close, tag) in [
        (&mut head, e1_open, e1_close, "e1"),
        (&mut tail, e2_open, e2_close, "e2"),
    ] {
        let orders = &config.ngram_orders;
        let seed = config.hash_seed;
        add_ngrams(block, window_of(open), orders, &format!("{tag}:window"), seed);
        add_ngrams(block, &toks[open + 1..close], orders, &format!("{tag}:entity"), seed);
        add_ngrams(block, between, orders, &format!("{tag}:between"), seed);
    }
    l2_normalize(&mut head);
    l2_normalize(&mut tail);

    let mut values = head;
    values.extend(tail);
    Array1::from(values)
}

/// Marker insertion plus encoding in one step.
pub fn featurize_instance(instance: &RelationInstance, config: &FeatureConfig) -> FeatureVector {
    featurize(&insert_entity_markers(instance), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;
    use approx::assert_abs_diff_eq;

    fn inst(tokens: &[&str], head: (usize, usize), tail: (usize, usize)) -> RelationInstance {
        RelationInstance::new(
            "t",
            tokens.iter().map(|t| t.to_string()).collect(),
            Span::new(head.0, head.1).unwrap(),
            Span::new(tail.0, tail.1).unwrap(),
            None,
        )
        .unwrap()
    }

    fn block_norms(v: &FeatureVector, cfg: &FeatureConfig) -> (f64, f64) {
        let d = cfg.dim_per_entity;
        let n = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = v.as_slice().unwrap();
        (n(&s[..d]), n(&s[d..]))
    }

    #[test]
    fn deterministic() {
        let cfg = FeatureConfig::default();
        let i = inst(&["he", "hailed", "from", "Rome"], (0, 1), (3, 4));
        assert_eq!(featurize_instance(&i, &cfg), featurize_instance(&i, &cfg));
    }

    #[test]
    fn minimal_sentence_blocks_are_unit_norm() {
        let cfg = FeatureConfig {
            window: 0,
            ..FeatureConfig::default()
        };
        let i = inst(&["a", "b"], (0, 1), (1, 2));
        let v = featurize_instance(&i, &cfg);
        assert_eq!(v.len(), cfg.dim());
        let (h, t) = block_norms(&v, &cfg);
        assert_abs_diff_eq!(h, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn tokens_beyond_windows_do_not_matter() {
        // Same windows, entities, and inter-entity span; different
        // far-away context and even different sentence lengths.
        let cfg = FeatureConfig {
            window: 1,
            ..FeatureConfig::default()
        };
        let a = inst(
            &["junk1", "junk2", "x", "ALICE", "went", "to", "PARIS", "y", "junk3"],
            (3, 4),
            (6, 7),
        );
        let b = inst(
            &["p", "q", "r", "s", "x", "ALICE", "went", "to", "PARIS", "y"],
            (5, 6),
            (8, 9),
        );
        assert_eq!(featurize_instance(&a, &cfg), featurize_instance(&b, &cfg));
    }

    #[test]
    fn output_length_fixed_regardless_of_sentence() {
        let cfg = FeatureConfig {
            dim_per_entity: 64,
            ..FeatureConfig::default()
        };
        let short = inst(&["a", "b"], (0, 1), (1, 2));
        let long_tokens: Vec<String> = (0..200).map(|i| format!("w{i}")).collect();
        let long = RelationInstance::new(
            "long",
            long_tokens,
            Span::new(10, 12).unwrap(),
            Span::new(150, 151).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(featurize_instance(&short, &cfg).len(), 128);
        assert_eq!(featurize_instance(&long, &cfg).len(), 128);
    }

    #[test]
    fn context_near_one_entity_only_touches_its_block() {
        let cfg = FeatureConfig {
            window: 1,
            ..FeatureConfig::default()
        };
        // The differing token sits just before [E1], outside the tail
        // window and outside the inter-entity span.
        let a = inst(&["born", "ALICE", "went", "to", "PARIS"], (1, 2), (4, 5));
        let b = inst(&["left", "ALICE", "went", "to", "PARIS"], (1, 2), (4, 5));
        let va = featurize_instance(&a, &cfg);
        let vb = featurize_instance(&b, &cfg);
        let d = cfg.dim_per_entity;
        assert_ne!(va.slice(ndarray::s![..d]), vb.slice(ndarray::s![..d]));
        assert_eq!(va.slice(ndarray::s![d..]), vb.slice(ndarray::s![d..]));
    }

    #[test]
    fn hash_seed_changes_vector() {
        let a = FeatureConfig::default();
        let b = FeatureConfig {
            hash_seed: a.hash_seed + 1,
            ..a.clone()
        };
        let i = inst(&["he", "hailed", "from", "Rome"], (0, 1), (3, 4));
        assert_ne!(featurize_instance(&i, &a), featurize_instance(&i, &b));
    }

    #[test]
    fn config_validation() {
        assert!(FeatureConfig::default().validate().is_ok());
        let bad_dim = FeatureConfig {
            dim_per_entity: 0,
            ..FeatureConfig::default()
        };
        assert!(bad_dim.validate().is_err());
        let no_orders = FeatureConfig {
            ngram_orders: vec![],
            ..FeatureConfig::default()
        };
        assert!(no_orders.validate().is_err());
        let dup_orders = FeatureConfig {
            ngram_orders: vec![1, 1],
            ..FeatureConfig::default()
        };
        assert!(dup_orders.validate().is_err());
        let zero_order = FeatureConfig {
            ngram_orders: vec![0, 1],
            ..FeatureConfig::default()
        };
        assert!(zero_order.validate().is_err());
    }
}
