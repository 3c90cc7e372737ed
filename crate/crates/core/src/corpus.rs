//! Relation datasets: schema, instances, entity markers, and low-resource splits.
//!
//! Dataset files are UTF-8 JSON lines, one record per line:
//!
//! ```text
//! {"id":"s1","tokens":["he","hailed","from","Rome"],"head":[0,1],"tail":[3,4],"relation":"entity-origin"}
//! ```
//!
//! `head` and `tail` are half-open token index ranges. The schema file lists
//! relation names in index order plus an optional designated negative class:
//!
//! ```text
//! {"relations":["entity-origin","cause-effect","other"],"negative_relation":"other"}
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::util::derive_seed;

pub const E1_OPEN: &str = "[E1]";
pub const E1_CLOSE: &str = "[/E1]";
pub const E2_OPEN: &str = "[E2]";
pub const E2_CLOSE: &str = "[/E2]";

/// Half-open token index range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(CoreError::Invalid(format!(
                "span [{start}, {end}) is empty"
            )));
        }
        Ok(Span { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees start < end
    }

    fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl TryFrom<[usize; 2]> for Span {
    type Error = CoreError;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        Span::new(v[0], v[1])
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    relations: Vec<String>,
    #[serde(default)]
    negative_relation: Option<String>,
}

/// The label space: relation names in index order, with an optional
/// designated negative ("no relation") class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct RelationSchema {
    relations: Vec<String>,
    negative_relation: Option<String>,
}

impl RelationSchema {
    pub fn new(relations: Vec<String>, negative_relation: Option<String>) -> Result<Self> {
        if relations.len() < 2 {
            return Err(CoreError::Schema(format!(
                "need at least 2 relations, got {}",
                relations.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &relations {
            if name.is_empty() {
                return Err(CoreError::Schema("empty relation name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(CoreError::Schema(format!("duplicate relation {name:?}")));
            }
        }
        if let Some(neg) = &negative_relation {
            if !relations.iter().any(|r| r == neg) {
                return Err(CoreError::Schema(format!(
                    "negative relation {neg:?} is not in the relation list"
                )));
            }
        }
        Ok(RelationSchema {
            relations,
            negative_relation,
        })
    }

    /// Number of relations M.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees M >= 2
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn name(&self, index: usize) -> &str {
        &self.relations[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == name)
    }

    pub fn negative_relation(&self) -> Option<&str> {
        self.negative_relation.as_deref()
    }

    pub fn negative_index(&self) -> Option<usize> {
        self.negative_relation
            .as_deref()
            .and_then(|n| self.index_of(n))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CoreError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn to_path(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| CoreError::Invalid(e.to_string()))?;
        writeln!(w).map_err(|e| CoreError::io(path, e))?;
        Ok(())
    }
}

impl TryFrom<RawSchema> for RelationSchema {
    type Error = CoreError;

    fn try_from(raw: RawSchema) -> Result<Self> {
        RelationSchema::new(raw.relations, raw.negative_relation)
    }
}

impl From<RelationSchema> for RawSchema {
    fn from(s: RelationSchema) -> Self {
        RawSchema {
            relations: s.relations,
            negative_relation: s.negative_relation,
        }
    }
}

/// One sentence with two entity spans and an optional gold relation index.
///
/// The gold label is kept on unlabeled-split instances for diagnostic
/// scoring; training code never reads it there.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationInstance {
    pub id: String,
    pub tokens: Vec<String>,
    pub head_span: Span,
    pub tail_span: Span,
    pub gold_relation: Option<usize>,
}

impl RelationInstance {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        head_span: Span,
        tail_span: Span,
        gold_relation: Option<usize>,
    ) -> Result<Self> {
        let id = id.into();
        if head_span.end > tokens.len() || tail_span.end > tokens.len() {
            return Err(CoreError::InvalidSpan {
                id,
                msg: format!(
                    "span exceeds sentence length {} (head [{}, {}), tail [{}, {}))",
                    tokens.len(),
                    head_span.start,
                    head_span.end,
                    tail_span.start,
                    tail_span.end
                ),
            });
        }
        if head_span.overlaps(&tail_span) {
            return Err(CoreError::InvalidSpan {
                id,
                msg: "head and tail spans overlap".into(),
            });
        }
        Ok(RelationInstance {
            id,
            tokens,
            head_span,
            tail_span,
            gold_relation,
        })
    }
}

/// Token sequence with the four entity markers inserted.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSentence {
    pub tokens: Vec<String>,
    /// Index of `[E1]`.
    pub e1_start_pos: usize,
    /// Index of `[E2]`.
    pub e2_start_pos: usize,
}

impl MarkedSentence {
    /// Removes the four marker tokens, recovering the original sentence.
    pub fn strip_markers(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| {
                let t = t.as_str();
                t != E1_OPEN && t != E1_CLOSE && t != E2_OPEN && t != E2_CLOSE
            })
            .cloned()
            .collect()
    }

    pub(crate) fn find(&self, marker: &str) -> usize {
        self.tokens
            .iter()
            .position(|t| t == marker)
            .expect("marker present by construction")
    }
}

/// Wraps the head span in `[E1]..[/E1]` and the tail span in `[E2]..[/E2]`,
/// preserving the original token order.
pub fn insert_entity_markers(instance: &RelationInstance) -> MarkedSentence {
    // Spans never overlap, so one strictly precedes the other.
    let head_first = instance.head_span.start < instance.tail_span.start;
    let (first, first_open, first_close, second, second_open, second_close) = if head_first {
        (instance.head_span, E1_OPEN, E1_CLOSE, instance.tail_span, E2_OPEN, E2_CLOSE)
    } else {
        (instance.tail_span, E2_OPEN, E2_CLOSE, instance.head_span, E1_OPEN, E1_CLOSE)
    };

    let toks = &instance.tokens;
    let mut out = Vec::with_capacity(toks.len() + 4);
    out.extend(toks[..first.start].iter().cloned());
    out.push(first_open.to_string());
    out.extend(toks[first.start..first.end].iter().cloned());
    out.push(first_close.to_string());
    out.extend(toks[first.end..second.start].iter().cloned());
    out.push(second_open.to_string());
    out.extend(toks[second.start..second.end].iter().cloned());
    out.push(second_close.to_string());
    out.extend(toks[second.end..].iter().cloned());

    let first_open_pos = first.start;
    let second_open_pos = second.start + 2;
    let (e1_start_pos, e2_start_pos) = if head_first {
        (first_open_pos, second_open_pos)
    } else {
        (second_open_pos, first_open_pos)
    };

    MarkedSentence {
        tokens: out,
        e1_start_pos,
        e2_start_pos,
    }
}

#[derive(Serialize, Deserialize)]
struct FileRecord {
    id: String,
    tokens: Vec<String>,
    head: [usize; 2],
    tail: [usize; 2],
    relation: String,
    #[serde(default, flatten, skip_serializing)]
    extra: HashMap<String, serde_json::Value>,
}

/// Loads a JSONL dataset, mapping relation names to schema indices.
///
/// Unknown fields are reported with a warning and otherwise ignored.
pub fn load_dataset(path: &Path, schema: &RelationSchema) -> Result<Vec<RelationInstance>> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    load_dataset_from_reader(BufReader::new(file), path, schema)
}

pub fn load_dataset_from_reader<R: BufRead>(
    reader: R,
    path: &Path,
    schema: &RelationSchema,
) -> Result<Vec<RelationInstance>> {
    let index: HashMap<&str, usize> = schema
        .relations()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    let mut instances = Vec::new();
    let mut warned_fields: HashSet<String> = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| CoreError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FileRecord = serde_json::from_str(&line).map_err(|e| CoreError::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: e.to_string(),
        })?;
        for field in record.extra.keys() {
            if warned_fields.insert(field.clone()) {
                log::warn!(
                    "{}:{lineno}: ignoring unknown field {field:?}",
                    path.display()
                );
            }
        }
        let gold = *index
            .get(record.relation.as_str())
            .ok_or_else(|| CoreError::UnknownRelation {
                name: record.relation.clone(),
                line: lineno,
            })?;
        let head = Span::try_from(record.head).map_err(|e| CoreError::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("head: {e}"),
        })?;
        let tail = Span::try_from(record.tail).map_err(|e| CoreError::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("tail: {e}"),
        })?;
        instances.push(RelationInstance::new(
            record.id,
            record.tokens,
            head,
            tail,
            Some(gold),
        )?);
    }
    Ok(instances)
}

/// Writes instances as JSONL. Every instance must carry a gold relation.
pub fn write_dataset(
    path: &Path,
    instances: &[RelationInstance],
    schema: &RelationSchema,
) -> Result<()> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for inst in instances {
        let gold = inst.gold_relation.ok_or_else(|| {
            CoreError::Invalid(format!("instance {:?} has no gold relation", inst.id))
        })?;
        let record = FileRecord {
            id: inst.id.clone(),
            tokens: inst.tokens.clone(),
            head: inst.head_span.into(),
            tail: inst.tail_span.into(),
            relation: schema.name(gold).to_string(),
            extra: HashMap::new(),
        };
        serde_json::to_writer(&mut w, &record).map_err(|e| CoreError::Invalid(e.to_string()))?;
        writeln!(w).map_err(|e| CoreError::io(path, e))?;
    }
    Ok(())
}

/// Low-resource split controls: per-relation counts and the sampling seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub k_train: usize,
    pub k_dev: usize,
    pub k_test: usize,
    /// Drop instances of the schema's negative relation before splitting.
    pub exclude_negative: bool,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            k_train: 20,
            k_dev: 40,
            k_test: 60,
            exclude_negative: true,
            seed: 13,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_train == 0 || self.k_dev == 0 {
            return Err(CoreError::Config(
                "k_train and k_dev must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The four splits produced by [`sample_low_resource`], disjoint by id.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitBundle {
    pub train: Vec<RelationInstance>,
    pub dev: Vec<RelationInstance>,
    pub test: Vec<RelationInstance>,
    pub unlabeled: Vec<RelationInstance>,
}

pub const SPLIT_FILES: [&str; 4] = ["train.jsonl", "dev.jsonl", "test.jsonl", "unlabeled.jsonl"];

impl SplitBundle {
    pub fn write_to_dir(&self, dir: &Path, schema: &RelationSchema) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
        for (name, split) in SPLIT_FILES
            .iter()
            .zip([&self.train, &self.dev, &self.test, &self.unlabeled])
        {
            write_dataset(&dir.join(name), split, schema)?;
        }
        Ok(())
    }

    pub fn load_from_dir(dir: &Path, schema: &RelationSchema) -> Result<Self> {
        let mut splits = Vec::with_capacity(4);
        for name in SPLIT_FILES {
            splits.push(load_dataset(&dir.join(name), schema)?);
        }
        let unlabeled = splits.pop().unwrap();
        let test = splits.pop().unwrap();
        let dev = splits.pop().unwrap();
        let train = splits.pop().unwrap();
        Ok(SplitBundle {
            train,
            dev,
            test,
            unlabeled,
        })
    }
}

/// Builds a balanced low-resource split from a fully labeled pool.
///
/// Per relation: `k_train` training instances (sampled instances repeat,
/// cycling in order, when the pool is smaller), then up to `k_dev` dev and
/// `k_test` test instances from the disjoint remainder. Whatever is left
/// becomes the unlabeled pool. Deterministic for a fixed seed.
pub fn sample_low_resource(
    data: &[RelationInstance],
    schema: &RelationSchema,
    cfg: &SamplerConfig,
) -> Result<SplitBundle> {
    cfg.validate()?;
    let negative = schema.negative_index();

    let mut pools: Vec<Vec<&RelationInstance>> = vec![Vec::new(); schema.len()];
    for inst in data {
        let gold = inst
            .gold_relation
            .ok_or_else(|| CoreError::Invalid(format!("instance {:?} is unlabeled", inst.id)))?;
        if gold >= schema.len() {
            return Err(CoreError::Invalid(format!(
                "instance {:?} has relation index {gold} out of range",
                inst.id
            )));
        }
        if cfg.exclude_negative && Some(gold) == negative {
            continue;
        }
        pools[gold].push(inst);
    }

    let mut bundle = SplitBundle {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        unlabeled: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "low-resource-sampler"));
    for (rel, pool) in pools.iter_mut().enumerate() {
        if cfg.exclude_negative && Some(rel) == negative {
            continue;
        }
        if pool.is_empty() {
            return Err(CoreError::EmptyRelation {
                name: schema.name(rel).to_string(),
            });
        }
        pool.shuffle(&mut rng);

        let take_train = pool.len().min(cfg.k_train);
        for i in 0..cfg.k_train {
            // Cycle through the sampled instances when the pool is short.
            bundle.train.push(pool[i % take_train].clone());
        }
        let mut rest = pool[take_train..].iter();
        bundle.dev.extend(rest.by_ref().take(cfg.k_dev).map(|i| (*i).clone()));
        bundle
            .test
            .extend(rest.by_ref().take(cfg.k_test).map(|i| (*i).clone()));
        bundle.unlabeled.extend(rest.map(|i| (*i).clone()));
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(names: &[&str]) -> RelationSchema {
        RelationSchema::new(names.iter().map(|s| s.to_string()).collect(), None).unwrap()
    }

    fn inst(id: &str, tokens: &[&str], head: (usize, usize), tail: (usize, usize), gold: usize) -> RelationInstance {
        RelationInstance::new(
            id,
            tokens.iter().map(|t| t.to_string()).collect(),
            Span::new(head.0, head.1).unwrap(),
            Span::new(tail.0, tail.1).unwrap(),
            Some(gold),
        )
        .unwrap()
    }

    #[test]
    fn markers_basic() {
        let i = inst("a", &["he", "hailed", "from", "Rome"], (0, 1), (3, 4), 0);
        let m = insert_entity_markers(&i);
        assert_eq!(
            m.tokens,
            vec!["[E1]", "he", "[/E1]", "hailed", "from", "[E2]", "Rome", "[/E2]"]
        );
        assert_eq!(m.e1_start_pos, 0);
        assert_eq!(m.e2_start_pos, 5);
    }

    #[test]
    fn markers_adjacent_spans() {
        let i = inst("a", &["w0", "w1"], (0, 1), (1, 2), 0);
        let m = insert_entity_markers(&i);
        assert_eq!(m.tokens, vec!["[E1]", "w0", "[/E1]", "[E2]", "w1", "[/E2]"]);
    }

    #[test]
    fn markers_head_after_tail() {
        let i = inst("a", &["Rome", "made", "him"], (2, 3), (0, 1), 0);
        let m = insert_entity_markers(&i);
        assert_eq!(
            m.tokens,
            vec!["[E2]", "Rome", "[/E2]", "made", "[E1]", "him", "[/E1]"]
        );
        assert_eq!(m.e2_start_pos, 0);
        assert_eq!(m.e1_start_pos, 4);
        assert_eq!(m.tokens[m.e1_start_pos], E1_OPEN);
    }

    #[test]
    fn marker_roundtrip() {
        let i = inst("a", &["x", "y", "z", "w"], (1, 2), (3, 4), 0);
        let m = insert_entity_markers(&i);
        assert_eq!(m.strip_markers(), i.tokens);
    }

    #[test]
    fn overlapping_spans_rejected() {
        let r = RelationInstance::new(
            "bad",
            vec!["a".into(), "b".into()],
            Span::new(0, 2).unwrap(),
            Span::new(1, 2).unwrap(),
            None,
        );
        assert!(matches!(r, Err(CoreError::InvalidSpan { .. })));
    }

    #[test]
    fn load_single_record() {
        let s = schema(&["r1", "r2"]);
        let line = r#"{"id":"x","tokens":["a","b","c"],"head":[0,1],"tail":[2,3],"relation":"r1"}"#;
        let got =
            load_dataset_from_reader(line.as_bytes(), Path::new("mem"), &s).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].gold_relation, Some(0));
        assert_eq!(got[0].tokens, vec!["a", "b", "c"]);
    }

    #[test]
    fn load_empty_file() {
        let s = schema(&["r1", "r2"]);
        let got = load_dataset_from_reader(&b""[..], Path::new("mem"), &s).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn load_unknown_relation() {
        let s = schema(&["r1", "r2"]);
        let line = r#"{"id":"x","tokens":["a"],"head":[0,1],"tail":[0,1],"relation":"bogus"}"#;
        // Overlap would also fail, but the relation is resolved first.
        let err = load_dataset_from_reader(line.as_bytes(), Path::new("mem"), &s).unwrap_err();
        match err {
            CoreError::UnknownRelation { name, line } => {
                assert_eq!(name, "bogus");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_reports_line_numbers() {
        let s = schema(&["r1", "r2"]);
        let text = "{\"id\":\"x\",\"tokens\":[\"a\",\"b\"],\"head\":[0,1],\"tail\":[1,2],\"relation\":\"r1\"}\nnot json\n";
        let err = load_dataset_from_reader(text.as_bytes(), Path::new("mem"), &s).unwrap_err();
        match err {
            CoreError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn pool(schema: &RelationSchema, per_relation: usize) -> Vec<RelationInstance> {
        let mut out = Vec::new();
        for rel in 0..schema.len() {
            for j in 0..per_relation {
                out.push(inst(
                    &format!("{rel}-{j}"),
                    &["a", "b", "c", "d"],
                    (0, 1),
                    (2, 3),
                    rel,
                ));
            }
        }
        out
    }

    #[test]
    fn sample_semeval_shape() {
        let names: Vec<String> = (0..19).map(|i| format!("r{i}")).collect();
        let s = RelationSchema::new(names, None).unwrap();
        let data = pool(&s, 60);
        let cfg = SamplerConfig {
            k_train: 20,
            k_dev: 10,
            k_test: 10,
            exclude_negative: true,
            seed: 1,
        };
        let bundle = sample_low_resource(&data, &s, &cfg).unwrap();
        assert_eq!(bundle.train.len(), 380);
        assert_eq!(bundle.dev.len(), 190);
    }

    #[test]
    fn sample_retacred_shape() {
        let names: Vec<String> = (0..39).map(|i| format!("r{i}")).collect();
        let s = RelationSchema::new(names, None).unwrap();
        let data = pool(&s, 50);
        let cfg = SamplerConfig {
            k_train: 20,
            k_dev: 10,
            k_test: 5,
            exclude_negative: true,
            seed: 2,
        };
        let bundle = sample_low_resource(&data, &s, &cfg).unwrap();
        assert_eq!(bundle.train.len(), 780);
        assert_eq!(bundle.dev.len(), 390);
    }

    #[test]
    fn sample_repeats_short_relations() {
        let s = schema(&["r0", "r1"]);
        let mut data = pool(&s, 30);
        data.retain(|i| i.gold_relation != Some(1) || i.id.ends_with("-0") || i.id.ends_with("-1"));
        // r1 now has 2 instances; they must repeat, cycling in order, to reach 20.
        let cfg = SamplerConfig {
            k_train: 20,
            k_dev: 5,
            k_test: 5,
            exclude_negative: true,
            seed: 3,
        };
        let bundle = sample_low_resource(&data, &s, &cfg).unwrap();
        let r1: Vec<&RelationInstance> = bundle
            .train
            .iter()
            .filter(|i| i.gold_relation == Some(1))
            .collect();
        assert_eq!(r1.len(), 20);
        for (k, i) in r1.iter().enumerate() {
            assert_eq!(i.id, r1[k % 2].id);
        }
    }

    #[test]
    fn sample_empty_relation_errors() {
        let s = schema(&["r0", "r1"]);
        let mut data = pool(&s, 10);
        data.retain(|i| i.gold_relation != Some(1));
        let err = sample_low_resource(&data, &s, &SamplerConfig::default()).unwrap_err();
        assert!(matches!(err, CoreError::EmptyRelation { name } if name == "r1"));
    }

    #[test]
    fn sample_excludes_negative_relation() {
        let s = RelationSchema::new(
            vec!["r0".into(), "r1".into(), "other".into()],
            Some("other".into()),
        )
        .unwrap();
        let data = pool(&s, 40);
        let cfg = SamplerConfig {
            k_train: 5,
            k_dev: 2,
            k_test: 2,
            exclude_negative: true,
            seed: 4,
        };
        let bundle = sample_low_resource(&data, &s, &cfg).unwrap();
        assert_eq!(bundle.train.len(), 10);
        for split in [&bundle.train, &bundle.dev, &bundle.test, &bundle.unlabeled] {
            assert!(split.iter().all(|i| i.gold_relation != Some(2)));
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let s = schema(&["r0", "r1", "r2"]);
        let data = pool(&s, 50);
        let cfg = SamplerConfig::default();
        let a = sample_low_resource(&data, &s, &cfg).unwrap();
        let b = sample_low_resource(&data, &s, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn splits_roundtrip_through_dir() {
        let s = schema(&["r0", "r1"]);
        let data = pool(&s, 30);
        let cfg = SamplerConfig {
            k_train: 4,
            k_dev: 2,
            k_test: 2,
            exclude_negative: true,
            seed: 5,
        };
        let bundle = sample_low_resource(&data, &s, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        bundle.write_to_dir(dir.path(), &s).unwrap();
        let back = SplitBundle::load_from_dir(dir.path(), &s).unwrap();
        assert_eq!(back, bundle);
    }

    #[test]
    fn schema_rejects_duplicates_and_bad_negative() {
        assert!(RelationSchema::new(vec!["a".into(), "a".into()], None).is_err());
        assert!(RelationSchema::new(vec!["a".into(), "b".into()], Some("c".into())).is_err());
        assert!(RelationSchema::new(vec!["a".into()], None).is_err());
    }
}
