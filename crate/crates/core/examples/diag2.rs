//! Scratch diagnostic: per-category test accuracy for the five systems.
//!
//! Categories are recovered from the synthetic surface forms: shared
//! (pair template), generic (connector replaced), distractor (foreign cue
//! appended), distinct split into variants seen/unseen in the human
//! train split.

use std::collections::HashSet;

use stad_core::config::ExperimentConfig;
use stad_core::corpus::{sample_low_resource, RelationInstance};
use stad_core::model::LinearModel;
use stad_core::encoder::featurize_instance;
use stad_core::selftrain::pipeline::{AmbiguousHandling, EvalSplit, PipelineContext};
use stad_core::selftrain::System;
use stad_core::synth::{generate, SynthParams};

fn category(inst: &RelationInstance, human_tokens: &HashSet<String>) -> &'static str {
    let toks = &inst.tokens;
    let gold = inst.gold_relation.unwrap();
    let has_core = toks.iter().any(|t| t.contains("-c"));
    let has_rare = toks.iter().any(|t| t.contains("-r"));
    let has_link = toks.iter().any(|t| t.starts_with("link"));
    let ftrap = toks
        .iter()
        .any(|t| t.starts_with("trap") && *t != format!("trap{gold}"));
    if has_core {
        return "core";
    }
    if ftrap && !has_link {
        // weak-evidence instance carrying a foreign trap
        return "ftrap";
    }
    if has_link {
        return "link";
    }
    if has_rare {
        if toks
            .iter()
            .filter(|t| t.contains("-r"))
            .all(|t| human_tokens.contains(t))
        {
            "rare-seen"
        } else {
            "rare-new"
        }
    } else {
        "generic"
    }
}

fn main() -> stad_core::Result<()> {
    let mut cfg = ExperimentConfig::default();
    let args: Vec<String> = std::env::args().collect();
    if args.len() > 1 {
        cfg.train.max_epochs = args[1].parse().unwrap();
    }
    if args.len() > 2 {
        cfg.train.learning_rate = args[2].parse().unwrap();
    }
    if args.len() > 3 {
        cfg.train.patience = args[3].parse().unwrap();
    }
    if args.len() > 4 {
        cfg.train.batch_size = args[4].parse().unwrap();
    }
    if args.len() > 5 {
        cfg.train.l2 = args[5].parse().unwrap();
    }
    let (schema, data) = generate(&SynthParams::default())?;
    let bundle = sample_low_resource(&data, &schema, &cfg.sampler)?;
    let human_tokens: HashSet<String> = bundle
        .train
        .iter()
        .flat_map(|i| i.tokens.iter().cloned())
        .collect();
    let cats = ["core", "link", "rare-seen", "rare-new", "generic", "ftrap"];
    let test_cats: Vec<&str> = bundle
        .test
        .iter()
        .map(|i| category(i, &human_tokens))
        .collect();
    for c in cats {
        let n = test_cats.iter().filter(|&&x| x == c).count();
        print!("{c}: {n}  ");
    }
    println!();

    let ctx = PipelineContext::new(&schema, &bundle, &cfg.features, &cfg.train, &cfg.partition)?;
    let score = |model: &LinearModel, cat: &str| -> f64 {
        let mut right = 0usize;
        let mut total = 0usize;
        for (inst, c) in bundle.test.iter().zip(&test_cats) {
            if *c != cat {
                continue;
            }
            total += 1;
            let h = featurize_instance(inst, &cfg.features);
            if model.predict(&h).unwrap() == inst.gold_relation.unwrap() {
                right += 1;
            }
        }
        if total == 0 {
            f64::NAN
        } else {
            right as f64 / total as f64
        }
    };

    println!(
        "{:<22} {:>7} {:>7} {:>9} {:>8} {:>8} {:>7} {:>7}",
        "system", "core", "link", "rare-seen", "rare-new", "generic", "ftrap", "all"
    );
    for seed in [1u64, 2, 3] {
        let art = ctx.build_artifacts(seed, true)?;
        let part = art.partition.as_ref().unwrap();
        print!("s{seed} partition: ");
        for cat in cats {
            let mut amb = 0usize;
            let mut hit = 0usize;
            for a in &part.ambiguous {
                if category(&a.instance, &human_tokens) == cat {
                    amb += 1;
                    if a.candidates.contains(&a.instance.gold_relation.unwrap()) {
                        hit += 1;
                    }
                }
            }
            let conf = part
                .confident
                .iter()
                .filter(|c| category(&c.instance, &human_tokens) == cat)
                .count();
            print!(
                "{cat}: conf {conf} amb {amb} hit {:.2}  ",
                if amb == 0 { f64::NAN } else { hit as f64 / amb as f64 }
            );
        }
        println!();
        let variants: Vec<(String, LinearModel)> = vec![
            ("Supervised".into(), art.teacher.model.clone()),
            (
                "Self-Training".into(),
                ctx.train_student(&art, true, AmbiguousHandling::Discard)?,
            ),
            (
                "Hard-Label".into(),
                ctx.train_student(&art, true, AmbiguousHandling::Hard)?,
            ),
            (
                "STAD".into(),
                ctx.train_student(&art, true, AmbiguousHandling::Partial)?,
            ),
            (
                "w/o setneg".into(),
                ctx.train_student(&art, true, AmbiguousHandling::PartialPositive)?,
            ),
            (
                "w/o partial".into(),
                ctx.train_student(&art, true, AmbiguousHandling::ArgmaxNegative)?,
            ),
        ];
        for (name, model) in &variants {
            let all = ctx.evaluate(model, EvalSplit::Test)?.micro_f1;
            println!(
                "s{seed} {:<19} {:>7.3} {:>7.3} {:>9.3} {:>8.3} {:>8.3} {:>7.3} {:>7.3}",
                name,
                score(model, "core"),
                score(model, "link"),
                score(model, "rare-seen"),
                score(model, "rare-new"),
                score(model, "generic"),
                score(model, "ftrap"),
                all
            );
        }
    }
    let _ = System::Supervised;
    Ok(())
}
