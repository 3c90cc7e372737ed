//! Scratch diagnostic: teacher confidence and partition shape per seed.

use stad_core::config::ExperimentConfig;
use stad_core::corpus::sample_low_resource;
use stad_core::selftrain::PipelineContext;
use stad_core::synth::{generate, SynthParams};

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
    let params = SynthParams::default();
    let (schema, data) = generate(&params)?;
    let bundle = sample_low_resource(&data, &schema, &cfg.sampler)?;
    let ctx = PipelineContext::new(&schema, &bundle, &cfg.features, &cfg.train, &cfg.partition)?;

    for seed in [1u64, 2, 3] {
        let art = ctx.build_artifacts(seed, true)?;
        let part = art.partition.as_ref().unwrap();
        // teacher p_max statistics over the unlabeled pool
        let mut pmax: Vec<f64> = Vec::new();
        for set in [&part.confident] {
            for c in set.iter() {
                pmax.push(c.p.iter().cloned().fold(f64::MIN, f64::max));
            }
        }
        for a in &part.ambiguous {
            pmax.push(a.p.iter().cloned().fold(f64::MIN, f64::max));
        }
        for h in &part.hard {
            pmax.push(h.p.iter().cloned().fold(f64::MIN, f64::max));
        }
        pmax.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = pmax.iter().sum::<f64>() / pmax.len() as f64;
        let q = |f: f64| pmax[((pmax.len() - 1) as f64 * f) as usize];
        let mut sizes = std::collections::BTreeMap::new();
        for a in &part.ambiguous {
            *sizes.entry(a.candidates.len()).or_insert(0usize) += 1;
        }
        // accuracy of confident pseudo-labels and of ambiguous candidate sets
        let conf_ok = part
            .confident
            .iter()
            .filter(|c| c.instance.gold_relation == Some(c.label))
            .count();
        let amb_ok = part
            .ambiguous
            .iter()
            .filter(|a| a.instance.gold_relation.map_or(false, |g| a.candidates.contains(&g)))
            .count();
        println!(
            "seed {seed}: best_epoch {} dev_f1 {:?} | conf {} (acc {:.2}) amb {} (C+ hit {:.2}) hard {} | pmax mean {:.3} p50 {:.3} p90 {:.3} max {:.3} | sizes {:?}",
            art.teacher.best_epoch,
            art.teacher.best_dev_f1,
            part.confident.len(),
            if part.confident.is_empty() { f64::NAN } else { conf_ok as f64 / part.confident.len() as f64 },
            part.ambiguous.len(),
            if part.ambiguous.is_empty() { f64::NAN } else { amb_ok as f64 / part.ambiguous.len() as f64 },
            part.hard.len(),
            mean,
            q(0.5),
            q(0.9),
            pmax.last().unwrap(),
            sizes
        );
        let mut conf_by_rel = vec![0usize; 10];
        let mut conf_trap = 0usize;
        for c in &part.confident {
            conf_by_rel[c.label] += 1;
            if c.instance.tokens.iter().any(|t| t.starts_with("trap")) {
                conf_trap += 1;
            }
        }
        let pool_n = part.confident.len() + part.ambiguous.len() + part.hard.len();
        let mut all_trap = 0usize;
        for set in [&part.confident] {
            let _ = set;
        }
        let trap_count = |tokens: &[String]| tokens.iter().any(|t| t.starts_with("trap"));
        all_trap += part.confident.iter().filter(|c| trap_count(&c.instance.tokens)).count();
        all_trap += part.ambiguous.iter().filter(|a| trap_count(&a.instance.tokens)).count();
        all_trap += part.hard.iter().filter(|h| trap_count(&h.instance.tokens)).count();
        println!(
            "        conf_by_rel {:?} | trap rate conf {:.2} pool {:.2}",
            conf_by_rel,
            if part.confident.is_empty() { f64::NAN } else { conf_trap as f64 / part.confident.len() as f64 },
            all_trap as f64 / pool_n as f64
        );
    }
    Ok(())
}
