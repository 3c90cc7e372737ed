//! Runs the five systems and the ablation matrix on a synthetic corpus
//! and prints the comparison tables.
//!
//! ```text
//! cargo run --release --example synthetic_comparison
//! ```

use stad_core::config::ExperimentConfig;
use stad_core::corpus::sample_low_resource;
use stad_core::eval::ablation_matrix;
use stad_core::selftrain::{PipelineContext, ALL_SYSTEMS};
use stad_core::selftrain::pipeline::EvalSplit;
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
    let params = SynthParams::default();
    let (schema, data) = generate(&params)?;
    let bundle = sample_low_resource(&data, &schema, &cfg.sampler)?;
    println!(
        "corpus: {} instances, {} relations; splits: {} train / {} dev / {} test / {} unlabeled",
        data.len(),
        schema.len(),
        bundle.train.len(),
        bundle.dev.len(),
        bundle.test.len(),
        bundle.unlabeled.len()
    );

    let ctx = PipelineContext::new(&schema, &bundle, &cfg.features, &cfg.train, &cfg.partition)?;
    let run = ctx.run_systems(&ALL_SYSTEMS, &cfg.experiment.seeds, EvalSplit::Test)?;

    if let Some((seed, part)) = run.partitions.first() {
        println!(
            "partition @ seed {seed}: {} confident / {} ambiguous / {} hard",
            part.confident.len(),
            part.ambiguous.len(),
            part.hard.len()
        );
    }
    println!("\n{:<14} {:>8} {:>8} {:>8}", "system", "micro", "std", "macro");
    for r in &run.results {
        println!(
            "{:<14} {:>8.4} {:>8} {:>8.4}",
            r.system,
            r.mean_micro_f1,
            r.std_micro_f1
                .map_or("-".to_string(), |s| format!("{s:.4}")),
            r.mean_macro_f1
        );
    }

    let rows = ablation_matrix(&ctx, &cfg.experiment.seeds)?;
    println!("\n{:<32} {:>8} {:>8} {:>8}", "variant", "micro", "std", "delta");
    for row in &rows {
        println!(
            "{:<32} {:>8.4} {:>8} {:>+8.4}",
            row.variant,
            row.mean_micro_f1,
            row.std_micro_f1
                .map_or("-".to_string(), |s| format!("{s:.4}")),
            row.delta_vs_full
        );
    }
    Ok(())
}
