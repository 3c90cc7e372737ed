//! Scratch lab: grid over corpus-generator knobs, scoring the margin
//! vector (self-training vs supervised, set-negative vs self-training,
//! ablation ordering) over a few seeds. Not part of the shipped surface.

use stad_core::config::ExperimentConfig;
use stad_core::corpus::{sample_low_resource, RelationInstance, RelationSchema, Span};
use stad_core::selftrain::pipeline::{AmbiguousHandling, EvalSplit, PipelineContext};
use stad_core::util::derive_seed;
use stad_core::Result;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
struct Knobs {
    domain_rate: f64,
    connector_rate: f64,
    tails: usize,
    rare_alone: f64,
    rare_variants: usize,
    rare_tails: usize,
    ring_variants: usize,
    noise_rate: f64,
    reinforce: usize,
    bigrams: bool,
    dim_per_entity: usize,
    max_epochs: usize,
    patience: usize,
    l2: f64,
    per_rel: usize,
}

const RELATIONS: usize = 10;
const PAIRS: usize = 3;

fn group(r: usize) -> usize {
    if r < 2 * PAIRS {
        r / 2
    } else {
        PAIRS + (r - 2 * PAIRS)
    }
}

/// Ring neighbours inside each domain: relation r shares a connector
/// token with each cyclic neighbour of its domain cycle.
fn cycles() -> [Vec<usize>; 2] {
    let mut cyc: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for r in 0..RELATIONS {
        cyc[group(r) % 2].push(r);
    }
    cyc
}

fn ring_token(relation: usize, right: bool, variant: usize) -> String {
    let cyc = cycles();
    let d = group(relation) % 2;
    let members = &cyc[d];
    let idx = members.iter().position(|&m| m == relation).unwrap();
    let j = if right { idx } else { (idx + members.len() - 1) % members.len() };
    format!("gc{d}-{j}-{variant}")
}

fn gen(k: &Knobs, seed: u64) -> Result<(RelationSchema, Vec<RelationInstance>)> {
    let names = (0..RELATIONS).map(|r| format!("rel-{r:02}")).collect();
    let schema = RelationSchema::new(names, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "gridlab"));
    let mut data = Vec::new();
    for relation in 0..RELATIONS {
        let g = group(relation);
        for i in 0..k.per_rel {
            let mut tokens: Vec<String> = Vec::new();
            let head_pos = tokens.len();
            tokens.push("e0".to_string());
            if rng.gen_bool(k.domain_rate) {
                tokens.push(format!("dom{}", g % 2));
            }
            // connectors appear on every band, so their per-relation
            // exposure is high and statistically balanced: a connector on
            // its own narrows the label to a neighbour pair but can never
            // push the teacher over the confidence threshold
            if rng.gen_bool(k.connector_rate) {
                let v = rng.gen_range(0..k.ring_variants);
                tokens.push(ring_token(relation, rng.gen_bool(0.5), v));
            }
            let slot = rng.gen::<f64>();
            let mut bare = false;
            if slot < k.noise_rate {
                // no relation-specific cue at all
                bare = true;
            } else if slot < k.noise_rate + k.rare_alone {
                tokens.push(format!("cue{relation}-r{}", rng.gen_range(0..k.rare_variants)));
            } else {
                // double evidence: the teacher is certain, so these carry
                // their (often unseen) tails into the confident set
                tokens.push(format!("cue{relation}-c0"));
                tokens.push(format!("cue{relation}-r{}", rng.gen_range(0..k.reinforce)));
            }
            let tail_pos = tokens.len();
            if bare {
                tokens.push(format!("ew{relation}-{}", rng.gen_range(0..k.rare_tails)));
            } else {
                tokens.push(format!("et{relation}-{}", rng.gen_range(0..k.tails)));
            }
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

struct Outcome {
    knobs: Knobs,
    st_sup: f64,
    stad_st: f64,
    stad_wop: f64,
    wosn_hl: f64,
    stad_hl: f64,
    stad: f64,
    hit: f64,
    conf: f64,
}

fn configure(k: &Knobs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.train.max_epochs = k.max_epochs;
    cfg.train.learning_rate = 2.5;
    cfg.train.patience = k.patience;
    cfg.train.batch_size = 1;
    cfg.train.l2 = k.l2;
    cfg.features.dim_per_entity = k.dim_per_entity;
    cfg.features.ngram_orders = if k.bigrams { vec![1, 2] } else { vec![1] };
    cfg
}

fn run(k: &Knobs) -> Result<Outcome> {
    let cfg = configure(k);
    let (schema, data) = gen(k, 13)?;
    let bundle = sample_low_resource(&data, &schema, &cfg.sampler)?;
    let ctx = PipelineContext::new(&schema, &bundle, &cfg.features, &cfg.train, &cfg.partition)?;
    let mut sums = [0.0f64; 6];
    let mut hit = 0.0;
    let mut conf = 0.0;
    let seeds = [1u64, 2, 3];
    for &seed in &seeds {
        let art = ctx.build_artifacts(seed, true)?;
        let part = art.partition.as_ref().unwrap();
        let n_amb = part.ambiguous.len().max(1);
        hit += part
            .ambiguous
            .iter()
            .filter(|a| a.candidates.contains(&a.instance.gold_relation.unwrap()))
            .count() as f64
            / n_amb as f64;
        conf += part.confident.len() as f64;
        let models = [
            art.teacher.model.clone(),
            ctx.train_student(&art, true, AmbiguousHandling::Discard)?,
            ctx.train_student(&art, true, AmbiguousHandling::Hard)?,
            ctx.train_student(&art, true, AmbiguousHandling::Partial)?,
            ctx.train_student(&art, true, AmbiguousHandling::PartialPositive)?,
            ctx.train_student(&art, true, AmbiguousHandling::ArgmaxNegative)?,
        ];
        for (slot, m) in sums.iter_mut().zip(&models) {
            *slot += ctx.evaluate(m, EvalSplit::Test)?.micro_f1;
        }
    }
    let n = seeds.len() as f64;
    let [sup, st, hl, stad, wosn, wop] = sums.map(|s| 100.0 * s / n);
    Ok(Outcome {
        knobs: *k,
        st_sup: st - sup,
        stad_st: stad - st,
        stad_wop: stad - wop,
        wosn_hl: wosn - hl,
        stad_hl: stad - hl,
        stad,
        hit: hit / n,
        conf: conf / n,
    })
}

fn loss(o: &Outcome) -> f64 {
    // cushioned targets, in points
    let mut l = 0.0;
    l += (1.5 - o.st_sup).max(0.0);
    l += (1.0 - o.stad_st).max(0.0);
    l += (0.3 - o.stad_wop).max(0.0);
    l += (0.3 - o.wosn_hl).max(0.0);
    l += (0.5 - o.stad_hl).max(0.0);
    l
}

fn probe(k: &Knobs, with_models: bool) -> Result<()> {
    use stad_core::encoder::featurize_instance;
    use stad_core::model::{train, DevSet, LinearModel};
    use stad_core::selftrain::tagging::{sample_negative_label, tag_human};
    use std::collections::HashSet;
    let cfg = configure(k);
    let (schema, data) = gen(k, 13)?;
    let bundle = sample_low_resource(&data, &schema, &cfg.sampler)?;
    let human: HashSet<String> = bundle
        .train
        .iter()
        .flat_map(|i| i.tokens.iter().cloned())
        .collect();
    let cat = |i: &RelationInstance| -> &'static str {
        let has = |p: &str| i.tokens.iter().any(|t| t.contains(p));
        let tail_seen = human.contains(i.tokens.last().unwrap());
        if has("-c") {
            "core"
        } else if has("ew") {
            let gc = i.tokens.iter().any(|t| t.starts_with("gc"));
            match (gc, tail_seen) {
                (true, true) => "ring-ss",
                (true, false) => "ring-sb",
                (false, true) => "ring-bs",
                (false, false) => "ring-bb",
            }
        } else {
            let cue_seen = i
                .tokens
                .iter()
                .find(|t| t.contains("-r"))
                .map(|t| human.contains(t.as_str()))
                .unwrap();
            match (cue_seen, tail_seen) {
                (true, true) => "rare-ss",
                (true, false) => "rare-sb",
                (false, true) => "rare-bs",
                (false, false) => "rare-bb",
            }
        }
    };
    let cats = [
        "core", "rare-ss", "rare-sb", "rare-bs", "rare-bb", "ring-ss", "ring-sb", "ring-bs",
        "ring-bb",
    ];
    print!("test:");
    for c in cats {
        print!(" {c} {}", bundle.test.iter().filter(|i| cat(i) == c).count());
    }
    println!();
    let ctx = PipelineContext::new(&schema, &bundle, &cfg.features, &cfg.train, &cfg.partition)?;
    for seed in [1u64, 2, 3] {
        let art = ctx.build_artifacts(seed, true)?;
        let part = art.partition.as_ref().unwrap();
        let n_amb = part.ambiguous.len().max(1);
        let hit = part
            .ambiguous
            .iter()
            .filter(|a| a.candidates.contains(&a.instance.gold_relation.unwrap()))
            .count() as f64
            / n_amb as f64;
        let conf_acc = part
            .confident
            .iter()
            .filter(|c| c.label == c.instance.gold_relation.unwrap())
            .count() as f64
            / part.confident.len().max(1) as f64;
        println!(
            "s{seed} conf {} (acc {conf_acc:.3}) amb {} hit {hit:.3}",
            part.confident.len(),
            part.ambiguous.len()
        );
        print!("s{seed} wrong-conf:");
        for c in cats {
            let n = part
                .confident
                .iter()
                .filter(|x| x.label != x.instance.gold_relation.unwrap() && cat(&x.instance) == c)
                .count();
            if n > 0 {
                print!(" {c} {n}");
            }
        }
        println!();
        println!(
            "s{seed} teacher best_epoch {} dev {:.3}",
            art.teacher.best_epoch,
            art.teacher.best_dev_f1.unwrap_or(f64::NAN)
        );
        // ambiguous-set anatomy per band: count, gold-hit, mean top
        // probability, mean candidate-set size
        print!("s{seed} amb:");
        for c in cats {
            let members: Vec<_> =
                part.ambiguous.iter().filter(|a| cat(&a.instance) == c).collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len();
            let h = members
                .iter()
                .filter(|a| a.candidates.contains(&a.instance.gold_relation.unwrap()))
                .count();
            let p: f64 = members.iter().map(|a| a.p[a.candidates[0]]).sum::<f64>() / n as f64;
            let sz: f64 =
                members.iter().map(|a| a.candidates.len() as f64).sum::<f64>() / n as f64;
            print!(" {c} n{n} hit{:.2} p{p:.2} sz{sz:.1}", h as f64 / n as f64);
        }
        println!();
        if !with_models {
            continue;
        }
        // control: student on human + confident with *gold* labels
        let stgold = {
            let n = schema.len();
            let mut data: Vec<_> = bundle
                .train
                .iter()
                .map(|i| tag_human(featurize_instance(i, &cfg.features), i.gold_relation.unwrap(), n))
                .collect();
            for c in &part.confident {
                data.push(tag_human(
                    featurize_instance(&c.instance, &cfg.features),
                    c.instance.gold_relation.unwrap(),
                    n,
                ));
            }
            let dev = DevSet {
                examples: bundle
                    .dev
                    .iter()
                    .map(|i| (featurize_instance(i, &cfg.features), i.gold_relation.unwrap()))
                    .collect(),
                excluded: None,
            };
            let tcfg = cfg.train.with_seed(stad_core::util::derive_seed(seed, "student"));
            train(
                &LinearModel::zeros(n, cfg.features.dim()),
                &data,
                &dev,
                &tcfg,
                &mut |i, r| sample_negative_label(i, r),
            )?
            .model
        };
        let models = [
            ("Sup", art.teacher.model.clone()),
            ("ST", ctx.train_student(&art, true, AmbiguousHandling::Discard)?),
            ("STgold", stgold),
            ("HL", ctx.train_student(&art, true, AmbiguousHandling::Hard)?),
            ("STAD", ctx.train_student(&art, true, AmbiguousHandling::Partial)?),
            ("woSN", ctx.train_student(&art, true, AmbiguousHandling::PartialPositive)?),
            ("woP", ctx.train_student(&art, true, AmbiguousHandling::ArgmaxNegative)?),
        ];
        for (name, m) in &models {
            print!("s{seed} {name:<7}");
            for c in cats {
                let mut right = 0;
                let mut tot = 0;
                for inst in &bundle.test {
                    if cat(inst) != c {
                        continue;
                    }
                    tot += 1;
                    let h = featurize_instance(inst, &cfg.features);
                    if m.predict(&h).unwrap() == inst.gold_relation.unwrap() {
                        right += 1;
                    }
                }
                print!(" {:>7.3}", right as f64 / tot.max(1) as f64);
            }
            // decisiveness of a lone unseen tail: [e0, dom, et{r}-j]
            let mut et_right = 0;
            let mut et_tot = 0;
            let mut ew_right = 0;
            let mut ew_tot = 0;
            for r in 0..RELATIONS {
                for (pool, n, right, tot) in [
                    ("et", k.tails, &mut et_right, &mut et_tot),
                    ("ew", k.rare_tails, &mut ew_right, &mut ew_tot),
                ] {
                    for j in 0..n {
                        let t = format!("{pool}{r}-{j}");
                        if human.contains(&t) {
                            continue;
                        }
                        let inst = RelationInstance::new(
                            format!("probe-{r}-{t}"),
                            vec!["e0".into(), format!("dom{}", group(r) % 2), t],
                            Span::new(0, 1)?,
                            Span::new(2, 3)?,
                            Some(r),
                        )?;
                        *tot += 1;
                        if m.predict(&featurize_instance(&inst, &cfg.features))? == r {
                            *right += 1;
                        }
                    }
                }
            }
            println!(
                " | {:.3} et1 {:.2} ew1 {:.2}",
                ctx.evaluate(m, EvalSplit::Test)?.micro_f1,
                et_right as f64 / et_tot.max(1) as f64,
                ew_right as f64 / ew_tot.max(1) as f64
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let base = Knobs {
        domain_rate: 1.0,
        connector_rate: 0.5,
        tails: 44,
        rare_alone: 0.20,
        rare_variants: 12,
        rare_tails: 12,
        ring_variants: 2,
        noise_rate: 0.18,
        reinforce: 3,
        bigrams: true,
        dim_per_entity: 512,
        max_epochs: 200,
        patience: 40,
        l2: 1e-7,
        per_rel: 300,
    };
    if std::env::args().any(|a| a == "--probe") {
        return probe(&base, true);
    }
    if std::env::args().any(|a| a == "--part") {
        return probe(&base, false);
    }

    let mut grid = Vec::new();
    for &tails in &[40usize, 64] {
        for &noise_rate in &[0.20f64, 0.24] {
            for &rare_tails in &[12usize, 16] {
                grid.push(Knobs {
                    tails,
                    noise_rate,
                    rare_tails,
                    ..base
                });
            }
        }
    }

    let mut outcomes = Vec::new();
    for (i, k) in grid.iter().enumerate() {
        let o = run(k)?;
        eprintln!(
            "[{i:>2}] t{:<2} nr{:.2} ew{:<2} | ST-Sup {:+.1} STAD-ST {:+.1} STAD-woP {:+.1} woSN-HL {:+.1} STAD-HL {:+.1} | stad {:.1} hit {:.2} conf {:.0} loss {:.1}",
            o.knobs.tails,
            o.knobs.noise_rate,
            o.knobs.rare_tails,
            o.st_sup,
            o.stad_st,
            o.stad_wop,
            o.wosn_hl,
            o.stad_hl,
            o.stad,
            o.hit,
            o.conf,
            loss(&o)
        );
        outcomes.push(o);
    }
    outcomes.sort_by(|a, b| loss(a).partial_cmp(&loss(b)).unwrap());
    println!("\n=== best ===");
    for o in outcomes.iter().take(5) {
        println!(
            "{:?} | ST-Sup {:+.1} STAD-ST {:+.1} STAD-woP {:+.1} woSN-HL {:+.1} STAD-HL {:+.1} stad {:.1} hit {:.2} conf {:.0} loss {:.1}",
            o.knobs, o.st_sup, o.stad_st, o.stad_wop, o.wosn_hl, o.stad_hl, o.stad, o.hit, o.conf, loss(&o)
        );
    }
    Ok(())
}
