// Scratch probe: does the net learn feasibility under the benchmark's
// stream regime (bucket-uniform sampling, Bernoulli plateau labels)?
use littlezoo::env::goal_prompt;
use littlezoo::estimators::magellan::encode_prompt;
use littlezoo::goalspace::{CategoryLabel, Split};
use littlezoo::rngs::{stream_rng, Stream};
use littlezoo::tinynet::{AdamConfig, AdamState, CompetenceNet, NetDims, Tokenizer};
use rand::Rng;

fn main() {
    let space = {
        let config = littlezoo::goalspace::GenerationConfig {
            total_goals: 25_000,
            test_goals: 2_000,
            proportions: Default::default(),
            rng_seed: 11,
        };
        littlezoo::goalspace::generate(
            &config,
            &littlezoo::env::Vocabulary::default_zoo(),
            &mut stream_rng(11, Stream::GenerateTrain),
            &mut stream_rng(11, Stream::GenerateTest),
        ).unwrap()
    };
    let prompts: Vec<String> = space.train_ids().iter().map(|&id| goal_prompt(space.goal(id))).collect();
    let tokenizer = Tokenizer::build(prompts.iter().map(|p| p.as_str()));
    let args: Vec<String> = std::env::args().collect();
    let d: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let steps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(6250);
    let plateau = [0.0, 0.95, 0.92, 0.90, 0.85];
    let dims = NetDims { vocab_size: tokenizer.vocab_size() * 2, embed_dim: d, hidden_units: 128 };
    let mut rng = stream_rng(7, Stream::Estimator);
    let mut net = CompetenceNet::new(dims, 0.05, &mut rng);
    let mut adam = AdamState::new(AdamConfig { learning_rate: lr, ..Default::default() }, net.store().len());
    let tokens: Vec<Vec<u32>> = space.goals().iter().map(|g| encode_prompt(&tokenizer, &goal_prompt(g))).collect();
    for step in 0..steps {
        let batch: Vec<(&[u32], f64)> = (0..256).map(|_| {
            // Bucket-uniform: pick a category, then a goal within it.
            let cat = CategoryLabel::ALL[rng.random_range(0..5)];
            let pool = space.ids_by_category(Split::Train, cat);
            let id = pool[rng.random_range(0..pool.len())] as usize;
            let p = plateau[space.goals()[id].category.index()];
            let label = f64::from(u8::from(rng.random::<f64>() < p));
            (tokens[id].as_slice(), label)
        }).collect();
        let loss = net.train_batch(&mut adam, &batch).unwrap();
        if step % (steps / 5).max(1) == 0 { eprintln!("step {step}: loss {loss:.4}"); }
    }
    for (name, split) in [("train", Split::Train), ("test", Split::Test)] {
        for cat in CategoryLabel::ALL {
            let ids = space.ids_by_category(split, cat);
            if ids.is_empty() { continue; }
            let mean: f64 = ids.iter().map(|&id| net.forward(&tokens[id as usize])).sum::<f64>() / ids.len() as f64;
            println!("{name} {}: mean prediction {:.4} (truth {:.2})", cat.as_str(), mean, plateau[cat.index()]);
        }
    }
}
