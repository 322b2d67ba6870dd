//! Default 20x20 search against the closed-form surrogate, over several seeds.
//!
//!     cargo run --release --example surrogate_search -- 10

use cnnga::{run, EvaluationSettings, EvolutionConfig, SurrogateEvaluator};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for seed in 0..seeds {
        let outcome =
            run(EvolutionConfig::default().with_seed(seed), EvaluationSettings::default(), SurrogateEvaluator)
                .expect("surrogate run");
        let first = outcome.history.records.first().map(|r| r.best_fitness).unwrap_or_default();
        println!(
            "seed {seed:>2}: best {:.4} (gen 0: {first:.4}) monotone={} {}",
            outcome.best.fitness().unwrap_or_default(),
            outcome.history.is_best_monotone(),
            outcome.best.genome()
        );
    }
}
