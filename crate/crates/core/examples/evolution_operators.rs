//! The variation operators on their own: initialization, crossover and
//! mutation, each with a seeded RNG.

use cnnga::evolution::{crossover, initialize_population, mutate_traced, CrossoverOutcome};
use cnnga::EvolutionConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let config =
        EvolutionConfig { population_size: 4, init_depth_range: [1, 6], p_mutation: 1.0, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let pop = initialize_population(&config, &mut rng).expect("valid config");
    println!("initial population:");
    for ind in pop.iter() {
        println!("  {}", ind.genome());
    }

    let (a, b) = (&pop.individuals[0], &pop.individuals[1]);
    let (c1, c2, outcome) = crossover(a, b, 1.0, &mut rng);
    match outcome {
        CrossoverOutcome::Spliced { cut1, cut2 } => println!("\ncrossover at {cut1}/{cut2}:"),
        other => println!("\ncrossover {other:?}:"),
    }
    println!("  {}\n  {}", c1.genome(), c2.genome());
    assert_eq!(c1.genome().len() + c2.genome().len(), a.genome().len() + b.genome().len());

    println!("\nmutations of {}:", c1.genome());
    for _ in 0..5 {
        let (m, op) = mutate_traced(&c1, &config, &mut rng);
        println!("  {:<10} {}", op.map(|o| format!("{o:?}")).unwrap_or_default(), m.genome());
    }
}
