//! Fitness memoisation: duplicates and repeat passes cost no evaluations,
//! and the cache survives a round trip through its file.

use std::sync::atomic::{AtomicUsize, Ordering};

use cnnga::evaluators::surrogate_fitness;
use cnnga::{
    cache_load, cache_store, evaluate_population, EvaluationJob, EvaluationResult, EvaluationSettings, Evaluator,
    FitnessCache, Individual, Result, SeedStreams,
};

#[derive(Default)]
struct Counting(AtomicUsize);

impl Evaluator for Counting {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Ok(EvaluationResult::ok(job.job_id.clone(), surrogate_fitness(&job.genome)))
    }
}

fn main() -> Result<()> {
    let texts = ["S:64:128", "S:64:128", "P:max-S:128:256", "S:64:128", "S:256:256-P:mean"];
    let mut pop: Vec<Individual> = texts.iter().map(|t| Individual::new(t.parse().unwrap())).collect();
    let evaluator = Counting::default();
    let mut cache = FitnessCache::new();
    let settings = EvaluationSettings { worker_count: 2, ..Default::default() };
    let streams = SeedStreams::new(0);
    let mut next_job = 0;

    let first = evaluate_population(&mut pop, &evaluator, &mut cache, &settings, &streams, &mut next_job)?;
    println!("first pass:  {} hits, {} misses, {} calls", first.hits, first.misses, evaluator.0.load(Ordering::SeqCst));
    let second = evaluate_population(&mut pop, &evaluator, &mut cache, &settings, &streams, &mut next_job)?;
    println!(
        "second pass: {} hits, {} misses, {} calls total",
        second.hits,
        second.misses,
        evaluator.0.load(Ordering::SeqCst)
    );

    let dir = std::env::temp_dir().join(format!("cnnga-cache-demo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("fitness.cache");
    cache_store(&cache, &path)?;
    print!("{}", std::fs::read_to_string(&path).expect("cache file"));
    assert_eq!(cache_load(&path)?, cache);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
