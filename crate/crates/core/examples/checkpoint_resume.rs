//! Stop a run halfway, write a checkpoint, resume it, and compare with a
//! run that was never interrupted.

use cnnga::{Checkpoint, Engine, EvaluationSettings, EvolutionConfig, FitnessCache, Result, SurrogateEvaluator};

fn main() -> Result<()> {
    let config = EvolutionConfig { rng_seed: 11, ..Default::default() };
    let settings = EvaluationSettings::default();
    let dir = std::env::temp_dir().join(format!("cnnga-resume-demo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let checkpoint_path = dir.join("checkpoint.json");

    let mut whole = Engine::new(config.clone(), settings.clone(), SurrogateEvaluator, FitnessCache::new())?;
    let whole = whole.run_to_completion()?;

    let mut first = Engine::new(config, settings, SurrogateEvaluator, FitnessCache::new())?
        .with_cache_path(dir.join("fitness.cache"));
    first.run_until(10)?;
    first.save(&checkpoint_path)?;
    println!("stopped at generation {}, checkpoint in {}", first.generation(), checkpoint_path.display());
    drop(first);

    let mut resumed = Engine::resume(Checkpoint::load(&checkpoint_path)?, SurrogateEvaluator)?;
    let resumed = resumed.run_to_completion()?;

    print!("{}", resumed.history.to_csv());
    println!("identical to uninterrupted run: {}", resumed.history.to_csv() == whole.history.to_csv());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
