//! The generational search loop.
//!
//! ```text
//! P0 <- initialize; evaluate P0
//! for t in 0..max_generations:
//!     evaluate Pt          (cache hits only, unless the cache was replaced)
//!     Qt <- offspring(Pt)
//!     evaluate Qt
//!     Pt+1 <- environmental_selection(Pt, Qt)
//! return best of the last population
//! ```
//!
//! The [`Engine`] owns the population, the fitness cache and the history, and
//! advances one phase per [`Engine::step`]: the first step evaluates the
//! initial population, each later step runs one generation. State only
//! changes when a step succeeds, so the engine can always be checkpointed.

mod cache;
mod checkpoint;
mod history;
mod pool;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;

pub use cache::{cache_load, cache_store, FitnessCache};
pub use checkpoint::{checkpoint, resume, Checkpoint, RngState, CHECKPOINT_VERSION};
pub use history::{GenerationRecord, RunHistory, HISTORY_CSV_HEADER};
pub use pool::{evaluate_population, EvaluationSettings, EvaluationStats};

use crate::error::{Error, Result};
use crate::evaluators::{Evaluator, EvaluatorSpec};
use crate::evolution::{
    environmental_selection, generate_offspring, initialize_population, EvolutionConfig, Individual, OffspringRngs,
    Population,
};
use crate::rng::{OperatorClass, SeedStreams};

pub struct Engine<E: Evaluator> {
    config: EvolutionConfig,
    settings: EvaluationSettings,
    evaluator: E,
    cache: FitnessCache,
    cache_path: Option<PathBuf>,
    population: Population,
    history: RunHistory,
    streams: SeedStreams,
    next_job: u64,
    evaluator_spec: Option<EvaluatorSpec>,
}

/// Final result of a search.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Individual,
    pub history: RunHistory,
}

impl<E: Evaluator> Engine<E> {
    /// Creates an engine with a fresh, unevaluated initial population.
    pub fn new(
        config: EvolutionConfig,
        settings: EvaluationSettings,
        evaluator: E,
        cache: FitnessCache,
    ) -> Result<Self> {
        config.validate()?;
        settings.validate()?;
        let streams = SeedStreams::new(config.rng_seed);
        let mut rng = streams.stream(0, OperatorClass::Initialization);
        let population = initialize_population(&config, &mut rng)?;
        Ok(Engine {
            config,
            settings,
            evaluator,
            cache,
            cache_path: None,
            population,
            history: RunHistory::default(),
            streams,
            next_job: 0,
            evaluator_spec: None,
        })
    }

    /// Rebuilds an engine from a checkpoint. The cache comes from the file
    /// the checkpoint references, which must exist.
    pub fn resume(checkpoint: Checkpoint, evaluator: E) -> Result<Self> {
        let cache = match &checkpoint.cache_path {
            Some(path) => FitnessCache::load(path).map_err(|e| match e {
                Error::Io { source, .. } => {
                    Error::io(format!("loading cache {} referenced by checkpoint", path.display()), source)
                }
                other => other,
            })?,
            None => FitnessCache::new(),
        };
        Self::resume_with_cache(checkpoint, evaluator, cache)
    }

    pub fn resume_with_cache(checkpoint: Checkpoint, evaluator: E, cache: FitnessCache) -> Result<Self> {
        checkpoint.check_version()?;
        checkpoint.config.validate()?;
        checkpoint.settings.validate()?;
        if checkpoint.rng.seed != checkpoint.config.rng_seed {
            return Err(Error::config("rng.seed", "does not match config.rng_seed"));
        }
        let streams = SeedStreams::new(checkpoint.rng.seed);
        Ok(Engine {
            config: checkpoint.config,
            settings: checkpoint.settings,
            evaluator,
            cache,
            cache_path: checkpoint.cache_path,
            population: checkpoint.population,
            history: checkpoint.history,
            streams,
            next_job: checkpoint.next_job,
            evaluator_spec: checkpoint.evaluator,
        })
    }

    /// Where [`save`](Self::save) persists the cache.
    pub fn with_cache_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.cache_path = Some(path.into());
        self
    }

    /// Records how the evaluator was built, so checkpoints can rebuild it.
    pub fn with_evaluator_spec(mut self, spec: EvaluatorSpec) -> Self {
        self.evaluator_spec = Some(spec);
        self
    }

    pub fn evaluator_spec(&self) -> Option<&EvaluatorSpec> {
        self.evaluator_spec.as_ref()
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn settings(&self) -> &EvaluationSettings {
        &self.settings
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    pub fn cache(&self) -> &FitnessCache {
        &self.cache
    }

    pub fn cache_path(&self) -> Option<&Path> {
        self.cache_path.as_deref()
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn history(&self) -> &RunHistory {
        &self.history
    }

    /// Index of the population generation currently held.
    pub fn generation(&self) -> u64 {
        self.population.generation
    }

    pub fn is_finished(&self) -> bool {
        self.history.len() as u64 > self.config.max_generations
    }

    /// Best individual of the current population, once it is evaluated.
    pub fn best(&self) -> Option<&Individual> {
        if self.population.is_evaluated() {
            self.population.best()
        } else {
            None
        }
    }

    /// Runs the next phase. Returns `false` without doing anything once the
    /// run is complete.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let started = Instant::now();
        if self.history.is_empty() {
            let mut individuals = self.population.individuals.clone();
            let stats = self.evaluate(&mut individuals)?;
            self.population.individuals = individuals;
            self.record(stats, started);
        } else {
            self.advance_generation(started)?;
        }
        Ok(true)
    }

    fn advance_generation(&mut self, started: Instant) -> Result<()> {
        let t = self.population.generation;
        let mut parents = self.population.clone();
        let mut stats = self.evaluate(&mut parents.individuals)?;

        let mut mating = self.streams.stream(t, OperatorClass::ParentSelection);
        let mut crossing = self.streams.stream(t, OperatorClass::Crossover);
        let mut mutating = self.streams.stream(t, OperatorClass::Mutation);
        let children = generate_offspring(
            &parents,
            &self.config,
            OffspringRngs { parent_selection: &mut mating, crossover: &mut crossing, mutation: &mut mutating },
        )?;
        let mut offspring = Population::new(children, t);
        stats.absorb(self.evaluate(&mut offspring.individuals)?);

        let mut selecting = self.streams.stream(t, OperatorClass::EnvironmentalSelection);
        let next = environmental_selection(&parents, &offspring, &mut selecting)?;
        self.population = next;
        self.record(stats, started);
        Ok(())
    }

    fn evaluate(&mut self, individuals: &mut [Individual]) -> Result<EvaluationStats> {
        evaluate_population(
            individuals,
            &self.evaluator,
            &mut self.cache,
            &self.settings,
            &self.streams,
            &mut self.next_job,
        )
    }

    fn record(&mut self, stats: EvaluationStats, started: Instant) {
        let best = self.population.best().expect("population is evaluated");
        let record = GenerationRecord {
            generation: self.population.generation,
            best_fitness: best.fitness().expect("evaluated"),
            mean_fitness: self.population.mean_fitness().expect("evaluated"),
            best_identifier: best.id().clone(),
            cache_hits: stats.hits,
            cache_misses: stats.misses,
            duration_ms: started.elapsed().as_millis() as u64,
        };
        info!(
            "generation {}: best {:.4} mean {:.4} ({} hits, {} misses, {} evaluated)",
            record.generation,
            record.best_fitness,
            record.mean_fitness,
            record.cache_hits,
            record.cache_misses,
            stats.evaluator_calls
        );
        self.history.push(record);
    }

    /// Steps until the history holds records for generations `0..=generation`
    /// or the run completes.
    pub fn run_until(&mut self, generation: u64) -> Result<()> {
        while (self.history.len() as u64) <= generation && self.step()? {}
        Ok(())
    }

    /// Steps to completion, calling `after_step` after every successful step.
    pub fn run_with<F>(&mut self, mut after_step: F) -> Result<RunOutcome>
    where
        F: FnMut(&Self) -> Result<()>,
    {
        while self.step()? {
            after_step(self)?;
        }
        Ok(self.outcome())
    }

    pub fn run_to_completion(&mut self) -> Result<RunOutcome> {
        self.run_with(|_| Ok(()))
    }

    fn outcome(&self) -> RunOutcome {
        RunOutcome { best: self.best().expect("finished run is evaluated").clone(), history: self.history.clone() }
    }

    /// Snapshot of the state between steps.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            generation: self.population.generation,
            population: self.population.clone(),
            rng: RngState::new(self.streams.seed()),
            config: self.config.clone(),
            settings: self.settings.clone(),
            cache_path: self.cache_path.clone(),
            history: self.history.clone(),
            next_job: self.next_job,
            evaluator: self.evaluator_spec.clone(),
        }
    }

    /// Persists the cache (when a cache path is set) and then the checkpoint.
    pub fn save(&self, checkpoint_path: &Path) -> Result<()> {
        if let Some(path) = &self.cache_path {
            self.cache.store(path)?;
        }
        self.checkpoint().store(checkpoint_path)
    }
}

/// Runs a complete search with an in-memory cache.
pub fn run<E: Evaluator>(config: EvolutionConfig, settings: EvaluationSettings, evaluator: E) -> Result<RunOutcome> {
    Engine::new(config, settings, evaluator, FitnessCache::new())?.run_to_completion()
}
