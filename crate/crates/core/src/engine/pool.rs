//! Cached, concurrent fitness evaluation of a population.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::arch::{decode, InputShape};
use crate::error::{Error, Result};
use crate::evaluators::{EvaluationJob, EvaluationResult, Evaluator};
use crate::evolution::{clamp_fitness, Individual};
use crate::genome::Identifier;
use crate::rng::SeedStreams;

use super::cache::FitnessCache;

/// Everything an evaluation pass needs besides the population and cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSettings {
    pub worker_count: usize,
    pub input_shape: InputShape,
    pub num_classes: u32,
    pub epochs: u32,
    /// Fitness given to invalid genomes and failed evaluations.
    pub penalty_fitness: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            worker_count: 1,
            input_shape: InputShape::square(32, 3),
            num_classes: 10,
            epochs: 350,
            penalty_fitness: 0.0,
        }
    }
}

impl EvaluationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.worker_count == 0 {
            return Err(Error::config("worker_count", "must be at least 1"));
        }
        let s = self.input_shape;
        if s.height == 0 || s.width == 0 || s.channels == 0 {
            return Err(Error::config("input_shape", "all dimensions must be positive"));
        }
        if self.num_classes < 2 {
            return Err(Error::config("num_classes", "must be at least 2"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.penalty_fitness) {
            return Err(Error::config("penalty_fitness", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Counters for one evaluation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationStats {
    /// Individuals resolved without a new evaluation, including duplicates
    /// of an identifier evaluated in the same pass.
    pub hits: u64,
    /// Distinct identifiers missing from the cache.
    pub misses: u64,
    pub evaluator_calls: u64,
    /// Misses that failed validation and were penalised without a call.
    pub invalid: u64,
    /// Identifiers whose evaluation failed, with the reported reason.
    pub failures: Vec<(Identifier, String)>,
}

impl EvaluationStats {
    pub fn absorb(&mut self, other: EvaluationStats) {
        self.hits += other.hits;
        self.misses += other.misses;
        self.evaluator_calls += other.evaluator_calls;
        self.invalid += other.invalid;
        self.failures.extend(other.failures);
    }
}

/// Assigns a fitness to every individual.
///
/// Identifiers already cached are served from the cache. Every other
/// distinct identifier is decoded; invalid genomes get the penalty fitness,
/// valid ones become one job each. Jobs get ids `job-<n>` from `next_job` in
/// order of first appearance and run on up to `worker_count` threads.
/// Results are merged by identifier, so the outcome does not depend on
/// completion order. Failed jobs get the penalty fitness. All new values are
/// written to the cache before returning.
///
/// An `Err` from the evaluator stops dispatch; results already received are
/// still cached, the individuals are left untouched and the error is
/// returned.
pub fn evaluate_population<E: Evaluator + ?Sized>(
    individuals: &mut [Individual],
    evaluator: &E,
    cache: &mut FitnessCache,
    settings: &EvaluationSettings,
    streams: &SeedStreams,
    next_job: &mut u64,
) -> Result<EvaluationStats> {
    settings.validate()?;
    let mut stats = EvaluationStats::default();
    let mut pending: Vec<EvaluationJob> = Vec::new();
    let mut job_ids: HashMap<String, Identifier> = HashMap::new();
    let mut seen: HashSet<&Identifier> = HashSet::new();

    for ind in individuals.iter() {
        let id = ind.id();
        if cache.contains(id) || !seen.insert(id) {
            stats.hits += 1;
            continue;
        }
        stats.misses += 1;
        match decode(ind.genome(), settings.input_shape, settings.num_classes) {
            Ok(arch) => {
                let job_id = format!("job-{}", *next_job);
                *next_job += 1;
                job_ids.insert(job_id.clone(), id.clone());
                pending.push(EvaluationJob {
                    job_id,
                    genome: ind.genome().clone(),
                    arch,
                    epochs: settings.epochs,
                    seed: streams.job_seed(id),
                });
            }
            Err(e) => {
                debug!("{} is invalid, penalised: {e}", ind.genome());
                stats.invalid += 1;
                cache.insert(id.clone(), settings.penalty_fitness);
            }
        }
    }

    let (results, fatal) = dispatch(&pending, evaluator, settings.worker_count);
    stats.evaluator_calls = results.len() as u64;

    // merge in job order so cache writes and failure logs are deterministic
    let mut by_job: HashMap<&str, &EvaluationResult> = results.iter().map(|r| (r.job_id.as_str(), r)).collect();
    for job in &pending {
        let Some(result) = by_job.remove(job.job_id.as_str()) else {
            continue;
        };
        let id = &job_ids[&job.job_id];
        let fitness = match result.fitness {
            Some(f) => clamp_fitness(f),
            None => {
                let reason = result.message.clone().unwrap_or_else(|| "unknown failure".to_string());
                warn!("evaluation of {} failed: {reason}", job.genome);
                stats.failures.push((id.clone(), reason));
                settings.penalty_fitness
            }
        };
        cache.insert(id.clone(), fitness);
    }

    if let Some(err) = fatal {
        return Err(err);
    }

    for ind in individuals.iter_mut() {
        let fitness = cache.get(ind.id()).expect("every identifier resolved");
        ind.set_fitness(fitness);
    }
    Ok(stats)
}

fn dispatch<E: Evaluator + ?Sized>(
    jobs: &[EvaluationJob],
    evaluator: &E,
    worker_count: usize,
) -> (Vec<EvaluationResult>, Option<Error>) {
    if jobs.is_empty() {
        return (Vec::new(), None);
    }
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<EvaluationResult>>();
    let slots = worker_count.min(jobs.len());

    thread::scope(|scope| {
        for _ in 0..slots {
            let tx = tx.clone();
            let (next, abort) = (&next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let outcome = evaluator.evaluate(job).map(|mut r| {
                    // results are keyed by the job they answer
                    r.job_id.clone_from(&job.job_id);
                    r
                });
                if outcome.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut results = Vec::with_capacity(jobs.len());
        let mut fatal = None;
        for outcome in rx {
            match outcome {
                Ok(r) => results.push(r),
                Err(e) => {
                    if fatal.is_none() {
                        fatal = Some(e);
                    }
                }
            }
        }
        (results, fatal)
    })
}
