//! Genetic operators: initialization, selection, crossover, mutation and
//! environmental selection.
//!
//! Every operator takes an explicit RNG and is a pure function of its inputs
//! and the RNG stream, so the same seed reproduces the same result.

mod config;
mod operators;
mod selection;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use config::{EvolutionConfig, MutationOp, MutationWeights};
pub use operators::{
    crossover, generate_offspring, initialize_population, mutate, mutate_traced, random_gene, random_genome,
    random_pool_gene, random_skip_gene, splice, CrossoverOutcome, OffspringRngs, CROSSOVER_RESAMPLES,
};
pub use selection::{
    best_index, binary_tournament, binary_tournament_index, environmental_selection, select_parents, worst_index,
    PARENT_RETRIES,
};

use crate::error::{Error, Result};
use crate::genome::{Genome, Identifier};

/// A genome with its identifier and, once evaluated, its fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    genome: Genome,
    id: Identifier,
    fitness: Option<f64>,
}

impl Individual {
    pub fn new(genome: Genome) -> Self {
        let id = genome.identifier();
        Individual { genome, id, fitness: None }
    }

    pub fn with_fitness(genome: Genome, fitness: f64) -> Self {
        let mut ind = Self::new(genome);
        ind.set_fitness(fitness);
        ind
    }

    pub fn genome(&self) -> &Genome {
        &self.genome
    }

    pub fn id(&self) -> &Identifier {
        &self.id
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    /// Sets the fitness, clamped to [0, 1]. NaN is stored as 0.
    pub fn set_fitness(&mut self, fitness: f64) {
        self.fitness = Some(clamp_fitness(fitness));
    }

    pub fn clear_fitness(&mut self) {
        self.fitness = None;
    }

    /// Replaces the genome. The identifier is recomputed and the fitness is
    /// cleared when the genome actually changed.
    pub fn set_genome(&mut self, genome: Genome) {
        if genome != self.genome {
            self.id = genome.identifier();
            self.genome = genome;
            self.fitness = None;
        }
    }

    pub fn into_genome(self) -> Genome {
        self.genome
    }
}

pub(crate) fn clamp_fitness(value: f64) -> f64 {
    if value.is_nan() {
        0.0
    } else {
        value.clamp(0.0, 1.0)
    }
}

/// Compares two evaluated fitness values; unset counts as lowest.
pub(crate) fn cmp_fitness(a: Option<f64>, b: Option<f64>) -> Ordering {
    a.unwrap_or(f64::NEG_INFINITY).partial_cmp(&b.unwrap_or(f64::NEG_INFINITY)).unwrap_or(Ordering::Equal)
}

#[derive(Serialize, Deserialize)]
struct IndividualRecord {
    genome: Genome,
    fitness: Option<f64>,
}

impl Serialize for Individual {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IndividualRecord { genome: self.genome.clone(), fitness: self.fitness }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Individual {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = IndividualRecord::deserialize(deserializer)?;
        let mut ind = Individual::new(record.genome);
        if let Some(f) = record.fitness {
            if !(0.0..=1.0).contains(&f) {
                return Err(serde::de::Error::custom(format!("fitness {f} outside [0, 1]")));
            }
            ind.fitness = Some(f);
        }
        Ok(ind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: u64,
}

impl Population {
    pub fn new(individuals: Vec<Individual>, generation: u64) -> Self {
        Population { individuals, generation }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Individual> {
        self.individuals.iter()
    }

    pub fn is_evaluated(&self) -> bool {
        self.individuals.iter().all(|i| i.fitness.is_some())
    }

    /// Errors on the first individual without fitness.
    pub fn require_evaluated(&self) -> Result<()> {
        require_evaluated(&self.individuals)
    }

    /// Best individual; ties go to the lexicographically smaller identifier.
    pub fn best(&self) -> Option<&Individual> {
        best_index(&self.individuals).map(|i| &self.individuals[i])
    }

    pub fn mean_fitness(&self) -> Option<f64> {
        if self.individuals.is_empty() || !self.is_evaluated() {
            return None;
        }
        let sum: f64 = self.individuals.iter().filter_map(|i| i.fitness).sum();
        Some(sum / self.individuals.len() as f64)
    }
}

pub(crate) fn require_evaluated(individuals: &[Individual]) -> Result<()> {
    if individuals.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    match individuals.iter().position(|i| i.fitness.is_none()) {
        Some(index) => Err(Error::Unevaluated { index }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_genome_tracks_identifier() {
        let mut ind = Individual::with_fitness("S:64:64".parse().unwrap(), 0.5);
        ind.set_genome("S:64:64".parse().unwrap());
        assert_eq!(ind.fitness(), Some(0.5));
        let changed: Genome = "S:64:128".parse().unwrap();
        ind.set_genome(changed.clone());
        assert_eq!(ind.id(), &changed.identifier());
        assert_eq!(ind.fitness(), None);
    }

    #[test]
    fn fitness_is_clamped() {
        let mut ind = Individual::new("P:max".parse().unwrap());
        ind.set_fitness(1.5);
        assert_eq!(ind.fitness(), Some(1.0));
        ind.set_fitness(f64::NAN);
        assert_eq!(ind.fitness(), Some(0.0));
    }

    #[test]
    fn serde_recomputes_identifier() {
        let ind = Individual::with_fitness("S:64:128-P:mean".parse().unwrap(), 0.25);
        let json = serde_json::to_string(&ind).unwrap();
        assert_eq!(json, r#"{"genome":"S:64:128-P:mean","fitness":0.25}"#);
        let back: Individual = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ind);
        assert!(serde_json::from_str::<Individual>(r#"{"genome":"P:max","fitness":2.0}"#).is_err());
    }

    #[test]
    fn require_evaluated_reports_index() {
        let pop = Population::new(
            vec![Individual::with_fitness("P:max".parse().unwrap(), 0.1), Individual::new("P:mean".parse().unwrap())],
            0,
        );
        assert!(matches!(pop.require_evaluated(), Err(Error::Unevaluated { index: 1 })));
        assert!(matches!(require_evaluated(&[]), Err(Error::EmptyPopulation)));
    }
}
