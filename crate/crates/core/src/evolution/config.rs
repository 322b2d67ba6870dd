use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four mutation operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOp {
    AddSkip,
    AddPool,
    Remove,
    Alter,
}

impl MutationOp {
    pub const ALL: [MutationOp; 4] = [MutationOp::AddSkip, MutationOp::AddPool, MutationOp::Remove, MutationOp::Alter];
}

/// Relative weights of the mutation operations. They need not sum to one;
/// draws use the normalized values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationWeights {
    pub add_skip: f64,
    pub add_pool: f64,
    pub remove: f64,
    pub alter: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights { add_skip: 0.7, add_pool: 0.1, remove: 0.1, alter: 0.1 }
    }
}

impl MutationWeights {
    pub fn weight(&self, op: MutationOp) -> f64 {
        match op {
            MutationOp::AddSkip => self.add_skip,
            MutationOp::AddPool => self.add_pool,
            MutationOp::Remove => self.remove,
            MutationOp::Alter => self.alter,
        }
    }

    pub fn total(&self) -> f64 {
        MutationOp::ALL.iter().map(|&op| self.weight(op)).sum()
    }

    pub fn normalized(&self) -> Self {
        let total = self.total();
        MutationWeights {
            add_skip: self.add_skip / total,
            add_pool: self.add_pool / total,
            remove: self.remove / total,
            alter: self.alter / total,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for op in MutationOp::ALL {
            let w = self.weight(op);
            if !w.is_finite() || w < 0.0 {
                return Err(Error::config(
                    format!("mutation_weights.{}", op_field(op)),
                    format!("must be a non-negative number, got {w}"),
                ));
            }
        }
        if self.total() <= 0.0 {
            return Err(Error::config("mutation_weights", "weights must not all be zero"));
        }
        if self.total() - self.remove <= 0.0 {
            return Err(Error::config(
                "mutation_weights",
                "at least one of add_skip, add_pool, alter must be positive",
            ));
        }
        Ok(())
    }

    /// Draws one operation. One uniform draw in [0, 1) is scaled by the total
    /// weight and located in the cumulative table (add_skip, add_pool,
    /// remove, alter).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> MutationOp {
        self.draw_from(rng, &MutationOp::ALL)
    }

    /// Same as [`draw`](Self::draw) with REMOVE excluded and the remaining
    /// weights renormalized.
    pub fn draw_without_remove<R: Rng + ?Sized>(&self, rng: &mut R) -> MutationOp {
        self.draw_from(rng, &[MutationOp::AddSkip, MutationOp::AddPool, MutationOp::Alter])
    }

    fn draw_from<R: Rng + ?Sized>(&self, rng: &mut R, ops: &[MutationOp]) -> MutationOp {
        let total: f64 = ops.iter().map(|&op| self.weight(op)).sum();
        let target = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last = ops[0];
        for &op in ops {
            let w = self.weight(op);
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = op;
            if target < acc {
                return op;
            }
        }
        // float round-off at the top of the range
        last
    }
}

fn op_field(op: MutationOp) -> &'static str {
    match op {
        MutationOp::AddSkip => "add_skip",
        MutationOp::AddPool => "add_pool",
        MutationOp::Remove => "remove",
        MutationOp::Alter => "alter",
    }
}

/// Search hyperparameters. Defaults: population 20, 20 generations,
/// crossover 0.9, mutation 0.2, feature maps {64, 128, 256}, mutation weights
/// 0.7 / 0.1 / 0.1 / 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub max_generations: u64,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub feature_map_set: Vec<u32>,
    /// Inclusive bounds on the initial genome length.
    pub init_depth_range: [usize; 2],
    pub mutation_weights: MutationWeights,
    pub rng_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 20,
            max_generations: 20,
            p_crossover: 0.9,
            p_mutation: 0.2,
            feature_map_set: vec![64, 128, 256],
            init_depth_range: [1, 20],
            mutation_weights: MutationWeights::default(),
            rng_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::config("population_size", "must be at least 1"));
        }
        for (field, p) in [("p_crossover", self.p_crossover), ("p_mutation", self.p_mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(field, format!("must be in [0, 1], got {p}")));
            }
        }
        if self.feature_map_set.is_empty() {
            return Err(Error::config("feature_map_set", "must not be empty"));
        }
        if self.feature_map_set.contains(&0) {
            return Err(Error::config("feature_map_set", "feature-map counts must be positive"));
        }
        let mut sorted = self.feature_map_set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.feature_map_set.len() {
            return Err(Error::config("feature_map_set", "values must be distinct"));
        }
        let [lo, hi] = self.init_depth_range;
        if lo < 1 {
            return Err(Error::config("init_depth_range", "lower bound must be at least 1"));
        }
        if lo > hi {
            return Err(Error::config("init_depth_range", format!("lower bound {lo} exceeds upper bound {hi}")));
        }
        self.mutation_weights.validate()
    }
}
