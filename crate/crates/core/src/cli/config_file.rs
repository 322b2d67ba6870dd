use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arch::InputShape;
use crate::engine::EvaluationSettings;
use crate::error::{Error, Result};
use crate::evaluators::EvaluatorSpec;
use crate::evolution::{EvolutionConfig, MutationWeights};

/// JSON run configuration. Every key is optional; missing keys take the
/// defaults below, unknown keys are rejected.
///
/// ```json
/// {
///   "population_size": 20,
///   "max_generations": 20,
///   "p_crossover": 0.9,
///   "p_mutation": 0.2,
///   "feature_map_set": [64, 128, 256],
///   "init_depth_range": [1, 20],
///   "mutation_weights": {"add_skip": 0.7, "add_pool": 0.1, "remove": 0.1, "alter": 0.1},
///   "rng_seed": 0,
///   "evaluator": {"kind": "surrogate", "epochs": 350, "dataset": "cifar10"},
///   "worker_count": 1,
///   "out_dir": "cnnga-out",
///   "cache_path": null,
///   "penalty_fitness": 0.0,
///   "input_shape": {"height": 32, "width": 32, "channels": 3},
///   "num_classes": 10
/// }
/// ```
///
/// `cache_path` defaults to `<out_dir>/fitness.cache`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    pub population_size: usize,
    pub max_generations: u64,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub feature_map_set: Vec<u32>,
    pub init_depth_range: [usize; 2],
    pub mutation_weights: MutationWeights,
    pub rng_seed: u64,
    pub evaluator: EvaluatorSpec,
    pub worker_count: usize,
    pub out_dir: PathBuf,
    pub cache_path: Option<PathBuf>,
    pub penalty_fitness: f64,
    pub input_shape: InputShape,
    pub num_classes: u32,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        let eval = EvaluationSettings::default();
        RunConfigFile {
            population_size: evo.population_size,
            max_generations: evo.max_generations,
            p_crossover: evo.p_crossover,
            p_mutation: evo.p_mutation,
            feature_map_set: evo.feature_map_set,
            init_depth_range: evo.init_depth_range,
            mutation_weights: evo.mutation_weights,
            rng_seed: evo.rng_seed,
            evaluator: EvaluatorSpec::default(),
            worker_count: eval.worker_count,
            out_dir: PathBuf::from("cnnga-out"),
            cache_path: None,
            penalty_fitness: eval.penalty_fitness,
            input_shape: eval.input_shape,
            num_classes: eval.num_classes,
        }
    }
}

impl RunConfigFile {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            // serde names the offending key in unknown-field errors
            Error::Malformed { what: "config", path: path.to_path_buf(), message: e.to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::from_json(&text, path)
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.population_size,
            max_generations: self.max_generations,
            p_crossover: self.p_crossover,
            p_mutation: self.p_mutation,
            feature_map_set: self.feature_map_set.clone(),
            init_depth_range: self.init_depth_range,
            mutation_weights: self.mutation_weights,
            rng_seed: self.rng_seed,
        }
    }

    pub fn evaluation(&self) -> EvaluationSettings {
        EvaluationSettings {
            worker_count: self.worker_count,
            input_shape: self.input_shape,
            num_classes: self.num_classes,
            epochs: self.evaluator.epochs,
            penalty_fitness: self.penalty_fitness,
        }
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache_path.clone().unwrap_or_else(|| self.out_dir.join("fitness.cache"))
    }

    pub fn validate(&self) -> Result<()> {
        self.evolution().validate()?;
        self.evaluation().validate()?;
        self.evaluator.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let config = RunConfigFile::from_json("{}", Path::new("c.json")).unwrap();
        assert_eq!(config, RunConfigFile::default());
        assert_eq!(config.evolution(), EvolutionConfig::default());
        config.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfigFile::from_json(r#"{"populaton_size": 3}"#, Path::new("c.json")).unwrap_err();
        assert!(err.to_string().contains("populaton_size"));
        let err = RunConfigFile::from_json(r#"{"evaluator": {"kind": "surrogate", "gpu": 1}}"#, Path::new("c.json"))
            .unwrap_err();
        assert!(err.to_string().contains("gpu"));
    }

    #[test]
    fn out_of_range_probability_names_field() {
        let config = RunConfigFile::from_json(r#"{"p_crossover": 1.5}"#, Path::new("c.json")).unwrap();
        match config.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "p_crossover"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cache_defaults_into_out_dir() {
        let config = RunConfigFile::from_json(r#"{"out_dir": "runs/a"}"#, Path::new("c.json")).unwrap();
        assert_eq!(config.cache_path(), PathBuf::from("runs/a/fitness.cache"));
    }
}
