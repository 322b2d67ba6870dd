//! Checkpoint files.
//!
//! A checkpoint is taken between engine steps and holds everything needed
//! to continue the run bit-for-bit: the current population with fitness,
//! the history so far, the configuration, and the RNG state. Because every
//! generation draws from its own seeded streams (see [`crate::rng`]), the
//! RNG state is just the run seed; the generation index selects the streams.
//!
//! ```json
//! {
//!   "version": 1,
//!   "generation": 10,
//!   "population": {"individuals": [{"genome": "S:64:128-P:max", "fitness": 0.61}], "generation": 10},
//!   "rng": {"algorithm": "chacha8-stream-per-generation", "seed": 7},
//!   "config": {...},
//!   "settings": {...},
//!   "cache_path": "out/fitness.cache",
//!   "history": {"records": [...]},
//!   "next_job": 131,
//!   "evaluator": {"kind": "surrogate", ...}
//! }
//! ```
//!
//! The fitness cache itself lives in the file named by `cache_path`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::history::RunHistory;
use super::pool::EvaluationSettings;
use crate::error::{Error, Result};
use crate::evaluators::EvaluatorSpec;
use crate::evolution::{EvolutionConfig, Population};
use crate::fsutil::write_atomic;

pub const CHECKPOINT_VERSION: u32 = 1;

const RNG_ALGORITHM: &str = "chacha8-stream-per-generation";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub algorithm: String,
    pub seed: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { algorithm: RNG_ALGORITHM.to_string(), seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub generation: u64,
    pub population: Population,
    pub rng: RngState,
    pub config: EvolutionConfig,
    pub settings: EvaluationSettings,
    pub cache_path: Option<PathBuf>,
    pub history: RunHistory,
    pub next_job: u64,
    /// How the evaluator was configured, when known.
    #[serde(default)]
    pub evaluator: Option<EvaluatorSpec>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

impl Checkpoint {
    pub fn check_version(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion { found: self.version, expected: CHECKPOINT_VERSION });
        }
        if self.rng.algorithm != RNG_ALGORITHM {
            return Err(Error::config(
                "rng.algorithm",
                format!("unsupported `{}`, expected `{RNG_ALGORITHM}`", self.rng.algorithm),
            ));
        }
        Ok(())
    }

    /// Whether the run this checkpoint belongs to has completed.
    pub fn is_finished(&self) -> bool {
        self.history.len() as u64 > self.config.max_generations
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let malformed = |message: String| Error::Malformed { what: "checkpoint", path: path.to_path_buf(), message };
        // the version is checked first so older layouts get a clear message
        let probe: VersionProbe = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        if probe.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion { found: probe.version, expected: CHECKPOINT_VERSION });
        }
        let checkpoint: Checkpoint = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        checkpoint.check_version()?;
        if checkpoint.generation != checkpoint.population.generation {
            return Err(malformed("generation does not match population.generation".into()));
        }
        Ok(checkpoint)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(format!("reading checkpoint {}", path.display()), e))?;
        Self::from_json(&text, path)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

pub fn checkpoint(state: &Checkpoint, path: &Path) -> Result<()> {
    state.store(path)
}

pub fn resume(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, FitnessCache};
    use crate::evaluators::SurrogateEvaluator;

    fn engine() -> Engine<SurrogateEvaluator> {
        let config = EvolutionConfig { population_size: 6, max_generations: 4, rng_seed: 99, ..Default::default() };
        Engine::new(config, EvaluationSettings::default(), SurrogateEvaluator, FitnessCache::new()).unwrap()
    }

    #[test]
    fn round_trips_generation_and_population() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        let mut e = engine();
        e.run_until(2).unwrap();
        checkpoint(&e.checkpoint(), &path).unwrap();
        let back = resume(&path).unwrap();
        assert_eq!(back, e.checkpoint());
        assert_eq!(back.generation, 2);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut cp = engine().checkpoint();
        cp.version = 7;
        let text = cp.to_json();
        match Checkpoint::from_json(&text, Path::new("cp.json")) {
            Err(Error::CheckpointVersion { found: 7, expected: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Checkpoint::from_json(r#"{"version": 2}"#, Path::new("cp.json")),
            Err(Error::CheckpointVersion { found: 2, .. })
        ));
    }

    #[test]
    fn missing_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(resume(&dir.path().join("nope.json")), Err(Error::Io { .. })));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(Checkpoint::from_json("{", Path::new("cp.json")), Err(Error::Malformed { .. })));
    }
}
