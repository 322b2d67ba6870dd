//! Fitness evaluators.
//!
//! The engine hands an [`Evaluator`] one [`EvaluationJob`] per unseen
//! architecture and gets one [`EvaluationResult`] back. Two backends ship
//! with the crate: [`SurrogateEvaluator`], a closed-form stand-in for
//! training, and [`ExternalEvaluator`], which talks to a trainer process
//! over newline-delimited JSON (see [`protocol`]).

mod external;
pub mod protocol;
mod surrogate;
pub mod worker;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use external::{ExternalEvaluator, Transport};
pub use surrogate::{surrogate_fitness, SurrogateEvaluator};

use crate::arch::ArchitectureIR;
use crate::error::{Error, Result};
use crate::genome::Genome;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationJob {
    pub job_id: String,
    pub genome: Genome,
    pub arch: ArchitectureIR,
    pub epochs: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub job_id: String,
    /// `None` marks a failed evaluation.
    pub fitness: Option<f64>,
    pub message: Option<String>,
}

impl EvaluationResult {
    pub fn ok(job_id: impl Into<String>, fitness: f64) -> Self {
        EvaluationResult { job_id: job_id.into(), fitness: Some(fitness), message: None }
    }

    pub fn error(job_id: impl Into<String>, message: impl Into<String>) -> Self {
        EvaluationResult { job_id: job_id.into(), fitness: None, message: Some(message.into()) }
    }

    pub fn is_ok(&self) -> bool {
        self.fitness.is_some()
    }
}

/// A fitness backend.
///
/// `evaluate` may be called from several threads at once. Failures that
/// only concern one job belong in an error-marked [`EvaluationResult`];
/// an `Err` means the backend itself is unusable and aborts the search.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        (**self).evaluate(job)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        (**self).evaluate(job)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for std::sync::Arc<E> {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        (**self).evaluate(job)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    #[default]
    Surrogate,
    External,
}

/// Which evaluator to use and how to reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluatorSpec {
    pub kind: EvaluatorKind,
    /// Program and arguments of a trainer speaking the line protocol on
    /// stdin/stdout.
    pub command: Option<Vec<String>>,
    /// `host:port` of a trainer speaking the line protocol over TCP.
    pub endpoint: Option<String>,
    pub epochs: u32,
    pub dataset: String,
    /// Per-job response timeout; unset waits indefinitely.
    pub timeout_secs: Option<f64>,
}

impl Default for EvaluatorSpec {
    fn default() -> Self {
        EvaluatorSpec {
            kind: EvaluatorKind::Surrogate,
            command: None,
            endpoint: None,
            epochs: 350,
            dataset: "cifar10".to_string(),
            timeout_secs: None,
        }
    }
}

impl EvaluatorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("evaluator.epochs", "must be at least 1"));
        }
        if let Some(t) = self.timeout_secs {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config("evaluator.timeout_secs", format!("must be positive, got {t}")));
            }
        }
        if self.kind == EvaluatorKind::External {
            self.transport()?;
        }
        Ok(())
    }

    fn transport(&self) -> Result<Transport> {
        let command = self.command.as_ref().filter(|c| !c.is_empty() && !c[0].is_empty());
        let endpoint = self.endpoint.as_ref().filter(|e| !e.trim().is_empty());
        match (command, endpoint) {
            (Some(cmd), None) => Ok(Transport::Command(cmd.clone())),
            (None, Some(addr)) => Ok(Transport::Tcp(addr.trim().to_string())),
            (Some(_), Some(_)) => Err(Error::config("evaluator", "set either `command` or `endpoint`, not both")),
            (None, None) => {
                Err(Error::config("evaluator.command", "external evaluator needs a non-empty `command` or `endpoint`"))
            }
        }
    }

    pub fn build(&self) -> Result<Box<dyn Evaluator>> {
        self.validate()?;
        Ok(match self.kind {
            EvaluatorKind::Surrogate => Box::new(SurrogateEvaluator),
            EvaluatorKind::External => {
                let mut ext = ExternalEvaluator::new(self.transport()?, self.dataset.clone());
                if let Some(t) = self.timeout_secs {
                    ext = ext.with_timeout(Duration::from_secs_f64(t));
                }
                Box::new(ext)
            }
        })
    }
}
