//! Newline-delimited JSON messages exchanged with trainer processes.
//!
//! One UTF-8 JSON object per line, one response per request:
//!
//! ```text
//! -> {"job_id":"j-3","genome":"S:64:128-P:max","arch":{...},"epochs":2,"seed":17,"dataset":"cifar10"}
//! <- {"job_id":"j-3","status":"ok","fitness":0.91}
//! <- {"job_id":"j-3","status":"error","message":"CUDA out of memory"}
//! ```

use serde::{Deserialize, Serialize};

use super::{EvaluationJob, EvaluationResult};
use crate::arch::ArchitectureIR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub job_id: String,
    pub genome: String,
    pub arch: ArchitectureIR,
    pub epochs: u32,
    pub seed: u64,
    pub dataset: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub job_id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl WireResponse {
    pub fn ok(job_id: impl Into<String>, fitness: f64) -> Self {
        WireResponse { job_id: job_id.into(), status: Status::Ok, fitness: Some(fitness), message: None }
    }

    pub fn error(job_id: impl Into<String>, message: impl Into<String>) -> Self {
        WireResponse { job_id: job_id.into(), status: Status::Error, fitness: None, message: Some(message.into()) }
    }
}

impl WireRequest {
    pub fn from_job(job: &EvaluationJob, dataset: &str) -> Self {
        WireRequest {
            job_id: job.job_id.clone(),
            genome: job.genome.to_string(),
            arch: job.arch.clone(),
            epochs: job.epochs,
            seed: job.seed,
            dataset: dataset.to_string(),
        }
    }

    /// Single line, newline-terminated.
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("request serializes");
        line.push('\n');
        line
    }
}

/// Maps one response line to a result for `job_id`. Anything unexpected
/// (bad JSON, wrong job id, `ok` without a usable fitness) becomes an
/// error-marked result carrying the reason.
pub fn parse_response(line: &str, job_id: &str) -> EvaluationResult {
    let response: WireResponse = match serde_json::from_str(line.trim()) {
        Ok(r) => r,
        Err(e) => return EvaluationResult::error(job_id, format!("malformed response: {e}")),
    };
    if response.job_id != job_id {
        return EvaluationResult::error(
            job_id,
            format!("response for job `{}` while waiting for `{job_id}`", response.job_id),
        );
    }
    match (response.status, response.fitness) {
        (Status::Ok, Some(f)) if (0.0..=1.0).contains(&f) => {
            EvaluationResult { job_id: job_id.to_string(), fitness: Some(f), message: response.message }
        }
        (Status::Ok, Some(f)) => EvaluationResult::error(job_id, format!("fitness {f} outside [0, 1]")),
        (Status::Ok, None) => EvaluationResult::error(job_id, "status ok without fitness"),
        (Status::Error, _) => {
            EvaluationResult::error(job_id, response.message.unwrap_or_else(|| "worker reported an error".to_string()))
        }
    }
}
