use super::{EvaluationJob, EvaluationResult, Evaluator};
use crate::error::Result;
use crate::genome::{Genome, LayerGene};

/// Closed-form fitness used in place of training.
///
/// With `n_s` skip genes, `n_p` pool genes and `q` the fraction of skip
/// genes whose second feature-map count is at least the first (0 without
/// skips):
///
/// ```text
/// 0.5 * exp(-(n_s - 8)^2 / 8) + 0.3 * exp(-(n_p - 3)^2 / 2) + 0.2 * q
/// ```
///
/// The maximum, 1.0, is reached exactly at `n_s = 8`, `n_p = 3`, `q = 1`.
/// Gene order does not matter.
pub fn surrogate_fitness(genome: &Genome) -> f64 {
    let mut skips = 0u32;
    let mut pools = 0u32;
    let mut widening = 0u32;
    for gene in genome.layers() {
        match gene {
            LayerGene::Skip(s) => {
                skips += 1;
                if s.f2 >= s.f1 {
                    widening += 1;
                }
            }
            LayerGene::Pool(_) => pools += 1,
        }
    }
    let q = if skips == 0 { 0.0 } else { widening as f64 / skips as f64 };
    let ds = skips as f64 - 8.0;
    let dp = pools as f64 - 3.0;
    let value = 0.5 * (-ds * ds / 8.0).exp() + 0.3 * (-dp * dp / 2.0).exp() + 0.2 * q;
    value.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SurrogateEvaluator;

impl Evaluator for SurrogateEvaluator {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        Ok(EvaluationResult::ok(job.job_id.clone(), surrogate_fitness(&job.genome)))
    }
}
