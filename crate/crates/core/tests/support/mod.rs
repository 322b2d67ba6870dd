#![allow(dead_code)]

pub mod sha224;

use std::sync::Mutex;

use cnnga::evaluators::surrogate_fitness;
use cnnga::{EvaluationJob, EvaluationResult, Evaluator, Genome, Individual, Result};
use proptest::prelude::*;

/// Surrogate evaluator that records every genome it is asked to score.
#[derive(Default)]
pub struct Recording {
    pub calls: Mutex<Vec<String>>,
}

impl Recording {
    pub fn count(&self) -> usize {
        self.calls.lock().unwrap().len()
    }
}

impl Evaluator for Recording {
    fn evaluate(&self, job: &EvaluationJob) -> Result<EvaluationResult> {
        self.calls.lock().unwrap().push(job.genome.to_string());
        Ok(EvaluationResult::ok(job.job_id.clone(), surrogate_fitness(&job.genome)))
    }
}

pub fn genome(text: &str) -> Genome {
    text.parse().unwrap()
}

pub fn individual(text: &str, fitness: f64) -> Individual {
    Individual::with_fitness(genome(text), fitness)
}

pub fn gene_text() -> impl Strategy<Value = String> {
    let fm = prop::sample::select(vec![64u32, 128, 256]);
    prop_oneof![
        (fm.clone(), fm).prop_map(|(a, b)| format!("S:{a}:{b}")),
        prop::sample::select(vec!["P:max".to_string(), "P:mean".to_string()]),
    ]
}

/// Genomes of 1..=max_len genes; pool counts are unconstrained.
pub fn arb_genome(max_len: usize) -> impl Strategy<Value = Genome> {
    prop::collection::vec(gene_text(), 1..=max_len).prop_map(|tokens| genome(&tokens.join("-")))
}
