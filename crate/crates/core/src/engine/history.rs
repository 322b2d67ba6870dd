use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::genome::Identifier;

/// Statistics of one generation's population.
///
/// `cache_hits` counts individuals resolved without a new evaluation;
/// `cache_misses` counts distinct identifiers that had to be evaluated (or
/// penalised as invalid) during that generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_identifier: Identifier,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub records: Vec<GenerationRecord>,
}

pub const HISTORY_CSV_HEADER: &str = "generation,best_fitness,mean_fitness,best_identifier,cache_hits,cache_misses";

impl RunHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: GenerationRecord) {
        self.records.push(record);
    }

    pub fn best_fitness_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_fitness).collect()
    }

    pub fn is_best_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness)
    }

    /// History as CSV, one row per generation. Wall-clock time is left out so
    /// that identical runs produce identical bytes; see
    /// [`timings_csv`](Self::timings_csv).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(HISTORY_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.generation, r.best_fitness, r.mean_fitness, r.best_identifier, r.cache_hits, r.cache_misses
            );
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("generation,duration_ms\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{}", r.generation, r.duration_ms);
        }
        out
    }

    /// Equality ignoring wall-clock durations.
    pub fn same_trajectory(&self, other: &RunHistory) -> bool {
        self.to_csv() == other.to_csv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;

    fn record(generation: u64, best: f64, ms: u64) -> GenerationRecord {
        GenerationRecord {
            generation,
            best_fitness: best,
            mean_fitness: best / 2.0,
            best_identifier: "P:max".parse::<Genome>().unwrap().identifier(),
            cache_hits: 1,
            cache_misses: 2,
            duration_ms: ms,
        }
    }

    #[test]
    fn csv_layout() {
        let history = RunHistory { records: vec![record(0, 0.5, 3), record(1, 0.75, 9)] };
        let csv = history.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], HISTORY_CSV_HEADER);
        assert!(lines[2].starts_with("1,0.75,0.375,"));
        assert!(lines[2].ends_with(",1,2"));
    }

    #[test]
    fn durations_do_not_affect_trajectory() {
        let a = RunHistory { records: vec![record(0, 0.5, 3)] };
        let b = RunHistory { records: vec![record(0, 0.5, 700)] };
        assert!(a.same_trajectory(&b));
        assert_ne!(a, b);
    }

    #[test]
    fn monotonicity() {
        let up = RunHistory { records: vec![record(0, 0.2, 0), record(1, 0.2, 0), record(2, 0.4, 0)] };
        assert!(up.is_best_monotone());
        let down = RunHistory { records: vec![record(0, 0.5, 0), record(1, 0.4, 0)] };
        assert!(!down.is_best_monotone());
    }
}
