use std::cmp::Ordering;

use rand::Rng;

use super::{cmp_fitness, require_evaluated, Individual, Population};
use crate::error::Result;

/// Redraws of the second parent before a duplicate is accepted.
pub const PARENT_RETRIES: usize = 32;

/// Binary tournament over a slice, returning the winner's index.
///
/// RNG use, in order: two `gen_range(0..n)` draws for the contestants; if
/// they are different slots with equal fitness, one `gen_bool(0.5)` picks
/// the first contestant on `true`.
pub fn binary_tournament_index<R: Rng + ?Sized>(individuals: &[Individual], rng: &mut R) -> usize {
    let n = individuals.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    match cmp_fitness(individuals[a].fitness(), individuals[b].fitness()) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal if a == b => a,
        Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

pub fn binary_tournament<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> Result<Individual> {
    require_evaluated(&pop.individuals)?;
    Ok(pop.individuals[binary_tournament_index(&pop.individuals, rng)].clone())
}

/// Two tournament winners whose identifiers differ. The second parent is
/// redrawn up to [`PARENT_RETRIES`] times; after that a duplicate is
/// returned, which only happens in a (nearly) converged population.
pub fn select_parents<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> Result<(Individual, Individual)> {
    require_evaluated(&pop.individuals)?;
    let inds = &pop.individuals;
    let first = binary_tournament_index(inds, rng);
    let mut second = binary_tournament_index(inds, rng);
    let mut retries = 0;
    while inds[second].id() == inds[first].id() && retries < PARENT_RETRIES {
        second = binary_tournament_index(inds, rng);
        retries += 1;
    }
    Ok((inds[first].clone(), inds[second].clone()))
}

/// Index of the fittest individual; equal fitness goes to the smaller
/// identifier, then to the earlier position.
pub fn best_index(individuals: &[Individual]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, ind) in individuals.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(j) => {
                let other = &individuals[j];
                match cmp_fitness(ind.fitness(), other.fitness()) {
                    Ordering::Greater => Some(i),
                    Ordering::Equal if ind.id() < other.id() => Some(i),
                    _ => Some(j),
                }
            }
        };
    }
    best
}

/// Index of the least fit individual; the earliest position wins ties.
pub fn worst_index(individuals: &[Individual]) -> Option<usize> {
    let mut worst: Option<usize> = None;
    for (i, ind) in individuals.iter().enumerate() {
        worst = match worst {
            Some(j) if cmp_fitness(ind.fitness(), individuals[j].fitness()) != Ordering::Less => Some(j),
            _ => Some(i),
        };
    }
    worst
}

/// Chooses the next generation from parents and offspring.
///
/// The pool is `parents ++ offspring`. `|parents|` binary tournaments fill
/// the new population in draw order. Then the best of the pool (see
/// [`best_index`]) is looked up by identifier; if absent it replaces the
/// worst selected individual (see [`worst_index`]).
pub fn environmental_selection<R: Rng + ?Sized>(
    parents: &Population,
    offspring: &Population,
    rng: &mut R,
) -> Result<Population> {
    require_evaluated(&parents.individuals)?;
    if !offspring.is_empty() {
        require_evaluated(&offspring.individuals)?;
    }
    let pool: Vec<Individual> = parents.individuals.iter().chain(offspring.individuals.iter()).cloned().collect();

    let mut next: Vec<Individual> =
        (0..parents.len()).map(|_| pool[binary_tournament_index(&pool, rng)].clone()).collect();

    let elite = &pool[best_index(&pool).expect("pool is non-empty")];
    if !next.iter().any(|ind| ind.id() == elite.id()) {
        let worst = worst_index(&next).expect("selection is non-empty");
        next[worst] = elite.clone();
    }
    Ok(Population::new(next, parents.generation + 1))
}
