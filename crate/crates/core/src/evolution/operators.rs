use rand::Rng;

use super::config::{EvolutionConfig, MutationOp};
use super::selection::select_parents;
use super::{require_evaluated, Individual, Population};
use crate::error::Result;
use crate::genome::{Genome, LayerGene, PoolType, SkipGene};

/// Split-point resamples before crossover falls back to copying the parents.
pub const CROSSOVER_RESAMPLES: usize = 8;

pub fn random_skip_gene<R: Rng + ?Sized>(feature_maps: &[u32], rng: &mut R) -> SkipGene {
    let f1 = feature_maps[rng.gen_range(0..feature_maps.len())];
    let f2 = feature_maps[rng.gen_range(0..feature_maps.len())];
    SkipGene { f1, f2 }
}

pub fn random_pool_gene<R: Rng + ?Sized>(rng: &mut R) -> PoolType {
    if rng.gen::<f64>() < 0.5 {
        PoolType::Max
    } else {
        PoolType::Mean
    }
}

/// Skip layer when a uniform draw is below 0.5, pooling layer otherwise.
pub fn random_gene<R: Rng + ?Sized>(feature_maps: &[u32], rng: &mut R) -> LayerGene {
    if rng.gen::<f64>() < 0.5 {
        LayerGene::Skip(random_skip_gene(feature_maps, rng))
    } else {
        LayerGene::pool(random_pool_gene(rng))
    }
}

pub fn random_genome<R: Rng + ?Sized>(config: &EvolutionConfig, rng: &mut R) -> Genome {
    let [lo, hi] = config.init_depth_range;
    let len = rng.gen_range(lo..=hi);
    let layers = (0..len).map(|_| random_gene(&config.feature_map_set, rng)).collect();
    Genome::new(layers).expect("depth lower bound is at least 1")
}

pub fn initialize_population<R: Rng + ?Sized>(config: &EvolutionConfig, rng: &mut R) -> Result<Population> {
    config.validate()?;
    let individuals = (0..config.population_size).map(|_| Individual::new(random_genome(config, rng))).collect();
    Ok(Population::new(individuals, 0))
}

/// `head(a, cut_a) ++ tail(b, cut_b)` and `head(b, cut_b) ++ tail(a, cut_a)`.
pub fn splice(a: &[LayerGene], cut_a: usize, b: &[LayerGene], cut_b: usize) -> (Vec<LayerGene>, Vec<LayerGene>) {
    let mut first = a[..cut_a].to_vec();
    first.extend_from_slice(&b[cut_b..]);
    let mut second = b[..cut_b].to_vec();
    second.extend_from_slice(&a[cut_a..]);
    (first, second)
}

fn cut_point<R: Rng + ?Sized>(len: usize, rng: &mut R) -> usize {
    if len >= 2 {
        rng.gen_range(1..len)
    } else {
        rng.gen_range(0..=1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverOutcome {
    /// The draw was not below the crossover probability.
    Skipped,
    Spliced {
        cut1: usize,
        cut2: usize,
    },
    /// Every resample produced an empty offspring.
    FellBack,
}

/// Variable-length one-point crossover.
///
/// Draws `r` in [0, 1); when `r >= p_crossover` the parents are returned
/// unchanged. Otherwise each parent is cut at an index drawn uniformly from
/// `[1, len - 1]` (or `{0, 1}` for a single-gene parent) and the tails are
/// swapped. A draw that leaves either child empty is retried up to
/// [`CROSSOVER_RESAMPLES`] times before falling back to parent copies.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    p_crossover: f64,
    rng: &mut R,
) -> (Individual, Individual, CrossoverOutcome) {
    if rng.gen::<f64>() >= p_crossover {
        return (p1.clone(), p2.clone(), CrossoverOutcome::Skipped);
    }
    let (a, b) = (p1.genome().layers(), p2.genome().layers());
    for _ in 0..=CROSSOVER_RESAMPLES {
        let cut1 = cut_point(a.len(), rng);
        let cut2 = cut_point(b.len(), rng);
        let (o1, o2) = splice(a, cut1, b, cut2);
        if let (Some(g1), Some(g2)) = (Genome::new(o1), Genome::new(o2)) {
            return (Individual::new(g1), Individual::new(g2), CrossoverOutcome::Spliced { cut1, cut2 });
        }
    }
    (p1.clone(), p2.clone(), CrossoverOutcome::FellBack)
}

pub fn mutate<R: Rng + ?Sized>(ind: &Individual, config: &EvolutionConfig, rng: &mut R) -> Individual {
    mutate_traced(ind, config, rng).0
}

/// Mutation that also reports which operation ran, if any.
///
/// Draws `r` in [0, 1); nothing happens when `r >= p_mutation`. Otherwise a
/// position is drawn uniformly, then an operation by weight. Insertions go
/// before the chosen position. REMOVE on a single-gene genome is redrawn
/// among the other three operations.
pub fn mutate_traced<R: Rng + ?Sized>(
    ind: &Individual,
    config: &EvolutionConfig,
    rng: &mut R,
) -> (Individual, Option<MutationOp>) {
    if rng.gen::<f64>() >= config.p_mutation {
        return (ind.clone(), None);
    }
    let mut genome = ind.genome().clone();
    let pos = rng.gen_range(0..genome.len());
    let weights = &config.mutation_weights;
    let mut op = weights.draw(rng);
    if op == MutationOp::Remove && genome.len() == 1 {
        op = weights.draw_without_remove(rng);
    }
    let fms = &config.feature_map_set;
    match op {
        MutationOp::AddSkip => genome.insert(pos, LayerGene::Skip(random_skip_gene(fms, rng))),
        MutationOp::AddPool => genome.insert(pos, LayerGene::pool(random_pool_gene(rng))),
        MutationOp::Remove => {
            genome.remove(pos);
        }
        MutationOp::Alter => {
            let gene = genome.gene_mut(pos);
            *gene = match *gene {
                LayerGene::Skip(_) => LayerGene::Skip(random_skip_gene(fms, rng)),
                LayerGene::Pool(p) => LayerGene::pool(p.pool_type.flipped()),
            };
        }
    }
    let mut out = ind.clone();
    out.set_genome(genome);
    (out, Some(op))
}

/// Independent RNG streams used while producing one generation's offspring.
pub struct OffspringRngs<'a, R: Rng + ?Sized> {
    pub parent_selection: &'a mut R,
    pub crossover: &'a mut R,
    pub mutation: &'a mut R,
}

/// Produces `|pop|` offspring: parent pairs by binary tournament, crossover
/// per pair, then mutation of each child. An odd population size drops the
/// surplus child of the last pair.
pub fn generate_offspring<R: Rng + ?Sized>(
    pop: &Population,
    config: &EvolutionConfig,
    rngs: OffspringRngs<'_, R>,
) -> Result<Vec<Individual>> {
    require_evaluated(&pop.individuals)?;
    let target = pop.len();
    let mut children = Vec::with_capacity(target + 1);
    while children.len() < target {
        let (p1, p2) = select_parents(pop, rngs.parent_selection)?;
        let (o1, o2, _) = crossover(&p1, &p2, config.p_crossover, rngs.crossover);
        children.push(o1);
        children.push(o2);
    }
    children.truncate(target);
    Ok(children.iter().map(|child| mutate(child, config, rngs.mutation)).collect())
}
