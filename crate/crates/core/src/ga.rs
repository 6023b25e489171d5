//! Steady-state genetic algorithm over an embedding population.
//!
//! Each generation keeps the `elitism_count` best individuals unchanged, takes
//! the `mating_pool_size` best as parents, and refills the population with
//! single-point crossover children that receive random uniform mutation.
//!
//! Random draws happen in a fixed order from one stream seeded by
//! [`GaConfig::seed`]: selection draws nothing; each mating pair draws one
//! cut point; each kept child then draws its mutation positions followed by
//! one perturbation per position.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, EmbeddingVector, Query};
use crate::rng::{self, EngineRng};
use crate::scalar::Scalar;
use crate::similarity::{score_unchecked, SimilarityScore};
use crate::trace::{self, Algorithm, EngineConfig, RunTrace, Stagnation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    #[default]
    SinglePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub mating_pool_size: usize,
    pub elitism_count: usize,
    pub crossover: Crossover,
    /// Fraction of genes perturbed in each child, in `(0, 1]`.
    pub mutation_fraction: f64,
    /// Half-width of the uniform perturbation.
    pub mutation_range: f64,
    pub generations: usize,
    pub stagnation_patience: usize,
    pub stagnation_epsilon: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            mating_pool_size: 100,
            elitism_count: 3,
            crossover: Crossover::SinglePoint,
            mutation_fraction: 0.10,
            mutation_range: 0.10,
            generations: 50,
            stagnation_patience: 10,
            stagnation_epsilon: 1e-9,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, population_size: usize) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.mating_pool_size < 2 {
            return fail(format!(
                "mating pool size must be at least 2, got {}",
                self.mating_pool_size
            ));
        }
        if self.mating_pool_size > population_size {
            return fail(format!(
                "population of {population_size} is smaller than the mating pool of {}",
                self.mating_pool_size
            ));
        }
        if self.elitism_count > population_size {
            return fail(format!(
                "elitism count {} exceeds population size {population_size}",
                self.elitism_count
            ));
        }
        if !(self.mutation_fraction > 0.0 && self.mutation_fraction <= 1.0) {
            return fail(format!(
                "mutation fraction must be in (0, 1], got {}",
                self.mutation_fraction
            ));
        }
        if !(self.mutation_range >= 0.0 && self.mutation_range.is_finite()) {
            return fail(format!(
                "mutation range must be finite and non-negative, got {}",
                self.mutation_range
            ));
        }
        if self.generations == 0 || self.stagnation_patience == 0 {
            return fail("generations and stagnation patience must be positive".into());
        }
        if self.stagnation_epsilon.is_nan() || self.stagnation_epsilon < 0.0 {
            return fail("stagnation epsilon must be non-negative".into());
        }
        Ok(())
    }

    /// Number of genes touched by one mutation at dimension `dim`.
    pub fn mutated_gene_count(&self, dim: usize) -> usize {
        // The small slack keeps products such as 0.1 * 30 from rounding up.
        let raw = (self.mutation_fraction * dim as f64 - 1e-9).ceil();
        (raw.max(1.0) as usize).min(dim)
    }
}

/// Indexes of the `k` fittest individuals, best first, ties by index.
pub fn select_steady_state(fitness: &[SimilarityScore], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > fitness.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {k} parents from a population of {}",
            fitness.len()
        )));
    }
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    let cmp = |a: &usize, b: &usize| fitness[*a].total_cmp(&fitness[*b]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    Ok(idx)
}

/// Children of splicing `p1` and `p2` at `cut`: `p1[..cut] ++ p2[cut..]` and
/// `p2[..cut] ++ p1[cut..]`.
pub fn splice_at<T: Scalar>(
    p1: &EmbeddingVector<T>,
    p2: &EmbeddingVector<T>,
    cut: usize,
) -> Result<(EmbeddingVector<T>, EmbeddingVector<T>)> {
    let dim = p1.dim();
    if p2.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "parent dimensions differ: {dim} vs {}",
            p2.dim()
        )));
    }
    if cut == 0 || cut >= dim {
        return Err(Error::InvalidArgument(format!(
            "cut point {cut} outside [1, {}]",
            dim.saturating_sub(1)
        )));
    }
    let (a, b) = (p1.as_slice(), p2.as_slice());
    let c1 = a[..cut].iter().chain(&b[cut..]).copied().collect();
    let c2 = b[..cut].iter().chain(&a[cut..]).copied().collect();
    Ok((
        EmbeddingVector::from_values_unchecked(c1),
        EmbeddingVector::from_values_unchecked(c2),
    ))
}

/// Single-point crossover with a cut drawn uniformly from `[1, dim - 1]`.
pub fn crossover_single_point<T: Scalar, R: Rng + ?Sized>(
    p1: &EmbeddingVector<T>,
    p2: &EmbeddingVector<T>,
    rng: &mut R,
) -> Result<(EmbeddingVector<T>, EmbeddingVector<T>)> {
    if p1.dim() < 2 || p2.dim() != p1.dim() {
        return Err(Error::InvalidArgument(format!(
            "single-point crossover needs equal dims >= 2, got {} and {}",
            p1.dim(),
            p2.dim()
        )));
    }
    let cut = rng::index_in(rng, 1, p1.dim());
    splice_at(p1, p2, cut)
}

/// Adds an independent `U[-range, range]` draw to `ceil(fraction * dim)`
/// distinct, uniformly chosen genes.
pub fn mutate_random<T: Scalar, R: Rng + ?Sized>(
    child: EmbeddingVector<T>,
    config: &GaConfig,
    rng: &mut R,
) -> EmbeddingVector<T> {
    let range = config.mutation_range;
    if range == 0.0 {
        return child;
    }
    let dim = child.dim();
    let count = config.mutated_gene_count(dim);
    let positions = rand::seq::index::sample(rng, dim, count);
    let mut values = child.into_vec();
    for pos in positions.iter() {
        let delta: f64 = rng.gen_range(-range..=range);
        values[pos] = values[pos] + T::narrow(delta);
    }
    EmbeddingVector::from_values_unchecked(values)
}

fn evaluate<T: Scalar>(
    population: &[EmbeddingVector<T>],
    query: &EmbeddingVector<T>,
) -> Vec<SimilarityScore> {
    population
        .par_iter()
        .map(|v| score_unchecked(v, query))
        .collect()
}

/// Runs the GA with the corpus embeddings as the initial population.
///
/// The population is laid out in ascending document-id order. Every
/// generation (including generation 0) is recorded in the returned trace.
pub fn ga_run<T: Scalar>(
    corpus: &Corpus<T>,
    query: &Query<T>,
    config: &GaConfig,
) -> Result<RunTrace<T>> {
    corpus.check_searchable(query.embedding.dim())?;
    config.validate(corpus.len())?;
    if corpus.dim() < 2 {
        return Err(Error::InvalidConfig(
            "single-point crossover needs dim >= 2".into(),
        ));
    }

    let target = &query.embedding;
    let pop_size = corpus.len();
    let docs = corpus.docs();
    let mut population: Vec<EmbeddingVector<T>> = corpus
        .indexes_by_id()
        .into_iter()
        .map(|i| docs[i].embedding.clone())
        .collect();
    let mut fitness = evaluate(&population, target);

    let mut rng: EngineRng = rng::seeded(config.seed);
    let mut records = vec![trace::record(0, population.clone(), fitness.clone())];
    let mut stagnation = Stagnation::new(config.stagnation_patience, config.stagnation_epsilon);
    let n_children = pop_size - config.elitism_count;

    for generation in 1..=config.generations {
        let pool = select_steady_state(&fitness, config.mating_pool_size)?;
        let mut next: Vec<EmbeddingVector<T>> = Vec::with_capacity(pop_size);
        if config.elitism_count > 0 {
            for i in select_steady_state(&fitness, config.elitism_count)? {
                next.push(population[i].clone());
            }
        }

        let mut pair = 0usize;
        let k = pool.len();
        while next.len() - config.elitism_count < n_children {
            let a = &population[pool[(2 * pair) % k]];
            let b = &population[pool[(2 * pair + 1) % k]];
            pair += 1;
            let (c1, c2) = crossover_single_point(a, b, &mut rng)?;
            next.push(mutate_random(c1, config, &mut rng));
            if next.len() - config.elitism_count < n_children {
                next.push(mutate_random(c2, config, &mut rng));
            }
        }

        population = next;
        fitness = evaluate(&population, target);
        let rec = trace::record(generation, population.clone(), fitness.clone());
        let previous = records[records.len() - 1].champion_fitness;
        let stop = stagnation.observe(previous, rec.champion_fitness);
        records.push(rec);
        if stop {
            break;
        }
    }

    if let Some(last) = records.last_mut() {
        last.is_final = true;
    }
    Ok(RunTrace {
        algorithm: Algorithm::Ga,
        config: EngineConfig::Ga(config.clone()),
        seed: config.seed,
        population_size: pop_size,
        generations: records,
    })
}
