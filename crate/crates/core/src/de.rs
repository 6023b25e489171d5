//! DE/rand/1/bin differential evolution over an embedding population.
//!
//! Generations are synchronous: every trial vector is built from the
//! generation-start population and compared against its own target, so the
//! per-individual work can run in parallel. Each (generation, individual)
//! cell draws from its own seeded stream in the order: donors `r1, r2, r3`
//! (rejection until distinct), then `j_rand`, then one crossover draw per gene
//! in index order. Runs are therefore bit-identical for any thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, EmbeddingVector, Query};
use crate::rng;
use crate::scalar::Scalar;
use crate::similarity::{score_unchecked, SimilarityScore};
use crate::trace::{self, Algorithm, EngineConfig, RunTrace, Stagnation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    /// Difference-vector scaling factor, in `(0, 2]`.
    pub scaling_factor: f64,
    /// Per-gene probability of taking the mutant's gene, in `[0, 1]`.
    pub crossover_prob: f64,
    pub generations: usize,
    pub stagnation_patience: usize,
    pub stagnation_epsilon: f64,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            scaling_factor: 0.5,
            crossover_prob: 0.9,
            generations: 50,
            stagnation_patience: 10,
            stagnation_epsilon: 1e-9,
            seed: 0,
        }
    }
}

impl DeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, population_size: usize) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if population_size < 4 {
            return fail(format!(
                "DE/rand/1 needs a population of at least 4, got {population_size}"
            ));
        }
        if !(self.scaling_factor > 0.0 && self.scaling_factor <= 2.0) {
            return fail(format!(
                "scaling factor must be in (0, 2], got {}",
                self.scaling_factor
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return fail(format!(
                "crossover probability must be in [0, 1], got {}",
                self.crossover_prob
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
}

/// Draws three donors distinct from each other and from `i`.
pub fn draw_donors<R: Rng + ?Sized>(pop_size: usize, i: usize, rng: &mut R) -> Result<[usize; 3]> {
    if pop_size < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 individuals for rand/1 mutation, got {pop_size}"
        )));
    }
    let mut r = [0usize; 3];
    for k in 0..3 {
        r[k] = loop {
            let c = rng::index_below(rng, pop_size);
            if c != i && !r[..k].contains(&c) {
                break c;
            }
        };
    }
    debug_assert!(r[0] != r[1] && r[1] != r[2] && r[0] != r[2] && !r.contains(&i));
    Ok(r)
}

/// `base + beta * (plus - minus)`.
pub fn difference_mutant<T: Scalar>(
    base: &EmbeddingVector<T>,
    plus: &EmbeddingVector<T>,
    minus: &EmbeddingVector<T>,
    beta: f64,
) -> EmbeddingVector<T> {
    let beta = T::narrow(beta);
    let values = base
        .as_slice()
        .iter()
        .zip(plus.as_slice())
        .zip(minus.as_slice())
        .map(|((&x1, &x2), &x3)| x1 + beta * (x2 - x3))
        .collect();
    EmbeddingVector::from_values_unchecked(values)
}

/// rand/1 mutant for individual `i`: `x_r1 + beta * (x_r2 - x_r3)` with donors
/// drawn uniformly, pairwise distinct and distinct from `i`.
pub fn de_mutant<T: Scalar, R: Rng + ?Sized>(
    population: &[EmbeddingVector<T>],
    i: usize,
    beta: f64,
    rng: &mut R,
) -> Result<EmbeddingVector<T>> {
    if i >= population.len() {
        return Err(Error::InvalidArgument(format!(
            "index {i} outside population of {}",
            population.len()
        )));
    }
    let [r1, r2, r3] = draw_donors(population.len(), i, rng)?;
    Ok(difference_mutant(
        &population[r1],
        &population[r2],
        &population[r3],
        beta,
    ))
}

/// Binomial crossover: gene `j` comes from the mutant when a uniform draw is
/// below `p_r` or `j` is the forced index `j_rand`.
pub fn de_crossover_binomial<T: Scalar, R: Rng + ?Sized>(
    target: &EmbeddingVector<T>,
    mutant: &EmbeddingVector<T>,
    p_r: f64,
    rng: &mut R,
) -> Result<EmbeddingVector<T>> {
    let dim = target.dim();
    if mutant.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "target dim {dim} differs from mutant dim {}",
            mutant.dim()
        )));
    }
    let j_rand = rng::index_below(rng, dim);
    let values = target
        .as_slice()
        .iter()
        .zip(mutant.as_slice())
        .enumerate()
        .map(|(j, (&t, &m))| {
            let u: f64 = rng.gen();
            if u < p_r || j == j_rand {
                m
            } else {
                t
            }
        })
        .collect();
    Ok(EmbeddingVector::from_values_unchecked(values))
}

/// Greedy survivor rule: the offspring wins only on strict improvement.
pub fn de_select<'a, T: Scalar>(
    target: &'a EmbeddingVector<T>,
    offspring: &'a EmbeddingVector<T>,
    query: &Query<T>,
) -> &'a EmbeddingVector<T> {
    let q = &query.embedding;
    if !offspring.is_finite() {
        return target;
    }
    if score_unchecked(offspring, q).total_cmp(&score_unchecked(target, q)).is_lt() {
        offspring
    } else {
        target
    }
}

/// Runs DE with the corpus embeddings (ascending id order) as the initial
/// population. Every generation is recorded in the returned trace.
pub fn de_run<T: Scalar>(
    corpus: &Corpus<T>,
    query: &Query<T>,
    config: &DeConfig,
) -> Result<RunTrace<T>> {
    corpus.check_searchable(query.embedding.dim())?;
    config.validate(corpus.len())?;

    let target = &query.embedding;
    let docs = corpus.docs();
    let mut population: Vec<EmbeddingVector<T>> = corpus
        .indexes_by_id()
        .into_iter()
        .map(|i| docs[i].embedding.clone())
        .collect();
    let mut fitness: Vec<SimilarityScore> = population
        .par_iter()
        .map(|v| score_unchecked(v, target))
        .collect();

    let mut records = vec![trace::record(0, population.clone(), fitness.clone())];
    let mut stagnation = Stagnation::new(config.stagnation_patience, config.stagnation_epsilon);

    for generation in 1..=config.generations {
        let trials: Vec<Option<(EmbeddingVector<T>, SimilarityScore)>> = (0..population.len())
            .into_par_iter()
            .map(|i| -> Result<_> {
                let mut rng = rng::cell_stream(config.seed, generation, i);
                let mutant = de_mutant(&population, i, config.scaling_factor, &mut rng)?;
                let offspring =
                    de_crossover_binomial(&population[i], &mutant, config.crossover_prob, &mut rng)?;
                if !offspring.is_finite() {
                    return Ok(None);
                }
                let f = score_unchecked(&offspring, target);
                Ok(f.total_cmp(&fitness[i]).is_lt().then_some((offspring, f)))
            })
            .collect::<Result<_>>()?;

        for (i, trial) in trials.into_iter().enumerate() {
            if let Some((v, f)) = trial {
                population[i] = v;
                fitness[i] = f;
            }
        }

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
        algorithm: Algorithm::De,
        config: EngineConfig::De(config.clone()),
        seed: config.seed,
        population_size: population.len(),
        generations: records,
    })
}
