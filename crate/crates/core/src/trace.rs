//! Run history shared by the GA and DE engines.

use serde::{Deserialize, Serialize};

use crate::de::DeConfig;
use crate::ga::GaConfig;
use crate::model::EmbeddingVector;
use crate::scalar::Scalar;
use crate::similarity::SimilarityScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Baseline,
    Ga,
    De,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Baseline => "baseline",
            Algorithm::Ga => "ga",
            Algorithm::De => "de",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Algorithm::Baseline),
            "ga" => Ok(Algorithm::Ga),
            "de" => Ok(Algorithm::De),
            other => Err(format!("unknown algorithm {other:?} (expected baseline, ga or de)")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Configuration snapshot stored with a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum EngineConfig {
    Baseline,
    Ga(GaConfig),
    De(DeConfig),
}

/// State of the population after one generation (generation 0 is the
/// initial population).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GenerationRecord<T: Scalar> {
    pub generation: usize,
    pub champion: EmbeddingVector<T>,
    pub champion_fitness: SimilarityScore,
    #[serde(rename = "final")]
    pub is_final: bool,
    /// Full population in index order.
    pub population: Vec<EmbeddingVector<T>>,
    /// Fitness of each member of `population`.
    pub fitness: Vec<SimilarityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunTrace<T: Scalar> {
    pub algorithm: Algorithm,
    pub config: EngineConfig,
    pub seed: u64,
    pub population_size: usize,
    pub generations: Vec<GenerationRecord<T>>,
}

impl<T: Scalar> RunTrace<T> {
    pub fn champion_fitnesses(&self) -> Vec<SimilarityScore> {
        self.generations.iter().map(|g| g.champion_fitness).collect()
    }

    pub fn final_record(&self) -> Option<&GenerationRecord<T>> {
        self.generations.last()
    }

    pub fn final_champion_fitness(&self) -> Option<SimilarityScore> {
        self.final_record().map(|g| g.champion_fitness)
    }

    /// Broken trace invariants, if any.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, g) in self.generations.iter().enumerate() {
            if g.generation != i {
                out.push(format!("record {i} has generation index {}", g.generation));
            }
            if g.population.len() != self.population_size || g.fitness.len() != self.population_size
            {
                out.push(format!("generation {i} has wrong population size"));
            }
            if g.is_final != (i + 1 == self.generations.len()) {
                out.push(format!("generation {i} has wrong final flag"));
            }
        }
        for w in self.generations.windows(2) {
            if w[1].champion_fitness > w[0].champion_fitness {
                out.push(format!(
                    "champion fitness increases from generation {} to {}",
                    w[0].generation, w[1].generation
                ));
            }
        }
        out
    }
}

/// Index of the best (lowest) fitness, earliest index on ties.
pub(crate) fn argmin(fitness: &[SimilarityScore]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate().skip(1) {
        if f.total_cmp(&fitness[best]).is_lt() {
            best = i;
        }
    }
    best
}

/// Consecutive-generation stagnation counter.
#[derive(Debug)]
pub(crate) struct Stagnation {
    patience: usize,
    epsilon: f64,
    idle: usize,
}

impl Stagnation {
    pub(crate) fn new(patience: usize, epsilon: f64) -> Self {
        Self {
            patience,
            epsilon,
            idle: 0,
        }
    }

    /// Records one generation's champion change; true once the run should stop.
    pub(crate) fn observe(&mut self, previous: SimilarityScore, current: SimilarityScore) -> bool {
        let improvement = previous.value() - current.value();
        if improvement < self.epsilon || improvement.is_nan() {
            self.idle += 1;
        } else {
            self.idle = 0;
        }
        self.idle >= self.patience
    }
}

pub(crate) fn record<T: Scalar>(
    generation: usize,
    population: Vec<EmbeddingVector<T>>,
    fitness: Vec<SimilarityScore>,
) -> GenerationRecord<T> {
    let best = argmin(&fitness);
    GenerationRecord {
        generation,
        champion: population[best].clone(),
        champion_fitness: fitness[best],
        is_final: false,
        population,
        fitness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> SimilarityScore {
        SimilarityScore::new(v).unwrap()
    }

    #[test]
    fn argmin_prefers_earliest() {
        assert_eq!(argmin(&[s(0.3), s(0.1), s(0.1)]), 1);
        assert_eq!(argmin(&[s(0.0)]), 0);
    }

    #[test]
    fn stagnation_needs_consecutive_idle_generations() {
        let mut st = Stagnation::new(2, 1e-9);
        assert!(!st.observe(s(0.5), s(0.5)));
        assert!(!st.observe(s(0.5), s(0.4)));
        assert!(!st.observe(s(0.4), s(0.4)));
        assert!(st.observe(s(0.4), s(0.4)));
    }

    #[test]
    fn algorithm_parses() {
        assert_eq!("de".parse::<Algorithm>().unwrap(), Algorithm::De);
        assert!("pso".parse::<Algorithm>().is_err());
    }
}
