//! Cauchy hill climbing around an incumbent solution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::operators::{cauchy, Bounds};
use crate::{BoundedObjective, Error, Result};

/// Schedule for the periodic local search on the reef's best coral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSearchParams {
    /// Cauchy step multiplier, in objective units.
    pub eta: f64,
    /// Share of the evaluations spent since the previous application that the
    /// next application may use.
    pub budget_fraction: f64,
}

impl Default for LocalSearchParams {
    fn default() -> Self {
        Self { eta: 10.0, budget_fraction: 0.05 }
    }
}

impl LocalSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::config("local search eta must be positive"));
        }
        if !(0.0..1.0).contains(&self.budget_fraction) {
            return Err(Error::config("local search budget_fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Outcome of [`cauchy_local_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchResult {
    pub genome: Vec<f64>,
    pub fitness: f64,
    pub evaluations: u64,
    pub improvements: u64,
}

/// Mutates the incumbent with Cauchy steps of scale `eta`, keeping only
/// strict improvements, for `budget` evaluations.
///
/// The returned fitness is never worse than `fitness`.
pub fn cauchy_local_search<R: Rng + ?Sized>(
    genome: &[f64],
    fitness: f64,
    objective: &BoundedObjective,
    eta: f64,
    budget: u64,
    rng: &mut R,
) -> LocalSearchResult {
    let bounds = Bounds::new(objective.lower(), objective.upper());
    let mut best = genome.to_vec();
    let mut best_fitness = fitness;
    let mut improvements = 0;
    for _ in 0..budget {
        let candidate = cauchy(&best, eta, 1.0, bounds, rng);
        let f = objective.evaluate(&candidate);
        if f < best_fitness {
            best = candidate;
            best_fitness = f;
            improvements += 1;
        }
    }
    LocalSearchResult { genome: best, fitness: best_fitness, evaluations: budget, improvements }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::Benchmark;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn never_worse_and_counts_evaluations() {
        let obj = Benchmark::F1.objective(5, -10.0, 10.0).unwrap();
        let x = vec![3.0; 5];
        let f = obj.evaluate(&x);
        let out = cauchy_local_search(&x, f, &obj, 0.5, 200, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(out.fitness <= f);
        assert!(out.improvements > 0);
        assert_eq!(out.evaluations, 200);
        assert_eq!(obj.evaluations(), 201);
        assert_eq!(obj.evaluate(&out.genome), out.fitness);
    }

    #[test]
    fn optimum_is_returned_unchanged() {
        let obj = Benchmark::F1.objective(3, -10.0, 10.0).unwrap();
        let x = vec![0.0; 3];
        let out = cauchy_local_search(&x, 0.0, &obj, 1.0, 50, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out.genome, x);
        assert_eq!(out.improvements, 0);
    }

    #[test]
    fn deterministic_under_seed() {
        let obj = Benchmark::F9.objective(4, -5.0, 5.0).unwrap();
        let x = vec![1.3, -2.2, 0.4, 3.1];
        let f = obj.evaluate(&x);
        let a = cauchy_local_search(&x, f, &obj, 0.3, 100, &mut ChaCha8Rng::seed_from_u64(8));
        let b = cauchy_local_search(&x, f, &obj, 0.3, 100, &mut ChaCha8Rng::seed_from_u64(8));
        assert_eq!(a, b);
    }
}
