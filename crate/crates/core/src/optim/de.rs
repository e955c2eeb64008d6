//! Differential evolution, best1bin strategy.
//!
//! Each generation builds one trial per individual from
//! `best + F * (r1 - r2)`, applies binomial crossover, and evaluates all
//! trials in a single batch call. Replacement is greedy and deferred until the
//! whole batch has been scored, so the order of evaluation inside a batch
//! never matters.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_bounds, GenerationStats, ObjectiveError, OptError, OptResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Absolute number of individuals.
    pub popsize: usize,
    pub max_generations: usize,
    /// Relative tolerance on the spread of population values.
    pub tol: f64,
    pub atol: f64,
    /// Range the differential weight `F` is drawn from once per generation.
    pub mutation: (f64, f64),
    /// Crossover probability.
    pub recombination: f64,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl DeConfig {
    /// Defaults with every parameter bounded to `[-pi, pi]`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            popsize: 15,
            max_generations: 1000,
            tol: 1e-3,
            atol: 0.0,
            mutation: (0.5, 1.0),
            recombination: 0.7,
            bounds: vec![(-PI, PI); dim],
            seed: 0,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), OptError> {
        if dim == 0 {
            return Err(OptError::InvalidConfig(
                "dimension must be at least 1".into(),
            ));
        }
        if self.popsize < 5 {
            return Err(OptError::InvalidConfig(format!(
                "popsize must be at least 5, got {}",
                self.popsize
            )));
        }
        let (lo, hi) = self.mutation;
        if !(lo > 0.0 && lo <= hi && hi < 2.0) {
            return Err(OptError::InvalidConfig(format!(
                "mutation range must satisfy 0 < low <= high < 2, got ({lo}, {hi})"
            )));
        }
        if !(0.0..=1.0).contains(&self.recombination) {
            return Err(OptError::InvalidConfig(format!(
                "recombination must lie in [0, 1], got {}",
                self.recombination
            )));
        }
        if !(self.tol >= 0.0 && self.atol >= 0.0) {
            return Err(OptError::InvalidConfig(
                "tolerances must be non-negative".into(),
            ));
        }
        check_bounds(&self.bounds, dim)
    }
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < values[best] { i } else { best })
}

/// Minimizes a batch objective over the box `cfg.bounds`.
///
/// `objective` receives every candidate of a generation at once and must
/// return one value per candidate, in order.
pub fn de_minimize<F>(mut objective: F, dim: usize, cfg: &DeConfig) -> Result<OptResult, OptError>
where
    F: FnMut(&[Vec<f64>]) -> Result<Vec<f64>, ObjectiveError>,
{
    cfg.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let np = cfg.popsize;

    let mut evaluate = |batch: &[Vec<f64>], trace: &mut Vec<f64>| -> Result<Vec<f64>, OptError> {
        let values = objective(batch).map_err(OptError::Objective)?;
        if values.len() != batch.len() {
            return Err(OptError::ObjectiveShapeMismatch {
                expected: batch.len(),
                actual: values.len(),
            });
        }
        trace.extend_from_slice(&values);
        Ok(values)
    };

    let mut population: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            cfg.bounds
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo })
                .collect()
        })
        .collect();
    let mut trace = Vec::new();
    let mut values = evaluate(&population, &mut trace)?;
    let mut history = vec![GenerationStats::of(&values)];
    let mut generations = 0;
    let mut converged = false;

    while generations < cfg.max_generations {
        let best = population[argmin(&values)].clone();
        let (flo, fhi) = cfg.mutation;
        let f = if flo < fhi {
            rng.gen_range(flo..fhi)
        } else {
            flo
        };

        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let r1 = loop {
                    let r = rng.gen_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r2 = loop {
                    let r = rng.gen_range(0..np);
                    if r != i && r != r1 {
                        break r;
                    }
                };
                let forced = rng.gen_range(0..dim);
                (0..dim)
                    .map(|j| {
                        let take_mutant = rng.gen::<f64>() < cfg.recombination || j == forced;
                        let v = if take_mutant {
                            best[j] + f * (population[r1][j] - population[r2][j])
                        } else {
                            population[i][j]
                        };
                        let (lo, hi) = cfg.bounds[j];
                        v.clamp(lo, hi)
                    })
                    .collect()
            })
            .collect();

        let trial_values = evaluate(&trials, &mut trace)?;
        for (i, (trial, tv)) in trials.into_iter().zip(trial_values).enumerate() {
            if tv <= values[i] {
                population[i] = trial;
                values[i] = tv;
            }
        }
        generations += 1;
        let stats = GenerationStats::of(&values);
        history.push(stats);
        if stats.std <= cfg.atol + cfg.tol * stats.mean.abs() {
            converged = true;
            break;
        }
    }

    let best = argmin(&values);
    Ok(OptResult {
        best_params: population[best].clone(),
        best_value: values[best],
        generations,
        evaluations: trace.len(),
        history,
        trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(batch: &[Vec<f64>]) -> Result<Vec<f64>, ObjectiveError> {
        Ok(batch
            .iter()
            .map(|x| x.iter().map(|v| v * v).sum())
            .collect())
    }

    #[test]
    fn sphere_converges_for_most_seeds() {
        let mut ok = 0;
        for seed in 0..10 {
            let mut cfg = DeConfig::for_dim(4);
            cfg.bounds = vec![(-5.0, 5.0); 4];
            cfg.max_generations = 200;
            cfg.seed = seed;
            let r = de_minimize(sphere, 4, &cfg).unwrap();
            if r.best_value < 1e-2 {
                ok += 1;
            }
        }
        assert!(ok >= 9, "{ok}/10 seeds converged");
    }

    #[test]
    fn rastrigin_2d_global_minimum() {
        let rastrigin = |b: &[Vec<f64>]| -> Result<Vec<f64>, ObjectiveError> {
            Ok(b.iter()
                .map(|x| {
                    20.0 + x
                        .iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
                })
                .collect())
        };
        let mut ok = 0;
        for seed in 0..10 {
            let mut cfg = DeConfig::for_dim(2);
            cfg.bounds = vec![(-5.12, 5.12); 2];
            cfg.popsize = 20;
            cfg.tol = 1e-6;
            cfg.seed = seed;
            let r = de_minimize(rastrigin, 2, &cfg).unwrap();
            if r.best_value < 1e-3 {
                ok += 1;
            }
        }
        assert!(ok >= 8, "{ok}/10 seeds found the global minimum");
    }

    #[test]
    fn constant_objective_converges_after_one_generation() {
        let cfg = DeConfig::for_dim(3);
        let r = de_minimize(|b: &[Vec<f64>]| Ok(vec![4.0; b.len()]), 3, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.generations, 1);
        assert_eq!(r.evaluations, 30);
        assert_eq!(r.best_value, 4.0);
    }

    #[test]
    fn every_batch_is_one_population() {
        let mut cfg = DeConfig::for_dim(6);
        cfg.max_generations = 12;
        cfg.tol = 0.0;
        let mut batches = Vec::new();
        let r = de_minimize(
            |b: &[Vec<f64>]| {
                batches.push(b.len());
                sphere(b)
            },
            6,
            &cfg,
        )
        .unwrap();
        assert_eq!(batches, vec![15; 13]);
        assert_eq!(r.generations, 12);
        assert_eq!(r.evaluations, 15 * 13);
        assert_eq!(r.history.len(), 13);
    }

    #[test]
    fn elitism_bounds_and_determinism() {
        let mut cfg = DeConfig::for_dim(5);
        cfg.seed = 99;
        cfg.bounds = vec![
            (-1.0, 2.0),
            (0.0, 0.5),
            (-3.0, 3.0),
            (1.0, 1.0),
            (-2.0, 0.0),
        ];
        let rastrigin = |b: &[Vec<f64>]| -> Result<Vec<f64>, ObjectiveError> {
            for x in b {
                for (v, &(lo, hi)) in x.iter().zip(&[
                    (-1.0, 2.0),
                    (0.0, 0.5),
                    (-3.0, 3.0),
                    (1.0, 1.0),
                    (-2.0, 0.0),
                ]) {
                    assert!(*v >= lo && *v <= hi);
                }
            }
            Ok(b.iter()
                .map(|x| x.iter().map(|v| v * v - (6.0 * v).cos() + 1.0).sum())
                .collect())
        };
        let a = de_minimize(rastrigin, 5, &cfg).unwrap();
        let b = de_minimize(rastrigin, 5, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1].best <= w[0].best));
        assert_eq!(a.evaluations, cfg.popsize * (a.generations + 1));
        let min_seen = a.trace.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_value, min_seen);
    }

    #[test]
    fn config_errors() {
        let mut cfg = DeConfig::for_dim(2);
        cfg.popsize = 4;
        assert!(matches!(
            de_minimize(sphere, 2, &cfg),
            Err(OptError::InvalidConfig(_))
        ));
        let mut cfg = DeConfig::for_dim(2);
        cfg.mutation = (0.5, 2.5);
        assert!(matches!(
            de_minimize(sphere, 2, &cfg),
            Err(OptError::InvalidConfig(_))
        ));
        let mut cfg = DeConfig::for_dim(2);
        cfg.bounds[1] = (1.0, -1.0);
        assert!(matches!(
            de_minimize(sphere, 2, &cfg),
            Err(OptError::InvalidBounds(_))
        ));
        let cfg = DeConfig::for_dim(2);
        assert!(matches!(
            de_minimize(sphere, 3, &cfg),
            Err(OptError::InvalidBounds(_))
        ));
    }

    #[test]
    fn batch_shape_is_checked() {
        let cfg = DeConfig::for_dim(2);
        let r = de_minimize(|_: &[Vec<f64>]| Ok(vec![1.0; 3]), 2, &cfg);
        assert!(matches!(
            r,
            Err(OptError::ObjectiveShapeMismatch {
                expected: 15,
                actual: 3
            })
        ));
        let r = de_minimize(|_: &[Vec<f64>]| Err("boom".into()), 2, &cfg);
        assert!(matches!(r, Err(OptError::Objective(_))));
    }
}
