//! Kochen-Specker models: at each maximal context exactly one
//! measurement takes outcome 1. Includes the closed-form canonical
//! extension to the cover of all n-element subsets, a hypergraph
//! symmetry check, and a seeded random scenario generator.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AssignmentKey, Distribution, EmpiricalModel, Semiring};
use crate::scenario::{power_cover, Context, MeasurementScenario, ScenarioError};
use crate::solver::all_assignments;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KsError {
    #[error("outcome set must be exactly {{0, 1}}")]
    NonBinaryOutcome,
    #[error("maximal contexts must all have the same size (found {0} and {1})")]
    MixedContextSizes(usize, usize),
    #[error("could not sample a covering family of contexts")]
    GenerationFailed,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// A scenario with binary outcomes and constant maximal-context size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KsScenario {
    scenario: MeasurementScenario,
    context_size: usize,
}

impl KsScenario {
    pub fn new(scenario: MeasurementScenario) -> Result<Self, KsError> {
        if scenario.outcomes() != ["0".to_string(), "1".to_string()] {
            return Err(KsError::NonBinaryOutcome);
        }
        let sizes: Vec<usize> = scenario.cover().iter().map(|c| c.len()).collect();
        let first = sizes[0];
        if let Some(&other) = sizes.iter().find(|&&s| s != first) {
            return Err(KsError::MixedContextSizes(first, other));
        }
        Ok(Self { scenario, context_size: first })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn context_size(&self) -> usize {
        self.context_size
    }

    /// The Kochen-Specker model: each row supported on the assignments
    /// with exactly one outcome 1.
    pub fn ks_model(&self) -> EmpiricalModel {
        let rows = self
            .scenario
            .cover()
            .iter()
            .map(|c| {
                let support = all_assignments(c.len(), 2)
                    .into_iter()
                    .filter(|k| outcome_count(k) == 1);
                Distribution::from_support(c.clone(), support)
            })
            .collect();
        EmpiricalModel::new(self.scenario.clone(), Semiring::Boolean, rows)
            .expect("KS rows are compatible: singleton marginals are always full")
    }

    /// Closed form of the canonical extension to the cover of all
    /// n-element subsets: a cover member keeps the exactly-one rule; any
    /// other n-subset allows an assignment iff no overlap with a cover
    /// member sees two outcomes 1.
    pub fn ks_canonical_extension(&self) -> EmpiricalModel {
        let n = self.context_size;
        let x_len = self.scenario.measurements().len();
        let target = power_cover(x_len, n).expect("context size fits the measurement set");
        let scenario = self
            .scenario
            .with_cover(target)
            .expect("power cover is valid over the same measurements");
        let cover_set: BTreeSet<&Context> = self.scenario.cover().iter().collect();
        let rows = scenario
            .cover()
            .iter()
            .map(|c| {
                let in_cover = cover_set.contains(c);
                let order: Vec<usize> = c.iter().copied().collect();
                let support = all_assignments(n, 2).into_iter().filter(|k| {
                    if in_cover {
                        outcome_count(k) == 1
                    } else {
                        self.scenario.cover().iter().all(|d| {
                            let ones = order
                                .iter()
                                .zip(k)
                                .filter(|(m, &o)| d.contains(m) && o == 1)
                                .count();
                            ones <= 1
                        })
                    }
                });
                Distribution::from_support(c.clone(), support)
            })
            .collect();
        EmpiricalModel::new(scenario, Semiring::Boolean, rows)
            .expect("the closed-form extension is compatible")
    }

    /// True iff the automorphism group of the hypergraph (X, M) acts
    /// transitively on the measurements.
    pub fn is_symmetric(&self) -> bool {
        let x_len = self.scenario.measurements().len();
        (1..x_len).all(|target| self.automorphism_mapping(0, target))
    }

    /// Searches for a hypergraph automorphism sending `from` to `to`,
    /// extending a partial image measurement by measurement and pruning
    /// on context-membership degrees.
    fn automorphism_mapping(&self, from: usize, to: usize) -> bool {
        let x_len = self.scenario.measurements().len();
        let cover = self.scenario.cover();
        let degree: Vec<usize> = (0..x_len)
            .map(|m| cover.iter().filter(|c| c.contains(&m)).count())
            .collect();
        if degree[from] != degree[to] {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; x_len];
        let mut used = vec![false; x_len];
        image[from] = Some(to);
        used[to] = true;
        self.extend_automorphism(&mut image, &mut used, &degree)
    }

    fn extend_automorphism(
        &self,
        image: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        degree: &[usize],
    ) -> bool {
        let Some(next) = image.iter().position(|i| i.is_none()) else {
            return self.is_automorphism(image);
        };
        let x_len = image.len();
        for candidate in 0..x_len {
            if used[candidate] || degree[next] != degree[candidate] {
                continue;
            }
            image[next] = Some(candidate);
            used[candidate] = true;
            if self.partial_consistent(image) && self.extend_automorphism(image, used, degree) {
                return true;
            }
            image[next] = None;
            used[candidate] = false;
        }
        false
    }

    /// Every cover member fully inside the current domain must map to a
    /// cover member; partially-mapped members must fit inside one.
    fn partial_consistent(&self, image: &[Option<usize>]) -> bool {
        for c in self.scenario.cover() {
            let mapped: BTreeSet<usize> =
                c.iter().filter_map(|&m| image[m]).collect();
            if mapped.len() < c.iter().filter(|&&m| image[m].is_some()).count() {
                return false; // image collision inside a context
            }
            let complete = mapped.len() == c.len();
            let fits = self.scenario.cover().iter().any(|d| {
                mapped.is_subset(d) && (!complete || mapped.len() == d.len())
            });
            if !fits {
                return false;
            }
        }
        true
    }

    fn is_automorphism(&self, image: &[Option<usize>]) -> bool {
        let cover: BTreeSet<&Context> = self.scenario.cover().iter().collect();
        self.scenario.cover().iter().all(|c| {
            let mapped: Context = c.iter().map(|&m| image[m].unwrap()).collect();
            cover.contains(&mapped)
        })
    }
}

/// Number of measurements mapped to outcome 1 (assignments over {0, 1}).
pub fn outcome_count(key: &AssignmentKey) -> usize {
    key.iter().filter(|&&o| o == 1).count()
}

/// Configuration for the seeded random scenario generator used by the
/// property suites.
#[derive(Debug, Clone, Copy)]
pub struct RandomKsConfig {
    pub measurements: usize,
    pub context_size: usize,
    pub contexts: usize,
    pub seed: u64,
}

/// Samples `contexts` distinct `context_size`-subsets of a measurement
/// set until they cover it, deterministically from the seed.
pub fn random_ks_scenario(cfg: RandomKsConfig) -> Result<KsScenario, KsError> {
    if cfg.context_size == 0 || cfg.context_size > cfg.measurements || cfg.contexts == 0 {
        return Err(KsError::GenerationFailed);
    }
    let labels: Vec<String> = (0..cfg.measurements)
        .map(|i| {
            if cfg.measurements <= 26 {
                char::from(b'A' + i as u8).to_string()
            } else {
                format!("m{i}")
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let indices: Vec<usize> = (0..cfg.measurements).collect();
    for _ in 0..1000 {
        let mut cover: BTreeSet<Context> = BTreeSet::new();
        let mut attempts = 0;
        while cover.len() < cfg.contexts && attempts < 1000 {
            let mut pool = indices.clone();
            pool.shuffle(&mut rng);
            cover.insert(pool[..cfg.context_size].iter().copied().collect());
            attempts += 1;
        }
        let covers_all = indices.iter().all(|m| cover.iter().any(|c| c.contains(m)));
        if cover.len() == cfg.contexts && covers_all {
            let cover_labels: Vec<Vec<String>> = cover
                .iter()
                .map(|c| c.iter().map(|&m| labels[m].clone()).collect())
                .collect();
            let scenario = MeasurementScenario::new(
                labels,
                vec!["0".into(), "1".into()],
                cover_labels,
            )?;
            return KsScenario::new(scenario);
        }
    }
    Err(KsError::GenerationFailed)
}
