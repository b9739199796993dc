//! Measurement scenarios: a finite set of measurements, a finite set of
//! outcomes, and a cover of jointly measurable maximal contexts.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

/// A context is a set of measurement indices into the scenario's global
/// measurement order. `BTreeSet` keeps iteration in that order.
pub type Context = BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("cover is empty")]
    EmptyCover,
    #[error("measurement {0:?} is not covered by any context")]
    UncoveredMeasurement(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("measurement and outcome sets must be nonempty")]
    EmptySets,
    #[error("context size {n} out of range 1..={max}")]
    BadArity { n: usize, max: usize },
    #[error("site {0} is empty")]
    EmptySite(usize),
    #[error("covers are over different measurement sets")]
    MismatchedMeasurementSets,
}

/// A validated measurement scenario `(X, O, M)`.
///
/// The cover is normalized to an antichain of maximal contexts; the
/// user-supplied order of measurements and outcomes is preserved and
/// fixes the serialization order of assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    measurements: Vec<String>,
    outcomes: Vec<String>,
    cover: Vec<Context>,
}

impl MeasurementScenario {
    /// Validates a raw description: resolves labels, checks that the cover
    /// covers every measurement, and drops cover members that are subsets
    /// of other members.
    pub fn new(
        measurements: Vec<String>,
        outcomes: Vec<String>,
        cover: Vec<Vec<String>>,
    ) -> Result<Self, ScenarioError> {
        if measurements.is_empty() || outcomes.is_empty() {
            return Err(ScenarioError::EmptySets);
        }
        for (i, m) in measurements.iter().enumerate() {
            if measurements[..i].contains(m) {
                return Err(ScenarioError::DuplicateLabel(m.clone()));
            }
        }
        for (i, o) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(o) {
                return Err(ScenarioError::DuplicateLabel(o.clone()));
            }
        }
        if cover.is_empty() {
            return Err(ScenarioError::EmptyCover);
        }
        let mut resolved: Vec<Context> = Vec::new();
        for member in &cover {
            let mut ctx = Context::new();
            for label in member {
                let idx = measurements
                    .iter()
                    .position(|m| m == label)
                    .ok_or_else(|| ScenarioError::UnknownLabel(label.clone()))?;
                ctx.insert(idx);
            }
            resolved.push(ctx);
        }
        let cover = normalize_cover(resolved);
        if cover.is_empty() {
            return Err(ScenarioError::EmptyCover);
        }
        for (i, label) in measurements.iter().enumerate() {
            if !cover.iter().any(|c| c.contains(&i)) {
                return Err(ScenarioError::UncoveredMeasurement(label.clone()));
            }
        }
        Ok(Self { measurements, outcomes, cover })
    }

    /// Builds a scenario over the same measurements and outcomes but a
    /// different cover (given as index sets). The cover is normalized.
    pub fn with_cover(&self, cover: Vec<Context>) -> Result<Self, ScenarioError> {
        let labels: Vec<Vec<String>> = cover
            .iter()
            .map(|c| c.iter().map(|&i| self.measurements[i].clone()).collect())
            .collect();
        Self::new(self.measurements.clone(), self.outcomes.clone(), labels)
    }

    pub fn measurements(&self) -> &[String] {
        &self.measurements
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn cover(&self) -> &[Context] {
        &self.cover
    }

    /// Largest maximal-context size, `n(M)`.
    pub fn max_context_size(&self) -> usize {
        self.cover.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn measurement_index(&self, label: &str) -> Result<usize, ScenarioError> {
        self.measurements
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| ScenarioError::UnknownLabel(label.to_owned()))
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize, ScenarioError> {
        self.outcomes
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| ScenarioError::UnknownLabel(label.to_owned()))
    }

    /// The full measurement set as a context.
    pub fn all_measurements(&self) -> Context {
        (0..self.measurements.len()).collect()
    }

    /// Context rendered as space-separated labels in global order.
    pub fn context_label(&self, ctx: &Context) -> String {
        ctx.iter().map(|&i| self.measurements[i].as_str()).join(" ")
    }

    /// Assignment key rendered as concatenated outcome labels.
    pub fn assignment_label(&self, key: &[usize]) -> String {
        key.iter().map(|&o| self.outcomes[o].as_str()).collect()
    }

    /// Resolves a list of measurement labels to a context.
    pub fn context_from_labels(&self, labels: &[String]) -> Result<Context, ScenarioError> {
        labels.iter().map(|l| self.measurement_index(l)).collect()
    }
}

/// Drops cover members that are strict subsets of (or equal to) earlier
/// surviving members, preserving first-appearance order.
fn normalize_cover(cover: Vec<Context>) -> Vec<Context> {
    let mut out: Vec<Context> = Vec::new();
    for ctx in cover {
        if ctx.is_empty() {
            continue;
        }
        if out.iter().any(|c| ctx.is_subset(c)) {
            continue;
        }
        out.retain(|c| !c.is_subset(&ctx));
        out.push(ctx);
    }
    out
}

/// All subsets of members of the cover, including the empty context.
pub fn down_closure(cover: &[Context]) -> BTreeSet<Context> {
    let mut out = BTreeSet::new();
    for ctx in cover {
        let elems: Vec<usize> = ctx.iter().copied().collect();
        for k in 0..=elems.len() {
            for combo in elems.iter().combinations(k) {
                out.insert(combo.into_iter().copied().collect());
            }
        }
    }
    out
}

/// The cover partial order: `M ⪯ M'` iff every member of `M` is contained
/// in some member of `M'`.
pub fn cover_leq(smaller: &[Context], larger: &[Context]) -> bool {
    smaller
        .iter()
        .all(|d| larger.iter().any(|c| d.is_subset(c)))
}

/// The cover of all `n`-element subsets of a measurement set of size
/// `x_len`.
pub fn power_cover(x_len: usize, n: usize) -> Result<Vec<Context>, ScenarioError> {
    if n == 0 || n > x_len {
        return Err(ScenarioError::BadArity { n, max: x_len });
    }
    Ok((0..x_len)
        .combinations(n)
        .map(|combo| combo.into_iter().collect())
        .collect())
}

/// Site structure of a Bell scenario: disjoint measurement sets, one per
/// site, whose union is the whole measurement set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellStructure {
    sites: Vec<Vec<usize>>,
}

impl BellStructure {
    pub fn sites(&self) -> &[Vec<usize>] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// `k` in the `(n, k, l)` shape of the scenario.
    pub fn max_site_size(&self) -> usize {
        self.sites.iter().map(|s| s.len()).max().unwrap_or(0)
    }
}

/// Builds a Bell scenario from per-site measurement label lists. Labels
/// are tagged as `label@site` (1-based) and the cover consists of all
/// one-per-site measurement choices.
pub fn bell_scenario(
    site_lists: &[Vec<String>],
    outcomes: Vec<String>,
) -> Result<(MeasurementScenario, BellStructure), ScenarioError> {
    if site_lists.is_empty() {
        return Err(ScenarioError::EmptySite(1));
    }
    let mut measurements = Vec::new();
    let mut sites = Vec::new();
    for (i, list) in site_lists.iter().enumerate() {
        if list.is_empty() {
            return Err(ScenarioError::EmptySite(i + 1));
        }
        let mut site = Vec::new();
        for label in list {
            site.push(measurements.len());
            measurements.push(format!("{}@{}", label, i + 1));
        }
        sites.push(site);
    }
    let cover: Vec<Vec<String>> = sites
        .iter()
        .map(|site| site.iter().map(|&i| measurements[i].clone()))
        .multi_cartesian_product()
        .collect();
    let scenario = MeasurementScenario::new(measurements, outcomes, cover)?;
    Ok((scenario, BellStructure { sites }))
}
