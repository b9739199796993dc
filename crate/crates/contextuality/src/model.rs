//! Semiring-valued distributions and empirical models: compatibility
//! (no-signalling), marginalization, supports, possibilistic collapse,
//! and induced sub-models.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{Context, MeasurementScenario, ScenarioError};

/// Exact rational weight. All core arithmetic uses this type.
pub type Rational = num_rational::BigRational;

/// Assignment key: outcome indices listed in the context's measurement
/// order (global scenario order restricted to the context).
pub type AssignmentKey = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semiring {
    /// Non-negative rationals summing to 1.
    Probability,
    /// {0, 1} with ∨ as addition; nonempty support instead of a sum rule.
    Boolean,
    /// Arbitrary rationals summing to 1.
    Signed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("target is not a subcontext of the distribution's context")]
    NotSubcontext,
    #[error("context is not in the down-closure of the cover")]
    NotInDownClosure,
    #[error("missing row for context {0:?}")]
    MissingRow(String),
    #[error("unexpected row context {0:?}")]
    UnexpectedRow(String),
    #[error("row {context:?} violates the {semiring:?} normalization rule")]
    NormalizationError { context: String, semiring: Semiring },
    #[error("incompatible rows: {0}")]
    IncompatibleRows(Violation),
    #[error("row {context:?} carries a malformed weight key")]
    MalformedKey { context: String },
    #[error("row semiring does not match the model semiring")]
    SemiringMismatch,
    #[error("induced cover is empty")]
    EmptyInducedCover,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// A no-signalling violation between two rows: their marginals to the
/// overlap disagree on one assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub left: usize,
    pub right: usize,
    pub overlap: Context,
    pub key: AssignmentKey,
    pub left_value: Rational,
    pub right_value: Rational,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows {} and {} disagree on overlap {:?} at key {:?}: {} vs {}",
            self.left, self.right, self.overlap, self.key, self.left_value, self.right_value
        )
    }
}

impl Violation {
    pub fn describe(&self, scenario: &MeasurementScenario) -> String {
        let left = scenario.context_label(&scenario.cover()[self.left]);
        let right = scenario.context_label(&scenario.cover()[self.right]);
        format!(
            "marginals of {left} and {right} disagree on {} at {}: {} vs {}",
            scenario.context_label(&self.overlap),
            scenario.assignment_label(&self.key),
            self.left_value,
            self.right_value
        )
    }
}

/// A sparse semiring-valued weight function over the assignments of one
/// context. Absent keys read as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    semiring: Semiring,
    context: Context,
    weights: BTreeMap<AssignmentKey, Rational>,
}

impl Distribution {
    /// Builds a distribution, dropping explicit zeros. Keys are not
    /// validated against an outcome count here; `EmpiricalModel::new`
    /// does that once a scenario is available.
    pub fn new(
        semiring: Semiring,
        context: Context,
        weights: BTreeMap<AssignmentKey, Rational>,
    ) -> Self {
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Self { semiring, context, weights }
    }

    /// Boolean distribution from a support set.
    pub fn from_support(context: Context, support: impl IntoIterator<Item = AssignmentKey>) -> Self {
        let weights = support.into_iter().map(|k| (k, Rational::one())).collect();
        Self { semiring: Semiring::Boolean, context, weights }
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn weight(&self, key: &[usize]) -> Rational {
        self.weights.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn weights(&self) -> &BTreeMap<AssignmentKey, Rational> {
        &self.weights
    }

    pub fn support(&self) -> BTreeSet<AssignmentKey> {
        self.weights.keys().cloned().collect()
    }

    /// Positions of `sub`'s measurements within this context's order.
    fn positions_of(&self, sub: &Context) -> Vec<usize> {
        let order: Vec<usize> = self.context.iter().copied().collect();
        sub.iter()
            .map(|m| order.iter().position(|x| x == m).expect("subcontext"))
            .collect()
    }

    /// Marginalizes to a subcontext: semiring sum (∨ for Boolean) over
    /// the assignments that restrict to each target assignment.
    pub fn marginalize(&self, sub: &Context) -> Result<Distribution, ModelError> {
        if !sub.is_subset(&self.context) {
            return Err(ModelError::NotSubcontext);
        }
        let positions = self.positions_of(sub);
        let mut weights: BTreeMap<AssignmentKey, Rational> = BTreeMap::new();
        for (key, w) in &self.weights {
            let restricted: AssignmentKey = positions.iter().map(|&p| key[p]).collect();
            match self.semiring {
                Semiring::Boolean => {
                    weights.insert(restricted, Rational::one());
                }
                _ => {
                    *weights.entry(restricted).or_insert_with(Rational::zero) += w;
                }
            }
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(Distribution { semiring: self.semiring, context: sub.clone(), weights })
    }

    /// Marginal support as a set of restricted keys; valid for every
    /// semiring since signed cancellation cannot occur at the support
    /// level of a Boolean reading.
    pub fn support_marginal(&self, sub: &Context) -> Result<BTreeSet<AssignmentKey>, ModelError> {
        if !sub.is_subset(&self.context) {
            return Err(ModelError::NotSubcontext);
        }
        let positions = self.positions_of(sub);
        Ok(self
            .weights
            .keys()
            .map(|key| positions.iter().map(|&p| key[p]).collect())
            .collect())
    }

    fn check_normalization(&self) -> bool {
        match self.semiring {
            Semiring::Probability => {
                self.weights.values().all(|w| !w.is_zero() && *w > Rational::zero())
                    && self.weights.values().sum::<Rational>() == Rational::one()
            }
            Semiring::Boolean => {
                !self.weights.is_empty() && self.weights.values().all(|w| w.is_one())
            }
            Semiring::Signed => self.weights.values().sum::<Rational>() == Rational::one(),
        }
    }
}

/// Checks pairwise no-signalling of a row family; returns the first
/// violation in lexicographic (row, row, key) order, if any.
pub fn check_compatibility(rows: &[Distribution]) -> Option<Violation> {
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let overlap: Context = rows[i].context() & rows[j].context();
            let left = rows[i].marginalize(&overlap).expect("overlap is a subcontext");
            let right = rows[j].marginalize(&overlap).expect("overlap is a subcontext");
            if left.weights == right.weights {
                continue;
            }
            let keys: BTreeSet<&AssignmentKey> =
                left.weights.keys().chain(right.weights.keys()).collect();
            for key in keys {
                let lv = left.weight(key);
                let rv = right.weight(key);
                if lv != rv {
                    return Some(Violation {
                        left: i,
                        right: j,
                        overlap,
                        key: key.clone(),
                        left_value: lv,
                        right_value: rv,
                    });
                }
            }
        }
    }
    None
}

/// Assignments on a context that are consistent with every row support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionSet {
    pub context: Context,
    pub sections: BTreeSet<AssignmentKey>,
}

/// A compatible family of distributions, one per maximal context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    semiring: Semiring,
    rows: Vec<Distribution>,
}

impl EmpiricalModel {
    /// Validates and builds a model. `rows` may arrive in any order; they
    /// are matched to cover members by context.
    pub fn new(
        scenario: MeasurementScenario,
        semiring: Semiring,
        rows: Vec<Distribution>,
    ) -> Result<Self, ModelError> {
        let mut by_context: BTreeMap<Context, Distribution> = BTreeMap::new();
        for row in rows {
            if row.semiring() != semiring {
                return Err(ModelError::SemiringMismatch);
            }
            if !scenario.cover().contains(row.context()) {
                return Err(ModelError::UnexpectedRow(scenario.context_label(row.context())));
            }
            by_context.insert(row.context().clone(), row);
        }
        let mut ordered = Vec::new();
        for ctx in scenario.cover() {
            let row = by_context
                .remove(ctx)
                .ok_or_else(|| ModelError::MissingRow(scenario.context_label(ctx)))?;
            for key in row.weights.keys() {
                if key.len() != ctx.len()
                    || key.iter().any(|&o| o >= scenario.outcomes().len())
                {
                    return Err(ModelError::MalformedKey {
                        context: scenario.context_label(ctx),
                    });
                }
            }
            if !row.check_normalization() {
                return Err(ModelError::NormalizationError {
                    context: scenario.context_label(ctx),
                    semiring,
                });
            }
            ordered.push(row);
        }
        if let Some(v) = check_compatibility(&ordered) {
            return Err(ModelError::IncompatibleRows(v));
        }
        Ok(Self { scenario, semiring, rows: ordered })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    /// Rows in cover order.
    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, context: &Context) -> Option<&Distribution> {
        let idx = self.scenario.cover().iter().position(|c| c == context)?;
        Some(&self.rows[idx])
    }

    /// The well-defined marginal on any context in the down-closure of
    /// the cover; compatibility makes the choice of covering maximal
    /// context irrelevant (asserted in debug builds).
    pub fn context_distribution(&self, context: &Context) -> Result<Distribution, ModelError> {
        let mut covering = self
            .scenario
            .cover()
            .iter()
            .enumerate()
            .filter(|(_, c)| context.is_subset(c));
        let (first, _) = covering.next().ok_or(ModelError::NotInDownClosure)?;
        let dist = self.rows[first].marginalize(context)?;
        debug_assert!(covering.all(|(i, _)| {
            self.rows[i].marginalize(context).unwrap().weights == dist.weights
        }));
        Ok(dist)
    }

    /// `S_e(U)`: all assignments on `context` whose restriction to every
    /// `C ∩ U` lies in the corresponding marginal support. Decided by
    /// backtracking over the measurements of `context` in global order.
    pub fn section_set(&self, context: &Context) -> SectionSet {
        let sections = self.search_sections(context, None).into_iter().collect();
        SectionSet { context: context.clone(), sections }
    }

    /// First element of `S_e(U)` in lexicographic outcome order, if any.
    pub fn first_section(&self, context: &Context) -> Option<AssignmentKey> {
        self.search_sections(context, Some(1)).into_iter().next()
    }

    fn search_sections(&self, context: &Context, limit: Option<usize>) -> Vec<AssignmentKey> {
        let order: Vec<usize> = context.iter().copied().collect();
        let n_out = self.scenario.outcomes().len();
        // For each search depth, the rows whose overlap with the assigned
        // prefix grew at that depth, with the overlap given as positions
        // into the prefix. Only those rows need re-checking there.
        let mut checks_at_depth: Vec<Vec<(usize, Vec<usize>)>> =
            vec![Vec::new(); order.len() + 1];
        for (ri, row) in self.rows.iter().enumerate() {
            let mut positions = Vec::new();
            for (depth, &m) in order.iter().enumerate() {
                if row.context().contains(&m) {
                    positions.push(depth);
                    checks_at_depth[depth + 1].push((ri, positions.clone()));
                }
            }
        }
        // Marginal supports memoized per (row, overlap size along this order).
        let mut supports: HashMap<(usize, usize), BTreeSet<AssignmentKey>> = HashMap::new();
        let mut out = Vec::new();
        let mut partial: AssignmentKey = Vec::new();
        self.search_rec(
            &order,
            n_out,
            &checks_at_depth,
            &mut supports,
            &mut partial,
            &mut out,
            limit,
        );
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn search_rec(
        &self,
        order: &[usize],
        n_out: usize,
        checks: &[Vec<(usize, Vec<usize>)>],
        supports: &mut HashMap<(usize, usize), BTreeSet<AssignmentKey>>,
        partial: &mut AssignmentKey,
        out: &mut Vec<AssignmentKey>,
        limit: Option<usize>,
    ) {
        if let Some(l) = limit {
            if out.len() >= l {
                return;
            }
        }
        let depth = partial.len();
        if depth == order.len() {
            out.push(partial.clone());
            return;
        }
        'outcomes: for o in 0..n_out {
            partial.push(o);
            for (row, overlap_positions) in &checks[depth + 1] {
                let key: AssignmentKey =
                    overlap_positions.iter().map(|&p| partial[p]).collect();
                let supp = supports
                    .entry((*row, overlap_positions.len()))
                    .or_insert_with(|| {
                        let sub: Context = overlap_positions
                            .iter()
                            .map(|&p| order[p])
                            .collect();
                        self.rows[*row].support_marginal(&sub).expect("overlap")
                    });
                if !supp.contains(&key) {
                    partial.pop();
                    continue 'outcomes;
                }
            }
            self.search_rec(order, n_out, checks, supports, partial, out, limit);
            partial.pop();
        }
    }

    /// Conflates nonzero weights to Boolean 1; idempotent on Boolean
    /// models.
    pub fn possibilistic_collapse(&self) -> EmpiricalModel {
        if self.semiring == Semiring::Boolean {
            return self.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|r| Distribution::from_support(r.context().clone(), r.support()))
            .collect();
        EmpiricalModel::new(self.scenario.clone(), Semiring::Boolean, rows)
            .expect("collapse preserves compatibility at the support level")
    }

    /// The induced sub-model on a measurement subset: scenario restricted
    /// to `keep`, cover normalized from `{C ∩ keep}`, rows marginalized.
    pub fn induced_submodel(&self, keep: &Context) -> Result<EmpiricalModel, ModelError> {
        if keep.is_empty() {
            return Err(ModelError::EmptyInducedCover);
        }
        let labels: Vec<String> = keep
            .iter()
            .map(|&i| self.scenario.measurements()[i].clone())
            .collect();
        let cover_labels: Vec<Vec<String>> = self
            .scenario
            .cover()
            .iter()
            .map(|c| {
                (c & keep)
                    .iter()
                    .map(|&i| self.scenario.measurements()[i].clone())
                    .collect()
            })
            .filter(|c: &Vec<String>| !c.is_empty())
            .collect();
        if cover_labels.is_empty() {
            return Err(ModelError::EmptyInducedCover);
        }
        let scenario = MeasurementScenario::new(
            labels.clone(),
            self.scenario.outcomes().to_vec(),
            cover_labels,
        )?;
        let mut rows = Vec::new();
        for ctx in scenario.cover() {
            // Translate back to original indices to marginalize.
            let original: Context = ctx
                .iter()
                .map(|&i| self.scenario.measurement_index(&labels[i]).unwrap())
                .collect();
            let dist = self.context_distribution(&original)?;
            rows.push(Distribution::new(self.semiring, ctx.clone(), dist.weights));
        }
        EmpiricalModel::new(scenario, self.semiring, rows)
    }
}
