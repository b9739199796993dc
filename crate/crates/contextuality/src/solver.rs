//! Deciding the contextuality hierarchy: strong contextuality (no
//! consistent global assignment), logical contextuality (no Boolean
//! global section), and probabilistic extendability (an exact LP
//! feasibility problem over the consistent global assignments).

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linear::{self, Feasibility};
use crate::model::{AssignmentKey, EmpiricalModel, Rational, Semiring};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ContextualityClass {
    NonContextual,
    Contextual,
    LogicallyContextual,
    StronglyContextual,
}

impl std::fmt::Display for ContextualityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::NonContextual => "NonContextual",
            Self::Contextual => "Contextual",
            Self::LogicallyContextual => "LogicallyContextual",
            Self::StronglyContextual => "StronglyContextual",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("operation requires a {expected:?} model")]
    SemiringMismatch { expected: Semiring },
    #[error("instance too large: {0} variables")]
    InstanceTooLarge(usize),
}

/// One entry of a Farkas certificate: a rational multiplier attached to
/// the marginal constraint (cover member, assignment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasEntry {
    pub context_index: usize,
    pub key: AssignmentKey,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalSectionWitness {
    /// A distribution over global assignments restricting to every row.
    Distribution(BTreeMap<AssignmentKey, Rational>),
    /// A single consistent global assignment.
    Assignment(AssignmentKey),
    /// A rational vector proving the marginal system has no non-negative
    /// solution.
    Infeasibility(Vec<FarkasEntry>),
}

/// Witness that a possible local section fails to extend globally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalWitness {
    pub context_index: usize,
    pub section: AssignmentKey,
}

/// Some element of `S_e(X)` (deterministic: lexicographically first in
/// scenario measurement and outcome order), or `None` if `S_e(X) = ∅`.
pub fn find_consistent_global(e: &EmpiricalModel) -> Option<AssignmentKey> {
    e.first_section(&e.scenario().all_measurements())
}

pub fn is_strongly_contextual(e: &EmpiricalModel) -> bool {
    find_consistent_global(e).is_none()
}

/// A model is logically contextual when some possible local section of
/// some maximal context does not arise as the restriction of a consistent
/// global assignment. Returns the first failing `(C, s)` if so.
pub fn is_logically_contextual(e: &EmpiricalModel) -> (bool, Option<LogicalWitness>) {
    let collapsed = e.possibilistic_collapse();
    let x = collapsed.scenario().all_measurements();
    let globals = collapsed.section_set(&x).sections;
    for (ci, ctx) in collapsed.scenario().cover().iter().enumerate() {
        let positions: Vec<usize> = ctx.iter().copied().collect();
        let reachable: std::collections::BTreeSet<AssignmentKey> = globals
            .iter()
            .map(|g| positions.iter().map(|&m| g[m]).collect())
            .collect();
        for section in collapsed.rows()[ci].support() {
            if !reachable.contains(&section) {
                return (true, Some(LogicalWitness { context_index: ci, section }));
            }
        }
    }
    (false, None)
}

/// The marginal-matching linear system over variables indexed by
/// `S_e(X)`. Any feasible distribution is supported there, since positive
/// weight on an inconsistent global assignment would break a marginal.
fn marginal_system(
    e: &EmpiricalModel,
) -> (
    Vec<AssignmentKey>,
    Vec<(usize, AssignmentKey)>,
    Vec<Vec<Rational>>,
    Vec<Rational>,
) {
    let x = e.scenario().all_measurements();
    let vars: Vec<AssignmentKey> = e.section_set(&x).sections.into_iter().collect();
    let mut constraints = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (ci, ctx) in e.scenario().cover().iter().enumerate() {
        let positions: Vec<usize> = ctx.iter().copied().collect();
        for (key, value) in e.rows()[ci].weights() {
            let row: Vec<Rational> = vars
                .iter()
                .map(|g| {
                    let restricted: AssignmentKey =
                        positions.iter().map(|&m| g[m]).collect();
                    if restricted == *key {
                        Rational::from_integer(1.into())
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            constraints.push((ci, key.clone()));
            a.push(row);
            b.push(value.clone());
        }
    }
    (vars, constraints, a, b)
}

/// Decides whether a probability model extends to a global section, with
/// either a distribution witness or a verified Farkas certificate.
pub fn is_probabilistically_extendable(
    e: &EmpiricalModel,
) -> Result<(bool, GlobalSectionWitness), SolverError> {
    if e.semiring() != Semiring::Probability {
        return Err(SolverError::SemiringMismatch { expected: Semiring::Probability });
    }
    let (vars, constraints, a, b) = marginal_system(e);
    match linear::solve_nonneg(&a, &b) {
        Feasibility::Feasible(x) => {
            let dist: BTreeMap<AssignmentKey, Rational> = vars
                .into_iter()
                .zip(x)
                .filter(|(_, w)| !w.is_zero())
                .collect();
            Ok((true, GlobalSectionWitness::Distribution(dist)))
        }
        Feasibility::Infeasible(y) => {
            let cert = constraints
                .into_iter()
                .zip(y)
                .filter(|(_, v)| !v.is_zero())
                .map(|((context_index, key), value)| FarkasEntry { context_index, key, value })
                .collect();
            Ok((false, GlobalSectionWitness::Infeasibility(cert)))
        }
    }
}

/// Re-derives the marginal system and checks a certificate against it.
pub fn verify_infeasibility_certificate(e: &EmpiricalModel, cert: &[FarkasEntry]) -> bool {
    let (_, constraints, a, b) = marginal_system(e);
    let mut y = vec![Rational::zero(); constraints.len()];
    for entry in cert {
        match constraints
            .iter()
            .position(|(ci, key)| *ci == entry.context_index && *key == entry.key)
        {
            Some(i) => y[i] = entry.value.clone(),
            None => return false,
        }
    }
    linear::verify_farkas(&a, &b, &y)
}

/// Checks that a distribution over global assignments restricts exactly
/// to every row of the model.
pub fn verify_distribution_witness(
    e: &EmpiricalModel,
    d: &BTreeMap<AssignmentKey, Rational>,
) -> bool {
    for (ci, ctx) in e.scenario().cover().iter().enumerate() {
        let positions: Vec<usize> = ctx.iter().copied().collect();
        let mut marginal: BTreeMap<AssignmentKey, Rational> = BTreeMap::new();
        for (g, w) in d {
            let restricted: AssignmentKey = positions.iter().map(|&m| g[m]).collect();
            *marginal.entry(restricted).or_insert_with(Rational::zero) += w;
        }
        marginal.retain(|_, w| !w.is_zero());
        if &marginal != e.rows()[ci].weights() {
            return false;
        }
    }
    true
}

/// Places a model in the hierarchy. Boolean models classify among
/// {NonContextual, LogicallyContextual, StronglyContextual}; probability
/// models additionally pass through the LP level.
pub fn classify(e: &EmpiricalModel) -> Result<ContextualityClass, SolverError> {
    if e.semiring() == Semiring::Signed {
        return Err(SolverError::SemiringMismatch { expected: Semiring::Probability });
    }
    if is_strongly_contextual(e) {
        return Ok(ContextualityClass::StronglyContextual);
    }
    if is_logically_contextual(e).0 {
        return Ok(ContextualityClass::LogicallyContextual);
    }
    if e.semiring() == Semiring::Probability && !is_probabilistically_extendable(e)?.0 {
        return Ok(ContextualityClass::Contextual);
    }
    Ok(ContextualityClass::NonContextual)
}

const SIGNED_VAR_LIMIT: usize = 1 << 20;

/// Solves the marginal system over all global assignments without the
/// non-negativity constraint. Returns a signed distribution with exact
/// marginals, or `None` if the affine system is inconsistent. No theorem
/// about existence is asserted; this reports what it finds.
pub fn solve_signed_global_section(
    e: &EmpiricalModel,
) -> Result<Option<BTreeMap<AssignmentKey, Rational>>, SolverError> {
    if e.semiring() == Semiring::Boolean {
        return Err(SolverError::SemiringMismatch { expected: Semiring::Probability });
    }
    let x_len = e.scenario().measurements().len();
    let n_out = e.scenario().outcomes().len();
    let var_count = n_out.checked_pow(x_len as u32).unwrap_or(usize::MAX);
    if var_count > SIGNED_VAR_LIMIT {
        return Err(SolverError::InstanceTooLarge(var_count));
    }
    let vars: Vec<AssignmentKey> = all_assignments(x_len, n_out);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (ci, ctx) in e.scenario().cover().iter().enumerate() {
        let positions: Vec<usize> = ctx.iter().copied().collect();
        for key in all_assignments(ctx.len(), n_out) {
            let row: Vec<Rational> = vars
                .iter()
                .map(|g| {
                    let restricted: AssignmentKey =
                        positions.iter().map(|&m| g[m]).collect();
                    if restricted == key {
                        Rational::from_integer(1.into())
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            a.push(row);
            b.push(e.rows()[ci].weight(&key));
        }
    }
    Ok(linear::solve_affine(&a, &b).map(|x| {
        vars.into_iter().zip(x).filter(|(_, w)| !w.is_zero()).collect()
    }))
}

/// All assignment keys of a given length over `n_out` outcomes, in
/// lexicographic order.
pub fn all_assignments(len: usize, n_out: usize) -> Vec<AssignmentKey> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|k| {
                (0..n_out).map(move |o| {
                    let mut k2 = k.clone();
                    k2.push(o);
                    k2
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn model(name: &str) -> EmpiricalModel {
        catalog::get(name).unwrap().model
    }

    #[test]
    fn triangle_has_no_consistent_global() {
        assert_eq!(find_consistent_global(&model("triangle")), None);
        assert!(is_strongly_contextual(&model("triangle")));
    }

    #[test]
    fn chsh_collapse_global_is_all_zero() {
        let g = find_consistent_global(&model("chsh-possibilistic")).unwrap();
        assert_eq!(g, vec![0, 0, 0, 0]);
    }

    #[test]
    fn pr_box_is_strongly_contextual() {
        assert!(is_strongly_contextual(&model("pr-box")));
    }

    #[test]
    fn peres_mermin_is_strongly_contextual() {
        assert!(is_strongly_contextual(&model("peres-mermin")));
    }

    #[test]
    fn deterministic_model_is_not_strongly_contextual() {
        use crate::model::Distribution;
        use crate::scenario::{Context, MeasurementScenario};
        let s = MeasurementScenario::new(
            vec!["A".into(), "B".into()],
            vec!["0".into(), "1".into()],
            vec![vec!["A".into(), "B".into()]],
        )
        .unwrap();
        let d = Distribution::from_support(Context::from([0, 1]), [vec![0, 1]]);
        let e = EmpiricalModel::new(s, Semiring::Boolean, vec![d]).unwrap();
        assert!(!is_strongly_contextual(&e));
        assert!(!is_logically_contextual(&e).0);
    }

    #[test]
    fn chsh_is_not_logically_contextual() {
        assert!(!is_logically_contextual(&model("chsh")).0);
    }

    #[test]
    fn hardy_is_logically_but_not_strongly_contextual() {
        let hardy = model("hardy");
        let (lc, witness) = is_logically_contextual(&hardy);
        assert!(lc);
        assert!(witness.is_some());
        assert!(!is_strongly_contextual(&hardy));
    }

    #[test]
    fn strongly_contextual_implies_logically_contextual() {
        for name in ["triangle", "pr-box", "ghz", "peres-mermin"] {
            assert!(is_logically_contextual(&model(name)).0, "{name}");
        }
    }

    #[test]
    fn chsh_lp_is_infeasible_with_verified_certificate() {
        let chsh = model("chsh");
        let (feasible, witness) = is_probabilistically_extendable(&chsh).unwrap();
        assert!(!feasible);
        match witness {
            GlobalSectionWitness::Infeasibility(cert) => {
                assert!(verify_infeasibility_certificate(&chsh, &cert));
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn product_model_is_extendable() {
        use crate::model::Distribution;
        use crate::scenario::bell_scenario;
        // e_C(s) = ∏ p_x(s(x)) with p uniform: feasible, with the product
        // distribution as witness.
        let (s, _) = bell_scenario(
            &[
                vec!["A".into(), "A'".into()],
                vec!["B".into(), "B'".into()],
            ],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let quarter = Rational::new(1.into(), 4.into());
        let rows: Vec<Distribution> = s
            .cover()
            .iter()
            .map(|c| {
                let weights = all_assignments(2, 2)
                    .into_iter()
                    .map(|k| (k, quarter.clone()))
                    .collect();
                Distribution::new(Semiring::Probability, c.clone(), weights)
            })
            .collect();
        let e = EmpiricalModel::new(s, Semiring::Probability, rows).unwrap();
        let (feasible, witness) = is_probabilistically_extendable(&e).unwrap();
        assert!(feasible);
        match witness {
            GlobalSectionWitness::Distribution(d) => {
                assert!(verify_distribution_witness(&e, &d));
            }
            other => panic!("expected distribution, got {other:?}"),
        }
        assert_eq!(classify(&e).unwrap(), ContextualityClass::NonContextual);
        let signed = solve_signed_global_section(&e).unwrap().unwrap();
        assert!(verify_distribution_witness(&e, &signed));
    }

    #[test]
    fn uniform_triangle_probability_model_is_extendable() {
        use crate::model::Distribution;
        use crate::scenario::MeasurementScenario;
        let s = MeasurementScenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec!["0".into(), "1".into()],
            vec![
                vec!["A".into(), "B".into()],
                vec!["B".into(), "C".into()],
                vec!["C".into(), "A".into()],
            ],
        )
        .unwrap();
        let quarter = Rational::new(1.into(), 4.into());
        let rows: Vec<Distribution> = s
            .cover()
            .iter()
            .map(|c| {
                let weights = all_assignments(2, 2)
                    .into_iter()
                    .map(|k| (k, quarter.clone()))
                    .collect();
                Distribution::new(Semiring::Probability, c.clone(), weights)
            })
            .collect();
        let e = EmpiricalModel::new(s, Semiring::Probability, rows).unwrap();
        let (feasible, _) = is_probabilistically_extendable(&e).unwrap();
        assert!(feasible);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&model("chsh")).unwrap(), ContextualityClass::Contextual);
        assert_eq!(
            classify(&model("triangle")).unwrap(),
            ContextualityClass::StronglyContextual
        );
        assert_eq!(
            classify(&model("hardy")).unwrap(),
            ContextualityClass::LogicallyContextual
        );
    }

    #[test]
    fn signed_solution_exists_for_chsh() {
        let chsh = model("chsh");
        let d = solve_signed_global_section(&chsh).unwrap().unwrap();
        assert!(verify_distribution_witness(&chsh, &d));
        assert!(d.values().any(|w| *w < Rational::zero()));
    }

    #[test]
    fn signed_solution_exists_for_pr_box_probabilities() {
        use crate::model::Distribution;
        let pr = model("pr-box");
        let half = Rational::new(1.into(), 2.into());
        let rows: Vec<Distribution> = pr
            .rows()
            .iter()
            .map(|r| {
                let weights = r
                    .support()
                    .into_iter()
                    .map(|k| (k, half.clone()))
                    .collect();
                Distribution::new(Semiring::Probability, r.context().clone(), weights)
            })
            .collect();
        let e =
            EmpiricalModel::new(pr.scenario().clone(), Semiring::Probability, rows).unwrap();
        let d = solve_signed_global_section(&e).unwrap().unwrap();
        assert!(verify_distribution_witness(&e, &d));
    }
}
