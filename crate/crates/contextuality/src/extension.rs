//! Partial extendability between covers: extension checking, the
//! canonical extension, strong non-extendability, and the induced
//! sub-model facts. Possibilistic (Boolean) models only; the ∧-formula
//! defining the canonical extension lives at the support level.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    check_compatibility, AssignmentKey, Distribution, EmpiricalModel, ModelError, Semiring,
    Violation,
};
use crate::scenario::{cover_leq, Context, ScenarioError};
use crate::solver;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("target cover is not larger than the model's cover")]
    CoverNotLarger,
    #[error("operation requires a Boolean (possibilistic) model")]
    NotBoolean,
    #[error("model does not extend the base model")]
    NotAnExtension,
    #[error("instance too large for the brute-force search ({0} support elements)")]
    InstanceTooLarge(usize),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of a canonical-extension attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionReport {
    /// The canonical candidate is a compatible model extending the input.
    WellDefined(EmpiricalModel),
    /// Some target context admits no consistent assignment: the model is
    /// strongly non-extendable to the target cover.
    EmptySupport(Context),
    /// The candidate family signals: its marginals disagree somewhere.
    Incompatible(Violation),
}

fn require_boolean(e: &EmpiricalModel) -> Result<(), ExtensionError> {
    if e.semiring() != Semiring::Boolean {
        return Err(ExtensionError::NotBoolean);
    }
    Ok(())
}

fn require_larger(e: &EmpiricalModel, target: &[Context]) -> Result<(), ExtensionError> {
    if !cover_leq(e.scenario().cover(), target) {
        return Err(ExtensionError::CoverNotLarger);
    }
    Ok(())
}

/// The canonical candidate extension to a larger cover: each target row
/// is supported on `S_e(C)`, computed by backtracking with pruning along
/// the original cover rather than by filtering all assignments of `C`.
pub fn canonical_extension(
    e: &EmpiricalModel,
    target: &[Context],
) -> Result<ExtensionReport, ExtensionError> {
    require_boolean(e)?;
    require_larger(e, target)?;
    let scenario = e.scenario().with_cover(target.to_vec())?;
    let mut rows = Vec::new();
    for ctx in scenario.cover() {
        let sections = e.section_set(ctx).sections;
        if sections.is_empty() {
            return Ok(ExtensionReport::EmptySupport(ctx.clone()));
        }
        rows.push(Distribution::from_support(ctx.clone(), sections));
    }
    if let Some(v) = check_compatibility(&rows) {
        return Ok(ExtensionReport::Incompatible(v));
    }
    let model = EmpiricalModel::new(scenario, Semiring::Boolean, rows)?;
    Ok(ExtensionReport::WellDefined(model))
}

/// `f` extends `e` iff `f` lives on a larger cover over the same
/// measurements and outcomes and restricts to every row of `e` exactly.
pub fn is_extension(f: &EmpiricalModel, e: &EmpiricalModel) -> Result<bool, ExtensionError> {
    if f.scenario().measurements() != e.scenario().measurements()
        || f.scenario().outcomes() != e.scenario().outcomes()
    {
        return Err(ExtensionError::CoverNotLarger);
    }
    require_larger(e, f.scenario().cover())?;
    for (ctx, row) in e.scenario().cover().iter().zip(e.rows()) {
        let marginal = f.context_distribution(ctx)?;
        if marginal.weights() != row.weights() {
            return Ok(false);
        }
    }
    Ok(true)
}

const BRUTE_FORCE_LIMIT: usize = 20;

/// Exhaustively decides whether any Boolean model on the target cover
/// extends `e`, searching sub-support families of the canonical supports
/// (any extension's supports sit inside them). An oracle for tests, not
/// a production path; guarded by a size limit.
pub fn brute_force_extendable(
    e: &EmpiricalModel,
    target: &[Context],
) -> Result<bool, ExtensionError> {
    require_boolean(e)?;
    require_larger(e, target)?;
    let scenario = e.scenario().with_cover(target.to_vec())?;
    let supports: Vec<Vec<AssignmentKey>> = scenario
        .cover()
        .iter()
        .map(|c| e.section_set(c).sections.into_iter().collect())
        .collect();
    if supports.iter().any(|s| s.is_empty()) {
        return Ok(false);
    }
    let total: usize = supports.iter().map(|s| s.len()).sum();
    if total > BRUTE_FORCE_LIMIT {
        return Err(ExtensionError::InstanceTooLarge(total));
    }
    // For each original row, the first target context containing it; the
    // restriction condition is checked there (compatibility propagates it
    // to every other covering context).
    let base_checks: Vec<(usize, Context, BTreeSet<AssignmentKey>)> = e
        .scenario()
        .cover()
        .iter()
        .zip(e.rows())
        .map(|(d, row)| {
            let holder = scenario
                .cover()
                .iter()
                .position(|c| d.is_subset(c))
                .expect("cover_leq guarantees a covering context");
            (holder, d.clone(), row.support())
        })
        .collect();
    let mut chosen: Vec<Distribution> = Vec::new();
    Ok(search_supports(&scenario.cover().to_vec(), &supports, &base_checks, &mut chosen))
}

fn search_supports(
    cover: &[Context],
    supports: &[Vec<AssignmentKey>],
    base_checks: &[(usize, Context, BTreeSet<AssignmentKey>)],
    chosen: &mut Vec<Distribution>,
) -> bool {
    let level = chosen.len();
    if level == cover.len() {
        return true;
    }
    let pool = &supports[level];
    for mask in 1u64..(1u64 << pool.len()) {
        let support: Vec<AssignmentKey> = pool
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, k)| k.clone())
            .collect();
        let candidate = Distribution::from_support(cover[level].clone(), support);
        // restriction conditions anchored at this context
        let ok_base = base_checks
            .iter()
            .filter(|(holder, _, _)| *holder == level)
            .all(|(_, d, supp)| candidate.support_marginal(d).unwrap() == *supp);
        if !ok_base {
            continue;
        }
        // pairwise compatibility with earlier choices
        let ok_compat = chosen.iter().all(|prev| {
            let overlap = prev.context() & candidate.context();
            prev.support_marginal(&overlap).unwrap()
                == candidate.support_marginal(&overlap).unwrap()
        });
        if !ok_compat {
            continue;
        }
        chosen.push(candidate);
        if search_supports(cover, supports, base_checks, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// `e` is strongly non-extendable to the target iff some target context
/// has an empty consistent-assignment set; equivalently, iff the induced
/// sub-model on some target context is strongly contextual. Both routes
/// are computed and asserted equal.
pub fn is_strongly_non_extendable(
    e: &EmpiricalModel,
    target: &[Context],
) -> Result<(bool, Option<Context>), ExtensionError> {
    require_boolean(e)?;
    require_larger(e, target)?;
    let scenario = e.scenario().with_cover(target.to_vec())?;
    let mut witness = None;
    for ctx in scenario.cover() {
        let empty = e.section_set(ctx).sections.is_empty();
        let sub_sc = solver::is_strongly_contextual(&e.induced_submodel(ctx)?);
        debug_assert_eq!(empty, sub_sc, "the two routes must agree");
        if empty {
            witness = Some(ctx.clone());
            break;
        }
    }
    Ok((witness.is_some(), witness))
}

/// Verifies that each row of an extension is a global section of the
/// induced sub-model on its context: `f_C` restricts to `e_{D ∩ C}` for
/// every original maximal context `D`.
pub fn check_submodel_proposition(
    f: &EmpiricalModel,
    e: &EmpiricalModel,
) -> Result<bool, ExtensionError> {
    if !is_extension(f, e)? {
        return Err(ExtensionError::NotAnExtension);
    }
    for (ctx, row) in f.scenario().cover().iter().zip(f.rows()) {
        for d in e.scenario().cover() {
            let overlap = d & ctx;
            let from_f = row.marginalize(&overlap)?;
            let from_e = e.context_distribution(&overlap)?;
            if from_f.weights() != from_e.weights() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
