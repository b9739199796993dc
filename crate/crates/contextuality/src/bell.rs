//! Codiagonal machinery and the Bell-model construction: from a model on
//! the cover of all n-element measurement subsets, build an n-partite
//! model on n site-tagged copies of the measurement set, supported on
//! assignments that give every copy of a measurement the same outcome.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::extension::{canonical_extension, ExtensionError, ExtensionReport};
use crate::model::{AssignmentKey, Distribution, EmpiricalModel, ModelError, Rational};
use crate::scenario::{bell_scenario, power_cover, BellStructure, Context, ScenarioError};
use crate::solver;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BellError {
    #[error("model's cover is not the cover of all {0}-element subsets")]
    CoverNotPowerCover(usize),
    #[error("site count must be at least 1")]
    BadArity,
    #[error("models do not form a constructed (base, Bell) pair")]
    NotConstructedPair,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// Site-tagged measurement space: `n` copies of a base measurement set,
/// tagged measurement `⟨x, i⟩` at global index `(i-1)·|X| + x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodiagonalMap {
    base_len: usize,
    site_count: usize,
}

impl CodiagonalMap {
    pub fn new(base_len: usize, site_count: usize) -> Result<Self, BellError> {
        if site_count == 0 {
            return Err(BellError::BadArity);
        }
        Ok(Self { base_len, site_count })
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// Base measurement index of a tagged index.
    pub fn base_of(&self, tagged: usize) -> usize {
        tagged % self.base_len
    }

    /// Forgets site information: `{x : ∃i ⟨x,i⟩ ∈ U}`.
    pub fn underline(&self, tagged: &Context) -> Context {
        tagged.iter().map(|&m| self.base_of(m)).collect()
    }

    /// Restricts a codiagonal assignment on a tagged context to its
    /// underlying base assignment (keys in sorted context order).
    pub fn underline_key(&self, tagged: &Context, key: &[usize]) -> Option<AssignmentKey> {
        let base = self.underline(tagged);
        let mut values: BTreeMap<usize, usize> = BTreeMap::new();
        for (&m, &o) in tagged.iter().zip(key) {
            match values.insert(self.base_of(m), o) {
                Some(prev) if prev != o => return None, // not codiagonal
                _ => {}
            }
        }
        Some(base.iter().map(|b| values[b]).collect())
    }

    /// Lifts a base assignment to the codiagonal assignment on a tagged
    /// context whose underline matches.
    pub fn lift_key(&self, tagged: &Context, base_key: &[usize]) -> AssignmentKey {
        let base = self.underline(tagged);
        let positions: BTreeMap<usize, usize> =
            base.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        tagged
            .iter()
            .map(|&m| base_key[positions[&self.base_of(m)]])
            .collect()
    }

    /// All codiagonal assignments on a tagged context, in bijection with
    /// the assignments on its underline.
    pub fn codiagonal_assignments(&self, tagged: &Context, n_out: usize) -> Vec<AssignmentKey> {
        let base = self.underline(tagged);
        solver::all_assignments(base.len(), n_out)
            .into_iter()
            .map(|bk| self.lift_key(tagged, &bk))
            .collect()
    }
}

/// A constructed Bell model together with its site structure and the
/// codiagonal map back to the base measurement set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellModel {
    pub model: EmpiricalModel,
    pub structure: BellStructure,
    pub map: CodiagonalMap,
}

/// Builds the n-partite Bell model of a model on the cover of all
/// n-element subsets: each maximal context (one tagged measurement per
/// site) is weighted by the base marginal on its underline, on
/// codiagonal assignments, and by 0 elsewhere.
pub fn bell_construction(f: &EmpiricalModel, n: usize) -> Result<BellModel, BellError> {
    let x_len = f.scenario().measurements().len();
    if n == 0 {
        return Err(BellError::BadArity);
    }
    // With more sites than base measurements, every underline still lands
    // in the down-closure of the x_len-subset cover.
    let expected =
        power_cover(x_len, n.min(x_len)).map_err(|_| BellError::CoverNotPowerCover(n))?;
    let mut actual: Vec<Context> = f.scenario().cover().to_vec();
    actual.sort();
    if actual != expected {
        return Err(BellError::CoverNotPowerCover(n));
    }
    let site: Vec<String> = f.scenario().measurements().to_vec();
    let sites: Vec<Vec<String>> = vec![site; n];
    let (scenario, structure) = bell_scenario(&sites, f.scenario().outcomes().to_vec())?;
    let map = CodiagonalMap::new(x_len, n)?;
    let mut rows = Vec::new();
    for ctx in scenario.cover() {
        let base_ctx = map.underline(ctx);
        let base_dist = f.context_distribution(&base_ctx)?;
        let weights: BTreeMap<AssignmentKey, Rational> = base_dist
            .weights()
            .iter()
            .map(|(bk, w)| (map.lift_key(ctx, bk), w.clone()))
            .collect();
        rows.push(Distribution::new(f.semiring(), ctx.clone(), weights));
    }
    let model = EmpiricalModel::new(scenario, f.semiring(), rows)?;
    Ok(BellModel { model, structure, map })
}

/// Result of the end-to-end pipeline: canonical extension to the
/// n-subset cover, then the Bell construction.
#[derive(Debug, Clone)]
pub enum BellifyResult {
    Model(BellModel),
    Failed(ExtensionReport),
}

/// Extends a Boolean model canonically to the cover of all n(M)-element
/// subsets and, when that succeeds, applies the Bell construction.
pub fn bellify(e: &EmpiricalModel) -> Result<BellifyResult, BellError> {
    let n = e.scenario().max_context_size();
    let target = power_cover(e.scenario().measurements().len(), n)?;
    match canonical_extension(e, &target)? {
        ExtensionReport::WellDefined(extended) => {
            Ok(BellifyResult::Model(bell_construction(&extended, n)?))
        }
        failure => Ok(BellifyResult::Failed(failure)),
    }
}

/// Verifies the global-section bijection between a base model and its
/// constructed Bell model: consistent global assignments correspond
/// one-to-one under the codiagonal map, and the hierarchy classifications
/// agree.
pub fn global_section_bijection_check(
    f: &EmpiricalModel,
    bell: &BellModel,
) -> Result<bool, BellError> {
    let x_len = f.scenario().measurements().len();
    let n = bell.map.site_count();
    if bell.model.scenario().measurements().len() != x_len * n
        || bell.map.base_len != x_len
        || bell.model.semiring() != f.semiring()
    {
        return Err(BellError::NotConstructedPair);
    }
    let base_sections = f.section_set(&f.scenario().all_measurements()).sections;
    let tagged_all = bell.model.scenario().all_measurements();
    let bell_sections = bell.model.section_set(&tagged_all).sections;
    if base_sections.len() != bell_sections.len() {
        return Ok(false);
    }
    // every Bell global section must be codiagonal and underline into the
    // base section set; injectivity then gives the bijection
    let mut images = std::collections::BTreeSet::new();
    for s in &bell_sections {
        match bell.map.underline_key(&tagged_all, s) {
            Some(under) if base_sections.contains(&under) => {
                images.insert(under);
            }
            _ => return Ok(false),
        }
    }
    if images != base_sections {
        return Ok(false);
    }
    let same_class = match f.semiring() {
        crate::model::Semiring::Signed => true,
        _ => solver::classify(f) == solver::classify(&bell.model),
    };
    Ok(same_class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::model::Semiring;

    fn model(name: &str) -> EmpiricalModel {
        catalog::get(name).unwrap().model
    }

    fn key(s: &str) -> AssignmentKey {
        s.chars().map(|c| c.to_digit(10).unwrap() as usize).collect()
    }

    #[test]
    fn underline_examples() {
        let map = CodiagonalMap::new(3, 2).unwrap(); // X = {A,B,C}
        // {A@1, A@2} -> {A}
        assert_eq!(map.underline(&Context::from([0, 3])), Context::from([0]));
        // {A@1, B@2} -> {A, B}
        assert_eq!(map.underline(&Context::from([0, 4])), Context::from([0, 1]));
        let map3 = CodiagonalMap::new(3, 3).unwrap();
        // {A@1, B@2, C@3} -> {A, B, C}
        assert_eq!(
            map3.underline(&Context::from([0, 4, 8])),
            Context::from([0, 1, 2])
        );
    }

    #[test]
    fn codiagonal_assignment_counts() {
        let map = CodiagonalMap::new(2, 3).unwrap(); // X = {A,B}, 3 sites
        // {A@1, A@2}: forced equality
        assert_eq!(
            map.codiagonal_assignments(&Context::from([0, 2]), 2),
            vec![key("00"), key("11")]
        );
        // {A@1, B@2}: no repeats, all four
        assert_eq!(map.codiagonal_assignments(&Context::from([0, 3]), 2).len(), 4);
        // {A@1, A@2, B@3}: A copies equal
        let cs = map.codiagonal_assignments(&Context::from([0, 2, 5]), 2);
        assert_eq!(cs.len(), 4);
        for c in &cs {
            assert_eq!(c[0], c[1]);
        }
    }

    #[test]
    fn underline_commutes_with_restriction() {
        let map = CodiagonalMap::new(3, 2).unwrap();
        let u = Context::from([0, 1, 3, 5]); // {A@1, B@1, A@2, C@2}
        for s in map.codiagonal_assignments(&u, 2) {
            let v = Context::from([0, 3]);
            let positions: Vec<usize> = v
                .iter()
                .map(|m| u.iter().position(|x| x == m).unwrap())
                .collect();
            let s_v: AssignmentKey = positions.iter().map(|&p| s[p]).collect();
            let under_s = map.underline_key(&u, &s).unwrap();
            let under_v = map.underline(&v);
            let base_u = map.underline(&u);
            let base_positions: Vec<usize> = under_v
                .iter()
                .map(|m| base_u.iter().position(|x| x == m).unwrap())
                .collect();
            let restricted_under: AssignmentKey =
                base_positions.iter().map(|&p| under_s[p]).collect();
            assert_eq!(map.underline_key(&v, &s_v).unwrap(), restricted_under);
        }
    }

    #[test]
    fn triangle_bell_matches_table() {
        let tri = model("triangle");
        let BellifyResult::Model(bell) = bellify(&tri).unwrap() else {
            panic!("triangle must bellify");
        };
        let expected = model("triangle-bell");
        assert_eq!(bell.model, expected);
    }

    #[test]
    fn single_measurement_bell() {
        use crate::model::Distribution;
        use crate::scenario::MeasurementScenario;
        let s = MeasurementScenario::new(
            vec!["M".into()],
            vec!["0".into(), "1".into()],
            vec![vec!["M".into()]],
        )
        .unwrap();
        let d = Distribution::from_support(Context::from([0]), [key("0")]);
        let f = EmpiricalModel::new(s, Semiring::Boolean, vec![d]).unwrap();
        let bell = bell_construction(&f, 2).unwrap();
        assert_eq!(bell.model.scenario().cover().len(), 1);
        assert_eq!(bell.model.rows()[0].support(), [key("00")].into());
    }

    #[test]
    fn non_power_cover_is_rejected() {
        let chsh = model("chsh-possibilistic");
        assert!(matches!(
            bell_construction(&chsh, 2),
            Err(BellError::CoverNotPowerCover(2))
        ));
    }

    #[test]
    fn bell_rows_are_codiagonal_only() {
        let tri = model("triangle");
        let BellifyResult::Model(bell) = bellify(&tri).unwrap() else { unreachable!() };
        for (ctx, row) in bell.model.scenario().cover().iter().zip(bell.model.rows()) {
            for k in row.support() {
                assert!(bell.map.underline_key(ctx, &k).is_some());
            }
        }
    }

    #[test]
    fn triangle_bijection_check() {
        let tri = model("triangle");
        let BellifyResult::Model(bell) = bellify(&tri).unwrap() else { unreachable!() };
        assert!(global_section_bijection_check(&tri, &bell).unwrap());
        assert!(solver::is_strongly_contextual(&bell.model));
    }

    #[test]
    fn full_support_model_bijection() {
        use crate::model::Distribution;
        use crate::scenario::MeasurementScenario;
        let s = MeasurementScenario::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec!["0".into(), "1".into()],
            vec![
                vec!["A".into(), "B".into()],
                vec!["A".into(), "C".into()],
                vec!["B".into(), "C".into()],
            ],
        )
        .unwrap();
        let rows: Vec<Distribution> = s
            .cover()
            .iter()
            .map(|c| {
                Distribution::from_support(c.clone(), solver::all_assignments(2, 2))
            })
            .collect();
        let f = EmpiricalModel::new(s, Semiring::Boolean, rows).unwrap();
        let bell = bell_construction(&f, 2).unwrap();
        assert!(global_section_bijection_check(&f, &bell).unwrap());
        let x = f.scenario().all_measurements();
        let tagged = bell.model.scenario().all_measurements();
        assert_eq!(
            f.section_set(&x).sections.len(),
            bell.model.section_set(&tagged).sections.len()
        );
    }
}
