//! Built-in example models: the standard small models used throughout
//! the test suite and available on the command line as `catalog:NAME`.

use std::collections::BTreeMap;

use crate::ksgen::KsScenario;
use crate::model::{AssignmentKey, Distribution, EmpiricalModel, Rational, Semiring};
use crate::scenario::{bell_scenario, Context, MeasurementScenario};
use crate::solver::ContextualityClass;

/// A named example model with its known classification.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub note: &'static str,
    pub expected: ContextualityClass,
    pub model: EmpiricalModel,
}

pub const NAMES: [&str; 10] = [
    "chsh",
    "chsh-possibilistic",
    "triangle",
    "pr-box",
    "ex-sig",
    "hardy",
    "ghz",
    "peres-mermin",
    "triangle-bell",
    "ks-18",
];

pub fn get(name: &str) -> Option<CatalogEntry> {
    let entry = match name {
        "chsh" => chsh(),
        "chsh-possibilistic" => chsh_possibilistic(),
        "triangle" => triangle(),
        "pr-box" => pr_box(),
        "ex-sig" => ex_sig(),
        "hardy" => hardy(),
        "ghz" => ghz(),
        "peres-mermin" => peres_mermin(),
        "triangle-bell" => triangle_bell(),
        "ks-18" => ks_18(),
        _ => return None,
    };
    Some(entry)
}

pub fn entries() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| get(n).unwrap()).collect()
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn binary_outcomes() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn scenario(measurements: &[&str], cover: &[&[&str]]) -> MeasurementScenario {
    MeasurementScenario::new(
        labels(measurements),
        binary_outcomes(),
        cover.iter().map(|c| labels(c)).collect(),
    )
    .expect("catalog scenario is valid")
}

fn key(s: &str) -> AssignmentKey {
    s.chars().map(|c| c.to_digit(10).unwrap() as usize).collect()
}

fn prob_row(context: Context, entries: &[(&str, i64, i64)]) -> Distribution {
    let weights: BTreeMap<AssignmentKey, Rational> = entries
        .iter()
        .map(|&(k, n, d)| (key(k), Rational::new(n.into(), d.into())))
        .collect();
    Distribution::new(Semiring::Probability, context, weights)
}

fn bool_row(context: Context, support: &[&str]) -> Distribution {
    Distribution::from_support(context, support.iter().map(|s| key(s)))
}

/// Keys of length `len` whose number of 1s has the given parity.
fn parity_support(len: usize, odd: bool) -> Vec<AssignmentKey> {
    crate::solver::all_assignments(len, 2)
        .into_iter()
        .filter(|k| (k.iter().sum::<usize>() % 2 == 1) == odd)
        .collect()
}

/// The quantum (2, 2, 2) table realizing the Bell state with measurement
/// angles 0 and π/3: one perfectly correlated context, the rest at 3/8.
fn chsh() -> CatalogEntry {
    let s = scenario(
        &["A", "A'", "B", "B'"],
        &[&["A", "B"], &["A", "B'"], &["A'", "B"], &["A'", "B'"]],
    );
    let rows = vec![
        prob_row(Context::from([0, 2]), &[("00", 1, 2), ("11", 1, 2)]),
        prob_row(
            Context::from([0, 3]),
            &[("00", 3, 8), ("01", 1, 8), ("10", 1, 8), ("11", 3, 8)],
        ),
        prob_row(
            Context::from([1, 2]),
            &[("00", 3, 8), ("01", 1, 8), ("10", 1, 8), ("11", 3, 8)],
        ),
        prob_row(
            Context::from([1, 3]),
            &[("00", 1, 8), ("01", 3, 8), ("10", 3, 8), ("11", 1, 8)],
        ),
    ];
    CatalogEntry {
        name: "chsh",
        note: "Bell-state table violating the CHSH inequality; \
               probabilistically contextual but logically explainable",
        expected: ContextualityClass::Contextual,
        model: EmpiricalModel::new(s, Semiring::Probability, rows)
            .expect("catalog model is well-formed"),
    }
}

/// Possibilistic collapse of the CHSH table.
fn chsh_possibilistic() -> CatalogEntry {
    let model = chsh().model.possibilistic_collapse();
    CatalogEntry {
        name: "chsh-possibilistic",
        note: "possibilistic collapse of the CHSH table; has global sections",
        expected: ContextualityClass::NonContextual,
        model,
    }
}

/// Three pairwise contexts forcing disagreement around a cycle of odd
/// length: no assignment is consistent anywhere.
fn triangle() -> CatalogEntry {
    let s = scenario(&["A", "B", "C"], &[&["A", "B"], &["B", "C"], &["C", "A"]]);
    let anti = ["01", "10"];
    let rows = vec![
        bool_row(Context::from([0, 1]), &anti),
        bool_row(Context::from([1, 2]), &anti),
        bool_row(Context::from([0, 2]), &anti),
    ];
    CatalogEntry {
        name: "triangle",
        note: "anti-correlation on a 3-cycle; strongly contextual",
        expected: ContextualityClass::StronglyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// Possibilistic PR box, appearing as a sub-model of `triangle-bell`.
fn pr_box() -> CatalogEntry {
    let s = scenario(
        &["A@1", "B@1", "A@2", "C@2"],
        &[
            &["A@1", "A@2"],
            &["A@1", "C@2"],
            &["B@1", "A@2"],
            &["B@1", "C@2"],
        ],
    );
    let rows = vec![
        bool_row(Context::from([0, 2]), &["00", "11"]),
        bool_row(Context::from([0, 3]), &["01", "10"]),
        bool_row(Context::from([1, 2]), &["01", "10"]),
        bool_row(Context::from([1, 3]), &["01", "10"]),
    ];
    CatalogEntry {
        name: "pr-box",
        note: "possibilistic PR box: an odd number of anti-correlated contexts",
        expected: ContextualityClass::StronglyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// A compatible 4-cycle model whose canonical candidate on {ABD, BCD}
/// signals: compatibility does not persist under every cover enlargement.
fn ex_sig() -> CatalogEntry {
    let s = scenario(
        &["A", "B", "C", "D"],
        &[&["A", "B"], &["B", "C"], &["C", "D"], &["D", "A"]],
    );
    let full = ["00", "01", "10", "11"];
    let rows = vec![
        bool_row(Context::from([0, 1]), &full),
        bool_row(Context::from([1, 2]), &["00", "11"]),
        bool_row(Context::from([2, 3]), &["00", "11"]),
        bool_row(Context::from([0, 3]), &full),
    ];
    CatalogEntry {
        name: "ex-sig",
        note: "4-cycle whose canonical extension to {ABD, BCD} signals",
        expected: ContextualityClass::NonContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// Possibilistic Hardy table: the section 00 at AB cannot be extended
/// globally, yet other sections can.
fn hardy() -> CatalogEntry {
    let s = scenario(
        &["A", "A'", "B", "B'"],
        &[&["A", "B"], &["A", "B'"], &["A'", "B"], &["A'", "B'"]],
    );
    let rows = vec![
        bool_row(Context::from([0, 2]), &["00", "01", "10", "11"]),
        bool_row(Context::from([0, 3]), &["01", "10", "11"]),
        bool_row(Context::from([1, 2]), &["01", "10", "11"]),
        bool_row(Context::from([1, 3]), &["00", "01", "10"]),
    ];
    CatalogEntry {
        name: "hardy",
        note: "Hardy paradox supports; logically but not strongly contextual",
        expected: ContextualityClass::LogicallyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// GHZ supports on the (3, 2, 2) Bell scenario: parity constraints on
/// XXX and the two-Y contexts admit no global assignment.
fn ghz() -> CatalogEntry {
    let site = labels(&["X", "Y"]);
    let (s, _) = bell_scenario(&[site.clone(), site.clone(), site], binary_outcomes())
        .expect("catalog scenario is valid");
    let rows = s
        .cover()
        .iter()
        .map(|c| {
            // Y@i measurements carry odd global indices.
            let y_count = c.iter().filter(|&&m| m % 2 == 1).count();
            let support: Vec<AssignmentKey> = match y_count {
                0 => parity_support(3, true),
                2 => parity_support(3, false),
                _ => crate::solver::all_assignments(3, 2),
            };
            Distribution::from_support(c.clone(), support)
        })
        .collect();
    CatalogEntry {
        name: "ghz",
        note: "GHZ parity supports on three sites; strongly contextual",
        expected: ContextualityClass::StronglyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// Possibilistic Peres-Mermin square: odd parity on the three rows of the
/// grid, even parity on the three columns.
fn peres_mermin() -> CatalogEntry {
    let s = scenario(
        &["A", "B", "C", "D", "E", "F", "G", "H", "I"],
        &[
            &["A", "B", "C"],
            &["D", "E", "F"],
            &["G", "H", "I"],
            &["A", "D", "G"],
            &["B", "E", "H"],
            &["C", "F", "I"],
        ],
    );
    let odd = parity_support(3, true);
    let even = parity_support(3, false);
    let rows = s
        .cover()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let support = if i < 3 { odd.clone() } else { even.clone() };
            Distribution::from_support(c.clone(), support)
        })
        .collect();
    CatalogEntry {
        name: "peres-mermin",
        note: "Peres-Mermin square supports; strongly contextual",
        expected: ContextualityClass::StronglyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// The (2, 3, 2) Bell model equivalent to `triangle`: correlated on
/// matching measurements, anti-correlated otherwise.
fn triangle_bell() -> CatalogEntry {
    let site = labels(&["A", "B", "C"]);
    let (s, _) = bell_scenario(&[site.clone(), site], binary_outcomes())
        .expect("catalog scenario is valid");
    let rows = s
        .cover()
        .iter()
        .map(|c| {
            let mut it = c.iter();
            let (&i, &j) = (it.next().unwrap(), it.next().unwrap());
            // Base measurements match iff the site-2 index is the site-1
            // index shifted by the site size.
            let support: &[&str] = if j == i + 3 { &["00", "11"] } else { &["01", "10"] };
            bool_row(c.clone(), support)
        })
        .collect();
    CatalogEntry {
        name: "triangle-bell",
        note: "two-site Bell form of the triangle model",
        expected: ContextualityClass::StronglyContextual,
        model: EmpiricalModel::new(s, Semiring::Boolean, rows)
            .expect("catalog model is well-formed"),
    }
}

/// The 18-vector Kochen-Specker proof in dimension 4: nine orthogonal
/// tetrads, each vector shared by exactly two of them.
fn ks_18() -> CatalogEntry {
    const TETRADS: [[&str; 4]; 9] = [
        ["0001", "0010", "1100", "1-100"],
        ["0001", "0100", "1010", "10-10"],
        ["1-11-1", "1-1-11", "1100", "0011"],
        ["1-11-1", "1111", "10-10", "010-1"],
        ["0010", "0100", "1001", "100-1"],
        ["1-1-11", "1111", "100-1", "01-10"],
        ["11-11", "111-1", "1-100", "0011"],
        ["11-11", "-1111", "1010", "010-1"],
        ["111-1", "-1111", "1001", "01-10"],
    ];
    let mut measurements: Vec<&str> = Vec::new();
    for tetrad in &TETRADS {
        for v in tetrad {
            if !measurements.contains(v) {
                measurements.push(v);
            }
        }
    }
    let cover: Vec<&[&str]> = TETRADS.iter().map(|t| t.as_slice()).collect();
    let s = scenario(&measurements, &cover);
    let model = KsScenario::new(s)
        .expect("binary outcomes with constant context size")
        .ks_model();
    CatalogEntry {
        name: "ks-18",
        note: "18-vector Kochen-Specker model (9 tetrads in dimension 4)",
        expected: ContextualityClass::StronglyContextual,
        model,
    }
}
