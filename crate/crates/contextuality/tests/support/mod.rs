//! Independent oracles used by the integration suites: exhaustive
//! global-assignment enumeration and Fourier-Motzkin elimination. These
//! deliberately avoid the library's backtracking search and simplex
//! solver so that agreement between the two routes is meaningful.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use contextuality::model::{AssignmentKey, EmpiricalModel, Rational};
use contextuality::scenario::Context;
use contextuality::solver::all_assignments;

/// `S_e(U)` by filtering every assignment of `U` against every row's
/// marginal support, with no pruning or ordering tricks.
pub fn exhaustive_sections(e: &EmpiricalModel, u: &Context) -> BTreeSet<AssignmentKey> {
    let order: Vec<usize> = u.iter().copied().collect();
    let n_out = e.scenario().outcomes().len();
    all_assignments(order.len(), n_out)
        .into_iter()
        .filter(|s| {
            e.rows().iter().all(|row| {
                let overlap: Context = row.context() & u;
                let positions: Vec<usize> = overlap
                    .iter()
                    .map(|m| order.iter().position(|x| x == m).unwrap())
                    .collect();
                let restricted: AssignmentKey = positions.iter().map(|&p| s[p]).collect();
                row.support_marginal(&overlap).unwrap().contains(&restricted)
            })
        })
        .collect()
}

/// The marginal-matching system of a probability model: variables are
/// the consistent global assignments, one equality per support entry of
/// each row.
pub fn marginal_system(e: &EmpiricalModel) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let x = e.scenario().all_measurements();
    let vars: Vec<AssignmentKey> = e.section_set(&x).sections.into_iter().collect();
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
                    if restricted == *key { Rational::one() } else { Rational::zero() }
                })
                .collect();
            a.push(row);
            b.push(value.clone());
        }
    }
    (a, b)
}

/// Feasibility of `A x = b, x ≥ 0` by rational elimination: reduce the
/// equalities to a particular solution plus a nullspace basis, then run
/// Fourier-Motzkin on the non-negativity constraints over the free
/// coordinates.
pub fn feasible_by_elimination(a: &[Vec<Rational>], b: &[Rational]) -> bool {
    let n = a.first().map_or(0, |r| r.len());
    let Some((x0, nullspace)) = affine_solution_space(a, b) else {
        return false;
    };
    if nullspace.is_empty() {
        return x0.iter().all(|v| *v >= Rational::zero());
    }
    // constraints: x0[i] + Σ_k nullspace[k][i] t_k ≥ 0
    let mut rows: BTreeSet<(Vec<Rational>, Rational)> = BTreeSet::new();
    for i in 0..n {
        let coeffs: Vec<Rational> = nullspace.iter().map(|v| v[i].clone()).collect();
        rows.insert(normalize_row(coeffs, -x0[i].clone()));
    }
    fourier_motzkin(rows, nullspace.len())
}

/// RREF of `[A|b]`: returns a particular solution (free variables 0) and
/// a basis of the nullspace of `A`, or `None` if inconsistent.
fn affine_solution_space(
    a: &[Vec<Rational>],
    b: &[Rational],
) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut r = a[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v /= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && !r[col].is_zero() {
                let f = r[col].clone();
                for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                    *v -= &f * p;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    if rows.iter().skip(rank).any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut x0 = vec![Rational::zero(); n];
    for (r, &col) in pivot_cols.iter().enumerate() {
        x0[col] = rows[r][n].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (r, &col) in pivot_cols.iter().enumerate() {
                v[col] = -rows[r][f].clone();
            }
            v
        })
        .collect();
    Some((x0, nullspace))
}

/// Scales an inequality `coeffs · t ≥ rhs` so the first nonzero
/// coefficient is ±1 (or, if all coefficients vanish, leaves the rhs
/// sign only), for deduplication.
fn normalize_row(coeffs: Vec<Rational>, rhs: Rational) -> (Vec<Rational>, Rational) {
    match coeffs.iter().find(|c| !c.is_zero()) {
        None => {
            let sign = if rhs.is_zero() {
                Rational::zero()
            } else if rhs > Rational::zero() {
                Rational::one()
            } else {
                -Rational::one()
            };
            (coeffs, sign)
        }
        Some(first) => {
            let scale = first.abs();
            (
                coeffs.iter().map(|c| c / &scale).collect(),
                rhs / scale,
            )
        }
    }
}

/// Decides satisfiability of a system of `coeffs · t ≥ rhs` constraints
/// by eliminating variables one at a time.
fn fourier_motzkin(rows: BTreeSet<(Vec<Rational>, Rational)>, vars: usize) -> bool {
    let mut rows = rows;
    for j in (0..vars).rev() {
        let mut pos: Vec<(Vec<Rational>, Rational)> = Vec::new();
        let mut neg: Vec<(Vec<Rational>, Rational)> = Vec::new();
        let mut keep: BTreeSet<(Vec<Rational>, Rational)> = BTreeSet::new();
        for (coeffs, rhs) in rows {
            if coeffs[j].is_zero() {
                keep.insert((coeffs, rhs));
            } else if coeffs[j] > Rational::zero() {
                pos.push((coeffs, rhs));
            } else {
                neg.push((coeffs, rhs));
            }
        }
        // p: c_j t_j ≥ rhs_p - rest_p;  q: -d_j t_j ≥ rhs_q - rest_q
        // combine to d_j * p + c_j * q with t_j cancelled.
        for (pc, pr) in &pos {
            for (nc, nr) in &neg {
                let cp = pc[j].clone();
                let cn = -nc[j].clone();
                let coeffs: Vec<Rational> = pc
                    .iter()
                    .zip(nc)
                    .map(|(x, y)| x * &cn + y * &cp)
                    .collect();
                let rhs = pr * &cn + nr * &cp;
                keep.insert(normalize_row(coeffs, rhs));
            }
        }
        rows = keep;
    }
    rows.iter()
        .all(|(_, rhs)| *rhs <= Rational::zero())
}

/// Exhaustive oracle for probabilistic extendability.
pub fn lp_feasible_by_elimination(e: &EmpiricalModel) -> bool {
    let (a, b) = marginal_system(e);
    if a.first().map_or(0, |r| r.len()) == 0 {
        // no consistent global assignment: feasible only if every
        // constraint already reads 0 = 0
        return b.iter().all(|v| v.is_zero());
    }
    feasible_by_elimination(&a, &b)
}
