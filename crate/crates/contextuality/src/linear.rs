//! Exact rational linear algebra: feasibility of `A x = b, x ≥ 0` by
//! phase-one simplex with Bland's rule, and affine solves by Gaussian
//! elimination. No tolerances exist because the arithmetic is exact.

use num_traits::{One, Zero};

use crate::model::Rational;

/// Outcome of a non-negative feasibility solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A solution `x ≥ 0` with `A x = b`.
    Feasible(Vec<Rational>),
    /// A Farkas certificate `y` with `yᵀA ≤ 0` componentwise and
    /// `yᵀb > 0`, proving that no non-negative solution exists.
    Infeasible(Vec<Rational>),
}

/// Decides feasibility of `A x = b, x ≥ 0` exactly. `a` is row-major,
/// all rows of equal length.
pub fn solve_nonneg(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    // Flip rows so the right-hand side is non-negative; remember signs to
    // map the certificate back to the original orientation.
    let mut flipped = vec![false; m];
    let mut tableau: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rational> = Vec::with_capacity(n + m + 1);
        let flip = b[i] < Rational::zero();
        flipped[i] = flip;
        for j in 0..n {
            row.push(if flip { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        tableau.push(row);
    }
    // Objective row holds z_j - c_j for minimizing the artificial sum:
    // structural columns start at Σ_i a_ij, artificial columns at 0.
    let mut obj: Vec<Rational> = vec![Rational::zero(); n + m + 1];
    for row in &tableau {
        for j in 0..n {
            obj[j] += &row[j];
        }
        obj[n + m] += &row[n + m];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        // Bland: entering = smallest column index with positive reduced cost.
        let entering = (0..n + m).find(|&j| obj[j] > Rational::zero());
        let Some(col) = entering else { break };
        // Ratio test; ties broken by smallest basis variable (Bland).
        let mut pivot: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for (i, row) in tableau.iter().enumerate() {
            if row[col] > Rational::zero() {
                let ratio = &row[n + m] / &row[col];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[pivot.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    pivot = Some(i);
                }
            }
        }
        let row = pivot.expect("phase-one objective is bounded below by zero");
        pivot_step(&mut tableau, &mut obj, row, col);
        basis[row] = col;
    }
    if obj[n + m].is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &var) in basis.iter().enumerate() {
            if var < n {
                x[var] = tableau[i][n + m].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        // y = c_B B⁻¹, read off the artificial columns: obj[n+i] = y_i - 1.
        let mut y = Vec::with_capacity(m);
        for i in 0..m {
            let mut yi = obj[n + i].clone() + Rational::one();
            if flipped[i] {
                yi = -yi;
            }
            y.push(yi);
        }
        debug_assert!(verify_farkas(a, b, &y));
        Feasibility::Infeasible(y)
    }
}

fn pivot_step(tableau: &mut [Vec<Rational>], obj: &mut [Rational], row: usize, col: usize) {
    let pivot = tableau[row][col].clone();
    for v in tableau[row].iter_mut() {
        *v /= &pivot;
    }
    let pivot_row = tableau[row].clone();
    for (i, r) in tableau.iter_mut().enumerate() {
        if i != row && !r[col].is_zero() {
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                *v -= &factor * p;
            }
        }
    }
    if !obj[col].is_zero() {
        let factor = obj[col].clone();
        for (v, p) in obj.iter_mut().zip(pivot_row.iter()) {
            *v -= &factor * p;
        }
    }
}

/// Checks a Farkas certificate against the original system.
pub fn verify_farkas(a: &[Vec<Rational>], b: &[Rational], y: &[Rational]) -> bool {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if y.len() != m {
        return false;
    }
    for j in 0..n {
        let dot: Rational = (0..m).map(|i| &y[i] * &a[i][j]).sum();
        if dot > Rational::zero() {
            return false;
        }
    }
    let rhs: Rational = (0..m).map(|i| &y[i] * &b[i]).sum();
    rhs > Rational::zero()
}

/// Solves `A x = b` over the rationals with no sign constraint. Returns a
/// particular solution (free variables set to 0), or `None` if the system
/// is inconsistent.
pub fn solve_affine(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut r = a[i].clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
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
        pivots.push((rank, col));
        rank += 1;
    }
    for r in rows.iter().skip(rank) {
        if !r[n].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for &(row, col) in &pivots {
        x[col] = rows[row][n].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn rq(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn feasible_system() {
        // x1 + x2 = 1, x1 - x2 = 0  ->  x = (1/2, 1/2)
        let a = vec![vec![r(1), r(1)], vec![r(1), r(-1)]];
        let b = vec![r(1), r(0)];
        match solve_nonneg(&a, &b) {
            Feasibility::Feasible(x) => assert_eq!(x, vec![rq(1, 2), rq(1, 2)]),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_system_yields_valid_certificate() {
        // x1 + x2 = 1, x1 + x2 = 2 has no solution at all.
        let a = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        let b = vec![r(1), r(2)];
        match solve_nonneg(&a, &b) {
            Feasibility::Infeasible(y) => assert!(verify_farkas(&a, &b, &y)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn nonneg_constraint_bites() {
        // x1 - x2 = 1 with x1 + x2 = 0 forces x1 = -x2, infeasible for x ≥ 0.
        let a = vec![vec![r(1), r(-1)], vec![r(1), r(1)]];
        let b = vec![r(1), r(0)];
        match solve_nonneg(&a, &b) {
            Feasibility::Infeasible(y) => assert!(verify_farkas(&a, &b, &y)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_handled() {
        // -x1 = -1  ->  x1 = 1
        let a = vec![vec![r(-1)]];
        let b = vec![r(-1)];
        assert_eq!(solve_nonneg(&a, &b), Feasibility::Feasible(vec![r(1)]));
    }

    #[test]
    fn affine_solver() {
        let a = vec![vec![r(1), r(1)], vec![r(1), r(-1)]];
        let b = vec![r(1), r(3)];
        assert_eq!(solve_affine(&a, &b), Some(vec![r(2), r(-1)]));
        let a = vec![vec![r(1), r(1)], vec![r(2), r(2)]];
        let b = vec![r(1), r(3)];
        assert_eq!(solve_affine(&a, &b), None);
        // underdetermined: free variable set to zero
        let a = vec![vec![r(1), r(1)]];
        let b = vec![r(5)];
        assert_eq!(solve_affine(&a, &b), Some(vec![r(5), r(0)]));
    }
}
