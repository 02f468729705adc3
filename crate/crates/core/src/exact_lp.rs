//! Exact phase-1 simplex over rationals.
//!
//! Decides feasibility of `A·w = b, w ≥ 0` with no tolerances: either a
//! non-negative exact solution or an exact Farkas certificate `y` with
//! `yᵀA ≤ 0` componentwise and `yᵀb > 0`. Bland's rule guarantees
//! termination. Problem sizes here are tiny (tens of rows and columns),
//! so a dense tableau is plenty.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum MembershipResult {
    /// Exact non-negative weights with `A·w = b`.
    Feasible(Vec<BigRational>),
    /// Exact separating vector: `y·A_j ≤ 0` for every column, `y·b > 0`.
    Infeasible(Vec<BigRational>),
}

/// Solves the phase-1 problem `min Σ artificials` for `A·w = b, w ≥ 0`.
/// `columns` holds the columns of `A` (each of length `rows`).
pub(crate) fn solve_membership(
    columns: &[Vec<BigRational>],
    rhs: &[BigRational],
) -> MembershipResult {
    let m = rhs.len();
    let n = columns.len();
    assert!(columns.iter().all(|c| c.len() == m), "ragged column");

    // Flip rows so the right-hand side is non-negative.
    let signs: Vec<bool> = rhs.iter().map(|b| b.is_negative()).collect();
    let flip = |row: usize, v: &BigRational| if signs[row] { -v.clone() } else { v.clone() };

    // Tableau rows: [w columns | artificial columns | rhs].
    let width = n + m + 1;
    let mut tableau: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width);
            for col in columns {
                row.push(flip(i, &col[i]));
            }
            for j in 0..m {
                row.push(if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                });
            }
            row.push(flip(i, &rhs[i]));
            row
        })
        .collect();

    // Basis starts as the artificials; phase-1 costs are 0 for w columns
    // and 1 for artificials, so the initial reduced-cost row is
    // c_j − Σ_i T[i][j] for w columns and 0 for artificial columns.
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut reduced: Vec<BigRational> = (0..width)
        .map(|j| {
            let column_sum: BigRational = tableau.iter().map(|row| row[j].clone()).sum();
            let cost = if (n..n + m).contains(&j) {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            cost - column_sum
        })
        .collect();
    // reduced[width-1] holds −(objective value).

    loop {
        // Bland: entering column = smallest index with negative reduced cost.
        let entering = (0..n + m).find(|&j| reduced[j].is_negative());
        let entering = match entering {
            Some(j) => j,
            None => break,
        };

        // Ratio test; ties resolved toward the smallest basis variable.
        let mut leaving: Option<(usize, BigRational)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if row[entering].is_positive() {
                let ratio = &row[width - 1] / &row[entering];
                let better = match &leaving {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let (pivot_row, _) = leaving.expect("phase-1 objective is bounded below by zero");

        // Pivot.
        let pivot = tableau[pivot_row][entering].clone();
        for v in tableau[pivot_row].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..m {
            if i == pivot_row || tableau[i][entering].is_zero() {
                continue;
            }
            let factor = tableau[i][entering].clone();
            for j in 0..width {
                let delta = &factor * &tableau[pivot_row][j];
                tableau[i][j] -= delta;
            }
        }
        if !reduced[entering].is_zero() {
            let factor = reduced[entering].clone();
            for j in 0..width {
                let delta = &factor * &tableau[pivot_row][j];
                reduced[j] -= delta;
            }
        }
        basis[pivot_row] = entering;
    }

    let objective = -reduced[width - 1].clone();
    if objective.is_zero() {
        let mut weights = vec![BigRational::zero(); n];
        for (i, &var) in basis.iter().enumerate() {
            if var < n {
                weights[var] = tableau[i][width - 1].clone();
            }
        }
        // Degenerate pivots can leave a basic artificial at value zero;
        // the w part is still an exact feasible point.
        debug_assert!(weights.iter().all(|w| !w.is_negative()));
        MembershipResult::Feasible(weights)
    } else {
        // Simplex multipliers: y_j = 1 − reduced cost of artificial j,
        // mapped back through the row flips.
        let y: Vec<BigRational> = (0..m)
            .map(|j| {
                let v = BigRational::one() - &reduced[n + j];
                if signs[j] {
                    -v
                } else {
                    v
                }
            })
            .collect();
        MembershipResult::Infeasible(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn feasible_system_returns_exact_weights() {
        // Columns (1,0), (0,1), (1,1); b = (1/2, 1/2).
        let columns = vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1)],
        ];
        let rhs = vec![rat(1, 2), rat(1, 2)];
        match solve_membership(&columns, &rhs) {
            MembershipResult::Feasible(w) => {
                assert!(w.iter().all(|v| !v.is_negative()));
                for i in 0..2 {
                    let lhs: BigRational = columns.iter().zip(&w).map(|(c, v)| &c[i] * v).sum();
                    assert_eq!(lhs, rhs[i]);
                }
            }
            MembershipResult::Infeasible(_) => panic!("should be feasible"),
        }
    }

    #[test]
    fn infeasible_system_returns_a_farkas_vector() {
        // Non-negative combinations of (1,0) and (0,1) never reach (-1, 1).
        let columns = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]];
        let rhs = vec![rat(-1, 1), rat(1, 1)];
        match solve_membership(&columns, &rhs) {
            MembershipResult::Infeasible(y) => {
                for col in &columns {
                    assert!(!dot(&y, col).is_positive(), "y·A must be ≤ 0");
                }
                assert!(dot(&y, &rhs).is_positive(), "y·b must be > 0");
            }
            MembershipResult::Feasible(_) => panic!("should be infeasible"),
        }
    }

    #[test]
    fn degenerate_target_on_a_vertex_is_feasible() {
        let columns = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        let rhs = vec![rat(1, 1), rat(1, 1)];
        match solve_membership(&columns, &rhs) {
            MembershipResult::Feasible(w) => {
                assert_eq!(w, vec![rat(1, 1), rat(0, 1)]);
            }
            MembershipResult::Infeasible(_) => panic!("vertex itself is feasible"),
        }
    }
}
