//! Dense simplex solver for fractional covering programs: minimize
//! `sum(x)` subject to `A x >= b`, `x >= 0`, with `A >= 0` and `b > 0`.
//!
//! This is the workhorse behind the MAX-objective frequency solver. The
//! slack basis of a covering program is dual feasible (all costs are
//! non-negative), so the main loop is a dual simplex that needs no
//! artificial variables; a primal cleanup pass afterwards re-verifies
//! the reduced costs from scratch and repairs any drift, so a false
//! optimum cannot be reported. Dantzig-style pricing with a Bland-rule
//! fallback after a degeneracy streak protects against cycling. Callers
//! should present equilibrated rows (entries of comparable magnitude).

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

pub(crate) struct CoveringSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Solves the covering LP for a dense non-negative matrix with `m`
/// columns (one row per covering constraint). Every row must contain a
/// positive entry, otherwise the program is infeasible and the row index
/// is reported.
pub(crate) fn solve_covering(a: &[Vec<f64>], b: &[f64], m: usize) -> Result<CoveringSolution> {
    let n = a.len();
    if n == 0 || m == 0 {
        return Err(Error::EmptyInput(
            "covering LP needs rows and columns".into(),
        ));
    }
    assert_eq!(b.len(), n);
    // Columns: m structural, n surplus, rhs. Rows are written for the
    // surplus basis: -A x + s = -b.
    let cols = m + n;
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (i, row) in a.iter().enumerate() {
        debug_assert_eq!(row.len(), m);
        debug_assert!(b[i] > 0.0);
        let mut r = vec![0.0; cols + 1];
        for (dst, &src) in r.iter_mut().zip(row) {
            *dst = -src;
        }
        r[m + i] = 1.0;
        r[cols] = -b[i];
        tab.push(r);
    }
    let mut basis: Vec<usize> = (0..n).map(|i| m + i).collect();
    let cost = |j: usize| if j < m { 1.0 } else { 0.0 };

    dual_simplex(&mut tab, &mut basis, &cost)?;
    // Feasible now; verify optimality (and absorb any reduced-cost
    // drift) with primal iterations. Usually zero pivots.
    primal_simplex(&mut tab, &mut basis, &cost)?;

    let mut x = vec![0.0; m];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < m {
            x[bv] = tab[i][cols].max(0.0);
        }
    }
    let value = x.iter().sum();
    Ok(CoveringSolution { x, value })
}

/// Reduced costs for the current basis, computed from scratch.
fn reduced_costs(tab: &[Vec<f64>], basis: &[usize], cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
    let active_cols = tab[0].len() - 1;
    let basis_cost: Vec<f64> = basis.iter().map(|&b| cost(b)).collect();
    (0..active_cols)
        .map(|j| {
            let mut reduced = cost(j);
            for (bc, row) in basis_cost.iter().zip(tab) {
                reduced -= bc * row[j];
            }
            reduced
        })
        .collect()
}

/// Dual simplex from a dual-feasible basis: drives the right-hand side
/// non-negative while keeping all reduced costs non-negative.
fn dual_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &dyn Fn(usize) -> f64,
) -> Result<()> {
    let n = tab.len();
    let rhs = tab[0].len() - 1;
    let max_iters = 500 * (n + rhs) + 1000;
    let bland_after = 20 * (n + rhs) + 100;
    let mut z = reduced_costs(tab, basis, cost);
    let refresh_every = 500usize;

    for iter in 0..max_iters {
        if iter % refresh_every == refresh_every - 1 {
            z = reduced_costs(tab, basis, cost);
        }
        let bland = iter >= bland_after;
        // Leaving row: most negative basic value; under Bland's rule the
        // negative row whose basic variable has the smallest index.
        let mut leave: Option<usize> = None;
        let mut most_negative = -FEAS_TOL;
        for (i, row) in tab.iter().enumerate() {
            if row[rhs] >= -FEAS_TOL {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    if bland {
                        basis[i] < basis[l]
                    } else {
                        row[rhs] < most_negative
                    }
                }
            };
            if better {
                most_negative = row[rhs];
                leave = Some(i);
            }
        }
        let Some(leave) = leave else {
            return Ok(());
        };
        // Entering column: minimum ratio z_j / -row_j over negative row
        // entries, which keeps the reduced costs non-negative.
        let mut enter: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (j, (&zj, &rj)) in z.iter().zip(&tab[leave][..rhs]).enumerate() {
            if rj < -PIVOT_TOL {
                let ratio = zj.max(0.0) / -rj;
                let better = match enter {
                    None => true,
                    Some(cur) => {
                        ratio < best_ratio - 1e-12
                            || (ratio < best_ratio + 1e-12
                                && if bland {
                                    j < cur
                                } else {
                                    -rj > -tab[leave][cur]
                                })
                    }
                };
                if better {
                    best_ratio = best_ratio.min(ratio);
                    enter = Some(j);
                }
            }
        }
        let Some(enter) = enter else {
            // No way to raise this row: the constraint is unsatisfiable.
            return Err(Error::Uncovered(format!("covering row {leave} infeasible")));
        };
        pivot(tab, basis, leave, enter);
        let factor = z[enter];
        if factor != 0.0 {
            for (zj, pv) in z.iter_mut().zip(&tab[leave][..rhs]) {
                *zj -= factor * pv;
            }
        }
        z[enter] = 0.0;
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        residual: f64::NAN,
    })
}

/// Primal simplex from a feasible basis, until all reduced costs are
/// non-negative. The reduced-cost row is maintained incrementally and
/// recomputed before accepting optimality, so drift cannot produce a
/// false stop.
fn primal_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &dyn Fn(usize) -> f64,
) -> Result<()> {
    let n = tab.len();
    let rhs = tab[0].len() - 1;
    let max_iters = 500 * (n + rhs) + 1000;
    let bland_after = 20 * (n + rhs) + 100;
    let refresh_every = 500usize;
    let mut degenerate_streak = 0usize;

    let mut in_basis = vec![false; rhs];
    for &b in basis.iter() {
        in_basis[b] = true;
    }
    let mut z = reduced_costs(tab, basis, cost);

    for iter in 0..max_iters {
        if iter % refresh_every == refresh_every - 1 {
            z = reduced_costs(tab, basis, cost);
        }
        let bland = iter >= bland_after || degenerate_streak > n + 50;
        let mut enter: Option<usize> = None;
        let mut best = -PIVOT_TOL;
        for (j, &zj) in z.iter().enumerate() {
            if in_basis[j] || zj >= -PIVOT_TOL {
                continue;
            }
            if bland {
                enter = Some(j);
                break;
            }
            if zj < best {
                best = zj;
                enter = Some(j);
            }
        }
        if enter.is_none() {
            // Claimed optimal: verify against freshly computed costs.
            z = reduced_costs(tab, basis, cost);
            let ok = z
                .iter()
                .enumerate()
                .all(|(j, &zj)| in_basis[j] || zj >= -PIVOT_TOL);
            if ok {
                return Ok(());
            }
            continue;
        }
        let enter = enter.unwrap();

        // Ratio test. Ties go to the largest pivot element for stability
        // under Dantzig pricing, and to the smallest basis column in
        // Bland mode (preserving its anti-cycling guarantee).
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..n {
            if tab[i][enter] > PIVOT_TOL {
                let ratio = tab[i][rhs] / tab[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-12
                            || (ratio < best_ratio + 1e-12
                                && if bland {
                                    basis[i] < basis[l]
                                } else {
                                    tab[i][enter] > tab[l][enter]
                                })
                    }
                };
                if better {
                    best_ratio = best_ratio.min(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: best.abs(),
            });
        };
        if best_ratio < 1e-12 {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        in_basis[basis[leave]] = false;
        in_basis[enter] = true;
        pivot(tab, basis, leave, enter);
        let factor = z[enter];
        if factor != 0.0 {
            for (zj, pv) in z.iter_mut().zip(&tab[leave][..rhs]) {
                *zj -= factor * pv;
            }
        }
        z[enter] = 0.0;
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        residual: f64::NAN,
    })
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let inv = 1.0 / tab[row][col];
    for v in tab[row].iter_mut() {
        *v *= inv;
    }
    tab[row][col] = 1.0; // kill roundoff on the pivot itself
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col];
        if factor != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            r[col] = 0.0;
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_covering() {
        // g_i x_i >= 1 componentwise: x_i = 1/g_i.
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 4.0],
        ];
        let sol = solve_covering(&a, &[1.0; 3], 3).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.5, 0.25]);
        assert_eq!(sol.value, 1.75);
    }

    #[test]
    fn identity_is_exact() {
        let a: Vec<Vec<f64>> = (0..8)
            .map(|i| (0..8).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let sol = solve_covering(&a, &[1.0; 8], 8).unwrap();
        assert_eq!(sol.value, 8.0);
        assert!(sol.x.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn shared_column_beats_singletons() {
        // Column 2 covers both rows; optimum puts everything there.
        let a = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
        let sol = solve_covering(&a, &[1.0; 2], 3).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert!((sol.x[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_zero_row() {
        let a = vec![vec![1.0, 1.0], vec![0.0, 0.0]];
        assert!(matches!(
            solve_covering(&a, &[1.0; 2], 2),
            Err(Error::Uncovered(_))
        ));
    }

    #[test]
    fn fractional_optimum() {
        // Three rows, each covered by two of three columns: x = 1/2 each.
        let a = vec![
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ];
        let sol = solve_covering(&a, &[1.0; 3], 3).unwrap();
        assert!((sol.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn scaled_rows() {
        // Row scaling changes the solution proportionally.
        let a = vec![vec![0.5, 0.0], vec![0.0, 0.25]];
        let sol = solve_covering(&a, &[1.0; 2], 2).unwrap();
        assert_eq!(sol.x, vec![2.0, 4.0]);
    }

    #[test]
    fn uneven_rhs() {
        // x >= b componentwise on the identity.
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = solve_covering(&a, &[0.25, 0.5], 2).unwrap();
        assert_eq!(sol.x, vec![0.25, 0.5]);
        assert_eq!(sol.value, 0.75);
    }

    #[test]
    fn dense_random_instances_agree_with_value_bounds() {
        // Cross-check against a crude bound: the optimum is at least
        // max_i b_i / max_j A_ij and at most sum_i b_i / max positive
        // entry per row.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..8);
            let m = rng.random_range(2..8);
            let mut a = vec![vec![0.0; m]; n];
            for row in &mut a {
                loop {
                    for v in row.iter_mut() {
                        *v = if rng.random_bool(0.5) {
                            rng.random_range(0.2..1.0)
                        } else {
                            0.0
                        };
                    }
                    if row.iter().any(|&v| v > 0.0) {
                        break;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let sol = solve_covering(&a, &b, m).unwrap();
            for (row, &bi) in a.iter().zip(&b) {
                let achieved: f64 = row.iter().zip(&sol.x).map(|(&g, &x)| g * x).sum();
                assert!(achieved >= bi - 1e-7, "constraint violated");
            }
            let upper: f64 = a
                .iter()
                .zip(&b)
                .map(|(row, &bi)| bi / row.iter().cloned().fold(0.0f64, f64::max))
                .sum();
            assert!(sol.value <= upper + 1e-7);
        }
    }
}
