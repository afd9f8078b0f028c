//! Feasibility queries behind the domination tests, via a phase-I simplex.
//!
//! Two formulations of the same geometric question are provided.
//! `in_convex_hull` asks whether a target is a convex combination of an
//! explicit point set. `dominated_by_boxes` asks whether fractions of some
//! points can cover the target from above: feasibility of
//! `sum l_i <= 1, l >= 0, sum l_i p_i >= v`, which is membership of `v` in
//! the convex hull of all axis projections of the `p_i` without ever
//! enumerating the `2^d` projections.
//!
//! Bland's rule keeps the exact (rational) instantiation cycle-free; the
//! `f64` instantiation uses the caller's tolerance for pivot decisions and
//! is heuristic.

use num_traits::Zero;

use crate::scalar::Scalar;

/// Is `target` a convex combination of `points`?
pub fn in_convex_hull<T: Scalar>(points: &[Vec<T>], target: &[T], tol: &T) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = target.len();
    debug_assert!(points.iter().all(|p| p.len() == d));
    let k = points.len();
    // Equalities: sum l_i p_i = v and sum l_i = 1; no slack columns.
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(d + 1);
    let mut b: Vec<T> = Vec::with_capacity(d + 1);
    for r in 0..d {
        let mut row: Vec<T> = Vec::with_capacity(k);
        for p in points {
            row.push(p[r].clone());
        }
        rows.push(row);
        b.push(target[r].clone());
    }
    rows.push(vec![T::one(); k]);
    b.push(T::one());
    phase_one_feasible(rows, b, tol)
}

/// Is `target` in the convex hull of all axis projections of `points`
/// (equivalently: dominated by the boxes `[0, p_i]`)? An empty point set
/// spans nothing, not even the origin.
pub fn dominated_by_boxes<T: Scalar>(points: &[Vec<T>], target: &[T], tol: &T) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = target.len();
    if d == 0 {
        return true;
    }
    debug_assert!(points.iter().all(|p| p.len() == d));
    let k = points.len();
    // sum l_i p_i - s_r = v_r (s >= 0), sum l_i + s_0 = 1.
    let cols = k + d + 1;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(d + 1);
    let mut b: Vec<T> = Vec::with_capacity(d + 1);
    for r in 0..d {
        let mut row: Vec<T> = vec![T::zero(); cols];
        for (j, p) in points.iter().enumerate() {
            row[j] = p[r].clone();
        }
        row[k + r] = -T::one();
        rows.push(row);
        b.push(target[r].clone());
    }
    let mut row: Vec<T> = vec![T::zero(); cols];
    for slot in row.iter_mut().take(k) {
        *slot = T::one();
    }
    row[k + d] = T::one();
    rows.push(row);
    b.push(T::one());
    phase_one_feasible(rows, b, tol)
}

/// Feasibility of `A x = b, x >= 0` by minimising artificial variables.
fn phase_one_feasible<T: Scalar>(mut rows: Vec<Vec<T>>, mut b: Vec<T>, tol: &T) -> bool {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    // Make b nonnegative, then append the artificial identity and b.
    for (row, bi) in rows.iter_mut().zip(b.iter_mut()) {
        if *bi < T::zero() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            *bi = -bi.clone();
        }
    }
    let n_total = n + m;
    for (r, row) in rows.iter_mut().enumerate() {
        for a in 0..m {
            row.push(if a == r { T::one() } else { T::zero() });
        }
        row.push(b[r].clone());
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs for "minimise the artificial sum".
    let mut obj: Vec<T> = vec![T::zero(); n_total + 1];
    for (j, slot) in obj.iter_mut().enumerate() {
        let mut acc = if (n..n + m).contains(&j) {
            T::one()
        } else {
            T::zero()
        };
        for row in &rows {
            acc = acc - row[j].clone();
        }
        *slot = acc;
    }

    let neg_tol = -tol.clone();
    let max_iters = 50 * (n_total + 4) * (m + 4);
    for _ in 0..max_iters {
        // Bland: smallest column with negative reduced cost.
        let entering = match (0..n_total).find(|&j| obj[j] < neg_tol) {
            Some(j) => j,
            None => break,
        };
        // Ratio test, ties broken by smallest basis index.
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[entering] > *tol {
                let ratio = row[n_total].clone() / row[entering].clone();
                match &leave {
                    Some((best_i, best)) => {
                        if ratio < *best || (ratio == *best && basis[i] < basis[*best_i]) {
                            leave = Some((i, ratio));
                        }
                    }
                    None => leave = Some((i, ratio)),
                }
            }
        }
        let (li, _) = match leave {
            Some(l) => l,
            // Phase-I objective is bounded below; no positive pivot means the
            // float instantiation ran out of precision. Treat as infeasible.
            None => return false,
        };
        pivot(&mut rows, &mut obj, li, entering);
        basis[li] = entering;
    }

    // Residual infeasibility = sum of artificial basics' values.
    let mut w = T::zero();
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= n {
            w = w + rows[i][n_total].clone();
        }
    }
    w <= *tol
}

fn pivot<T: Scalar>(rows: &mut [Vec<T>], obj: &mut [T], li: usize, entering: usize) {
    let p = rows[li][entering].clone();
    for x in rows[li].iter_mut() {
        *x = x.clone() / p.clone();
    }
    let pivot_row = rows[li].clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i == li || row[entering].is_zero() {
            continue;
        }
        let f = row[entering].clone();
        for (x, pr) in row.iter_mut().zip(&pivot_row) {
            if !pr.is_zero() {
                *x = x.clone() - f.clone() * pr.clone();
            }
        }
    }
    if !obj[entering].is_zero() {
        let f = obj[entering].clone();
        for (x, pr) in obj.iter_mut().zip(&pivot_row) {
            if !pr.is_zero() {
                *x = x.clone() - f.clone() * pr.clone();
            }
        }
    }
}
