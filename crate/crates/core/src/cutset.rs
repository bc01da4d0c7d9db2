//! Half-duplex cut-set upper bound.
//!
//! Each relay is either receiving or transmitting, which gives four network
//! states; `t[i]` is the share of time spent in state `i + 1`:
//!
//! | state | relay 1 | relay 2 |
//! |-------|---------|---------|
//! | 1     | Rx      | Rx      |
//! | 2     | Tx      | Rx      |
//! | 3     | Rx      | Tx      |
//! | 4     | Tx      | Tx      |
//!
//! Every source/destination cut gives a rate that is linear in `t`. The bound
//! is `max_t min_k cut_k(t)` over the probability simplex, a linear program
//! in `(t1, t2, t3, t4, R)` small enough to solve by enumerating every basic
//! solution.

use serde::{Deserialize, Serialize};

use crate::channel::LinkCapacities;
use crate::error::{Error, Result};
use crate::scalar::{unit_scale, Scalar};

/// Number of network states and of cuts.
pub const STATES: usize = 4;

/// Slack allowed on each constraint when accepting a basic solution.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Cuts within this (relative) distance of the bound are reported binding.
pub const BINDING_TOLERANCE: f64 = 1e-9;
/// Simplex tolerance for [`cut_values`] inputs.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSetSolution<T = f64> {
    /// Time-sharing vector, nonnegative and summing to one.
    pub t: [T; STATES],
    pub bound: T,
    pub cut_values: [T; STATES],
    /// One-based indices of the cuts attaining the bound.
    pub binding: Vec<usize>,
}

/// Row `k` holds the rate of cut `k + 1` in each of the four states.
pub fn cut_matrix<T: Scalar>(caps: &LinkCapacities<T>) -> [[T; STATES]; STATES] {
    let z = T::zero();
    let LinkCapacities {
        c01,
        c02,
        c13,
        c23,
        c012,
        c123,
    } = *caps;
    [
        [c012, c02, c01, z],
        [c02, c02 + c13, z, c13],
        [c01, z, c01 + c23, c23],
        [z, c13, c23, c123],
    ]
}

fn evaluate<T: Scalar>(matrix: &[[T; STATES]; STATES], t: &[T; STATES]) -> [T; STATES] {
    let mut out = [T::zero(); STATES];
    for (value, row) in out.iter_mut().zip(matrix) {
        *value = row.iter().zip(t).map(|(&m, &ti)| m * ti).sum();
    }
    out
}

/// Checks that `t` lies on the simplex within [`SIMPLEX_TOLERANCE`].
pub fn check_time_sharing<T: Scalar>(t: &[T; STATES]) -> Result<()> {
    let tol = T::tol(SIMPLEX_TOLERANCE);
    if let Some((i, ti)) = t
        .iter()
        .enumerate()
        .find(|(_, ti)| !ti.is_finite() || **ti < -tol)
    {
        return Err(Error::Infeasible(format!("t{} = {ti}", i + 1)));
    }
    let sum: T = t.iter().copied().sum();
    if (sum - T::one()).abs() > tol {
        return Err(Error::Infeasible(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// The four cut rates at time-sharing vector `t`.
pub fn cut_values<T: Scalar>(caps: &LinkCapacities<T>, t: &[T; STATES]) -> Result<[T; STATES]> {
    check_time_sharing(t)?;
    Ok(evaluate(&cut_matrix(caps), t))
}

/// Smallest cut rate at `t`, without simplex validation.
pub fn min_cut<T: Scalar>(caps: &LinkCapacities<T>, t: &[T; STATES]) -> T {
    evaluate(&cut_matrix(caps), t)
        .into_iter()
        .fold(T::infinity(), T::min)
}

const UNKNOWNS: usize = STATES + 1;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `threshold`.
fn solve_dense<T: Scalar>(
    mut a: [[T; UNKNOWNS]; UNKNOWNS],
    mut b: [T; UNKNOWNS],
    threshold: T,
) -> Option<[T; UNKNOWNS]> {
    for col in 0..UNKNOWNS {
        let pivot = (col..UNKNOWNS)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= threshold {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..UNKNOWNS {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..UNKNOWNS {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); UNKNOWNS];
    for row in (0..UNKNOWNS).rev() {
        let tail: T = (row + 1..UNKNOWNS).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// `(t1, t4, t2, t3)`, the order used to break ties between optimal vertices.
fn tie_key<T: Scalar>(t: &[T; STATES]) -> [T; STATES] {
    [t[0], t[3], t[1], t[2]]
}

/// Strict lexicographic `a < b`, treating entries within `eps` as equal.
fn lex_less<T: Scalar>(a: &[T; STATES], b: &[T; STATES], eps: T) -> bool {
    for (&x, &y) in a.iter().zip(b) {
        if (x - y).abs() > eps {
            return x < y;
        }
    }
    false
}

struct Vertex<T> {
    t: [T; STATES],
    rate: T,
}

/// Every feasible basic solution of the bound LP.
///
/// The inequalities are the four cut rows `R - cut_k(t) <= 0` and the four
/// sign rows `-t_i <= 0`; the simplex equality is always active. A vertex
/// fixes four of the eight inequalities as equalities, so there are
/// `C(8, 4) = 70` candidate bases.
fn feasible_vertices<T: Scalar>(caps: &LinkCapacities<T>) -> Vec<Vertex<T>> {
    let matrix = cut_matrix(caps);
    let scale = matrix
        .iter()
        .flatten()
        .fold(T::one(), |acc, &m| acc.max(m.abs()));
    let threshold = T::tol(1e-12) * scale;
    let feas = T::tol(FEASIBILITY_TOLERANCE);

    let mut rows: Vec<[T; UNKNOWNS]> = Vec::with_capacity(2 * STATES);
    for cut in &matrix {
        let mut row = [T::zero(); UNKNOWNS];
        for i in 0..STATES {
            row[i] = -cut[i];
        }
        row[STATES] = T::one();
        rows.push(row);
    }
    for i in 0..STATES {
        let mut row = [T::zero(); UNKNOWNS];
        row[i] = -T::one();
        rows.push(row);
    }
    let mut simplex = [T::one(); UNKNOWNS];
    simplex[STATES] = T::zero();

    let mut out = Vec::new();
    for mask in 0u32..(1 << rows.len()) {
        if mask.count_ones() as usize != STATES {
            continue;
        }
        let mut a = [[T::zero(); UNKNOWNS]; UNKNOWNS];
        let mut b = [T::zero(); UNKNOWNS];
        a[0] = simplex;
        b[0] = T::one();
        let mut next = 1;
        for (idx, row) in rows.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                a[next] = *row;
                next += 1;
            }
        }
        let Some(x) = solve_dense(a, b, threshold) else {
            continue;
        };
        let t = [x[0], x[1], x[2], x[3]];
        let rate = x[STATES];
        if t.iter().any(|ti| !ti.is_finite() || *ti < -feas) || !rate.is_finite() {
            continue;
        }
        let cuts = evaluate(&matrix, &t);
        if cuts.iter().any(|&c| rate > c + feas) {
            continue;
        }
        out.push(Vertex { t, rate });
    }
    out
}

/// Clamps small negative entries to zero and rescales onto the simplex.
fn project_to_simplex<T: Scalar>(mut t: [T; STATES]) -> [T; STATES] {
    for ti in t.iter_mut() {
        if *ti < T::zero() {
            *ti = T::zero();
        }
    }
    let sum: T = t.iter().copied().sum();
    for ti in t.iter_mut() {
        *ti = *ti / sum;
    }
    t
}

/// Maximizes the minimum cut rate over the time-sharing simplex.
///
/// The optimum is exact up to the rounding of 5x5 linear solves. Among
/// optimal vertices the one with the lexicographically smallest
/// `(t1, t4, t2, t3)` is returned, so the solution is a deterministic
/// function of the capacities.
pub fn solve_bound<T: Scalar>(caps: &LinkCapacities<T>) -> CutSetSolution<T> {
    let vertices = feasible_vertices(caps);
    let best = vertices
        .iter()
        .map(|v| v.rate)
        .fold(T::neg_infinity(), T::max);
    // Any single state is a vertex, so the list is never empty.
    debug_assert!(best.is_finite());
    let near = T::tol(1e-12) * unit_scale(best);
    let mut chosen: Option<&Vertex<T>> = None;
    for v in vertices.iter().filter(|v| v.rate >= best - near) {
        let better = match chosen {
            None => true,
            Some(c) => lex_less(&tie_key(&v.t), &tie_key(&c.t), near),
        };
        if better {
            chosen = Some(v);
        }
    }
    let t = project_to_simplex(chosen.expect("at least one vertex").t);
    solution_at(caps, t)
}

fn solution_at<T: Scalar>(caps: &LinkCapacities<T>, t: [T; STATES]) -> CutSetSolution<T> {
    let cut_values = evaluate(&cut_matrix(caps), &t);
    let bound = cut_values.iter().copied().fold(T::infinity(), T::min);
    let tol = T::tol(BINDING_TOLERANCE) * unit_scale(bound);
    let binding = cut_values
        .iter()
        .enumerate()
        .filter(|(_, &c)| c - bound <= tol)
        .map(|(k, _)| k + 1)
        .collect();
    CutSetSolution {
        t,
        bound,
        cut_values,
        binding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps(c01: f64, c02: f64, c13: f64, c23: f64, c012: f64, c123: f64) -> LinkCapacities {
        LinkCapacities::new(c01, c02, c13, c23, c012, c123).unwrap()
    }

    /// Coarse lattice search, step 1/200.
    fn lattice_max(caps: &LinkCapacities) -> f64 {
        let n = 200;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n - i {
                for k in 0..=n - i - j {
                    let l = n - i - j - k;
                    let t = [i, j, k, l].map(|x| x as f64 / n as f64);
                    best = best.max(min_cut(caps, &t));
                }
            }
        }
        best
    }

    #[test]
    fn cut_values_at_product_optimum() {
        let caps = caps(2.0, 3.0, 3.0, 2.0, 3.0, 4.0);
        let cuts = cut_values(&caps, &[0.0, 0.4, 0.6, 0.0]).unwrap();
        for c in cuts {
            assert!((c - 2.4).abs() < 1e-12, "{cuts:?}");
        }
    }

    #[test]
    fn single_state_cut_values() {
        let caps = caps(2.0, 3.0, 3.0, 2.0, 3.5, 4.5);
        assert_eq!(
            cut_values(&caps, &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            [3.5, 3.0, 2.0, 0.0]
        );
        assert_eq!(
            cut_values(&caps, &[0.0, 0.0, 0.0, 1.0]).unwrap(),
            [0.0, 3.0, 2.0, 4.5]
        );
    }

    #[test]
    fn cut_values_rejects_off_simplex() {
        let caps = caps(1.0, 1.0, 1.0, 1.0, 2.0, 2.0);
        assert!(cut_values(&caps, &[0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(cut_values(&caps, &[1.1, -0.1, 0.0, 0.0]).is_err());
        assert!(cut_values(&caps, &[f64::NAN, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn product_example_bound() {
        let sol = solve_bound(&caps(2.0, 3.0, 3.0, 2.0, 3.0, 4.0));
        assert!((sol.bound - 2.4).abs() < 1e-12);
        let expected = [0.0, 0.4, 0.6, 0.0];
        for (a, b) in sol.t.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?}", sol.t);
        }
        assert_eq!(sol.binding, vec![1, 2, 3, 4]);
    }

    #[test]
    fn dead_source_bound_is_zero() {
        let sol = solve_bound(&caps(0.0, 0.0, 2.0, 1.0, 0.0, 3.0));
        assert_eq!(sol.bound, 0.0);
        assert!(!sol.binding.is_empty());
    }

    #[test]
    fn all_zero_capacities() {
        let sol = solve_bound(&caps(0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(sol.bound, 0.0);
        assert_eq!(sol.binding, vec![1, 2, 3, 4]);
        assert!((sol.t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_links_with_loose_broadcast_cuts() {
        let sol = solve_bound(&caps(1.5, 1.5, 1.5, 1.5, 50.0, 50.0));
        assert!((sol.bound - 1.5).abs() < 1e-12);
        for (a, b) in sol.t.iter().zip([0.0, 0.5, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-12, "{:?}", sol.t);
        }
        assert!((lattice_max(&caps(1.5, 1.5, 1.5, 1.5, 50.0, 50.0)) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn matches_coarse_lattice() {
        let cases = [
            caps(1.0, 1.0, 2.0, 2.0, 3f64.log2(), 5f64.log2()),
            caps(0.3, 2.0, 1.1, 0.7, 2.1, 1.5),
            caps(4.0, 2.0, 1.0, 1.0, 4.3, 2.32),
            caps(0.0, 1.0, 1.0, 0.0, 1.0, 1.0),
        ];
        for c in cases {
            let sol = solve_bound(&c);
            let grid = lattice_max(&c);
            assert!(sol.bound >= grid - 1e-12, "{c:?}: {} < {grid}", sol.bound);
            assert!(sol.bound - grid < 2e-2, "{c:?}: {} vs {grid}", sol.bound);
        }
    }

    #[test]
    fn solution_json_shape() {
        let sol = solve_bound(&caps(2.0, 3.0, 3.0, 2.0, 3.0, 4.0));
        let v = serde_json::to_value(&sol).unwrap();
        assert_eq!(v["t"].as_array().unwrap().len(), 4);
        assert_eq!(v["cut_values"].as_array().unwrap().len(), 4);
        assert_eq!(v["binding"], serde_json::json!([1, 2, 3, 4]));
        assert!(v["bound"].is_number());
    }

    #[test]
    fn single_precision_solve() {
        let c = LinkCapacities::<f32>::new(2.0, 3.0, 3.0, 2.0, 3.0, 4.0).unwrap();
        let sol = solve_bound(&c);
        assert!((sol.bound - 2.4).abs() < 1e-5);
        assert!((sol.t[1] - 0.4).abs() < 1e-5);
    }
}
