//! Dual solver for support vector data description.
//!
//! Maximizes `sum_i a_i G_ii - sum_ij a_i a_j G_ij` subject to `sum a = 1`
//! and `0 <= a_i <= C` with pairwise (SMO) updates, for an arbitrary Gram
//! matrix `G` of the working space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix of inner products in the working space.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Shape(format!(
                "Gram matrix must be square, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "Gram matrix has non-finite entries".into(),
            ));
        }
        let scale = g.amax().max(1.0);
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(GramMatrix(g))
    }

    /// Linear-kernel Gram matrix of the columns of `x`.
    pub fn linear(x: &DMatrix<f64>) -> Self {
        let g = x.tr_mul(x);
        GramMatrix(symmetrize(g))
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn scaled(&self, c: f64) -> GramMatrix {
        GramMatrix(&self.0 * c)
    }
}

pub(crate) fn symmetrize(g: DMatrix<f64>) -> DMatrix<f64> {
    let t = g.transpose();
    (g + t) * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stopping threshold on the maximal KKT violation, relative to `max|G|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvddSolution {
    pub alpha: Vec<f64>,
    pub c: f64,
    pub objective: f64,
    /// Indices with `0 < a_i < C`.
    pub boundary_sv: Vec<usize>,
    /// Indices with `a_i = C`.
    pub bound_sv: Vec<usize>,
    pub radius_sq: f64,
    pub iterations: usize,
}

impl SvddSolution {
    pub fn alpha_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.alpha)
    }

    /// Indices with non-negligible weight.
    pub fn support(&self) -> Vec<usize> {
        let tau = sv_tolerance(self.c);
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > tau)
            .collect()
    }
}

/// Threshold separating numerically-zero (or numerically-C) weights.
pub fn sv_tolerance(c: f64) -> f64 {
    1e-7 * c
}

/// Dual objective `sum a_i G_ii - a' G a`.
pub fn objective(g: &GramMatrix, alpha: &[f64]) -> f64 {
    let a = DVector::from_row_slice(alpha);
    let ga = g.matrix() * &a;
    g.matrix().diagonal().dot(&a) - a.dot(&ga)
}

pub fn solve_svdd(g: &GramMatrix, c: f64, opts: &SolverOptions) -> Result<SvddSolution> {
    let n = g.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "SVDD needs at least one sample".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !(c > 0.0) || c * (n as f64) < 1.0 - 1e-12 {
        return Err(Error::InfeasibleC { c, n });
    }
    // With C >= 1 the upper bound can never bind.
    let c_eff = c.min(1.0);
    let m = g.matrix();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let threshold = opts.tol * scale;

    let mut alpha = vec![1.0 / n as f64; n];
    let mut grad = gradient(m, &alpha);
    let mut iterations = 0usize;

    loop {
        // Periodic full recomputation to stop drift in the incremental gradient.
        if iterations > 0 && iterations.is_multiple_of(n.max(1)) {
            grad = gradient(m, &alpha);
        }
        let Some((i, j, violation)) = select_pair(m, &alpha, &grad, c_eff) else {
            break;
        };
        if violation <= threshold {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::SolverBudget {
                iterations,
                violation,
                best_alpha: alpha,
            });
        }
        iterations += 1;

        // Move t from j to i: f changes by t(g_i - g_j) - t^2 eta.
        let eta = (m[(i, i)] + m[(j, j)] - 2.0 * m[(i, j)]).max(1e-12 * scale);
        let t = ((grad[i] - grad[j]) / (2.0 * eta))
            .min(c_eff - alpha[i])
            .min(alpha[j])
            .max(0.0);
        if t == 0.0 {
            // Both bounds already active; nothing left to move for this pair.
            grad = gradient(m, &alpha);
            if select_pair(m, &alpha, &grad, c_eff).is_none_or(|(_, _, v)| v <= threshold) {
                break;
            }
            continue;
        }
        alpha[i] += t;
        alpha[j] -= t;
        if c_eff - alpha[i] < 1e-15 {
            alpha[i] = c_eff;
        }
        if alpha[j] < 1e-15 {
            alpha[j] = 0.0;
        }
        for k in 0..n {
            grad[k] -= 2.0 * t * (m[(k, i)] - m[(k, j)]);
        }
    }

    // Renormalize away accumulated rounding in the simplex constraint.
    let sum: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= sum);

    let tau = sv_tolerance(c);
    let boundary_sv: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > tau && alpha[i] < c - tau)
        .collect();
    let bound_sv: Vec<usize> = (0..n).filter(|&i| alpha[i] >= c - tau).collect();
    let mut sol = SvddSolution {
        objective: objective(g, &alpha),
        alpha,
        c,
        boundary_sv,
        bound_sv,
        radius_sq: 0.0,
        iterations,
    };
    sol.radius_sq = radius_sq(g, &sol);
    Ok(sol)
}

/// `g_i = G_ii - 2 (G a)_i`.
fn gradient(m: &DMatrix<f64>, alpha: &[f64]) -> Vec<f64> {
    let a = DVector::from_row_slice(alpha);
    let ga = m * a;
    (0..alpha.len()).map(|i| m[(i, i)] - 2.0 * ga[i]).collect()
}

/// Second-order working-set selection; returns (up, down, max violation).
fn select_pair(
    m: &DMatrix<f64>,
    alpha: &[f64],
    grad: &[f64],
    c: f64,
) -> Option<(usize, usize, f64)> {
    let n = alpha.len();
    let mut i = None;
    let mut g_max = f64::NEG_INFINITY;
    for k in 0..n {
        if alpha[k] < c && grad[k] > g_max {
            g_max = grad[k];
            i = Some(k);
        }
    }
    let i = i?;
    let mut g_min = f64::INFINITY;
    let mut j = None;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        if alpha[k] <= 0.0 {
            continue;
        }
        g_min = g_min.min(grad[k]);
        let diff = g_max - grad[k];
        if diff > 0.0 && k != i {
            let eta = (m[(i, i)] + m[(k, k)] - 2.0 * m[(i, k)]).max(1e-12);
            let gain = diff * diff / eta;
            if gain > best {
                best = gain;
                j = Some(k);
            }
        }
    }
    let violation = g_max - g_min;
    Some((i, j?, violation))
}

/// Squared distance of sample `i` to the center `sum_j a_j x_j`.
pub fn distance_sq(g: &GramMatrix, alpha: &[f64], i: usize) -> f64 {
    let m = g.matrix();
    let a = DVector::from_row_slice(alpha);
    let ga = m * &a;
    (m[(i, i)] - 2.0 * ga[i] + a.dot(&ga)).max(0.0)
}

/// Squared distances of every training sample to the center.
pub fn distances_sq(g: &GramMatrix, alpha: &[f64]) -> Vec<f64> {
    let m = g.matrix();
    let a = DVector::from_row_slice(alpha);
    let ga = m * &a;
    let aga = a.dot(&ga);
    (0..alpha.len())
        .map(|i| (m[(i, i)] - 2.0 * ga[i] + aga).max(0.0))
        .collect()
}

/// Mean squared distance over the boundary support vectors, or over all
/// samples with positive weight when no weight is strictly inside `(0, C)`.
pub fn radius_sq(g: &GramMatrix, sol: &SvddSolution) -> f64 {
    let d = distances_sq(g, &sol.alpha);
    let idx = if sol.boundary_sv.is_empty() {
        sol.support()
    } else {
        sol.boundary_sv.clone()
    };
    assert!(!idx.is_empty(), "SVDD solution has no positive weights");
    idx.iter().map(|&i| d[i]).sum::<f64>() / idx.len() as f64
}

/// Largest violation of the three KKT clauses, relative to `max|G|`.
pub fn kkt_violation(g: &GramMatrix, sol: &SvddSolution) -> f64 {
    let d = distances_sq(g, &sol.alpha);
    let tau = sv_tolerance(sol.c);
    let r2 = sol.radius_sq;
    let scale = g.matrix().amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (i, &a) in sol.alpha.iter().enumerate() {
        let v = if a <= tau {
            d[i] - r2
        } else if a >= sol.c - tau {
            r2 - d[i]
        } else {
            (d[i] - r2).abs()
        };
        worst = worst.max(v);
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gram(points: &[[f64; 2]]) -> GramMatrix {
        let x = DMatrix::from_fn(2, points.len(), |i, j| points[j][i]);
        GramMatrix::linear(&x)
    }

    #[test]
    fn two_points() {
        let g = GramMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 4.0])).unwrap();
        let sol = solve_svdd(&g, 1.0, &SolverOptions::default()).unwrap();
        assert!((sol.alpha[0] - 0.5).abs() < 1e-12);
        assert!((sol.alpha[1] - 0.5).abs() < 1e-12);
        assert!((sol.radius_sq - 1.0).abs() < 1e-12);
        assert!((distance_sq(&g, &sol.alpha, 0) - 1.0).abs() < 1e-12);
        // center = 0.5 (0,0) + 0.5 (2,0)
        let center = [0.5 * 0.0 + 0.5 * 2.0, 0.0];
        assert_eq!(center, [1.0, 0.0]);
    }

    #[test]
    fn single_point() {
        let g = GramMatrix::new(DMatrix::from_element(1, 1, 3.7)).unwrap();
        let sol = solve_svdd(&g, 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(sol.alpha, vec![1.0]);
        assert_eq!(sol.radius_sq, 0.0);
    }

    #[test]
    fn unit_weight_has_zero_distance() {
        let g = gram(&[[0.0, 1.0], [2.0, 3.0], [-1.0, 0.5]]);
        assert_eq!(distance_sq(&g, &[0.0, 1.0, 0.0], 1), 0.0);
    }

    #[test]
    fn uniform_weights_use_fallback_radius() {
        // C = 1/N forces every weight to the bound.
        let g = gram(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [2.0, 2.0]]);
        let sol = solve_svdd(&g, 0.25, &SolverOptions::default()).unwrap();
        assert!(sol.boundary_sv.is_empty());
        assert_eq!(sol.bound_sv.len(), 4);
        let mean = distances_sq(&g, &sol.alpha).iter().sum::<f64>() / 4.0;
        assert!((sol.radius_sq - mean).abs() < 1e-12);
    }

    #[test]
    fn infeasible_c_rejected() {
        let g = gram(&[[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]]);
        assert!(matches!(
            solve_svdd(&g, 0.2, &SolverOptions::default()),
            Err(Error::InfeasibleC { n: 3, .. })
        ));
    }

    #[test]
    fn asymmetric_gram_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            GramMatrix::new(m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_best_iterate() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|i| [(i as f64).sin() * 3.0, (i as f64 * 1.7).cos()])
            .collect();
        let g = gram(&pts);
        let opts = SolverOptions {
            tol: 1e-14,
            max_iter: 1,
        };
        match solve_svdd(&g, 1.0, &opts) {
            Err(Error::SolverBudget {
                best_alpha,
                violation,
                ..
            }) => {
                assert_eq!(best_alpha.len(), 12);
                assert!(violation > 0.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn distance_matches_coordinates() {
        let pts = [
            [0.3, -1.2],
            [2.0, 0.7],
            [-1.1, 0.4],
            [0.9, 2.2],
            [1.5, -0.3],
        ];
        let g = gram(&pts);
        let sol = solve_svdd(&g, 0.5, &SolverOptions::default()).unwrap();
        let center = pts.iter().zip(&sol.alpha).fold([0.0, 0.0], |acc, (p, a)| {
            [acc[0] + a * p[0], acc[1] + a * p[1]]
        });
        for (i, p) in pts.iter().enumerate() {
            let direct = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
            assert!((distance_sq(&g, &sol.alpha, i) - direct).abs() < 1e-10);
        }
    }

    fn arb_points() -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec([-5.0f64..5.0, -5.0f64..5.0], 3..9)
    }

    proptest! {
        #[test]
        fn solution_invariants(pts in arb_points(), c in prop::sample::select(vec![0.4, 0.5, 1.0])) {
            let g = gram(&pts);
            prop_assume!(c * pts.len() as f64 >= 1.0);
            let sol = solve_svdd(&g, c, &SolverOptions::default()).unwrap();
            let sum: f64 = sol.alpha.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-8);
            prop_assert!(sol.alpha.iter().all(|&a| (-1e-15..=c + 1e-15).contains(&a)));
            prop_assert!(kkt_violation(&g, &sol) <= 1e-6);
        }

        #[test]
        fn permutation_equivariance(pts in arb_points(), shift in 1usize..8) {
            let n = pts.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let permuted: Vec<[f64; 2]> = perm.iter().map(|&i| pts[i]).collect();
            let a = solve_svdd(&gram(&pts), 0.5, &SolverOptions::default()).unwrap();
            let b = solve_svdd(&gram(&permuted), 0.5, &SolverOptions::default()).unwrap();
            // Compare the centers, which are unique even when weights are not.
            let ca = pts.iter().zip(&a.alpha).fold([0.0; 2], |s, (p, w)| [s[0] + w * p[0], s[1] + w * p[1]]);
            let cb = permuted.iter().zip(&b.alpha).fold([0.0; 2], |s, (p, w)| [s[0] + w * p[0], s[1] + w * p[1]]);
            prop_assert!((ca[0] - cb[0]).abs() < 1e-5 && (ca[1] - cb[1]).abs() < 1e-5);
            prop_assert!((a.objective - b.objective).abs() < 1e-8 * a.objective.abs().max(1.0));
        }

        #[test]
        fn scaling_gram_scales_radius(pts in arb_points(), s in 0.1f64..10.0) {
            let g = gram(&pts);
            let tight = SolverOptions { tol: 1e-10, ..SolverOptions::default() };
            let a = solve_svdd(&g, 0.5, &tight).unwrap();
            let b = solve_svdd(&g.scaled(s), 0.5, &tight).unwrap();
            prop_assert!((b.objective - s * a.objective).abs() <= 1e-8 * (s * a.objective).abs().max(1e-8));
            prop_assert!((b.radius_sq - s * a.radius_sq).abs() <= 1e-6 * (s * a.radius_sq).abs().max(1e-8));
        }
    }
}
