//! Ellipsoidal subspace SVDD.
//!
//! The projection `Q` (d x D, orthonormal rows) and an ellipsoidal data
//! description are learned by alternating two steps: solve the SVDD dual on
//! the Gram matrix `Y' E^-1 Y` of the projected targets `Y = Q X`, where
//! `E = Y Y'`, then take a gradient step on `Q` with the dual coefficients
//! held fixed and re-orthonormalize. After the last update the description
//! is solved once more in the final subspace.
//!
//! The same loop drives the spherical variant (`E` replaced by the
//! identity, see [`crate::ssvdd`]) and the fixed-projection E-SVDD baseline
//! (`Q = I`, no updates).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{CenteringStats, Label};
use crate::error::{Error, Result};
use crate::eval::{gmean, Confusion};
use crate::io::{matrix_rows, vector, write_atomic};
use crate::qp::{solve_svdd, symmetrize, GramMatrix, SolverOptions, SvddSolution};
use crate::ssvdd::{psi_gradient, psi_vector, weighted_scatter, Regularizer};

/// Default relative eigenvalue floor used when inverting `E`.
pub const DEFAULT_RIDGE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Geometry {
    /// Hypersphere in the subspace (`E^-1 = I`).
    Spherical,
    /// Hyperellipsoid shaped by the projected concentration matrix.
    Ellipsoidal { ridge_eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// i.i.d. standard normal entries, orthonormalized.
    Random,
    /// The first `d` coordinate axes.
    Identity,
}

/// Everything the alternating loop needs; shared by all projection methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub geometry: Geometry,
    pub d: usize,
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
    pub k_max: usize,
    pub regularizer: Regularizer,
    pub seed: u64,
    pub init: Init,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssvddConfig {
    pub d: usize,
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
    pub k_max: usize,
    pub seed: u64,
    pub regularizer: Regularizer,
    pub ridge_eps: f64,
    pub init: Init,
    pub solver: SolverOptions,
}

impl Default for EssvddConfig {
    fn default() -> Self {
        EssvddConfig {
            d: 2,
            beta: 0.1,
            eta: 0.01,
            c: 0.5,
            k_max: 10,
            seed: 0,
            regularizer: Regularizer::None,
            ridge_eps: DEFAULT_RIDGE_EPS,
            init: Init::Random,
            solver: SolverOptions::default(),
        }
    }
}

impl EssvddConfig {
    /// Fixed full-dimensional identity projection: SVDD on globally whitened data.
    pub fn esvdd(dim: usize, c: f64) -> Self {
        EssvddConfig {
            d: dim,
            beta: 0.0,
            eta: 0.0,
            c,
            k_max: 1,
            init: Init::Identity,
            ..Default::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.d == 0 || self.d > dim {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {} must lie in 1..={dim}",
                self.d
            )));
        }
        if !(self.eta >= 0.0) || self.k_max == 0 || !(self.ridge_eps >= 0.0) {
            return Err(Error::InvalidParameter(
                "need eta >= 0, ridge_eps >= 0 and k_max >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn projection_config(&self) -> ProjectionConfig {
        ProjectionConfig {
            geometry: Geometry::Ellipsoidal {
                ridge_eps: self.ridge_eps,
            },
            d: self.d,
            beta: self.beta,
            eta: self.eta,
            c: self.c,
            k_max: self.k_max,
            regularizer: self.regularizer,
            seed: self.seed,
            init: self.init,
            solver: self.solver,
        }
    }
}

/// Concentration matrix `E^-1` and its symmetric square root.
#[derive(Debug, Clone, PartialEq)]
pub struct Concentration {
    pub e_inv: DMatrix<f64>,
    pub e_inv_sqrt: DMatrix<f64>,
}

impl Concentration {
    fn identity(d: usize) -> Self {
        Concentration {
            e_inv: DMatrix::identity(d, d),
            e_inv_sqrt: DMatrix::identity(d, d),
        }
    }
}

/// `E = Q X X' Q'` inverted through its eigendecomposition, with eigenvalues
/// floored at `ridge_eps * max eigenvalue`.
pub fn concentration(q: &DMatrix<f64>, x: &DMatrix<f64>, ridge_eps: f64) -> Result<Concentration> {
    concentration_of(&(q * x), ridge_eps)
}

pub(crate) fn concentration_of(y: &DMatrix<f64>, ridge_eps: f64) -> Result<Concentration> {
    let e = symmetrize(y * y.transpose());
    let eig = e.symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    if !(lmax > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    // A zero ridge would leave exact zeros unfloored.
    let floor = ridge_eps.max(1e-15) * lmax;
    let v = &eig.eigenvectors;
    let inv = eig.eigenvalues.map(|l| 1.0 / l.max(floor));
    let inv_sqrt = inv.map(f64::sqrt);
    let e_inv = symmetrize(v * DMatrix::from_diagonal(&inv) * v.transpose());
    let e_inv_sqrt = symmetrize(v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose());
    Ok(Concentration { e_inv, e_inv_sqrt })
}

/// `G_ij = x_i' Q' E^-1 Q x_j`.
pub fn ellipsoidal_gram(q: &DMatrix<f64>, e_inv: &DMatrix<f64>, x: &DMatrix<f64>) -> GramMatrix {
    gram_of(&(q * x), e_inv)
}

fn gram_of(y: &DMatrix<f64>, e_inv: &DMatrix<f64>) -> GramMatrix {
    GramMatrix::new(symmetrize(y.tr_mul(&(e_inv * y)))).expect("symmetrized Gram is valid")
}

/// `Tr(E^-1/2 Q X l l' X' Q' E^-T/2) = |E^-1/2 Q X l|^2`.
pub fn upsilon_value(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    e_inv_sqrt: &DMatrix<f64>,
    lambda: &DVector<f64>,
) -> f64 {
    let w = e_inv_sqrt * (q * (x * lambda));
    w.dot(&w)
}

/// `2 E^-1 Q X l l' X' - 2 E^-1 Q X l l' X' Q' E^-1 Q X X'`.
pub fn upsilon_gradient(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    e_inv: &DMatrix<f64>,
    lambda: &DVector<f64>,
) -> DMatrix<f64> {
    let xl = x * lambda;
    let b = (q * &xl) * xl.transpose();
    trace_gradient(q, x, e_inv, &b)
}

/// Gradient of `Tr(E^-1 B)` for `B = Q X M X' Q'`, given `B_Q = Q X M X'`:
/// `2 E^-1 B_Q - 2 E^-1 B_Q Q' E^-1 Q X X'`.
fn trace_gradient(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    e_inv: &DMatrix<f64>,
    b_q: &DMatrix<f64>,
) -> DMatrix<f64> {
    let y = q * x;
    let yxt = &y * x.transpose();
    let left = e_inv * b_q;
    let second = &left * q.transpose() * e_inv * yxt;
    (left - second) * 2.0
}

/// Gradient of the ellipsoidal Lagrangian with `alpha` and `lambda` frozen.
pub fn essvdd_gradient(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    alpha: &[f64],
    cfg: &EssvddConfig,
    lambda: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let conc = concentration(q, x, cfg.ridge_eps)?;
    Ok(ellipsoidal_gradient(
        q,
        x,
        &conc.e_inv,
        alpha,
        cfg.beta,
        cfg.regularizer,
        lambda,
    ))
}

fn ellipsoidal_gradient(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    e_inv: &DMatrix<f64>,
    alpha: &[f64],
    beta: f64,
    reg: Regularizer,
    lambda: &DVector<f64>,
) -> DMatrix<f64> {
    let y = q * x;
    let mut g = trace_gradient(q, x, e_inv, &weighted_scatter(&y, x, alpha));
    match reg {
        Regularizer::None => {}
        Regularizer::Psi(_) => g += psi_gradient(q, x, lambda) * beta,
        Regularizer::Upsilon(_) => g += upsilon_gradient(q, x, e_inv, lambda) * beta,
    }
    g
}

/// Trace form `Tr((Q X X' Q')^-1 Q X (A - a a') X' Q') + beta R` of the
/// Lagrangian, where `R` is the chosen regularizer's value.
pub fn essvdd_lagrangian(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    alpha: &[f64],
    lambda: &DVector<f64>,
    beta: f64,
    reg: Regularizer,
    ridge_eps: f64,
) -> Result<f64> {
    let conc = concentration(q, x, ridge_eps)?;
    let y = q * x;
    let b = weighted_scatter(&y, x, alpha) * q.transpose();
    let base = (&conc.e_inv * b).trace();
    let r = match reg {
        Regularizer::None => 0.0,
        Regularizer::Psi(_) => crate::ssvdd::psi_value(q, x, lambda),
        Regularizer::Upsilon(_) => upsilon_value(q, x, &conc.e_inv_sqrt, lambda),
    };
    Ok(base + beta * r)
}

/// QR-orthonormalizes the rows of `q`, then l2-normalizes them and makes the
/// first non-negligible entry of each row non-negative.
pub fn orthonormalize(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    orthonormalize_at(q, 0)
}

fn orthonormalize_at(q: &DMatrix<f64>, iteration: usize) -> Result<DMatrix<f64>> {
    let (d, dim) = q.shape();
    if d == 0 || d > dim || q.iter().any(|v| !v.is_finite()) {
        return Err(Error::RankLoss { iteration });
    }
    let qr = q.transpose().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    if !(diag_max > 0.0) || r.diagonal().iter().any(|v| v.abs() <= 1e-10 * diag_max) {
        return Err(Error::RankLoss { iteration });
    }
    let mut out = qr.q().transpose();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
        if let Some(first) = row.iter().copied().find(|v| v.abs() > 1e-12) {
            if first < 0.0 {
                row.neg_mut();
            }
        }
    }
    Ok(out)
}

fn orthogonality_error(q: &DMatrix<f64>) -> f64 {
    let d = q.nrows();
    (q * q.transpose() - DMatrix::identity(d, d)).norm()
}

/// Held-out samples scored after every iteration to trace convergence.
/// Never used for training.
#[derive(Debug, Clone, Copy)]
pub struct EvalSet<'a> {
    /// Samples in the same (uncentered) input space as the training targets.
    pub x: &'a DMatrix<f64>,
    pub labels: &'a [Label],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dual objective of the description solved at this iteration.
    pub objective: f64,
    pub radius_sq: f64,
    pub gmean: Option<f64>,
    /// `|Q Q' - I|_F` of the projection the description was solved on.
    pub orthogonality_error: f64,
}

/// A trained linear projection + data description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionModel {
    #[serde(rename = "Q", with = "matrix_rows")]
    pub q: DMatrix<f64>,
    #[serde(with = "vector")]
    pub mu: DVector<f64>,
    #[serde(rename = "E_inv", with = "matrix_rows")]
    pub e_inv: DMatrix<f64>,
    #[serde(rename = "E_inv_sqrt", with = "matrix_rows")]
    pub e_inv_sqrt: DMatrix<f64>,
    #[serde(flatten)]
    pub svdd: SvddSolution,
    pub config: ProjectionConfig,
    /// Projected, centered training targets `Q (X - mu)`.
    #[serde(rename = "train_Y", with = "matrix_rows")]
    pub train_y: DMatrix<f64>,
    pub history: Vec<IterationRecord>,
}

impl ProjectionModel {
    pub fn radius_sq(&self) -> f64 {
        self.svdd.radius_sq
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    /// Whitened center `u = sum_i a_i E^-1/2 Q x_i`.
    pub fn center(&self) -> DVector<f64> {
        &self.e_inv_sqrt * (&self.train_y * self.svdd.alpha_vector())
    }

    fn distance_with(&self, u: &DVector<f64>, uu: f64, x: &DVector<f64>) -> f64 {
        let y = &self.q * (x - &self.mu);
        let w = &self.e_inv_sqrt * y;
        (w.dot(&w) - 2.0 * w.dot(u) + uu).max(0.0)
    }

    /// Squared whitened distance of an uncentered sample to the center, and
    /// whether it falls inside the description.
    pub fn decide(&self, x: &DVector<f64>) -> (f64, bool) {
        let u = self.center();
        let d = self.distance_with(&u, u.dot(&u), x);
        (d, d <= self.svdd.radius_sq)
    }

    /// [`Self::decide`] for every column of `x`.
    pub fn decide_batch(&self, x: &DMatrix<f64>) -> Vec<(f64, bool)> {
        let u = self.center();
        let uu = u.dot(&u);
        x.column_iter()
            .map(|c| {
                let d = self.distance_with(&u, uu, &c.into_owned());
                (d, d <= self.svdd.radius_sq)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Gmean of `decisions` against `labels`; `None` when a class is absent.
pub(crate) fn score(decisions: &[(f64, bool)], labels: &[Label]) -> Option<f64> {
    let predicted: Vec<bool> = decisions.iter().map(|&(_, t)| t).collect();
    gmean(&Confusion::from_predictions(&predicted, labels)).ok()
}

fn initial_projection(cfg: &ProjectionConfig, dim: usize) -> Result<DMatrix<f64>> {
    match cfg.init {
        Init::Identity => Ok(DMatrix::identity(cfg.d, dim)),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let q = DMatrix::from_fn(cfg.d, dim, |_, _| StandardNormal.sample(&mut rng));
            orthonormalize_at(&q, 0)
        }
    }
}

struct Step {
    conc: Concentration,
    y: DMatrix<f64>,
    svdd: SvddSolution,
}

fn describe(q: &DMatrix<f64>, xc: &DMatrix<f64>, cfg: &ProjectionConfig) -> Result<Step> {
    let y = q * xc;
    let (conc, g) = match cfg.geometry {
        Geometry::Spherical => (Concentration::identity(cfg.d), GramMatrix::linear(&y)),
        Geometry::Ellipsoidal { ridge_eps } => {
            let conc = concentration_of(&y, ridge_eps)?;
            let g = gram_of(&y, &conc.e_inv);
            (conc, g)
        }
    };
    let svdd = solve_svdd(&g, cfg.c, &cfg.solver)?;
    Ok(Step { conc, y, svdd })
}

/// Runs the alternating optimization on uncentered target samples `x`
/// (one per column). `k_max - 1` projection updates are followed by a final
/// description in the optimized subspace; `history` gets one record per
/// description solved, so it always has `k_max` entries.
pub fn fit_projection(
    x: &DMatrix<f64>,
    cfg: &ProjectionConfig,
    eval: Option<EvalSet<'_>>,
) -> Result<ProjectionModel> {
    let dim = x.nrows();
    if cfg.d == 0 || cfg.d > dim {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {} must lie in 1..={dim}",
            cfg.d
        )));
    }
    if cfg.k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if let Some(ev) = &eval {
        if ev.x.nrows() != dim || ev.x.ncols() != ev.labels.len() {
            return Err(Error::Shape(
                "evaluation set does not match training data".into(),
            ));
        }
    }
    let stats = CenteringStats::fit(x, false)?;
    let xc = stats.apply(x);
    let mu = stats.mu;

    let mut q = initial_projection(cfg, dim)?;
    let mut history = Vec::with_capacity(cfg.k_max);

    for k in 1..=cfg.k_max {
        let step = describe(&q, &xc, cfg)?;
        let model = ProjectionModel {
            q: q.clone(),
            mu: mu.clone(),
            e_inv: step.conc.e_inv,
            e_inv_sqrt: step.conc.e_inv_sqrt,
            svdd: step.svdd,
            config: cfg.clone(),
            train_y: step.y,
            history: Vec::new(),
        };
        history.push(IterationRecord {
            iteration: k,
            objective: model.svdd.objective,
            radius_sq: model.svdd.radius_sq,
            gmean: eval.and_then(|ev| score(&model.decide_batch(ev.x), ev.labels)),
            orthogonality_error: orthogonality_error(&q),
        });
        if k == cfg.k_max {
            return Ok(ProjectionModel { history, ..model });
        }
        // eta = 0 leaves Q untouched, including the re-orthonormalization.
        if cfg.eta != 0.0 {
            let alpha = &model.svdd.alpha;
            let lambda = cfg
                .regularizer
                .form()
                .map(|f| psi_vector(alpha, &model.svdd.boundary_sv, f))
                .unwrap_or_else(|| DVector::zeros(alpha.len()));
            let grad = match cfg.geometry {
                Geometry::Spherical => {
                    crate::ssvdd::ssvdd_gradient(&q, &xc, alpha, &lambda, reg_beta(cfg))
                }
                Geometry::Ellipsoidal { .. } => ellipsoidal_gradient(
                    &q,
                    &xc,
                    &model.e_inv,
                    alpha,
                    cfg.beta,
                    cfg.regularizer,
                    &lambda,
                ),
            };
            q = orthonormalize_at(&(q - grad * cfg.eta), k)?;
        }
    }
    unreachable!("loop returns at k == k_max")
}

fn reg_beta(cfg: &ProjectionConfig) -> f64 {
    match cfg.regularizer {
        Regularizer::None => 0.0,
        _ => cfg.beta,
    }
}

/// Fits ES-SVDD on uncentered target samples (one per column).
pub fn fit_essvdd(
    x_targets: &DMatrix<f64>,
    cfg: &EssvddConfig,
    eval: Option<EvalSet<'_>>,
) -> Result<ProjectionModel> {
    cfg.validate(x_targets.nrows())?;
    fit_projection(x_targets, &cfg.projection_config(), eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssvdd::{psi_value, LambdaForm};

    fn randn(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
    }

    fn random_q(d: usize, dim: usize, seed: u64) -> DMatrix<f64> {
        orthonormalize(&randn(d, dim, seed)).unwrap()
    }

    #[test]
    fn diagonal_concentration() {
        let x = DMatrix::from_column_slice(2, 4, &[1.0, 0.0, -1.0, 0.0, 0.0, 2.0, 0.0, -2.0]);
        let c = concentration(&DMatrix::identity(2, 2), &x, DEFAULT_RIDGE_EPS).unwrap();
        let expect_inv = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.5, 0.125]));
        assert!((&c.e_inv - expect_inv).amax() < 1e-15);
        assert!((c.e_inv_sqrt[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c.e_inv_sqrt[(1, 1)] - 0.125f64.sqrt()).abs() < 1e-15);
        assert!(c.e_inv_sqrt[(0, 1)].abs() < 1e-15);

        let q = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let c1 = concentration(&q, &x, DEFAULT_RIDGE_EPS).unwrap();
        assert!((c1.e_inv[(0, 0)] - 0.5).abs() < 1e-15);

        let g = ellipsoidal_gram(&DMatrix::identity(2, 2), &c.e_inv, &x);
        assert!((g.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_data_is_degenerate() {
        let err = concentration(&DMatrix::identity(2, 2), &DMatrix::zeros(2, 5), 1e-8).unwrap_err();
        assert!(matches!(err, Error::DegenerateCovariance));
    }

    #[test]
    fn concentration_inverts_e() {
        let q = random_q(3, 5, 1);
        let x = randn(5, 10, 2);
        let c = concentration(&q, &x, DEFAULT_RIDGE_EPS).unwrap();
        let e = &q * &x * x.transpose() * q.transpose();
        assert!((&c.e_inv * e - DMatrix::identity(3, 3)).amax() < 1e-8);
        assert!((&c.e_inv_sqrt * &c.e_inv_sqrt - &c.e_inv).amax() < 1e-10);
    }

    #[test]
    fn gram_matches_whitened_coordinates() {
        let q = random_q(2, 4, 3);
        let x = randn(4, 9, 4);
        let c = concentration(&q, &x, DEFAULT_RIDGE_EPS).unwrap();
        let g = ellipsoidal_gram(&q, &c.e_inv, &x);
        let w = &c.e_inv_sqrt * &q * &x;
        assert!((g.matrix() - w.tr_mul(&w)).amax() < 1e-10);
        let spherical = ellipsoidal_gram(&q, &DMatrix::identity(2, 2), &x);
        let y = &q * &x;
        assert!((spherical.matrix() - y.tr_mul(&y)).amax() < 1e-12);
    }

    #[test]
    fn gram_depends_only_on_row_space() {
        for seed in 0..10 {
            let q = random_q(3, 6, 10 + seed);
            let x = randn(6, 12, 20 + seed);
            let r = random_q(3, 3, 30 + seed);
            let rq = &r * &q;
            let g1 = ellipsoidal_gram(&q, &concentration(&q, &x, 1e-8).unwrap().e_inv, &x);
            let g2 = ellipsoidal_gram(&rq, &concentration(&rq, &x, 1e-8).unwrap().e_inv, &x);
            assert!((g1.matrix() - g2.matrix()).amax() < 1e-8);
        }
    }

    #[test]
    fn zero_lambda_gives_zero_upsilon_gradient() {
        let q = random_q(2, 4, 5);
        let x = randn(4, 6, 6);
        let c = concentration(&q, &x, 1e-8).unwrap();
        assert_eq!(
            upsilon_gradient(&q, &x, &c.e_inv, &DVector::zeros(6)).amax(),
            0.0
        );
    }

    #[test]
    fn upsilon_gradient_with_whitened_projection() {
        // Whiten so that Q X X' Q' = I and E^-1 drops out.
        let x = randn(3, 8, 7);
        let q0 = random_q(2, 3, 8);
        let c = concentration(&q0, &x, 1e-8).unwrap();
        let q = &c.e_inv_sqrt * &q0;
        let e = &q * &x * x.transpose() * q.transpose();
        assert!((&e - DMatrix::identity(2, 2)).amax() < 1e-10);
        let l = DVector::from_fn(8, |i, _| 0.1 * i as f64);
        let xl = &x * &l;
        let direct = (&q * &xl) * xl.transpose() * 2.0
            - (&q * &xl) * (&q * &xl).transpose() * &q * &x * x.transpose() * 2.0;
        let via = upsilon_gradient(&q, &x, &DMatrix::identity(2, 2), &l);
        assert!((direct - via).amax() < 1e-10);
    }

    #[test]
    fn single_sample_has_zero_gradient() {
        let q = random_q(1, 2, 9);
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let cfg = EssvddConfig {
            beta: 0.0,
            ..Default::default()
        };
        let g = essvdd_gradient(&q, &x, &[1.0], &cfg, &DVector::zeros(1)).unwrap();
        assert!(g.amax() < 1e-12);
    }

    #[test]
    fn psi_term_is_additive() {
        let q = random_q(2, 4, 10);
        let x = randn(4, 6, 11);
        let alpha = [0.1, 0.2, 0.3, 0.15, 0.15, 0.1];
        let ones = DVector::from_element(6, 1.0);
        let base = EssvddConfig {
            beta: 1.0,
            regularizer: Regularizer::None,
            ..Default::default()
        };
        let psi = EssvddConfig {
            regularizer: Regularizer::Psi(LambdaForm::Ones),
            ..base.clone()
        };
        let diff = essvdd_gradient(&q, &x, &alpha, &psi, &ones).unwrap()
            - essvdd_gradient(&q, &x, &alpha, &base, &ones).unwrap();
        let xl = &x * &ones;
        let expected = (&q * &xl) * xl.transpose() * 2.0;
        assert!((diff - expected).amax() < 1e-12);
    }

    #[test]
    fn upsilon_with_identity_equals_psi() {
        let q = random_q(2, 5, 12);
        let x = randn(5, 7, 13);
        let l = DVector::from_fn(7, |i, _| (i as f64).sin());
        assert_eq!(
            upsilon_value(&q, &x, &DMatrix::identity(2, 2), &l),
            psi_value(&q, &x, &l)
        );
    }

    #[test]
    fn orthonormalize_examples() {
        let q = DMatrix::from_row_slice(2, 3, &[2.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
        let o = orthonormalize(&q).unwrap();
        assert!(
            (o - DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).amax() < 1e-15
        );

        let q = random_q(2, 5, 14);
        let again = orthonormalize(&q).unwrap();
        assert!((&again - &q).amax() < 1e-12);

        let raw = randn(2, 5, 15);
        let o = orthonormalize(&raw).unwrap();
        assert!((&o * o.transpose() - DMatrix::identity(2, 2)).amax() < 1e-12);
        // Same row space: projectors agree.
        let proj_raw = raw.transpose() * (&raw * raw.transpose()).try_inverse().unwrap() * &raw;
        assert!((o.transpose() * &o - proj_raw).amax() < 1e-10);
        for row in o.row_iter() {
            assert!(row.iter().find(|v| v.abs() > 1e-12).unwrap() >= &0.0);
        }
    }

    #[test]
    fn rank_deficient_projection() {
        let q = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(orthonormalize(&q), Err(Error::RankLoss { .. })));
    }

    #[test]
    fn decide_matches_coordinates() {
        let x = randn(4, 30, 16);
        let cfg = EssvddConfig {
            d: 2,
            c: 0.2,
            regularizer: Regularizer::Upsilon(LambdaForm::Alpha),
            ..Default::default()
        };
        let model = fit_essvdd(&x, &cfg, None).unwrap();
        let u = model.center();
        for seed in 0..5 {
            let p = randn(4, 1, 100 + seed).column(0).into_owned();
            let (d, inside) = model.decide(&p);
            let direct = (&model.e_inv_sqrt * &model.q * (&p - &model.mu) - &u).norm_squared();
            assert!((d - direct).abs() < 1e-10);
            assert_eq!(inside, d <= model.radius_sq());
        }
        // Boundary support vectors sit on the boundary.
        for &i in &model.svdd.boundary_sv {
            let (d, _) = model.decide(&x.column(i).into_owned());
            assert!((d - model.radius_sq()).abs() < 1e-6 * model.radius_sq().max(1.0));
        }
    }

    #[test]
    fn symmetric_data_puts_mean_inside() {
        let half = randn(3, 15, 17);
        let mut x = DMatrix::zeros(3, 30);
        x.columns_mut(0, 15).copy_from(&half);
        x.columns_mut(15, 15).copy_from(&(-&half));
        let model = fit_essvdd(
            &x,
            &EssvddConfig {
                d: 2,
                c: 0.3,
                ..Default::default()
            },
            None,
        )
        .unwrap();
        let (_, inside) = model.decide(&x.column_mean());
        assert!(inside);
    }

    #[test]
    fn history_has_k_max_records() {
        let x = randn(5, 25, 18);
        let cfg = EssvddConfig {
            d: 3,
            k_max: 7,
            regularizer: Regularizer::Upsilon(LambdaForm::Ones),
            ..Default::default()
        };
        let model = fit_essvdd(&x, &cfg, None).unwrap();
        assert_eq!(model.history.len(), 7);
        assert!(model.history.iter().all(|h| h.orthogonality_error <= 1e-8));
        assert_eq!(
            model.history.last().unwrap().objective,
            model.svdd.objective
        );
    }

    #[test]
    fn fit_is_deterministic_and_serializes() {
        let x = randn(5, 25, 19);
        let cfg = EssvddConfig {
            d: 2,
            seed: 5,
            regularizer: Regularizer::Psi(LambdaForm::BoundaryAlpha),
            ..Default::default()
        };
        let a = fit_essvdd(&x, &cfg, None).unwrap();
        let b = fit_essvdd(&x, &cfg, None).unwrap();
        assert_eq!(a, b);
        let back = ProjectionModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        let probes = randn(5, 20, 20);
        assert_eq!(back.decide_batch(&probes), a.decide_batch(&probes));
    }

    #[test]
    fn esvdd_matches_svdd_on_isotropic_data() {
        // Rows orthogonal with equal norms: X X' = s I, so whitening is a global scale.
        let h = DMatrix::from_row_slice(
            4,
            8,
            &[
                1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0,
                1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0,
                1.0,
            ],
        );
        let x = h.rows(1, 3).into_owned();
        let xxt = &x * x.transpose();
        assert!((xxt - DMatrix::identity(3, 3) * 8.0).amax() < 1e-12);
        let e = fit_essvdd(&x, &EssvddConfig::esvdd(3, 0.3), None).unwrap();
        let plain = solve_svdd(&GramMatrix::linear(&x), 0.3, &SolverOptions::default()).unwrap();
        for (a, b) in e.svdd.alpha.iter().zip(&plain.alpha) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
