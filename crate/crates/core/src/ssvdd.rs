//! Subspace SVDD: a spherical description learned jointly with a linear
//! projection, plus the sample-weighting regularizers shared with the
//! ellipsoidal variant.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::essvdd::{fit_projection, EvalSet, Geometry, Init, ProjectionConfig, ProjectionModel};
use crate::qp::SolverOptions;

/// How the regularizer weights the training samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LambdaForm {
    /// Every sample contributes equally.
    Ones,
    /// Samples weighted by their dual coefficients.
    Alpha,
    /// Only boundary support vectors, weighted by their coefficients.
    BoundaryAlpha,
}

impl LambdaForm {
    pub fn index(self) -> u8 {
        match self {
            LambdaForm::Ones => 1,
            LambdaForm::Alpha => 2,
            LambdaForm::BoundaryAlpha => 3,
        }
    }

    pub fn from_index(m: u8) -> Option<Self> {
        match m {
            1 => Some(LambdaForm::Ones),
            2 => Some(LambdaForm::Alpha),
            3 => Some(LambdaForm::BoundaryAlpha),
            _ => None,
        }
    }
}

/// Variance regularizer added to the projection objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regularizer {
    None,
    /// Projected class variance, `Tr(Q X l l' X' Q')`.
    Psi(LambdaForm),
    /// Projected class variance whitened by the concentration matrix.
    Upsilon(LambdaForm),
}

impl Regularizer {
    pub fn form(self) -> Option<LambdaForm> {
        match self {
            Regularizer::None => None,
            Regularizer::Psi(f) | Regularizer::Upsilon(f) => Some(f),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::None => f.write_str("none"),
            Regularizer::Psi(m) => write!(f, "psi{}", m.index()),
            Regularizer::Upsilon(m) => write!(f, "upsilon{}", m.index()),
        }
    }
}

impl FromStr for Regularizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("unknown regularizer {s:?} (expected none, psi1..3 or upsilon1..3)");
        if s == "none" || s == "psi0" {
            return Ok(Regularizer::None);
        }
        let (ctor, digit): (fn(LambdaForm) -> Regularizer, &str) =
            if let Some(d) = s.strip_prefix("upsilon") {
                (Regularizer::Upsilon, d)
            } else if let Some(d) = s.strip_prefix("psi") {
                (Regularizer::Psi, d)
            } else {
                return Err(bad());
            };
        let m: u8 = digit.parse().map_err(|_| bad())?;
        LambdaForm::from_index(m).map(ctor).ok_or_else(bad)
    }
}

/// Sample weights `l` for the chosen regularizer form.
pub fn psi_vector(alpha: &[f64], boundary_sv: &[usize], form: LambdaForm) -> DVector<f64> {
    match form {
        LambdaForm::Ones => DVector::from_element(alpha.len(), 1.0),
        LambdaForm::Alpha => DVector::from_row_slice(alpha),
        LambdaForm::BoundaryAlpha => {
            let mut l = DVector::zeros(alpha.len());
            for &i in boundary_sv {
                l[i] = alpha[i];
            }
            l
        }
    }
}

/// `Tr(Q X l l' X' Q') = |Q X l|^2`.
pub fn psi_value(q: &DMatrix<f64>, x: &DMatrix<f64>, lambda: &DVector<f64>) -> f64 {
    let ql = q * (x * lambda);
    ql.dot(&ql)
}

/// `2 Q X l l' X'`.
pub fn psi_gradient(q: &DMatrix<f64>, x: &DMatrix<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
    let xl = x * lambda;
    let ql = q * &xl;
    (ql * xl.transpose()) * 2.0
}

/// `Q X (A - a a') X'` for `A = diag(a)`, computed without forming the N x N matrix.
pub(crate) fn weighted_scatter(y: &DMatrix<f64>, x: &DMatrix<f64>, alpha: &[f64]) -> DMatrix<f64> {
    let a = DVector::from_row_slice(alpha);
    let mut ya = y.clone();
    for (mut col, &w) in ya.column_iter_mut().zip(alpha) {
        col *= w;
    }
    let y_alpha = y * &a;
    let x_alpha = x * &a;
    ya * x.transpose() - y_alpha * x_alpha.transpose()
}

/// Gradient of the spherical subspace Lagrangian,
/// `2 Q X (A - a a') X' + beta 2 Q X l l' X'`.
pub fn ssvdd_gradient(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    alpha: &[f64],
    lambda: &DVector<f64>,
    beta: f64,
) -> DMatrix<f64> {
    let y = q * x;
    let mut g = weighted_scatter(&y, x, alpha) * 2.0;
    if beta != 0.0 {
        g += psi_gradient(q, x, lambda) * beta;
    }
    g
}

/// Value of the spherical subspace Lagrangian with `alpha` and `lambda` held fixed.
pub fn ssvdd_lagrangian(
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
    alpha: &[f64],
    lambda: &DVector<f64>,
    beta: f64,
) -> f64 {
    let y = q * x;
    let a = DVector::from_row_slice(alpha);
    let ya = &y * &a;
    let weighted: f64 = y
        .column_iter()
        .zip(alpha)
        .map(|(c, &w)| w * c.dot(&c))
        .sum();
    weighted - ya.dot(&ya) + beta * psi_value(q, x, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvddConfig {
    pub d: usize,
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
    pub k_max: usize,
    /// `None` is the unregularized variant.
    pub psi: Option<LambdaForm>,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for SsvddConfig {
    fn default() -> Self {
        SsvddConfig {
            d: 2,
            beta: 0.0,
            eta: 0.01,
            c: 0.5,
            k_max: 10,
            psi: None,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

impl SsvddConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.d == 0 || self.d > dim {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {} must lie in 1..={dim}",
                self.d
            )));
        }
        if !(self.eta >= 0.0) || self.k_max == 0 {
            return Err(Error::InvalidParameter(
                "need eta >= 0 and k_max >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn projection_config(&self) -> ProjectionConfig {
        ProjectionConfig {
            geometry: Geometry::Spherical,
            d: self.d,
            beta: self.beta,
            eta: self.eta,
            c: self.c,
            k_max: self.k_max,
            regularizer: self.psi.map_or(Regularizer::None, Regularizer::Psi),
            seed: self.seed,
            init: Init::Random,
            solver: self.solver,
        }
    }
}

/// Fits S-SVDD on the target samples (one per column). The data is centered
/// on its mean internally.
pub fn fit_ssvdd(
    x_targets: &DMatrix<f64>,
    cfg: &SsvddConfig,
    eval: Option<EvalSet<'_>>,
) -> Result<ProjectionModel> {
    cfg.validate(x_targets.nrows())?;
    fit_projection(x_targets, &cfg.projection_config(), eval)
}
