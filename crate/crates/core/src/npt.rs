//! Non-linear projection trick.
//!
//! Training targets are mapped to an explicit `ell`-dimensional space whose
//! inner products reproduce the centered RBF kernel, so the linear fitters
//! can be reused unchanged. New samples are mapped with a precomputed
//! `A^-1/2 U' (I - J)` after evaluating their kernel against the training set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{matrix_rows, vector};
use crate::qp::symmetrize;

/// Default relative cutoff below which kernel eigenpairs are dropped.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

/// `K_ij = exp(-|a_i - b_j|^2 / (2 sigma^2))` for the columns of `a` and `b`.
pub fn rbf_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>, sigma: f64) -> Result<DMatrix<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "RBF width must be positive, got {sigma}"
        )));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "kernel inputs have {} and {} features",
            a.nrows(),
            b.nrows()
        )));
    }
    let scale = -0.5 / (sigma * sigma);
    Ok(DMatrix::from_fn(a.ncols(), b.ncols(), |i, j| {
        let d2 = (a.column(i) - b.column(j)).norm_squared();
        (scale * d2).exp()
    }))
}

/// `(I - J) K (I - J)` with `J = 11'/N`.
pub fn center_kernel(k: &DMatrix<f64>) -> DMatrix<f64> {
    let row_means = k.column_mean();
    let col_means = k.row_mean();
    let total = row_means.mean();
    symmetrize(DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| {
        k[(i, j)] - row_means[i] - col_means[j] + total
    }))
}

/// Fitted kernel map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    /// Training targets in the input space, one per column.
    #[serde(rename = "X_train", with = "matrix_rows")]
    pub x_train: DMatrix<f64>,
    pub sigma: f64,
    pub eig_tol: f64,
    /// Retained eigenvalues of the centered kernel, descending.
    #[serde(with = "vector")]
    pub eigenvalues: DVector<f64>,
    /// `K 1 / N`.
    #[serde(with = "vector")]
    pub row_means: DVector<f64>,
    /// `A^-1/2 U' (I - J)`, ell x N.
    #[serde(with = "matrix_rows")]
    pub test_map: DMatrix<f64>,
    pub ell: usize,
}

/// A fitted map together with the training data in the reduced space.
#[derive(Debug, Clone, PartialEq)]
pub struct NptFit {
    pub model: KernelModel,
    /// `A^1/2 U'`, ell x N.
    pub phi: DMatrix<f64>,
    /// The centered kernel the map was derived from.
    pub k_centered: DMatrix<f64>,
}

pub fn fit_npt(x: &DMatrix<f64>, sigma: f64, eig_tol: f64) -> Result<NptFit> {
    let n = x.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "kernel map needs at least 2 training samples, got {n}"
        )));
    }
    if !(eig_tol >= 0.0) {
        return Err(Error::InvalidParameter(
            "eig_tol must be non-negative".into(),
        ));
    }
    let k = rbf_kernel(x, x, sigma)?;
    let kc = center_kernel(&k);
    let eig = kc.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let lmax = eig.eigenvalues[order[0]];
    if !(lmax > 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > eig_tol * lmax)
        .collect();
    let ell = keep.len();
    let eigenvalues = DVector::from_iterator(ell, keep.iter().map(|&i| eig.eigenvalues[i]));
    let mut u = DMatrix::zeros(n, ell);
    for (c, &i) in keep.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v.neg_mut();
        }
        u.set_column(c, &v);
    }
    let mut ut = u.transpose();
    let mut phi = ut.clone();
    for r in 0..ell {
        let s = eigenvalues[r].sqrt();
        phi.row_mut(r).scale_mut(s);
        ut.row_mut(r).unscale_mut(s);
    }
    // Right-multiplying by (I - J) subtracts each row's mean.
    for mut row in ut.row_iter_mut() {
        let m = row.mean();
        row.add_scalar_mut(-m);
    }
    let model = KernelModel {
        x_train: x.clone(),
        sigma,
        eig_tol,
        eigenvalues,
        row_means: k.column_mean(),
        test_map: ut,
        ell,
    };
    Ok(NptFit {
        model,
        phi,
        k_centered: kc,
    })
}

impl KernelModel {
    pub fn input_dim(&self) -> usize {
        self.x_train.nrows()
    }

    /// Maps the columns of `x` into the reduced space (ell x M).
    pub fn map(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut k = rbf_kernel(&self.x_train, x, self.sigma)?;
        for mut col in k.column_iter_mut() {
            col -= &self.row_means;
        }
        Ok(&self.test_map * k)
    }

    /// Maps a single sample.
    pub fn map_test(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.map(&DMatrix::from_column_slice(x.len(), 1, x.as_slice()))?;
        Ok(m.column(0).into_owned())
    }
}
