//! Seeded synthetic one-class problems for tests, examples and benchmarks.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, Label};

/// Standard deviations of the target distribution along the two axes.
pub const ANISOTROPIC_SD: [f64; 2] = [5.0, 1.0];

/// Targets drawn from a zero-mean Gaussian with axis standard deviations
/// [`ANISOTROPIC_SD`]; outliers placed at random angles on the ellipse of
/// Mahalanobis radius `outlier_radius` around the target mean.
pub fn anisotropic(n_targets: usize, n_outliers: usize, outlier_radius: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_targets + n_outliers;
    let mut x = DMatrix::zeros(2, n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..n {
        if j < n_targets {
            for (i, sd) in ANISOTROPIC_SD.iter().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[(i, j)] = sd * z;
            }
            labels.push(Label::Target);
        } else {
            let t = rng.random_range(0.0..2.0 * PI);
            x[(0, j)] = outlier_radius * ANISOTROPIC_SD[0] * t.cos();
            x[(1, j)] = outlier_radius * ANISOTROPIC_SD[1] * t.sin();
            labels.push(Label::Outlier);
        }
    }
    Dataset::new(x, labels, "anisotropic", "target").expect("finite synthetic data")
}

/// Appends `extra` i.i.d. Gaussian noise rows with standard deviation
/// `noise_sd` to every sample, then applies a random rotation so the
/// informative plane is not axis aligned.
pub fn embed(ds: &Dataset, extra: usize, noise_sd: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d0, n) = ds.x.shape();
    let dim = d0 + extra;
    let mut x = DMatrix::zeros(dim, n);
    x.rows_mut(0, d0).copy_from(&ds.x);
    for v in x.rows_mut(d0, extra).iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v = noise_sd * z;
    }
    let g: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let rot = g.qr().q();
    Dataset::new(
        rot * x,
        ds.labels.clone(),
        ds.name.clone(),
        ds.source_class.clone(),
    )
    .expect("finite synthetic data")
}

/// `n` points in `dim` dimensions with i.i.d. standard normal coordinates.
pub fn gaussian(dim: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(dim, n, |_, _| StandardNormal.sample(&mut rng))
}
