//! Fixtures shared by the benchmarks.

use nalgebra::DMatrix;
use onecls::synthetic;

/// Target samples of the anisotropic problem embedded in `dim` dimensions.
pub fn targets(dim: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let ds = synthetic::anisotropic(n, 0, 3.0, seed);
    if dim <= 2 {
        return ds.x.rows(0, dim).into_owned();
    }
    synthetic::embed(&ds, dim - 2, 1.0, seed + 1).x
}
