//! One-class classification with support vector data descriptions.
//!
//! [`essvdd`] learns a linear projection jointly with an ellipsoidal
//! description of the target class. [`ssvdd`] is the spherical variant,
//! [`qp`] solves the SVDD dual, and [`npt`] maps data through an RBF kernel
//! so the linear methods can operate non-linearly. [`eval`] implements the
//! Gmean metric, cross-validated grid search and repeated-split experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod essvdd;
pub mod eval;
mod io;
pub mod npt;
pub mod qp;
pub mod ssvdd;
pub mod synthetic;

pub use data::{
    load_csv, make_folds, make_split, CenteringStats, Dataset, Label, LabelColumn, SplitPlan,
};
pub use error::{Error, Result};
pub use essvdd::{fit_essvdd, EssvddConfig, EvalSet, ProjectionModel};
pub use eval::{
    cv_select, fit_method, gmean, run_experiment, train, Confusion, ExperimentOptions,
    ExperimentResult, Grid, Hyperparams, Method, MethodSpec, TrainedModel,
};
pub use io::write_atomic;
pub use npt::{fit_npt, KernelModel};
pub use qp::{solve_svdd, GramMatrix, SolverOptions, SvddSolution};
pub use ssvdd::{fit_ssvdd, LambdaForm, Regularizer, SsvddConfig};
