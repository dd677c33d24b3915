//! Gmean, cross-validated grid search and the repeated-split experiment runner.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{make_folds, make_split, Dataset, Label, SplitPlan};
use crate::error::{Error, Result};
use crate::essvdd::{
    fit_projection, EvalSet, Geometry, Init, ProjectionConfig, ProjectionModel, DEFAULT_RIDGE_EPS,
};
use crate::io::write_atomic;
use crate::npt::{fit_npt, KernelModel, DEFAULT_EIG_TOL};
use crate::qp::SolverOptions;
use crate::ssvdd::Regularizer;

/// Targets are the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl Confusion {
    /// `predicted_target[i]` is the decision for a sample labelled `labels[i]`.
    pub fn from_predictions(predicted_target: &[bool], labels: &[Label]) -> Self {
        assert_eq!(
            predicted_target.len(),
            labels.len(),
            "prediction/label length mismatch"
        );
        let mut c = Confusion::default();
        for (&p, l) in predicted_target.iter().zip(labels) {
            match (l.is_target(), p) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
            }
        }
        c
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn tpr(&self) -> f64 {
        self.tp as f64 / self.positives() as f64
    }

    pub fn tnr(&self) -> f64 {
        self.tn as f64 / self.negatives() as f64
    }
}

/// `sqrt(tpr * tnr)`. Fails instead of returning 0 when a class is empty.
pub fn gmean(c: &Confusion) -> Result<f64> {
    if c.positives() == 0 || c.negatives() == 0 {
        return Err(Error::EmptyClass {
            positives: c.positives(),
            negatives: c.negatives(),
        });
    }
    Ok((c.tpr() * c.tnr()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svdd,
    Esvdd,
    Ssvdd,
    Essvdd,
}

impl Method {
    pub fn is_iterative(self) -> bool {
        matches!(self, Method::Ssvdd | Method::Essvdd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Svdd => "svdd",
            Method::Esvdd => "esvdd",
            Method::Ssvdd => "ssvdd",
            Method::Essvdd => "essvdd",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "svdd" => Ok(Method::Svdd),
            "esvdd" => Ok(Method::Esvdd),
            "ssvdd" => Ok(Method::Ssvdd),
            "essvdd" => Ok(Method::Essvdd),
            _ => Err(format!(
                "unknown method {s:?} (expected svdd, esvdd, ssvdd or essvdd)"
            )),
        }
    }
}

/// A method variant: base method, regularizer and whether the kernel map is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub regularizer: Regularizer,
    pub kernelized: bool,
}

impl MethodSpec {
    pub fn new(method: Method, regularizer: Regularizer, kernelized: bool) -> Result<Self> {
        let ok = matches!(
            (method, regularizer),
            (_, Regularizer::None) | (Method::Ssvdd, Regularizer::Psi(_)) | (Method::Essvdd, _)
        );
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "regularizer {regularizer} is not available for method {method}"
            )));
        }
        Ok(MethodSpec {
            method,
            regularizer,
            kernelized,
        })
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.method)?;
        if self.regularizer != Regularizer::None {
            write!(f, "-{}", self.regularizer)?;
        }
        f.write_str(if self.kernelized {
            " (kernel)"
        } else {
            " (linear)"
        })
    }
}

/// Candidate hyperparameter values. Values a method does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub beta: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub sigma: Vec<f64>,
    pub d: Vec<usize>,
    pub eta: Vec<f64>,
    pub k_max: usize,
}

impl Default for Grid {
    fn default() -> Self {
        let pow10 = |lo: i32, hi: i32| (lo..=hi).map(|e| 10f64.powi(e)).collect::<Vec<_>>();
        Grid {
            beta: pow10(-4, 4),
            c: vec![0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            sigma: pow10(-3, 3),
            d: vec![1, 2, 3, 4, 5, 10, 20, 50, 100],
            eta: pow10(-5, -1),
            k_max: 10,
        }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty()
            || self.c.is_empty()
            || self.sigma.is_empty()
            || self.d.is_empty()
            || self.eta.is_empty()
        {
            return Err(Error::InvalidParameter(
                "every grid list must be non-empty".into(),
            ));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        Ok(())
    }

    /// All configurations relevant to `spec`, sorted by the tie-break order
    /// (d, C, beta, eta, sigma).
    pub fn configurations(&self, spec: &MethodSpec) -> Vec<Hyperparams> {
        let iterative = spec.method.is_iterative();
        let d: Vec<Option<usize>> = if iterative {
            self.d.iter().map(|&v| Some(v)).collect()
        } else {
            vec![None]
        };
        let beta = if spec.regularizer != Regularizer::None {
            self.beta.clone()
        } else {
            vec![0.0]
        };
        let eta = if iterative {
            self.eta.clone()
        } else {
            vec![0.0]
        };
        let sigma: Vec<Option<f64>> = if spec.kernelized {
            self.sigma.iter().map(|&v| Some(v)).collect()
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        for &d in &d {
            for &c in &self.c {
                for &beta in &beta {
                    for &eta in &eta {
                        for &sigma in &sigma {
                            out.push(Hyperparams {
                                c,
                                d,
                                beta,
                                eta,
                                sigma,
                            });
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.order_key()
                .partial_cmp(&b.order_key())
                .expect("finite grid values")
        });
        out.dedup();
        out
    }
}

/// One grid configuration. `d = None` means the full input (or kernel) dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    #[serde(rename = "C")]
    pub c: f64,
    pub d: Option<usize>,
    pub beta: f64,
    pub eta: f64,
    pub sigma: Option<f64>,
}

impl Hyperparams {
    fn order_key(&self) -> (usize, f64, f64, f64, f64) {
        (
            self.d.unwrap_or(0),
            self.c,
            self.beta,
            self.eta,
            self.sigma.unwrap_or(0.0),
        )
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C={}", self.c)?;
        if let Some(d) = self.d {
            write!(f, ",d={d}")?;
        }
        write!(f, ",beta={},eta={}", self.beta, self.eta)?;
        if let Some(s) = self.sigma {
            write!(f, ",sigma={s}")?;
        }
        Ok(())
    }
}

/// Builds the loop configuration of `spec` for data of dimension `dim`.
pub fn projection_config(
    spec: &MethodSpec,
    hp: &Hyperparams,
    dim: usize,
    k_max: usize,
    seed: u64,
) -> Result<ProjectionConfig> {
    let d = hp.d.unwrap_or(dim);
    if d == 0 || d > dim {
        return Err(Error::InvalidParameter(format!(
            "d={d} exceeds the feature dimension {dim}"
        )));
    }
    let ellipsoidal = Geometry::Ellipsoidal {
        ridge_eps: DEFAULT_RIDGE_EPS,
    };
    let fixed = |geometry| ProjectionConfig {
        geometry,
        d: dim,
        beta: 0.0,
        eta: 0.0,
        c: hp.c,
        k_max: 1,
        regularizer: Regularizer::None,
        seed,
        init: Init::Identity,
        solver: SolverOptions::default(),
    };
    let learned = |geometry| ProjectionConfig {
        geometry,
        d,
        beta: hp.beta,
        eta: hp.eta,
        c: hp.c,
        k_max,
        regularizer: spec.regularizer,
        seed,
        init: Init::Random,
        solver: SolverOptions::default(),
    };
    Ok(match spec.method {
        Method::Svdd => fixed(Geometry::Spherical),
        Method::Esvdd => fixed(ellipsoidal),
        Method::Ssvdd => learned(Geometry::Spherical),
        Method::Essvdd => learned(ellipsoidal),
    })
}

/// A fitted method bundle: optional kernel map followed by a projection model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: MethodSpec,
    pub hyperparams: Hyperparams,
    pub kernel: Option<KernelModel>,
    pub model: ProjectionModel,
}

impl TrainedModel {
    pub fn input_dim(&self) -> usize {
        match &self.kernel {
            Some(k) => k.input_dim(),
            None => self.model.dim(),
        }
    }

    /// Decisions for the columns of `x` (raw input space).
    pub fn decide_batch(&self, x: &DMatrix<f64>) -> Result<Vec<(f64, bool)>> {
        if x.nrows() != self.input_dim() {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                x.nrows()
            )));
        }
        Ok(match &self.kernel {
            Some(k) => self.model.decide_batch(&k.map(x)?),
            None => self.model.decide_batch(x),
        })
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

    /// Per-iteration Gmean on the evaluation set given at fit time, padded to
    /// `k_max` entries for methods that solve only once.
    pub fn curve(&self, k_max: usize) -> Vec<f64> {
        let g: Vec<f64> = self
            .model
            .history
            .iter()
            .map(|h| h.gmean.unwrap_or(f64::NAN))
            .collect();
        if g.len() == 1 && k_max > 1 {
            vec![g[0]; k_max]
        } else {
            g
        }
    }
}

/// Fits `spec` on raw target samples `x_targets` (one per column).
pub fn fit_method(
    spec: &MethodSpec,
    hp: &Hyperparams,
    k_max: usize,
    seed: u64,
    x_targets: &DMatrix<f64>,
    eval: Option<EvalSet<'_>>,
) -> Result<TrainedModel> {
    let (kernel, feats) = if spec.kernelized {
        let sigma = hp
            .sigma
            .ok_or_else(|| Error::InvalidParameter("kernelized methods need sigma".into()))?;
        let fit = fit_npt(x_targets, sigma, DEFAULT_EIG_TOL)?;
        (Some(fit.model), fit.phi)
    } else {
        (None, x_targets.clone())
    };
    let mapped_eval = match (&kernel, &eval) {
        (Some(k), Some(ev)) => Some(k.map(ev.x)?),
        _ => None,
    };
    let eval = match (&mapped_eval, eval) {
        (Some(m), Some(ev)) => Some(EvalSet {
            x: m,
            labels: ev.labels,
        }),
        (_, ev) => ev,
    };
    let cfg = projection_config(spec, hp, feats.nrows(), k_max, seed)?;
    let model = fit_projection(&feats, &cfg, eval)?;
    Ok(TrainedModel {
        method: *spec,
        hyperparams: *hp,
        kernel,
        model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub hyperparams: Hyperparams,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best: Hyperparams,
    pub score: f64,
    /// Mean fold Gmean of every configuration that ran, in tie-break order.
    pub scores: Vec<ConfigScore>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct CvOptions {
    pub k_max: usize,
    pub seed: u64,
    /// Worker threads for the grid; `None` uses the global pool.
    pub jobs: Option<usize>,
}

struct Fold {
    train: DMatrix<f64>,
    val: DMatrix<f64>,
    val_labels: Vec<Label>,
}

fn check_plan(ds: &Dataset, plan: &SplitPlan) -> Result<()> {
    let n = ds.n_samples();
    let mut role = vec![0u8; n];
    for &i in &plan.test {
        if i >= n {
            return Err(Error::Shape(format!(
                "split index {i} out of range for {n} samples"
            )));
        }
        role[i] = 1;
    }
    let mut seen = vec![false; n];
    for fold in &plan.folds {
        for &i in fold {
            if i >= n || role[i] == 1 || seen[i] {
                return Err(Error::InvalidParameter(
                    "cross-validation folds must partition the training indices".into(),
                ));
            }
            seen[i] = true;
        }
    }
    if plan.folds.len() < 2 || plan.train.iter().any(|&i| !seen[i]) {
        return Err(Error::InvalidParameter(
            "cross-validation folds must partition the training indices".into(),
        ));
    }
    Ok(())
}

/// Picks the configuration with the best mean Gmean over the folds of `plan`:
/// fit on the targets of the other folds, score on the whole held-out fold.
/// Only training indices are touched. Configurations that fail on any fold
/// are skipped and logged.
type PreparedFolds = (Option<f64>, std::result::Result<Vec<Fold>, String>);

pub fn cv_select(
    ds: &Dataset,
    plan: &SplitPlan,
    spec: &MethodSpec,
    grid: &Grid,
    opts: &CvOptions,
) -> Result<Selection> {
    grid.validate()?;
    check_plan(ds, plan)?;
    let configs = grid.configurations(spec);
    let sigmas: Vec<Option<f64>> = if spec.kernelized {
        let mut s = grid.sigma.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.into_iter().map(Some).collect()
    } else {
        vec![None]
    };

    let run = || -> Vec<(Hyperparams, std::result::Result<f64, String>)> {
        let prepared: Vec<PreparedFolds> = sigmas
            .par_iter()
            .map(|&sigma| {
                (
                    sigma,
                    prepare_folds(ds, plan, sigma).map_err(|e| e.to_string()),
                )
            })
            .collect();
        configs
            .par_iter()
            .map(|hp| {
                let folds = &prepared
                    .iter()
                    .find(|(s, _)| *s == hp.sigma)
                    .expect("sigma prepared")
                    .1;
                let res = match folds {
                    Ok(folds) => score_config(spec, hp, folds, opts),
                    Err(e) => Err(format!("kernel map failed: {e}")),
                };
                (*hp, res)
            })
            .collect()
    };
    let results = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut scores = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<ConfigScore> = None;
    for (hp, res) in results {
        match res {
            Ok(score) => {
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(ConfigScore {
                        hyperparams: hp,
                        score,
                    });
                }
                scores.push(ConfigScore {
                    hyperparams: hp,
                    score,
                });
            }
            Err(reason) => {
                log::debug!("skipping {hp}: {reason}");
                skipped.push(format!("{hp}: {reason}"));
            }
        }
    }
    if !skipped.is_empty() {
        log::info!(
            "{} of {} configurations skipped",
            skipped.len(),
            skipped.len() + scores.len()
        );
    }
    match best {
        Some(b) => Ok(Selection {
            best: b.hyperparams,
            score: b.score,
            scores,
            skipped,
        }),
        None => Err(Error::AllConfigurationsSkipped { skipped }),
    }
}

fn prepare_folds(ds: &Dataset, plan: &SplitPlan, sigma: Option<f64>) -> Result<Vec<Fold>> {
    (0..plan.folds.len())
        .map(|k| {
            let train = ds.target_columns(&plan.fold_train(k));
            let val = ds.columns(&plan.folds[k]);
            let val_labels = ds.labels_at(&plan.folds[k]);
            match sigma {
                None => Ok(Fold {
                    train,
                    val,
                    val_labels,
                }),
                Some(s) => {
                    let fit = fit_npt(&train, s, DEFAULT_EIG_TOL)?;
                    let val = fit.model.map(&val)?;
                    Ok(Fold {
                        train: fit.phi,
                        val,
                        val_labels,
                    })
                }
            }
        })
        .collect()
}

fn score_config(
    spec: &MethodSpec,
    hp: &Hyperparams,
    folds: &[Fold],
    opts: &CvOptions,
) -> std::result::Result<f64, String> {
    let mut total = 0.0;
    for (k, fold) in folds.iter().enumerate() {
        let n = fold.train.ncols();
        if hp.c * (n as f64) < 1.0 - 1e-12 {
            return Err(format!("C < 1/N with N={n} training targets in fold {k}"));
        }
        let dim = fold.train.nrows();
        if hp.d.is_some_and(|d| d > dim) {
            return Err(format!("d exceeds the feature dimension {dim} in fold {k}"));
        }
        let cfg =
            projection_config(spec, hp, dim, opts.k_max, opts.seed).map_err(|e| e.to_string())?;
        let model =
            fit_projection(&fold.train, &cfg, None).map_err(|e| format!("fold {k}: {e}"))?;
        let predicted: Vec<bool> = model
            .decide_batch(&fold.val)
            .into_iter()
            .map(|(_, t)| t)
            .collect();
        let g = gmean(&Confusion::from_predictions(&predicted, &fold.val_labels))
            .map_err(|e| format!("fold {k}: {e}"))?;
        total += g;
    }
    Ok(total / folds.len() as f64)
}

/// Fits `spec` on every target of `ds`. With more than one grid
/// configuration the hyperparameters are first chosen by cross-validation
/// over stratified folds of the whole dataset.
pub fn train(
    ds: &Dataset,
    spec: &MethodSpec,
    grid: &Grid,
    folds: usize,
    opts: &CvOptions,
) -> Result<(TrainedModel, Option<Selection>)> {
    grid.validate()?;
    let configs = grid.configurations(spec);
    let (hp, sel) = if configs.len() == 1 {
        (configs[0], None)
    } else {
        let plan = make_folds(ds, opts.seed, folds)?;
        let sel = cv_select(ds, &plan, spec, grid, opts)?;
        (sel.best, Some(sel))
    };
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    let model = fit_method(
        spec,
        &hp,
        opts.k_max,
        opts.seed,
        &ds.target_columns(&all),
        None,
    )?;
    Ok((model, sel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub repetitions: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
    pub folds: usize,
    pub jobs: Option<usize>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            repetitions: 5,
            base_seed: 0,
            train_fraction: 0.7,
            folds: 5,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub cv_score: f64,
    pub test_gmean: f64,
    pub confusion: Confusion,
    /// Test Gmean after each iteration, `k_max` entries.
    pub curve: Vec<f64>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub target_class: String,
    pub method: MethodSpec,
    pub k_max: usize,
    /// How validation folds were scored during model selection.
    pub cv_scoring: String,
    pub repetitions: Vec<RepetitionResult>,
    pub mean_gmean: f64,
}

impl ExperimentResult {
    pub fn test_gmeans(&self) -> Vec<f64> {
        self.repetitions.iter().map(|r| r.test_gmean).collect()
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iteration,repetition,gmean` rows, iterations counted from 1.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("iteration,repetition,gmean\n");
        for r in &self.repetitions {
            for (k, g) in r.curve.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", k + 1, r.repetition, g));
            }
        }
        out
    }

    pub fn write(&self, summary: &Path, curves: &Path) -> Result<()> {
        write_atomic(summary, self.summary_json()?.as_bytes())?;
        write_atomic(curves, self.curves_csv().as_bytes())
    }
}

/// Repeats split, model selection, refit and test evaluation; repetition `r`
/// uses seed `base_seed + r`.
pub fn run_experiment(
    ds: &Dataset,
    spec: &MethodSpec,
    grid: &Grid,
    opts: &ExperimentOptions,
) -> Result<ExperimentResult> {
    if opts.repetitions == 0 {
        return Err(Error::InvalidParameter(
            "need at least one repetition".into(),
        ));
    }
    grid.validate()?;
    let mut reps = Vec::with_capacity(opts.repetitions);
    for r in 0..opts.repetitions {
        let seed = opts.base_seed.wrapping_add(r as u64);
        let rep = run_repetition(ds, spec, grid, opts, seed, r).map_err(|e| Error::Repetition {
            repetition: r,
            source: Box::new(e),
        })?;
        log::info!(
            "repetition {r}: test Gmean {:.4} with {}",
            rep.test_gmean,
            rep.hyperparams
        );
        reps.push(rep);
    }
    let mean_gmean = reps.iter().map(|r| r.test_gmean).sum::<f64>() / reps.len() as f64;
    Ok(ExperimentResult {
        dataset: ds.name.clone(),
        target_class: ds.source_class.clone(),
        method: *spec,
        k_max: grid.k_max,
        cv_scoring: "mean Gmean over held-out folds containing targets and outliers".into(),
        repetitions: reps,
        mean_gmean,
    })
}

fn run_repetition(
    ds: &Dataset,
    spec: &MethodSpec,
    grid: &Grid,
    opts: &ExperimentOptions,
    seed: u64,
    r: usize,
) -> Result<RepetitionResult> {
    let plan = make_split(ds, opts.train_fraction, seed, opts.folds)?;
    let cv = CvOptions {
        k_max: grid.k_max,
        seed,
        jobs: opts.jobs,
    };
    let sel = cv_select(ds, &plan, spec, grid, &cv)?;
    let train = ds.target_columns(&plan.train);
    let test_x = ds.columns(&plan.test);
    let test_labels = ds.labels_at(&plan.test);
    let eval = EvalSet {
        x: &test_x,
        labels: &test_labels,
    };
    let trained = fit_method(spec, &sel.best, grid.k_max, seed, &train, Some(eval))?;
    let predicted: Vec<bool> = trained
        .decide_batch(&test_x)?
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let confusion = Confusion::from_predictions(&predicted, &test_labels);
    Ok(RepetitionResult {
        repetition: r,
        seed,
        hyperparams: sel.best,
        cv_score: sel.score,
        test_gmean: gmean(&confusion)?,
        confusion,
        curve: trained.curve(grid.k_max),
        skipped: sel.skipped,
    })
}
