//! Dataset ingestion, one-class task construction, stratified splitting and
//! train-mean centering.
//!
//! Samples are stored column-wise: a dataset with `N` samples of dimension
//! `D` holds a `D x N` matrix.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Target,
    Outlier,
}

impl Label {
    pub fn is_target(self) -> bool {
        self == Label::Target
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// `D x N` feature matrix.
    pub x: DMatrix<f64>,
    pub labels: Vec<Label>,
    pub name: String,
    /// Original class label that was mapped to [`Label::Target`].
    pub source_class: String,
}

impl Dataset {
    pub fn new(
        x: DMatrix<f64>,
        labels: Vec<Label>,
        name: impl Into<String>,
        source_class: impl Into<String>,
    ) -> Result<Self> {
        if x.ncols() != labels.len() {
            return Err(Error::Shape(format!(
                "{} sample columns but {} labels",
                x.ncols(),
                labels.len()
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            let (row, column) = (pos / x.nrows().max(1), pos % x.nrows().max(1));
            return Err(Error::NonFinite {
                row: row + 1,
                column,
            });
        }
        Ok(Dataset {
            x,
            labels,
            name: name.into(),
            source_class: source_class.into(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.ncols()
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_targets(&self) -> usize {
        self.labels.iter().filter(|l| l.is_target()).count()
    }

    /// Feature columns at `indices`, in the given order.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        self.x.select_columns(indices)
    }

    /// Feature columns of the target samples among `indices`.
    pub fn target_columns(&self, indices: &[usize]) -> DMatrix<f64> {
        let targets: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| self.labels[i].is_target())
            .collect();
        self.x.select_columns(&targets)
    }

    pub fn labels_at(&self, indices: &[usize]) -> Vec<Label> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }

    /// Sub-dataset restricted to `indices`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.columns(indices),
            labels: self.labels_at(indices),
            name: self.name.clone(),
            source_class: self.source_class.clone(),
        }
    }
}

/// Which CSV column carries the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    Index(usize),
    Last,
}

impl LabelColumn {
    fn resolve(self, width: usize) -> Option<usize> {
        match self {
            LabelColumn::Index(i) if i < width => Some(i),
            LabelColumn::Index(_) => None,
            LabelColumn::Last => width.checked_sub(1),
        }
    }
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "last" | "-1" => Ok(LabelColumn::Last),
            _ => s
                .parse()
                .map(LabelColumn::Index)
                .map_err(|_| format!("expected a column index or \"last\", got {s:?}")),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

/// Raw contents of a CSV file: numeric features plus the optional label column.
#[derive(Debug, Clone)]
pub struct Table {
    pub features: DMatrix<f64>,
    pub classes: Option<Vec<String>>,
}

/// Reads a comma-separated table. A first row whose feature cells do not all
/// parse as numbers is treated as a header.
pub fn read_table(path: &Path, label_column: Option<LabelColumn>) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;
    let rows: Vec<Vec<&str>> = records
        .iter()
        .filter(|r| !(r.len() == 1 && r[0].is_empty()))
        .map(|r| r.iter().collect())
        .collect();

    let Some(first) = rows.first() else {
        return Ok(Table {
            features: DMatrix::zeros(0, 0),
            classes: label_column.map(|_| Vec::new()),
        });
    };
    let width = first.len();
    let label_idx = match label_column {
        Some(lc) => Some(lc.resolve(width).ok_or_else(|| Error::Csv {
            path: path.into(),
            message: format!("label column {lc} out of range for {width} columns"),
        })?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..width).filter(|&c| Some(c) != label_idx).collect();

    let has_header = feature_cols
        .iter()
        .any(|&c| first[c].parse::<f64>().is_err());
    let body = if has_header { &rows[1..] } else { &rows[..] };

    let n = body.len();
    let d = feature_cols.len();
    let mut features = DMatrix::zeros(d, n);
    let mut classes = label_idx.map(|_| Vec::with_capacity(n));
    for (j, row) in body.iter().enumerate() {
        let line = j + 1 + usize::from(has_header);
        if row.len() != width {
            return Err(Error::Csv {
                path: path.into(),
                message: format!("line {line} has {} fields, expected {width}", row.len()),
            });
        }
        for (i, &c) in feature_cols.iter().enumerate() {
            let cell = row[c];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: line,
                column: c,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: line,
                    column: c,
                });
            }
            features[(i, j)] = v;
        }
        if let (Some(classes), Some(li)) = (classes.as_mut(), label_idx) {
            classes.push(row[li].to_string());
        }
    }
    Ok(Table { features, classes })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Csv {
            path: path.into(),
            message: format!("{other:?}"),
        },
    }
}

/// Loads a multi-class CSV and converts it to a one-class task where
/// `target_class` is the target and every other class is an outlier.
pub fn load_csv(path: &Path, label_column: LabelColumn, target_class: &str) -> Result<Dataset> {
    let table = read_table(path, Some(label_column))?;
    let classes = table.classes.unwrap_or_default();

    let mut distinct: Vec<String> = classes.clone();
    distinct.sort();
    distinct.dedup();
    if !distinct.iter().any(|c| c == target_class) {
        return Err(Error::TargetClassNotFound {
            class: target_class.to_string(),
            available: distinct,
        });
    }
    if distinct.len() < 2 {
        return Err(Error::TooFewClasses {
            found: distinct.len(),
        });
    }

    let labels = classes
        .iter()
        .map(|c| {
            if c == target_class {
                Label::Target
            } else {
                Label::Outlier
            }
        })
        .collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(table.features, labels, name, target_class)
}

/// Stratified train/test split with cross-validation folds over the
/// training part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_fraction: f64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
}

impl SplitPlan {
    /// Training indices outside fold `k`.
    pub fn fold_train(&self, k: usize) -> Vec<usize> {
        let held: std::collections::HashSet<usize> = self.folds[k].iter().copied().collect();
        self.train
            .iter()
            .copied()
            .filter(|i| !held.contains(i))
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

// Guards floor() against products such as 0.7 * 70 = 48.99999999999999.
const ROUNDING_SLACK: f64 = 1e-9;

pub fn make_split(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
    k_folds: usize,
) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if k_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_class: Vec<(Label, Vec<usize>)> = [Label::Target, Label::Outlier]
        .into_iter()
        .map(|label| {
            let mut idx: Vec<usize> = (0..ds.n_samples())
                .filter(|&i| ds.labels[i] == label)
                .collect();
            idx.shuffle(&mut rng);
            (label, idx)
        })
        .collect();

    // Per-class floors, then the leftover needed to reach round(f * N) goes
    // to train, largest fractional remainder first.
    let total_train = (train_fraction * ds.n_samples() as f64 + ROUNDING_SLACK).round() as usize;
    let exact: Vec<f64> = per_class
        .iter()
        .map(|(_, idx)| train_fraction * idx.len() as f64)
        .collect();
    let mut counts: Vec<usize> = exact
        .iter()
        .map(|e| (e + ROUNDING_SLACK).floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..per_class.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut leftover = total_train.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(2 * order.len()) {
        if leftover == 0 {
            break;
        }
        if counts[c] < per_class[c].1.len() {
            counts[c] += 1;
            leftover -= 1;
        }
    }

    for ((label, _), &n) in per_class.iter().zip(&counts) {
        if n < k_folds {
            return Err(Error::ClassTooSmall {
                class: class_name(ds, *label),
                members: n,
                required: k_folds,
            });
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut folds = vec![Vec::new(); k_folds];
    let mut slot = 0usize;
    for ((_, idx), &n) in per_class.iter_mut().zip(&counts) {
        let (tr, te) = idx.split_at(n);
        for &i in tr {
            folds[slot % k_folds].push(i);
            slot += 1;
        }
        train.extend_from_slice(tr);
        test.extend_from_slice(te);
    }
    train.sort_unstable();
    test.sort_unstable();
    folds.iter_mut().for_each(|f| f.sort_unstable());

    Ok(SplitPlan {
        seed,
        train_fraction,
        train,
        test,
        folds,
    })
}

/// Stratified folds over every sample, for model selection without a
/// held-out test part. `test` is empty and `train_fraction` is 1.
pub fn make_folds(ds: &Dataset, seed: u64, k_folds: usize) -> Result<SplitPlan> {
    if k_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k_folds];
    let mut slot = 0usize;
    for label in [Label::Target, Label::Outlier] {
        let mut idx: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| ds.labels[i] == label)
            .collect();
        if idx.len() < k_folds {
            return Err(Error::ClassTooSmall {
                class: class_name(ds, label),
                members: idx.len(),
                required: k_folds,
            });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[slot % k_folds].push(i);
            slot += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(SplitPlan {
        seed,
        train_fraction: 1.0,
        train: (0..ds.n_samples()).collect(),
        test: Vec::new(),
        folds,
    })
}

fn class_name(ds: &Dataset, label: Label) -> String {
    match label {
        Label::Target => ds.source_class.clone(),
        Label::Outlier => format!("outliers (not {})", ds.source_class),
    }
}

/// Training-target statistics used to center (and optionally z-scale) data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringStats {
    #[serde(with = "crate::io::vector")]
    pub mu: DVector<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<f64>>,
}

impl CenteringStats {
    pub fn fit(train_targets: &DMatrix<f64>, scale: bool) -> Result<Self> {
        let n = train_targets.ncols();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "cannot center with zero training targets".into(),
            ));
        }
        let mu = train_targets.column_mean();
        let scale = if scale {
            let mut sd = Vec::with_capacity(mu.len());
            for (f, row) in train_targets.row_iter().enumerate() {
                let var = row.iter().map(|v| (v - mu[f]).powi(2)).sum::<f64>() / n as f64;
                let s = var.sqrt();
                if s <= f64::EPSILON * mu[f].abs().max(1.0) {
                    return Err(Error::ZeroVariance { feature: f });
                }
                sd.push(s);
            }
            Some(sd)
        } else {
            None
        };
        Ok(CenteringStats { mu, scale })
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for mut col in out.column_iter_mut() {
            col -= &self.mu;
            if let Some(sd) = &self.scale {
                col.iter_mut().zip(sd).for_each(|(v, s)| *v /= s);
            }
        }
        out
    }

    pub fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut v = x - &self.mu;
        if let Some(sd) = &self.scale {
            v.iter_mut().zip(sd).for_each(|(v, s)| *v /= s);
        }
        v
    }
}

/// Computes centering statistics from `train_targets` and applies them to
/// `apply_to`.
pub fn center(
    train_targets: &DMatrix<f64>,
    apply_to: &DMatrix<f64>,
    scale: bool,
) -> Result<(CenteringStats, DMatrix<f64>)> {
    let stats = CenteringStats::fit(train_targets, scale)?;
    let out = stats.apply(apply_to);
    Ok((stats, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn labelled(n_target: usize, n_outlier: usize) -> Dataset {
        let n = n_target + n_outlier;
        let x = DMatrix::from_fn(2, n, |i, j| (i * n + j) as f64);
        let labels = (0..n)
            .map(|j| {
                if j < n_target {
                    Label::Target
                } else {
                    Label::Outlier
                }
            })
            .collect();
        Dataset::new(x, labels, "toy", "a").unwrap()
    }

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_with_header_and_label() {
        let f = write_csv("a,b,class\n1.0,2.0,x\n3,4,y\n5,6,x\n");
        let ds = load_csv(f.path(), LabelColumn::Last, "x").unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.n_targets(), 2);
        assert_eq!(ds.x[(1, 1)], 4.0);
        assert_eq!(
            ds.labels,
            vec![Label::Target, Label::Outlier, Label::Target]
        );
    }

    #[test]
    fn csv_label_in_first_column_without_header() {
        let f = write_csv("x,1,2\ny,3,4\n");
        let ds = load_csv(f.path(), LabelColumn::Index(0), "y").unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.x[(0, 1)], 3.0);
        assert_eq!(ds.labels[1], Label::Target);
    }

    #[test]
    fn unknown_target_class() {
        let f = write_csv("1,2,x\n3,4,y\n");
        let err = load_csv(f.path(), LabelColumn::Last, "zzz").unwrap_err();
        assert!(matches!(err, Error::TargetClassNotFound { ref class, .. } if class == "zzz"));
    }

    #[test]
    fn single_class_rejected() {
        let f = write_csv("1,2,x\n3,4,x\n");
        let err = load_csv(f.path(), LabelColumn::Last, "x").unwrap_err();
        assert!(matches!(err, Error::TooFewClasses { found: 1 }));
    }

    #[test]
    fn bad_cell_and_missing_values() {
        let f = write_csv("1,2,x\n3,abc,y\n");
        assert!(matches!(
            load_csv(f.path(), LabelColumn::Last, "x").unwrap_err(),
            Error::Parse {
                row: 2,
                column: 1,
                ..
            }
        ));
        let f = write_csv("1,2,x\n3,,y\n");
        assert!(matches!(
            load_csv(f.path(), LabelColumn::Last, "x").unwrap_err(),
            Error::Parse { .. }
        ));
        let f = write_csv("1,2,x\n3,NaN,y\n");
        assert!(matches!(
            load_csv(f.path(), LabelColumn::Last, "x").unwrap_err(),
            Error::NonFinite { .. }
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_csv(Path::new("/nonexistent/file.csv"), LabelColumn::Last, "x").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn empty_table() {
        let f = write_csv("");
        let t = read_table(f.path(), None).unwrap();
        assert_eq!(t.features.ncols(), 0);
    }

    #[test]
    fn seeds_sized_split_counts() {
        let ds = labelled(70, 140);
        let plan = make_split(&ds, 0.7, 1, 5).unwrap();
        assert_eq!(plan.train.len(), 147);
        assert_eq!(plan.test.len(), 63);
        let train_targets = plan
            .train
            .iter()
            .filter(|&&i| ds.labels[i].is_target())
            .count();
        assert_eq!(train_targets, 49);
    }

    #[test]
    fn half_split_of_ten() {
        let ds = labelled(5, 5);
        let plan = make_split(&ds, 0.5, 3, 2).unwrap();
        assert_eq!(plan.train.len(), 5);
        let t = plan
            .train
            .iter()
            .filter(|&&i| ds.labels[i].is_target())
            .count();
        assert!(t == 2 || t == 3);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = labelled(30, 40);
        assert_eq!(
            make_split(&ds, 0.7, 9, 5).unwrap(),
            make_split(&ds, 0.7, 9, 5).unwrap()
        );
        assert_ne!(
            make_split(&ds, 0.7, 9, 5).unwrap().train,
            make_split(&ds, 0.7, 10, 5).unwrap().train
        );
    }

    #[test]
    fn small_class_named_in_error() {
        let ds = labelled(4, 40);
        match make_split(&ds, 0.7, 0, 5).unwrap_err() {
            Error::ClassTooSmall { class, members, .. } => {
                assert_eq!(class, "a");
                // floor(2.8) = 2, plus the leftover from round(30.8) = 31.
                assert_eq!(members, 3);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn folds_cover_every_sample() {
        let ds = labelled(12, 23);
        let plan = make_folds(&ds, 3, 5).unwrap();
        let mut all: Vec<usize> = plan.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..35).collect::<Vec<_>>());
        assert!(plan.test.is_empty());
        for f in &plan.folds {
            let t = f.iter().filter(|&&i| ds.labels[i].is_target()).count();
            assert!((2..=3).contains(&t));
        }
        assert!(make_folds(&labelled(3, 10), 0, 5).is_err());
    }

    #[test]
    fn split_plan_json_roundtrip() {
        let ds = labelled(20, 20);
        let plan = make_split(&ds, 0.7, 4, 5).unwrap();
        let json = plan.to_json().unwrap();
        for key in ["seed", "train", "test", "folds"] {
            assert!(json.contains(&format!("\"{key}\"")));
        }
        assert_eq!(SplitPlan::from_json(&json).unwrap(), plan);
    }

    #[test]
    fn centering_examples() {
        let train = DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 3.0, 3.0]);
        let probe = DMatrix::from_column_slice(2, 1, &[2.0, 2.0]);
        let (stats, out) = center(&train, &probe, false).unwrap();
        assert_eq!(stats.mu.as_slice(), &[2.0, 2.0]);
        assert_eq!(out.as_slice(), &[0.0, 0.0]);

        let single = DMatrix::from_column_slice(3, 1, &[1.5, -2.0, 7.0]);
        let (stats, out) = center(&single, &single, false).unwrap();
        assert_eq!(stats.mu.as_slice(), single.as_slice());
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_variance_with_scaling() {
        let train = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0]);
        assert!(matches!(
            CenteringStats::fit(&train, true).unwrap_err(),
            Error::ZeroVariance { feature: 1 }
        ));
        assert!(CenteringStats::fit(&train, false).is_ok());
    }

    #[test]
    fn scaling_standardizes() {
        let train = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 6.0]);
        let (_, out) = center(&train, &train, true).unwrap();
        let var = out.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!((var - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn split_partitions_and_stratifies(
            n_t in 10usize..60, n_o in 10usize..80, seed in any::<u64>(), frac in 0.3f64..0.9
        ) {
            let ds = labelled(n_t, n_o);
            let plan = make_split(&ds, frac, seed, 2).unwrap();
            let mut all: Vec<usize> = plan.train.iter().chain(&plan.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n_t + n_o).collect::<Vec<_>>());

            let n = (n_t + n_o) as f64;
            let tr_t = plan.train.iter().filter(|&&i| ds.labels[i].is_target()).count() as f64;
            let ntr = plan.train.len() as f64;
            prop_assert!((tr_t / ntr - n_t as f64 / n).abs() <= 1.0 / ntr + 1e-12);

            let mut folded: Vec<usize> = plan.folds.concat();
            folded.sort_unstable();
            prop_assert_eq!(folded, plan.train.clone());
        }

        #[test]
        fn centered_training_block_has_zero_mean(seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(5, 20, |_, _| rng.random_range(-100.0..100.0));
            let (stats, out) = center(&x, &x, false).unwrap();
            for m in out.column_mean().iter() {
                prop_assert!(m.abs() <= 1e-12);
            }
            prop_assert!((stats.apply(&x) - out).amax() == 0.0);
        }
    }
}
