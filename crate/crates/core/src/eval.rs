//! Desk-scale downstream evaluation: classification and pair verification
//! accuracy on raw features versus postprocessed features.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotropy;
use crate::linalg::{self, Matrix};
use crate::postprocess::{self, PostprocessModel};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

macro_rules! string_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $s)] $variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $s),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($name::$variant),)+
                    other => Err(Error::InvalidArgument(format!(
                        concat!("unknown ", stringify!($name), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

string_enum!(Evaluator {
    NearestCentroid => "nearest_centroid",
    Knn => "knn",
    PairVerify => "pair_verify",
});

string_enum!(Metric {
    Euclidean => "euclidean",
    Cosine => "cosine",
});

string_enum!(
    /// Which rows the postprocessing model is fitted on.
    FitOn {
        Train => "train",
        All => "all",
    }
);

string_enum!(
    /// Optional row L2 normalization, applied before postprocessing (to the
    /// input of both arms) or after it (to the features each arm evaluates).
    L2Normalize {
        None => "none",
        Before => "before",
        After => "after",
    }
);

/// Features with aligned class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled<T> {
    pub features: Matrix<T>,
    pub labels: Vec<usize>,
}

impl<T: Scalar> Labeled<T> {
    pub fn new(features: Matrix<T>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                context: "labels vs feature rows",
                expected: features.rows(),
                actual: labels.len(),
            });
        }
        Ok(Self { features, labels })
    }

    fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Row indices of a stratified split, each side in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified, seeded split.
///
/// The test size is `round(test_fraction · N)`, shared across classes by
/// largest remainder (ties to the smaller class id), then clamped so every
/// class keeps at least one example on each side. Within a class, members are
/// shuffled with the seeded stream (classes visited in ascending id order)
/// and the first ones go to the test side.
pub fn split_indices(labels: &[usize], test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "split needs at least 2 examples, got {}",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    if let Some((&class, _)) = by_class.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::SingletonClass { class });
    }

    let n = labels.len() as f64;
    let target = (test_fraction * n).round() as usize;
    let quotas: Vec<f64> = by_class
        .values()
        .map(|m| test_fraction * m.len() as f64)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        counts[c] += 1;
    }

    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (members, &count) in by_class.values().zip(&counts) {
        let count = count.clamp(1, members.len() - 1);
        let mut shuffled = members.clone();
        rng.shuffle(&mut shuffled);
        test.extend_from_slice(&shuffled[..count]);
        train.extend_from_slice(&shuffled[count..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn split<T: Scalar>(
    data: &Labeled<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Labeled<T>, Labeled<T>)> {
    let idx = split_indices(&data.labels, test_fraction, seed)?;
    Ok((data.subset(&idx.train), data.subset(&idx.test)))
}

fn check_dims<T: Scalar>(train: &Matrix<T>, test: &Matrix<T>) -> Result<()> {
    if train.cols() != test.cols() {
        return Err(Error::DimensionMismatch {
            context: "train vs test feature dimension",
            expected: train.cols(),
            actual: test.cols(),
        });
    }
    if train.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Cosine similarity; −1 when either side is the zero vector.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> T {
    let na = linalg::norm(a);
    let nb = linalg::norm(b);
    if na == T::zero() || nb == T::zero() {
        return -T::one();
    }
    linalg::dot(a, b) / (na * nb)
}

/// Predicts the class with the closest training centroid (Euclidean). Ties go
/// to the smaller class id.
pub fn nearest_centroid<T: Scalar>(train: &Labeled<T>, test: &Matrix<T>) -> Result<Vec<usize>> {
    check_dims(&train.features, test)?;
    let d = train.features.cols();
    let mut sums: BTreeMap<usize, (Vec<T>, usize)> = BTreeMap::new();
    for (row, &c) in train.features.row_iter().zip(&train.labels) {
        let entry = sums.entry(c).or_insert_with(|| (vec![T::zero(); d], 0));
        for (s, &x) in entry.0.iter_mut().zip(row) {
            *s = *s + x;
        }
        entry.1 += 1;
    }
    let centroids: Vec<(usize, Vec<T>)> = sums
        .into_iter()
        .map(|(c, (s, n))| {
            let n = T::from_count(n);
            (c, s.into_iter().map(|x| x / n).collect())
        })
        .collect();

    Ok(test
        .row_iter()
        .map(|x| {
            let mut best = (T::infinity(), centroids[0].0);
            for (c, mu) in &centroids {
                let dist = squared_distance(x, mu);
                if dist < best.0 {
                    best = (dist, *c);
                }
            }
            best.1
        })
        .collect())
}

/// Majority vote among the `k` nearest training rows. Neighbor ties go to the
/// lower training index; vote ties go to the smaller class id.
pub fn knn<T: Scalar>(
    train: &Labeled<T>,
    test: &Matrix<T>,
    k: usize,
    metric: Metric,
) -> Result<Vec<usize>> {
    check_dims(&train.features, test)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > train.features.rows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds training size {}",
            train.features.rows()
        )));
    }
    Ok(test
        .row_iter()
        .map(|x| {
            // smaller score = closer
            let mut scored: Vec<(T, usize)> = train
                .features
                .row_iter()
                .enumerate()
                .map(|(i, r)| {
                    let s = match metric {
                        Metric::Euclidean => squared_distance(x, r),
                        Metric::Cosine => -cosine_similarity(x, r),
                    };
                    (s, i)
                })
                .collect();
            scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for &(_, i) in &scored[..k] {
                *votes.entry(train.labels[i]).or_default() += 1;
            }
            let mut best = (0usize, usize::MAX);
            for (c, n) in votes {
                if n > best.0 {
                    best = (n, c);
                }
            }
            best.1
        })
        .collect())
}

/// Outcome of a same/different threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    /// Pairs with similarity strictly above this are declared "same".
    pub threshold: f64,
    pub accuracy: f64,
}

/// Best-threshold accuracy for deciding "same" by cosine similarity.
///
/// Candidate thresholds are −∞, +∞ and the midpoints between consecutive
/// distinct similarities; the smallest threshold reaching the best accuracy
/// wins.
pub fn verify_pairs<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    same: &[bool],
) -> Result<Verification> {
    if a.rows() != b.rows() || a.rows() != same.len() {
        return Err(Error::DimensionMismatch {
            context: "pair rows vs same-labels",
            expected: same.len(),
            actual: a.rows().max(b.rows()),
        });
    }
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            context: "pair feature dimension",
            expected: a.cols(),
            actual: b.cols(),
        });
    }
    if same.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sims: Vec<f64> = a
        .row_iter()
        .zip(b.row_iter())
        .map(|(x, y)| cosine_similarity(x, y).as_f64())
        .collect();
    Ok(best_threshold(&sims, same))
}

fn best_threshold(sims: &[f64], same: &[bool]) -> Verification {
    let mut order: Vec<usize> = (0..sims.len()).collect();
    order.sort_by(|&i, &j| sims[i].partial_cmp(&sims[j]).expect("finite"));

    let total = sims.len() as f64;
    // threshold −∞: everything predicted "same"
    let mut correct = same.iter().filter(|&&s| s).count() as i64;
    let mut best = (correct, f64::NEG_INFINITY);
    let mut pos = 0;
    while pos < order.len() {
        let value = sims[order[pos]];
        let mut end = pos;
        while end < order.len() && sims[order[end]] == value {
            correct += if same[order[end]] { -1 } else { 1 };
            end += 1;
        }
        let threshold = if end < order.len() {
            value + (sims[order[end]] - value) / 2.0
        } else {
            f64::INFINITY
        };
        if correct > best.0 {
            best = (correct, threshold);
        }
        pos = end;
    }
    Verification {
        threshold: best.1,
        accuracy: best.0 as f64 / total,
    }
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Accuracy per class present in `truth`, ordered by class id.
pub fn per_class_accuracy(predicted: &[usize], truth: &[usize]) -> Vec<(usize, f64)> {
    let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        let e = tally.entry(t).or_default();
        e.1 += 1;
        if p == t {
            e.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(c, (hit, n))| (c, hit as f64 / n as f64))
        .collect()
}

/// Deterministic verification pairs within one labeled set: for each row, one
/// pair with the next row (cyclically) of the same class and one with the next
/// row of a different class, when such rows exist.
pub fn make_pairs(labels: &[usize]) -> Vec<(usize, usize, bool)> {
    let n = labels.len();
    let mut pairs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let next = |want_same: bool| {
            (1..n)
                .map(|step| (i + step) % n)
                .find(|&j| (labels[j] == labels[i]) == want_same)
        };
        if let Some(j) = next(true) {
            pairs.push((i, j, true));
        }
        if let Some(j) = next(false) {
            pairs.push((i, j, false));
        }
    }
    pairs
}

fn l2_normalize_rows<T: Scalar>(f: &Matrix<T>) -> Matrix<T> {
    f.map_rows(|src, dst| {
        let n = linalg::norm(src);
        for (d, &x) in dst.iter_mut().zip(src) {
            *d = if n > T::zero() { x / n } else { x };
        }
    })
}

/// Settings shared by [`compare`] and [`sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub evaluator: Evaluator,
    /// Neighbor count for k-NN.
    pub k: usize,
    pub metric: Metric,
    pub test_fraction: f64,
    pub seed: u64,
    pub fit_on: FitOn,
    /// PCA component cap; `None` means the feature dimension.
    pub pca_dim: Option<usize>,
    pub l2_normalize: L2Normalize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            evaluator: Evaluator::NearestCentroid,
            k: 5,
            metric: Metric::Euclidean,
            test_fraction: 0.3,
            seed: 0,
            fit_on: FitOn::Train,
            pca_dim: None,
            l2_normalize: L2Normalize::None,
        }
    }
}

/// Before/after accuracy of one evaluator on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub evaluator: Evaluator,
    pub k: usize,
    pub metric: Metric,
    pub fit_on: FitOn,
    pub l2_normalize: L2Normalize,
    pub seed: u64,
    pub test_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub t_used: usize,
    pub pca_dim: usize,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    /// Best thresholds (pair verification only).
    #[serde(default, with = "crate::serde_float::option")]
    pub threshold_before: Option<f64>,
    #[serde(default, with = "crate::serde_float::option")]
    pub threshold_after: Option<f64>,
    /// Per-class accuracy (classifiers only), indexed like the sorted class ids.
    pub per_class_before: Option<Vec<f64>>,
    pub per_class_after: Option<Vec<f64>>,
}

struct ArmResult {
    accuracy: f64,
    threshold: Option<f64>,
    per_class: Option<Vec<f64>>,
}

fn run_arm<T: Scalar>(train: &Labeled<T>, test: &Labeled<T>, p: &EvalParams) -> Result<ArmResult> {
    let classify = |pred: Vec<usize>| ArmResult {
        accuracy: accuracy(&pred, &test.labels),
        threshold: None,
        per_class: Some(
            per_class_accuracy(&pred, &test.labels)
                .into_iter()
                .map(|(_, a)| a)
                .collect(),
        ),
    };
    match p.evaluator {
        Evaluator::NearestCentroid => Ok(classify(nearest_centroid(train, &test.features)?)),
        Evaluator::Knn => Ok(classify(knn(train, &test.features, p.k, p.metric)?)),
        Evaluator::PairVerify => {
            let pairs = make_pairs(&test.labels);
            let left: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let right: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let same: Vec<bool> = pairs.iter().map(|p| p.2).collect();
            let v = verify_pairs(
                &test.features.select_rows(&left),
                &test.features.select_rows(&right),
                &same,
            )?;
            Ok(ArmResult {
                accuracy: v.accuracy,
                threshold: Some(v.threshold),
                per_class: None,
            })
        }
    }
}

/// Splits once, evaluates raw features and postprocessed features on the same
/// split, and returns the fitted model alongside the report.
pub fn compare_with_model<T: Scalar>(
    data: &Labeled<T>,
    t: usize,
    params: &EvalParams,
) -> Result<(EvalReport, PostprocessModel<T>)> {
    compare_fitted(data, t, params, |f, pca_dim| {
        postprocess::fit(f, t, pca_dim)
    })
}

fn compare_fitted<T: Scalar>(
    data: &Labeled<T>,
    t: usize,
    params: &EvalParams,
    fit: impl FnOnce(&Matrix<T>, usize) -> Result<PostprocessModel<T>>,
) -> Result<(EvalReport, PostprocessModel<T>)> {
    let input = match params.l2_normalize {
        L2Normalize::Before => Labeled {
            features: l2_normalize_rows(&data.features),
            labels: data.labels.clone(),
        },
        _ => data.clone(),
    };
    let idx = split_indices(&input.labels, params.test_fraction, params.seed)?;
    let mut train = input.subset(&idx.train);
    let mut test = input.subset(&idx.test);

    let pca_dim = params.pca_dim.unwrap_or(input.features.cols());
    let model = match params.fit_on {
        FitOn::Train => fit(&train.features, pca_dim)?,
        FitOn::All => fit(&input.features, pca_dim)?,
    };
    let mut train_after = Labeled {
        features: postprocess::transform(&train.features, &model)?,
        labels: train.labels.clone(),
    };
    let mut test_after = Labeled {
        features: postprocess::transform(&test.features, &model)?,
        labels: test.labels.clone(),
    };
    if params.l2_normalize == L2Normalize::After {
        for set in [&mut train, &mut test, &mut train_after, &mut test_after] {
            set.features = l2_normalize_rows(&set.features);
        }
    }

    let before = run_arm(&train, &test, params)?;
    let after = run_arm(&train_after, &test_after, params)?;
    let report = EvalReport {
        evaluator: params.evaluator,
        k: params.k,
        metric: params.metric,
        fit_on: params.fit_on,
        l2_normalize: params.l2_normalize,
        seed: params.seed,
        test_fraction: params.test_fraction,
        n_train: idx.train.len(),
        n_test: idx.test.len(),
        t_used: t,
        pca_dim,
        accuracy_before: before.accuracy,
        accuracy_after: after.accuracy,
        threshold_before: before.threshold,
        threshold_after: after.threshold,
        per_class_before: before.per_class,
        per_class_after: after.per_class,
    };
    Ok((report, model))
}

pub fn compare<T: Scalar>(data: &Labeled<T>, t: usize, params: &EvalParams) -> Result<EvalReport> {
    compare_with_model(data, t, params).map(|(r, _)| r)
}

/// One row of a T sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: usize,
    pub pca_dim: usize,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub m_empirical_before: f64,
    /// Empirical isotropy of all rows after postprocessing with this row's model.
    pub m_empirical_after: f64,
}

/// Runs [`compare`] for every `t` in `0..=t_max` on the same split. The model
/// is fitted once with `t_max` components and truncated for smaller `t`.
pub fn sweep<T: Scalar>(
    data: &Labeled<T>,
    t_max: usize,
    params: &EvalParams,
) -> Result<Vec<SweepRow>> {
    let pca_dim = params.pca_dim.unwrap_or(data.features.cols());
    if t_max > pca_dim {
        return Err(Error::InvalidArgument(format!(
            "t_max = {t_max} exceeds pca_dim = {pca_dim}"
        )));
    }
    let base = match params.l2_normalize {
        L2Normalize::Before => l2_normalize_rows(&data.features),
        _ => data.features.clone(),
    };
    let m_before = isotropy::isotropy_empirical(&base)?.as_f64();
    let mut full: Option<PostprocessModel<T>> = None;
    (0..=t_max)
        .rev()
        .map(|t| {
            let (report, model) = compare_fitted(data, t, params, |f, pca_dim| match &full {
                Some(m) => Ok(m.truncated(t)),
                None => postprocess::fit(f, t, pca_dim),
            })?;
            full.get_or_insert_with(|| model.clone());
            let after = postprocess::transform(&base, &model)?;
            Ok(SweepRow {
                t,
                pca_dim,
                accuracy_before: report.accuracy_before,
                accuracy_after: report.accuracy_after,
                m_empirical_before: m_before,
                m_empirical_after: isotropy::isotropy_empirical(&after)?.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|mut rows| {
            rows.reverse();
            rows
        })
}
