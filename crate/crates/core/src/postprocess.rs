//! Mean removal followed by projection away from the top-T dominating
//! directions.
//!
//! [`fit`] learns the common mean `u` and the leading principal directions
//! `u_1..u_T` of the demeaned features; [`transform`] maps each feature
//! `f` to `f̃ − Σ_j (u_jᵀ f̃) u_j` with `f̃ = f − u`. The output keeps the
//! input dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Components with eigenvalue at or below this fraction of the largest one
/// count as absent when checking rank.
const RANK_EPS: f64 = 1e-12;

/// Learned state of the postprocessing: mean plus ordered dominating
/// directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PostprocessModel<T> {
    mean: Vec<T>,
    eigenvalues: Vec<T>,
    directions: Vec<Vec<T>>,
    source_count: usize,
}

impl<T: Scalar> PostprocessModel<T> {
    /// Assembles a model, checking shapes, finiteness, ordering and
    /// orthonormality of the directions within `tol`.
    pub fn new(
        mean: Vec<T>,
        eigenvalues: Vec<T>,
        directions: Vec<Vec<T>>,
        source_count: usize,
        tol: f64,
    ) -> Result<Self> {
        let model = Self {
            mean,
            eigenvalues,
            directions,
            source_count,
        };
        model.validate(tol)?;
        Ok(model)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let dim = self.mean.len();
        if self.eigenvalues.len() != self.directions.len() {
            return Err(Error::InvalidModel(format!(
                "{} eigenvalues for {} directions",
                self.eigenvalues.len(),
                self.directions.len()
            )));
        }
        if self.directions.len() > dim {
            return Err(Error::InvalidModel(format!(
                "t = {} exceeds dimension {dim}",
                self.directions.len()
            )));
        }
        if self.mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("mean has non-finite entries".into()));
        }
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            if !lambda.is_finite() || lambda < T::zero() {
                return Err(Error::InvalidModel(format!("eigenvalue {j} is {lambda}")));
            }
            if j > 0 && lambda > self.eigenvalues[j - 1] {
                return Err(Error::InvalidModel(format!(
                    "eigenvalues not descending at index {j}"
                )));
            }
        }
        for (a, u) in self.directions.iter().enumerate() {
            if u.len() != dim {
                return Err(Error::InvalidModel(format!(
                    "direction {a} has length {}, expected {dim}",
                    u.len()
                )));
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("direction {a} is not finite")));
            }
            for (b, v) in self.directions.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                let err = (linalg::dot(u, v).as_f64() - target).abs();
                if err > tol {
                    return Err(Error::InvalidModel(format!(
                        "directions {a} and {b} not orthonormal (error {err:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of removed directions.
    pub fn t(&self) -> usize {
        self.directions.len()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn directions(&self) -> &[Vec<T>] {
        &self.directions
    }

    /// Number of rows the model was fitted on.
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    /// Copy of the model keeping only the first `t` directions.
    pub fn truncated(&self, t: usize) -> Self {
        let t = t.min(self.t());
        Self {
            mean: self.mean.clone(),
            eigenvalues: self.eigenvalues[..t].to_vec(),
            directions: self.directions[..t].to_vec(),
            source_count: self.source_count,
        }
    }

    /// Same directions, different mean.
    pub fn with_mean(&self, mean: Vec<T>) -> Result<Self> {
        if mean.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "model mean",
                expected: self.dim(),
                actual: mean.len(),
            });
        }
        Ok(Self {
            mean,
            ..self.clone()
        })
    }

    /// Writes the postprocessed version of `row` into `out`.
    pub fn transform_row(&self, row: &[T], out: &mut [T]) {
        for ((o, &x), &m) in out.iter_mut().zip(row).zip(&self.mean) {
            *o = x - m;
        }
        // sequential removal; equal to the summed form for orthonormal directions
        for u in &self.directions {
            let alpha = linalg::dot(u, out);
            linalg::axpy(-alpha, u, out);
        }
    }
}

/// Learns the mean and the top `t` dominating directions of `f`.
///
/// `pca_dim` is the number of components PCA is allowed to keep; it bounds `t`
/// but does not otherwise change the result, since only the leading `t`
/// components are retained.
pub fn fit<T: Scalar>(f: &Matrix<T>, t: usize, pca_dim: usize) -> Result<PostprocessModel<T>> {
    let (tol, max_iter) = linalg::default_solver::<T>();
    fit_with_solver(f, t, pca_dim, tol, max_iter)
}

pub fn fit_with_solver<T: Scalar>(
    f: &Matrix<T>,
    t: usize,
    pca_dim: usize,
    tol: T,
    max_iter: usize,
) -> Result<PostprocessModel<T>> {
    if f.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if f.rows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least 2 rows, got {}",
            f.rows()
        )));
    }
    if pca_dim > f.cols() {
        return Err(Error::InvalidArgument(format!(
            "pca_dim {pca_dim} exceeds feature dimension {}",
            f.cols()
        )));
    }
    if t > pca_dim {
        return Err(Error::InvalidArgument(format!(
            "t = {t} exceeds pca_dim = {pca_dim}"
        )));
    }

    let mean = linalg::column_mean(f)?;
    if t == 0 {
        return Ok(PostprocessModel {
            mean,
            eigenvalues: Vec::new(),
            directions: Vec::new(),
            source_count: f.rows(),
        });
    }

    let centered = linalg::subtract_row(f, &mean)?;
    let pairs = linalg::principal_components(&centered, t, tol, max_iter)?;
    let top = pairs[0].value;
    let achievable = if top > T::zero() {
        pairs
            .iter()
            .filter(|p| p.value > T::of(RANK_EPS) * top)
            .count()
    } else {
        0
    };
    if achievable < t {
        return Err(Error::RankDeficient {
            requested: t,
            achievable,
        });
    }

    let (eigenvalues, directions) = pairs.into_iter().map(|p| (p.value, p.vector)).unzip();
    Ok(PostprocessModel {
        mean,
        eigenvalues,
        directions,
        source_count: f.rows(),
    })
}

/// Applies a fitted model to (possibly out-of-sample) features.
pub fn transform<T: Scalar>(f: &Matrix<T>, model: &PostprocessModel<T>) -> Result<Matrix<T>> {
    if f.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            context: "transform feature dimension",
            expected: model.dim(),
            actual: f.cols(),
        });
    }
    Ok(f.map_rows(|src, dst| model.transform_row(src, dst)))
}

pub fn fit_transform<T: Scalar>(
    f: &Matrix<T>,
    t: usize,
    pca_dim: usize,
) -> Result<(PostprocessModel<T>, Matrix<T>)> {
    let model = fit(f, t, pca_dim)?;
    let out = transform(f, &model)?;
    Ok((model, out))
}

/// Descriptive statistics of a feature set: the size of its common mean and
/// how concentrated the demeaned spectrum is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub n: usize,
    pub dim: usize,
    /// `‖u‖₂`
    pub mean_norm: f64,
    /// Average `‖f(i)‖₂` over rows.
    pub mean_row_norm: f64,
    /// `mean_norm / mean_row_norm`, 0 when every row is zero.
    pub norm_ratio: f64,
    /// Trace of the demeaned scatter matrix (sum of all eigenvalues).
    pub total_energy: f64,
    /// Top-k eigenvalues of the demeaned scatter, descending.
    pub eigenvalues: Vec<f64>,
    /// Cumulative fractions `Σ_{i≤j} λ_i / Σ λ`.
    pub energy_fractions: Vec<f64>,
}

impl SpectrumSummary {
    /// One line in the style of a feature-description table.
    pub fn table_row(&self, name: &str) -> String {
        let top = self
            .energy_fractions
            .first()
            .map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        format!(
            "{name}\tdim={}\tn={}\t|u|={:.2}\tavg|f|={:.2}\tratio={:.4}\ttop1_energy={top}",
            self.dim, self.n, self.mean_norm, self.mean_row_norm, self.norm_ratio
        )
    }
}

pub fn spectrum_summary<T: Scalar>(f: &Matrix<T>, k: usize) -> Result<SpectrumSummary> {
    if f.rows() == 0 || f.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    if k > f.cols() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds feature dimension {}",
            f.cols()
        )));
    }
    let mean = linalg::column_mean(f)?;
    let mean_norm = linalg::norm(&mean).as_f64();
    let mean_row_norm =
        f.row_iter().map(|r| linalg::norm(r).as_f64()).sum::<f64>() / f.rows() as f64;
    let norm_ratio = if mean_row_norm > 0.0 {
        mean_norm / mean_row_norm
    } else {
        0.0
    };

    let centered = linalg::subtract_row(f, &mean)?;
    let total_energy = centered
        .data()
        .iter()
        .map(|x| x.as_f64() * x.as_f64())
        .sum::<f64>()
        / f.rows() as f64;

    let eigenvalues: Vec<f64> = if k == 0 {
        Vec::new()
    } else {
        let (tol, max_iter) = linalg::default_solver::<T>();
        linalg::principal_components(&centered, k, tol, max_iter)?
            .into_iter()
            .map(|p| p.value.as_f64())
            .collect()
    };
    let mut acc = 0.0;
    let energy_fractions = eigenvalues
        .iter()
        .map(|&l| {
            acc += l;
            if total_energy > 0.0 {
                acc / total_energy
            } else {
                0.0
            }
        })
        .collect();

    Ok(SpectrumSummary {
        n: f.rows(),
        dim: f.cols(),
        mean_norm,
        mean_row_norm,
        norm_ratio,
        total_energy,
        eigenvalues,
        energy_fractions,
    })
}
