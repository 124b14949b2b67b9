//! Isotropy of a feature set, measured through the partition function
//! `H(ω) = Σ_i exp(ωᵀ f(i))`.
//!
//! A perfectly isotropic set has constant `H` over unit directions, so the
//! ratio `min H / max H` is 1. The exact extremes have no closed form; this
//! module provides
//!
//! * an empirical estimate over the eigenvectors of `AᵀA` and their
//!   negations ([`isotropy_empirical`]),
//! * the first-order closed form `(N − ‖1ᵀA‖) / (N + ‖1ᵀA‖)`
//!   ([`isotropy_first_order`]),
//! * the second-order closed form
//!   `(N − ‖1ᵀA‖ + σ²_min/2) / (N + ‖1ᵀA‖ + σ²_max/2)`
//!   ([`isotropy_second_order`]),
//!
//! where `A` stacks the features as rows and `σ` are its singular values.
//! Every `H` evaluation runs in the log domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// `log H(ω)`, computed with log-sum-exp.
pub fn log_partition<T: Scalar>(f: &Matrix<T>, w: &[T]) -> Result<T> {
    if f.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if w.len() != f.cols() {
        return Err(Error::DimensionMismatch {
            context: "probe direction",
            expected: f.cols(),
            actual: w.len(),
        });
    }
    let n = linalg::norm(w).as_f64();
    if (n - 1.0).abs() > T::UNIT_TOL {
        return Err(Error::NotUnitVector { norm: n });
    }
    Ok(log_partition_unchecked(f, w))
}

fn log_partition_unchecked<T: Scalar>(f: &Matrix<T>, w: &[T]) -> T {
    let dots: Vec<T> = f.row_iter().map(|r| linalg::dot(w, r)).collect();
    let peak = dots.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    let sum: T = dots.iter().map(|&x| (x - peak).exp()).sum();
    peak + sum.ln()
}

/// `H(ω)` itself. Fails with [`Error::Overflow`] when the value does not fit in
/// the scalar type; [`log_partition`] still works in that case.
pub fn partition<T: Scalar>(f: &Matrix<T>, w: &[T]) -> Result<T> {
    let h = log_partition(f, w)?.exp();
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Overflow)
    }
}

/// Eigen-decomposition of `AᵀA` used as the probe set.
struct Probes<T> {
    /// Unit eigenvectors (descending eigenvalue).
    vectors: Vec<Vec<T>>,
    /// Eigenvalues of the unnormalized `AᵀA`, descending.
    values: Vec<T>,
    /// Directions of `A`'s null space that were not materialized (N < D).
    implicit_null: usize,
}

fn probes<T: Scalar>(f: &Matrix<T>) -> Result<Probes<T>> {
    let (n, d) = (f.rows(), f.cols());
    if n == 0 || d == 0 {
        return Err(Error::EmptyInput);
    }
    let pairs = linalg::scatter_spectrum(f)?;
    let implicit_null = d - pairs.len();
    let scale = T::from_count(n);
    let (values, vectors) = pairs
        .into_iter()
        .map(|p| (p.value * scale, p.vector))
        .unzip();
    Ok(Probes {
        vectors,
        values,
        implicit_null,
    })
}

/// Log-domain extremes of `H` over `±` each probe, plus `log N` for every
/// null direction that was not materialized (`ωᵀ f(i) = 0` there).
fn log_h_extremes<T: Scalar>(f: &Matrix<T>, p: &Probes<T>) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut visit = |v: T| {
        lo = lo.min(v);
        hi = hi.max(v);
    };
    for v in &p.vectors {
        visit(log_partition_unchecked(f, v));
        let neg: Vec<T> = v.iter().map(|&x| -x).collect();
        visit(log_partition_unchecked(f, &neg));
    }
    if p.implicit_null > 0 {
        visit(T::from_count(f.rows()).ln());
    }
    (lo, hi)
}

/// `min H / max H` over an explicit list of unit probe directions.
pub fn probe_ratio<T: Scalar>(f: &Matrix<T>, probes: &[Vec<T>]) -> Result<T> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("empty probe set".into()));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for w in probes {
        let v = log_partition(f, w)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(ratio_from_logs(lo, hi))
}

fn ratio_from_logs<T: Scalar>(lo: T, hi: T) -> T {
    (lo - hi).exp().min(T::one()).max(T::zero())
}

/// Empirical isotropy: `min H / max H` over the eigenvectors of `AᵀA` and their
/// negations. Always in `[0, 1]`.
pub fn isotropy_empirical<T: Scalar>(f: &Matrix<T>) -> Result<T> {
    let p = probes(f)?;
    let (lo, hi) = log_h_extremes(f, &p);
    Ok(ratio_from_logs(lo, hi))
}

/// `‖1ᵀA‖₂`, the norm of the column sums. Column means below the demeaning
/// round-off `8·N·ε·√D·max(1, max|a|)` count as zero, so demeaned input gives
/// exactly 0.
pub fn ones_projection_norm<T: Scalar>(f: &Matrix<T>) -> Result<T> {
    let mean = linalg::column_mean(f)?;
    let n = T::from_count(f.rows());
    let floor =
        T::of(8.0) * T::epsilon() * n * T::from_count(f.cols()).sqrt() * f.max_abs().max(T::one());
    let norm = linalg::norm(&mean);
    Ok(if norm <= floor { T::zero() } else { norm * n })
}

/// First-order closed form `(N − ‖1ᵀA‖) / (N + ‖1ᵀA‖)`. Negative when the
/// common mean is large.
pub fn isotropy_first_order<T: Scalar>(f: &Matrix<T>) -> Result<T> {
    let n = T::from_count(f.rows());
    let s = ones_projection_norm(f)?;
    Ok((n - s) / (n + s))
}

fn second_order_from<T: Scalar>(n: T, ones: T, sigma_min: T, sigma_max: T) -> T {
    let half = T::of(0.5);
    (n - ones + half * sigma_min * sigma_min) / (n + ones + half * sigma_max * sigma_max)
}

/// `(σ_min, σ_max)` from the eigenvalues of `AᵀA`. `σ_min` is 0 whenever A has
/// fewer rows than columns.
fn singular_extremes<T: Scalar>(p: &Probes<T>) -> (T, T) {
    let sigma_max = p
        .values
        .first()
        .map_or(T::zero(), |&v| v.max(T::zero()).sqrt());
    let sigma_min = if p.implicit_null > 0 {
        T::zero()
    } else {
        p.values
            .last()
            .map_or(T::zero(), |&v| v.max(T::zero()).sqrt())
    };
    (sigma_min, sigma_max)
}

/// Second-order closed form
/// `(N − ‖1ᵀA‖ + σ²_min/2) / (N + ‖1ᵀA‖ + σ²_max/2)`.
pub fn isotropy_second_order<T: Scalar>(f: &Matrix<T>) -> Result<T> {
    let p = probes(f)?;
    let (sigma_min, sigma_max) = singular_extremes(&p);
    let ones = ones_projection_norm(f)?;
    Ok(second_order_from(
        T::from_count(f.rows()),
        ones,
        sigma_min,
        sigma_max,
    ))
}

/// All isotropy quantities of one feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub n: usize,
    pub dim: usize,
    #[serde(with = "crate::serde_float")]
    pub h_min: f64,
    #[serde(with = "crate::serde_float")]
    pub h_max: f64,
    pub log_h_min: f64,
    pub log_h_max: f64,
    pub m_empirical: f64,
    pub m_first_order: f64,
    pub m_second_order: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub ones_proj_norm: f64,
}

/// Computes every measure with a single eigen-decomposition of `AᵀA`.
///
/// `h_min`/`h_max` are `exp` of the log values and may be `inf` for large
/// feature norms; the log fields and the ratios stay finite.
pub fn isotropy_report<T: Scalar>(f: &Matrix<T>) -> Result<IsotropyReport> {
    let p = probes(f)?;
    let (lo, hi) = log_h_extremes(f, &p);
    let (sigma_min, sigma_max) = singular_extremes(&p);
    let n = T::from_count(f.rows());
    let ones = ones_projection_norm(f)?;
    Ok(IsotropyReport {
        n: f.rows(),
        dim: f.cols(),
        h_min: lo.as_f64().exp(),
        h_max: hi.as_f64().exp(),
        log_h_min: lo.as_f64(),
        log_h_max: hi.as_f64(),
        m_empirical: ratio_from_logs(lo, hi).as_f64(),
        m_first_order: ((n - ones) / (n + ones)).as_f64(),
        m_second_order: second_order_from(n, ones, sigma_min, sigma_max).as_f64(),
        sigma_min: sigma_min.as_f64(),
        sigma_max: sigma_max.as_f64(),
        ones_proj_norm: ones.as_f64(),
    })
}
