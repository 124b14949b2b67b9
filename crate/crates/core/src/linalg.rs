//! Dense row-major matrices and a deterministic symmetric eigensolver.
//!
//! Only what the postprocessing pipeline needs lives here: column means,
//! demeaning, scatter/Gram matrices and the top-k eigenpairs of a symmetric
//! positive semidefinite matrix (power iteration with Hotelling deflation).
//! Every reduction runs in a fixed order so identical inputs give bitwise
//! identical outputs.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// Seed of the deterministic perturbation added to the all-ones start vector.
const START_SEED: u64 = 0x0005_EED0_F00D;
/// Entries at or below this magnitude are skipped when fixing eigenvector sign.
const SIGN_EPS: f64 = 1e-12;
const POLISH_FACTOR: f64 = 1e-3;
const JACOBI_SWEEPS: usize = 64;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Wraps row-major `data`, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data length",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "row length",
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Internal constructor for results of arithmetic on finite inputs.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        // chunks_exact panics on a zero chunk size
        let width = self.cols.max(1);
        self.data.chunks_exact(width).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    /// Keeps the listed rows, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_parts(indices.len(), self.cols, data)
    }

    /// Applies `f` to every row, producing a matrix of the same shape.
    pub fn map_rows(&self, mut f: impl FnMut(&[T], &mut [T])) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        if self.cols > 0 {
            for (src, dst) in self
                .data
                .chunks_exact(self.cols)
                .zip(out.data.chunks_exact_mut(self.cols))
            {
                f(src, dst);
            }
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::of(x.as_f64())).collect(),
        }
    }

    /// Largest `|a_ij - a_ji|`; zero for non-square matrices is meaningless, so
    /// callers check squareness first.
    pub fn max_asymmetry(&self) -> T {
        let n = self.rows.min(self.cols);
        let mut worst = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

fn normalize_in_place<T: Scalar>(v: &mut [T]) -> T {
    let n = norm(v);
    if n > T::zero() {
        for x in v.iter_mut() {
            *x = *x / n;
        }
    }
    n
}

/// Removes the components of `v` along each (unit) basis vector, in order.
fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[EigenPair<T>]) {
    for p in basis {
        let c = dot(&p.vector, v);
        axpy(-c, &p.vector, v);
    }
}

/// Flips `v` so that its first entry of magnitude above 1e-12 is positive.
pub fn canonicalize_sign<T: Scalar>(v: &mut [T]) {
    let eps = T::of(SIGN_EPS);
    if let Some(&first) = v.iter().find(|x| x.abs() > eps) {
        if first < T::zero() {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Arithmetic mean of the rows.
pub fn column_mean<T: Scalar>(f: &Matrix<T>) -> Result<Vec<T>> {
    if f.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let mut sum = vec![T::zero(); f.cols()];
    for r in f.row_iter() {
        for (s, &x) in sum.iter_mut().zip(r) {
            *s = *s + x;
        }
    }
    let n = T::from_count(f.rows());
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// `f[i][j] - v[j]` for every row.
pub fn subtract_row<T: Scalar>(f: &Matrix<T>, v: &[T]) -> Result<Matrix<T>> {
    if v.len() != f.cols() {
        return Err(Error::DimensionMismatch {
            context: "subtract_row vector length",
            expected: f.cols(),
            actual: v.len(),
        });
    }
    Ok(f.map_rows(|src, dst| {
        for ((d, &x), &m) in dst.iter_mut().zip(src).zip(v) {
            *d = x - m;
        }
    }))
}

/// `(1/N) Fcᵀ Fc`, the D×D scatter matrix. Built from the upper triangle and
/// mirrored, so the result is exactly symmetric.
pub fn scatter<T: Scalar>(fc: &Matrix<T>) -> Matrix<T> {
    let d = fc.cols();
    let mut s = Matrix::zeros(d, d);
    for r in fc.row_iter() {
        for i in 0..d {
            let ri = r[i];
            if ri == T::zero() {
                continue;
            }
            let dst = &mut s.data[i * d..(i + 1) * d];
            for j in i..d {
                dst[j] = dst[j] + ri * r[j];
            }
        }
    }
    finish_symmetric(&mut s, fc.rows());
    s
}

/// `(1/N) Fc Fcᵀ`, the N×N Gram matrix.
pub fn gram<T: Scalar>(fc: &Matrix<T>) -> Matrix<T> {
    let n = fc.rows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            g.data[i * n + j] = dot(fc.row(i), fc.row(j));
        }
    }
    finish_symmetric(&mut g, n);
    g
}

/// Scales the upper triangle by `1/count` and mirrors it into the lower one.
fn finish_symmetric<T: Scalar>(m: &mut Matrix<T>, count: usize) {
    let n = m.rows;
    let scale = if count == 0 {
        T::zero()
    } else {
        T::one() / T::from_count(count)
    };
    for i in 0..n {
        for j in i..n {
            let v = m.data[i * n + j] * scale;
            m.data[i * n + j] = v;
            m.data[j * n + i] = v;
        }
    }
}

/// An eigenvalue with its unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
}

/// Deterministic start vector: all-ones plus a fixed pseudo-random perturbation,
/// normalized.
fn start_vector<T: Scalar>(dim: usize) -> Vec<T> {
    let mut rng = SplitMix64::new(START_SEED);
    let mut v: Vec<T> = (0..dim)
        .map(|_| T::of(1.0 + 0.5 * (2.0 * rng.next_f64() - 1.0)))
        .collect();
    normalize_in_place(&mut v);
    v
}

/// Picks the standard basis vector with the largest component outside the span
/// of `basis` and returns it orthonormalized against that span.
fn complete_basis<T: Scalar>(dim: usize, basis: &[EigenPair<T>]) -> Vec<T> {
    let mut best: Option<(T, Vec<T>)> = None;
    for i in 0..dim {
        let mut e = vec![T::zero(); dim];
        e[i] = T::one();
        orthogonalize(&mut e, basis);
        orthogonalize(&mut e, basis);
        let n = norm(&e);
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, e));
        }
    }
    let (_, mut v) = best.expect("dim >= 1");
    normalize_in_place(&mut v);
    v
}

/// The `k` largest eigenpairs of a symmetric positive semidefinite matrix,
/// sorted by descending eigenvalue.
///
/// Power iteration runs on the matrix deflated by every pair found so far
/// (Hotelling), and each iterate is re-orthogonalized against those pairs.
/// A pair is accepted once `‖S v − λ v‖ ≤ tol · max(1, λ)`.
pub fn top_eigenpairs<T: Scalar>(
    s: &Matrix<T>,
    k: usize,
    tol: T,
    max_iter: usize,
) -> Result<Vec<EigenPair<T>>> {
    let d = s.rows();
    if s.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "eigensolver expects a square matrix",
            expected: d,
            actual: s.cols(),
        });
    }
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!(
            "number of eigenpairs must be in 1..={d}, got {k}"
        )));
    }
    if tol.is_nan() || tol <= T::zero() || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "eigensolver needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    let asym = s.max_asymmetry();
    if asym.as_f64() > T::SYMMETRY_TOL * s.max_abs().as_f64().max(1.0) {
        return Err(Error::NotSymmetric {
            asymmetry: asym.as_f64(),
        });
    }

    let start = start_vector::<T>(d);
    let mut found: Vec<EigenPair<T>> = Vec::with_capacity(k);
    let mut largest = T::zero();

    for index in 0..k {
        let mut x = start.clone();
        orthogonalize(&mut x, &found);
        orthogonalize(&mut x, &found);
        if normalize_in_place(&mut x) <= T::of(1e-3) {
            x = complete_basis(d, &found);
        }

        // convergence is judged on the deflated, projected operator; past tol,
        // keep polishing while the residual still shrinks
        let mut converged = None;
        let mut residual = T::infinity();
        let mut accepted: Option<(T, Vec<T>, T)> = None;
        for _ in 0..max_iter {
            let sx = s.mul_vec(&x)?;
            let lambda = dot(&x, &sx);
            // Hotelling deflation: (S − Σ λ_j v_j v_jᵀ) x
            let mut y = sx;
            for p in &found {
                let c = p.value * dot(&p.vector, &x);
                axpy(-c, &p.vector, &mut y);
            }
            orthogonalize(&mut y, &found);
            residual = y
                .iter()
                .zip(&x)
                .map(|(&a, &b)| {
                    let r = a - lambda * b;
                    r * r
                })
                .sum::<T>()
                .sqrt();
            let target = tol * lambda.abs().max(T::one());
            if let Some((best_lambda, best_x, best_res)) = &accepted {
                if residual >= *best_res {
                    converged = Some(*best_lambda);
                    x = best_x.clone();
                    break;
                }
            }
            if residual <= target * T::of(POLISH_FACTOR) {
                converged = Some(lambda);
                break;
            }
            if residual <= target {
                accepted = Some((lambda, x.clone(), residual));
            }
            if normalize_in_place(&mut y) == T::zero() {
                // x lies in the null space of the deflated matrix
                converged = Some(T::zero());
                break;
            }
            x = y;
        }

        if converged.is_none() {
            if let Some((best_lambda, best_x, _)) = accepted {
                converged = Some(best_lambda);
                x = best_x;
            }
        }
        let Some(mut lambda) = converged else {
            return Err(Error::NotConverged {
                index,
                iterations: max_iter,
                residual: residual.as_f64(),
            });
        };
        largest = largest.max(lambda);
        if lambda < T::zero() {
            if -lambda <= tol * largest.max(T::one()) {
                lambda = T::zero();
            } else {
                return Err(Error::NotPositiveSemidefinite {
                    eigenvalue: lambda.as_f64(),
                });
            }
        }
        canonicalize_sign(&mut x);
        found.push(EigenPair {
            value: lambda,
            vector: x,
        });
    }

    // near-degenerate pairs can come out of deflation slightly out of order
    found.sort_by(|a, b| b.value.partial_cmp(&a.value).expect("finite eigenvalues"));
    Ok(found)
}

/// Eigenpairs of `scatter(fc)` computed through the smaller N×N Gram matrix,
/// for inputs with fewer rows than columns.
///
/// Each Gram eigenvector `g` maps back to `Fcᵀ g / ‖Fcᵀ g‖`; eigenvalues are
/// shared. Components whose eigenvalue is negligible relative to the largest
/// cannot be back-projected and are filled with an orthonormal completion,
/// which is a null direction of the scatter matrix.
pub fn gram_eigenpairs<T: Scalar>(
    fc: &Matrix<T>,
    k: usize,
    tol: T,
    max_iter: usize,
) -> Result<Vec<EigenPair<T>>> {
    let (n, d) = (fc.rows(), fc.cols());
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n >= d {
        return Err(Error::InvalidArgument(format!(
            "Gram path needs fewer rows than columns, got {n}x{d}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "Gram path yields at most {n} eigenpairs, requested {k}"
        )));
    }
    let small = top_eigenpairs(&gram(fc), k, tol, max_iter)?;
    Ok(back_project(fc, small))
}

fn back_project<T: Scalar>(fc: &Matrix<T>, small: Vec<EigenPair<T>>) -> Vec<EigenPair<T>> {
    let d = fc.cols();
    let top = small.first().map_or(T::zero(), |p| p.value);
    let negligible = T::of(1e-12) * top;
    let mut out: Vec<EigenPair<T>> = Vec::with_capacity(small.len());
    for p in small {
        let mut v = vec![T::zero(); d];
        if top > T::zero() && p.value > negligible {
            for (i, row) in fc.row_iter().enumerate() {
                axpy(p.vector[i], row, &mut v);
            }
            normalize_in_place(&mut v);
            orthogonalize(&mut v, &out);
            normalize_in_place(&mut v);
        } else {
            v = complete_basis(d, &out);
        }
        canonicalize_sign(&mut v);
        out.push(EigenPair {
            value: p.value,
            vector: v,
        });
    }
    out
}

/// Every eigenpair of a symmetric matrix by cyclic Jacobi rotations, sorted by
/// descending eigenvalue.
pub fn symmetric_eigen<T: Scalar>(s: &Matrix<T>) -> Result<Vec<EigenPair<T>>> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "eigensolver expects a square matrix",
            expected: n,
            actual: s.cols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let asym = s.max_asymmetry();
    if asym.as_f64() > T::SYMMETRY_TOL * s.max_abs().as_f64().max(1.0) {
        return Err(Error::NotSymmetric {
            asymmetry: asym.as_f64(),
        });
    }

    let mut a = s.data.clone();
    let mut v = Matrix::<T>::identity(n).data;
    let frob2: T = a.iter().map(|&x| x * x).sum();
    let floor = T::epsilon() * T::epsilon() * frob2;
    for _ in 0..JACOBI_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[i * n + j] * a[i * n + j];
            }
        }
        if off <= floor {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair<T>> = (0..n)
        .map(|j| {
            let mut vector: Vec<T> = (0..n).map(|k| v[k * n + j]).collect();
            canonicalize_sign(&mut vector);
            EigenPair {
                value: a[j * n + j],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.partial_cmp(&a.value).expect("finite eigenvalues"));
    Ok(pairs)
}

/// Full spectrum of `scatter(fc)`. With fewer rows than columns only the `N`
/// pairs reachable through the Gram matrix are returned. Round-off negatives
/// are clamped to zero.
pub fn scatter_spectrum<T: Scalar>(fc: &Matrix<T>) -> Result<Vec<EigenPair<T>>> {
    if fc.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pairs = if fc.rows() < fc.cols() {
        back_project(fc, symmetric_eigen(&gram(fc))?)
    } else {
        symmetric_eigen(&scatter(fc))?
    };
    for p in &mut pairs {
        p.value = p.value.max(T::zero());
    }
    Ok(pairs)
}

/// Top-k eigenpairs of the scatter of `fc`, taking the Gram path when that is
/// the smaller problem. Falls back to [`symmetric_eigen`] when power iteration
/// runs out of iterations.
pub fn principal_components<T: Scalar>(
    fc: &Matrix<T>,
    k: usize,
    tol: T,
    max_iter: usize,
) -> Result<Vec<EigenPair<T>>> {
    let gram_path = fc.rows() < fc.cols() && k <= fc.rows();
    let power = if gram_path {
        gram_eigenpairs(fc, k, tol, max_iter)
    } else {
        top_eigenpairs(&scatter(fc), k, tol, max_iter)
    };
    match power {
        Err(Error::NotConverged { .. }) => {
            // near-degenerate leading eigenvalues: use the dense decomposition
            let mut pairs = if gram_path {
                scatter_spectrum(fc)?
            } else {
                symmetric_eigen(&scatter(fc))?
            };
            pairs.truncate(k);
            for p in &mut pairs {
                p.value = p.value.max(T::zero());
            }
            Ok(pairs)
        }
        other => other,
    }
}

/// Solver defaults for a scalar type: `(tol, max_iter)`.
pub fn default_solver<T: Scalar>() -> (T, usize) {
    (T::of(T::EIGEN_TOL), 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = SplitMix64::new(seed);
        let data = (0..rows * cols)
            .map(|_| rng.next_f64() * 2.0 - 1.0)
            .collect();
        Matrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn new_rejects_bad_length_and_nan() {
        assert!(matches!(
            Matrix::<f64>::new(2, 2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 4.0]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn column_mean_examples() {
        assert_eq!(
            column_mean(&m(&[&[1., 2.], &[3., 4.]])).unwrap(),
            vec![2., 3.]
        );
        assert_eq!(
            column_mean(&m(&[&[0., 0.], &[0., 0.]])).unwrap(),
            vec![0., 0.]
        );
        assert!(matches!(
            column_mean(&Matrix::<f64>::zeros(0, 3)),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn column_mean_matches_double_loop() {
        let f = lcg_matrix(50, 8, 11);
        let mean = column_mean(&f).unwrap();
        for (j, &got) in mean.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..50 {
                s += f.data()[i * 8 + j];
            }
            assert!((got - s / 50.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn subtract_row_examples() {
        let f = m(&[&[1., 2.], &[3., 4.]]);
        assert_eq!(
            subtract_row(&f, &[2., 3.]).unwrap(),
            m(&[&[-1., -1.], &[1., 1.]])
        );
        assert_eq!(subtract_row(&f, &[0., 0.]).unwrap(), f);
        assert!(subtract_row(&f, &[1.0]).is_err());

        let g = lcg_matrix(40, 5, 2);
        let c = subtract_row(&g, &column_mean(&g).unwrap()).unwrap();
        for x in column_mean(&c).unwrap() {
            assert!(x.abs() <= 1e-12);
        }
    }

    #[test]
    fn scatter_examples() {
        assert_eq!(
            scatter(&m(&[&[-1., -1.], &[1., 1.]])),
            m(&[&[1., 1.], &[1., 1.]])
        );
        assert_eq!(scatter(&Matrix::<f64>::zeros(3, 2)), Matrix::zeros(2, 2));

        let f = lcg_matrix(10, 4, 5);
        let s = scatter(&f);
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for i in 0..10 {
                    acc += f.get(i, a) * f.get(i, b);
                }
                assert!((s.get(a, b) - acc / 10.0).abs() <= 1e-12);
            }
        }
        assert_eq!(s.max_asymmetry(), 0.0);
    }

    #[test]
    fn eigen_diagonal() {
        let s = m(&[&[3., 0.], &[0., 1.]]);
        let p = top_eigenpairs(&s, 2, 1e-10, 10_000).unwrap();
        assert!((p[0].value - 3.0).abs() < 1e-10);
        assert!((p[1].value - 1.0).abs() < 1e-10);
        assert!((p[0].vector[0].abs() - 1.0).abs() < 1e-9);
        assert!((p[1].vector[1].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_rank_one() {
        let s = m(&[&[1., 1.], &[1., 1.]]);
        let p = top_eigenpairs(&s, 1, 1e-10, 10_000).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((p[0].value - 2.0).abs() < 1e-10);
        // canonical sign: first entry positive
        assert!((p[0].vector[0] - h).abs() < 1e-9 && (p[0].vector[1] - h).abs() < 1e-9);
    }

    #[test]
    fn eigen_start_vector_orthogonal_to_top() {
        // all-ones is the *bottom* eigenvector here
        let s = m(&[&[2., -1.], &[-1., 2.]]);
        let p = top_eigenpairs(&s, 1, 1e-10, 10_000).unwrap();
        assert!((p[0].value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_errors() {
        let asym = m(&[&[1., 2.], &[0., 1.]]);
        assert!(matches!(
            top_eigenpairs(&asym, 1, 1e-10, 100),
            Err(Error::NotSymmetric { .. })
        ));
        let s = m(&[&[2., 0.], &[0., 1.]]);
        assert!(top_eigenpairs(&s, 0, 1e-10, 100).is_err());
        assert!(top_eigenpairs(&s, 3, 1e-10, 100).is_err());
        // ratio 0.999 cannot reach 1e-14 in three steps
        let slow = m(&[&[1.0, 0.0], &[0.0, 0.999]]);
        match top_eigenpairs(&slow, 1, 1e-14, 3) {
            Err(Error::NotConverged {
                residual,
                iterations,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
        let indefinite = m(&[&[-5., 0.], &[0., 1.]]);
        assert!(matches!(
            top_eigenpairs(&indefinite, 1, 1e-10, 10_000),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn eigen_zero_matrix() {
        let p = top_eigenpairs(&Matrix::<f64>::zeros(3, 3), 3, 1e-10, 100).unwrap();
        for (i, a) in p.iter().enumerate() {
            assert_eq!(a.value, 0.0);
            for b in &p[i + 1..] {
                assert!(dot(&a.vector, &b.vector).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_path_examples() {
        let v = [3.0, 4.0, 0.0];
        let p = gram_eigenpairs(&m(&[&v]), 1, 1e-10, 10_000).unwrap();
        assert!((p[0].value - 25.0).abs() < 1e-9);
        assert!((p[0].vector[0] - 0.6).abs() < 1e-12 && (p[0].vector[1] - 0.8).abs() < 1e-12);

        let z = gram_eigenpairs(&Matrix::<f64>::zeros(2, 4), 1, 1e-10, 100).unwrap();
        assert_eq!(z[0].value, 0.0);
        assert!((norm(&z[0].vector) - 1.0).abs() < 1e-12);

        assert!(gram_eigenpairs(&lcg_matrix(4, 4, 1), 1, 1e-10, 100).is_err());
    }

    #[test]
    fn gram_matches_scatter_path() {
        let f = lcg_matrix(3, 10, 9);
        let a = gram_eigenpairs(&f, 2, 1e-10, 10_000).unwrap();
        let b = top_eigenpairs(&scatter(&f), 2, 1e-10, 10_000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value - y.value).abs() < 1e-7);
            assert!((dot(&x.vector, &y.vector).abs() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn f32_solver_runs() {
        let s = Matrix::<f32>::from_rows(&[[4.0f32, 1.0], [1.0, 3.0]]).unwrap();
        let (tol, it) = default_solver::<f32>();
        let p = top_eigenpairs(&s, 2, tol, it).unwrap();
        let exact = 3.5 + (1.25f32).sqrt();
        assert!((p[0].value - exact).abs() < 1e-4);
    }

    #[test]
    fn jacobi_two_by_two() {
        let p = symmetric_eigen(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((p[0].value - 3.0).abs() < 1e-14 && (p[1].value - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((p[0].vector[0] - h).abs() < 1e-14 && (p[0].vector[1] - h).abs() < 1e-14);
        assert!(p[1].vector[0] > 0.0 && (p[1].vector[0] + p[1].vector[1]).abs() < 1e-14);
    }

    #[test]
    fn jacobi_matches_power_iteration() {
        let s = scatter(&lcg_matrix(30, 6, 5));
        let a = symmetric_eigen(&s).unwrap();
        let b = top_eigenpairs(&s, 6, 1e-10, 10_000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value - y.value).abs() < 1e-9);
        }
        assert!(symmetric_eigen(&m(&[&[1.0, 2.0], &[0.0, 1.0]])).is_err());
        assert!(symmetric_eigen(&m(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn scatter_spectrum_wide_input() {
        let f = lcg_matrix(3, 7, 2);
        let p = scatter_spectrum(&f).unwrap();
        assert_eq!(p.len(), 3);
        let full = scatter_spectrum(&scatter(&f).cast::<f64>()).unwrap();
        assert_eq!(full.len(), 7);
        for (i, x) in p.iter().enumerate() {
            for y in &p[i + 1..] {
                assert!(dot(&x.vector, &y.vector).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn principal_components_falls_back_when_power_stalls() {
        let h = 0.5f64.sqrt();
        let (a, b) = (1.0, 1.0 - 1e-6);
        let fc = m(&[
            &[a * h, a * h],
            &[-a * h, -a * h],
            &[b * h, -b * h],
            &[-b * h, b * h],
        ]);
        let p = principal_components(&fc, 2, 1e-12, 5).unwrap();
        assert!((p[0].value - 0.5).abs() < 1e-14);
        assert!((p[1].value - 0.5 * b * b).abs() < 1e-14);
        assert!((p[0].vector[0] - h).abs() < 1e-12 && (p[0].vector[1] - h).abs() < 1e-12);
        assert!(matches!(
            top_eigenpairs(&scatter(&fc), 2, 1e-12, 5),
            Err(Error::NotConverged { .. })
        ));
    }
}
