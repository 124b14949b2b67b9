//! Independent reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use featpost::rng::SplitMix64;
use featpost::Matrix;

/// Classical Jacobi: always rotates the largest off-diagonal entry. Returns
/// eigenvalues in descending order with the matching eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 * n * n + 10 {
        let (mut p, mut q, mut big) = (0, 0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j].abs() > big {
                    (p, q, big) = (i, j, a[i][j].abs());
                }
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i].abs()).fold(1e-300, f64::max);
        if big <= 1e-17 * scale {
            break;
        }
        let phi = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
        let (s, c) = phi.sin_cos();
        for row in a.iter_mut() {
            let (x, y) = (row[p], row[q]);
            row[p] = c * x - s * y;
            row[q] = s * x + c * y;
        }
        for k in 0..n {
            let (x, y) = (a[p][k], a[q][k]);
            a[p][k] = c * x - s * y;
            a[q][k] = s * x + c * y;
        }
        for row in v.iter_mut() {
            let (x, y) = (row[p], row[q]);
            row[p] = c * x - s * y;
            row[q] = s * x + c * y;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

pub fn to_rows(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.to_vec()).collect()
}

pub fn normal_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.next_normal()).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// `B Bᵀ / m` for a `d × m` Gaussian `B`, so rank is `min(d, m)`.
pub fn random_psd(rng: &mut SplitMix64, d: usize, m: usize) -> Matrix<f64> {
    let b = normal_matrix(rng, d, m);
    let mut s = b.matmul(&b.transpose()).unwrap().into_data();
    for x in &mut s {
        *x /= m as f64;
    }
    Matrix::new(d, d, s).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        -1.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Brute-force nearest centroid: classes scanned in ascending id, strict
/// improvement required to switch.
pub fn oracle_nearest_centroid(
    train: &[Vec<f64>],
    labels: &[usize],
    test: &[Vec<f64>],
) -> Vec<usize> {
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let d = train[0].len();
    let centroids: Vec<Vec<f64>> = classes
        .iter()
        .map(|&c| {
            let members: Vec<&Vec<f64>> = train
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            let mut mu = vec![0.0; d];
            for r in &members {
                for j in 0..d {
                    mu[j] += r[j];
                }
            }
            mu.iter().map(|s| s / members.len() as f64).collect()
        })
        .collect();
    test.iter()
        .map(|x| {
            let mut best = 0;
            for i in 1..classes.len() {
                if sq_dist(x, &centroids[i]) < sq_dist(x, &centroids[best]) {
                    best = i;
                }
            }
            classes[best]
        })
        .collect()
}

/// Brute-force k-NN by repeated minimum selection (ties to the lower index);
/// vote ties to the smaller class id.
pub fn oracle_knn(
    train: &[Vec<f64>],
    labels: &[usize],
    test: &[Vec<f64>],
    k: usize,
    cosine_metric: bool,
) -> Vec<usize> {
    test.iter()
        .map(|x| {
            let score = |r: &Vec<f64>| {
                if cosine_metric {
                    -cosine(x, r)
                } else {
                    sq_dist(x, r)
                }
            };
            let mut taken = vec![false; train.len()];
            let mut votes = std::collections::HashMap::new();
            for _ in 0..k {
                let mut best: Option<usize> = None;
                for i in 0..train.len() {
                    if taken[i] {
                        continue;
                    }
                    if best.is_none_or(|b| score(&train[i]) < score(&train[b])) {
                        best = Some(i);
                    }
                }
                let b = best.unwrap();
                taken[b] = true;
                *votes.entry(labels[b]).or_insert(0usize) += 1;
            }
            let top = *votes.values().max().unwrap();
            *votes
                .iter()
                .filter(|(_, &n)| n == top)
                .map(|(c, _)| c)
                .min()
                .unwrap()
        })
        .collect()
}

/// Brute-force best threshold: every candidate scored from scratch.
pub fn oracle_threshold(sims: &[f64], same: &[bool]) -> (f64, f64) {
    let mut sorted = sims.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    let mut candidates = vec![f64::NEG_INFINITY, f64::INFINITY];
    for w in sorted.windows(2) {
        candidates.push(w[0] + (w[1] - w[0]) / 2.0);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (f64::NAN, -1.0);
    for th in candidates {
        let hits = sims
            .iter()
            .zip(same)
            .filter(|(&s, &y)| (s > th) == y)
            .count();
        let acc = hits as f64 / sims.len() as f64;
        if acc > best.1 {
            best = (th, acc);
        }
    }
    best
}

/// `Σ_i exp(wᵀ f_i)` evaluated directly.
pub fn direct_partition(f: &[Vec<f64>], w: &[f64]) -> f64 {
    f.iter().map(|r| dot(r, w).exp()).sum()
}

/// Random labeled instance: `n` rows in `d` dimensions over `c` classes (every
/// class present at least twice). With `integer` the coordinates are small
/// integers, which makes distance and vote ties common.
pub fn random_instance(
    rng: &mut SplitMix64,
    n: usize,
    d: usize,
    c: usize,
    integer: bool,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < 2 * c { i % c } else { rng.next_below(c) })
        .collect();
    let rows = labels
        .iter()
        .map(|&l| {
            (0..d)
                .map(|j| {
                    if integer {
                        rng.next_below(3) as f64 - 1.0 + if j == l % d { 1.0 } else { 0.0 }
                    } else {
                        rng.next_normal() + if j == l % d { 2.0 } else { 0.0 }
                    }
                })
                .collect()
        })
        .collect();
    (rows, labels)
}
