//! Labeled synthetic features with a planted common offset, planted
//! high-variance directions and separated class centroids.
//!
//! Each row is `centroid[class] + offset + noise`, where the noise has
//! variance `spike_variances[k]` along the k-th planted spike direction and
//! `base_variance` in every other direction. Offset, spikes and centroid axes
//! are mutually orthogonal.
//!
//! Stream order, from a [`SplitMix64`] seeded with `spec.seed`:
//! 1. `m × dim` standard normals (row-major), orthonormalized with two passes
//!    of modified Gram-Schmidt into the planted basis, where
//!    `m = [offset_norm > 0] + spikes + [class_sep > 0]·n_classes`. The basis is
//!    assigned in that order: offset direction, spike directions, class axes.
//! 2. For each class in order, for each of its `n_per_class` rows, `dim`
//!    standard normals forming the row's noise draw.
//!
//! Class `c` sits at `class_sep / √2` along its axis, so any two centroids are
//! exactly `class_sep` apart. Rows are grouped by class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub n_classes: usize,
    pub dim: usize,
    /// Norm of the common vector added to every row.
    pub offset_norm: f64,
    /// Noise variance along each planted spike direction.
    pub spike_variances: Vec<f64>,
    /// Noise variance in every other direction.
    pub base_variance: f64,
    /// Distance between any two class centroids.
    pub class_sep: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_per_class: 500,
            n_classes: 4,
            dim: 32,
            offset_norm: 5.0,
            spike_variances: vec![50.0, 20.0],
            base_variance: 1.0,
            class_sep: 6.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn n_total(&self) -> usize {
        self.n_per_class * self.n_classes
    }

    fn planted_count(&self) -> usize {
        usize::from(self.offset_norm > 0.0)
            + self.spike_variances.len()
            + if self.class_sep > 0.0 {
                self.n_classes
            } else {
                0
            }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_per_class == 0 || self.n_classes == 0 || self.dim == 0 {
            return bad("n_per_class, n_classes and dim must all be at least 1".into());
        }
        if !self.offset_norm.is_finite() || self.offset_norm < 0.0 {
            return bad(format!(
                "offset_norm must be finite and >= 0, got {}",
                self.offset_norm
            ));
        }
        if !self.base_variance.is_finite() || self.base_variance <= 0.0 {
            return bad(format!(
                "base_variance must be > 0, got {}",
                self.base_variance
            ));
        }
        if !self.class_sep.is_finite() || self.class_sep < 0.0 {
            return bad(format!("class_sep must be >= 0, got {}", self.class_sep));
        }
        for &s in &self.spike_variances {
            if !s.is_finite() || s <= self.base_variance {
                return bad(format!(
                    "spike variance {s} must be finite and exceed base_variance {}",
                    self.base_variance
                ));
            }
        }
        let required = self.planted_count();
        if required > self.dim {
            return Err(Error::SynthDimension {
                required,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

/// The exact planted quantities behind [`generate`] for the same spec.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub offset: Vec<f64>,
    pub spike_directions: Vec<Vec<f64>>,
    pub centroids: Vec<Vec<f64>>,
}

fn planted(spec: &SynthSpec, rng: &mut SplitMix64) -> GroundTruth {
    let dim = spec.dim;
    let count = spec.planted_count();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut raw: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.next_normal()).collect())
        .collect();
    for v in raw.iter_mut() {
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::dot(b, v);
                linalg::axpy(-c, b, v);
            }
        }
        let n = linalg::norm(v);
        basis.push(v.iter().map(|x| x / n).collect());
    }

    let mut axes = basis.into_iter();
    let offset = if spec.offset_norm > 0.0 {
        let dir = axes.next().expect("counted");
        dir.into_iter().map(|x| x * spec.offset_norm).collect()
    } else {
        vec![0.0; dim]
    };
    let spike_directions: Vec<Vec<f64>> = axes.by_ref().take(spec.spike_variances.len()).collect();
    let centroids = if spec.class_sep > 0.0 {
        let scale = spec.class_sep / std::f64::consts::SQRT_2;
        axes.map(|a| a.into_iter().map(|x| x * scale).collect())
            .collect()
    } else {
        vec![vec![0.0; dim]; spec.n_classes]
    };
    GroundTruth {
        offset,
        spike_directions,
        centroids,
    }
}

pub fn ground_truth(spec: &SynthSpec) -> Result<GroundTruth> {
    spec.validate()?;
    Ok(planted(spec, &mut SplitMix64::new(spec.seed)))
}

/// Draws the feature matrix and its class labels.
pub fn generate(spec: &SynthSpec) -> Result<(Matrix<f64>, Vec<usize>)> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let truth = planted(spec, &mut rng);
    let dim = spec.dim;
    let base_sd = spec.base_variance.sqrt();
    let extra_sd: Vec<f64> = spec
        .spike_variances
        .iter()
        .map(|s| s.sqrt() - base_sd)
        .collect();

    let mut data = Vec::with_capacity(spec.n_total() * dim);
    let mut labels = Vec::with_capacity(spec.n_total());
    let mut g = vec![0.0; dim];
    for (class, centroid) in truth.centroids.iter().enumerate() {
        for _ in 0..spec.n_per_class {
            g.iter_mut().for_each(|x| *x = rng.next_normal());
            let mut row: Vec<f64> = g.iter().map(|x| x * base_sd).collect();
            for (dir, &extra) in truth.spike_directions.iter().zip(&extra_sd) {
                let c = linalg::dot(dir, &g) * extra;
                linalg::axpy(c, dir, &mut row);
            }
            for ((r, &c), &o) in row.iter_mut().zip(centroid).zip(&truth.offset) {
                *r += c + o;
            }
            data.extend_from_slice(&row);
            labels.push(class);
        }
    }
    Ok((Matrix::new(spec.n_total(), dim, data)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            n_per_class: 20,
            seed: 9,
            ..Default::default()
        };
        let (a, la) = generate(&spec).unwrap();
        let (b, lb) = generate(&spec).unwrap();
        assert_eq!(a.data(), b.data());
        assert_eq!(la, lb);
        assert_eq!(la.len(), 80);
        assert!(la.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ground_truth_is_orthogonal() {
        let spec = SynthSpec::default();
        let t = ground_truth(&spec).unwrap();
        assert!((linalg::norm(&t.offset) - 5.0).abs() < 1e-12);
        let on = linalg::norm(&t.offset);
        let unit_offset: Vec<f64> = t.offset.iter().map(|x| x / on).collect();
        for s in &t.spike_directions {
            assert!((linalg::norm(s) - 1.0).abs() < 1e-12);
            assert!(linalg::dot(s, &unit_offset).abs() < 1e-12);
            for c in &t.centroids {
                assert!(linalg::dot(s, c).abs() < 1e-12);
            }
        }
        for (i, a) in t.centroids.iter().enumerate() {
            for b in &t.centroids[i + 1..] {
                let d: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!((d - 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_offset_ground_truth() {
        let spec = SynthSpec {
            offset_norm: 0.0,
            ..Default::default()
        };
        assert!(ground_truth(&spec)
            .unwrap()
            .offset
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn pure_noise_mean_is_small() {
        let spec = SynthSpec {
            n_per_class: 400,
            n_classes: 1,
            dim: 16,
            offset_norm: 0.0,
            spike_variances: vec![],
            base_variance: 1.0,
            class_sep: 0.0,
            seed: 3,
        };
        let (f, _) = generate(&spec).unwrap();
        let mean = linalg::column_mean(&f).unwrap();
        let bound = 3.0 * (1.0 * 16.0 / 400.0f64).sqrt();
        assert!(linalg::norm(&mean) <= bound);
    }

    #[test]
    fn rejects_invalid_specs() {
        let small = SynthSpec {
            dim: 6,
            ..Default::default()
        };
        assert!(matches!(
            generate(&small),
            Err(Error::SynthDimension {
                required: 7,
                dim: 6
            })
        ));
        let low_spike = SynthSpec {
            spike_variances: vec![0.5],
            ..Default::default()
        };
        assert!(matches!(
            generate(&low_spike),
            Err(Error::InvalidArgument(_))
        ));
        let zero = SynthSpec {
            n_classes: 0,
            ..Default::default()
        };
        assert!(generate(&zero).is_err());
    }
}
