//! Feature-representation postprocessing.
//!
//! Removes the common mean of a feature set and projects every feature away
//! from the top-T dominating principal directions, measures isotropy of the
//! result through the partition function `H(ω) = Σ exp(ωᵀ f)`, and compares
//! downstream accuracy before and after on synthetic or user-supplied data.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below name the common concrete instantiations. File formats always
//! store `f64`.

pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod isotropy;
pub mod linalg;
pub mod postprocess;
pub mod rng;
pub mod scalar;
mod serde_float;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{EvalParams, EvalReport, Evaluator, FitOn, L2Normalize, Labeled, Metric, SweepRow};
pub use isotropy::IsotropyReport;
pub use linalg::{EigenPair, Matrix};
pub use postprocess::{PostprocessModel, SpectrumSummary};
pub use scalar::Scalar;
pub use synth::{GroundTruth, SynthSpec};

/// Double-precision feature matrix (the on-disk representation).
pub type FeatureMatrix = Matrix<f64>;
/// Single-precision feature matrix.
pub type FeatureMatrix32 = Matrix<f32>;
pub type Model = PostprocessModel<f64>;
pub type Model32 = PostprocessModel<f32>;
pub type EigenPair64 = EigenPair<f64>;
pub type EigenPair32 = EigenPair<f32>;
