//! Sparse PCA under the single-spike covariance model.
//!
//! The crate is organised in four layers:
//!
//! * [`model`] builds spike profiles, embeds them into `R^n`, draws Gaussian
//!   samples from `I + θ·vvᵀ` and forms the centered operator `Γ̂ = Σ̂ − I`.
//! * [`estimators`] holds the support-recovery algorithms (diagonal
//!   thresholding, the single-peak column method and Spectral Energy Pursuit)
//!   together with hard thresholding and the truncated power refinement.
//! * [`theory`] computes the structure function `s(p)`, the sample-complexity
//!   functionals and runtime diagnostics for the perturbation bounds.
//! * [`harness`] runs seeded, parallel Monte Carlo sweeps and writes CSV.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{
    dt_estimate, hard_threshold, sep_estimate, sep_estimate_with_truth, single_peak_estimate,
    tpower_refine, Algorithm, EstimationResult, OperatorMode, RefinementResult, SepRound,
    SepTrace,
};
pub use linalg::top_eigvec;
pub use model::{
    centered_gamma, draw_samples, embed_random, embed_spike, make_profile, population_gamma, CenteredGamma,
    ProfileKind, SampleSet, SpikeProfile, SpikedModel,
};
pub use theory::{
    complexity_pair, power_law_max_ps2, sin_angle, structure_function, support_recall,
    ComplexityPair, StructureFunction,
};
