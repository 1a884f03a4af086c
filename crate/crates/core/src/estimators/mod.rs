//! Support-recovery estimators and truncated power refinement.
//!
//! Every estimator consumes only `Γ̂` and the sparsity `k`; the spike strength
//! is never an input. All selection steps break ties toward the lower index.

mod baselines;
mod sep;
mod tpower;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{principal_submatrix, top_eigvec, zero_pad, EIG_MAX_ITER, EIG_TOL};
use crate::model::CenteredGamma;

pub use baselines::{dt_estimate, single_peak_estimate};
pub use sep::{sep_estimate, sep_estimate_with_truth, SepRound, SepTrace};
pub use tpower::{hard_threshold, tpower_refine, OperatorMode, RefinementResult};

/// Output of a support-recovery estimator.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    /// Unit-norm estimate, zero off `support`.
    pub v_hat: DVector<f64>,
    /// Selected coordinates, ascending.
    pub support: Vec<usize>,
    /// Per-round record; only SEP fills this in.
    pub trace: Option<SepTrace>,
}

/// The three support-recovery algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dt,
    SinglePeak,
    Sep,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dt, Algorithm::SinglePeak, Algorithm::Sep];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dt => "dt",
            Algorithm::SinglePeak => "single-peak",
            Algorithm::Sep => "sep",
        }
    }

    pub fn estimate(self, gamma: &CenteredGamma, k: usize) -> Result<EstimationResult> {
        match self {
            Algorithm::Dt => dt_estimate(gamma, k),
            Algorithm::SinglePeak => single_peak_estimate(gamma, k),
            Algorithm::Sep => sep_estimate(gamma, k, false),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm {s:?}")))
    }
}

fn check_sparsity(gamma: &CenteredGamma, k: usize) -> Result<()> {
    if k == 0 || k > gamma.n() {
        return Err(Error::invalid(format!(
            "sparsity k = {k} must lie in 1..={}",
            gamma.n()
        )));
    }
    Ok(())
}

/// Top eigenpair of `Γ̂[S, S]`, eigenvector zero-padded to `R^n`.
fn restricted_top(gamma: &CenteredGamma, support: &[usize]) -> Result<(f64, DVector<f64>)> {
    let block = principal_submatrix(gamma.matrix(), support);
    let (lambda, e) = top_eigvec(&block, EIG_TOL, EIG_MAX_ITER)?;
    Ok((lambda, zero_pad(&e, support, gamma.n())))
}
