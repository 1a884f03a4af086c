use super::{check_sparsity, restricted_top, EstimationResult};
use crate::error::Result;
use crate::linalg::{argmax, top_k_indices};
use crate::model::CenteredGamma;

/// Diagonal thresholding: keep the `k` largest (signed) diagonal entries.
pub fn dt_estimate(gamma: &CenteredGamma, k: usize) -> Result<EstimationResult> {
    check_sparsity(gamma, k)?;
    let support = top_k_indices(&gamma.diagonal(), k);
    let (_, v_hat) = restricted_top(gamma, &support)?;
    Ok(EstimationResult {
        v_hat,
        support,
        trace: None,
    })
}

/// Single-peak method: screen by the column of the largest diagonal entry.
///
/// With `W = 0` that column equals `θ·v_jmax·v`, so its magnitudes rank the
/// support exactly.
pub fn single_peak_estimate(gamma: &CenteredGamma, k: usize) -> Result<EstimationResult> {
    check_sparsity(gamma, k)?;
    let j_max = argmax(&gamma.diagonal());
    let column: Vec<f64> = gamma
        .matrix()
        .column(j_max)
        .iter()
        .map(|x| x.abs())
        .collect();
    let support = top_k_indices(&column, k);
    let (_, v_hat) = restricted_top(gamma, &support)?;
    Ok(EstimationResult {
        v_hat,
        support,
        trace: None,
    })
}
