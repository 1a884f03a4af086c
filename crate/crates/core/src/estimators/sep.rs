//! Spectral Energy Pursuit.
//!
//! Start from the single coordinate with the largest `|Γ̂_jj|`. In round `p`
//! take the top eigenvector `ê` of `Γ̂[S, S]`, form the response `u = Γ̂·ê`
//! and reselect the `p + 1` largest `|u_j|` over all `n` coordinates. The
//! reselection is fresh: members of the previous support can be dropped.

use nalgebra::DVector;

use super::{check_sparsity, restricted_top, EstimationResult};
use crate::error::Result;
use crate::linalg::top_k_indices;
use crate::model::{CenteredGamma, SpikedModel};

/// One SEP round: the support `S^(p)` and the eigenpair of `Γ̂[S^(p), S^(p)]`.
#[derive(Debug, Clone)]
pub struct SepRound {
    pub p: usize,
    pub support: Vec<usize>,
    pub eigenvalue: f64,
    /// Zero-padded unit eigenvector.
    pub eigvec: DVector<f64>,
    /// `‖v_{S^(p)}‖²`, present only when the generating model was supplied.
    pub captured_energy: Option<f64>,
}

/// Rounds `p = 1..=k`; the last round's eigenvector is the SEP output.
#[derive(Debug, Clone, Default)]
pub struct SepTrace {
    pub rounds: Vec<SepRound>,
}

pub fn sep_estimate(gamma: &CenteredGamma, k: usize, record_trace: bool) -> Result<EstimationResult> {
    run(gamma, k, record_trace, None)
}

/// SEP with a trace that also records the captured spike energy per round.
pub fn sep_estimate_with_truth(
    gamma: &CenteredGamma,
    k: usize,
    model: &SpikedModel,
) -> Result<EstimationResult> {
    run(gamma, k, true, Some(model))
}

fn run(
    gamma: &CenteredGamma,
    k: usize,
    record_trace: bool,
    truth: Option<&SpikedModel>,
) -> Result<EstimationResult> {
    check_sparsity(gamma, k)?;
    let g = gamma.matrix();
    let n = gamma.n();

    let abs_diag: Vec<f64> = gamma.diagonal().iter().map(|d| d.abs()).collect();
    let mut support = top_k_indices(&abs_diag, 1);
    let mut trace = record_trace.then(SepTrace::default);

    for p in 1..=k {
        let (eigenvalue, eigvec) = restricted_top(gamma, &support)?;
        if p == k {
            if let Some(t) = trace.as_mut() {
                t.rounds.push(round(p, &support, eigenvalue, &eigvec, truth));
            }
            return Ok(EstimationResult {
                v_hat: eigvec,
                support,
                trace,
            });
        }

        // u = Γ̂·ê touches only the columns in the current support
        let mut response = vec![0.0; n];
        for &j in &support {
            let weight = eigvec[j];
            for (u, x) in response.iter_mut().zip(g.column(j).iter()) {
                *u += weight * x;
            }
        }
        let scores: Vec<f64> = response.iter().map(|u| u.abs()).collect();
        let next = top_k_indices(&scores, p + 1);

        if let Some(t) = trace.as_mut() {
            t.rounds.push(round(p, &support, eigenvalue, &eigvec, truth));
        }
        support = next;
    }
    unreachable!("loop returns at p == k")
}

fn round(
    p: usize,
    support: &[usize],
    eigenvalue: f64,
    eigvec: &DVector<f64>,
    truth: Option<&SpikedModel>,
) -> SepRound {
    SepRound {
        p,
        support: support.to_vec(),
        eigenvalue,
        eigvec: eigvec.clone(),
        captured_energy: truth.map(|m| m.energy_on(support)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{dt_estimate, single_peak_estimate};
    use crate::model::{
        centered_gamma, draw_samples, embed_random, make_profile, population_gamma, ProfileKind,
    };
    use crate::theory::{sin_angle, structure_function};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k1_matches_dt_on_nonnegative_diagonal() {
        let profile = make_profile(&ProfileKind::Flat, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let model = embed_random(&profile, 15, 3.0, true, &mut rng).unwrap();
            let gamma = centered_gamma(&draw_samples(&model, 500, &mut rng).unwrap()).unwrap();
            let diag = gamma.diagonal();
            let max_pos = diag.iter().cloned().fold(f64::MIN, f64::max);
            let max_neg = diag.iter().cloned().fold(f64::MAX, f64::min);
            if max_pos < -max_neg {
                continue;
            }
            assert_eq!(
                sep_estimate(&gamma, 1, false).unwrap().support,
                dt_estimate(&gamma, 1).unwrap().support
            );
        }
    }

    #[test]
    fn k1_screens_absolute_diagonal() {
        // large negative diagonal wins |d_j| screening but not signed screening
        let g = CenteredGamma::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -2.0])).unwrap();
        assert_eq!(sep_estimate(&g, 1, false).unwrap().support, vec![1]);
        assert_eq!(dt_estimate(&g, 1).unwrap().support, vec![0]);
    }

    #[test]
    fn noiseless_trace_tracks_prefix_energy() {
        let profile = make_profile(&ProfileKind::PowerLawEnergy { alpha: 0.8 }, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let model = embed_random(&profile, 50, 3.0, true, &mut rng).unwrap();
        let gamma = population_gamma(&model);
        let r = sep_estimate_with_truth(&gamma, 8, &model).unwrap();
        assert_eq!(r.support, model.support());
        assert!(sin_angle(&r.v_hat, model.spike()).unwrap() <= 1e-8);

        let s = structure_function(&profile);
        let trace = r.trace.unwrap();
        assert_eq!(trace.rounds.len(), 8);
        for round in &trace.rounds {
            assert!(round.support.iter().all(|i| model.support().contains(i)));
            let captured = round.captured_energy.unwrap();
            let prefix: f64 = profile.weights()[..round.p].iter().sum();
            assert!((captured - prefix).abs() < 1e-12);
            assert!((captured * s.at(round.p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k2_matches_single_peak_when_seed_is_singleton() {
        let profile = make_profile(&ProfileKind::PowerLawEnergy { alpha: 1.5 }, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let model = embed_random(&profile, 30, 3.0, true, &mut rng).unwrap();
            let gamma = population_gamma(&model);
            // S^(1) is a singleton so ê^(1) = e_jmax and u^(1) is the j_max column
            assert_eq!(
                sep_estimate(&gamma, 2, false).unwrap().support,
                single_peak_estimate(&gamma, 2).unwrap().support
            );
        }
    }

    #[test]
    fn reselection_may_drop_previous_members() {
        // S^(1) = {0}; u = column 0 = (1, 2, 2) so S^(2) = {1, 2} drops coordinate 0
        let g = CenteredGamma::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 2.0, 2.0, 0.5, 0.0, 2.0, 0.0, 0.5],
        ))
        .unwrap();
        let r = sep_estimate(&g, 2, true).unwrap();
        let trace = r.trace.unwrap();
        assert_eq!(trace.rounds[0].support, vec![0]);
        assert_eq!(trace.rounds[1].support, vec![1, 2]);
        assert_eq!(r.support, vec![1, 2]);
        assert!(trace.rounds[1].captured_energy.is_none());
    }
}
