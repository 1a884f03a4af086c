use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::top_k_indices;
use crate::model::CenteredGamma;

/// Which operator the power step multiplies by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorMode {
    /// `Γ̂ = Σ̂ − I`.
    Centered,
    /// `Σ̂ = Γ̂ + I`.
    Uncentered,
}

impl OperatorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorMode::Centered => "centered",
            OperatorMode::Uncentered => "uncentered",
        }
    }
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(OperatorMode::Centered),
            "uncentered" => Ok(OperatorMode::Uncentered),
            other => Err(Error::invalid(format!("unknown operator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefinementResult {
    /// `w^(0), …, w^(T)`; every iterate after the first is `k′`-sparse.
    pub iterates: Vec<DVector<f64>>,
    pub operator_mode: OperatorMode,
    pub k_prime: usize,
}

impl RefinementResult {
    pub fn last(&self) -> &DVector<f64> {
        self.iterates.last().expect("iterates always holds w^(0)")
    }

    /// Nonzero coordinates of the final iterate, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.last()
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Keeps the `k_prime` largest-magnitude entries; lower index wins ties.
pub fn hard_threshold(y: &DVector<f64>, k_prime: usize) -> Result<DVector<f64>> {
    let n = y.len();
    if k_prime == 0 || k_prime > n {
        return Err(Error::invalid(format!("k' = {k_prime} must lie in 1..={n}")));
    }
    let magnitudes: Vec<f64> = y.iter().map(|x| x.abs()).collect();
    let mut out = DVector::zeros(n);
    for i in top_k_indices(&magnitudes, k_prime) {
        out[i] = y[i];
    }
    Ok(out)
}

/// Runs `T` truncated power steps `w ← normalize(H_k′(M·w))` from `w0`.
pub fn tpower_refine(
    gamma: &CenteredGamma,
    w0: &DVector<f64>,
    k_prime: usize,
    iterations: usize,
    mode: OperatorMode,
) -> Result<RefinementResult> {
    let n = gamma.n();
    if w0.len() != n {
        return Err(Error::invalid(format!(
            "initial vector has length {}, expected {n}",
            w0.len()
        )));
    }
    if (w0.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid("initial vector must be unit-norm"));
    }
    if k_prime == 0 || k_prime > n {
        return Err(Error::invalid(format!("k' = {k_prime} must lie in 1..={n}")));
    }

    let mut iterates = Vec::with_capacity(iterations + 1);
    iterates.push(w0.clone());
    for t in 0..iterations {
        let w = &iterates[t];
        let mut y = gamma.matrix() * w;
        if mode == OperatorMode::Uncentered {
            y += w;
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let z = hard_threshold(&y, k_prime)?;
        let norm = z.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateIterate { iteration: t + 1 });
        }
        iterates.push(z / norm);
    }
    Ok(RefinementResult {
        iterates,
        operator_mode: mode,
        k_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{embed_random, make_profile, population_gamma, ProfileKind};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn threshold_keeps_largest() {
        assert_eq!(
            hard_threshold(&v(&[3.0, -5.0, 2.0, 0.0]), 2).unwrap(),
            v(&[3.0, -5.0, 0.0, 0.0])
        );
        let y = v(&[0.1, -0.2, 0.3]);
        assert_eq!(hard_threshold(&y, 3).unwrap(), y);
        assert_eq!(hard_threshold(&v(&[2.0, -2.0]), 1).unwrap(), v(&[2.0, 0.0]));
        assert!(hard_threshold(&y, 0).is_err());
        assert!(hard_threshold(&y, 4).is_err());
    }

    #[test]
    fn zero_iterations() {
        let g = CenteredGamma::new(DMatrix::identity(3, 3)).unwrap();
        let w0 = v(&[1.0, 0.0, 0.0]);
        let r = tpower_refine(&g, &w0, 2, 0, OperatorMode::Centered).unwrap();
        assert_eq!(r.iterates, vec![w0]);
    }

    #[test]
    fn spike_is_a_fixed_point() {
        let profile = make_profile(&ProfileKind::PowerLawEnergy { alpha: 0.5 }, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = embed_random(&profile, 30, 3.0, true, &mut rng).unwrap();
        let g = population_gamma(&model);
        for mode in [OperatorMode::Centered, OperatorMode::Uncentered] {
            let r = tpower_refine(&g, model.spike(), 5, 7, mode).unwrap();
            for w in &r.iterates {
                assert_abs_diff_eq!(w.dot(model.spike()).abs(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn one_step_by_hand() {
        let g = CenteredGamma::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1.0, -0.5, 1.0, 0.5, 0.25, -0.5, 0.25, 1.0],
        ))
        .unwrap();
        let e1 = v(&[1.0, 0.0, 0.0]);

        // centered: y = (2, 1, -0.5), keep 2 → (2, 1, 0) / √5
        let r = tpower_refine(&g, &e1, 2, 1, OperatorMode::Centered).unwrap();
        let s5 = 5.0_f64.sqrt();
        let w1 = &r.iterates[1];
        assert_abs_diff_eq!(w1[0], 2.0 / s5, epsilon = 1e-12);
        assert_abs_diff_eq!(w1[1], 1.0 / s5, epsilon = 1e-12);
        assert_eq!(w1[2], 0.0);

        // uncentered: y = (3, 1, -0.5), keep 2 → (3, 1, 0) / √10
        let r = tpower_refine(&g, &e1, 2, 1, OperatorMode::Uncentered).unwrap();
        let s10 = 10.0_f64.sqrt();
        assert_abs_diff_eq!(r.iterates[1][0], 3.0 / s10, epsilon = 1e-12);
        assert_abs_diff_eq!(r.iterates[1][1], 1.0 / s10, epsilon = 1e-12);
    }

    #[test]
    fn zero_after_threshold_is_an_error() {
        let g = CenteredGamma::new(DMatrix::zeros(3, 3)).unwrap();
        let w0 = v(&[0.0, 1.0, 0.0]);
        assert!(matches!(
            tpower_refine(&g, &w0, 1, 3, OperatorMode::Centered),
            Err(Error::DegenerateIterate { iteration: 1 })
        ));
        // the uncentered operator adds w back in, so it survives
        assert!(tpower_refine(&g, &w0, 1, 3, OperatorMode::Uncentered).is_ok());
    }

    #[test]
    fn rejects_non_unit_start() {
        let g = CenteredGamma::new(DMatrix::identity(2, 2)).unwrap();
        assert!(tpower_refine(&g, &v(&[1.0, 1.0]), 1, 1, OperatorMode::Centered).is_err());
    }
}
