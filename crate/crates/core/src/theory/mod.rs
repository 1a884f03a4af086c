//! Evaluation metrics, the structure-function calculus and runtime
//! diagnostics for the perturbation bounds behind SEP.

mod diagnostics;
mod structure;

use std::collections::BTreeSet;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub use diagnostics::{
    dk_alignment_check, dk_sweep, energy_floor_trace, noise_block_scaling, DkEntry, DkReport,
    EnergyFloorRow, DK_SLACK,
};
pub use structure::{
    complexity_pair, power_law_max_ps2, random_profile, structure_function, ComplexityPair,
    StructureFunction,
};

const UNIT_TOL: f64 = 1e-8;

/// `sin∠(u, v)` for unit vectors, sign-invariant and symmetric.
///
/// Computed from the chord `c = min(‖u − v‖, ‖u + v‖) = 2 sin(φ/2)` as
/// `c·sqrt(1 − c²/4)`. The textbook `sqrt(1 − (uᵀv)²)` cannot resolve angles
/// below about 1.5e-8.
pub fn sin_angle(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "sin_angle: lengths {} and {} differ",
            u.len(),
            v.len()
        )));
    }
    if (u.norm() - 1.0).abs() > UNIT_TOL || (v.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::invalid("sin_angle needs unit vectors"));
    }
    let chord = (u - v).norm().min((u + v).norm());
    Ok((chord * (1.0 - 0.25 * chord * chord).max(0.0).sqrt()).min(1.0))
}

/// `|S ∩ S*| / |S*|`.
pub fn support_recall(estimate: &[usize], truth: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("support_recall: true support is empty"));
    }
    let truth: BTreeSet<usize> = truth.iter().copied().collect();
    let hits = estimate
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|i| truth.contains(i))
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn sin_angle_cases() {
        let e1 = v(&[1.0, 0.0]);
        assert_eq!(sin_angle(&e1, &e1).unwrap(), 0.0);
        assert_eq!(sin_angle(&e1, &v(&[0.0, 1.0])).unwrap(), 1.0);
        let h = 0.5_f64.sqrt();
        assert_abs_diff_eq!(sin_angle(&e1, &v(&[h, h])).unwrap(), h, epsilon = 1e-15);
        assert!(sin_angle(&e1, &v(&[1.0, 1.0])).is_err());
        assert!(sin_angle(&e1, &v(&[1.0])).is_err());
    }

    #[test]
    fn recall_cases() {
        assert_eq!(support_recall(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(support_recall(&[4, 5], &[1, 2]).unwrap(), 0.0);
        assert_eq!(support_recall(&[0, 1, 2, 9], &[0, 1, 2, 3]).unwrap(), 0.75);
        assert!(support_recall(&[1], &[]).is_err());
    }
}
