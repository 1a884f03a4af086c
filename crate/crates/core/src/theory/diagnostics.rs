//! Runtime checks for the perturbation statements behind SEP.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::structure::{random_profile, StructureFunction};
use crate::error::{Error, Result};
use crate::estimators::SepTrace;
use crate::linalg::{principal_submatrix, sym_spectral_norm, top_eigvec, EIG_MAX_ITER, EIG_TOL};
use crate::model::{centered_gamma, draw_samples, embed_random, CenteredGamma, SpikedModel};

/// Slack on deterministic inequalities.
pub const DK_SLACK: f64 = 1e-10;

/// One evaluation of the support-alignment inequality
/// `|⟨v, ê_S⟩| ≥ ‖v_S‖·sqrt((1 − ‖W_SS‖² / (θ²‖v_S‖⁴))₊)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DkEntry {
    /// `|⟨v, ê_S⟩|`.
    pub lhs: f64,
    /// `‖v_S‖·sqrt((1 − ‖W_SS‖²/(θ²‖v_S‖⁴))₊)`.
    pub rhs: f64,
    pub satisfied: bool,
    /// `‖v_S‖₂`.
    pub captured_norm: f64,
    /// `‖W_SS‖₂`.
    pub noise_norm: f64,
    /// Top eigenvalue of `Γ̂_SS`.
    pub top_eigenvalue: f64,
    /// `sin∠(ê_S, v_S/‖v_S‖)`.
    pub restricted_sin: f64,
    /// `‖W_SS‖ / λ_max(Γ̂_SS)`, infinite when that eigenvalue is not positive.
    ///
    /// Projecting `Γ̂_SS·ê = λ·ê` onto the complement of `v_S` shows this
    /// bound always holds; the `θ‖v_S‖²` denominator above does not.
    pub perturbed_bound: f64,
    pub perturbed_satisfied: bool,
}

pub fn dk_alignment_check(
    gamma: &CenteredGamma,
    model: &SpikedModel,
    support: &[usize],
) -> Result<DkEntry> {
    if support.is_empty() {
        return Err(Error::invalid("alignment check needs a non-empty support"));
    }
    if gamma.n() != model.n() || support.iter().any(|&i| i >= gamma.n()) {
        return Err(Error::invalid("alignment check: dimension mismatch"));
    }
    let block = principal_submatrix(gamma.matrix(), support);
    let v_s = DVector::from_iterator(support.len(), support.iter().map(|&i| model.spike()[i]));
    let captured_norm = v_s.norm();
    if !(captured_norm > 0.0) {
        return Err(Error::invalid("spike has no energy on the support"));
    }
    let theta = model.theta();
    let noise = &block - &v_s * v_s.transpose() * theta;
    let noise_norm = sym_spectral_norm(&noise)?;
    let (top_eigenvalue, e_s) = top_eigvec(&block, EIG_TOL, EIG_MAX_ITER)?;

    let lhs = v_s.dot(&e_s).abs();
    let signal = theta * captured_norm * captured_norm;
    let rhs = if signal > 0.0 {
        let ratio = (noise_norm / signal).powi(2);
        captured_norm * (1.0 - ratio).max(0.0).sqrt()
    } else {
        0.0
    };
    let cos = (lhs / captured_norm).min(1.0);
    let restricted_sin = (1.0 - cos * cos).max(0.0).sqrt();
    let perturbed_bound = if top_eigenvalue > 0.0 {
        noise_norm / top_eigenvalue
    } else {
        f64::INFINITY
    };
    Ok(DkEntry {
        lhs,
        rhs,
        satisfied: lhs >= rhs - DK_SLACK,
        captured_norm,
        noise_norm,
        top_eigenvalue,
        restricted_sin,
        perturbed_bound,
        perturbed_satisfied: restricted_sin <= perturbed_bound + DK_SLACK,
    })
}

/// Instances of the alignment check together with the sample size used.
#[derive(Debug, Clone, Default)]
pub struct DkReport {
    pub entries: Vec<(usize, DkEntry)>,
}

impl DkReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|(_, e)| !e.satisfied).count()
    }

    pub fn perturbed_violations(&self) -> usize {
        self.entries
            .iter()
            .filter(|(_, e)| !e.perturbed_satisfied)
            .count()
    }
}

/// `instances` random checks on `S = S*`, cycling through `m_values`.
///
/// Each instance draws a random positive profile of size `k`, a random
/// placement and signs, and a fresh sample set.
pub fn dk_sweep(
    instances: usize,
    n: usize,
    k: usize,
    theta: f64,
    m_values: &[usize],
    seed: u64,
) -> Result<DkReport> {
    if m_values.is_empty() {
        return Err(Error::invalid("dk_sweep needs at least one m"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(instances);
    for i in 0..instances {
        let m = m_values[i % m_values.len()];
        let profile = loop {
            let p = random_profile(&mut rng, k);
            if p.k() == k {
                break p;
            }
        };
        let model = embed_random(&profile, n, theta, true, &mut rng)?;
        let gamma = centered_gamma(&draw_samples(&model, m, &mut rng)?)?;
        entries.push((m, dk_alignment_check(&gamma, &model, model.support())?));
    }
    Ok(DkReport { entries })
}

/// Median `‖W_SS‖₂` over `n_subsets` uniform random supports of each size.
///
/// Every subset gets its own fresh sample set. Only the coordinates in `S`
/// are drawn: their joint law is `N(0, I + θ·v_S v_Sᵀ)`, which is exactly the
/// marginal of the full model.
pub fn noise_block_scaling<R: Rng + ?Sized>(
    model: &SpikedModel,
    m: usize,
    p_values: &[usize],
    n_subsets: usize,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if n_subsets < 30 {
        return Err(Error::invalid("noise_block_scaling needs at least 30 subsets"));
    }
    if m == 0 {
        return Err(Error::invalid("need m >= 1 samples"));
    }
    let n = model.n();
    let theta = model.theta();
    let scale = theta.sqrt();
    let mut table = Vec::with_capacity(p_values.len());
    for &p in p_values {
        if p == 0 || p > n {
            return Err(Error::invalid(format!("block size {p} must lie in 1..={n}")));
        }
        let mut norms = Vec::with_capacity(n_subsets);
        for _ in 0..n_subsets {
            let subset = sample(rng, n, p).into_vec();
            let v_s: Vec<f64> = subset.iter().map(|&i| model.spike()[i]).collect();
            let mut x = DMatrix::zeros(m, p);
            for r in 0..m {
                for c in 0..p {
                    x[(r, c)] = rng.sample(StandardNormal);
                }
                let g: f64 = rng.sample(StandardNormal);
                for (c, vc) in v_s.iter().enumerate() {
                    x[(r, c)] += scale * g * vc;
                }
            }
            let mut w = x.transpose() * &x / m as f64;
            for i in 0..p {
                for j in 0..p {
                    w[(i, j)] -= theta * v_s[i] * v_s[j] + if i == j { 1.0 } else { 0.0 };
                }
            }
            let w = (&w + w.transpose()) * 0.5;
            norms.push(sym_spectral_norm(&w)?);
        }
        table.push((p, median(&mut norms)));
    }
    Ok(table)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Captured spike energy per SEP round against the best achievable `1/s(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFloorRow {
    pub p: usize,
    /// `‖v_{S^(p)}‖²`.
    pub captured: f64,
    /// `Σ_{i≤p} v_(i)² = 1/s(p)`.
    pub target: f64,
}

impl EnergyFloorRow {
    /// Empirical energy fraction at this round.
    pub fn ratio(&self) -> f64 {
        self.captured / self.target
    }
}

pub fn energy_floor_trace(
    trace: Option<&SepTrace>,
    model: &SpikedModel,
) -> Result<Vec<EnergyFloorRow>> {
    let trace = trace.ok_or_else(|| Error::invalid("SEP trace was not recorded"))?;
    let s = StructureFunction::from_vector(model.spike().as_slice(), model.k())?;
    trace
        .rounds
        .iter()
        .map(|round| {
            if round.p == 0 || round.p > s.k() {
                return Err(Error::invalid(format!("trace round {} out of range", round.p)));
            }
            Ok(EnergyFloorRow {
                p: round.p,
                captured: model.energy_on(&round.support),
                target: 1.0 / s.at(round.p),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::sep_estimate;
    use crate::model::{embed_spike, make_profile, population_gamma, ProfileKind};
    use crate::theory::structure_function;
    use approx::assert_abs_diff_eq;

    fn model(seed: u64) -> SpikedModel {
        let profile = make_profile(&ProfileKind::PowerLawEnergy { alpha: 1.0 }, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        embed_random(&profile, 30, 3.0, true, &mut rng).unwrap()
    }

    #[test]
    fn population_gamma_is_tight() {
        let model = model(1);
        let gamma = population_gamma(&model);
        let subset: Vec<usize> = model.support()[..3].to_vec();
        let e = dk_alignment_check(&gamma, &model, &subset).unwrap();
        assert_abs_diff_eq!(e.noise_norm, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.lhs, e.captured_norm, epsilon = 1e-12);
        assert_abs_diff_eq!(e.rhs, e.captured_norm, epsilon = 1e-12);
        assert!(e.satisfied && e.perturbed_satisfied);
    }

    #[test]
    fn large_noise_clamps_to_zero() {
        let model = model(2);
        let mut g = population_gamma(&model).matrix().clone();
        // add a big isotropic block so ‖W_SS‖ = 10 > θ‖v_S‖²
        for i in 0..30 {
            g[(i, i)] += 10.0;
        }
        let gamma = CenteredGamma::new(g).unwrap();
        let e = dk_alignment_check(&gamma, &model, model.support()).unwrap();
        assert_eq!(e.rhs, 0.0);
        assert!(e.satisfied);
    }

    #[test]
    fn rejects_empty_or_energyless_support() {
        let model = model(3);
        let gamma = population_gamma(&model);
        assert!(dk_alignment_check(&gamma, &model, &[]).is_err());
        let off: Vec<usize> = (0..30).filter(|i| !model.support().contains(i)).take(2).collect();
        assert!(dk_alignment_check(&gamma, &model, &off).is_err());
    }

    #[test]
    fn perturbed_bound_never_fails() {
        let report = dk_sweep(400, 30, 5, 3.0, &[20, 200], 77).unwrap();
        assert_eq!(report.perturbed_violations(), 0);
    }

    #[test]
    fn noise_scaling_isotropic_is_positive() {
        let profile = make_profile(&ProfileKind::Flat, 3).unwrap();
        let model = embed_spike(&profile, 40, &[0, 1, 2], &[1.0, 1.0, 1.0], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = noise_block_scaling(&model, 100, &[1, 5], 30, &mut rng).unwrap();
        assert!(table.iter().all(|(_, med)| med.is_finite() && *med > 0.0));
        assert!(noise_block_scaling(&model, 100, &[1], 29, &mut rng).is_err());
    }

    #[test]
    fn energy_floor_on_population_is_one() {
        let model = model(9);
        let gamma = population_gamma(&model);
        let r = sep_estimate(&gamma, 5, true).unwrap();
        let rows = energy_floor_trace(r.trace.as_ref(), &model).unwrap();
        assert_eq!(rows.len(), 5);
        for row in &rows {
            assert_abs_diff_eq!(row.ratio(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(rows[4].target, 1.0, epsilon = 1e-12);
        assert!(energy_floor_trace(None, &model).is_err());
    }

    #[test]
    fn wrong_support_never_beats_target() {
        let model = model(10);
        let s = structure_function(&make_profile(&ProfileKind::PowerLawEnergy { alpha: 1.0 }, 5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in 1..=5 {
            for _ in 0..50 {
                let set = sample(&mut rng, 30, p).into_vec();
                assert!(model.energy_on(&set) <= 1.0 / s.at(p) + 1e-12);
            }
        }
    }
}
