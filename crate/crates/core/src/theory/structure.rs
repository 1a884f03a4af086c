use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{make_profile, ProfileKind, SpikeProfile};

/// `s(p) = (Σ_{i≤p} v_(i)²)⁻¹` for `p = 1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    values: Vec<f64>,
}

impl StructureFunction {
    fn from_sorted_energies(energies: &[f64]) -> Self {
        let mut prefix = 0.0;
        let values = energies
            .iter()
            .map(|w| {
                prefix += w;
                1.0 / prefix
            })
            .collect();
        StructureFunction { values }
    }

    /// Structure function of a raw spike with at most `k` nonzeros.
    ///
    /// The vector does not need to be unit-norm; energies are normalized by
    /// the total.
    pub fn from_vector(v: &[f64], k: usize) -> Result<Self> {
        let nonzeros = v.iter().filter(|x| **x != 0.0).count();
        if nonzeros == 0 {
            return Err(Error::invalid("structure function of a zero vector"));
        }
        if nonzeros > k || k > v.len() {
            return Err(Error::invalid(format!(
                "vector has {nonzeros} nonzeros, not a {k}-sparse spike in R^{}",
                v.len()
            )));
        }
        let mut energies: Vec<f64> = v.iter().map(|x| x * x).collect();
        energies.sort_by(|a, b| b.total_cmp(a));
        energies.truncate(k);
        let total: f64 = energies.iter().sum();
        energies.iter_mut().for_each(|e| *e /= total);
        Ok(Self::from_sorted_energies(&energies))
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// `s(p)` for `1 ≤ p ≤ k`.
    pub fn at(&self, p: usize) -> f64 {
        self.values[p - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `s(k) = 1`, `s` non-increasing, `p·s(p)` non-decreasing, `1 ≤ s(1) ≤ k`.
    pub fn check(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        let k = self.k();
        let fail = |what: &str| Err(Error::invalid(format!("structure function: {what}")));
        if (self.at(k) - 1.0).abs() > TOL {
            return fail("s(k) != 1");
        }
        if self.values.windows(2).any(|w| w[1] > w[0] * (1.0 + TOL)) {
            return fail("s is increasing somewhere");
        }
        let scaled: Vec<f64> = (1..=k).map(|p| p as f64 * self.at(p)).collect();
        if scaled.windows(2).any(|w| w[1] < w[0] * (1.0 - TOL)) {
            return fail("p·s(p) is decreasing somewhere");
        }
        if self.at(1) < 1.0 - TOL || self.at(1) > k as f64 * (1.0 + TOL) {
            return fail("s(1) outside [1, k]");
        }
        Ok(())
    }
}

pub fn structure_function(profile: &SpikeProfile) -> StructureFunction {
    StructureFunction::from_sorted_energies(profile.weights())
}

/// The two sample-complexity functionals and where they are attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityPair {
    /// `max_p p·s(p)²`.
    pub a: f64,
    pub a_argmax: usize,
    /// `min_p max{p²·s(p)², k·s(p)}`.
    pub b: f64,
    pub b_argmin: usize,
}

/// Exhaustive scan over `p = 1..=k`; lowest `p` wins ties.
pub fn complexity_pair(s: &StructureFunction) -> ComplexityPair {
    let k = s.k() as f64;
    let mut pair = ComplexityPair {
        a: f64::NEG_INFINITY,
        a_argmax: 0,
        b: f64::INFINITY,
        b_argmin: 0,
    };
    for (i, &sp) in s.values().iter().enumerate() {
        let p = (i + 1) as f64;
        let a = p * sp * sp;
        if a > pair.a {
            pair.a = a;
            pair.a_argmax = i + 1;
        }
        let b = (p * p * sp * sp).max(k * sp);
        if b < pair.b {
            pair.b = b;
            pair.b_argmin = i + 1;
        }
    }
    pair
}

/// `max_p p·s(p)²` for the energy power law `v_(i)² ∝ i^(−alpha)`.
pub fn power_law_max_ps2(k: usize, alpha: f64) -> Result<f64> {
    let profile = make_profile(&ProfileKind::PowerLawEnergy { alpha }, k)?;
    Ok(complexity_pair(&structure_function(&profile)).a)
}

/// Random strictly positive profile with `k` uniform in `1..=max_k`.
///
/// Weights are `u^γ` with `u ∈ (0, 1]` and a per-profile exponent
/// `γ ∈ [0, 8)`, which spans near-flat to sharply concentrated shapes.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> SpikeProfile {
    let k = rng.random_range(1..=max_k);
    let gamma: f64 = rng.random_range(0.0..8.0);
    let weights: Vec<f64> = (0..k)
        .map(|_| (1.0 - rng.random::<f64>()).powf(gamma))
        .collect();
    SpikeProfile::from_energies(&weights).expect("positive weights always normalize")
}
