//! Spike profiles, the spiked covariance model and sampling from it.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROFILE_SUM_TOL: f64 = 1e-12;

/// Shape family used by [`make_profile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileKind {
    /// Equal energy on every support coordinate.
    Flat,
    /// Amplitudes `j^(-alpha) + offset`, energies their squares.
    PowerLawAmplitude { alpha: f64, offset: f64 },
    /// Amplitudes `exp(-rate * j) + offset`, energies their squares.
    ExponentialAmplitude { rate: f64, offset: f64 },
    /// Energies `j^(-alpha)` directly.
    PowerLawEnergy { alpha: f64 },
    /// Arbitrary nonnegative energies; sorted and normalized on construction.
    Custom { weights: Vec<f64> },
}

/// Sorted squared magnitudes of the nonzero spike entries, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeProfile {
    weights: Vec<f64>,
}

impl SpikeProfile {
    /// Normalizes and sorts arbitrary nonnegative energies.
    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::invalid("profile needs k >= 1"));
        }
        if energies.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("profile weights must be finite and nonnegative"));
        }
        let total: f64 = energies.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("profile weights must sum to a positive value"));
        }
        let mut weights: Vec<f64> = energies.iter().map(|w| w / total).collect();
        weights.sort_by(|a, b| b.total_cmp(a));
        let profile = SpikeProfile { weights };
        profile.check()?;
        Ok(profile)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Verifies nonnegativity, sortedness and unit sum.
    pub fn check(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > PROFILE_SUM_TOL {
            return Err(Error::invalid(format!("profile sums to {sum}, not 1")));
        }
        if self.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::invalid("negative profile weight"));
        }
        if self.weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("profile weights are not sorted"));
        }
        Ok(())
    }
}

/// Builds a normalized, sorted profile of the requested family.
pub fn make_profile(kind: &ProfileKind, k: usize) -> Result<SpikeProfile> {
    if k == 0 {
        return Err(Error::invalid("profile needs k >= 1"));
    }
    let amplitude_energies = |amp: &dyn Fn(f64) -> f64, offset: f64| -> Result<Vec<f64>> {
        if !(offset >= 0.0) {
            return Err(Error::invalid("profile offset must be nonnegative"));
        }
        Ok((1..=k)
            .map(|j| {
                let a = amp(j as f64) + offset;
                a * a
            })
            .collect())
    };
    let energies = match kind {
        ProfileKind::Flat => vec![1.0; k],
        ProfileKind::PowerLawAmplitude { alpha, offset } => {
            check_exponent(*alpha, "alpha")?;
            amplitude_energies(&|j| j.powf(-alpha), *offset)?
        }
        ProfileKind::ExponentialAmplitude { rate, offset } => {
            check_exponent(*rate, "rate")?;
            amplitude_energies(&|j| (-rate * j).exp(), *offset)?
        }
        ProfileKind::PowerLawEnergy { alpha } => {
            check_exponent(*alpha, "alpha")?;
            (1..=k).map(|j| (j as f64).powf(-alpha)).collect()
        }
        ProfileKind::Custom { weights } => {
            if weights.len() != k {
                return Err(Error::invalid(format!(
                    "custom profile has {} weights but k = {k}",
                    weights.len()
                )));
            }
            weights.clone()
        }
    };
    SpikeProfile::from_energies(&energies)
}

fn check_exponent(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("profile {name} must be finite and nonnegative")))
    }
}

/// A unit k-sparse spike of strength `theta` embedded in `R^n`.
#[derive(Debug, Clone)]
pub struct SpikedModel {
    theta: f64,
    spike: DVector<f64>,
    support: Vec<usize>,
}

impl SpikedModel {
    pub fn n(&self) -> usize {
        self.spike.len()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn spike(&self) -> &DVector<f64> {
        &self.spike
    }

    /// True support, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `‖v_S‖₂²`, the spike energy captured by an index set.
    pub fn energy_on(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.spike[i] * self.spike[i]).sum()
    }

    /// Same model with a different spike strength.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(SpikedModel {
            theta,
            ..self.clone()
        })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("theta must be finite and nonnegative"))
    }
}

/// Places the i-th largest profile weight at `support[i]` with sign `signs[i]`.
pub fn embed_spike(
    profile: &SpikeProfile,
    n: usize,
    support: &[usize],
    signs: &[f64],
    theta: f64,
) -> Result<SpikedModel> {
    let k = profile.k();
    check_theta(theta)?;
    if k > n {
        return Err(Error::invalid(format!("sparsity k = {k} exceeds n = {n}")));
    }
    if support.len() != k || signs.len() != k {
        return Err(Error::invalid(format!(
            "support ({}) and signs ({}) must both have length k = {k}",
            support.len(),
            signs.len()
        )));
    }
    if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
        return Err(Error::invalid("signs must be +1 or -1"));
    }
    let mut seen = vec![false; n];
    for &i in support {
        if i >= n {
            return Err(Error::invalid(format!("support index {i} out of range for n = {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("duplicate support index {i}")));
        }
    }

    let mut spike = DVector::zeros(n);
    for ((&i, &s), &w) in support.iter().zip(signs).zip(profile.weights()) {
        spike[i] = s * w.sqrt();
    }
    // weights sum to 1 only up to rounding; renormalize so ‖v‖ = 1 to the last ulp we can get
    let norm = spike.norm();
    spike /= norm;
    let mut support = support.to_vec();
    support.sort_unstable();
    Ok(SpikedModel {
        theta,
        spike,
        support,
    })
}

/// Embeds with a uniformly random k-subset as support.
///
/// Signs are all `+1` unless `random_signs` is set, in which case each is a
/// fair coin flip drawn after the support.
pub fn embed_random<R: Rng + ?Sized>(
    profile: &SpikeProfile,
    n: usize,
    theta: f64,
    random_signs: bool,
    rng: &mut R,
) -> Result<SpikedModel> {
    let k = profile.k();
    if k > n {
        return Err(Error::invalid(format!("sparsity k = {k} exceeds n = {n}")));
    }
    let support = sample(rng, n, k).into_vec();
    let signs: Vec<f64> = if random_signs {
        (0..k)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()
    } else {
        vec![1.0; k]
    };
    embed_spike(profile, n, &support, &signs, theta)
}

/// `m` i.i.d. draws, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: DMatrix<f64>,
}

impl SampleSet {
    pub fn from_rows(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("sample set must be non-empty"));
        }
        Ok(SampleSet { data })
    }

    pub fn m(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Draws `x = z + √θ·g·v` with `z ~ N(0, I)` and `g ~ N(0, 1)` per row.
pub fn draw_samples<R: Rng + ?Sized>(
    model: &SpikedModel,
    m: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::invalid("need m >= 1 samples"));
    }
    let n = model.n();
    let scale = model.theta.sqrt();
    let mut data = DMatrix::zeros(m, n);
    let mut row = vec![0.0; n];
    for r in 0..m {
        for x in row.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let g: f64 = rng.sample(StandardNormal);
        for &i in &model.support {
            row[i] += scale * g * model.spike[i];
        }
        for (c, x) in row.iter().enumerate() {
            data[(r, c)] = *x;
        }
    }
    Ok(SampleSet { data })
}

/// Symmetric `n × n` operator `Γ̂`: the sample covariance minus the identity,
/// or its noiseless surrogate `θ·vvᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGamma {
    matrix: DMatrix<f64>,
}

impl CenteredGamma {
    /// Wraps a matrix, requiring exact symmetry and finite entries.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::invalid("gamma must be a non-empty square matrix"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        for j in 0..n {
            for i in 0..j {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::invalid(format!("gamma not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CenteredGamma { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    /// `c · Γ̂`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        CenteredGamma::new(&self.matrix * c)
    }

    /// Noise part `W = Γ̂ − θ·vvᵀ`.
    pub fn noise(&self, model: &SpikedModel) -> DMatrix<f64> {
        let v = model.spike();
        &self.matrix - v * v.transpose() * model.theta()
    }
}

/// `Γ̂ = (1/m)·Σ xᵢxᵢᵀ − I`, upper triangle computed and mirrored.
pub fn centered_gamma(samples: &SampleSet) -> Result<CenteredGamma> {
    let m = samples.m();
    if m == 0 {
        return Err(Error::invalid("empty sample set"));
    }
    let x = &samples.data;
    let mut g = x.transpose() * x;
    let n = g.nrows();
    let inv_m = 1.0 / m as f64;
    for j in 0..n {
        for i in 0..=j {
            let mut val = g[(i, j)] * inv_m;
            if i == j {
                val -= 1.0;
            }
            g[(i, j)] = val;
            g[(j, i)] = val;
        }
    }
    CenteredGamma::new(g)
}

/// `θ·vvᵀ`, the population value of `Γ̂`.
pub fn population_gamma(model: &SpikedModel) -> CenteredGamma {
    let n = model.n();
    let v = &model.spike;
    let mut g = DMatrix::zeros(n, n);
    for &j in &model.support {
        for &i in &model.support {
            if i <= j {
                let val = model.theta * v[i] * v[j];
                g[(i, j)] = val;
                g[(j, i)] = val;
            }
        }
    }
    CenteredGamma { matrix: g }
}
