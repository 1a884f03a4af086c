use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Algorithm, OperatorMode};
use crate::model::{make_profile, ProfileKind};

/// A named profile family; the name labels CSV rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfileSpec", into = "RawProfileSpec")]
pub struct ProfileSpec {
    pub name: String,
    pub kind: ProfileKind,
}

#[derive(Serialize, Deserialize)]
struct RawProfileSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(flatten)]
    kind: ProfileKind,
}

impl TryFrom<RawProfileSpec> for ProfileSpec {
    type Error = String;

    fn try_from(raw: RawProfileSpec) -> std::result::Result<Self, String> {
        let name = raw
            .name
            .unwrap_or_else(|| default_name(&raw.kind).to_string());
        if name.is_empty() || name.contains([',', '"', '\n', '\r']) {
            return Err(format!("profile name {name:?} is not a plain CSV field"));
        }
        Ok(ProfileSpec {
            name,
            kind: raw.kind,
        })
    }
}

impl From<ProfileSpec> for RawProfileSpec {
    fn from(spec: ProfileSpec) -> Self {
        RawProfileSpec {
            name: Some(spec.name),
            kind: spec.kind,
        }
    }
}

fn default_name(kind: &ProfileKind) -> &'static str {
    match kind {
        ProfileKind::Flat => "flat",
        ProfileKind::PowerLawAmplitude { .. } => "power-law",
        ProfileKind::ExponentialAmplitude { .. } => "exponential",
        ProfileKind::PowerLawEnergy { .. } => "power-law-energy",
        ProfileKind::Custom { .. } => "custom",
    }
}

impl ProfileSpec {
    pub fn new(name: impl Into<String>, kind: ProfileKind) -> Self {
        ProfileSpec {
            name: name.into(),
            kind,
        }
    }

    /// Flat, power-law `j^(-1/2) + 0.1` and exponential `e^(-j) + 0.1` amplitudes.
    pub fn simulation_profiles() -> [ProfileSpec; 3] {
        [
            ProfileSpec::new("flat", ProfileKind::Flat),
            ProfileSpec::new(
                "power-law",
                ProfileKind::PowerLawAmplitude {
                    alpha: 0.5,
                    offset: 0.1,
                },
            ),
            ProfileSpec::new(
                "exponential",
                ProfileKind::ExponentialAmplitude {
                    rate: 1.0,
                    offset: 0.1,
                },
            ),
        ]
    }
}

/// Worker count: a fixed number or one per available core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl Threads {
    pub fn resolve(self) -> usize {
        match self {
            Threads::Auto => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            Threads::Count(n) => n,
        }
    }
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(0) => Err(serde::de::Error::custom("threads must be >= 1")),
            Repr::Count(n) => Ok(Threads::Count(n)),
            Repr::Word(w) if w == "auto" => Ok(Threads::Auto),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "threads must be a positive integer or \"auto\", got {w:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    pub enabled: bool,
    #[serde(rename = "T")]
    pub iterations: usize,
    /// Defaults to `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    #[serde(default = "centered")]
    pub operator: OperatorMode,
}

fn centered() -> OperatorMode {
    OperatorMode::Centered
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            enabled: false,
            iterations: 0,
            k_prime: None,
            operator: OperatorMode::Centered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub theta: f64,
    pub m_values: Vec<usize>,
    pub profiles: Vec<ProfileSpec>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    #[serde(default)]
    pub refine: RefineConfig,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: Threads,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
    /// Replace `Γ̂` by its population value `θ·vvᵀ` (the `m → ∞` limit).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub population: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn k_prime(&self) -> usize {
        self.refine.k_prime.unwrap_or(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        check_model(self.n, self.k, self.theta)?;
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("m_values must be non-empty and every m >= 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must be non-empty".into());
        }
        if self.algorithms.iter().collect::<HashSet<_>>().len() != self.algorithms.len() {
            return bad("algorithms contains duplicates".into());
        }
        if self.m_values.iter().collect::<HashSet<_>>().len() != self.m_values.len() {
            return bad("m_values contains duplicates".into());
        }
        check_profiles(&self.profiles, self.k)?;
        if self.refine.enabled {
            check_k_prime(self.k_prime(), self.n)?;
        }
        if let Threads::Count(0) = self.threads {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }

    /// The shipped desk-scale sweep.
    pub fn desk_default() -> Self {
        ExperimentConfig {
            n: 300,
            k: 20,
            theta: 3.0,
            m_values: (100..=600).step_by(50).collect(),
            profiles: ProfileSpec::simulation_profiles().to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            trials: 200,
            refine: RefineConfig {
                enabled: true,
                iterations: 10,
                k_prime: None,
                operator: OperatorMode::Centered,
            },
            master_seed: 20_240_601,
            threads: Threads::Auto,
            out_path: None,
            population: false,
        }
    }
}

fn check_model(n: usize, k: usize, theta: f64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Config("theta must be finite and nonnegative".into()));
    }
    Ok(())
}

fn check_profiles(profiles: &[ProfileSpec], k: usize) -> Result<()> {
    if profiles.is_empty() {
        return Err(Error::Config("profiles must be non-empty".into()));
    }
    let mut names = HashSet::new();
    for spec in profiles {
        if !names.insert(spec.name.as_str()) {
            return Err(Error::Config(format!("duplicate profile name {:?}", spec.name)));
        }
        make_profile(&spec.kind, k)
            .map_err(|e| Error::Config(format!("profile {:?}: {e}", spec.name)))?;
    }
    Ok(())
}

fn check_k_prime(k_prime: usize, n: usize) -> Result<()> {
    if k_prime == 0 || k_prime > n {
        return Err(Error::Config(format!("k_prime = {k_prime} must lie in 1..={n}")));
    }
    Ok(())
}

/// Refinement-trajectory study: one initializer, both operators, every iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineStudyConfig {
    pub n: usize,
    pub k: usize,
    pub theta: f64,
    pub m: usize,
    pub profile: ProfileSpec,
    #[serde(default = "dt")]
    pub initializer: Algorithm,
    pub trials: usize,
    #[serde(rename = "T")]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<usize>,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: Threads,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

fn dt() -> Algorithm {
    Algorithm::Dt
}

impl RefineStudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RefineStudyConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime.unwrap_or(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        check_model(self.n, self.k, self.theta)?;
        if self.m == 0 || self.trials == 0 {
            return Err(Error::Config("m and trials must be >= 1".into()));
        }
        check_profiles(std::slice::from_ref(&self.profile), self.k)?;
        check_k_prime(self.k_prime(), self.n)?;
        if let Threads::Count(0) = self.threads {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        Ok(())
    }

    /// Desk-scale study: flat profile, DT start, `m = 400`, `T = 100`.
    pub fn desk_default() -> Self {
        RefineStudyConfig {
            n: 300,
            k: 20,
            theta: 3.0,
            m: 400,
            profile: ProfileSpec::new("flat", ProfileKind::Flat),
            initializer: Algorithm::Dt,
            trials: 200,
            iterations: 100,
            k_prime: None,
            master_seed: 20_240_602,
            threads: Threads::Auto,
            out_path: None,
        }
    }
}
