//! Batch runners behind `sepca diagnostics`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ProfileSpec;
use super::format::format_sig9;
use super::records::csv_writer;
use crate::error::Result;
use crate::model::{embed_random, make_profile, ProfileKind};
use crate::theory::{
    complexity_pair, dk_sweep, noise_block_scaling, random_profile, structure_function,
    ComplexityPair, DkReport,
};

/// Relative slack on `A ≤ B`.
pub const DOMINANCE_SLACK: f64 = 1e-12;

pub const DK_INSTANCES: usize = 1_000;
pub const DK_N: usize = 30;
pub const DK_K: usize = 5;
pub const DK_THETA: f64 = 3.0;
pub const DK_M_VALUES: [usize; 2] = [20, 200];

/// 1,000 alignment checks at `n = 30, k = 5, θ = 3`, half at `m = 20` and half at `m = 200`.
pub fn dk_report(seed: u64) -> Result<DkReport> {
    dk_sweep(DK_INSTANCES, DK_N, DK_K, DK_THETA, &DK_M_VALUES, seed)
}

pub fn write_dk_csv<W: Write>(report: &DkReport, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record([
        "m",
        "lhs",
        "rhs",
        "satisfied",
        "captured_norm",
        "noise_norm",
        "top_eigenvalue",
        "restricted_sin",
        "perturbed_bound",
        "perturbed_satisfied",
    ])?;
    for (m, e) in &report.entries {
        w.write_record([
            m.to_string(),
            format_sig9(e.lhs),
            format_sig9(e.rhs),
            e.satisfied.to_string(),
            format_sig9(e.captured_norm),
            format_sig9(e.noise_norm),
            format_sig9(e.top_eigenvalue),
            format_sig9(e.restricted_sin),
            format_sig9(e.perturbed_bound),
            e.perturbed_satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const NOISE_N: usize = 200;
pub const NOISE_K: usize = 20;
pub const NOISE_THETA: f64 = 3.0;
pub const NOISE_SUBSETS: usize = 100;
pub const NOISE_FIXED_M: usize = 500;
pub const NOISE_P_VALUES: [usize; 3] = [10, 20, 40];
pub const NOISE_FIXED_P: usize = 20;
pub const NOISE_M_VALUES: [usize; 3] = [200, 500, 800];

/// Median `‖W_SS‖₂` along a block-size sweep and a sample-size sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseScaling {
    /// `(p, median)` at `m = NOISE_FIXED_M`.
    pub vary_p: Vec<(usize, f64)>,
    /// `(m, median)` at `p = NOISE_FIXED_P`.
    pub vary_m: Vec<(usize, f64)>,
}

impl NoiseScaling {
    pub fn median_at_p(&self, p: usize) -> Option<f64> {
        self.vary_p.iter().find(|(q, _)| *q == p).map(|x| x.1)
    }

    pub fn median_at_m(&self, m: usize) -> Option<f64> {
        self.vary_m.iter().find(|(q, _)| *q == m).map(|x| x.1)
    }
}

/// Flat spike with `n = 200, k = 20, θ = 3`.
pub fn noise_scaling(seed: u64) -> Result<NoiseScaling> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = make_profile(&ProfileKind::Flat, NOISE_K)?;
    let model = embed_random(&profile, NOISE_N, NOISE_THETA, true, &mut rng)?;
    let vary_p = noise_block_scaling(&model, NOISE_FIXED_M, &NOISE_P_VALUES, NOISE_SUBSETS, &mut rng)?;
    let vary_m = NOISE_M_VALUES
        .iter()
        .map(|&m| {
            noise_block_scaling(&model, m, &[NOISE_FIXED_P], NOISE_SUBSETS, &mut rng)
                .map(|t| (m, t[0].1))
        })
        .collect::<Result<_>>()?;
    Ok(NoiseScaling { vary_p, vary_m })
}

pub fn write_noise_csv<W: Write>(table: &NoiseScaling, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["sweep", "n", "theta", "m", "p", "subsets", "median_norm"])?;
    let fixed = [
        NOISE_N.to_string(),
        format_sig9(NOISE_THETA),
    ];
    for (p, med) in &table.vary_p {
        w.write_record([
            "vary-p".to_string(),
            fixed[0].clone(),
            fixed[1].clone(),
            NOISE_FIXED_M.to_string(),
            p.to_string(),
            NOISE_SUBSETS.to_string(),
            format_sig9(*med),
        ])?;
    }
    for (m, med) in &table.vary_m {
        w.write_record([
            "vary-m".to_string(),
            fixed[0].clone(),
            fixed[1].clone(),
            m.to_string(),
            NOISE_FIXED_P.to_string(),
            NOISE_SUBSETS.to_string(),
            format_sig9(*med),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const COMPLEXITY_RANDOM_PROFILES: usize = 10_000;
pub const COMPLEXITY_MAX_K: usize = 64;
pub const COMPLEXITY_NAMED_K: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub source: String,
    pub k: usize,
    pub pair: ComplexityPair,
    pub satisfied: bool,
}

/// `A ≤ B` over random profiles plus the three simulation profiles at `k = 40`.
pub fn complexity_report(seed: u64) -> Result<Vec<ComplexityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(COMPLEXITY_RANDOM_PROFILES + 3);
    let mut push = |source: String, profile: &crate::model::SpikeProfile| {
        let pair = complexity_pair(&structure_function(profile));
        rows.push(ComplexityRow {
            source,
            k: profile.k(),
            satisfied: pair.a <= pair.b * (1.0 + DOMINANCE_SLACK),
            pair,
        });
    };
    for i in 0..COMPLEXITY_RANDOM_PROFILES {
        let profile = random_profile(&mut rng, COMPLEXITY_MAX_K);
        push(format!("random-{i}"), &profile);
    }
    for spec in ProfileSpec::simulation_profiles() {
        let profile = make_profile(&spec.kind, COMPLEXITY_NAMED_K)?;
        push(spec.name, &profile);
    }
    Ok(rows)
}

pub fn write_complexity_csv<W: Write>(rows: &[ComplexityRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["source", "k", "A", "A_argmax", "B", "B_argmin", "satisfied"])?;
    for r in rows {
        w.write_record([
            r.source.clone(),
            r.k.to_string(),
            format_sig9(r.pair.a),
            r.pair.a_argmax.to_string(),
            format_sig9(r.pair.b),
            r.pair.b_argmin.to_string(),
            r.satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
