use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::records::{Stage, Status, TrialRecord};
use super::seed::trial_seed;
use crate::error::{Error, Result};
use crate::estimators::{tpower_refine, EstimationResult};
use crate::model::{
    centered_gamma, draw_samples, embed_random, make_profile, population_gamma, CenteredGamma,
    SpikeProfile, SpikedModel,
};
use crate::theory::{sin_angle, support_recall};

/// Whether `wall_ms` holds measured time or a constant zero.
///
/// Timing is the only nondeterministic column; turn it off for byte-exact
/// reproducibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    On,
    Off,
}

/// (profile index, m index, algorithm index, trial, stage).
type RowKey = (usize, usize, usize, usize, Stage);

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_experiment_with(config, Timing::On)
}

/// Runs every `(profile, m, trial)` cell and returns canonically ordered rows.
///
/// Rows are sorted by profile (config order), `m` (config order), algorithm
/// (config order), trial and stage. Failed algorithm runs become
/// `status = failed` rows; they never abort the sweep.
pub fn run_experiment_with(config: &ExperimentConfig, timing: Timing) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let profiles: Vec<SpikeProfile> = config
        .profiles
        .iter()
        .map(|spec| make_profile(&spec.kind, config.k))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..profiles.len())
        .flat_map(|p| {
            (0..config.m_values.len())
                .flat_map(move |mi| (0..config.trials).map(move |t| (p, mi, t)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.resolve())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_cell: Vec<Vec<(usize, TrialRecord)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, mi, t)| run_cell(config, &profiles[p], p, config.m_values[mi], t, timing))
            .collect::<Result<_>>()
    })?;

    // cells are generated in (profile, m, trial) order; regroup by algorithm
    let mut keyed: Vec<(RowKey, TrialRecord)> = Vec::new();
    for (cell, rows) in cells.iter().zip(per_cell) {
        let (p, mi, t) = *cell;
        for (ai, row) in rows {
            keyed.push(((p, mi, ai, t, row.stage), row));
        }
    }
    keyed.sort_by_key(|entry| entry.0);
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}

fn run_cell(
    config: &ExperimentConfig,
    profile: &SpikeProfile,
    profile_index: usize,
    m: usize,
    trial: usize,
    timing: Timing,
) -> Result<Vec<(usize, TrialRecord)>> {
    let seed = trial_seed(config.master_seed, profile_index, m, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = embed_random(profile, config.n, config.theta, true, &mut rng)?;
    let gamma = if config.population {
        population_gamma(&model)
    } else {
        centered_gamma(&draw_samples(&model, m, &mut rng)?)?
    };

    let base = TrialRecord {
        profile: config.profiles[profile_index].name.clone(),
        algorithm: String::new(),
        n: config.n,
        k: config.k,
        m,
        theta: config.theta,
        trial,
        seed,
        stage: Stage::Pre,
        sin_error: None,
        recall: None,
        refine_t: 0,
        operator: "none".into(),
        wall_ms: 0.0,
        status: Status::Failed,
    };

    let mut rows = Vec::new();
    for (ai, &algorithm) in config.algorithms.iter().enumerate() {
        let clock = Instant::now();
        let estimate = algorithm.estimate(&gamma, config.k);
        let pre_ms = elapsed_ms(clock, timing);
        let mut pre = TrialRecord {
            algorithm: algorithm.as_str().to_string(),
            wall_ms: pre_ms,
            ..base.clone()
        };
        if let Ok(est) = &estimate {
            fill_metrics(&mut pre, &est.v_hat, &est.support, &model);
        }
        rows.push((ai, pre));

        if config.refine.enabled {
            let mut post = TrialRecord {
                algorithm: algorithm.as_str().to_string(),
                stage: Stage::Post,
                refine_t: config.refine.iterations,
                operator: config.refine.operator.as_str().to_string(),
                ..base.clone()
            };
            if let Ok(est) = &estimate {
                post.wall_ms = refine_into(&mut post, config, &gamma, est, &model, timing);
            }
            rows.push((ai, post));
        }
    }
    Ok(rows)
}

fn refine_into(
    row: &mut TrialRecord,
    config: &ExperimentConfig,
    gamma: &CenteredGamma,
    est: &EstimationResult,
    model: &SpikedModel,
    timing: Timing,
) -> f64 {
    let clock = Instant::now();
    let refined = tpower_refine(
        gamma,
        &est.v_hat,
        config.k_prime(),
        config.refine.iterations,
        config.refine.operator,
    );
    let ms = elapsed_ms(clock, timing);
    if let Ok(r) = refined {
        fill_metrics(row, r.last(), &r.support(), model);
    }
    ms
}

fn fill_metrics(
    row: &mut TrialRecord,
    v_hat: &nalgebra::DVector<f64>,
    support: &[usize],
    model: &SpikedModel,
) {
    let metrics = sin_angle(v_hat, model.spike())
        .and_then(|s| support_recall(support, model.support()).map(|r| (s, r)));
    if let Ok((sin_error, recall)) = metrics {
        row.sin_error = Some(sin_error);
        row.recall = Some(recall);
        row.status = Status::Ok;
    }
}

fn elapsed_ms(clock: Instant, timing: Timing) -> f64 {
    match timing {
        Timing::On => clock.elapsed().as_secs_f64() * 1e3,
        Timing::Off => 0.0,
    }
}
