use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RefineStudyConfig;
use super::format::format_sig9;
use super::records::{csv_writer, Status};
use super::seed::trial_seed;
use crate::error::{Error, Result};
use crate::estimators::{tpower_refine, OperatorMode};
use crate::model::{centered_gamma, draw_samples, embed_random, make_profile};
use crate::theory::sin_angle;

pub const REFINE_CSV_HEADER: [&str; 12] = [
    "profile",
    "initializer",
    "n",
    "k",
    "m",
    "theta",
    "trial",
    "seed",
    "operator",
    "t",
    "sin_error",
    "status",
];

/// `sin∠(w^(t), v)` for one trial, operator and iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineRow {
    pub trial: usize,
    pub seed: u64,
    pub operator: OperatorMode,
    pub t: usize,
    pub sin_error: Option<f64>,
    pub status: Status,
}

const OPERATORS: [OperatorMode; 2] = [OperatorMode::Centered, OperatorMode::Uncentered];

/// Refines the same initializer with both operators and records every iterate.
///
/// Rows are ordered by trial, operator (centered first) and `t`. A trial whose
/// initializer or refinement fails contributes `T + 1` failed rows per
/// affected operator.
pub fn run_refine_study(config: &RefineStudyConfig) -> Result<Vec<RefineRow>> {
    config.validate()?;
    let profile = make_profile(&config.profile.kind, config.k)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.resolve())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let per_trial: Vec<Vec<RefineRow>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<RefineRow>> {
                let seed = trial_seed(config.master_seed, 0, config.m, trial);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let model = embed_random(&profile, config.n, config.theta, true, &mut rng)?;
                let gamma = centered_gamma(&draw_samples(&model, config.m, &mut rng)?)?;
                let init = config.initializer.estimate(&gamma, config.k);

                let mut rows = Vec::with_capacity(2 * (config.iterations + 1));
                for operator in OPERATORS {
                    let refined = init.as_ref().ok().and_then(|est| {
                        tpower_refine(
                            &gamma,
                            &est.v_hat,
                            config.k_prime(),
                            config.iterations,
                            operator,
                        )
                        .ok()
                    });
                    for t in 0..=config.iterations {
                        let sin_error = refined
                            .as_ref()
                            .and_then(|r| sin_angle(&r.iterates[t], model.spike()).ok());
                        rows.push(RefineRow {
                            trial,
                            seed,
                            operator,
                            t,
                            sin_error,
                            status: if sin_error.is_some() {
                                Status::Ok
                            } else {
                                Status::Failed
                            },
                        });
                    }
                }
                Ok(rows)
            })
            .collect::<Result<_>>()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Mean `sin∠(w^(t), v)` over successful trials, for `t = 0..=T`.
pub fn mean_trajectory(rows: &[RefineRow], operator: OperatorMode) -> Vec<f64> {
    let len = rows.iter().map(|r| r.t + 1).max().unwrap_or(0);
    let mut sums = vec![0.0; len];
    let mut counts = vec![0usize; len];
    for r in rows.iter().filter(|r| r.operator == operator) {
        if let Some(e) = r.sin_error {
            sums[r.t] += e;
            counts[r.t] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect()
}

pub fn write_refine_csv_to<W: Write>(
    config: &RefineStudyConfig,
    rows: &[RefineRow],
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(REFINE_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            config.profile.name.clone(),
            config.initializer.as_str().to_string(),
            config.n.to_string(),
            config.k.to_string(),
            config.m.to_string(),
            format_sig9(config.theta),
            r.trial.to_string(),
            r.seed.to_string(),
            r.operator.as_str().to_string(),
            r.t.to_string(),
            r.sin_error.map(format_sig9).unwrap_or_default(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_refine_csv(
    config: &RefineStudyConfig,
    rows: &[RefineRow],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_refine_csv_to(config, rows, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Threads;

    #[test]
    fn small_study_shape() {
        let config = RefineStudyConfig {
            n: 40,
            k: 4,
            m: 80,
            trials: 3,
            iterations: 5,
            threads: Threads::Count(2),
            ..RefineStudyConfig::desk_default()
        };
        let rows = run_refine_study(&config).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 6);
        let centered = mean_trajectory(&rows, OperatorMode::Centered);
        let uncentered = mean_trajectory(&rows, OperatorMode::Uncentered);
        assert_eq!(centered.len(), 6);
        // both start from the same initializer
        assert_eq!(centered[0], uncentered[0]);

        let mut buf = Vec::new();
        write_refine_csv_to(&config, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("profile,initializer,n,k,m,theta,trial,seed,operator,t,sin_error,status\n"));
        assert_eq!(text.lines().count(), 1 + rows.len());
    }
}
