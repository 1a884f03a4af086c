//! Seeded Monte Carlo experiments over the spiked model.
//!
//! Trials are the unit of parallelism. Each trial derives its own generator
//! from `(master_seed, profile index, m, trial)`, so the output depends only on
//! the configuration and never on thread count or scheduling.

mod config;
mod format;
pub mod diagnostics;
mod records;
mod refine_study;
mod run;
mod seed;

pub use config::{ExperimentConfig, ProfileSpec, RefineConfig, RefineStudyConfig, Threads};
pub use format::format_sig9;
pub use records::{read_csv, write_csv, write_csv_to, Stage, Status, TrialRecord, CSV_HEADER};
pub use refine_study::{
    mean_trajectory, run_refine_study, write_refine_csv, write_refine_csv_to, RefineRow,
    REFINE_CSV_HEADER,
};
pub use run::{run_experiment, run_experiment_with, Timing};
pub use seed::trial_seed;

use crate::error::Result;
use crate::model::make_profile;
use crate::theory::structure_function;

/// `s(p)` rows for the three simulation profiles: `(p, flat, power-law, exponential)`.
pub fn profile_table(k: usize) -> Result<Vec<(usize, f64, f64, f64)>> {
    let columns = ProfileSpec::simulation_profiles()
        .iter()
        .map(|spec| make_profile(&spec.kind, k).map(|p| structure_function(&p)))
        .collect::<Result<Vec<_>>>()?;
    Ok((1..=k)
        .map(|p| (p, columns[0].at(p), columns[1].at(p), columns[2].at(p)))
        .collect())
}

pub fn write_profile_table<W: std::io::Write>(k: usize, out: W) -> Result<()> {
    let mut w = records::csv_writer(out);
    w.write_record(["p", "flat", "power-law", "exponential"])?;
    for (p, flat, power, exp) in profile_table(k)? {
        w.write_record([
            p.to_string(),
            format_sig9(flat),
            format_sig9(power),
            format_sig9(exp),
        ])?;
    }
    w.flush()?;
    Ok(())
}
