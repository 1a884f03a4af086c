use std::collections::BTreeSet;
use std::path::PathBuf;

use sepca::harness::{
    read_csv, run_experiment, run_experiment_with, write_csv, write_csv_to, ExperimentConfig,
    ProfileSpec, RefineConfig, RefineStudyConfig, Stage, Status, Threads, Timing, TrialRecord,
};
use sepca::{Algorithm, OperatorMode, ProfileKind};

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        n: 40,
        k: 4,
        theta: 3.0,
        m_values: vec![30, 80],
        profiles: ProfileSpec::simulation_profiles().to_vec(),
        algorithms: Algorithm::ALL.to_vec(),
        trials: 5,
        refine: RefineConfig {
            enabled: true,
            iterations: 3,
            k_prime: None,
            operator: OperatorMode::Centered,
        },
        master_seed: 77,
        threads: Threads::Count(1),
        out_path: None,
        population: false,
    }
}

fn bytes(rows: &[TrialRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv_to(rows, &mut buf).unwrap();
    buf
}

#[test]
fn two_trials_one_algorithm_row_count() {
    let mut config = ExperimentConfig {
        m_values: vec![60],
        profiles: vec![ProfileSpec::new("flat", ProfileKind::Flat)],
        algorithms: vec![Algorithm::Dt],
        trials: 2,
        ..small_config()
    };
    assert_eq!(run_experiment(&config).unwrap().len(), 4);
    config.refine.enabled = false;
    let rows = run_experiment(&config).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.stage == Stage::Pre && r.operator == "none" && r.refine_t == 0));
}

#[test]
fn thread_count_does_not_change_bytes() {
    let one = run_experiment_with(&small_config(), Timing::Off).unwrap();
    let four = run_experiment_with(
        &ExperimentConfig {
            threads: Threads::Count(4),
            ..small_config()
        },
        Timing::Off,
    )
    .unwrap();
    assert_eq!(bytes(&one), bytes(&four));
}

#[test]
fn keys_unique_and_paired() {
    let rows = run_experiment(&small_config()).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 3 * 5 * 2);
    let keys: BTreeSet<_> = rows
        .iter()
        .map(|r| (r.profile.clone(), r.algorithm.clone(), r.m, r.trial, r.stage))
        .collect();
    assert_eq!(keys.len(), rows.len());
    for r in rows.iter().filter(|r| r.stage == Stage::Post) {
        assert!(keys.contains(&(r.profile.clone(), r.algorithm.clone(), r.m, r.trial, Stage::Pre)));
        assert_eq!(r.operator, "centered");
        assert_eq!(r.refine_t, 3);
    }
    for r in &rows {
        match r.status {
            Status::Ok => {
                let (s, rc) = (r.sin_error.unwrap(), r.recall.unwrap());
                assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&rc));
            }
            Status::Failed => assert!(r.sin_error.is_none() && r.recall.is_none()),
        }
    }
}

#[test]
fn canonical_order() {
    let config = small_config();
    let rows = run_experiment(&config).unwrap();
    let rank = |r: &TrialRecord| {
        (
            config.profiles.iter().position(|p| p.name == r.profile).unwrap(),
            config.m_values.iter().position(|&m| m == r.m).unwrap(),
            config.algorithms.iter().position(|a| a.as_str() == r.algorithm).unwrap(),
            r.trial,
            r.stage,
        )
    };
    assert!(rows.windows(2).all(|w| rank(&w[0]) < rank(&w[1])));
}

#[test]
fn population_mode_is_exact() {
    let config = ExperimentConfig {
        profiles: vec![ProfileSpec::new(
            "decreasing",
            ProfileKind::PowerLawEnergy { alpha: 1.0 },
        )],
        population: true,
        ..small_config()
    };
    let rows = run_experiment(&config).unwrap();
    for r in &rows {
        assert_eq!(r.status, Status::Ok);
        assert!(r.sin_error.unwrap() <= 1e-8, "{r:?}");
        assert_eq!(r.recall, Some(1.0));
    }
}

#[test]
fn csv_round_trip() {
    let rows = run_experiment(&small_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    write_csv(&rows, &path).unwrap();
    let back = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.len(), rows.len());
    // parsing is exact on the printed values, so a second write is byte-identical
    assert_eq!(bytes(&back), std::fs::read(&path).unwrap());
}

#[test]
fn golden_single_record() {
    let record = TrialRecord {
        profile: "power-law".into(),
        algorithm: "sep".into(),
        n: 300,
        k: 20,
        m: 250,
        theta: 3.0,
        trial: 7,
        seed: 12345678901234567890,
        stage: Stage::Post,
        sin_error: Some(0.123456789123),
        recall: Some(0.95),
        refine_t: 10,
        operator: "centered".into(),
        wall_ms: 1.5,
        status: Status::Ok,
    };
    let golden = std::fs::read(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/one_record.csv"),
    )
    .unwrap();
    assert_eq!(bytes(&[record]), golden);
}

#[test]
fn shipped_configs_match_defaults() {
    let desk = ExperimentConfig::load(repo_file("configs/default.json")).unwrap();
    assert_eq!(
        desk,
        ExperimentConfig {
            out_path: desk.out_path.clone(),
            ..ExperimentConfig::desk_default()
        }
    );
    let study = RefineStudyConfig::load(repo_file("configs/refine_study.json")).unwrap();
    assert_eq!(
        study,
        RefineStudyConfig {
            out_path: study.out_path.clone(),
            ..RefineStudyConfig::desk_default()
        }
    );
}

#[test]
fn unknown_config_key_rejected() {
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo_file("configs/default.json")).unwrap())
            .unwrap();
    value["trails"] = 3.into();
    assert!(ExperimentConfig::from_json(&value.to_string()).is_err());
}
