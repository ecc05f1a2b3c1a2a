use std::collections::BTreeMap;

use rand::SeedableRng;

use super::beta::trajectory;
use super::*;
use crate::dsl::parse;
use crate::interp::policy;
use crate::search::{Budget, ShcConfig};
use crate::selfplay::{run_ibr, transfer, IbrConfig, TransferMode};
use crate::space::{IdentitySpace, SearchSpace, SyntaxSpace};
use crate::testkit::nwr;

fn beta(n_programs: usize, n_neighbors: usize, seed: u64) -> BetaConfig {
    BetaConfig {
        n_programs,
        n_neighbors,
        setups: vec![nwr()],
        seed,
    }
}

fn tiny() -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(Preset::Desk);
    c.k = 10;
    c.train_map = "nwr_9x8".into();
    c.train_iterations = 2;
    c.train_budget = Budget::Games(100);
    c.game_budget = 200;
    c.test_iterations = 2;
    c.beta_programs = 3;
    c.beta_neighbors = 10;
    c.beta_maps = vec!["nwr_9x8".into()];
    c.beta_seeds = 2;
    c.seeds = 2;
    c
}

#[test]
fn identity_space_is_fully_redundant() {
    let report = estimate_beta(&IdentitySpace::default(), &beta(5, 8, 0)).unwrap();
    assert_eq!(report.mean, 1.0);
    assert_eq!(report.std, 0.0);
}

#[test]
fn report_has_one_row_per_program() {
    let report = estimate_beta(&SyntaxSpace::default(), &beta(6, 12, 1)).unwrap();
    assert_eq!(report.programs.len(), 6);
    assert_eq!(report.to_csv().lines().count(), 7);
    let fractions: Vec<f64> = report.programs.iter().map(|p| p.fraction()).collect();
    assert!(fractions.iter().all(|f| (0.0..=1.0).contains(f)));
    let mean = fractions.iter().sum::<f64>() / 6.0;
    assert!((report.mean - mean).abs() < 1e-12);
}

#[test]
fn flagged_neighbors_are_those_with_equal_full_trajectories() {
    let space = SyntaxSpace::default();
    let config = beta(5, 25, 2);
    let report = estimate_beta(&space, &config).unwrap();
    let mut program_rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::search::derive_seed(2, "beta-programs", 0));
    for (i, row) in report.programs.iter().enumerate() {
        let p = space.initial(&mut program_rng).unwrap();
        assert_eq!(p, row.program);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::search::derive_seed(2, "beta-neighbors", i as u64));
        let mut neighbors = space.neighbors(&p, 26, &mut rng).unwrap();
        let opponent = policy(&neighbors.pop().unwrap()).unwrap();
        let reference = trajectory(&policy(&p).unwrap(), &opponent, &nwr());
        let count = neighbors
            .iter()
            .filter(|n| {
                let Ok(np) = policy(n) else { return false };
                let t = trajectory(&np, &opponent, &nwr());
                reference.is_some() && t == reference
            })
            .count();
        assert_eq!(count, row.identical, "program {i}");
    }
}

#[test]
fn policy_against_itself_scores_half() {
    let rush = parse(include_str!("../../scripts/worker_rush.mrl")).unwrap();
    assert_eq!(head_to_head(&rush, &rush, &[nwr()]).unwrap(), 50.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let p = SyntaxSpace::default().initial(&mut rng).unwrap();
        if policy(&p).is_ok() {
            assert_eq!(head_to_head(&p, &p, &[nwr()]).unwrap(), 50.0, "{p}");
        }
    }
}

#[test]
fn identical_runs_compare_at_half_everywhere() {
    let shc = ShcConfig {
        k: 10,
        budget: Budget::Games(100),
        seed: 0,
        ..ShcConfig::default()
    };
    let mut ibr = IbrConfig::new(vec![nwr()], shc);
    ibr.iterations = 2;
    let runs: Vec<_> = (0..2)
        .map(|s| {
            let mut c = ibr.clone();
            c.shc.seed = s;
            run_ibr(&mut SyntaxSpace::default(), &c).unwrap()
        })
        .collect();
    let by_mode = BTreeMap::from([(TransferMode::Syntax, runs.clone()), (TransferMode::Liss, runs)]);
    let checkpoints = checkpoint_schedule(200, 2);
    let rows = compare_modes(&by_mode, &checkpoints, &[nwr()], &ibr.initial_opponent).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.per_seed.len(), 2);
    }
    for g in checkpoints {
        let a = rows.iter().find(|r| r.games == g && r.mode == TransferMode::Liss).unwrap();
        let b = rows.iter().find(|r| r.games == g && r.mode == TransferMode::Syntax).unwrap();
        assert_eq!(a.mean, 50.0);
        assert_eq!(b.mean, 50.0);
    }
}

#[test]
fn schedule_ends_at_iteration_boundaries() {
    assert_eq!(checkpoint_schedule(4000, 5), vec![800, 1600, 2400, 3200, 4000]);
    assert_eq!(checkpoint_schedule(100, 1), vec![100]);
}

#[test]
fn sign_test_values() {
    let s = sign_test(&[60.0, 70.0, 40.0, 50.0]);
    assert_eq!((s.wins, s.losses, s.ties), (2, 1, 1));
    assert_eq!(s.p_value, 0.5);
    assert_eq!(sign_test(&[51.0; 5]).p_value, 1.0 / 32.0);
    assert_eq!(sign_test(&[10.0; 5]).p_value, 1.0);
    assert_eq!(sign_test(&[50.0, 50.0]).p_value, 1.0);
}

#[test]
fn normal_interval() {
    let (mean, (lo, hi)) = mean_ci95(&[1.0, 2.0, 3.0]);
    assert_eq!(mean, 2.0);
    let half = 1.96 * (1.0f64 / 3.0).sqrt();
    assert!((hi - 2.0 - half).abs() < 1e-12 && (2.0 - lo - half).abs() < 1e-12);
    assert_eq!(mean_ci95(&[7.0]), (7.0, (7.0, 7.0)));
}

#[test]
fn population_std() {
    assert_eq!(mean_std(&[0.0, 1.0]), (0.5, 0.5));
}

#[test]
fn git_hash_matches_git() {
    // Values from `git hash-object`.
    assert_eq!(git_blob_hash(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    assert_eq!(git_blob_hash(b""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

#[test]
fn preset_values() {
    let c = ExperimentConfig::preset(Preset::Paper);
    assert_eq!((c.k, c.z, c.epsilon, c.pool_cap), (1000, 4, 0.20, 400));
    assert_eq!((c.beta_programs, c.beta_neighbors), (50, 1000));
    assert_eq!(c.train_budget, Budget::Seconds(400.0));
    let d = ExperimentConfig::preset(Preset::Desk);
    assert_eq!((d.beta_programs, d.beta_neighbors, d.beta_seeds, d.seeds), (20, 200, 3, 5));
    assert_eq!(d.beta_maps, vec!["nwr_9x8", "lmo_16x8"]);
}

#[test]
fn config_text_round_trips_and_overrides() {
    for preset in [Preset::Desk, Preset::Paper] {
        let c = ExperimentConfig::preset(preset);
        assert_eq!(ExperimentConfig::from_text(&c.to_text()).unwrap(), c);
    }
    let c = ExperimentConfig::from_text("format: 1\npreset: paper\nk: 7\nepsilon: 0.5\nlibrary_path: a/b.lib\n").unwrap();
    assert_eq!((c.preset, c.k, c.epsilon, c.z), (Preset::Paper, 7, 0.5, 4));
    assert_eq!(c.library_path.unwrap().to_str(), Some("a/b.lib"));
    assert!(matches!(
        ExperimentConfig::from_text("format: 1\nbogus: 1\n"),
        Err(crate::config::ConfigError::UnknownKey(_))
    ));
    assert!(ExperimentConfig::from_text("format: 1\nepsilon: 1.5\n").is_err());
    assert!(ExperimentConfig::from_text("format: 1\ngames_per_eval: 3\n").is_err());
    assert!(ExperimentConfig::from_text("format: 1\nk: many\n").is_err());
}

#[test]
fn unknown_maps_are_setup_errors() {
    let mut c = tiny();
    c.train_map = "nowhere".into();
    assert!(matches!(c.train_config(0), Err(SetupError::Map(..))));
    c.beta_maps.clear();
    assert!(matches!(c.beta_config(0), Err(SetupError::NoMaps(_))));
}

#[test]
fn reports_are_reproducible_and_record_settings() {
    let mut c = tiny();
    c.epsilon = 0.35;
    c.z = 5;
    c.k = 11;
    let emit = || {
        let (mut beta, mut inputs) = run_beta(&c, SpaceKind::Syntax, None).unwrap();
        let (liss, more) = run_beta(&c, SpaceKind::Liss, None).unwrap();
        beta.extend(liss);
        inputs.extend(more);
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            config: c.clone(),
            beta,
            efficiency: None,
            inputs,
        };
        let files = emit_report(&report, dir.path()).unwrap();
        let contents: Vec<(String, String)> = files
            .iter()
            .map(|f| {
                let name = f.file_name().unwrap().to_string_lossy().into_owned();
                (name, std::fs::read_to_string(f).unwrap())
            })
            .collect();
        contents
    };
    let a = emit();
    assert_eq!(a, emit());
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["beta_liss.csv", "beta_syntax.csv", "summary.txt"]);
    assert_eq!(a[1].1.lines().count(), 1 + c.beta_programs * c.beta_seeds);
    let summary = &a[2].1;
    for line in ["  epsilon: 0.35", "  z: 5", "  k: 11", "beta seeds: 0,1"] {
        assert!(summary.lines().any(|l| l == line), "{line}\n{summary}");
    }
    assert!(summary.contains("map nwr_9x8") && summary.contains("library seed 1"));
}

#[test]
fn empty_report_is_an_error() {
    let report = Report {
        config: tiny(),
        beta: Vec::new(),
        efficiency: None,
        inputs: Vec::new(),
    };
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(&report, dir.path()), Err(ReportError::Empty)));
}

#[test]
fn train_and_transfer_directories_round_trip() {
    let c = tiny();
    let out = run_train(&c, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_train(dir.path(), &out, &c.to_text()).unwrap();
    let back = read_train(dir.path()).unwrap();
    assert_eq!(back.artifacts.final_policy, out.artifacts.final_policy);
    assert_eq!(back.artifacts.corpus, out.artifacts.corpus);
    assert_eq!(*back.pool, *out.pool);
    assert_eq!(back.library.to_text(), out.library.to_text());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,games,best_eval,restarts,candidates\n"));

    let tc = c.transfer_config(TransferMode::Liss, 3).unwrap();
    let outcome = transfer(Some(&back), &tc).unwrap();
    let tdir = dir.path().join("liss");
    write_transfer(&tdir, &outcome, &c.to_text()).unwrap();
    let replay = read_transfer(&tdir, &tc.ibr.initial_opponent).unwrap();
    for games in [0, 50, 100, 150, 200] {
        assert_eq!(
            replay.policy_at(games, &tc.ibr.initial_opponent),
            outcome.artifacts.policy_at(games, &tc.ibr.initial_opponent)
        );
    }
}

#[test]
fn tiny_efficiency_run_is_well_formed() {
    let mut c = tiny();
    c.seeds = 2;
    let (results, _) = run_efficiency(&c).unwrap();
    assert_eq!(results.checkpoints, vec![100, 200]);
    assert_eq!(results.rows.len(), 2 * 6);
    for r in &results.rows {
        assert!(r.per_seed.iter().all(|v| (0.0..=100.0).contains(v)));
        let mirror = results.row(r.games, r.opponent, r.mode).unwrap();
        assert!((r.mean + mirror.mean - 100.0).abs() < 1e-9);
    }
    for run in &results.runs {
        for outcome in run.runs.values() {
            for it in &outcome.artifacts.iterations {
                let evals: Vec<f64> = it.trace.checkpoints.iter().map(|c| c.best_eval).collect();
                assert!(evals.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
    let header = results.to_csv().lines().next().unwrap().to_string();
    assert_eq!(header, "games,mode,opponent,seed_0,seed_1,mean,ci95_low,ci95_high");
}
