use std::collections::BTreeMap;

use shaping_bandits::harness::{
    bundled_config, read_rows, run_experiment, run_seed, run_shaping, write_experiment, write_rows,
    EpisodeChoice, EpisodeExecutor, ExperimentConfig, RunOptions, RunRow, CSV_HEADER,
};
use shaping_bandits::forecaster::TrainingConfig;
use shaping_bandits::{ArmId, NormalizationBounds, PolicyKind, PolicyParams, Result, ShapingPolicy};

fn rising(policy: &str, horizon: u32, seeds: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "[experiment]\nname = \"it_{policy}\"\nhorizon = {horizon}\nseeds = {seeds}\n\n\
         [env]\nkind = \"rising_bandit\"\ny_max = 0.95\n\n[policy]\nkind = \"{policy}\"\n"
    ))
    .unwrap()
}

fn by_seed(rows: &[RunRow]) -> BTreeMap<u64, Vec<&RunRow>> {
    let mut m: BTreeMap<u64, Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        m.entry(r.seed).or_default().push(r);
    }
    m
}

#[test]
fn ten_seeds_of_a_thousand_episodes() {
    let cfg = rising("eps_greedy", 1000, "[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]");
    let rows = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 10_000);
    for (_, seed_rows) in by_seed(&rows) {
        assert_eq!(seed_rows.len(), 1000);
        let episodes: Vec<u32> = seed_rows.iter().map(|r| r.episode).collect();
        assert_eq!(episodes, (1..=1000).collect::<Vec<_>>());
        assert!(seed_rows.iter().all(|r| r.arm <= 1 && (0.0..=1.0).contains(&r.normalized_return)));
    }
}

#[test]
fn identical_configs_write_identical_csv() {
    let cfg = rising("upies", 60, "[3, 4]");
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for sub in ["a", "b"] {
        let rows = run_experiment(&cfg, &RunOptions::default()).unwrap();
        let path = write_experiment(&cfg, &dir.path().join(sub), &rows).unwrap();
        bodies.push(std::fs::read(path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(bodies[0].starts_with(CSV_HEADER.as_bytes()));
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let cfg = rising("rpies", 40, "[5, 1, 9]");
    let seq = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let par = run_experiment(&cfg, &RunOptions { parallel: true, ..RunOptions::default() }).unwrap();
    assert_eq!(seq, par);
    let seeds: Vec<u64> = by_seed(&seq).keys().copied().collect();
    assert_eq!(seeds, vec![1, 5, 9]);
}

#[test]
fn single_seed_replays_exactly() {
    let cfg = rising("upies", 50, "[0, 7, 8]");
    let rows = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let replay = run_seed(&cfg, 7).unwrap();
    let recorded: Vec<RunRow> = rows.into_iter().filter(|r| r.seed == 7).collect();
    assert_eq!(replay, recorded);
}

#[test]
fn seed_offset_shifts_seeds() {
    let cfg = rising("eps_greedy", 20, "[1]");
    let shifted = run_experiment(&cfg, &RunOptions { seed_offset: 10, ..RunOptions::default() }).unwrap();
    assert!(shifted.iter().all(|r| r.seed == 11));
    assert_eq!(shifted, run_seed(&cfg, 11).unwrap());
}

#[test]
fn no_shaping_never_touches_phi() {
    let text = bundled_config("grid_good").unwrap().replace("kind = \"rpies\"", "kind = \"no_shaping\"");
    let mut cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.experiment.horizon = 30;
    cfg.experiment.seeds = vec![0, 1];
    let rows = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.arm == 0 && r.phi_eliminated == 0));
}

#[test]
fn every_episode_pulls_exactly_one_arm() {
    for policy in ["lpies", "rpies", "upies", "non_monotone_upies", "eps_greedy", "stationary_ucb", "classic_pies"] {
        let cfg = rising(policy, 40, "[2]");
        let rows = run_seed(&cfg, 2).unwrap();
        let phi = rows.iter().filter(|r| r.arm == 1).count();
        let q = rows.iter().filter(|r| r.arm == 0).count();
        assert_eq!(phi + q, 40, "{policy}");
    }
}

#[test]
fn diagnostics_columns_follow_the_policy() {
    let rows = run_seed(&rising("rpies", 30, "[0]"), 0).unwrap();
    let last = rows.last().unwrap();
    assert!(last.ucb_q.is_some() && last.lcb_q.is_some() && last.ucb_phi.is_some() && last.lcb_phi.is_some());
    assert!(last.jhat_q.is_some() && last.jhat_phi.is_some());
    let rows = run_seed(&rising("eps_greedy", 30, "[0]"), 0).unwrap();
    assert!(rows.iter().all(|r| r.ucb_q.is_none() && r.jhat_q.is_none()));
}

#[test]
fn csv_file_round_trips() {
    let cfg = rising("upies", 25, "[0]");
    let rows = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows).unwrap();
    assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
}

/// A stand-in for an arbitrary learner: the Q arm's return rises with every
/// pull of it, the Φ arm pays a flat amount.
struct ScriptedLearner {
    q_pulls: u32,
    calls: Vec<EpisodeChoice>,
    eliminated: bool,
}

impl EpisodeExecutor for ScriptedLearner {
    fn execute(&mut self, choice: EpisodeChoice) -> Result<f64> {
        self.calls.push(choice);
        Ok(match choice {
            EpisodeChoice::Arm(ArmId::Q) => {
                self.q_pulls += 1;
                -50.0 + 5.0 * f64::from(self.q_pulls)
            }
            _ => 10.0,
        })
    }

    fn on_phi_eliminated(&mut self) {
        self.eliminated = true;
    }
}

#[test]
fn any_learner_plugs_into_the_driver() {
    let bounds = NormalizationBounds::new(-50.0, 150.0).unwrap();
    for kind in [PolicyKind::Lpies, PolicyKind::Rpies, PolicyKind::Upies] {
        let policy = ShapingPolicy::new(kind, PolicyParams::default()).unwrap();
        let mut learner = ScriptedLearner { q_pulls: 0, calls: Vec::new(), eliminated: false };
        let rows = run_shaping("scripted", &policy, &mut learner, 300, bounds, &TrainingConfig::default(), 4).unwrap();
        assert_eq!(rows.len(), 300);
        assert_eq!(learner.calls.len(), 300);
        let late_q = rows[200..].iter().filter(|r| r.arm == 0).count();
        assert!(late_q >= 95, "{kind}: {late_q}");
        if kind != PolicyKind::Upies {
            assert!(learner.eliminated, "{kind}");
            assert_eq!(rows.last().unwrap().phi_eliminated, 1);
        }
    }
}
