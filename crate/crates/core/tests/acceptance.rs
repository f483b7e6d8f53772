//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Beta, Distribution};

use shaping_bandits::bandit::ArmHistory;
use shaping_bandits::envs::RisingBanditEnv;
use shaping_bandits::forecaster::{fit_monotone, hoeffding_lower, hoeffding_upper, TrainingConfig, TrainingDataset};
use shaping_bandits::harness::{
    bundled_config, cumulative_regret, proposition1_oracle, rising_bandit_oracle, run_experiment, ExperimentConfig,
    RunOptions, RunRow,
};
use shaping_bandits::policies::{lpies_update, rpies_update};
use shaping_bandits::{ArmId, NormalizationBounds, PolicyKind, PolicyParams, ShapingRun};

struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.total += 1;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(name.to_string());
        }
    }
}

/// Rows of each experiment in a bundled sweep, keyed by policy.
fn sweep(name: &str, keep: &[PolicyKind]) -> BTreeMap<(String, PolicyKind), BTreeMap<u64, Vec<RunRow>>> {
    let cfg = ExperimentConfig::parse(bundled_config(name).unwrap()).unwrap();
    let mut out = BTreeMap::new();
    for c in cfg.expand_sweep().into_iter().filter(|c| keep.contains(&c.policy.kind)) {
        let started = Instant::now();
        let rows = run_experiment(&c, &RunOptions { parallel: true, ..RunOptions::default() }).unwrap();
        eprintln!("  ran {} in {:.1}s", c.experiment.name, started.elapsed().as_secs_f64());
        let mut per_seed: BTreeMap<u64, Vec<RunRow>> = BTreeMap::new();
        for r in rows {
            per_seed.entry(r.seed).or_default().push(r);
        }
        let env = c.experiment.name.split("__").nth(1).unwrap_or_default().to_string();
        out.insert((env, c.policy.kind), per_seed);
    }
    out
}

fn cumulative(rows: &[RunRow]) -> f64 {
    rows.iter().map(|r| r.raw_return).sum()
}

fn final_mean(rows: &[RunRow], window: usize) -> f64 {
    let tail = &rows[rows.len().saturating_sub(window)..];
    tail.iter().map(|r| r.raw_return).sum::<f64>() / tail.len() as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.0}")).collect::<Vec<_>>().join(" ")
}

fn rising_bandit(report: &mut Report) {
    let results = sweep("rising_bandit", &[PolicyKind::Upies, PolicyKind::NonMonotoneUpies, PolicyKind::EpsGreedy]);
    let totals = |y: &str, kind| -> Vec<f64> {
        results[&(format!("y{y}"), kind)].values().map(|rows| cumulative(rows)).collect()
    };
    for y in ["0.75", "0.95"] {
        let (u, e) = (totals(y, PolicyKind::Upies), totals(y, PolicyKind::EpsGreedy));
        let gap = mean(&u) - mean(&e);
        let wins = u.iter().zip(&e).filter(|(a, b)| a > b).count();
        report.check(
            &format!("rising bandit Y={y}: UPIES beats eps-greedy by >= 100"),
            gap >= 100.0 && wins >= 8,
            format!("mean gap {gap:.1}, UPIES ahead on {wins}/10 seeds (UPIES {} | eps {})", fmt(&u), fmt(&e)),
        );
    }
    for y in ["0.05", "0.25"] {
        let (u, e) = (totals(y, PolicyKind::Upies), totals(y, PolicyKind::EpsGreedy));
        let gap = mean(&e) - mean(&u);
        let within = u.iter().zip(&e).filter(|(a, b)| *b - *a <= 150.0).count();
        report.check(
            &format!("rising bandit Y={y}: eps-greedy leads UPIES by <= 150"),
            gap <= 150.0 && within >= 8,
            format!("mean lead {gap:.1}, within 150 on {within}/10 seeds (UPIES {} | eps {})", fmt(&u), fmt(&e)),
        );
    }
    let (u, nm) = (totals("0.95", PolicyKind::Upies), totals("0.95", PolicyKind::NonMonotoneUpies));
    let ratio = std_dev(&nm) / std_dev(&u);
    let below = nm.iter().filter(|&&x| x < 500.0).count();
    report.check(
        "non-monotone UPIES shows high variance at Y=0.95",
        ratio >= 2.0 || below >= 1,
        format!("std ratio {ratio:.2}, {below} seed(s) below 500 (non-monotone {})", fmt(&nm)),
    );
}

fn grid_friendly(report: &mut Report) {
    let kinds = [PolicyKind::EpsGreedy, PolicyKind::Upies, PolicyKind::Rpies, PolicyKind::Lpies];
    let results = sweep("grid_friendly", &kinds);
    for kind in kinds {
        let finals: Vec<f64> = results[&("friendly".into(), kind)].values().map(|r| final_mean(r, 100)).collect();
        let (ok, goal) = if kind == PolicyKind::EpsGreedy {
            (finals.iter().filter(|&&x| x <= 10.0).count(), "<= 10")
        } else {
            (finals.iter().filter(|&&x| x >= 85.0).count(), ">= 85")
        };
        report.check(
            &format!("grid friendly advice: {kind} final-100 return {goal}"),
            ok >= 8,
            format!("{ok}/10 seeds ({})", fmt(&finals)),
        );
    }
}

fn first_reaching(rows: &[RunRow], level: f64) -> f64 {
    rows.iter().find(|r| r.raw_return >= level).map_or(rows.len() as f64 + 1.0, |r| f64::from(r.episode))
}

fn grid_good(report: &mut Report) {
    let kinds = [PolicyKind::Lpies, PolicyKind::Upies, PolicyKind::Rpies, PolicyKind::NoShaping];
    let results = sweep("grid_good", &kinds);
    let medians: BTreeMap<PolicyKind, f64> = kinds
        .iter()
        .map(|&k| (k, median(results[&("good".into(), k)].values().map(|r| first_reaching(r, 90.0)).collect())))
        .collect();
    let base = medians[&PolicyKind::NoShaping];
    for kind in &kinds[..3] {
        report.check(
            &format!("grid good advice: {kind} reaches return 90 sooner than no shaping"),
            medians[kind] < base,
            format!("median first episode {} vs {}", medians[kind], base),
        );
    }
}

fn no_shaping_sanity(report: &mut Report) {
    let cfg = ExperimentConfig::parse(bundled_config("grid_good").unwrap()).unwrap();
    let mut c = cfg.expand_sweep().into_iter().find(|c| c.policy.kind == PolicyKind::NoShaping).unwrap();
    c.experiment.seeds = (0..30).collect();
    let rows = run_experiment(&c, &RunOptions::default()).unwrap();
    let finals: Vec<f64> = rows.chunks(c.experiment.horizon as usize).map(|r| final_mean(r, 100)).collect();
    report.check(
        "grid without shaping converges",
        finals.len() == 30 && mean(&finals) >= 90.0,
        format!("30 seeds, mean final-100 return {:.2}", mean(&finals)),
    );
}

fn grid_adversarial(report: &mut Report) {
    let kinds = [PolicyKind::Lpies, PolicyKind::Upies, PolicyKind::Rpies];
    let results = sweep("grid_adversarial", &kinds);
    for kind in kinds {
        let finals: Vec<f64> = results[&("adversarial".into(), kind)].values().map(|r| final_mean(r, 100)).collect();
        report.check(
            &format!("grid adversarial advice: {kind} final-100 return >= 85"),
            mean(&finals) >= 85.0,
            format!("mean {:.1} ({})", mean(&finals), fmt(&finals)),
        );
    }
    let lpies = &results[&("adversarial".into(), PolicyKind::Lpies)];
    let upies = &results[&("adversarial".into(), PolicyKind::Upies)];
    let mut earlier = 0;
    let mut pairs = Vec::new();
    for (seed, rows) in lpies {
        let eliminated = rows.iter().find(|r| r.phi_eliminated == 1).map(|r| r.episode);
        let last_phi = upies[seed].iter().filter(|r| r.arm == 1).map(|r| r.episode).max().unwrap_or(0);
        if eliminated.is_some_and(|e| e <= last_phi + 1) {
            earlier += 1;
        }
        pairs.push(format!("{}/{}", eliminated.map_or("-".into(), |e| e.to_string()), last_phi + 1));
    }
    report.check(
        "grid adversarial advice: LPIES drops the expert no later than UPIES",
        earlier >= 7,
        format!("{earlier}/10 seeds (LPIES elimination/UPIES last expert episode + 1: {})", pairs.join(" ")),
    );
}

fn elimination_safety(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE11);
    let params = PolicyParams::default();
    let mut phi_dropped = 0;
    let mut q_dropped = 0;
    for _ in 0..10_000 {
        let mut history = |arm| {
            let n = rng.random_range(0..40usize);
            let returns: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let m = rng.random_range(0..=n);
            let jhat: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            ArmHistory::from_parts(arm, returns, jhat).unwrap()
        };
        let (q, phi) = (history(ArmId::Q), history(ArmId::Phi));
        let horizon = q.pulls() + phi.pulls() + rng.random_range(1..50);
        for update in [lpies_update, rpies_update] {
            let mut run =
                ShapingRun::from_histories(horizon, NormalizationBounds::UNIT, 0, q.clone(), phi.clone()).unwrap();
            if let Some(ev) = update(&mut run, &params) {
                assert_eq!(ev.arm, ArmId::Phi);
                phi_dropped += 1;
            }
            q_dropped += usize::from(run.history(ArmId::Q).is_eliminated());
        }
    }
    report.check(
        "elimination never removes the Q arm",
        q_dropped == 0,
        format!("20000 updates over 10000 random histories, Q eliminated {q_dropped} times, expert {phi_dropped} times"),
    );
}

type Sampler<'a> = &'a dyn Fn(&mut ChaCha8Rng) -> f64;

fn hoeffding_coverage(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0D);
    let beta = Beta::new(2.0, 5.0).unwrap();
    let bern = Bernoulli::new(0.3).unwrap();
    let cases: [(&str, f64, Sampler); 2] =
        [("Beta(2,5)", 2.0 / 7.0, &|r| beta.sample(r)), ("Bernoulli(0.3)", 0.3, &|r| f64::from(u8::from(bern.sample(r))))];
    for delta in [0.05, 0.1] {
        for (label, truth, draw) in &cases {
            for n in [5usize, 30] {
                let trials = 10_000;
                let (mut over, mut under) = (0, 0);
                for _ in 0..trials {
                    let s: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
                    over += usize::from(*truth > hoeffding_upper(&s, delta).unwrap());
                    under += usize::from(*truth < hoeffding_lower(&s, delta).unwrap());
                }
                let (ro, ru) = (over as f64 / trials as f64, under as f64 / trials as f64);
                report.check(
                    &format!("Hoeffding coverage delta={delta} {label} n={n}"),
                    ro <= delta + 0.02 && ru <= delta + 0.02,
                    format!("upper violated {ro:.4}, lower violated {ru:.4}"),
                );
            }
        }
    }
}

fn monotone_forecaster(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0);
    let mut violations = 0;
    for i in 0..100u64 {
        let n = rng.random_range(1..=150usize);
        let rewards: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let horizon = n as u32 + rng.random_range(0..500);
        let data = TrainingDataset::from_rewards(&rewards).unwrap();
        let model = fit_monotone(&data, &TrainingConfig::default().with_seed(i), horizon).unwrap();
        let grid: Vec<f64> = (0..1000).map(|k| model.predict_scaled(f64::from(k) / 999.0)).collect();
        violations += grid.windows(2).filter(|w| w[1] < w[0]).count();
    }
    report.check(
        "monotone forecaster is non-decreasing",
        violations == 0,
        format!("100 random datasets x 1000-point grid, {violations} violations"),
    );
}

fn constant_arm_oracle(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0A);
    // Dyadic steps keep every partial sum exact.
    let curve = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut v = rng.random_range(0..16) as f64 / 64.0;
        (0..10)
            .map(|_| {
                v += rng.random_range(0..8) as f64 / 64.0;
                v
            })
            .collect()
    };
    let mut ok = 0;
    for _ in 0..100 {
        let (a, b) = (curve(&mut rng), curve(&mut rng));
        let o = proposition1_oracle(&a, &b, 10).unwrap();
        ok += usize::from(o.constant_attains_max && o.best_constant_value == o.best_value);
    }
    report.check("a constant-arm policy is optimal", ok == 100, format!("{ok}/100 monotone curve pairs, T=10"));
}

fn regret_arithmetic(report: &mut Report) {
    let mut env = RisingBanditEnv::new(0.95).without_noise();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let rows: Vec<RunRow> = (1..=1000)
        .map(|episode| {
            let raw = env.pull(1, &mut rng).unwrap();
            RunRow {
                experiment: "constant".into(),
                seed: 0,
                episode,
                arm: 1,
                raw_return: raw,
                normalized_return: raw,
                phi_eliminated: 0,
                ucb_q: None,
                lcb_q: None,
                ucb_phi: None,
                lcb_phi: None,
                jhat_q: None,
                jhat_phi: None,
            }
        })
        .collect();
    let oracle = rising_bandit_oracle(&RisingBanditEnv::new(0.95), 1000);
    let r = cumulative_regret("constant", 0, &rows, &oracle);
    // 0.01 * (0 + ... + 95) + 904 * 0.95
    let expected = 904.4 - 500.0;
    report.check(
        "regret of the always-constant arm at Y=0.95",
        (r.regret - expected).abs() <= 1e-9,
        format!("oracle {:.6}, cumulative {:.6}, regret {:.9} (expected {expected})", r.oracle_return, r.cumulative_return, r.regret),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failed: Vec::new(), total: 0 };
    let started = Instant::now();
    elimination_safety(&mut report);
    hoeffding_coverage(&mut report);
    monotone_forecaster(&mut report);
    constant_arm_oracle(&mut report);
    regret_arithmetic(&mut report);
    rising_bandit(&mut report);
    grid_friendly(&mut report);
    grid_good(&mut report);
    no_shaping_sanity(&mut report);
    grid_adversarial(&mut report);
    println!(
        "acceptance: {}/{} passed in {:.0}s",
        report.total - report.failed.len(),
        report.total,
        started.elapsed().as_secs_f64()
    );
    if report.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
