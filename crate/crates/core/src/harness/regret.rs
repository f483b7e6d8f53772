use crate::envs::RisingBanditEnv;
use crate::harness::RunRow;

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub policy: String,
    pub seed: u64,
    pub cumulative_return: f64,
    pub oracle_return: f64,
    pub regret: f64,
}

/// Regret of one seed's rows against per-episode oracle values. Only the
/// first `rows.len()` oracle entries are used; negative regret from
/// sampling noise is reported as is.
pub fn cumulative_regret(policy: &str, seed: u64, rows: &[RunRow], oracle: &[f64]) -> RegretReport {
    let cumulative_return: f64 = rows.iter().map(|r| r.raw_return).sum();
    let oracle_return: f64 = oracle.iter().take(rows.len()).sum();
    RegretReport {
        policy: policy.to_string(),
        seed,
        cumulative_return,
        oracle_return,
        regret: oracle_return - cumulative_return,
    }
}

/// Per-round expected reward of the best constant-arm sequence.
pub fn rising_bandit_oracle(env: &RisingBanditEnv, horizon: u32) -> Vec<f64> {
    let best = if env.constant_arm_value(0, horizon) >= env.constant_arm_value(1, horizon) { 0 } else { 1 };
    (1..=horizon).map(|k| env.mean_at(best, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rows(returns: &[f64]) -> Vec<RunRow> {
        returns
            .iter()
            .enumerate()
            .map(|(i, &r)| RunRow {
                experiment: "x".into(),
                seed: 0,
                episode: i as u32 + 1,
                arm: 1,
                raw_return: r,
                normalized_return: r,
                phi_eliminated: 0,
                ucb_q: None,
                lcb_q: None,
                ucb_phi: None,
                lcb_phi: None,
                jhat_q: None,
                jhat_phi: None,
            })
            .collect()
    }

    #[test]
    fn best_arm_has_zero_regret() {
        let r = cumulative_regret("p", 0, &rows(&[0.5; 10]), &[0.5; 10]);
        assert_eq!(r.regret, 0.0);
    }

    #[test]
    fn empty_run_is_all_zero() {
        let r = cumulative_regret("p", 0, &[], &[]);
        assert_eq!((r.cumulative_return, r.oracle_return, r.regret), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rising_oracle_brute_force() {
        // Brute-force sum of min(0.01 (k - 1), 0.95) over k = 1..=1000; the
        // exact rational value is 45.6 + 904 * 0.95 = 904.4.
        let mut brute = 0.0;
        for k in 1..=1000u32 {
            brute += f64::min(0.01 * f64::from(k - 1), 0.95);
        }
        let env = RisingBanditEnv::new(0.95);
        let oracle = rising_bandit_oracle(&env, 1000);
        assert_abs_diff_eq!(oracle.iter().sum::<f64>(), brute, epsilon = 1e-9);
        assert_abs_diff_eq!(brute, 904.4, epsilon = 1e-9);

        let r = cumulative_regret("const", 0, &rows(&[0.5; 1000]), &oracle);
        assert_abs_diff_eq!(r.regret, 404.4, epsilon = 1e-9);
    }

    #[test]
    fn low_cap_prefers_constant_arm() {
        let env = RisingBanditEnv::new(0.25);
        let oracle = rising_bandit_oracle(&env, 100);
        assert!(oracle.iter().all(|&m| m == 0.5));
    }
}
