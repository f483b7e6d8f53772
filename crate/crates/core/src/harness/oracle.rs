use crate::error::{Error, Result};

/// Result of exhaustively scoring every arm sequence of a two-armed rested
/// bandit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub best_value: f64,
    /// Bit `i` set means the sequence pulls arm B on round `i`.
    pub best_sequence: u32,
    /// Best value among the two constant sequences.
    pub best_constant_value: f64,
    pub constant_attains_max: bool,
}

/// Enumerates all `2^horizon` arm sequences where the `k`-th pull of an arm
/// yields that arm's `k`-th curve value, and checks whether a constant
/// sequence attains the maximum.
///
/// Both curves must be non-decreasing and cover at least `horizon` pulls;
/// `horizon` is capped at 20. Sums are accumulated in round order, so the
/// constant sequences are scored exactly as by a direct sum; the attainment
/// check still allows 1e-9 of slack for mathematically tied sequences.
pub fn proposition1_oracle(curve_a: &[f64], curve_b: &[f64], horizon: usize) -> Result<OracleOutcome> {
    if horizon > 20 {
        return Err(Error::invalid("oracle horizon is limited to 20 rounds"));
    }
    for (arm, curve) in [curve_a, curve_b].into_iter().enumerate() {
        if curve.len() < horizon {
            return Err(Error::invalid(format!("curve {arm} shorter than the horizon")));
        }
        if let Some(i) = curve[..horizon].windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::NonMonotoneCurve { arm, index: i + 1 });
        }
    }
    let score = |seq: u32| -> f64 {
        let mut pulls = [0usize; 2];
        let mut total = 0.0;
        for round in 0..horizon {
            let arm = ((seq >> round) & 1) as usize;
            let curve = if arm == 0 { curve_a } else { curve_b };
            total += curve[pulls[arm]];
            pulls[arm] += 1;
        }
        total
    };
    let mut best_value = f64::NEG_INFINITY;
    let mut best_sequence = 0;
    for seq in 0..(1u32 << horizon) {
        let v = score(seq);
        if v > best_value {
            best_value = v;
            best_sequence = seq;
        }
    }
    let all_b = if horizon == 0 { 0 } else { (1u32 << horizon) - 1 };
    let best_constant_value = score(0).max(score(all_b));
    Ok(OracleOutcome {
        best_value,
        best_sequence,
        best_constant_value,
        constant_attains_max: best_constant_value >= best_value - 1e-9,
    })
}
