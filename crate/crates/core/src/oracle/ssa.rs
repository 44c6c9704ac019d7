//! Exact-jump simulation of the Fock-state ladder.

use rand::Rng;
use serde::Serialize;

use super::{rng_for, OracleError};
use crate::rates::LadderRates;

pub const STATE_GUARD: u64 = 100_000_000;
pub const BURN_IN_RELAXATIONS: f64 = 10.0;
pub const MIN_RELAXATIONS: f64 = 50.0;
pub const BATCHES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsaResult {
    /// Time-averaged occupation after burn-in.
    pub mean: f64,
    /// Batch-means standard error.
    pub stderr: f64,
    pub jumps: u64,
    pub burn_in: f64,
    pub duration: f64,
    pub final_state: u64,
}

struct Walker<'a, R: Rng> {
    lr: &'a LadderRates,
    rng: R,
    m: u64,
    t: f64,
    jumps: u64,
}

impl<R: Rng> Walker<'_, R> {
    /// Advances one jump, calling `hold(from, to, state)` for the holding
    /// interval first. Returns false if no jump is possible before `t_end`.
    fn step(&mut self, t_end: f64, mut hold: impl FnMut(f64, f64, u64)) -> bool {
        let m = self.m as f64;
        let a = [
            self.lr.up1 * (m + 1.0),
            self.lr.down1 * m,
            self.lr.up2 * (m + 1.0) * (m + 2.0),
            self.lr.down2 * m * (m - 1.0),
        ];
        let total: f64 = a.iter().sum();
        if total <= 0.0 {
            hold(self.t, t_end, self.m);
            self.t = t_end;
            return false;
        }
        let u: f64 = self.rng.random();
        let wait = -(1.0 - u).ln() / total;
        if self.t + wait >= t_end {
            hold(self.t, t_end, self.m);
            self.t = t_end;
            return false;
        }
        hold(self.t, self.t + wait, self.m);
        self.t += wait;
        let mut r = self.rng.random::<f64>() * total;
        let mut which = 3;
        for (i, &ai) in a.iter().enumerate() {
            if r < ai {
                which = i;
                break;
            }
            r -= ai;
        }
        self.m = match which {
            0 => self.m + 1,
            1 => self.m - 1,
            2 => self.m + 2,
            _ => self.m - 2,
        };
        self.jumps += 1;
        true
    }
}

/// Runs `burn_in` then `duration` seconds from the rounded closed-form mean
/// and reports the time-averaged occupation over the second part.
pub fn ssa_fock_trajectory(
    lr: &LadderRates,
    duration: f64,
    seed: u64,
    stream: u64,
) -> Result<SsaResult, OracleError> {
    let relax = lr.relaxation();
    if relax <= 0.0 {
        return Err(OracleError::NoRelaxation(relax));
    }
    if duration * relax < MIN_RELAXATIONS {
        return Err(OracleError::UnderSampled(format!(
            "ladder run of {:.1} relaxation times, need at least {MIN_RELAXATIONS}; \
             use a duration of at least {:.4e} s",
            duration * relax,
            MIN_RELAXATIONS / relax
        )));
    }
    let burn_in = BURN_IN_RELAXATIONS / relax;
    let start = lr.closed_form_mean().unwrap_or(0.0).round() as u64;
    let mut w = Walker {
        lr,
        rng: rng_for(seed, stream),
        m: start,
        t: 0.0,
        jumps: 0,
    };
    while w.step(burn_in, |_, _, _| {}) {
        if w.m > STATE_GUARD {
            return Err(OracleError::Unstable { state: w.m, time: w.t });
        }
    }
    let batch_len = duration / BATCHES as f64;
    let mut sums = [0.0; BATCHES];
    let t_end = burn_in + duration;
    let mut hold = |from: f64, to: f64, m: u64| {
        let mut a = from - burn_in;
        let b = to - burn_in;
        let mut idx = ((a / batch_len) as usize).min(BATCHES - 1);
        while a < b {
            let edge = if idx == BATCHES - 1 { b } else { ((idx + 1) as f64 * batch_len).min(b) };
            sums[idx] += m as f64 * (edge - a).max(0.0);
            a = a.max(edge);
            idx = (idx + 1).min(BATCHES - 1);
        }
    };
    while w.step(t_end, &mut hold) {
        if w.m > STATE_GUARD {
            return Err(OracleError::Unstable { state: w.m, time: w.t });
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / batch_len).collect();
    let mean = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    Ok(SsaResult {
        mean,
        stderr: (var / BATCHES as f64).sqrt(),
        jumps: w.jumps,
        burn_in,
        duration,
        final_state: w.m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Escape {
    pub time: f64,
    pub jumps: u64,
}

/// Runs from the ground state until the state passes `guard` or `horizon`
/// elapses. `Some` on escape.
pub fn first_escape(lr: &LadderRates, horizon: f64, guard: u64, seed: u64, stream: u64) -> Option<Escape> {
    let mut w = Walker {
        lr,
        rng: rng_for(seed, stream),
        m: 0,
        t: 0.0,
        jumps: 0,
    };
    while w.step(horizon, |_, _, _| {}) {
        if w.m > guard {
            return Some(Escape { time: w.t, jumps: w.jumps });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_chain_mean() {
        let lr = LadderRates::new(3.0, 1.0, 0.0, 0.0);
        let r = ssa_fock_trajectory(&lr, 4000.0, 5, 1).unwrap();
        assert!((r.mean - 3.0).abs() < 3.0 * r.stderr, "{} ± {}", r.mean, r.stderr);
        assert!(r.stderr < 0.1);
    }

    #[test]
    fn reproducible() {
        let lr = LadderRates::new(2.0, 1.0, 0.5, 0.02);
        let a = ssa_fock_trajectory(&lr, 500.0, 8, 3).unwrap();
        let b = ssa_fock_trajectory(&lr, 500.0, 8, 3).unwrap();
        assert_eq!(a, b);
        let c = ssa_fock_trajectory(&lr, 500.0, 8, 4).unwrap();
        assert_ne!(a.jumps, c.jumps);
    }

    #[test]
    fn short_run_is_under_sampled() {
        let lr = LadderRates::new(2.0, 1.0, 0.0, 0.0);
        assert!(matches!(
            ssa_fock_trajectory(&lr, 10.0, 1, 1),
            Err(OracleError::UnderSampled(_))
        ));
    }

    #[test]
    fn no_relaxation_is_rejected() {
        let lr = LadderRates::new(1.0, 1.0, 0.0, 0.15);
        assert!(matches!(
            ssa_fock_trajectory(&lr, 1e4, 1, 1),
            Err(OracleError::NoRelaxation(_))
        ));
    }

    #[test]
    fn escape_above_critical_only() {
        let unstable = LadderRates::new(1.0, 1.0, 0.0, 0.15);
        let stable = LadderRates::new(1.0, 1.0, 0.0, 0.05);
        assert!(first_escape(&unstable, 1e4, 1000, 2, 1).is_some());
        assert!(first_escape(&stable, 1e4, 1000, 2, 1).is_none());
    }
}
