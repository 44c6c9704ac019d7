//! Stationary distribution of the one-axis Fock ladder on a truncated state
//! space `0..=n_max`.
//!
//! The generator has bandwidth two. Transitions that would leave the
//! truncated space are dropped, so every column still sums to zero. The
//! stationary vector is found by banded elimination with `P_0 = 1` replacing
//! the first balance equation, then normalized. The reduced matrix is column
//! diagonally dominant, so no pivoting is needed.

use serde::Serialize;
use thiserror::Error;

use crate::rates::LadderRates;

pub const MIN_STATES: usize = 50;
pub const MAX_STATES: usize = 2_000_000;
/// Probability mass allowed on the last six states.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Relative change of the mean allowed between `n_max/2` and `n_max`.
pub const HALVING_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasterError {
    #[error("ladder unstable: Γ at or below 8Γ_g")]
    Unstable,
    #[error("n_max = {0} below the minimum of {MIN_STATES}")]
    TooFewStates(usize),
    #[error("truncation at n_max = {n_max} too small ({reason}); increase n_max to about {suggested}")]
    Truncation {
        n_max: usize,
        suggested: usize,
        reason: String,
    },
    #[error("required truncation exceeds the cap of {MAX_STATES} states")]
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterSolution {
    pub probabilities: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
    pub tail_mass: f64,
    pub n_max: usize,
}

/// Rows of the generator in band form: `rows[m][k]` is the rate into `m`
/// from `m + k − 2`, diagonal at `k = 2`.
pub fn generator(lr: &LadderRates, n_max: usize) -> Vec<[f64; 5]> {
    let mut rows = vec![[0.0; 5]; n_max + 1];
    for n in 0..=n_max {
        let nf = n as f64;
        let moves = [
            (n.checked_sub(2), lr.down2 * nf * (nf - 1.0)),
            (n.checked_sub(1), lr.down1 * nf),
            (Some(n + 1), lr.up1 * (nf + 1.0)),
            (Some(n + 2), lr.up2 * (nf + 1.0) * (nf + 2.0)),
        ];
        for (target, rate) in moves {
            let Some(m) = target.filter(|&m| m <= n_max) else {
                continue;
            };
            if rate == 0.0 {
                continue;
            }
            rows[m][n + 2 - m] += rate;
            rows[n][2] -= rate;
        }
    }
    rows
}

/// Stationary distribution at a fixed truncation, with no convergence checks.
pub fn solve_stationary(lr: &LadderRates, n_max: usize) -> MasterSolution {
    let n = n_max + 1;
    let mut a = generator(lr, n_max);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    let mut rhs = vec![0.0; n];
    a[0] = [0.0, 0.0, 1.0, 0.0, 0.0];
    rhs[0] = 1.0;
    // forward elimination; row i stores columns i−2..=i+2
    for j in 0..n {
        let pivot = a[j][2];
        for i in (j + 1)..(j + 3).min(n) {
            let off = j + 2 - i;
            let factor = a[i][off] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[i][off] = 0.0;
            for c in (j + 1)..=(j + 2).min(n - 1) {
                a[i][c + 2 - i] -= factor * a[j][c + 2 - j];
            }
            rhs[i] -= factor * rhs[j];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for c in (i + 1)..=(i + 2).min(n - 1) {
            s -= a[i][c + 2 - i] * x[c];
        }
        x[i] = s / a[i][2];
    }
    let total: f64 = x.iter().sum();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (m, p) in x.iter_mut().enumerate() {
        *p /= total;
        let mf = m as f64;
        mean += mf * *p;
        second += mf * mf * *p;
    }
    let tail_mass = x[n.saturating_sub(6)..].iter().sum();
    MasterSolution {
        probabilities: x,
        mean,
        second_moment: second,
        tail_mass,
        n_max,
    }
}

/// Default truncation `max(200, ⌈30·m̄⌉)` from the closed-form mean.
pub fn default_truncation(lr: &LadderRates) -> Option<usize> {
    lr.closed_form_mean()
        .map(|m| ((30.0 * m).ceil() as usize).max(200))
}

/// Stationary distribution on `0..=n_max`. With `n_max = None` the
/// truncation starts at [`default_truncation`] and doubles until both the
/// tail-mass and halving checks pass.
pub fn master_equation_steady_state(
    lr: &LadderRates,
    n_max: Option<usize>,
) -> Result<MasterSolution, MasterError> {
    let estimate = lr.closed_form_mean().ok_or(MasterError::Unstable)?;
    let automatic = n_max.is_none();
    let mut n = match n_max {
        Some(n) if n < MIN_STATES => return Err(MasterError::TooFewStates(n)),
        Some(n) => n,
        None => default_truncation(lr).ok_or(MasterError::Unstable)?,
    };
    loop {
        if n > MAX_STATES {
            return Err(MasterError::Cap);
        }
        let sol = solve_stationary(lr, n);
        let failure = if sol.tail_mass >= TAIL_LIMIT {
            Some(format!("tail mass {:.3e}", sol.tail_mass))
        } else {
            let half = solve_stationary(lr, n / 2);
            let change = (sol.mean - half.mean).abs() / sol.mean.max(f64::MIN_POSITIVE);
            (change > HALVING_TOLERANCE)
                .then(|| format!("mean changes by {change:.3e} between n_max/2 and n_max"))
        };
        match failure {
            None => return Ok(sol),
            Some(_) if automatic => n *= 2,
            Some(reason) => {
                let suggested = (2 * n).max((20.0 * estimate.max(sol.mean)).ceil() as usize);
                return Err(MasterError::Truncation {
                    n_max: n,
                    suggested,
                    reason,
                });
            }
        }
    }
}
