//! Brute-force Monte-Carlo checks of the closed forms: Poisson photon
//! streams for the force spectral densities, and an exact-jump simulation of
//! the Fock ladder.
//!
//! Every simulation draws from a ChaCha8 generator seeded with the user seed
//! and switched to a fixed stream number per purpose, so independent parts
//! never share random numbers and runs are bit-reproducible.

pub mod dump;
pub mod photons;
pub mod psd;
pub mod ssa;
pub mod suite;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("under-sampled run: {0}")]
    UnderSampled(String),
    #[error("event-count guard: {0:.3e} expected events exceeds the limit")]
    Overflow(f64),
    #[error("ladder diverged: state {state} exceeded the guard at t = {time:.4e} s")]
    Unstable { state: u64, time: f64 },
    #[error("ladder has no relaxation (rate {0:.4e} ≤ 0): Γ at or below 8Γ_g")]
    NoRelaxation(f64),
    #[error("bad dump file: {0}")]
    Dump(String),
}

/// Stream numbers, one per purpose.
pub mod streams {
    pub const SCATTER_TIMES: u64 = 1;
    pub const ABSORB_TIMES: u64 = 2;
    pub const DIRECTIONS: u64 = 3;
    pub const MODULATION: u64 = 4;
    pub const CALIBRATION: u64 = 5;
    pub const LADDER_RATES: u64 = 6;
    /// Ladder run `i` uses stream `LADDER_BASE + i`.
    pub const LADDER_BASE: u64 = 1000;
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One estimate compared with its target.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    /// Allowed relative deviation, in addition to the 3σ test.
    pub rel_tolerance: Option<f64>,
    pub passed: bool,
}

impl OracleCheck {
    /// Passes when within three standard errors and, if given, within the
    /// relative tolerance with the whole 3σ band.
    pub fn new(name: impl Into<String>, estimate: f64, stderr: f64, target: f64, rel_tolerance: Option<f64>) -> Self {
        let dev = (estimate - target).abs();
        let mut passed = dev <= 3.0 * stderr;
        if let Some(tol) = rel_tolerance {
            passed &= dev + 3.0 * stderr <= tol * target.abs();
        }
        Self {
            name: name.into(),
            estimate,
            stderr,
            target,
            rel_tolerance,
            passed,
        }
    }

    pub fn sigmas(&self) -> f64 {
        (self.estimate - self.target).abs() / self.stderr
    }
}
