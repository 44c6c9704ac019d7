//! The two oracle suites with their targets.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::photons::{angular_moments, simulate_photon_streams};
use super::psd::{floor_ratio, modulated_pressure, radiation_pressure_psd, recoil_psd, white_noise_calibration, Binning};
use super::ssa::{first_escape, ssa_fock_trajectory, Escape};
use super::{rng_for, streams, OracleCheck, OracleError};
use crate::optics::compute_coefficients;
use crate::rates::LadderRates;
use crate::scenario::Scenario;

pub const DEFAULT_SCATTER_EVENTS: f64 = 2e6;
pub const FLOOR_TOLERANCE: f64 = 0.05;
pub const CALIBRATION_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdOptions {
    pub seed: u64,
    /// Simulated time in seconds; by default long enough for
    /// `DEFAULT_SCATTER_EVENTS` scattered photons.
    pub duration: Option<f64>,
    pub segment_len: usize,
    pub segments: usize,
}

impl PsdOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            duration: None,
            segment_len: 1024,
            segments: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdSuite {
    pub seed: u64,
    pub duration: f64,
    pub scatter_events: usize,
    pub absorb_events: usize,
    pub binning: Binning,
    pub checks: Vec<OracleCheck>,
}

impl PsdSuite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn psd_suite(s: &Scenario, opts: &PsdOptions) -> Result<PsdSuite, OracleError> {
    let coeffs = compute_coefficients(&s.particle, &s.beam);
    let beam = &s.beam;
    let hw = beam.photon_energy();
    let power = beam.mean_power;
    let k0 = beam.k0();
    let duration = opts
        .duration
        .unwrap_or(DEFAULT_SCATTER_EVENTS * hw / coeffs.scattered_power);
    let (scatter, absorb) = simulate_photon_streams(&coeffs, beam, duration, opts.seed)?;
    let binning = Binning::covering(duration, opts.segment_len, opts.segments);
    let mut checks = Vec::new();

    let ang = angular_moments(&scatter, k0);
    for i in 0..3 {
        checks.push(OracleCheck::new(
            format!("E[k'_{}]/k0", i + 1),
            ang.mean[i] / k0,
            ang.mean_stderr[i] / k0,
            0.0,
            None,
        ));
    }
    for (i, share) in [0.2, 0.4, 0.4].into_iter().enumerate() {
        checks.push(OracleCheck::new(
            format!("E[k'_{}^2]/k0^2", i + 1),
            ang.second[i] / (k0 * k0),
            ang.second_stderr[i] / (k0 * k0),
            share,
            None,
        ));
    }

    let pressure = radiation_pressure_psd(&scatter, &absorb, beam, &binning)?;
    checks.push(OracleCheck::new(
        "mean pressure force [N]",
        pressure.mean,
        pressure.mean_stderr,
        coeffs.pressure * power,
        Some(FLOOR_TOLERANCE),
    ));
    let shot_unit = hw * power;
    checks.push(OracleCheck::new(
        "pressure floor [N^2 s]",
        pressure.floor,
        pressure.floor_stderr,
        coeffs.pressure_noise.powi(2) * shot_unit,
        Some(FLOOR_TOLERANCE),
    ));
    let b2 = coeffs.pressure.powi(2);
    checks.push(OracleCheck::new(
        "pressure floor / (B^2 hbar w0 P)",
        pressure.floor / (b2 * shot_unit),
        pressure.floor_stderr / (b2 * shot_unit),
        (coeffs.pressure_noise / coeffs.pressure).powi(2),
        Some(FLOOR_TOLERANCE),
    ));

    let mut recoils = Vec::with_capacity(3);
    for axis in 0..3 {
        let est = recoil_psd(&scatter, beam, axis, &binning)?;
        checks.push(OracleCheck::new(
            format!("recoil floor axis {} [N^2 s]", axis + 1),
            est.floor,
            est.floor_stderr,
            coeffs.recoil[axis].powi(2) * shot_unit,
            Some(FLOOR_TOLERANCE),
        ));
        checks.push(OracleCheck::new(
            format!("mean recoil force axis {} [N]", axis + 1),
            est.mean,
            est.mean_stderr,
            0.0,
            None,
        ));
        recoils.push(est);
    }
    let (ratio, ratio_err) = floor_ratio(&recoils[1], &recoils[0]);
    checks.push(OracleCheck::new("recoil floor ratio axis 2 / axis 1", ratio, ratio_err, 2.0, None));

    let modulated = modulated_pressure(
        coeffs.scattered_power,
        beam,
        0.5,
        400.0,
        (opts.segment_len, opts.segments),
        opts.seed,
    )?;
    checks.push(OracleCheck::new(
        "modulated pressure transfer [N^2/W^2]",
        modulated.transfer,
        modulated.transfer_stderr,
        b2,
        Some(FLOOR_TOLERANCE),
    ));

    let cal = white_noise_calibration(opts.seed, opts.segment_len, 4 * opts.segments)?;
    checks.push(OracleCheck::new(
        "unit white train floor",
        cal.floor,
        cal.floor_stderr,
        1.0,
        Some(CALIBRATION_TOLERANCE),
    ));

    Ok(PsdSuite {
        seed: opts.seed,
        duration,
        scatter_events: scatter.len(),
        absorb_events: absorb.len(),
        binning,
        checks,
    })
}

/// Rate sets with unit damping: `m̄_th ∈ [0.2, 5]` (log-uniform),
/// `Γ_r ∈ [0, 2]`, `Γ_g ∈ [0, max_gradient_ratio]`. The first set is a pure
/// thermal chain.
pub fn admissible_rate_sets(seed: u64, count: usize, max_gradient_ratio: f64) -> Vec<LadderRates> {
    let mut rng = rng_for(seed, streams::LADDER_RATES);
    (0..count)
        .map(|i| {
            if i == 0 {
                return LadderRates::new(2.5, 1.0, 0.0, 0.0);
            }
            let nth = (rng.random_range(0.2f64.ln()..5f64.ln())).exp();
            let recoil = rng.random_range(0.0..2.0);
            let gradient = rng.random_range(0.0..max_gradient_ratio);
            LadderRates::new(nth, 1.0, recoil, gradient)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderOptions {
    pub seed: u64,
    /// Run length per rate set in relaxation times.
    pub span: f64,
    pub sets: usize,
    pub max_gradient_ratio: f64,
    pub unstable_ratio: f64,
    pub escape_guard: u64,
    pub escape_horizon: f64,
}

impl LadderOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            span: 4000.0,
            sets: 10,
            max_gradient_ratio: 0.05,
            unstable_ratio: 0.15,
            escape_guard: 1000,
            escape_horizon: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeDemo {
    pub unstable_ratio: f64,
    pub control_ratio: f64,
    pub guard: u64,
    pub horizon: f64,
    pub unstable: Option<Escape>,
    pub control: Option<Escape>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderSuite {
    pub seed: u64,
    pub span: f64,
    pub jumps: Vec<u64>,
    pub checks: Vec<OracleCheck>,
    pub escape: EscapeDemo,
}

impl LadderSuite {
    pub fn passed(&self) -> bool {
        self.escape.passed && self.checks.iter().all(|c| c.passed)
    }
}

pub fn ladder_suite(opts: &LadderOptions) -> Result<LadderSuite, OracleError> {
    let sets = admissible_rate_sets(opts.seed, opts.sets, opts.max_gradient_ratio);
    let runs: Vec<_> = sets
        .par_iter()
        .enumerate()
        .map(|(i, lr)| {
            let duration = opts.span / lr.relaxation();
            ssa_fock_trajectory(lr, duration, opts.seed, streams::LADDER_BASE + i as u64)
        })
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::with_capacity(runs.len());
    let mut jumps = Vec::with_capacity(runs.len());
    for (i, (lr, r)) in sets.iter().zip(&runs).enumerate() {
        let target = lr.closed_form_mean().expect("admissible");
        checks.push(OracleCheck::new(format!("ladder set {i} mean occupation"), r.mean, r.stderr, target, None));
        jumps.push(r.jumps);
    }
    let unstable = LadderRates::new(1.0, 1.0, 0.0, opts.unstable_ratio);
    let control = LadderRates::new(1.0, 1.0, 0.0, opts.max_gradient_ratio);
    let base = streams::LADDER_BASE + opts.sets as u64;
    let esc_u = first_escape(&unstable, opts.escape_horizon, opts.escape_guard, opts.seed, base);
    let esc_c = first_escape(&control, opts.escape_horizon, opts.escape_guard, opts.seed, base + 1);
    Ok(LadderSuite {
        seed: opts.seed,
        span: opts.span,
        jumps,
        checks,
        escape: EscapeDemo {
            unstable_ratio: opts.unstable_ratio,
            control_ratio: opts.max_gradient_ratio,
            guard: opts.escape_guard,
            horizon: opts.escape_horizon,
            unstable: esc_u,
            control: esc_c,
            passed: esc_u.is_some() && esc_c.is_none(),
        },
    })
}
