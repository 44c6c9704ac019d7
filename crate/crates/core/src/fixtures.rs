//! Built-in worked-example scenarios: a fused-silica sphere in a 1064 nm,
//! 100 mW, NA 0.8 trap, detected at `Z = 10λ0` with detector areas at their
//! paraxial bounds and narrowband-filtered photocurrents.

use crate::scenario::{
    BeamSpec, DetectionSpec, GasSpec, ParticleSpec, Scenario, SolverSettings,
};

pub const WAVELENGTH: f64 = 1064e-9;
pub const POWER: f64 = 0.1;
pub const NUMERICAL_APERTURE: f64 = 0.8;
pub const SILICA_DENSITY: f64 = 2200.0;
pub const SILICA_EPS_REAL: f64 = 2.1;
pub const SILICA_EPS_IMAG: f64 = 1e-5;

/// Ambient pressure of the small-particle example (Pa), `7e-9 mbar`.
pub const PRESSURE_70NM: f64 = 7e-7;
/// Ambient pressure of the large-particle example (Pa), `2e-8 mbar`.
pub const PRESSURE_180NM: f64 = 2e-6;

pub fn silica_sphere(radius: f64) -> Scenario {
    let beam = BeamSpec::new(WAVELENGTH, POWER, NUMERICAL_APERTURE);
    Scenario {
        particle: ParticleSpec::new(radius, SILICA_DENSITY, SILICA_EPS_REAL, SILICA_EPS_IMAG),
        beam,
        gas: GasSpec::air(PRESSURE_70NM),
        detection: DetectionSpec::pinned(WAVELENGTH, 10.0 * WAVELENGTH, true),
        feedback: None,
        solver: SolverSettings::default(),
    }
}

pub fn baseline_70nm() -> Scenario {
    let mut s = silica_sphere(70e-9);
    s.gas = s.gas.with_pressure(PRESSURE_70NM);
    s
}

pub fn baseline_180nm() -> Scenario {
    let mut s = silica_sphere(180e-9);
    s.gas = s.gas.with_pressure(PRESSURE_180NM);
    s
}
