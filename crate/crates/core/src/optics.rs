//! Dipole-approximation optics of a sphere in a focused Gaussian beam:
//! field profile, polarizability, stiffness, radiation-pressure and recoil
//! coefficients, and scattered/absorbed powers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{C, EPS_0};
use crate::scenario::{BeamSpec, ParticleSpec};

/// `E_inc/E0` of the paraxial Gaussian beam at `point` (metres, focus at the
/// origin, propagation along the third axis).
pub fn incident_field(beam: &BeamSpec, point: [f64; 3]) -> Complex64 {
    let k0 = beam.k0();
    let z0 = beam.rayleigh_range();
    let w0 = beam.waist();
    let [x, y, z] = point;
    let rho2 = x * x + y * y;
    let spread = 1.0 + (z / z0).powi(2);
    let amplitude = spread.sqrt().recip() * (-rho2 / (w0 * w0 * spread)).exp();
    // k0ρ²/(2z(1 + z0²/z²)) written without the 1/z singularity
    let curvature = k0 * rho2 * z / (2.0 * (z * z + z0 * z0));
    let phase = k0 * z + curvature - (z / z0).atan();
    Complex64::from_polar(amplitude, phase)
}

/// Peak field amplitude squared `E0²` for mean power `power`.
pub fn peak_field_sq(beam: &BeamSpec, power: f64) -> f64 {
    let w0 = beam.waist();
    4.0 * crate::constants::eta_0() * power / (PI * w0 * w0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Polarizability {
    /// Radiation-corrected polarizability (F·m²).
    pub exact: Complex64,
    /// Low-loss real part `4πε0·a·R³`.
    pub alpha_r: f64,
    /// Low-loss imaginary part (scattering only) `8πε0·a²k0³R⁶/3`.
    pub alpha_i: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("relative permittivity real part must exceed 1, got {0}")]
pub struct PermittivityError(pub f64);

pub fn compute_polarizability(
    p: &ParticleSpec,
    beam: &BeamSpec,
) -> Result<Polarizability, PermittivityError> {
    if !(p.eps_real > 1.0) {
        return Err(PermittivityError(p.eps_real));
    }
    let eps = Complex64::new(p.eps_real, p.eps_imag);
    let r3 = p.radius.powi(3);
    let k0 = beam.k0();
    let alpha0 = 4.0 * PI * EPS_0 * r3 * (eps - 1.0) / (eps + 2.0);
    let exact = alpha0 / (1.0 - Complex64::i() * k0.powi(3) * alpha0 / (6.0 * PI * EPS_0));
    let a = p.clausius_mossotti();
    Ok(Polarizability {
        exact,
        alpha_r: 4.0 * PI * EPS_0 * a * r3,
        alpha_i: 8.0 * PI * EPS_0 * a * a * (k0 * p.radius).powi(3) * r3 / 3.0,
        a,
    })
}

/// Every optical coefficient of the trap. Stiffness `K_i = stiffness[i]·P_L`;
/// mean axial pressure `pressure·P_L`; pressure and recoil noise amplitudes
/// `pressure_noise`, `recoil[i]` multiply `sqrt(ħω0·P_L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalCoefficients {
    pub stiffness: [f64; 3],
    pub pressure: f64,
    pub pressure_noise: f64,
    pub recoil: [f64; 3],
    pub kz: f64,
    pub scattered_power: f64,
    pub absorbed_power: f64,
}

/// Closed-form low-loss coefficients.
pub fn compute_coefficients(p: &ParticleSpec, beam: &BeamSpec) -> OpticalCoefficients {
    let a = p.clausius_mossotti();
    let na = beam.numerical_aperture;
    let k0 = beam.k0();
    let r3 = p.radius.powi(3);
    let kr3 = (k0 * p.radius).powi(3);
    let power = beam.mean_power;
    let axial = 1.0 - 0.5 * na * na;

    let a1 = a * na.powi(4) * k0.powi(4) * r3 / C;
    let a3 = a * na.powi(6) * k0.powi(4) * r3 / (2.0 * C);
    let c1 = 2.0 * a * na * kr3 / (15f64.sqrt() * C);
    OpticalCoefficients {
        stiffness: [a1, beam.asymmetry_xy * a1, a3],
        pressure: 4.0 * a * a * axial * na * na * kr3 * kr3 / (3.0 * C),
        pressure_noise: 2.0 * a * axial * na * kr3 / (3f64.sqrt() * C),
        recoil: [c1, 2f64.sqrt() * c1, 2f64.sqrt() * c1],
        kz: beam.kz(),
        scattered_power: 4.0 * a * a * na * na * kr3 * kr3 * power / 3.0,
        absorbed_power: 6.0 * p.eps_imag * na * na * kr3 * power / (p.eps_real + 2.0).powi(2),
    }
}

/// Scattered power from the exact polarizability, `|α|²NA²k0⁶P_L/(12π²ε0²)`.
pub fn scattered_power_exact(pol: &Polarizability, beam: &BeamSpec) -> f64 {
    pol.exact.norm_sqr() * beam.numerical_aperture.powi(2) * beam.k0().powi(6) * beam.mean_power
        / (12.0 * PI * PI * EPS_0 * EPS_0)
}

/// `Ω_i = sqrt(A_i·P_L/M)`.
pub fn trap_frequencies(coeffs: &OpticalCoefficients, p: &ParticleSpec, beam: &BeamSpec) -> [f64; 3] {
    let m = p.mass();
    coeffs.stiffness.map(|a| (a * beam.mean_power / m).sqrt())
}
