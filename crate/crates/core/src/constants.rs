//! CODATA 2018 physical constants in SI units.

use serde::Serialize;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS_0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Stefan-Boltzmann constant (W/(m²·K⁴)).
pub const SIGMA_SB: f64 = 5.670_374_419e-8;
/// Elementary charge (C).
pub const Q_E: f64 = 1.602_176_634e-19;

/// Impedance of free space, `sqrt(MU_0 / EPS_0)` (Ω).
pub fn eta_0() -> f64 {
    (MU_0 / EPS_0).sqrt()
}

/// The constant set bundled as a record, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
    pub eps_0: f64,
    pub eta_0: f64,
    pub sigma_sb: f64,
    pub q_e: f64,
}

impl PhysicalConstants {
    pub fn codata_2018() -> Self {
        Self {
            hbar: HBAR,
            k_b: K_B,
            c: C,
            eps_0: EPS_0,
            eta_0: eta_0(),
            sigma_sb: SIGMA_SB,
            q_e: Q_E,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impedance_consistent_with_light_speed() {
        let c_from_mu_eps = 1.0 / (MU_0 * EPS_0).sqrt();
        assert!((c_from_mu_eps / C - 1.0).abs() < 1e-10);
        let k = PhysicalConstants::codata_2018();
        // eta_0 = mu_0 c
        assert!((k.eta_0 / (MU_0 * C) - 1.0).abs() < 1e-10);
        assert!((k.eta_0 - 376.730_313_668).abs() < 1e-6);
    }
}
