//! Shot-noise transition rates of the trapped oscillator, the critical damping
//! rate and the closed-form steady-state occupation.

use serde::Serialize;
use thiserror::Error;

use crate::constants::{HBAR, K_B};
use crate::optics::OpticalCoefficients;
use crate::scenario::{BeamSpec, ParticleSpec};
use crate::thermal::ThermalState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error(
        "trap unstable: Γ at or below critical on axis {} (Γ/Γ_cr = {ratio:.6})",
        axis + 1
    )]
    Unstable { axis: usize, ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSet {
    pub frequencies: [f64; 3],
    pub thermal_occupation: [f64; 3],
    /// Trapping-force (two-phonon) rates, `A_i·ħω0/(16M)`.
    pub gradient: [f64; 3],
    /// Same rates from `A_i²·ħω0P_L/(16M²Ω_i²)`.
    pub gradient_from_spectrum: [f64; 3],
    /// Radiation-pressure plus recoil (one-phonon) rates.
    pub recoil: [f64; 3],
    pub critical_damping: f64,
    pub damping: f64,
    pub linewidths: [f64; 3],
    pub mass: f64,
    pub effective_temperature: f64,
}

/// Bose occupation `1/(exp(ħΩ/k_BT) − 1)`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    (HBAR * omega / (K_B * temperature)).exp_m1().recip()
}

pub fn shot_noise_rates(
    coeffs: &OpticalCoefficients,
    p: &ParticleSpec,
    beam: &BeamSpec,
    thermal: &ThermalState,
) -> RateSet {
    let m = p.mass();
    let omega = crate::optics::trap_frequencies(coeffs, p, beam);
    let hw = beam.photon_energy();
    let psd = beam.power_psd();
    let gradient = coeffs.stiffness.map(|a| a * hw / (16.0 * m));
    let mut gradient_from_spectrum = [0.0; 3];
    let mut recoil = [0.0; 3];
    let mut occ = [0.0; 3];
    for i in 0..3 {
        let a = coeffs.stiffness[i];
        gradient_from_spectrum[i] = a * a * psd / (16.0 * m * m * omega[i] * omega[i]);
        let pressure = if i == 2 { coeffs.pressure_noise.powi(2) } else { 0.0 };
        recoil[i] = (pressure + coeffs.recoil[i].powi(2)) * psd / (2.0 * HBAR * m * omega[i]);
        occ[i] = bose_occupation(omega[i], thermal.effective_temperature);
    }
    let critical_damping = gradient.iter().fold(0.0f64, |acc, &g| acc.max(8.0 * g));
    let damping = thermal.damping_rate();
    RateSet {
        frequencies: omega,
        thermal_occupation: occ,
        gradient,
        gradient_from_spectrum,
        recoil,
        critical_damping,
        damping,
        linewidths: [0.5 * damping; 3],
        mass: m,
        effective_temperature: thermal.effective_temperature,
    }
}

impl RateSet {
    /// Linewidths `(Γ + Γ_fb,i)/2` under feedback rates `gains`.
    pub fn with_feedback_linewidths(mut self, gains: [f64; 3]) -> Self {
        for i in 0..3 {
            self.linewidths[i] = 0.5 * (self.damping + gains[i]);
        }
        self
    }

    /// Thermal plus photon-recoil heating into axis `i`, `m̄_th,iΓ + Γ_r,i`.
    pub fn heating(&self, i: usize) -> f64 {
        self.thermal_occupation[i] * self.damping + self.recoil[i]
    }

    pub fn ladder(&self, i: usize) -> LadderRates {
        LadderRates::new(self.thermal_occupation[i], self.damping, self.recoil[i], self.gradient[i])
    }

    pub fn damping_margin(&self) -> f64 {
        self.damping / self.critical_damping
    }
}

/// Closed-form steady-state occupation per axis.
pub fn steady_state_occupation(rates: &RateSet) -> Result<[f64; 3], RateError> {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = rates.ladder(i).closed_form_mean().ok_or(RateError::Unstable {
            axis: i,
            ratio: rates.damping_margin(),
        })?;
    }
    Ok(out)
}

/// Fock-ladder coefficients of one axis. Propensities out of `|m⟩` are
/// `up1·(m+1)`, `down1·m`, `up2·(m+1)(m+2)` and `down2·m(m−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderRates {
    pub up1: f64,
    pub down1: f64,
    pub up2: f64,
    pub down2: f64,
    /// Linear damping `Γ`, kept separately so `down1 − up1` is not
    /// recovered by cancellation.
    pub damping: f64,
}

impl LadderRates {
    pub fn new(thermal_occupation: f64, damping: f64, recoil: f64, gradient: f64) -> Self {
        let up1 = thermal_occupation * damping + recoil;
        Self {
            up1,
            down1: up1 + damping,
            up2: gradient,
            down2: gradient,
            damping,
        }
    }

    /// Net relaxation rate of the mean, `Γ − 8Γ_g`.
    pub fn relaxation(&self) -> f64 {
        self.damping - 4.0 * (self.up2 + self.down2)
    }

    /// Stationary mean `(up1 + 4Γ_g)/(Γ − 8Γ_g)`; `None` when unstable.
    pub fn closed_form_mean(&self) -> Option<f64> {
        let kappa = self.relaxation();
        (kappa > 0.0).then(|| (self.up1 + 2.0 * (self.up2 + self.down2)) / kappa)
    }
}
