//! Internal heating, gas damping in the free-molecular (Epstein) regime, and
//! the effective bath temperature.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::constants::{K_B, SIGMA_SB};
use crate::scenario::{BeamSpec, GasSpec, ParticleSpec};

/// Upper end of the surface-temperature bracket (K).
pub const MAX_SURFACE_TEMPERATURE: f64 = 1e4;
const T_REL_TOL: f64 = 1e-10;
const PRESSURE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermalError {
    #[error("particle overheats: no heat-balance root below {max} K (absorbed {absorbed:e} W)")]
    Overheats { absorbed: f64, max: f64 },
    #[error("absorbed power must be non-negative, got {0:e} W")]
    NegativePower(f64),
    #[error("critical damping rate must be positive, got {0:e}")]
    NonPositiveTarget(f64),
    #[error("critical-pressure iteration did not converge (last relative step {0:e})")]
    NoConvergence(f64),
}

/// Mean molecular speed `sqrt(8k_B·T/(πm))`.
pub fn mean_speed(temperature: f64, molecule_mass: f64) -> f64 {
    (8.0 * K_B * temperature / (PI * molecule_mass)).sqrt()
}

/// Gas mass density `m·P_am/(k_B·T_am)`.
pub fn gas_density(g: &GasSpec) -> f64 {
    g.molecule_mass * g.ambient_pressure / (K_B * g.ambient_temperature)
}

/// Conductive cooling power at surface temperature `ts`.
pub fn conduction_power(p: &ParticleSpec, g: &GasSpec, ts: f64) -> f64 {
    let gam = g.heat_capacity_ratio;
    let v_im = mean_speed(g.ambient_temperature, g.molecule_mass);
    (gam + 1.0) * g.ambient_pressure * v_im / (8.0 * (gam - 1.0) * g.ambient_temperature)
        * g.accommodation
        * p.surface_area()
        * (ts - g.ambient_temperature)
}

/// Net thermal radiation power at surface temperature `ts`.
pub fn radiation_power(p: &ParticleSpec, g: &GasSpec, ts: f64) -> f64 {
    p.emissivity * SIGMA_SB * p.surface_area() * (ts.powi(4) - g.ambient_temperature.powi(4))
}

/// Surface temperature at which conduction plus radiation carry away
/// `absorbed` watts. Bisection on `[T_am, 1e4 K]` polished by Newton steps.
pub fn solve_surface_temperature(
    p: &ParticleSpec,
    g: &GasSpec,
    absorbed: f64,
) -> Result<f64, ThermalError> {
    if absorbed < 0.0 {
        return Err(ThermalError::NegativePower(absorbed));
    }
    let t_am = g.ambient_temperature;
    if absorbed == 0.0 {
        return Ok(t_am);
    }
    let f = |t: f64| conduction_power(p, g, t) + radiation_power(p, g, t) - absorbed;
    let df = |t: f64| {
        conduction_power(p, g, t_am + 1.0)
            + 4.0 * p.emissivity * SIGMA_SB * p.surface_area() * t.powi(3)
    };
    if f(MAX_SURFACE_TEMPERATURE) < 0.0 {
        return Err(ThermalError::Overheats {
            absorbed,
            max: MAX_SURFACE_TEMPERATURE,
        });
    }
    let (mut lo, mut hi) = (t_am, MAX_SURFACE_TEMPERATURE);
    while (hi - lo) > 1e-4 * lo {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = f(t) / df(t);
        let next = (t - step).clamp(lo, hi);
        let done = (next - t).abs() <= T_REL_TOL * t;
        t = next;
        if done {
            break;
        }
    }
    Ok(t)
}

/// Impinging, emerging and total damping rates (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Damping {
    pub impinging: f64,
    pub emerging: f64,
    pub total: f64,
}

pub fn emerging_temperature(g: &GasSpec, ts: f64) -> f64 {
    g.ambient_temperature + g.accommodation * (ts - g.ambient_temperature)
}

pub fn epstein_damping(p: &ParticleSpec, g: &GasSpec, ts: f64) -> Damping {
    let rho = gas_density(g);
    let m = p.mass();
    let area = p.surface_area();
    let v_im = mean_speed(g.ambient_temperature, g.molecule_mass);
    let v_em = mean_speed(emerging_temperature(g, ts), g.molecule_mass);
    let impinging = rho * v_im * area / (3.0 * m);
    let emerging = PI * rho * v_em * area / (24.0 * m);
    Damping {
        impinging,
        emerging,
        total: impinging + emerging,
    }
}

/// Damping-weighted mix of the ambient and emerging-molecule temperatures.
pub fn effective_temperature(impinging: f64, emerging: f64, t_am: f64, t_em: f64) -> f64 {
    (impinging * t_am + emerging * t_em) / (impinging + emerging)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalState {
    pub surface_temperature: f64,
    pub emerging_temperature: f64,
    pub effective_temperature: f64,
    pub damping: Damping,
    pub impinging_speed: f64,
    pub emerging_speed: f64,
    pub conduction_power: f64,
    pub radiation_power: f64,
    pub absorbed_power: f64,
    pub melting: bool,
}

impl ThermalState {
    pub fn damping_rate(&self) -> f64 {
        self.damping.total
    }

    /// `|P_a − P_cc − P_rc|`.
    pub fn balance_residual(&self) -> f64 {
        (self.absorbed_power - self.conduction_power - self.radiation_power).abs()
    }

    pub fn conduction_fraction(&self) -> f64 {
        self.conduction_power / (self.conduction_power + self.radiation_power)
    }
}

pub fn thermal_state(
    p: &ParticleSpec,
    g: &GasSpec,
    absorbed: f64,
) -> Result<ThermalState, ThermalError> {
    let ts = solve_surface_temperature(p, g, absorbed)?;
    let t_em = emerging_temperature(g, ts);
    let damping = epstein_damping(p, g, ts);
    let t_eff = if damping.total > 0.0 {
        effective_temperature(damping.impinging, damping.emerging, g.ambient_temperature, t_em)
    } else {
        // Vacuum limit of the weighted mean; weights are pressure-independent.
        let unit = epstein_damping(p, &g.with_pressure(1.0), ts);
        effective_temperature(unit.impinging, unit.emerging, g.ambient_temperature, t_em)
    };
    Ok(ThermalState {
        surface_temperature: ts,
        emerging_temperature: t_em,
        effective_temperature: t_eff,
        damping,
        impinging_speed: mean_speed(g.ambient_temperature, g.molecule_mass),
        emerging_speed: mean_speed(t_em, g.molecule_mass),
        conduction_power: conduction_power(p, g, ts),
        radiation_power: radiation_power(p, g, ts),
        absorbed_power: absorbed,
        melting: ts >= p.melting_point,
    })
}

/// Ambient pressure at which the self-consistent damping rate equals
/// `target` (1/s), by the fixed point `P ← P·target/Γ(P)`.
pub fn critical_pressure(
    p: &ParticleSpec,
    g: &GasSpec,
    beam: &BeamSpec,
    target: f64,
) -> Result<f64, ThermalError> {
    if !(target > 0.0) {
        return Err(ThermalError::NonPositiveTarget(target));
    }
    let absorbed = crate::optics::compute_coefficients(p, beam).absorbed_power;
    let damping_at = |pressure: f64| -> Result<f64, ThermalError> {
        let gp = g.with_pressure(pressure);
        let ts = solve_surface_temperature(p, &gp, absorbed)?;
        Ok(epstein_damping(p, &gp, ts).total)
    };
    // Γ is linear in P at fixed T_s, so one unit-pressure evaluation gives a
    // seed that is already close.
    let mut pressure = target / damping_at(1.0)?;
    let mut step = f64::INFINITY;
    for _ in 0..200 {
        let next = pressure * target / damping_at(pressure)?;
        step = (next - pressure).abs() / next;
        pressure = next;
        if step < PRESSURE_REL_TOL {
            return Ok(pressure);
        }
    }
    Err(ThermalError::NoConvergence(step))
}
