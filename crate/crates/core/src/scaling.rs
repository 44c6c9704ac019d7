//! Monotonicity of the minimum Coulomb-axis occupation over a parameter grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::feedback::optimum_coulomb_gain;
use crate::pipeline::Inputs;
use crate::scenario::Scenario;
use crate::thermal::critical_pressure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingParameter {
    Power,
    Radius,
    NumericalAperture,
}

impl ScalingParameter {
    fn apply(self, s: &mut Scenario, value: f64) {
        match self {
            ScalingParameter::Power => s.beam.mean_power = value,
            ScalingParameter::Radius => s.particle.radius = value,
            ScalingParameter::NumericalAperture => s.beam.numerical_aperture = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

pub fn monotonicity(values: &[f64]) -> Monotonicity {
    if values.len() < 2 {
        return Monotonicity::Neither;
    }
    if values.windows(2).all(|w| w[1] > w[0]) {
        Monotonicity::Increasing
    } else if values.windows(2).all(|w| w[1] < w[0]) {
        Monotonicity::Decreasing
    } else {
        Monotonicity::Neither
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub value: f64,
    pub min_occupation: Option<f64>,
    pub optimum_gain: Option<f64>,
    /// Ambient pressure used at this point (Pa).
    pub pressure: f64,
    /// Why the point was left out, if it was.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub parameter: ScalingParameter,
    pub axis: usize,
    /// `ξ` when the damping is pinned to `ξΓ_cr` at every point.
    pub pinned_ratio: Option<f64>,
    pub points: Vec<ScalingPoint>,
    pub verdict: Monotonicity,
}

/// Minimum occupation of Coulomb axis `axis` (0-based) at each grid value.
/// With `pinned_ratio = Some(ξ)` the ambient pressure is re-solved at every
/// point so that `Γ = ξΓ_cr`. Points whose particle melts or overheats are
/// flagged and excluded from the verdict.
pub fn scaling_study(
    s: &Scenario,
    axis: usize,
    parameter: ScalingParameter,
    grid: &[f64],
    pinned_ratio: Option<f64>,
) -> Result<ScalingStudy> {
    if axis > 2 {
        return Err(Error::Usage(format!("axis {} out of range", axis + 1)));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut sc = s.clone();
        parameter.apply(&mut sc, value);
        if let Some(xi) = pinned_ratio {
            let probe = Inputs::compute(&sc);
            let target = match probe {
                Ok(inp) => xi * inp.rates.critical_damping,
                Err(e) => {
                    points.push(excluded(value, sc.gas.ambient_pressure, e)?);
                    continue;
                }
            };
            match critical_pressure(&sc.particle, &sc.gas, &sc.beam, target) {
                Ok(p) => sc.gas = sc.gas.with_pressure(p),
                Err(e) => {
                    points.push(excluded(value, sc.gas.ambient_pressure, e.into())?);
                    continue;
                }
            }
        }
        let inputs = match Inputs::compute(&sc) {
            Ok(i) => i,
            Err(e) => {
                points.push(excluded(value, sc.gas.ambient_pressure, e)?);
                continue;
            }
        };
        if inputs.thermal.melting {
            points.push(ScalingPoint {
                value,
                min_occupation: None,
                optimum_gain: None,
                pressure: sc.gas.ambient_pressure,
                excluded: Some(format!(
                    "surface temperature {:.1} K at or above the melting point",
                    inputs.thermal.surface_temperature
                )),
            });
            continue;
        }
        let opt = optimum_coulomb_gain(&inputs.rates, &inputs.noise, axis);
        points.push(ScalingPoint {
            value,
            min_occupation: Some(opt.min_occupation),
            optimum_gain: Some(opt.gain),
            pressure: sc.gas.ambient_pressure,
            excluded: None,
        });
    }
    let kept: Vec<f64> = points.iter().filter_map(|p| p.min_occupation).collect();
    Ok(ScalingStudy {
        parameter,
        axis,
        pinned_ratio,
        verdict: monotonicity(&kept),
        points,
    })
}

fn excluded(value: f64, pressure: f64, e: Error) -> Result<ScalingPoint> {
    match e {
        Error::Thermal(t) => Ok(ScalingPoint {
            value,
            min_occupation: None,
            optimum_gain: None,
            pressure,
            excluded: Some(t.to_string()),
        }),
        other => Err(other),
    }
}
