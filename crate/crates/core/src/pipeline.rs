//! Full closed-form evaluation of a scenario.

use serde::Serialize;

use crate::detection::{noise_floors, NoiseFloor};
use crate::error::{Error, Result};
use crate::feedback::{condition_ledger, critical_feedback_rates, occupations_with_feedback, ConditionLedger, FeedbackReport};
use crate::optics::{compute_coefficients, compute_polarizability, OpticalCoefficients, Polarizability};
use crate::rates::{shot_noise_rates, steady_state_occupation, RateSet};
use crate::scenario::{validate_scenario, Scenario, Scheme, ValidationReport};
use crate::thermal::{critical_pressure, thermal_state, ThermalState};

/// Everything derived from a scenario before occupations are solved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inputs {
    pub polarizability: Polarizability,
    pub coeffs: OpticalCoefficients,
    pub thermal: ThermalState,
    pub rates: RateSet,
    pub noise: NoiseFloor,
}

impl Inputs {
    pub fn compute(s: &Scenario) -> Result<Self> {
        let polarizability = compute_polarizability(&s.particle, &s.beam)?;
        let coeffs = compute_coefficients(&s.particle, &s.beam);
        let thermal = thermal_state(&s.particle, &s.gas, coeffs.absorbed_power)?;
        let rates = shot_noise_rates(&coeffs, &s.particle, &s.beam, &thermal);
        let noise = noise_floors(&s.particle, &s.beam, &s.detection)?;
        Ok(Self {
            polarizability,
            coeffs,
            thermal,
            rates,
            noise,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub scenario: Scenario,
    pub validation: ValidationReport,
    #[serde(flatten)]
    pub inputs: Inputs,
    /// Occupations without feedback.
    pub occupations: [f64; 3],
    pub critical_pressure: f64,
    pub feedback: Option<FeedbackReport>,
    pub ledger: ConditionLedger,
    pub warnings: Vec<String>,
}

/// Validates, then evaluates every closed-form quantity. Instability of the
/// bare trap is an error; failed operating conditions are warnings unless
/// the solver is strict.
pub fn evaluate(s: &Scenario) -> Result<Evaluation> {
    let validation = validate_scenario(s);
    if !validation.passed() {
        let names: Vec<String> = validation
            .failures()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::Invalid(names.join("; ")));
    }
    let inputs = Inputs::compute(s)?;
    let mut warnings = validation.warnings.clone();
    let occupations = steady_state_occupation(&inputs.rates)?;
    let critical_pressure = critical_pressure(
        &s.particle,
        &s.gas,
        &s.beam,
        inputs.rates.critical_damping,
    )?;
    if inputs.thermal.melting {
        warnings.push("surface temperature at or above the melting point".to_string());
    }
    let threshold = s.solver.condition_threshold;
    let (feedback, ledger) = match &s.feedback {
        Some(plan) if plan.scheme != Scheme::None => {
            let rep = occupations_with_feedback(
                &inputs.rates,
                &inputs.coeffs,
                &inputs.noise,
                plan,
                &s.solver,
            )?;
            warnings.extend(rep.warnings.iter().cloned());
            let ledger = rep.ledger.clone();
            (Some(rep), ledger)
        }
        _ => {
            let crit = critical_feedback_rates(&inputs.rates, &inputs.noise, Scheme::None);
            let ledger = condition_ledger(&inputs.rates, Scheme::None, [0.0; 3], &crit, threshold);
            for m in ledger.failures() {
                warnings.push(format!(
                    "condition ({}) {} = {:.4e} below threshold {}",
                    m.condition, m.label, m.value, m.threshold
                ));
            }
            if s.solver.strict && !ledger.operable {
                return Err(crate::feedback::FeedbackError::Conditions(warnings.join("; ")).into());
            }
            (None, ledger)
        }
    };
    Ok(Evaluation {
        scenario: s.clone(),
        validation,
        inputs,
        occupations,
        critical_pressure,
        feedback,
        ledger,
        warnings,
    })
}
