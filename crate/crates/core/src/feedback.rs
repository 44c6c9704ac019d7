//! Parametric and hybrid (Coulomb) feedback cooling: feedback-induced rates,
//! critical and optimum gains, the operating-condition ledger and the
//! self-consistent occupations.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::constants::HBAR;
use crate::detection::NoiseFloor;
use crate::optics::OpticalCoefficients;
use crate::rates::RateSet;
use crate::scenario::{FeedbackPlan, GainRule, Scheme, SolverSettings};

/// Relative slack applied when comparing a margin with its threshold.
pub const MARGIN_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeedbackError {
    #[error("feedback-driven instability: Γ_fb above critical on axis {}", axis + 1)]
    Unstable { axis: usize },
    #[error("fixed point did not converge after {iterations} iterations (residuals {history:?})")]
    NoConvergence {
        iterations: usize,
        history: Vec<f64>,
    },
    #[error("axis {}: {reason}", axis + 1)]
    Rule { axis: usize, reason: String },
    #[error("operating conditions failed: {0}")]
    Conditions(String),
}

/// Critical feedback rate of one axis; the Coulomb axis has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalGain {
    Finite(f64),
    Unbounded,
}

impl CriticalGain {
    pub fn value(self) -> f64 {
        match self {
            CriticalGain::Finite(v) => v,
            CriticalGain::Unbounded => f64::INFINITY,
        }
    }
}

impl Serialize for CriticalGain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CriticalGain::Finite(v) => s.serialize_f64(*v),
            CriticalGain::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// Feedback-induced rates at one set of occupations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackRates {
    pub extra_gradient: [f64; 3],
    pub extra_recoil: [f64; 3],
    pub variances: [f64; 3],
    pub gains: [f64; 3],
}

/// Position variance `(2m̄ + 1)ħ/(2MΩ)`.
pub fn position_variance(occupation: f64, mass: f64, omega: f64) -> f64 {
    (2.0 * occupation + 1.0) * HBAR / (2.0 * mass * omega)
}

pub fn feedback_rates(
    rates: &RateSet,
    coeffs: &OpticalCoefficients,
    noise: &NoiseFloor,
    scheme: Scheme,
    gains: [f64; 3],
    occupations: [f64; 3],
) -> FeedbackRates {
    let m = rates.mass;
    let w = rates.frequencies;
    let s = noise.floors;
    let a = coeffs.stiffness;
    let var: [f64; 3] = std::array::from_fn(|j| position_variance(occupations[j], m, w[j]));
    let coulomb = scheme.coulomb_axis();
    let filtered = noise.geometry.filtered;
    let mut extra_gradient = [0.0; 3];
    let mut extra_recoil = [0.0; 3];
    // per-channel drive Γ_fb,j²S_nj/x̄²_j; the Coulomb channel feeds no gradient force
    let drive: [f64; 3] = std::array::from_fn(|j| {
        if coulomb == Some(j) || gains[j] == 0.0 {
            0.0
        } else {
            gains[j] * gains[j] * s[j] / var[j]
        }
    });
    if scheme != Scheme::None {
        if filtered {
            for i in 0..3 {
                extra_gradient[i] = drive[i] / 4.0;
            }
        } else {
            for i in 0..3 {
                extra_gradient[i] = (0..3)
                    .filter(|&j| drive[j] > 0.0)
                    .map(|j| (a[i] / a[j]).powi(2) * drive[j] / 4.0)
                    .sum();
            }
            extra_recoil[2] = m * w[2]
                * (0..3)
                    .filter(|&j| drive[j] > 0.0)
                    .map(|j| (coeffs.pressure / a[j]).powi(2) * drive[j] / (2.0 * HBAR))
                    .sum::<f64>();
        }
        if let Some(k) = coulomb {
            extra_gradient[k] = if filtered { 0.0 } else { extra_gradient[k] };
            extra_recoil[k] += m * w[k] * gains[k] * gains[k] * s[k] / (2.0 * HBAR);
        }
    }
    FeedbackRates {
        extra_gradient,
        extra_recoil,
        variances: var,
        gains,
    }
}

/// Right-hand side of the occupation balance with feedback. With all
/// feedback terms zero this is bit-identical to the no-feedback closed form.
fn balance(rates: &RateSet, fr: &FeedbackRates, i: usize) -> Option<f64> {
    let lr = rates.ladder(i);
    let num = lr.up1 + 2.0 * (lr.up2 + lr.down2) + fr.extra_recoil[i] + 4.0 * fr.extra_gradient[i];
    let den = lr.relaxation() + fr.gains[i] - 8.0 * fr.extra_gradient[i];
    (den > 0.0).then(|| num / den)
}

/// `Γ_fb,cr,i = [(m̄_th,iΓ + Γ_r,i)Γħ/(2MΩ_iS_ni)]^(1/3)`; unbounded on the
/// Coulomb axis.
pub fn critical_feedback_rates(rates: &RateSet, noise: &NoiseFloor, scheme: Scheme) -> [CriticalGain; 3] {
    std::array::from_fn(|i| {
        if scheme.coulomb_axis() == Some(i) {
            CriticalGain::Unbounded
        } else {
            let cube = rates.heating(i) * rates.damping * HBAR
                / (2.0 * rates.mass * rates.frequencies[i] * noise.floors[i]);
            CriticalGain::Finite(cube.cbrt())
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumGain {
    pub axis: usize,
    pub gain: f64,
    pub min_occupation: f64,
    /// Minimizer located numerically on `[0.1, 10]×gain`.
    pub located: f64,
}

impl OptimumGain {
    pub fn located_offset(&self) -> f64 {
        (self.located - self.gain).abs() / self.gain
    }
}

/// `m̄_k(Γ_fb) = (m̄_th,kΓ + Γ_r,k + MΩ_kΓ_fb²S_nk/(2ħ))/Γ_fb`.
pub fn coulomb_occupation(rates: &RateSet, noise: &NoiseFloor, k: usize, gain: f64) -> f64 {
    let c = rates.mass * rates.frequencies[k] * noise.floors[k] / (2.0 * HBAR);
    (rates.heating(k) + c * gain * gain) / gain
}

pub fn optimum_coulomb_gain(rates: &RateSet, noise: &NoiseFloor, k: usize) -> OptimumGain {
    let h = rates.heating(k);
    let mws = rates.mass * rates.frequencies[k] * noise.floors[k];
    let gain = (h * 2.0 * HBAR / mws).sqrt();
    let min_occupation = 2.0 * (h * mws / (2.0 * HBAR)).sqrt();
    let located = golden_section(
        |lg| coulomb_occupation(rates, noise, k, lg.exp()),
        (0.1 * gain).ln(),
        (10.0 * gain).ln(),
        1e-10,
    )
    .exp();
    OptimumGain {
        axis: k,
        gain,
        min_occupation,
        located,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Feedback rates implied by the plan's per-axis rules.
pub fn resolve_gains(
    rates: &RateSet,
    noise: &NoiseFloor,
    plan: &FeedbackPlan,
) -> Result<[f64; 3], FeedbackError> {
    let critical = critical_feedback_rates(rates, noise, plan.scheme);
    let mut gains = [0.0; 3];
    for (i, rule) in plan.axes.iter().enumerate() {
        gains[i] = match *rule {
            GainRule::Gain(g) => g,
            GainRule::CriticalCubeFraction(f) => match critical[i] {
                CriticalGain::Finite(c) => f.cbrt() * c,
                CriticalGain::Unbounded => {
                    return Err(FeedbackError::Rule {
                        axis: i,
                        reason: "Coulomb axis has no critical rate".into(),
                    })
                }
            },
            GainRule::OptimumFactor(f) => {
                if plan.scheme.coulomb_axis() != Some(i) {
                    return Err(FeedbackError::Rule {
                        axis: i,
                        reason: "optimum factor applies to the Coulomb axis only".into(),
                    });
                }
                f * optimum_coulomb_gain(rates, noise, i).gain
            }
        };
        if !(gains[i] >= 0.0) {
            return Err(FeedbackError::Rule {
                axis: i,
                reason: format!("negative gain {}", gains[i]),
            });
        }
    }
    Ok(gains)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    /// `i`, `ii`, `iii`, `iv`, or `assumption` for the informational
    /// `Γ_fb,i/Γ` entries.
    pub condition: String,
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub exempt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionLedger {
    pub margins: Vec<Margin>,
    pub operable: bool,
}

impl ConditionLedger {
    pub fn failures(&self) -> impl Iterator<Item = &Margin> {
        self.margins
            .iter()
            .filter(|m| !m.passed && !m.exempt && m.condition != "assumption")
    }
}

pub fn margin_passes(value: f64, threshold: f64) -> bool {
    value >= threshold * (1.0 - MARGIN_SLACK)
}

/// Margins of the four operating conditions. Linewidths come from `rates`
/// and should already include the feedback rates.
pub fn condition_ledger(
    rates: &RateSet,
    scheme: Scheme,
    gains: [f64; 3],
    critical: &[CriticalGain; 3],
    threshold: f64,
) -> ConditionLedger {
    let w = rates.frequencies;
    let d = rates.linewidths;
    let k = scheme.coulomb_axis();
    let mut margins = Vec::new();
    let mut push = |condition: &str, label: String, value: f64, exempt: bool| {
        margins.push(Margin {
            condition: condition.to_string(),
            label,
            value,
            threshold,
            passed: margin_passes(value, threshold),
            exempt,
        });
    };
    if scheme != Scheme::None {
        for i in 0..3 {
            for j in (i + 1)..3 {
                push(
                    "i",
                    format!("|Ω{}−Ω{}|/(δ{}+δ{})", j + 1, i + 1, j + 1, i + 1),
                    (w[j] - w[i]).abs() / (d[j] + d[i]),
                    false,
                );
            }
        }
        for j in 0..3 {
            push(
                "ii",
                format!("|2Ω{}−Ω3|/(2δ{}+δ3)", j + 1, j + 1),
                (2.0 * w[j] - w[2]).abs() / (2.0 * d[j] + d[2]),
                k == Some(j),
            );
        }
    }
    push("iii", "Γ/Γ_cr".to_string(), rates.damping_margin(), false);
    if scheme != Scheme::None {
        for i in 0..3 {
            let exempt = k == Some(i);
            let value = if exempt || gains[i] == 0.0 {
                f64::INFINITY
            } else {
                (critical[i].value() / gains[i]).powi(3)
            };
            push("iv", format!("Γ_fb,cr,{0}³/Γ_fb,{0}³", i + 1), value, exempt);
        }
        for i in 0..3 {
            push(
                "assumption",
                format!("Γ_fb,{}/Γ", i + 1),
                gains[i] / rates.damping,
                false,
            );
        }
    }
    let operable = margins
        .iter()
        .all(|m| m.passed || m.exempt || m.condition == "assumption");
    ConditionLedger { margins, operable }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackReport {
    pub scheme: Scheme,
    pub occupations: [f64; 3],
    pub rates: FeedbackRates,
    pub critical: [CriticalGain; 3],
    pub optimum: Option<OptimumGain>,
    pub ledger: ConditionLedger,
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Occupations with the feedback-induced rates solved self-consistently by
/// damped fixed-point iteration, seeded with `(m̄_thΓ + Γ_r)/(Γ + Γ_fb)`.
pub fn occupations_with_feedback(
    rates: &RateSet,
    coeffs: &OpticalCoefficients,
    noise: &NoiseFloor,
    plan: &FeedbackPlan,
    settings: &SolverSettings,
) -> Result<FeedbackReport, FeedbackError> {
    let gains = resolve_gains(rates, noise, plan)?;
    let seed: [f64; 3] = std::array::from_fn(|i| rates.heating(i) / (rates.damping + gains[i]));
    solve_from_seed(rates, coeffs, noise, plan, settings, gains, seed)
}

pub fn solve_from_seed(
    rates: &RateSet,
    coeffs: &OpticalCoefficients,
    noise: &NoiseFloor,
    plan: &FeedbackPlan,
    settings: &SolverSettings,
    gains: [f64; 3],
    seed: [f64; 3],
) -> Result<FeedbackReport, FeedbackError> {
    let scheme = plan.scheme;
    let apply = |m: [f64; 3]| -> Result<([f64; 3], FeedbackRates), FeedbackError> {
        let fr = feedback_rates(rates, coeffs, noise, scheme, gains, m);
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = balance(rates, &fr, i).ok_or(FeedbackError::Unstable { axis: i })?;
        }
        Ok((out, fr))
    };
    let residual_of = |m: &[f64; 3], f: &[f64; 3]| {
        (0..3)
            .map(|i| (f[i] - m[i]).abs() / f[i].abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    let mut m = seed;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (f, _) = apply(m)?;
        let r = residual_of(&m, &f);
        history.push(r);
        if r < settings.tolerance {
            break;
        }
        iterations += 1;
        if iterations > settings.max_iterations {
            let tail = history.len().saturating_sub(10);
            return Err(FeedbackError::NoConvergence {
                iterations: settings.max_iterations,
                history: history[tail..].to_vec(),
            });
        }
        for i in 0..3 {
            m[i] = (1.0 - settings.damping) * m[i] + settings.damping * f[i];
        }
    }
    // report the map applied at the converged point
    let (occupations, fr) = apply(m)?;
    let (again, _) = apply(occupations)?;
    let residual = residual_of(&occupations, &again);

    let critical = critical_feedback_rates(rates, noise, scheme);
    let optimum = scheme.coulomb_axis().map(|k| optimum_coulomb_gain(rates, noise, k));
    let with_lw = rates.with_feedback_linewidths(gains);
    let ledger = condition_ledger(&with_lw, scheme, gains, &critical, settings.condition_threshold);
    let mut warnings = Vec::new();
    if !noise.geometry.filtered {
        warnings.push(
            "unfiltered photocurrents: critical rates use the filtered closed form".to_string(),
        );
    }
    for mg in ledger.failures() {
        warnings.push(format!(
            "condition ({}) {} = {:.4e} below threshold {}",
            mg.condition, mg.label, mg.value, mg.threshold
        ));
    }
    if settings.strict && !ledger.operable {
        return Err(FeedbackError::Conditions(warnings.join("; ")));
    }
    Ok(FeedbackReport {
        scheme,
        occupations,
        rates: fr,
        critical,
        optimum,
        ledger,
        iterations,
        residual,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::pipeline::Inputs;
    use crate::rates::steady_state_occupation;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn parametric(f: f64) -> FeedbackPlan {
        FeedbackPlan::parametric([GainRule::CriticalCubeFraction(f); 3])
    }

    fn hybrid(k: usize) -> FeedbackPlan {
        let mut axes = [GainRule::CriticalCubeFraction(0.1); 3];
        axes[k] = GainRule::OptimumFactor(1.0);
        FeedbackPlan::hybrid(k, axes)
    }

    #[test]
    fn zero_gain_matches_closed_form_bitwise() {
        for s in [fixtures::baseline_70nm(), fixtures::baseline_180nm()] {
            let inp = Inputs::compute(&s).unwrap();
            let eq2 = steady_state_occupation(&inp.rates).unwrap();
            for scheme in [Scheme::Parametric, Scheme::Hybrid { coulomb_axis: 2 }] {
                let plan = FeedbackPlan::zero_gain(scheme);
                let rep = occupations_with_feedback(
                    &inp.rates, &inp.coeffs, &inp.noise, &plan, &s.solver,
                )
                .unwrap();
                assert_eq!(rep.occupations, eq2);
            }
        }
    }

    #[test]
    fn converged_point_reproduces_itself() {
        for s in [fixtures::baseline_70nm(), fixtures::baseline_180nm()] {
            let inp = Inputs::compute(&s).unwrap();
            for plan in [parametric(0.1), hybrid(0), hybrid(2)] {
                let rep = occupations_with_feedback(
                    &inp.rates, &inp.coeffs, &inp.noise, &plan, &s.solver,
                )
                .unwrap();
                assert!(rep.residual < 1e-10, "{}", rep.residual);
                assert!(rep.occupations.iter().all(|&m| m > 0.0));
            }
        }
    }

    #[test]
    fn perturbed_seed_reconverges() {
        for s in [fixtures::baseline_70nm(), fixtures::baseline_180nm()] {
            let inp = Inputs::compute(&s).unwrap();
            for plan in [parametric(0.1), hybrid(0), hybrid(2)] {
                let base = occupations_with_feedback(
                    &inp.rates, &inp.coeffs, &inp.noise, &plan, &s.solver,
                )
                .unwrap();
                let gains = resolve_gains(&inp.rates, &inp.noise, &plan).unwrap();
                for factor in [0.9, 1.1] {
                    let seed = base.occupations.map(|m| m * factor);
                    let rep = solve_from_seed(
                        &inp.rates, &inp.coeffs, &inp.noise, &plan, &s.solver, gains, seed,
                    )
                    .unwrap();
                    for i in 0..3 {
                        assert!(rel(rep.occupations[i], base.occupations[i]) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn parametric_axis_three_coldest() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let rep =
            occupations_with_feedback(&inp.rates, &inp.coeffs, &inp.noise, &parametric(0.1), &s.solver)
                .unwrap();
        let m = rep.occupations;
        assert!(m[2] < m[0] && m[2] < m[1]);
        // within a factor of 20 of 3e4 and 5e3
        assert!(m[0] / 3e4 < 20.0 && 3e4 / m[0] < 20.0);
        assert!(m[2] / 5e3 < 20.0 && 5e3 / m[2] < 20.0);
        // condition (iv) margin is exactly the inverse fraction
        let iv: Vec<_> = rep.ledger.margins.iter().filter(|g| g.condition == "iv").collect();
        assert!(iv.iter().all(|g| rel(g.value, 10.0) < 1e-12 && g.passed));
    }

    #[test]
    fn critical_rates_order_of_magnitude() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let c = critical_feedback_rates(&inp.rates, &inp.noise, Scheme::Parametric);
        let hz = |g: CriticalGain| g.value() / (2.0 * PI);
        assert!(hz(c[0]) / 0.02 < 20.0 && 0.02 / hz(c[0]) < 20.0);
        assert!(hz(c[2]) / 0.3 < 20.0 && 0.3 / hz(c[2]) < 20.0);
        let h = critical_feedback_rates(&inp.rates, &inp.noise, Scheme::Hybrid { coulomb_axis: 2 });
        assert_eq!(h[2], CriticalGain::Unbounded);
        assert_eq!(h[0], c[0]);
    }

    #[test]
    fn critical_cube_scales_with_damping() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let mut r = inp.rates;
        r.recoil = [0.0; 3];
        let c1 = critical_feedback_rates(&r, &inp.noise, Scheme::Parametric);
        r.damping *= 2.0;
        let c2 = critical_feedback_rates(&r, &inp.noise, Scheme::Parametric);
        for i in 0..3 {
            assert!(rel((c2[i].value() / c1[i].value()).powi(3), 4.0) < 1e-12);
        }
    }

    #[test]
    fn optimum_identities() {
        for s in [fixtures::baseline_70nm(), fixtures::baseline_180nm()] {
            let inp = Inputs::compute(&s).unwrap();
            for k in 0..3 {
                let o = optimum_coulomb_gain(&inp.rates, &inp.noise, k);
                let h = inp.rates.heating(k);
                assert!(rel(o.min_occupation * o.gain, 2.0 * h) < 1e-10);
                assert!(o.located_offset() < 1e-3);
                assert!(rel(coulomb_occupation(&inp.rates, &inp.noise, k, o.gain), o.min_occupation) < 1e-12);
            }
        }
    }

    #[test]
    fn unfiltered_gradient_rates_dominate_filtered() {
        let mut s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let gains = resolve_gains(&inp.rates, &inp.noise, &parametric(0.1)).unwrap();
        let m = [1e4, 1e4, 1e3];
        let f = feedback_rates(&inp.rates, &inp.coeffs, &inp.noise, Scheme::Parametric, gains, m);
        s.detection.filtered = false;
        let inp2 = Inputs::compute(&s).unwrap();
        let u = feedback_rates(&inp2.rates, &inp2.coeffs, &inp2.noise, Scheme::Parametric, gains, m);
        for i in 0..3 {
            assert!(u.extra_gradient[i] >= f.extra_gradient[i]);
        }
        assert_eq!(f.extra_recoil, [0.0; 3]);
        assert!(u.extra_recoil[2] > 0.0);
        assert_eq!(u.extra_recoil[0], 0.0);
    }

    #[test]
    fn coulomb_axis_heating_is_quadratic_in_gain() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let scheme = Scheme::Hybrid { coulomb_axis: 2 };
        let m = [1e4, 1e4, 50.0];
        let r1 = feedback_rates(&inp.rates, &inp.coeffs, &inp.noise, scheme, [0.0, 0.0, 100.0], m);
        let r2 = feedback_rates(&inp.rates, &inp.coeffs, &inp.noise, scheme, [0.0, 0.0, 200.0], m);
        assert_eq!(r1.extra_gradient[2], 0.0);
        assert!(r1.extra_recoil[2] > 0.0);
        assert!(rel(r2.extra_recoil[2], 4.0 * r1.extra_recoil[2]) < 1e-14);
    }

    #[test]
    fn ledger_flags_degenerate_transverse_frequencies() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let rep =
            occupations_with_feedback(&inp.rates, &inp.coeffs, &inp.noise, &parametric(0.1), &s.solver)
                .unwrap();
        let deg = rep.ledger.margins.iter().find(|m| m.label.starts_with("|Ω2−Ω1|")).unwrap();
        assert!(!deg.passed);
        assert!(!rep.ledger.operable);
        let mut strict = s.solver;
        strict.strict = true;
        let err = occupations_with_feedback(&inp.rates, &inp.coeffs, &inp.noise, &parametric(0.1), &strict)
            .unwrap_err();
        assert!(matches!(err, FeedbackError::Conditions(_)));
    }

    #[test]
    fn hybrid_exemptions() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let rep = occupations_with_feedback(&inp.rates, &inp.coeffs, &inp.noise, &hybrid(2), &s.solver)
            .unwrap();
        let exempt: Vec<_> = rep.ledger.margins.iter().filter(|m| m.exempt).map(|m| m.label.clone()).collect();
        assert_eq!(exempt, vec!["|2Ω3−Ω3|/(2δ3+δ3)".to_string(), "Γ_fb,cr,3³/Γ_fb,3³".to_string()]);
    }

    #[test]
    fn ledger_is_pure() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let crit = critical_feedback_rates(&inp.rates, &inp.noise, Scheme::Parametric);
        let a = condition_ledger(&inp.rates, Scheme::Parametric, [1.0; 3], &crit, 10.0);
        let b = condition_ledger(&inp.rates, Scheme::Parametric, [1.0; 3], &crit, 10.0);
        assert_eq!(a, b);
    }

    #[test]
    fn gain_above_critical_is_unstable() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        // far above critical the measurement-noise gradient term outgrows Γ + Γ_fb
        let big = 20.0 * optimum_coulomb_gain(&inp.rates, &inp.noise, 2).gain;
        let plan = FeedbackPlan::parametric([GainRule::Gain(0.0), GainRule::Gain(0.0), GainRule::Gain(big)]);
        let err = occupations_with_feedback(&inp.rates, &inp.coeffs, &inp.noise, &plan, &s.solver)
            .unwrap_err();
        assert_eq!(err, FeedbackError::Unstable { axis: 2 });
    }

    #[test]
    fn optimum_rule_rejected_off_coulomb_axis() {
        let s = fixtures::baseline_70nm();
        let inp = Inputs::compute(&s).unwrap();
        let plan = FeedbackPlan::parametric([GainRule::OptimumFactor(1.0); 3]);
        assert!(resolve_gains(&inp.rates, &inp.noise, &plan).is_err());
    }
}
