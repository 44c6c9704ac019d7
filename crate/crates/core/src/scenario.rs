//! Input records for a levitated-particle scenario and the scenario file
//! format.
//!
//! Scenario files are JSON with the sections `particle`, `beam`, `gas`,
//! `detection` and the optional `feedback` and `solver`. Any numeric field
//! `foo` may be accompanied by `foo_unit` naming one of the units in
//! [`crate::units`]; without it the value is taken as SI. Unknown keys are
//! rejected.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::C;
use crate::units::{self, UnitError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field `{field}`: {source}")]
    Unit { field: String, source: UnitError },
    #[error("field `{0}` is required")]
    Missing(&'static str),
    #[error("invalid feedback plan: {0}")]
    Plan(String),
}

/// Dielectric sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticleSpec {
    pub radius: f64,
    pub mass_density: f64,
    pub eps_real: f64,
    pub eps_imag: f64,
    pub emissivity: f64,
    pub melting_point: f64,
}

impl ParticleSpec {
    pub const DEFAULT_EMISSIVITY: f64 = 1.0;
    /// Fused silica.
    pub const DEFAULT_MELTING_POINT: f64 = 1873.0;

    pub fn new(radius: f64, mass_density: f64, eps_real: f64, eps_imag: f64) -> Self {
        Self {
            radius,
            mass_density,
            eps_real,
            eps_imag,
            emissivity: Self::DEFAULT_EMISSIVITY,
            melting_point: Self::DEFAULT_MELTING_POINT,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass_density * 4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn surface_area(&self) -> f64 {
        4.0 * PI * self.radius * self.radius
    }

    /// Clausius-Mossotti factor `(ε_R − 1)/(ε_R + 2)`.
    pub fn clausius_mossotti(&self) -> f64 {
        (self.eps_real - 1.0) / (self.eps_real + 2.0)
    }

    pub fn loss_ratio(&self) -> f64 {
        self.eps_imag / self.eps_real
    }
}

/// Focused Gaussian trapping beam, polarized along x and propagating along z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamSpec {
    pub wavelength: f64,
    pub mean_power: f64,
    pub numerical_aperture: f64,
    /// Multiplies the y-axis stiffness coefficient.
    pub asymmetry_xy: f64,
}

impl BeamSpec {
    pub fn new(wavelength: f64, mean_power: f64, numerical_aperture: f64) -> Self {
        Self {
            wavelength,
            mean_power,
            numerical_aperture,
            asymmetry_xy: 1.0,
        }
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn omega0(&self) -> f64 {
        self.k0() * C
    }

    pub fn rayleigh_range(&self) -> f64 {
        2.0 / (self.k0() * self.numerical_aperture.powi(2))
    }

    pub fn waist(&self) -> f64 {
        2.0 / (self.k0() * self.numerical_aperture)
    }

    /// Axial wavenumber at the focus, `k0 − 1/z0`.
    pub fn kz(&self) -> f64 {
        self.k0() * (1.0 - 0.5 * self.numerical_aperture.powi(2))
    }

    /// Photon energy `ħω0`.
    pub fn photon_energy(&self) -> f64 {
        crate::constants::HBAR * self.omega0()
    }

    /// Shot-noise power spectral density `ħω0·P̄_L` (double-sided, angular).
    pub fn power_psd(&self) -> f64 {
        self.photon_energy() * self.mean_power
    }
}

/// Background gas. Defaults are dry air at room temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasSpec {
    pub ambient_pressure: f64,
    pub ambient_temperature: f64,
    pub molecule_mass: f64,
    pub heat_capacity_ratio: f64,
    pub accommodation: f64,
}

impl GasSpec {
    pub const AIR_MOLECULE_MASS: f64 = 4.81e-26;
    pub const AIR_HEAT_CAPACITY_RATIO: f64 = 1.4;
    pub const ROOM_TEMPERATURE: f64 = 300.0;
    /// Thermal accommodation coefficient. Calibrated so that a 70 nm fused
    /// silica sphere in a 100 mW, NA 0.8, 1064 nm trap at 7e-9 mbar has an
    /// effective bath temperature of 697 K.
    pub const DEFAULT_ACCOMMODATION: f64 = 0.777;

    pub fn air(ambient_pressure: f64) -> Self {
        Self {
            ambient_pressure,
            ambient_temperature: Self::ROOM_TEMPERATURE,
            molecule_mass: Self::AIR_MOLECULE_MASS,
            heat_capacity_ratio: Self::AIR_HEAT_CAPACITY_RATIO,
            accommodation: Self::DEFAULT_ACCOMMODATION,
        }
    }

    pub fn with_pressure(self, ambient_pressure: f64) -> Self {
        Self {
            ambient_pressure,
            ..self
        }
    }
}

/// Photodetection geometry. `effective_distance` is measured along the beam
/// axis; `offset_x`/`offset_y` locate the balanced detector pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionSpec {
    pub effective_distance: f64,
    pub a_d1: f64,
    pub a_d2: f64,
    pub a_d3: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    pub filtered: bool,
}

impl DetectionSpec {
    /// Areas and offsets placed at the largest values the paraxial
    /// approximation allows at distance `z`, with `X² = a_d1 = λ0Z/(45π)`.
    pub fn pinned(wavelength: f64, z: f64, filtered: bool) -> Self {
        let side = wavelength * z / (45.0 * PI);
        Self {
            effective_distance: z,
            a_d1: side,
            a_d2: side,
            a_d3: wavelength * z / (5.0 * PI),
            offset_x: side.sqrt(),
            offset_y: side.sqrt(),
            filtered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    None,
    Parametric,
    /// Axis `coulomb_axis` (0-based) is cooled by a Coulomb force.
    Hybrid { coulomb_axis: usize },
}

impl Scheme {
    pub fn coulomb_axis(self) -> Option<usize> {
        match self {
            Scheme::Hybrid { coulomb_axis } => Some(coulomb_axis),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Parametric => "parametric",
            Scheme::Hybrid { .. } => "hybrid",
        }
    }
}

/// How the feedback rate of one axis is chosen. When several are given for
/// an axis, an explicit gain wins over a critical fraction, which wins over
/// an optimum fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GainRule {
    /// Explicit rate in rad/s.
    Gain(f64),
    /// `Γ_fb³ = fraction · Γ_fb,cr³`.
    CriticalCubeFraction(f64),
    /// `Γ_fb = factor · Γ_fb,opt` (Coulomb axis only).
    OptimumFactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeedbackPlan {
    pub scheme: Scheme,
    pub axes: [GainRule; 3],
}

impl FeedbackPlan {
    pub fn parametric(axes: [GainRule; 3]) -> Self {
        Self {
            scheme: Scheme::Parametric,
            axes,
        }
    }

    pub fn hybrid(coulomb_axis: usize, axes: [GainRule; 3]) -> Self {
        Self {
            scheme: Scheme::Hybrid { coulomb_axis },
            axes,
        }
    }

    pub fn zero_gain(scheme: Scheme) -> Self {
        Self {
            scheme,
            axes: [GainRule::Gain(0.0); 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    /// Factor standing in for "much greater than" in the operating conditions.
    pub condition_threshold: f64,
    /// Treat failed operating conditions as errors.
    pub strict: bool,
    /// `Γ = ξ·Γ_cr` used by pinned-damping scaling studies.
    pub pinned_xi: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            damping: 0.5,
            condition_threshold: 10.0,
            strict: false,
            pinned_xi: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub particle: ParticleSpec,
    pub beam: BeamSpec,
    pub gas: GasSpec,
    pub detection: DetectionSpec,
    pub feedback: Option<FeedbackPlan>,
    pub solver: SolverSettings,
}

impl Scenario {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text)?;
        raw.into_scenario()
    }

    pub fn with_feedback(mut self, plan: FeedbackPlan) -> Self {
        self.feedback = Some(plan);
        self
    }
}

// ---------------------------------------------------------------------------
// File format

fn quantity(field: &str, value: f64, unit: &Option<String>) -> Result<f64, ScenarioError> {
    match unit {
        None => Ok(value),
        Some(u) => units::convert(value, u).map_err(|source| ScenarioError::Unit {
            field: field.to_string(),
            source,
        }),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    particle: RawParticle,
    beam: RawBeam,
    gas: RawGas,
    detection: RawDetection,
    feedback: Option<RawFeedback>,
    solver: Option<RawSolver>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    radius: f64,
    radius_unit: Option<String>,
    mass_density: f64,
    eps_real: f64,
    eps_imag: f64,
    emissivity: Option<f64>,
    melting_point: Option<f64>,
    melting_point_unit: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    wavelength: f64,
    wavelength_unit: Option<String>,
    mean_power: f64,
    mean_power_unit: Option<String>,
    numerical_aperture: f64,
    asymmetry_xy: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    ambient_pressure: f64,
    ambient_pressure_unit: Option<String>,
    ambient_temperature: Option<f64>,
    ambient_temperature_unit: Option<String>,
    molecule_mass: Option<f64>,
    heat_capacity_ratio: Option<f64>,
    accommodation: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    effective_distance: f64,
    effective_distance_unit: Option<String>,
    /// Place areas and offsets at their paraxial bounds.
    pin_to_bounds: Option<bool>,
    a_d1: Option<f64>,
    a_d2: Option<f64>,
    a_d3: Option<f64>,
    offset_x: Option<f64>,
    offset_x_unit: Option<String>,
    offset_y: Option<f64>,
    offset_y_unit: Option<String>,
    filtered: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeedback {
    scheme: String,
    /// 1-based.
    coulomb_axis: Option<usize>,
    axes: Option<Vec<RawAxisRule>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxisRule {
    gain: Option<f64>,
    gain_unit: Option<String>,
    critical_cube_fraction: Option<f64>,
    optimum_factor: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    damping: Option<f64>,
    condition_threshold: Option<f64>,
    strict: Option<bool>,
    pinned_xi: Option<f64>,
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let p = self.particle;
        let particle = ParticleSpec {
            radius: quantity("particle.radius", p.radius, &p.radius_unit)?,
            mass_density: p.mass_density,
            eps_real: p.eps_real,
            eps_imag: p.eps_imag,
            emissivity: p.emissivity.unwrap_or(ParticleSpec::DEFAULT_EMISSIVITY),
            melting_point: match p.melting_point {
                Some(t) => quantity("particle.melting_point", t, &p.melting_point_unit)?,
                None => ParticleSpec::DEFAULT_MELTING_POINT,
            },
        };

        let b = self.beam;
        let beam = BeamSpec {
            wavelength: quantity("beam.wavelength", b.wavelength, &b.wavelength_unit)?,
            mean_power: quantity("beam.mean_power", b.mean_power, &b.mean_power_unit)?,
            numerical_aperture: b.numerical_aperture,
            asymmetry_xy: b.asymmetry_xy.unwrap_or(1.0),
        };

        let g = self.gas;
        let mut gas = GasSpec::air(quantity(
            "gas.ambient_pressure",
            g.ambient_pressure,
            &g.ambient_pressure_unit,
        )?);
        if let Some(t) = g.ambient_temperature {
            gas.ambient_temperature =
                quantity("gas.ambient_temperature", t, &g.ambient_temperature_unit)?;
        }
        if let Some(m) = g.molecule_mass {
            gas.molecule_mass = m;
        }
        if let Some(x) = g.heat_capacity_ratio {
            gas.heat_capacity_ratio = x;
        }
        if let Some(x) = g.accommodation {
            gas.accommodation = x;
        }

        let d = self.detection;
        let z = quantity(
            "detection.effective_distance",
            d.effective_distance,
            &d.effective_distance_unit,
        )?;
        let filtered = d.filtered.unwrap_or(true);
        let detection = if d.pin_to_bounds.unwrap_or(false) {
            DetectionSpec::pinned(beam.wavelength, z, filtered)
        } else {
            DetectionSpec {
                effective_distance: z,
                a_d1: d.a_d1.ok_or(ScenarioError::Missing("detection.a_d1"))?,
                a_d2: d.a_d2.ok_or(ScenarioError::Missing("detection.a_d2"))?,
                a_d3: d.a_d3.ok_or(ScenarioError::Missing("detection.a_d3"))?,
                offset_x: quantity(
                    "detection.offset_x",
                    d.offset_x.ok_or(ScenarioError::Missing("detection.offset_x"))?,
                    &d.offset_x_unit,
                )?,
                offset_y: quantity(
                    "detection.offset_y",
                    d.offset_y.ok_or(ScenarioError::Missing("detection.offset_y"))?,
                    &d.offset_y_unit,
                )?,
                filtered,
            }
        };

        let feedback = self.feedback.map(RawFeedback::into_plan).transpose()?;

        let mut solver = SolverSettings::default();
        if let Some(s) = self.solver {
            if let Some(x) = s.tolerance {
                solver.tolerance = x;
            }
            if let Some(x) = s.max_iterations {
                solver.max_iterations = x;
            }
            if let Some(x) = s.damping {
                solver.damping = x;
            }
            if let Some(x) = s.condition_threshold {
                solver.condition_threshold = x;
            }
            if let Some(x) = s.strict {
                solver.strict = x;
            }
            if let Some(x) = s.pinned_xi {
                solver.pinned_xi = x;
            }
        }

        Ok(Scenario {
            particle,
            beam,
            gas,
            detection,
            feedback,
            solver,
        })
    }
}

impl RawFeedback {
    fn into_plan(self) -> Result<FeedbackPlan, ScenarioError> {
        let scheme = match self.scheme.as_str() {
            "none" => Scheme::None,
            "parametric" => Scheme::Parametric,
            "hybrid" => {
                let k = self.coulomb_axis.ok_or(ScenarioError::Missing("feedback.coulomb_axis"))?;
                if !(1..=3).contains(&k) {
                    return Err(ScenarioError::Plan(format!("coulomb_axis {k} not in 1..=3")));
                }
                Scheme::Hybrid { coulomb_axis: k - 1 }
            }
            other => return Err(ScenarioError::Plan(format!("unknown scheme `{other}`"))),
        };
        let mut axes = [GainRule::Gain(0.0); 3];
        if let Some(raw) = self.axes {
            if raw.len() != 3 {
                return Err(ScenarioError::Plan(format!(
                    "expected 3 axis rules, found {}",
                    raw.len()
                )));
            }
            for (i, r) in raw.into_iter().enumerate() {
                axes[i] = if let Some(g) = r.gain {
                    GainRule::Gain(quantity("feedback.axes.gain", g, &r.gain_unit)?)
                } else if let Some(f) = r.critical_cube_fraction {
                    GainRule::CriticalCubeFraction(f)
                } else if let Some(f) = r.optimum_factor {
                    GainRule::OptimumFactor(f)
                } else {
                    return Err(ScenarioError::Plan(format!("axis {} has no gain rule", i + 1)));
                };
            }
        }
        Ok(FeedbackPlan { scheme, axes })
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Loss ratio `ε_I/ε_R` above which the low-loss polarizability forms are
/// flagged.
pub const LOW_LOSS_WARN: f64 = 1e-2;
/// Size parameter `(k0R)³` above which the small-sphere forms are flagged.
pub const SIZE_WARN: f64 = 0.1;
/// Relative slack on geometry bounds (values computed at the bound).
const BOUND_SLACK: f64 = 1e-12;

/// Checks every input invariant. Never fails; inspect
/// [`ValidationReport::passed`].
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    let p = &s.particle;
    r.check("particle.radius > 0", p.radius > 0.0, format!("R = {:e} m", p.radius));
    r.check(
        "particle.mass_density > 0",
        p.mass_density > 0.0,
        format!("ρ_p = {} kg/m³", p.mass_density),
    );
    r.check("particle.eps_real > 1", p.eps_real > 1.0, format!("ε_R = {}", p.eps_real));
    r.check("particle.eps_imag >= 0", p.eps_imag >= 0.0, format!("ε_I = {}", p.eps_imag));
    r.check(
        "0 < particle.emissivity <= 1",
        p.emissivity > 0.0 && p.emissivity <= 1.0,
        format!("emissivity = {}", p.emissivity),
    );
    if p.eps_real > 0.0 && p.loss_ratio() > LOW_LOSS_WARN {
        r.warnings.push(format!(
            "low-loss approximation questionable: ε_I/ε_R = {:.3e} > {LOW_LOSS_WARN:e}",
            p.loss_ratio()
        ));
    }

    let b = &s.beam;
    if b.wavelength > 0.0 {
        let size = (b.k0() * p.radius).powi(3);
        if size > SIZE_WARN {
            r.warnings.push(format!(
                "small-sphere approximation questionable: (k0R)³ = {size:.3} > {SIZE_WARN}"
            ));
        }
    }
    r.check("beam.wavelength > 0", b.wavelength > 0.0, format!("λ0 = {:e} m", b.wavelength));
    r.check("beam.mean_power >= 0", b.mean_power >= 0.0, format!("P_L = {} W", b.mean_power));
    r.check(
        "0 < beam.numerical_aperture < 1",
        b.numerical_aperture > 0.0 && b.numerical_aperture < 1.0,
        format!("NA = {}", b.numerical_aperture),
    );
    r.check(
        "beam.asymmetry_xy > 0",
        b.asymmetry_xy > 0.0,
        format!("asymmetry = {}", b.asymmetry_xy),
    );
    if b.asymmetry_xy == 1.0 {
        r.warnings.push(
            "symmetric beam: Ω1 = Ω2, frequency-separation condition cannot hold for axes 1,2"
                .to_string(),
        );
    }

    let g = &s.gas;
    r.check(
        "gas.ambient_pressure >= 0",
        g.ambient_pressure >= 0.0,
        format!("P_am = {:e} Pa", g.ambient_pressure),
    );
    r.check(
        "gas.ambient_temperature > 0",
        g.ambient_temperature > 0.0,
        format!("T_am = {} K", g.ambient_temperature),
    );
    r.check("gas.molecule_mass > 0", g.molecule_mass > 0.0, format!("m = {:e} kg", g.molecule_mass));
    r.check(
        "gas.heat_capacity_ratio > 1",
        g.heat_capacity_ratio > 1.0,
        format!("γ_a = {}", g.heat_capacity_ratio),
    );
    r.check(
        "0 <= gas.accommodation <= 1",
        (0.0..=1.0).contains(&g.accommodation),
        format!("α_acc = {}", g.accommodation),
    );

    let d = &s.detection;
    let z = d.effective_distance;
    let lam = b.wavelength;
    r.check(
        "detection: Z >= 10 λ0 (far field)",
        z >= 10.0 * lam * (1.0 - BOUND_SLACK),
        format!("Z/λ0 = {:.4}", z / lam),
    );
    let a3_max = lam * z / (5.0 * PI);
    let side_max = (lam * z / (45.0 * PI)).powi(2);
    r.check(
        "detection: a_d3 <= λ0Z/(5π) (paraxial)",
        d.a_d3 <= a3_max * (1.0 + BOUND_SLACK),
        format!("a_d3/bound = {:.4}", d.a_d3 / a3_max),
    );
    r.check(
        "detection: X²·a_d1 <= [λ0Z/(45π)]² (paraxial)",
        d.offset_x.powi(2) * d.a_d1 <= side_max * (1.0 + BOUND_SLACK),
        format!("X²a_d1/bound = {:.4}", d.offset_x.powi(2) * d.a_d1 / side_max),
    );
    r.check(
        "detection: Y²·a_d2 <= [λ0Z/(45π)]² (paraxial)",
        d.offset_y.powi(2) * d.a_d2 <= side_max * (1.0 + BOUND_SLACK),
        format!("Y²a_d2/bound = {:.4}", d.offset_y.powi(2) * d.a_d2 / side_max),
    );
    r.check(
        "detection: areas and offsets positive",
        d.a_d1 > 0.0 && d.a_d2 > 0.0 && d.a_d3 > 0.0 && d.offset_x != 0.0 && d.offset_y != 0.0,
        String::new(),
    );
    for (name, ratio) in [
        ("a_d3", d.a_d3 / a3_max),
        ("X²a_d1", d.offset_x.powi(2) * d.a_d1 / side_max),
        ("Y²a_d2", d.offset_y.powi(2) * d.a_d2 / side_max),
    ] {
        if (ratio - 1.0).abs() < 1e-6 {
            r.warnings.push(format!("detection geometry at its paraxial limit ({name})"));
        }
    }
    if (z / (10.0 * lam) - 1.0).abs() < 1e-6 {
        r.warnings.push("detection distance at its far-field limit (Z = 10 λ0)".to_string());
    }

    if let Some(plan) = &s.feedback {
        if let Scheme::Hybrid { coulomb_axis } = plan.scheme {
            r.check("feedback: coulomb axis in 1..=3", coulomb_axis < 3, String::new());
        }
        for (i, rule) in plan.axes.iter().enumerate() {
            let (ok, detail) = match *rule {
                GainRule::Gain(g) => (g >= 0.0, format!("gain = {g}")),
                GainRule::CriticalCubeFraction(f) => (f > 0.0 && f < 1.0, format!("fraction = {f}")),
                GainRule::OptimumFactor(f) => (
                    f > 0.0 && plan.scheme.coulomb_axis() == Some(i),
                    format!("factor = {f} (Coulomb axis only)"),
                ),
            };
            r.check(&format!("feedback: axis {} rule", i + 1), ok, detail);
        }
    }

    let sv = &s.solver;
    r.check(
        "solver settings",
        sv.tolerance > 0.0 && sv.max_iterations > 0 && sv.damping > 0.0 && sv.damping <= 1.0,
        String::new(),
    );

    // Melting-point proximity needs the surface temperature.
    if r.passed() {
        let coeffs = crate::optics::compute_coefficients(p, b);
        if let Ok(ts) =
            crate::thermal::solve_surface_temperature(p, g, coeffs.absorbed_power)
        {
            if ts >= p.melting_point {
                r.warnings.push(format!(
                    "surface temperature {ts:.1} K at or above melting point {} K",
                    p.melting_point
                ));
            } else if ts >= 0.95 * p.melting_point {
                r.warnings.push(format!(
                    "surface temperature {ts:.1} K within 5% of melting point {} K",
                    p.melting_point
                ));
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn baseline_passes() {
        let s = fixtures::baseline_70nm();
        let rep = validate_scenario(&s);
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        // symmetric beam and pinned geometry are flagged
        assert!(rep.warnings.iter().any(|w| w.contains("symmetric beam")));
        assert!(rep.warnings.iter().any(|w| w.contains("paraxial limit")));
    }

    #[test]
    fn near_field_detector_fails() {
        let mut s = fixtures::baseline_70nm();
        s.detection.effective_distance = s.beam.wavelength;
        let rep = validate_scenario(&s);
        assert!(rep.failures().any(|c| c.name.contains("far field")));
    }

    #[test]
    fn oversized_axial_detector_fails() {
        let mut s = fixtures::baseline_70nm();
        let z = s.detection.effective_distance;
        s.detection.a_d3 = 2.0 * s.beam.wavelength * z / (5.0 * PI);
        let rep = validate_scenario(&s);
        let failed: Vec<_> = rep.failures().map(|c| c.name.clone()).collect();
        assert_eq!(failed.len(), 1);
        assert!(failed[0].contains("a_d3"));
    }

    #[test]
    fn bad_permittivity_and_accommodation() {
        let mut s = fixtures::baseline_70nm();
        s.particle.eps_real = 0.9;
        s.gas.accommodation = 1.2;
        let rep = validate_scenario(&s);
        let failed: Vec<_> = rep.failures().map(|c| c.name.clone()).collect();
        assert!(failed.iter().any(|n| n.contains("eps_real")));
        assert!(failed.iter().any(|n| n.contains("accommodation")));
    }

    #[test]
    fn lossy_particle_warns() {
        let mut s = fixtures::baseline_70nm();
        s.particle.eps_imag = 0.1;
        let rep = validate_scenario(&s);
        assert!(rep.warnings.iter().any(|w| w.contains("low-loss")));
    }

    #[test]
    fn melting_warning_for_large_particle() {
        // 180 nm runs within 1% of the melting point
        let rep = validate_scenario(&fixtures::baseline_180nm());
        assert!(rep.warnings.iter().any(|w| w.contains("melting point")));
    }

    #[test]
    fn parses_scenario_json_with_units() {
        let text = r#"{
            "particle": {"radius": 70, "radius_unit": "nm", "mass_density": 2200,
                         "eps_real": 2.1, "eps_imag": 1e-5},
            "beam": {"wavelength": 1064, "wavelength_unit": "nm",
                     "mean_power": 100, "mean_power_unit": "mW", "numerical_aperture": 0.8},
            "gas": {"ambient_pressure": 7e-9, "ambient_pressure_unit": "mbar"},
            "detection": {"effective_distance": 10.64, "effective_distance_unit": "µm",
                          "pin_to_bounds": true},
            "feedback": {"scheme": "hybrid", "coulomb_axis": 3, "axes": [
                {"critical_cube_fraction": 0.1},
                {"gain": 2, "gain_unit": "Hz"},
                {"optimum_factor": 1.0}
            ]}
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.particle.radius, 70e-9);
        assert_eq!(s.beam.mean_power, 0.1);
        assert!((s.gas.ambient_pressure - 7e-7).abs() < 1e-20);
        assert_eq!(s.gas.accommodation, GasSpec::DEFAULT_ACCOMMODATION);
        assert!((s.detection.effective_distance - 10.0 * s.beam.wavelength).abs() < 1e-18);
        let plan = s.feedback.unwrap();
        assert_eq!(plan.scheme, Scheme::Hybrid { coulomb_axis: 2 });
        assert_eq!(plan.axes[1], GainRule::Gain(4.0 * PI));
        assert!(validate_scenario(&s).passed());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{
            "particle": {"radius": 70e-9, "mass_density": 2200, "eps_real": 2.1,
                         "eps_imag": 0, "colour": "blue"},
            "beam": {"wavelength": 1.064e-6, "mean_power": 0.1, "numerical_aperture": 0.8},
            "gas": {"ambient_pressure": 1e-6},
            "detection": {"effective_distance": 1.1e-5, "pin_to_bounds": true}
        }"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn unknown_unit_rejected_with_token() {
        let text = r#"{
            "particle": {"radius": 70, "radius_unit": "angstrom", "mass_density": 2200,
                         "eps_real": 2.1, "eps_imag": 0},
            "beam": {"wavelength": 1.064e-6, "mean_power": 0.1, "numerical_aperture": 0.8},
            "gas": {"ambient_pressure": 1e-6},
            "detection": {"effective_distance": 1.1e-5, "pin_to_bounds": true}
        }"#;
        let err = Scenario::from_json(text).unwrap_err();
        assert!(err.to_string().contains("angstrom"), "{err}");
    }
}
