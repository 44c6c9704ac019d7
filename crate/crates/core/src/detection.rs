//! Position-measurement noise floors of the three photodetection channels
//! and the geometry bounds of the far-field paraxial detector model.
//!
//! Detection efficiency is taken as one and the detection bandwidth as large
//! compared with every trap frequency.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::constants::HBAR;
use crate::scenario::{BeamSpec, DetectionSpec, ParticleSpec};

const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("detector geometry violates {bound} ({value:.6e} > {limit:.6e})")]
    Bound {
        bound: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("detector geometry: {0} must be positive")]
    NonPositive(&'static str),
}

/// Noise floors (m²·s, two-sided in angular frequency) with the geometry that
/// produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseFloor {
    pub floors: [f64; 3],
    pub geometry: DetectionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryBounds {
    pub axial_area: f64,
    /// Bound on `X²·a_d1` (and `Y²·a_d2`).
    pub transverse_product: f64,
    /// Balanced choice `X² = a_d1 = λ0Z/(45π)`.
    pub balanced_side: f64,
}

pub fn max_allowed_geometry(beam: &BeamSpec, z: f64) -> GeometryBounds {
    let lam = beam.wavelength;
    let side = lam * z / (45.0 * PI);
    GeometryBounds {
        axial_area: lam * z / (5.0 * PI),
        transverse_product: side * side,
        balanced_side: side,
    }
}

pub fn check_geometry(beam: &BeamSpec, det: &DetectionSpec) -> Result<(), GeometryError> {
    for (name, v) in [
        ("effective distance", det.effective_distance),
        ("a_d1", det.a_d1),
        ("a_d2", det.a_d2),
        ("a_d3", det.a_d3),
    ] {
        if !(v > 0.0) {
            return Err(GeometryError::NonPositive(name));
        }
    }
    if det.offset_x == 0.0 || det.offset_y == 0.0 {
        return Err(GeometryError::NonPositive("detector offset"));
    }
    let z = det.effective_distance;
    let far = 10.0 * beam.wavelength;
    if z < far * (1.0 - BOUND_SLACK) {
        return Err(GeometryError::Bound {
            bound: "far-field Z >= 10 λ0",
            value: far,
            limit: z,
        });
    }
    let b = max_allowed_geometry(beam, z);
    let checks = [
        ("paraxial a_d3 <= λ0Z/(5π)", det.a_d3, b.axial_area),
        (
            "paraxial X²a_d1 <= [λ0Z/(45π)]²",
            det.offset_x.powi(2) * det.a_d1,
            b.transverse_product,
        ),
        (
            "paraxial Y²a_d2 <= [λ0Z/(45π)]²",
            det.offset_y.powi(2) * det.a_d2,
            b.transverse_product,
        ),
    ];
    for (bound, value, limit) in checks {
        if value > limit * (1.0 + BOUND_SLACK) {
            return Err(GeometryError::Bound { bound, value, limit });
        }
    }
    Ok(())
}

pub fn noise_floors(
    p: &ParticleSpec,
    beam: &BeamSpec,
    det: &DetectionSpec,
) -> Result<NoiseFloor, GeometryError> {
    check_geometry(beam, det)?;
    let a = p.clausius_mossotti();
    let k0 = beam.k0();
    let r6 = p.radius.powi(6);
    let w0 = beam.waist();
    let z0 = beam.rayleigh_range();
    let z = det.effective_distance;
    let hw = HBAR * beam.omega0();
    let power = beam.mean_power;
    let transverse = |offset: f64, area: f64| {
        0.5 * PI * hw * w0 * w0 * z.powi(4)
            / (8.0 * a * a * k0.powi(6) * r6 * power * offset * offset * area)
    };
    let axial = PI * hw * w0 * w0 * z0 * z0 * z * z / (8.0 * a * a * k0.powi(4) * r6 * power * det.a_d3);
    Ok(NoiseFloor {
        floors: [
            transverse(det.offset_x, det.a_d1),
            transverse(det.offset_y, det.a_d2),
            axial,
        ],
        geometry: *det,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn floors(s: &crate::scenario::Scenario) -> [f64; 3] {
        noise_floors(&s.particle, &s.beam, &s.detection).unwrap().floors
    }

    #[test]
    fn doubling_power_halves_floors() {
        let s = fixtures::baseline_70nm();
        let f1 = floors(&s);
        let mut s2 = s.clone();
        s2.beam.mean_power *= 2.0;
        let f2 = floors(&s2);
        for i in 0..3 {
            assert!(rel(f2[i], 0.5 * f1[i]) < 1e-14);
        }
    }

    #[test]
    fn doubling_axial_area_halves_axial_floor() {
        let mut s = fixtures::baseline_70nm();
        s.detection.a_d3 *= 0.5;
        let f1 = floors(&s);
        s.detection.a_d3 *= 2.0;
        let f2 = floors(&s);
        assert!(rel(f2[2], 0.5 * f1[2]) < 1e-14);
        assert_eq!(f1[0], f2[0]);
    }

    #[test]
    fn axial_to_transverse_ratio_in_closed_form() {
        let s = fixtures::baseline_70nm();
        let f = floors(&s);
        let d = s.detection;
        let (w0, z0, k0, z) = (
            s.beam.waist(),
            s.beam.rayleigh_range(),
            s.beam.k0(),
            d.effective_distance,
        );
        let expected = (w0 * w0 * z0 * z0 * z * z * d.offset_x.powi(2) * d.a_d1 * k0 * k0)
            / (0.5 * w0 * w0 * z.powi(4) * d.a_d3);
        assert!(rel(f[2] / f[0], expected) < 1e-12);
        assert!(f[2] < f[0]);
    }

    #[test]
    fn bounds_at_ten_wavelengths() {
        let s = fixtures::baseline_70nm();
        let z = 10.0 * s.beam.wavelength;
        let b = max_allowed_geometry(&s.beam, z);
        assert!(rel(b.axial_area, s.beam.wavelength * z / (5.0 * PI)) < 1e-15);
        let b2 = max_allowed_geometry(&s.beam, 2.0 * z);
        assert!(rel(b2.axial_area, 2.0 * b.axial_area) < 1e-15);
        assert!(rel(b.balanced_side.powi(2), b.transverse_product) < 1e-15);
    }

    #[test]
    fn pinned_floors_scale_linearly_and_quadratically_with_distance() {
        let s = fixtures::baseline_70nm();
        let lam = s.beam.wavelength;
        let zs = [10.0 * lam, 20.0 * lam, 40.0 * lam];
        let fs: Vec<[f64; 3]> = zs
            .iter()
            .map(|&z| {
                noise_floors(&s.particle, &s.beam, &DetectionSpec::pinned(lam, z, true))
                    .unwrap()
                    .floors
            })
            .collect();
        // log-log slopes from a three-point fit
        let slope = |i: usize| {
            let xs: Vec<f64> = zs.iter().map(|z| z.ln()).collect();
            let ys: Vec<f64> = fs.iter().map(|f| f[i].ln()).collect();
            let xm = xs.iter().sum::<f64>() / 3.0;
            let ym = ys.iter().sum::<f64>() / 3.0;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
            num / den
        };
        assert!((slope(2) - 1.0).abs() < 1e-10);
        assert!((slope(0) - 2.0).abs() < 1e-10);
        assert!((slope(1) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn geometry_violations_are_named() {
        let s = fixtures::baseline_70nm();
        let mut d = s.detection;
        d.a_d3 *= 2.0;
        let err = noise_floors(&s.particle, &s.beam, &d).unwrap_err();
        assert!(err.to_string().contains("a_d3"));
        let mut d = s.detection;
        d.effective_distance = s.beam.wavelength;
        let err = noise_floors(&s.particle, &s.beam, &d).unwrap_err();
        assert!(err.to_string().contains("far-field"));
    }

    proptest! {
        #[test]
        fn floors_scale_as_inverse_sixth_power_of_radius(r in 30e-9f64..150e-9) {
            let mut s = fixtures::baseline_70nm();
            s.particle.radius = r;
            let f1 = floors(&s);
            s.particle.radius = 1.5 * r;
            let f2 = floors(&s);
            for i in 0..3 {
                prop_assert!(rel(f2[i] / f1[i], 1.5f64.powi(-6)) < 1e-12);
            }
        }

        #[test]
        fn symmetric_detectors_give_equal_transverse_floors(scale in 0.1f64..1.0) {
            let s = fixtures::baseline_70nm();
            let mut d = s.detection;
            d.a_d1 *= scale;
            d.a_d2 = d.a_d1;
            let f = noise_floors(&s.particle, &s.beam, &d).unwrap().floors;
            prop_assert_eq!(f[0], f[1]);
        }
    }
}
