//! Poisson streams of scattered and absorbed photons.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use super::{rng_for, streams, OracleError};
use crate::optics::OpticalCoefficients;
use crate::scenario::BeamSpec;

pub const MIN_EVENTS: f64 = 1e5;
pub const MAX_EVENTS: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StreamKind {
    Scatter,
    Absorb,
}

/// Sorted event times; scatter streams carry `(θ', φ')` per event with the
/// zenith along the polarization axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonEventStream {
    pub kind: StreamKind,
    pub times: Vec<f64>,
    pub directions: Vec<(f64, f64)>,
    pub rate: f64,
    pub seed: u64,
    pub duration: f64,
}

impl PhotonEventStream {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Inverse of the polar-angle CDF `F = 1/2 − (3/4)cosθ + (1/4)cos³θ`
/// of the dipole pattern `(3/4)sin³θ`.
pub fn polar_angle_from_uniform(u: f64) -> f64 {
    let cos_theta = 2.0 * ((2.0 * PI - (2.0 * u - 1.0).clamp(-1.0, 1.0).acos()) / 3.0).cos();
    cos_theta.clamp(-1.0, 1.0).acos()
}

pub fn polar_angle_cdf(theta: f64) -> f64 {
    let c = theta.cos();
    0.5 - 0.75 * c + 0.25 * c * c * c
}

pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let theta = polar_angle_from_uniform(rng.random::<f64>());
    let phi = 2.0 * PI * rng.random::<f64>();
    (theta, phi)
}

/// Final wavevector of a scattered photon.
pub fn wavevector(k0: f64, (theta, phi): (f64, f64)) -> [f64; 3] {
    let s = theta.sin();
    [k0 * theta.cos(), k0 * s * phi.cos(), k0 * s * phi.sin()]
}

fn poisson_times<R: Rng + ?Sized>(rng: &mut R, rate: f64, duration: f64) -> Vec<f64> {
    let mut times = Vec::with_capacity((rate * duration * 1.01) as usize + 16);
    if rate <= 0.0 {
        return times;
    }
    let gap = Exp::new(rate).expect("positive rate");
    let mut t = gap.sample(rng);
    while t < duration {
        times.push(t);
        t += gap.sample(rng);
    }
    times
}

/// Independent scatter and absorb streams at rates `P_s/(ħω0)` and
/// `P_a/(ħω0)` over `duration` seconds.
pub fn simulate_photon_streams(
    coeffs: &OpticalCoefficients,
    beam: &BeamSpec,
    duration: f64,
    seed: u64,
) -> Result<(PhotonEventStream, PhotonEventStream), OracleError> {
    let hw = beam.photon_energy();
    let rate_s = coeffs.scattered_power / hw;
    let rate_a = coeffs.absorbed_power / hw;
    let expected = (rate_s + rate_a) * duration;
    if expected > MAX_EVENTS {
        return Err(OracleError::Overflow(expected));
    }
    if rate_s * duration < MIN_EVENTS {
        return Err(OracleError::UnderSampled(format!(
            "{:.3e} expected scatter events, need at least {MIN_EVENTS:e}; \
             increase the duration to at least {:.3e} s",
            rate_s * duration,
            MIN_EVENTS / rate_s
        )));
    }
    let scatter_times = poisson_times(&mut rng_for(seed, streams::SCATTER_TIMES), rate_s, duration);
    let absorb_times = poisson_times(&mut rng_for(seed, streams::ABSORB_TIMES), rate_a, duration);
    let mut dir_rng = rng_for(seed, streams::DIRECTIONS);
    let directions = (0..scatter_times.len()).map(|_| sample_direction(&mut dir_rng)).collect();
    Ok((
        PhotonEventStream {
            kind: StreamKind::Scatter,
            times: scatter_times,
            directions,
            rate: rate_s,
            seed,
            duration,
        },
        PhotonEventStream {
            kind: StreamKind::Absorb,
            times: absorb_times,
            directions: Vec::new(),
            rate: rate_a,
            seed,
            duration,
        },
    ))
}

/// Sample mean and standard error of `E[k'_i]` and `E[k'_i²]` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMoments {
    pub mean: [f64; 3],
    pub mean_stderr: [f64; 3],
    pub second: [f64; 3],
    pub second_stderr: [f64; 3],
    pub count: usize,
}

pub fn angular_moments(stream: &PhotonEventStream, k0: f64) -> AngularMoments {
    let n = stream.directions.len() as f64;
    let mut s1 = [0.0; 3];
    let mut s2 = [0.0; 3];
    let mut s4 = [0.0; 3];
    for &d in &stream.directions {
        let k = wavevector(k0, d);
        for i in 0..3 {
            let q = k[i] * k[i];
            s1[i] += k[i];
            s2[i] += q;
            s4[i] += q * q;
        }
    }
    let mut out = AngularMoments {
        mean: [0.0; 3],
        mean_stderr: [0.0; 3],
        second: [0.0; 3],
        second_stderr: [0.0; 3],
        count: stream.directions.len(),
    };
    for i in 0..3 {
        let m1 = s1[i] / n;
        let m2 = s2[i] / n;
        let m4 = s4[i] / n;
        out.mean[i] = m1;
        out.mean_stderr[i] = ((m2 - m1 * m1) / n).sqrt();
        out.second[i] = m2;
        out.second_stderr[i] = ((m4 - m2 * m2) / n).sqrt();
    }
    out
}
