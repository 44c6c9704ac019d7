//! Bartlett-averaged periodograms of binned impulse trains.
//!
//! Densities are two-sided in angular frequency: a Poisson train of impulses
//! `q` at rate `λ` has the flat level `q²λ`.

use num_complex::Complex64;
use rand_distr::{Distribution, Poisson};
use rustfft::FftPlanner;
use serde::Serialize;

use super::photons::{wavevector, PhotonEventStream};
use super::{rng_for, streams, OracleError};
use crate::constants::HBAR;
use crate::scenario::BeamSpec;

pub const MIN_SEGMENTS: usize = 32;
/// Bins at and below this index are left out of floor fits.
pub const SKIPPED_LOW_BINS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Binning {
    pub bin_width: f64,
    pub segment_len: usize,
    pub segments: usize,
}

impl Binning {
    /// `segments` segments of `segment_len` bins covering `duration`.
    pub fn covering(duration: f64, segment_len: usize, segments: usize) -> Self {
        Self {
            bin_width: duration / (segment_len * segments) as f64,
            segment_len,
            segments,
        }
    }

    pub fn bins(&self) -> usize {
        self.segment_len * self.segments
    }
}

impl Default for Binning {
    fn default() -> Self {
        Self {
            bin_width: 1.0,
            segment_len: 1024,
            segments: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdEstimate {
    /// Non-negative angular frequencies of the averaged periodogram.
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub floor: f64,
    pub floor_stderr: f64,
    /// Floor fitted on each segment separately.
    pub segment_floors: Vec<f64>,
    pub mean: f64,
    pub mean_stderr: f64,
    pub segment_means: Vec<f64>,
    pub bin_width: f64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Spectral estimate of a signal given as bin averages `values` of width
/// `bin_width`, split into segments of `segment_len` bins.
pub fn estimate(values: &[f64], bin_width: f64, segment_len: usize) -> Result<PsdEstimate, OracleError> {
    let segments = values.len() / segment_len.max(1);
    if segments < MIN_SEGMENTS {
        return Err(OracleError::UnderSampled(format!(
            "{segments} averaging segments, need at least {MIN_SEGMENTS}"
        )));
    }
    if segment_len / 2 <= SKIPPED_LOW_BINS + 1 {
        return Err(OracleError::UnderSampled(format!(
            "segment of {segment_len} bins leaves no floor bins"
        )));
    }
    let half = segment_len / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut density = vec![0.0; half + 1];
    let mut segment_floors = Vec::with_capacity(segments);
    let mut segment_means = Vec::with_capacity(segments);
    let norm = bin_width / segment_len as f64;
    for seg in values.chunks_exact(segment_len).take(segments) {
        let mean = seg.iter().sum::<f64>() / segment_len as f64;
        segment_means.push(mean);
        for (b, &v) in buf.iter_mut().zip(seg) {
            *b = Complex64::new(v - mean, 0.0);
        }
        fft.process(&mut buf);
        let mut floor = 0.0;
        for (k, d) in density.iter_mut().enumerate() {
            let p = buf[k].norm_sqr() * norm;
            *d += p;
            if k > SKIPPED_LOW_BINS && k < half {
                floor += p;
            }
        }
        segment_floors.push(floor / (half - SKIPPED_LOW_BINS - 1) as f64);
    }
    for d in density.iter_mut() {
        *d /= segments as f64;
    }
    let df = 2.0 * std::f64::consts::PI / (segment_len as f64 * bin_width);
    let frequencies = (0..=half).map(|k| k as f64 * df).collect();
    let (floor, floor_stderr) = mean_and_stderr(&segment_floors);
    let (mean, mean_stderr) = mean_and_stderr(&segment_means);
    Ok(PsdEstimate {
        frequencies,
        density,
        floor,
        floor_stderr,
        segment_floors,
        mean,
        mean_stderr,
        segment_means,
        bin_width,
    })
}

/// Bin averages of an impulse train; events past the last bin are dropped.
pub fn bin_impulses<I>(events: I, binning: &Binning) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let n = binning.bins();
    let mut bins = vec![0.0; n];
    for (t, q) in events {
        let idx = (t / binning.bin_width) as usize;
        if idx < n {
            bins[idx] += q;
        }
    }
    for b in bins.iter_mut() {
        *b /= binning.bin_width;
    }
    bins
}

/// Axial force from the incident momentum `ħk_z` of every scattered and
/// absorbed photon.
pub fn radiation_pressure_psd(
    scatter: &PhotonEventStream,
    absorb: &PhotonEventStream,
    beam: &BeamSpec,
    binning: &Binning,
) -> Result<PsdEstimate, OracleError> {
    let q = HBAR * beam.kz();
    let events = scatter
        .times
        .iter()
        .chain(absorb.times.iter())
        .map(|&t| (t, q));
    estimate(&bin_impulses(events, binning), binning.bin_width, binning.segment_len)
}

/// Force along `axis` (0-based) from the outgoing momentum of scattered
/// photons.
pub fn recoil_psd(
    scatter: &PhotonEventStream,
    beam: &BeamSpec,
    axis: usize,
    binning: &Binning,
) -> Result<PsdEstimate, OracleError> {
    let k0 = beam.k0();
    let events = scatter
        .times
        .iter()
        .zip(&scatter.directions)
        .map(|(&t, &d)| (t, -HBAR * wavevector(k0, d)[axis]));
    estimate(&bin_impulses(events, binning), binning.bin_width, binning.segment_len)
}

/// Unit impulses at unit rate; the floor should come out as 1.
pub fn white_noise_calibration(seed: u64, segment_len: usize, segments: usize) -> Result<PsdEstimate, OracleError> {
    let binning = Binning {
        bin_width: 1.0,
        segment_len,
        segments,
    };
    let mut rng = rng_for(seed, streams::CALIBRATION);
    let poisson = Poisson::new(binning.bin_width).expect("positive mean");
    let values: Vec<f64> = (0..binning.bins())
        .map(|_| poisson.sample(&mut rng) / binning.bin_width)
        .collect();
    estimate(&values, binning.bin_width, binning.segment_len)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulatedPressure {
    pub force: PsdEstimate,
    pub power: PsdEstimate,
    /// Shot-noise part of the force floor, `ħk_z²P̄_s/ω0`.
    pub shot_floor: f64,
    /// `(force floor − shot floor)/power floor` with its standard error.
    pub transfer: f64,
    pub transfer_stderr: f64,
}

/// Scattering driven by a laser whose power jumps between `P̄(1 ± depth)`
/// independently in every bin. The excess force floor over the power floor
/// measures the squared force-per-watt of a classical power fluctuation.
pub fn modulated_pressure(
    scattered_power: f64,
    beam: &BeamSpec,
    depth: f64,
    photons_per_bin: f64,
    binning_shape: (usize, usize),
    seed: u64,
) -> Result<ModulatedPressure, OracleError> {
    let (segment_len, segments) = binning_shape;
    let hw = beam.photon_energy();
    let rate = scattered_power / hw;
    let dt = photons_per_bin / rate;
    let q = HBAR * beam.kz();
    let mut rng = rng_for(seed, streams::MODULATION);
    let n = segment_len * segments;
    let mut force = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for _ in 0..n {
        let sign = if rand::Rng::random::<bool>(&mut rng) { 1.0 } else { -1.0 };
        let level = 1.0 + depth * sign;
        power.push(beam.mean_power * level);
        let count = Poisson::new(photons_per_bin * level)
            .expect("positive mean")
            .sample(&mut rng);
        force.push(q * count / dt);
    }
    let force = estimate(&force, dt, segment_len)?;
    let power = estimate(&power, dt, segment_len)?;
    let shot_floor = q * q * rate;
    let ratios: Vec<f64> = force
        .segment_floors
        .iter()
        .zip(&power.segment_floors)
        .map(|(f, p)| (f - shot_floor) / p)
        .collect();
    let (transfer, transfer_stderr) = mean_and_stderr(&ratios);
    Ok(ModulatedPressure {
        force,
        power,
        shot_floor,
        transfer,
        transfer_stderr,
    })
}

/// Segment-by-segment ratio of two floors with its standard error.
pub fn floor_ratio(num: &PsdEstimate, den: &PsdEstimate) -> (f64, f64) {
    let ratios: Vec<f64> = num
        .segment_floors
        .iter()
        .zip(&den.segment_floors)
        .map(|(a, b)| a / b)
        .collect();
    mean_and_stderr(&ratios)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_recovers_unit_floor() {
        let est = white_noise_calibration(3, 1024, 256).unwrap();
        assert!((est.floor - 1.0).abs() < 0.02, "floor {}", est.floor);
        assert!((est.mean - 1.0).abs() < 3.0 * est.mean_stderr + 1e-12);
        assert!(est.floor_stderr < 0.005);
    }

    #[test]
    fn sinusoid_lands_in_its_bin() {
        let len = 256;
        let dt = 0.5;
        let k = 17;
        let w = 2.0 * std::f64::consts::PI * k as f64 / (len as f64 * dt);
        let values: Vec<f64> = (0..len * 40).map(|n| (w * n as f64 * dt).cos()).collect();
        let est = estimate(&values, dt, len).unwrap();
        let peak = est
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, k);
        assert!((est.frequencies[peak] - w).abs() < 1e-12 * w);
        // Parseval: a unit cosine has variance 1/2
        let total: f64 = est.density.iter().sum::<f64>() * 2.0 / (len as f64 * dt);
        assert!((total - 0.5).abs() < 1e-9);
    }

    #[test]
    fn too_few_segments_is_an_error() {
        let values = vec![0.0; 1024 * 31];
        assert!(matches!(estimate(&values, 1.0, 1024), Err(OracleError::UnderSampled(_))));
    }

    #[test]
    fn same_seed_same_estimate() {
        let a = white_noise_calibration(9, 256, 40).unwrap();
        let b = white_noise_calibration(9, 256, 40).unwrap();
        assert_eq!(a, b);
    }
}
