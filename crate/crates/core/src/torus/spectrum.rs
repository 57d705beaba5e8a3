use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::Trajectory;

/// Fewest samples accepted for a spectrum.
pub const MIN_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Angular frequency, rad per time unit.
    pub frequency: f64,
    pub amplitude: f64,
}

/// Top `count` peaks of one trajectory component over `[t0, t1]`, resampled
/// on `samples` uniform points from the dense output.
pub fn dominant_frequencies(
    traj: &Trajectory,
    component: usize,
    t0: f64,
    t1: f64,
    samples: usize,
    count: usize,
) -> Result<Vec<SpectralPeak>> {
    if samples < MIN_SAMPLES {
        return Err(Error::validation(format!(
            "spectrum needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let series = traj.resample(component, t0, t1, samples)?;
    let dt = (t1 - t0) / (samples - 1) as f64;
    spectral_peaks(&series, dt, count)
}

/// Hann-windowed, zero-padded DFT with log-parabolic peak interpolation.
pub fn spectral_peaks(series: &[f64], dt: f64, count: usize) -> Result<Vec<SpectralPeak>> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::validation(format!(
            "series too short: {n} samples, need {MIN_SAMPLES}"
        )));
    }
    if !(dt > 0.0) || !series.iter().all(|v| v.is_finite()) {
        return Err(Error::validation("series must be finite with a positive sample step"));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    let gain: f64 = window.iter().sum();
    let padded = (4 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); padded];
    for k in 0..n {
        buf[k].re = (series[k] - mean) * window[k];
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm()).collect();

    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in 1..mag.len() - 1 {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > 0.0 {
            let (a, b, c) = (mag[k - 1].max(1e-300).ln(), mag[k].ln(), mag[k + 1].max(1e-300).ln());
            let denom = a - 2.0 * b + c;
            let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            let height = (b - 0.25 * (a - c) * delta).exp();
            let bin = k as f64 + delta;
            peaks.push((2.0 * PI * bin / (padded as f64 * dt), 2.0 * height / gain));
        }
    }
    peaks.sort_by(|x, y| y.1.total_cmp(&x.1));
    Ok(peaks
        .into_iter()
        .take(count)
        .map(|(frequency, amplitude)| SpectralPeak { frequency, amplitude })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| f(k as f64 * dt)).collect()
    }

    #[test]
    fn pure_sinusoid() {
        let s = sampled(|t| t.sin(), 8192, 0.1);
        let p = spectral_peaks(&s, 0.1, 1).unwrap();
        assert!((p[0].frequency - 1.0).abs() < 1e-3, "{:?}", p);
        assert!((p[0].amplitude - 1.0).abs() < 0.02);
    }

    #[test]
    fn modulated_sinusoid_has_sidebands() {
        let s = sampled(|t| t.sin() * (1.0 + 0.3 * (0.5 * t).sin()), 8192, 0.1);
        let p = spectral_peaks(&s, 0.1, 3).unwrap();
        let mut f: Vec<f64> = p.iter().map(|q| q.frequency).collect();
        f.sort_by(f64::total_cmp);
        assert!((f[0] - 0.5).abs() < 2e-3, "{f:?}");
        assert!((f[1] - 1.0).abs() < 2e-3, "{f:?}");
        assert!((f[2] - 1.5).abs() < 2e-3, "{f:?}");
        assert!((p[0].frequency - 1.0).abs() < 2e-3);
    }

    #[test]
    fn short_series_rejected() {
        assert!(spectral_peaks(&[0.0; 100], 0.1, 1).is_err());
    }
}
