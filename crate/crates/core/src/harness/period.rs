//! Oscillation period and amplitude estimates from sampled series.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("found {crossings} zero crossings, need at least 3")]
    InsufficientOscillations { crossings: usize },
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("series needs uniformly spaced samples")]
    NonUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    pub uncertainty: f64,
    pub crossings: usize,
}

/// Linearly interpolated times where the series changes sign.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..values.len().min(times.len()) {
        let (a, b) = (values[i - 1], values[i]);
        if (a < 0.0) != (b < 0.0) {
            let w = a / (a - b);
            out.push(times[i - 1] + w * (times[i] - times[i - 1]));
        }
    }
    out
}

/// Period as twice the mean spacing of successive zero crossings; the
/// uncertainty is the sample standard deviation of those period estimates.
pub fn measure_period(times: &[f64], values: &[f64]) -> Result<PeriodEstimate, PeriodError> {
    if times.len() != values.len() {
        return Err(PeriodError::LengthMismatch {
            times: times.len(),
            values: values.len(),
        });
    }
    let zs = zero_crossings(times, values);
    if zs.len() < 3 {
        return Err(PeriodError::InsufficientOscillations {
            crossings: zs.len(),
        });
    }
    let periods: Vec<f64> = zs.windows(2).map(|w| 2.0 * (w[1] - w[0])).collect();
    let n = periods.len() as f64;
    let mean = periods.iter().sum::<f64>() / n;
    let uncertainty = if periods.len() > 1 {
        (periods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(PeriodEstimate {
        period: mean,
        uncertainty,
        crossings: zs.len(),
    })
}

/// Period of the strongest non-constant Fourier mode, refined by a
/// parabolic fit through the peak bin.
pub fn spectral_period(times: &[f64], values: &[f64]) -> Result<PeriodEstimate, PeriodError> {
    if times.len() != values.len() {
        return Err(PeriodError::LengthMismatch {
            times: times.len(),
            values: values.len(),
        });
    }
    let n = values.len();
    if n < 8 {
        return Err(PeriodError::InsufficientOscillations { crossings: 0 });
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0)
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(PeriodError::NonUniform);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    // zero padding interpolates the spectrum between the natural bins
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = values
        .iter()
        .map(|v| Complex64::new(v - mean, 0.0))
        .collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let power: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm_sqr()).collect();
    let (peak, _) =
        power
            .iter()
            .enumerate()
            .skip(1)
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            });
    if peak * n < 2 * padded {
        return Err(PeriodError::InsufficientOscillations { crossings: 0 });
    }
    let shift = if peak + 1 < power.len() {
        let (a, b, c) = (power[peak - 1], power[peak], power[peak + 1]);
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    let freq = (peak as f64 + shift) / (padded as f64 * dt);
    Ok(PeriodEstimate {
        period: 1.0 / freq,
        uncertainty: 0.5 / (n as f64 * dt) / (freq * freq),
        crossings: zero_crossings(times, values).len(),
    })
}

/// Residual of a least-squares line through the series.
pub fn detrend(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len().min(values.len()) as f64;
    if n < 2.0 {
        return values.to_vec();
    }
    let mt = times.iter().sum::<f64>() / n;
    let mv = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in times.iter().zip(values) {
        sxy += (t - mt) * (v - mv);
        sxx += (t - mt) * (t - mt);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    times
        .iter()
        .zip(values)
        .map(|(t, v)| v - mv - slope * (t - mt))
        .collect()
}

/// Largest deviation from the best-fit line.
pub fn oscillation_amplitude(times: &[f64], values: &[f64]) -> f64 {
    detrend(times, values)
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}
