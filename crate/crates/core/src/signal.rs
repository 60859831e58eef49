//! Zero-phase low-pass filtering, finite differences and decimation.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Default low-pass cutoff for CoM and force series.
pub const DEFAULT_CUTOFF_HZ: f64 = 5.0;
pub const DEFAULT_FILTER_ORDER: usize = 4;

/// Cutoff and order of a zero-phase Butterworth low-pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowpassSpec {
    pub cutoff_hz: f64,
    pub order: usize,
}

impl Default for LowpassSpec {
    fn default() -> Self {
        LowpassSpec {
            cutoff_hz: DEFAULT_CUTOFF_HZ,
            order: DEFAULT_FILTER_ORDER,
        }
    }
}

/// `C` channels of `N` samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    sample_rate_hz: f64,
    channels: Vec<Vec<f64>>,
}

impl UniformSeries {
    pub fn new(sample_rate_hz: f64, channels: Vec<Vec<f64>>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let n = channels.first().map_or(0, Vec::len);
        if channels.is_empty() {
            return Err(Error::InvalidSeries("no channels".into()));
        }
        if n < 2 {
            return Err(Error::SeriesTooShort { needed: 2, got: n });
        }
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidSeries("channels differ in length".into()));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("series".into()));
        }
        Ok(UniformSeries {
            sample_rate_hz,
            channels,
        })
    }

    pub fn single(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate_hz, vec![samples])
    }

    /// Three channels (x, y, z) from a vector track.
    pub fn from_vectors(sample_rate_hz: f64, points: &[Vector3<f64>]) -> Result<Self> {
        let channels = (0..3)
            .map(|axis| points.iter().map(|p| p[axis]).collect())
            .collect();
        Self::new(sample_rate_hz, channels)
    }

    pub fn to_vectors(&self) -> Vec<Vector3<f64>> {
        assert_eq!(self.channels.len(), 3, "vector view needs three channels");
        (0..self.len())
            .map(|k| Vector3::new(self.channels[0][k], self.channels[1][k], self.channels[2][k]))
            .collect()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    fn map_channels(&self, rate: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        UniformSeries::new(rate, self.channels.iter().map(|c| f(c)).collect())
    }
}

/// Second-order section in transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// `a[0]` is 1.
    pub a: [f64; 3],
}

impl Biquad {
    /// State that makes a constant input `x` pass through with no transient.
    fn steady_state(&self, x: f64) -> [f64; 2] {
        let dc = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[1] + self.a[2]);
        let y = dc * x;
        let z2 = self.b[2] * x - self.a[2] * y;
        let z1 = self.b[1] * x - self.a[1] * y + z2;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        for v in data.iter_mut() {
            let x = *v;
            let y = b0 * x + z[0];
            z[0] = b1 * x - a1 * y + z[1];
            z[1] = b2 * x - a2 * y;
            *v = y;
        }
    }
}

/// Digital Butterworth low-pass as a cascade of biquads (bilinear transform
/// with prewarping).
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Biquad>,
}

impl Butterworth {
    pub fn lowpass(order: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        if order == 0 || order % 2 != 0 {
            return Err(Error::InvalidFilter(format!(
                "order must be a positive even integer, got {order}"
            )));
        }
        let nyquist_hz = sample_rate_hz / 2.0;
        if !(cutoff_hz > 0.0) {
            return Err(Error::InvalidFilter(format!(
                "cutoff must be positive, got {cutoff_hz}"
            )));
        }
        if cutoff_hz >= nyquist_hz {
            return Err(Error::CutoffAboveNyquist {
                cutoff_hz,
                nyquist_hz,
            });
        }
        let k = 2.0 * sample_rate_hz;
        let wc = k * (PI * cutoff_hz / sample_rate_hz).tan();
        let wc2 = wc * wc;
        let sections = (0..order / 2)
            .map(|i| {
                // Analog prototype pole pair at angle theta from the positive real axis.
                let theta = PI * (2 * i + 1 + order) as f64 / (2 * order) as f64;
                let damping = -2.0 * theta.cos() * wc;
                let a0 = k * k + damping * k + wc2;
                let a1 = (2.0 * wc2 - 2.0 * k * k) / a0;
                let a2 = (k * k - damping * k + wc2) / a0;
                let g = wc2 / a0;
                Biquad {
                    b: [g, 2.0 * g, g],
                    a: [1.0, a1, a2],
                }
            })
            .collect();
        Ok(Butterworth { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Causal single pass, state initialised to the steady state of the first sample.
    pub fn filter_forward(&self, data: &mut [f64]) {
        let Some(&x0) = data.first() else { return };
        for s in &self.sections {
            s.run(data, s.steady_state(x0));
        }
    }

    /// Forward then backward pass over an odd-reflection padded copy.
    fn forward_backward(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let pad = (3 * (2 * self.sections.len() + 1)).min(n.saturating_sub(1));
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.filter_forward(&mut ext);
        ext.reverse();
        self.filter_forward(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    /// Zero-phase filtering. The forward-backward and backward-forward
    /// passes differ slightly near the edges; their mean commutes exactly
    /// with time reversal.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let a = self.forward_backward(x);
        let mut rev = x.to_vec();
        rev.reverse();
        let mut b = self.forward_backward(&rev);
        b.reverse();
        a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect()
    }
}

/// Zero-phase Butterworth low-pass applied channel by channel.
pub fn lowpass(series: &UniformSeries, cutoff_hz: f64, order: usize) -> Result<UniformSeries> {
    let filter = Butterworth::lowpass(order, cutoff_hz, series.sample_rate_hz)?;
    series.map_channels(series.sample_rate_hz, |c| filter.filtfilt(c))
}

/// First or second derivative by central differences, with one-sided
/// second-order formulas at the edges.
pub fn differentiate(series: &UniformSeries, derivative_order: u8) -> Result<UniformSeries> {
    let n = series.len();
    let rate = series.sample_rate_hz;
    match derivative_order {
        1 => series.map_channels(rate, |x| first_difference(x, rate)),
        2 => {
            if n < 3 {
                return Err(Error::SeriesTooShort { needed: 3, got: n });
            }
            series.map_channels(rate, |x| second_difference(x, rate))
        }
        other => Err(Error::InvalidSeries(format!(
            "derivative order must be 1 or 2, got {other}"
        ))),
    }
}

fn first_difference(x: &[f64], rate: f64) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let d = (x[1] - x[0]) * rate;
        return vec![d, d];
    }
    let mut out = vec![0.0; n];
    out[0] = (3.0 * (x[1] - x[0]) - (x[2] - x[1])) * rate / 2.0;
    for k in 1..n - 1 {
        out[k] = (x[k + 1] - x[k - 1]) * rate / 2.0;
    }
    out[n - 1] = (3.0 * (x[n - 1] - x[n - 2]) - (x[n - 2] - x[n - 3])) * rate / 2.0;
    out
}

fn second_difference(x: &[f64], rate: f64) -> Vec<f64> {
    let n = x.len();
    let r2 = rate * rate;
    // Written as a difference of first differences: consecutive samples are
    // close, so each inner subtraction is exact or nearly so.
    let central = |k: usize| ((x[k + 1] - x[k]) - (x[k] - x[k - 1])) * r2;
    let mut out = vec![0.0; n];
    for k in 1..n - 1 {
        out[k] = central(k);
    }
    if n == 3 {
        out[0] = out[1];
        out[2] = out[1];
    } else {
        // 2x0 - 5x1 + 4x2 - x3 in difference form.
        let edge = |d0: f64, d1: f64, d2: f64| (-2.0 * d0 + 3.0 * d1 - d2) * r2;
        out[0] = edge(x[1] - x[0], x[2] - x[1], x[3] - x[2]);
        out[n - 1] = edge(
            x[n - 2] - x[n - 1],
            x[n - 3] - x[n - 2],
            x[n - 4] - x[n - 3],
        );
    }
    out
}

/// Subtracts the straight line through the first and last samples. The line
/// has zero second derivative, so acceleration estimates may skip it.
pub fn remove_endpoint_trend(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let (x0, x1) = (x[0], x[n - 1]);
    let span = (n - 1) as f64;
    x.iter()
        .enumerate()
        .map(|(k, v)| {
            let w = k as f64 / span;
            (v - x0) * (1.0 - w) + (v - x1) * w
        })
        .collect()
}

/// Anti-alias filter at `0.4 * rate / factor`, then keep every `factor`-th sample.
pub fn decimate(series: &UniformSeries, factor: usize) -> Result<UniformSeries> {
    if factor < 1 {
        return Err(Error::InvalidFilter("decimation factor must be at least 1".into()));
    }
    if factor == 1 {
        return Ok(series.clone());
    }
    let new_rate = series.sample_rate_hz / factor as f64;
    let filtered = lowpass(series, 0.4 * new_rate, DEFAULT_FILTER_ORDER)?;
    filtered.map_channels(new_rate, |c| c.iter().step_by(factor).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, rate: f64, f: impl Fn(f64) -> f64) -> UniformSeries {
        UniformSeries::single(rate, (0..n).map(|k| f(k as f64 / rate)).collect()).unwrap()
    }

    #[test]
    fn constant_passes_unchanged() {
        let s = ramp(500, 200.0, |_| 7.0);
        let out = lowpass(&s, 5.0, 4).unwrap();
        assert!(out.channel(0).iter().all(|v| (v - 7.0).abs() < 1e-9));
    }

    #[test]
    fn cutoff_at_or_above_nyquist_rejected() {
        let s = ramp(10, 200.0, |t| t);
        assert!(matches!(
            lowpass(&s, 100.0, 4),
            Err(Error::CutoffAboveNyquist { .. })
        ));
        assert!(lowpass(&s, 5.0, 3).is_err());
    }

    #[test]
    fn sections_have_unit_dc_gain() {
        let f = Butterworth::lowpass(6, 5.0, 200.0).unwrap();
        for s in f.sections() {
            let g = s.b.iter().sum::<f64>() / s.a.iter().sum::<f64>();
            assert!((g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_derivative_of_line() {
        let d = differentiate(&ramp(20, 50.0, |t| 3.0 * t - 1.0), 1).unwrap();
        assert!(d.channel(0).iter().all(|v| (v - 3.0).abs() < 1e-9));
    }

    #[test]
    fn second_derivative_of_parabola() {
        let d = differentiate(&ramp(20, 200.0, |t| t * t), 2).unwrap();
        for v in &d.channel(0)[1..19] {
            assert!((v - 2.0).abs() < 1e-6, "{v}");
        }
        assert!((d.channel(0)[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn derivative_edge_cases() {
        let short = ramp(2, 10.0, |t| t);
        assert!(matches!(
            differentiate(&short, 2),
            Err(Error::SeriesTooShort { needed: 3, got: 2 })
        ));
        assert_eq!(differentiate(&short, 1).unwrap().channel(0), &[1.0, 1.0]);
        let three = ramp(3, 10.0, |t| t * t);
        let d = differentiate(&three, 2).unwrap();
        assert!(d.channel(0).iter().all(|v| (v - 2.0).abs() < 1e-9));
        assert!(differentiate(&three, 3).is_err());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let s = ramp(30, 200.0, |_| 1.25);
        for order in [1, 2] {
            assert!(differentiate(&s, order)
                .unwrap()
                .channel(0)
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn decimate_factor_one_is_identity() {
        let s = ramp(100, 2000.0, |t| (40.0 * t).sin());
        assert_eq!(decimate(&s, 1).unwrap(), s);
        assert!(decimate(&s, 0).is_err());
    }

    #[test]
    fn decimate_constant() {
        let s = ramp(1000, 2000.0, |_| -3.5);
        let d = decimate(&s, 10).unwrap();
        assert_eq!(d.sample_rate_hz(), 200.0);
        assert_eq!(d.len(), 100);
        assert!(d.channel(0).iter().all(|v| (v + 3.5).abs() < 1e-9));
    }

    #[test]
    fn endpoint_trend_removed() {
        let r = remove_endpoint_trend(&[1.0, 2.5, 3.0, 4.0]);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[3], 0.0);
        assert!((r[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn series_validation() {
        assert!(UniformSeries::single(100.0, vec![1.0]).is_err());
        assert!(UniformSeries::single(0.0, vec![1.0, 2.0]).is_err());
        assert!(UniformSeries::single(100.0, vec![1.0, f64::NAN]).is_err());
        assert!(UniformSeries::new(100.0, vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}
