//! Agreement metrics between estimated and reference series, and the
//! double-peak descriptor of stance vertical force.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::signal::UniformSeries;

/// Per-channel error statistics of `a - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rmse: Vec<f64>,
    pub mean_bias: Vec<f64>,
    /// RMSE after removing `mean_bias`; equals `rmse` when compensation is off.
    pub bias_compensated_rmse: Vec<f64>,
    pub sample_count: usize,
    pub bias_compensated: bool,
}

pub fn compare(a: &UniformSeries, b: &UniformSeries, compensate_bias: bool) -> Result<ComparisonReport> {
    if a.len() != b.len() || a.channel_count() != b.channel_count() {
        return Err(Error::SeriesMismatch(format!(
            "{}x{} vs {}x{} samples",
            a.channel_count(),
            a.len(),
            b.channel_count(),
            b.len()
        )));
    }
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::SeriesMismatch(format!(
            "rates {} Hz and {} Hz differ",
            a.sample_rate_hz(),
            b.sample_rate_hz()
        )));
    }
    let n = a.len() as f64;
    let mut report = ComparisonReport {
        rmse: Vec::new(),
        mean_bias: Vec::new(),
        bias_compensated_rmse: Vec::new(),
        sample_count: a.len(),
        bias_compensated: compensate_bias,
    };
    for c in 0..a.channel_count() {
        let diff: Vec<f64> = a.channel(c).iter().zip(b.channel(c)).map(|(x, y)| x - y).collect();
        let bias = diff.iter().sum::<f64>() / n;
        let rms = |offset: f64| (diff.iter().map(|d| (d - offset).powi(2)).sum::<f64>() / n).sqrt();
        let rmse = rms(0.0);
        let compensated = if compensate_bias { rms(bias).min(rmse) } else { rmse };
        report.rmse.push(rmse);
        report.mean_bias.push(bias);
        report.bias_compensated_rmse.push(compensated);
    }
    Ok(report)
}

impl ComparisonReport {
    /// One row per channel: `axis,rmse,mean_bias,bias_compensated_rmse,sample_count`.
    pub fn to_csv(&self, axis_names: &[&str]) -> String {
        let mut out = String::from("axis,rmse,mean_bias,bias_compensated_rmse,sample_count\n");
        for c in 0..self.rmse.len() {
            let name = axis_names.get(c).copied().unwrap_or("?");
            let _ = writeln!(
                out,
                "{name},{},{},{},{}",
                self.rmse[c], self.mean_bias[c], self.bias_compensated_rmse[c], self.sample_count
            );
        }
        out
    }

    pub fn to_text(&self, axis_names: &[&str], unit: &str) -> String {
        let mut out = format!(
            "samples: {}  bias compensation: {}\n",
            self.sample_count,
            if self.bias_compensated { "on" } else { "off" }
        );
        for c in 0..self.rmse.len() {
            let name = axis_names.get(c).copied().unwrap_or("?");
            let _ = writeln!(
                out,
                "{name:>4}: rmse {:.6} {unit}, mean bias {:+.6} {unit}, compensated rmse {:.6} {unit}",
                self.rmse[c], self.mean_bias[c], self.bias_compensated_rmse[c]
            );
        }
        out
    }
}

/// Peaks and valley of a stance vertical force, in body weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StanceShape {
    MShaped {
        first_peak: f64,
        valley: f64,
        second_peak: f64,
    },
    NotMShaped,
}

/// Takes the two largest interior local maxima (in time order) and the
/// minimum between them.
pub fn stance_vgrf_shape(vgrf: &[f64], body_weight_n: f64) -> Result<StanceShape> {
    if vgrf.is_empty() {
        return Err(Error::EmptySegment);
    }
    if !(body_weight_n > 0.0) {
        return Err(Error::InvalidSeries("body weight must be positive".into()));
    }
    let x: Vec<f64> = vgrf.iter().map(|v| v / body_weight_n).collect();
    let mut maxima: Vec<usize> = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                maxima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if maxima.len() < 2 {
        return Ok(StanceShape::NotMShaped);
    }
    maxima.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let (p, q) = (maxima[0].min(maxima[1]), maxima[0].max(maxima[1]));
    let valley = x[p..=q].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StanceShape::MShaped {
        first_peak: x[p],
        valley,
        second_peak: x[q],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(channels: Vec<Vec<f64>>) -> UniformSeries {
        UniformSeries::new(100.0, channels).unwrap()
    }

    #[test]
    fn identical_series() {
        let a = s(vec![vec![1.0, 2.0, 3.0]]);
        let r = compare(&a, &a, true).unwrap();
        assert_eq!(r.rmse, vec![0.0]);
        assert_eq!(r.mean_bias, vec![0.0]);
    }

    #[test]
    fn pure_offset() {
        let b = s(vec![vec![0.9, 1.0, 0.95, 1.02]]);
        let a = s(vec![b.channel(0).iter().map(|v| v + 0.072).collect()]);
        let r = compare(&a, &b, true).unwrap();
        assert!((r.mean_bias[0] - 0.072).abs() < 1e-12);
        assert!(r.bias_compensated_rmse[0] < 1e-12);
        let raw = compare(&a, &b, false).unwrap();
        assert_eq!(raw.bias_compensated_rmse, raw.rmse);
    }

    #[test]
    fn length_mismatch() {
        assert!(compare(&s(vec![vec![1.0, 2.0]]), &s(vec![vec![1.0, 2.0, 3.0]]), false).is_err());
    }

    #[test]
    fn m_curve() {
        let v = [0.0, 0.6, 1.1, 0.9, 0.8, 0.9, 1.1, 0.5, 0.0];
        assert_eq!(
            stance_vgrf_shape(&v, 1.0).unwrap(),
            StanceShape::MShaped {
                first_peak: 1.1,
                valley: 0.8,
                second_peak: 1.1
            }
        );
    }

    #[test]
    fn ramp_is_not_m_shaped() {
        let v: Vec<f64> = (0..50).map(|k| k as f64).collect();
        assert_eq!(stance_vgrf_shape(&v, 700.0).unwrap(), StanceShape::NotMShaped);
        assert!(matches!(stance_vgrf_shape(&[], 700.0), Err(Error::EmptySegment)));
    }

    #[test]
    fn report_formats() {
        let a = s(vec![vec![1.0, 2.0], vec![0.0, 0.0]]);
        let b = s(vec![vec![0.0, 2.0], vec![0.0, 0.0]]);
        let r = compare(&a, &b, false).unwrap();
        let csv = r.to_csv(&["x", "y"]);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            format!("x,{},0.5,{},2", 0.5f64.sqrt(), 0.5f64.sqrt())
        );
        assert!(r.to_text(&["x", "y"], "m").contains("rmse"));
    }
}
