use std::f64::consts::PI;

use kinegrf::metrics::{compare, stance_vgrf_shape, StanceShape};
use kinegrf::signal::UniformSeries;
use proptest::prelude::*;

fn pair_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )
    })
}

fn one(x: Vec<f64>) -> UniformSeries {
    UniformSeries::single(100.0, x).unwrap()
}

/// Double-hump stance curve in body weights, sampled at `n` points.
fn m_curve(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = k as f64 / (n - 1) as f64;
            1.15 * ((PI * s).sin() + 0.25 * (3.0 * PI * s).sin())
        })
        .collect()
}

proptest! {
    #[test]
    fn rmse_is_symmetric((a, b) in pair_strategy(), comp in any::<bool>()) {
        let ab = compare(&one(a.clone()), &one(b.clone()), comp).unwrap();
        let ba = compare(&one(b), &one(a), comp).unwrap();
        prop_assert_eq!(ab.rmse[0], ba.rmse[0]);
        prop_assert!((ab.mean_bias[0] + ba.mean_bias[0]).abs() <= 1e-12 * ab.rmse[0].max(1.0));
    }

    #[test]
    fn rmse_scales_with_difference((a, b) in pair_strategy(), c in -20.0f64..20.0) {
        let r = compare(&one(a.clone()), &one(b.clone()), false).unwrap().rmse[0];
        let scaled_a: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y + c * (x - y)).collect();
        let rc = compare(&one(scaled_a), &one(b), false).unwrap().rmse[0];
        prop_assert!((rc - c.abs() * r).abs() <= 1e-9 * (1.0 + c.abs() * r));
    }

    #[test]
    fn report_matches_direct_formula((a, b) in pair_strategy()) {
        let n = a.len() as f64;
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let rmse = (d.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let bias = d.iter().sum::<f64>() / n;
        let centred = (d.iter().map(|v| (v - bias).powi(2)).sum::<f64>() / n).sqrt();
        let r = compare(&one(a), &one(b), true).unwrap();
        prop_assert!((r.rmse[0] - rmse).abs() <= 1e-12 * rmse.max(1.0));
        prop_assert!((r.mean_bias[0] - bias).abs() <= 1e-12 * rmse.max(1.0));
        prop_assert!((r.bias_compensated_rmse[0] - centred).abs() <= 1e-12 * rmse.max(1.0));
        prop_assert!(r.bias_compensated_rmse[0] <= r.rmse[0] + 1e-12);
    }

    #[test]
    fn shape_survives_uniform_time_stretch(n in 20usize..200, repeat in 1usize..6, bw in 300.0f64..1200.0) {
        let x: Vec<f64> = m_curve(n).iter().map(|v| v * bw).collect();
        let stretched: Vec<f64> = x.iter().flat_map(|&v| std::iter::repeat(v).take(repeat)).collect();
        prop_assert_eq!(stance_vgrf_shape(&x, bw).unwrap(), stance_vgrf_shape(&stretched, bw).unwrap());
    }
}

#[test]
fn shape_is_stable_across_sampling_rates() {
    let coarse = stance_vgrf_shape(&m_curve(120), 1.0).unwrap();
    let fine = stance_vgrf_shape(&m_curve(1200), 1.0).unwrap();
    match (coarse, fine) {
        (
            StanceShape::MShaped { first_peak: a, valley: b, second_peak: c },
            StanceShape::MShaped { first_peak: x, valley: y, second_peak: z },
        ) => {
            assert!((a - x).abs() < 1e-3 && (b - y).abs() < 1e-3 && (c - z).abs() < 1e-3);
            assert!(a > 1.0 && b < 1.0 && c > 1.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn mismatched_rates_rejected() {
    let a = UniformSeries::single(100.0, vec![1.0, 2.0]).unwrap();
    let b = UniformSeries::single(200.0, vec![1.0, 2.0]).unwrap();
    assert!(compare(&a, &b, false).is_err());
}
