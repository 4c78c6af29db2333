//! Standard normal CDF and the one-sample Kolmogorov–Smirnov distance.

use crate::error::{Error, Result};

/// `Φ(x)` by Abramowitz & Stegun 26.2.17, absolute error below `7.5e−8`.
pub fn normal_cdf(x: f64) -> f64 {
    const P: f64 = 0.231_641_9;
    const B: [f64; 5] = [0.319_381_530, -0.356_563_782, 1.781_477_937, -1.821_255_978, 1.330_274_429];
    if x.is_nan() {
        return f64::NAN;
    }
    let z = x.abs();
    let t = 1.0 / (1.0 + P * z);
    let poly = t * (B[0] + t * (B[1] + t * (B[2] + t * (B[3] + t * B[4]))));
    let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let upper = density * poly;
    if x >= 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

/// `sup_x |F_R(x) − Φ(x)|`, evaluated on both sides of every order statistic.
pub fn ks_statistic(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let r = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / r - f).max(f - i as f64 / r)
        })
        .fold(0.0, f64::max))
}

/// Asymptotic 5% critical value `1.358/√R`.
pub fn ks_critical_5pct(r: usize) -> f64 {
    1.358 / (r as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-7);
        assert!((normal_cdf(-1.0) - 0.158_655_253_9).abs() < 1e-7);
        assert!(normal_cdf(40.0) == 1.0 && normal_cdf(-40.0) < 1e-300);
    }

    #[test]
    fn ks_examples() {
        let single = ks_statistic(&[0.0]).unwrap();
        assert!((single - 0.5).abs() < 1e-7);
        let shifted: Vec<f64> = (0..50).map(|i| 10.0 + i as f64 * 0.01).collect();
        assert!(ks_statistic(&shifted).unwrap() > 0.999_999);
        assert!(ks_statistic(&[]).is_err());
    }
}
