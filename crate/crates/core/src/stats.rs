//! Scalar statistical helpers: normal quantile/CDF and a one-sample
//! Kolmogorov–Smirnov distance against the standard normal.

use crate::error::{Error, Result};

/// Standard normal quantile z_p = Φ⁻¹(p).
///
/// Acklam's rational approximation, relative error below 1.2e-9 on (0,1).
/// Callers that need the conventional two-sided critical value at
/// alpha = 0.05 should use [`critical_z`], which returns 1.96 exactly.
#[allow(clippy::excessive_precision)] // published coefficient table, kept verbatim
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "normal quantile requires p in (0,1), got {p}"
        )));
    }

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Two-sided critical value z_{1−α/2}.
///
/// At alpha = 0.05 this is the constant 1.96 used by the reference
/// simulations; other levels go through [`normal_quantile`].
pub fn critical_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0,1), got {alpha}"
        )));
    }
    if (alpha - 0.05).abs() < 1e-12 {
        return Ok(1.96);
    }
    normal_quantile(1.0 - alpha / 2.0)
}

/// Standard normal CDF Φ(x).
///
/// Chebyshev-fitted erfc (fractional error < 1.2e-7), plenty for the
/// Kolmogorov–Smirnov diagnostics this crate runs at tolerance ~1e-2.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// One-sample Kolmogorov–Smirnov distance sup_x |F̂(x) − Φ(x)|.
pub fn ks_distance_to_std_normal(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let mut sup = 0.0_f64;
    for (i, x) in sorted.iter().enumerate() {
        let phi = normal_cdf(*x);
        sup = sup.max((phi - i as f64 / m).abs());
        sup = sup.max((phi - (i + 1) as f64 / m).abs());
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference quantiles to 16 digits (R qnorm / scipy.stats.norm.ppf).
    #[test]
    fn quantile_matches_reference_to_1e8() {
        let cases = [
            (0.975, 1.959963984540054),
            (0.95, 1.6448536269514722),
            (0.9, 1.2815515655446004),
            (0.995, 2.5758293035489004),
            (0.9995, 3.2905267314919255),
            (0.5, 0.0),
            (0.025, -1.959963984540054),
            (0.001, -3.090232306167813),
        ];
        for (p, z) in cases {
            let got = normal_quantile(p).unwrap();
            assert!(
                (got - z).abs() <= 1e-8,
                "quantile({p}) = {got}, reference {z}"
            );
        }
    }

    #[test]
    fn critical_z_is_exactly_196_at_alpha_005() {
        assert_eq!(critical_z(0.05).unwrap(), 1.96);
        let z01 = critical_z(0.01).unwrap();
        assert!((z01 - 2.5758293035489004).abs() < 1e-8);
        assert!(critical_z(0.0).is_err());
        assert!(critical_z(1.0).is_err());
    }

    #[test]
    fn cdf_matches_reference() {
        let cases = [
            (0.0, 0.5),
            (1.0, 0.8413447460685429),
            (2.0, 0.9772498680518208),
            (-1.0, 0.15865525393145705),
            (0.5, 0.6914624612740131),
            (-2.5, 0.006209665325776132),
        ];
        for (x, phi) in cases {
            assert!(
                (normal_cdf(x) - phi).abs() < 1e-6,
                "cdf({x}) = {}, reference {phi}",
                normal_cdf(x)
            );
        }
    }

    #[test]
    fn ks_distance_small_on_normal_quantiles_large_on_uniform() {
        let m = 2000;
        let grid: Vec<f64> = (0..m)
            .map(|i| normal_quantile((i as f64 + 0.5) / m as f64).unwrap())
            .collect();
        assert!(ks_distance_to_std_normal(&grid) < 0.001);

        let unif: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        assert!(ks_distance_to_std_normal(&unif) > 0.4);
    }
}
