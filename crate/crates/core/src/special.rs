//! Special functions: log-gamma, regularized incomplete gamma, the normal
//! distribution, and the chi-square and infinite-dof studentized range tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::quadrature::integrate_adaptive;
use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// Series for the lower regularized incomplete gamma, valid for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction (modified Lentz) for the upper regularized incomplete
/// gamma, valid for x >= a + 1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Lower regularized incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Upper regularized incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        2.0 - gamma_q(0.5, x * x)
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Phi(z)`, accurate in the far tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

fn check_chi_square(x: f64, dof: u32) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!(
            "chi-square argument must be >= 0, got {x}"
        )));
    }
    if dof == 0 {
        return Err(Error::invalid(
            "chi-square degrees of freedom must be positive",
        ));
    }
    Ok(())
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: u32) -> Result<f64> {
    check_chi_square(x, dof)?;
    Ok(gamma_q(f64::from(dof) / 2.0, x / 2.0))
}

pub fn chi_square_cdf(x: f64, dof: u32) -> Result<f64> {
    check_chi_square(x, dof)?;
    Ok(gamma_p(f64::from(dof) / 2.0, x / 2.0))
}

/// Integration range and tolerance for the studentized range integral; the
/// integrand is below 1e-30 outside [-12, 12].
const RANGE_LIMIT: f64 = 12.0;
const RANGE_TOL: f64 = 1e-9;

/// Upper tail `P(R > q)` of the range `R` of `k` independent standard
/// normals (the studentized range with infinite degrees of freedom).
///
/// Uses `P(R > q) = k ∫ φ(z) (Φ(z)^(k-1) - [Φ(z) - Φ(z - q)]^(k-1)) dz`,
/// which follows from `k ∫ φ Φ^(k-1) = 1` and keeps small tails free of
/// cancellation.
pub fn studentized_range_sf(q: f64, k: u32) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::invalid(format!(
            "studentized range argument must be >= 0, got {q}"
        )));
    }
    if k < 2 {
        return Err(Error::invalid(format!(
            "studentized range needs k >= 2, got {k}"
        )));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let km1 = (k - 1) as i32;
    let integrand = |z: f64| {
        let upper = normal_cdf(z);
        // Φ(z) - Φ(z - q), computed from whichever tail avoids cancellation.
        let inner = if z > 0.0 {
            normal_sf(z - q) - normal_sf(z)
        } else {
            upper - normal_cdf(z - q)
        };
        normal_pdf(z) * (upper.powi(km1) - inner.powi(km1))
    };
    let (value, _) = integrate_adaptive(integrand, -RANGE_LIMIT, RANGE_LIMIT, RANGE_TOL);
    Ok((f64::from(k) * value).clamp(0.0, 1.0))
}

/// Inverse of [`studentized_range_sf`]: the `q` whose upper tail is `alpha`.
pub fn studentized_range_quantile_upper(alpha: f64, k: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "tail probability must lie in (0, 1), got {alpha}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while studentized_range_sf(hi, k)? > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_sf(mid, k)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
        // ln(9!) = ln 362880
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(100.5) - 361.435_540_467_777_6).abs() < 1e-10);
    }

    #[test]
    fn erfc_known_values() {
        assert_eq!(erfc(0.0), 1.0);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((erfc(-1.0) - 1.842_700_792_949_714_9).abs() < 1e-15);
        // erfc(5) = 1.5374597944280349e-12, relative accuracy in the tail
        assert!((erfc(5.0) / 1.537_459_794_428_034_9e-12 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_quantiles() {
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((normal_sf(-1.0) + normal_sf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_closed_forms() {
        // chi-square with 2 dof is exponential with mean 2
        assert!((chi_square_sf(2.0, 2).unwrap() - (-1.0f64).exp()).abs() < 1e-14);
        assert!((chi_square_sf(6.0, 2).unwrap() - (-3.0f64).exp()).abs() < 1e-14);
        assert_eq!(chi_square_sf(0.0, 7).unwrap(), 1.0);
        // chi-square with 1 dof: sf(x) = erfc(sqrt(x/2))
        assert!((chi_square_sf(3.841_458_820_694_124, 1).unwrap() - 0.05).abs() < 1e-12);
        assert!(chi_square_sf(-1.0, 2).is_err());
        assert!(chi_square_sf(1.0, 0).is_err());
    }

    // Even dof has the closed form Q(m, x/2) = e^{-x/2} Σ_{i<m} (x/2)^i / i!,
    // an independent route over the full accuracy grid.
    #[test]
    fn chi_square_even_dof_matches_poisson_sum() {
        let mut worst: f64 = 0.0;
        for dof in (2..=200).step_by(2) {
            for xi in 0..=200 {
                let x = f64::from(xi);
                let h = x / 2.0;
                let mut term = 1.0f64;
                let mut sum = 1.0f64;
                for i in 1..dof / 2 {
                    term *= h / f64::from(i);
                    sum += term;
                }
                // sum may overflow e^{h} range for large dof; work in logs
                let exact = if sum.is_finite() {
                    (sum.ln() - h).exp()
                } else {
                    1.0
                };
                let got = chi_square_sf(x, dof).unwrap();
                worst = worst.max((got - exact.min(1.0)).abs());
            }
        }
        assert!(worst <= 1e-10, "worst abs error {worst}");
    }

    #[test]
    fn sf_plus_cdf_is_one() {
        for dof in [1, 2, 3, 10, 57, 200] {
            for x in [0.0, 0.3, 1.0, 5.5, 20.0, 150.0, 200.0] {
                let s = chi_square_sf(x, dof).unwrap() + chi_square_cdf(x, dof).unwrap();
                assert!((s - 1.0).abs() <= 1e-12, "dof {dof} x {x}: {s}");
            }
        }
    }

    #[test]
    fn studentized_range_two_groups_closed_form() {
        for i in 0..=16 {
            let q = 0.5 * f64::from(i);
            let closed = 2.0 * normal_sf(q / std::f64::consts::SQRT_2);
            let got = studentized_range_sf(q, 2).unwrap();
            assert!((got - closed).abs() <= 1e-6, "q {q}: {got} vs {closed}");
        }
        let q = 1.96 * std::f64::consts::SQRT_2;
        assert!((studentized_range_sf(q, 2).unwrap() - 0.05).abs() < 1e-3);
    }

    #[test]
    fn studentized_range_edges() {
        assert_eq!(studentized_range_sf(0.0, 5).unwrap(), 1.0);
        assert!(studentized_range_sf(-0.1, 5).is_err());
        assert!(studentized_range_sf(1.0, 1).is_err());
        assert!(studentized_range_sf(20.0, 14).unwrap() < 1e-12);
    }

    #[test]
    fn studentized_range_critical_value_three_groups() {
        // Tabulated q_{0.05}(3, inf) = 3.314
        let q = studentized_range_quantile_upper(0.05, 3).unwrap();
        assert!((q - 3.314).abs() < 5e-4, "{q}");
    }
}
