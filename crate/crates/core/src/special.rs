//! Special functions used by the distributions and the test statistics:
//! log-gamma, regularized incomplete gamma (both tails, plus an inverse),
//! and the standard normal CDF/quantile.
//!
//! All of these are classical algorithms (Lanczos approximation, power series
//! and Lentz continued fractions, Acklam's quantile polynomial) implemented
//! here so the crate controls its own accuracy; relative error is ~1e-13 over
//! the ranges the library exercises.

/// Lanczos approximation of ln Γ(x) (g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFICIENTS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    const G: f64 = 7.0;

    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }

    let x = x - 1.0;
    let mut sum = COEFFICIENTS[0];
    for (i, &c) in COEFFICIENTS[1..].iter().enumerate() {
        sum += c / (x + i as f64 + 1.0);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
///
/// Series for `x < a + 1`, Lentz continued fraction otherwise.
pub fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "P(a,x) needs a > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_gamma_series(a, x)
    } else {
        1.0 - upper_gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn regularized_upper_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "Q(a,x) needs a > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_cf(a, x)
    }
}

fn lower_gamma_series(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;

    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    // Lentz's algorithm for the continued fraction of Q(a, x).
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
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
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Inverse of `regularized_lower_gamma` in its second argument:
/// returns x with P(a, x) = p.
///
/// Wilson–Hilferty starting point, then safeguarded Newton; the roundtrip
/// P(a, inverse(a, p)) − p stays below 1e-12 across the tested range.
pub fn inverse_regularized_lower_gamma(a: f64, p: f64) -> f64 {
    assert!(a > 0.0, "inverse P(a,·) needs a > 0");
    assert!((0.0..1.0).contains(&p), "inverse P(a,·) needs p in [0,1)");
    if p == 0.0 {
        return 0.0;
    }

    // Wilson–Hilferty: x ≈ a (1 − 1/(9a) + z √(1/(9a)))³
    let z = standard_normal_quantile(p);
    let c = 1.0 / (9.0 * a);
    let mut x = a * (1.0 - c + z * c.sqrt()).powi(3);
    if !x.is_finite() || x <= 0.0 {
        x = a * p; // crude but positive
    }

    let ln_ga = ln_gamma(a);
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for _ in 0..100 {
        let f = regularized_lower_gamma(a, x) - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        // dP/dx = x^{a-1} e^{-x} / Γ(a)
        let dlog = (a - 1.0) * x.ln() - x - ln_ga;
        let deriv = dlog.exp();
        let mut next = if deriv > 0.0 { x - f / deriv } else { x };
        if !(next > lo && (next < hi || hi.is_infinite())) || !next.is_finite() {
            // Newton escaped the bracket; bisect.
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { lo.max(x) * 2.0 + 1e-300 };
        }
        if (next - x).abs() <= 1e-14 * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// Standard normal CDF, via the incomplete-gamma form of erfc.
pub fn standard_normal_cdf(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    // erfc(|z|) = Q(1/2, z²)
    let half_erfc = 0.5 * regularized_upper_gamma(0.5, z * z);
    if x >= 0.0 {
        1.0 - half_erfc
    } else {
        half_erfc
    }
}

/// Standard normal quantile Φ⁻¹(p), Acklam's rational approximation plus one
/// Halley refinement against [`standard_normal_cdf`].
#[allow(clippy::excessive_precision)]
pub fn standard_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal quantile needs p in (0,1)");

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

    // One Halley step.
    let e = standard_normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Binomial pmf P(X = k) for X ~ Binomial(n, p), computed in log space.
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    assert!(k <= n);
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (n_f, k_f) = (n as f64, k as f64);
    let ln_choose = ln_gamma(n_f + 1.0) - ln_gamma(k_f + 1.0) - ln_gamma(n_f - k_f + 1.0);
    (ln_choose + k_f * p.ln() + (n_f - k_f) * (1.0 - p).ln()).exp()
}

/// Poisson pmf P(X = k) for X ~ Poisson(lambda).
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    assert!(lambda > 0.0);
    let k_f = k as f64;
    (k_f * lambda.ln() - lambda - ln_gamma(k_f + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-12);
        assert!(ln_gamma(2.0).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0_f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }

    #[test]
    fn lower_gamma_exponential_case() {
        // P(1, x) = 1 − e^{−x}
        for &x in &[0.1_f64, 0.5, 1.0, 2.0, 10.0] {
            let expected = 1.0 - (-x).exp();
            assert!((regularized_lower_gamma(1.0, x) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_tails_sum_to_one() {
        for &a in &[0.5, 1.0, 2.5, 10.0, 100.0] {
            for &x in &[0.01, 0.5, 1.0, 5.0, 50.0, 200.0] {
                let s = regularized_lower_gamma(a, x) + regularized_upper_gamma(a, x);
                assert!((s - 1.0).abs() < 1e-12, "a={a} x={x} sum={s}");
            }
        }
    }

    #[test]
    fn inverse_gamma_roundtrip() {
        for &a in &[0.5, 1.0, 2.0, 7.5, 40.0] {
            for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = inverse_regularized_lower_gamma(a, p);
                let back = regularized_lower_gamma(a, x);
                assert!((back - p).abs() < 1e-11, "a={a} p={p} back={back}");
            }
        }
    }

    #[test]
    fn normal_cdf_known_values() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-14);
        assert!((standard_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((standard_normal_cdf(-1.0) - 0.15865525393145707).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile_roundtrip() {
        for &p in &[1e-8, 1e-4, 0.025, 0.5, 0.8, 0.999, 1.0 - 1e-9] {
            let x = standard_normal_quantile(p);
            assert!((standard_normal_cdf(x) - p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn binomial_pmf_matches_exact_fraction() {
        // C(10,5)/2^10 = 252/1024
        let p = binomial_pmf(10, 0.5, 5);
        assert!((p - 252.0 / 1024.0).abs() < 1e-13);
        let total: f64 = (0..=10).map(|k| binomial_pmf(10, 0.5, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_pmf_known_value() {
        // e^{-10} 10^10 / 10!
        let p = poisson_pmf(10.0, 10);
        assert!((p - 0.125110035721133).abs() < 1e-12);
    }
}
