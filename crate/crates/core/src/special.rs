//! Gamma-family helpers shared by the integration and identity code.

use std::f64::consts::PI;

/// Γ(a) for real a (Lanczos approximation).
pub fn gamma(a: f64) -> f64 {
    statrs::function::gamma::gamma(a)
}

pub fn ln_gamma(a: f64) -> f64 {
    statrs::function::gamma::ln_gamma(a)
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
///
/// Series below `x < a + 1`, continued fraction above.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// ∫₀^y e^z z^{a-1} dz for a > 0, y >= 0.
///
/// Expanding e^z gives Σ_k y^{a+k} / (k! (a+k)), an entire series with
/// positive terms, so summation is stable for any y the identity suite uses.
pub fn exp_weighted_integral(a: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    // term_k = y^{a+k} / k!
    let mut term = y.powf(a);
    for k in 0..10_000 {
        let kf = k as f64;
        if k > 0 {
            term *= y / kf;
        }
        let add = term / (a + kf);
        sum += add;
        if kf > y && add < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Surface measure of the unit sphere S^{n-1} ⊂ ℝⁿ (2 for n = 1).
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Binomial coefficient C(n, k) as an integer.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
