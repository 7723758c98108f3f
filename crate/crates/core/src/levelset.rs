//! Sublevel-set volumes and integrals through `∫ h exp(-g)`, and checks of
//! the closed-form identities that relate them.
//!
//! For g of degree d > 0 and h of degree p with n + p > 0,
//! `∫_{g <= y} h dx = y^{(n+p)/d} / Γ(1 + (n+p)/d) · ∫ h exp(-g) dx`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{nongauss_integral, sublevel_integral_direct, QuadratureConfig, SphereValues};
use crate::phf::{Exponent, HomoPoly, Phf};
use crate::special::{exp_weighted_integral, gamma, gamma_p};

/// A sublevel integral together with the pieces of its closed form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelReport {
    pub value: f64,
    pub std_error: f64,
    pub nodes_used: usize,
    /// ∫ h exp(-g) dx.
    pub nongauss: f64,
    /// Γ(1 + (n+p)/d).
    pub gamma_factor: f64,
    /// y^{(n+p)/d}.
    pub level_factor: f64,
}

fn require_positive_level(y: f64) -> Result<()> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidInput(format!("level y must be positive and finite, got {y}")));
    }
    Ok(())
}

/// ∫_{g <= y} h dx.
pub fn integrate_h_on_sublevel(h: &Phf, g: &Phf, y: f64, cfg: &QuadratureConfig) -> Result<SublevelReport> {
    require_positive_level(y)?;
    if g.degree() <= 0.0 {
        return Err(Error::NotCoercive { min: f64::NAN, max: f64::NAN });
    }
    let est = nongauss_integral(h, g, cfg)?;
    let a = (g.n() as f64 + h.degree()) / g.degree();
    let gamma_factor = gamma(1.0 + a);
    let level_factor = y.powf(a);
    let c = level_factor / gamma_factor;
    Ok(SublevelReport {
        value: c * est.value,
        std_error: c * est.std_error,
        nodes_used: est.nodes_used,
        nongauss: est.value,
        gamma_factor,
        level_factor,
    })
}

/// vol{g <= y} = y^{n/d} / Γ(1 + n/d) · ∫ exp(-g).
pub fn volume_sublevel(g: &Phf, y: f64, cfg: &QuadratureConfig) -> Result<SublevelReport> {
    integrate_h_on_sublevel(&Phf::constant(g.n(), 1.0), g, y, cfg)
}

/// vol ∩_k {g_k <= y} as the sublevel volume of max_k g_k.
pub fn volume_intersection(gs: &[Phf], y: f64, cfg: &QuadratureConfig) -> Result<SublevelReport> {
    let psi = Phf::max_of(gs.to_vec())?;
    volume_sublevel(&psi, y, cfg)
}

/// g̃_k(x) = g_k(z_k^{-1/d} x) = g_k(x) / z_k, so {g̃_k <= 1} = {g_k <= z_k}.
pub fn rescale_to_unit(gs: &[Phf], z: &[f64]) -> Result<Vec<Phf>> {
    if gs.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: gs.len(), got: z.len() });
    }
    if let Some(bad) = z.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidInput(format!("levels must be positive, got {bad}")));
    }
    Ok(gs.iter().zip(z).map(|(g, zk)| g.scaled(1.0 / zk)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    /// ∫ x^α exp(-g) dx.
    pub value: f64,
    /// Γ(1 + (n+|α|)/d) · ∫_{g <= 1} x^α dx from the direct sublevel integral.
    pub via_sublevel: f64,
    pub residual: f64,
}

/// ∫ x^α exp(-g) computed directly and through the sublevel moment.
pub fn moment_via_sublevel(alpha: &Exponent, g: &HomoPoly, cfg: &QuadratureConfig) -> Result<MomentReport> {
    if alpha.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: alpha.n() });
    }
    let h = monomial_phf(alpha);
    let gp = Phf::polynomial(g.clone());
    let value = nongauss_integral(&h, &gp, cfg)?.value;
    let sub = sublevel_integral_direct(&h, &gp, 1.0, cfg)?.value;
    let via_sublevel = gamma(1.0 + (g.n() as f64 + alpha.total() as f64) / g.degree() as f64) * sub;
    Ok(MomentReport { value, via_sublevel, residual: (value - via_sublevel).abs() / (1.0 + value.abs()) })
}

/// x^α as a handle (the constant 1 for α = 0).
pub fn monomial_phf(alpha: &Exponent) -> Phf {
    if alpha.total() == 0 {
        Phf::constant(alpha.n(), 1.0)
    } else {
        Phf::polynomial(HomoPoly::monomial(alpha.clone(), 1.0).expect("nonzero total"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_residual: f64,
    pub pass: bool,
    pub tolerance: f64,
    /// Right-hand side with the alternative constant 1/Γ((n+p)/d), reported
    /// next to the derived one for the sublevel Euler identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_constant_rhs: Option<f64>,
}

impl IdentityReport {
    fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let rel_residual = (lhs - rhs).abs() / (1.0 + rhs.abs());
        IdentityReport {
            name: name.to_string(),
            lhs,
            rhs,
            rel_residual,
            pass: rel_residual <= tolerance,
            tolerance,
            printed_constant_rhs: None,
        }
    }
}

pub const IDENTITY_TOL: f64 = 1e-6;

/// Where ∫₀^∞ is cut: g(rθ) = RADIAL_CUTOFF, past which exp(-g) < 1e-26.
const RADIAL_CUTOFF: f64 = 60.0;

/// ∫_{S^{n-1}} ∫₀^{R(θ)} r^{n-1} F(rθ) dr dσ with adaptive 1-D quadrature
/// along every ray, F evaluated at the actual points.
fn radial_integral<R, F>(sv: &SphereValues, radius: R, f: F) -> f64
where
    R: Fn(f64) -> f64 + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = sv.rule.n();
    sv.integrate(|theta, gv| {
        if gv.is_infinite() {
            return 0.0;
        }
        let r_max = radius(gv);
        let x = std::cell::RefCell::new(vec![0.0; n]);
        quadrature::integrate(
            |r: f64| {
                let mut x = x.borrow_mut();
                for (xi, t) in x.iter_mut().zip(theta) {
                    *xi = r * t;
                }
                r.powi(n as i32 - 1) * f(&x)
            },
            0.0,
            r_max,
            1e-14,
        )
        .integral
    })
    .value
}

/// Checks, for g of degree d and h of degree p:
///
/// - `euler_exp`: ∫ g h e^{-g} = ((n+p)/d) ∫ h e^{-g}
/// - `euler_sublevel`: ∫_{g<=1} g h = d / ((n+p+d) Γ((n+p)/d)) · ∫ h e^{-g}
/// - `incomplete_gamma`: ∫_{g<=y} e^{-g} / ∫ e^{-g} = P(n/d, y)
/// - `exp_growth`: ∫_{g<=y} e^{g} = ∫ e^{-g} / Γ(n/d) · ∫₀^y e^z z^{n/d-1} dz
///
/// Left-hand sides are ray-by-ray adaptive quadratures that evaluate g and h
/// at the actual points; right-hand sides use the closed-form constants.
/// The last two take h = 1.
pub fn identity_suite(g: &Phf, h: &Phf, y: f64, cfg: &QuadratureConfig) -> Result<Vec<IdentityReport>> {
    require_positive_level(y)?;
    if h.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: h.n() });
    }
    let n = g.n() as f64;
    let d = g.degree();
    let p = h.degree();
    if d <= 0.0 {
        return Err(Error::NotCoercive { min: f64::NAN, max: f64::NAN });
    }
    if n + p <= 0.0 {
        return Err(Error::RadialDivergence(n + p));
    }
    let sv = SphereValues::new(g, cfg)?;
    let inf_radius = |gv: f64| (RADIAL_CUTOFF / gv).powf(1.0 / d);
    let level_radius = |level: f64| move |gv: f64| (level / gv).powf(1.0 / d);

    let int_h = sv.nongauss(d, p, |x| h.value(x))?.value;
    let int_1 = sv.nongauss(d, 0.0, |_| 1.0)?.value;

    let mut out = Vec::with_capacity(4);

    let lhs = radial_integral(&sv, inf_radius, |x| {
        let gv = g.value(x);
        gv * h.value(x) * (-gv).exp()
    });
    out.push(IdentityReport::new("euler_exp", lhs, (n + p) / d * int_h, IDENTITY_TOL));

    let lhs = radial_integral(&sv, level_radius(1.0), |x| g.value(x) * h.value(x));
    let a = (n + p) / d;
    let mut rep = IdentityReport::new("euler_sublevel", lhs, d / ((n + p + d) * gamma(a)) * int_h, IDENTITY_TOL);
    rep.printed_constant_rhs = Some(int_h / gamma(a));
    out.push(rep);

    let lhs = radial_integral(&sv, level_radius(y), |x| (-g.value(x)).exp()) / int_1;
    out.push(IdentityReport::new("incomplete_gamma", lhs, gamma_p(n / d, y), IDENTITY_TOL));

    let lhs = radial_integral(&sv, level_radius(y), |x| g.value(x).exp());
    let rhs = int_1 / gamma(n / d) * exp_weighted_integral(n / d, y);
    out.push(IdentityReport::new("exp_growth", lhs, rhs, IDENTITY_TOL));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::mc_indicator_integral;
    use crate::phf::MonomialBasis;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn poly(n: usize, d: u32, terms: &[(&[u32], f64)]) -> Phf {
        Phf::polynomial(HomoPoly::new(n, d, terms.iter().map(|(e, c)| (Exponent::new(e.to_vec()), *c))).unwrap())
    }

    fn disk() -> Phf {
        poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)])
    }

    fn quartic() -> Phf {
        poly(2, 4, &[(&[4, 0], 1.0), (&[0, 4], 1.0)])
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default_for(2)
    }

    /// Area of {x⁴ + y⁴ <= 1}.
    fn quartic_area() -> f64 {
        4.0 * quadrature::integrate(|t: f64| (1.0 - t.powi(4)).powf(0.25), 0.0, 1.0, 1e-15).integral
    }

    #[test]
    fn volume_examples() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let g = Phf::polynomial(HomoPoly::quadratic_form(&q, 0.5).unwrap());
        assert_relative_eq!(volume_sublevel(&g, 1.0, &cfg()).unwrap().value, PI, max_relative = 1e-12);
        let x2 = poly(1, 2, &[(&[2], 1.0)]);
        let v = volume_sublevel(&x2, 1.0, &QuadratureConfig::default_for(1)).unwrap();
        assert_relative_eq!(v.value, 2.0, max_relative = 1e-14);
        let v = volume_sublevel(&quartic(), 2.0, &cfg()).unwrap();
        assert_relative_eq!(v.value, 2f64.sqrt() * quartic_area(), max_relative = 1e-12);
        assert_relative_eq!(v.value, 5.24412, max_relative = 1e-5);
    }

    #[test]
    fn weighted_examples() {
        let h = poly(2, 2, &[(&[2, 0], 1.0)]);
        let half = disk().scaled(0.5);
        let v = integrate_h_on_sublevel(&h, &half, 1.0, &cfg()).unwrap();
        assert_relative_eq!(v.value, PI, max_relative = 1e-12);
        let mc = mc_indicator_integral(&h, &half, 1.0, 1.5, &QuadratureConfig::monte_carlo(400_000, 5)).unwrap();
        assert!((mc.value - v.value).abs() < 3.0 * mc.std_error);

        let v = integrate_h_on_sublevel(&Phf::constant(2, 1.0), &disk(), 1.0, &cfg()).unwrap();
        assert_relative_eq!(v.value, PI, max_relative = 1e-12);

        let odd = poly(2, 1, &[(&[1, 0], 1.0)]);
        for y in [0.5, 1.0, 3.0] {
            assert!(integrate_h_on_sublevel(&odd, &quartic(), y, &cfg()).unwrap().value.abs() < 1e-13);
        }
    }

    #[test]
    fn intersection_examples() {
        let gs = vec![disk(), disk().scaled(2.0)];
        assert_relative_eq!(volume_intersection(&gs, 1.0, &cfg()).unwrap().value, PI / 2.0, max_relative = 1e-12);

        // max(x², y²) has kinks on the diagonals, so the rule converges slowly
        let gs = vec![poly(2, 2, &[(&[2, 0], 1.0)]), poly(2, 2, &[(&[0, 2], 1.0)])];
        let v = volume_intersection(&gs, 1.0, &QuadratureConfig::gauss(4096)).unwrap().value;
        assert_relative_eq!(v, 4.0, max_relative = 1e-5);

        let gs = vec![quartic(), Phf::norm_power(2, 4.0, 1.0).unwrap()];
        let v = volume_intersection(&gs, 1.0, &cfg()).unwrap().value;
        assert_relative_eq!(v, PI, max_relative = 1e-12);

        let mixed = vec![disk(), quartic()];
        assert!(matches!(volume_intersection(&mixed, 1.0, &cfg()), Err(Error::MixedDegrees(..))));
    }

    #[test]
    fn rescale_examples() {
        let r = rescale_to_unit(&[disk()], &[4.0]).unwrap();
        assert_relative_eq!(volume_sublevel(&r[0], 1.0, &cfg()).unwrap().value, 4.0 * PI, max_relative = 1e-12);
        let r = rescale_to_unit(&[quartic()], &[16.0]).unwrap();
        for x in [[0.3, 1.1], [2.0, -1.0]] {
            assert_relative_eq!(r[0].value(&x), quartic().value(&[x[0] / 2.0, x[1] / 2.0]), max_relative = 1e-14);
        }
        let r = rescale_to_unit(&[quartic()], &[1.0]).unwrap();
        assert_eq!(r[0].value(&[0.7, -0.2]), quartic().value(&[0.7, -0.2]));
        assert!(rescale_to_unit(&[quartic()], &[0.0]).is_err());
    }

    #[test]
    fn moments_via_sublevel() {
        let half = HomoPoly::norm_power(2, 1).scaled(0.5);
        let r = moment_via_sublevel(&Exponent::new(vec![0, 0]), &half, &cfg()).unwrap();
        assert_relative_eq!(r.value, 2.0 * PI, max_relative = 1e-12);
        assert!(r.residual < 1e-10);
        let r = moment_via_sublevel(&Exponent::new(vec![2, 0]), &half, &cfg()).unwrap();
        assert_relative_eq!(r.value, 2.0 * PI, max_relative = 1e-12);
        assert!(r.residual < 1e-10);
        let q = quartic();
        let r = moment_via_sublevel(&Exponent::new(vec![1, 0]), q.as_poly().unwrap(), &cfg()).unwrap();
        assert!(r.value.abs() < 1e-13 && r.via_sublevel.abs() < 1e-13);
    }

    #[test]
    fn identity_suite_one_dimensional() {
        let g = poly(1, 2, &[(&[2], 1.0)]);
        let one = Phf::constant(1, 1.0);
        let reps = identity_suite(&g, &one, 1.0, &QuadratureConfig::default_for(1)).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
        assert_relative_eq!(reps[0].lhs, PI.sqrt() / 2.0, max_relative = 1e-10);
        assert_relative_eq!(reps[1].lhs, 2.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(reps[1].rhs, 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(reps[1].printed_constant_rhs.unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn identity_suite_disk_incomplete_gamma() {
        let reps = identity_suite(&disk(), &Phf::constant(2, 1.0), 1.0, &cfg()).unwrap();
        let r = &reps[2];
        assert_relative_eq!(r.rhs, 1.0 - (-1f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(r.lhs, 0.632_120_558_828_557_7, max_relative = 1e-9);
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
    }

    #[test]
    fn identity_suite_quartic_weighted() {
        let h = poly(2, 2, &[(&[2, 0], 1.0), (&[1, 1], 0.5)]);
        for y in [0.5, 2.0] {
            let reps = identity_suite(&quartic(), &h, y, &cfg()).unwrap();
            assert!(reps.iter().all(|r| r.pass && r.rel_residual < 1e-8), "{reps:?}");
        }
        let reps = identity_suite(&Phf::polynomial(HomoPoly::norm_power(3, 2)), &Phf::constant(3, 1.0), 1.0,
            &QuadratureConfig::default_for(3)).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
    }

    #[test]
    fn incomplete_gamma_ratio_is_monotone() {
        let mut last = 0.0;
        for y in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let r = identity_suite(&quartic(), &Phf::constant(2, 1.0), y, &cfg()).unwrap()[2].lhs;
            assert!(r >= last);
            last = r;
        }
        assert!(1.0 - last < 1e-3);
    }

    #[test]
    fn decomposition_into_parts() {
        let h = poly(2, 3, &[(&[3, 0], 1.0), (&[1, 2], -2.0), (&[0, 3], 0.5)]);
        let g = quartic();
        // the parts are only piecewise smooth on the sphere
        let c = QuadratureConfig::gauss(2048);
        let whole = integrate_h_on_sublevel(&h, &g, 1.5, &c).unwrap().value;
        let plus = integrate_h_on_sublevel(&h.positive_part(), &g, 1.5, &c).unwrap().value;
        let minus = integrate_h_on_sublevel(&h.negative_part(), &g, 1.5, &c).unwrap().value;
        assert!((whole - (plus - minus)).abs() < 1e-6 * (plus + minus));
    }

    #[test]
    fn scaling_law_is_exact() {
        let basis = MonomialBasis::pure(2, 4);
        let g = Phf::polynomial(HomoPoly::from_coeffs(&basis, &[1.0, 0.2, 0.9, -0.1, 1.3]).unwrap());
        let base = volume_sublevel(&g, 1.0, &cfg()).unwrap().value;
        for y in [0.25, 3.0, 10.0] {
            assert_relative_eq!(volume_sublevel(&g, y, &cfg()).unwrap().value, y.sqrt() * base, max_relative = 1e-10);
        }
    }
}
