//! Numeric Legendre–Fenchel conjugates of convex positively homogeneous
//! functions and volumes of polar sets.
//!
//! For g of degree d > 1, `g*(u) = sup_x ⟨u,x⟩ − g(x)` is homogeneous of
//! degree q with 1/d + 1/q = 1. Writing x = rθ, the sup over r > 0 is
//! explicit, so g* on a direction is a maximization over the sphere only.
//! With G = {g <= 1/d} the polar set is G° = {g* <= 1/q} and
//! `vol(G°) = ∫ exp(-g*) / (q^{n/q} Γ(1 + n/q))`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{nongauss_integral, QuadratureConfig};
use crate::phf::{sphere_directions, Phf};
use crate::special::gamma;

/// sup_{r>0} r·a − r^d·b for d > 1.
pub fn radial_sup(a: f64, b: f64, d: f64) -> f64 {
    if a <= 0.0 || b.is_infinite() {
        return 0.0;
    }
    if b <= 0.0 {
        return f64::INFINITY;
    }
    let q = d / (d - 1.0);
    (a / q) * (a / (d * b)).powf(1.0 / (d - 1.0))
}

/// Default number of sphere directions for the sup over θ.
pub fn default_grid_size(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 720,
        3 => 64 * 64,
        _ => 20_000,
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Latitude-longitude grid of `side²` directions on S².
fn lat_long(side: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        let phi = std::f64::consts::PI * (i as f64 + 0.5) / side as f64;
        for j in 0..side {
            let psi = std::f64::consts::TAU * j as f64 / side as f64;
            out.push(vec![phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()]);
        }
    }
    out
}

fn direction_grid(n: usize, size: usize) -> Vec<Vec<f64>> {
    match n {
        3 => lat_long((size as f64).sqrt().round().max(2.0) as usize),
        _ => sphere_directions(n, size),
    }
}

/// Orthonormal basis of the tangent space at θ.
fn tangent_frame(theta: &[f64]) -> Vec<Vec<f64>> {
    let n = theta.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        let p = dot(&v, theta);
        for (a, t) in v.iter_mut().zip(theta) {
            *a -= p * t;
        }
        for f in &frame {
            let p = dot(&v, f);
            for (a, b) in v.iter_mut().zip(f) {
                *a -= p * b;
            }
        }
        let r = norm(&v);
        if r > 1e-6 {
            frame.push(v.into_iter().map(|a| a / r).collect());
        }
        if frame.len() == n - 1 {
            break;
        }
    }
    frame
}

/// Maximizes f over directions near θ₀ by coordinate golden-section sweeps
/// in the tangent plane, within ±width.
fn refine_on_sphere<F: Fn(&[f64]) -> f64>(f: F, theta0: &[f64], width: f64) -> (Vec<f64>, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let frame = tangent_frame(theta0);
    let point = |coords: &[f64]| -> Vec<f64> {
        let mut v = theta0.to_vec();
        for (c, e) in coords.iter().zip(&frame) {
            for (a, b) in v.iter_mut().zip(e) {
                *a += c * b;
            }
        }
        let r = norm(&v);
        v.into_iter().map(|a| a / r).collect()
    };
    let mut coords = vec![0.0; frame.len()];
    let sweeps = if frame.len() == 1 { 1 } else { 3 };
    for _ in 0..sweeps {
        for k in 0..frame.len() {
            let eval = |t: f64, coords: &mut Vec<f64>| {
                let keep = coords[k];
                coords[k] = t;
                let v = f(&point(coords));
                coords[k] = keep;
                v
            };
            let (mut lo, mut hi) = (coords[k] - width, coords[k] + width);
            let mut c = hi - INV_PHI * (hi - lo);
            let mut d = lo + INV_PHI * (hi - lo);
            let mut fc = eval(c, &mut coords);
            let mut fd = eval(d, &mut coords);
            for _ in 0..60 {
                if fc >= fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - INV_PHI * (hi - lo);
                    fc = eval(c, &mut coords);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + INV_PHI * (hi - lo);
                    fd = eval(d, &mut coords);
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            let t = 0.5 * (lo + hi);
            if eval(t, &mut coords) > f(&point(&coords)) {
                coords[k] = t;
            }
        }
    }
    let best = point(&coords);
    let v = f(&best);
    (best, v)
}

/// Max of f over a direction grid, then local refinement around the best
/// grid point.
fn sphere_max<F: Fn(&[f64]) -> f64>(f: F, grid: &[Vec<f64>], values: &[f64], width: f64) -> f64 {
    let (mut best, mut best_v) = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    if !best_v.is_finite() || grid[0].len() == 1 {
        return best_v;
    }
    let (_, refined) = refine_on_sphere(&f, &grid[best], width);
    best_v.max(refined)
}

/// g* tabulated on a direction grid, with on-demand evaluation anywhere.
#[derive(Debug)]
pub struct ConjugateTable {
    g: Phf,
    degree_q: f64,
    sphere_grid: Vec<Vec<f64>>,
    g_on_grid: Vec<f64>,
    values: Vec<f64>,
    width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugateSample {
    pub direction: Vec<f64>,
    pub value: f64,
}

impl ConjugateTable {
    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn degree_d(&self) -> f64 {
        self.g.degree()
    }

    /// q with 1/d + 1/q = 1.
    pub fn degree_q(&self) -> f64 {
        self.degree_q
    }

    pub fn sphere_grid(&self) -> &[Vec<f64>] {
        &self.sphere_grid
    }

    /// g*(θ) at each grid direction.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid directions where g* = +∞.
    pub fn infinite_directions(&self) -> usize {
        self.values.iter().filter(|v| v.is_infinite()).count()
    }

    fn on_direction(&self, u: &[f64]) -> f64 {
        let d = self.g.degree();
        let vals: Vec<f64> = self
            .sphere_grid
            .iter()
            .zip(&self.g_on_grid)
            .map(|(t, &b)| radial_sup(dot(u, t), b, d))
            .collect();
        sphere_max(|t| radial_sup(dot(u, t), self.g.value(t), d), &self.sphere_grid, &vals, self.width)
    }

    /// g*(u) for any u, extended from the unit sphere by q-homogeneity.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let r = norm(u);
        if r == 0.0 {
            return 0.0;
        }
        let dir: Vec<f64> = u.iter().map(|v| v / r).collect();
        r.powf(self.degree_q) * self.on_direction(&dir)
    }

    /// Evenly spaced entries of the table.
    pub fn sample(&self, count: usize) -> Vec<ConjugateSample> {
        let step = (self.values.len() / count.max(1)).max(1);
        (0..self.values.len())
            .step_by(step)
            .take(count)
            .map(|i| ConjugateSample { direction: self.sphere_grid[i].clone(), value: self.values[i] })
            .collect()
    }

    /// g* as a handle of degree q.
    pub fn to_phf(self: &Arc<Self>) -> Phf {
        let table = Arc::clone(self);
        Phf::custom_unchecked(self.n(), self.degree_q, Arc::new(move |x: &[f64]| table.eval(x)))
    }
}

/// Midpoint convexity on `samples` seeded random pairs; errors with the
/// number of violations.
pub fn check_convex(g: &Phf, samples: usize, seed: u64) -> Result<()> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let (gx, gy, gm) = (g.value(&x), g.value(&y), g.value(&m));
        if gx.is_infinite() || gy.is_infinite() {
            continue;
        }
        let avg = 0.5 * (gx + gy);
        if !(gm <= avg + 1e-9 * (1.0 + avg.abs())) {
            bad += 1;
        }
    }
    if bad > 0 {
        return Err(Error::NotConvex(bad));
    }
    Ok(())
}

/// Spot-checks convexity, then tabulates g* on `grid_size` directions
/// (defaults per dimension when None).
pub fn conjugate_phf(g: &Phf, grid_size: Option<usize>) -> Result<ConjugateTable> {
    let d = g.degree();
    if !(d > 1.0) {
        return Err(Error::InvalidInput(format!("conjugation needs degree d > 1, got {d}")));
    }
    check_convex(g, 1000, 0xc0_4e)?;
    let n = g.n();
    let size = grid_size.unwrap_or_else(|| default_grid_size(n));
    let sphere_grid = direction_grid(n, size);
    let g_on_grid: Vec<f64> = sphere_grid.iter().map(|t| g.value(t)).collect();
    let width = match n {
        1 => 0.0,
        2 => std::f64::consts::TAU / sphere_grid.len() as f64,
        3 => std::f64::consts::PI / (sphere_grid.len() as f64).sqrt(),
        _ => 4.0 * (sphere_grid.len() as f64).powf(-1.0 / (n as f64 - 1.0)),
    };
    let mut table = ConjugateTable {
        g: g.clone(),
        degree_q: d / (d - 1.0),
        sphere_grid,
        g_on_grid,
        values: Vec::new(),
        width,
    };
    table.values = table.sphere_grid.par_iter().map(|u| table.on_direction(u)).collect();
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarVolume {
    pub q: f64,
    /// ∫ exp(-g*).
    pub integral: f64,
    pub std_error: f64,
    pub volume: f64,
    /// Grid directions where g* is infinite; they add nothing to the integral.
    pub infinite_directions: usize,
}

/// vol(G°) for G = {g <= 1/d}.
pub fn polar_volume(g: &Phf, cfg: &QuadratureConfig) -> Result<PolarVolume> {
    polar_volume_with(&Arc::new(conjugate_phf(g, None)?), cfg)
}

pub fn polar_volume_with(table: &Arc<ConjugateTable>, cfg: &QuadratureConfig) -> Result<PolarVolume> {
    let n = table.n() as f64;
    let q = table.degree_q();
    let est = nongauss_integral(&Phf::constant(table.n(), 1.0), &table.to_phf(), cfg)?;
    let c = 1.0 / (q.powf(n / q) * gamma(1.0 + n / q));
    Ok(PolarVolume {
        q,
        integral: est.value,
        std_error: est.std_error * c,
        volume: est.value * c,
        infinite_directions: table.infinite_directions(),
    })
}

/// Support function h_G(u) = max_{x ∈ G} ⟨u, x⟩ of G = {g <= 1/d}, from
/// the boundary radius r(θ) = (1/(d g(θ)))^{1/d}.
pub fn support_function(g: &Phf, u: &[f64], grid_size: usize) -> f64 {
    let d = g.degree();
    let n = g.n();
    let grid = direction_grid(n, grid_size);
    let f = |t: &[f64]| (1.0 / (d * g.value(t))).powf(1.0 / d) * dot(u, t);
    let vals: Vec<f64> = grid.iter().map(|t| f(t)).collect();
    let width = if n == 2 { std::f64::consts::TAU / grid.len() as f64 } else { 4.0 / (grid.len() as f64).sqrt() };
    sphere_max(f, &grid, &vals, width)
}

/// Radius of G° along the unit direction u: 1/h_G(u).
pub fn polar_radius(g: &Phf, u: &[f64]) -> f64 {
    1.0 / support_function(g, u, 4 * default_grid_size(g.n()))
}

/// Monte Carlo volume of G° = {u : h_G(u) <= 1} by uniform sampling of a
/// bounding cube. Returns (volume, standard error).
pub fn polar_volume_mc(g: &Phf, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let n = g.n();
    let d = g.degree();
    if !(d > 0.0) {
        return Err(Error::InvalidInput("polar oracle needs a positive degree".into()));
    }
    // G contains the ball of radius min r(θ), so G° lies in the ball of radius 1/min r.
    let probe = direction_grid(n, 4 * default_grid_size(n));
    let inradius = probe.iter().map(|t| (1.0 / (d * g.value(t))).powf(1.0 / d)).fold(f64::INFINITY, f64::min);
    if !(inradius > 0.0 && inradius.is_finite()) {
        return Err(Error::NotCoercive { min: inradius, max: f64::NAN });
    }
    let half = 1.02 / inradius;
    let cube = (2.0 * half).powi(n as i32);
    // h_G on a fine angular table for n = 2, direct evaluation otherwise.
    let table: Option<Vec<f64>> = (n == 2).then(|| {
        (0..4096)
            .into_par_iter()
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / 4096.0;
                support_function(g, &[t.cos(), t.sin()], 2048)
            })
            .collect()
    });
    let h = |u: &[f64]| -> f64 {
        match &table {
            Some(tab) => {
                let r = norm(u);
                let t = u[1].atan2(u[0]).rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * 4096.0;
                let i = (t.floor() as usize) % 4096;
                let frac = t - t.floor();
                r * (tab[i] * (1.0 - frac) + tab[(i + 1) % 4096] * frac)
            }
            None => support_function(g, u, default_grid_size(n)),
        }
    };
    const CHUNK: usize = 1 << 14;
    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut u = vec![0.0; n];
            (0..count)
                .filter(|_| {
                    for v in u.iter_mut() {
                        *v = half * (2.0 * rng.random::<f64>() - 1.0);
                    }
                    h(&u) <= 1.0
                })
                .count()
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok((cube * p, cube * (p * (1.0 - p) / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phf::{Exponent, HomoPoly};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn quartic() -> Phf {
        Phf::polynomial(
            HomoPoly::new(2, 4, [(Exponent::new(vec![4, 0]), 1.0), (Exponent::new(vec![0, 4]), 1.0)]).unwrap(),
        )
    }

    #[test]
    fn radial_sup_matches_scan() {
        for &(a, b, d) in &[(1.0, 1.0, 2.0), (0.7, 2.5, 4.0), (2.0, 0.3, 1.5), (1.3, 1.0, 3.0)] {
            let scan = (1..400_000).map(|i| i as f64 * 1e-4).map(|r| r * a - r.powf(d) * b).fold(f64::MIN, f64::max);
            assert_relative_eq!(radial_sup(a, b, d), scan, max_relative = 1e-6);
        }
        assert_eq!(radial_sup(-1.0, 1.0, 2.0), 0.0);
        assert_eq!(radial_sup(1.0, 0.0, 2.0), f64::INFINITY);
    }

    #[test]
    fn quartic_conjugate_closed_form() {
        let t = conjugate_phf(&quartic(), None).unwrap();
        assert_relative_eq!(t.degree_q(), 4.0 / 3.0, epsilon = 1e-15);
        let expected = |u: &[f64]| 3.0 * (u[0].abs().powf(4.0 / 3.0) + u[1].abs().powf(4.0 / 3.0)) / 4f64.powf(4.0 / 3.0);
        assert_relative_eq!(t.eval(&[1.0, 0.0]), 0.472_470, epsilon = 1e-6);
        for k in 0..37 {
            let a = 0.17 * k as f64;
            let u = [1.3 * a.cos(), 1.3 * a.sin()];
            assert!((t.eval(&u) - expected(&u)).abs() <= 1e-4 * expected(&u).max(1e-3));
        }
    }

    #[test]
    fn half_square_norm_is_self_conjugate() {
        let g = Phf::polynomial(HomoPoly::norm_power(2, 1).scaled(0.5));
        let t = conjugate_phf(&g, None).unwrap();
        assert_relative_eq!(t.eval(&[0.0, 1.0]), 0.5, epsilon = 1e-10);
        let vol = polar_volume(&g, &QuadratureConfig::default_for(2)).unwrap();
        assert_relative_eq!(vol.volume, PI, max_relative = 1e-8);
    }

    #[test]
    fn cubic_on_half_line() {
        let g = Phf::custom(1, 3.0, |x: &[f64]| if x[0] > 0.0 { x[0].powi(3) } else if x[0] == 0.0 { 0.0 } else { f64::INFINITY })
            .unwrap();
        let t = conjugate_phf(&g, None).unwrap();
        assert_relative_eq!(t.eval(&[1.0]), 2.0 / (3.0 * 3f64.sqrt()), max_relative = 1e-12);
        assert_eq!(t.eval(&[-1.0]), 0.0);
    }

    #[test]
    fn homogeneity_and_young_inequality() {
        let g = quartic();
        let t = conjugate_phf(&g, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = [rng.sample::<f64, _>(StandardNormal), rng.sample(StandardNormal)];
            let x = [rng.sample::<f64, _>(StandardNormal), rng.sample(StandardNormal)];
            let gu = t.eval(&u);
            assert!(dot(&u, &x) <= g.value(&x) + gu + 1e-8);
            let l = 2.7;
            assert_relative_eq!(t.eval(&[l * u[0], l * u[1]]), l.powf(t.degree_q()) * gu, max_relative = 1e-6);
        }
    }

    #[test]
    fn rejects_nonconvex_and_low_degree() {
        let wavy = Phf::custom(2, 2.0, |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let t = x[1].atan2(x[0]);
            r2 * (1.0 + 0.9 * (4.0 * t).cos())
        })
        .unwrap();
        assert!(matches!(conjugate_phf(&wavy, None), Err(Error::NotConvex(_))));
        let abs = Phf::norm_power(2, 1.0, 1.0).unwrap();
        assert!(conjugate_phf(&abs, None).is_err());
    }

    #[test]
    fn polar_radius_along_axis() {
        // G = {x⁴ + y⁴ <= 1/4} reaches 4^{-1/4} on the axis, so G° reaches 4^{1/4}.
        assert_relative_eq!(polar_radius(&quartic(), &[1.0, 0.0]), 4f64.powf(0.25), max_relative = 1e-9);
    }

    #[test]
    fn quartic_polar_volume() {
        // G° = {|x|^{4/3} + |y|^{4/3} <= 4^{1/3}}: the unit p-ball area
        // 4Γ(1 + 1/p)²/Γ(1 + 2/p) with p = 4/3, times (4^{1/3})^{2/p} = 2.
        let exact = 2.0 * 4.0 * gamma(1.75).powi(2) / gamma(2.5);
        // g* is only C¹ across the axes, which limits the default rule.
        let vol = polar_volume(&quartic(), &QuadratureConfig::default_for(2)).unwrap();
        assert_relative_eq!(vol.volume, exact, max_relative = 1e-4);
        let fine = polar_volume(&quartic(), &QuadratureConfig::gauss(4096)).unwrap();
        assert_relative_eq!(fine.volume, exact, max_relative = 1e-7);
        let (mc, se) = polar_volume_mc(&quartic(), 200_000, 9).unwrap();
        assert!((mc - exact).abs() < 4.0 * se, "{mc} ± {se} vs {exact}");
    }

    #[test]
    fn mc_oracle_on_disk() {
        let g = Phf::polynomial(HomoPoly::norm_power(2, 1).scaled(0.5));
        let (v, se) = polar_volume_mc(&g, 200_000, 1).unwrap();
        assert!((v - PI).abs() < 4.0 * se, "{v} ± {se}");
    }
}
