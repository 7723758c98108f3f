use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::gauss::gauss_legendre_on;
use super::gauss::gauss_legendre;
use crate::special::sphere_area;

/// Fixed chunk size for Monte Carlo streams; results do not depend on the
/// worker count.
pub(crate) const MC_CHUNK: usize = 4096;

/// A weighted point set on the unit sphere S^{n-1}.
#[derive(Clone, Debug)]
pub struct SphereRule {
    n: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    random: bool,
}

impl SphereRule {
    /// Tensor-product rule in hyperspherical angles.
    ///
    /// `nodes` azimuthal trapezoid points and `nodes / 2` points per polar
    /// angle. The polar angle carrying sin¹ uses Gauss–Legendre in cos θ,
    /// sin² uses Gauss–Chebyshev (second kind), higher powers Gauss–Legendre
    /// directly in θ.
    pub fn product_gauss(n: usize, nodes: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return SphereRule { n, points: vec![1.0, -1.0], weights: vec![1.0, 1.0], random: false };
        }
        let azimuth: Vec<f64> = (0..nodes).map(|j| TAU * j as f64 / nodes as f64).collect();
        let w_az = TAU / nodes as f64;
        let polar_nodes = (nodes / 2).max(2);

        // Polar angles θ_1..θ_{n-2}; θ_i carries sin^{n-1-i}.
        let mut polar: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for i in 1..=n.saturating_sub(2) {
            let m = (n - 1 - i) as i32;
            if m == 1 {
                let (t, w) = gauss_legendre(polar_nodes);
                polar.push((t.iter().map(|c| c.acos()).collect(), w));
            } else if m == 2 {
                // Gauss–Chebyshev of the second kind in cos θ: exact for
                // polynomial integrands on the sphere.
                let step = PI / (polar_nodes + 1) as f64;
                let th: Vec<f64> = (1..=polar_nodes).map(|j| j as f64 * step).collect();
                let w = th.iter().map(|t| step * t.sin().powi(2)).collect();
                polar.push((th, w));
            } else {
                let (th, w) = gauss_legendre_on(polar_nodes, 0.0, PI);
                let w = th.iter().zip(&w).map(|(t, v)| v * t.sin().powi(m)).collect();
                polar.push((th, w));
            }
        }

        let total: usize = polar.iter().map(|p| p.0.len()).product::<usize>() * azimuth.len();
        let mut points = Vec::with_capacity(total * n);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; polar.len()];
        loop {
            let mut w_polar = 1.0;
            for (k, &j) in idx.iter().enumerate() {
                w_polar *= polar[k].1[j];
            }
            for &phi in &azimuth {
                let mut s = 1.0;
                for (k, &j) in idx.iter().enumerate() {
                    let th = polar[k].0[j];
                    points.push(s * th.cos());
                    s *= th.sin();
                }
                points.push(s * phi.cos());
                points.push(s * phi.sin());
                weights.push(w_polar * w_az);
            }
            let mut pos = polar.len();
            loop {
                if pos == 0 {
                    return SphereRule { n, points, weights, random: false };
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < polar[pos].0.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// Uniform random directions from normalized Gaussian vectors, each
    /// weighted |S^{n-1}| / samples.
    pub fn monte_carlo(n: usize, samples: usize, seed: u64) -> Self {
        let chunks = samples.div_ceil(MC_CHUNK);
        let per_chunk: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let count = MC_CHUNK.min(samples - c * MC_CHUNK);
                let mut out = Vec::with_capacity(count * n);
                let mut v = vec![0.0; n];
                let mut done = 0;
                while done < count {
                    for vi in v.iter_mut() {
                        *vi = rng.sample(StandardNormal);
                    }
                    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if r < 1e-300 {
                        continue;
                    }
                    out.extend(v.iter().map(|a| a / r));
                    done += 1;
                }
                out
            })
            .collect();
        let points: Vec<f64> = per_chunk.into_iter().flatten().collect();
        let w = sphere_area(n) / samples as f64;
        SphereRule { n, points, weights: vec![w; samples], random: true }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_random(&self) -> bool {
        self.random
    }

    /// Applies `f` at every node in parallel, preserving node order.
    pub fn map<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.points.par_chunks(self.n).map(&f).collect()
    }

    /// Σ w_i f_i in node order, with a standard error for random rules.
    pub fn reduce(&self, values: &[f64]) -> (f64, f64) {
        let value: f64 = self.weights.iter().zip(values).map(|(w, v)| w * v).sum();
        if !self.random {
            return (value, 0.0);
        }
        let m = values.len() as f64;
        let area = self.weights[0] * m;
        let mean = value / area;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
        (value, area * (var / m).sqrt())
    }
}
