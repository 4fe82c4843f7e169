//! Seeded sample clouds.
//!
//! Every randomized check in the crate draws its points from here so that a
//! fixed seed reproduces the exact same cloud regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::space::Vector;

/// Deterministic RNG for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Parameters of a verification cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSpec {
    /// Number of uniform samples in the box `center + [−radius, radius]ⁿ`.
    pub count: usize,
    pub radius: f64,
    /// Points per axis of the regular lattice; the lattice is skipped when
    /// it would exceed `lattice_cap` points.
    pub lattice_per_axis: usize,
    pub lattice_cap: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            radius: 2.0,
            lattice_per_axis: 9,
            lattice_cap: 10_000,
            seed: 0,
        }
    }
}

impl SampleSpec {
    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Lattice points first (ordered outward from the center), then uniform
    /// box samples.
    pub fn cloud(&self, center: &Vector) -> Vec<Vector> {
        let mut pts = lattice(center, self.radius, self.lattice_per_axis, self.lattice_cap);
        let mut r = rng(self.seed, 0);
        pts.extend((0..self.count).map(|_| uniform_box(&mut r, center, self.radius)));
        pts
    }
}

/// Axis offsets `0, +h, −h, +2h, −2h, …` covering `[−radius, radius]`.
fn outward_offsets(radius: f64, per_axis: usize) -> Vec<f64> {
    if per_axis <= 1 {
        return vec![0.0];
    }
    let half = (per_axis - 1) / 2;
    if half == 0 {
        return vec![0.0];
    }
    let h = radius / half as f64;
    let mut out = vec![0.0];
    for k in 1..=half {
        out.push(k as f64 * h);
        out.push(-(k as f64) * h);
    }
    out
}

/// Regular lattice around `center`, sorted by increasing ℓ∞ distance with a
/// stable outward order inside each shell.
pub fn lattice(center: &Vector, radius: f64, per_axis: usize, cap: usize) -> Vec<Vector> {
    let n = center.len();
    let offs = outward_offsets(radius, per_axis);
    let total = offs.len().checked_pow(n as u32).unwrap_or(usize::MAX);
    if n == 0 || total > cap {
        return Vec::new();
    }
    let mut pts = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    loop {
        pts.push(Vector::from_iterator(n, (0..n).map(|i| center[i] + offs[idx[i]])));
        // odometer in the outward order, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                // stable sort by max offset index keeps the outward order
                let shell = |p: &Vector| {
                    (0..n)
                        .map(|i| ((p[i] - center[i]).abs() * 1e9).round() as i64)
                        .max()
                        .unwrap_or(0)
                };
                pts.sort_by_key(shell);
                return pts;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < offs.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub fn uniform_box<R: Rng>(r: &mut R, center: &Vector, radius: f64) -> Vector {
    Vector::from_iterator(
        center.len(),
        center.iter().map(|c| c + radius * (2.0 * r.random::<f64>() - 1.0)),
    )
}

/// Uniform direction on the Euclidean unit sphere.
pub fn unit_direction<R: Rng>(r: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_iterator(n, (0..n).map(|_| r.sample::<f64, _>(StandardNormal)));
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}

/// Uniform point of the Euclidean ball of radius `radius`.
pub fn uniform_ball<R: Rng>(r: &mut R, center: &Vector, radius: f64) -> Vector {
    let n = center.len();
    let d = unit_direction(r, n);
    let rho = radius * r.random::<f64>().powf(1.0 / n.max(1) as f64);
    center + d * rho
}

/// Random probability weights (flat Dirichlet).
pub fn simplex_weights<R: Rng>(r: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_outward_and_contains_half() {
        let pts = lattice(&Vector::zeros(1), 2.0, 9, 100);
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(xs[..5], [0.0, 0.5, -0.5, 1.0, -1.0]);
        assert_eq!(xs.len(), 9);
    }

    #[test]
    fn lattice_respects_cap() {
        assert!(lattice(&Vector::zeros(5), 1.0, 9, 1000).is_empty());
        assert_eq!(lattice(&Vector::zeros(3), 1.0, 3, 1000).len(), 27);
    }

    #[test]
    fn clouds_are_reproducible() {
        let spec = SampleSpec::default().with_count(50).with_seed(7);
        let a = spec.cloud(&Vector::zeros(3));
        let b = spec.cloud(&Vector::zeros(3));
        assert_eq!(a, b);
        let c = spec.clone().with_seed(8).cloud(&Vector::zeros(3));
        assert_ne!(a, c);
    }
}
