//! Fixture spaces and random test fields.
//!
//! Fields are defined through distances to random anchor points, so they
//! apply to every metric, including distance tables.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{param, Result};
use crate::holder::SampledField;
use crate::metric::{Metric, MetricSpace};
use crate::rng::{derive_seed, substream};

/// Two points at distance 1.
pub fn two_point() -> Result<MetricSpace> {
    MetricSpace::from_coords(vec![0.0, 1.0], 1, Metric::Euclidean)
}

/// `2^levels + 1` equispaced points of `[0, 1]`.
pub fn dyadic_grid(levels: u32) -> Result<MetricSpace> {
    let n = 1usize << levels;
    MetricSpace::from_coords((0..=n).map(|i| i as f64 / n as f64).collect(), 1, Metric::Euclidean)
}

/// `n` uniform points of `[0, 1]^dim`.
pub fn uniform_cloud(n: usize, dim: usize, seed: u64) -> Result<MetricSpace> {
    let mut g = substream(seed, 0);
    MetricSpace::from_coords((0..n * dim).map(|_| g.gen::<f64>()).collect(), dim, Metric::Euclidean)
}

/// `n` chaos-game points on the Sierpiński triangle with vertices
/// `(0,0), (1,0), (1/2, sqrt(3)/2)`; the first 20 iterates are discarded.
pub fn sierpinski(n: usize, seed: u64) -> Result<MetricSpace> {
    let v = [(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)];
    let mut g = substream(seed, 0);
    let (mut x, mut y) = (g.gen::<f64>(), g.gen::<f64>() * 0.5);
    let mut coords = Vec::with_capacity(2 * n);
    for i in 0..n + 20 {
        let (a, b) = v[g.gen_range(0..3)];
        x = 0.5 * (x + a);
        y = 0.5 * (y + b);
        if i >= 20 {
            coords.extend([x, y]);
        }
    }
    MetricSpace::from_coords(coords, 2, Metric::Euclidean)
}

/// The `m x m` lattice `{0, 1/(m-1), ..., 1}^2`.
pub fn lattice(m: usize) -> Result<MetricSpace> {
    if m < 2 {
        return Err(param("lattice needs m >= 2"));
    }
    let h = 1.0 / (m - 1) as f64;
    let coords = (0..m * m).flat_map(|i| [(i / m) as f64 * h, (i % m) as f64 * h]).collect();
    MetricSpace::from_coords(coords, 2, Metric::Euclidean)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// `Σ a_j sin(d(x, z_j)/Δ · b_j)`: Lipschitz.
    Lipschitz,
    /// `Σ a_j sqrt(d(x, z_j)/Δ)`: Hölder-1/2 at the anchors.
    SqrtType,
    /// Brownian path evaluated at `d(x, z)/Δ`.
    Brownian,
}

impl FieldKind {
    pub const ALL: [FieldKind; 3] = [FieldKind::Lipschitz, FieldKind::SqrtType, FieldKind::Brownian];
}

/// Reproducible random scalar field on `space`.
pub fn random_field(space: &MetricSpace, kind: FieldKind, seed: u64) -> Result<SampledField> {
    let n = space.len();
    let inv = 1.0 / space.diameter();
    let mut g = substream(derive_seed(seed, "field"), kind as u64);
    let values = match kind {
        FieldKind::Lipschitz | FieldKind::SqrtType => {
            let mut v = vec![0.0; n];
            for _ in 0..3 {
                let z = g.gen_range(0..n);
                let a: f64 = g.sample(StandardNormal);
                let b = 1.0 + 4.0 * g.gen::<f64>();
                for (i, vi) in v.iter_mut().enumerate() {
                    let r = space.distance(i, z) * inv;
                    *vi += a * if kind == FieldKind::Lipschitz { (b * r).sin() } else { r.sqrt() };
                }
            }
            v
        }
        FieldKind::Brownian => {
            let z = g.gen_range(0..n);
            let mut order: Vec<(f64, usize)> = (0..n).map(|i| (space.distance(i, z) * inv, i)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut v = vec![0.0; n];
            let (mut t, mut b) = (0.0f64, 0.0f64);
            for (r, i) in order {
                b += (r - t).sqrt() * g.sample::<f64, _>(StandardNormal);
                t = r;
                v[i] = b;
            }
            v
        }
    };
    SampledField::scalar(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        assert_eq!(two_point().unwrap().diameter(), 1.0);
        let g = dyadic_grid(10).unwrap();
        assert_eq!((g.len(), g.diameter(), g.min_distance()), (1025, 1.0, 1.0 / 1024.0));
        assert_eq!(uniform_cloud(500, 2, 1).unwrap().len(), 500);
        let s = sierpinski(200, 1).unwrap();
        assert!(s.diameter() <= 1.0 + 1e-12);
        assert_eq!(lattice(4).unwrap().len(), 16);
    }

    #[test]
    fn fields_are_reproducible_and_distinct() {
        let s = uniform_cloud(50, 2, 3).unwrap();
        for k in FieldKind::ALL {
            let a = random_field(&s, k, 7).unwrap();
            assert_eq!(a, random_field(&s, k, 7).unwrap());
            assert_ne!(a, random_field(&s, k, 8).unwrap());
            assert_eq!(a.len(), 50);
        }
    }
}
