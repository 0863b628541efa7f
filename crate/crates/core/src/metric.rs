//! Finite metric spaces, greedy and exact covering numbers, Minkowski
//! dimension fitting and doubling-number estimation.

use std::sync::OnceLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::pam::parabolic_metric;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Chebyshev,
    /// Explicit symmetric distance matrix.
    Table,
    /// Space-time points `(t, x)` with the parabolic log-corrected metric.
    Parabolic,
}

/// Finite metric space. Point ids are `0..len()`. Distances, the diameter
/// and the minimum pairwise distance are fixed at construction.
#[derive(Clone, Debug)]
pub struct MetricSpace {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    table: Vec<f64>,
    metric: Metric,
    scale: f64,
    diameter: f64,
    min_distance: f64,
    traversal: OnceLock<Traversal>,
}

/// Farthest-point ordering. `radius[i]` is the distance from `order[i]` to
/// `order[..i]` when it was selected; it is non-increasing in `i`.
#[derive(Clone, Debug)]
struct Traversal {
    order: Vec<usize>,
    radius: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    Greedy,
    Exact,
}

pub const EXACT_COVER_LIMIT: usize = 24;

impl MetricSpace {
    /// Coordinate space; `coords` is row-major with `dim` columns.
    pub fn from_coords(coords: Vec<f64>, dim: usize, metric: Metric) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Shape { expected: dim.max(1), got: coords.len() });
        }
        if metric == Metric::Table {
            return Err(param("table metric needs a distance matrix"));
        }
        if metric == Metric::Parabolic && dim != 2 {
            return Err(param("parabolic metric needs (t, x) coordinates"));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(param(format!("non-finite coordinate in point {}", i / dim)));
        }
        Self::finish(coords.len() / dim, dim, coords, Vec::new(), metric)
    }

    /// Convenience for points given as rows.
    pub fn from_points(points: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Shape { expected: dim, got: bad.len() });
        }
        Self::from_coords(points.concat(), dim, metric)
    }

    /// Explicit metric from an `n x n` row-major matrix. Symmetry and the
    /// zero diagonal are checked exactly; the triangle inequality on all
    /// triples when `n^3 <= 1e5`, else on `1e5` random triples.
    pub fn from_table(table: Vec<f64>, n: usize) -> Result<Self> {
        if table.len() != n * n {
            return Err(Error::Shape { expected: n * n, got: table.len() });
        }
        for i in 0..n {
            if table[i * n + i] != 0.0 {
                return Err(param(format!("nonzero self-distance at point {i}")));
            }
            for j in 0..i {
                let (a, b) = (table[i * n + j], table[j * n + i]);
                if a != b || !a.is_finite() || a < 0.0 {
                    return Err(param(format!("distance ({i},{j}) is asymmetric or invalid")));
                }
            }
        }
        let d = |i: usize, j: usize| table[i * n + j];
        let violates = |i, j, k| d(i, k) > (d(i, j) + d(j, k)) * (1.0 + 4.0 * f64::EPSILON);
        if n.pow(3) <= 100_000 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if violates(i, j, k) {
                            return Err(param(format!("triangle inequality fails on ({i},{j},{k})")));
                        }
                    }
                }
            }
        } else {
            let mut g = rng::substream(rng::derive_seed(n as u64, "triangle"), 0);
            for _ in 0..100_000 {
                let (i, j, k) = (g.gen_range(0..n), g.gen_range(0..n), g.gen_range(0..n));
                if violates(i, j, k) {
                    return Err(param(format!("triangle inequality fails on ({i},{j},{k})")));
                }
            }
        }
        Self::finish(n, 0, Vec::new(), table, Metric::Table)
    }

    fn finish(n: usize, dim: usize, coords: Vec<f64>, table: Vec<f64>, metric: Metric) -> Result<Self> {
        if n < 2 {
            return Err(Error::Nontrivial);
        }
        let mut space = Self {
            n,
            dim,
            coords,
            table,
            metric,
            scale: 1.0,
            diameter: 0.0,
            min_distance: f64::INFINITY,
            traversal: OnceLock::new(),
        };
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for i in 0..n {
            for j in 0..i {
                let d = space.distance(i, j);
                hi = hi.max(d);
                lo = lo.min(d);
                if d <= 0.0 {
                    return Err(param(format!("points {j} and {i} coincide")));
                }
            }
        }
        space.diameter = hi;
        space.min_distance = lo;
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Coordinate dimension; 0 for explicit tables.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        (self.dim > 0).then(|| &self.coords[i * self.dim..(i + 1) * self.dim])
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.scale * self.raw(i, j)
    }

    #[inline]
    fn raw(&self, i: usize, j: usize) -> f64 {
        let dim = self.dim;
        match self.metric {
            Metric::Euclidean => {
                let (a, b) = (&self.coords[i * dim..(i + 1) * dim], &self.coords[j * dim..(j + 1) * dim]);
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            Metric::Chebyshev => {
                let (a, b) = (&self.coords[i * dim..(i + 1) * dim], &self.coords[j * dim..(j + 1) * dim]);
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            Metric::Table => self.table[i * self.n + j],
            Metric::Parabolic => {
                let (a, b) = (&self.coords[2 * i..2 * i + 2], &self.coords[2 * j..2 * j + 2]);
                parabolic_metric((a[0], a[1]), (b[0], b[1]))
            }
        }
    }

    /// Exact maximum pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Double-sweep farthest-point estimate; a lower bound on the diameter,
    /// exact on the line. O(n).
    pub fn diameter_estimate(&self) -> f64 {
        let far = |from: usize| {
            (0..self.n).fold((from, 0.0), |(b, bd), j| {
                let d = self.distance(from, j);
                if d > bd { (j, d) } else { (b, bd) }
            })
        };
        let (a, _) = far(0);
        far(a).1
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Multiplies all distances by `lambda`.
    pub fn rescale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(param(format!("rescale factor must be positive, got {lambda}")));
        }
        let mut s = self.clone();
        s.scale *= lambda;
        s.diameter *= lambda;
        s.min_distance *= lambda;
        Ok(s)
    }

    /// Subspace on `ids`, renumbered `0..ids.len()` in the given order.
    pub fn restrict(&self, ids: &[usize]) -> Result<Self> {
        if ids.len() < 2 {
            return Err(Error::Nontrivial);
        }
        let mut seen = vec![false; self.n];
        for &i in ids {
            if i >= self.n || std::mem::replace(&mut seen[i], true) {
                return Err(param(format!("invalid or repeated point id {i}")));
            }
        }
        let mut sub = if self.metric == Metric::Table {
            let m = ids.len();
            let mut t = vec![0.0; m * m];
            for (a, &i) in ids.iter().enumerate() {
                for (b, &j) in ids.iter().enumerate() {
                    t[a * m + b] = self.table[i * self.n + j];
                }
            }
            Self::finish(m, 0, Vec::new(), t, Metric::Table)?
        } else {
            let coords = ids.iter().flat_map(|&i| self.coords(i).unwrap().iter().copied()).collect();
            Self::finish(ids.len(), self.dim, coords, Vec::new(), self.metric)?
        };
        if self.scale != 1.0 {
            sub = sub.rescale(self.scale)?;
        }
        Ok(sub)
    }

    fn traversal(&self) -> &Traversal {
        self.traversal.get_or_init(|| {
            let all: Vec<usize> = (0..self.n).collect();
            let (order, radius) = self.farthest_point(&all, 0.0);
            Traversal { order, radius }
        })
    }

    /// Farthest-point traversal of `ids` (ascending), starting at `ids[0]`,
    /// stopping once every point lies strictly within `stop` of a center.
    /// Ties go to the lowest id.
    fn farthest_point(&self, ids: &[usize], stop: f64) -> (Vec<usize>, Vec<f64>) {
        let mut order = vec![ids[0]];
        let mut radius = vec![f64::INFINITY];
        let mut near: Vec<f64> = ids.iter().map(|&j| self.distance(ids[0], j)).collect();
        loop {
            let (mut best, mut bd) = (usize::MAX, -1.0);
            for (a, &d) in near.iter().enumerate() {
                if d > bd {
                    bd = d;
                    best = a;
                }
            }
            if bd <= 0.0 || bd < stop {
                break;
            }
            let c = ids[best];
            order.push(c);
            radius.push(bd);
            for (a, &j) in ids.iter().enumerate() {
                let d = self.distance(c, j);
                if d < near[a] {
                    near[a] = d;
                }
            }
        }
        (order, radius)
    }

    /// Centers of the greedy (farthest-point) cover by open balls of radius
    /// `eta`, in selection order.
    pub fn greedy_cover(&self, eta: f64) -> &[usize] {
        let t = self.traversal();
        // radius is non-increasing: centers are the prefix with radius >= eta.
        let k = t.radius.partition_point(|&r| r >= eta);
        &t.order[..k]
    }

    /// Greedy cover of a subset `ids` by open `eta`-balls centered in it,
    /// starting from `ids[0]`.
    pub fn greedy_cover_of(&self, ids: &[usize], eta: f64) -> Vec<usize> {
        if ids.is_empty() {
            return Vec::new();
        }
        self.farthest_point(ids, eta).0
    }

    pub fn covering_number(&self, eta: f64, mode: CoverMode) -> Result<usize> {
        if !(eta > 0.0) {
            return Err(param(format!("covering radius must be positive, got {eta}")));
        }
        match mode {
            CoverMode::Greedy => Ok(self.greedy_cover(eta).len()),
            CoverMode::Exact => self.exact_covering_number(eta),
        }
    }

    fn exact_covering_number(&self, eta: f64) -> Result<usize> {
        let n = self.n;
        if n > EXACT_COVER_LIMIT {
            return Err(Error::Size { what: "exact cover input", got: n, limit: EXACT_COVER_LIMIT });
        }
        let balls: Vec<u32> = (0..n)
            .map(|i| (0..n).filter(|&j| self.distance(i, j) < eta).fold(0, |m, j| m | 1 << j))
            .collect();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        fn search(balls: &[u32], full: u32, covered: u32, left: usize) -> bool {
            if covered == full {
                return true;
            }
            if left == 0 {
                return false;
            }
            let u = (!covered).trailing_zeros();
            balls
                .iter()
                .filter(|b| *b & (1 << u) != 0)
                .any(|b| search(balls, full, covered | b, left - 1))
        }
        Ok((1..=n).find(|&k| search(&balls, full, 0, k)).unwrap_or(n))
    }

    /// Greedy cover sizes at `eta = Delta 2^-k` for `k = 1..=levels`, the
    /// upper-envelope dimension, the smallest certifying constant `c`, and a
    /// sampled doubling number.
    ///
    /// `c` is certified at `Delta 2^-k` and `Delta 2^-k / 3` for every `k`
    /// down to the scale where the greedy cover contains every point, so the
    /// net construction never meets a level outside the certified range.
    pub fn fit_dimension(&self, levels: usize) -> Result<DimensionFit> {
        if levels < 4 {
            return Err(param(format!("dimension fit needs at least 4 levels, got {levels}")));
        }
        let delta = self.diameter;
        let counts: Vec<(f64, usize)> = (1..=levels)
            .map(|k| {
                let eta = delta * (-(k as f64)).exp2();
                (eta, self.greedy_cover(eta).len())
            })
            .collect();
        if counts.iter().all(|&(_, c)| c == 1) {
            return Err(Error::Fit("one ball covers the space at every level".into()));
        }
        let slopes: Vec<f64> = counts.windows(2).map(|w| (w[1].1 as f64 / w[0].1 as f64).log2()).collect();
        let max_slope = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Counts flat at every level (e.g. two points): any d fits, take 1.
        let d = if max_slope > 0.0 { max_slope } else { 1.0 };

        let mut c = 1.0f64;
        let mut k = 0usize;
        loop {
            let mut saturated = true;
            for eta in [delta * (-(k as f64)).exp2(), delta * (-(k as f64)).exp2() / 3.0] {
                let count = self.greedy_cover(eta).len();
                c = c.max(count as f64 / (delta / eta).powf(d));
                saturated &= count == self.n;
            }
            if k >= levels && saturated {
                break;
            }
            k += 1;
        }

        let n2_sampled = self.sample_doubling_number();
        Ok(DimensionFit { info: DimensionInfo { d, c, n2: n2_sampled }, counts, slopes, n2_sampled })
    }

    /// Max over sampled centers and radii `Delta/2, Delta/8, Delta/32` of the
    /// greedy half-radius cover size of the ball. Centers: every point up to
    /// 512 points, an even stride beyond.
    pub fn sample_doubling_number(&self) -> u64 {
        let stride = self.n.div_ceil(512);
        let mut best = 1usize;
        for x in (0..self.n).step_by(stride) {
            for r in [self.diameter / 2.0, self.diameter / 8.0, self.diameter / 32.0] {
                let mut ball: Vec<usize> = (0..self.n).filter(|&y| self.distance(x, y) < r).collect();
                // Start the traversal at the ball's center.
                let pos = ball.iter().position(|&y| y == x).unwrap();
                ball.swap(0, pos);
                best = best.max(self.farthest_point(&ball, r / 2.0).0.len());
            }
        }
        best as u64
    }
}

/// Minkowski dimension `d`, covering constant `c` and doubling number `n2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionInfo {
    pub d: f64,
    pub c: f64,
    pub n2: u64,
}

impl DimensionInfo {
    pub fn new(d: f64, c: f64, n2: u64) -> Result<Self> {
        let info = Self { d, c, n2 };
        info.validate()?;
        Ok(info)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite() && self.c >= 1.0 && self.c.is_finite() && self.n2 >= 1) {
            return Err(param(format!("invalid dimension info {self:?}")));
        }
        Ok(())
    }

    /// Closed-form constants for bounded subsets of `R^d`:
    /// `c = (4d)^d`, `n2 = (81 d^2)^d`.
    pub fn euclidean(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(param("ambient dimension must be positive"));
        }
        let n2 = (81u64 * (d * d) as u64)
            .checked_pow(d as u32)
            .ok_or_else(|| param("doubling number overflows u64"))?;
        Self::new(d as f64, ((4 * d) as f64).powi(d as i32), n2)
    }

    /// Rescaling leaves the constants unchanged.
    pub fn rescaled(self) -> Self {
        self
    }

    /// Constants inherited by a subset `A` of `M`:
    /// `c (2 Delta(M)/Delta(A))^d` and `n2^2`.
    pub fn restricted(self, diam_m: f64, diam_a: f64) -> Self {
        Self {
            d: self.d,
            c: self.c * (2.0 * diam_m / diam_a).powf(self.d),
            n2: self.n2.saturating_mul(self.n2),
        }
    }

    /// `n2^4` as a real.
    pub fn n2_pow4(&self) -> f64 {
        (self.n2 as f64).powi(4)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionFit {
    /// `c` is greedy-certified; `n2` is the sampled (lower) estimate.
    pub info: DimensionInfo,
    pub counts: Vec<(f64, usize)>,
    pub slopes: Vec<f64>,
    pub n2_sampled: u64,
}
