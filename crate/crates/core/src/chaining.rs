//! Nested chaining nets `V_0 ⊆ V_1 ⊆ ... ⊆ V_N`, edge sets `E_n`, the
//! numbered pair sequence and chain decompositions.
//!
//! All radii are in units of the diameter: the net works with the
//! normalized distance `d(x,y)/Δ`, so level `n` has covering radius `2^-n`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::metric::{DimensionInfo, MetricSpace};

/// Relative slack on real-valued cardinality bounds (absorbs `powf` rounding).
const CARD_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ChainingNet {
    space: MetricSpace,
    inv_diam: f64,
    dims: DimensionInfo,
    levels: Vec<Vec<usize>>,
    /// First level containing each point.
    entry: Vec<Option<usize>>,
    edges: Vec<Vec<(usize, usize)>>,
    theta: Vec<u64>,
    dummy: usize,
    cover_sizes: Vec<usize>,
}

/// Chain from `x` and `y` to a common scale: `f(x) - f(y)` equals
/// `f(root.0) - f(root.1)` plus the hop differences of `hops_x` minus those
/// of `hops_y`, each hop being `(phi_j(z), phi_{j-1}(z))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub n0: usize,
    pub root: (usize, usize),
    pub hops_x: Vec<(usize, usize)>,
    pub hops_y: Vec<(usize, usize)>,
}

impl Chain {
    /// Signed point multiplicities of the telescoping sum. For a correct
    /// chain this is `+1` at `x`, `-1` at `y` and zero elsewhere.
    pub fn signed_terms(&self) -> Vec<(usize, i64)> {
        let mut terms = vec![(self.root.0, 1), (self.root.1, -1)];
        for &(a, b) in &self.hops_x {
            terms.extend([(a, 1), (b, -1)]);
        }
        for &(a, b) in &self.hops_y {
            terms.extend([(a, -1), (b, 1)]);
        }
        terms
    }

    pub fn telescope(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut s = f(self.root.0) - f(self.root.1);
        for &(a, b) in &self.hops_x {
            s += f(a) - f(b);
        }
        for &(a, b) in &self.hops_y {
            s -= f(a) - f(b);
        }
        s
    }
}

impl ChainingNet {
    /// Builds the net to depth `depth` (default: the first level whose
    /// radius falls below the minimum pairwise distance, where `V_N = M`).
    pub fn build(space: &MetricSpace, dims: DimensionInfo, depth: Option<usize>) -> Result<Self> {
        dims.validate()?;
        let delta = space.diameter();
        let inv_diam = 1.0 / delta;
        let n_pts = space.len();
        let depth = match depth {
            Some(0) => return Err(param("net depth must be at least 1")),
            Some(n) => n,
            None => default_depth(space.min_distance() * inv_diam),
        };
        let nd = |i: usize, j: usize| space.distance(i, j) * inv_diam;

        let mut levels = vec![vec![0usize]];
        let mut entry = vec![None; n_pts];
        entry[0] = Some(0);
        let mut to_net: Vec<f64> = (0..n_pts).map(|j| nd(0, j)).collect();
        let mut cover_sizes = vec![1usize];

        for n in 1..=depth {
            let r = (-(n as f64)).exp2();
            // Same expression as the dimension fit, so certified counts match.
            let f_n = space.greedy_cover(delta * (-(n as f64)).exp2() / 3.0);
            let bound = card_bound(&dims, n);
            if f_n.len() as f64 > bound * (1.0 + CARD_SLACK) {
                return Err(Error::DimsTooSmall { level: n, count: f_n.len(), bound });
            }
            cover_sizes.push(f_n.len());

            let mut g_n: Vec<usize> = f_n.iter().copied().filter(|&x| to_net[x] >= 2.0 / 3.0 * r).collect();
            g_n.sort_unstable();
            let mut h_n: Vec<usize> = Vec::new();
            for &g in &g_n {
                if h_n.iter().all(|&h| nd(g, h) >= 2.0 / 3.0 * r) {
                    h_n.push(g);
                }
            }
            // Residual coverage; by the 1/3 + 2/3 argument this never triggers.
            for x in 0..n_pts {
                let covered = to_net[x] <= r || h_n.iter().any(|&h| nd(x, h) <= r);
                if !covered {
                    if let Some(&g) = g_n.iter().min_by(|&&a, &&b| nd(x, a).total_cmp(&nd(x, b))) {
                        if !h_n.contains(&g) {
                            h_n.push(g);
                        }
                    }
                }
            }
            let mut v_n = levels[n - 1].clone();
            for &h in &h_n {
                if entry[h].is_none() {
                    entry[h] = Some(n);
                    v_n.push(h);
                }
                for (x, t) in to_net.iter_mut().enumerate() {
                    *t = t.min(nd(h, x));
                }
            }
            v_n.sort_unstable();
            levels.push(v_n);
        }

        let edges: Vec<Vec<(usize, usize)>> = levels
            .iter()
            .enumerate()
            .map(|(n, v)| canonical_edges(v, |a, b| nd(a, b), 3.0 * (-(n as f64)).exp2()))
            .collect();
        let theta = theta_offsets(&edges, dims.d)?;
        Ok(Self { space: space.clone(), inv_diam, dims, levels, entry, edges, theta, dummy: 0, cover_sizes })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn dims(&self) -> DimensionInfo {
        self.dims
    }

    /// `N`: levels are `0..=N`.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[usize] {
        &self.levels[n]
    }

    pub fn edges(&self, n: usize) -> &[(usize, usize)] {
        &self.edges[n]
    }

    /// `θ(0..=2N+2)`.
    pub fn theta(&self) -> &[u64] {
        &self.theta
    }

    pub fn dummy(&self) -> usize {
        self.dummy
    }

    /// Greedy cover sizes `card(F_n)` seen during construction (`F_0` = 1).
    pub fn cover_sizes(&self) -> &[usize] {
        &self.cover_sizes
    }

    /// Level at which `x` enters the net (`n_x`).
    pub fn entry_level(&self, x: usize) -> Option<usize> {
        self.entry.get(x).copied().flatten()
    }

    /// Normalized distance `d(x,y)/Δ`.
    #[inline]
    pub fn nd(&self, x: usize, y: usize) -> f64 {
        self.space.distance(x, y) * self.inv_diam
    }

    /// Non-dummy pairs `(k, x_k, y_k)`; `k` runs over `(θ(2n), θ(2n+1)]`.
    pub fn edge_pairs(&self) -> impl Iterator<Item = (u64, usize, usize)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(n, e)| {
            let base = self.theta[2 * n];
            e.iter().enumerate().map(move |(i, &(a, b))| (base + 1 + i as u64, a, b))
        })
    }

    /// The full pair sequence `k = 1..=θ(2N+2)`, dummy pairs `(x*, x*)`
    /// included. Lazy; the padding can be long.
    pub fn pair_sequence(&self) -> impl Iterator<Item = (u64, usize, usize)> + '_ {
        (0..self.edges.len()).flat_map(move |n| {
            let (lo, mid, hi) = (self.theta[2 * n], self.theta[2 * n + 1], self.theta[2 * n + 2]);
            let e = &self.edges[n];
            (lo + 1..=hi).map(move |k| {
                if k <= mid {
                    let (a, b) = e[(k - lo - 1) as usize];
                    (k, a, b)
                } else {
                    (k, self.dummy, self.dummy)
                }
            })
        })
    }

    /// Nearest point of `V_n` to `z`, ties to the lowest id.
    pub fn phi(&self, n: usize, z: usize) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for &v in &self.levels[n] {
            let d = self.nd(z, v);
            if d < best.0 {
                best = (d, v);
            }
        }
        best.1
    }

    pub fn chain_decompose(&self, x: usize, y: usize) -> Result<Chain> {
        let n_x = self.entry_level(x).ok_or(Error::NotNetPoint(x))?;
        let n_y = self.entry_level(y).ok_or(Error::NotNetPoint(y))?;
        let big_n = self.depth();
        let n0 = if x == y {
            big_n
        } else {
            // max{k : d < 2^-k}; a diametral pair (d = 1) gets 0.
            let d = self.nd(x, y);
            let mut k = 0;
            while k < big_n && d < (-((k + 1) as f64)).exp2() {
                k += 1;
            }
            k
        };
        let hops = |z: usize, nz: usize| -> Vec<(usize, usize)> {
            let mut prev = self.phi(n0, z);
            (n0 + 1..=nz.max(n0))
                .map(|j| {
                    let cur = self.phi(j, z);
                    let hop = (cur, prev);
                    prev = cur;
                    hop
                })
                .collect()
        };
        Ok(Chain { n0, root: (self.phi(n0, x), self.phi(n0, y)), hops_x: hops(x, n_x), hops_y: hops(y, n_y) })
    }

    /// Full-scan check of every structural invariant.
    pub fn verify(&self) -> InvariantReport {
        let mut items = Vec::new();
        let big_n = self.depth();
        let d = self.dims.d;
        let n2_4 = self.dims.n2_pow4();

        let mut fail = None;
        for n in 1..=big_n {
            if let Some(&x) = self.levels[n - 1].iter().find(|x| self.levels[n].binary_search(x).is_err()) {
                fail = Some(format!("point {x} in V_{} but not in V_{n}", n - 1));
                break;
            }
        }
        items.push(InvariantItem::new("nested", fail));

        let fail = (0..=big_n).find_map(|n| {
            let bound = card_bound(&self.dims, n);
            let card = self.levels[n].len();
            (card as f64 > bound * (1.0 + CARD_SLACK)).then(|| format!("card(V_{n}) = {card} > {bound}"))
        });
        items.push(InvariantItem::new("cardinality", fail));

        let fail = (0..=big_n).find_map(|n| {
            let r = (-(n as f64)).exp2();
            (0..self.space.len()).find_map(|x| {
                let dist = self.levels[n].iter().map(|&v| self.nd(x, v)).fold(f64::INFINITY, f64::min);
                (dist > r).then(|| format!("d(point {x}, V_{n}) = {dist} > 2^-{n}"))
            })
        });
        items.push(InvariantItem::new("covering", fail));

        let fail = (0..=big_n).find_map(|n| {
            let bound = card_bound(&self.dims, n) * n2_4;
            let card = self.edges[n].len();
            (card as f64 > bound * (1.0 + CARD_SLACK)).then(|| format!("card(E_{n}) = {card} > {bound}"))
        });
        items.push(InvariantItem::new("edge_count", fail));

        let fail = (0..=big_n).find_map(|n| {
            let want = canonical_edges(&self.levels[n], |a, b| self.nd(a, b), 3.0 * (-(n as f64)).exp2());
            (want != self.edges[n]).then(|| {
                let extra = self.edges[n].iter().find(|e| !want.contains(e));
                let missing = want.iter().find(|e| !self.edges[n].contains(e));
                format!("E_{n} differs from pairs at distance < 3*2^-{n}: extra {extra:?}, missing {missing:?}")
            })
        });
        items.push(InvariantItem::new("edge_sets", fail));

        let fail = (0..=big_n).find_map(|n| {
            let sep = 2.0 / 3.0 * (-(n as f64)).exp2();
            let v = &self.levels[n];
            v.iter().enumerate().find_map(|(i, &a)| {
                v[..i].iter().find(|&&b| self.nd(a, b) < sep).map(|&b| {
                    format!("points {b},{a} in V_{n} at distance {} < (2/3)2^-{n}", self.nd(a, b))
                })
            })
        });
        items.push(InvariantItem::new("separation", fail));

        let fail = if self.theta.len() != 2 * big_n + 3 || self.theta[0] != 0 {
            Some(format!("theta has length {} and theta(0) = {:?}", self.theta.len(), self.theta.first()))
        } else {
            (0..=big_n).find_map(|n| {
                let e = self.edges[n].len() as u64;
                let (t0, t1, t2) = (self.theta[2 * n], self.theta[2 * n + 1], self.theta[2 * n + 2]);
                let pad = padding(e, d, n).unwrap_or(u64::MAX);
                if t1 < t0 || t1 - t0 != e {
                    Some(format!("theta({})-theta({}) != card(E_{n}) = {e}", 2 * n + 1, 2 * n))
                } else if t2 < t1 || t2 - t1 < pad {
                    Some(format!("padding at level {n} shorter than {pad}"))
                } else {
                    None
                }
            })
        };
        items.push(InvariantItem::new("theta_increments", fail));

        let fail = (1..=big_n).find_map(|n| {
            let t = self.theta.get(2 * n).copied().unwrap_or(0) as f64;
            let lo = (d * n as f64).exp2();
            let hi = self.dims.c * 3f64.powf(d + 1.0) / d * n2_4 * lo;
            (t < lo * (1.0 - CARD_SLACK) || t > hi * (1.0 + CARD_SLACK))
                .then(|| format!("theta({}) = {t} outside [{lo}, {hi}]", 2 * n))
        });
        items.push(InvariantItem::new("theta_bounds", fail));

        let fail = (0..=big_n).find_map(|n| {
            let r = 3.0 * (-(n as f64)).exp2();
            let v = &self.levels[n];
            v.iter().find_map(|&a| {
                let k = v.iter().filter(|&&b| b != a && self.nd(a, b) < r).count();
                (k as f64 > n2_4).then(|| format!("point {a} has {k} neighbors in V_{n} > n2^4"))
            })
        });
        items.push(InvariantItem::new("neighbor_packing", fail));

        let fail = (!self.levels[0].contains(&self.dummy)).then(|| format!("dummy {} not in V_0", self.dummy));
        items.push(InvariantItem::new("dummy_in_v0", fail));

        InvariantReport { items }
    }

    pub fn export(&self) -> NetExport {
        NetExport {
            format: NET_FORMAT.to_owned(),
            n_points: self.space.len(),
            diameter: self.space.diameter(),
            dims: self.dims,
            dummy: self.dummy,
            levels: self.levels.clone(),
            edges: self.edges.clone(),
            theta: self.theta.clone(),
            pairs: self.edge_pairs().map(|(k, a, b)| (k, a, b)).collect(),
            cover_sizes: self.cover_sizes.clone(),
        }
    }

    /// Reattaches an exported net to its space. Only shape is checked here;
    /// use [`ChainingNet::verify`] for the invariants. `pairs` is derived
    /// data and is ignored.
    pub fn import(space: &MetricSpace, ex: NetExport) -> Result<Self> {
        if ex.format != NET_FORMAT {
            return Err(param(format!("unknown net format {:?}", ex.format)));
        }
        if ex.n_points != space.len() {
            return Err(Error::Shape { expected: space.len(), got: ex.n_points });
        }
        if (ex.diameter - space.diameter()).abs() > 1e-12 * space.diameter() {
            return Err(param("net was built on a space with a different diameter"));
        }
        ex.dims.validate()?;
        if ex.levels.is_empty() || ex.edges.len() != ex.levels.len() || ex.theta.len() != 2 * ex.levels.len() + 1 {
            return Err(param("levels, edges and theta lengths disagree"));
        }
        let n = space.len();
        let ids_ok = ex.levels.iter().flatten().all(|&i| i < n)
            && ex.edges.iter().flatten().all(|&(a, b)| a < n && b < n)
            && ex.dummy < n;
        if !ids_ok {
            return Err(param("point id out of range in net"));
        }
        if ex.levels.iter().any(|v| v.windows(2).any(|w| w[0] >= w[1])) {
            return Err(param("net levels must be strictly ascending id lists"));
        }
        let mut entry = vec![None; n];
        for (k, v) in ex.levels.iter().enumerate() {
            for &i in v {
                entry[i].get_or_insert(k);
            }
        }
        Ok(Self {
            space: space.clone(),
            inv_diam: 1.0 / space.diameter(),
            dims: ex.dims,
            levels: ex.levels,
            entry,
            edges: ex.edges,
            theta: ex.theta,
            dummy: ex.dummy,
            cover_sizes: ex.cover_sizes,
        })
    }
}

pub const NET_FORMAT: &str = "chainbound-net v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetExport {
    pub format: String,
    pub n_points: usize,
    pub diameter: f64,
    pub dims: DimensionInfo,
    pub dummy: usize,
    pub levels: Vec<Vec<usize>>,
    pub edges: Vec<Vec<(usize, usize)>>,
    pub theta: Vec<u64>,
    /// Non-dummy `(k, x_k, y_k)`.
    pub pairs: Vec<(u64, usize, usize)>,
    #[serde(default)]
    pub cover_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantItem {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

impl InvariantItem {
    fn new(name: &'static str, failure: Option<String>) -> Self {
        Self { name, passed: failure.is_none(), witness: failure }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub items: Vec<InvariantItem>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, name: &str) -> Option<&InvariantItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

/// `c 3^d 2^(dn)`.
fn card_bound(dims: &DimensionInfo, n: usize) -> f64 {
    dims.c * 3f64.powf(dims.d) * (dims.d * n as f64).exp2()
}

/// Smallest `N >= 1` with `2^-N < min_nd`.
fn default_depth(min_nd: f64) -> usize {
    let mut n = 1;
    while (-(n as f64)).exp2() >= min_nd {
        n += 1;
    }
    n
}

/// Sorted pairs `(a, b)`, `a < b`, of `v` with `0 < dist < thresh`.
fn canonical_edges(v: &[usize], dist: impl Fn(usize, usize) -> f64, thresh: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            let d = dist(a, b);
            if d > 0.0 && d < thresh {
                e.push((a.min(b), a.max(b)));
            }
        }
    }
    e.sort_unstable();
    e
}

/// `max(ceil(2^(d(n+1))) - card(E_n), 0)`.
fn padding(card: u64, d: f64, n: usize) -> Result<u64> {
    let target = (d * (n + 1) as f64).exp2().ceil();
    if target >= 2f64.powi(62) {
        return Err(Error::Size { what: "pair sequence", got: usize::MAX, limit: 1 << 62 });
    }
    Ok((target as u64).saturating_sub(card))
}

fn theta_offsets(edges: &[Vec<(usize, usize)>], d: f64) -> Result<Vec<u64>> {
    let mut theta = vec![0u64];
    for (n, e) in edges.iter().enumerate() {
        let t = *theta.last().unwrap() + e.len() as u64;
        theta.push(t);
        theta.push(t + padding(e.len() as u64, d, n)?);
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn line(xs: Vec<f64>) -> MetricSpace {
        MetricSpace::from_coords(xs, 1, Metric::Euclidean).unwrap()
    }

    fn dyadic(k: u32) -> MetricSpace {
        let n = (1usize << k) + 1;
        line((0..n).map(|i| i as f64 / (n - 1) as f64).collect())
    }

    fn e1() -> DimensionInfo {
        DimensionInfo::euclidean(1).unwrap()
    }

    #[test]
    fn two_point_net() {
        let net = ChainingNet::build(&line(vec![0.0, 1.0]), e1(), None).unwrap();
        assert_eq!(net.level(0), &[0]);
        assert_eq!(net.edges(0), &[]);
        assert!(net.verify().passed(), "{:?}", net.verify());
        // Distance 1 < 3: the single edge enters at level 1.
        let first = net.edge_pairs().next().unwrap();
        assert_eq!((first.1, first.2), (0, 1));
        assert_eq!(net.level(net.depth()), &[0, 1]);
    }

    #[test]
    fn two_point_e0_is_the_pair_when_both_in_v0() {
        // Force both points into V_0 through import to exercise E_0.
        let s = line(vec![0.0, 1.0]);
        let mut ex = ChainingNet::build(&s, e1(), None).unwrap().export();
        ex.levels[0] = vec![0, 1];
        let net = ChainingNet::import(&s, ex).unwrap();
        let e0 = canonical_edges(net.level(0), |a, b| net.nd(a, b), 3.0);
        assert_eq!(e0, vec![(0, 1)]);
    }

    #[test]
    fn dyadic_grid_net() {
        let s = dyadic(10);
        let net = ChainingNet::build(&s, e1(), None).unwrap();
        assert_eq!(net.depth(), 11);
        assert!(net.verify().passed(), "{:?}", net.verify());
        assert_eq!(net.level(net.depth()).len(), s.len());
        for n in 1..=net.depth() {
            assert!(net.theta()[2 * n] >= 1 << n);
        }
    }

    #[test]
    fn padding_is_minimal() {
        let net = ChainingNet::build(&dyadic(6), e1(), None).unwrap();
        let t = net.theta();
        for n in 0..=net.depth() {
            let e = net.edges(n).len() as u64;
            assert_eq!(t[2 * n + 1] - t[2 * n], e);
            assert_eq!(t[2 * n + 2] - t[2 * n + 1], (1u64 << (n + 1)).saturating_sub(e));
        }
        let all: Vec<_> = net.pair_sequence().collect();
        assert_eq!(all.len() as u64, *t.last().unwrap());
        assert!(all.iter().enumerate().all(|(i, p)| p.0 == i as u64 + 1));
        let dummies = all.iter().filter(|p| p.1 == p.2).count() as u64;
        assert_eq!(dummies + net.edge_pairs().count() as u64, *t.last().unwrap());
        assert!(all.iter().filter(|p| p.1 == p.2).all(|p| p.1 == net.dummy()));
    }

    #[test]
    fn chain_identity_and_hop_lengths() {
        let s = dyadic(7);
        let net = ChainingNet::build(&s, e1(), None).unwrap();
        let n = s.len();
        for x in (0..n).step_by(7) {
            for y in (0..n).step_by(5) {
                let ch = net.chain_decompose(x, y).unwrap();
                let mut mult = vec![0i64; n];
                for (p, m) in ch.signed_terms() {
                    mult[p] += m;
                }
                let mut want = vec![0i64; n];
                want[x] += 1;
                want[y] -= 1;
                assert_eq!(mult, want);
                let r = net.nd(ch.root.0, ch.root.1);
                assert!(r < 3.0 * (-(ch.n0 as f64)).exp2());
                for (j, &(a, b)) in (ch.n0 + 1..).zip(ch.hops_x.iter().chain(&[])) {
                    assert!(net.nd(a, b) < 3.0 * (-((j - 1) as f64)).exp2());
                }
            }
        }
        let same = net.chain_decompose(3, 3).unwrap();
        assert_eq!(same.n0, net.depth());
        assert!(same.hops_x.is_empty() && same.hops_y.is_empty());
        assert_eq!(same.root.0, same.root.1);
        let v0 = net.chain_decompose(0, 0).unwrap();
        assert_eq!(v0.root, (0, 0));
    }

    #[test]
    fn non_net_point_rejected() {
        let s = dyadic(6);
        let net = ChainingNet::build(&s, e1(), Some(2)).unwrap();
        let outside = (0..s.len()).find(|&i| net.entry_level(i).is_none()).unwrap();
        assert!(matches!(net.chain_decompose(0, outside), Err(Error::NotNetPoint(_))));
    }

    #[test]
    fn deleted_points_break_covering() {
        let s = dyadic(8);
        let net = ChainingNet::build(&s, e1(), None).unwrap();
        let mut ex = net.export();
        // On the grid V_{n-1} is already a closed 2^-n cover, so thin V_3
        // down to V_1, a 2^-2 cover only.
        ex.levels[3] = ex.levels[1].clone();
        let rep = ChainingNet::import(&s, ex).unwrap().verify();
        let item = rep.item("covering").unwrap();
        assert!(!item.passed);
        assert!(item.witness.as_ref().unwrap().contains("V_3"));
    }

    #[test]
    fn widened_edges_flagged() {
        let s = dyadic(8);
        let net = ChainingNet::build(&s, e1(), None).unwrap();
        let mut ex = net.export();
        for (n, e) in ex.edges.iter_mut().enumerate() {
            *e = canonical_edges(&ex.levels[n], |a, b| net.nd(a, b), 4.0 * (-(n as f64)).exp2());
        }
        ex.theta = theta_offsets(&ex.edges, 1.0).unwrap();
        let rep = ChainingNet::import(&s, ex).unwrap().verify();
        assert!(!rep.passed());
        assert!(!rep.item("edge_sets").unwrap().passed);
    }

    #[test]
    fn tight_constant_is_rejected() {
        let s = dyadic(8);
        // Half the true dimension: card(V_n) outgrows c 3^d 2^(dn).
        let dims = DimensionInfo::new(0.5, 1.0, 1).unwrap();
        let err = ChainingNet::build(&s, dims, None).unwrap_err();
        assert!(matches!(err, Error::DimsTooSmall { .. }));
    }

    #[test]
    fn export_round_trip() {
        let s = dyadic(5);
        let net = ChainingNet::build(&s, e1(), None).unwrap();
        let json = serde_json::to_string(&net.export()).unwrap();
        let back = ChainingNet::import(&s, serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.export(), net.export());
        assert!(back.verify().passed());
    }
}
