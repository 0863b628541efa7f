//! One-dimensional parabolic Anderson model `dU = ΔU dt + η U dW` on `[0,1]`
//! with Dirichlet boundary, its heat kernel, and the space-time modulus
//! statistic.
//!
//! Sine modes use the orthonormal basis `h_k(x) = sqrt(2) sin(πkx)` with
//! eigenvalues `λ_k = π²k²`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use rustdct::{DctPlanner, Dst1};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mc::{replicates, McEstimate, Neumaier};
use crate::report::{Cell, Contract, Table};
use crate::rng::{stream_id, substream};
use rand::Rng as _;
use rand_distr::StandardNormal;

const ARRAY_BUDGET: usize = crate::stochastic::ARRAY_BUDGET;

/// `|t-s|^(1/2) + (1 - ln|x-y|/2) |x-y|`; the space term is 0 when `x = y`.
pub fn parabolic_metric(u: (f64, f64), v: (f64, f64)) -> f64 {
    let dt = (u.0 - v.0).abs();
    let dx = (u.1 - v.1).abs();
    let space = if dx > 0.0 { (1.0 - 0.5 * dx.ln()) * dx } else { 0.0 };
    dt.sqrt() + space
}

#[inline]
fn lambda(k: usize) -> f64 {
    let k = k as f64;
    PI * PI * k * k
}

/// Truncated Dirichlet heat kernel `Σ_{k<=K} 2 e^{-π²k²t} sin(πkx) sin(πky)`.
pub fn green_eval(t: f64, x: f64, y: f64, k: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { value: t, domain: "t > 0" });
    }
    for v in [x, y] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain { value: v, domain: "[0, 1]" });
        }
    }
    if k == 0 {
        return Err(param("need at least one mode"));
    }
    let mut acc = Neumaier::default();
    for j in 1..=k {
        let jf = j as f64;
        acc.add(2.0 * (-lambda(j) * t).exp() * ((PI * jf * x).sin() * (PI * jf * y).sin()));
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// Heat kernel regularity constant.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenGrid {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

impl Default for GreenGrid {
    fn default() -> Self {
        GreenGrid { times: vec![0.0, 0.01, 0.05, 0.1, 0.3, 1.0], positions: vec![0.1, 0.3, 0.45, 0.5, 0.7, 0.95] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenRow {
    pub s: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenConstant {
    pub c_fit: f64,
    /// Fit at half the quadrature resolution.
    pub c_coarse: f64,
    pub rel_change: f64,
    pub nodes_per_panel: usize,
    pub rows: Vec<GreenRow>,
}

impl GreenConstant {
    pub fn argmax(&self) -> &GreenRow {
        self.rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).expect("non-empty grid")
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["s", "t", "x", "y", "lhs", "denominator", "ratio"]);
        for r in &self.rows {
            t.push(vec![r.s.into(), r.t.into(), r.x.into(), r.y.into(), r.lhs.into(), r.denominator.into(), r.ratio.into()]);
        }
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        vec![Contract::new(
            "green_quadrature_stable",
            None,
            self.rel_change <= GREEN_TOL,
            format!("c_fit {} vs {} at half resolution", self.c_fit, self.c_coarse),
        )]
    }
}

/// Relative change allowed between a quadrature level and its halving.
pub const GREEN_TOL: f64 = 0.05;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 { 1.0 } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Quadrature on `[a, b]` with panels halving towards `b`, down to width `w_min`.
fn graded_rule(a: f64, b: f64, w_min: f64, gl: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if b <= a {
        return out;
    }
    let mut lo = a;
    let mut width = (b - a) / 2.0;
    loop {
        let hi = if width <= w_min { b } else { b - width };
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        out.extend(gl.iter().map(|&(x, w)| (mid + half * x, half * w)));
        if hi == b {
            return out;
        }
        lo = hi;
        width /= 2.0;
    }
}

/// `∫_0^t Σ_k (e^{-λ_k(t-r)} h_k(x) - e^{-λ_k(s-r)} h_k(y) 1_{r<=s})² dr` by graded
/// composite Gauss-Legendre in `r`.
fn green_lhs(s: f64, t: f64, x: f64, y: f64, k: usize, gl: &[(f64, f64)]) -> f64 {
    let w_min = 1e-3 / lambda(k);
    let hx: Vec<f64> = (1..=k).map(|j| 2f64.sqrt() * (PI * j as f64 * x).sin()).collect();
    let hy: Vec<f64> = (1..=k).map(|j| 2f64.sqrt() * (PI * j as f64 * y).sin()).collect();
    let mut acc = Neumaier::default();
    for (r, w) in graded_rule(0.0, s, w_min, gl) {
        let v: f64 = (1..=k)
            .map(|j| {
                let l = lambda(j);
                let d = (-l * (t - r)).exp() * hx[j - 1] - (-l * (s - r)).exp() * hy[j - 1];
                d * d
            })
            .sum();
        acc.add(w * v);
    }
    for (r, w) in graded_rule(s, t, w_min, gl) {
        let v: f64 = (1..=k)
            .map(|j| {
                let d = (-lambda(j) * (t - r)).exp() * hx[j - 1];
                d * d
            })
            .sum();
        acc.add(w * v);
    }
    acc.value()
}

/// `|t-s|^(1/2) - ln|x-y| |x-y|`, the space term dropped when `x = y`.
fn green_denominator(s: f64, t: f64, x: f64, y: f64) -> f64 {
    let dx = (x - y).abs();
    (t - s).abs().sqrt() - if dx > 0.0 { dx.ln() * dx } else { 0.0 }
}

fn green_fit(grid: &GreenGrid, k: usize, nodes: usize) -> Vec<GreenRow> {
    let gl = gauss_legendre(nodes);
    let mut rows = Vec::new();
    for &s in &grid.times {
        for &t in &grid.times {
            if s > t {
                continue;
            }
            for &x in &grid.positions {
                for &y in &grid.positions {
                    if s == t && x == y {
                        continue;
                    }
                    let lhs = green_lhs(s, t, x, y, k, &gl);
                    let denominator = green_denominator(s, t, x, y);
                    rows.push(GreenRow { s, t, x, y, lhs, denominator, ratio: lhs / denominator });
                }
            }
        }
    }
    rows
}

/// Largest ratio of the squared kernel increment to `|t-s|^(1/2) - ln|x-y||x-y|`
/// over ordered grid tuples `s <= t`, at 8 and 16 Gauss points per panel.
pub fn green_regularity_constant(grid: &GreenGrid, k: usize) -> Result<GreenConstant> {
    if k == 0 {
        return Err(param("need at least one mode"));
    }
    if grid.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(param("grid times must be finite and non-negative"));
    }
    if grid.positions.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(param("grid positions must lie in [0, 1]"));
    }
    let fine_nodes = 16;
    let coarse = green_fit(grid, k, fine_nodes / 2);
    let fine = green_fit(grid, k, fine_nodes);
    if fine.is_empty() {
        return Err(param("grid has no admissible tuple"));
    }
    let max = |rows: &[GreenRow]| rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let (c_fit, c_coarse) = (max(&fine), max(&coarse));
    let rel_change = (c_fit - c_coarse).abs() / c_fit.max(f64::MIN_POSITIVE);
    if rel_change > GREEN_TOL {
        return Err(Error::Accuracy(format!(
            "Green constant changed by {:.1}% under quadrature doubling",
            100.0 * rel_change
        )));
    }
    Ok(GreenConstant { c_fit, c_coarse, rel_change, nodes_per_panel: fine_nodes, rows: fine })
}

// ---------------------------------------------------------------------------
// Solver.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude sin(π mode x)`.
    SineMode {
        #[serde(default = "one_usize")]
        mode: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Coefficients on `h_1, h_2, ...`.
    Coefficients { values: Vec<f64> },
    /// `x(1-x)`.
    Parabola,
    Zero,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl InitialCondition {
    /// First `k` coefficients on `h_j`.
    pub fn coefficients(&self, k: usize) -> Result<Vec<f64>> {
        let mut a = vec![0.0; k];
        match self {
            InitialCondition::SineMode { mode, amplitude } => {
                if *mode == 0 || *mode > k {
                    return Err(param(format!("sine mode {mode} outside 1..={k}")));
                }
                a[mode - 1] = amplitude / 2f64.sqrt();
            }
            InitialCondition::Coefficients { values } => {
                if values.len() > k {
                    return Err(Error::Shape { expected: k, got: values.len() });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(param("initial coefficients must be finite"));
                }
                a[..values.len()].copy_from_slice(values);
            }
            InitialCondition::Parabola => {
                for (j, c) in a.iter_mut().enumerate().step_by(2) {
                    let pk = PI * (j + 1) as f64;
                    *c = 4.0 * 2f64.sqrt() / (pk * pk * pk);
                }
            }
            InitialCondition::Zero => {}
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PamParams {
    pub eta: f64,
    pub t: f64,
    /// Sine modes; default `mx - 1`, every mode the grid resolves.
    #[serde(default)]
    pub k: Option<usize>,
    pub mx: usize,
    pub nt: usize,
    pub u0: InitialCondition,
    pub p: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Stored time slices including `t = 0`; default `mx/2 + 1`.
    #[serde(default)]
    pub n_slices: Option<usize>,
}

impl PamParams {
    pub fn modes(&self) -> usize {
        self.k.unwrap_or(self.mx.saturating_sub(1))
    }

    pub fn slices(&self) -> usize {
        self.n_slices.unwrap_or(self.mx / 2 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(param(format!("eta must be finite and non-negative, got {}", self.eta)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(param("horizon T must be positive"));
        }
        if self.mx < 2 {
            return Err(param("need mx >= 2"));
        }
        let k = self.modes();
        if k == 0 || k > self.mx {
            return Err(param(format!("need 1 <= K <= mx, got K = {k}")));
        }
        let s = self.slices();
        if s < 2 || self.nt == 0 || self.nt % (s - 1) != 0 {
            return Err(param(format!("nt = {} must be a positive multiple of n_slices - 1 = {}", self.nt, s.max(1) - 1)));
        }
        if !(self.p >= 1.0) {
            return Err(param(format!("p must be >= 1, got {}", self.p)));
        }
        if self.replicates == 0 {
            return Err(param("need at least one replicate"));
        }
        let work = self.nt.checked_mul(k).unwrap_or(usize::MAX);
        let store = self.replicates.saturating_mul(s).saturating_mul(self.mx + 1);
        for (what, v) in [("Nt x K", work), ("ensemble", store)] {
            if v > ARRAY_BUDGET {
                return Err(Error::Size { what, got: v, limit: ARRAY_BUDGET });
            }
        }
        self.u0.coefficients(k)?;
        Ok(())
    }
}

/// Replicate fields on `times x positions`, `positions[j] = j/mx`.
#[derive(Clone, Debug, PartialEq)]
pub struct PamEnsemble {
    pub params: PamParams,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// `replicates x slices x (mx+1)`, row-major.
    pub data: Vec<f64>,
}

impl PamEnsemble {
    pub fn replicates(&self) -> usize {
        self.data.len() / self.slice_len() / self.times.len()
    }

    fn slice_len(&self) -> usize {
        self.positions.len()
    }

    /// Field of replicate `r` as rows of time slices.
    pub fn field(&self, r: usize) -> &[f64] {
        let n = self.times.len() * self.slice_len();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn value(&self, r: usize, slice: usize, j: usize) -> f64 {
        self.field(r)[slice * self.slice_len() + j]
    }

    /// Mean and standard error over replicates at one grid point.
    pub fn mean_at(&self, slice: usize, j: usize) -> (f64, f64) {
        let vals: Vec<f64> = (0..self.replicates()).map(|r| self.value(r, slice, j)).collect();
        let (m, v) = crate::mc::mean_var(&vals);
        (m, (v / vals.len() as f64).sqrt())
    }

    /// Flat little-endian snapshot: magic `CBPAM001`, then `u64` replicates,
    /// slices, points; `f64` times; `f64` data in row-major order.
    pub fn write_snapshot(&self, mut w: impl Write) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        for v in [self.replicates(), self.times.len(), self.positions.len()] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for v in self.times.iter().chain(&self.data) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"CBPAM001";

/// Reads a snapshot back as `(times, replicates x slices x points data, points)`.
pub fn read_snapshot(mut r: impl Read) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Parse { line: 0, msg: "not a PAM snapshot".into() });
    }
    let mut word = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        r.read_exact(&mut word)?;
        *d = u64::from_le_bytes(word) as usize;
    }
    let total = dims[0].saturating_mul(dims[1]).saturating_mul(dims[2]);
    if total > ARRAY_BUDGET {
        return Err(Error::Size { what: "snapshot", got: total, limit: ARRAY_BUDGET });
    }
    let mut read = |n: usize| -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                r.read_exact(&mut word)?;
                Ok(f64::from_le_bytes(word))
            })
            .collect()
    };
    let times = read(dims[1])?;
    Ok((times, read(total)?, dims[2]))
}

/// Sine synthesis and analysis on the interior of a uniform grid with `m` cells.
struct SineGrid {
    m: usize,
    dst: Arc<dyn Dst1<f64>>,
    scratch: Vec<f64>,
}

impl SineGrid {
    fn new(m: usize) -> Self {
        let dst = DctPlanner::new().plan_dst1(m - 1);
        let scratch = vec![0.0; dst.get_scratch_len()];
        SineGrid { m, dst, scratch }
    }

    /// Coefficients (zero-padded, length `m-1`) to interior values.
    fn transform(&mut self, buf: &mut [f64]) {
        // Stale scratch leaks into the output for some lengths.
        self.scratch.iter_mut().for_each(|v| *v = 0.0);
        self.dst.process_dst1_with_scratch(buf, &mut self.scratch);
    }

    fn synthesize(&mut self, buf: &mut [f64]) {
        self.transform(buf);
        let s = 2f64.sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// Interior values to discrete `h_k` coefficients, `k < m`.
    fn analyze(&mut self, buf: &mut [f64]) {
        self.transform(buf);
        let s = 2f64.sqrt() / self.m as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

/// Exponential Euler on sine modes: `a_k <- e^{-λ_k dt} (a_k + η b_k)`, with
/// `b_k` the `h_k` coefficient of `U · ΔW` computed on a `2K`-cell grid and
/// `ΔW = Σ_{k<=K} sqrt(dt) ξ_k h_k`.
pub fn pam_solve(params: &PamParams) -> Result<PamEnsemble> {
    params.validate()?;
    let k = params.modes();
    let (mx, nt, slices) = (params.mx, params.nt, params.slices());
    let a0 = params.u0.coefficients(k)?;
    let dt = params.t / nt as f64;
    let stride = nt / (slices - 1);
    let decay: Vec<f64> = (1..=k).map(|j| (-lambda(j) * dt).exp()).collect();
    let sqdt = dt.sqrt();
    let per_rep: Vec<Vec<f64>> = replicates(params.replicates, |r| {
        let mut g = substream(params.seed, stream_id(r, 0));
        let mut prod = SineGrid::new(2 * k.max(1));
        let mut out_grid = SineGrid::new(mx);
        let n2 = 2 * k.max(1) - 1;
        let (mut u, mut w) = (vec![0.0; n2], vec![0.0; n2]);
        let mut a = a0.clone();
        let mut field = Vec::with_capacity(slices * (mx + 1));
        let mut out = vec![0.0; mx - 1];
        let mut emit = |a: &[f64], field: &mut Vec<f64>| {
            out.iter_mut().for_each(|v| *v = 0.0);
            let kk = k.min(mx - 1);
            out[..kk].copy_from_slice(&a[..kk]);
            out_grid.synthesize(&mut out);
            field.push(0.0);
            field.extend_from_slice(&out);
            field.push(0.0);
        };
        emit(&a, &mut field);
        for step in 1..=nt {
            if params.eta > 0.0 {
                u[..k].copy_from_slice(&a);
                u[k..].iter_mut().for_each(|v| *v = 0.0);
                for c in &mut w[..k] {
                    *c = sqdt * g.sample::<f64, _>(StandardNormal);
                }
                w[k..].iter_mut().for_each(|v| *v = 0.0);
                prod.synthesize(&mut u);
                prod.synthesize(&mut w);
                u.iter_mut().zip(&w).for_each(|(x, y)| *x *= y);
                prod.analyze(&mut u);
                for j in 0..k {
                    a[j] = decay[j] * (a[j] + params.eta * u[j]);
                }
            } else {
                a.iter_mut().zip(&decay).for_each(|(c, d)| *c *= d);
            }
            if step % stride == 0 {
                emit(&a, &mut field);
            }
        }
        field
    });
    let times = (0..slices).map(|i| (i * stride) as f64 * dt).collect();
    let positions = (0..=mx).map(|j| j as f64 / mx as f64).collect();
    Ok(PamEnsemble { params: params.clone(), times, positions, data: per_rep.concat() })
}

/// Discrete `L²(0,1)` norm of a grid slice (`(1/m) Σ_j U_j²`)^(1/2).
pub fn grid_l2(slice: &[f64]) -> f64 {
    let m = (slice.len() - 1) as f64;
    (slice.iter().map(|v| v * v).sum::<f64>() / m).sqrt()
}

// ---------------------------------------------------------------------------
// Space-time modulus statistic.

/// Time exponent of the statistic's denominator.
pub const TIME_EXPONENT: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PamStatistic {
    pub estimate: McEstimate,
    pub time_exponent: f64,
    pub mx: usize,
    pub nt: usize,
    /// `p <= 4` lies outside the existence hypothesis.
    pub p_outside_hypothesis: bool,
}

impl PamStatistic {
    pub fn table(&self) -> Table {
        let mut t = Table::new(["mx", "nt", "time_exponent", "p", "replicates", "estimate", "stderr", "seed", "p_le_4"]);
        let e = &self.estimate;
        t.push(vec![
            self.mx.into(),
            self.nt.into(),
            self.time_exponent.into(),
            e.p.into(),
            e.n_replicates.into(),
            e.lp_value.into(),
            e.stderr.into(),
            e.seed.into(),
            Cell::Flag(self.p_outside_hypothesis),
        ]);
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        vec![Contract::new(
            "pam_statistic_finite",
            None,
            self.estimate.lp_value.is_finite(),
            format!("estimate {}", self.estimate.lp_value),
        )]
    }
}

/// [`pam_modulus_statistic_with`] at the time exponent 1/4.
pub fn pam_modulus_statistic(ens: &PamEnsemble, p: f64) -> Result<PamStatistic> {
    pam_modulus_statistic_with(ens, p, TIME_EXPONENT)
}

/// `L^p` norm of the grid max of `|U(t,x) - U(s,y)|` over
/// `(1 - ln|t-s|/4)^(1/2) |t-s|^e + (1 - ln|x-y|/2) |x-y|^(1/2)`.
pub fn pam_modulus_statistic_with(ens: &PamEnsemble, p: f64, time_exponent: f64) -> Result<PamStatistic> {
    if !(time_exponent > 0.0) {
        return Err(param("time exponent must be positive"));
    }
    let (ns, np) = (ens.times.len(), ens.positions.len());
    let time_term = |l: usize| {
        let d = ens.times[l] - ens.times[0];
        if l == 0 {
            0.0
        } else {
            (1.0 - 0.25 * d.ln()).sqrt() * d.powf(time_exponent)
        }
    };
    let space_term = |l: usize| {
        let d = l as f64 / (np - 1) as f64;
        if l == 0 {
            0.0
        } else {
            (1.0 - 0.5 * d.ln()) * d.sqrt()
        }
    };
    // inv[lt][lx] = 1 / denominator; the (0, 0) entry is never used.
    let inv: Vec<Vec<f64>> =
        (0..ns).map(|lt| (0..np).map(|lx| 1.0 / (time_term(lt) + space_term(lx))).collect()).collect();
    let samples = replicates(ens.replicates(), |r| {
        let f = ens.field(r);
        let row = |i: usize| &f[i * np..(i + 1) * np];
        let mut best = 0.0f64;
        for lt in 0..ns {
            let w = &inv[lt];
            for i in 0..ns - lt {
                let (a, b) = (row(i), row(i + lt));
                for (j1, &va) in a.iter().enumerate() {
                    // j2 >= j1 (strictly greater within one slice).
                    let start = if lt == 0 { j1 + 1 } else { j1 };
                    let m1 = b[start..].iter().zip(&w[start - j1..]).fold(0.0f64, |m, (vb, c)| m.max((va - vb).abs() * c));
                    // j2 < j1, lag j1 - j2.
                    let m2 = if lt == 0 {
                        0.0
                    } else {
                        b[..j1].iter().rev().zip(&w[1..]).fold(0.0f64, |m, (vb, c)| m.max((va - vb).abs() * c))
                    };
                    best = best.max(m1).max(m2);
                }
            }
        }
        best
    });
    Ok(PamStatistic {
        estimate: McEstimate::from_samples(&samples, p, ens.params.seed)?,
        time_exponent,
        mx: ens.params.mx,
        nt: ens.params.nt,
        p_outside_hypothesis: p <= 4.0,
    })
}
