//! Brownian paths, Itô sums, exact Ornstein-Uhlenbeck transitions and Monte
//! Carlo checks of maximal inequalities for stochastic integrals (all with
//! smoothness constant D = 1).
//!
//! Every replicate draws from its own substream `(seed, stream_id(r, unit))`
//! and per-replicate statistics are reduced in replicate order, so results do
//! not depend on the number of workers.

use rand::{Rng as _, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::holder::{embedding_constants, SampledField, WeightTable};
use crate::mc::{linear_fit, mean_var, replicates, McEstimate};
use crate::metric::{DimensionInfo, Metric, MetricSpace};
use crate::modulus::{GrowthConstants, Modulus};
use crate::report::{Cell, Contract, Table};
use crate::rng::{stream_id, substream, Rng};

/// Largest array any simulation may allocate, in f64 elements.
pub const ARRAY_BUDGET: usize = 1 << 28;

#[inline]
fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_budget(what: &'static str, elems: usize) -> Result<()> {
    if elems > ARRAY_BUDGET {
        return Err(Error::Size { what, got: elems, limit: ARRAY_BUDGET });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WienerEnsemble {
    pub replicates: usize,
    pub components: usize,
    pub steps: usize,
    pub dt: f64,
    pub seed: u64,
    /// `R x K x N`, row-major.
    pub increments: Vec<f64>,
}

impl WienerEnsemble {
    pub fn path(&self, r: usize, k: usize) -> &[f64] {
        let start = (r * self.components + k) * self.steps;
        &self.increments[start..start + self.steps]
    }
}

/// Independent `N(0, dt)` increments; component `k` of replicate `r` uses
/// substream `stream_id(r, k)`.
pub fn simulate_brownian(r: usize, k: usize, n: usize, dt: f64, seed: u64) -> Result<WienerEnsemble> {
    if r == 0 || k == 0 || n == 0 {
        return Err(param("replicates, components and steps must be positive"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(param(format!("dt must be positive, got {dt}")));
    }
    let total = r.checked_mul(k).and_then(|v| v.checked_mul(n)).unwrap_or(usize::MAX);
    check_budget("Wiener ensemble", total)?;
    let sd = dt.sqrt();
    let chunks = replicates(r * k, |u| {
        let mut g = substream(seed, stream_id(u / k, u % k));
        (0..n).map(|_| sd * normal(&mut g)).collect::<Vec<f64>>()
    });
    Ok(WienerEnsemble { replicates: r, components: k, steps: n, dt, seed, increments: chunks.concat() })
}

/// Left-point sum `Σ f(t_i) ΔW_i`.
pub fn ito_integral(f: &[f64], dw: &[f64]) -> Result<f64> {
    if f.len() != dw.len() {
        return Err(Error::Shape { expected: dw.len(), got: f.len() });
    }
    Ok(f.iter().zip(dw).map(|(a, b)| a * b).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Forcing {
    Constant { value: f64 },
    /// One value per time step.
    Steps { values: Vec<f64> },
}

impl Forcing {
    fn at(&self, i: usize) -> f64 {
        match self {
            Forcing::Constant { value } => *value,
            Forcing::Steps { values } => values[i],
        }
    }

    fn sup_abs(&self) -> f64 {
        match self {
            Forcing::Constant { value } => value.abs(),
            Forcing::Steps { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub a: f64,
    pub t: f64,
    pub dt: f64,
    pub forcing: Forcing,
}

impl OuParams {
    /// Steps on the grid; `dt` is rounded so that steps·dt = T.
    pub fn steps(&self) -> usize {
        ((self.t / self.dt).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(param(format!("decay rate a must be positive, got {}", self.a)));
        }
        if !(self.t > 0.0 && self.dt > 0.0 && self.dt <= self.t) {
            return Err(param("need 0 < dt <= T"));
        }
        if let Forcing::Steps { values } = &self.forcing {
            if values.len() != self.steps() {
                return Err(Error::Shape { expected: self.steps(), got: values.len() });
            }
        }
        Ok(())
    }
}

/// Exact OU recursion `u_{i+1} = e^{-a dt} u_i + f_i sqrt((1-e^{-2a dt})/(2a)) z_i`
/// driven by standard normals `z`; `u_0 = 0`. Returns `steps + 1` values.
pub fn ou_exact_path(params: &OuParams, z: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    ou_exact_path_with(params, z, |i, _t, _u| params.forcing.at(i))
}

/// As [`ou_exact_path`] with the forcing frozen at `f(i, t_i, u_i)` on each
/// step (exponential Euler for state-dependent forcing).
pub fn ou_exact_path_with(params: &OuParams, z: &[f64], f: impl Fn(usize, f64, f64) -> f64) -> Result<Vec<f64>> {
    if !(params.a > 0.0) {
        return Err(param(format!("decay rate a must be positive, got {}", params.a)));
    }
    let n = params.steps();
    if z.len() != n {
        return Err(Error::Shape { expected: n, got: z.len() });
    }
    let dt = params.t / n as f64;
    let (decay, sd) = ou_step(params.a, dt);
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    let mut cur = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        cur = decay * cur + f(i, i as f64 * dt, cur) * sd * zi;
        u.push(cur);
    }
    Ok(u)
}

/// `(e^{-a dt}, sqrt((1 - e^{-2a dt}) / (2a)))`.
fn ou_step(a: f64, dt: f64) -> (f64, f64) {
    (( -a * dt).exp(), (-(-2.0 * a * dt).exp_m1() / (2.0 * a)).sqrt())
}

fn mc_columns() -> [&'static str; 5] {
    ["p", "replicates", "estimate", "stderr", "seed"]
}

fn mc_cells(e: &McEstimate) -> Vec<Cell> {
    vec![e.p.into(), e.n_replicates.into(), e.lp_value.into(), e.stderr.into(), e.seed.into()]
}

/// Weights `σ_k` / `w_j` for the many-path experiments (1-based index).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weights {
    /// All weights equal to `value` (default 1).
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `(1 + ln k)^(-1/2)`.
    LogDecay,
    List { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for Weights {
    fn default() -> Self {
        Weights::Constant { value: 1.0 }
    }
}

impl Weights {
    /// Weight of the `k`-th path, `k >= 1`.
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Weights::Constant { value } => *value,
            Weights::LogDecay => 1.0 / (1.0 + (k as f64).ln()).sqrt(),
            Weights::List { values } => values[k - 1],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let Weights::List { values } = self {
            if values.len() < n {
                return Err(Error::Shape { expected: n, got: values.len() });
            }
        }
        if (1..=n).any(|k| !self.at(k).is_finite()) {
            return Err(param("weights must be finite"));
        }
        Ok(())
    }
}

fn positive_count(what: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(param(format!("{what} must be positive")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(param(format!("L^p exponent must be >= 1, got {p}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Supremum of many stochastic integrals.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupIntegralsParams {
    /// Path counts; paths are shared, so larger `n` extend smaller ones.
    pub n: Vec<usize>,
    #[serde(default)]
    pub sigmas: Weights,
    pub p: f64,
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_steps() -> usize {
    1024
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupIntegralsRow {
    pub n: usize,
    pub lhs: McEstimate,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupIntegrals {
    pub rows: Vec<SupIntegralsRow>,
}

impl SupIntegrals {
    /// Slope of `ln lhs` against `ln ln n` (rows with `n >= 2`).
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.n >= 2).map(|r| ((r.n as f64).ln().ln(), r.lhs.lp_value.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(linear_fit(&x, &y).1)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["n"].into_iter().chain(mc_columns()).chain(["rhs"]));
        for r in &self.rows {
            let mut row = vec![r.n.into()];
            row.extend(mc_cells(&r.lhs));
            row.push(r.rhs.into());
            t.push(row);
        }
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Contract::new(
                    "sup_integrals_lhs_le_rhs",
                    Some(i),
                    r.lhs.below(r.rhs, 3.0),
                    format!("n={}: {} <= {} (+3 stderr)", r.n, r.lhs.lp_value, r.rhs),
                )
            })
            .collect()
    }
}

/// `‖sup_{k<=n} sup_{t<=T} |σ_k B_k(t)|‖_p` against `10 sup_k sqrt(p + ln k) σ_k sqrt(T)`.
pub fn experiment_sup_integrals(params: &SupIntegralsParams) -> Result<SupIntegrals> {
    check_p(params.p)?;
    positive_count("steps", params.steps)?;
    if params.n.is_empty() || params.n.contains(&0) {
        return Err(param("path counts must be positive"));
    }
    if !(params.t > 0.0) {
        return Err(param("horizon T must be positive"));
    }
    let mut ns = params.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().unwrap();
    params.sigmas.check(n_max)?;
    let sd = (params.t / params.steps as f64).sqrt();
    let per_rep: Vec<Vec<f64>> = replicates(params.replicates, |r| {
        let mut out = Vec::with_capacity(ns.len());
        let mut running = 0.0f64;
        let mut next = 0;
        for k in 1..=n_max {
            let mut g = substream(params.seed, stream_id(r, k - 1));
            let (mut b, mut m) = (0.0f64, 0.0f64);
            for _ in 0..params.steps {
                b += sd * normal(&mut g);
                m = m.max(b.abs());
            }
            running = running.max(params.sigmas.at(k).abs() * m);
            if k == ns[next] {
                out.push(running);
                next += 1;
            }
        }
        out
    });
    let rows = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let samples: Vec<f64> = per_rep.iter().map(|v| v[i]).collect();
            let rhs = (1..=n)
                .map(|k| (params.p + (k as f64).ln()).sqrt() * params.sigmas.at(k).abs())
                .fold(0.0, f64::max)
                * 10.0
                * params.t.sqrt();
            Ok(SupIntegralsRow { n, lhs: McEstimate::from_samples(&samples, params.p, params.seed)?, rhs })
        })
        .collect::<Result<_>>()?;
    Ok(SupIntegrals { rows })
}

// ---------------------------------------------------------------------------
// Long-time OU bound.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuLongtermParams {
    pub a: f64,
    pub t_list: Vec<f64>,
    pub p: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Constant forcing value (default 1).
    #[serde(default = "one")]
    pub forcing: f64,
    /// Step size; default `min(0.01, T/1e5)` per horizon.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuRow {
    pub t: f64,
    pub dt: f64,
    pub estimate: McEstimate,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuLongterm {
    pub rows: Vec<OuRow>,
}

impl OuLongterm {
    /// `(slope, R^2)` of `estimate^2` regressed on `ln T`.
    pub fn square_vs_log_t(&self) -> (f64, f64) {
        let x: Vec<f64> = self.rows.iter().map(|r| r.t.ln()).collect();
        let y: Vec<f64> = self.rows.iter().map(|r| r.estimate.lp_value.powi(2)).collect();
        let (_, b, r2) = linear_fit(&x, &y);
        (b, r2)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["t", "dt"].into_iter().chain(mc_columns()).chain(["bound"]));
        for r in &self.rows {
            let mut row = vec![r.t.into(), r.dt.into()];
            row.extend(mc_cells(&r.estimate));
            row.push(r.bound.into());
            t.push(row);
        }
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Contract::new(
                    "ou_estimate_le_bound",
                    Some(i),
                    r.estimate.lp_value <= r.bound,
                    format!("T={}: {} <= {}", r.t, r.estimate.lp_value, r.bound),
                )
            })
            .collect()
    }
}

/// `‖sup_{[0,T]} |u|‖_p` for the OU process `du = -a u dt + f dW` against
/// `18 sqrt(p + ln(1 + aT)) a^(-1/2) sup|f|`.
pub fn experiment_ou_longterm(params: &OuLongtermParams) -> Result<OuLongterm> {
    check_p(params.p)?;
    if params.t_list.is_empty() {
        return Err(param("t_list is empty"));
    }
    let mut rows = Vec::new();
    for (ti, &t) in params.t_list.iter().enumerate() {
        let dt = params.dt.unwrap_or_else(|| (0.01f64).min(t / 1e5));
        let ou = OuParams { a: params.a, t, dt, forcing: Forcing::Constant { value: params.forcing } };
        ou.validate()?;
        let n = ou.steps();
        let (decay, sd) = ou_step(ou.a, t / n as f64);
        let f = params.forcing;
        let samples = replicates(params.replicates, |r| {
            let mut g = substream(params.seed, stream_id(r, ti));
            let (mut u, mut m) = (0.0f64, 0.0f64);
            for _ in 0..n {
                u = decay * u + f * sd * normal(&mut g);
                m = m.max(u.abs());
            }
            m
        });
        let bound = 18.0 * (params.p + (1.0 + params.a * t).ln()).sqrt() / params.a.sqrt() * ou.forcing.sup_abs();
        rows.push(OuRow { t, dt: t / n as f64, estimate: McEstimate::from_samples(&samples, params.p, params.seed)?, bound });
    }
    Ok(OuLongterm { rows })
}

// ---------------------------------------------------------------------------
// Supremum of many discrete martingales.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
    Rademacher,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleParams {
    pub n: usize,
    pub steps: usize,
    pub scheme: WalkKind,
    #[serde(default)]
    pub weights: Weights,
    pub p: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleSup {
    pub n: usize,
    pub lhs: McEstimate,
    /// `‖sup_j (p + ln j) d*(f_j)‖_p`
    pub jump_term: McEstimate,
    /// `‖sup_j sqrt(p + ln j) s(f_j)‖_p`
    pub square_term: McEstimate,
    pub rhs: f64,
    pub rhs_stderr: f64,
}

impl MartingaleSup {
    pub fn holds(&self) -> bool {
        let se = self.lhs.stderr.hypot(self.rhs_stderr);
        self.lhs.lp_value <= self.rhs + 3.0 * se
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["n"].into_iter().chain(mc_columns()).chain([
            "jump_term",
            "square_term",
            "rhs",
            "rhs_stderr",
        ]));
        let mut row = vec![self.n.into()];
        row.extend(mc_cells(&self.lhs));
        row.extend([
            self.jump_term.lp_value.into(),
            self.square_term.lp_value.into(),
            self.rhs.into(),
            self.rhs_stderr.into(),
        ]);
        t.push(row);
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        vec![Contract::new(
            "martingale_lhs_le_rhs",
            Some(0),
            self.holds(),
            format!("{} <= {} (+3 joint stderr)", self.lhs.lp_value, self.rhs),
        )]
    }
}

/// `‖sup_j f_j*‖_p` against `13 ‖sup_j (p + ln j) d*(f_j)‖_p + 14 ‖sup_j sqrt(p + ln j) s(f_j)‖_p`
/// for `n` independent symmetric walks `f_j = w_j Σ ε_i`.
pub fn experiment_martingale_sup(params: &MartingaleParams) -> Result<MartingaleSup> {
    check_p(params.p)?;
    positive_count("n", params.n)?;
    positive_count("steps", params.steps)?;
    params.weights.check(params.n)?;
    let p = params.p;
    let per_rep: Vec<[f64; 3]> = replicates(params.replicates, |r| {
        let (mut sup, mut jump, mut square) = (0.0f64, 0.0f64, 0.0f64);
        for j in 1..=params.n {
            let w = params.weights.at(j);
            let mut g = substream(params.seed, stream_id(r, j - 1));
            let (mut s, mut m, mut dmax) = (0.0f64, 0.0f64, 0.0f64);
            match params.scheme {
                WalkKind::Rademacher => {
                    let mut bits = 0u64;
                    for i in 0..params.steps {
                        if i % 64 == 0 {
                            bits = g.next_u64();
                        }
                        s += if bits & 1 == 1 { w } else { -w };
                        bits >>= 1;
                        m = m.max(s.abs());
                    }
                    dmax = w.abs();
                }
                WalkKind::Gaussian => {
                    for _ in 0..params.steps {
                        let inc = w * normal(&mut g);
                        s += inc;
                        m = m.max(s.abs());
                        dmax = dmax.max(inc.abs());
                    }
                }
            }
            // Conditional variances are w^2 per step for both schemes.
            let sq = w.abs() * (params.steps as f64).sqrt();
            let lj = p + (j as f64).ln();
            sup = sup.max(m);
            jump = jump.max(lj * dmax);
            square = square.max(lj.sqrt() * sq);
        }
        [sup, jump, square]
    });
    let col = |c: usize| per_rep.iter().map(|v| v[c]).collect::<Vec<f64>>();
    let lhs = McEstimate::from_samples(&col(0), p, params.seed)?;
    let jump_term = McEstimate::from_samples(&col(1), p, params.seed)?;
    let square_term = McEstimate::from_samples(&col(2), p, params.seed)?;
    Ok(MartingaleSup {
        n: params.n,
        lhs,
        rhs: 13.0 * jump_term.lp_value + 14.0 * square_term.lp_value,
        rhs_stderr: 13.0 * jump_term.stderr + 14.0 * square_term.stderr,
        jump_term,
        square_term,
    })
}

// ---------------------------------------------------------------------------
// Good-lambda inequality.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    /// `f(t) = 1_{t <= τ}` with `τ ~ U[0, T]` independent of `W`.
    RandomStop,
    /// `f = 1`.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodLambdaParams {
    pub beta: f64,
    pub delta: Vec<f64>,
    /// Explicit λ values; default: `n_lambda` empirical tail quantiles of
    /// `Ψ*` between 0.5 and `100/R`.
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default = "ten")]
    pub n_lambda: usize,
    #[serde(default = "random_stop")]
    pub integrand: Integrand,
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

fn ten() -> usize {
    10
}

fn random_stop() -> Integrand {
    Integrand::RandomStop
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodLambdaRow {
    pub delta: f64,
    pub lambda: f64,
    pub p_joint: f64,
    pub p_tail: f64,
    pub bound: f64,
    /// Standard error of the per-replicate difference `1_joint - c 1_tail`.
    pub stderr: f64,
    /// `P(Ψ* > λ) >= 50/R`: the row is asserted.
    pub asserted: bool,
}

impl GoodLambdaRow {
    pub fn holds(&self) -> bool {
        self.p_joint <= self.bound + 3.0 * self.stderr
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodLambda {
    pub replicates: usize,
    pub rows: Vec<GoodLambdaRow>,
}

impl GoodLambda {
    pub fn table(&self) -> Table {
        let mut t = Table::new(["delta", "lambda", "p_joint", "p_tail", "bound", "stderr", "asserted"]);
        for r in &self.rows {
            t.push(vec![
                r.delta.into(),
                r.lambda.into(),
                r.p_joint.into(),
                r.p_tail.into(),
                r.bound.into(),
                r.stderr.into(),
                r.asserted.into(),
            ]);
        }
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.asserted)
            .map(|(i, r)| {
                Contract::new(
                    "good_lambda",
                    Some(i),
                    r.holds(),
                    format!("delta={} lambda={}: {} <= {} (+3 stderr)", r.delta, r.lambda, r.p_joint, r.bound),
                )
            })
            .collect()
    }
}

/// `P(Ψ* > βλ, s(ψ) <= δλ) <= 3 exp(-(β-1)^2/(4δ^2)) P(Ψ* > λ)` for
/// `Ψ(t) = ∫_0^t f dW`, `s(ψ) = ‖f‖_{L^2(0,T)}`.
pub fn experiment_good_lambda(params: &GoodLambdaParams) -> Result<GoodLambda> {
    if !(params.beta > 1.0) {
        return Err(param(format!("beta must exceed 1, got {}", params.beta)));
    }
    if params.delta.is_empty() || params.delta.iter().any(|d| !(*d > 0.0)) {
        return Err(param("delta values must be positive"));
    }
    if !(params.t > 0.0) {
        return Err(param("horizon T must be positive"));
    }
    positive_count("steps", params.steps)?;
    if params.replicates < 100 {
        return Err(param("good-lambda experiment needs at least 100 replicates"));
    }
    let dt = params.t / params.steps as f64;
    let sd = dt.sqrt();
    let draws: Vec<(f64, f64)> = replicates(params.replicates, |r| {
        let mut g = substream(params.seed, stream_id(r, 0));
        let tau = match params.integrand {
            Integrand::RandomStop => params.t * g.gen::<f64>(),
            Integrand::Constant => params.t,
        };
        let full = ((tau / dt).floor() as usize).min(params.steps);
        let (mut w, mut m) = (0.0f64, 0.0f64);
        for _ in 0..full {
            w += sd * normal(&mut g);
            m = m.max(w.abs());
        }
        let rest = tau - full as f64 * dt;
        if rest > 0.0 {
            w += rest.sqrt() * normal(&mut g);
            m = m.max(w.abs());
        }
        (m, tau.sqrt())
    });
    let r_f = params.replicates as f64;
    let lambdas = match &params.lambda {
        Some(l) => l.clone(),
        None => {
            let mut sorted: Vec<f64> = draws.iter().map(|d| d.0).collect();
            sorted.sort_by(f64::total_cmp);
            let k = params.n_lambda.max(1);
            let (hi, lo) = (0.5f64, (100.0 / r_f).min(0.5));
            (0..k)
                .map(|i| {
                    let q = if k == 1 { hi } else { hi * (lo / hi).powf(i as f64 / (k - 1) as f64) };
                    let idx = ((1.0 - q) * r_f).floor() as usize;
                    sorted[idx.min(sorted.len() - 1)]
                })
                .collect()
        }
    };
    let mut rows = Vec::new();
    for &delta in &params.delta {
        let c = 3.0 * (-(params.beta - 1.0).powi(2) / (4.0 * delta * delta)).exp();
        for &lambda in &lambdas {
            let diffs: Vec<f64> = draws
                .iter()
                .map(|&(m, s)| {
                    let joint = (m > params.beta * lambda && s <= delta * lambda) as u8 as f64;
                    let tail = (m > lambda) as u8 as f64;
                    joint - c * tail
                })
                .collect();
            let p_joint = draws.iter().filter(|&&(m, s)| m > params.beta * lambda && s <= delta * lambda).count() as f64 / r_f;
            let p_tail = draws.iter().filter(|&&(m, _)| m > lambda).count() as f64 / r_f;
            let (_, var) = mean_var(&diffs);
            rows.push(GoodLambdaRow {
                delta,
                lambda,
                p_joint,
                p_tail,
                bound: c * p_tail,
                stderr: (var / r_f).sqrt(),
                asserted: p_tail >= 50.0 / r_f,
            });
        }
    }
    Ok(GoodLambda { replicates: params.replicates, rows })
}

// ---------------------------------------------------------------------------
// Brownian modulus of continuity.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyParams {
    pub n_steps: usize,
    pub h_list: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    /// Lags scanned per dyadic stride in the weighted sup.
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
}

fn default_p_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

fn default_max_lag() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevyRow {
    pub h: f64,
    /// Mean over replicates of `sup_{|r-s|<h} |ΔW| / sqrt(2h |ln h|)`.
    pub statistic: f64,
    pub stderr: f64,
    /// Mean unnormalized sup.
    pub raw_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSupRow {
    pub estimate: McEstimate,
    /// `estimate / sqrt(p)`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Levy {
    pub rows: Vec<LevyRow>,
    pub weighted: Vec<WeightedSupRow>,
    /// Smallest `C` with `estimate <= C sqrt(p)` for every `p`.
    pub c_fit: f64,
    /// `max ratio / min ratio - 1`.
    pub c_variation: f64,
    /// Raw sups are non-decreasing in `h` in every replicate.
    pub raw_monotone: bool,
}

impl Levy {
    pub fn tables(&self) -> (Table, Table) {
        let mut a = Table::new(["h", "statistic", "stderr", "raw_sup"]);
        for r in &self.rows {
            a.push(vec![r.h.into(), r.statistic.into(), r.stderr.into(), r.raw_sup.into()]);
        }
        let mut b = Table::new(mc_columns().into_iter().chain(["ratio_sqrt_p", "c_fit", "c_variation"]));
        for w in &self.weighted {
            let mut row = mc_cells(&w.estimate);
            row.extend([w.ratio.into(), self.c_fit.into(), self.c_variation.into()]);
            b.push(row);
        }
        (a, b)
    }

    pub fn contracts(&self) -> Vec<Contract> {
        vec![Contract::new(
            "levy_raw_sup_monotone_in_h",
            None,
            self.raw_monotone,
            "sup over |r-s|<h grows with h".to_string(),
        )]
    }
}

/// Lévy modulus statistic per window `h`, and the `L^p` norms of
/// `sup_{r<s} |W(s)-W(r)| / sqrt((s-r)(1 - ln(s-r)/2))` on `[0,1]`.
///
/// The weighted sup scans a dyadic multiscale pair family: at stride `2^j`
/// every pair of stride multiples with lag `ℓ 2^j`, `ℓ <= max_lag` (only
/// `ℓ > max_lag/2` for `j > 0`, smaller lags being covered by finer
/// strides). It is a lower bound for the full grid sup.
pub fn experiment_levy_modulus(params: &LevyParams) -> Result<Levy> {
    let n = params.n_steps;
    positive_count("n_steps", n)?;
    check_budget("Brownian path", n + 1)?;
    if params.replicates < 2 {
        return Err(param("need at least two replicates"));
    }
    let mut lags = Vec::new();
    for &h in &params.h_list {
        let m = h * n as f64;
        if !(h > 0.0 && h < 1.0) || (m - m.round()).abs() > 1e-9 * m.max(1.0) || m.round() < 2.0 {
            return Err(param(format!("h = {h} is not a multiple of the grid step >= 2/N")));
        }
        // |r - s| < h on the grid: lags up to hN - 1.
        lags.push(m.round() as usize - 1);
    }
    for &p in &params.p_list {
        check_p(p)?;
    }
    if params.max_lag < 2 {
        return Err(param("max_lag must be at least 2"));
    }
    let sd = (1.0 / n as f64).sqrt();
    let big_l = params.max_lag;
    let inv_den = |lag: usize| {
        let tau = lag as f64 / n as f64;
        1.0 / (tau * (1.0 - 0.5 * tau.ln())).sqrt()
    };
    let per_rep: Vec<(Vec<f64>, f64)> = replicates(params.replicates, |r| {
        let mut g = substream(params.seed, stream_id(r, 0));
        let mut w = Vec::with_capacity(n + 1);
        w.push(0.0f64);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sd * normal(&mut g);
            w.push(acc);
        }
        let max_lag = lags.iter().copied().max().unwrap_or(0);
        // raw[l] = max over lag exactly l.
        let mut raw = vec![0.0f64; max_lag + 1];
        for (l, slot) in raw.iter_mut().enumerate().skip(1) {
            *slot = w.iter().zip(&w[l..]).fold(0.0f64, |m, (a, b)| m.max((b - a).abs()));
        }
        for l in 1..raw.len() {
            raw[l] = raw[l].max(raw[l - 1]);
        }
        let raws: Vec<f64> = lags.iter().map(|&l| raw[l]).collect();

        let mut weighted = 0.0f64;
        let mut stride = 1usize;
        while stride <= n {
            let lo = if stride == 1 { 1 } else { big_l / 2 + 1 };
            let pts: Vec<f64> = w.iter().step_by(stride).copied().collect();
            for l in lo..=big_l {
                if l * stride > n {
                    break;
                }
                let c = inv_den(l * stride);
                let m = pts.iter().zip(&pts[l..]).fold(0.0f64, |m, (a, b)| m.max((b - a).abs()));
                weighted = weighted.max(m * c);
            }
            stride *= 2;
        }
        (raws, weighted)
    });

    let r_f = params.replicates as f64;
    let mut rows = Vec::new();
    let mut raw_monotone = true;
    let mut order: Vec<usize> = (0..lags.len()).collect();
    order.sort_by_key(|&i| lags[i]);
    for rep in &per_rep {
        raw_monotone &= order.windows(2).all(|w| rep.0[w[0]] <= rep.0[w[1]]);
    }
    for (i, &h) in params.h_list.iter().enumerate() {
        let norm = 1.0 / (2.0 * h * h.ln().abs()).sqrt();
        let stats: Vec<f64> = per_rep.iter().map(|rep| rep.0[i] * norm).collect();
        let (mean, var) = mean_var(&stats);
        let (raw_mean, _) = mean_var(&per_rep.iter().map(|rep| rep.0[i]).collect::<Vec<_>>());
        rows.push(LevyRow { h, statistic: mean, stderr: (var / r_f).sqrt(), raw_sup: raw_mean });
    }
    let sups: Vec<f64> = per_rep.iter().map(|rep| rep.1).collect();
    let weighted = params
        .p_list
        .iter()
        .map(|&p| {
            let estimate = McEstimate::from_samples(&sups, p, params.seed)?;
            Ok(WeightedSupRow { ratio: estimate.lp_value / p.sqrt(), estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_fit = weighted.iter().map(|w| w.ratio).fold(0.0, f64::max);
    let c_min = weighted.iter().map(|w| w.ratio).fold(f64::INFINITY, f64::min);
    Ok(Levy { rows, weighted, c_fit, c_variation: c_fit / c_min - 1.0, raw_monotone })
}

// ---------------------------------------------------------------------------
// Kolmogorov-Chentsov bound.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Brownian,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KcParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub grid_size: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "brownian")]
    pub process: Process,
}

fn brownian() -> Process {
    Process::Brownian
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KcBound {
    pub beta: f64,
    pub lhs: McEstimate,
    pub rhs: f64,
    /// `C_M^α` for the grid (dimension 1 closed-form constants).
    pub c_m_alpha: f64,
    /// `|Z|_{C^α(M, L^p)}`.
    pub lp_holder: f64,
}

impl KcBound {
    pub fn holds(&self) -> bool {
        self.lhs.below(self.rhs, 3.0)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["beta"].into_iter().chain(mc_columns()).chain(["rhs", "c_m_alpha", "lp_holder"]));
        let mut row = vec![self.beta.into()];
        row.extend(mc_cells(&self.lhs));
        row.extend([self.rhs.into(), self.c_m_alpha.into(), self.lp_holder.into()]);
        t.push(row);
        t
    }

    pub fn contracts(&self) -> Vec<Contract> {
        vec![Contract::new(
            "kc_lhs_le_rhs",
            Some(0),
            self.holds(),
            format!("beta={}: {} <= {} (+3 stderr)", self.beta, self.lhs.lp_value, self.rhs),
        )]
    }
}

/// `(E|N(0,1)|^p)^(1/p) = (2^(p/2) Γ((p+1)/2) / sqrt(π))^(1/p)`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    let ln = 0.5 * p * 2f64.ln() + statrs::function::gamma::ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln();
    (ln / p).exp()
}

/// `((α-β)/(α-1/p-β))^(1/p)`: the moment factor for `‖sup_n n^β Ψ_n‖_p`
/// given `sup_n n^α ‖Ψ_n‖_p`.
pub fn weighted_sup_factor(p: f64, alpha: f64, beta: f64) -> Result<f64> {
    let gap = alpha - 1.0 / p - beta;
    if !(p >= 1.0 && beta >= 0.0 && gap > 0.0) {
        return Err(param(format!("need beta in [0, alpha - 1/p), got alpha={alpha}, beta={beta}, p={p}")));
    }
    Ok(((alpha - beta) / gap).powf(1.0 / p))
}

/// `‖|Z|_{C^β}‖_p` on a uniform grid of `[0,1]` against
/// `24 C_M^α β^-1 ((α-β)/(α-1/p-β))^(1/p) Δ^(α-β) |Z|_{C^α(M,L^p)}`.
pub fn experiment_kc_bound(params: &KcParams) -> Result<KcBound> {
    let KcParams { alpha, beta, p, grid_size, .. } = *params;
    let d = 1.0;
    if !(p > d) {
        return Err(param(format!("need p > d = 1, got {p}")));
    }
    if !(alpha > d / p && alpha < 1.0) {
        return Err(param(format!("alpha must lie in (d/p, 1), got {alpha}")));
    }
    if !(beta > 0.0 && beta < alpha - d / p) {
        return Err(param(format!("beta must lie in (0, alpha - d/p) = (0, {}), got {beta}", alpha - d / p)));
    }
    if grid_size < 2 {
        return Err(param("grid needs at least two points"));
    }
    let xs: Vec<f64> = (0..grid_size).map(|i| i as f64 / (grid_size - 1) as f64).collect();
    let space = MetricSpace::from_coords(xs, 1, Metric::Euclidean)?;
    let table = WeightTable::new(&space, &Modulus::power(beta)?)?;
    let h = 1.0 / (grid_size - 1) as f64;
    let sd = h.sqrt();
    let samples: Vec<f64> = replicates(params.replicates, |r| {
        let z: Vec<f64> = match params.process {
            Process::Constant => vec![1.0; grid_size],
            Process::Brownian => {
                let mut g = substream(params.seed, stream_id(r, 0));
                let mut acc = 0.0;
                std::iter::once(0.0)
                    .chain((1..grid_size).map(|_| {
                        acc += sd * normal(&mut g);
                        acc
                    }))
                    .collect()
            }
        };
        // Δ = 1, so the normalized seminorm is the plain C^β seminorm.
        let f = SampledField::scalar(z).expect("finite path");
        table.seminorm(&f).expect("matching shape").value
    });
    let lhs = McEstimate::from_samples(&samples, p, params.seed)?;
    let lp_holder = match params.process {
        Process::Constant => 0.0,
        // ‖B(x)-B(y)‖_p = μ_p |x-y|^(1/2); sup of |x-y|^(1/2-α) over grid lags.
        Process::Brownian => {
            let e = 0.5 - alpha;
            gaussian_abs_moment(p) * if e >= 0.0 { 1.0 } else { h.powf(e) }
        }
    };
    let c_m_alpha = kc_space_constant(alpha, &DimensionInfo::euclidean(1)?)?;
    let rhs = 24.0 * c_m_alpha / beta * weighted_sup_factor(p, alpha, beta)? * lp_holder;
    Ok(KcBound { beta, lhs, rhs, c_m_alpha, lp_holder })
}

/// `C_M^α`: the upper embedding constant for `w = x^α`.
pub fn kc_space_constant(alpha: f64, dims: &DimensionInfo) -> Result<f64> {
    let r = alpha.exp2();
    Ok(embedding_constants(GrowthConstants { c_w: r, d_w: r }, dims)?.upper)
}
