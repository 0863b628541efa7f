//! Generalized Hölder seminorms on sampled fields: the exact pair maximum,
//! the embedded maximum over a net's pair sequence, and the constants that
//! sandwich one by the other.

use serde::Serialize;

use crate::chaining::ChainingNet;
use crate::error::{param, Error, Result};
use crate::metric::{DimensionInfo, MetricSpace};
use crate::modulus::{Admissible, DyadicGrid, GrowthConstants, Modulus};

/// Values of a scalar or fixed-dimension vector field on the points of a
/// space, indexed by point id. Vectors use the Euclidean norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledField {
    values: Vec<f64>,
    dim: usize,
}

impl SampledField {
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::vector(values, 1)
    }

    pub fn vector(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::Shape { expected: dim.max(1), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(param("field values must be finite"));
        }
        Ok(Self { values, dim })
    }

    /// Number of points carrying a value.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// `‖f(i) - f(j)‖`.
    #[inline]
    pub fn diff(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            (self.values[i] - self.values[j]).abs()
        } else {
            self.value(i).iter().zip(self.value(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
    }

    fn check_on(&self, space: &MetricSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::Shape { expected: space.len(), got: self.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeminormResult {
    pub value: f64,
    /// A pair attaining the maximum; `None` for a constant field.
    pub witness: Option<(usize, usize)>,
    pub weight: String,
}

/// Precomputed `1/w(d(x,y)/Δ)` over all pairs `x > y`, for evaluating many
/// fields against one weight.
pub struct WeightTable {
    n: usize,
    inv_w: Vec<f64>,
    weight: String,
}

impl WeightTable {
    pub fn new(space: &MetricSpace, w: &Modulus) -> Result<Self> {
        w.validate()?;
        let n = space.len();
        let inv_diam = 1.0 / space.diameter();
        let mut inv_w = Vec::with_capacity(n * (n - 1) / 2);
        for i in 1..n {
            for j in 0..i {
                inv_w.push(1.0 / w.at(space.distance(i, j) * inv_diam));
            }
        }
        Ok(Self { n, inv_w, weight: w.to_string() })
    }

    pub fn seminorm(&self, f: &SampledField) -> Result<SeminormResult> {
        if f.len() != self.n {
            return Err(Error::Shape { expected: self.n, got: f.len() });
        }
        let (mut best, mut witness) = (0.0, None);
        let mut idx = 0;
        for i in 1..self.n {
            for j in 0..i {
                let r = f.diff(i, j) * self.inv_w[idx];
                idx += 1;
                if r > best {
                    best = r;
                    witness = Some((j, i));
                }
            }
        }
        Ok(SeminormResult { value: best, witness, weight: self.weight.clone() })
    }
}

/// `max ‖f(x) - f(y)‖ / w(d(x,y)/Δ)` over distinct pairs.
pub fn seminorm_exact(space: &MetricSpace, f: &SampledField, w: &Modulus) -> Result<SeminormResult> {
    f.check_on(space)?;
    w.validate()?;
    let inv_diam = 1.0 / space.diameter();
    let (mut best, mut witness) = (0.0, None);
    for i in 1..space.len() {
        for j in 0..i {
            let num = f.diff(i, j);
            if num == 0.0 {
                continue;
            }
            let r = num / w.at(space.distance(i, j) * inv_diam);
            if r > best {
                best = r;
                witness = Some((j, i));
            }
        }
    }
    Ok(SeminormResult { value: best, witness, weight: w.to_string() })
}

/// `Δ^-α |f|_{C_{w_α}}`: the plain sup of `‖f(x)-f(y)‖ / d(x,y)^α`.
pub fn holder_seminorm_alpha(space: &MetricSpace, f: &SampledField, alpha: f64) -> Result<f64> {
    let w = Modulus::power(alpha)?;
    Ok(space.diameter().powf(-alpha) * seminorm_exact(space, f, &w)?.value)
}

/// `sup_k ‖f(x_k) - f(y_k)‖ / w(k^(-1/d))` over the net's pair sequence with
/// `d = net.dims().d`. Dummy pairs contribute zero and are skipped.
pub fn seminorm_embedded(f: &SampledField, net: &ChainingNet, w: &Modulus) -> Result<SeminormResult> {
    w.validate()?;
    if f.len() < net.space().len() {
        let missing = (f.len()..net.space().len()).find(|&i| net.entry_level(i).is_some());
        if let Some(i) = missing {
            return Err(Error::NotNetPoint(i));
        }
    }
    let inv_d = -1.0 / net.dims().d;
    let (mut best, mut witness) = (0.0, None);
    for (k, a, b) in net.edge_pairs() {
        let num = f.diff(a, b);
        if num == 0.0 {
            continue;
        }
        let r = num / w.at((k as f64).powf(inv_d));
        if r > best {
            best = r;
            witness = Some((a, b));
        }
    }
    Ok(SeminormResult { value: best, witness, weight: w.to_string() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingConstants {
    /// `3 c_w d_w / (d_w - 1)`: exact ≤ lower · embedded.
    pub lower: f64,
    /// `c_w (c 3^(2d+1) d^-1 n2^4)^(log2(c_w)/d)`: embedded ≤ upper · exact.
    pub upper: f64,
}

pub fn embedding_constants(g: GrowthConstants, dims: &DimensionInfo) -> Result<EmbeddingConstants> {
    let GrowthConstants { c_w, d_w } = g;
    if !(d_w > 1.0) {
        return Err(Error::NotAdmissible { d_w });
    }
    if d_w > c_w {
        return Err(param(format!("growth constants out of order: d_w = {d_w} > c_w = {c_w}")));
    }
    dims.validate()?;
    let d = dims.d;
    let base = dims.c * 3f64.powf(2.0 * d + 1.0) / d * dims.n2_pow4();
    Ok(EmbeddingConstants { lower: 3.0 * c_w * d_w / (d_w - 1.0), upper: c_w * base.powf(c_w.log2() / d) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    pub exact: SeminormResult,
    pub embedded: SeminormResult,
    pub constants: EmbeddingConstants,
    pub growth: GrowthConstants,
    /// `exact <= lower * embedded`
    pub lower_holds: bool,
    /// `embedded <= upper * exact`
    pub upper_holds: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Both sides of the seminorm equivalence for one field and weight. The
/// weight is certified on a grid deep enough to contain every dyadic scale
/// the net uses.
pub fn sandwich(net: &ChainingNet, f: &SampledField, w: &Modulus) -> Result<Sandwich> {
    let grid = sandwich_grid(net);
    let adm = Admissible::certify_on(w.clone(), &grid, Admissible::DEFAULT_TOL)?;
    let table = WeightTable::new(net.space(), w)?;
    sandwich_with(net, f, &adm, &table)
}

/// Grid with at least 14 octaves and two more than the net depth.
pub fn sandwich_grid(net: &ChainingNet) -> DyadicGrid {
    DyadicGrid { octaves: 14.max(net.depth() as u32 + 2), points_per_octave: 64 }
}

pub fn sandwich_with(net: &ChainingNet, f: &SampledField, w: &Admissible, table: &WeightTable) -> Result<Sandwich> {
    let exact = table.seminorm(f)?;
    let embedded = seminorm_embedded(f, net, w.modulus())?;
    let growth = w.constants();
    let constants = embedding_constants(growth, &net.dims())?;
    Ok(Sandwich {
        lower_holds: exact.value <= constants.lower * embedded.value,
        upper_holds: embedded.value <= constants.upper * exact.value,
        exact,
        embedded,
        constants,
        growth,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Blowup {
    pub lhs: f64,
    pub middle: f64,
    pub rhs: f64,
}

impl Blowup {
    pub fn holds(&self, grid_tol: f64) -> bool {
        self.lhs <= self.middle * (1.0 + grid_tol) && self.middle <= self.rhs
    }
}

/// Compares `|f|_{C_w}` for `w(x) = (1 - β ln x)^γ x^α*` with the blow-up
/// rate of the plain Hölder seminorms as `α ↑ α*`:
/// `lhs = (βγ/e)^γ |f|_w`, `middle = max_α (α*-α)^γ Δ^α |f|_{C^α}` over
/// `α_i = (i + 1/2) α*/α_grid`, `rhs = (α* + βγ/e)^γ |f|_w`.
pub fn log_blowup_equivalence(
    space: &MetricSpace,
    f: &SampledField,
    alpha_star: f64,
    gamma: f64,
    beta: f64,
    alpha_grid: usize,
) -> Result<Blowup> {
    if !(alpha_star > 0.0 && alpha_star < 1.0) {
        return Err(param(format!("alpha* must lie in (0,1), got {alpha_star}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(param(format!("gamma must be positive, got {gamma}")));
    }
    if !(beta > 0.0 && beta < alpha_star / gamma) {
        return Err(param(format!("beta must lie in (0, alpha*/gamma), got {beta}")));
    }
    if alpha_grid < 50 {
        return Err(param(format!("alpha grid needs at least 50 points, got {alpha_grid}")));
    }
    f.check_on(space)?;
    let w = Modulus::log_boosted(beta, gamma, Modulus::power(alpha_star)?)?;
    let sw = seminorm_exact(space, f, &w)?.value;
    let e_inv = (-1.0f64).exp();
    let lhs = (e_inv * beta * gamma).powf(gamma) * sw;
    let rhs = (alpha_star + e_inv * beta * gamma).powf(gamma) * sw;

    // Δ^α |f|_{C^α} = max over pairs of exp(ln‖Δf‖ - α ln(d/Δ)).
    let inv_diam = 1.0 / space.diameter();
    let mut logs = Vec::new();
    for i in 1..space.len() {
        for j in 0..i {
            let num = f.diff(i, j);
            if num > 0.0 {
                logs.push((num.ln(), (space.distance(i, j) * inv_diam).ln()));
            }
        }
    }
    let mut middle = 0.0f64;
    if !logs.is_empty() {
        for i in 0..alpha_grid {
            let alpha = (i as f64 + 0.5) * alpha_star / alpha_grid as f64;
            let m = logs.iter().map(|&(ln_num, ln_x)| ln_num - alpha * ln_x).fold(f64::NEG_INFINITY, f64::max);
            middle = middle.max((alpha_star - alpha).powf(gamma) * m.exp());
        }
    }
    Ok(Blowup { lhs, middle, rhs })
}
