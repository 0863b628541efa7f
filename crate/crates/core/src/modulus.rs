//! Moduli of continuity `w: (0,1] -> (0,inf)` and their dyadic growth constants
//! `c_w = sup w(x)/w(x/2)`, `d_w = inf w(x)/w(x/2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mc::Neumaier;

/// Closed-form moduli. Composite kinds wrap a `base` modulus.
///
/// Config files use tagged records, e.g.
/// `{kind = "log_pd", p = 2, d = 4, base = {kind = "power", alpha = 0.5}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulus {
    /// `x^alpha`, `alpha` in (0,1].
    Power { alpha: f64 },
    /// `lambda * base(x)`.
    Scaled { lambda: f64, base: Box<Modulus> },
    /// `(1 - beta ln x)^(-gamma) * base(x)`.
    LogDamped { beta: f64, gamma: f64, base: Box<Modulus> },
    /// `(1 - beta ln x)^gamma * base(x)`; monotone only for `beta < alpha/gamma`.
    LogBoosted { beta: f64, gamma: f64, base: Box<Modulus> },
    /// `(p - d ln x)^(-1/2) * base(x)`.
    LogPd { p: f64, d: f64, base: Box<Modulus> },
    /// `w = 1`. Degenerate: evaluable, never admissible.
    Constant,
}

impl Modulus {
    pub fn power(alpha: f64) -> Result<Self> {
        Self::Power { alpha }.validated()
    }

    pub fn scaled(lambda: f64, base: Modulus) -> Result<Self> {
        Self::Scaled { lambda, base: Box::new(base) }.validated()
    }

    pub fn log_damped(beta: f64, gamma: f64, base: Modulus) -> Result<Self> {
        Self::LogDamped { beta, gamma, base: Box::new(base) }.validated()
    }

    pub fn log_boosted(beta: f64, gamma: f64, base: Modulus) -> Result<Self> {
        Self::LogBoosted { beta, gamma, base: Box::new(base) }.validated()
    }

    pub fn log_pd(p: f64, d: f64, base: Modulus) -> Result<Self> {
        Self::LogPd { p, d, base: Box::new(base) }.validated()
    }

    /// Checks parameter ranges recursively. Deserialized values must pass
    /// through here before use.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidModulus(format!("{what} in {self}")));
        match self {
            Self::Power { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad("alpha must lie in (0,1]");
                }
            }
            Self::Scaled { lambda, base } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return bad("lambda must be positive");
                }
                base.validate()?;
            }
            Self::LogDamped { beta, gamma, base } | Self::LogBoosted { beta, gamma, base } => {
                if !(*beta > 0.0 && beta.is_finite() && *gamma > 0.0 && gamma.is_finite()) {
                    return bad("beta and gamma must be positive");
                }
                base.validate()?;
            }
            Self::LogPd { p, d, base } => {
                if !(*p >= 1.0 && p.is_finite() && *d > 0.0 && d.is_finite()) {
                    return bad("need p >= 1 and d > 0");
                }
                base.validate()?;
            }
            Self::Constant => {}
        }
        Ok(())
    }

    /// `w(x)` for `x` in (0,1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain { value: x, domain: "(0,1]" });
        }
        Ok(self.at(x))
    }

    /// `w(x)` without the domain check; callers guarantee `0 < x <= 1`.
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0 && x <= 1.0, "modulus evaluated at {x}");
        match self {
            Self::Power { alpha } => {
                if *alpha == 1.0 {
                    x
                } else if *alpha == 0.5 {
                    x.sqrt()
                } else {
                    x.powf(*alpha)
                }
            }
            Self::Scaled { lambda, base } => lambda * base.at(x),
            Self::LogDamped { beta, gamma, base } => {
                (1.0 - beta * x.ln()).powf(-gamma) * base.at(x)
            }
            Self::LogBoosted { beta, gamma, base } => {
                (1.0 - beta * x.ln()).powf(*gamma) * base.at(x)
            }
            Self::LogPd { p, d, base } => base.at(x) / (p - d * x.ln()).sqrt(),
            Self::Constant => 1.0,
        }
    }

    /// Growth constants on `grid`. Power is exact, Scaled inherits its base.
    pub fn growth_constants(&self, grid: &DyadicGrid) -> Result<GrowthConstants> {
        match self {
            Self::Power { alpha } => {
                let r = alpha.exp2();
                Ok(GrowthConstants { c_w: r, d_w: r })
            }
            Self::Scaled { base, .. } => base.growth_constants(grid),
            Self::Constant => Ok(GrowthConstants { c_w: 1.0, d_w: 1.0 }),
            _ => {
                let mut c_w = f64::NEG_INFINITY;
                let mut d_w = f64::INFINITY;
                for x in grid.points() {
                    let hi = self.at(x);
                    let lo = self.at(x / 2.0);
                    if !(hi > 0.0 && lo > 0.0 && hi.is_finite() && lo.is_finite()) {
                        return Err(Error::InvalidModulus(format!(
                            "non-positive or non-finite value near x = {x} for {self}"
                        )));
                    }
                    let r = hi / lo;
                    c_w = c_w.max(r);
                    d_w = d_w.min(r);
                }
                Ok(GrowthConstants { c_w, d_w })
            }
        }
    }

    pub fn check_admissible(&self, grid: &DyadicGrid, tol: f64) -> AdmissibilityReport {
        let mut positive = true;
        let mut monotone = true;
        let mut violation = None;
        let mut prev = f64::INFINITY;
        // Descending scan: values must not increase as x decreases.
        for x in grid.descending_with_halves() {
            let v = self.at(x);
            if !(v > 0.0 && v.is_finite()) {
                positive = false;
                violation.get_or_insert(x);
                break;
            }
            if v > prev && monotone {
                monotone = false;
                violation.get_or_insert(x);
            }
            prev = v;
        }
        let constants = if positive { self.growth_constants(grid).ok() } else { None };
        let pass = monotone
            && positive
            && constants.is_some_and(|g| g.d_w >= 1.0 + tol && g.c_w.is_finite() && g.d_w <= g.c_w);
        AdmissibilityReport {
            modulus: self.to_string(),
            positive,
            monotone,
            constants,
            first_violation: violation,
            pass,
        }
    }

    /// Dyadic tail estimate `sum_{k>=m} w(x/2^k) <= d_w/(d_w-1) w(x/2^m)`.
    pub fn dyadic_tail_bound(&self, x: f64, m: u32, grid: &DyadicGrid) -> Result<TailBound> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain { value: x, domain: "(0,1]" });
        }
        let GrowthConstants { d_w, .. } = self.growth_constants(grid)?;
        if d_w <= 1.0 {
            return Err(Error::NotAdmissible { d_w });
        }
        let first = self.at(x * (-(m as f64)).exp2());
        let mut sum = Neumaier::default();
        let mut k = m;
        loop {
            let arg = x * (-(k as f64)).exp2();
            if arg == 0.0 {
                break;
            }
            let term = self.at(arg);
            sum.add(term);
            if term <= 1e-17 * sum.value() {
                break;
            }
            k += 1;
        }
        Ok(TailBound { lhs: sum.value(), rhs: d_w / (d_w - 1.0) * first, terms: (k - m + 1) as usize })
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { alpha } => write!(f, "power({alpha})"),
            Self::Scaled { lambda, base } => write!(f, "scaled({lambda},{base})"),
            Self::LogDamped { beta, gamma, base } => write!(f, "log_damped({beta},{gamma},{base})"),
            Self::LogBoosted { beta, gamma, base } => write!(f, "log_boosted({beta},{gamma},{base})"),
            Self::LogPd { p, d, base } => write!(f, "log_pd({p},{d},{base})"),
            Self::Constant => write!(f, "constant"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub c_w: f64,
    pub d_w: f64,
}

/// Evaluation grid: `octaves` dyadic octaves of (0,1], each sampled at
/// `points_per_octave` log-uniform points. Every `2^-k`, `k < octaves`, is a
/// grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub octaves: u32,
    pub points_per_octave: u32,
}

impl Default for DyadicGrid {
    fn default() -> Self {
        Self { octaves: 14, points_per_octave: 64 }
    }
}

impl DyadicGrid {
    pub fn new(octaves: u32, points_per_octave: u32) -> Result<Self> {
        if octaves < 8 {
            return Err(param(format!("grid depth must be at least 8 octaves, got {octaves}")));
        }
        if points_per_octave == 0 {
            return Err(param("points_per_octave must be positive"));
        }
        Ok(Self { octaves, points_per_octave })
    }

    /// Points in descending order from 1 down to `2^-octaves` inclusive.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let p = self.points_per_octave;
        let total = self.octaves * p;
        (0..=total).map(move |i| {
            let (o, j) = (i / p, i % p);
            // Exact powers of two at octave boundaries.
            (-(o as f64)).exp2() * (-(j as f64) / p as f64).exp2()
        })
    }

    /// Descending grid extended by one octave, so every `x/2` used in a
    /// growth ratio is also scanned for monotonicity.
    fn descending_with_halves(&self) -> impl Iterator<Item = f64> + '_ {
        let ext = DyadicGrid { octaves: self.octaves + 1, points_per_octave: self.points_per_octave };
        let v: Vec<f64> = ext.points().collect();
        v.into_iter()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub modulus: String,
    pub positive: bool,
    pub monotone: bool,
    pub constants: Option<GrowthConstants>,
    /// First grid point where positivity or monotonicity failed.
    pub first_violation: Option<f64>,
    pub pass: bool,
}

impl AdmissibilityReport {
    /// Grid checks cannot certify continuity on all of (0,1]; a pass means
    /// the closed form is monotone with `1 + tol <= d_w <= c_w` on the grid.
    pub const SCOPE: &'static str = "grid-based certificate for closed-form moduli";
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub lhs: f64,
    pub rhs: f64,
    pub terms: usize,
}

/// A modulus that passed [`Modulus::check_admissible`], with its constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissible {
    modulus: Modulus,
    constants: GrowthConstants,
}

impl Admissible {
    pub const DEFAULT_TOL: f64 = 1e-6;

    pub fn certify(modulus: Modulus) -> Result<Self> {
        Self::certify_on(modulus, &DyadicGrid::default(), Self::DEFAULT_TOL)
    }

    pub fn certify_on(modulus: Modulus, grid: &DyadicGrid, tol: f64) -> Result<Self> {
        modulus.validate()?;
        let report = modulus.check_admissible(grid, tol);
        match (report.pass, report.constants) {
            (true, Some(constants)) => Ok(Self { modulus, constants }),
            (_, c) => Err(Error::NotAdmissible { d_w: c.map_or(f64::NAN, |c| c.d_w) }),
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn constants(&self) -> GrowthConstants {
        self.constants
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> DyadicGrid {
        DyadicGrid::default()
    }

    fn damped() -> Modulus {
        Modulus::log_damped(1.0, 1.0, Modulus::power(0.5).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(Modulus::power(0.5).unwrap().eval(0.25).unwrap(), 0.5);
        let w = Modulus::log_damped(1.0, 1.0, Modulus::power(1.0).unwrap()).unwrap();
        assert_eq!(w.eval(1.0).unwrap(), 1.0);
        let w = Modulus::log_pd(1.0, 1.0, Modulus::power(1.0).unwrap()).unwrap();
        let x = (-1.0f64).exp();
        assert!((w.eval(x).unwrap() - x / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn domain_is_half_open_unit_interval() {
        let w = Modulus::power(0.3).unwrap();
        for x in [0.0, -0.1, 1.0 + 1e-12, f64::NAN] {
            assert!(matches!(w.eval(x), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(Modulus::power(0.0).is_err());
        assert!(Modulus::power(1.1).is_err());
        assert!(Modulus::scaled(-1.0, Modulus::Constant).is_err());
        assert!(Modulus::log_pd(0.5, 1.0, Modulus::Constant).is_err());
        assert!(Modulus::log_damped(0.0, 1.0, Modulus::Constant).is_err());
    }

    #[test]
    fn power_constants_are_exact() {
        for alpha in [0.1, 0.3, 0.5, 0.7, 1.0] {
            let g = Modulus::power(alpha).unwrap().growth_constants(&grid()).unwrap();
            assert_eq!(g.c_w, alpha.exp2());
            assert_eq!(g.d_w, alpha.exp2());
        }
    }

    #[test]
    fn scaled_inherits_constants() {
        let base = damped();
        let s = Modulus::scaled(7.5, base.clone()).unwrap();
        assert_eq!(s.growth_constants(&grid()).unwrap(), base.growth_constants(&grid()).unwrap());
    }

    #[test]
    fn log_damped_constants_in_window() {
        for (beta, gamma, alpha) in [(1.0, 1.0, 0.5), (0.3, 2.0, 0.7), (2.0, 0.5, 0.2)] {
            let base = Modulus::power(alpha).unwrap();
            let w = Modulus::log_damped(beta, gamma, base).unwrap();
            let g = w.growth_constants(&DyadicGrid::new(12, 64).unwrap()).unwrap();
            let cb = alpha.exp2();
            assert!(g.d_w >= cb * (1.0 - 1e-12));
            assert!(g.c_w <= (1.0 + beta * 2f64.ln()).powf(gamma) * cb * (1.0 + 1e-12));
        }
    }

    #[test]
    fn admissibility_catalog() {
        let tol = Admissible::DEFAULT_TOL;
        assert!(Modulus::power(0.5).unwrap().check_admissible(&grid(), tol).pass);
        assert!(damped().check_admissible(&grid(), tol).pass);

        let boosted = Modulus::log_boosted(1.0, 1.0, Modulus::power(0.5).unwrap()).unwrap();
        let r = boosted.check_admissible(&grid(), tol);
        assert!(!r.pass && !r.monotone);
        // Fails right at the top of the interval.
        assert!(r.first_violation.unwrap() > 0.9);

        let ok = Modulus::log_boosted(0.2, 1.0, Modulus::power(0.5).unwrap()).unwrap();
        assert!(ok.check_admissible(&grid(), tol).pass);

        let c = Modulus::scaled(1.0, Modulus::Constant).unwrap().check_admissible(&grid(), tol);
        assert!(!c.pass);
        assert_eq!(c.constants.unwrap().d_w, 1.0);
        assert!(matches!(Admissible::certify(Modulus::Constant), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn tail_bound_geometric_equalities() {
        let t = Modulus::power(1.0).unwrap().dyadic_tail_bound(1.0, 0, &grid()).unwrap();
        assert!((t.lhs - 2.0).abs() < 1e-15 && t.rhs == 2.0);
        let t = Modulus::power(0.5).unwrap().dyadic_tail_bound(1.0, 0, &grid()).unwrap();
        let s = 2f64.sqrt();
        assert!((t.lhs - s / (s - 1.0)).abs() < 1e-13);
        assert!((t.rhs - 3.414213562373095).abs() < 1e-13);
        let t = damped().dyadic_tail_bound(1.0, 0, &grid()).unwrap();
        assert!(t.lhs <= t.rhs);
        assert!(matches!(
            Modulus::Constant.dyadic_tail_bound(1.0, 0, &grid()),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn config_record_round_trip() {
        let w: Modulus = serde_json::from_str(
            r#"{"kind":"log_pd","p":2,"d":4,"base":{"kind":"power","alpha":0.5}}"#,
        )
        .unwrap();
        assert_eq!(w, Modulus::log_pd(2.0, 4.0, Modulus::power(0.5).unwrap()).unwrap());
        let back: Modulus = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        let bad: Modulus = serde_json::from_str(r#"{"kind":"power","alpha":2}"#).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn grid_contains_dyadic_points() {
        let g = DyadicGrid::new(10, 7).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 71);
        for k in 0..=10 {
            assert!(pts.contains(&(-(k as f64)).exp2()));
        }
        assert!(pts.windows(2).all(|w| w[0] > w[1]));
    }
}
