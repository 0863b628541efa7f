use chainbound::chaining::ChainingNet;
use chainbound::holder::{sandwich, seminorm_exact, SampledField};
use chainbound::mc::McEstimate;
use chainbound::metric::{DimensionInfo, Metric, MetricSpace};
use chainbound::modulus::{Admissible, DyadicGrid, Modulus};
use chainbound::pam::{green_eval, parabolic_metric};
use chainbound::samples::{random_field, FieldKind};
use chainbound::stochastic::weighted_sup_factor;
use proptest::prelude::*;

fn cloud() -> impl Strategy<Value = MetricSpace> {
    (3usize..60)
        .prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, 2 * n))
        .prop_filter_map("coincident points", |c| MetricSpace::from_coords(c, 2, Metric::Euclidean).ok())
}

fn net_of(space: &MetricSpace) -> ChainingNet {
    ChainingNet::build(space, DimensionInfo::euclidean(2).unwrap(), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parabolic_metric_is_a_metric(
        a in (0.0f64..1.0, 0.0f64..1.0),
        b in (0.0f64..1.0, 0.0f64..1.0),
        c in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let d = parabolic_metric;
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn green_kernel_is_symmetric(t in 1e-4f64..1.0, x in 0.0f64..1.0, y in 0.0f64..1.0, k in 1usize..80) {
        prop_assert_eq!(green_eval(t, x, y, k).unwrap(), green_eval(t, y, x, k).unwrap());
    }

    #[test]
    fn power_moduli_are_admissible(alpha in 0.05f64..1.0) {
        let grid = DyadicGrid::default();
        let w = Modulus::power(alpha).unwrap();
        let report = w.check_admissible(&grid, Admissible::DEFAULT_TOL);
        prop_assert!(report.pass);
        let g = report.constants.unwrap();
        prop_assert!(g.d_w > 1.0 && g.d_w <= g.c_w);
        prop_assert!((g.c_w - 2f64.powf(alpha)).abs() < 1e-9 * g.c_w);
    }

    #[test]
    fn log_damped_constants_are_ordered(alpha in 0.1f64..0.9, beta in 0.0f64..2.0, gamma in 0.5f64..4.0) {
        let w = Modulus::log_damped(beta, gamma, Modulus::power(alpha).unwrap()).unwrap();
        let report = w.check_admissible(&DyadicGrid::default(), Admissible::DEFAULT_TOL);
        if let Some(g) = report.constants {
            prop_assert!(g.d_w <= g.c_w);
        }
    }

    #[test]
    fn nets_satisfy_their_invariants(space in cloud()) {
        let report = net_of(&space).verify();
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn chains_telescope(space in cloud(), seed in any::<u64>(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let net = net_of(&space);
        let (x, y) = (i.index(space.len()), j.index(space.len()));
        prop_assume!(x != y);
        let chain = net.chain_decompose(x, y).unwrap();
        let mut mult = vec![0i64; space.len()];
        for (z, s) in chain.signed_terms() {
            mult[z] += s;
        }
        for (z, &m) in mult.iter().enumerate() {
            prop_assert_eq!(m, i64::from(z == x) - i64::from(z == y));
        }
        let f = random_field(&space, FieldKind::Brownian, seed).unwrap();
        let v = |z: usize| f.value(z)[0];
        prop_assert!((chain.telescope(v) - (v(x) - v(y))).abs() < 1e-9);
    }

    #[test]
    fn sandwich_holds_on_random_fields(space in cloud(), seed in any::<u64>(), alpha in 0.2f64..1.0) {
        let net = net_of(&space);
        let w = Modulus::power(alpha).unwrap();
        for kind in FieldKind::ALL {
            let f = random_field(&space, kind, seed).unwrap();
            let s = sandwich(&net, &f, &w).unwrap();
            prop_assert!(s.holds(), "{:?}", s);
        }
    }

    #[test]
    fn seminorm_is_absolutely_homogeneous(space in cloud(), seed in any::<u64>(), c in -4.0f64..4.0) {
        let w = Modulus::power(0.5).unwrap();
        let f = random_field(&space, FieldKind::Lipschitz, seed).unwrap();
        let g = SampledField::scalar((0..f.len()).map(|i| c * f.value(i)[0]).collect()).unwrap();
        let a = seminorm_exact(&space, &f, &w).unwrap().value;
        let b = seminorm_exact(&space, &g, &w).unwrap().value;
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + a));
    }

    /// Columns normalised to `‖Ψ_n‖_p = n^-α` under the empirical measure.
    #[test]
    fn weighted_sup_moment_lemma(
        raw in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 12), 2..40),
        p in 1.5f64..8.0,
        alpha in 0.8f64..2.0,
        frac in 0.0f64..0.95,
    ) {
        let beta = frac * (alpha - 1.0 / p);
        let r = raw.len() as f64;
        let cols = raw[0].len();
        let mut rows = raw.clone();
        for n in 0..cols {
            let norm = (raw.iter().map(|row| row[n].powf(p)).sum::<f64>() / r).powf(1.0 / p);
            let target = ((n + 1) as f64).powf(-alpha);
            for row in rows.iter_mut() {
                row[n] *= target / norm;
            }
        }
        let sup: f64 = rows
            .iter()
            .map(|row| {
                row.iter().enumerate().map(|(n, v)| ((n + 1) as f64).powf(beta) * v).fold(0.0, f64::max).powf(p)
            })
            .sum::<f64>()
            / r;
        prop_assert!(sup.powf(1.0 / p) <= weighted_sup_factor(p, alpha, beta).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn mc_estimate_is_deterministic_and_bracketed(xs in prop::collection::vec(-10.0f64..10.0, 2..200), p in 1.0f64..8.0, seed in any::<u64>()) {
        let a = McEstimate::from_samples(&xs, p, seed).unwrap();
        prop_assert_eq!(a, McEstimate::from_samples(&xs, p, seed).unwrap());
        let mean_abs = xs.iter().map(|x| x.abs()).sum::<f64>() / xs.len() as f64;
        let max_abs = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(a.lp_value >= mean_abs * (1.0 - 1e-12) && a.lp_value <= max_abs * (1.0 + 1e-12));
        prop_assert!(a.stderr >= 0.0);
    }
}
