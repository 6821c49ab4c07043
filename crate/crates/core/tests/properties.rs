use fattail::coefficients::SymbolFunctions;
use fattail::collision::CollisionOperator;
use fattail::grid::VelocityGrid;
use fattail::hypocoercivity::{apply_a, transport};
use fattail::model::{alpha_exponent, nash_profile, Kernel, ModelParams};
use fattail::sim::{fit_rate, RateModel};
use fattail::states::{mixed_state, seeded_rng, smooth_state};
use fattail::C64;
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

fn operators() -> &'static Vec<CollisionOperator> {
    static OPS: OnceLock<Vec<CollisionOperator>> = OnceLock::new();
    OPS.get_or_init(|| {
        [
            ModelParams::fokker_planck(1.0).unwrap(),
            ModelParams::scattering(2.0, Kernel::Separable, 0.5).unwrap(),
            ModelParams::scattering(1.0, Kernel::PowerDifference, 0.3).unwrap(),
            ModelParams::fractional(1.5, 0.7).unwrap(),
        ]
        .iter()
        .map(|p| CollisionOperator::build(Arc::new(VelocityGrid::build_default(p, 120).unwrap())).unwrap())
        .collect()
    })
}

fn state(op: &CollisionOperator, seed: u64) -> Vec<C64> {
    let mut rng = seeded_rng(seed);
    if seed % 2 == 0 {
        smooth_state(op.grid(), &mut rng, 5)
    } else {
        mixed_state(op.grid(), &mut rng)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(which in 0usize..4, seed in any::<u64>()) {
        let op = &operators()[which];
        let g = op.grid();
        let f = state(op, seed);
        let p = g.pi(&f);
        let pp = g.pi(&p);
        let err = p.iter().zip(&pp).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale = p.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn transport_is_skew(which in 0usize..4, s1 in any::<u64>(), s2 in any::<u64>(), lx in -4.0f64..3.0) {
        let op = &operators()[which];
        let g = op.grid();
        let xi = 10f64.powf(lx);
        let (f, h) = (state(op, s1), state(op, s2));
        let (tf, th) = (transport(g, xi, &f), transport(g, xi, &h));
        let scale = (g.norm2(&tf) * g.norm2(&h)).sqrt() + (g.norm2(&f) * g.norm2(&th)).sqrt();
        prop_assert!((g.dot(&tf, &h) + g.dot(&f, &th)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn a_is_bounded_by_half(which in 0usize..4, seed in any::<u64>(), lx in -6.0f64..4.0) {
        let op = &operators()[which];
        let g = op.grid();
        let sym = SymbolFunctions::new(&op.params, op.params.default_eta());
        let f = state(op, seed);
        let a = g.dot(&apply_a(g, &sym, 10f64.powf(lx), &f), &f);
        prop_assert!(a.norm() <= 0.5 * g.norm2(&f));
    }

    #[test]
    fn collisions_conserve_mass_and_dissipate(which in 0usize..4, seed in any::<u64>()) {
        let op = &operators()[which];
        let f = state(op, seed);
        let n2 = op.grid().norm2(&f);
        prop_assert!(op.mass_defect(&f) <= 1e-8);
        prop_assert!(op.quadratic_form(&f).re <= 1e-10 * n2);
    }

    #[test]
    fn fit_recovers_synthetic_power_law(tau in 0.05f64..3.0, c in -5.0f64..5.0) {
        let t: Vec<f64> = (0..41).map(|i| 10f64.powf(-1.0 + 5.0 * i as f64 / 40.0)).collect();
        let y: Vec<f64> = t.iter().map(|t| c.exp() * (1.0 + t).powf(-tau)).collect();
        let fit = fit_rate(&t, &y, RateModel::PowerLaw, None).unwrap();
        prop_assert!((fit.tau_hat - tau).abs() <= 1e-9);
        prop_assert!((fit.intercept - c).abs() <= 1e-8);
    }

    #[test]
    fn nash_profile_increases(a in 0.1f64..2.0, s in 1e-6f64..1e6, ds in 1e-3f64..1.0, d in 1usize..4) {
        prop_assert!(nash_profile(d, a, s * (1.0 + ds)).unwrap() > nash_profile(d, a, s).unwrap());
    }

    #[test]
    fn alpha_is_monotone_in_gamma(t in 0.01f64..6.0, dg in 0.0f64..3.0, beta in -0.9f64..3.0) {
        let g1 = t + (-beta).max(0.0);
        let (a1, a2) = (alpha_exponent(g1, beta).unwrap(), alpha_exponent(g1 + dg, beta).unwrap());
        prop_assert!(a1 <= a2 + 1e-15);
        prop_assert!(a2 > 0.0 && a2 <= 2.0);
    }

    #[test]
    fn grid_equilibrium_has_unit_mass(gamma in 0.1f64..6.0, d in 1usize..4) {
        let p = ModelParams::fokker_planck(gamma).unwrap().with_dim(d).unwrap();
        let g = VelocityGrid::build_default(&p, 100).unwrap();
        prop_assert!((g.mass_of_equilibrium() - 1.0).abs() <= 1e-10);
    }
}
