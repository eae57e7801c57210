//! Property tests of the structural invariants.

use proptest::prelude::*;
use vdheun::coupling::{couplings_equal, Coupling, CouplingJson};
use vdheun::quad::gauss_rule;
use vdheun::specfun::{c64, eval_g, eval_r_alpha};
use vdheun::{Params, Sign, TruncationPolicy};

fn params_strategy() -> impl Strategy<Value = Params> {
    (0.4f64..2.0, 0.3f64..1.5, 0.3f64..1.5)
        .prop_map(|(r, ap, am)| Params::new(r, ap, am).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_is_an_involution_preserving_sigma(
        p in params_strategy(),
        g in prop::array::uniform8(-0.8f64..0.8),
    ) {
        let c = Coupling::real(&p, g).unwrap();
        let d = c.dual();
        prop_assert!((d.sigma() - c.sigma()).abs() < 1e-12);
        prop_assert!(couplings_equal(&d.dual(), &c));
    }

    #[test]
    fn coupling_json_round_trip(
        g in prop::array::uniform8(-0.8f64..0.8),
        mixed in any::<bool>(),
    ) {
        let p = Params::new(1.0, 0.7, 1.1).unwrap();
        let c = if mixed {
            Coupling::mixed(&p, g, [0, 0, 0, 0, 1, -1, 1, -1]).unwrap()
        } else {
            Coupling::real(&p, g).unwrap()
        };
        let json = serde_json::to_string(&c).unwrap();
        let parsed: CouplingJson = serde_json::from_str(&json).unwrap();
        let back = Coupling::from_json(&p, &parsed).unwrap();
        prop_assert!(couplings_equal(&back, &c));
        prop_assert_eq!(back.units(), c.units());
    }

    #[test]
    fn even_flips_preserve_pi_tilde_and_flip_sigma_sign_under_full_reversal(
        p in params_strategy(),
        g in prop::array::uniform8(-0.5f64..0.5),
        mask in any::<u8>(),
    ) {
        let scale = 0.9 * p.a();
        let g = g.map(|v| v * scale);
        let c = Coupling::real(&p, g).unwrap();
        prop_assert!(c.in_pi_tilde(&p));
        let mask = mask & !1u8 | ((mask.count_ones() % 2) as u8); // force even
        let img = c.flip(mask);
        prop_assert!(img.in_pi_tilde(&p));
        let full = c.flip(0xff);
        prop_assert!((full.sigma() + c.sigma()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_integrates_periodic_modes_exactly(
        p in params_strategy(),
        k in 1u32..6,
    ) {
        let rule = gauss_rule(&p, 64).unwrap();
        // int_0^{pi/2r} cos(4 k r x) dx = 0 for k >= 1
        let vals: Vec<f64> = rule.nodes.iter().map(|&x| (4.0 * k as f64 * p.r * x).cos()).collect();
        prop_assert!(rule.integrate(&vals).abs() < 1e-12);
    }

    #[test]
    fn g_reflection_on_random_params(
        p in params_strategy(),
        re in -1.0f64..1.0,
        im in -0.5f64..0.5,
    ) {
        let t = TruncationPolicy::default();
        let z = c64(re, im * p.a());
        if vdheun::specfun::dist_to_g_poles(&p, z) > 0.05
            && vdheun::specfun::dist_to_g_zeros(&p, z) > 0.05
        {
            let g1 = eval_g(&p, &t, z).unwrap();
            let g2 = eval_g(&p, &t, -z).unwrap();
            prop_assert!((g1 * g2 - c64(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn r_function_even_and_periodic(
        p in params_strategy(),
        re in -1.0f64..1.0,
        im in -0.2f64..0.2,
    ) {
        let t = TruncationPolicy::default();
        let z = c64(re, im);
        for s in [Sign::Plus, Sign::Minus] {
            let alpha = p.a_sign(s);
            let a = eval_r_alpha(&p, &t, alpha, z).unwrap();
            let b = eval_r_alpha(&p, &t, alpha, -z).unwrap();
            let c = eval_r_alpha(&p, &t, alpha, z + p.period()).unwrap();
            prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
            prop_assert!((a - c).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}
