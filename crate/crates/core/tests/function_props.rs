mod common;

use ballinterp::function::{dbar_fd, norm_pa, pairing_ball, square_sum_norm, Fun, SpaceParams};
use ballinterp::kernels::{reproducing_kernel, KernelParams};
use ballinterp::quadrature::{build_ball_rule, build_sphere_rule};
use ballinterp::sampling;
use common::c;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_is_absolutely_homogeneous(seed in any::<u64>(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let mut rng = sampling::rng(seed);
        let f = Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3));
        let scale = c(re, im);
        for (params, rule) in [
            (SpaceParams::new(2, 3.0, 0.5).unwrap(), build_ball_rule(2, 0.5, 16, 10).unwrap()),
        ] {
            let a = norm_pa(&f.scale(scale), &params, &rule).unwrap();
            let b = scale.norm() * norm_pa(&f, &params, &rule).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
        let hardy = SpaceParams::hardy(2, 3.0).unwrap();
        let sr = build_sphere_rule(2, 12).unwrap();
        let a = norm_pa(&f.scale(scale), &hardy, &sr).unwrap();
        let b = scale.norm() * norm_pa(&f, &hardy, &sr).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn self_pairing_is_the_squared_norm(seed in any::<u64>(), len in 1usize..4) {
        let mut rng = sampling::rng(seed);
        let params = SpaceParams::new(2, 2.0, 1.0).unwrap();
        let rule = build_ball_rule(2, params.weight_exponent(), 16, 10).unwrap();
        let u: Vec<Fun> = (0..len).map(|_| Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3))).collect();
        let pairing = pairing_ball(&u, &u, &params, &rule).unwrap();
        let norm_sq = square_sum_norm(&u, &params, &rule).unwrap();
        prop_assert!(pairing.im.abs() <= 1e-10 * norm_sq);
        prop_assert!((pairing.re - norm_sq).abs() <= 1e-10 * (1.0 + norm_sq));
    }
}

#[test]
fn dbar_of_holomorphic_functions_converges() {
    // kernel functions have nonzero third derivatives, so the O(h²) term is visible
    let kp = KernelParams::new(SpaceParams::new(2, 2.0, 1.0).unwrap()).unwrap();
    let mut rng = sampling::rng(11);
    for _ in 0..10 {
        let w = sampling::ball_point(&mut rng, 2, 0.5);
        let f = Fun::holomorphic(2, move |z| reproducing_kernel(&w, z, &kp).unwrap());
        let z = sampling::ball_point(&mut rng, 2, 0.5);
        let res = |h: f64| dbar_fd(&f, &z, h).unwrap().iter().map(|d| d.norm()).fold(0.0, f64::max);
        let (r1, r2) = (res(1e-2), res(5e-3));
        assert!(res(1e-4) <= 1e-6, "{} {} {}", res(1e-4), res(1e-3), f.eval(&z));
        assert!((r1 / r2).log2() >= 1.8, "{r1} {r2}");
    }
}
