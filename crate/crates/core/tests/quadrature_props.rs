mod common;

use ballinterp::poly::{MultiIndex, Poly};
use std::sync::OnceLock;

use ballinterp::quadrature::{
    build_ball_rule, build_sphere_rule, forelli_check, integrate_ball, pairwise_sum, sphere_moment, weighted_mass,
    BallRule, Quadrature, SphereRule, DEFAULT_ANGULAR, DEFAULT_RADIAL,
};
use ballinterp::sampling;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

/// ∫|w₁|^{2m} ρ^c dν_n = n!/(n−1)! · B(m+1, n−1) mixed with the radial Beta integral, written out.
fn ball_moment(n: usize, m: u32, c: f64) -> f64 {
    // ∫_𝔹 |w₁|^{2m} ρ^c dν = n ∫₀¹ r^{2n−1+2m} (1−r²)^c dr · ∫_S |ζ₁|^{2m} dσ
    let nf = n as f64;
    let mf = m as f64;
    let radial = 0.5 * (ln_gamma(nf + mf) + ln_gamma(c + 1.0) - ln_gamma(nf + mf + c + 1.0)).exp();
    let sphere = (ln_gamma(nf) + ln_gamma(mf + 1.0) - ln_gamma(nf + mf)).exp();
    2.0 * nf * radial * sphere
}

#[test]
fn rules_have_positive_weights_summing_to_one() {
    for (n, degree) in [(1, 16), (2, 16), (3, 12), (4, 8)] {
        let sr = build_sphere_rule(n, degree).unwrap();
        assert!(sr.weights().iter().all(|w| *w > 0.0));
        let terms: Vec<ballinterp::C64> = sr.weights().iter().map(|w| (*w).into()).collect();
        assert!((pairwise_sum(&terms).re - 1.0).abs() <= 1e-12, "n={n}");
        for c in [-0.5, 0.0, 1.0, 2.0] {
            let br = build_ball_rule(n, c, 16, 8).unwrap();
            assert!(br.weights().iter().all(|w| *w > 0.0));
            let terms: Vec<ballinterp::C64> = br.weights().iter().map(|w| (*w).into()).collect();
            let mass = pairwise_sum(&terms).re;
            assert!((mass / weighted_mass(n, c) - 1.0).abs() <= 1e-12, "n={n} c={c}: {}", mass / weighted_mass(n, c) - 1.0);
        }
    }
}

#[test]
fn ball_moments_match_beta_integrals() {
    for n in 1..=2 {
        for ap in [1.0, 2.0, 3.0] {
            let c = ap - 1.0;
            let rule = build_ball_rule(n, c, DEFAULT_RADIAL, DEFAULT_ANGULAR).unwrap();
            for m in 0..=4 {
                let q = integrate_ball(|w| ballinterp::C64::new(w.coords()[0].norm_sqr().powi(m as i32), 0.0), &rule)
                    .unwrap()
                    .re;
                let exact = ball_moment(n, m, c);
                assert!((q / exact - 1.0).abs() <= 1e-8, "n={n} αp={ap} m={m}: {q} vs {exact}");
            }
            // ∫ρ^{αp−1}dν = Γ(n+1)Γ(αp)/Γ(n+αp)
            let mass = (ln_gamma(n as f64 + 1.0) + ln_gamma(ap) - ln_gamma(n as f64 + ap)).exp();
            assert!((rule.weights().iter().sum::<f64>() / mass - 1.0).abs() <= 1e-8);
        }
    }
}

/// Rules for the Forelli check with n = 2, l = 2; degree 6 covers integrands of total degree ≤ 4.
fn forelli_rules() -> &'static (SphereRule, BallRule) {
    static RULES: OnceLock<(SphereRule, BallRule)> = OnceLock::new();
    RULES.get_or_init(|| (build_sphere_rule(4, 6).unwrap(), build_ball_rule(2, 1.0, 16, 12).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_rule_integrates_monomial_moments(e1 in 0u32..4, e2 in 0u32..4) {
        let sr = build_sphere_rule(2, 16).unwrap();
        let theta = MultiIndex::new([e1, e2]);
        let mono = Poly::monomial(theta.clone(), ballinterp::C64::new(1.0, 0.0));
        let q = ballinterp::quadrature::integrate_sphere(|z| mono.eval(z).norm_sqr().into(), &sr).unwrap().re;
        prop_assert!((q - sphere_moment(&theta)).abs() <= 1e-12);
    }

    #[test]
    fn forelli_holds_for_random_polynomials(seed in any::<u64>()) {
        let (sr, br) = forelli_rules();
        let mut rng = sampling::rng(seed);
        let p = sampling::random_poly(&mut rng, 2, 0, 4);
        let (lhs, rhs) = forelli_check(|z| p.eval(z), 2, 2, sr, br).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-6 * (1.0 + lhs.norm()));
        // non-holomorphic integrand of total degree 4
        let (u, v) = (sampling::random_poly(&mut rng, 2, 0, 2), sampling::random_poly(&mut rng, 2, 0, 2));
        let (lhs, rhs) = forelli_check(|z| u.eval(z) * v.eval(z).conj(), 2, 2, sr, br).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-6 * (1.0 + lhs.norm()));
    }
}
