use ballinterp::function::{norm_pa, Fun, SpaceParams};
use ballinterp::geometry::{Automorphism, C64};
use ballinterp::kernels::{reproducing_kernel, t_a, Isometry, KernelParams};
use ballinterp::quadrature::{
    build_ball_rule, build_sphere_rule, forelli_check, integrate_ball, weighted_mass, Quadrature,
};
use ballinterp::sampling;
use statrs::function::gamma::ln_gamma;

use super::{Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const MOMENT_TOL: f64 = 1e-8;
pub const FORELLI_TOL: f64 = 1e-6;
pub const REPRODUCTION_TOL: f64 = 1e-4;
pub const ISOMETRY_TOL: f64 = 1e-3;
pub const WEIGHT_TOL: f64 = 1e-10;

const CASES: usize = 20;
const MAX_MOMENT: u32 = 4;
/// Evaluation points of the reproducing check stay inside this radius.
const REPRODUCTION_RADIUS: f64 = 0.7;
const ISOMETRY_RADIUS: f64 = 0.6;

/// ∫|w₁|^{2m} ρ^c dν_n = n·B(n+m, c+1)·(n−1)! m!/(n+m−1)!.
fn ball_moment(n: usize, m: u32, c: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let radial = (ln_gamma(nf + mf) + ln_gamma(c + 1.0) - ln_gamma(nf + mf + c + 1.0)).exp();
    let sphere = (ln_gamma(nf) + ln_gamma(mf + 1.0) - ln_gamma(nf + mf)).exp();
    nf * radial * sphere
}

/// Γ(n+1)Γ(αp)/Γ(n+αp).
fn mass_closed_form(n: usize, ap: f64) -> f64 {
    let nf = n as f64;
    (ln_gamma(nf + 1.0) + ln_gamma(ap) - ln_gamma(nf + ap)).exp()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let q = &ctx.cfg.quadrature;
    let mut section = Section::default();

    // moments and masses
    let mut moment_err: f64 = 0.0;
    let mut mass_err: f64 = 0.0;
    for n in 1..=2 {
        for ap in [1.0, 2.0, 3.0] {
            let rule = build_ball_rule(n, ap - 1.0, q.radial, q.angular).ctx("ball rule")?;
            for m in 0..=MAX_MOMENT {
                let v = integrate_ball(|w| C64::new(w.coords()[0].norm_sqr().powi(m as i32), 0.0), &rule)
                    .ctx("moment")?
                    .re;
                moment_err = moment_err.max(rel(v, ball_moment(n, m, ap - 1.0)));
            }
            let total: f64 = rule.weights().iter().sum();
            mass_err = mass_err.max(rel(total, mass_closed_form(n, ap)));
            mass_err = mass_err.max(rel(weighted_mass(n, ap - 1.0), mass_closed_form(n, ap)));
        }
    }
    section.push(Check::at_most("ball_moments", moment_err, MOMENT_TOL));
    section.push(Check::at_most("weighted_mass", mass_err, MOMENT_TOL));

    // slice integration over ∂𝔹⁴ against 𝔹² for n = 2, l = 2
    let sr = build_sphere_rule(4, 6).ctx("sphere rule")?;
    let br = build_ball_rule(2, 1.0, 16, 12).ctx("ball rule")?;
    let mut rng = sampling::rng(ctx.seed_for(11));
    let mut forelli: f64 = 0.0;
    for _ in 0..CASES {
        let p = sampling::random_poly(&mut rng, 2, 0, 4);
        let (lhs, rhs) = forelli_check(|z| p.eval(z), 2, 2, &sr, &br).ctx("forelli")?;
        forelli = forelli.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
        let (u, v) = (sampling::random_poly(&mut rng, 2, 0, 2), sampling::random_poly(&mut rng, 2, 0, 2));
        let (lhs, rhs) = forelli_check(|z| u.eval(z) * v.eval(z).conj(), 2, 2, &sr, &br).ctx("forelli")?;
        forelli = forelli.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    section.push(Check::at_most("forelli", forelli, FORELLI_TOL));

    // reproducing property
    let mut rng = sampling::rng(ctx.seed_for(12));
    let mut repro: f64 = 0.0;
    for ap in [1.0, 2.0, 3.0] {
        let kp = KernelParams::new(SpaceParams::new(2, 2.0, ap / 2.0).ctx("space")?).ctx("kernel")?;
        let rule = build_ball_rule(2, ap - 1.0, q.radial, q.angular).ctx("ball rule")?;
        for _ in 0..CASES {
            let p = sampling::random_poly(&mut rng, 2, 0, 4);
            let z = sampling::ball_point(&mut rng, 2, REPRODUCTION_RADIUS);
            // a kernel failure surfaces as a non-finite integral
            let nan = C64::new(f64::NAN, 0.0);
            let v = integrate_ball(|w| p.eval(w) * reproducing_kernel(w, &z, &kp).unwrap_or(nan), &rule);
            let v = v.ctx("reproduction")?;
            let fz = p.eval(&z);
            repro = repro.max((v - fz).norm() / (1.0 + fz.norm()));
        }
    }
    section.push(Check::at_most("reproducing_kernel", repro, REPRODUCTION_TOL));

    // T_a preserves norms; k_a(φ_a(z)) k_a(z) = 1
    let space = SpaceParams::new(2, 2.0, 1.0).ctx("space")?;
    let kp = KernelParams::new(space).ctx("kernel")?;
    let rule = build_ball_rule(2, space.weight_exponent(), 32, 32).ctx("ball rule")?;
    let mut rng = sampling::rng(ctx.seed_for(13));
    let mut iso_err: f64 = 0.0;
    let mut weight_err: f64 = 0.0;
    for _ in 0..CASES {
        let f = Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 4));
        let a = sampling::ball_point(&mut rng, 2, ISOMETRY_RADIUS);
        let lhs = norm_pa(&t_a(&f, &a, &kp).ctx("isometry")?, &space, &rule).ctx("norm")?;
        let rhs = norm_pa(&f, &space, &rule).ctx("norm")?;
        iso_err = iso_err.max((lhs - rhs).abs() / rhs);
        let iso = Isometry::new(&a, &kp).ctx("isometry")?;
        let phi = Automorphism::new(a).ctx("automorphism")?;
        let z = sampling::ball_point(&mut rng, 2, 0.95);
        weight_err = weight_err.max((iso.weight(&phi.apply(&z)) * iso.weight(&z) - 1.0).norm());
    }
    section.push(Check::at_most("isometry_norm", iso_err, ISOMETRY_TOL));
    section.push(Check::at_most("isometry_weight", weight_err, WEIGHT_TOL));
    section.detail("rule", serde_json::json!({ "radial": q.radial, "angular": q.angular }));
    Ok(section)
}
