use ballinterp::function::Stencil;
use ballinterp::geometry::{BallPoint, C64};
use ballinterp::interpolation::TargetSeq;
use ballinterp::sampling;
use ballinterp::smooth::{build_smooth, dbar_identity_check, envelope_check, lemma43_search};
use rand::Rng;

use super::{Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const INTERPOLATION_TOL: f64 = 1e-12;
pub const MIN_ORDER: f64 = 1.8;
pub const SPLIT_TOL: f64 = 1e-10;
/// Residual bound of the fourth-order stencil at h = 1e-4 for one-point sequences.
pub const FINE_STEP: f64 = 1e-4;
pub const FINE_TOL: f64 = 1e-5;

const OFF_SUPPORT_SAMPLES: usize = 300;

pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let cfg = &ctx.cfg.smooth;
    let a = &ctx.input()?.seq;
    let space = ctx.cfg.space().ctx("space")?;
    if space.n != 2 {
        return Err(CliError::Config(format!("smooth-check needs n = 2, got n = {}", space.n)));
    }
    let mut section = Section::default();
    section.detail("points", a.len());
    if a.is_empty() {
        section.detail("vacuous", true);
        return Ok(section);
    }
    let search = lemma43_search(a, cfg.eta, &space, ctx.seed_for(600)).ctx("dilation radius")?;
    section.push(Check::at_most("dilation_radius_below_one", search.radius, 1.0 - f64::EPSILON));
    let dilation = cfg.dilation.unwrap_or(0.5 * (1.0 + search.radius));
    section.detail("dilation_search", &search);
    section.detail("dilation", dilation);

    let mut rng = sampling::rng(ctx.seed_for(601));
    let lam: Vec<C64> = (0..a.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let sd = build_smooth(a, &TargetSeq::weighted(lam.clone()), dilation, cfg.eta, &space, ctx.seed_for(602))
        .ctx("smooth extension")?;

    let interp = a
        .points()
        .iter()
        .zip(&lam)
        .map(|(p, l)| (sd.eval(&p.scale_re(1.0 / dilation)) - l).norm())
        .fold(0.0, f64::max);
    section.push(Check::at_most("interpolation", interp, INTERPOLATION_TOL));

    let support = sd.support_samples(cfg.samples_per_point, ctx.seed_for(603));
    let mut probe: Vec<BallPoint> = (0..OFF_SUPPORT_SAMPLES).map(|_| sampling::ball_point(&mut rng, 2, 0.99)).collect();
    probe.extend(support.iter().cloned());
    let mut violations = 0usize;
    for z in &probe {
        if !sd.in_support(z) && !sd.forms(z).ctx("forms")?.is_zero() {
            violations += 1;
        }
    }
    section.push(Check::at_most("support_violations", violations as f64, 0.0));

    let r_min = sd.radii().iter().copied().fold(f64::INFINITY, f64::min);
    let h = cfg.step_fraction * r_min;
    let coarse = dbar_identity_check(&sd, &support, h, Stencil::Central2).ctx("dbar identities")?;
    // None means the residual vanished at both steps
    let orders: Vec<f64> = coarse.order.iter().flatten().copied().collect();
    if orders.is_empty() {
        section.push(Check::holds("dbar_order", true));
    } else {
        section.push(Check::at_least("dbar_order", orders.iter().copied().fold(f64::INFINITY, f64::min), MIN_ORDER));
    }
    section.push(Check::at_most("dbar_split_residual", coarse.split_residual, SPLIT_TOL));
    section.detail("dbar_central2", &coarse);

    let fine = dbar_identity_check(&sd, &support, FINE_STEP, Stencil::Central4).ctx("dbar identities")?;
    if a.len() == 1 {
        let worst = fine.at_h.dbar_f.max(fine.at_h.omega1).max(fine.at_h.omega2);
        section.push(Check::at_most("dbar_residual_fine", worst, FINE_TOL));
    }
    section.detail("dbar_central4", &fine);

    let env = envelope_check(&sd, &support).ctx("envelope")?;
    section.push(Check::at_most("envelope_escapes", env.escapes as f64, 0.0));
    section.detail("envelope", &env);
    Ok(section)
}
