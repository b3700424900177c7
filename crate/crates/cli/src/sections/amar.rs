use ballinterp::amar::{build_amar, det_drop_fit, factorization_residual, search_def11, verify_def11, AmarAssembly};
use ballinterp::geometry::{herm, rho, BallPoint, C64};
use ballinterp::sampling;
use nalgebra::DMatrix;

use super::{max, norm_rule, Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const NODE_TOL: f64 = 1e-8;
pub const EXPANSION_TOL: f64 = 1e-10;
pub const FACTORIZATION_TOL: f64 = 1e-3;
pub const COLLAPSE_TOL: f64 = 1e-12;
pub const MIN_T: f64 = 1.0 / 256.0;

const RESIDUAL_RADIUS: f64 = 0.98;
const DROP_RADII: usize = 6;

/// Exactness of the one-point assembly: B = β²φ_a and M = β²I with β = (ρ(a)/(1 − ⟨z,a⟩))^{n+αp}.
fn collapse_error(asm: &AmarAssembly, samples: &[BallPoint]) -> Result<f64, CliError> {
    let a = asm.seq().get(0).clone();
    let n = a.dim();
    let exponent = n as f64 + asm.params().alpha_p();
    let mut worst: f64 = 0.0;
    for z in samples {
        let beta = (C64::new(rho(&a), 0.0) / (C64::new(1.0, 0.0) - herm(z, &a).ctx("inner product")?)).powf(exponent);
        let b2 = beta * beta;
        let w = asm.base_automorphism().apply(z);
        let scale = 1.0 + b2.norm();
        for (b, x) in asm.b_at(z).iter().zip(w.coords()) {
            worst = worst.max((b - b2 * x).norm() / scale);
        }
        worst = worst.max((asm.m_at(z) - DMatrix::<C64>::identity(n, n) * b2).norm() / scale);
    }
    Ok(worst)
}

pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let cfg = &ctx.cfg.amar;
    let a = &ctx.input()?.seq;
    let space = ctx.cfg.space().ctx("space")?;
    let mut section = Section::default();
    section.detail("points", a.len());
    if a.is_empty() {
        section.detail("vacuous", true);
        return Ok(section);
    }
    if cfg.base >= a.len() {
        return Err(CliError::Config(format!("amar.base = {} but the sequence has {} points", cfg.base, a.len())));
    }
    let asm = build_amar(a, &space, cfg.base, ctx.seed_for(500)).ctx("amar assembly")?;
    let n = a.dim();

    let node = max(a.points().iter().flat_map(|p| asm.b_at(p)).map(|x| x.norm()));
    section.push(Check::at_most("b_vanishes_at_nodes", node, NODE_TOL));
    let local = asm.local(a.get(cfg.base));
    let m_base = (asm.m_from(&local) - DMatrix::<C64>::identity(n, n)).norm();
    section.push(Check::at_most("m_identity_at_base", m_base, NODE_TOL));
    let minors = max(asm.minor_sums(&local).iter().map(|s| s.norm()));
    section.push(Check::at_most("minor_sums_at_base", minors, NODE_TOL));

    let mut rng = sampling::rng(ctx.seed_for(501));
    let pts: Vec<BallPoint> = (0..cfg.residual_points)
        .map(|_| sampling::radial_uniform_point(&mut rng, n, RESIDUAL_RADIUS))
        .collect();
    section.push(Check::at_most("factorization", factorization_residual(&asm, &pts), FACTORIZATION_TOL));
    let expansion = max(pts.iter().map(|z| asm.det_expansion_error(z) / (1.0 + asm.m_at(z).determinant().norm())));
    section.push(Check::at_most("det_expansion", expansion, EXPANSION_TOL));
    let minor_bound = pts.iter().flat_map(|z| asm.minor_bounds(z)).all(|(s, b)| s <= b * (1.0 + 1e-9) + 1e-12);
    section.push(Check::holds("minor_bounds", minor_bound));

    let target = space.halved();
    let rule = norm_rule(ctx.cfg, &target)?;
    let entry_norm = asm.entry_norm(&target, rule.as_ref()).ctx("entry norm")?;
    section.detail("entry_norm", entry_norm);
    let search = search_def11(&asm, entry_norm, cfg.max_m, cfg.samples, ctx.seed_for(502)).ctx("definition search")?;
    let best_t = search.best.as_ref().map_or(0.0, |r| r.t);
    section.push(Check::at_least("invertibility_best_t", best_t, MIN_T));
    section.detail("invertibility_search", &search);
    let radii: Vec<f64> = (0..DROP_RADII).map(|m| 0.5 * 2f64.powi(-(m as i32))).collect();
    let fit = det_drop_fit(&asm, &radii, cfg.samples, ctx.seed_for(503)).ctx("det drop fit")?;
    section.push(Check::at_least("det_drop_slope", fit.slope, 0.0));
    section.detail("det_drop_fit", &fit);

    if a.len() == 1 {
        let mut rng = sampling::rng(ctx.seed_for(504));
        let pts: Vec<BallPoint> = (0..20).map(|_| sampling::ball_point(&mut rng, n, 0.95)).collect();
        section.push(Check::at_most("one_point_collapse", collapse_error(&asm, &pts)?, COLLAPSE_TOL));
        let rep = verify_def11(&asm, 0.5, 2.0, entry_norm, cfg.samples, ctx.seed_for(505)).ctx("definition check")?;
        section.push(Check::holds("invertibility_half_two", rep.pass));
        section.detail("invertibility_half_two", rep);
    }
    Ok(section)
}
