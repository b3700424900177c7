use ballinterp::geometry::{BallPoint, C64};
use ballinterp::interpolation::{
    carleson_product, drury_bound, drury_extension, gram, interpolation_constant, kernel_interpolant, TargetSeq,
};
use ballinterp::kernels::KernelParams;
use ballinterp::sampling;
use nalgebra::SymmetricEigen;
use rand::Rng;

use super::{norm_rule, Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const HERMITIAN_TOL: f64 = 1e-14;
pub const EXACTNESS_TOL: f64 = 1e-8;
pub const DELTA_TOL: f64 = 1e-8;
pub const PLANCHEREL_TOL: f64 = 1e-10;
/// Slack allowed between Σ‖β_j‖² and its bound when p = 2.
pub const DRURY_SLACK: f64 = 10.0;

const PROBE_RADIUS: f64 = 0.95;

/// Gram structure, interpolation at the nodes and the constant estimates.
pub fn interp(ctx: &Context) -> Result<Section, CliError> {
    let input = ctx.input()?;
    let a = &input.seq;
    let space = ctx.cfg.space().ctx("space")?;
    let mut section = Section::default();
    section.detail("points", a.len());
    if a.is_empty() {
        section.detail("vacuous", true);
        return Ok(section);
    }
    let kp = KernelParams::new(space).ctx("kernel")?;
    let g = gram(a.points(), &kp);
    let scale = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut asym: f64 = 0.0;
    for j in 0..g.nrows() {
        for k in 0..g.ncols() {
            asym = asym.max((g[(j, k)] - g[(k, j)].conj()).norm() / scale);
        }
    }
    section.push(Check::at_most("gram_hermitian", asym, HERMITIAN_TOL));
    // diagonal scaling keeps the spectrum O(1) near the sphere
    let d: Vec<f64> = (0..g.nrows()).map(|k| g[(k, k)].re.sqrt()).collect();
    let scaled = g.map_with_location(|j, k, v| v / C64::new(d[j] * d[k], 0.0));
    let min_eig = SymmetricEigen::new(scaled).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    section.push(Check::holds("gram_positive_definite", min_eig > 0.0));
    section.detail("scaled_gram_min_eigenvalue", min_eig);

    let mut rng = sampling::rng(ctx.seed_for(300));
    let lam: Vec<C64> = (0..a.len()).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
    let f = kernel_interpolant(a, &TargetSeq::weighted(lam.clone()), &space).ctx("kernel interpolant")?;
    let exact = a
        .points()
        .iter()
        .zip(&lam)
        .map(|(p, l)| (f.eval(p) - l).norm() / (1.0 + l.norm()))
        .fold(0.0, f64::max);
    section.push(Check::at_most("interpolation_exactness", exact, EXACTNESS_TOL));

    let rule = (space.p != 2.0).then(|| norm_rule(ctx.cfg, &space)).transpose()?;
    let c_a = interpolation_constant(a, &space, ctx.cfg.interp.trials, rule.as_deref(), ctx.seed_for(301))
        .ctx("interpolation constant")?;
    section.push(Check::holds("interpolation_constant_finite", c_a.is_finite()));
    section.detail("interpolation_constant", c_a);
    section.detail("carleson_product", carleson_product(a));
    Ok(section)
}

/// Drury's dual basis and the Plancherel identity.
pub fn drury(ctx: &Context) -> Result<Section, CliError> {
    let input = ctx.input()?;
    let a = &input.seq;
    let space = ctx.cfg.space().ctx("space")?;
    let mut section = Section::default();
    section.detail("points", a.len());
    if a.is_empty() {
        section.detail("vacuous", true);
        return Ok(section);
    }
    let basis = drury_extension(a, &space, ctx.seed_for(400)).ctx("drury extension")?;
    let mut delta: f64 = 0.0;
    for (j, b) in basis.beta.iter().enumerate() {
        for (k, p) in a.points().iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            delta = delta.max((b.eval(p) - target).norm());
        }
    }
    section.push(Check::at_most("dual_basis", delta, DELTA_TOL));
    let mut rng = sampling::rng(ctx.seed_for(401));
    let probes: Vec<BallPoint> = (0..ctx.cfg.interp.plancherel_points)
        .map(|_| sampling::ball_point(&mut rng, a.dim(), PROBE_RADIUS))
        .collect();
    section.push(Check::at_most("plancherel", basis.plancherel_at(&probes), PLANCHEREL_TOL));

    let rule = (space.p != 2.0).then(|| norm_rule(ctx.cfg, &space.halved())).transpose()?;
    let c_a = interpolation_constant(a, &space, ctx.cfg.interp.trials, rule.as_deref(), ctx.seed_for(402))
        .ctx("interpolation constant")?;
    let bound = drury_bound(&basis, a, &space, c_a, rule.as_deref()).ctx("drury bound")?;
    if space.p == 2.0 {
        section.push(Check::at_most("square_sum_bound", bound.value / bound.bound, DRURY_SLACK));
    }
    section.detail("square_sum", bound);
    section.detail("root_of_unity", [basis.root.re, basis.root.im]);
    Ok(section)
}
