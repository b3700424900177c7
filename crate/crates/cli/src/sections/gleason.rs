use ballinterp::function::{dbar_fd, norm_pa, Fun, SpaceParams};
use ballinterp::geometry::BallPoint;
use ballinterp::gleason::{gleason_at, test_points, Route};
use ballinterp::kernels::KernelParams;
use ballinterp::poly::Poly;
use ballinterp::quadrature::{build_ball_rule, build_sphere_rule};
use ballinterp::sampling::{self, SeededRng};

use super::{norm_rule, Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const RESIDUAL_TOL: f64 = 1e-3;
pub const RATIO_BOUND: f64 = 100.0;
pub const HOLOMORPHY_TOL: f64 = 1e-5;

const RATIO_RADIUS: f64 = 0.7;
const RADIAL_NODES: usize = 20;
const MAX_DEGREE: u32 = 4;

/// The i-th test function: a configured polynomial or a random one, shifted to vanish at `a`.
fn vanishing_at(rng: &mut SeededRng, polys: Option<&[Poly]>, i: usize, n: usize, a: &BallPoint) -> Result<Fun, CliError> {
    let p = match polys {
        Some(ps) => {
            let p = ps[i % ps.len()].clone();
            if p.dim() != n {
                return Err(CliError::Config(format!("gleason.polys[{}] lives in C^{} but n = {n}", i % ps.len(), p.dim())));
            }
            p
        }
        None => sampling::random_poly(rng, n, 0, MAX_DEGREE),
    };
    let shift = p.eval(a);
    Ok(Fun::from_poly(p.sub(&Poly::constant(n, shift))))
}

pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let cfg = ctx.cfg;
    let g = &cfg.gleason;
    let n = cfg.n;
    let polys = g.polys.as_deref().filter(|ps| !ps.is_empty());
    let mut section = Section::default();
    for (si, &[p, alpha]) in g.spaces.iter().enumerate() {
        let space = SpaceParams::new(n, p, alpha).ctx("gleason space")?;
        let kp = KernelParams::new(space).ctx("kernel")?;
        let label = if space.is_hardy() { format!("hardy_p{p}") } else { format!("bergman_p{p}_a{alpha}") };
        let nrule = norm_rule(cfg, &space)?;
        let sphere;
        let ball;
        let route = if space.is_hardy() {
            sphere = build_sphere_rule(n, g.angular).ctx("sphere rule")?;
            Route::Hardy(&sphere)
        } else {
            ball = build_ball_rule(n, space.weight_exponent(), g.radial, g.angular).ctx("ball rule")?;
            Route::Bergman(&ball)
        };

        let seed = ctx.seed_for(100 + si as u64);
        let mut rng = sampling::rng(seed);
        let mut residual: f64 = 0.0;
        for case in 0..g.cases {
            let a = sampling::ball_point(&mut rng, n, g.max_base_radius);
            let f = vanishing_at(&mut rng, polys, case, n, &a)?;
            let sol = gleason_at(&f, &a, &kp, route).ctx("gleason solver")?;
            let fnorm = norm_pa(&f, &space, nrule.as_ref()).ctx("norm")?;
            let res = sol.residual_at(&f, &test_points(&a, g.points, seed ^ case as u64)).ctx("residual")?;
            residual = residual.max(res / (1.0 + fnorm));
        }
        section.push(Check::at_most(format!("{label}/residual"), residual, RESIDUAL_TOL));

        let mut rng = sampling::rng(ctx.seed_for(200 + si as u64));
        let mut ratio: f64 = 0.0;
        let mut holo: f64 = 0.0;
        for case in 0..g.ratio_cases {
            let a = sampling::ball_point(&mut rng, n, RATIO_RADIUS);
            let f = vanishing_at(&mut rng, polys, case, n, &a)?;
            let sol = gleason_at(&f, &a, &kp, Route::Radial(RADIAL_NODES)).ctx("gleason solver")?;
            let sol = sol.with_norm_ratio(&f, &space, nrule.as_ref()).ctx("norm ratio")?;
            ratio = ratio.max(sol.norm_ratio.unwrap_or(f64::INFINITY));
            if case < 3 {
                for z in test_points(&a, 3, case as u64) {
                    for comp in &sol.components {
                        for d in dbar_fd(comp, &z, 1e-4).ctx("dbar")? {
                            holo = holo.max(d.norm());
                        }
                    }
                }
            }
        }
        section.push(Check::at_most(format!("{label}/norm_ratio"), ratio, RATIO_BOUND));
        section.push(Check::at_most(format!("{label}/holomorphy"), holo, HOLOMORPHY_TOL));
    }
    section.detail("cases", g.cases);
    section.detail("ratio_cases", g.ratio_cases);
    Ok(section)
}
