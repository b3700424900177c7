use ballinterp::geometry::{herm, rho, Automorphism};
use ballinterp::sampling;

use super::{Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

pub const INVOLUTION_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;

/// Involution and the ρ identity of φ_a over random pairs in n = 1, 2, 3.
pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let cfg = &ctx.cfg.geom;
    let mut section = Section::default();
    for n in 1..=3 {
        let mut rng = sampling::rng(ctx.seed_for(n as u64));
        let mut involution: f64 = 0.0;
        let mut identity: f64 = 0.0;
        for _ in 0..cfg.samples {
            let a = sampling::ball_point(&mut rng, n, cfg.max_radius);
            let z = sampling::ball_point(&mut rng, n, cfg.max_radius);
            let phi = Automorphism::new(a.clone()).ctx("automorphism")?;
            let w = phi.apply(&z);
            involution = involution.max(phi.apply(&w).distance(&z));
            let u = herm(&z, &a).ctx("inner product")?;
            let rhs = rho(&a) * rho(&z) / (1.0 - u).norm_sqr();
            identity = identity.max((rho(&w) - rhs).abs());
        }
        section.push(Check::at_most(format!("involution_n{n}"), involution, INVOLUTION_TOL));
        section.push(Check::at_most(format!("moebius_identity_n{n}"), identity, IDENTITY_TOL));
    }
    section.detail("samples_per_dimension", cfg.samples);
    Ok(section)
}
