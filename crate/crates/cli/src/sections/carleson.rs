use ballinterp::carleson::{carleson_constant, carleson_dual_test, mu_a, AtomicMeasure};

use super::{Context, ErrContext};
use crate::report::{Check, Section};
use crate::CliError;

/// Window constant, its scaling and monotonicity, and the embedding lower bound.
pub fn run(ctx: &Context) -> Result<Section, CliError> {
    let cfg = &ctx.cfg.carleson;
    let input = ctx.input()?;
    let n = input.seq.dim();
    let mu = match &input.masses {
        Some(m) => AtomicMeasure::new(n, input.seq.points().iter().cloned().zip(m.iter().copied()).collect())
            .ctx("measure")?,
        None => mu_a(&input.seq, cfg.exponent),
    };
    let mut section = Section::default();
    section.detail("atoms", mu.len());
    section.detail("total_mass", mu.total_mass());

    let report = carleson_constant(&mu, n, cfg.xi_grid, cfg.t_per_octave).ctx("window search")?;
    let c = report.constant;
    section.push(Check::holds("constant_finite", c.is_finite() && c >= 0.0));
    if mu.is_empty() {
        section.push(Check::at_most("empty_measure_constant", c, 0.0));
    }
    // doubling every mass is exact in floating point
    let doubled = carleson_constant(&mu.scaled(2.0).ctx("scaling")?, n, cfg.xi_grid, cfg.t_per_octave).ctx("window search")?;
    section.push(Check::at_most("mass_scaling", (doubled.constant - 2.0 * c).abs(), 0.0));
    if mu.len() > 1 {
        let prefix = AtomicMeasure::new(n, mu.atoms()[..mu.len() - 1].to_vec()).ctx("measure")?;
        let smaller = carleson_constant(&prefix, n, cfg.xi_grid, cfg.t_per_octave).ctx("window search")?;
        section.push(Check::holds("monotone_under_insertion", smaller.constant <= c));
    }
    let dual = carleson_dual_test(&mu, cfg.tau, cfg.probes).ctx("dual test")?;
    section.push(Check::holds("dual_ratio_finite", dual.ratio.is_finite()));
    section.detail("constant", &report);
    section.detail("dual_test", &dual);
    Ok(section)
}
