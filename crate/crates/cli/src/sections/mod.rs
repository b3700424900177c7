//! One module per subcommand; each returns the checks it ran and its raw data.

pub mod amar;
pub mod carleson;
pub mod geom;
pub mod gleason;
pub mod interp;
pub mod quad;
pub mod smooth;

use ballinterp::function::SpaceParams;
use ballinterp::quadrature::{build_ball_rule, build_sphere_rule, Quadrature};

use crate::config::RunConfig;
use crate::input::PointInput;
use crate::CliError;

/// Everything a section may read.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub seed: u64,
    pub input: Option<&'a PointInput>,
}

impl Context<'_> {
    pub fn input(&self) -> Result<&PointInput, CliError> {
        self.input.ok_or_else(|| CliError::Config("this subcommand needs a point sequence".into()))
    }

    /// Per-section seed so adding a probe to one section leaves the others unchanged.
    pub fn seed_for(&self, tag: u64) -> u64 {
        self.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

/// Attach context to a library error.
pub(crate) trait ErrContext<T> {
    fn ctx(self, what: &str) -> Result<T, CliError>;
}

impl<T> ErrContext<T> for ballinterp::Result<T> {
    fn ctx(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Module {
            context: what.to_string(),
            source,
        })
    }
}

/// The rule measuring norms in `space`: the sphere for α = 0, ρ^{αp−1}dν otherwise.
pub(crate) fn norm_rule(cfg: &RunConfig, space: &SpaceParams) -> Result<Box<dyn Quadrature>, CliError> {
    let q = &cfg.quadrature;
    Ok(if space.is_hardy() {
        Box::new(build_sphere_rule(space.n, q.norm_angular).ctx("norm rule")?)
    } else {
        Box::new(build_ball_rule(space.n, space.weight_exponent(), q.norm_radial, q.norm_angular).ctx("norm rule")?)
    })
}

pub(crate) fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
