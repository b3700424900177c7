//! Run configuration: a versioned JSON document, every field optional.

use std::path::{Path, PathBuf};

use ballinterp::function::SpaceParams;
use ballinterp::poly::Poly;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub sequence: SequenceSpec,
    pub geom: GeomConfig,
    pub gleason: GleasonConfig,
    pub interp: InterpConfig,
    pub amar: AmarConfig,
    pub carleson: CarlesonConfig,
    pub smooth: SmoothConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            n: 2,
            p: 4.0,
            alpha: 0.5,
            seed: DEFAULT_SEED,
            quadrature: QuadratureConfig::default(),
            sequence: SequenceSpec::default(),
            geom: GeomConfig::default(),
            gleason: GleasonConfig::default(),
            interp: InterpConfig::default(),
            amar: AmarConfig::default(),
            carleson: CarlesonConfig::default(),
            smooth: SmoothConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss–Jacobi nodes of the moment and reproduction checks.
    pub radial: usize,
    /// Exactness degree of the sphere factor.
    pub angular: usize,
    /// Smaller rule used for norms of non-polynomial functions.
    pub norm_radial: usize,
    pub norm_angular: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radial: 64,
            angular: 32,
            norm_radial: 8,
            norm_angular: 12,
        }
    }
}

/// Where the point sequence comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SequenceSpec {
    /// r_k = 1 − q^k, k = 1..=count, along `direction` (default e₁).
    Radial {
        q: f64,
        count: usize,
        #[serde(default)]
        direction: Option<Vec<[f64; 2]>>,
    },
    /// Independent draws from the invariant measure on {|z| < radius}.
    Hyperbolic { count: usize, radius: f64 },
    Csv { path: PathBuf },
    Inline { points: Vec<Vec<[f64; 2]>> },
}

impl Default for SequenceSpec {
    fn default() -> Self {
        SequenceSpec::Hyperbolic { count: 3, radius: 0.6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeomConfig {
    pub samples: usize,
    pub max_radius: f64,
}

impl Default for GeomConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            max_radius: 0.99,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GleasonConfig {
    /// (p, α) of each space checked; α = 0 uses the Hardy solver.
    pub spaces: Vec<[f64; 2]>,
    /// Functions per space for the decomposition residual.
    pub cases: usize,
    /// Residual points per function.
    pub points: usize,
    /// Pairs (f, a) in the norm-ratio corpus.
    pub ratio_cases: usize,
    pub max_base_radius: f64,
    /// Bergman solver rule.
    pub radial: usize,
    pub angular: usize,
    /// Polynomials to decompose instead of random ones; shifted to vanish at each base point.
    pub polys: Option<Vec<Poly>>,
}

impl Default for GleasonConfig {
    fn default() -> Self {
        Self {
            spaces: vec![[2.0, 0.0], [2.0, 1.0]],
            cases: 20,
            points: 50,
            ratio_cases: 50,
            max_base_radius: 0.5,
            radial: 12,
            angular: 24,
            polys: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpConfig {
    pub trials: usize,
    pub plancherel_points: usize,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            trials: 8,
            plancherel_points: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmarConfig {
    pub base: usize,
    pub samples: usize,
    pub max_m: u32,
    pub residual_points: usize,
}

impl Default for AmarConfig {
    fn default() -> Self {
        Self {
            base: 0,
            samples: 1000,
            max_m: 8,
            residual_points: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlesonConfig {
    /// Masses ρ(a_k)^exponent when the input carries none.
    pub exponent: f64,
    pub xi_grid: usize,
    pub t_per_octave: usize,
    pub tau: f64,
    pub probes: usize,
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        Self {
            exponent: 2.0,
            xi_grid: 256,
            t_per_octave: 4,
            tau: 1.0,
            probes: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothConfig {
    pub eta: f64,
    /// Dilation R; halfway between the minimal radius and 1 when absent.
    pub dilation: Option<f64>,
    pub samples_per_point: usize,
    /// FD step of the order check, as a fraction of the smallest hyperball radius.
    pub step_fraction: f64,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            dilation: None,
            samples_per_point: 10,
            step_fraction: 0.005,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA})", self.schema)));
        }
        self.space().map_err(|e| CliError::Config(e.to_string()))?;
        let q = &self.quadrature;
        if q.radial == 0 || q.angular == 0 || q.norm_radial == 0 || q.norm_angular == 0 {
            return Err(CliError::Config("quadrature orders must be positive".into()));
        }
        match &self.sequence {
            SequenceSpec::Radial { q, .. } if !(*q > 0.0 && *q < 1.0) => {
                return Err(CliError::Config(format!("radial sequence needs q ∈ (0,1), got {q}")));
            }
            SequenceSpec::Hyperbolic { radius, .. } if !(*radius > 0.0 && *radius < 1.0) => {
                return Err(CliError::Config(format!("hyperbolic sequence needs radius ∈ (0,1), got {radius}")));
            }
            _ => {}
        }
        for [p, alpha] in &self.gleason.spaces {
            SpaceParams::new(self.n, *p, *alpha)
                .and_then(|s| s.require_gleason())
                .map_err(|e| CliError::Config(format!("gleason space (p = {p}, α = {alpha}): {e}")))?;
        }
        if !(self.gleason.max_base_radius > 0.0 && self.gleason.max_base_radius < 1.0) {
            return Err(CliError::Config("gleason.max_base_radius must lie in (0,1)".into()));
        }
        if !(self.smooth.eta > 0.0) || !(self.smooth.step_fraction > 0.0) {
            return Err(CliError::Config("smooth.eta and smooth.step_fraction must be positive".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> ballinterp::Result<SpaceParams> {
        SpaceParams::new(self.n, self.p, self.alpha)
    }
}
