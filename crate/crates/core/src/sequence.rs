//! Finite point sequences in the ball and target value sequences.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{herm_unchecked, BallPoint, C64};

/// Distinct points strictly inside the ball, all of one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSeq {
    dim: usize,
    points: Vec<BallPoint>,
}

impl PointSeq {
    pub fn new(points: Vec<BallPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(invalid("points", "sequence is empty"));
        };
        let n = first.dim();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite {
                    index: i,
                    point: p.to_string(),
                });
            }
            if p.norm_sq() >= 1.0 {
                return Err(Error::OutsideBall { norm: p.norm() });
            }
        }
        Ok(Self { dim: n, points })
    }

    /// The empty sequence in 𝔹ⁿ; only measure-side operations accept it.
    pub fn empty(n: usize) -> Self {
        Self { dim: n, points: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BallPoint] {
        &self.points
    }

    pub fn get(&self, k: usize) -> &BallPoint {
        &self.points[k]
    }

    pub fn prefix(&self, m: usize) -> Self {
        Self {
            dim: self.dim,
            points: self.points[..m.min(self.len())].to_vec(),
        }
    }

    /// Pair (i, j) with the smallest pseudo-hyperbolic distance, if any.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = pseudo_distance(&self.points[i], &self.points[j]);
                if best.map_or(true, |b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }
}

/// ρ-distance √(1 − ρ(a)ρ(b)/|1 − ⟨a,b⟩|²), valid for interior points.
pub(crate) fn pseudo_distance(a: &BallPoint, b: &BallPoint) -> f64 {
    let one = C64::new(1.0, 0.0);
    let d = (one - herm_unchecked(a.coords(), b.coords())).norm_sqr();
    let ra = 1.0 - a.norm_sq();
    let rb = 1.0 - b.norm_sq();
    (1.0 - ra * rb / d).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    /// Weighted ℓ^p with weights ρ(a_k)^{n/p+α}.
    Weighted,
    /// Plain sup norm.
    Sup,
}

/// Values λ_k to interpolate at a `PointSeq`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSeq {
    values: Vec<C64>,
    mode: TargetMode,
}

impl TargetSeq {
    pub fn weighted(values: Vec<C64>) -> Self {
        Self {
            values,
            mode: TargetMode::Weighted,
        }
    }

    pub fn sup(values: Vec<C64>) -> Self {
        Self {
            values,
            mode: TargetMode::Sup,
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn mode(&self) -> TargetMode {
        self.mode
    }

    pub fn is_sup(&self) -> bool {
        self.mode == TargetMode::Sup
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
