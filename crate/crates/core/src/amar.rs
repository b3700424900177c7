//! The interpolating vector function B = Σ_j β_j² φ_{a_j} with its local
//! factorizations B = M φ_{a_k}, the invertibility-region verifier and the
//! hyperball separation test.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{lp_norm_values, Fun, SpaceParams};
use crate::geometry::{rho, Automorphism, BallPoint, C64, ZERO};
use crate::gleason::{RadialGleason, DEFAULT_RADIAL_NODES};
use crate::interpolation::{drury_extension, DruryBasis, PointSeq, DELTA_TOL};
use crate::kernels::KernelParams;
use crate::poly::binomial;
use crate::quadrature::Quadrature;
use crate::sampling;

/// Below this |det M| a sample is reported as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// Default number of region samples of the verifier.
pub const DEFAULT_REGION_SAMPLES: usize = 1000;

#[derive(Clone, Debug)]
pub struct AmarAssembly {
    seq: PointSeq,
    base: usize,
    params: SpaceParams,
    drury: DruryBasis,
    automorphisms: Vec<Automorphism>,
    /// G_j for j ≠ base, with β_j = G_j · φ_{a_base}.
    gleason: Vec<Option<RadialGleason>>,
}

/// Everything the factorization needs at one point.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub beta: Vec<C64>,
    pub phis: Vec<BallPoint>,
    pub gs: Vec<Option<Vec<C64>>>,
}

impl AmarAssembly {
    pub fn seq(&self) -> &PointSeq {
        &self.seq
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn drury(&self) -> &DruryBasis {
        &self.drury
    }

    pub fn dim(&self) -> usize {
        self.params.n
    }

    pub fn base_automorphism(&self) -> &Automorphism {
        &self.automorphisms[self.base]
    }

    pub fn local(&self, z: &BallPoint) -> LocalData {
        LocalData {
            beta: self.drury.beta.iter().map(|b| b.eval(z)).collect(),
            phis: self.automorphisms.iter().map(|p| p.apply(z)).collect(),
            gs: self.gleason.iter().map(|g| g.as_ref().map(|g| g.eval(z))).collect(),
        }
    }

    /// B(z) = Σ_j β_j(z)² φ_{a_j}(z).
    pub fn b_at(&self, z: &BallPoint) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        for (b, phi) in self.drury.beta.iter().zip(&self.automorphisms) {
            let w = b.eval(z);
            for (o, x) in out.iter_mut().zip(phi.apply(z).coords()) {
                *o += w * w * x;
            }
        }
        out
    }

    /// Y_{lk} = Σ_{j≠base} β_j φ^j_l g^j_k.
    pub fn y_from(&self, d: &LocalData) -> DMatrix<C64> {
        let n = self.dim();
        let mut y = DMatrix::<C64>::zeros(n, n);
        for (j, g) in d.gs.iter().enumerate() {
            let Some(g) = g else { continue };
            let phi = d.phis[j].coords();
            for l in 0..n {
                let bl = d.beta[j] * phi[l];
                for k in 0..n {
                    y[(l, k)] += bl * g[k];
                }
            }
        }
        y
    }

    /// β_base(z)².
    pub fn beta_sq_from(&self, d: &LocalData) -> C64 {
        d.beta[self.base] * d.beta[self.base]
    }

    /// M = β² I + Y.
    pub fn m_from(&self, d: &LocalData) -> DMatrix<C64> {
        let mut m = self.y_from(d);
        let b2 = self.beta_sq_from(d);
        for i in 0..self.dim() {
            m[(i, i)] += b2;
        }
        m
    }

    pub fn m_at(&self, z: &BallPoint) -> DMatrix<C64> {
        self.m_from(&self.local(z))
    }

    /// |B(z) − M(z) φ_{a_base}(z)|.
    pub fn factorization_error(&self, z: &BallPoint) -> f64 {
        let d = self.local(z);
        let m = self.m_from(&d);
        let phi = &d.phis[self.base];
        let b = self.b_at(z);
        (0..self.dim())
            .map(|l| {
                let mphi: C64 = (0..self.dim()).map(|k| m[(l, k)] * phi.coords()[k]).sum();
                (b[l] - mphi).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// s_k, the sums of the principal k-minors of Y, for k = 1..n.
    pub fn minor_sums(&self, d: &LocalData) -> Vec<C64> {
        principal_minor_sums(&self.y_from(d))
    }

    /// |det M − [(β²)^n + Σ_k s_k (β²)^{n−k}]|.
    pub fn det_expansion_error(&self, z: &BallPoint) -> f64 {
        let d = self.local(z);
        let n = self.dim();
        let det = self.m_from(&d).determinant();
        let b2 = self.beta_sq_from(&d);
        let s = self.minor_sums(&d);
        let mut expansion = b2.powu(n as u32);
        for (k, sk) in s.iter().enumerate() {
            expansion += sk * b2.powu((n - k - 1) as u32);
        }
        (det - expansion).norm()
    }

    /// (|s_k|, C(n,k)(Σ_{j≠base}|G_j|²)^k) for k = 1..n.
    pub fn minor_bounds(&self, z: &BallPoint) -> Vec<(f64, f64)> {
        let d = self.local(z);
        let n = self.dim() as u32;
        let g2: f64 = d.gs.iter().flatten().map(|g| g.iter().map(|x| x.norm_sqr()).sum::<f64>()).sum();
        self.minor_sums(&d)
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let k = k as u32 + 1;
                (s.norm(), binomial(n, k) * g2.powi(k as i32))
            })
            .collect()
    }

    /// B as n functions.
    pub fn b_funs(&self) -> Vec<Fun> {
        (0..self.dim())
            .map(|l| {
                let me = self.clone();
                Fun::holomorphic(self.dim(), move |z| me.b_at(z)[l])
            })
            .collect()
    }

    /// max over entries of ‖m_lk‖ in the space `target`, read from `rule`.
    pub fn entry_norm(&self, target: &SpaceParams, rule: &dyn Quadrature) -> Result<f64> {
        let n = self.dim();
        let values: Vec<DMatrix<C64>> = rule.nodes().par_iter().map(|z| self.m_at(z)).collect();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            for k in 0..n {
                let entry: Vec<f64> = values.iter().map(|m| m[(l, k)].norm()).collect();
                worst = worst.max(lp_norm_values(&entry, target, rule)?);
            }
        }
        Ok(worst)
    }
}

/// Σ of principal minors of each order 1..n.
pub fn principal_minor_sums(y: &DMatrix<C64>) -> Vec<C64> {
    let n = y.nrows();
    let mut sums = vec![ZERO; n];
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| y[(idx[r], idx[c])]);
        sums[idx.len() - 1] += sub.determinant();
    }
    sums
}

/// Assemble B and the factorization at a_base.
pub fn build_amar(a: &PointSeq, params: &SpaceParams, base: usize, seed: u64) -> Result<AmarAssembly> {
    build_amar_with(a, params, base, seed, DEFAULT_RADIAL_NODES)
}

pub fn build_amar_with(
    a: &PointSeq,
    params: &SpaceParams,
    base: usize,
    seed: u64,
    radial_nodes: usize,
) -> Result<AmarAssembly> {
    params.require_gleason()?;
    if !(params.p > 2.0) {
        return Err(invalid("p", format!("the vector function needs p > 2 (got {})", params.p)));
    }
    if base >= a.len() {
        return Err(invalid("base", format!("index {base} out of range for {} points", a.len())));
    }
    let kp = KernelParams::new(*params)?;
    let drury = drury_extension(a, params, seed)?;
    let automorphisms = a
        .points()
        .iter()
        .map(|p| Automorphism::new(p.clone()))
        .collect::<Result<Vec<_>>>()?;
    let base_point = a.get(base).clone();
    let gleason = drury
        .beta
        .iter()
        .enumerate()
        .map(|(j, b)| {
            if j == base {
                Ok(None)
            } else {
                RadialGleason::new(&b.to_fun(), &base_point, &kp, radial_nodes, DELTA_TOL).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmarAssembly {
        seq: a.clone(),
        base,
        params: *params,
        drury,
        automorphisms,
        gleason,
    })
}

/// max over `samples` of |B(z) − M(z) φ_{a_base}(z)|.
pub fn factorization_residual(asm: &AmarAssembly, samples: &[BallPoint]) -> f64 {
    samples.iter().map(|z| asm.factorization_error(z)).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct Def11Report {
    pub k: usize,
    pub t: f64,
    pub c: f64,
    pub region_radius: f64,
    pub samples: usize,
    pub min_abs_det: f64,
    pub max_inverse_entry: f64,
    pub max_entry_norm: f64,
    pub singular_at: Option<String>,
    pub pass: bool,
}

/// Exponent n(n/p + α) of ρ(a_k) in the region radius, for the target space.
pub(crate) fn region_exponent(target: &SpaceParams) -> f64 {
    target.n as f64 * target.decay()
}

/// Region statistics: (min |det M|, max |M⁻¹| entry, singular location).
fn region_scan(asm: &AmarAssembly, radius: f64, samples: usize, seed: u64) -> (f64, f64, Option<String>) {
    let phi = asm.base_automorphism();
    let n = asm.dim();
    let mut rng = sampling::rng(seed);
    let mut pts: Vec<BallPoint> = vec![asm.seq.get(asm.base).clone()];
    pts.extend((0..samples).map(|_| phi.apply(&sampling::ball_point(&mut rng, n, radius))));
    let stats: Vec<(f64, f64, Option<String>)> = pts
        .par_iter()
        .map(|z| {
            let m = asm.m_at(z);
            let det = m.determinant().norm();
            if !(det >= SINGULAR_DET) {
                return (det, f64::INFINITY, Some(z.to_string()));
            }
            let inv = m.try_inverse().map_or(f64::INFINITY, |mi| mi.iter().map(|e| e.norm()).fold(0.0, f64::max));
            (det, inv, None)
        })
        .collect();
    let mut min_det = f64::INFINITY;
    let mut max_inv: f64 = 0.0;
    let mut singular = None;
    for (d, i, s) in stats {
        min_det = min_det.min(d);
        max_inv = max_inv.max(i);
        if singular.is_none() {
            singular = s;
        }
    }
    (min_det, max_inv, singular)
}

/// Check |det M| ≥ t, |M⁻¹| ≤ C and ‖M‖ ≤ C on the region around the base point
/// in the target space (p/2, 2α). `entry_norm` is ‖M‖ from `AmarAssembly::entry_norm`.
pub fn verify_def11(
    asm: &AmarAssembly,
    t: f64,
    c: f64,
    entry_norm: f64,
    samples: usize,
    seed: u64,
) -> Result<Def11Report> {
    let target = asm.params.halved();
    let radius = t * rho(asm.seq.get(asm.base)).powf(region_exponent(&target));
    if !(radius > 0.0) {
        return Err(invalid("t", "empty verification region"));
    }
    let radius = radius.min(1.0 - 1e-9);
    let (min_det, max_inv, singular) = region_scan(asm, radius, samples, seed);
    let pass = singular.is_none() && min_det >= t && max_inv <= c && entry_norm <= c;
    Ok(Def11Report {
        k: asm.base,
        t,
        c,
        region_radius: radius,
        samples,
        min_abs_det: min_det,
        max_inverse_entry: max_inv,
        max_entry_norm: entry_norm,
        singular_at: singular,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Def11Search {
    pub best: Option<Def11Report>,
    pub tried: Vec<Def11Report>,
}

/// Grid search over t ∈ {2^{−m}}, m = 1..=max_m, with the smallest C ∈ {2^m} that
/// covers the observed inverse and norm bounds; returns the largest passing t.
pub fn search_def11(asm: &AmarAssembly, entry_norm: f64, max_m: u32, samples: usize, seed: u64) -> Result<Def11Search> {
    let mut tried = Vec::new();
    for m in 1..=max_m {
        let t = 2f64.powi(-(m as i32));
        let probe = verify_def11(asm, t, f64::INFINITY, entry_norm, samples, seed)?;
        let need = probe.max_inverse_entry.max(entry_norm).max(1.0);
        let c = if need.is_finite() { 2f64.powi(need.log2().ceil() as i32) } else { f64::INFINITY };
        let mut report = verify_def11(asm, t, c, entry_norm, samples, seed)?;
        report.c = c;
        let pass = report.pass;
        tried.push(report);
        if pass {
            break;
        }
    }
    let best = tried.iter().find(|r| r.pass).cloned();
    Ok(Def11Search { best, tried })
}

#[derive(Clone, Debug, Serialize)]
pub struct DetDropFit {
    pub radii: Vec<f64>,
    /// 1 − min |det M| over {|φ_{a_k}| < r}.
    pub drops: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
}

/// Least-squares fit drop(r) ≈ intercept + slope·r over shrinking regions,
/// the linear shape of the determinant lower bound.
pub fn det_drop_fit(asm: &AmarAssembly, radii: &[f64], samples: usize, seed: u64) -> Result<DetDropFit> {
    if radii.len() < 2 {
        return Err(invalid("radii", "need at least two radii"));
    }
    let drops: Vec<f64> = radii
        .iter()
        .map(|&r| 1.0 - region_scan(asm, r, samples, seed).0)
        .collect();
    let m = radii.len() as f64;
    let mx = radii.iter().sum::<f64>() / m;
    let my = drops.iter().sum::<f64>() / m;
    let sxx: f64 = radii.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = radii.iter().zip(&drops).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(DetDropFit {
        radii: radii.to_vec(),
        intercept: my - slope * mx,
        slope,
        drops,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Separation {
    pub disjoint: bool,
    /// Pair with the smallest ratio |φ_{a_j}(a_k)| / threshold, and that ratio.
    pub worst: Option<(usize, usize, f64)>,
    /// A point in both hyperballs when they meet.
    pub witness: Option<BallPoint>,
}

/// Are the hyperballs {|φ_{a_j}| < 2η ρ(a_j)^{n(n/q+β)}} pairwise disjoint?
pub fn weak_separation(a: &PointSeq, eta: f64, target: &SpaceParams, seed: u64) -> Result<Separation> {
    if !(eta > 0.0) {
        return Err(invalid("eta", "need η > 0"));
    }
    let e = region_exponent(target);
    let radii: Vec<f64> = a.points().iter().map(|p| (2.0 * eta * rho(p).powf(e)).min(1.0)).collect();
    let mut worst: Option<(usize, usize, f64)> = None;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            let d = crate::sequence::pseudo_distance(a.get(j), a.get(k));
            let threshold = (radii[j] + radii[k]) / (1.0 + radii[j] * radii[k]);
            let ratio = d / threshold;
            if worst.map_or(true, |w| ratio < w.2) {
                worst = Some((j, k, ratio));
            }
        }
    }
    let disjoint = worst.map_or(true, |w| w.2 > 1.0);
    let witness = match worst {
        Some((j, k, r)) if r <= 1.0 => Some(overlap_witness(a, j, k, &radii, seed).ok_or_else(|| {
            Error::Invariant(format!("hyperballs {j} and {k} meet but no common point was found"))
        })?),
        _ => None,
    };
    Ok(Separation {
        disjoint,
        worst,
        witness,
    })
}

/// A point of T_j ∩ T_k: first along the geodesic from a_j to a_k, then by
/// rejection sampling in T_j.
fn overlap_witness(a: &PointSeq, j: usize, k: usize, radii: &[f64], seed: u64) -> Option<BallPoint> {
    let phi_j = Automorphism::new(a.get(j).clone()).ok()?;
    let phi_k = Automorphism::new(a.get(k).clone()).ok()?;
    let inside_k = |z: &BallPoint| phi_k.apply(z).norm() < radii[k];
    let b = phi_j.apply(a.get(k));
    let bn = b.norm();
    let dir = if bn > 0.0 { b.scale_re(1.0 / bn) } else { BallPoint::basis(a.dim(), 0) };
    for i in 0..=64 {
        let s = radii[j] * (1.0 - 1e-9) * i as f64 / 64.0;
        let z = phi_j.apply(&dir.scale_re(s));
        if inside_k(&z) {
            return Some(z);
        }
    }
    let mut rng = sampling::rng(seed);
    (0..10_000)
        .map(|_| phi_j.apply(&sampling::ball_point(&mut rng, a.dim(), radii[j])))
        .find(|z| inside_k(z))
}
