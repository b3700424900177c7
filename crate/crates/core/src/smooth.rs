//! The smooth interpolant F(z) = Σ_j λ_j χ(r_j^{−2} |φ_j(Rz)|²) on 𝔹², the
//! forms ω¹, ω², ω³ splitting its ∂̄ along B, and the dilation radius R_N.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::amar::{region_exponent, weak_separation, AmarAssembly};
use crate::error::{invalid, Error, Result};
use crate::function::{dbar_fd_stencil, SpaceParams, Stencil};
use crate::geometry::{hyperball_outer_radius, rho, Automorphism, BallPoint, C64, ZERO};
use crate::sampling;
use crate::sequence::{PointSeq, TargetSeq};

/// Relative safety margin added to the dilation radius.
pub const RADIUS_MARGIN: f64 = 1e-3;

/// Largest dilation radius the search will accept.
pub const RADIUS_CEILING: f64 = 1.0 - 1e-6;

/// Shell samples per point when checking the dilation condition.
pub const SHELL_SAMPLES: usize = 256;

/// χ(x) = ψ(2(1−|x|)) / [ψ(2(1−|x|)) + ψ(2|x|−1)], ψ(u) = e^{−1/u} for u > 0:
/// 1 on |x| ≤ 1/2, 0 on |x| ≥ 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cutoff;

impl Cutoff {
    /// (χ, χ′, χ″) at x.
    pub fn derivatives(&self, x: f64) -> (f64, f64, f64) {
        let s = x.abs();
        if s <= 0.5 {
            return (1.0, 0.0, 0.0);
        }
        if s >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        // χ = 1/(1 + e^g), g = 1/u − 1/v, u = 2(1−s), v = 2s−1
        let (u, v) = (2.0 * (1.0 - s), 2.0 * s - 1.0);
        let g = 1.0 / u - 1.0 / v;
        let g1 = 2.0 / (u * u) + 2.0 / (v * v);
        let g2 = 8.0 / (u * u * u) - 8.0 / (v * v * v);
        let e = (-g.abs()).exp();
        let chi = if g > 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
        let var = e / ((1.0 + e) * (1.0 + e));
        let d1 = -var * g1;
        let d2 = -d1 * (1.0 - 2.0 * chi) * g1 - var * g2;
        let sign = x.signum();
        (chi, sign * d1, d2)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivatives(x).0
    }
}

/// Coefficients of ω^k = Σ_l ω[k][l] dz̄_l (k = 1, 2) and ω³ dz̄₁∧dz̄₂.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Forms {
    pub omega: [[C64; 2]; 2],
    pub omega3: C64,
}

impl Forms {
    pub fn is_zero(&self) -> bool {
        self.omega.iter().flatten().all(|c| *c == ZERO) && self.omega3 == ZERO
    }
}

#[derive(Clone, Debug)]
pub struct SmoothData {
    points: Vec<BallPoint>,
    lambda: Vec<C64>,
    radii: Vec<f64>,
    dilation: f64,
    min_dilation: f64,
    eta: f64,
    params: SpaceParams,
    automorphisms: Vec<Automorphism>,
    assemblies: Vec<AmarAssembly>,
}

/// Builds F with one vector-function assembly per node (base j for node j).
pub fn build_smooth(
    a: &PointSeq,
    lambda: &TargetSeq,
    dilation: f64,
    eta: f64,
    params: &SpaceParams,
    seed: u64,
) -> Result<SmoothData> {
    let assemblies = (0..a.len())
        .map(|j| crate::amar::build_amar(a, params, j, seed))
        .collect::<Result<Vec<_>>>()?;
    build_smooth_with(a, lambda, dilation, eta, params, assemblies, seed)
}

pub fn build_smooth_with(
    a: &PointSeq,
    lambda: &TargetSeq,
    dilation: f64,
    eta: f64,
    params: &SpaceParams,
    assemblies: Vec<AmarAssembly>,
    seed: u64,
) -> Result<SmoothData> {
    if params.n != 2 || a.dim() != 2 {
        return Err(invalid("n", "the smooth extension is built on 𝔹²"));
    }
    if a.is_empty() {
        return Err(invalid("points", "sequence is empty"));
    }
    if lambda.len() != a.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: lambda.len() });
    }
    if assemblies.len() != a.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: assemblies.len() });
    }
    for (j, asm) in assemblies.iter().enumerate() {
        if asm.base() != j || asm.seq() != a {
            return Err(invalid("assemblies", format!("assembly {j} is not based at node {j} of this sequence")));
        }
    }
    let sep = weak_separation(a, eta, params, seed)?;
    if let Some((j, k, _)) = sep.worst.filter(|_| !sep.disjoint) {
        return Err(Error::Overlap { j, k });
    }
    let min_dilation = lemma43_radius(a, eta, params, seed)?;
    if !(dilation > min_dilation && dilation < 1.0) {
        return Err(invalid("R", format!("need R ∈ ({min_dilation}, 1), got {dilation}")));
    }
    let e = region_exponent(params);
    Ok(SmoothData {
        points: a.points().to_vec(),
        lambda: lambda.values().to_vec(),
        radii: a.points().iter().map(|p| eta * rho(p).powf(e)).collect(),
        dilation,
        min_dilation,
        eta,
        params: *params,
        automorphisms: a.points().iter().map(|p| Automorphism::new(p.clone())).collect::<Result<_>>()?,
        assemblies,
    })
}

impl SmoothData {
    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn min_dilation(&self) -> f64 {
        self.min_dilation
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn points(&self) -> &[BallPoint] {
        &self.points
    }

    /// r_j^{−2} |φ_j(Rz)|².
    fn bump_arg(&self, j: usize, z: &BallPoint) -> f64 {
        self.automorphisms[j].apply(&z.scale_re(self.dilation)).norm_sq() / (self.radii[j] * self.radii[j])
    }

    pub fn eval(&self, z: &BallPoint) -> C64 {
        (0..self.points.len())
            .map(|j| self.lambda[j] * Cutoff.value(self.bump_arg(j, z)))
            .sum()
    }

    /// B(Rz).
    pub fn b_dilated(&self, z: &BallPoint) -> Vec<C64> {
        self.assemblies[0].b_at(&z.scale_re(self.dilation))
    }

    /// ∂̄F by the chain rule, without the factorization through B.
    pub fn dbar_exact(&self, z: &BallPoint) -> [C64; 2] {
        let w = z.scale_re(self.dilation);
        let mut out = [ZERO; 2];
        for j in 0..self.points.len() {
            let (_, d1, _) = Cutoff.derivatives(self.bump_arg(j, z));
            if d1 == 0.0 {
                continue;
            }
            let phi = self.automorphisms[j].apply(&w);
            let jac = self.automorphisms[j].jacobian_matrix(&w);
            let c = self.lambda[j] * self.dilation * d1 / (self.radii[j] * self.radii[j]);
            for (l, o) in out.iter_mut().enumerate() {
                let s: C64 = (0..2).map(|i| phi.coords()[i] * jac[(i, l)].conj()).sum();
                *o += c * s;
            }
        }
        out
    }

    fn forms_with(&self, z: &BallPoint, weights: &[C64]) -> Result<Forms> {
        let w = z.scale_re(self.dilation);
        let r = self.dilation;
        let mut f = Forms::default();
        for j in 0..self.points.len() {
            let (_, d1, d2) = Cutoff.derivatives(self.bump_arg(j, z));
            if d1 == 0.0 && d2 == 0.0 {
                continue;
            }
            let m = self.assemblies[j].m_at(&w);
            let det_m = m.determinant();
            let a = m.try_inverse().ok_or_else(|| Error::SingularMatrix {
                det: det_m.norm(),
                location: w.to_string(),
            })?;
            let jac = self.automorphisms[j].jacobian_matrix(&w);
            let c: DMatrix<C64> = a.transpose() * jac.map(|x| x.conj());
            let r2 = self.radii[j] * self.radii[j];
            let k1 = weights[j] * r * d1 / r2;
            for k in 0..2 {
                for l in 0..2 {
                    f.omega[k][l] += k1 * c[(k, l)];
                }
            }
            let det_j = self.automorphisms[j].jacobian_det(&w);
            f.omega3 += weights[j] * r * r * d2 / (r2 * r2) * a.determinant() * det_j.conj();
        }
        Ok(f)
    }

    pub fn forms(&self, z: &BallPoint) -> Result<Forms> {
        self.forms_with(z, &self.lambda)
    }

    /// The forms with every λ_j replaced by 1: the m^{l,k}, m³ of the factorized writing.
    pub fn unit_forms(&self, z: &BallPoint) -> Result<Forms> {
        self.forms_with(z, &vec![C64::new(1.0, 0.0); self.points.len()])
    }

    fn in_hyperball(&self, j: usize, z: &BallPoint) -> bool {
        self.automorphisms[j].apply(z).norm() < 2.0 * self.radii[j]
    }

    /// λ(z) = Σ λ_j 1{T_j(2r_j)}(z).
    pub fn lambda_step(&self, z: &BallPoint) -> C64 {
        (0..self.points.len()).filter(|&j| self.in_hyperball(j, z)).map(|j| self.lambda[j]).sum()
    }

    /// m(z) = Σ r_j^{−4} ρ(a_j)^{−1} 1{T_j(2r_j)}(z).
    pub fn envelope(&self, z: &BallPoint) -> f64 {
        (0..self.points.len())
            .filter(|&j| self.in_hyperball(j, z))
            .map(|j| self.radii[j].powi(-4) / rho(&self.points[j]))
            .sum()
    }

    /// Is Rz in the closure of some shell Ω_j = {r_j/√2 < |φ_j| < r_j}?
    pub fn in_support(&self, z: &BallPoint) -> bool {
        (0..self.points.len()).any(|j| {
            let x = self.bump_arg(j, z);
            (0.5..=1.0).contains(&x)
        })
    }

    /// z = R^{−1} φ_j(u) with u uniform in modulus on each shell.
    pub fn support_samples(&self, per_point: usize, seed: u64) -> Vec<BallPoint> {
        let mut rng = sampling::rng(seed);
        let mut out = Vec::with_capacity(per_point * self.points.len());
        for j in 0..self.points.len() {
            let r = self.radii[j];
            for _ in 0..per_point {
                let s = r * (0.5f64.sqrt() + (1.0 - 0.5f64.sqrt()) * rand::Rng::gen::<f64>(&mut rng));
                let u = sampling::sphere_point(&mut rng, 2).scale_re(s);
                out.push(self.automorphisms[j].apply(&u).scale_re(1.0 / self.dilation));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DbarResiduals {
    /// max |∂̄F − (B₁ ω¹ + B₂ ω²)|.
    pub dbar_f: f64,
    /// max |∂̄ω¹ + B₂ ω³|.
    pub omega1: f64,
    /// max |∂̄ω² − B₁ ω³|.
    pub omega2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DbarReport {
    pub h: f64,
    pub stencil: Stencil,
    pub samples: usize,
    pub at_h: DbarResiduals,
    pub at_half_h: DbarResiduals,
    /// log₂ of the residual ratio between h and h/2; None when both vanish.
    pub order: [Option<f64>; 3],
    /// max |chain-rule ∂̄F − (B₁ ω¹ + B₂ ω²)|: the factorization part of the residual.
    pub split_residual: f64,
}

fn residuals_at(sd: &SmoothData, z: &BallPoint, h: f64, stencil: Stencil) -> Result<DbarResiduals> {
    let forms = sd.forms(z)?;
    if forms.is_zero() && sd.eval(z) == ZERO && !sd.in_support(z) {
        // F is locally constant and every form vanishes
        return Ok(DbarResiduals::default());
    }
    let b = sd.b_dilated(z);
    let df = dbar_fd_stencil(|w| sd.eval(w), z, h, stencil)?;
    let dbar_f = (0..2)
        .map(|l| (df[l] - (b[0] * forms.omega[0][l] + b[1] * forms.omega[1][l])).norm())
        .fold(0.0, f64::max);
    let mut wedge = [ZERO; 2];
    for (k, out) in wedge.iter_mut().enumerate() {
        let nan = C64::new(f64::NAN, 0.0);
        let d1 = dbar_fd_stencil(|w| sd.forms(w).map_or(nan, |f| f.omega[k][1]), z, h, stencil)?;
        let d2 = dbar_fd_stencil(|w| sd.forms(w).map_or(nan, |f| f.omega[k][0]), z, h, stencil)?;
        *out = d1[0] - d2[1];
    }
    Ok(DbarResiduals {
        dbar_f,
        omega1: (wedge[0] + b[1] * forms.omega3).norm(),
        omega2: (wedge[1] - b[0] * forms.omega3).norm(),
    })
}

fn max_residuals(sd: &SmoothData, samples: &[BallPoint], h: f64, stencil: Stencil) -> Result<DbarResiduals> {
    let all = samples.par_iter().map(|z| residuals_at(sd, z, h, stencil)).collect::<Result<Vec<_>>>()?;
    Ok(all.iter().fold(DbarResiduals::default(), |acc, r| DbarResiduals {
        dbar_f: acc.dbar_f.max(r.dbar_f),
        omega1: acc.omega1.max(r.omega1),
        omega2: acc.omega2.max(r.omega2),
    }))
}

/// Finite-difference residuals of ∂̄F = B₁ω¹ + B₂ω², ∂̄ω¹ = −B₂ω³ and
/// ∂̄ω² = B₁ω³ at steps h and h/2.
pub fn dbar_identity_check(sd: &SmoothData, samples: &[BallPoint], h: f64, stencil: Stencil) -> Result<DbarReport> {
    let at_h = max_residuals(sd, samples, h, stencil)?;
    let at_half_h = max_residuals(sd, samples, h / 2.0, stencil)?;
    let order = |a: f64, b: f64| (a > 0.0 && b > 0.0).then(|| (a / b).log2());
    let split_residual = samples
        .iter()
        .map(|z| -> Result<f64> {
            let f = sd.forms(z)?;
            let b = sd.b_dilated(z);
            let exact = sd.dbar_exact(z);
            Ok((0..2)
                .map(|l| (exact[l] - (b[0] * f.omega[0][l] + b[1] * f.omega[1][l])).norm())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DbarReport {
        h,
        stencil,
        samples: samples.len(),
        order: [
            order(at_h.dbar_f, at_half_h.dbar_f),
            order(at_h.omega1, at_half_h.omega1),
            order(at_h.omega2, at_half_h.omega2),
        ],
        at_h,
        at_half_h,
        split_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeCheck {
    /// max over samples with m(z) > 0 of max[ρ^{−1/2}|m^{l,k}|, ρ^{1/2}|m³|] / m(z).
    pub constant: f64,
    /// Samples where a form is nonzero but m(z) = 0.
    pub escapes: usize,
    pub samples: usize,
}

pub fn envelope_check(sd: &SmoothData, samples: &[BallPoint]) -> Result<EnvelopeCheck> {
    let mut constant: f64 = 0.0;
    let mut escapes = 0;
    for z in samples {
        let f = sd.unit_forms(z)?;
        let r = rho(z);
        let lhs = f
            .omega
            .iter()
            .flatten()
            .map(|c| c.norm() / r.sqrt())
            .fold(f.omega3.norm() * r.sqrt(), f64::max);
        let m = sd.envelope(z);
        if m > 0.0 {
            constant = constant.max(lhs / m);
        } else if lhs > 0.0 {
            escapes += 1;
        }
    }
    Ok(EnvelopeCheck {
        constant,
        escapes,
        samples: samples.len(),
    })
}

fn point_seed(seed: u64, p: &BallPoint) -> u64 {
    // FNV-1a over the coordinate bits so a point's shell samples do not depend on its index
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for c in p.coords() {
        for b in c.re.to_bits().to_le_bytes().into_iter().chain(c.im.to_bits().to_le_bytes()) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Smallest R with |φ(w/R)| < 2|φ(w)| on sampled points of the closed shell
/// around one node, searched above `lo`.
fn shell_threshold(phi: &Automorphism, r: f64, lo: f64, seed: u64) -> Result<f64> {
    let mut rng = sampling::rng(seed);
    let n = phi.dim();
    let shell: Vec<(BallPoint, f64)> = (0..SHELL_SAMPLES)
        .map(|i| {
            // both shell boundaries are always included
            let s = match i {
                0 => r,
                1 => r / 2f64.sqrt(),
                _ => r * (0.5f64.sqrt() + (1.0 - 0.5f64.sqrt()) * rand::Rng::gen::<f64>(&mut rng)),
            };
            let u = sampling::sphere_point(&mut rng, n).scale_re(s);
            (phi.apply(&u), s)
        })
        .collect();
    let holds = |big_r: f64| {
        shell.iter().all(|(w, s)| {
            let v = w.scale_re(1.0 / big_r);
            v.norm_sq() < 1.0 && phi.apply(&v).norm() < 2.0 * s
        })
    };
    if !holds(RADIUS_CEILING) {
        return Err(Error::RadiusSearch(format!(
            "dilation condition fails at R = {RADIUS_CEILING} for the node {}",
            phi.center()
        )));
    }
    if holds(lo) {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, RADIUS_CEILING);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if holds(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusSearch {
    /// Returned radius, including the safety margin.
    pub radius: f64,
    /// Per node: containment radius of the closed hyperball T_j(2r_j).
    pub containment: Vec<f64>,
    /// Per node: smallest sampled radius satisfying both conditions.
    pub threshold: Vec<f64>,
}

/// Per-node search for the dilation radius: the closed hyperballs T_j(2r_j)
/// lie in R𝔹 and |φ_j(w/R)| < 2|φ_j(w)| on the shells Ω_j.
pub fn lemma43_search(a: &PointSeq, eta: f64, params: &SpaceParams, seed: u64) -> Result<RadiusSearch> {
    params.validate()?;
    if !(eta > 0.0) {
        return Err(invalid("eta", "need η > 0"));
    }
    let e = region_exponent(params);
    let mut containment = Vec::with_capacity(a.len());
    let mut threshold = Vec::with_capacity(a.len());
    for p in a.points() {
        let r = eta * rho(p).powf(e);
        if 2.0 * r >= 1.0 {
            return Err(invalid("eta", format!("hyperball radius 2r = {} is not below 1", 2.0 * r)));
        }
        let c = hyperball_outer_radius(p, 2.0 * r);
        if c >= RADIUS_CEILING {
            return Err(Error::RadiusSearch(format!("hyperball around {p} reaches |z| = {c}")));
        }
        let phi = Automorphism::new(p.clone())?;
        threshold.push(shell_threshold(&phi, r, c, point_seed(seed, p))?);
        containment.push(c);
    }
    let best = threshold.iter().copied().fold(0.0, f64::max);
    Ok(RadiusSearch {
        radius: best + RADIUS_MARGIN * (1.0 - best),
        containment,
        threshold,
    })
}

pub fn lemma43_radius(a: &PointSeq, eta: f64, params: &SpaceParams, seed: u64) -> Result<f64> {
    Ok(lemma43_search(a, eta, params, seed)?.radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> SpaceParams {
        SpaceParams::new(2, 4.0, 0.5).unwrap()
    }

    fn origin_data(lambda: C64, eta: f64, big_r: f64) -> SmoothData {
        let a = PointSeq::new(vec![BallPoint::origin(2)]).unwrap();
        build_smooth(&a, &TargetSeq::weighted(vec![lambda]), big_r, eta, &params(), 1).unwrap()
    }

    #[test]
    fn cutoff_shape_and_derivatives() {
        let c = Cutoff;
        assert_eq!(c.derivatives(0.3), (1.0, 0.0, 0.0));
        assert_eq!(c.derivatives(1.2), (0.0, 0.0, 0.0));
        assert_eq!(c.value(0.5), 1.0);
        assert_eq!(c.value(1.0), 0.0);
        assert_relative_eq!(c.value(0.75), 0.5, epsilon = 1e-15);
        for i in 1..200 {
            let x = 0.5 + 0.5 * i as f64 / 200.0;
            let (v, d1, d2) = c.derivatives(x);
            assert!((0.0..=1.0).contains(&v) && d1 <= 0.0);
            let h = 1e-5;
            let fd1 = (c.value(x + h) - c.value(x - h)) / (2.0 * h);
            let fd2 = (c.derivatives(x + h).1 - c.derivatives(x - h).1) / (2.0 * h);
            assert!((fd1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "{x} {fd1} {d1}");
            assert!((fd2 - d2).abs() < 1e-5 * (1.0 + d2.abs()), "{x} {fd2} {d2}");
        }
        assert_relative_eq!(c.value(-0.75), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn collapse_radius() {
        let a = PointSeq::new(vec![BallPoint::origin(2)]).unwrap();
        let s = lemma43_search(&a, 0.2, &params(), 3).unwrap();
        assert_relative_eq!(s.threshold[0], 0.5, epsilon = 1e-9);
        let s = lemma43_search(&a, 0.3, &params(), 3).unwrap();
        assert_relative_eq!(s.threshold[0], 0.6, epsilon = 1e-12);
        assert!(s.radius > 0.6 && s.radius < 0.6 + 1e-3);
    }

    #[test]
    fn radius_grows_with_farther_points() {
        let a = PointSeq::new(vec![BallPoint::from_real(&[0.2, 0.1]), BallPoint::from_real(&[-0.3, 0.2])]).unwrap();
        let r1 = lemma43_radius(&a, 0.2, &params(), 5).unwrap();
        let mut pts = a.points().to_vec();
        pts.push(BallPoint::from_real(&[0.0, 0.8]));
        let r2 = lemma43_radius(&PointSeq::new(pts).unwrap(), 0.2, &params(), 5).unwrap();
        assert!(r1 < 1.0 && r2 < 1.0 && r2 >= r1);
    }

    #[test]
    fn interpolates_and_vanishes_outside() {
        let lam = C64::new(0.7, -0.2);
        let sd = origin_data(lam, 0.2, 0.6);
        assert_eq!(sd.eval(&BallPoint::origin(2)), lam);
        let far = BallPoint::from_real(&[0.9, 0.0]);
        assert_eq!(sd.eval(&far), ZERO);
        assert!(sd.forms(&far).unwrap().is_zero());
        let zero = origin_data(ZERO, 0.2, 0.6);
        assert_eq!(zero.eval(&BallPoint::from_real(&[0.2, 0.1])), ZERO);
    }

    #[test]
    fn collapse_forms_closed_form() {
        // φ₀ = −z, M = I: ω^k_l = −R λ r^{−2} χ′ δ_kl, ω³ = R² λ r^{−4} χ″
        let lam = C64::new(0.4, 0.3);
        let (eta, big_r) = (0.2, 0.6);
        let sd = origin_data(lam, eta, big_r);
        for z in sd.support_samples(20, 4) {
            let x = big_r * big_r * z.norm_sq() / (eta * eta);
            let (_, d1, d2) = Cutoff.derivatives(x);
            let f = sd.forms(&z).unwrap();
            for k in 0..2 {
                for l in 0..2 {
                    let expect = if k == l { -lam * big_r * d1 / (eta * eta) } else { ZERO };
                    assert!((f.omega[k][l] - expect).norm() < 1e-10 * (1.0 + expect.norm()));
                }
            }
            let e3 = lam * big_r * big_r * d2 / eta.powi(4);
            assert!((f.omega3 - e3).norm() < 1e-10 * (1.0 + e3.norm()));
        }
    }

    #[test]
    fn collapse_identities() {
        let sd = origin_data(C64::new(1.0, 0.5), 0.45, 0.95);
        let samples = sd.support_samples(20, 6);
        let rep = dbar_identity_check(&sd, &samples, 1e-4, Stencil::Central4).unwrap();
        assert!(rep.at_h.dbar_f < 1e-5 && rep.at_h.omega1 < 1e-5 && rep.at_h.omega2 < 1e-5, "{rep:?}");
        assert!(rep.split_residual < 1e-12);
        // the second-order stencil converges at its own rate
        let rep2 = dbar_identity_check(&sd, &samples, 1e-3, Stencil::Central2).unwrap();
        assert!(rep2.order.iter().all(|o| (o.unwrap() - 2.0).abs() < 0.1), "{rep2:?}");
        let outside = vec![BallPoint::from_real(&[0.8, 0.1])];
        let rep = dbar_identity_check(&sd, &outside, 1e-4, Stencil::Central4).unwrap();
        assert_eq!((rep.at_h.dbar_f, rep.at_h.omega1, rep.at_h.omega2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_point_identities_converge() {
        let a = PointSeq::new(vec![BallPoint::from_real(&[0.3, 0.1]), BallPoint::new([C64::new(-0.2, 0.3), C64::new(0.0, -0.25)])]).unwrap();
        let lam = TargetSeq::weighted(vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.5)]);
        let r_n = lemma43_radius(&a, 0.1, &params(), 2).unwrap();
        let sd = build_smooth(&a, &lam, 0.5 * (1.0 + r_n), 0.1, &params(), 2).unwrap();
        for p in a.points() {
            let v = sd.eval(&p.scale_re(1.0 / sd.dilation()));
            assert!(lam.values().iter().any(|l| (v - l).norm() < 1e-12));
        }
        let samples = sd.support_samples(8, 7);
        assert!(samples.iter().all(|z| sd.in_support(z)));
        for stencil in [Stencil::Central2, Stencil::Central4] {
            let rep = dbar_identity_check(&sd, &samples, 2e-3, stencil).unwrap();
            for o in rep.order {
                assert!(o.unwrap() > 1.8, "{rep:?}");
            }
        }
        let env = envelope_check(&sd, &samples).unwrap();
        assert_eq!(env.escapes, 0);
        assert!(env.constant.is_finite());
    }
}
