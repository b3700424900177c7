//! The Gleason problem: for f with f(a) = 0 find G_a with f = G_a · φ_a.
//!
//! Three interchangeable solvers at the origin:
//! - the weighted Bergman integral operator, evaluated by ball quadrature;
//! - the Hardy solver assembled from the boundary operators W_{(θ,k)};
//! - the radial line integral g_k(z) = ∫₀¹ ∂_k f(tz) dt.
//!
//! For holomorphic f all three produce the same G (each reproduces
//! Σ_d ∂_k f_d / d over the homogeneous parts f_d). The first two are the
//! literal operators; the third is cheap and accurate near the sphere, so it
//! is what the Amar assembly and the smooth extension use.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{norm_pa, square_sum_norm, vector_norm, Fun, SpaceParams};
use crate::geometry::{herm_unchecked, BallPoint, C64, ONE, ZERO};
use crate::kernels::{inv_power_unchecked, Isometry, KernelParams};
use crate::poly::{MultiIndex, Poly};
use crate::quadrature::{gauss_legendre_unit, pairwise_sum, BallRule, Quadrature, SphereRule};
use crate::sampling;

/// Tolerance on |f(a)| for the vanishing precondition.
pub const VANISH_TOL: f64 = 1e-10;

/// Default Gauss–Legendre count of the radial solver.
pub const DEFAULT_RADIAL_NODES: usize = 32;

const SERIES_RADIUS: f64 = 0.05;

/// How G_0 is computed.
#[derive(Clone, Copy, Debug)]
pub enum Route<'a> {
    Bergman(&'a BallRule),
    Hardy(&'a SphereRule),
    Radial(usize),
}

/// The map G is paired with: z ↦ z for the origin solvers, φ_a otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Frame {
    Identity,
    Automorphism,
}

#[derive(Clone, Debug)]
pub struct GleasonSolution {
    pub base: BallPoint,
    pub frame: Frame,
    pub components: Vec<Fun>,
    /// max |f(z) − G(z)·φ_a(z)| over the default test points.
    pub residual: f64,
    /// ‖|G|‖_{p,α} / ‖f‖_{p,α} when requested.
    pub norm_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GleasonSummary {
    pub residual: f64,
    pub norm_ratio: Option<f64>,
}

impl GleasonSolution {
    pub fn eval(&self, z: &BallPoint) -> Vec<C64> {
        self.components.iter().map(|g| g.eval(z)).collect()
    }

    /// max |f(z) − G(z)·φ(z)| over `points`, φ the map of the solution's frame.
    pub fn residual_at(&self, f: &Fun, points: &[BallPoint]) -> Result<f64> {
        let phi = crate::geometry::Automorphism::new(self.base.clone())?;
        let mut worst: f64 = 0.0;
        for z in points {
            let w = match self.frame {
                Frame::Identity => z.clone(),
                Frame::Automorphism => phi.apply(z),
            };
            let dot: C64 = self.components.iter().zip(w.coords()).map(|(g, x)| g.eval(z) * x).sum();
            worst = worst.max((f.eval(z) - dot).norm());
        }
        Ok(worst)
    }

    /// Fill `norm_ratio` from a rule matching `params`.
    pub fn with_norm_ratio(mut self, f: &Fun, params: &SpaceParams, rule: &dyn Quadrature) -> Result<Self> {
        let fnorm = norm_pa(f, params, rule)?;
        let gnorm = vector_norm(&self.components, params, rule)?;
        self.norm_ratio = Some(if fnorm == 0.0 { 0.0 } else { gnorm / fnorm });
        Ok(self)
    }

    pub fn summary(&self) -> GleasonSummary {
        GleasonSummary {
            residual: self.residual,
            norm_ratio: self.norm_ratio,
        }
    }
}

/// Deterministic test points: φ_a of points in the ball of radius 0.6.
pub fn test_points(a: &BallPoint, count: usize, seed: u64) -> Vec<BallPoint> {
    let phi = crate::geometry::Automorphism::new(a.clone()).expect("interior base point");
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| phi.apply(&sampling::ball_point(&mut rng, a.dim(), 0.6)))
        .collect()
}

const TEST_SEED: u64 = 0x9e37_79b9;
const TEST_COUNT: usize = 20;

fn check_vanishing(f: &Fun, a: &BallPoint) -> Result<()> {
    if f.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: f.dim(),
        });
    }
    let v = f.eval(a).norm();
    if !(v <= VANISH_TOL) {
        return Err(Error::NotVanishing { value: v });
    }
    Ok(())
}

fn finish(f: &Fun, a: BallPoint, frame: Frame, components: Vec<Fun>) -> Result<GleasonSolution> {
    let mut sol = GleasonSolution {
        base: a,
        frame,
        components,
        residual: 0.0,
        norm_ratio: None,
    };
    sol.residual = sol.residual_at(f, &test_points(&sol.base, TEST_COUNT, TEST_SEED))?;
    Ok(sol)
}

/// [(1 − u)^{−N} − 1]/u, whose value at u = 0 is N.
pub fn removable_factor(u: C64, exponent: f64) -> C64 {
    if exponent.fract() == 0.0 && exponent > 0.0 && exponent <= 64.0 {
        // Σ_{j=1}^{N} (1 − u)^{−j}: no cancellation anywhere
        let q = (ONE - u).inv();
        let mut acc = ZERO;
        let mut pow = ONE;
        for _ in 0..exponent as usize {
            pow *= q;
            acc += pow;
        }
        return acc;
    }
    if u.norm() < SERIES_RADIUS {
        // Σ_m (N)_{m+1}/(m+1)! u^m
        let mut term = C64::new(exponent, 0.0);
        let mut acc = term;
        for m in 1..40 {
            term *= u * ((exponent + m as f64) / (m as f64 + 1.0));
            acc += term;
            if term.norm() < 1e-17 * acc.norm() {
                break;
            }
        }
        return acc;
    }
    (inv_power_unchecked(ONE - u, exponent) - ONE) / u
}

/// Quadrature data of the Bergman operator: per node w_i the vector
/// γ ω_i f(w_i) conj(w_i).
struct BergmanData {
    n: usize,
    exponent: f64,
    nodes: Vec<BallPoint>,
    coeffs: Vec<C64>,
}

impl BergmanData {
    fn new(f: &Fun, kp: &KernelParams, rule: &BallRule) -> Self {
        let n = kp.n();
        let nodes = rule.nodes().to_vec();
        let mut coeffs = Vec::with_capacity(nodes.len() * n);
        for (w, wt) in nodes.iter().zip(rule.weights()) {
            let v = f.eval(w) * (wt * kp.gamma);
            coeffs.extend(w.coords().iter().map(|x| v * x.conj()));
        }
        Self {
            n,
            exponent: kp.exponent,
            nodes,
            coeffs,
        }
    }

    fn component(&self, z: &BallPoint, k: usize) -> C64 {
        let terms: Vec<C64> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, w)| {
                removable_factor(herm_unchecked(z.coords(), w.coords()), self.exponent)
                    * self.coeffs[i * self.n + k]
            })
            .collect();
        pairwise_sum(&terms)
    }
}

/// G_0 by the weighted Bergman integral operator:
/// g_k(z) = γ ∫ ρ^{αp−1} [(1 − ⟨z,w⟩)^{−(n+αp)} − 1]/⟨z,w⟩ · conj(w_k) f(w) dν.
pub fn gleason_origin(f: &Fun, kp: &KernelParams, rule: &BallRule) -> Result<GleasonSolution> {
    kp.space.require_gleason()?;
    if kp.space.is_hardy() {
        return Err(invalid("alpha", "the volume solver needs α ≥ 1/p > 0; use the Hardy solver"));
    }
    if (rule.exponent() - kp.space.weight_exponent()).abs() > 1e-12 || rule.dim() != kp.n() {
        return Err(invalid("rule", "ball rule must carry the weight ρ^{αp−1} in dimension n"));
    }
    let origin = BallPoint::origin(kp.n());
    check_vanishing(f, &origin)?;
    let data = Arc::new(BergmanData::new(f, kp, rule));
    let components = (0..kp.n())
        .map(|k| {
            let d = data.clone();
            Fun::holomorphic(kp.n(), move |z| d.component(z, k))
        })
        .collect();
    finish(f, origin, Frame::Identity, components)
}

/// W_{(θ,k)}(f)(z) = ∫ C(z,ξ) conj(ξ^{θ+e_k}) f(ξ) dσ(ξ).
pub fn hardy_w(f: &Fun, theta: &MultiIndex, k: usize, rule: &SphereRule) -> Result<Fun> {
    let n = rule.dim();
    if f.dim() != n || theta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.dim().max(theta.dim()),
        });
    }
    if k >= n {
        return Err(invalid("k", format!("coordinate index {k} out of range for n = {n}")));
    }
    let radius = crate::function::hardy_radius(f);
    let idx = theta.add(&MultiIndex::unit(n, k));
    let nodes: Arc<Vec<BallPoint>> = Arc::new(rule.nodes().to_vec());
    let coeffs: Arc<Vec<C64>> = Arc::new(
        nodes
            .iter()
            .zip(rule.weights())
            .map(|(xi, w)| {
                let fv = if radius == 1.0 { f.eval(xi) } else { f.eval(&xi.scale_re(radius)) };
                fv * idx.monomial(xi.coords()).conj() * *w
            })
            .collect(),
    );
    let exponent = n as f64;
    Ok(Fun::holomorphic(n, move |z| {
        let terms: Vec<C64> = nodes
            .iter()
            .zip(coeffs.iter())
            .map(|(xi, c)| inv_power_unchecked(ONE - herm_unchecked(z.coords(), xi.coords()), exponent) * c)
            .collect();
        pairwise_sum(&terms)
    }))
}

/// Coefficients l_θ of Σ_{l=0}^{n−1} (1 − ⟨z,w⟩)^l = Σ_θ l_θ z^θ conj(w)^θ,
/// obtained by expanding the sum in the product variables x_j = z_j conj(w_j).
pub fn hardy_coefficients(n: usize) -> Vec<(MultiIndex, f64)> {
    let one = Poly::constant(n, ONE);
    let mut u = Poly::zero(n);
    for j in 0..n {
        u = u.add(&Poly::coordinate(n, j));
    }
    let base = one.sub(&u);
    let mut power = one.clone();
    let mut total = Poly::zero(n);
    for _ in 0..n {
        total = total.add(&power);
        power = power.mul(&base);
    }
    total.prune();
    total.terms().map(|(idx, c)| (idx.clone(), c.re)).collect()
}

/// G_0 in the Hardy space: g_k = Σ_θ l_θ z^θ W_{(θ,k)}(f).
pub fn gleason_origin_hardy(f: &Fun, n: usize, rule: &SphereRule) -> Result<GleasonSolution> {
    if rule.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rule.dim(),
        });
    }
    let origin = BallPoint::origin(n);
    check_vanishing(f, &origin)?;
    let coeffs = hardy_coefficients(n);
    let mut components = Vec::with_capacity(n);
    for k in 0..n {
        let mut terms = Vec::with_capacity(coeffs.len());
        for (theta, l) in &coeffs {
            let w = hardy_w(f, theta, k, rule)?;
            let mono = Fun::from_poly(Poly::monomial(theta.clone(), C64::new(*l, 0.0)));
            terms.push((ONE, Fun::product(&mono, &w)));
        }
        components.push(Fun::linear_combination(terms));
    }
    finish(f, origin, Frame::Identity, components)
}

/// G_0 by g_k(z) = ∫₀¹ ∂_k f(tz) dt (Gauss–Legendre in t).
pub fn gleason_origin_radial(f: &Fun, nodes: usize) -> Result<GleasonSolution> {
    let n = f.dim();
    let origin = BallPoint::origin(n);
    check_vanishing(f, &origin)?;
    let (t, w) = gauss_legendre_unit(nodes)?;
    let line = Arc::new((t, w));
    let g = f.clone();
    let full = Arc::new(move |z: &BallPoint| {
        let mut acc = vec![ZERO; n];
        for (ti, wi) in line.0.iter().zip(&line.1) {
            for (a, d) in acc.iter_mut().zip(g.holo_grad(&z.scale_re(*ti))) {
                *a += d * *wi;
            }
        }
        acc
    });
    let boundary = f.boundary_evaluable();
    let components = (0..n)
        .map(|k| {
            let h = full.clone();
            let c = Fun::holomorphic(n, move |z| h(z)[k]);
            if boundary {
                c.extends_to_boundary()
            } else {
                c
            }
        })
        .collect();
    finish(f, origin, Frame::Identity, components)
}

/// G_a = T_a(G_0(T_a f)) with G_0 the radial line integral, evaluated as a
/// whole vector: G_a(z) = k_a(z) ∫₀¹ ∇(T_a f)(t φ_a(z)) dt.
#[derive(Clone, Debug)]
pub struct RadialGleason {
    iso: Isometry,
    tf: Fun,
    line: Arc<(Vec<f64>, Vec<f64>)>,
}

impl RadialGleason {
    /// `tol` bounds |f(a)|; the Amar assembly passes the interpolation tolerance.
    pub fn new(f: &Fun, a: &BallPoint, kp: &KernelParams, nodes: usize, tol: f64) -> Result<Self> {
        if f.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: f.dim(),
            });
        }
        let v = f.eval(a).norm();
        if !(v <= tol) {
            return Err(Error::NotVanishing { value: v });
        }
        let iso = Isometry::new(a, kp)?;
        Ok(Self {
            tf: iso.apply(f),
            iso,
            line: Arc::new(gauss_legendre_unit(nodes)?),
        })
    }

    pub fn base(&self) -> &BallPoint {
        self.iso.automorphism().center()
    }

    pub fn eval(&self, z: &BallPoint) -> Vec<C64> {
        let w = self.iso.automorphism().apply(z);
        let k = self.iso.weight(z);
        let mut acc = vec![ZERO; z.dim()];
        for (t, wt) in self.line.0.iter().zip(&self.line.1) {
            for (a, d) in acc.iter_mut().zip(self.tf.holo_grad(&w.scale_re(*t))) {
                *a += d * (k * *wt);
            }
        }
        acc
    }

    pub fn components(&self) -> Vec<Fun> {
        (0..self.iso.automorphism().dim())
            .map(|k| {
                let me = self.clone();
                Fun::holomorphic(self.tf.dim(), move |z| me.eval(z)[k])
            })
            .collect()
    }
}

fn origin_by_route(f: &Fun, kp: &KernelParams, route: Route<'_>) -> Result<GleasonSolution> {
    match route {
        Route::Bergman(rule) => gleason_origin(f, kp, rule),
        Route::Hardy(rule) => {
            if !kp.space.is_hardy() {
                return Err(invalid("route", "Hardy solver needs α = 0"));
            }
            gleason_origin_hardy(f, kp.n(), rule)
        }
        Route::Radial(m) => gleason_origin_radial(f, m),
    }
}

/// G_a = T_a(G_0(T_a f)), so that f = G_a · φ_a.
pub fn gleason_at(f: &Fun, a: &BallPoint, kp: &KernelParams, route: Route<'_>) -> Result<GleasonSolution> {
    kp.space.require_gleason()?;
    check_vanishing(f, a)?;
    let iso = Isometry::new(a, kp)?;
    let tf = iso.apply(f);
    let base = origin_by_route(&tf, kp, route)?;
    let components = base.components.iter().map(|g| iso.apply(g)).collect();
    finish(f, a.clone(), Frame::Automorphism, components)
}

/// Solve for each f_j and report ‖Σ|G_j|²‖_{p/2,2α} / ‖Σ|f_j|²‖_{p/2,2α}.
pub fn gleason_vector(
    fs: &[Fun],
    a: &BallPoint,
    kp: &KernelParams,
    route: Route<'_>,
    norm_rule: &dyn Quadrature,
) -> Result<(Vec<GleasonSolution>, f64)> {
    if !(kp.space.p >= 2.0) {
        return Err(invalid("p", "the vector bound needs p ≥ 2"));
    }
    let sols = fs
        .iter()
        .map(|f| gleason_at(f, a, kp, route))
        .collect::<Result<Vec<_>>>()?;
    let gs: Vec<Fun> = sols.iter().flat_map(|s| s.components.iter().cloned()).collect();
    let fnorm = square_sum_norm(fs, &kp.space, norm_rule)?;
    if fnorm == 0.0 {
        return Ok((sols, 0.0));
    }
    let gnorm = square_sum_norm(&gs, &kp.space, norm_rule)?;
    Ok((sols, gnorm / fnorm))
}
