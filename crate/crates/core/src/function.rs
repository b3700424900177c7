//! Function representations, weighted norms, sequence norms and the two
//! duality pairings.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{rho, BallPoint, C64, ZERO};
use crate::poly::Poly;
use crate::quadrature::{integrate_nodes, integrate_real, BallRule, Quadrature, SphereRule};
use crate::sequence::{PointSeq, TargetSeq};

/// Radius used for Hardy norms of functions not known to extend to the sphere.
pub const HARDY_RADIUS: f64 = 1.0 - 1e-6;

/// Default step of the finite-difference ∂̄ operator.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

type EvalFn = dyn Fn(&BallPoint) -> C64 + Send + Sync;
type GradFn = dyn Fn(&BallPoint) -> Vec<C64> + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    Holomorphic,
    Smooth,
}

/// A scalar function on (a neighbourhood of) the ball.
#[derive(Clone)]
pub struct Fun {
    dim: usize,
    kind: Smoothness,
    boundary: bool,
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
}

impl fmt::Debug for Fun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fun")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("boundary", &self.boundary)
            .field("analytic_grad", &self.grad.is_some())
            .finish()
    }
}

impl Fun {
    pub fn holomorphic(dim: usize, f: impl Fn(&BallPoint) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            kind: Smoothness::Holomorphic,
            boundary: false,
            eval: Arc::new(f),
            grad: None,
        }
    }

    pub fn smooth(dim: usize, f: impl Fn(&BallPoint) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            kind: Smoothness::Smooth,
            boundary: false,
            eval: Arc::new(f),
            grad: None,
        }
    }

    /// Attach the holomorphic gradient (∂f/∂z_1, …, ∂f/∂z_n).
    pub fn with_grad(
        mut self,
        g: impl Fn(&BallPoint) -> Vec<C64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    /// Mark the function as continuous up to the sphere, so Hardy norms read
    /// boundary values directly.
    pub fn extends_to_boundary(mut self) -> Self {
        self.boundary = true;
        self
    }

    pub fn from_poly(p: Poly) -> Self {
        let dim = p.dim();
        let derivs: Vec<Poly> = (0..dim).map(|k| p.derivative(k)).collect();
        Self::holomorphic(dim, move |z| p.eval(z))
            .with_grad(move |z| derivs.iter().map(|d| d.eval(z)).collect())
            .extends_to_boundary()
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::holomorphic(dim, move |_| c)
            .with_grad(move |_| vec![ZERO; dim])
            .extends_to_boundary()
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, ZERO)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Smoothness {
        self.kind
    }

    pub fn is_holomorphic(&self) -> bool {
        self.kind == Smoothness::Holomorphic
    }

    pub fn boundary_evaluable(&self) -> bool {
        self.boundary
    }

    pub fn has_analytic_grad(&self) -> bool {
        self.grad.is_some()
    }

    #[inline]
    pub fn eval(&self, z: &BallPoint) -> C64 {
        (self.eval)(z)
    }

    /// Holomorphic gradient: the attached closure when present, otherwise the
    /// Cauchy integral formula on small circles (trapezoid, spectrally accurate).
    pub fn holo_grad(&self, z: &BallPoint) -> Vec<C64> {
        match &self.grad {
            Some(g) => g(z),
            None => cauchy_gradient(|w| self.eval(w), z),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let f = self.clone();
        let g = self.clone();
        let mut out = Self {
            dim: self.dim,
            kind: self.kind,
            boundary: self.boundary,
            eval: Arc::new(move |z| f.eval(z) * s),
            grad: None,
        };
        if self.grad.is_some() {
            out.grad = Some(Arc::new(move |z| g.holo_grad(z).into_iter().map(|d| d * s).collect()));
        }
        out
    }

    /// Linear combination Σ c_i f_i.
    pub fn linear_combination(terms: Vec<(C64, Fun)>) -> Self {
        assert!(!terms.is_empty(), "empty combination");
        let dim = terms[0].1.dim;
        let kind = if terms.iter().all(|(_, f)| f.is_holomorphic()) {
            Smoothness::Holomorphic
        } else {
            Smoothness::Smooth
        };
        let boundary = terms.iter().all(|(_, f)| f.boundary);
        let with_grad = terms.iter().all(|(_, f)| f.grad.is_some());
        let terms = Arc::new(terms);
        let t = terms.clone();
        let mut out = Self {
            dim,
            kind,
            boundary,
            eval: Arc::new(move |z| t.iter().map(|(c, f)| c * f.eval(z)).sum()),
            grad: None,
        };
        if with_grad {
            out.grad = Some(Arc::new(move |z| {
                let mut acc = vec![ZERO; dim];
                for (c, f) in terms.iter() {
                    for (a, d) in acc.iter_mut().zip(f.holo_grad(z)) {
                        *a += c * d;
                    }
                }
                acc
            }));
        }
        out
    }

    /// Pointwise product of two holomorphic functions.
    pub fn product(a: &Fun, b: &Fun) -> Self {
        let (fa, fb) = (a.clone(), b.clone());
        let (ga, gb) = (a.clone(), b.clone());
        let kind = if a.is_holomorphic() && b.is_holomorphic() {
            Smoothness::Holomorphic
        } else {
            Smoothness::Smooth
        };
        let mut out = Self {
            dim: a.dim,
            kind,
            boundary: a.boundary && b.boundary,
            eval: Arc::new(move |z| fa.eval(z) * fb.eval(z)),
            grad: None,
        };
        if a.grad.is_some() && b.grad.is_some() {
            out.grad = Some(Arc::new(move |z| {
                let (va, vb) = (ga.eval(z), gb.eval(z));
                ga.holo_grad(z)
                    .into_iter()
                    .zip(gb.holo_grad(z))
                    .map(|(da, db)| da * vb + va * db)
                    .collect()
            }));
        }
        out
    }

    /// Largest finite-difference ∂̄ residual over `points`; the holomorphy spot check.
    pub fn cauchy_riemann_residual(&self, points: &[BallPoint], h: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for z in points {
            for d in dbar_fd(self, z, h)? {
                worst = worst.max(d.norm());
            }
        }
        Ok(worst)
    }
}

/// ∂f/∂z_k by the Cauchy formula on a circle of radius r = min(0.2(1 − |z|), 0.05).
pub fn cauchy_gradient(f: impl Fn(&BallPoint) -> C64, z: &BallPoint) -> Vec<C64> {
    const POINTS: usize = 16;
    let r = (0.2 * (1.0 - z.norm())).clamp(1e-4, 0.05);
    let roots: Vec<C64> = (0..POINTS)
        .map(|m| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / POINTS as f64))
        .collect();
    (0..z.dim())
        .map(|k| {
            let acc: C64 = roots
                .iter()
                .map(|e| f(&z.shifted(k, e * r)) * e.conj())
                .sum();
            acc / (POINTS as f64 * r)
        })
        .collect()
}

/// (n, p, α) of the space B^p_α; α = 0 is the Hardy space H^p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
}

impl SpaceParams {
    pub fn new(n: usize, p: f64, alpha: f64) -> Result<Self> {
        let s = Self { n, p, alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn hardy(n: usize, p: f64) -> Result<Self> {
        Self::new(n, p, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(self.p > 0.0) {
            return Err(invalid("p", format!("need p > 0 (got {})", self.p)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("need α ≥ 0 (got {})", self.alpha)));
        }
        Ok(())
    }

    /// Gleason hypothesis: p > 1 and α ∈ {0} ∪ [1/p, ∞).
    pub fn require_gleason(&self) -> Result<()> {
        self.validate()?;
        if !(self.p > 1.0) {
            return Err(invalid("p", format!("Gleason solver needs p > 1 (got {})", self.p)));
        }
        if self.alpha != 0.0 && self.alpha < 1.0 / self.p - 1e-12 {
            return Err(invalid(
                "alpha",
                format!("need α ∈ {{0}} ∪ [1/p, ∞); got α = {} with 1/p = {}", self.alpha, 1.0 / self.p),
            ));
        }
        Ok(())
    }

    pub fn is_hardy(&self) -> bool {
        self.alpha == 0.0
    }

    /// αp, the weight exponent plus one.
    pub fn alpha_p(&self) -> f64 {
        if self.p.is_infinite() {
            0.0
        } else {
            self.alpha * self.p
        }
    }

    /// Exponent αp − 1 of the volume weight.
    pub fn weight_exponent(&self) -> f64 {
        self.alpha_p() - 1.0
    }

    /// n/p + α, the decay exponent of the sequence space ℓ^p_{n/p+α}.
    pub fn decay(&self) -> f64 {
        let inv = if self.p.is_infinite() { 0.0 } else { 1.0 / self.p };
        self.n as f64 * inv + self.alpha
    }

    /// Conjugate pair (q, β): 1/p + 1/q = 1, αp = βq.
    pub fn conjugate(&self) -> Option<Self> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return None;
        }
        let q = self.p / (self.p - 1.0);
        Some(Self {
            n: self.n,
            p: q,
            alpha: self.alpha * self.p / q,
        })
    }

    /// (p/2, 2α): the space holding Σ|G_j|² and the Amar matrices.
    pub fn halved(&self) -> Self {
        Self {
            n: self.n,
            p: self.p / 2.0,
            alpha: 2.0 * self.alpha,
        }
    }
}

fn check_rule(params: &SpaceParams, rule: &dyn Quadrature) -> Result<()> {
    if rule.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: rule.dim(),
        });
    }
    match (params.is_hardy(), rule.weight_exponent()) {
        (true, None) => Ok(()),
        (false, Some(c)) if (c - params.weight_exponent()).abs() <= 1e-12 => Ok(()),
        (true, Some(_)) => Err(invalid("rule", "Hardy norms (α = 0) need a sphere rule")),
        (false, None) => Err(invalid("rule", "Bergman norms (α > 0) need a ball rule")),
        (false, Some(c)) => Err(invalid(
            "rule",
            format!(
                "ball rule weight exponent {c} differs from αp − 1 = {}",
                params.weight_exponent()
            ),
        )),
    }
}

/// Radius at which a Hardy norm reads `f`.
pub fn hardy_radius(f: &Fun) -> f64 {
    if f.boundary_evaluable() {
        1.0
    } else {
        HARDY_RADIUS
    }
}

/// [∫ u^p dμ]^{1/p} for a nonnegative u, with μ the measure of `params`
/// (sphere for α = 0, ρ^{αp−1}dν otherwise) read from `rule`.
pub fn lp_norm_real(
    u: impl Fn(&BallPoint) -> f64 + Sync,
    params: &SpaceParams,
    rule: &dyn Quadrature,
    radius: f64,
) -> Result<f64> {
    check_rule(params, rule)?;
    let at = |z: &BallPoint| {
        if radius == 1.0 {
            u(z)
        } else {
            u(&z.scale_re(radius))
        }
    };
    if params.p.is_infinite() {
        return Ok(rule.nodes().iter().map(at).fold(0.0, f64::max));
    }
    let p = params.p;
    let total = integrate_real(rule, |z| at(z).powf(p));
    if !total.is_finite() {
        return Err(Error::NonFinite {
            index: usize::MAX,
            point: "norm integrand".into(),
        });
    }
    Ok(total.powf(1.0 / p))
}

/// Same as `lp_norm_real` for values already computed at the rule nodes.
pub fn lp_norm_values(values: &[f64], params: &SpaceParams, rule: &dyn Quadrature) -> Result<f64> {
    check_rule(params, rule)?;
    if values.len() != rule.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: rule.len(),
        });
    }
    if params.p.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    let p = params.p;
    let terms: Vec<f64> = values.iter().zip(rule.weights()).map(|(v, w)| w * v.powf(p)).collect();
    Ok(crate::quadrature::pairwise_sum_re(&terms).powf(1.0 / p))
}

/// ‖f‖_{p,α}; for α = 0 the boundary L^p(σ) norm.
pub fn norm_pa(f: &Fun, params: &SpaceParams, rule: &dyn Quadrature) -> Result<f64> {
    lp_norm_real(|z| f.eval(z).norm(), params, rule, hardy_radius(f))
}

/// ‖(Σ|u_j|²)^{1/2}‖_{p,α}, the norm ‖U‖_{p,α,N} of a vector function.
pub fn vector_norm(u: &[Fun], params: &SpaceParams, rule: &dyn Quadrature) -> Result<f64> {
    let radius = u.iter().map(hardy_radius).fold(1.0, f64::min);
    lp_norm_real(
        |z| u.iter().map(|f| f.eval(z).norm_sqr()).sum::<f64>().sqrt(),
        params,
        rule,
        radius,
    )
}

/// ‖Σ|u_j|²‖_{p/2,2α} = ‖U‖²_{p,α,N}.
pub fn square_sum_norm(u: &[Fun], params: &SpaceParams, rule: &dyn Quadrature) -> Result<f64> {
    Ok(vector_norm(u, params, rule)?.powi(2))
}

/// ‖λ‖_{p,n/p+α} = ‖{λ_k ρ(a_k)^{n/p+α}}‖_{ℓ^p}, or sup|λ_k| in sup mode.
pub fn seq_norm(lambda: &TargetSeq, a: &PointSeq, params: &SpaceParams) -> Result<f64> {
    if lambda.len() != a.len() {
        return Err(Error::LengthMismatch {
            left: lambda.len(),
            right: a.len(),
        });
    }
    if lambda.is_sup() {
        return Ok(lambda.values().iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    let s = params.decay();
    let terms = lambda
        .values()
        .iter()
        .zip(a.points())
        .map(|(l, p)| l.norm() * rho(p).powf(s));
    if params.p.is_infinite() {
        return Ok(terms.fold(0.0, f64::max));
    }
    Ok(terms.map(|t| t.powf(params.p)).sum::<f64>().powf(1.0 / params.p))
}

/// ⟨U, V⟩_N = Σ_j ∫ u_j conj(v_j) ρ^{αp−1} dν.
pub fn pairing_ball(u: &[Fun], v: &[Fun], params: &SpaceParams, rule: &BallRule) -> Result<C64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if params.is_hardy() {
        return Err(invalid("alpha", "volume pairing needs α > 0"));
    }
    check_rule(params, rule)?;
    integrate_nodes(rule.nodes(), rule.weights(), |z| {
        u.iter().zip(v).map(|(a, b)| a.eval(z) * b.eval(z).conj()).sum()
    })
}

/// ⟨W, H⟩*_N = Σ_j ∫ w_j* conj(h_j*) dσ.
pub fn pairing_sphere(w: &[Fun], h: &[Fun], rule: &SphereRule) -> Result<C64> {
    if w.len() != h.len() {
        return Err(Error::LengthMismatch {
            left: w.len(),
            right: h.len(),
        });
    }
    let radius = w.iter().chain(h).map(hardy_radius).fold(1.0, f64::min);
    integrate_nodes(rule.nodes(), rule.weights(), |z| {
        let z = if radius == 1.0 { z.clone() } else { z.scale_re(radius) };
        w.iter().zip(h).map(|(a, b)| a.eval(&z) * b.eval(&z).conj()).sum()
    })
}

/// Central-difference Wirtinger derivatives ∂f/∂z̄_k = ½(∂_x + i∂_y) f.
pub fn dbar_fd(f: &Fun, z: &BallPoint, h: f64) -> Result<Vec<C64>> {
    dbar_fd_with(|w| f.eval(w), z, h)
}

pub fn dbar_fd_with(f: impl Fn(&BallPoint) -> C64, z: &BallPoint, h: f64) -> Result<Vec<C64>> {
    dbar_fd_stencil(f, z, h, Stencil::Central2)
}

/// Central difference stencils for the partial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// (f(x+h) − f(x−h)) / 2h, error O(h²).
    #[default]
    Central2,
    /// (−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h, error O(h⁴).
    Central4,
}

pub fn dbar_fd_stencil(f: impl Fn(&BallPoint) -> C64, z: &BallPoint, h: f64, stencil: Stencil) -> Result<Vec<C64>> {
    let norm = z.norm();
    if !(h > 0.0) || norm + 2.0 * h >= 1.0 {
        return Err(Error::Margin { norm, h });
    }
    let i = C64::new(0.0, 1.0);
    let partial = |k: usize, dir: C64| match stencil {
        Stencil::Central2 => (f(&z.shifted(k, dir * h)) - f(&z.shifted(k, -dir * h))) / (2.0 * h),
        Stencil::Central4 => {
            (f(&z.shifted(k, -dir * (2.0 * h))) - f(&z.shifted(k, dir * (2.0 * h)))
                + 8.0 * (f(&z.shifted(k, dir * h)) - f(&z.shifted(k, -dir * h))))
                / (12.0 * h)
        }
    };
    Ok((0..z.dim())
        .map(|k| 0.5 * (partial(k, C64::new(1.0, 0.0)) + i * partial(k, i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiIndex;
    use crate::quadrature::{build_ball_rule, build_sphere_rule, weighted_mass};
    use crate::sampling;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z1(n: usize) -> Fun {
        Fun::from_poly(Poly::coordinate(n, 0))
    }

    #[test]
    fn norm_examples() {
        let sphere = build_sphere_rule(2, 8).unwrap();
        let hardy = SpaceParams::hardy(2, 2.0).unwrap();
        assert_relative_eq!(norm_pa(&Fun::constant(2, c(1.0, 0.0)), &hardy, &sphere).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(norm_pa(&z1(2), &hardy, &sphere).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);

        for (p, alpha) in [(2.0, 1.0), (3.0, 0.5), (4.0, 0.25)] {
            let params = SpaceParams::new(2, p, alpha).unwrap();
            let rule = build_ball_rule(2, params.weight_exponent(), 16, 8).unwrap();
            let v = norm_pa(&Fun::constant(2, c(1.0, 0.0)), &params, &rule).unwrap();
            let expect = weighted_mass(2, params.weight_exponent()).powf(1.0 / p);
            assert_relative_eq!(v, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn mismatched_rule_is_rejected() {
        let params = SpaceParams::new(2, 2.0, 1.0).unwrap();
        let wrong = build_ball_rule(2, 0.0, 8, 4).unwrap();
        assert!(norm_pa(&z1(2), &params, &wrong).is_err());
        let sphere = build_sphere_rule(2, 4).unwrap();
        assert!(norm_pa(&z1(2), &params, &sphere).is_err());
    }

    #[test]
    fn norm_is_absolutely_homogeneous() {
        let mut rng = sampling::rng(3);
        let params = SpaceParams::new(2, 3.0, 1.0).unwrap();
        let rule = build_ball_rule(2, params.weight_exponent(), 12, 8).unwrap();
        for _ in 0..5 {
            let p = sampling::random_poly(&mut rng, 2, 0, 3);
            let s = c(-1.3, 0.7);
            let a = norm_pa(&Fun::from_poly(p.clone()), &params, &rule).unwrap();
            let b = norm_pa(&Fun::from_poly(p.scale(s)), &params, &rule).unwrap();
            assert!((b - s.norm() * a).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn seq_norm_examples() {
        let params = SpaceParams::new(2, 2.0, 1.0).unwrap();
        let a = PointSeq::new(vec![BallPoint::from_real(&[0.6, 0.0])]).unwrap();
        let one = TargetSeq::weighted(vec![c(1.0, 0.0)]);
        assert_relative_eq!(seq_norm(&one, &a, &params).unwrap(), 0.64f64.powf(2.0), epsilon = 1e-15);
        assert_eq!(seq_norm(&TargetSeq::weighted(vec![ZERO]), &a, &params).unwrap(), 0.0);

        let a2 = PointSeq::new(vec![
            BallPoint::from_real(&[0.6, 0.0]),
            BallPoint::new([ZERO, c(0.0, 0.5)]),
        ])
        .unwrap();
        let lam = TargetSeq::weighted(vec![c(3.0, 0.0), c(0.0, -2.0)]);
        let expect = ((3.0 * 0.64f64.powi(2)).powi(2) + (2.0 * 0.75f64.powi(2)).powi(2)).sqrt();
        assert_relative_eq!(seq_norm(&lam, &a2, &params).unwrap(), expect, epsilon = 1e-14);
        let sup = TargetSeq::sup(vec![c(3.0, 0.0), c(0.0, -4.0)]);
        assert_eq!(seq_norm(&sup, &a2, &params).unwrap(), 4.0);
        assert!(seq_norm(&one, &a2, &params).is_err());
    }

    #[test]
    fn pairing_examples() {
        let params = SpaceParams::new(2, 2.0, 1.0).unwrap();
        let rule = build_ball_rule(2, 1.0, 12, 8).unwrap();
        let one = vec![Fun::constant(2, c(1.0, 0.0))];
        assert_relative_eq!(pairing_ball(&one, &one, &params, &rule).unwrap().re, 1.0 / 3.0, epsilon = 1e-14);
        let z2 = vec![Fun::from_poly(Poly::coordinate(2, 1))];
        assert!(pairing_ball(&vec![z1(2)], &z2, &params, &rule).unwrap().norm() < 1e-15);
        assert!(pairing_ball(&one, &[], &params, &rule).is_err());

        let sphere = build_sphere_rule(2, 8).unwrap();
        assert_relative_eq!(pairing_sphere(&one, &one, &sphere).unwrap().re, 1.0, epsilon = 1e-14);
        assert!(pairing_sphere(&vec![z1(2)], &z2, &sphere).unwrap().norm() < 1e-15);
        assert_relative_eq!(pairing_sphere(&vec![z1(2)], &vec![z1(2)], &sphere).unwrap().re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn pairing_is_bounded_by_dual_norms() {
        let mut rng = sampling::rng(11);
        let params = SpaceParams::new(2, 3.0, 1.0).unwrap();
        let dual = params.conjugate().unwrap();
        assert!((dual.alpha_p() - params.alpha_p()).abs() < 1e-14);
        let rule = build_ball_rule(2, params.weight_exponent(), 12, 10).unwrap();
        for _ in 0..10 {
            let u: Vec<Fun> = (0..3).map(|_| Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3))).collect();
            let v: Vec<Fun> = (0..3).map(|_| Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3))).collect();
            let lhs = pairing_ball(&u, &v, &params, &rule).unwrap().norm();
            let rhs = vector_norm(&u, &params, &rule).unwrap() * vector_norm(&v, &dual, &rule).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn self_pairing_is_squared_norm() {
        let mut rng = sampling::rng(5);
        let params = SpaceParams::new(2, 2.0, 1.5).unwrap();
        let rule = build_ball_rule(2, params.weight_exponent(), 12, 8).unwrap();
        let u: Vec<Fun> = (0..2).map(|_| Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3))).collect();
        let pair = pairing_ball(&u, &u, &params, &rule).unwrap();
        let norm = vector_norm(&u, &params, &rule).unwrap();
        assert!((pair.re - norm * norm).abs() < 1e-10 * (1.0 + pair.re));
        assert!(pair.im.abs() < 1e-12);
    }

    #[test]
    fn dbar_examples() {
        let z = BallPoint::new([c(0.2, -0.1), c(0.1, 0.3)]);
        let hol = Fun::from_poly(Poly::from_terms(2, [(MultiIndex::new([2, 1]), c(1.0, 2.0))]));
        for d in dbar_fd(&hol, &z, 1e-4).unwrap() {
            assert!(d.norm() < 1e-8);
        }
        let conj1 = Fun::smooth(2, |w| w.coords()[0].conj());
        let d = dbar_fd(&conj1, &z, 1e-4).unwrap();
        assert!((d[0] - 1.0).norm() < 1e-10 && d[1].norm() < 1e-12);
        let abs1 = Fun::smooth(2, |w| c(w.coords()[0].norm_sqr(), 0.0));
        let d = dbar_fd(&abs1, &z, 1e-4).unwrap();
        assert!((d[0] - z.coords()[0]).norm() < 1e-9 && d[1].norm() < 1e-12);
        let edge = BallPoint::from_real(&[0.99995, 0.0]);
        assert!(matches!(dbar_fd(&abs1, &edge, 1e-4), Err(Error::Margin { .. })));
    }

    #[test]
    fn dbar_fd_converges_at_second_order() {
        // holomorphic but not polynomial: the residual is pure truncation error
        let f = Fun::holomorphic(2, |w| (C64::new(1.0, 0.0) - w.coords()[0] * 0.9).inv());
        let g = Fun::smooth(2, move |w| f.eval(w) + c(w.coords()[1].norm_sqr().powi(2), 0.0));
        let z = BallPoint::new([c(0.5, 0.2), c(0.1, 0.3)]);
        let exact = 2.0 * z.coords()[1].norm_sqr() * z.coords()[1];
        let err = |h: f64| {
            let d = dbar_fd(&g, &z, h).unwrap();
            d[0].norm() + (d[1] - exact).norm()
        };
        let order = (err(2e-2) / err(1e-2)).log2();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn cauchy_gradient_matches_polynomial_derivative() {
        let mut rng = sampling::rng(8);
        let p = sampling::random_poly(&mut rng, 2, 0, 5);
        let z = BallPoint::new([c(0.3, 0.2), c(-0.4, 0.1)]);
        let f = Fun::holomorphic(2, {
            let p = p.clone();
            move |w| p.eval(w)
        });
        let num = f.holo_grad(&z);
        for (k, d) in num.iter().enumerate() {
            assert!((d - p.derivative(k).eval(&z)).norm() < 1e-11);
        }
    }

    #[test]
    fn gleason_parameter_range() {
        assert!(SpaceParams::new(2, 4.0, 0.0).unwrap().require_gleason().is_ok());
        assert!(SpaceParams::new(2, 4.0, 0.25).unwrap().require_gleason().is_ok());
        assert!(SpaceParams::new(2, 4.0, 0.1).unwrap().require_gleason().is_err());
        assert!(SpaceParams::new(2, 1.0, 1.0).unwrap().require_gleason().is_err());
    }
}
