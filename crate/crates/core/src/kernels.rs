//! Cauchy and weighted Bergman reproducing kernels and the isometries T_a.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::function::{Fun, SpaceParams};
use crate::geometry::{herm_unchecked, rho, Automorphism, BallPoint, C64, ONE};

/// Kernel data for B^p_α: the exponent n + αp and γ(n,p,α). In the Hardy case
/// (α = 0) these become the Cauchy–Szegő exponent n and constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelParams {
    pub space: SpaceParams,
    pub exponent: f64,
    pub gamma: f64,
}

impl KernelParams {
    pub fn new(space: SpaceParams) -> Result<Self> {
        space.validate()?;
        if space.p.is_infinite() {
            return Err(invalid("p", "kernels need finite p"));
        }
        let n = space.n as f64;
        if space.is_hardy() {
            return Ok(Self {
                space,
                exponent: n,
                gamma: 1.0,
            });
        }
        let ap = space.alpha_p();
        Ok(Self {
            space,
            exponent: n + ap,
            gamma: gamma_constant(space.n, ap),
        })
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    /// Exponent n/p + α of the weight k_a.
    pub fn isometry_exponent(&self) -> f64 {
        self.space.decay()
    }
}

/// γ = Γ(n+αp)/(Γ(αp)Γ(n+1)), the reciprocal of ∫ρ^{αp−1}dν_n.
pub fn gamma_constant(n: usize, alpha_p: f64) -> f64 {
    let n = n as f64;
    (ln_gamma(n + alpha_p) - ln_gamma(alpha_p) - ln_gamma(n + 1.0)).exp()
}

/// (1 − u)^{−s} on the principal branch, refusing Re(1 − u) ≤ 0.
pub fn inv_power(u: C64, s: f64) -> Result<C64> {
    let base = ONE - u;
    if !(base.re > 0.0) {
        return Err(Error::SingularKernel { re: base.re });
    }
    Ok(inv_power_unchecked(base, s))
}

/// base^{−s}, principal branch; the caller guarantees Re(base) > 0.
#[inline]
pub(crate) fn inv_power_unchecked(base: C64, s: f64) -> C64 {
    if s.fract() == 0.0 && s.abs() <= 64.0 {
        base.powi(-(s as i32))
    } else {
        (-s * base.ln()).exp()
    }
}

/// C(z, ξ) = (1 − ⟨z, ξ⟩)^{−n}.
pub fn cauchy_kernel(z: &BallPoint, xi: &BallPoint, n: usize) -> Result<C64> {
    if z.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: xi.dim(),
        });
    }
    inv_power(herm_unchecked(z.coords(), xi.coords()), n as f64)
}

/// K_z(w) = γ (1 − ⟨w, z⟩)^{−(n+αp)}.
pub fn bergman_kernel(z: &BallPoint, w: &BallPoint, kp: &KernelParams) -> Result<C64> {
    if kp.space.is_hardy() {
        return Err(invalid("alpha", "Bergman kernel needs αp > 0"));
    }
    reproducing_kernel(z, w, kp)
}

/// The reproducing kernel of the space of `kp`: Bergman for α > 0, Cauchy–Szegő for α = 0.
pub fn reproducing_kernel(z: &BallPoint, w: &BallPoint, kp: &KernelParams) -> Result<C64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: w.dim(),
        });
    }
    Ok(inv_power(herm_unchecked(w.coords(), z.coords()), kp.exponent)? * kp.gamma)
}

/// k_a(z) = (ρ(a)/(1 − ⟨z, a⟩)²)^{s} together with φ_a: the data of T_a.
#[derive(Clone, Debug)]
pub struct Isometry {
    phi: Automorphism,
    s: f64,
    log_rho: f64,
}

impl Isometry {
    pub fn new(a: &BallPoint, kp: &KernelParams) -> Result<Self> {
        if a.dim() != kp.n() {
            return Err(Error::DimensionMismatch {
                expected: kp.n(),
                got: a.dim(),
            });
        }
        let phi = Automorphism::new(a.clone())?;
        Ok(Self {
            log_rho: rho(a).ln(),
            s: kp.isometry_exponent(),
            phi,
        })
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.phi
    }

    pub fn weight(&self, z: &BallPoint) -> C64 {
        let base = ONE - herm_unchecked(z.coords(), self.phi.center().coords());
        (self.s * (C64::new(self.log_rho, 0.0) - 2.0 * base.ln())).exp()
    }

    /// ∇k_a(z) = 2s k_a(z) conj(a) / (1 − ⟨z, a⟩).
    pub fn weight_grad(&self, z: &BallPoint) -> Vec<C64> {
        let a = self.phi.center().coords();
        let base = ONE - herm_unchecked(z.coords(), a);
        let f = self.weight(z) * 2.0 * self.s / base;
        a.iter().map(|ak| f * ak.conj()).collect()
    }

    /// T_a f = k_a · (f ∘ φ_a).
    pub fn apply(&self, f: &Fun) -> Fun {
        let (me, g) = (self.clone(), f.clone());
        let out = Fun::holomorphic(f.dim(), move |z| me.weight(z) * g.eval(&me.phi.apply(z)));
        let out = if f.is_holomorphic() { out } else { as_smooth(out) };
        let out = if f.boundary_evaluable() { out.extends_to_boundary() } else { out };
        if !f.has_analytic_grad() {
            return out;
        }
        let (me, g) = (self.clone(), f.clone());
        out.with_grad(move |z| {
            let w = me.phi.apply(z);
            let k = me.weight(z);
            let fv = g.eval(&w);
            let df = g.holo_grad(&w);
            let jac = me.phi.jacobian_matrix(z);
            me.weight_grad(z)
                .into_iter()
                .enumerate()
                .map(|(col, dk)| {
                    let chain: C64 = df.iter().enumerate().map(|(l, d)| d * jac[(l, col)]).sum();
                    dk * fv + k * chain
                })
                .collect()
        })
    }
}

fn as_smooth(f: Fun) -> Fun {
    let g = f.clone();
    Fun::smooth(f.dim(), move |z| g.eval(z))
}

/// T_a(f) as a function.
pub fn t_a(f: &Fun, a: &BallPoint, kp: &KernelParams) -> Result<Fun> {
    Ok(Isometry::new(a, kp)?.apply(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::norm_pa;
    use crate::poly::{MultiIndex, Poly};
    use crate::quadrature::{build_ball_rule, build_sphere_rule, Quadrature};
    use crate::sampling;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kernel_examples() {
        let z0 = BallPoint::origin(2);
        let xi = BallPoint::from_real(&[1.0, 0.0]);
        assert_eq!(cauchy_kernel(&z0, &xi, 2).unwrap(), ONE);
        let z = BallPoint::from_real(&[0.5, 0.0]);
        assert_relative_eq!(cauchy_kernel(&z, &xi, 2).unwrap().re, 4.0, epsilon = 1e-14);
        assert!(cauchy_kernel(&xi, &xi, 2).is_err());

        let kp = KernelParams::new(SpaceParams::new(2, 2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(kp.gamma, 3.0, epsilon = 1e-13);
        let w = BallPoint::new([c(0.3, 0.2), c(-0.1, 0.5)]);
        assert_relative_eq!(bergman_kernel(&z0, &w, &kp).unwrap().re, 3.0, epsilon = 1e-13);
        let k1 = bergman_kernel(&z, &w, &kp).unwrap();
        let k2 = bergman_kernel(&w, &z, &kp).unwrap();
        assert!((k1 - k2.conj()).norm() < 1e-13);
        let hardy = KernelParams::new(SpaceParams::hardy(2, 2.0).unwrap()).unwrap();
        assert!(bergman_kernel(&z, &w, &hardy).is_err());
    }

    #[test]
    fn gamma_is_reciprocal_mass() {
        for n in 1..=3 {
            for ap in [0.5, 1.0, 2.0, 3.0, 4.5] {
                let mass = crate::quadrature::weighted_mass(n, ap - 1.0);
                assert_relative_eq!(gamma_constant(n, ap) * mass, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_kernel_reproduces() {
        let rule = build_sphere_rule(2, 24).unwrap();
        let h = Poly::from_terms(2, [(MultiIndex::new([2, 0]), ONE)]);
        let mut rng = sampling::rng(2);
        for _ in 0..10 {
            let z = sampling::ball_point(&mut rng, 2, 0.5);
            let v = rule
                .integrate(|xi| cauchy_kernel(&z, xi, 2).unwrap() * h.eval(xi))
                .unwrap();
            assert!((v - h.eval(&z)).norm() < 1e-6);
        }
    }

    #[test]
    fn bergman_kernel_reproduces() {
        let f = Poly::from_terms(2, [(MultiIndex::new([1, 1]), ONE)]);
        let mut rng = sampling::rng(4);
        for ap in [1.0, 2.0, 3.0] {
            let kp = KernelParams::new(SpaceParams::new(2, 2.0, ap / 2.0).unwrap()).unwrap();
            let rule = build_ball_rule(2, ap - 1.0, 32, 24).unwrap();
            for _ in 0..5 {
                let z = sampling::ball_point(&mut rng, 2, 0.5);
                let v = rule
                    .integrate(|w| f.eval(w) * bergman_kernel(&z, w, &kp).unwrap().conj())
                    .unwrap();
                assert!((v - f.eval(&z)).norm() <= 1e-4 * (1.0 + f.eval(&z).norm()));
            }
        }
    }

    #[test]
    fn isometry_identities() {
        let kp = KernelParams::new(SpaceParams::new(2, 3.0, 1.0).unwrap()).unwrap();
        let mut rng = sampling::rng(7);
        let f = Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3));
        for _ in 0..20 {
            let a = sampling::ball_point(&mut rng, 2, 0.8);
            let z = sampling::ball_point(&mut rng, 2, 0.8);
            let iso = Isometry::new(&a, &kp).unwrap();
            let w = iso.automorphism().apply(&z);
            assert!((iso.weight(&w) * iso.weight(&z) - 1.0).norm() < 1e-10);
            let tt = iso.apply(&iso.apply(&f));
            assert!((tt.eval(&z) - f.eval(&z)).norm() < 1e-8 * (1.0 + f.eval(&z).norm()));
        }
        let t0 = t_a(&f, &BallPoint::origin(2), &kp).unwrap();
        let z = BallPoint::new([c(0.1, 0.2), c(0.3, -0.1)]);
        assert!((t0.eval(&z) - f.eval(&z.scale_re(-1.0))).norm() < 1e-14);
    }

    #[test]
    fn isometry_gradient_matches_cauchy_formula() {
        let kp = KernelParams::new(SpaceParams::new(2, 2.0, 1.0).unwrap()).unwrap();
        let mut rng = sampling::rng(9);
        let f = Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 3));
        let a = BallPoint::new([c(0.4, 0.1), c(-0.2, 0.3)]);
        let tf = t_a(&f, &a, &kp).unwrap();
        let z = BallPoint::new([c(0.1, -0.3), c(0.2, 0.2)]);
        let analytic = tf.holo_grad(&z);
        let numeric = crate::function::cauchy_gradient(|w| tf.eval(w), &z);
        for (x, y) in analytic.iter().zip(&numeric) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn isometry_preserves_norms() {
        let mut rng = sampling::rng(13);
        let params = SpaceParams::new(2, 2.0, 1.0).unwrap();
        let kp = KernelParams::new(params).unwrap();
        let rule = build_ball_rule(2, params.weight_exponent(), 40, 40).unwrap();
        let f = Fun::from_poly(sampling::random_poly(&mut rng, 2, 0, 2));
        let a = BallPoint::new([c(0.3, 0.1), c(0.0, -0.2)]);
        let lhs = norm_pa(&t_a(&f, &a, &kp).unwrap(), &params, &rule).unwrap();
        let rhs = norm_pa(&f, &params, &rule).unwrap();
        assert!((lhs - rhs).abs() < 1e-4 * rhs, "{lhs} vs {rhs}");

        let hardy = SpaceParams::hardy(2, 2.0).unwrap();
        let kh = KernelParams::new(hardy).unwrap();
        let sr = build_sphere_rule(2, 40).unwrap();
        let lhs = norm_pa(&t_a(&f, &a, &kh).unwrap(), &hardy, &sr).unwrap();
        let rhs = norm_pa(&f, &hardy, &sr).unwrap();
        assert!((lhs - rhs).abs() < 1e-4 * rhs, "{lhs} vs {rhs}");
    }
}
