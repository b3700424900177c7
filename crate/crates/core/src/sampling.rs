//! Seeded random points and polynomials for probes and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Automorphism, BallPoint, C64};
use crate::poly::{MultiIndex, Poly};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the unit sphere of C^n.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> BallPoint {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return BallPoint::new(v.into_iter().map(|c| c / norm));
        }
    }
}

/// Uniform (Lebesgue) point of the Euclidean ball of radius `r` in C^n.
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> BallPoint {
    let u: f64 = rng.gen();
    let radius = r * u.powf(1.0 / (2 * n) as f64);
    sphere_point(rng, n).scale_re(radius)
}

/// Point whose modulus is uniform on [0, r).
pub fn radial_uniform_point<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> BallPoint {
    let radius = r * rng.gen::<f64>();
    sphere_point(rng, n).scale_re(radius)
}

/// Point distributed by the invariant measure ρ^{−(n+1)}dν restricted to {|z| < r}.
/// With s = |z|²/(1 − |z|²) that measure is ∝ s^{n−1}ds, so sⁿ is uniform.
pub fn hyperbolic_point<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> BallPoint {
    let s_max = r * r / (1.0 - r * r);
    let s = s_max * rng.gen::<f64>().powf(1.0 / n as f64);
    sphere_point(rng, n).scale_re((s / (1.0 + s)).sqrt())
}

/// Point of the pseudo-hyperbolic ball {|φ_a| < r}, obtained as φ_a of a uniform point of rB.
pub fn hyperball_point<R: Rng + ?Sized>(rng: &mut R, phi: &Automorphism, r: f64) -> BallPoint {
    phi.apply(&ball_point(rng, phi.dim(), r))
}

/// Random polynomial with standard complex Gaussian coefficients on every
/// monomial of degree in `min_degree..=degree`.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, n: usize, min_degree: u32, degree: u32) -> Poly {
    let mut p = Poly::zero(n);
    for idx in MultiIndex::up_to_degree(n, degree) {
        if idx.degree() < min_degree {
            continue;
        }
        let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        p.add_term(idx, c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_radii_follow_the_invariant_law() {
        let mut rng = rng(3);
        let (n, r, r0) = (2, 0.9, 0.6);
        let count = 20_000;
        let inside = (0..count).filter(|_| hyperbolic_point(&mut rng, n, r).norm() < r0).count();
        let s = |x: f64| x * x / (1.0 - x * x);
        let expect = (s(r0) / s(r)).powi(n as i32);
        assert!((inside as f64 / count as f64 - expect).abs() < 0.01, "{inside} vs {expect}");
    }
}
