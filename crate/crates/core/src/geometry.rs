//! Exact geometry of the unit ball of C^n: the defining function, the
//! Hermitian product, and the involutive automorphisms exchanging 0 and a.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A point of C^n, usually of the open ball. Dimension is fixed per instance.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: SmallVec<[C64; 4]>,
}

impl BallPoint {
    /// Unchecked constructor; any point of C^n.
    pub fn new(coords: impl IntoIterator<Item = C64>) -> Self {
        let coords: SmallVec<[C64; 4]> = coords.into_iter().collect();
        assert!(!coords.is_empty(), "dimension must be at least 1");
        Self { coords }
    }

    /// Checked constructor for points of the open ball.
    pub fn interior(coords: impl IntoIterator<Item = C64>) -> Result<Self> {
        let p = Self::new(coords);
        if !(p.norm_sq() < 1.0) {
            return Err(Error::OutsideBall { norm: p.norm() });
        }
        Ok(p)
    }

    /// Checked constructor for points of the closed ball (|z| = 1 allowed up to 1e-12).
    pub fn closed(coords: impl IntoIterator<Item = C64>) -> Result<Self> {
        let p = Self::new(coords);
        if p.norm_sq() > 1.0 + 1e-12 {
            return Err(Error::OutsideBall { norm: p.norm() });
        }
        Ok(p)
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)))
    }

    pub fn origin(n: usize) -> Self {
        Self::new(std::iter::repeat(ZERO).take(n))
    }

    /// The k-th standard basis vector e_k (0-based).
    pub fn basis(n: usize, k: usize) -> Self {
        Self::new((0..n).map(|i| if i == k { ONE } else { ZERO }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.coords
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coords.iter().map(|c| c * s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::new(self.coords.iter().map(|c| c * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a - b))
    }

    /// Copy with coordinate `k` shifted by `delta`.
    pub fn shifted(&self, k: usize, delta: C64) -> Self {
        let mut p = self.clone();
        p.coords[k] += delta;
        p
    }

    /// Projection onto the first `m` coordinates.
    pub fn truncate(&self, m: usize) -> Self {
        Self::new(self.coords[..m].iter().copied())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl fmt::Debug for BallPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BallPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn check_dims(z: &BallPoint, w: &BallPoint) -> Result<()> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: w.dim(),
        });
    }
    Ok(())
}

/// ρ(z) = 1 − |z|².
#[inline]
pub fn rho(z: &BallPoint) -> f64 {
    1.0 - z.norm_sq()
}

/// ⟨z, w⟩ = Σ z_j conj(w_j).
pub fn herm(z: &BallPoint, w: &BallPoint) -> Result<C64> {
    check_dims(z, w)?;
    Ok(herm_unchecked(z.coords(), w.coords()))
}

#[inline]
pub(crate) fn herm_unchecked(z: &[C64], w: &[C64]) -> C64 {
    let mut acc = ZERO;
    for (a, b) in z.iter().zip(w) {
        acc += a * b.conj();
    }
    acc
}

/// The involutive automorphism φ_a of the ball exchanging 0 and a.
#[derive(Clone, Debug)]
pub struct Automorphism {
    center: BallPoint,
    norm_sq: f64,
    s: f64,
}

impl Automorphism {
    pub fn new(center: BallPoint) -> Result<Self> {
        let norm_sq = center.norm_sq();
        if !(norm_sq < 1.0) {
            return Err(Error::BoundaryCenter {
                norm: norm_sq.sqrt(),
            });
        }
        Ok(Self {
            s: (1.0 - norm_sq).sqrt(),
            norm_sq,
            center,
        })
    }

    pub fn center(&self) -> &BallPoint {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// (1 − |a|²)^{1/2}
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rho_center(&self) -> f64 {
        1.0 - self.norm_sq
    }

    /// φ_a(z) = (a − P_a z − s_a Q_a z) / (1 − ⟨z, a⟩).
    pub fn apply(&self, z: &BallPoint) -> BallPoint {
        let a = self.center.coords();
        let zc = z.coords();
        debug_assert_eq!(a.len(), zc.len());
        if self.norm_sq == 0.0 {
            return z.scale_re(-1.0);
        }
        let za = herm_unchecked(zc, a);
        let denom = ONE - za;
        let proj = za / self.norm_sq;
        BallPoint::new(a.iter().zip(zc).map(|(&ai, &zi)| {
            let pz = ai * proj;
            let qz = zi - pz;
            (ai - pz - qz * self.s) / denom
        }))
    }

    /// Holomorphic Jacobian matrix D φ_a(z), rows indexed by output coordinate.
    pub fn jacobian_matrix(&self, z: &BallPoint) -> DMatrix<C64> {
        let n = self.dim();
        let a = self.center.coords();
        if self.norm_sq == 0.0 {
            return DMatrix::from_diagonal_element(n, n, -ONE);
        }
        let za = herm_unchecked(z.coords(), a);
        let denom = ONE - za;
        let phi = self.apply(z);
        DMatrix::from_fn(n, n, |i, k| {
            let p = a[i] * a[k].conj() / self.norm_sq;
            let l = if i == k { p + (ONE - p) * self.s } else { p - p * self.s };
            (-l + phi.coords()[i] * a[k].conj()) / denom
        })
    }

    /// Complex Jacobian determinant, (−1)^n ρ(a)^{(n+1)/2} / (1 − ⟨z, a⟩)^{n+1}.
    pub fn jacobian_det(&self, z: &BallPoint) -> C64 {
        let n = self.dim() as i32;
        let denom = ONE - herm_unchecked(z.coords(), self.center.coords());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.rho_center().powf(0.5 * (n + 1) as f64) / denom.powi(n + 1)
    }
}

/// φ_a(z) for a single evaluation.
pub fn moebius(a: &BallPoint, z: &BallPoint) -> Result<BallPoint> {
    check_dims(a, z)?;
    Ok(Automorphism::new(a.clone())?.apply(z))
}

/// J_c φ_a(z).
pub fn moebius_jacobian(a: &BallPoint, z: &BallPoint) -> Result<C64> {
    check_dims(a, z)?;
    Ok(Automorphism::new(a.clone())?.jacobian_det(z))
}

/// |φ_a(b)|, the pseudo-hyperbolic separation; symmetric in (a, b).
pub fn pseudo_hyperbolic(a: &BallPoint, b: &BallPoint) -> Result<f64> {
    check_dims(a, b)?;
    // 1 − |φ_a(b)|² = ρ(a)ρ(b)/|1 − ⟨b,a⟩|² avoids forming φ_a when a is near the boundary.
    let d = (ONE - herm_unchecked(b.coords(), a.coords())).norm_sqr();
    let one_minus = rho(a) * rho(b) / d;
    Ok((1.0 - one_minus).max(0.0).sqrt())
}

/// Largest |z| over the closed pseudo-hyperbolic ball {|φ_a| ≤ r}.
pub fn hyperball_outer_radius(a: &BallPoint, r: f64) -> f64 {
    let t = a.norm();
    (t + r) / (1.0 + t * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&BallPoint::origin(2)), 1.0);
        assert_abs_diff_eq!(rho(&BallPoint::from_real(&[0.6, 0.0])), 0.64, epsilon = 1e-15);
        let b = BallPoint::new([c(0.6, 0.0), c(0.0, 0.8)]);
        assert_abs_diff_eq!(rho(&b), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn herm_examples() {
        let z = BallPoint::new([c(0.3, 0.0), c(0.0, 0.4)]);
        assert_abs_diff_eq!(herm(&z, &z).unwrap().re, 0.25, epsilon = 1e-15);
        assert_eq!(herm(&z, &z).unwrap().im, 0.0);
        assert_eq!(
            herm(&BallPoint::basis(2, 0), &BallPoint::basis(2, 1)).unwrap(),
            ZERO
        );
        let v = herm(
            &BallPoint::new([c(0.0, 1.0), ZERO]),
            &BallPoint::new([c(0.5, 0.0), ZERO]),
        )
        .unwrap();
        assert_eq!(v, c(0.0, 0.5));
        assert!(herm(&BallPoint::origin(2), &BallPoint::origin(3)).is_err());
    }

    #[test]
    fn moebius_examples() {
        let a = BallPoint::new([c(0.3, -0.1), c(0.2, 0.4)]);
        let z = moebius(&a, &a).unwrap();
        assert!(z.norm() < 1e-15);
        let w = BallPoint::new([c(0.1, 0.2), c(-0.3, 0.05)]);
        let minus = moebius(&BallPoint::origin(2), &w).unwrap();
        assert_eq!(minus, w.scale_re(-1.0));
        // one-dimensional closed form (a − z)/(1 − āz)
        let v = moebius(&BallPoint::from_real(&[0.5]), &BallPoint::from_real(&[0.8])).unwrap();
        assert_abs_diff_eq!(v.coords()[0].re, -0.5, epsilon = 1e-15);
        assert!(moebius(&BallPoint::from_real(&[1.0, 0.0]), &w).is_err());
    }

    #[test]
    fn moebius_maps_zero_to_center_and_boundary_to_boundary() {
        let a = BallPoint::new([c(0.3, -0.1), c(0.2, 0.4)]);
        let phi = Automorphism::new(a.clone()).unwrap();
        assert!(phi.apply(&BallPoint::origin(2)).distance(&a) < 1e-15);
        let zeta = BallPoint::new([c(0.6, 0.0), c(0.0, 0.8)]);
        assert_abs_diff_eq!(phi.apply(&zeta).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_at_origin_center() {
        for n in 1..=3 {
            let phi = Automorphism::new(BallPoint::origin(n)).unwrap();
            let z = BallPoint::new((0..n).map(|k| c(0.1 * k as f64, 0.05)));
            let expect = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(phi.jacobian_det(&z).re, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobian_modulus_at_center() {
        let a = BallPoint::new([c(0.4, 0.1), c(-0.2, 0.3)]);
        let phi = Automorphism::new(a.clone()).unwrap();
        let expect = rho(&a).powf(-1.5);
        assert_abs_diff_eq!(phi.jacobian_det(&a).norm(), expect, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_det_matches_matrix_and_finite_differences() {
        let a = BallPoint::new([c(0.35, -0.2), c(0.1, 0.45)]);
        let z = BallPoint::new([c(-0.2, 0.1), c(0.3, 0.25)]);
        let phi = Automorphism::new(a).unwrap();
        let m = phi.jacobian_matrix(&z);
        assert!((m.determinant() - phi.jacobian_det(&z)).norm() < 1e-13);

        // central differences along the real axis of each coordinate
        let fd = |h: f64| {
            let mut j = DMatrix::<C64>::zeros(2, 2);
            for k in 0..2 {
                let p = phi.apply(&z.shifted(k, c(h, 0.0)));
                let q = phi.apply(&z.shifted(k, c(-h, 0.0)));
                for i in 0..2 {
                    j[(i, k)] = (p.coords()[i] - q.coords()[i]) / (2.0 * h);
                }
            }
            j.determinant()
        };
        let exact = phi.jacobian_det(&z);
        let e1 = (fd(1e-3) - exact).norm();
        let e2 = (fd(5e-4) - exact).norm();
        assert!(e1 < 1e-5, "{e1}");
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "observed order {order}");
    }

    #[test]
    fn outer_radius_of_hyperball() {
        let a = BallPoint::from_real(&[0.5, 0.0]);
        let r = 0.3;
        let phi = Automorphism::new(a.clone()).unwrap();
        // the farthest point lies on the ray through a
        let far = phi.apply(&BallPoint::from_real(&[-r, 0.0]));
        assert_abs_diff_eq!(far.norm(), hyperball_outer_radius(&a, r), epsilon = 1e-14);
    }
}
