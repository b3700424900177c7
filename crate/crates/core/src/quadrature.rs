//! Normalized integration over the ball (with radial weight ρ^c) and over the
//! sphere, plus the Forelli equality as a built-in cross-check.
//!
//! Sphere rules use the polyspherical parametrization ζ_j = √t_j e^{iφ_j}:
//! under σ_n the vector (t_1, …, t_n) is uniform on the simplex and the
//! phases are independent and uniform. Phases get equispaced rules, the
//! simplex gets collapsed-coordinate Gauss–Jacobi rules. Ball rules compose a
//! sphere rule with a Gauss–Jacobi rule in x = 2r² − 1 that carries the weight
//! (1 − r²)^c r^{2n−1}.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BallPoint, C64};

pub const DEFAULT_RADIAL: usize = 64;
pub const DEFAULT_ANGULAR: usize = 32;

const PAR_THRESHOLD: usize = 4096;

/// Gauss–Jacobi nodes and weights on [−1, 1] for the weight (1 − x)^α (1 + x)^β,
/// by Golub–Welsch on the Jacobi matrix. Nodes ascending.
pub fn gauss_jacobi(count: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if count == 0 {
        return Err(invalid("count", "need at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(invalid(
            "weight exponent",
            format!("Jacobi exponents must exceed −1 (got α = {alpha}, β = {beta})"),
        ));
    }
    let ab = alpha + beta;
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    if count == 1 {
        return Ok((vec![(beta - alpha) / (ab + 2.0)], vec![mu0]));
    }
    let mut t = DMatrix::<f64>::zeros(count, count);
    for k in 0..count {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        t[(k, k)] = diag;
        if k + 1 < count {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let b2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let b = b2.sqrt();
            t[(k, k + 1)] = b;
            t[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Legendre on [0, 1].
pub fn gauss_legendre_unit(count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_jacobi(count, 0.0, 0.0)?;
    Ok((
        x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        w.iter().map(|w| 0.5 * w).collect(),
    ))
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub(crate) fn pairwise_sum_re(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_re(&values[..mid]) + pairwise_sum_re(&values[mid..])
}

/// Common view of the ball and sphere rules.
pub trait Quadrature: Sync {
    fn dim(&self) -> usize;
    fn nodes(&self) -> &[BallPoint];
    fn weights(&self) -> &[f64];
    /// The radial exponent c of ρ^c for ball rules; `None` for sphere rules.
    fn weight_exponent(&self) -> Option<f64>;

    fn len(&self) -> usize {
        self.nodes().len()
    }

    fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    /// Σ w_i f(x_i), failing on the first non-finite node value.
    fn integrate<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(&BallPoint) -> C64 + Sync,
        Self: Sized,
    {
        integrate_nodes(self.nodes(), self.weights(), f)
    }
}

pub(crate) fn integrate_nodes<F>(nodes: &[BallPoint], weights: &[f64], f: F) -> Result<C64>
where
    F: Fn(&BallPoint) -> C64 + Sync,
{
    let eval = |(i, (x, w)): (usize, (&BallPoint, &f64))| -> Result<C64> {
        let v = f(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                point: x.to_string(),
            });
        }
        Ok(v * *w)
    };
    let terms: Result<Vec<C64>> = if nodes.len() >= PAR_THRESHOLD {
        nodes.par_iter().zip(weights).enumerate().map(eval).collect()
    } else {
        nodes.iter().zip(weights).enumerate().map(eval).collect()
    };
    Ok(pairwise_sum(&terms?))
}

/// Real-valued integral of a nonnegative density, no finiteness reporting.
pub(crate) fn integrate_real<Q, F>(rule: &Q, f: F) -> f64
where
    Q: Quadrature + ?Sized,
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let nodes = rule.nodes();
    let weights = rule.weights();
    let terms: Vec<f64> = if nodes.len() >= PAR_THRESHOLD {
        nodes.par_iter().zip(weights).map(|(x, w)| f(x) * w).collect()
    } else {
        nodes.iter().zip(weights).map(|(x, w)| f(x) * w).collect()
    };
    pairwise_sum_re(&terms)
}

/// Metadata echoed into reports.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RuleInfo {
    pub kind: &'static str,
    pub dim: usize,
    pub nodes: usize,
    pub radial_count: Option<usize>,
    pub angular_degree: usize,
    pub weight_exponent: Option<f64>,
}

/// Probability rule on ∂𝔹ⁿ, exact on ζ^θ conj(ζ)^η for |θ|, |η| ≤ degree.
#[derive(Clone, Debug)]
pub struct SphereRule {
    n: usize,
    degree: usize,
    nodes: Vec<BallPoint>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn info(&self) -> RuleInfo {
        RuleInfo {
            kind: "sphere",
            dim: self.n,
            nodes: self.nodes.len(),
            radial_count: None,
            angular_degree: self.degree,
            weight_exponent: None,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

impl Quadrature for SphereRule {
    fn dim(&self) -> usize {
        self.n
    }
    fn nodes(&self) -> &[BallPoint] {
        &self.nodes
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn weight_exponent(&self) -> Option<f64> {
        None
    }
}

/// Simplex rule for (t_1, …, t_n) uniform on {t ≥ 0, Σ t = 1}; weights sum to 1.
fn simplex_rule(n: usize, per_axis: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut points = vec![(Vec::<f64>::new(), 1.0, 1.0)]; // (t prefix, remaining mass, weight)
    for i in 0..n.saturating_sub(1) {
        // collapsed coordinate s_i carries the Jacobian factor (1 − s_i)^{n−2−i}
        let k = (n - 2 - i) as f64;
        let (x, w) = gauss_jacobi(per_axis, k, 0.0)?;
        let scale = 0.5f64.powf(k + 1.0);
        let mut next = Vec::with_capacity(points.len() * per_axis);
        for (prefix, rest, weight) in &points {
            for (xj, wj) in x.iter().zip(&w) {
                let s = 0.5 * (1.0 + xj);
                let mut t = prefix.clone();
                t.push(rest * s);
                next.push((t, rest * (1.0 - s), weight * wj * scale));
            }
        }
        points = next;
    }
    let total: f64 = points.iter().map(|p| p.2).sum();
    Ok(points
        .into_iter()
        .map(|(mut t, rest, w)| {
            t.push(rest);
            (t, w / total)
        })
        .collect())
}

/// Product rule on ∂𝔹ⁿ exact to the declared degree (see module docs).
pub fn build_sphere_rule(n: usize, degree: usize) -> Result<SphereRule> {
    if n == 0 || n > 6 {
        return Err(invalid("n", format!("sphere rules support 1 ≤ n ≤ 6 (got {n})")));
    }
    let phases = degree + 1;
    let per_axis = (degree + 2) / 2;
    let simplex = simplex_rule(n, per_axis.max(1))?;
    let unit: Vec<C64> = (0..phases)
        .map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 / phases as f64))
        .collect();
    let phase_weight = (phases as f64).powi(n as i32).recip();
    let total_phase = phases.pow(n as u32);
    let mut nodes = Vec::with_capacity(simplex.len() * total_phase);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (t, w) in &simplex {
        let moduli: Vec<f64> = t.iter().map(|x| x.max(0.0).sqrt()).collect();
        for mut code in 0..total_phase {
            let mut coords = Vec::with_capacity(n);
            for m in &moduli {
                coords.push(unit[code % phases] * *m);
                code /= phases;
            }
            nodes.push(BallPoint::new(coords));
            weights.push(w * phase_weight);
        }
    }
    Ok(SphereRule {
        n,
        degree,
        nodes,
        weights,
    })
}

/// Tensor rule on 𝔹ⁿ for the measure ρ^c dν_n (ν_n normalized).
#[derive(Clone, Debug)]
pub struct BallRule {
    n: usize,
    c: f64,
    radial_count: usize,
    angular_degree: usize,
    nodes: Vec<BallPoint>,
    weights: Vec<f64>,
}

impl BallRule {
    pub fn info(&self) -> RuleInfo {
        RuleInfo {
            kind: "ball",
            dim: self.n,
            nodes: self.nodes.len(),
            radial_count: Some(self.radial_count),
            angular_degree: self.angular_degree,
            weight_exponent: Some(self.c),
        }
    }

    pub fn exponent(&self) -> f64 {
        self.c
    }
}

impl Quadrature for BallRule {
    fn dim(&self) -> usize {
        self.n
    }
    fn nodes(&self) -> &[BallPoint] {
        &self.nodes
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn weight_exponent(&self) -> Option<f64> {
        Some(self.c)
    }
}

pub fn build_ball_rule(
    n: usize,
    c: f64,
    radial_count: usize,
    angular_degree: usize,
) -> Result<BallRule> {
    if !(c > -1.0) {
        return Err(invalid(
            "weight exponent",
            format!("ρ^c is not integrable for c = {c} ≤ −1"),
        ));
    }
    let sphere = build_sphere_rule(n, angular_degree)?;
    let (x, w) = gauss_jacobi(radial_count, c, (n - 1) as f64)?;
    // ∫ ρ^c g dν = 2n ∫₀¹ r^{2n−1}(1−r²)^c S(r) dr, S the sphere mean; x = 2r² − 1
    let scale = 2.0 * n as f64 * 0.5f64.powf(c + n as f64 + 1.0);
    let mut nodes = Vec::with_capacity(x.len() * sphere.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (xi, wi) in x.iter().zip(&w) {
        let r = (0.5 * (1.0 + xi)).sqrt();
        for (zeta, ws) in sphere.nodes.iter().zip(&sphere.weights) {
            nodes.push(zeta.scale_re(r));
            weights.push(scale * wi * ws);
        }
    }
    Ok(BallRule {
        n,
        c,
        radial_count,
        angular_degree,
        nodes,
        weights,
    })
}

pub fn integrate_ball<F>(f: F, rule: &BallRule) -> Result<C64>
where
    F: Fn(&BallPoint) -> C64 + Sync,
{
    rule.integrate(f)
}

pub fn integrate_sphere<F>(f: F, rule: &SphereRule) -> Result<C64>
where
    F: Fn(&BallPoint) -> C64 + Sync,
{
    rule.integrate(f)
}

/// ∫_{𝔹ⁿ} ρ^c dν_n = Γ(n+1)Γ(c+1)/Γ(n+c+1).
pub fn weighted_mass(n: usize, c: f64) -> f64 {
    (ln_gamma(n as f64 + 1.0) + ln_gamma(c + 1.0) - ln_gamma(n as f64 + c + 1.0)).exp()
}

/// Both sides of the Forelli equality
/// ∫_{∂𝔹^{n+l}} g∘P_n dσ_{n+l} = C(n+l−1, n) ∫_{𝔹ⁿ} ρ^{l−1} g dν_n.
pub fn forelli_check<F>(g: F, n: usize, l: usize, sr: &SphereRule, br: &BallRule) -> Result<(C64, C64)>
where
    F: Fn(&BallPoint) -> C64 + Sync,
{
    if l == 0 {
        return Err(invalid("l", "Forelli equality needs l ≥ 1"));
    }
    if sr.dim() != n + l {
        return Err(Error::DimensionMismatch {
            expected: n + l,
            got: sr.dim(),
        });
    }
    if br.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: br.dim(),
        });
    }
    if (br.exponent() - (l as f64 - 1.0)).abs() > 1e-14 {
        return Err(invalid(
            "ball rule",
            format!("weight exponent must be l − 1 = {} (got {})", l - 1, br.exponent()),
        ));
    }
    let lhs = sr.integrate(|zeta| g(&zeta.truncate(n)))?;
    let coeff = crate::poly::binomial((n + l - 1) as u32, n as u32);
    let rhs = br.integrate(&g)? * coeff;
    Ok((lhs, rhs))
}

/// ∫_{∂𝔹ⁿ} |ζ^θ|² dσ = (n−1)! θ! / (n−1+|θ|)!.
pub fn sphere_moment(theta: &crate::poly::MultiIndex) -> f64 {
    let n = theta.dim() as u32;
    crate::poly::factorial(n - 1) * theta.factorial() / crate::poly::factorial(n - 1 + theta.degree())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiIndex;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_jacobi_integrates_beta_moments() {
        // x^k = Σ_j C(k,j)(1+x)^j(−1)^{k−j} turns each moment into Beta integrals
        // ∫(1−x)^a(1+x)^{b+j} dx = 2^{a+b+j+1} B(a+1, b+j+1)
        for (a, b) in [(0.5, 1.0), (0.0, 0.0), (2.0, -0.5), (-0.3, 3.0)] {
            let (x, w) = gauss_jacobi(9, a, b).unwrap();
            for k in 0..18i32 {
                let gj: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
                let terms: Vec<f64> = (0..=k)
                    .map(|j| {
                        let beta = (ln_gamma(a + 1.0) + ln_gamma(b + j as f64 + 1.0)
                            - ln_gamma(a + b + j as f64 + 2.0))
                        .exp();
                        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * crate::poly::binomial(k as u32, j as u32)
                            * 2f64.powf(a + b + j as f64 + 1.0)
                            * beta
                    })
                    .collect();
                let exact: f64 = terms.iter().sum();
                // the alternating sum loses digits in proportion to its largest term
                let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                assert!((gj - exact).abs() < 1e-13 * (1.0 + scale), "a={a} b={b} k={k}: {gj} vs {exact}");
            }
        }
    }

    #[test]
    fn odd_count_asymmetric_nodes_are_not_forced_to_zero() {
        let (x, _) = gauss_jacobi(5, 1.0, 0.0).unwrap();
        assert!(x[2].abs() > 1e-3);
    }

    #[test]
    fn sphere_rule_normalized_and_positive() {
        for n in 1..=3 {
            let r = build_sphere_rule(n, 8).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(r.weights().iter().all(|&w| w > 0.0));
            assert!(r.nodes().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn sphere_rule_monomial_moments() {
        for n in 1..=3 {
            let d = 6;
            let rule = build_sphere_rule(n, d).unwrap();
            let idx = MultiIndex::up_to_degree(n, d as u32);
            for th in &idx {
                for et in &idx {
                    let v = rule
                        .integrate(|z| th.monomial(z.coords()) * et.monomial(z.coords()).conj())
                        .unwrap();
                    let expect = if th == et { sphere_moment(th) } else { 0.0 };
                    assert!((v - expect).norm() < 1e-13, "n={n} {th:?} {et:?}: {v}");
                }
            }
        }
    }

    #[test]
    fn sphere_examples() {
        let rule = build_sphere_rule(2, 8).unwrap();
        assert_relative_eq!(rule.integrate(|_| C64::new(1.0, 0.0)).unwrap().re, 1.0, epsilon = 1e-14);
        let v = rule.integrate(|z| C64::new(z.coords()[0].norm_sqr(), 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.5, epsilon = 1e-14);
        let v = rule.integrate(|z| z.coords()[0] * z.coords()[1].conj()).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn ball_rule_examples() {
        let r = build_ball_rule(2, 1.0, 16, 8).unwrap();
        assert_relative_eq!(r.integrate(|_| C64::new(1.0, 0.0)).unwrap().re, 1.0 / 3.0, max_relative = 1e-13);
        let r0 = build_ball_rule(2, 0.0, 16, 8).unwrap();
        assert_relative_eq!(r0.integrate(|_| C64::new(1.0, 0.0)).unwrap().re, 1.0, max_relative = 1e-13);
        assert!(r0.integrate(|z| z.coords()[0]).unwrap().norm() < 1e-15);
        // ∫|w₁|² dν₂ = 1/(n+1) by symmetry, since Σ_k ∫|w_k|² dν_n = n/(n+1)
        let v = r0.integrate(|z| C64::new(z.coords()[0].norm_sqr(), 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0 / 3.0, max_relative = 1e-13);
        assert!(build_ball_rule(2, -1.0, 8, 4).is_err());
    }

    #[test]
    fn ball_moments_match_beta_integrals() {
        // ∫|w₁|^{2m} ρ^c dν_n = n! m! Γ(c+1)/Γ(n+m+c+1)
        for n in 1..=2usize {
            for c in [0.0, 1.0, 2.0, -0.5, 0.7] {
                let rule = build_ball_rule(n, c, 24, 10).unwrap();
                for m in 0..=4u32 {
                    let v = rule
                        .integrate(|z| C64::new(z.coords()[0].norm_sqr().powi(m as i32), 0.0))
                        .unwrap();
                    let expect = (ln_gamma(n as f64 + 1.0)
                        + ln_gamma(m as f64 + 1.0)
                        + ln_gamma(c + 1.0)
                        - ln_gamma(n as f64 + m as f64 + c + 1.0))
                    .exp();
                    assert_relative_eq!(v.re, expect, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn forelli_examples() {
        let sr = build_sphere_rule(4, 8).unwrap();
        let br = build_ball_rule(2, 1.0, 16, 8).unwrap();
        let (l, r) = forelli_check(|_| C64::new(1.0, 0.0), 2, 2, &sr, &br).unwrap();
        assert_relative_eq!(l.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.re, 1.0, epsilon = 1e-12);
        let (l, r) = forelli_check(|z| C64::new(crate::geometry::rho(z), 0.0), 2, 2, &sr, &br).unwrap();
        assert_relative_eq!(l.re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.re, 0.5, epsilon = 1e-12);
        assert!(forelli_check(|_| C64::new(1.0, 0.0), 2, 0, &sr, &br).is_err());
    }

    #[test]
    fn nonfinite_node_is_reported() {
        let rule = build_ball_rule(1, 0.0, 4, 4).unwrap();
        let err = rule.integrate(|_| C64::new(f64::NAN, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 0, .. }));
    }
}
