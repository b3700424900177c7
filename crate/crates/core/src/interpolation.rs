//! Finite interpolation: kernel and IRLS interpolants, the interpolation
//! constant, the Carleson product and Drury's linear extension.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{norm_pa, seq_norm, Fun, SpaceParams};
use crate::geometry::{herm_unchecked, rho, Automorphism, BallPoint, C64, ONE, ZERO};
use crate::kernels::{inv_power_unchecked, KernelParams};
use crate::poly::{MultiIndex, Poly};
use crate::quadrature::Quadrature;
use crate::sampling;
use crate::sequence::pseudo_distance;
pub use crate::sequence::{PointSeq, TargetMode, TargetSeq};

/// Largest accepted condition number of the diagonally scaled Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Σ_k c_k K_{a_k}(z), with K the reproducing kernel of the space.
#[derive(Clone, Debug)]
pub struct KernelSum {
    kp: KernelParams,
    centers: Arc<Vec<BallPoint>>,
    coeffs: Vec<C64>,
}

impl KernelSum {
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn centers(&self) -> &[BallPoint] {
        &self.centers
    }

    pub fn eval(&self, z: &BallPoint) -> C64 {
        let mut acc = ZERO;
        for (a, c) in self.centers.iter().zip(&self.coeffs) {
            let base = ONE - herm_unchecked(z.coords(), a.coords());
            acc += c * inv_power_unchecked(base, self.kp.exponent);
        }
        acc * self.kp.gamma
    }

    pub fn grad(&self, z: &BallPoint) -> Vec<C64> {
        let mut acc = vec![ZERO; z.dim()];
        let e = self.kp.exponent;
        for (a, c) in self.centers.iter().zip(&self.coeffs) {
            let base = ONE - herm_unchecked(z.coords(), a.coords());
            let f = c * inv_power_unchecked(base, e + 1.0) * (e * self.kp.gamma);
            for (g, ak) in acc.iter_mut().zip(a.coords()) {
                *g += f * ak.conj();
            }
        }
        acc
    }

    /// Squared space norm Σ c_j conj(c_k) K(a_k, a_j) = c* G c (exact for p = 2).
    pub fn norm_sq(&self) -> f64 {
        let g = gram(&self.centers, &self.kp);
        let c = DVector::from_column_slice(&self.coeffs);
        (c.adjoint() * &g * &c)[(0, 0)].re.max(0.0)
    }

    pub fn to_fun(&self) -> Fun {
        let (a, b) = (self.clone(), self.clone());
        Fun::holomorphic(self.kp.n(), move |z| a.eval(z))
            .with_grad(move |z| b.grad(z))
            .extends_to_boundary()
    }

    fn combine(parts: &[(&KernelSum, C64)]) -> KernelSum {
        let first = parts[0].0;
        let mut coeffs = vec![ZERO; first.coeffs.len()];
        for (ks, w) in parts {
            for (acc, c) in coeffs.iter_mut().zip(&ks.coeffs) {
                *acc += c * w;
            }
        }
        KernelSum {
            kp: first.kp,
            centers: first.centers.clone(),
            coeffs,
        }
    }
}

/// Gram matrix G_{jk} = K_{a_k}(a_j).
pub fn gram(points: &[BallPoint], kp: &KernelParams) -> DMatrix<C64> {
    let m = points.len();
    DMatrix::from_fn(m, m, |j, k| {
        let base = ONE - herm_unchecked(points[j].coords(), points[k].coords());
        inv_power_unchecked(base, kp.exponent) * kp.gamma
    })
}

/// Cholesky-ready Gram system, scaled by D = diag(G_kk^{−1/2}).
struct GramSystem {
    scale: Vec<f64>,
    chol: nalgebra::Cholesky<C64, nalgebra::Dyn>,
    scaled: DMatrix<C64>,
}

impl GramSystem {
    fn new(a: &PointSeq, kp: &KernelParams) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("points", "sequence is empty"));
        }
        let g = gram(a.points(), kp);
        let scale: Vec<f64> = (0..g.nrows()).map(|k| g[(k, k)].re.sqrt().recip()).collect();
        let scaled = DMatrix::from_fn(g.nrows(), g.ncols(), |j, k| g[(j, k)] * (scale[j] * scale[k]));
        let (lo, hi) = extreme_eigenvalues(&scaled);
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        let fail = || {
            let (i, j, _) = a.closest_pair().unwrap_or((0, 0, 0.0));
            Error::IllConditioned { cond, i, j }
        };
        if !(cond <= MAX_CONDITION) {
            return Err(fail());
        }
        let chol = scaled.clone().cholesky().ok_or_else(fail)?;
        Ok(Self { scale, chol, scaled })
    }

    /// Solve G c = λ with one step of iterative refinement.
    fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let b = DVector::from_iterator(rhs.len(), rhs.iter().zip(&self.scale).map(|(v, s)| v * *s));
        let mut y = self.chol.solve(&b);
        let r = &b - &self.scaled * &y;
        y += self.chol.solve(&r);
        y.iter().zip(&self.scale).map(|(v, s)| v * *s).collect()
    }
}

fn extreme_eigenvalues(h: &DMatrix<C64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(h.clone());
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn check_targets(a: &PointSeq, lambda: &TargetSeq, params: &SpaceParams) -> Result<()> {
    if a.len() != lambda.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: lambda.len(),
        });
    }
    if a.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: a.dim(),
        });
    }
    if let Some(i) = lambda.values().iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite {
            index: i,
            point: "target value".into(),
        });
    }
    Ok(())
}

/// f = Σ c_k K_{a_k} with G c = λ: the minimum-norm interpolant when p = 2,
/// and a valid interpolant for every p.
pub fn kernel_interpolant(a: &PointSeq, lambda: &TargetSeq, params: &SpaceParams) -> Result<KernelSum> {
    check_targets(a, lambda, params)?;
    let kp = KernelParams::new(*params)?;
    let sys = GramSystem::new(a, &kp)?;
    Ok(KernelSum {
        kp,
        centers: Arc::new(a.points().to_vec()),
        coeffs: sys.solve(lambda.values()),
    })
}

/// Minimum-norm interpolant as a function (kernel path; see `kernel_interpolant`).
pub fn min_norm_interpolant(a: &PointSeq, lambda: &TargetSeq, params: &SpaceParams) -> Result<Fun> {
    Ok(kernel_interpolant(a, lambda, params)?.to_fun())
}

/// max_k |f(a_k) − λ_k| / (1 + |λ_k|).
pub fn interpolation_error(f: &Fun, a: &PointSeq, lambda: &TargetSeq) -> f64 {
    a.points()
        .iter()
        .zip(lambda.values())
        .map(|(p, l)| (f.eval(p) - l).norm() / (1.0 + l.norm()))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IrlsOptions {
    pub degree: Option<u32>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            degree: None,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IrlsResult {
    pub poly: Poly,
    pub iterations: usize,
    pub converged: bool,
    /// Σ ω_i |f(x_i)|^p at the first and last iterate.
    pub initial_objective: f64,
    pub objective: f64,
}

/// Minimize the quadrature value of ‖f‖_{p,α}^p over polynomials of degree ≤ D
/// (default 2N) subject to f(a_k) = λ_k, by iteratively reweighted least squares.
pub fn irls_interpolant(
    a: &PointSeq,
    lambda: &TargetSeq,
    params: &SpaceParams,
    rule: &dyn Quadrature,
    opts: IrlsOptions,
) -> Result<IrlsResult> {
    check_targets(a, lambda, params)?;
    if !(params.p > 1.0 && params.p.is_finite()) {
        return Err(invalid("p", "IRLS needs 1 < p < ∞"));
    }
    // norm_pa performs the rule/space compatibility check
    norm_pa(&Fun::zero(params.n), params, rule)?;
    let n = params.n;
    let degree = opts.degree.unwrap_or(2 * a.len() as u32);
    let basis = MultiIndex::up_to_degree(n, degree);
    if basis.len() < a.len() {
        return Err(invalid("degree", "fewer monomials than interpolation constraints"));
    }
    let nodes = rule.nodes();
    let weights = rule.weights();
    let phi = DMatrix::from_fn(nodes.len(), basis.len(), |i, j| {
        basis[j].monomial(nodes[i].coords())
    });
    let cons = DMatrix::from_fn(a.len(), basis.len(), |k, j| basis[j].monomial(a.get(k).coords()));
    let m = basis.len();
    let kc = a.len();
    let rhs = DVector::from_iterator(m + kc, std::iter::repeat(ZERO).take(m).chain(lambda.values().iter().copied()));

    let solve = |u: &[f64]| -> Result<DVector<C64>> {
        let mut h = DMatrix::<C64>::zeros(m, m);
        for (i, ui) in u.iter().enumerate() {
            let row = phi.row(i);
            for r in 0..m {
                let pr = row[r].conj() * *ui;
                for s in 0..m {
                    h[(r, s)] += pr * row[s];
                }
            }
        }
        let mut kkt = DMatrix::<C64>::zeros(m + kc, m + kc);
        kkt.view_mut((0, 0), (m, m)).copy_from(&h);
        kkt.view_mut((0, m), (m, kc)).copy_from(&cons.adjoint());
        kkt.view_mut((m, 0), (kc, m)).copy_from(&cons);
        let sol = kkt
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Solver("singular KKT system".into()))?;
        Ok(sol.rows(0, m).into_owned())
    };
    let objective = |c: &DVector<C64>| -> (Vec<f64>, f64) {
        let vals = &phi * c;
        let mods: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        let obj = mods.iter().zip(weights).map(|(v, w)| w * v.powf(params.p)).sum();
        (mods, obj)
    };

    let mut c = solve(weights)?;
    let (mut mods, first) = objective(&c);
    let mut obj = first;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let peak = mods.iter().copied().fold(0.0, f64::max).max(1e-300);
        let floor = 1e-8 * peak;
        let u: Vec<f64> = mods
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v.max(floor).powf(params.p - 2.0))
            .collect();
        let next = solve(&u)?;
        let change = (&next - &c).norm() / c.norm().max(1e-300);
        c = next;
        let (m2, o2) = objective(&c);
        mods = m2;
        obj = o2;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let poly = Poly::from_terms(n, basis.iter().cloned().zip(c.iter().copied()));
    Ok(IrlsResult {
        poly,
        iterations,
        converged,
        initial_objective: first,
        objective: obj,
    })
}

/// Norm of the kernel interpolant: exact Gram form for p = 2, quadrature otherwise.
fn interpolant_norm(ks: &KernelSum, params: &SpaceParams, rule: Option<&dyn Quadrature>) -> Result<f64> {
    if params.p == 2.0 {
        return Ok(ks.norm_sq().sqrt());
    }
    let rule = rule.ok_or_else(|| invalid("rule", "p ≠ 2 needs a quadrature rule for norms"))?;
    norm_pa(&ks.to_fun(), params, rule)
}

/// Lower estimate of C_A: the largest ‖f‖_{p,α}/‖λ‖_{p,n/p+α} over random
/// targets (and, for p = 2, the extremal eigen-target, which makes the value
/// exact for the kernel interpolant).
pub fn interpolation_constant(
    a: &PointSeq,
    params: &SpaceParams,
    trials: usize,
    rule: Option<&dyn Quadrature>,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let kp = KernelParams::new(*params)?;
    let sys = GramSystem::new(a, &kp)?;
    let centers = Arc::new(a.points().to_vec());
    let eval = |lam: Vec<C64>| -> Result<f64> {
        let target = TargetSeq::weighted(lam);
        let denom = seq_norm(&target, a, params)?;
        if denom == 0.0 {
            return Ok(0.0);
        }
        let ks = KernelSum {
            kp,
            centers: centers.clone(),
            coeffs: sys.solve(target.values()),
        };
        Ok(interpolant_norm(&ks, params, rule)? / denom)
    };
    let mut rng = sampling::rng(seed);
    let mut targets: Vec<Vec<C64>> = (0..trials)
        .map(|_| {
            (0..a.len())
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    if params.p == 2.0 {
        targets.push(extremal_target(a, params, &kp));
    }
    let mut best: f64 = 0.0;
    for t in targets {
        best = best.max(eval(t)?);
    }
    Ok(best)
}

/// λ = D^{−1} v with v the top eigenvector of D^{−1} G^{−1} D^{−1}, D = diag ρ(a_k)^{n/2+α}.
fn extremal_target(a: &PointSeq, params: &SpaceParams, kp: &KernelParams) -> Vec<C64> {
    let s = params.decay();
    let d: Vec<f64> = a.points().iter().map(|p| rho(p).powf(s)).collect();
    let g = gram(a.points(), kp);
    // top eigenvector of D⁻¹G⁻¹D⁻¹ is the bottom eigenvector of D G D
    let dgd = DMatrix::from_fn(g.nrows(), g.ncols(), |j, k| g[(j, k)] * (d[j] * d[k]));
    let eig = SymmetricEigen::new(dgd);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    eig.eigenvectors.column(imin).iter().zip(&d).map(|(v, di)| v / *di).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CarlesonProduct {
    pub value: f64,
    /// Set when two nodes coincide (the product is then 0).
    pub coincident: Option<(usize, usize)>,
}

/// min_k ∏_{j≠k} |φ_{a_j}(a_k)|.
pub fn carleson_product(a: &PointSeq) -> CarlesonProduct {
    let pts = a.points();
    let mut best = f64::INFINITY;
    let mut coincident = None;
    for k in 0..pts.len() {
        let mut log_prod = 0.0;
        for j in 0..pts.len() {
            if j == k {
                continue;
            }
            let d = pseudo_distance(&pts[j], &pts[k]);
            if d == 0.0 {
                coincident.get_or_insert((j.min(k), j.max(k)));
            }
            log_prod += d.ln();
        }
        best = best.min(log_prod.exp());
    }
    CarlesonProduct {
        value: if best.is_finite() { best } else { 1.0 },
        coincident,
    }
}

/// Drury's basis: g_j(a_k) = λ^{jk} and β_j = (1/N) Σ_m λ^{−jm} g_m (indices 1..N).
#[derive(Clone, Debug)]
pub struct DruryBasis {
    pub size: usize,
    pub root: C64,
    pub g: Vec<KernelSum>,
    pub beta: Vec<KernelSum>,
    /// max_{j,k} |β_j(a_k) − δ_jk|.
    pub delta_residual: f64,
    /// max over probe points of |Σ|β_j|² − (1/N)Σ|g_m|²|.
    pub plancherel_residual: f64,
}

pub const DELTA_TOL: f64 = 1e-8;
pub const PLANCHEREL_TOL: f64 = 1e-10;
const PLANCHEREL_PROBES: usize = 100;

impl DruryBasis {
    pub fn beta_funs(&self) -> Vec<Fun> {
        self.beta.iter().map(|b| b.to_fun()).collect()
    }

    pub fn g_funs(&self) -> Vec<Fun> {
        self.g.iter().map(|b| b.to_fun()).collect()
    }

    /// max |Σ_j|β_j(z)|² − (1/N)Σ_m|g_m(z)|²| over `points`, relative to 1 + the right side.
    pub fn plancherel_at(&self, points: &[BallPoint]) -> f64 {
        let n = self.size as f64;
        points
            .iter()
            .map(|z| {
                let lhs: f64 = self.beta.iter().map(|b| b.eval(z).norm_sqr()).sum();
                let rhs: f64 = self.g.iter().map(|g| g.eval(z).norm_sqr()).sum::<f64>() / n;
                (lhs - rhs).abs() / (1.0 + rhs)
            })
            .fold(0.0, f64::max)
    }
}

pub fn drury_extension(a: &PointSeq, params: &SpaceParams, seed: u64) -> Result<DruryBasis> {
    if !(params.p >= 2.0) {
        return Err(invalid("p", "Drury's extension needs p ≥ 2"));
    }
    let size = a.len();
    let kp = KernelParams::new(*params)?;
    let sys = GramSystem::new(a, &kp)?;
    let centers = Arc::new(a.points().to_vec());
    let root = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / size as f64);
    let power = |e: i64| -> C64 {
        let e = e.rem_euclid(size as i64) as f64;
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * e / size as f64)
    };
    let g: Vec<KernelSum> = (1..=size as i64)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| {
            let targets: Vec<C64> = (1..=size as i64).map(|k| power(j * k)).collect();
            KernelSum {
                kp,
                centers: centers.clone(),
                coeffs: sys.solve(&targets),
            }
        })
        .collect();
    let inv_n = C64::new(1.0 / size as f64, 0.0);
    let beta: Vec<KernelSum> = (1..=size as i64)
        .map(|j| {
            let parts: Vec<(&KernelSum, C64)> = g
                .iter()
                .zip(1..=size as i64)
                .map(|(gm, m)| (gm, power(-j * m) * inv_n))
                .collect();
            KernelSum::combine(&parts)
        })
        .collect();
    let mut delta_residual: f64 = 0.0;
    for (j, b) in beta.iter().enumerate() {
        for (k, p) in a.points().iter().enumerate() {
            let target = if j == k { ONE } else { ZERO };
            delta_residual = delta_residual.max((b.eval(p) - target).norm());
        }
    }
    let mut basis = DruryBasis {
        size,
        root,
        g,
        beta,
        delta_residual,
        plancherel_residual: 0.0,
    };
    let mut rng = sampling::rng(seed);
    let probes: Vec<BallPoint> = (0..PLANCHEREL_PROBES)
        .map(|_| sampling::radial_uniform_point(&mut rng, params.n, 0.95))
        .collect();
    basis.plancherel_residual = basis.plancherel_at(&probes);
    if delta_residual > DELTA_TOL {
        return Err(Error::Invariant(format!("β_j(a_k) = δ_jk violated by {delta_residual:.3e}")));
    }
    if basis.plancherel_residual > PLANCHEREL_TOL {
        return Err(Error::Invariant(format!(
            "Plancherel identity violated by {:.3e}",
            basis.plancherel_residual
        )));
    }
    Ok(basis)
}

#[derive(Clone, Debug, Serialize)]
pub struct DruryBound {
    /// ‖Σ_j|β_j|²‖_{p/2,2α}.
    pub value: f64,
    /// C_A² [Σ_k ρ(a_k)^{n+αp}]^{2/p} with the supplied C_A.
    pub bound: f64,
}

/// Σ|β_j|² in the halved space against C_A² times the weighted mass; exact Gram norms for p = 2.
pub fn drury_bound(
    basis: &DruryBasis,
    a: &PointSeq,
    params: &SpaceParams,
    c_a: f64,
    rule: Option<&dyn Quadrature>,
) -> Result<DruryBound> {
    let value = if params.p == 2.0 {
        basis.beta.iter().map(|b| b.norm_sq()).sum()
    } else {
        let rule = rule.ok_or_else(|| invalid("rule", "p ≠ 2 needs a quadrature rule"))?;
        let funs = basis.beta_funs();
        crate::function::square_sum_norm(&funs, params, rule)?
    };
    let ap = params.alpha_p();
    let mass: f64 = a.points().iter().map(|p| rho(p).powf(params.n as f64 + ap)).sum();
    Ok(DruryBound {
        value,
        bound: c_a * c_a * mass.powf(2.0 / params.p),
    })
}

/// Lower estimate of the growth constant: max of
/// |h(z) − h(a)| ρ(a)^{n/p+α} / (‖h‖_{p,α} |φ_a(z)|) over random h, a and z with |φ_a(z)| < 1/2.
pub fn growth_probe(params: &SpaceParams, samples: usize, rule: &dyn Quadrature, seed: u64) -> Result<f64> {
    let mut rng = sampling::rng(seed);
    let s = params.decay();
    let n = params.n;
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let h = sampling::random_poly(&mut rng, n, 0, 3);
        let hf = Fun::from_poly(h.clone());
        let norm = norm_pa(&hf, params, rule)?;
        let a = sampling::radial_uniform_point(&mut rng, n, 0.9);
        let phi = Automorphism::new(a.clone())?;
        let w = sampling::ball_point(&mut rng, n, 0.5);
        let wn = w.norm();
        if wn == 0.0 || norm == 0.0 {
            continue;
        }
        let z = phi.apply(&w);
        let ratio = (h.eval(&z) - h.eval(&a)).norm() * rho(&a).powf(s) / (norm * wn);
        best = best.max(ratio);
    }
    Ok(best)
}
