//! Holomorphic polynomials in n complex variables as sparse multi-index maps.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::geometry::{BallPoint, C64, ZERO};

/// Coefficients below this magnitude are dropped by [`Poly::prune`].
pub const PRUNE_EPS: f64 = 1e-15;

/// Multi-index θ ∈ ℕⁿ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new(exps: impl IntoIterator<Item = u32>) -> Self {
        Self(exps.into_iter().collect())
    }

    pub fn zero(n: usize) -> Self {
        Self(SmallVec::from_elem(0, n))
    }

    /// θ_k: 1 in slot k, 0 elsewhere.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[k] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// θ − η when η ≤ θ componentwise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = SmallVec::new();
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Self(out))
    }

    /// θ! = Π θ_j!
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// |θ|! / θ!
    pub fn multinomial(&self) -> f64 {
        factorial(self.degree()) / self.factorial()
    }

    /// All multi-indices of exactly degree `d`, lexicographically descending.
    pub fn of_degree(n: usize, d: u32) -> Vec<Self> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(d);
                out.push(MultiIndex::new(prefix.iter().copied()));
                prefix.pop();
                return;
            }
            for first in (0..=d).rev() {
                prefix.push(first);
                rec(n, d - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All multi-indices with |θ| ≤ d, graded.
    pub fn up_to_degree(n: usize, d: u32) -> Vec<Self> {
        (0..=d).flat_map(|k| Self::of_degree(n, k)).collect()
    }

    /// z^θ
    pub fn monomial(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (zi, &e) in z.iter().zip(&self.0) {
            if e > 0 {
                acc *= zi.powu(e);
            }
        }
        acc
    }

    fn key(&self) -> String {
        self.0
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.key())
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Sparse holomorphic polynomial Σ c_θ z^θ.
#[derive(Clone, PartialEq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<MultiIndex, C64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    /// The coordinate function z_k.
    pub fn coordinate(n: usize, k: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, k), C64::new(1.0, 0.0))
    }

    pub fn monomial(idx: MultiIndex, c: C64) -> Self {
        let mut p = Self::zero(idx.dim());
        p.add_term(idx, c);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, C64)>) -> Self {
        let mut p = Self::zero(n);
        for (idx, c) in terms {
            p.add_term(idx, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> C64 {
        self.terms.get(idx).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: C64) {
        assert_eq!(idx.dim(), self.n, "multi-index dimension");
        *self.terms.entry(idx).or_insert(ZERO) += c;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == ZERO)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, _)| i.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_EPS);
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), *c);
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                out.add_term(i.add(j), a * b);
            }
        }
        out.prune();
        out
    }

    /// ∂/∂z_k
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (idx, c) in &self.terms {
            let e = idx.exps()[k];
            if e == 0 {
                continue;
            }
            let mut lowered = idx.clone();
            lowered.0[k] -= 1;
            out.add_term(lowered, c * f64::from(e));
        }
        out
    }

    /// Homogeneous component of degree d.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.degree() == d)
                .map(|(i, c)| (i.clone(), *c))
                .collect(),
        }
    }

    pub fn eval(&self, z: &BallPoint) -> C64 {
        self.eval_slice(z.coords())
    }

    pub fn eval_slice(&self, z: &[C64]) -> C64 {
        debug_assert_eq!(z.len(), self.n);
        let d = self.degree() as usize;
        // powers[j][e] = z_j^e
        let powers: Vec<Vec<C64>> = z
            .iter()
            .map(|&zj| {
                let mut row = Vec::with_capacity(d + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=d {
                    row.push(acc);
                    acc *= zj;
                }
                row
            })
            .collect();
        self.terms
            .iter()
            .map(|(idx, c)| {
                idx.exps()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (j, &e)| acc * powers[j][e as usize])
            })
            .sum()
    }

    pub fn grad(&self, z: &BallPoint) -> Vec<C64> {
        (0..self.n).map(|k| self.derivative(k).eval(z)).collect()
    }

    /// Sum of |c_θ|.
    pub fn l1_coefficients(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i)z^{:?}", c.re, c.im, i)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<(String, [f64; 2])> = if self.terms.is_empty() {
            // keep the dimension recoverable from the keys
            vec![(MultiIndex::zero(self.n).key(), [0.0, 0.0])]
        } else {
            self.terms
                .iter()
                .map(|(i, c)| (i.key(), [c.re, c.im]))
                .collect()
        };
        let mut map = serializer.serialize_map(Some(entries.len()))?;
        for (k, v) in entries {
            map.serialize_entry(&k, &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, [f64; 2]> = BTreeMap::deserialize(deserializer)?;
        let mut n = None;
        let mut terms = Vec::with_capacity(raw.len());
        for (key, [re, im]) in raw {
            let exps = key
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| de::Error::custom(format!("bad multi-index `{key}`: {e}")))?;
            match n {
                None => n = Some(exps.len()),
                Some(m) if m != exps.len() => {
                    return Err(de::Error::custom(format!(
                        "inconsistent multi-index length in `{key}`"
                    )))
                }
                _ => {}
            }
            terms.push((MultiIndex::new(exps), C64::new(re, im)));
        }
        let n = n.ok_or_else(|| de::Error::custom("empty polynomial map has no dimension"))?;
        let mut p = Poly::from_terms(n, terms);
        p.terms.retain(|_, c| *c != ZERO);
        Ok(p)
    }
}
