//! Truncated multivariate power series with exact `Q(i)` coefficients.
//!
//! A [`TruncatedSeries`] lives over a [`SeriesRing`]: an ordered list of
//! variable names and a total-degree cutoff `N`. Every stored coefficient has
//! total degree `≤ N` and is nonzero. Products discard everything above `N`,
//! so identities proved in the ring hold "through degree `N`", minus one for
//! every derivative taken along the way.

mod implicit;
mod intform;
pub mod linalg;
mod substitute;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;

pub(crate) use intform::Graded;
use intform::{IntAcc, IntSeries};
pub(crate) use implicit::implicit_solve_graded;
pub use implicit::implicit_solve;
pub use substitute::{Substitution, SubstitutionMode};

/// Largest supported truncation order; exponents are stored as bytes.
pub const MAX_ORDER: u32 = 200;

/// Exponent vector, ordered by total degree first and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    degree: u16,
    exps: SmallVec<[u8; 12]>,
}

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        Self {
            degree: 0,
            exps: SmallVec::from_elem(0, nvars),
        }
    }

    pub fn new(exps: &[u32]) -> Self {
        let degree: u32 = exps.iter().sum();
        Self {
            degree: degree as u16,
            exps: exps.iter().map(|&e| e as u8).collect(),
        }
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut m = Self::zero(nvars);
        m.exps[var] = 1;
        m.degree = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.degree as u32
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn get(&self, var: usize) -> u32 {
        self.exps[var] as u32
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.exps.iter().map(|&e| e as u32).collect()
    }

    fn plus(&self, other: &Self) -> Self {
        Self {
            degree: self.degree + other.degree,
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    fn with(&self, var: usize, exp: u32) -> Self {
        let mut m = self.clone();
        m.degree = m.degree - m.exps[var] as u16 + exp as u16;
        m.exps[var] = exp as u8;
        m
    }

    /// Smallest index of the given degree in graded order.
    fn first_of_degree(nvars: usize, degree: u32) -> Self {
        Self {
            degree: degree as u16,
            exps: SmallVec::from_elem(0, nvars),
        }
    }
}

/// Ordered variable names plus the total-degree cutoff `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesRing {
    names: Vec<String>,
    order: u32,
}

impl SeriesRing {
    /// A user-facing ring. Requires distinct names and `2 ≤ N ≤ MAX_ORDER`.
    pub fn new<S: AsRef<str>>(names: &[S], order: u32) -> Result<Arc<Self>> {
        if order < 2 {
            return Err(Error::InvalidRing(format!(
                "truncation order must be at least 2, got {order}"
            )));
        }
        Self::build(names.iter().map(|s| s.as_ref().to_string()).collect(), order)
    }

    pub(crate) fn build(names: Vec<String>, order: u32) -> Result<Arc<Self>> {
        if order > MAX_ORDER {
            return Err(Error::InvalidRing(format!(
                "truncation order {order} exceeds {MAX_ORDER}"
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidRing(format!("duplicate variable `{a}`")));
            }
        }
        Ok(Arc::new(Self { names, order }))
    }

    /// Same variables, different cutoff. Unlike [`SeriesRing::new`] this
    /// allows orders below 2: derived objects carry their trusted degree as
    /// the ring order.
    pub fn with_order(&self, order: u32) -> Arc<Self> {
        Arc::new(Self {
            names: self.names.clone(),
            order,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

pub(crate) fn same_ring(a: &Arc<SeriesRing>, b: &Arc<SeriesRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A multivariate power series truncated at the ring's total degree.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ring: Arc<SeriesRing>,
    coeffs: BTreeMap<MultiIndex, GaussianRational>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.coeffs == other.coeffs
    }
}

impl TruncatedSeries {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        Self {
            ring: ring.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: GaussianRational) -> Self {
        let mut s = Self::zero(ring);
        s.insert(MultiIndex::zero(ring.nvars()), c);
        s
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::constant(ring, GaussianRational::one())
    }

    pub fn var(ring: &Arc<SeriesRing>, name: &str) -> Result<Self> {
        let i = ring.index_of(name)?;
        Ok(Self::var_at(ring, i))
    }

    pub(crate) fn var_at(ring: &Arc<SeriesRing>, i: usize) -> Self {
        Self::monomial(ring, MultiIndex::unit(ring.nvars(), i), GaussianRational::one())
    }

    pub fn monomial(ring: &Arc<SeriesRing>, idx: MultiIndex, c: GaussianRational) -> Self {
        let mut s = Self::zero(ring);
        s.insert(idx, c);
        s
    }

    /// Builds a series from `(exponents, coefficient)` pairs, summing repeats
    /// and dropping zero or over-degree terms.
    pub fn from_terms<I>(ring: &Arc<SeriesRing>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, GaussianRational)>,
    {
        let mut s = Self::zero(ring);
        for (exps, c) in terms {
            if exps.len() != ring.nvars() {
                return Err(Error::Contract(format!(
                    "exponent vector of length {} in a ring of {} variables",
                    exps.len(),
                    ring.nvars()
                )));
            }
            if exps.iter().any(|&e| e > MAX_ORDER) {
                return Err(Error::Contract("exponent too large".into()));
            }
            s.add_term(MultiIndex::new(&exps), &c);
        }
        Ok(s)
    }

    fn insert(&mut self, idx: MultiIndex, c: GaussianRational) {
        if idx.degree() <= self.ring.order && !c.is_zero() {
            self.coeffs.insert(idx, c);
        }
    }

    pub(crate) fn add_term(&mut self, idx: MultiIndex, c: &GaussianRational) {
        if idx.degree() > self.ring.order || c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&idx) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.coeffs.remove(&idx);
                }
            }
            None => {
                self.coeffs.insert(idx, c.clone());
            }
        }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn order(&self) -> u32 {
        self.ring.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> GaussianRational {
        self.coeffs.get(idx).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn coeff_of(&self, exps: &[u32]) -> GaussianRational {
        self.coeff(&MultiIndex::new(exps))
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&MultiIndex::zero(self.ring.nvars()))
    }

    /// Terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        self.coeffs.iter()
    }

    /// Terms of exactly total degree `d`.
    pub fn terms_of_degree(&self, d: u32) -> impl Iterator<Item = (&MultiIndex, &GaussianRational)> {
        let n = self.ring.nvars();
        self.coeffs
            .range(MultiIndex::first_of_degree(n, d)..MultiIndex::first_of_degree(n, d + 1))
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().map(|m| m.degree())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().map(|m| m.degree())
    }

    /// Homogeneous part of degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        Self {
            ring: self.ring.clone(),
            coeffs: self
                .terms_of_degree(d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Drops every term of degree above `order` and moves to the ring with
    /// that cutoff. Raising the order is refused: the missing terms are
    /// unknown, not zero.
    pub fn truncate(&self, order: u32) -> Result<Self> {
        if order > self.ring.order {
            return Err(Error::Truncation(format!(
                "cannot raise truncation order from {} to {order}",
                self.ring.order
            )));
        }
        let ring = self.ring.with_order(order);
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.degree() <= order)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            ring,
        })
    }

    /// Reinterprets the series over `target`, matching variables by name.
    /// Variables that occur in `self` must exist in `target`; terms above the
    /// target order are dropped.
    pub fn embed(&self, target: &Arc<SeriesRing>) -> Result<Self> {
        let map: Vec<Option<usize>> = self
            .ring
            .names
            .iter()
            .map(|n| target.index_of(n).ok())
            .collect();
        let mut out = Self::zero(target);
        for (k, v) in &self.coeffs {
            let mut idx = MultiIndex::zero(target.nvars());
            for (i, &e) in k.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| Error::UnknownVariable(self.ring.names[i].clone()))?;
                idx.exps[j] = e;
            }
            idx.degree = k.degree;
            out.insert(idx, v.clone());
        }
        Ok(out)
    }

    /// Sets the named variables to zero and drops them from the ring.
    pub fn restrict_zero(&self, vars: &[&str], target: &Arc<SeriesRing>) -> Result<Self> {
        let drop: Vec<usize> = vars
            .iter()
            .map(|v| self.ring.index_of(v))
            .collect::<Result<_>>()?;
        let mut out = Self::zero(target);
        for (k, v) in &self.coeffs {
            if drop.iter().all(|&i| k.exps[i] == 0) {
                let mut idx = MultiIndex::zero(target.nvars());
                for (i, &e) in k.exps.iter().enumerate() {
                    if e != 0 {
                        idx.exps[target.index_of(&self.ring.names[i])?] = e;
                    }
                }
                idx.degree = k.degree;
                out.insert(idx, v.clone());
            }
        }
        Ok(out)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(k.clone(), v);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(k.clone(), &-v);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_truncated(other, self.ring.order))
    }

    /// Product keeping only degrees `≤ max_degree` (and `≤ N`).
    pub(crate) fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        let max_degree = max_degree.min(self.ring.order);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ring);
        }
        let x = IntSeries::new(self.coeffs.iter());
        let y = IntSeries::new(other.coeffs.iter());
        let mut acc = IntAcc::default();
        intform::mul_into(&x, &y, max_degree, &mut acc);
        let den = &x.den * &y.den;
        Self {
            ring: self.ring.clone(),
            coeffs: intform::finish(acc, &den).collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Self {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative. Exact through degree `N − 1`.
    pub fn differentiate(&self, var: &str) -> Result<Self> {
        let i = self.ring.index_of(var)?;
        Ok(self.differentiate_at(i))
    }

    pub(crate) fn differentiate_at(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for (k, v) in &self.coeffs {
            let e = k.get(i);
            if e > 0 {
                let c = v * &GaussianRational::from(e as i64);
                out.coeffs.insert(k.with(i, e - 1), c);
            }
        }
        out
    }

    /// Multiplicative inverse via the degree recursion
    /// `c_d = −a₀⁻¹ Σ_{k≥1} a_k c_{d−k}`.
    pub fn inverse(&self) -> Result<Self> {
        let inv = Graded::from_series(self).inverse().ok_or_else(|| {
            Error::BadCoordinates("cannot invert a series with zero constant term".into())
        })?;
        Ok(inv.to_series(&self.ring))
    }

    /// Exact evaluation of the stored polynomial at a point.
    pub fn eval(&self, point: &[GaussianRational]) -> Result<GaussianRational> {
        if point.len() != self.ring.nvars() {
            return Err(Error::Contract(format!(
                "evaluation point has {} coordinates, ring has {} variables",
                point.len(),
                self.ring.nvars()
            )));
        }
        let mut powers: Vec<Vec<GaussianRational>> = point
            .iter()
            .map(|_| vec![GaussianRational::one()])
            .collect();
        let mut total = GaussianRational::zero();
        for (k, v) in &self.coeffs {
            let mut term = v.clone();
            for (i, &e) in k.exps.iter().enumerate() {
                let e = e as usize;
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap() * &point[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e];
            }
            total += &term;
        }
        Ok(total)
    }

    /// Conjugates every coefficient and permutes exponents: the exponent of
    /// variable `i` moves to variable `perm[i]`.
    pub fn conjugate_permuted(&self, perm: &[usize]) -> Self {
        let n = self.ring.nvars();
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, v)| {
                let mut idx = MultiIndex::zero(n);
                for (i, &e) in k.exps.iter().enumerate() {
                    idx.exps[perm[i]] = e;
                }
                idx.degree = k.degree;
                (idx, v.conj())
            })
            .collect();
        Self {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    /// Splits off the dependence on the variables in `block`:
    /// `self = Σ_β c_β(rest) · block^β`. Keys are exponent vectors over
    /// `block`; values live in `rest_ring`.
    pub(crate) fn split_by(
        &self,
        block: &[usize],
        rest_ring: &Arc<SeriesRing>,
        rest_map: &[Option<usize>],
    ) -> BTreeMap<Vec<u32>, TruncatedSeries> {
        let mut out: BTreeMap<Vec<u32>, TruncatedSeries> = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let beta: Vec<u32> = block.iter().map(|&i| k.get(i)).collect();
            let mut idx = MultiIndex::zero(rest_ring.nvars());
            let mut deg = 0u16;
            for (i, &e) in k.exps.iter().enumerate() {
                if let Some(j) = rest_map[i] {
                    idx.exps[j] = e;
                    deg += e as u16;
                }
            }
            idx.degree = deg;
            out.entry(beta)
                .or_insert_with(|| TruncatedSeries::zero(rest_ring))
                .insert(idx, v.clone());
        }
        out
    }
}

/// `a op b` with the structural ring check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn arith(a: &TruncatedSeries, b: &TruncatedSeries, op: ArithOp) -> Result<TruncatedSeries> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
    }
}

// Operator sugar for code that builds everything inside one ring. Mixing
// rings through an operator is a programming error and panics; use the
// `try_*` methods where rings come from outside.
impl<'a> Add<&'a TruncatedSeries> for &'a TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.try_add(o).expect("ring mismatch in `+`")
    }
}

impl<'a> Sub<&'a TruncatedSeries> for &'a TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.try_sub(o).expect("ring mismatch in `-`")
    }
}

impl<'a> Mul<&'a TruncatedSeries> for &'a TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.try_mul(o).expect("ring mismatch in `*`")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (t, (k, v)) in self.coeffs.iter().enumerate() {
            if t > 0 {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = k
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.ring.names[i].clone()
                    } else {
                        format!("{}^{}", self.ring.names[i], e)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "({v})")?;
            } else {
                write!(f, "({v})*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
