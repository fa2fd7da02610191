//! Fraction-free kernels. A series is brought over one common denominator
//! `D` so that products accumulate Gaussian integers; each output coefficient
//! is reduced once at the end instead of after every addition.

use rustc_hash::FxHashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use std::sync::Arc;

use super::{MultiIndex, SeriesRing, TruncatedSeries};
use crate::scalar::gcd::{gcd, lcm, ratio};
use crate::scalar::wide::{gauss_mul_add, Cplx, Wide};
use crate::scalar::GaussianRational;

/// `(re + i·im) / D` per term, terms in graded order.
#[derive(Clone, Debug)]
pub(crate) struct IntSeries {
    pub den: BigInt,
    pub terms: Vec<(MultiIndex, BigInt, BigInt)>,
    /// `starts[d]..starts[d + 1]` indexes the terms of degree `d`.
    starts: Vec<usize>,
}

/// Common denominator of a list of rationals.
pub(crate) fn common_denominator<'a>(values: impl Iterator<Item = &'a BigRational>) -> BigInt {
    let mut den = BigInt::one();
    for v in values {
        if !v.denom().is_one() {
            den = lcm(&den, v.denom());
        }
    }
    den
}

fn scaled(r: &BigRational, den: &BigInt) -> BigInt {
    if r.is_zero() {
        BigInt::zero()
    } else if r.denom() == den {
        r.numer().clone()
    } else {
        r.numer() * (den / r.denom())
    }
}

impl IntSeries {
    pub fn new<'a>(terms: impl Iterator<Item = (&'a MultiIndex, &'a GaussianRational)> + Clone) -> Self {
        let den = common_denominator(terms.clone().flat_map(|(_, c)| [&c.re, &c.im]));
        let terms: Vec<_> = terms
            .map(|(k, c)| (k.clone(), scaled(&c.re, &den), scaled(&c.im, &den)))
            .collect();
        let top = terms.last().map(|t| t.0.degree() as usize).unwrap_or(0);
        let mut starts = vec![0usize; top + 2];
        for (k, _, _) in &terms {
            starts[k.degree() as usize + 1] += 1;
        }
        for d in 1..starts.len() {
            starts[d] += starts[d - 1];
        }
        Self { den, terms, starts }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Terms of degree `≤ d`.
    pub fn up_to(&self, d: u32) -> &[(MultiIndex, BigInt, BigInt)] {
        let d = (d as usize + 1).min(self.starts.len() - 1);
        &self.terms[..self.starts[d]]
    }
}

/// `acc += (a + bi)(c + di)`.
#[inline]
pub(crate) fn mul_add(acc: &mut (BigInt, BigInt), a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) {
    let (ar, ai) = (a.is_zero(), b.is_zero());
    let (br, bi) = (c.is_zero(), d.is_zero());
    if !ar && !br {
        acc.0 += a * c;
    }
    if !ai && !bi {
        acc.0 -= b * d;
    }
    if !ar && !bi {
        acc.1 += a * d;
    }
    if !ai && !br {
        acc.1 += b * c;
    }
}

pub(crate) type IntAcc = FxHashMap<MultiIndex, (BigInt, BigInt)>;

/// Accumulator for the hot product loops; see [`Wide`].
pub(crate) type WideAcc = FxHashMap<MultiIndex, (Wide, Wide)>;

pub(crate) fn limb_terms(terms: &[(MultiIndex, BigInt, BigInt)]) -> Vec<(&MultiIndex, Cplx)> {
    terms.iter().map(|(k, re, im)| (k, Cplx::new(re, im))).collect()
}

pub(crate) fn narrow(acc: WideAcc) -> IntAcc {
    acc.into_iter().map(|(k, (re, im))| (k, (re.to_bigint(), im.to_bigint()))).collect()
}

/// Terms of `x·y` of degree `≤ max_degree`, unscaled: the true coefficients
/// are the accumulated values over `x.den · y.den`.
pub(crate) fn mul_into(x: &IntSeries, y: &IntSeries, max_degree: u32, acc: &mut IntAcc) {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let limbs = limb_terms(large.up_to(max_degree));
    let mut wide = WideAcc::default();
    let mut scratch = Vec::new();
    for (ka, a, b) in small.up_to(max_degree) {
        let x = Cplx::new(a, b);
        let room = large.up_to(max_degree - ka.degree()).len();
        for (kb, y) in &limbs[..room] {
            let slot = wide.entry(ka.plus(kb)).or_default();
            gauss_mul_add(slot, &x, y, &mut scratch);
        }
    }
    for (k, (re, im)) in wide {
        let slot = acc.entry(k).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
        slot.0 += re.to_bigint();
        slot.1 += im.to_bigint();
    }
}

/// Reduces accumulated numerators over `den`, dropping zeros.
pub(crate) fn finish(acc: IntAcc, den: &BigInt) -> impl Iterator<Item = (MultiIndex, GaussianRational)> + '_ {
    acc.into_iter().filter_map(move |(k, (re, im))| {
        if re.is_zero() && im.is_zero() {
            return None;
        }
        Some((
            k,
            GaussianRational::new(ratio(re, den.clone()), ratio(im, den.clone())),
        ))
    })
}

/// Homogeneous polynomial `Σ (re + i·im)/D · x^k`, all terms of one degree.
#[derive(Clone, Debug)]
pub(crate) struct Homog {
    pub den: BigInt,
    pub terms: Vec<(MultiIndex, BigInt, BigInt)>,
}

impl Homog {
    pub fn empty() -> Self {
        Self {
            den: BigInt::one(),
            terms: Vec::new(),
        }
    }

    pub fn from_terms<'a>(terms: impl Iterator<Item = (&'a MultiIndex, &'a GaussianRational)> + Clone) -> Self {
        let den = common_denominator(terms.clone().flat_map(|(_, c)| [&c.re, &c.im]));
        let terms = terms
            .map(|(k, c)| (k.clone(), scaled(&c.re, &den), scaled(&c.im, &den)))
            .collect();
        Self { den, terms }
    }

    /// Drops zeros and divides out the content shared with the denominator.
    pub fn from_acc(acc: IntAcc, den: BigInt) -> Self {
        let terms: Vec<_> = acc
            .into_iter()
            .filter(|(_, (re, im))| !(re.is_zero() && im.is_zero()))
            .map(|(k, (re, im))| (k, re, im))
            .collect();
        if terms.is_empty() {
            return Self::empty();
        }
        let mut g = den.clone();
        for (_, re, im) in &terms {
            if g.is_one() {
                break;
            }
            if !re.is_zero() {
                g = gcd(&g, re);
            }
            if !g.is_one() && !im.is_zero() {
                g = gcd(&g, im);
            }
        }
        if g.is_one() {
            return Self { den, terms };
        }
        Self {
            den: &den / &g,
            terms: terms.into_iter().map(|(k, re, im)| (k, re / &g, im / &g)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rational_terms(&self) -> impl Iterator<Item = (MultiIndex, GaussianRational)> + '_ {
        self.terms.iter().map(|(k, re, im)| {
            (
                k.clone(),
                GaussianRational::new(
                    ratio(re.clone(), self.den.clone()),
                    ratio(im.clone(), self.den.clone()),
                ),
            )
        })
    }
}

/// Graded series: `parts[d]` is the degree-`d` component.
pub(crate) fn graded<'a>(
    terms: impl Iterator<Item = (&'a MultiIndex, &'a GaussianRational)>,
    order: u32,
) -> Vec<Homog> {
    let mut by_degree: Vec<Vec<(&MultiIndex, &GaussianRational)>> = vec![Vec::new(); order as usize + 1];
    for (k, c) in terms {
        by_degree[k.degree() as usize].push((k, c));
    }
    by_degree
        .into_iter()
        .map(|t| if t.is_empty() { Homog::empty() } else { Homog::from_terms(t.into_iter()) })
        .collect()
}

/// Sums of `(numerators, denominator)` pairs over one common denominator.
#[derive(Default)]
pub(crate) struct Combiner {
    parts: Vec<(IntAcc, BigInt)>,
}

impl Combiner {
    pub fn push(&mut self, acc: IntAcc, den: BigInt) {
        if !acc.is_empty() {
            self.parts.push((acc, den));
        }
    }

    /// Degree-`d` part of `x·y` for graded `x`, `y` (missing degrees are zero).
    pub fn push_product(&mut self, x: &[Homog], y: &[Homog], d: u32) {
        let d = d as usize;
        let pairs: Vec<(&Homog, &Homog)> = (0..=d)
            .filter_map(|a| Some((x.get(a)?, y.get(d - a)?)))
            .filter(|(p, q)| !p.is_empty() && !q.is_empty())
            .collect();
        if pairs.is_empty() {
            return;
        }
        let mut den = BigInt::one();
        for (p, q) in &pairs {
            den = lcm(&den, &(&p.den * &q.den));
        }
        let mut acc = WideAcc::default();
        let mut scratch = Vec::new();
        for (p, q) in pairs {
            let f = &den / (&p.den * &q.den);
            let (small, large) = if p.terms.len() <= q.terms.len() { (p, q) } else { (q, p) };
            let large = limb_terms(&large.terms);
            for (ka, a, b) in &small.terms {
                let x = if f.is_one() { Cplx::new(a, b) } else { Cplx::new(&(a * &f), &(b * &f)) };
                for (kb, y) in &large {
                    let slot = acc.entry(ka.plus(kb)).or_default();
                    gauss_mul_add(slot, &x, y, &mut scratch);
                }
            }
        }
        self.parts.push((narrow(acc), den));
    }

    pub fn finish(self) -> (IntAcc, BigInt) {
        let mut den = BigInt::one();
        for (_, d) in &self.parts {
            den = lcm(&den, d);
        }
        let mut out = IntAcc::default();
        for (acc, d) in self.parts {
            let f = &den / &d;
            for (k, (re, im)) in acc {
                let slot = out.entry(k).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
                if f.is_one() {
                    slot.0 += re;
                    slot.1 += im;
                } else {
                    slot.0 += re * &f;
                    slot.1 += im * &f;
                }
            }
        }
        (out, den)
    }
}

/// Series as graded fraction-free components, `parts.len() = order + 1`.
/// Intermediate results of long pipelines stay in this form so coefficients
/// are reduced to lowest terms only once, at the end.
#[derive(Clone, Debug)]
pub(crate) struct Graded {
    pub parts: Vec<Homog>,
}

impl Graded {
    pub fn zero(order: u32) -> Self {
        Self {
            parts: vec![Homog::empty(); order as usize + 1],
        }
    }

    pub fn from_series(s: &TruncatedSeries) -> Self {
        Self {
            parts: graded(s.coeffs.iter(), s.order()),
        }
    }

    pub fn order(&self) -> u32 {
        self.parts.len() as u32 - 1
    }

    /// Drops the components above `order` (never adds any).
    pub fn truncated(&self, order: u32) -> Self {
        Self {
            parts: self.parts.iter().take(order as usize + 1).cloned().collect(),
        }
    }

    pub fn to_series(&self, ring: &Arc<SeriesRing>) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(ring);
        for h in &self.parts {
            for (k, v) in h.rational_terms() {
                s.insert(k, v);
            }
        }
        s
    }

    pub fn constant(&self) -> GaussianRational {
        self.parts[0].rational_terms().next().map(|(_, v)| v).unwrap_or_else(GaussianRational::zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order().min(o.order());
        let parts = (0..=order)
            .map(|d| {
                let mut comb = Combiner::default();
                comb.push_product(&self.parts, &o.parts, d);
                let (acc, den) = comb.finish();
                Homog::from_acc(acc, den)
            })
            .collect();
        Self { parts }
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order().min(o.order()) as usize;
        let parts = (0..=order)
            .map(|d| {
                let mut comb = Combiner::default();
                comb.push(self.parts[d].to_acc(), self.parts[d].den.clone());
                comb.push(o.parts[d].to_acc(), o.parts[d].den.clone());
                let (acc, den) = comb.finish();
                Homog::from_acc(acc, den)
            })
            .collect();
        Self { parts }
    }

    pub fn neg(&self) -> Self {
        Self {
            parts: self
                .parts
                .iter()
                .map(|h| Homog {
                    den: h.den.clone(),
                    terms: h.terms.iter().map(|(k, re, im)| (k.clone(), -re, -im)).collect(),
                })
                .collect(),
        }
    }

    /// Multiplicative inverse via `c_d = −a₀⁻¹ Σ_{k≥1} a_k c_{d−k}`;
    /// `None` for a zero constant term.
    pub fn inverse(&self) -> Option<Self> {
        let inv0 = self.constant().inv()?;
        let nvars = self.parts[0].terms.first()?.0.len();
        let mut tail = self.parts.clone();
        tail[0] = Homog::empty();
        let c = Homog::from_terms(std::iter::once((&MultiIndex::zero(nvars), &inv0)));
        let (_, cr, ci) = &c.terms[0];
        let (cr, ci) = (-cr.clone(), -ci.clone());
        let mut out = vec![c.clone()];
        for d in 1..=self.order() {
            let mut comb = Combiner::default();
            comb.push_product(&tail, &out, d);
            let (acc, den) = comb.finish();
            let scaled: IntAcc = acc
                .into_iter()
                .map(|(k, (re, im))| {
                    let mut v = (BigInt::zero(), BigInt::zero());
                    mul_add(&mut v, &re, &im, &cr, &ci);
                    (k, v)
                })
                .collect();
            out.push(Homog::from_acc(scaled, den * &c.den));
        }
        Some(Self { parts: out })
    }
}

impl Homog {
    fn to_acc(&self) -> IntAcc {
        self.terms
            .iter()
            .map(|(k, re, im)| (k.clone(), (re.clone(), im.clone())))
            .collect()
    }
}
