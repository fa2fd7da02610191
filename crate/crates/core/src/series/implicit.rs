use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::intform::{common_denominator, graded, mul_add, Combiner, Graded, Homog, IntAcc};
use super::linalg;
use super::{MultiIndex, SeriesRing, TruncatedSeries};
use crate::error::{Error, Result};
use crate::scalar::gcd::lcm;
use crate::scalar::GaussianRational;

/// Solves `F(x, y(x)) ≡ 0` for `y(x)` with `y(0) = 0`, through the ring order.
///
/// The equations live in one ring containing both the unknowns and the
/// parameters `x`; the solution lives in the ring of the remaining variables
/// (same order, same relative variable order).
///
/// The solution is built one homogeneous degree at a time. Writing
/// `F = J₀·y + (higher)`, the degree-`d` part of `y` is
/// `−J₀⁻¹ [F(x, y_{<d})]_d`. Powers `y^β` needed by `F` are maintained
/// incrementally, so each is multiplied out once over the whole run.
pub fn implicit_solve(equations: &[TruncatedSeries], unknowns: &[&str]) -> Result<Vec<TruncatedSeries>> {
    let Some((ring, y)) = implicit_solve_graded(equations, unknowns)? else {
        return Ok(Vec::new());
    };
    Ok(y.iter().map(|g| g.to_series(&ring)).collect())
}

/// [`implicit_solve`] returning the solution ring and graded components.
pub(crate) fn implicit_solve_graded(
    equations: &[TruncatedSeries],
    unknowns: &[&str],
) -> Result<Option<(Arc<SeriesRing>, Vec<Graded>)>> {
    let Some(first) = equations.first() else {
        return Ok(None);
    };
    let ring = first.ring().clone();
    for f in equations {
        if !super::same_ring(f.ring(), &ring) {
            return Err(Error::RingMismatch);
        }
    }
    if equations.len() != unknowns.len() {
        return Err(Error::Contract(format!(
            "{} equations for {} unknowns",
            equations.len(),
            unknowns.len()
        )));
    }
    let m = unknowns.len();
    let block: Vec<usize> = unknowns.iter().map(|u| ring.index_of(u)).collect::<Result<_>>()?;
    let rest_names: Vec<String> = ring
        .names()
        .iter()
        .enumerate()
        .filter(|(i, _)| !block.contains(i))
        .map(|(_, n)| n.clone())
        .collect();
    let x_ring = SeriesRing::build(rest_names, ring.order())?;
    let mut rest_map = vec![None; ring.nvars()];
    let mut j = 0;
    for (i, slot) in rest_map.iter_mut().enumerate() {
        if !block.contains(&i) {
            *slot = Some(j);
            j += 1;
        }
    }

    let unit = |k: usize| -> Vec<u32> { (0..m).map(|i| u32::from(i == k)).collect() };
    let zero_beta = vec![0u32; m];
    let split: Vec<_> = equations.iter().map(|f| f.split_by(&block, &x_ring, &rest_map)).collect();

    for (i, parts) in split.iter().enumerate() {
        if let Some(c0) = parts.get(&zero_beta) {
            if !c0.constant_term().is_zero() {
                return Err(Error::Contract(format!(
                    "equation {i} does not vanish at the origin (value {})",
                    c0.constant_term()
                )));
            }
        }
    }

    let jac: linalg::Matrix = split
        .iter()
        .map(|parts| {
            (0..m)
                .map(|k| parts.get(&unit(k)).map(|c| c.constant_term()).unwrap_or_else(GaussianRational::zero))
                .collect()
        })
        .collect();
    let jac_inv = linalg::inverse(&jac).ok_or_else(|| Error::LeviDegenerate {
        determinant: linalg::determinant(&jac),
    })?;

    // Everything below runs on graded, fraction-free components.
    let order = ring.order();
    let split: Vec<BTreeMap<Vec<u32>, Vec<Homog>>> = split
        .iter()
        .map(|parts| {
            parts
                .iter()
                .map(|(b, c)| {
                    let mut g = graded(c.terms(), order);
                    if b.iter().sum::<u32>() == 1 {
                        // linear-in-y coefficients lose their constant part (in J₀)
                        g[0] = Homog::empty();
                    }
                    (b.clone(), g)
                })
                .collect()
        })
        .collect();

    // Close the set of needed nonlinear powers under "drop one factor".
    let mut needed: BTreeSet<(u32, Vec<u32>)> = BTreeSet::new();
    let mut stack: Vec<Vec<u32>> = split
        .iter()
        .flat_map(|parts| parts.keys().filter(|b| b.iter().sum::<u32>() >= 2).cloned())
        .collect();
    while let Some(b) = stack.pop() {
        let deg: u32 = b.iter().sum();
        if deg < 2 || !needed.insert((deg, b.clone())) {
            continue;
        }
        stack.push(parent(&b).1);
    }
    let needed: Vec<Vec<u32>> = needed.into_iter().map(|(_, b)| b).collect();
    let mut powers: HashMap<Vec<u32>, Vec<Homog>> = needed.iter().map(|b| (b.clone(), vec![Homog::empty()])).collect();

    // J₀⁻¹ = J/den over Gaussian integers
    let jden = common_denominator(jac_inv.iter().flatten().flat_map(|c| [&c.re, &c.im]));
    let jnum: Vec<Vec<(BigInt, BigInt)>> = jac_inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    let f = BigRational::from_integer(jden.clone());
                    ((&c.re * &f).to_integer(), (&c.im * &f).to_integer())
                })
                .collect()
        })
        .collect();

    let mut y: Vec<Vec<Homog>> = vec![vec![Homog::empty()]; m];
    for d in 1..=order {
        for b in &needed {
            let (i, p) = parent(b);
            let mut comb = Combiner::default();
            {
                let pv = if p.iter().sum::<u32>() == 1 {
                    &y[p.iter().position(|&e| e == 1).unwrap()]
                } else {
                    &powers[&p]
                };
                comb.push_product(&y[i], pv, d);
            }
            let (acc, den) = comb.finish();
            powers.get_mut(b).unwrap().push(Homog::from_acc(acc, den));
        }

        let mut residual: Vec<(IntAcc, BigInt)> = Vec::with_capacity(m);
        for parts in &split {
            let mut comb = Combiner::default();
            for (b, c) in parts {
                match b.iter().sum::<u32>() {
                    0 => {
                        let h = &c[d as usize];
                        let acc: IntAcc = h.terms.iter().map(|(k, re, im)| (k.clone(), (re.clone(), im.clone()))).collect();
                        comb.push(acc, h.den.clone());
                    }
                    1 => {
                        let k = b.iter().position(|&e| e == 1).unwrap();
                        comb.push_product(c, &y[k], d);
                    }
                    _ => comb.push_product(c, &powers[b], d),
                }
            }
            residual.push(comb.finish());
        }

        // y_d = −J₀⁻¹ r over the common denominator jden·lcm(R_i)
        let mut rden = BigInt::one();
        for (_, r) in &residual {
            rden = lcm(&rden, r);
        }
        let mut monomials: BTreeSet<MultiIndex> = BTreeSet::new();
        for (r, _) in &residual {
            monomials.extend(r.keys().cloned());
        }
        let zero = (BigInt::zero(), BigInt::zero());
        let factors: Vec<BigInt> = residual.iter().map(|(_, r)| &rden / r).collect();
        let mut out: Vec<IntAcc> = vec![IntAcc::default(); m];
        for mono in monomials {
            let rhs: Vec<(BigInt, BigInt)> = residual
                .iter()
                .zip(&factors)
                .map(|((r, _), f)| {
                    let (re, im) = r.get(&mono).unwrap_or(&zero);
                    (re * f, im * f)
                })
                .collect();
            for (k, row) in jnum.iter().enumerate() {
                let mut s = (BigInt::zero(), BigInt::zero());
                for ((jr, ji), (rr, ri)) in row.iter().zip(&rhs) {
                    mul_add(&mut s, jr, ji, rr, ri);
                }
                out[k].insert(mono.clone(), (-s.0, -s.1));
            }
        }
        let den = &jden * &rden;
        for (k, acc) in out.into_iter().enumerate() {
            y[k].push(Homog::from_acc(acc, den.clone()));
        }
    }
    Ok(Some((x_ring, y.into_iter().map(|parts| Graded { parts }).collect())))
}

/// `(i, β − e_i)` for the last nonzero slot `i` of `β`.
fn parent(b: &[u32]) -> (usize, Vec<u32>) {
    let i = b.iter().rposition(|&e| e > 0).expect("nonzero multi-index");
    let mut p = b.to_vec();
    p[i] -= 1;
    (i, p)
}
